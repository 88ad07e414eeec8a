#!/usr/bin/env python3
"""
Penalty Thresholds
ℓ_p penalty functions of inequality-constrained problems and the r-level
above which a point is a sharp minimizer of the penalty function.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Union

import numpy as np

from lib.catalog import ProblemSpec, build_function, require_kind
from lib.errors import PreconditionError, UsageError
from lib.holder_calculus import (
    LimitEstimate, LimitVerdict, hadamard_derivative, hadamard_subderivative, subderivative_norm,
)
from lib.regularity_moduli import ModulusVerdict, RegularityReport, sharp_minimum_modulus
from lib.setmap_core import (
    DEFAULT_TOLERANCES, DirectionGrid, HolderOrder, ScalarFn, ScaleLadder, Tolerances, as_point,
    make_direction_grid, make_scale_ladder, positive_part, sweep,
)

logger = logging.getLogger(__name__)

ACTIVE_TOL = 1e-9
IDENTITY_RTOL = 2e-2
CONVENTIONS = ("two_sided", "domain")


class SufficiencyVerdict(Enum):
    SUFFICIENT = "sufficient"
    INSUFFICIENT = "insufficient"
    INCONCLUSIVE = "inconclusive"


@dataclass
class PenaltyProblem:
    """minimize f subject to g_i <= 0, penalised as f + r Σ (g_i⁺)^p."""
    f: ScalarFn
    g: List[ScalarFn]
    p: float
    r: float
    xbar: np.ndarray
    name: str = "penalty"
    convention: Optional[str] = None

    def __post_init__(self):
        if not (self.p > 0 and self.r > 0):
            raise UsageError(f"Penalty exponent and weight must be positive (p={self.p}, r={self.r})")
        if any(g.n != self.f.n for g in self.g):
            raise UsageError("Constraints and objective must share the dimension")
        self.xbar = as_point(self.xbar, self.f.n)
        values = [self.f(self.xbar)] + [g(self.xbar) for g in self.g]
        if not all(math.isfinite(v) for v in values):
            raise UsageError(f"xbar={self.xbar.tolist()} is outside the domain of f or some g_i")

    @property
    def n(self) -> int:
        return self.f.n

    def with_weight(self, r: float) -> "PenaltyProblem":
        return PenaltyProblem(f=self.f, g=self.g, p=self.p, r=r, xbar=self.xbar,
                              name=self.name, convention=self.convention)


def penalty_fn(problem: PenaltyProblem) -> ScalarFn:
    """ℓ_p(x) = f(x) + r Σ max{0, g_i(x)}^p."""
    f, gs, p, r = problem.f, problem.g, problem.p, problem.r

    def batch(pts):
        total = f.evaluate(pts)
        for g in gs:
            total = total + r * np.maximum(g.evaluate(pts), 0.0) ** p
        return total

    return ScalarFn(n=f.n, batch=batch, domain_hint=f.domain_hint,
                    name=f"ℓ_{problem.p:g}[{problem.name}, r={problem.r:g}]")


def active_inequalities(problem: PenaltyProblem, tol: float = ACTIVE_TOL) -> List[int]:
    """0-based indices i with |g_i(xbar)| <= tol."""
    return [i for i, g in enumerate(problem.g) if abs(g(problem.xbar)) <= tol]


def _subderivatives(f: ScalarFn, xbar: np.ndarray, q: float, grid: DirectionGrid,
                    ladder: ScaleLadder, tol: Tolerances, parallel: int) -> List[LimitEstimate]:
    return sweep(lambda u: hadamard_subderivative(f, xbar, u, q, ladder, tol), grid.points, parallel)


def kstar_sample(problem: PenaltyProblem, q: Union[float, HolderOrder],
                 grid: Optional[DirectionGrid] = None, ladder: Optional[ScaleLadder] = None,
                 tol: Tolerances = DEFAULT_TOLERANCES) -> List[List[float]]:
    """Unit grid directions x with f'_q(xbar; x) <= ε_pos."""
    q = HolderOrder.of(q).q
    grid = grid or make_direction_grid(problem.n)
    ladder = ladder or make_scale_ladder()
    values = _subderivatives(problem.f, problem.xbar, q, grid, ladder, tol, 1)
    return [u.tolist() for u, e in zip(grid.points, values) if e.value <= tol.eps_pos]


@dataclass
class PenaltyReport:
    """Threshold data at xbar: I(xbar), b, a, ρ₀ and the sufficiency verdict."""
    q: float
    p: float
    active: List[int]
    b: float
    a: float
    rho0: float
    kstar: List[List[float]]
    verdict: SufficiencyVerdict
    directional: List[Dict] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    @property
    def kstar_nonempty(self) -> bool:
        return bool(self.kstar)

    def to_dict(self) -> Dict:
        return {
            'reference': "sharp minimizers of the l_p penalty function for r above rho0",
            'q': self.q, 'p': self.p, 'active': self.active, 'b': self.b, 'a': self.a,
            'rho0': self.rho0, 'kstar': self.kstar, 'kstar_nonempty': self.kstar_nonempty,
            'verdict': self.verdict.value, 'directional': self.directional, 'notes': self.notes,
        }


def constraint_term(problem: PenaltyProblem, active: List[int], u: np.ndarray, q: float,
                    ladder: ScaleLadder, tol: Tolerances) -> float:
    """Σ over active i of [(g_i⁺)'_{q/p}(xbar; u)]^p."""
    total = 0.0
    for i in active:
        value = hadamard_subderivative(positive_part(problem.g[i]), problem.xbar, u,
                                       q / problem.p, ladder, tol).value
        total += max(value, 0.0) ** problem.p
    return total


def penalty_threshold(problem: PenaltyProblem, q: Union[float, HolderOrder],
                      grid: Optional[DirectionGrid] = None,
                      ladder: Optional[ScaleLadder] = None,
                      tol: Tolerances = DEFAULT_TOLERANCES,
                      parallel: int = 1) -> PenaltyReport:
    """
    b = min over the unit grid of f'_q(xbar; x), a = min over K* of the
    constraint term, ρ₀ = -b/a when K* is non-empty and 0 otherwise.
    """
    q = HolderOrder.of(q).q
    grid = grid or make_direction_grid(problem.n)
    ladder = ladder or make_scale_ladder()
    estimates = _subderivatives(problem.f, problem.xbar, q, grid, ladder, tol, parallel)
    values = [e.value for e in estimates]
    if any(v == -math.inf for v in values):
        raise PreconditionError(f"f'_{q}(xbar; ·) takes the value -inf: it is not proper")
    if all(v == math.inf for v in values):
        raise PreconditionError(f"f'_{q}(xbar; ·) is +inf in every sampled direction")

    active = active_inequalities(problem)
    b = float(min(values))
    kstar_idx = [k for k, v in enumerate(values) if v <= tol.eps_pos]
    terms = sweep(lambda k: constraint_term(problem, active, grid.points[k], q, ladder, tol),
                  kstar_idx, parallel)
    directional = [{'direction': grid.points[k].tolist(), 'f_sub': values[k], 'constraint_term': t}
                   for k, t in zip(kstar_idx, terms)]
    notes = []

    if not kstar_idx:
        a, rho0, verdict = math.inf, 0.0, SufficiencyVerdict.SUFFICIENT
        if b <= 10 * tol.eps_pos:
            verdict = SufficiencyVerdict.INCONCLUSIVE
            notes.append("K* sample is empty but min f'_q is at the positivity threshold")
    else:
        a = float(min(terms))
        if a <= tol.eps_pos:
            rho0, verdict = math.inf, SufficiencyVerdict.INSUFFICIENT
            notes.append("a direction in K* has vanishing constraint subderivatives")
        else:
            rho0 = max(-b / a, 0.0) if math.isfinite(a) else 0.0
            verdict = SufficiencyVerdict.SUFFICIENT

    logger.info(f"{problem.name}: I={active}, b={b}, a={a}, rho0={rho0} ({verdict.value})")
    return PenaltyReport(q=q, p=problem.p, active=active, b=b, a=a, rho0=rho0,
                         kstar=[grid.points[k].tolist() for k in kstar_idx], verdict=verdict,
                         directional=directional, notes=notes)


@dataclass
class PenaltyCheck:
    """Direct sharpness of ℓ_p against the threshold prediction."""
    r: float
    threshold: PenaltyReport
    sharp: RegularityReport
    norm: LimitEstimate
    consistent: bool

    @property
    def positive(self) -> bool:
        return self.sharp.verdict == ModulusVerdict.HOLDS and \
            self.norm.verdict in (LimitVerdict.POSITIVE, LimitVerdict.INFINITE)

    def to_dict(self) -> Dict:
        return {
            'reference': "l_p penalty sharp minimizer test, direct and by threshold",
            'r': self.r, 'threshold': self.threshold.to_dict(), 'sharp': self.sharp.to_dict(),
            'subderivative_norm': self.norm.to_dict(), 'positive': self.positive,
            'consistent': self.consistent,
        }


def sharp_penalty_check(problem: PenaltyProblem, q: Union[float, HolderOrder],
                        r: Optional[float] = None,
                        grid: Optional[DirectionGrid] = None,
                        ladder: Optional[ScaleLadder] = None,
                        tol: Tolerances = DEFAULT_TOLERANCES,
                        parallel: int = 1) -> PenaltyCheck:
    """shrp_q and ‖(ℓ_p)'_q‖ at xbar; r > ρ₀ with a sufficient verdict must give both positive."""
    q = HolderOrder.of(q).q
    problem = problem.with_weight(r) if r is not None else problem
    threshold = penalty_threshold(problem, q, grid, ladder, tol, parallel)
    ell = penalty_fn(problem)
    sharp = sharp_minimum_modulus(ell, problem.xbar, q, grid=grid, tol=tol)
    norm = subderivative_norm(ell, problem.xbar, q, grid=grid, ladder=ladder, tol=tol, parallel=parallel)
    check = PenaltyCheck(r=problem.r, threshold=threshold, sharp=sharp, norm=norm, consistent=True)
    if threshold.verdict == SufficiencyVerdict.SUFFICIENT and problem.r > threshold.rho0:
        check.consistent = check.positive
    if not check.consistent:
        logger.warning(f"{problem.name}: r={problem.r} > rho0={threshold.rho0} but the penalty "
                       f"function is not sharp at xbar")
    return check


@dataclass
class DominationCheck:
    direction: List[float]
    penalty_sub: float
    lower_bound: float
    holds: bool


def superadditivity_check(problem: PenaltyProblem, q: Union[float, HolderOrder],
                          grid: Optional[DirectionGrid] = None,
                          ladder: Optional[ScaleLadder] = None,
                          tol: Tolerances = DEFAULT_TOLERANCES) -> List[DominationCheck]:
    """(ℓ_p)'_q(xbar; x) >= f'_q(xbar; x) + r Σ [(g_i⁺)'_{q/p}(xbar; x)]^p on every grid direction."""
    q = HolderOrder.of(q).q
    grid = grid or make_direction_grid(problem.n)
    ladder = ladder or make_scale_ladder()
    ell = penalty_fn(problem)
    active = active_inequalities(problem)
    checks = []
    for u in grid.points:
        lhs = hadamard_subderivative(ell, problem.xbar, u, q, ladder, tol).value
        f_sub = hadamard_subderivative(problem.f, problem.xbar, u, q, ladder, tol).value
        rhs = f_sub + problem.r * constraint_term(problem, active, u, q, ladder, tol)
        if math.isinf(rhs) or math.isinf(lhs):
            holds = lhs >= rhs
        else:
            holds = lhs >= rhs - IDENTITY_RTOL * max(abs(lhs), abs(rhs), 1.0)
        checks.append(DominationCheck(direction=u.tolist(), penalty_sub=lhs, lower_bound=rhs, holds=bool(holds)))
    return checks


def power_identity_check(g: ScalarFn, xbar, u, q: float, p: float,
                         ladder: Optional[ScaleLadder] = None,
                         tol: Tolerances = DEFAULT_TOLERANCES) -> Dict:
    """[(g⁺)'_{q/p}(xbar; u)]^p against ((g⁺)^p)'_q(xbar; u)."""
    ladder = ladder or make_scale_ladder()
    plus = positive_part(g)
    powered = ScalarFn(n=g.n, batch=lambda pts: plus.evaluate(pts) ** p, domain_hint=g.domain_hint,
                       name=f"({plus.name})^{p:g}")
    lhs = max(hadamard_subderivative(plus, xbar, u, q / p, ladder, tol).value, 0.0) ** p
    rhs = hadamard_subderivative(powered, xbar, u, q, ladder, tol).value
    return {'lhs': lhs, 'rhs': rhs, 'pass': _close(lhs, rhs, IDENTITY_RTOL)}


def max_composition_check(g: ScalarFn, xbar, u, q: float,
                          ladder: Optional[ScaleLadder] = None,
                          tol: Tolerances = DEFAULT_TOLERANCES) -> Dict:
    """(g⁺)'_q(xbar; u) = max{0, g'_q(xbar; u)} for Hadamard differentiable g with g(xbar) = 0."""
    ladder = ladder or make_scale_ladder()
    derivative = hadamard_derivative(g, xbar, u, q, ladder)
    lhs = hadamard_subderivative(positive_part(g), xbar, u, q, ladder, tol).value
    rhs = max(0.0, float(derivative.value[0]))
    return {'lhs': lhs, 'rhs': rhs, 'differentiable': derivative.single_valued,
            'pass': (not derivative.single_valued) or _close(lhs, rhs, IDENTITY_RTOL)}


def _close(a: float, b: float, rel: float, zero: float = 1e-6) -> bool:
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= rel * max(abs(a), abs(b)) + zero


# ---------------------------------------------------------------------------
# Converse for a single constraint
# ---------------------------------------------------------------------------

@dataclass
class ConverseReport:
    """With f differentiable and m = 1, sharpness of ℓ_p forces the sufficiency condition."""
    f_differentiable: bool
    sharp_minimizer: bool
    condition_holds: bool
    consistent: bool
    failing_directions: List[List[float]] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return {'reference': "converse of the penalty threshold for one constraint",
                'f_differentiable': self.f_differentiable, 'sharp_minimizer': self.sharp_minimizer,
                'condition_holds': self.condition_holds, 'consistent': self.consistent,
                'failing_directions': self.failing_directions}


def sufficiency_condition(problem: PenaltyProblem, q: float, grid: DirectionGrid,
                          ladder: ScaleLadder, tol: Tolerances) -> List[List[float]]:
    """Directions where every active (g_i⁺)'_{q/p} vanishes but f'_q(xbar; ·) <= 0."""
    active = active_inequalities(problem)
    failing = []
    for u in grid.points:
        zero = all(hadamard_subderivative(positive_part(problem.g[i]), problem.xbar, u,
                                          q / problem.p, ladder, tol).value <= tol.eps_pos
                   for i in active)
        if zero and hadamard_subderivative(problem.f, problem.xbar, u, q, ladder, tol).value <= tol.eps_pos:
            failing.append(u.tolist())
    return failing


def converse_condition_check(problem: PenaltyProblem, q: Union[float, HolderOrder],
                             grid: Optional[DirectionGrid] = None,
                             ladder: Optional[ScaleLadder] = None,
                             tol: Tolerances = DEFAULT_TOLERANCES) -> ConverseReport:
    q = HolderOrder.of(q).q
    if len(problem.g) != 1 or problem.n != 1:
        raise UsageError("The converse check covers one constraint on R")
    grid = grid or make_direction_grid(1)
    ladder = ladder or make_scale_ladder()
    differentiable = all(hadamard_derivative(problem.f, problem.xbar, u, q, ladder).single_valued
                         for u in grid.points)
    sharp = sharp_minimum_modulus(penalty_fn(problem), problem.xbar, q, grid=grid, tol=tol)
    failing = sufficiency_condition(problem, q, grid, ladder, tol)
    is_sharp = sharp.verdict == ModulusVerdict.HOLDS
    consistent = not (differentiable and is_sharp) or not failing
    return ConverseReport(f_differentiable=differentiable, sharp_minimizer=is_sharp,
                          condition_holds=not failing, consistent=consistent,
                          failing_directions=failing)


# ---------------------------------------------------------------------------
# The power example: minimize x subject to x^{2s} <= 0
# ---------------------------------------------------------------------------

def power_example(s: float, p: float, r: float, convention: str = "two_sided") -> PenaltyProblem:
    """f = x, g = x^{2s} read as |x|^{2s} (two_sided) or with domain x >= 0 (domain)."""
    if s <= 0:
        raise UsageError("s must be positive")
    if convention == "two_sided":
        f = build_function({'family': 'linear', 'a': [1.0]}, 1)
        g = build_function({'family': 'abs_power', 'alpha': 2 * s})
    elif convention == "domain":
        f = build_function({'family': 'linear', 'a': [1.0], 'domain': [[0.0, None]]}, 1)
        g = build_function({'family': 'domain_power', 'alpha': 2 * s})
    else:
        raise UsageError(f"Convention must be one of {CONVENTIONS}, got {convention!r}")
    return PenaltyProblem(f=f, g=[g], p=p, r=r, xbar=[0.0], name=f"x^{2 * s:g} ({convention})",
                          convention=convention)


def closed_form_sharpness(s: float, p: float, r: float, convention: str = "two_sided") -> float:
    """shrp_1 ℓ_p(0) of the power example, by minimising (x + r|x|^{2sp}) / |x| over the domain."""
    sp = s * p
    if math.isclose(sp, 0.5, rel_tol=1e-12):
        return max(r - 1.0, 0.0) if convention == "two_sided" else r + 1.0
    if sp < 0.5:
        return math.inf
    return 0.0 if convention == "two_sided" else 1.0


def reference_sharpness(s: float, p: float, r: float) -> float:
    """The published table: +inf, r + 1 or 0 as sp is below, at or above 1/2."""
    sp = s * p
    if math.isclose(sp, 0.5, rel_tol=1e-12):
        return r + 1.0
    return math.inf if sp < 0.5 else 0.0


def compare_conventions(s: float, p: float, r: float, q: float = 1.0,
                        tol: Tolerances = DEFAULT_TOLERANCES) -> Dict:
    """Closed form and numeric shrp_q ℓ_p(0) under both conventions, against the published table."""
    reference = reference_sharpness(s, p, r)
    rows = {}
    for convention in CONVENTIONS:
        problem = power_example(s, p, r, convention)
        numeric = sharp_minimum_modulus(penalty_fn(problem), problem.xbar, q, tol=tol)
        closed = closed_form_sharpness(s, p, r, convention)
        rows[convention] = {
            'closed_form': closed,
            'numeric': numeric.modulus,
            'numeric_verdict': numeric.verdict.value,
            'matches_reference': _close(closed, reference, 1e-9),
            'numeric_matches_closed_form': _close(numeric.modulus, closed, 0.02, 1e-3),
        }
    mismatch = [c for c, row in rows.items() if not row['matches_reference']]
    if mismatch:
        logger.warning(f"s={s}, p={p}, r={r}: {', '.join(mismatch)} convention disagrees "
                       f"with the published value {reference}")
    return {'reference': "power example, minimize x subject to x^{2s} <= 0",
            's': s, 'p': p, 'r': r, 'q': q, 'published': reference,
            'conventions': rows, 'flagged': mismatch}


# ---------------------------------------------------------------------------
# Problem files
# ---------------------------------------------------------------------------

def build_penalty(spec: ProblemSpec, p: Optional[float] = None, r: Optional[float] = None) -> PenaltyProblem:
    """Penalty problem from {"kind": "penalty", "objective", "constraints", "p", "r", "xbar"}."""
    require_kind(spec, 'penalty')
    data = spec.data
    if 'example' in data:
        ex = data['example']
        return power_example(float(ex['s']), float(p or data.get('p', 1.0)), float(r or data.get('r', 1.0)),
                             ex.get('convention', 'two_sided'))
    n = int(data.get('n', 1))
    f = build_function(data.get('objective', {}), n)
    gs = [build_function(g, n) for g in data.get('constraints', [])]
    if not gs:
        raise UsageError("A penalty problem needs at least one constraint")
    return PenaltyProblem(f=f, g=gs, p=float(p or data.get('p', 1.0)), r=float(r or data.get('r', 1.0)),
                          xbar=data.get('xbar', [0.0] * n), name=spec.name)
