#!/usr/bin/env python3
"""
LSIP Analysis
Feasibility, Slater and ENC checks, the canonical function of a solution
point and the order-q calmness certificate of the solution mapping.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from config.paths import LSIP_SETTINGS
from lib.errors import CombinatorialCapError, PreconditionError, UsageError
from lib.holder_calculus import LimitEstimate, LimitVerdict, derivative_sampler, subderivative_norm
from lib.lsip.lp_solver import LP_TOL, LpSolution, LpStatus, solve_lp
from lib.lsip.problem import LsipProblem, discretize
from lib.regularity_moduli import ModulusVerdict, RegularityReport, sharp_minimum_modulus
from lib.setmap_core import (
    DEFAULT_TOLERANCES, DirectionGrid, HolderOrder, ScalarFn, ScaleLadder, SetRepr,
    SetValuedMap, Tolerances, as_point, make_direction_grid, make_scale_ladder, sweep,
)

logger = logging.getLogger(__name__)


def _rhs(finite: LsipProblem, b) -> np.ndarray:
    if b is None:
        return finite.b
    b = np.asarray(b, dtype=float).reshape(-1)
    if b.size == 1:
        return np.full(finite.b.shape, float(b[0]))
    if b.size != finite.b.size:
        raise UsageError(f"Right-hand side has {b.size} entries, expected {finite.b.size}")
    return b


def active_tolerance(b: np.ndarray) -> float:
    return LSIP_SETTINGS['active_tol_scale'] * (1.0 + float(np.max(np.abs(b), initial=0.0)))


def feasibility_residual(x, b=None, problem: LsipProblem = None) -> float:
    """max over t of <a_t, x> - b_t on the discretised index set."""
    finite = discretize(problem)
    x = as_point(x, finite.n)
    rhs = _rhs(finite, b)
    if rhs.size == 0:
        return -math.inf
    return float(np.max(finite.A @ x - rhs))


def solve_problem(problem: LsipProblem, b=None, tol: float = LP_TOL) -> LpSolution:
    """Solve the discretised P(c, b)."""
    finite = discretize(problem)
    solution = solve_lp(finite.c, finite.A, _rhs(finite, b), tol=tol)
    logger.info(f"{finite.name}: LP {solution.status.value}, objective {solution.objective}")
    return solution


@dataclass
class SlaterReport:
    holds: bool
    witness: Optional[List[float]]
    slack: float

    def to_dict(self) -> Dict:
        return {'holds': self.holds, 'witness': self.witness, 'slack': self.slack}


def slater_check(problem: LsipProblem, box: float = LSIP_SETTINGS['slater_box']) -> SlaterReport:
    """max s subject to <a_t, x> + s <= b_t, ‖x‖∞ <= box, s <= 1."""
    finite = discretize(problem)
    n = finite.n
    A = np.hstack([finite.A, np.ones((finite.A.shape[0], 1))])
    eye = np.hstack([np.eye(n), np.zeros((n, 1))])
    cap = np.zeros((1, n + 1))
    cap[0, -1] = 1.0
    A_ub = np.vstack([A, eye, -eye, cap])
    b_ub = np.concatenate([finite.b, np.full(2 * n, box), [1.0]])
    cost = np.zeros(n + 1)
    cost[-1] = -1.0
    solution = solve_lp(cost, A_ub, b_ub)
    if solution.status != LpStatus.OPTIMAL:
        raise PreconditionError(f"Slater LP ended {solution.status.value}")
    s = float(solution.x[-1])
    return SlaterReport(holds=s > 1e-8, witness=solution.x[:n].tolist(), slack=s)


@dataclass
class ActiveSet:
    indices: List[int]
    values: List[float]


def active_indices(x, b=None, problem: LsipProblem = None, tol: Optional[float] = None) -> ActiveSet:
    """T_b(x) = {t : |<a_t, x> - b_t| <= tol}; x must be feasible within tol."""
    finite = discretize(problem)
    x = as_point(x, finite.n)
    rhs = _rhs(finite, b)
    tol = tol if tol is not None else active_tolerance(rhs)
    residual = finite.A @ x - rhs
    if residual.size and float(np.max(residual)) > tol:
        raise PreconditionError(f"Point {x.tolist()} violates a constraint by {float(np.max(residual)):.3e}")
    idx = [int(i) for i in np.flatnonzero(np.abs(residual) <= tol)]
    return ActiveSet(indices=idx, values=[float(finite.index_values[i]) for i in idx])


def in_level_set(problem: LsipProblem, x, alpha: float, b=None, tol: float = 1e-9) -> bool:
    """x ∈ L(alpha, b) = {x ∈ F(b) : <c, x> <= alpha}."""
    finite = discretize(problem)
    x = as_point(x, finite.n)
    return feasibility_residual(x, b, problem) <= tol and float(finite.c @ x) <= alpha + tol


def canonical_f(problem: LsipProblem, xbar, tol: Optional[float] = None) -> ScalarFn:
    """
    f(x) = max{<c, x - xbar>, sup_t (<a_t, x> - b_t)}.

    The continuum supremum is used when the curve has an exact support
    function and b is constant; otherwise the discretised maximum.
    """
    finite = discretize(problem)
    xbar = as_point(xbar, finite.n)
    c = finite.c
    tol = tol if tol is not None else active_tolerance(finite.b)
    if feasibility_residual(xbar, None, problem) > tol:
        raise PreconditionError(f"xbar={xbar.tolist()} is not feasible")

    family = problem.family
    exact = family is not None and family.support(np.zeros((1, finite.n))) is not None
    b0 = float(family.b_values(np.zeros(1))[0]) if exact else None

    def batch(X):
        lin = (X - xbar) @ c
        if exact:
            cons = family.support(X) - b0
        else:
            cons = np.max(X @ finite.A.T - finite.b, axis=1)
        return np.maximum(lin, cons)

    f = ScalarFn(n=finite.n, batch=batch, name=f"f[{problem.name}]",
                 domain_hint=np.column_stack([xbar - 1.0, xbar + 1.0]))
    value = f(xbar)
    if abs(value) > tol:
        raise PreconditionError(f"Canonical function does not vanish at xbar ({value:.3e})")
    return f


@dataclass
class EncReport:
    holds: bool
    slater: bool
    violating_subset: Optional[List[int]] = None
    violating_values: Optional[List[float]] = None
    active: List[int] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return {'holds': self.holds, 'slater': self.slater, 'violating_subset': self.violating_subset,
                'violating_values': self.violating_values, 'active': self.active}


def in_cone(target: np.ndarray, generators: np.ndarray, tol: float = 1e-9) -> bool:
    """target ∈ cone{generators}, tested by feasibility of γ >= 0, Σ γ_i g_i = target."""
    if generators.shape[0] == 0:
        return bool(np.linalg.norm(target) <= tol)
    solution = solve_lp(np.zeros(generators.shape[0]), A_eq=generators.T, b_eq=target, nonnegative=True)
    return solution.status == LpStatus.OPTIMAL


def enc_check(problem: LsipProblem, xbar, cap: int = 30) -> EncReport:
    """
    ENC holds when Slater holds and no D ⊂ T(xbar) with |D| < n has
    -c in cone{a_t : t ∈ D}.
    """
    finite = discretize(problem)
    xbar = as_point(xbar, finite.n)
    slater = slater_check(problem).holds
    if not slater:
        return EncReport(holds=False, slater=False)
    active = active_indices(xbar, None, problem)
    if len(active.indices) > cap:
        raise CombinatorialCapError(
            f"{len(active.indices)} active indices exceed the cap of {cap}; use a coarser active tolerance")
    target = -finite.c
    for size in range(finite.n):
        for subset in itertools.combinations(active.indices, size):
            if in_cone(target, finite.A[list(subset)]):
                logger.info(f"ENC fails: -c in cone of indices {list(subset)}")
                return EncReport(holds=False, slater=True, violating_subset=list(subset),
                                 violating_values=[float(finite.index_values[i]) for i in subset],
                                 active=active.indices)
    return EncReport(holds=True, slater=True, active=active.indices)


# ---------------------------------------------------------------------------
# Uniqueness and solution maps
# ---------------------------------------------------------------------------

def _face_spread(finite: LsipProblem, optimum: float) -> float:
    """Largest coordinate range over the optimal face."""
    A = np.vstack([finite.A, finite.c[None, :]])
    b = np.concatenate([finite.b, [optimum + 1e-10 * (1.0 + abs(optimum))]])
    spread = 0.0
    for i in range(finite.n):
        e = np.zeros(finite.n)
        e[i] = 1.0
        lo, hi = solve_lp(e, A, b), solve_lp(-e, A, b)
        if not (lo.is_optimal and hi.is_optimal):
            return math.inf
        spread = max(spread, float(hi.x[i] - lo.x[i]))
    return spread


def uniqueness_probe(problem: LsipProblem, xbar) -> Tuple[bool, Dict]:
    """
    Check that xbar solves the discretised problem and that the optimal
    face is a point (or, for parametric families, shrinks under refinement).
    """
    finite = discretize(problem)
    xbar = as_point(xbar, finite.n)
    solution = solve_problem(problem)
    if not solution.is_optimal:
        raise PreconditionError(f"Discretised problem is {solution.status.value}")
    opt = solution.objective
    tol_u = LSIP_SETTINGS['uniqueness_tol']
    if feasibility_residual(xbar, None, problem) > active_tolerance(finite.b) or \
            float(finite.c @ xbar) > opt + 1e-6 * (1.0 + abs(opt)):
        raise PreconditionError(f"xbar={xbar.tolist()} does not solve the problem (optimum {opt})")
    spread = _face_spread(finite, opt)
    details = {'optimum': opt, 'spread': spread}
    if spread <= tol_u:
        return True, details
    if problem.is_finite:
        return False, details
    refined = discretize(problem, 2 * finite.N)
    ref_solution = solve_lp(refined.c, refined.A, refined.b)
    spread_fine = _face_spread(refined, ref_solution.objective) if ref_solution.is_optimal else math.inf
    details['spread_refined'] = spread_fine
    return spread_fine <= 0.75 * spread + tol_u, details


def _nearest_solution(finite: LsipProblem, rhs: np.ndarray, xbar: np.ndarray) -> Optional[np.ndarray]:
    """Solution of P(c, rhs) closest to xbar in the l1 norm, None if none exists."""
    first = solve_lp(finite.c, finite.A, rhs)
    if not first.is_optimal:
        return None
    n = finite.n
    opt = first.objective
    eye = np.eye(n)
    A = np.vstack([
        np.hstack([finite.A, np.zeros((finite.A.shape[0], n))]),
        np.hstack([finite.c[None, :], np.zeros((1, n))]),
        np.hstack([eye, -eye]),
        np.hstack([-eye, -eye]),
    ])
    b = np.concatenate([rhs, [opt + 1e-9 * (1.0 + abs(opt))], xbar, -xbar])
    second = solve_lp(np.concatenate([np.zeros(n), np.ones(n)]), A, b)
    return second.x[:n] if second.is_optimal else first.x


def solution_map(problem: LsipProblem, xbar) -> SetValuedMap:
    """b ↦ S_c(b) for finite T, represented by its point nearest to xbar."""
    finite = discretize(problem)
    if not problem.is_finite:
        raise UsageError("The solution map over b is only built for finite index sets")
    xbar = as_point(xbar, finite.n)

    def image(b):
        x = _nearest_solution(finite, as_point(b, finite.b.size), xbar)
        return SetRepr.empty(finite.n) if x is None else SetRepr.singleton(x)

    return SetValuedMap(n=finite.b.size, m=finite.n, image=image, name=f"S[{problem.name}]")


# ---------------------------------------------------------------------------
# Certificates
# ---------------------------------------------------------------------------

@dataclass
class FiniteCriterion:
    """Outer norm of D_{1/q}S_c(b, xbar) over b-directions in the max norm."""
    applicable: bool
    outer: float = math.nan
    modulus: float = math.nan
    holds: Optional[bool] = None
    reason: str = ""

    def to_dict(self) -> Dict:
        return {'applicable': self.applicable, 'outer': self.outer, 'modulus': self.modulus,
                'holds': self.holds, 'reason': self.reason}


def finite_index_criterion(problem: LsipProblem, xbar, q: float,
                           ladder: Optional[ScaleLadder] = None,
                           tol: Tolerances = DEFAULT_TOLERANCES) -> FiniteCriterion:
    if not problem.is_finite:
        return FiniteCriterion(applicable=False, reason="not applicable: index set is not finite")
    if problem.T_size > 3:
        return FiniteCriterion(applicable=False, reason="not applicable: more than 3 indices")
    xbar = as_point(xbar, problem.n)
    S = solution_map(problem, xbar)
    ladder = ladder or make_scale_ladder(t0=1e-1, theta=0.5, K=8)
    grid = make_direction_grid(problem.T_size, M=16)
    H = derivative_sampler(S, np.concatenate([problem.b, xbar]), 1.0 / q, grid=grid, ladder=ladder, tol=tol)
    if not H.fixes_zero(tol):
        outer = math.inf
    else:
        ratios = [img.sup_norm() / float(np.max(np.abs(v))) ** (1.0 / q)
                  for v, img in zip(H.directions, H.images) if not img.is_empty]
        outer = max(ratios) if ratios else 0.0
    holds = outer < tol.eps_inf
    modulus = outer ** (-q) if 0 < outer < math.inf else (math.inf if outer == 0 else 0.0)
    return FiniteCriterion(applicable=True, outer=outer, modulus=modulus, holds=holds)


@dataclass
class CalmnessCertificate:
    """Order-q isolated calmness of the LSIP solution mapping."""
    q: float
    estimate: LimitEstimate
    certified: bool
    sharp: RegularityReport
    chain_agrees: bool
    unique: bool
    slater: SlaterReport
    finite_criterion: FiniteCriterion
    details: Dict = field(default_factory=dict)

    def to_dict(self) -> Dict:
        data = self.estimate.to_dict()
        data.update({
            'certified': self.certified,
            'verdict': "q-order isolated calmness certified" if self.certified else "not certified",
            'sharp_minimum': self.sharp.modulus,
            'sharp_verdict': self.sharp.verdict.value,
            'chain_agrees': self.chain_agrees,
            'unique': self.unique,
            'slater': self.slater.to_dict(),
            'finite_criterion': self.finite_criterion.to_dict(),
            'details': self.details,
        })
        return data


def calmness_certificate(problem: LsipProblem, xbar, q: Union[float, HolderOrder],
                         grid: Optional[DirectionGrid] = None,
                         ladder: Optional[ScaleLadder] = None,
                         tol: Tolerances = DEFAULT_TOLERANCES,
                         parallel: int = 1,
                         finite_check: bool = True) -> CalmnessCertificate:
    """‖f'_q(xbar; ·)‖_q of the canonical function; positive means calm of order q."""
    q = HolderOrder.of(q).q
    xbar = as_point(xbar, problem.n)
    slater = slater_check(problem)
    if not slater.holds:
        raise PreconditionError("Slater condition fails; the calmness characterisation does not apply")
    unique, details = uniqueness_probe(problem, xbar)
    if not unique:
        raise PreconditionError(f"Solution set is not the single point xbar (spread {details.get('spread')})")

    f = canonical_f(problem, xbar)
    estimate = subderivative_norm(f, xbar, q, grid=grid, ladder=ladder, tol=tol, parallel=parallel)
    sharp = sharp_minimum_modulus(f, xbar, q, grid=grid, tol=tol)
    certified = estimate.verdict in (LimitVerdict.POSITIVE, LimitVerdict.INFINITE)
    chain_agrees = certified == (sharp.verdict == ModulusVerdict.HOLDS)
    criterion = finite_index_criterion(problem, xbar, q, tol=tol) if finite_check else \
        FiniteCriterion(applicable=False, reason="skipped")
    logger.info(f"{problem.name}: ‖f'_{q}‖ = {estimate.value} -> "
                f"{'certified' if certified else 'not certified'}")
    return CalmnessCertificate(q=q, estimate=estimate, certified=certified, sharp=sharp,
                               chain_agrees=chain_agrees, unique=unique, slater=slater,
                               finite_criterion=criterion, details=details)


# ---------------------------------------------------------------------------
# Empirical calmness
# ---------------------------------------------------------------------------

PERTURBATION_PROFILES: Dict[str, Callable[[np.ndarray], np.ndarray]] = {
    'one': lambda t: np.ones_like(t),
    'minus_one': lambda t: -np.ones_like(t),
    'cos': np.cos,
    'sin': np.sin,
    'cos2': lambda t: np.cos(2 * t),
    'sin2': lambda t: np.sin(2 * t),
    'bump_pi': lambda t: np.exp(-((t - math.pi) / 0.3) ** 2),
    'bump_half_pi': lambda t: np.exp(-((t - math.pi / 2) / 0.3) ** 2),
}


@dataclass
class EmpiricalCalmness:
    q: float
    min_quotient: float
    witness: Optional[Dict]
    samples: int
    skipped: int

    def to_dict(self) -> Dict:
        return {'q': self.q, 'value': self.min_quotient, 'witness': self.witness,
                'samples': self.samples, 'skipped': self.skipped}


def empirical_calmness(problem: LsipProblem, xbar, q: Union[float, HolderOrder],
                       profiles: Optional[Dict[str, Callable]] = None,
                       deltas: Sequence[float] = tuple(LSIP_SETTINGS['perturbation_deltas']),
                       parallel: int = 1) -> EmpiricalCalmness:
    """min over profiles φ and δ of ‖δφ‖∞ / ‖x(δ) - xbar‖^q for P(c, b + δφ)."""
    q = HolderOrder.of(q).q
    finite = discretize(problem)
    xbar = as_point(xbar, finite.n)
    profiles = profiles or PERTURBATION_PROFILES
    if any(d <= 0 for d in deltas):
        raise UsageError("Perturbation sizes must be positive")
    jobs = [(name, float(d)) for name in profiles for d in deltas]

    def run(job):
        name, delta = job
        shift = delta * profiles[name](finite.index_values)
        x = _nearest_solution(finite, finite.b + shift, xbar)
        if x is None:
            return name, delta, None
        moved = float(np.linalg.norm(x - xbar))
        size = float(np.max(np.abs(shift)))
        return name, delta, (math.inf if moved == 0 else size / moved ** q)

    results = sweep(run, jobs, parallel)
    usable = [(n, d, v) for n, d, v in results if v is not None]
    skipped = len(results) - len(usable)
    if skipped:
        logger.warning(f"{skipped} perturbed problems were infeasible or unbounded and were skipped")
    if not usable:
        return EmpiricalCalmness(q=q, min_quotient=math.inf, witness=None, samples=0, skipped=skipped)
    name, delta, value = min(usable, key=lambda r: r[2])
    return EmpiricalCalmness(q=q, min_quotient=value, witness={'profile': name, 'delta': delta},
                             samples=len(usable), skipped=skipped)
