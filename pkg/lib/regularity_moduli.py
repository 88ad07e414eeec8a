#!/usr/bin/env python3
"""
Regularity Moduli
Annulus-based estimators for strong subregularity, isolated calmness and
sharp minimality, plus the derivative criteria that characterise them.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np

from lib.errors import PreconditionError, UsageError
from lib.holder_calculus import (
    HomogeneousSampler, LimitEstimate, LimitVerdict, default_cluster_tol, derivative_sampler,
    estimate_limit, graphical_derivative_image, hadamard_derivative_norm, norm_lower, norm_outer,
    norm_star,
)
from lib.setmap_core import (
    DEFAULT_TOLERANCES, GOLDEN_ANGLE, GRAPH_RESOLUTION, DirectionGrid, HolderOrder, ScalarFn,
    ScaleLadder, SetRepr, SetValuedMap, Tolerances, add_single_valued, as_point,
    compass_minimize, make_direction_grid, make_radii_ladder, make_scale_ladder,
    project_to_annulus, set_distance,
)

logger = logging.getLogger(__name__)

SAMPLES_PER_DIRECTION = 64
WITNESS_SAMPLES = 100
MODULUS_RTOL = 2e-2


class ModulusVerdict(Enum):
    """Outcome of a modulus estimate."""
    HOLDS = "holds"
    FAILS = "fails"
    INCONCLUSIVE = "inconclusive"


@dataclass
class RegularityReport:
    """Estimated regularity modulus with its annulus trace."""
    quantity: str
    modulus: float
    q: float
    radius: float
    witness: Optional[List[float]]
    trace: List[Tuple[float, float]]
    verdict: ModulusVerdict
    converged: bool = False
    witness_check: Optional[bool] = None
    isolated: Optional[bool] = None
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return {
            'quantity': self.quantity,
            'q': self.q,
            'value': self.modulus,
            'verdict': self.verdict.value,
            'converged': self.converged,
            'radius': self.radius,
            'witness': self.witness,
            'witness_check': self.witness_check,
            'isolated': self.isolated,
            'per_scale': [list(p) for p in self.trace],
            'notes': self.notes,
        }


def _annulus_points(xbar: np.ndarray, outer: float, inner: float, grid: DirectionGrid,
                    samples: int = SAMPLES_PER_DIRECTION) -> np.ndarray:
    """Low-discrepancy points with inner <= ‖x - xbar‖ <= outer."""
    j = np.arange(samples)
    radii = inner * (outer / inner) ** (j / max(samples - 1, 1))
    blocks = []
    for k, rho in enumerate(radii):
        dirs = grid.points
        if grid.n == 2:
            shift = ((k * GOLDEN_ANGLE / (2 * math.pi)) % 1.0) * 2 * math.pi / len(dirs)
            c, s = math.cos(shift), math.sin(shift)
            dirs = dirs @ np.array([[c, s], [-s, c]])
        blocks.append(xbar + rho * dirs)
    return np.vstack(blocks)


def _scan_annuli(quotient: Callable[[np.ndarray], np.ndarray], xbar: np.ndarray,
                 radii: ScaleLadder, grid: DirectionGrid, polish: bool = True,
                 stop_on_negative: bool = False, tol: Tolerances = DEFAULT_TOLERANCES
                 ) -> Tuple[List[Tuple[float, float]], List[np.ndarray], bool]:
    trace, witnesses = [], []
    for r in radii:
        inner = r * radii.theta
        pts = _annulus_points(xbar, r, inner, grid)
        vals = np.asarray(quotient(pts), dtype=float)
        vals = np.where(np.isnan(vals), np.inf, vals)
        i = int(np.argmin(vals))
        best, value = pts[i], float(vals[i])
        if stop_on_negative and value < -tol.tau_mem:
            trace.append((r, value))
            witnesses.append(best)
            return trace, witnesses, True
        if polish and math.isfinite(value):
            cand, polished = compass_minimize(
                quotient, best, step=0.1 * r,
                project=lambda p: project_to_annulus(p, xbar, inner, r), min_step=r * 1e-9)
            if polished < value:
                best, value = cand, polished
        if stop_on_negative and value < -tol.tau_mem:
            trace.append((r, value))
            witnesses.append(best)
            return trace, witnesses, True
        logger.debug(f"annulus r={r:.3e}: inf quotient {value}")
        trace.append((r, value))
        witnesses.append(best)
    return trace, witnesses, False


def _report_from_trace(quantity: str, q: float, trace, witnesses, radii: ScaleLadder,
                       tol: Tolerances) -> RegularityReport:
    value, verdict, converged = estimate_limit(trace, tol, rel_tol=MODULUS_RTOL)
    finite = [w for (_, v), w in zip(trace, witnesses) if math.isfinite(v)]
    witness = finite[-1].tolist() if finite else (witnesses[-1].tolist() if witnesses else None)
    radius = trace[-2][0] if len(trace) >= 2 else (trace[-1][0] if trace else 0.0)

    if verdict == LimitVerdict.INFINITE:
        modulus, outcome = math.inf, ModulusVerdict.HOLDS
    elif verdict in (LimitVerdict.ZERO, LimitVerdict.NEGATIVE, LimitVerdict.DIVERGENT):
        modulus, outcome = 0.0, ModulusVerdict.FAILS
    else:
        modulus = value
        outcome = ModulusVerdict.HOLDS if converged else ModulusVerdict.INCONCLUSIVE
    return RegularityReport(quantity=quantity, modulus=modulus, q=q, radius=radius,
                            witness=witness, trace=trace, verdict=outcome, converged=converged)


def _random_ball_points(xbar: np.ndarray, radius: float, count: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    n = xbar.size
    dirs = rng.normal(size=(count, n))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    rho = radius * (0.05 + 0.95 * rng.random(count)) ** (1.0 / n)
    return xbar + rho[:, None] * dirs


def _witness_recheck(report: RegularityReport, quotient: Callable[[np.ndarray], np.ndarray],
                     xbar: np.ndarray, tol: Tolerances, seed: int) -> RegularityReport:
    """Random points in the final neighbourhood must respect the reported modulus."""
    if report.verdict != ModulusVerdict.HOLDS or not math.isfinite(report.modulus):
        return report
    pts = _random_ball_points(xbar, report.radius, WITNESS_SAMPLES, seed)
    vals = np.asarray(quotient(pts), dtype=float)
    ok = bool(np.all(np.nan_to_num(vals, nan=np.inf) >= report.modulus * (1 - tol.slack) - tol.eps_pos))
    report.witness_check = ok
    if not ok:
        logger.warning(f"{report.quantity}: witness re-check failed, downgrading to inconclusive")
        report.verdict = ModulusVerdict.INCONCLUSIVE
        report.notes.append("witness re-check failed")
    return report


def strong_subregularity_modulus(F: SetValuedMap, base, q: Union[float, HolderOrder],
                                 radii: Optional[ScaleLadder] = None,
                                 grid: Optional[DirectionGrid] = None,
                                 tol: Tolerances = DEFAULT_TOLERANCES,
                                 seed: int = 0, polish: bool = True) -> RegularityReport:
    """srg_q F(xbar, ybar) = liminf over x → xbar of d(ybar, F(x)) / ‖x - xbar‖^q."""
    q = HolderOrder.of(q).q
    base = as_point(base, F.n + F.m)
    xbar, ybar = base[:F.n], base[F.n:]
    if set_distance(ybar, F(xbar)) > tol.tau_mem:
        raise PreconditionError(f"Base point is not on the graph of {F.name}")
    radii = radii or make_radii_ladder()
    grid = grid or make_direction_grid(F.n)

    def quotient(pts):
        dists = np.array([F(x).distance(ybar) for x in pts])
        return dists / np.linalg.norm(pts - xbar, axis=1) ** q

    trace, witnesses, _ = _scan_annuli(quotient, xbar, radii, grid, polish=polish, tol=tol)
    report = _report_from_trace("strong_subregularity", q, trace, witnesses, radii, tol)
    report = _witness_recheck(report, quotient, xbar, tol, seed)
    logger.info(f"srg_{q} {F.name}: {report.modulus} ({report.verdict.value})")
    return report


def isolated_calmness_modulus(S: SetValuedMap, base, q: Union[float, HolderOrder],
                              radii: Optional[ScaleLadder] = None,
                              resolution: int = GRAPH_RESOLUTION,
                              tol: Tolerances = DEFAULT_TOLERANCES,
                              seed: int = 0) -> RegularityReport:
    """
    clm_q S(ybar, xbar) = liminf over graph points (y, x) of ‖y - ybar‖ / ‖x - xbar‖^q.

    Graph points come from S's graph sampler, restricted to x-annuli.
    """
    q = HolderOrder.of(q).q
    base = as_point(base, S.n + S.m)
    ybar, xbar = base[:S.n], base[S.n:]
    if set_distance(xbar, S(ybar)) > tol.tau_mem:
        raise PreconditionError(f"Base point is not on the graph of {S.name}")
    radii = radii or make_radii_ladder()

    trace, witnesses, finest_pts = [], [], None
    for r in radii:
        pts = S.graph_sample(base, r, resolution)
        ys, xs = pts[:, :S.n], pts[:, S.n:]
        dx = np.linalg.norm(xs - xbar, axis=1)
        mask = (dx > r * radii.theta) & (dx <= r)
        if not np.any(mask):
            trace.append((r, math.nan))
            witnesses.append(np.concatenate([ybar, xbar]))
            continue
        quotients = np.linalg.norm(ys[mask] - ybar, axis=1) / dx[mask] ** q
        i = int(np.argmin(quotients))
        trace.append((r, float(quotients[i])))
        witnesses.append(pts[mask][i])
        finest_pts = (pts, dx)
    report = _report_from_trace("isolated_calmness", q, trace, witnesses, radii, tol)
    report.isolated = S(ybar).isolated_at(xbar, radii.finest * radii.theta, tol.tau_mem)

    if report.verdict == ModulusVerdict.HOLDS and math.isfinite(report.modulus) and finest_pts is not None:
        pts, dx = finest_pts
        rng = np.random.default_rng(seed)
        usable = np.flatnonzero(dx > 0)
        pick = rng.choice(usable, size=min(WITNESS_SAMPLES, usable.size), replace=False)
        vals = np.linalg.norm(pts[pick, :S.n] - ybar, axis=1) / dx[pick] ** q
        report.witness_check = bool(np.all(vals >= report.modulus * (1 - tol.slack) - tol.eps_pos))
        if not report.witness_check:
            report.verdict = ModulusVerdict.INCONCLUSIVE
            report.notes.append("witness re-check failed")
    logger.info(f"clm_{q} {S.name}: {report.modulus} ({report.verdict.value}), isolated={report.isolated}")
    return report


def sharp_minimum_modulus(f: ScalarFn, xbar, q: Union[float, HolderOrder],
                          radii: Optional[ScaleLadder] = None,
                          grid: Optional[DirectionGrid] = None,
                          tol: Tolerances = DEFAULT_TOLERANCES,
                          seed: int = 0, polish: bool = True) -> RegularityReport:
    """
    shrp_q f(xbar) = liminf over x → xbar of (f(x) - f(xbar)) / ‖x - xbar‖^q.

    A negative quotient anywhere means xbar is not a local minimizer at the
    sampled scales: the modulus is 0 and the verdict fails.
    """
    q = HolderOrder.of(q).q
    xbar = as_point(xbar, f.n)
    fbar = f(xbar)
    if not math.isfinite(fbar):
        raise PreconditionError(f"{f.name}(xbar) = {fbar} is not finite")
    radii = radii or make_radii_ladder()
    grid = grid or make_direction_grid(f.n)

    def quotient(pts):
        return (f.evaluate(pts) - fbar) / np.linalg.norm(pts - xbar, axis=1) ** q

    trace, witnesses, negative = _scan_annuli(quotient, xbar, radii, grid, polish=polish,
                                              stop_on_negative=True, tol=tol)
    if negative:
        report = RegularityReport(quantity="sharp_minimum", modulus=0.0, q=q, radius=trace[-1][0],
                                  witness=witnesses[-1].tolist(), trace=trace,
                                  verdict=ModulusVerdict.FAILS, converged=True,
                                  notes=["negative quotient: not a local minimizer"])
    else:
        report = _report_from_trace("sharp_minimum", q, trace, witnesses, radii, tol)
        report = _witness_recheck(report, quotient, xbar, tol, seed)
    logger.info(f"shrp_{q} {f.name}: {report.modulus} ({report.verdict.value})")
    return report


# ---------------------------------------------------------------------------
# Criteria
# ---------------------------------------------------------------------------

def at_least(a: float, b: float, slack: float) -> bool:
    """a >= b up to relative slack, with the usual conventions for 0 and +inf."""
    if b <= 0 or a == math.inf:
        return True
    if b == math.inf:
        return False
    return a >= b * (1 - slack)


def roughly_equal(a: float, b: float, slack: float, zero: float = 1e-6) -> bool:
    if math.isinf(a) or math.isinf(b):
        return a == b
    if max(abs(a), abs(b)) <= zero:
        return True
    return abs(a - b) <= slack * max(abs(a), abs(b))


@dataclass
class DefinitenessReport:
    positive: bool
    modulus: float
    estimate: LimitEstimate


def check_positive_definite(H: HomogeneousSampler, q: Optional[float] = None,
                            tol: Tolerances = DEFAULT_TOLERANCES) -> DefinitenessReport:
    """H is positive definite when ‖H‖* > 0."""
    if q is not None and abs(HolderOrder.of(q).q - H.q) > 1e-12:
        raise UsageError(f"Sampler has order {H.q}, expected {q}")
    estimate = norm_star(H, tol)
    return DefinitenessReport(positive=estimate.value > tol.eps_pos, modulus=estimate.value,
                              estimate=estimate)


@dataclass
class ComparisonReport:
    """Two estimates of the same quantity."""
    name: str
    lhs: float
    rhs: float
    passed: bool
    status: str
    details: Dict = field(default_factory=dict)

    def to_dict(self) -> Dict:
        return {'name': self.name, 'lhs': self.lhs, 'rhs': self.rhs, 'pass': self.passed,
                'status': self.status, 'details': self.details}


def verify_srg_equals_derivative_norm(F: SetValuedMap, base, q: Union[float, HolderOrder],
                                      radii: Optional[ScaleLadder] = None,
                                      ladder: Optional[ScaleLadder] = None,
                                      grid: Optional[DirectionGrid] = None,
                                      tol: Tolerances = DEFAULT_TOLERANCES) -> ComparisonReport:
    """srg_q F(xbar, ybar) against ‖D_qF(xbar, ybar)‖⊖; disagreement is inconclusive."""
    q = HolderOrder.of(q).q
    srg = strong_subregularity_modulus(F, base, q, radii=radii, grid=grid, tol=tol)
    lower = norm_lower(derivative_sampler(F, base, q, grid=grid, ladder=ladder, tol=tol), tol)
    a, b = srg.modulus, lower.value
    both_zero = srg.verdict == ModulusVerdict.FAILS and lower.value <= tol.eps_pos
    agree = both_zero or roughly_equal(a, b, tol.slack, tol.eps_pos)
    return ComparisonReport(name="srg_vs_lower_norm", lhs=a, rhs=b, passed=agree,
                            status="agree" if agree else "inconclusive",
                            details={'srg_verdict': srg.verdict.value,
                                     'lower_verdict': lower.verdict.value})


@dataclass
class SandwichReport:
    """Sharp minimizer sandwich for a convex f through its subdifferential."""
    q: float
    lower: float
    middle: float
    upper: float
    factor: float
    passed: bool
    sharp: RegularityReport = None
    derivative: LimitEstimate = None

    def to_dict(self) -> Dict:
        return {'q': self.q, 'lower': self.lower, 'middle': self.middle, 'upper': self.upper,
                'factor': self.factor, 'pass': self.passed}


def sandwich_factor(q: float) -> float:
    return q ** q / (q + 1) ** (q + 1)


def verify_sharp_minimizer_sandwich(sub: "SubdiffOracle", xbar, q: Union[float, HolderOrder],
                                    radii: Optional[ScaleLadder] = None,
                                    ladder: Optional[ScaleLadder] = None,
                                    tol: Tolerances = DEFAULT_TOLERANCES) -> SandwichReport:
    """
    c_q ‖D_q∂f(xbar, 0)‖* <= shrp_{q+1} f(xbar) <= ‖D_q∂f(xbar, 0)‖*
    with c_q = q^q / (q+1)^(q+1).
    """
    q = HolderOrder.of(q).q
    xbar = as_point(xbar, 1)
    sub.require_stationary(xbar, tol)
    H = derivative_sampler(sub.as_map(), np.concatenate([xbar, [0.0]]), q, ladder=ladder, tol=tol)
    star = norm_star(H, tol)
    sharp = sharp_minimum_modulus(sub.f, xbar, q + 1, radii=radii, tol=tol)
    factor = sandwich_factor(q)
    lower, middle, upper = factor * star.value, sharp.modulus, star.value
    passed = at_least(middle, lower, tol.slack) and at_least(upper, middle, tol.slack)
    logger.info(f"sandwich q={q}: {lower} <= {middle} <= {upper} -> {passed}")
    return SandwichReport(q=q, lower=lower, middle=middle, upper=upper, factor=factor,
                          passed=passed, sharp=sharp, derivative=star)


def subdiff_subregularity_vs_sharp(sub: "SubdiffOracle", xbar, q: Union[float, HolderOrder],
                                   radii: Optional[ScaleLadder] = None,
                                   ladder: Optional[ScaleLadder] = None,
                                   tol: Tolerances = DEFAULT_TOLERANCES) -> ComparisonReport:
    """
    For convex f with 0 ∈ ∂f(xbar): srg_q ∂f >= shrp_{q+1} f, and
    shrp_{q+1} f >= c_q srg_q ∂f; both hold or both fail.
    """
    q = HolderOrder.of(q).q
    xbar = as_point(xbar, 1)
    sub.require_stationary(xbar, tol)
    srg = strong_subregularity_modulus(sub.as_map(), np.concatenate([xbar, [0.0]]), q, radii=radii, tol=tol)
    sharp = sharp_minimum_modulus(sub.f, xbar, q + 1, radii=radii, tol=tol)
    factor = sandwich_factor(q)
    forward = at_least(srg.modulus, sharp.modulus, tol.chained_slack)
    backward = at_least(sharp.modulus, factor * srg.modulus, tol.chained_slack)
    same = (srg.modulus > tol.eps_pos) == (sharp.modulus > tol.eps_pos)

    star = norm_star(derivative_sampler(sub.as_map(), np.concatenate([xbar, [0.0]]), q,
                                        ladder=ladder, tol=tol), tol)
    bound_low = at_least(srg.modulus, star.value, tol.chained_slack)
    bound_high = at_least(star.value / factor, srg.modulus, tol.chained_slack)
    passed = forward and backward and same
    return ComparisonReport(
        name="subdiff_srg_vs_sharp", lhs=srg.modulus, rhs=sharp.modulus, passed=passed,
        status="agree" if passed else "violated",
        details={'factor': factor, 'forward': forward, 'backward': backward, 'same_verdict': same,
                 'derivative_star': star.value, 'star_bounds': bound_low and bound_high})


@dataclass
class CalmnessCriteria:
    """Three equivalent descriptions of isolated calmness."""
    modulus: RegularityReport
    outer: LimitEstimate
    zero_image: SetRepr
    direct: bool
    bounded_derivative: bool
    trivial_zero_image: bool
    agreement: bool
    identity_holds: Optional[bool]

    def to_dict(self) -> Dict:
        return {
            'direct': self.direct, 'bounded_derivative': self.bounded_derivative,
            'trivial_zero_image': self.trivial_zero_image, 'agreement': self.agreement,
            'modulus': self.modulus.modulus, 'outer_norm': self.outer.value,
            'identity_holds': self.identity_holds,
        }


def verify_calmness_criteria(S: SetValuedMap, base, q: Union[float, HolderOrder],
                             radii: Optional[ScaleLadder] = None,
                             ladder: Optional[ScaleLadder] = None,
                             grid: Optional[DirectionGrid] = None,
                             tol: Tolerances = DEFAULT_TOLERANCES,
                             resolution: int = GRAPH_RESOLUTION) -> CalmnessCriteria:
    """
    Isolated calmness of order q at (ybar, xbar), via the modulus, the outer
    norm of D_{1/q}S and the image D_{1/q}S(ybar, xbar)(0) = {0}.
    """
    q = HolderOrder.of(q).q
    ladder = ladder or make_scale_ladder()
    modulus = isolated_calmness_modulus(S, base, q, radii=radii, resolution=resolution, tol=tol)
    H = derivative_sampler(S, base, 1.0 / q, grid=grid, ladder=ladder, tol=tol)
    outer = norm_outer(H, tol)
    zero_img = graphical_derivative_image(S, base, np.zeros(S.n), 1.0 / q, ladder=ladder, tol=tol)
    zero_tol = max(default_cluster_tol(ladder, 1.0 / q), tol.eps_pos)

    direct = modulus.verdict == ModulusVerdict.HOLDS
    bounded = outer.value < tol.eps_inf
    trivial = (not zero_img.is_empty) and zero_img.sup_norm() <= zero_tol
    identity = None
    if direct and bounded and math.isfinite(modulus.modulus) and outer.value > 0:
        identity = roughly_equal(modulus.modulus, outer.value ** (-q), tol.chained_slack)
    return CalmnessCriteria(modulus=modulus, outer=outer, zero_image=zero_img, direct=direct,
                            bounded_derivative=bounded, trivial_zero_image=trivial,
                            agreement=direct == bounded == trivial, identity_holds=identity)


@dataclass
class PerturbationReport:
    srg_sum: float
    srg_base: float
    derivative_norm: float
    passed: bool

    def to_dict(self) -> Dict:
        return {'srg_sum': self.srg_sum, 'srg_base': self.srg_base,
                'derivative_norm': self.derivative_norm, 'pass': self.passed}


def perturbation_bound_check(F: SetValuedMap, g: Callable, base, q: Union[float, HolderOrder],
                             radii: Optional[ScaleLadder] = None,
                             ladder: Optional[ScaleLadder] = None,
                             grid: Optional[DirectionGrid] = None,
                             tol: Tolerances = DEFAULT_TOLERANCES) -> PerturbationReport:
    """srg_q(F + g)(xbar, ybar + g(xbar)) >= srg_q F(xbar, ybar) - ‖D_q g(xbar)‖⁺."""
    q = HolderOrder.of(q).q
    base = as_point(base, F.n + F.m)
    xbar, ybar = base[:F.n], base[F.n:]
    norm, differentiable = hadamard_derivative_norm(g, xbar, q, grid=grid, ladder=ladder, n=F.n)
    if not differentiable:
        raise PreconditionError("g is not q-order Hadamard differentiable at xbar")
    g_bar = np.array([g(xbar)]) if isinstance(g, ScalarFn) else as_point(g(xbar), F.m)
    srg_base = strong_subregularity_modulus(F, base, q, radii=radii, grid=grid, tol=tol).modulus
    shifted = np.concatenate([xbar, ybar + g_bar])
    srg_sum = strong_subregularity_modulus(add_single_valued(F, g), shifted, q,
                                           radii=radii, grid=grid, tol=tol).modulus
    passed = at_least(srg_sum, srg_base - norm, tol.slack)
    return PerturbationReport(srg_sum=srg_sum, srg_base=srg_base, derivative_norm=norm, passed=passed)


# ---------------------------------------------------------------------------
# Subdifferential oracle
# ---------------------------------------------------------------------------

@dataclass
class SubdiffOracle:
    """
    Subdifferential of a convex function on R as x ↦ [left, right] derivative.

    `bounds` returns the one-sided derivatives; `inverse` is an optional
    exact oracle for (∂f)^{-1}.
    """
    f: ScalarFn
    bounds: Callable[[float], Tuple[float, float]]
    inverse: Optional[Callable[[float], SetRepr]] = None
    name: str = "∂f"

    def __post_init__(self):
        if self.f.n != 1:
            raise UsageError("Subdifferential oracles are provided for n == 1")

    @classmethod
    def numeric(cls, f: ScalarFn, h: float = 1e-5) -> "SubdiffOracle":
        """One-sided differences with one Richardson step."""
        def one_sided(x, sign):
            def d(step):
                return sign * (f(x + sign * step) - f(x)) / step
            coarse, fine = d(h), d(h / 2.0)
            # a step leaving dom f leaves that side of the subdifferential unbounded
            if not (math.isfinite(coarse) and math.isfinite(fine)):
                return sign * math.inf
            return 2.0 * fine - coarse

        def bounds(x):
            return one_sided(x, -1.0), one_sided(x, 1.0)
        return cls(f=f, bounds=bounds, name=f"∂{f.name}")

    def __call__(self, x) -> SetRepr:
        x0 = float(as_point(x, 1)[0])
        if not math.isfinite(self.f(x0)):
            return SetRepr.empty(1)
        lo, hi = self.bounds(x0)
        if math.isnan(lo) or math.isnan(hi):
            return SetRepr.empty(1)
        return SetRepr.interval(min(lo, hi), max(lo, hi))

    def as_map(self) -> SetValuedMap:
        inverse = None
        if self.inverse is not None:
            inverse = lambda y: self.inverse(float(as_point(y, 1)[0]))
        return SetValuedMap(n=1, m=1, image=self, inverse_image=inverse,
                            sampling_box=self.f.domain_hint, name=self.name)

    def is_monotone(self, box: Optional[Tuple[float, float]] = None, samples: int = 201,
                    tol: float = 1e-9) -> bool:
        """Monotone on the sampled part of dom f; points outside the domain are skipped."""
        lo, hi = box or tuple(self.f.domain_hint[0])
        xs = np.linspace(lo, hi, samples)
        xs = xs[np.isfinite(self.f.evaluate(xs[:, None]))]
        ivs = [self.bounds(x) for x in xs]
        if any(math.isnan(v) for iv in ivs for v in iv):
            return False
        for (l0, r0), (l1, r1) in zip(ivs, ivs[1:]):
            if l0 > r0 + tol or r0 > l1 + tol * (1 + abs(r0)):
                return False
        return True

    def require_stationary(self, xbar: np.ndarray, tol: Tolerances = DEFAULT_TOLERANCES):
        if not self.is_monotone():
            raise PreconditionError(f"{self.name} is not monotone: f is not convex")
        if not self(xbar).contains([0.0], max(tol.tau_mem, 1e-8)):
            raise PreconditionError(f"0 is not in {self.name}({xbar.tolist()})")

