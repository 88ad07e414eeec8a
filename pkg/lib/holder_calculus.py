#!/usr/bin/env python3
"""
Hölder Calculus
Order-q Hadamard subderivatives, graphical derivatives and the norms of
q-homogeneous set-valued maps.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from lib.errors import PreconditionError, UsageError
from lib.setmap_core import (
    DEFAULT_TOLERANCES, DirectionGrid, HolderOrder, ScalarFn, ScaleLadder, SetRepr,
    SetValuedMap, Tolerances, as_point, ball_offsets, compass_minimize,
    make_direction_grid, make_scale_ladder, project_to_ball, set_distance, sweep,
)

logger = logging.getLogger(__name__)

GROWTH_RATIO = 1.2         # consecutive-rung factor read as divergence
ZERO_TREND_CEILING = 0.1   # geometric decay below this counts as a zero limit
ROUNDOFF_FLOOR = 1e-12     # numerators below this (relative) carry no information
CONVERGENCE_RTOL = 1e-2


class LimitVerdict(Enum):
    """Classification of a ladder limit."""
    ZERO = "zero"
    POSITIVE = "positive"
    INFINITE = "infinite"       # +inf
    DIVERGENT = "divergent"     # -inf
    NEGATIVE = "negative"       # finite and negative


@dataclass
class LimitEstimate:
    """Limit estimate of a scaled quantity along a scale ladder."""
    value: float
    per_scale: List[Tuple[float, float]]
    converged: bool
    verdict: LimitVerdict
    quantity: str = ""
    q: Optional[float] = None
    per_direction: List[Tuple[int, float, float]] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return {
            'quantity': self.quantity,
            'q': self.q,
            'value': self.value,
            'verdict': self.verdict.value,
            'converged': self.converged,
            'per_scale': [list(p) for p in self.per_scale],
        }


def estimate_limit(per_scale: Sequence[Tuple[float, float]], tol: Tolerances = DEFAULT_TOLERANCES,
                   rel_tol: float = CONVERGENCE_RTOL) -> Tuple[float, LimitVerdict, bool]:
    """
    Read off the limit of a ladder sequence (coarse to fine).

    NaN entries are unresolved rungs and are skipped. With no resolved rung
    the limit is 0.
    """
    values = [v for _, v in per_scale if not math.isnan(v)]
    if not values:
        return 0.0, LimitVerdict.ZERO, True
    last = values[-1]
    if last >= tol.eps_inf:
        return math.inf, LimitVerdict.INFINITE, True
    if last <= -tol.eps_inf:
        return -math.inf, LimitVerdict.DIVERGENT, True
    if len(values) >= 3:
        a, b, c = values[-3:]
        if a > 0 and b >= a * GROWTH_RATIO and c >= b * GROWTH_RATIO and c > 1:
            return math.inf, LimitVerdict.INFINITE, True
        if a < 0 and b <= a * GROWTH_RATIO and c <= b * GROWTH_RATIO and c < -1:
            return -math.inf, LimitVerdict.DIVERGENT, True
        if a > 0 and 0 < b <= a / GROWTH_RATIO and 0 < c <= b / GROWTH_RATIO and c < ZERO_TREND_CEILING:
            return 0.0, LimitVerdict.ZERO, True

    value, converged = last, False
    for k in range(len(values) - 1, 0, -1):
        prev, cur = values[k - 1], values[k]
        if math.isfinite(prev) and math.isfinite(cur) and \
                abs(cur - prev) <= rel_tol * max(abs(cur), abs(prev), tol.eps_pos):
            value, converged = min(prev, cur), True
            break
    if not converged and len(values) >= 2:
        value = min(values[-2], values[-1])

    if value >= tol.eps_pos:
        verdict = LimitVerdict.POSITIVE
    elif value <= -tol.eps_pos:
        verdict = LimitVerdict.NEGATIVE
    else:
        verdict = LimitVerdict.ZERO
    return float(value), verdict, converged


# ---------------------------------------------------------------------------
# Hadamard subderivative
# ---------------------------------------------------------------------------

def _rung_quotient(f: ScalarFn, xbar: np.ndarray, fbar: float, u: np.ndarray, t: float,
                   q: float, offsets: np.ndarray, polish: bool) -> float:
    """inf over u' in B(u, t) of (f(xbar + t u') - f(xbar)) / t^q, NaN when unresolved."""
    us = u + t * offsets
    deltas = f.evaluate(xbar + t * us) - fbar
    floor = ROUNDOFF_FLOOR * (1.0 + abs(fbar))
    if np.all(np.isfinite(deltas)) and np.max(np.abs(deltas)) <= floor:
        return math.nan
    scale = t ** q
    quotients = deltas / scale
    best = int(np.argmin(quotients))
    value = float(quotients[best])
    if polish and math.isfinite(value):
        def objective(batch):
            return (f.evaluate(xbar + t * batch) - fbar) / scale
        _, polished = compass_minimize(objective, us[best], step=t / 8.0,
                                       project=lambda pts: project_to_ball(pts, u, t),
                                       min_step=t * 1e-6)
        value = min(value, polished)
    return value


def hadamard_subderivative(f: ScalarFn, xbar, x, q: Union[float, HolderOrder],
                           ladder: Optional[ScaleLadder] = None,
                           tol: Tolerances = DEFAULT_TOLERANCES,
                           polish: bool = True) -> LimitEstimate:
    """
    f'_q(xbar; x) = liminf_{t↓0, u→x} (f(xbar + t u) - f(xbar)) / t^q.

    Each rung takes the infimum over u in the ball B(x, t_k); the limit is
    read from the ladder by `estimate_limit`.
    """
    q = HolderOrder.of(q).q
    xbar = as_point(xbar, f.n)
    direction = as_point(x, f.n)
    fbar = f(xbar)
    if not math.isfinite(fbar):
        raise PreconditionError(f"{f.name}(xbar) = {fbar} is not finite")
    ladder = ladder or make_scale_ladder()
    offsets = ball_offsets(f.n)

    per_scale = []
    for t in ladder:
        per_scale.append((t, _rung_quotient(f, xbar, fbar, direction, t, q, offsets, polish)))
    value, verdict, converged = estimate_limit(per_scale, tol)

    # f'_q(xbar; 0) is 0 unless the function drops to -inf along every ray
    if not np.any(direction):
        if verdict == LimitVerdict.DIVERGENT:
            value = -math.inf
        else:
            value, verdict, converged = 0.0, LimitVerdict.ZERO, True

    logger.debug(f"subderivative q={q} at {xbar.tolist()} dir {direction.tolist()}: {value} ({verdict.value})")
    return LimitEstimate(value=value, per_scale=per_scale, converged=converged,
                         verdict=verdict, quantity="hadamard_subderivative", q=q)


def _verdict_of(value: float, tol: Tolerances) -> LimitVerdict:
    if value >= tol.eps_inf:
        return LimitVerdict.INFINITE
    if value >= tol.eps_pos:
        return LimitVerdict.POSITIVE
    return LimitVerdict.ZERO


def subderivative_norm(f: ScalarFn, xbar, q: Union[float, HolderOrder],
                       grid: Optional[DirectionGrid] = None,
                       ladder: Optional[ScaleLadder] = None,
                       tol: Tolerances = DEFAULT_TOLERANCES,
                       parallel: int = 1) -> LimitEstimate:
    """‖f'_q(xbar)‖_q = inf over unit directions of max(0, f'_q(xbar; u))."""
    q = HolderOrder.of(q).q
    grid = grid or make_direction_grid(f.n)
    ladder = ladder or make_scale_ladder()
    estimates = sweep(lambda u: hadamard_subderivative(f, xbar, u, q, ladder, tol), grid.points, parallel)

    clipped = [max(e.value, 0.0) for e in estimates]
    best = int(np.argmin(clipped))
    value = float(clipped[best])

    per_scale = []
    for k, t in enumerate(ladder):
        rung = [max(e.per_scale[k][1], 0.0) for e in estimates if not math.isnan(e.per_scale[k][1])]
        per_scale.append((t, min(rung) if rung else math.nan))
    per_direction = [(i, t, v) for i, e in enumerate(estimates) for t, v in e.per_scale]

    verdict = _verdict_of(value, tol)
    logger.info(f"subderivative norm q={q} of {f.name}: {value} ({verdict.value})")
    return LimitEstimate(value=value, per_scale=per_scale, converged=estimates[best].converged,
                         verdict=verdict, quantity="subderivative_norm", q=q,
                         per_direction=per_direction)


# ---------------------------------------------------------------------------
# Graphical derivative and homogeneous samplers
# ---------------------------------------------------------------------------

def _split_base(F: SetValuedMap, base) -> Tuple[np.ndarray, np.ndarray]:
    base = as_point(base, F.n + F.m)
    return base[:F.n], base[F.n:]


def _check_on_graph(F: SetValuedMap, xbar: np.ndarray, ybar: np.ndarray, tol: Tolerances):
    if set_distance(ybar, F(xbar)) > tol.tau_mem:
        raise PreconditionError(f"Base point ({xbar.tolist()}, {ybar.tolist()}) is not on the graph of {F.name}")


def _derivative_rungs(F: SetValuedMap, xbar: np.ndarray, ybar: np.ndarray, u: np.ndarray,
                      q: float, ladder: ScaleLadder, tol: Tolerances) -> List[Tuple[float, SetRepr]]:
    """Scaled images (F(xbar + t u') - ybar) / t^q over u' in B(u, t), one per usable rung."""
    offsets = ball_offsets(F.n)
    ynorm = float(np.linalg.norm(ybar))
    rungs = []
    for t in ladder:
        scale = t ** q
        if ynorm > 0 and scale < ROUNDOFF_FLOOR * ynorm:
            continue
        xs = xbar + t * (u + t * offsets)
        pieces = [F(x).rescaled(ybar, 1.0 / scale) for x in xs]
        rungs.append((t, SetRepr.union(pieces, F.m).cap(tol.eps_inf)))
    return rungs


def _outer_limit(rungs: List[Tuple[float, SetRepr]], m: int, cluster_tol: float) -> SetRepr:
    """Points persisting over the last three rungs, clustered at the finest one."""
    tail = [img for _, img in rungs[-3:]]
    if not tail or any(img.is_empty for img in tail):
        return SetRepr.empty(m)
    d = [img.distance(np.zeros(m)) for img in tail]
    if len(d) == 3 and d[2] > 1 and d[1] >= GROWTH_RATIO * d[0] and d[2] >= GROWTH_RATIO * d[1]:
        return SetRepr.empty(m)
    return tail[-1].clustered(cluster_tol)


def default_cluster_tol(ladder: ScaleLadder, q: float) -> float:
    return 3.0 * ladder.finest ** min(q, 1.0)


def graphical_derivative_image(F: SetValuedMap, base, u, q: Union[float, HolderOrder],
                               ladder: Optional[ScaleLadder] = None,
                               cluster_tol: Optional[float] = None,
                               tol: Tolerances = DEFAULT_TOLERANCES) -> SetRepr:
    """D_qF(xbar, ybar)(u): outer limit of (F(xbar + t u') - ybar) / t^q."""
    q = HolderOrder.of(q).q
    xbar, ybar = _split_base(F, base)
    _check_on_graph(F, xbar, ybar, tol)
    ladder = ladder or make_scale_ladder()
    cluster_tol = cluster_tol if cluster_tol is not None else default_cluster_tol(ladder, q)
    rungs = _derivative_rungs(F, xbar, ybar, as_point(u, F.n), q, ladder, tol)
    return _outer_limit(rungs, F.m, cluster_tol)


@dataclass
class HomogeneousSampler:
    """
    Sampled q-homogeneous map H: R^n ⇉ R^m.

    H is stored on unit directions; H(λu) = λ^q H(u) for λ > 0.
    """
    n: int
    m: int
    q: float
    directions: np.ndarray
    images: List[SetRepr]
    zero_image: SetRepr
    rung_scales: Optional[List[float]] = None
    rung_images: Optional[List[List[SetRepr]]] = None
    zero_rung_images: Optional[List[SetRepr]] = None
    name: str = "H"

    def fixes_zero(self, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
        """H(0) ⊂ {0}; a zero image shrinking geometrically over the last rungs counts as {0}."""
        if self.zero_image.is_empty or self.zero_image.sup_norm() <= tol.tau_mem:
            return True
        tail = (self.zero_rung_images or [])[-3:]
        if len(tail) < 3 or any(img.is_empty for img in tail):
            return False
        a, b, c = (img.sup_norm() for img in tail)
        return math.isfinite(a) and b <= a / GROWTH_RATIO and c <= b / GROWTH_RATIO and c < ZERO_TREND_CEILING

    def image_at(self, x) -> SetRepr:
        x = as_point(x, self.n)
        norm = float(np.linalg.norm(x))
        if norm == 0:
            return self.zero_image
        gaps = np.linalg.norm(self.directions - x / norm, axis=1)
        i = int(np.argmin(gaps))
        if gaps[i] > 1e-9:
            raise UsageError(f"Direction {(x / norm).tolist()} is not on the sampler grid")
        return self.images[i].scaled(norm ** self.q) if not self.images[i].is_empty else self.images[i]

    @classmethod
    def from_function(cls, func: Callable[[np.ndarray], SetRepr], n: int, m: int, q: float,
                      grid: Optional[DirectionGrid] = None, name: str = "H") -> "HomogeneousSampler":
        grid = grid or make_direction_grid(n)
        return cls(n=n, m=m, q=q, directions=grid.points.copy(),
                   images=[func(u) for u in grid.points], zero_image=func(np.zeros(n)), name=name)

    def plus(self, g: Callable[[np.ndarray], np.ndarray], name: Optional[str] = None) -> "HomogeneousSampler":
        """H + g for a single-valued q-homogeneous g."""
        return HomogeneousSampler(
            n=self.n, m=self.m, q=self.q, directions=self.directions,
            images=[img.translated(as_point(g(u), self.m)) for u, img in zip(self.directions, self.images)],
            zero_image=self.zero_image.translated(as_point(g(np.zeros(self.n)), self.m)),
            name=name or f"{self.name} + g")

    def inverse(self, tol: float = 1e-9) -> "HomogeneousSampler":
        """H^{-1} as a (1/q)-homogeneous sampler."""
        if self.n == 1 and self.m == 1 and any(img.intervals is not None for img in self.images + [self.zero_image]):
            return self._inverse_intervals(tol)
        if any(img.intervals is not None for img in self.images + [self.zero_image]):
            raise UsageError("Exact inversion of interval images needs n == m == 1")
        return self._inverse_cloud(tol)

    def _inverse_intervals(self, tol: float) -> "HomogeneousSampler":
        qi = 1.0 / self.q
        directions = np.array([[-1.0], [1.0]])
        images = []
        for v in (-1.0, 1.0):
            pieces = []
            for u, img in zip(self.directions[:, 0], self.images):
                for a, b in img.as_intervals():
                    # s > 0 with s * v in [a, b]
                    lo_s, hi_s = (max(a, 0.0), b) if v > 0 else (max(-b, 0.0), -a)
                    if lo_s > hi_s or hi_s <= 0:
                        continue
                    lam_lo = 0.0 if hi_s == math.inf else hi_s ** (-qi)
                    lam_hi = math.inf if lo_s == 0 else lo_s ** (-qi)
                    pieces.append([lam_lo, lam_hi] if u > 0 else [-lam_hi, -lam_lo])
            if self.zero_image.contains([v], tol):
                pieces.append([0.0, 0.0])
            images.append(SetRepr.interval_union(pieces) if pieces else SetRepr.empty(1))
        zero_pieces = [[0.0, 0.0]]
        for u, img in zip(self.directions[:, 0], self.images):
            if img.contains([0.0], tol):
                zero_pieces.append([0.0, math.inf] if u > 0 else [-math.inf, 0.0])
        return HomogeneousSampler(n=1, m=1, q=qi, directions=directions, images=images,
                                  zero_image=SetRepr.interval_union(zero_pieces),
                                  name=f"{self.name}^-1")

    def _inverse_cloud(self, tol: float) -> "HomogeneousSampler":
        qi = 1.0 / self.q
        entries: List[Tuple[np.ndarray, np.ndarray]] = []
        zero_points = [np.zeros(self.n)]
        for u, img in zip(self.directions, self.images):
            if img.is_empty:
                continue
            for y in img.points:
                norm = float(np.linalg.norm(y))
                if norm <= tol:
                    zero_points.append(u)
                else:
                    entries.append((y / norm, u * norm ** (-qi)))
        if not self.fixes_zero():
            for y in self.zero_image.points:
                norm = float(np.linalg.norm(y))
                if norm > tol:
                    entries.append((y / norm, np.zeros(self.n)))

        directions: List[np.ndarray] = []
        grouped: List[List[np.ndarray]] = []
        for v, x in entries:
            for k, d in enumerate(directions):
                if np.linalg.norm(d - v) <= 1e-9:
                    grouped[k].append(x)
                    break
            else:
                directions.append(v)
                grouped.append([x])
        return HomogeneousSampler(
            n=self.m, m=self.n, q=qi,
            directions=np.array(directions) if directions else np.empty((0, self.m)),
            images=[SetRepr.cloud(np.array(xs), self.n) for xs in grouped],
            zero_image=SetRepr.cloud(np.array(zero_points), self.n),
            name=f"{self.name}^-1")


def derivative_sampler(F: SetValuedMap, base, q: Union[float, HolderOrder],
                       grid: Optional[DirectionGrid] = None,
                       ladder: Optional[ScaleLadder] = None,
                       cluster_tol: Optional[float] = None,
                       tol: Tolerances = DEFAULT_TOLERANCES,
                       parallel: int = 1) -> HomogeneousSampler:
    """Sample D_qF(base) on a direction grid, keeping every rung for the trace."""
    q = HolderOrder.of(q).q
    xbar, ybar = _split_base(F, base)
    _check_on_graph(F, xbar, ybar, tol)
    grid = grid or make_direction_grid(F.n)
    ladder = ladder or make_scale_ladder()
    cluster_tol = cluster_tol if cluster_tol is not None else default_cluster_tol(ladder, q)

    rung_sets = sweep(lambda u: _derivative_rungs(F, xbar, ybar, u, q, ladder, tol),
                      list(grid.points) + [np.zeros(F.n)], parallel)
    images = [_outer_limit(r, F.m, cluster_tol) for r in rung_sets[:-1]]
    zero_image = _outer_limit(rung_sets[-1], F.m, cluster_tol)
    logger.info(f"Derivative sampler D_{q}{F.name}: {len(images)} directions, "
                f"{sum(img.is_empty for img in images)} empty images")
    return HomogeneousSampler(
        n=F.n, m=F.m, q=q, directions=grid.points.copy(), images=images, zero_image=zero_image,
        rung_scales=[t for t, _ in rung_sets[0]],
        rung_images=[[img for _, img in r] for r in rung_sets[:-1]],
        zero_rung_images=[img for _, img in rung_sets[-1]],
        name=f"D_{q}{F.name}")


# ---------------------------------------------------------------------------
# Norms of homogeneous maps
# ---------------------------------------------------------------------------

def _rung_trace(H: HomogeneousSampler, measure: Callable[[SetRepr, np.ndarray], float],
                combine: Callable[[List[float]], float]) -> Tuple[List[Tuple[float, float]], List[Tuple[int, float, float]]]:
    if not H.rung_images or not H.rung_scales:
        return [], []
    per_scale, per_direction = [], []
    for k, t in enumerate(H.rung_scales):
        values = []
        for i, (u, rungs) in enumerate(zip(H.directions, H.rung_images)):
            v = measure(rungs[k], u)
            per_direction.append((i, t, v))
            if not math.isnan(v):
                values.append(v)
        per_scale.append((t, combine(values) if values else math.inf))
    return per_scale, per_direction


def _converged(per_scale: List[Tuple[float, float]]) -> bool:
    if len(per_scale) < 2:
        return True
    a, b = per_scale[-2][1], per_scale[-1][1]
    if not (math.isfinite(a) and math.isfinite(b)):
        return a == b
    return abs(a - b) <= CONVERGENCE_RTOL * max(abs(a), abs(b), 1e-12) or max(abs(a), abs(b)) < 1e-6


def norm_lower(H: HomogeneousSampler, tol: Tolerances = DEFAULT_TOLERANCES) -> LimitEstimate:
    """‖H‖⊖ = inf over unit x of d(0, H(x)); +inf when every image is empty."""
    origin = np.zeros(H.m)
    dists = [img.distance(origin) for img in H.images if not img.is_empty]
    value = float(min(dists)) if dists else math.inf
    per_scale, per_direction = _rung_trace(H, lambda img, u: img.distance(origin), min)
    return LimitEstimate(value=value, per_scale=per_scale, converged=_converged(per_scale),
                         verdict=_verdict_of(value, tol), quantity="norm_lower", q=H.q,
                         per_direction=per_direction)


def norm_outer(H: HomogeneousSampler, tol: Tolerances = DEFAULT_TOLERANCES) -> LimitEstimate:
    """‖H‖⁺ = sup of ‖y‖ / ‖x‖^q over the graph without the origin."""
    if not H.fixes_zero(tol):
        value = math.inf
    else:
        sups = [img.sup_norm() for img in H.images if not img.is_empty]
        value = float(max(sups)) if sups else 0.0
    per_scale, per_direction = _rung_trace(
        H, lambda img, u: img.sup_norm() if not img.is_empty else math.nan, max)
    return LimitEstimate(value=value, per_scale=per_scale, converged=_converged(per_scale),
                         verdict=_verdict_of(value, tol), quantity="norm_outer", q=H.q,
                         per_direction=per_direction)


def norm_star(H: HomogeneousSampler, tol: Tolerances = DEFAULT_TOLERANCES) -> LimitEstimate:
    """‖H‖* = inf over unit x and y in H(x) of max(0, <y, x>); square maps only."""
    if H.n != H.m:
        raise UsageError(f"norm_star needs n == m, got n={H.n}, m={H.m}")
    inner = [max(img.min_inner(u), 0.0) for u, img in zip(H.directions, H.images) if not img.is_empty]
    value = float(min(inner)) if inner else math.inf
    per_scale, per_direction = _rung_trace(
        H, lambda img, u: max(img.min_inner(u), 0.0) if not img.is_empty else math.nan, min)
    return LimitEstimate(value=value, per_scale=per_scale, converged=_converged(per_scale),
                         verdict=_verdict_of(value, tol), quantity="norm_star", q=H.q,
                         per_direction=per_direction)


def norm_facts(H: HomogeneousSampler, tol: Tolerances = DEFAULT_TOLERANCES) -> Dict[str, bool]:
    """Structural consequences of the lower and outer norms of a homogeneous map."""
    lower = norm_lower(H, tol).value
    outer = norm_outer(H, tol).value
    origin = np.zeros(H.m)
    graph_trivial = all(img.is_empty for img in H.images) and H.fixes_zero(tol)
    range_trivial = all(img.is_empty or img.sup_norm() <= tol.tau_mem for img in H.images) and \
        H.fixes_zero(tol)
    domain_trivial = all(img.is_empty for img in H.images)
    zero_maps_to_zero = H.fixes_zero(tol)
    kernel_trivial = all(img.is_empty or img.distance(origin) > tol.tau_mem for img in H.images)
    return {
        'ordering': lower <= outer * (1 + tol.slack) or (lower == math.inf and outer == math.inf)
                    or graph_trivial,
        'trivial_graph': (not graph_trivial) or (outer == 0.0 and lower == math.inf),
        'outer_zero_iff_range_zero': (outer == 0.0) == range_trivial,
        'lower_inf_iff_domain_zero': (lower == math.inf) == domain_trivial,
        'finite_outer_fixes_zero': outer == math.inf or zero_maps_to_zero,
        'positive_lower_trivial_kernel': lower <= tol.eps_pos or kernel_trivial,
    }


# ---------------------------------------------------------------------------
# Hadamard derivative of single-valued maps
# ---------------------------------------------------------------------------

@dataclass
class HadamardDerivative:
    """Order-q Hadamard derivative of a single-valued map in one direction."""
    value: np.ndarray
    single_valued: bool
    spread: float
    per_scale: List[Tuple[float, float, float]] = field(default_factory=list)


def _vector_eval(g: Callable, points: np.ndarray) -> np.ndarray:
    if isinstance(g, ScalarFn):
        return g.evaluate(points)[:, None]
    return np.array([as_point(g(p)) for p in points])


def hadamard_derivative(g: Callable, xbar, x, q: Union[float, HolderOrder],
                        ladder: Optional[ScaleLadder] = None, n: Optional[int] = None,
                        rel_tol: float = CONVERGENCE_RTOL) -> HadamardDerivative:
    """
    lim (g(xbar + t u') - g(xbar)) / t^q over t↓0, u'→x.

    `single_valued` is False when the min and max quotients on the finest
    resolved rung (or on the two finest rungs) differ by more than rel_tol.
    """
    q = HolderOrder.of(q).q
    n = n or (g.n if isinstance(g, ScalarFn) else as_point(xbar).size)
    xbar = as_point(xbar, n)
    u = as_point(x, n)
    ladder = ladder or make_scale_ladder()
    gbar = _vector_eval(g, xbar[None, :])[0]
    if not np.all(np.isfinite(gbar)):
        raise PreconditionError("g(xbar) must be finite")
    offsets = ball_offsets(n)
    floor = ROUNDOFF_FLOOR * (1.0 + float(np.linalg.norm(gbar)))

    rungs = []
    for t in ladder:
        deltas = _vector_eval(g, xbar + t * (u + t * offsets)) - gbar
        if np.all(np.isfinite(deltas)) and np.max(np.abs(deltas)) <= floor:
            continue
        quotients = deltas / t ** q
        rungs.append((t, quotients.min(axis=0), quotients.max(axis=0)))
    if not rungs:
        return HadamardDerivative(value=np.zeros(gbar.size), single_valued=True, spread=0.0)

    t, lo, hi = rungs[-1]
    value = (lo + hi) / 2.0
    scale = max(1.0, float(np.max(np.abs(value)))) if np.all(np.isfinite(value)) else math.inf
    spread = float(np.max(hi - lo))
    single = math.isfinite(scale) and spread <= rel_tol * scale
    if single and len(rungs) >= 2:
        _, lo_prev, hi_prev = rungs[-2]
        single = float(np.max(np.abs((lo_prev + hi_prev) / 2.0 - value))) <= rel_tol * scale
    return HadamardDerivative(value=value, single_valued=bool(single), spread=spread,
                              per_scale=[(t, float(a[0]), float(b[0])) for t, a, b in rungs])


def hadamard_derivative_norm(g: Callable, xbar, q: Union[float, HolderOrder],
                             grid: Optional[DirectionGrid] = None,
                             ladder: Optional[ScaleLadder] = None,
                             n: Optional[int] = None) -> Tuple[float, bool]:
    """(‖D_q g(xbar)‖⁺, whether g is q-Hadamard differentiable in every grid direction)."""
    n = n or (g.n if isinstance(g, ScalarFn) else as_point(xbar).size)
    grid = grid or make_direction_grid(n)
    derivs = [hadamard_derivative(g, xbar, u, q, ladder, n=n) for u in grid.points]
    norm = max(float(np.linalg.norm(d.value)) for d in derivs)
    return norm, all(d.single_valued for d in derivs)
