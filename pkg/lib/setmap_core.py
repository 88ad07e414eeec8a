#!/usr/bin/env python3
"""
Set-Valued Map Core
Data model shared by every analysis module: scalar functions, set
representations, set-valued maps, direction grids and scale ladders.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from lib.errors import UnsupportedDimensionError, UsageError

logger = logging.getLogger(__name__)

TAU_MEM = 1e-9
EPS_POS = 1e-6
EPS_INF = 1e6
GRAPH_RESOLUTION = 401
MAX_AXIS_RESOLUTION = 41   # per-axis cap for graph grids when n >= 2
MU_RESOLUTION = 33         # samples along an interval image
GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


@dataclass(frozen=True)
class Tolerances:
    """Numeric thresholds used by every estimator."""
    tau_mem: float = TAU_MEM
    eps_pos: float = EPS_POS
    eps_inf: float = EPS_INF
    slack: float = 0.05
    chained_slack: float = 0.10

    def __post_init__(self):
        for name in ("tau_mem", "eps_pos", "eps_inf", "slack", "chained_slack"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise UsageError(f"Tolerance {name} must be a positive finite number, got {value!r}")
        if self.eps_pos >= self.eps_inf:
            raise UsageError("eps_pos must be smaller than eps_inf")


DEFAULT_TOLERANCES = Tolerances()


@dataclass(frozen=True)
class HolderOrder:
    """Hölder order q > 0."""
    q: float

    def __post_init__(self):
        if isinstance(self.q, bool) or not isinstance(self.q, (int, float)):
            raise UsageError(f"Hölder order must be a number, got {self.q!r}")
        if not (math.isfinite(self.q) and self.q > 0):
            raise UsageError(f"Hölder order must be positive and finite, got {self.q}")

    @classmethod
    def of(cls, q: Union[float, "HolderOrder"]) -> "HolderOrder":
        if isinstance(q, HolderOrder):
            return q
        return cls(float(q) if isinstance(q, (int, float)) and not isinstance(q, bool) else q)

    def inverse(self) -> "HolderOrder":
        return HolderOrder(1.0 / self.q)


def as_point(x, n: Optional[int] = None) -> np.ndarray:
    """Coerce a scalar or sequence to a 1-D float vector, checking its length."""
    point = np.atleast_1d(np.asarray(x, dtype=float)).reshape(-1)
    if n is not None and point.size != n:
        raise UsageError(f"Expected a point of dimension {n}, got {point.size}")
    return point


# ---------------------------------------------------------------------------
# Scalar functions
# ---------------------------------------------------------------------------

@dataclass
class ScalarFn:
    """
    Extended-real-valued function on R^n.

    `batch` maps an array of shape (k, n) to k values. Values outside the
    domain are +inf; NaN produced by the formula is read as +inf too.
    """
    n: int
    batch: Callable[[np.ndarray], np.ndarray]
    domain_hint: Optional[np.ndarray] = None   # (n, 2) sampling box
    name: str = "f"
    sublevel: Optional[Callable[[float], "SetRepr"]] = None   # exact {x : f(x) <= y}, n == 1

    def __post_init__(self):
        if self.n < 1:
            raise UsageError(f"Function dimension must be >= 1, got {self.n}")
        if self.domain_hint is None:
            self.domain_hint = np.array([[-1.0, 1.0]] * self.n)

    def evaluate(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, self.n)
        with np.errstate(all="ignore"):
            values = np.asarray(self.batch(pts), dtype=float).reshape(-1)
        return np.where(np.isnan(values), np.inf, values)

    def __call__(self, x) -> float:
        return float(self.evaluate(as_point(x, self.n)[None, :])[0])


def positive_part(g: ScalarFn) -> ScalarFn:
    return ScalarFn(n=g.n, batch=lambda pts: np.maximum(g.evaluate(pts), 0.0),
                    domain_hint=g.domain_hint, name=f"max(0, {g.name})")


def fn_sum(terms: Sequence[ScalarFn], weights: Optional[Sequence[float]] = None,
           name: Optional[str] = None) -> ScalarFn:
    """Weighted sum of functions on the same space."""
    if not terms:
        raise UsageError("fn_sum needs at least one term")
    n = terms[0].n
    if any(t.n != n for t in terms):
        raise UsageError("fn_sum terms must share the dimension")
    weights = list(weights) if weights is not None else [1.0] * len(terms)

    def batch(pts):
        total = np.zeros(pts.shape[0])
        for w, term in zip(weights, terms):
            total = total + w * term.evaluate(pts)
        return total

    return ScalarFn(n=n, batch=batch, domain_hint=terms[0].domain_hint,
                    name=name or " + ".join(t.name for t in terms))


# ---------------------------------------------------------------------------
# Set representations
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SetRepr:
    """
    Closed subset of R^m.

    Either a normalised union of closed intervals (m == 1, endpoints may be
    infinite) or a finite point cloud. A set with neither is empty.
    """
    dimension: int
    intervals: Optional[np.ndarray] = None
    points: Optional[np.ndarray] = None

    @classmethod
    def empty(cls, m: int) -> "SetRepr":
        return cls(dimension=m)

    @classmethod
    def interval_union(cls, pairs, merge_gap: float = 0.0) -> "SetRepr":
        arr = np.asarray(pairs, dtype=float).reshape(-1, 2)
        if np.isnan(arr).any():
            raise UsageError("Interval endpoints must not be NaN")
        arr = arr[arr[:, 0] <= arr[:, 1]]
        if arr.size == 0:
            return cls.empty(1)
        arr = arr[np.argsort(arr[:, 0], kind="stable")]
        merged = [arr[0].copy()]
        for lo, hi in arr[1:]:
            if lo <= merged[-1][1] + merge_gap:
                merged[-1][1] = max(merged[-1][1], hi)
            else:
                merged.append(np.array([lo, hi]))
        return cls(dimension=1, intervals=np.array(merged))

    @classmethod
    def interval(cls, lo: float, hi: float) -> "SetRepr":
        return cls.interval_union([[lo, hi]])

    @classmethod
    def cloud(cls, points, m: Optional[int] = None) -> "SetRepr":
        arr = np.asarray(points, dtype=float)
        if m is None:
            m = arr.shape[-1] if arr.ndim == 2 else 1
        arr = arr.reshape(-1, m)
        if arr.size == 0:
            return cls.empty(m)
        if not np.all(np.isfinite(arr)):
            raise UsageError("Point-cloud sets must be finite and NaN-free")
        return cls(dimension=m, points=arr)

    @classmethod
    def singleton(cls, y) -> "SetRepr":
        y = as_point(y)
        return cls.cloud(y[None, :], y.size)

    @property
    def is_empty(self) -> bool:
        return (self.intervals is None or self.intervals.size == 0) and \
               (self.points is None or self.points.size == 0)

    @property
    def kind(self) -> str:
        if self.is_empty:
            return "empty"
        return "intervals" if self.intervals is not None else "cloud"

    def as_intervals(self) -> np.ndarray:
        """Interval array for m == 1 sets (clouds become degenerate intervals)."""
        if self.dimension != 1:
            raise UsageError("Interval view is only defined for m == 1")
        if self.is_empty:
            return np.empty((0, 2))
        if self.intervals is not None:
            return self.intervals
        return np.column_stack([self.points[:, 0], self.points[:, 0]])

    def distance(self, y) -> float:
        """Euclidean distance from y; +inf for the empty set."""
        y = as_point(y, self.dimension)
        if self.is_empty:
            return math.inf
        if self.intervals is not None:
            lo, hi = self.intervals[:, 0], self.intervals[:, 1]
            with np.errstate(invalid="ignore"):
                gaps = np.maximum(np.maximum(lo - y[0], y[0] - hi), 0.0)
            return float(np.min(gaps))
        return float(np.min(np.linalg.norm(self.points - y, axis=1)))

    def contains(self, y, tol: float = TAU_MEM) -> bool:
        return self.distance(y) <= tol

    def sup_norm(self) -> float:
        """sup of ||y|| over the set, 0 for the empty set."""
        if self.is_empty:
            return 0.0
        if self.intervals is not None:
            return float(np.max(np.abs(self.intervals)))
        return float(np.max(np.linalg.norm(self.points, axis=1)))

    def min_inner(self, u) -> float:
        """inf of <y, u> over the set, +inf for the empty set."""
        u = as_point(u, self.dimension)
        if self.is_empty:
            return math.inf
        if self.intervals is not None:
            s = u[0]
            if s == 0:
                return 0.0
            ends = self.intervals[:, 0] if s > 0 else self.intervals[:, 1]
            return float(np.min(ends * s))
        return float(np.min(self.points @ u))

    def translated(self, shift) -> "SetRepr":
        shift = as_point(shift, self.dimension)
        if self.is_empty:
            return self
        if self.intervals is not None:
            return SetRepr(1, intervals=self.intervals + shift[0])
        return SetRepr(self.dimension, points=self.points + shift)

    def scaled(self, factor: float) -> "SetRepr":
        """{factor * y}; factor must be positive."""
        if factor <= 0:
            raise UsageError(f"Scale factor must be positive, got {factor}")
        if self.is_empty:
            return self
        if self.intervals is not None:
            return SetRepr(1, intervals=self.intervals * factor)
        return SetRepr(self.dimension, points=self.points * factor)

    def rescaled(self, center, factor: float) -> "SetRepr":
        """{(y - center) * factor}."""
        return self.translated(-as_point(center, self.dimension)).scaled(factor)

    @classmethod
    def union(cls, sets: Iterable["SetRepr"], m: int) -> "SetRepr":
        parts = [s for s in sets if not s.is_empty]
        if not parts:
            return cls.empty(m)
        if m == 1 and any(s.intervals is not None for s in parts):
            return cls.interval_union(np.vstack([s.as_intervals() for s in parts]))
        return cls.cloud(np.vstack([s.points for s in parts]), m)

    def cap(self, eps_inf: float = EPS_INF) -> "SetRepr":
        """Send endpoints beyond eps_inf to infinity and drop receding pieces."""
        if self.is_empty:
            return self
        if self.intervals is not None:
            iv = self.intervals.copy()
            iv[iv > eps_inf] = math.inf
            iv[iv < -eps_inf] = -math.inf
            keep = ~((iv[:, 0] == math.inf) | (iv[:, 1] == -math.inf))
            return SetRepr.interval_union(iv[keep])
        keep = np.linalg.norm(self.points, axis=1) <= eps_inf
        return SetRepr.cloud(self.points[keep], self.dimension)

    def clustered(self, tol: float) -> "SetRepr":
        """Merge pieces closer than tol (intervals) or collapse nearby points."""
        if self.is_empty:
            return self
        if self.intervals is not None:
            return SetRepr.interval_union(self.intervals, merge_gap=tol)
        if self.dimension == 1:
            return SetRepr.interval_union(self.as_intervals(), merge_gap=tol)
        order = np.lexsort(self.points.T[::-1])
        reps: List[np.ndarray] = []
        for p in self.points[order]:
            if not reps or np.min(np.linalg.norm(np.array(reps) - p, axis=1)) > tol:
                reps.append(p)
        return SetRepr.cloud(np.array(reps), self.dimension)

    def matches(self, other: "SetRepr", tol: float = 1e-9, rel: float = 0.0) -> bool:
        """Approximate set equality (Hausdorff-type) with absolute plus relative tolerance."""
        if self.dimension != other.dimension:
            return False
        if self.is_empty or other.is_empty:
            return self.is_empty and other.is_empty
        if self.dimension == 1:
            a = self.as_intervals()
            b = SetRepr.interval_union(other.as_intervals(), merge_gap=tol).as_intervals()
            a = SetRepr.interval_union(a, merge_gap=tol).as_intervals()
            if a.shape != b.shape:
                return False
            same_inf = np.isinf(a) == np.isinf(b)
            if not np.all(same_inf) or not np.all(a[np.isinf(a)] == b[np.isinf(b)]):
                return False
            fin = ~np.isinf(a)
            bound = tol + rel * np.maximum(np.abs(a[fin]), np.abs(b[fin]))
            return bool(np.all(np.abs(a[fin] - b[fin]) <= bound))
        scale = tol + rel * max(self.sup_norm(), other.sup_norm())
        d_ab = max(other.distance(p) for p in self.points)
        d_ba = max(self.distance(p) for p in other.points)
        return max(d_ab, d_ba) <= scale

    def isolated_at(self, x, radius: float, tol: float = TAU_MEM) -> bool:
        """True when x belongs to the set and no other member lies within radius."""
        x = as_point(x, self.dimension)
        if not self.contains(x, tol):
            return False
        if self.intervals is not None:
            lo, hi = self.intervals[:, 0], self.intervals[:, 1]
            home = (lo - tol <= x[0]) & (x[0] <= hi + tol)
            if np.any(home & (hi - lo > tol)):
                return False
            with np.errstate(invalid="ignore"):
                gaps = np.maximum(np.maximum(lo - x[0], x[0] - hi), 0.0)
            return bool(np.all(home | (gaps > radius)))
        d = np.linalg.norm(self.points - x, axis=1)
        return bool(np.all((d <= tol) | (d > radius)))

    def to_dict(self) -> dict:
        if self.is_empty:
            return {"kind": "empty", "dimension": self.dimension}
        if self.intervals is not None:
            return {"kind": "intervals", "dimension": 1, "intervals": self.intervals.tolist()}
        return {"kind": "cloud", "dimension": self.dimension, "points": self.points.tolist()}


def set_distance(y, S: SetRepr) -> float:
    """d(y, S) in the Euclidean norm, +inf when S is empty."""
    y = as_point(y)
    if y.size != S.dimension:
        raise UsageError(f"Point of dimension {y.size} against a set in R^{S.dimension}")
    return S.distance(y)


# ---------------------------------------------------------------------------
# Set-valued maps
# ---------------------------------------------------------------------------

GraphSampler = Callable[[np.ndarray, float, int], np.ndarray]


@dataclass
class SetValuedMap:
    """
    Set-valued map F: R^n ⇉ R^m given by an image oracle.

    `graph_sampler(center, radius, resolution)` returns graph points (x, y)
    as rows of length n + m inside the closed ball around center.
    `inverse_image`, when present, is an exact oracle for F^{-1}.
    """
    n: int
    m: int
    image: Callable[[np.ndarray], SetRepr]
    graph_sampler: Optional[GraphSampler] = None
    inverse_image: Optional[Callable[[np.ndarray], SetRepr]] = None
    sampling_box: Optional[np.ndarray] = None
    name: str = "F"

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise UsageError(f"Map dimensions must be >= 1, got n={self.n}, m={self.m}")
        if self.sampling_box is None:
            self.sampling_box = np.array([[-1.0, 1.0]] * self.n)

    def __call__(self, x) -> SetRepr:
        return self.image(as_point(x, self.n))

    def graph_sample(self, center, radius: float, resolution: int = GRAPH_RESOLUTION) -> np.ndarray:
        center = as_point(center, self.n + self.m)
        if self.graph_sampler is not None:
            return self.graph_sampler(center, radius, resolution)
        return grid_graph_sample(self, center, radius, resolution)

    def contains(self, x, y, tol: float = TAU_MEM) -> bool:
        return set_distance(y, self(x)) <= tol


def _axis_grid(center: np.ndarray, radius: float, count: int) -> np.ndarray:
    axes = [np.linspace(c - radius, c + radius, count) for c in center]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([g.reshape(-1) for g in mesh])


def grid_graph_sample(F: SetValuedMap, center: np.ndarray, radius: float,
                      resolution: int = GRAPH_RESOLUTION) -> np.ndarray:
    """Graph points near center from an x-grid and samples of each image."""
    xc, yc = center[:F.n], center[F.n:]
    count = resolution if F.n == 1 else min(resolution, MAX_AXIS_RESOLUTION)
    if count % 2 == 0:
        count += 1
    rows = []
    for x in _axis_grid(xc, radius, count):
        img = F(x)
        if img.is_empty:
            continue
        if img.intervals is not None:
            for lo, hi in img.intervals:
                lo_c, hi_c = max(lo, yc[0] - radius), min(hi, yc[0] + radius)
                if lo_c > hi_c:
                    continue
                for mu in np.unique(np.append(np.linspace(lo_c, hi_c, MU_RESOLUTION), yc[0]
                                              if lo_c <= yc[0] <= hi_c else lo_c)):
                    rows.append(np.concatenate([x, [mu]]))
        else:
            for y in img.points:
                rows.append(np.concatenate([x, y]))
    if not rows:
        return np.empty((0, F.n + F.m))
    pts = np.array(rows)
    keep = np.linalg.norm(pts - center, axis=1) <= radius * (1 + 1e-12)
    return pts[keep]


def _swap_columns(points: np.ndarray, first: int) -> np.ndarray:
    return np.hstack([points[:, first:], points[:, :first]])


def _membership_inverse(F: SetValuedMap, y: np.ndarray, tol: float = TAU_MEM) -> SetRepr:
    """{x on the sampling grid : y in F(x)}."""
    box = F.sampling_box
    count = GRAPH_RESOLUTION if F.n == 1 else MAX_AXIS_RESOLUTION
    axes = [np.linspace(lo, hi, count) for lo, hi in box]
    mesh = np.meshgrid(*axes, indexing="ij")
    xs = np.column_stack([g.reshape(-1) for g in mesh])
    hits = [x for x in xs if F(x).distance(y) <= tol]
    if not hits:
        return SetRepr.empty(F.n)
    return SetRepr.cloud(np.array(hits), F.n)


def invert_map(F: SetValuedMap) -> SetValuedMap:
    """F^{-1}(y) = {x : y in F(x)}; inverting twice gives back F's oracles."""
    n, m = F.n, F.m

    def sampler(center, radius, resolution):
        swapped_center = np.concatenate([center[m:], center[:m]])
        pts = F.graph_sample(swapped_center, radius, resolution)
        return _swap_columns(pts, n)

    image = F.inverse_image or (lambda y: _membership_inverse(F, y))
    sampling_box = np.array([[-1.0, 1.0]] * m)
    return SetValuedMap(n=m, m=n, image=image, graph_sampler=sampler,
                        inverse_image=F.image, sampling_box=sampling_box,
                        name=f"{F.name}^-1")


def make_epigraph_map(f: ScalarFn) -> SetValuedMap:
    """x ↦ [f(x), +∞) (empty outside dom f); requires n == 1 images in R."""
    def image(x):
        value = f(x)
        if value == math.inf:
            return SetRepr.empty(1)
        return SetRepr.interval(value, math.inf)

    inverse = None
    if f.sublevel is not None:
        inverse = lambda y: f.sublevel(float(as_point(y, 1)[0]))
    return SetValuedMap(n=f.n, m=1, image=image, inverse_image=inverse,
                        sampling_box=f.domain_hint, name=f"epi {f.name}")


def add_single_valued(F: SetValuedMap, g: Callable, name: Optional[str] = None) -> SetValuedMap:
    """(F + g)(x) = F(x) + g(x) for a single-valued g: R^n -> R^m."""
    def g_value(x):
        if isinstance(g, ScalarFn):
            return np.array([g(x)])
        return as_point(g(x), F.m)

    return SetValuedMap(n=F.n, m=F.m, image=lambda x: F(x).translated(g_value(x)),
                        sampling_box=F.sampling_box,
                        name=name or f"{F.name} + {getattr(g, 'name', 'g')}")


# ---------------------------------------------------------------------------
# Ladders and grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScaleLadder:
    """Geometric sequence t_k = t0 * theta^k, k = 0..K-1."""
    t0: float = 1e-1
    theta: float = 0.5
    K: int = 20

    def __post_init__(self):
        if not (math.isfinite(self.t0) and self.t0 > 0):
            raise UsageError(f"Ladder start must be positive, got {self.t0}")
        if not (0 < self.theta < 1):
            raise UsageError(f"Ladder ratio must lie in (0, 1), got {self.theta}")
        if isinstance(self.K, bool) or not isinstance(self.K, int) or self.K < 2:
            raise UsageError(f"Ladder length must be an integer >= 2, got {self.K!r}")

    @property
    def values(self) -> np.ndarray:
        return self.t0 * self.theta ** np.arange(self.K)

    @property
    def finest(self) -> float:
        return float(self.values[-1])

    def __len__(self) -> int:
        return self.K

    def __iter__(self):
        return iter(self.values.tolist())


def make_scale_ladder(t0: float = 1e-1, theta: float = 0.5, K: int = 20) -> ScaleLadder:
    return ScaleLadder(t0=t0, theta=theta, K=K)


def make_radii_ladder(r0: float = 0.5, ratio: float = 0.5, K: int = 12) -> ScaleLadder:
    return ScaleLadder(t0=r0, theta=ratio, K=K)


@dataclass(frozen=True)
class DirectionGrid:
    """Unit vectors used to probe directional quantities."""
    n: int
    points: np.ndarray
    scheme: str

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)


def fibonacci_sphere(count: int) -> np.ndarray:
    """Fibonacci lattice on the 2-sphere."""
    offset = 2.0 / count
    i = np.arange(count)
    y = i * offset - 1.0 + offset / 2.0
    r = np.sqrt(np.maximum(0.0, 1.0 - y * y))
    phi = ((i + 1) % count) * GOLDEN_ANGLE
    pts = np.column_stack([np.cos(phi) * r, y, np.sin(phi) * r])
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def make_direction_grid(n: int, M: int = 64, allow_high_dim: bool = False,
                        seed: int = 0) -> DirectionGrid:
    """
    Deterministic unit directions in R^n.

    n = 1 gives {-1, +1}; n = 2 gives M equally spaced angles; n = 3 gives a
    Fibonacci lattice of M points. n > 3 needs allow_high_dim and then uses
    seeded Gaussian directions.
    """
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise UsageError(f"Dimension must be a positive integer, got {n!r}")
    if n == 1:
        return DirectionGrid(1, np.array([[-1.0], [1.0]]), "pair")
    if M < 2:
        raise UsageError(f"Direction grid needs at least 2 points, got {M}")
    if n == 2:
        angles = 2.0 * math.pi * np.arange(M) / M
        pts = np.column_stack([np.cos(angles), np.sin(angles)])
        pts[np.abs(pts) < 1e-15] = 0.0
        return DirectionGrid(2, pts, "circle")
    if n == 3:
        return DirectionGrid(3, fibonacci_sphere(M), "fibonacci")
    if not allow_high_dim:
        raise UnsupportedDimensionError(
            f"Direction grids are provided for n <= 3; got n={n} (pass allow_high_dim to sample randomly)")
    logger.warning(f"Using {M} random directions in R^{n} (seed={seed})")
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(M, n))
    return DirectionGrid(n, pts / np.linalg.norm(pts, axis=1, keepdims=True), "random")


def ball_offsets(n: int) -> np.ndarray:
    """Offsets inside the closed unit ball used to sample u' near u."""
    if n == 1:
        return np.linspace(-1.0, 1.0, 9)[:, None]
    if n == 2:
        g = np.linspace(-1.0, 1.0, 5)
        a, b = np.meshgrid(g, g, indexing="ij")
        return np.column_stack([a.reshape(-1), b.reshape(-1)]) / math.sqrt(2.0)
    if n == 3:
        g = np.array([-1.0, 0.0, 1.0])
        a, b, c = np.meshgrid(g, g, g, indexing="ij")
        return np.column_stack([a.reshape(-1), b.reshape(-1), c.reshape(-1)]) / math.sqrt(3.0)
    eye = np.eye(n)
    return np.vstack([np.zeros((1, n)), eye, -eye])


# ---------------------------------------------------------------------------
# Search helpers
# ---------------------------------------------------------------------------

def project_to_ball(points: np.ndarray, center: np.ndarray, radius: float) -> np.ndarray:
    diff = points - center
    norms = np.linalg.norm(diff, axis=1, keepdims=True)
    factor = np.where(norms > radius, radius / np.maximum(norms, 1e-300), 1.0)
    return center + diff * factor


def project_to_annulus(points: np.ndarray, center: np.ndarray, inner: float, outer: float) -> np.ndarray:
    diff = points - center
    norms = np.linalg.norm(diff, axis=1, keepdims=True)
    target = np.clip(norms, inner, outer)
    safe = np.where(norms > 0, norms, 1.0)
    scaled = np.where(norms > 0, diff * (target / safe), 0.0)
    fallback = np.zeros_like(diff)
    fallback[:, 0] = inner
    return center + np.where(norms > 0, scaled, fallback)


def compass_minimize(objective: Callable[[np.ndarray], np.ndarray], x0: np.ndarray,
                     step: float, project: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                     max_iter: int = 60, min_step: Optional[float] = None) -> Tuple[np.ndarray, float]:
    """Deterministic coordinate pattern search started from x0."""
    x = np.asarray(x0, dtype=float).copy()
    n = x.size
    fx = float(objective(x[None, :])[0])
    if not math.isfinite(fx):
        return x, fx
    min_step = min_step if min_step is not None else step * 1e-6
    moves = np.vstack([np.eye(n), -np.eye(n)])
    for _ in range(max_iter):
        trials = x + step * moves
        if project is not None:
            trials = project(trials)
        values = np.asarray(objective(trials), dtype=float)
        values = np.where(np.isnan(values), np.inf, values)
        j = int(np.argmin(values))
        if values[j] < fx:
            x, fx = trials[j], float(values[j])
        else:
            step *= 0.5
            if step < min_step:
                break
    return x, fx


def sweep(func: Callable, items: Iterable, parallel: int = 1) -> list:
    """Order-preserving map, optionally on a thread pool."""
    items = list(items)
    if parallel <= 1 or len(items) < 2:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=parallel) as pool:
        return list(pool.map(func, items))
