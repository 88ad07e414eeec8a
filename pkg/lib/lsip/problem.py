#!/usr/bin/env python3
"""
LSIP Problem Model
Linear semi-infinite programs  min <c, x>  s.t.  <a_t, x> <= b_t, t in T,
with T either finite or a compact interval swept by a parametric curve.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from config.paths import LSIP_SETTINGS
from lib.errors import UsageError

logger = logging.getLogger(__name__)

DEFAULT_N = LSIP_SETTINGS['default_N']


@dataclass(frozen=True)
class IndexCurve:
    """t ↦ a_t with an optional exact support function sup_t <a_t, x>."""
    name: str
    n: int
    vectors: Callable[[np.ndarray, Dict], np.ndarray]
    support: Optional[Callable[[np.ndarray, Dict], np.ndarray]] = None


def _circle_vectors(ts, params):
    return np.column_stack([np.cos(ts), np.sin(ts)])


def _circle_support(xs, params):
    return np.linalg.norm(xs, axis=1)


def _ellipse_vectors(ts, params):
    return np.column_stack([params.get('alpha', 1.0) * np.cos(ts), params.get('beta', 1.0) * np.sin(ts)])


def _ellipse_support(xs, params):
    return np.hypot(params.get('alpha', 1.0) * xs[:, 0], params.get('beta', 1.0) * xs[:, 1])


CURVES: Dict[str, IndexCurve] = {
    'circle': IndexCurve('circle', 2, _circle_vectors, _circle_support),
    'ellipse': IndexCurve('ellipse', 2, _ellipse_vectors, _ellipse_support),
}


def parse_b_spec(spec: str) -> Tuple[str, np.ndarray]:
    """'const:v' or 'poly:c0,c1,...' (coefficients of increasing powers of t)."""
    try:
        kind, _, body = str(spec).partition(':')
        coeffs = np.array([float(v) for v in body.split(',')], dtype=float)
    except ValueError as e:
        raise UsageError(f"Malformed right-hand side spec {spec!r}: {e}")
    if kind == 'const' and coeffs.size == 1:
        return kind, coeffs
    if kind == 'poly' and coeffs.size >= 1:
        return kind, coeffs
    raise UsageError(f"Unknown right-hand side spec {spec!r} (use const:v or poly:c0,c1,...)")


@dataclass
class ParametricFamily:
    """Constraint family indexed by t in [t_lo, t_hi]."""
    curve: str
    b_spec: str = "const:1"
    t_range: Tuple[float, float] = (0.0, 2 * math.pi)
    periodic: bool = False
    params: Dict = field(default_factory=dict)

    def __post_init__(self):
        if self.curve not in CURVES:
            raise UsageError(f"Unknown curve {self.curve!r}; known: {sorted(CURVES)}")
        lo, hi = self.t_range
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise UsageError(f"Index range must be a finite interval, got {self.t_range}")
        parse_b_spec(self.b_spec)

    @property
    def n(self) -> int:
        return CURVES[self.curve].n

    @property
    def constant_b(self) -> bool:
        return parse_b_spec(self.b_spec)[0] == 'const'

    def b_values(self, ts: np.ndarray) -> np.ndarray:
        kind, coeffs = parse_b_spec(self.b_spec)
        if kind == 'const':
            return np.full(ts.shape, coeffs[0])
        return np.polyval(coeffs[::-1], ts)

    def rows(self, ts: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return CURVES[self.curve].vectors(ts, self.params), self.b_values(ts)

    def index_grid(self, N: int) -> np.ndarray:
        lo, hi = self.t_range
        if self.periodic:
            return lo + (hi - lo) * np.arange(N) / N
        return np.linspace(lo, hi, N)

    def support(self, xs: np.ndarray) -> Optional[np.ndarray]:
        curve = CURVES[self.curve]
        lo, hi = self.t_range
        if curve.support is None or not self.constant_b or hi - lo < 2 * math.pi - 1e-12:
            return None
        return curve.support(xs, self.params)


@dataclass
class LsipProblem:
    """
    LSIP instance. Finite problems carry explicit rows; parametric ones a
    family that `discretize` turns into rows.
    """
    n: int
    c: np.ndarray
    A: Optional[np.ndarray] = None
    b: Optional[np.ndarray] = None
    family: Optional[ParametricFamily] = None
    N: int = DEFAULT_N
    index_values: Optional[np.ndarray] = None
    xbar: Optional[np.ndarray] = None
    name: str = "lsip"

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).reshape(-1)
        if self.c.size != self.n:
            raise UsageError(f"Cost vector has {self.c.size} entries, expected {self.n}")
        if self.family is None:
            if self.A is None or self.b is None:
                raise UsageError("A finite LSIP needs rows A and right-hand side b")
            self.A = np.asarray(self.A, dtype=float).reshape(-1, self.n)
            self.b = np.asarray(self.b, dtype=float).reshape(-1)
            if self.A.shape[0] != self.b.size:
                raise UsageError("Row count of A and length of b differ")
            if self.index_values is None:
                self.index_values = np.arange(self.b.size, dtype=float)
        elif self.family.n != self.n:
            raise UsageError(f"Curve {self.family.curve} lives in R^{self.family.n}, problem has n={self.n}")
        if self.xbar is not None:
            self.xbar = np.asarray(self.xbar, dtype=float).reshape(-1)

    @property
    def is_finite(self) -> bool:
        return self.family is None

    @property
    def T_size(self) -> int:
        return self.b.size if self.is_finite else self.N


def continuity_defect(family: ParametricFamily, N: int) -> Tuple[float, float, bool]:
    """Largest consecutive jump of (a_t, b_t) on the N grid and on the 2N grid."""
    def jump(count):
        A, b = family.rows(family.index_grid(count))
        data = np.column_stack([A, b])
        return float(np.max(np.linalg.norm(np.diff(data, axis=0), axis=1))) if count > 1 else 0.0
    coarse, fine = jump(N), jump(2 * N)
    return coarse, fine, fine <= 0.75 * coarse + 1e-12


def discretize(problem: LsipProblem, N: Optional[int] = None) -> LsipProblem:
    """Finite sub-problem on an N-point index grid; finite problems pass through."""
    if problem.is_finite:
        return problem
    N = N if N is not None else problem.N
    if isinstance(N, bool) or not isinstance(N, (int, np.integer)) or N < 2:
        raise UsageError(f"Discretisation needs N >= 2, got {N!r}")
    family = problem.family
    coarse, fine, ok = continuity_defect(family, N)
    if not ok:
        logger.warning(f"Family {family.curve} does not look continuous in t "
                       f"(jumps {coarse:.3e} at N={N}, {fine:.3e} at 2N)")
    ts = family.index_grid(N)
    A, b = family.rows(ts)
    return LsipProblem(n=problem.n, c=problem.c.copy(), A=A, b=b, N=N, index_values=ts,
                       xbar=problem.xbar, name=f"{problem.name}[N={N}]")
