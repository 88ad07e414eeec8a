#!/usr/bin/env python3
"""
Problem Catalog
Builds functions, set-valued maps, subdifferential oracles and LSIP
instances from JSON problem files.

Real powers of negative numbers are never guessed: `abs_power` is |x|^α
on all of R, `domain_power` is x^α on x >= 0 and +inf elsewhere, and
`power` accepts integer exponents only.
"""

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from config.paths import LSIP_SETTINGS
from lib.errors import UsageError
from lib.lsip.problem import LsipProblem, ParametricFamily
from lib.regularity_moduli import SubdiffOracle
from lib.setmap_core import (
    ScalarFn, SetRepr, SetValuedMap, add_single_valued, as_point, fn_sum, invert_map,
    make_epigraph_map,
)

logger = logging.getLogger(__name__)

PROBLEM_KINDS = ("function", "map", "lsip", "penalty")


@dataclass
class ProblemSpec:
    """A parsed problem file."""
    kind: str
    data: Dict
    name: str = "problem"
    path: Optional[Path] = None

    @property
    def xbar(self) -> Optional[np.ndarray]:
        value = self.data.get('xbar')
        return None if value is None else np.asarray(value, dtype=float).reshape(-1)


def load_problem(path) -> ProblemSpec:
    """Read a problem file; malformed JSON becomes a UsageError with its position."""
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except FileNotFoundError:
        raise UsageError(f"Problem file not found: {path}")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise UsageError(f"{path}: invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}")
    return problem_from_dict(data, name=path.stem, path=path)


def problem_from_dict(data: Dict, name: str = "problem", path: Optional[Path] = None) -> ProblemSpec:
    if not isinstance(data, dict):
        raise UsageError("A problem file must hold a JSON object")
    kind = data.get('kind')
    if kind not in PROBLEM_KINDS:
        raise UsageError(f"Problem kind must be one of {PROBLEM_KINDS}, got {kind!r}")
    return ProblemSpec(kind=kind, data=data, name=data.get('name', name), path=path)


def require_kind(spec: ProblemSpec, *kinds: str):
    if spec.kind not in kinds:
        raise UsageError(f"{spec.name}: expected a {' or '.join(kinds)} problem, got {spec.kind!r}")


# ---------------------------------------------------------------------------
# Scalar function families
# ---------------------------------------------------------------------------

def _domain_box(spec: Dict, n: int) -> Optional[np.ndarray]:
    box = spec.get('domain')
    if box is None:
        return None
    arr = np.array([[(-math.inf if lo is None else lo), (math.inf if hi is None else hi)]
                    for lo, hi in box], dtype=float)
    if arr.shape != (n, 2) or np.any(arr[:, 0] > arr[:, 1]):
        raise UsageError(f"Domain box must be {n} pairs [lo, hi] with lo <= hi")
    return arr


def _restrict(batch: Callable, box: Optional[np.ndarray]) -> Callable:
    if box is None:
        return batch

    def restricted(pts):
        inside = np.all((pts >= box[:, 0]) & (pts <= box[:, 1]), axis=1)
        return np.where(inside, batch(pts), math.inf)
    return restricted


def _power_sublevel(coef: float, alpha: float, odd: bool, one_sided: bool) -> Callable[[float], SetRepr]:
    """{x : coef·x^α <= y} for coef > 0."""
    def sublevel(y):
        if odd:
            root = math.copysign(abs(y / coef) ** (1.0 / alpha), y)
            return SetRepr.interval(-math.inf, root)
        if y < 0:
            return SetRepr.empty(1)
        root = (y / coef) ** (1.0 / alpha)
        return SetRepr.interval(0.0 if one_sided else -root, root)
    return sublevel


def build_function(spec: Dict, n: Optional[int] = None) -> ScalarFn:
    """Scalar function from a catalog entry such as {"family": "abs_power", "alpha": 2}."""
    if not isinstance(spec, dict) or 'family' not in spec:
        raise UsageError(f"Function entry needs a 'family': {spec!r}")
    family = spec['family']
    n = int(spec.get('n', n or 1))
    coef = float(spec.get('coef', 1.0))
    box = _domain_box(spec, n)
    sublevel = None

    if family in ('power', 'abs_power', 'domain_power'):
        if n != 1:
            raise UsageError(f"{family} is defined on R only")
        alpha = float(spec.get('alpha', 1.0))
        if alpha <= 0:
            raise UsageError("Power exponents must be positive")
        if family == 'power':
            if alpha != round(alpha):
                raise UsageError("power needs an integer exponent; use abs_power or domain_power for real ones")
            batch = lambda pts: coef * pts[:, 0] ** int(alpha)
            odd = int(alpha) % 2 == 1
        elif family == 'abs_power':
            batch = lambda pts: coef * np.abs(pts[:, 0]) ** alpha
            odd = False
        else:
            box = np.array([[max(0.0, box[0, 0]) if box is not None else 0.0,
                             box[0, 1] if box is not None else math.inf]])
            batch = lambda pts: coef * np.abs(pts[:, 0]) ** alpha
            odd = False
        if coef > 0 and spec.get('domain') is None:
            sublevel = _power_sublevel(coef, alpha, odd, family == 'domain_power')
        name = f"{coef:g}·{'|x|' if family == 'abs_power' else 'x'}^{alpha:g}"
    elif family == 'abs':
        batch = lambda pts: coef * np.sum(np.abs(pts), axis=1)
        name = f"{coef:g}·‖x‖₁"
    elif family == 'norm':
        alpha = float(spec.get('alpha', 1.0))
        batch = lambda pts: coef * np.linalg.norm(pts, axis=1) ** alpha
        name = f"{coef:g}·‖x‖^{alpha:g}"
    elif family == 'linear':
        a = as_point(spec.get('a', [1.0] * n), n)
        d = float(spec.get('d', 0.0))
        batch = lambda pts: pts @ a + d
        name = f"<{a.tolist()}, x>"
    elif family == 'max_affine':
        pieces = spec.get('pieces')
        if not pieces:
            raise UsageError("max_affine needs 'pieces': [[a, b], ...]")
        slopes = np.array([as_point(a, n) for a, _ in pieces])
        offsets = np.array([float(b) for _, b in pieces])
        batch = lambda pts: np.max(pts @ slopes.T + offsets, axis=1)
        name = f"max of {len(pieces)} affine pieces"
    elif family in ('max', 'sum'):
        terms = [build_function(t, n) for t in spec.get('terms', [])]
        if not terms:
            raise UsageError(f"{family} needs a non-empty 'terms' list")
        if family == 'sum':
            fn = fn_sum(terms, spec.get('weights'))
            batch, name = fn.batch, fn.name
        else:
            batch = lambda pts: np.max(np.column_stack([t.evaluate(pts) for t in terms]), axis=1)
            name = "max(" + ", ".join(t.name for t in terms) + ")"
    else:
        raise UsageError(f"Unknown function family {family!r}")

    hint = spec.get('sampling_box')
    hint = np.asarray(hint, dtype=float).reshape(n, 2) if hint is not None else None
    return ScalarFn(n=n, batch=_restrict(batch, box), domain_hint=hint,
                    name=spec.get('name', name), sublevel=sublevel)


# ---------------------------------------------------------------------------
# Subdifferentials
# ---------------------------------------------------------------------------

def _odd_root(value: float, power: float) -> float:
    return math.copysign(abs(value) ** power, value)


def build_subdifferential(spec: Dict) -> SubdiffOracle:
    """∂f with closed forms for the convex catalog families on R, numeric otherwise."""
    f = build_function(spec, 1)
    family = spec['family']
    coef = float(spec.get('coef', 1.0))
    alpha = float(spec.get('alpha', 1.0))
    closed = spec.get('domain') is None and coef > 0

    if closed and family in ('power', 'abs_power', 'norm', 'abs') and (family != 'power' or int(alpha) % 2 == 0):
        if alpha == 1.0:
            def bounds(x):
                return (-coef, coef) if x == 0 else (math.copysign(coef, x),) * 2

            def inverse(y):
                if abs(y) < coef:
                    return SetRepr.singleton([0.0])
                if abs(y) == coef:
                    return SetRepr.interval(0.0, math.inf) if y > 0 else SetRepr.interval(-math.inf, 0.0)
                return SetRepr.empty(1)
            return SubdiffOracle(f=f, bounds=bounds, inverse=inverse, name=f"∂{f.name}")
        if alpha > 1.0:
            def bounds(x):
                d = coef * alpha * math.copysign(abs(x) ** (alpha - 1.0), x)
                return d, d

            def inverse(y):
                return SetRepr.singleton([_odd_root(y / (coef * alpha), 1.0 / (alpha - 1.0))])
            return SubdiffOracle(f=f, bounds=bounds, inverse=inverse, name=f"∂{f.name}")
    if family == 'linear':
        a = float(as_point(spec.get('a', [1.0]), 1)[0])
        return SubdiffOracle(f=f, bounds=lambda x: (a, a), name=f"∂{f.name}")
    if family == 'max_affine':
        pieces = [(float(as_point(a, 1)[0]), float(b)) for a, b in spec['pieces']]

        def bounds(x):
            values = [a * x + b for a, b in pieces]
            top = max(values)
            slopes = [a for (a, _), v in zip(pieces, values) if v >= top - 1e-12 * (1 + abs(top))]
            return min(slopes), max(slopes)
        return SubdiffOracle(f=f, bounds=bounds, name=f"∂{f.name}")
    if family == 'domain_power' and alpha >= 1.0:
        def bounds(x):
            if x < 0:
                return math.nan, math.nan
            d = coef * alpha * x ** (alpha - 1.0)
            return (-math.inf, d) if x == 0 else (d, d)
        return SubdiffOracle(f=f, bounds=bounds, name=f"∂{f.name}")

    logger.info(f"No closed-form subdifferential for {family}; using one-sided differences")
    return SubdiffOracle.numeric(f)


# ---------------------------------------------------------------------------
# Set-valued maps
# ---------------------------------------------------------------------------

def _explicit_graph(spec: Dict) -> SetValuedMap:
    rule = spec.get('rule')
    n = int(spec.get('n', 1))
    m = int(spec.get('m', 1))
    name = spec.get('name', f"explicit[{rule}]")
    if rule == 'linear':
        M = np.asarray(spec['matrix'], dtype=float).reshape(m, n)
        return SetValuedMap(n=n, m=m, image=lambda x: SetRepr.singleton(M @ x), name=name)
    if rule == 'power':
        coef = float(spec.get('coef', 1.0))
        alpha = float(spec.get('alpha', 1.0))
        if n != 1 or m != 1:
            raise UsageError("power graphs map R to R")
        return SetValuedMap(n=1, m=1, name=name,
                            image=lambda x: SetRepr.singleton([coef * _odd_root(float(x[0]), alpha)]))
    if rule == 'branches':
        branches = [build_function(b, n) for b in spec.get('branches', [])]
        if not branches or m != 1:
            raise UsageError("branches needs scalar branch functions and m == 1")

        def image(x):
            values = [b(x) for b in branches]
            finite = [v for v in values if math.isfinite(v)]
            return SetRepr.cloud(np.array(finite)[:, None], 1) if finite else SetRepr.empty(1)
        return SetValuedMap(n=n, m=1, image=image, name=name)
    if rule == 'constant':
        pairs = spec.get('set', [[0.0, 0.0]])
        value = SetRepr.interval_union([[(-math.inf if lo is None else lo), (math.inf if hi is None else hi)]
                                        for lo, hi in pairs])
        return SetValuedMap(n=n, m=1, image=lambda x: value, name=name)
    raise UsageError(f"Unknown explicit graph rule {rule!r}")


def build_map(spec: Dict) -> SetValuedMap:
    """Set-valued map from a catalog entry."""
    family = spec.get('family')
    if family == 'epigraph':
        return make_epigraph_map(build_function(spec['function']))
    if family == 'subdiff':
        return build_subdifferential(spec['function']).as_map()
    if family == 'explicit_graph':
        return _explicit_graph(spec)
    if family == 'inverse':
        return invert_map(build_map(spec['map']))
    if family == 'plus':
        F = build_map(spec['map'])
        return add_single_valued(F, build_function(spec['function'], F.n))
    raise UsageError(f"Unknown map family {family!r}")


def map_problem(spec: ProblemSpec) -> Tuple[SetValuedMap, np.ndarray]:
    """(F, base) for a map problem; base is (xbar, ybar) concatenated."""
    require_kind(spec, 'map')
    F = build_map(spec.data.get('map', {}))
    if 'base' in spec.data:
        base = as_point(spec.data['base'], F.n + F.m)
    else:
        xbar = as_point(spec.data.get('xbar', [0.0] * F.n), F.n)
        ybar = as_point(spec.data.get('ybar', [0.0] * F.m), F.m)
        base = np.concatenate([xbar, ybar])
    return F, base


def function_problem(spec: ProblemSpec) -> Tuple[ScalarFn, np.ndarray]:
    require_kind(spec, 'function')
    f = build_function(spec.data.get('function', {}), spec.data.get('n'))
    return f, as_point(spec.data.get('xbar', [0.0] * f.n), f.n)


# ---------------------------------------------------------------------------
# LSIP
# ---------------------------------------------------------------------------

def build_lsip(spec: ProblemSpec) -> LsipProblem:
    """LSIP from {"n", "c", "family": {"kind": "parametric" | "finite", ...}, "N", "xbar"}."""
    require_kind(spec, 'lsip')
    data = spec.data
    n = int(data.get('n', 2))
    family = data.get('family') or {}
    xbar = data.get('xbar')
    if family.get('kind') == 'finite':
        rows = family.get('rows') or []
        if not rows:
            raise UsageError("A finite LSIP needs at least one row")
        A = np.array([as_point(a, n) for a, _ in rows])
        b = np.array([float(v) for _, v in rows])
        return LsipProblem(n=n, c=data['c'], A=A, b=b, xbar=xbar, name=spec.name)
    if family.get('kind') == 'parametric':
        t_range = tuple(float(v) for v in family.get('range', [0.0, 2 * math.pi]))
        param = ParametricFamily(curve=family.get('curve', 'circle'), b_spec=family.get('b', 'const:1'),
                                 t_range=t_range, periodic=bool(family.get('periodic', False)),
                                 params=family.get('params', {}))
        N = data.get('N', LSIP_SETTINGS['default_N'])
        if isinstance(N, bool) or not isinstance(N, int) or N < 2:
            raise UsageError(f"N must be an integer >= 2, got {N!r}")
        return LsipProblem(n=n, c=data['c'], family=param, N=N, xbar=xbar, name=spec.name)
    raise UsageError(f"LSIP family kind must be 'finite' or 'parametric', got {family.get('kind')!r}")


def list_problems(directory) -> List[ProblemSpec]:
    """Every parseable problem file in a directory, sorted by name."""
    specs = []
    for path in sorted(Path(directory).glob('*.json')):
        try:
            specs.append(load_problem(path))
        except UsageError as e:
            logger.warning(f"Skipping {path.name}: {e}")
    return specs
