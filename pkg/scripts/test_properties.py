#!/usr/bin/env python3
"""
Property-based checks of the primitives.
"""

import json
import math
from itertools import combinations

import numpy as np
import pytest

hypothesis = pytest.importorskip("hypothesis")
from hypothesis import assume, given
from hypothesis import strategies as st

from lib.holder_calculus import HomogeneousSampler, norm_lower, norm_outer
from lib.jsonl_utils import to_jsonable
from lib.lsip import LpStatus, solve_lp
from lib.penalty import closed_form_sharpness, reference_sharpness
from lib.regularity_moduli import sandwich_factor
from lib.setmap_core import HolderOrder, SetRepr, set_distance

finite_floats = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False, allow_infinity=False)
orders = st.floats(min_value=0.1, max_value=10.0, allow_nan=False)


@given(st.lists(st.tuples(finite_floats, finite_floats), min_size=1, max_size=8))
def test_interval_union_is_sorted_and_disjoint(pairs):
    S = SetRepr.interval_union([[min(a, b), max(a, b)] for a, b in pairs])
    intervals = S.intervals
    assert np.all(intervals[:, 0] <= intervals[:, 1])
    assert np.all(intervals[1:, 0] > intervals[:-1, 1])


@given(st.lists(st.tuples(finite_floats, finite_floats), min_size=1, max_size=10), finite_floats, finite_floats)
def test_cloud_distance(points, x, y):
    S = SetRepr.cloud(points)
    d = set_distance([x, y], S)
    assert d >= 0.0
    assert set_distance(points[0], S) == 0.0
    assert d <= math.hypot(x - points[0][0], y - points[0][1]) + 1e-9


@given(orders)
def test_order_inverse_round_trip(q):
    assert HolderOrder.of(q).inverse().inverse().q == pytest.approx(q)


@given(orders)
def test_sandwich_factor_range(q):
    c = sandwich_factor(q)
    assert 0.0 < c < 1.0 / (q + 1.0)


@given(st.floats(min_value=0.1, max_value=10.0), orders)
def test_linear_sampler_norms(a, q):
    H = HomogeneousSampler.from_function(lambda u: SetRepr.singleton(a * u), 1, 1, q)
    assert norm_outer(H).value == pytest.approx(a)
    assert norm_lower(H).value == pytest.approx(a)


@given(st.floats(min_value=0.05, max_value=2.0), st.floats(min_value=0.25, max_value=4.0),
       st.floats(min_value=0.1, max_value=10.0))
def test_domain_convention_dominates(s, p, r):
    assert closed_form_sharpness(s, p, r, "domain") >= closed_form_sharpness(s, p, r, "two_sided")
    if s * p <= 0.5:
        assert closed_form_sharpness(s, p, r, "domain") == reference_sharpness(s, p, r)


@given(st.integers(min_value=0, max_value=2 ** 31 - 1))
def test_simplex_matches_vertex_enumeration(seed):
    rng = np.random.default_rng(seed)
    A = np.vstack([rng.normal(size=(3, 2)), np.eye(2), -np.eye(2)])
    b = np.concatenate([rng.uniform(0.5, 2.0, 3), np.full(4, 5.0)])
    c = rng.normal(size=2)
    best = math.inf
    for i, j in combinations(range(A.shape[0]), 2):
        M = A[[i, j]]
        if abs(np.linalg.det(M)) < 1e-9:
            continue
        v = np.linalg.solve(M, b[[i, j]])
        if np.all(A @ v <= b + 1e-9):
            best = min(best, float(c @ v))
    assume(math.isfinite(best))
    solution = solve_lp(c, A, b)
    assert solution.status == LpStatus.OPTIMAL
    assert solution.objective == pytest.approx(best, rel=1e-8, abs=1e-8)
    assert np.all(A @ solution.x <= b + 1e-8)
    assert np.all(solution.multipliers >= 0.0)


@given(st.recursive(
    st.one_of(st.floats(), st.integers(), st.booleans(), st.text(max_size=5)),
    lambda children: st.lists(children, max_size=4) | st.dictionaries(st.text(max_size=5), children, max_size=4),
    max_leaves=12))
def test_jsonable_is_strict_json(value):
    json.dumps(to_jsonable(value), allow_nan=False)
