#!/usr/bin/env python3
"""
LSIP model, simplex solver and the calmness analysis of the solution map.
"""

import math

import numpy as np
import pytest

from config.paths import PROBLEMS_DIR
from lib.catalog import build_lsip, load_problem
from lib.errors import CombinatorialCapError, PreconditionError, UsageError
from lib.lsip import (
    LpStatus, LsipProblem, ParametricFamily, active_indices, calmness_certificate, canonical_f, discretize,
    empirical_calmness, enc_check, feasibility_residual, finite_index_criterion, in_cone, in_level_set,
    slater_check, solution_map, solve_lp, solve_problem, uniqueness_probe,
)
from lib.lsip.problem import continuity_defect, parse_b_spec

SEMICIRCLE_XBAR = np.array([-1.0, 0.0])
EDGE_HALF_WIDTH = math.tan(math.pi / 720)


@pytest.fixture(scope="module")
def semicircle():
    return build_lsip(load_problem(PROBLEMS_DIR / "semicircle.json"))


@pytest.fixture(scope="module")
def lp_nondegenerate():
    return build_lsip(load_problem(PROBLEMS_DIR / "lp_nondegenerate.json"))


def finite(rows, c):
    A = np.array([a for a, _ in rows], dtype=float)
    b = np.array([v for _, v in rows], dtype=float)
    return LsipProblem(n=A.shape[1], c=c, A=A, b=b)


class TestModel:

    def test_closed_grid_includes_endpoints(self):
        problem = LsipProblem(n=2, c=[1.0, 0.0], family=ParametricFamily(curve='circle'), N=5)
        np.testing.assert_allclose(discretize(problem).index_values,
                                   [0.0, math.pi / 2, math.pi, 3 * math.pi / 2, 2 * math.pi])

    def test_periodic_grid_counts_distinct_indices(self, semicircle):
        ts = discretize(semicircle).index_values
        assert ts.size == 720
        assert ts[360] == pytest.approx(math.pi, abs=1e-12)

    def test_finite_problem_passes_through(self, lp_nondegenerate):
        assert discretize(lp_nondegenerate) is lp_nondegenerate

    def test_single_point_grid_rejected(self, semicircle):
        with pytest.raises(UsageError):
            discretize(semicircle, 1)

    def test_b_specs(self):
        assert parse_b_spec("const:2")[0] == 'const'
        kind, coeffs = parse_b_spec("poly:1,0.5")
        assert kind == 'poly' and coeffs.tolist() == [1.0, 0.5]
        with pytest.raises(UsageError):
            parse_b_spec("exp:1")

    def test_unknown_curve(self):
        with pytest.raises(UsageError):
            ParametricFamily(curve='spiral')

    def test_continuity_of_circle(self):
        _, _, ok = continuity_defect(ParametricFamily(curve='circle'), 100)
        assert ok

    def test_cost_dimension_checked(self):
        with pytest.raises(UsageError):
            LsipProblem(n=2, c=[1.0], A=[[1.0, 0.0]], b=[1.0])


class TestSimplex:

    def test_nonnegative_minimum(self):
        solution = solve_lp([1.0], [[-1.0]], [0.0])
        assert solution.is_optimal and solution.objective == pytest.approx(0.0)

    def test_unbounded(self):
        assert solve_lp([1.0]).status == LpStatus.UNBOUNDED

    def test_infeasible(self):
        assert solve_lp([1.0], [[1.0], [-1.0]], [-1.0, -1.0]).status == LpStatus.INFEASIBLE

    def test_multipliers(self):
        solution = solve_lp([1.0, 1.0], [[-1.0, 0.0], [0.0, -1.0]], [0.0, 0.0])
        np.testing.assert_allclose(solution.multipliers, [1.0, 1.0], atol=1e-9)

    def test_equality_rows(self):
        solution = solve_lp([1.0, 2.0], A_eq=[[1.0, 1.0]], b_eq=[1.0], nonnegative=True)
        assert solution.objective == pytest.approx(1.0)
        np.testing.assert_allclose(solution.x, [1.0, 0.0], atol=1e-9)

    def test_non_finite_data_rejected(self):
        with pytest.raises(UsageError):
            solve_lp([math.inf])

    def test_semicircle_optimum(self, semicircle):
        solution = solve_problem(semicircle)
        assert solution.is_optimal
        assert solution.x[0] == pytest.approx(-1.0, abs=1e-9)
        assert abs(solution.x[1]) <= EDGE_HALF_WIDTH + 1e-9

    def test_cone_membership(self):
        generators = np.array([[1.0, 0.0], [0.0, 1.0]])
        assert in_cone(np.array([1.0, 2.0]), generators)
        assert not in_cone(np.array([-1.0, 0.0]), generators)
        assert in_cone(np.zeros(2), np.zeros((0, 2)))


class TestFeasibility:

    @pytest.mark.parametrize("x, expected", [([-1.0, 0.0], 0.0), ([0.0, 0.0], -1.0), ([2.0, 0.0], 1.0)])
    def test_residual(self, semicircle, x, expected):
        assert feasibility_residual(x, None, semicircle) == pytest.approx(expected, abs=1e-12)

    def test_slater_semicircle(self, semicircle):
        report = slater_check(semicircle)
        assert report.holds
        assert report.slack == pytest.approx(1.0)

    def test_slater_fails_on_a_point(self):
        assert not slater_check(finite([([1.0], 0.0), ([-1.0], 0.0)], [1.0])).holds

    def test_slater_half_line(self):
        assert slater_check(finite([([1.0], 1.0)], [-1.0])).holds

    def test_active_at_pi(self, semicircle):
        active = active_indices(SEMICIRCLE_XBAR, None, semicircle)
        assert len(active.indices) == 1
        assert active.values[0] == pytest.approx(math.pi)

    def test_interior_point_has_no_active_index(self, semicircle):
        assert active_indices([0.0, 0.0], None, semicircle).indices == []

    def test_two_tight_rows(self, lp_nondegenerate):
        assert active_indices([0.0, 0.0], None, lp_nondegenerate).indices == [0, 1]

    def test_infeasible_point(self, semicircle):
        with pytest.raises(PreconditionError):
            active_indices([2.0, 0.0], None, semicircle)

    def test_level_set_identity(self, semicircle):
        alpha = float(semicircle.c @ SEMICIRCLE_XBAR)
        assert in_level_set(semicircle, SEMICIRCLE_XBAR, alpha)
        assert not in_level_set(semicircle, [-0.5, 0.0], alpha)


class TestCanonicalFunction:

    def test_matches_closed_form(self, semicircle):
        f = canonical_f(semicircle, SEMICIRCLE_XBAR)
        rng = np.random.default_rng(3)
        for x in rng.uniform(-2.0, 2.0, size=(50, 2)):
            assert f(x) == pytest.approx(max(x[0] + 1.0, math.hypot(*x) - 1.0), abs=1e-12)

    def test_values(self, semicircle):
        f = canonical_f(semicircle, SEMICIRCLE_XBAR)
        assert f(SEMICIRCLE_XBAR) == 0.0
        assert f([0.0, 0.0]) == pytest.approx(1.0)

    def test_infeasible_xbar(self, semicircle):
        with pytest.raises(PreconditionError):
            canonical_f(semicircle, [2.0, 0.0])

    def test_discretised_max_for_finite_problems(self, lp_nondegenerate):
        f = canonical_f(lp_nondegenerate, [0.0, 0.0])
        assert f([1.0, -2.0]) == pytest.approx(2.0)


class TestEnc:

    def test_semicircle_fails_at_pi(self, semicircle):
        report = enc_check(semicircle, SEMICIRCLE_XBAR)
        assert not report.holds and report.slater
        assert report.violating_values == [pytest.approx(math.pi)]

    def test_nondegenerate_lp_holds(self, lp_nondegenerate):
        assert enc_check(lp_nondegenerate, [0.0, 0.0]).holds

    def test_empty_active_set(self):
        assert enc_check(finite([([1.0], 1.0)], [1.0]), [0.0]).holds

    def test_without_slater(self):
        report = enc_check(finite([([1.0], 0.0), ([-1.0], 0.0)], [1.0]), [0.0])
        assert not report.holds and not report.slater

    def test_cap(self, lp_nondegenerate):
        with pytest.raises(CombinatorialCapError):
            enc_check(lp_nondegenerate, [0.0, 0.0], cap=1)


class TestUniqueness:

    def test_semicircle_refinement(self, semicircle):
        unique, details = uniqueness_probe(semicircle, SEMICIRCLE_XBAR)
        assert unique
        assert details['spread_refined'] < details['spread']

    def test_vertex(self, lp_nondegenerate):
        assert uniqueness_probe(lp_nondegenerate, [0.0, 0.0])[0]

    def test_non_optimal_xbar(self, lp_nondegenerate):
        with pytest.raises(PreconditionError):
            uniqueness_probe(lp_nondegenerate, [1.0, 1.0])

    def test_flat_face(self):
        problem = finite([([-1.0, 0.0], 0.0), ([0.0, -1.0], 0.0), ([0.0, 1.0], 1.0)], [1.0, 0.0])
        assert not uniqueness_probe(problem, [0.0, 0.0])[0]


class TestCalmness:

    def test_semicircle_second_order(self, semicircle):
        cert = calmness_certificate(semicircle, SEMICIRCLE_XBAR, 2)
        assert cert.certified
        assert cert.estimate.value == pytest.approx(0.25, abs=0.02)
        assert cert.chain_agrees
        assert not cert.finite_criterion.applicable

    def test_semicircle_first_order(self, semicircle):
        cert = calmness_certificate(semicircle, SEMICIRCLE_XBAR, 1)
        assert not cert.certified
        assert cert.estimate.value <= 1e-3

    def test_nondegenerate_lp_first_order(self, lp_nondegenerate):
        cert = calmness_certificate(lp_nondegenerate, [0.0, 0.0], 1)
        assert cert.certified and cert.chain_agrees
        assert cert.finite_criterion.applicable and cert.finite_criterion.holds

    def test_requires_slater(self):
        with pytest.raises(PreconditionError):
            calmness_certificate(finite([([1.0], 0.0), ([-1.0], 0.0)], [1.0]), [0.0], 1)

    def test_finite_criterion_modulus(self, lp_nondegenerate):
        criterion = finite_index_criterion(lp_nondegenerate, [0.0, 0.0], 1)
        assert criterion.outer == pytest.approx(math.sqrt(2), rel=2e-2)
        assert criterion.modulus == pytest.approx(1 / math.sqrt(2), rel=2e-2)

    def test_solution_map_over_rhs(self, lp_nondegenerate):
        S = solution_map(lp_nondegenerate, [0.0, 0.0])
        np.testing.assert_allclose(S([0.5, 0.25]).points[0], [-0.5, -0.25], atol=1e-9)

    def test_solution_map_needs_finite_index_set(self, semicircle):
        with pytest.raises(UsageError):
            solution_map(semicircle, SEMICIRCLE_XBAR)

    def test_empirical_semicircle(self, semicircle):
        result = empirical_calmness(semicircle, SEMICIRCLE_XBAR, 2)
        assert result.min_quotient >= 0.05
        assert result.samples > 0

    def test_empirical_uniform_lift(self, lp_nondegenerate):
        lift = {'one': lambda t: np.ones_like(t)}
        result = empirical_calmness(lp_nondegenerate, [0.0, 0.0], 1, profiles=lift, deltas=(1e-2,))
        assert result.min_quotient == pytest.approx(1 / math.sqrt(2), rel=1e-6)

    def test_empirical_rejects_zero_delta(self, lp_nondegenerate):
        with pytest.raises(UsageError):
            empirical_calmness(lp_nondegenerate, [0.0, 0.0], 1, deltas=(0.0,))
