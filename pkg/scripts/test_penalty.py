#!/usr/bin/env python3
"""
Penalty thresholds, the two readings of the power example, and the
subderivative identities behind them.
"""

import math

import pytest

from config.paths import PROBLEMS_DIR
from lib.catalog import build_function, load_problem
from lib.errors import PreconditionError, UsageError
from lib.penalty import (
    PenaltyProblem, SufficiencyVerdict, active_inequalities, build_penalty, closed_form_sharpness,
    compare_conventions, converse_condition_check, kstar_sample, max_composition_check, penalty_fn,
    penalty_threshold, power_example, power_identity_check, reference_sharpness, sharp_penalty_check,
    superadditivity_check,
)
from lib.regularity_moduli import ModulusVerdict


def one_d(f_spec, g_specs, p=1.0, r=3.0):
    return PenaltyProblem(f=build_function(f_spec), g=[build_function(g) for g in g_specs],
                          p=p, r=r, xbar=[0.0])


class TestPenaltyFunction:

    def test_two_sided_example(self):
        ell = penalty_fn(power_example(0.5, 1.0, 2.0))
        assert ell(-1.0) == pytest.approx(1.0)
        assert ell(2.0) == pytest.approx(6.0)

    def test_domain_example_is_infinite_left_of_zero(self):
        ell = penalty_fn(power_example(0.5, 1.0, 2.0, convention="domain"))
        assert ell(-1.0) == math.inf
        assert ell(1.0) == pytest.approx(3.0)

    def test_active_indices_are_zero_based(self):
        problem = one_d({'family': 'linear', 'a': [1.0]},
                        [{'family': 'linear', 'a': [1.0], 'd': -1.0}, {'family': 'abs'}])
        assert active_inequalities(problem) == [1]

    @pytest.mark.parametrize("p, r", [(0.0, 1.0), (1.0, 0.0), (-1.0, 2.0)])
    def test_weights_must_be_positive(self, p, r):
        with pytest.raises(UsageError):
            power_example(0.5, p, r)

    def test_unknown_convention(self):
        with pytest.raises(UsageError):
            power_example(0.5, 1.0, 1.0, convention="symmetric")

    def test_xbar_outside_domain(self):
        with pytest.raises(UsageError):
            PenaltyProblem(f=build_function({'family': 'domain_power', 'alpha': 1.0}),
                           g=[build_function({'family': 'abs'})], p=1.0, r=1.0, xbar=[-1.0])


class TestKstar:

    def test_increasing_objective(self):
        problem = one_d({'family': 'linear', 'a': [1.0]}, [{'family': 'abs'}])
        assert kstar_sample(problem, 1) == [[-1.0]]

    def test_sharp_objective(self):
        problem = one_d({'family': 'abs'}, [{'family': 'abs'}])
        assert kstar_sample(problem, 1) == []

    def test_concave_objective(self):
        problem = one_d({'family': 'abs', 'coef': -1.0}, [{'family': 'abs'}])
        assert kstar_sample(problem, 1) == [[-1.0], [1.0]]


class TestThreshold:

    def test_two_sided(self):
        report = penalty_threshold(power_example(0.5, 1.0, 3.0), 1)
        assert report.active == [0]
        assert report.b == pytest.approx(-1.0)
        assert report.a == pytest.approx(1.0, rel=2e-2)
        assert report.rho0 == pytest.approx(1.0, rel=2e-2)
        assert report.verdict == SufficiencyVerdict.SUFFICIENT
        assert report.kstar_nonempty

    def test_domain(self):
        report = penalty_threshold(power_example(0.5, 1.0, 3.0, convention="domain"), 1)
        assert report.rho0 == 0.0
        assert not report.kstar_nonempty
        assert report.verdict == SufficiencyVerdict.SUFFICIENT

    def test_flat_constraint_is_insufficient(self):
        report = penalty_threshold(power_example(1.0, 1.0, 3.0), 1)
        assert report.verdict == SufficiencyVerdict.INSUFFICIENT
        assert report.rho0 == math.inf

    def test_objective_infinite_everywhere(self):
        f = build_function({'family': 'domain_power', 'alpha': 1.0, 'domain': [[0.0, 0.0]]})
        problem = PenaltyProblem(f=f, g=[build_function({'family': 'abs'})], p=1.0, r=1.0, xbar=[0.0])
        with pytest.raises(PreconditionError):
            penalty_threshold(problem, 1)

    def test_box_corner(self):
        problem = build_penalty(load_problem(PROBLEMS_DIR / "box_corner.json"))
        report = penalty_threshold(problem, 1)
        assert report.active == [0, 1]
        assert report.b == pytest.approx(-math.sqrt(2), rel=1e-4)
        assert report.rho0 == pytest.approx(2.0, rel=2e-2)


class TestSharpPenalty:

    def test_above_threshold_is_sharp(self):
        check = sharp_penalty_check(power_example(0.5, 1.0, 3.0), 1)
        assert check.positive and check.consistent
        assert check.sharp.modulus == pytest.approx(2.0, rel=2e-2)

    def test_below_threshold(self):
        check = sharp_penalty_check(power_example(0.5, 1.0, 3.0), 1, r=0.5)
        assert check.r == 0.5
        assert check.sharp.verdict == ModulusVerdict.FAILS
        assert check.consistent

    def test_superadditivity(self):
        checks = superadditivity_check(power_example(0.5, 1.0, 3.0), 1)
        assert checks and all(c.holds for c in checks)

    def test_power_identity(self):
        g = build_function({'family': 'abs'})
        result = power_identity_check(g, [0.0], [1.0], 2.0, 2.0)
        assert result['pass']
        assert result['lhs'] == pytest.approx(1.0, rel=2e-2)

    @pytest.mark.parametrize("u, expected", [(1.0, 1.0), (-1.0, 0.0)])
    def test_max_composition(self, u, expected):
        g = build_function({'family': 'linear', 'a': [1.0]})
        result = max_composition_check(g, [0.0], [u], 1.0)
        assert result['pass'] and result['differentiable']
        assert result['rhs'] == pytest.approx(expected)

    def test_converse(self):
        report = converse_condition_check(power_example(0.5, 1.0, 3.0), 1)
        assert report.f_differentiable and report.sharp_minimizer
        assert report.condition_holds and report.consistent

    def test_converse_needs_one_constraint(self):
        problem = build_penalty(load_problem(PROBLEMS_DIR / "box_corner.json"))
        with pytest.raises(UsageError):
            converse_condition_check(problem, 1)


class TestConventions:

    @pytest.mark.parametrize("sp, two_sided, domain", [
        (0.25, math.inf, math.inf),
        (0.5, 2.0, 4.0),
        (1.0, 0.0, 1.0),
    ])
    def test_closed_forms(self, sp, two_sided, domain):
        assert closed_form_sharpness(sp, 1.0, 3.0, "two_sided") == two_sided
        assert closed_form_sharpness(sp, 1.0, 3.0, "domain") == domain

    def test_reference_table(self):
        assert reference_sharpness(0.25, 1.0, 3.0) == math.inf
        assert reference_sharpness(0.5, 1.0, 3.0) == 4.0
        assert reference_sharpness(1.0, 1.0, 3.0) == 0.0

    def test_boundary_case_flags_two_sided(self):
        result = compare_conventions(0.5, 1.0, 3.0)
        assert result['published'] == 4.0
        assert result['flagged'] == ['two_sided']
        assert result['conventions']['domain']['matches_reference']
        assert result['conventions']['two_sided']['numeric'] == pytest.approx(2.0, rel=2e-2)
        assert result['conventions']['domain']['numeric_matches_closed_form']

    def test_above_boundary_flags_domain(self):
        assert compare_conventions(1.0, 1.0, 3.0)['flagged'] == ['domain']

    def test_problem_files(self):
        two_sided = build_penalty(load_problem(PROBLEMS_DIR / "power_penalty_two_sided.json"))
        domain = build_penalty(load_problem(PROBLEMS_DIR / "power_penalty_domain.json"))
        assert two_sided.convention == "two_sided" and domain.convention == "domain"
        assert (two_sided.p, two_sided.r) == (1.0, 3.0)

    def test_cli_weights_override_file(self):
        problem = build_penalty(load_problem(PROBLEMS_DIR / "power_penalty_domain.json"), p=2.0, r=5.0)
        assert (problem.p, problem.r) == (2.0, 5.0)
