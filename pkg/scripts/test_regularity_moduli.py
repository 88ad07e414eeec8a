#!/usr/bin/env python3
"""
Regularity moduli estimated on annuli, and the criteria tying them to
derivative norms.
"""

import math
import warnings

import numpy as np
import pytest

import lib.regularity_moduli as regularity_moduli
from lib.catalog import build_function, build_map, build_subdifferential
from lib.errors import PreconditionError
from lib.holder_calculus import HomogeneousSampler, derivative_sampler
from lib.regularity_moduli import (
    ModulusVerdict, at_least, check_positive_definite, isolated_calmness_modulus, perturbation_bound_check,
    roughly_equal, sandwich_factor, sharp_minimum_modulus, strong_subregularity_modulus,
    subdiff_subregularity_vs_sharp, verify_calmness_criteria, verify_sharp_minimizer_sandwich,
    verify_srg_equals_derivative_norm,
)
from lib.setmap_core import SetRepr, SetValuedMap, grid_graph_sample, invert_map

EPIGRAPH_X2 = {'family': 'epigraph', 'function': {'family': 'power', 'alpha': 2}}


def identity_map():
    return SetValuedMap(n=1, m=1, image=lambda x: SetRepr.singleton(x),
                        inverse_image=lambda y: SetRepr.singleton(y), name="id")


class TestComparisons:

    def test_at_least_conventions(self):
        assert at_least(math.inf, math.inf, 0.1)
        assert at_least(0.96, 1.0, 0.05)
        assert not at_least(0.9, 1.0, 0.05)
        assert not at_least(5.0, math.inf, 0.05)
        assert at_least(0.0, 0.0, 0.05)

    def test_roughly_equal(self):
        assert roughly_equal(1.0, 1.04, 0.05)
        assert roughly_equal(0.0, 1e-8, 0.05)
        assert not roughly_equal(math.inf, 1e6, 0.05)

    def test_sandwich_factor(self):
        assert sandwich_factor(1.0) == pytest.approx(0.25)
        assert sandwich_factor(3.0) == pytest.approx(27.0 / 256.0)


class TestStrongSubregularity:

    def test_epigraph_second_order(self):
        report = strong_subregularity_modulus(build_map(EPIGRAPH_X2), [0.0, 0.0], 2)
        assert report.modulus == pytest.approx(1.0, rel=2e-2)
        assert report.verdict == ModulusVerdict.HOLDS
        assert report.witness_check

    def test_epigraph_first_order_fails(self):
        report = strong_subregularity_modulus(build_map(EPIGRAPH_X2), [0.0, 0.0], 1)
        assert report.modulus == 0.0
        assert report.verdict == ModulusVerdict.FAILS

    def test_identity(self):
        report = strong_subregularity_modulus(identity_map(), [0.0, 0.0], 1)
        assert report.modulus == pytest.approx(1.0, rel=2e-2)

    def test_off_graph_base(self):
        with pytest.raises(PreconditionError):
            strong_subregularity_modulus(identity_map(), [0.0, 1.0], 1)

    @pytest.mark.parametrize("q", [1.0, 2.0, 3.0])
    def test_agrees_with_lower_norm(self, q):
        assert verify_srg_equals_derivative_norm(build_map(EPIGRAPH_X2), [0.0, 0.0], q).passed


class TestIsolatedCalmness:

    def test_inverse_epigraph_second_order(self):
        S = invert_map(build_map(EPIGRAPH_X2))
        report = isolated_calmness_modulus(S, [0.0, 0.0], 2)
        assert report.modulus == pytest.approx(1.0, rel=2e-2)
        assert report.isolated

    def test_inverse_epigraph_first_order(self):
        S = invert_map(build_map(EPIGRAPH_X2))
        assert isolated_calmness_modulus(S, [0.0, 0.0], 1).modulus == 0.0

    def test_identity(self):
        report = isolated_calmness_modulus(identity_map(), [0.0, 0.0], 1)
        assert report.modulus == pytest.approx(1.0, rel=2e-2)


class TestSharpMinimum:

    @pytest.mark.parametrize("spec, q, expected", [
        ({'family': 'power', 'alpha': 2}, 2, 1.0),
        ({'family': 'power', 'alpha': 4}, 4, 1.0),
        ({'family': 'abs'}, 1, 1.0),
    ])
    def test_growth_order(self, spec, q, expected):
        report = sharp_minimum_modulus(build_function(spec), [0.0], q)
        assert report.modulus == pytest.approx(expected, rel=2e-2)
        assert report.verdict == ModulusVerdict.HOLDS

    def test_square_has_no_first_order_growth(self):
        report = sharp_minimum_modulus(build_function({'family': 'power', 'alpha': 2}), [0.0], 1)
        assert report.modulus == 0.0 and report.verdict == ModulusVerdict.FAILS

    def test_not_a_minimizer(self):
        report = sharp_minimum_modulus(build_function({'family': 'linear', 'a': [1.0]}), [0.0], 1)
        assert report.verdict == ModulusVerdict.FAILS
        assert report.notes

    def test_plane_norm(self):
        f = build_function({'family': 'norm', 'n': 2})
        assert sharp_minimum_modulus(f, [0.0, 0.0], 1).modulus == pytest.approx(1.0, rel=2e-2)


class TestSubdifferentialCriteria:

    @pytest.mark.parametrize("spec, q", [
        ({'family': 'power', 'alpha': 2}, 1.0),
        ({'family': 'power', 'alpha': 4}, 3.0),
        ({'family': 'abs'}, 1.0),
    ])
    def test_sandwich(self, spec, q):
        report = verify_sharp_minimizer_sandwich(build_subdifferential(spec), [0.0], q)
        assert report.passed, report.to_dict()

    def test_sandwich_normalised_quartic(self):
        report = verify_sharp_minimizer_sandwich(
            build_subdifferential({'family': 'power', 'alpha': 4, 'coef': 0.25}), [0.0], 3.0)
        assert report.upper == pytest.approx(1.0, rel=2e-2)
        assert report.lower == pytest.approx(27.0 / 256.0, rel=2e-2)

    def test_sandwich_needs_stationary_point(self):
        with pytest.raises(PreconditionError):
            verify_sharp_minimizer_sandwich(build_subdifferential({'family': 'power', 'alpha': 2}), [0.5], 1.0)

    def test_subregularity_vs_sharp_square(self):
        report = subdiff_subregularity_vs_sharp(build_subdifferential({'family': 'power', 'alpha': 2}), [0.0], 1.0)
        assert report.passed
        assert report.lhs == pytest.approx(2.0, rel=2e-2)
        assert report.rhs == pytest.approx(1.0, rel=2e-2)

    def test_subregularity_vs_sharp_abs(self):
        report = subdiff_subregularity_vs_sharp(build_subdifferential({'family': 'abs'}), [0.0], 1.0)
        assert report.passed

    def test_sandwich_holds_to_the_plain_slack(self, monkeypatch):
        real = regularity_moduli.sharp_minimum_modulus

        def inflated(*args, **kwargs):
            report = real(*args, **kwargs)
            report.modulus *= 4.0 * 1.08
            return report

        sub = build_subdifferential({'family': 'power', 'alpha': 2})
        assert verify_sharp_minimizer_sandwich(sub, [0.0], 1.0).passed
        monkeypatch.setattr(regularity_moduli, "sharp_minimum_modulus", inflated)
        report = verify_sharp_minimizer_sandwich(sub, [0.0], 1.0)
        assert report.middle > report.upper * 1.05
        assert not report.passed

    def test_domain_power_stationary_point_without_warnings(self):
        sub = build_subdifferential({'family': 'domain_power', 'alpha': 2.5})
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            assert sub.is_monotone()
            sub.require_stationary(np.array([0.0]))

    def test_concave_domain_power_is_rejected(self):
        sub = build_subdifferential({'family': 'domain_power', 'alpha': 0.5})
        assert sub([-1.0]).is_empty
        with pytest.raises(PreconditionError):
            sub.require_stationary(np.array([0.0]))


class TestCalmnessCriteria:

    def test_inverse_epigraph_all_hold(self):
        S = invert_map(build_map(EPIGRAPH_X2))
        report = verify_calmness_criteria(S, [0.0, 0.0], 2.0)
        assert report.direct and report.bounded_derivative and report.trivial_zero_image
        assert report.identity_holds

    def test_constant_map_all_fail(self):
        S = build_map({'family': 'explicit_graph', 'rule': 'constant', 'set': [[None, None]]})
        report = verify_calmness_criteria(S, [0.0, 0.0], 1.0)
        assert not report.direct and not report.bounded_derivative and not report.trivial_zero_image
        assert report.agreement

    def test_identity(self):
        report = verify_calmness_criteria(identity_map(), [0.0, 0.0], 1.0)
        assert report.direct and report.agreement
        assert report.modulus.modulus == pytest.approx(1.0, rel=2e-2)

    def test_graph_resolution_reaches_the_sampler(self):
        seen = []

        def sampler(center, radius, resolution):
            seen.append(resolution)
            return grid_graph_sample(identity_map(), center, radius, resolution)

        S = SetValuedMap(n=1, m=1, image=lambda x: SetRepr.singleton(x),
                         inverse_image=lambda y: SetRepr.singleton(y), graph_sampler=sampler, name="id")
        report = verify_calmness_criteria(S, [0.0, 0.0], 1.0, resolution=17)
        assert set(seen) == {17}
        assert report.direct


class TestPerturbation:

    def test_zero_perturbation(self):
        g = build_function({'family': 'linear', 'a': [0.0]})
        assert perturbation_bound_check(build_map(EPIGRAPH_X2), g, [0.0, 0.0], 2.0).passed

    def test_quadratic_perturbation(self):
        g = build_function({'family': 'power', 'alpha': 2, 'coef': 0.5})
        report = perturbation_bound_check(build_map(EPIGRAPH_X2), g, [0.0, 0.0], 2.0)
        assert report.passed
        assert report.srg_sum == pytest.approx(1.5, rel=5e-2)

    def test_identity_minus_half(self):
        g = build_function({'family': 'linear', 'a': [-0.5]})
        report = perturbation_bound_check(identity_map(), g, [0.0, 0.0], 1.0)
        assert report.passed
        assert report.srg_sum == pytest.approx(0.5, rel=5e-2)

    def test_rough_perturbation_rejected(self):
        g = build_function({'family': 'abs_power', 'alpha': 0.5})
        with pytest.raises(PreconditionError):
            perturbation_bound_check(identity_map(), g, [0.0, 0.0], 1.0)


class TestPositiveDefinite:

    def test_subdifferential_of_half_square(self):
        sub = build_subdifferential({'family': 'power', 'alpha': 2, 'coef': 0.5})
        report = check_positive_definite(derivative_sampler(sub.as_map(), [0.0, 0.0], 1.0), 1.0)
        assert report.positive
        assert report.modulus == pytest.approx(1.0, rel=2e-2)

    def test_low_order_of_quartic(self):
        sub = build_subdifferential({'family': 'power', 'alpha': 4})
        assert not check_positive_definite(derivative_sampler(sub.as_map(), [0.0, 0.0], 1.0)).positive

    def test_negative_map(self):
        H = HomogeneousSampler.from_function(lambda u: SetRepr.singleton(-u), 1, 1, 1.0)
        assert not check_positive_definite(H).positive
