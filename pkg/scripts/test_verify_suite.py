#!/usr/bin/env python3
"""
Property suite runner: record format, exit semantics, and that a
perturbed estimator is caught.
"""

import math
from dataclasses import replace

import pytest

import lib.verify_suite as verify_suite
from lib.jsonl_utils import load_jsonl, save_jsonl
from lib.verify_suite import SUITE_NAMES, PropertySuite, regressions, run_suite

RECORD_KEYS = {'property_id', 'reference', 'pass', 'lhs', 'rhs', 'slack'}


@pytest.fixture(scope="module")
def calculus_results():
    return run_suite("calculus", echo=False)


def test_suite_names():
    assert SUITE_NAMES == ("calculus", "moduli", "lsip", "penalty")


def test_calculus_suite_passes(calculus_results):
    assert calculus_results
    failed = [r['property_id'] for r in calculus_results if not r['pass']]
    assert not failed, failed


def test_records_have_the_fixed_keys(calculus_results):
    for record in calculus_results:
        assert set(record) == RECORD_KEYS


def test_property_ids_are_unique(calculus_results):
    ids = [r['property_id'] for r in calculus_results]
    assert len(ids) == len(set(ids))


def test_records_survive_jsonl(calculus_results, tmp_path):
    save_jsonl(calculus_results, tmp_path / "calculus.jsonl")
    assert [r['property_id'] for r in load_jsonl(tmp_path / "calculus.jsonl")] == \
        [r['property_id'] for r in calculus_results]


def test_inflated_lower_norm_is_detected(monkeypatch):
    real = verify_suite.norm_lower

    def inflated(H, tol=None):
        estimate = real(H, tol) if tol is not None else real(H)
        return replace(estimate, value=estimate.value * 1.1)

    monkeypatch.setattr(verify_suite, "norm_lower", inflated)
    results = run_suite("calculus", echo=False)
    failed = [r['property_id'] for r in results if not r['pass']]
    assert any(pid.startswith("calculus.epigraph_trichotomy") for pid in failed)


def test_raising_check_is_recorded_as_failure():
    suite = PropertySuite(echo=False)

    def broken():
        raise RuntimeError("boom")

    suite.suites['calculus'] = [broken]
    results = suite.run("calculus")
    assert results == [{'property_id': 'calculus.broken', 'reference': 'check raised an exception',
                        'pass': False, 'lhs': 'RuntimeError', 'rhs': 'boom', 'slack': None}]
    assert not suite.passed


def test_unknown_suite():
    with pytest.raises(ValueError):
        PropertySuite(echo=False).run("geometry")


@pytest.mark.slow
@pytest.mark.parametrize("suite", ["moduli", "lsip", "penalty"])
def test_remaining_suites_pass(suite):
    results = run_suite(suite, echo=False)
    failed = [r['property_id'] for r in results if not r['pass']]
    assert not failed, failed


def test_new_property_checks_are_registered():
    suites = PropertySuite(echo=False).suites
    calculus = {check.__name__ for check in suites['calculus']}
    moduli = {check.__name__ for check in suites['moduli']}
    assert {'check_perturbed_lower_norm', 'check_epigraph_lower_vs_subderivative'} <= calculus
    assert {'check_calmness_duality', 'check_sharp_vs_subderivative'} <= moduli


def test_perturbed_lower_norm_records(calculus_results):
    records = [r for r in calculus_results if r['property_id'].startswith("calculus.perturbed_lower_norm.")]
    assert len(records) == 9
    assert all(r['pass'] for r in records)


def test_epigraph_lower_norm_matches_subderivative_norm(calculus_results):
    records = {r['property_id']: r for r in calculus_results
               if r['property_id'].startswith("calculus.epigraph_lower_vs_subderivative.")}
    assert len(records) == len(verify_suite.SUBDERIVATIVE_CASES)
    assert records["calculus.epigraph_lower_vs_subderivative.x2.q2"]['rhs'] == pytest.approx(1.0, rel=5e-2)
    assert records["calculus.epigraph_lower_vs_subderivative.x2.q3"]['lhs'] == math.inf
    assert all(r['pass'] for r in records.values())


def test_inversion_compares_images_per_direction(calculus_results):
    ids = {r['property_id'] for r in calculus_results}
    assert {"calculus.inversion.cubic.images", "calculus.inversion.epigraph.images"} <= ids


def test_inversion_catches_a_shifted_image(monkeypatch):
    real = verify_suite.derivative_sampler

    def shifted(F, base, q, **kwargs):
        H = real(F, base, q, **kwargs)
        if q < 1:
            H.images = [img.translated([0.5]) if not img.is_empty else img for img in H.images]
        return H

    monkeypatch.setattr(verify_suite, "derivative_sampler", shifted)
    suite = PropertySuite(echo=False)
    suite.check_inversion()
    by_id = {r['property_id']: r for r in suite.results}
    assert not by_id["calculus.inversion.cubic.images"]['pass']


def test_regressions_lists_lost_passes():
    baseline = [{'property_id': 'a', 'pass': True}, {'property_id': 'b', 'pass': True},
                {'property_id': 'c', 'pass': False}]
    results = [{'property_id': 'a', 'pass': True}, {'property_id': 'c', 'pass': True}]
    assert regressions(results, baseline) == ['b']
    assert regressions(results + [{'property_id': 'b', 'pass': False}], baseline) == ['b']
    assert regressions(baseline, []) == []


@pytest.mark.slow
def test_calmness_duality():
    suite = PropertySuite(echo=False)
    suite.check_calmness_duality()
    assert len(suite.results) == 4
    failed = [r['property_id'] for r in suite.results if not r['pass']]
    assert not failed, failed


@pytest.mark.slow
def test_sharp_modulus_against_subderivative_norm():
    suite = PropertySuite(echo=False)
    suite.check_sharp_vs_subderivative()
    upper = [r for r in suite.results if r['property_id'].startswith("moduli.sharp_vs_subderivative.")]
    equal = [r for r in suite.results if r['property_id'].startswith("moduli.sharp_equals_subderivative.")]
    assert len(upper) == len(equal) == len(verify_suite.SUBDERIVATIVE_CASES) + 1
    failed = [r['property_id'] for r in suite.results if not r['pass']]
    assert not failed, failed


@pytest.mark.slow
def test_srg_sweep_covers_every_catalog_map():
    suite = PropertySuite(echo=False)
    suite.check_srg_equals_lower_norm()
    ids = [r['property_id'] for r in suite.results]
    for label in ('epigraph_x2', 'inverse_cubic', 'linear_2x', 'subdiff_cubic', *verify_suite.EXTRA_MAPS):
        assert {f"moduli.srg_vs_lower.{label}.q{q}" for q in (1, 2, 3)} <= set(ids)
    by_id = {r['property_id']: r for r in suite.results}
    assert by_id["moduli.srg_vs_lower.linear_2x.q2"]['lhs'] == [math.inf, 'holds']
    assert by_id["moduli.srg_vs_lower.subdiff_cubic.q1"]['lhs'][1] == 'fails'
    failed = [pid for pid, r in by_id.items() if not r['pass']]
    assert not failed, failed


@pytest.mark.slow
def test_sandwich_uses_the_plain_slack():
    suite = PropertySuite(echo=False)
    suite.check_sharp_sandwich()
    assert {r['slack'] for r in suite.results} == {suite.tol.slack}
    assert all(r['pass'] for r in suite.results)
