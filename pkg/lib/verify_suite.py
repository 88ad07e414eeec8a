#!/usr/bin/env python3
"""
Property Verification Suite
Runs the identities and inequalities of the toolkit on fixed fixtures and
records one result per property check.
"""

import logging
import math
from itertools import combinations
from typing import Callable, Dict, List, Optional

import numpy as np

from config.paths import PROBLEMS_DIR, STATUS_GLYPHS
from lib.catalog import (
    build_function, build_lsip, build_map, build_subdifferential, list_problems, load_problem, map_problem,
)
from lib.holder_calculus import (
    HomogeneousSampler, default_cluster_tol, derivative_sampler, hadamard_subderivative, norm_facts,
    norm_lower, norm_outer, norm_star, subderivative_norm,
)
from lib.lsip import (
    calmness_certificate, canonical_f, empirical_calmness, enc_check, in_level_set, slater_check,
    solve_lp,
)
from lib.penalty import (
    SufficiencyVerdict, compare_conventions, converse_condition_check, max_composition_check,
    penalty_threshold, power_example, power_identity_check, sharp_penalty_check, superadditivity_check,
)
from lib.regularity_moduli import (
    ModulusVerdict, at_least, check_positive_definite, isolated_calmness_modulus, perturbation_bound_check,
    roughly_equal, sharp_minimum_modulus, strong_subregularity_modulus,
    subdiff_subregularity_vs_sharp, verify_calmness_criteria, verify_sharp_minimizer_sandwich,
    verify_srg_equals_derivative_norm,
)
from lib.run_config import RunConfig
from lib.setmap_core import SetRepr, fn_sum, invert_map

logger = logging.getLogger(__name__)

SUITE_NAMES = ("calculus", "moduli", "lsip", "penalty")

EPIGRAPH_X2 = {'family': 'epigraph', 'function': {'family': 'power', 'alpha': 2}}
LINEAR_2X = {'family': 'explicit_graph', 'rule': 'linear', 'matrix': [[2.0]]}
QUARTIC_QUARTER = {'family': 'power', 'alpha': 4, 'coef': 0.25}
SUBDIFF_CUBIC = {'family': 'subdiff', 'function': QUARTIC_QUARTER}
SUBDIFF_ABS = {'family': 'subdiff', 'function': {'family': 'abs'}}
EPIGRAPH_ABS = {'family': 'epigraph', 'function': {'family': 'abs'}}
POWER_GRAPH = {'family': 'explicit_graph', 'rule': 'power', 'alpha': 2.0}

# Catalog maps without a problem file of their own.
EXTRA_MAPS = {
    'subdiff_abs': SUBDIFF_ABS,
    'epigraph_x2_plus_x': {'family': 'plus', 'map': EPIGRAPH_X2, 'function': {'family': 'linear', 'a': [1.0]}},
    'power_graph': POWER_GRAPH,
}

# (label, function entry, q) with a finite-dimensional sharp modulus equal to the subderivative norm.
SUBDERIVATIVE_CASES = (
    ("x2", {'family': 'power', 'alpha': 2}, 1.0),
    ("x2", {'family': 'power', 'alpha': 2}, 2.0),
    ("x2", {'family': 'power', 'alpha': 2}, 3.0),
    ("abs", {'family': 'abs'}, 1.0),
    ("x4_normalised", QUARTIC_QUARTER, 4.0),
    ("linear", {'family': 'linear', 'a': [1.0]}, 1.0),
    ("abs_power_1.5", {'family': 'abs_power', 'alpha': 1.5}, 1.5),
)


class PropertySuite:
    """Runs property checks and collects {property_id, reference, pass, lhs, rhs, slack} records."""

    def __init__(self, config: Optional[RunConfig] = None, echo: bool = True):
        self.config = config or RunConfig()
        self.tol = self.config.tolerances
        self.echo = echo
        self.results: List[Dict] = []
        self.suites: Dict[str, List[Callable]] = {
            'calculus': [self.check_epigraph_trichotomy, self.check_duality, self.check_norm_ordering,
                         self.check_norm_facts, self.check_sum_rule, self.check_inversion,
                         self.check_perturbed_lower_norm, self.check_epigraph_lower_vs_subderivative],
            'moduli': [self.check_srg_equals_lower_norm, self.check_sharp_sandwich,
                       self.check_subdiff_vs_sharp, self.check_calmness_criteria,
                       self.check_perturbation, self.check_positive_definite,
                       self.check_calmness_duality, self.check_sharp_vs_subderivative],
            'lsip': [self.check_semicircle_calmness, self.check_slater, self.check_enc,
                     self.check_level_set_identity, self.check_lp_against_vertices,
                     self.check_discretisation_stability, self.check_empirical_calmness],
            'penalty': [self.check_threshold, self.check_threshold_soundness, self.check_superadditivity,
                        self.check_power_identity, self.check_max_composition, self.check_converse,
                        self.check_conventions],
        }

    # ------------------------------------------------------------------
    # Bookkeeping
    # ------------------------------------------------------------------

    def record(self, property_id: str, reference: str, passed: bool, lhs=None, rhs=None,
               slack: Optional[float] = None):
        self.results.append({'property_id': property_id, 'reference': reference, 'pass': bool(passed),
                             'lhs': lhs, 'rhs': rhs, 'slack': slack})
        if self.echo:
            glyph = STATUS_GLYPHS['pass'] if passed else STATUS_GLYPHS['fail']
            print(f"   {glyph} {property_id}: lhs={lhs} rhs={rhs}")

    def run(self, suite: str = "all") -> List[Dict]:
        names = SUITE_NAMES if suite == "all" else (suite,)
        for name in names:
            if name not in self.suites:
                raise ValueError(f"Unknown suite {name!r}; choose from {SUITE_NAMES + ('all',)}")
            if self.echo:
                print(f"\n🧪 Suite: {name}")
            for check in self.suites[name]:
                try:
                    check()
                except Exception as e:
                    logger.exception(f"{check.__name__} raised")
                    self.record(f"{name}.{check.__name__}", "check raised an exception", False,
                                lhs=type(e).__name__, rhs=str(e))
        return self.results

    @property
    def passed(self) -> bool:
        return all(r['pass'] for r in self.results)

    def print_summary(self):
        failed = [r for r in self.results if not r['pass']]
        print("\n" + "=" * 50)
        print(f"📊 {len(self.results)} checks, {len(self.results) - len(failed)} passed, {len(failed)} failed")
        for r in failed:
            print(f"   {STATUS_GLYPHS['fail']} {r['property_id']}")

    def _sampler(self, spec: Dict, base, q: float):
        F = build_map(spec)
        return F, derivative_sampler(F, base, q, grid=self.config.grid(F.n), ladder=self.config.ladder(),
                                     tol=self.tol, parallel=self.config.parallel)

    # ------------------------------------------------------------------
    # Calculus of homogeneous maps
    # ------------------------------------------------------------------

    def check_epigraph_trichotomy(self):
        ref = "lower norm of the order-q derivative of the epigraph of x^2 at the origin"
        expected = {1.0: 0.0, 2.0: 1.0, 3.0: math.inf}
        for q, target in expected.items():
            _, H = self._sampler(EPIGRAPH_X2, [0.0, 0.0], q)
            value = norm_lower(H, self.tol).value
            if math.isinf(target):
                ok = value == math.inf
            else:
                ok = abs(value - target) <= (1e-2 if target == 0 else 2e-2)
            self.record(f"calculus.epigraph_trichotomy.q{q:g}", ref, ok, value, target, 2e-2)

    def check_duality(self):
        ref = "lower norm of H equals the outer norm of H^-1 to the power -q"
        for label, spec, q in (("epigraph", EPIGRAPH_X2, 2.0), ("cubic", SUBDIFF_CUBIC, 3.0),
                               ("linear", LINEAR_2X, 1.0)):
            _, H = self._sampler(spec, [0.0, 0.0], q)
            lower = norm_lower(H, self.tol).value
            outer_inv = norm_outer(H.inverse(), self.tol).value
            rhs = outer_inv ** (-q) if outer_inv > 0 else math.inf
            self.record(f"calculus.duality.{label}", ref,
                        roughly_equal(lower, rhs, self.tol.slack, self.tol.eps_pos), lower, rhs, self.tol.slack)

    def check_norm_ordering(self):
        ref = "star norm is at most the lower norm for square maps"
        for label, spec, q in (("epigraph", EPIGRAPH_X2, 2.0), ("cubic", SUBDIFF_CUBIC, 3.0)):
            _, H = self._sampler(spec, [0.0, 0.0], q)
            star, lower = norm_star(H, self.tol).value, norm_lower(H, self.tol).value
            self.record(f"calculus.norm_ordering.{label}", ref,
                        star <= lower * (1 + self.tol.slack) + self.tol.eps_pos, star, lower, self.tol.slack)

    def check_norm_facts(self):
        ref = "structural consequences of the lower and outer norms"
        samplers = {label: self._sampler(spec, [0.0, 0.0], q)[1]
                    for label, spec, q in (("epigraph", EPIGRAPH_X2, 2.0), ("cubic", SUBDIFF_CUBIC, 3.0),
                                           ("linear", LINEAR_2X, 1.0))}
        samplers['trivial'] = HomogeneousSampler.from_function(
            lambda u: SetRepr.singleton([0.0]) if not np.any(u) else SetRepr.empty(1), 1, 1, 1.0,
            name="trivial")
        for label, H in samplers.items():
            facts = norm_facts(H, self.tol)
            failed = [k for k, v in facts.items() if not v]
            self.record(f"calculus.norm_facts.{label}", ref, not failed, failed, [], None)

    def check_sum_rule(self):
        ref = "subderivative of f + g equals f'_q + g'_q for differentiable g"
        f = build_function({'family': 'abs'})
        g = build_function({'family': 'linear', 'a': [3.0]})
        total = fn_sum([f, g])
        ladder = self.config.ladder()
        for u in (-1.0, 1.0):
            lhs = hadamard_subderivative(total, [0.0], [u], 1.0, ladder, self.tol).value
            rhs = hadamard_subderivative(f, [0.0], [u], 1.0, ladder, self.tol).value + 3.0 * u
            self.record(f"calculus.sum_rule.u{u:+g}", ref,
                        roughly_equal(lhs, rhs, 0.02, self.tol.eps_pos), lhs, rhs, 0.02)
        _, H = self._sampler(LINEAR_2X, [0.0, 0.0], 1.0)
        F_plus = build_map({'family': 'plus', 'map': LINEAR_2X, 'function': {'family': 'linear', 'a': [1.0]}})
        sampled = derivative_sampler(F_plus, [0.0, 0.0], 1.0, grid=self.config.grid(1),
                                     ladder=ladder, tol=self.tol)
        lhs = norm_lower(sampled, self.tol).value
        rhs = norm_lower(H.plus(lambda u: u), self.tol).value
        self.record("calculus.sum_rule.graphical", "derivative of F + g equals D_qF + D_qg",
                    roughly_equal(lhs, rhs, 0.02, self.tol.eps_pos), lhs, rhs, 0.02)

    def check_inversion(self):
        ref = "derivative of the inverse at order 1/q is the inverse of the order-q derivative"
        for label, spec, q in (("cubic", SUBDIFF_CUBIC, 3.0), ("epigraph", EPIGRAPH_X2, 2.0)):
            F, H = self._sampler(spec, [0.0, 0.0], q)
            ladder = self.config.ladder()
            inv = derivative_sampler(invert_map(F), [0.0, 0.0], 1.0 / q, grid=self.config.grid(1),
                                     ladder=ladder, tol=self.tol)
            expected = H.inverse()
            lhs, rhs = norm_outer(inv, self.tol).value, norm_outer(expected, self.tol).value
            self.record(f"calculus.inversion.{label}", ref,
                        roughly_equal(lhs, rhs, self.tol.slack, self.tol.eps_pos), lhs, rhs, self.tol.slack)

            cluster = default_cluster_tol(ladder, 1.0 / q)
            mismatched = [float(u[0]) for u, img in zip(inv.directions, inv.images)
                          if not img.matches(expected.image_at(u), tol=cluster, rel=self.tol.slack)]
            self.record(f"calculus.inversion.{label}.images", "images of both inverses agree direction by direction",
                        not mismatched, mismatched, [], cluster)

    def check_perturbed_lower_norm(self):
        ref = "lower norm of H + g is at least the lower norm of H minus the outer norm of g"
        rng = np.random.default_rng(self.config.seed)
        grid = self.config.grid(1)
        for label, spec, q in (("epigraph", EPIGRAPH_X2, 2.0), ("cubic", SUBDIFF_CUBIC, 3.0),
                               ("linear", LINEAR_2X, 1.0)):
            _, H = self._sampler(spec, [0.0, 0.0], q)
            lower = norm_lower(H, self.tol).value
            for k, a in enumerate(rng.uniform(-2.0, 2.0, size=3)):
                def g(u, a=float(a), q=q):
                    return np.array([a * np.sign(u[0]) * abs(u[0]) ** q])

                G = HomogeneousSampler.from_function(lambda u, g=g: SetRepr.singleton(g(u)), 1, 1, q,
                                                     grid=grid, name=f"{a:+.3f}·x^{q:g}")
                lhs = norm_lower(H.plus(g), self.tol).value
                rhs = lower - norm_outer(G, self.tol).value
                self.record(f"calculus.perturbed_lower_norm.{label}.g{k}", ref,
                            at_least(lhs, rhs, self.tol.slack), lhs, rhs, self.tol.slack)

    def check_epigraph_lower_vs_subderivative(self):
        ref = "lower norm of the derivative of epi f equals the subderivative norm of f"
        grid, ladder = self.config.grid(1), self.config.ladder()
        for label, spec, q in SUBDERIVATIVE_CASES:
            F = build_map({'family': 'epigraph', 'function': spec})
            H = derivative_sampler(F, [0.0, 0.0], q, grid=grid, ladder=ladder, tol=self.tol,
                                   parallel=self.config.parallel)
            lhs = norm_lower(H, self.tol).value
            rhs = subderivative_norm(build_function(spec), [0.0], q, grid=grid, ladder=ladder, tol=self.tol,
                                     parallel=self.config.parallel).value
            self.record(f"calculus.epigraph_lower_vs_subderivative.{label}.q{q:g}", ref,
                        roughly_equal(lhs, rhs, self.tol.slack, self.tol.eps_pos), lhs, rhs, self.tol.slack)

    # ------------------------------------------------------------------
    # Regularity moduli
    # ------------------------------------------------------------------

    def _catalog_maps(self) -> List:
        """(label, F, base) for every map problem file plus the catalog maps without one."""
        maps = []
        for spec in list_problems(PROBLEMS_DIR):
            if spec.kind == 'map':
                F, base = map_problem(spec)
                maps.append((spec.name, F, base))
        for label, entry in EXTRA_MAPS.items():
            F = build_map(entry)
            maps.append((label, F, np.zeros(F.n + F.m)))
        return maps

    def check_srg_equals_lower_norm(self):
        ref = "strong subregularity modulus equals the lower norm of the derivative"
        for label, F, base in self._catalog_maps():
            for q in (1.0, 2.0, 3.0):
                report = verify_srg_equals_derivative_norm(F, base, q, radii=self.config.radii(),
                                                           ladder=self.config.ladder(),
                                                           grid=self.config.grid(F.n), tol=self.tol)
                lhs, rhs = report.lhs, report.rhs
                if math.isinf(lhs) or math.isinf(rhs):
                    verdicts_agree = lhs == rhs and report.details['srg_verdict'] == ModulusVerdict.HOLDS.value
                elif min(lhs, rhs) <= self.tol.eps_pos:
                    verdicts_agree = report.details['srg_verdict'] == ModulusVerdict.FAILS.value
                else:
                    verdicts_agree = True
                self.record(f"moduli.srg_vs_lower.{label}.q{q:g}", ref, report.passed and verdicts_agree,
                            [lhs, report.details['srg_verdict']], [rhs, report.details['lower_verdict']],
                            self.tol.slack)

    def check_sharp_sandwich(self):
        ref = "sharp minimizer modulus sits between c_q and 1 times the star norm of D_q of the subdifferential"
        for label, spec, q in (("x2", {'family': 'power', 'alpha': 2}, 1.0),
                               ("x4", {'family': 'power', 'alpha': 4}, 3.0),
                               ("x4_normalised", QUARTIC_QUARTER, 3.0)):
            report = verify_sharp_minimizer_sandwich(build_subdifferential(spec), [0.0], q,
                                                     radii=self.config.radii(), ladder=self.config.ladder(),
                                                     tol=self.tol)
            self.record(f"moduli.sandwich.{label}", ref, report.passed,
                        [report.lower, report.middle], report.upper, self.tol.slack)

    def check_subdiff_vs_sharp(self):
        ref = "subregularity of the subdifferential against sharp minimality of f"
        for label, spec, q in (("x2", {'family': 'power', 'alpha': 2}, 1.0), ("x4_normalised", QUARTIC_QUARTER, 3.0)):
            report = subdiff_subregularity_vs_sharp(build_subdifferential(spec), [0.0], q,
                                                    radii=self.config.radii(), ladder=self.config.ladder(),
                                                    tol=self.tol)
            self.record(f"moduli.subdiff_vs_sharp.{label}", ref,
                        report.passed and report.details['star_bounds'], report.lhs, report.rhs,
                        self.tol.chained_slack)

    def check_calmness_criteria(self):
        ref = "isolated calmness, bounded derivative of order 1/q and trivial zero image agree"
        S = invert_map(build_map(SUBDIFF_CUBIC))
        report = verify_calmness_criteria(S, [0.0, 0.0], 3.0, radii=self.config.radii(),
                                          ladder=self.config.ladder(), grid=self.config.grid(1), tol=self.tol,
                                          resolution=self.config.graph_resolution)
        self.record("moduli.calmness_criteria.cubic_inverse", ref,
                    report.agreement and report.direct and report.identity_holds is not False,
                    report.modulus.modulus, report.outer.value, self.tol.chained_slack)

    def check_perturbation(self):
        ref = "srg_q(F + g) >= srg_q F - outer norm of D_q g"
        F = build_map(EPIGRAPH_X2)
        g = build_function({'family': 'power', 'alpha': 2, 'coef': -0.5})
        report = perturbation_bound_check(F, g, [0.0, 0.0], 2.0, radii=self.config.radii(),
                                          ladder=self.config.ladder(), grid=self.config.grid(1), tol=self.tol)
        self.record("moduli.perturbation.epigraph", ref, report.passed, report.srg_sum,
                    report.srg_base - report.derivative_norm, self.tol.slack)

    def check_positive_definite(self):
        ref = "star norm of D_qF bounds srg_q F from below for square maps"
        F, H = self._sampler(SUBDIFF_CUBIC, [0.0, 0.0], 3.0)
        definite = check_positive_definite(H, 3.0, self.tol)
        srg = strong_subregularity_modulus(F, [0.0, 0.0], 3.0, radii=self.config.radii(),
                                           grid=self.config.grid(1), tol=self.tol).modulus
        ok = definite.positive and definite.modulus <= srg * (1 + self.tol.slack)
        self.record("moduli.positive_definite.cubic", ref, ok, definite.modulus, srg, self.tol.slack)

    def check_calmness_duality(self):
        ref = "isolated calmness modulus of F^-1 equals the strong subregularity modulus of F"
        for label, spec, q in (("epigraph_x2", EPIGRAPH_X2, 2.0), ("epigraph_abs", EPIGRAPH_ABS, 1.0),
                               ("cubic", SUBDIFF_CUBIC, 3.0), ("power_graph", POWER_GRAPH, 2.0)):
            F = build_map(spec)
            # ybar = xbar = 0, so one base serves both orientations
            base = np.zeros(F.n + F.m)
            clm = isolated_calmness_modulus(invert_map(F), base, q, radii=self.config.radii(),
                                            resolution=self.config.graph_resolution, tol=self.tol,
                                            seed=self.config.seed)
            srg = strong_subregularity_modulus(F, base, q, radii=self.config.radii(),
                                               grid=self.config.grid(F.n), tol=self.tol, seed=self.config.seed)
            ok = roughly_equal(clm.modulus, srg.modulus, self.tol.slack, self.tol.eps_pos) or \
                clm.verdict == srg.verdict == ModulusVerdict.FAILS
            self.record(f"moduli.calmness_duality.{label}.q{q:g}", ref, ok, clm.modulus, srg.modulus,
                        self.tol.slack)

    def check_sharp_vs_subderivative(self):
        cases = SUBDERIVATIVE_CASES + (("norm_plane", {'family': 'norm', 'n': 2, 'alpha': 1}, 1.0),)
        for label, spec, q in cases:
            f = build_function(spec)
            xbar = np.zeros(f.n)
            shrp = sharp_minimum_modulus(f, xbar, q, radii=self.config.radii(), grid=self.config.grid(f.n),
                                         tol=self.tol, seed=self.config.seed).modulus
            norm = subderivative_norm(f, xbar, q, grid=self.config.grid(f.n), ladder=self.config.ladder(),
                                      tol=self.tol, parallel=self.config.parallel).value
            self.record(f"moduli.sharp_vs_subderivative.{label}.q{q:g}",
                        "sharp minimum modulus is at most the subderivative norm",
                        at_least(norm, shrp, self.tol.slack), shrp, norm, self.tol.slack)
            self.record(f"moduli.sharp_equals_subderivative.{label}.q{q:g}",
                        "in finite dimensions the sharp minimum modulus equals the subderivative norm",
                        roughly_equal(shrp, norm, self.tol.slack, self.tol.eps_pos), shrp, norm, self.tol.slack)

    # ------------------------------------------------------------------
    # LSIP
    # ------------------------------------------------------------------

    def _lsip(self, name: str):
        problem = build_lsip(load_problem(PROBLEMS_DIR / f"{name}.json"))
        return problem, problem.xbar

    def check_semicircle_calmness(self):
        problem, xbar = self._lsip("semicircle")
        for q, lo, hi in ((2.0, 0.23, 0.27), (1.0, 0.0, 1e-3)):
            cert = calmness_certificate(problem, xbar, q, grid=self.config.grid(2), ladder=self.config.ladder(),
                                        tol=self.tol, parallel=self.config.parallel)
            value = cert.estimate.value
            self.record(f"lsip.semicircle_calmness.q{q:g}", "subderivative norm of the canonical function",
                        lo <= value <= hi, value, [lo, hi], None)
            self.record(f"lsip.chain_agreement.semicircle.q{q:g}",
                        "sharp minimizer and subderivative verdicts agree", cert.chain_agrees,
                        cert.sharp.modulus, value, None)
        problem, xbar = self._lsip("lp_nondegenerate")
        cert = calmness_certificate(problem, xbar, 1.0, grid=self.config.grid(2), ladder=self.config.ladder(),
                                    tol=self.tol)
        crit = cert.finite_criterion
        ok = cert.certified and cert.chain_agrees and crit.applicable and bool(crit.holds)
        self.record("lsip.chain_agreement.lp_nondegenerate.q1",
                    "finite-index criterion agrees with the certificate", ok, cert.estimate.value, crit.modulus, None)

    def check_slater(self):
        ref = "strictly feasible point exists"
        for name, expected in (("semicircle", True), ("two_sided_zero", False), ("half_line", True)):
            problem, _ = self._lsip(name)
            report = slater_check(problem)
            self.record(f"lsip.slater.{name}", ref, report.holds == expected, report.holds, expected, None)

    def check_enc(self):
        ref = "extended Nurnberger condition by active subset enumeration"
        problem, xbar = self._lsip("semicircle")
        report = enc_check(problem, xbar, cap=self.config.enc_cap)
        values = report.violating_values or []
        ok = not report.holds and len(values) == 1 and abs(values[0] - math.pi) <= 1e-9
        self.record("lsip.enc.semicircle", ref, ok, values, [math.pi], None)
        problem, xbar = self._lsip("lp_nondegenerate")
        report = enc_check(problem, xbar, cap=self.config.enc_cap)
        self.record("lsip.enc.lp_nondegenerate", ref, report.holds, report.holds, True, None)

    def check_level_set_identity(self):
        ref = "solution set equals the zero sublevel set of the canonical function and a level set"
        rng = np.random.default_rng(self.config.seed)
        for name in ("semicircle", "lp_nondegenerate"):
            problem, xbar = self._lsip(name)
            f = canonical_f(problem, xbar)
            alpha = float(problem.c @ xbar)
            points = np.vstack([xbar[None, :], xbar + rng.uniform(-1.0, 1.0, size=(99, problem.n))])
            mismatches = sum((f(x) <= 1e-9) != in_level_set(problem, x, alpha, tol=1e-9) for x in points)
            self.record(f"lsip.level_set.{name}", ref, mismatches == 0, mismatches, 0, None)

    def check_lp_against_vertices(self):
        ref = "simplex optimum equals vertex enumeration"
        rng = np.random.default_rng(self.config.seed)
        worst = 0.0
        for _ in range(200):
            A = np.vstack([rng.normal(size=(4, 2)), np.eye(2), -np.eye(2)])
            b = np.concatenate([rng.uniform(0.5, 2.0, 4), np.full(4, 10.0)])
            c = rng.normal(size=2)
            best = math.inf
            for i, j in combinations(range(A.shape[0]), 2):
                M = A[[i, j]]
                if abs(np.linalg.det(M)) < 1e-12:
                    continue
                v = np.linalg.solve(M, b[[i, j]])
                if np.all(A @ v <= b + 1e-9):
                    best = min(best, float(c @ v))
            solution = solve_lp(c, A, b)
            worst = max(worst, abs(solution.objective - best) / (1.0 + abs(best)))
        self.record("lsip.lp_vs_vertices", ref, worst <= 1e-8, worst, 1e-8, None)

    def check_discretisation_stability(self):
        ref = "certificate value is stable between N and 2N"
        problem, xbar = self._lsip("semicircle")
        coarse = problem.N // 2
        values = []
        for N in (coarse, problem.N):
            problem.N = N
            values.append(calmness_certificate(problem, xbar, 2.0, grid=self.config.grid(2),
                                               ladder=self.config.ladder(), tol=self.tol,
                                               finite_check=False).estimate.value)
        a, b = values
        self.record("lsip.discretisation_stability", ref, roughly_equal(a, b, 0.05), a, b, 0.05)

    def check_empirical_calmness(self):
        ref = "perturbation quotients stay above zero for a calm solution map"
        problem, xbar = self._lsip("semicircle")
        report = empirical_calmness(problem, xbar, 2.0, parallel=self.config.parallel)
        self.record("lsip.empirical_calmness.semicircle", ref, report.min_quotient >= 0.05,
                    report.min_quotient, 0.05, None)

    # ------------------------------------------------------------------
    # Penalty
    # ------------------------------------------------------------------

    def check_threshold(self):
        ref = "penalty threshold rho0 = -b/a"
        report = penalty_threshold(power_example(0.5, 1.0, 3.0, "two_sided"), 1.0, ladder=self.config.ladder(),
                                   tol=self.tol)
        self.record("penalty.threshold.two_sided", ref, abs(report.rho0 - 1.0) <= 2e-2, report.rho0, 1.0, 2e-2)
        report = penalty_threshold(power_example(0.5, 1.0, 3.0, "domain"), 1.0, ladder=self.config.ladder(),
                                   tol=self.tol)
        self.record("penalty.threshold.domain", ref,
                    report.rho0 == 0.0 and not report.kstar_nonempty, report.rho0, 0.0, None)

    def check_threshold_soundness(self):
        ref = "r = 2 rho0 + 1 gives a sharp minimizer of the penalty function"
        for s, p in ((0.5, 1.0), (0.25, 2.0)):
            problem = power_example(s, p, 1.0, "two_sided")
            rho0 = penalty_threshold(problem, 1.0, ladder=self.config.ladder(), tol=self.tol).rho0
            check = sharp_penalty_check(problem, 1.0, r=2 * rho0 + 1, ladder=self.config.ladder(), tol=self.tol)
            ok = check.threshold.verdict == SufficiencyVerdict.SUFFICIENT and check.positive and check.consistent
            self.record(f"penalty.soundness.s{s:g}_p{p:g}", ref, ok, check.sharp.modulus, rho0, None)

    def check_superadditivity(self):
        ref = "(l_p)'_q >= f'_q + r * sum of powered constraint subderivatives"
        for s, p, r, convention in ((0.5, 1.0, 3.0, "two_sided"), (0.25, 2.0, 2.0, "two_sided"),
                                    (0.5, 1.0, 3.0, "domain")):
            checks = superadditivity_check(power_example(s, p, r, convention), 1.0,
                                           ladder=self.config.ladder(), tol=self.tol)
            ok = all(c.holds for c in checks)
            self.record(f"penalty.superadditivity.{convention}.s{s:g}_p{p:g}", ref, ok,
                        [c.penalty_sub for c in checks], [c.lower_bound for c in checks], 2e-2)

    def check_power_identity(self):
        ref = "[(g+)'_{q/p}]^p equals ((g+)^p)'_q"
        for s, p in ((0.25, 2.0), (0.5, 1.0), (0.5, 2.0)):
            g = build_function({'family': 'abs_power', 'alpha': 2 * s})
            for u in (-1.0, 1.0):
                result = power_identity_check(g, [0.0], [u], 1.0, p, self.config.ladder(), self.tol)
                self.record(f"penalty.power_identity.s{s:g}_p{p:g}.u{u:+g}", ref, result['pass'],
                            result['lhs'], result['rhs'], 2e-2)

    def check_max_composition(self):
        ref = "(g+)'_q = max{0, g'_q} for differentiable g"
        for a in (1.0, -3.0):
            g = build_function({'family': 'linear', 'a': [a]})
            for u in (-1.0, 1.0):
                result = max_composition_check(g, [0.0], [u], 1.0, self.config.ladder(), self.tol)
                self.record(f"penalty.max_composition.a{a:g}.u{u:+g}", ref, result['pass'],
                            result['lhs'], result['rhs'], 2e-2)

    def check_converse(self):
        ref = "with one constraint, sharpness of l_p forces the sufficiency condition"
        report = converse_condition_check(power_example(0.5, 1.0, 3.0, "two_sided"), 1.0,
                                          ladder=self.config.ladder(), tol=self.tol)
        self.record("penalty.converse.two_sided", ref, report.consistent and report.sharp_minimizer,
                    report.condition_holds, True, None)

    def check_conventions(self):
        ref = "numeric sharpness matches the closed form under each convention"
        for s in (0.25, 0.5, 1.0):
            table = compare_conventions(s, 1.0, 3.0, tol=self.tol)
            for convention, row in table['conventions'].items():
                self.record(f"penalty.conventions.s{s:g}.{convention}", ref, row['numeric_matches_closed_form'],
                            row['numeric'], row['closed_form'], 2e-2)


def run_suite(suite: str = "all", config: Optional[RunConfig] = None, echo: bool = True) -> List[Dict]:
    suite_runner = PropertySuite(config, echo=echo)
    results = suite_runner.run(suite)
    if echo:
        suite_runner.print_summary()
    return results


def regressions(results: List[Dict], baseline: List[Dict]) -> List[str]:
    """Property ids that passed in the baseline and now fail or are missing."""
    current = {r['property_id']: r['pass'] for r in results}
    return [r['property_id'] for r in baseline
            if r.get('pass') and not current.get(r['property_id'], False)]
