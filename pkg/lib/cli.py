#!/usr/bin/env python3
"""
holder-reg command line
Analyze problem files, run the property suites, and write JSON reports with
their per-scale CSV mirrors.

Usage:
    python main.py analyze fn-sharp --q 2 data/problems/power2.json
    python main.py analyze deriv-norm --q 2 --problem data/problems/epigraph_x2.json
    python main.py verify all
    python main.py lsip calmness --q 2 data/problems/semicircle.json
    python main.py penalty conventions --s 0.5 --p 1 --r 3
"""

import argparse
import json
import logging
import math
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from config.paths import STATUS_GLYPHS, ensure_directories
from lib.catalog import (
    ProblemSpec, build_lsip, function_problem, load_problem, map_problem, require_kind,
)
from lib.errors import HolderRegError, PreconditionError, UsageError
from lib.holder_calculus import (
    LimitEstimate, derivative_sampler, norm_facts, norm_lower, norm_outer, norm_star, subderivative_norm,
)
from lib.jsonl_utils import load_jsonl, save_jsonl, write_json, write_scale_csv
from lib.lsip import (
    active_indices, calmness_certificate, empirical_calmness, enc_check, slater_check,
    solve_problem,
)
from lib.penalty import build_penalty, compare_conventions, penalty_threshold, sharp_penalty_check
from lib.regularity_moduli import (
    RegularityReport, sharp_minimum_modulus, strong_subregularity_modulus, verify_calmness_criteria,
)
from lib.run_config import RunConfig, load_run_config
from lib.verify_suite import SUITE_NAMES, regressions, run_suite

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_PRECONDITION = 3

ANALYZE_KINDS = ('fn-sharp', 'map-subreg', 'map-calmness', 'deriv-norm')
LSIP_ACTIONS = ('solve', 'slater', 'enc', 'calmness', 'empirical')
PENALTY_ACTIONS = ('threshold', 'check', 'conventions')

REFERENCES = {
    'fn-sharp': "q-order sharp minimum modulus: liminf of (f(x) - f(xbar)) / |x - xbar|^q",
    'map-subreg': "q-order strong subregularity modulus equals the lower norm of D_qF",
    'map-calmness': "q-order isolated calmness: modulus, outer norm of D_{1/q}S, trivial zero image",
    'deriv-norm': "norms of the q-order graphical derivative (lower, outer, star)",
    'solve': "discretised LSIP solved by two-phase simplex",
    'slater': "Slater point of the LSIP constraint system",
    'enc': "extended Nürnberger condition by subset enumeration",
    'calmness': "q-order isolated calmness certified by a positive subderivative norm of the canonical function",
    'empirical': "minimum of |perturbation| / |x(b) - xbar|^q over perturbed LSIP instances",
    'threshold': "sharp minimizers of the l_p penalty function for r above rho0",
    'check': "l_p penalty sharp minimizer test, direct and by threshold",
    'conventions': "power example under the two-sided and domain-restricted conventions",
}


# ---------------------------------------------------------------------------
# Shared options and output
# ---------------------------------------------------------------------------

def add_common_arguments(parser, problem: bool = True, q: bool = True):
    """Options every action accepts, plus the problem file when the action reads one."""
    if problem:
        parser.add_argument('problem_file', nargs='?', help='Problem JSON file')
        parser.add_argument('--problem', dest='problem_opt', help='Problem JSON file (alternative to positional)')
    if q:
        parser.add_argument('--q', type=float, required=True, help='Hölder order q > 0')
    parser.add_argument('--config', help='Run config JSON (else HOLDERREG_CONFIG)')
    parser.add_argument('--out-dir', help='Directory for reports')
    parser.add_argument('--parallel', type=int, help='Worker threads for direction sweeps')
    parser.add_argument('--seed', type=int, help='Seed for high-dimensional direction sampling')
    parser.add_argument('--verbose', '-v', action='store_true', help='Debug logging')


def resolve_config(args) -> RunConfig:
    overrides = {'out_dir': getattr(args, 'out_dir', None),
                 'parallel': getattr(args, 'parallel', None),
                 'seed': getattr(args, 'seed', None)}
    return load_run_config(getattr(args, 'config', None), overrides)


def resolve_problem(args) -> ProblemSpec:
    path = getattr(args, 'problem_opt', None) or getattr(args, 'problem_file', None)
    if not path:
        raise UsageError("A problem file is required (positional or --problem)")
    return load_problem(path)


def require_q(q: float) -> float:
    if not (q > 0 and math.isfinite(q)):
        raise UsageError(f"--q must be a positive finite number, got {q}")
    return q


def scale_rows(result) -> List[Tuple[int, float, float]]:
    """Per-direction rows when the estimate has them, else the per-scale trace as direction 0."""
    if isinstance(result, LimitEstimate):
        if result.per_direction:
            return list(result.per_direction)
        return [(0, t, v) for t, v in result.per_scale]
    if isinstance(result, RegularityReport):
        return [(0, r, v) for r, v in result.trace]
    return []


def write_report(config: RunConfig, stem: str, report: Dict, rows: Optional[Sequence] = None) -> Path:
    out_dir = Path(config.out_dir)
    ensure_directories(out_dir)
    path = write_json(report, out_dir / f"{stem}.json")
    if rows:
        write_scale_csv(rows, out_dir / f"{stem}.csv")
    print(f"📄 Report: {path}")
    return path


def envelope(command: str, action: str, spec: Optional[ProblemSpec], q: Optional[float], result) -> Dict:
    return {'command': command, 'action': action, 'problem': spec.name if spec else None,
            'q': q, 'reference': REFERENCES.get(action, ""), 'result': result}


def show_value(label: str, value, ok: Optional[bool] = None):
    glyph = '' if ok is None else (STATUS_GLYPHS['pass'] if ok else STATUS_GLYPHS['warn']) + ' '
    print(f"   {glyph}{label}: {value}")


# ---------------------------------------------------------------------------
# analyze
# ---------------------------------------------------------------------------

def add_analyze_commands(subparsers):
    """Add regularity analysis commands to the argument parser."""
    analyze_parser = subparsers.add_parser('analyze', help='Estimate a regularity quantity')
    analyze_subparsers = analyze_parser.add_subparsers(dest='analyze_action', help='Quantities')

    sharp_parser = analyze_subparsers.add_parser('fn-sharp', help='Sharp minimum modulus of a function')
    add_common_arguments(sharp_parser)

    subreg_parser = analyze_subparsers.add_parser('map-subreg', help='Strong subregularity modulus of a map')
    add_common_arguments(subreg_parser)

    calm_parser = analyze_subparsers.add_parser('map-calmness', help='Isolated calmness criteria of a map')
    add_common_arguments(calm_parser)

    norm_parser = analyze_subparsers.add_parser('deriv-norm', help='Norms of the graphical derivative')
    add_common_arguments(norm_parser)


def handle_analyze_commands(args) -> int:
    """Handle analyze actions."""
    q = require_q(args.q)
    config = resolve_config(args)
    spec = resolve_problem(args)
    tol = config.tolerances
    action = args.analyze_action

    print(f"🔬 analyze {action}: {spec.name} (q={q:g})")
    print("=" * 60)

    if action == 'fn-sharp':
        f, xbar = function_problem(spec)
        report = sharp_minimum_modulus(f, xbar, q, radii=config.radii(), grid=config.grid(f.n), tol=tol,
                                       seed=config.seed)
        show_value("shrp", report.modulus)
        show_value("verdict", report.verdict.value, report.verdict.value == 'holds')
        rows, result = scale_rows(report), report

    elif action == 'map-subreg':
        F, base = map_problem(spec)
        report = strong_subregularity_modulus(F, base, q, radii=config.radii(), grid=config.grid(F.n),
                                              tol=tol, seed=config.seed)
        H = derivative_sampler(F, base, q, grid=config.grid(F.n), ladder=config.ladder(), tol=tol,
                               parallel=config.parallel)
        lower = norm_lower(H, tol)
        show_value("srg", report.modulus)
        show_value("lower norm of D_qF", lower.value)
        result = {'modulus': report, 'derivative_lower_norm': lower}
        rows = scale_rows(report)

    elif action == 'map-calmness':
        S, base = map_problem(spec)
        criteria = verify_calmness_criteria(S, base, q, radii=config.radii(), ladder=config.ladder(),
                                            grid=config.grid(S.n), tol=tol,
                                            resolution=config.graph_resolution)
        show_value("clm", criteria.modulus.modulus)
        show_value("criteria agree", criteria.agreement, criteria.agreement)
        result = {'criteria': criteria, 'modulus': criteria.modulus, 'outer': criteria.outer}
        rows = scale_rows(criteria.outer) or scale_rows(criteria.modulus)

    elif action == 'deriv-norm':
        if spec.kind == 'function':
            f, xbar = function_problem(spec)
            estimate = subderivative_norm(f, xbar, q, grid=config.grid(f.n), ladder=config.ladder(),
                                          tol=tol, parallel=config.parallel)
            show_value("subderivative norm", estimate.value)
            result, rows = {'subderivative_norm': estimate}, scale_rows(estimate)
        else:
            F, base = map_problem(spec)
            H = derivative_sampler(F, base, q, grid=config.grid(F.n), ladder=config.ladder(), tol=tol,
                                   parallel=config.parallel)
            lower, outer = norm_lower(H, tol), norm_outer(H, tol)
            result = {'lower': lower, 'outer': outer, 'facts': norm_facts(H, tol)}
            if F.n == F.m:
                result['star'] = norm_star(H, tol)
            for key in ('lower', 'outer', 'star'):
                if key in result:
                    show_value(f"{key} norm", result[key].value)
            rows = scale_rows(lower)
    else:
        raise UsageError(f"Unknown analyze action {action!r}")

    write_report(config, f"analyze_{action}_{spec.name}", envelope('analyze', action, spec, q, result), rows)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def add_verify_commands(subparsers):
    """Add property suite commands to the argument parser."""
    verify_parser = subparsers.add_parser('verify', help='Run the property suites')
    verify_parser.add_argument('suite', choices=SUITE_NAMES + ('all',), help='Suite to run')
    add_common_arguments(verify_parser, problem=False, q=False)
    verify_parser.add_argument('--baseline', help='Earlier verify_<suite>.jsonl to compare against')


def handle_verify_commands(args) -> int:
    """Handle verify; exit 0 only when every property passes."""
    config = resolve_config(args)
    baseline = None
    if getattr(args, 'baseline', None):
        if not Path(args.baseline).exists():
            raise UsageError(f"Baseline file not found: {args.baseline}")
        baseline = load_jsonl(args.baseline)
    print(f"🧪 Property suite: {args.suite}")
    print("=" * 60)
    results = run_suite(args.suite, config)
    write_report(config, f"verify_{args.suite}", results)
    save_jsonl(results, Path(config.out_dir) / f"verify_{args.suite}.jsonl")

    if baseline is not None:
        regressed = regressions(results, baseline)
        show_value(f"regressions against {args.baseline}", len(regressed), not regressed)
        for property_id in regressed:
            print(f"   {STATUS_GLYPHS['fail']} {property_id}")
        if regressed:
            return EXIT_FAILED
    return EXIT_OK if all(r['pass'] for r in results) else EXIT_FAILED


# ---------------------------------------------------------------------------
# lsip
# ---------------------------------------------------------------------------

def add_lsip_commands(subparsers):
    """Add linear semi-infinite programming commands to the argument parser."""
    lsip_parser = subparsers.add_parser('lsip', help='LSIP solution mapping analysis')
    lsip_subparsers = lsip_parser.add_subparsers(dest='lsip_action', help='LSIP actions')

    add_common_arguments(lsip_subparsers.add_parser('solve', help='Solve the discretised problem'), q=False)
    add_common_arguments(lsip_subparsers.add_parser('slater', help='Look for a Slater point'), q=False)
    add_common_arguments(lsip_subparsers.add_parser('enc', help='Check the extended Nürnberger condition'),
                         q=False)
    add_common_arguments(lsip_subparsers.add_parser('calmness', help='Certify q-order isolated calmness'))
    add_common_arguments(lsip_subparsers.add_parser('empirical', help='Perturbation-based calmness estimate'))


def _lsip_xbar(spec: ProblemSpec, problem):
    if problem.xbar is not None:
        return problem.xbar
    solution = solve_problem(problem)
    if not solution.is_optimal:
        raise PreconditionError(f"{spec.name}: no xbar given and the LP ended {solution.status.value}")
    logger.info(f"{spec.name}: using the LP optimum {solution.x.tolist()} as xbar")
    return solution.x


def handle_lsip_commands(args) -> int:
    """Handle lsip actions."""
    config = resolve_config(args)
    spec = resolve_problem(args)
    require_kind(spec, 'lsip')
    problem = build_lsip(spec)
    action = args.lsip_action
    q = require_q(args.q) if action in ('calmness', 'empirical') else None
    rows = None

    print(f"📐 lsip {action}: {spec.name}")
    print("=" * 60)

    if action == 'solve':
        solution = solve_problem(problem, tol=config.lp_tol)
        result = {'solution': solution}
        show_value("status", solution.status.value, solution.is_optimal)
        if solution.is_optimal:
            active = active_indices(solution.x, problem=problem)
            result['active'] = {'indices': active.indices, 'values': active.values}
            show_value("x", solution.x.tolist())
            show_value("objective", solution.objective)

    elif action == 'slater':
        result = slater_check(problem)
        show_value("Slater condition", result.holds, result.holds)

    elif action == 'enc':
        result = enc_check(problem, _lsip_xbar(spec, problem), cap=config.enc_cap)
        show_value("ENC", result.holds, result.holds)
        if not result.holds:
            show_value("violating index values", result.violating_values)

    elif action == 'calmness':
        xbar = _lsip_xbar(spec, problem)
        result = calmness_certificate(problem, xbar, q, grid=config.grid(problem.n), ladder=config.ladder(),
                                      tol=config.tolerances, parallel=config.parallel)
        show_value(f"‖f'_{q:g}‖", result.estimate.value)
        show_value("certified", result.certified, result.certified)
        rows = scale_rows(result.estimate)

    elif action == 'empirical':
        result = empirical_calmness(problem, _lsip_xbar(spec, problem), q, parallel=config.parallel)
        show_value("min quotient", result.min_quotient)
        show_value("witness", result.witness)
    else:
        raise UsageError(f"Unknown lsip action {action!r}")

    write_report(config, f"lsip_{action}_{spec.name}", envelope('lsip', action, spec, q, result), rows)
    return EXIT_OK


# ---------------------------------------------------------------------------
# penalty
# ---------------------------------------------------------------------------

def add_penalty_commands(subparsers):
    """Add l_p penalty commands to the argument parser."""
    penalty_parser = subparsers.add_parser('penalty', help='l_p penalty sharpness')
    penalty_subparsers = penalty_parser.add_subparsers(dest='penalty_action', help='Penalty actions')

    threshold_parser = penalty_subparsers.add_parser('threshold', help='Compute the weight threshold rho0')
    add_common_arguments(threshold_parser)
    threshold_parser.add_argument('--p', type=float, help='Penalty exponent p > 0 (overrides the file)')

    check_parser = penalty_subparsers.add_parser('check', help='Check sharpness of l_p at a weight r')
    add_common_arguments(check_parser)
    check_parser.add_argument('--p', type=float, help='Penalty exponent p > 0 (overrides the file)')
    check_parser.add_argument('--r', type=float, help='Penalty weight r > 0 (overrides the file)')

    conventions_parser = penalty_subparsers.add_parser('conventions',
                                                       help='Power example under both conventions')
    add_common_arguments(conventions_parser, problem=False, q=False)
    conventions_parser.add_argument('--s', type=float, required=True, help='Constraint exponent: g = x^{2s}')
    conventions_parser.add_argument('--p', type=float, default=1.0, help='Penalty exponent p')
    conventions_parser.add_argument('--r', type=float, default=3.0, help='Penalty weight r')
    conventions_parser.add_argument('--q', type=float, default=1.0, help='Hölder order q')


def handle_penalty_commands(args) -> int:
    """Handle penalty actions."""
    config = resolve_config(args)
    tol = config.tolerances
    action = args.penalty_action
    q = require_q(args.q)
    for name in ('p', 'r'):
        value = getattr(args, name, None)
        if value is not None and not value > 0:
            raise UsageError(f"--{name} must be positive, got {value}")

    if action == 'conventions':
        print(f"⚖️  penalty conventions: s={args.s:g}, p={args.p:g}, r={args.r:g}")
        print("=" * 60)
        table = compare_conventions(args.s, args.p, args.r, q, tol)
        show_value("published", table['published'])
        for convention, row in table['conventions'].items():
            show_value(f"{convention} (closed form / numeric)", f"{row['closed_form']} / {row['numeric']}",
                       row['matches_reference'])
        write_report(config, f"penalty_conventions_s{args.s:g}_p{args.p:g}_r{args.r:g}",
                     envelope('penalty', action, None, q, table))
        return EXIT_OK

    spec = resolve_problem(args)
    problem = build_penalty(spec, p=args.p, r=getattr(args, 'r', None))
    grid = config.grid(problem.n)
    print(f"⚖️  penalty {action}: {spec.name} (q={q:g}, p={problem.p:g})")
    print("=" * 60)

    if action == 'threshold':
        result = penalty_threshold(problem, q, grid=grid, ladder=config.ladder(), tol=tol,
                                   parallel=config.parallel)
        show_value("active", result.active)
        show_value("rho0", result.rho0)
        show_value("verdict", result.verdict.value, result.verdict.value == 'sufficient')
        rows = None
    elif action == 'check':
        result = sharp_penalty_check(problem, q, grid=grid, ladder=config.ladder(), tol=tol,
                                     parallel=config.parallel)
        show_value("rho0", result.threshold.rho0)
        show_value("shrp", result.sharp.modulus, result.positive)
        show_value("consistent", result.consistent, result.consistent)
        rows = scale_rows(result.norm)
    else:
        raise UsageError(f"Unknown penalty action {action!r}")

    write_report(config, f"penalty_{action}_{spec.name}", envelope('penalty', action, spec, q, result), rows)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='holder-reg',
                                     description='Hölder-order regularity toolkit for set-valued maps')
    subparsers = parser.add_subparsers(dest='command', help='Available commands')
    add_analyze_commands(subparsers)
    add_verify_commands(subparsers)
    add_lsip_commands(subparsers)
    add_penalty_commands(subparsers)
    return parser


HANDLERS = {
    'analyze': ('analyze_action', ANALYZE_KINDS, handle_analyze_commands),
    'verify': (None, None, handle_verify_commands),
    'lsip': ('lsip_action', LSIP_ACTIONS, handle_lsip_commands),
    'penalty': ('penalty_action', PENALTY_ACTIONS, handle_penalty_commands),
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command and return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    logging.basicConfig(level=logging.DEBUG if getattr(args, 'verbose', False) else logging.INFO,
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s')

    if not args.command:
        parser.print_help()
        return EXIT_USAGE

    action_attr, actions, handler = HANDLERS[args.command]
    if action_attr and not getattr(args, action_attr, None):
        print(f"Available {args.command} actions: {', '.join(actions)}")
        return EXIT_USAGE

    try:
        return handler(args)
    except UsageError as e:
        print(f"❌ Usage error: {e}")
        return EXIT_USAGE
    except json.JSONDecodeError as e:
        print(f"❌ Invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}")
        return EXIT_USAGE
    except PreconditionError as e:
        print(f"❌ Precondition failed: {e}")
        return EXIT_PRECONDITION
    except HolderRegError as e:
        print(f"❌ Error: {e}")
        return e.exit_code
    except Exception as e:
        logger.exception(f"Unexpected failure in {args.command}")
        print(f"❌ Error: {e}")
        return EXIT_FAILED
