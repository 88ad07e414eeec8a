"""Linear semi-infinite programming: problem model, LP solver and calmness analysis."""

from lib.lsip.analysis import (
    CalmnessCertificate, EmpiricalCalmness, EncReport, SlaterReport, active_indices,
    calmness_certificate, canonical_f, empirical_calmness, enc_check, feasibility_residual,
    finite_index_criterion, in_cone, in_level_set, slater_check, solution_map, solve_problem,
    uniqueness_probe,
)
from lib.lsip.lp_solver import LpSolution, LpStatus, solve_lp
from lib.lsip.problem import CURVES, LsipProblem, ParametricFamily, discretize

__all__ = [
    'CURVES', 'CalmnessCertificate', 'EmpiricalCalmness', 'EncReport', 'LpSolution', 'LpStatus',
    'LsipProblem', 'ParametricFamily', 'SlaterReport', 'active_indices', 'calmness_certificate',
    'canonical_f', 'discretize', 'empirical_calmness', 'enc_check', 'feasibility_residual',
    'finite_index_criterion', 'in_cone', 'in_level_set', 'slater_check', 'solution_map',
    'solve_lp', 'solve_problem', 'uniqueness_probe',
]
