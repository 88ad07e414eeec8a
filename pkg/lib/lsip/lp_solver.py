#!/usr/bin/env python3
"""
Dense Two-Phase Simplex
Small LP solver with Bland's anti-cycling rule, used for discretised
semi-infinite programs and cone-membership tests.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np

from lib.errors import LpError, UsageError

logger = logging.getLogger(__name__)

LP_TOL = 1e-9


class LpStatus(Enum):
    """Termination status of the simplex method."""
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass
class LpSolution:
    """Result of `solve_lp`."""
    status: LpStatus
    x: Optional[np.ndarray] = None
    objective: float = math.nan
    active: List[int] = field(default_factory=list)
    multipliers: Optional[np.ndarray] = None   # one per inequality row, >= 0
    iterations: int = 0

    @property
    def is_optimal(self) -> bool:
        return self.status == LpStatus.OPTIMAL


def _pivot(T: np.ndarray, row: int, col: int):
    T[row] /= T[row, col]
    column = T[:, col].copy()
    column[row] = 0.0
    T -= np.outer(column, T[row])


def _run_simplex(T: np.ndarray, basis: List[int], allowed: int, tol: float,
                 max_iter: int) -> Tuple[str, int]:
    """
    Minimise the objective stored in the last row of T.

    Bland's rule: the entering column is the lowest index with a negative
    reduced cost; ratio ties leave by the lowest basic variable index.
    """
    m = T.shape[0] - 1
    for it in range(max_iter):
        costs = T[-1, :allowed]
        candidates = np.flatnonzero(costs < -tol)
        if candidates.size == 0:
            return "optimal", it
        col = int(candidates[0])
        column = T[:m, col]
        rows = np.flatnonzero(column > tol)
        if rows.size == 0:
            return "unbounded", it
        ratios = T[rows, -1] / column[rows]
        best = ratios.min()
        ties = rows[ratios <= best + tol * (1.0 + abs(best))]
        row = int(min(ties, key=lambda r: basis[r]))
        _pivot(T, row, col)
        basis[row] = col
    raise LpError(f"Simplex iteration limit ({max_iter}) exhausted")


def solve_lp(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, nonnegative: bool = False,
             tol: float = LP_TOL, max_iter: Optional[int] = None) -> LpSolution:
    """
    min c·x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq  (x >= 0 when nonnegative).

    Free variables are split as x = x⁺ - x⁻. Multipliers of the inequality
    rows are the reduced costs of their slack columns at the optimum.
    """
    c = np.asarray(c, dtype=float).reshape(-1)
    n = c.size
    A_ub = np.zeros((0, n)) if A_ub is None else np.asarray(A_ub, dtype=float).reshape(-1, n)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float).reshape(-1)
    A_eq = np.zeros((0, n)) if A_eq is None else np.asarray(A_eq, dtype=float).reshape(-1, n)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).reshape(-1)
    if A_ub.shape[0] != b_ub.size or A_eq.shape[0] != b_eq.size:
        raise UsageError("Constraint matrix and right-hand side sizes differ")
    for arr in (c, A_ub, b_ub, A_eq, b_eq):
        if not np.all(np.isfinite(arr)):
            raise UsageError("LP data must be finite")

    m_ub, m_eq = A_ub.shape[0], A_eq.shape[0]
    m = m_ub + m_eq
    split = (lambda A: A) if nonnegative else (lambda A: np.hstack([A, -A]))
    ns = n if nonnegative else 2 * n
    structural = np.vstack([split(A_ub), split(A_eq)]) if m else np.zeros((0, ns))
    rhs = np.concatenate([b_ub, b_eq])
    slack = np.vstack([np.eye(m_ub), np.zeros((m_eq, m_ub))]) if m else np.zeros((0, 0))
    signs = np.where(rhs < 0, -1.0, 1.0)
    structural = structural * signs[:, None]
    slack = slack * signs[:, None]
    rhs = rhs * signs

    # rows whose slack is +e_i start with the slack basic, the rest need artificials
    needs_art = [i for i in range(m) if not (i < m_ub and signs[i] > 0)]
    na = len(needs_art)
    width = ns + m_ub + na
    T = np.zeros((m + 1, width + 1))
    T[:m, :ns] = structural
    T[:m, ns:ns + m_ub] = slack
    basis = [0] * m
    for i in range(m):
        if i < m_ub and signs[i] > 0:
            basis[i] = ns + i
    for k, i in enumerate(needs_art):
        T[i, ns + m_ub + k] = 1.0
        basis[i] = ns + m_ub + k
    T[:m, -1] = rhs
    max_iter = max_iter or 50 * (m + width + 1)
    iterations = 0

    if na:
        T[-1, ns + m_ub:width] = 1.0
        for i in needs_art:
            T[-1] -= T[i]
        _, it = _run_simplex(T, basis, width, tol, max_iter)
        iterations += it
        if -T[-1, -1] > tol * (1.0 + float(np.max(np.abs(rhs), initial=0.0))) * 1e3:
            logger.info(f"LP infeasible after phase I ({iterations} pivots)")
            return LpSolution(status=LpStatus.INFEASIBLE, iterations=iterations)
        # drive remaining artificials out of the basis, dropping redundant rows
        keep = []
        for i in range(m):
            if basis[i] >= ns + m_ub:
                cols = np.flatnonzero(np.abs(T[i, :ns + m_ub]) > tol)
                if cols.size == 0:
                    continue
                _pivot(T, i, int(cols[0]))
                basis[i] = int(cols[0])
            keep.append(i)
        T = np.hstack([T[keep, :ns + m_ub], T[keep, -1:]])
        T = np.vstack([T, np.zeros((1, ns + m_ub + 1))])
        basis = [basis[i] for i in keep]
    width = ns + m_ub

    # phase II objective in reduced form
    cost = np.zeros(width)
    cost[:ns] = c if nonnegative else np.concatenate([c, -c])
    T[-1, :] = 0.0
    T[-1, :width] = cost
    for i, j in enumerate(basis):
        if cost[j] != 0.0:
            T[-1] -= cost[j] * T[i]
    outcome, it = _run_simplex(T, basis, width, tol, max_iter)
    iterations += it
    if outcome == "unbounded":
        logger.info(f"LP unbounded ({iterations} pivots)")
        return LpSolution(status=LpStatus.UNBOUNDED, iterations=iterations)

    z = np.zeros(width)
    for i, j in enumerate(basis):
        z[j] = T[i, -1]
    x = z[:n] if nonnegative else z[:n] - z[n:2 * n]
    multipliers = np.maximum(T[-1, ns:ns + m_ub], 0.0)
    residual = A_ub @ x - b_ub if m_ub else np.zeros(0)
    active = [int(i) for i in np.flatnonzero(np.abs(residual) <= 1e-8 * (1.0 + np.abs(b_ub)))]
    objective = float(c @ x)
    logger.debug(f"LP optimal value {objective} after {iterations} pivots")
    return LpSolution(status=LpStatus.OPTIMAL, x=x, objective=objective, active=active,
                      multipliers=multipliers, iterations=iterations)
