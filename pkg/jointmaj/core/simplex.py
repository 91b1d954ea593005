"""
Dense two-phase simplex for equality-constrained problems A x = b, x >= 0.

Bland's rule throughout: the entering column is the lowest index with a
negative reduced cost, and ratio-test ties leave by the lowest basic index.
"""
import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from jointmaj.config import settings
from jointmaj.errors import SolverError

logger = logging.getLogger(__name__)

_PIVOT_EPS = 1e-10


@dataclass(frozen=True)
class LPFeasibilityProblem:
    A_eq: np.ndarray
    b_eq: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A_eq, dtype=float))
        b = np.asarray(self.b_eq, dtype=float).reshape(-1)
        if A.shape[0] != b.shape[0]:
            raise SolverError(f"{A.shape[0]} constraint rows but {b.shape[0]} right-hand sides")
        object.__setattr__(self, "A_eq", A)
        object.__setattr__(self, "b_eq", b)

    @property
    def n_vars(self) -> int:
        return int(self.A_eq.shape[1])

    @property
    def n_rows(self) -> int:
        return int(self.A_eq.shape[0])

    def residual(self, x: np.ndarray) -> float:
        return float(np.max(np.abs(self.A_eq @ x - self.b_eq))) if self.n_rows else 0.0


class LPResult(NamedTuple):
    feasible: bool
    x: np.ndarray | None
    residual: float
    phase1_objective: float
    iterations: int


def _pivot(T: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    factors = T[:, col].copy()
    factors[row] = 0.0
    T -= np.outer(factors, T[row])


def _enter(costs: np.ndarray, allowed: np.ndarray) -> int:
    candidates = np.flatnonzero((costs < -_PIVOT_EPS) & allowed)
    return int(candidates[0]) if len(candidates) else -1


def _leave(T: np.ndarray, col: int, basis: np.ndarray) -> int:
    column = T[:-1, col]
    rows = np.flatnonzero(column > _PIVOT_EPS)
    if not len(rows):
        return -1
    ratios = T[rows, -1] / column[rows]
    best = ratios.min()
    tied = rows[ratios <= best + _PIVOT_EPS * (1.0 + abs(best))]
    return int(tied[np.argmin(basis[tied])])


def _run(T: np.ndarray, basis: np.ndarray, allowed: np.ndarray, budget: int) -> int:
    iterations = 0
    while True:
        col = _enter(T[-1, :-1], allowed)
        if col == -1:
            return iterations
        row = _leave(T, col, basis)
        if row == -1:
            raise SolverError("objective unbounded below")
        _pivot(T, row, col)
        basis[row] = col
        iterations += 1
        if iterations >= budget:
            raise SolverError(f"simplex iteration limit {budget} reached")


def solve_feasibility(problem: LPFeasibilityProblem, cost: np.ndarray | None = None) -> LPResult:
    """
    Phase 1 minimizes the sum of artificial variables; the problem is
    feasible iff that minimum is at most TOL_LP * (1 + |b|_1). When a cost
    vector is given, phase 2 minimizes it over the feasible set.
    """
    A = problem.A_eq.copy()
    b = problem.b_eq.copy()
    m, n = A.shape
    budget = settings.SIMPLEX_MAX_ITER

    flip = b < 0
    A[flip] *= -1
    b[flip] *= -1

    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    T[-1, :n] = -A.sum(axis=0)
    T[-1, -1] = -b.sum()
    basis = np.arange(n, n + m)

    allowed = np.ones(n + m, dtype=bool)
    iterations = _run(T, basis, allowed, budget)
    phase1 = float(-T[-1, -1])
    threshold = settings.TOL_LP * (1.0 + float(np.abs(problem.b_eq).sum()))
    logger.debug("phase 1: %d iterations, objective %.3e", iterations, phase1)

    if phase1 > threshold:
        return LPResult(False, None, np.inf, phase1, iterations)

    # drive artificial columns out of the basis where a structural pivot exists
    for row in range(m):
        if basis[row] >= n:
            structural = np.flatnonzero(np.abs(T[row, :n]) > _PIVOT_EPS)
            if len(structural):
                _pivot(T, row, int(structural[0]))
                basis[row] = structural[0]

    if cost is not None:
        c = np.asarray(cost, dtype=float).reshape(-1)
        T[-1] = 0.0
        T[-1, :n] = c
        for row in range(m):
            if basis[row] < n:
                T[-1] -= c[basis[row]] * T[row]
        allowed = np.zeros(n + m, dtype=bool)
        allowed[:n] = True
        iterations += _run(T, basis, allowed, budget - iterations)

    x = np.zeros(n + m)
    x[basis] = T[:m, -1]
    x = np.clip(x[:n], 0.0, None)
    return LPResult(True, x, problem.residual(x), phase1, iterations)
