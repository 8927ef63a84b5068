"""Numpy simplex kernel, used when the compiled extension is unavailable.

Same contract as ``_simplex_core``: the tableau ``T`` has shape
``(m + 1, ncol + 1)``; rows ``0..m-1`` are constraints, row ``m`` holds the
reduced costs, the last column holds the right-hand side. Only columns with
index ``< n_enter`` may enter the basis. Entering and leaving choices follow
Bland's rule.
"""
import numpy as np

OPTIMAL = 0
UNBOUNDED = 1
ITERATION_LIMIT = 2

RATIO_TIE = 1e-12


def pivot(T, basis, row, col):
    T[row] /= T[row, col]
    factors = T[:, col].copy()
    factors[row] = 0.0
    T -= np.outer(factors, T[row])
    basis[row] = col


def run_simplex(T, basis, n_enter, tol, max_iter):
    m = T.shape[0] - 1
    iters = 0
    while True:
        neg = np.flatnonzero(T[m, :n_enter] < -tol)
        if neg.size == 0:
            return OPTIMAL, iters
        col = neg[0]
        column = T[:m, col]
        cand = np.flatnonzero(column > tol)
        if cand.size == 0:
            return UNBOUNDED, iters
        ratios = T[cand, -1] / column[cand]
        best = ratios.min()
        ties = cand[ratios <= best + RATIO_TIE]
        row = ties[np.argmin(basis[ties])]
        pivot(T, basis, row, col)
        iters += 1
        if iters >= max_iter:
            return ITERATION_LIMIT, iters
