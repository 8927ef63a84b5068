"""Dense two-phase primal simplex and a few small matrix kernels.

Every optimization in the package goes through :func:`solve_lp`. Problems are
tiny (a few hundred variables at most), so a dense tableau with Bland's rule
is adequate. The pivot loop lives in a compiled extension when available and
falls back to a numpy implementation otherwise; set ``ALMPC_PURE_PYTHON=1``
to force the fallback.
"""
from __future__ import annotations

import enum
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import LpNumericalError, ShapeError
from . import _simplex_py

if os.environ.get("ALMPC_PURE_PYTHON") == "1":
    _kernel = _simplex_py
    BACKEND = "python"
else:
    try:
        from . import _simplex_core as _kernel

        BACKEND = "cython"
    except ImportError:  # extension not built
        _kernel = _simplex_py
        BACKEND = "python"

PIVOT_TOL = 1e-10
FEAS_TOL = 1e-8

_BACKENDS = {"python": _simplex_py}
if BACKEND == "cython":
    _BACKENDS["cython"] = _kernel


def available_backends():
    return sorted(_BACKENDS)


def _max_iter(m, n):
    # Bland's rule cannot cycle; this only guards against numerical stalls
    return 50 * (m + n) + 1000


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LinearProgram:
    """``min c.x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  lb <= x <= ub``.

    Missing blocks may be given as ``None``. Bounds default to ``x >= 0``
    to match the usual standard form; pass ``lb=-np.inf`` for free variables.
    """

    c: np.ndarray
    A_ub: np.ndarray | None = None
    b_ub: np.ndarray | None = None
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    lb: np.ndarray | float | None = 0.0
    ub: np.ndarray | float | None = np.inf

    def normalized(self):
        """Return ``(c, A_ub, b_ub, A_eq, b_eq, lb, ub)`` as float arrays.

        Raises :class:`ShapeError` on any inconsistency.
        """
        c = np.asarray(self.c, dtype=float).reshape(-1)
        n = c.size
        A_ub, b_ub = _block(self.A_ub, self.b_ub, n, "ub")
        A_eq, b_eq = _block(self.A_eq, self.b_eq, n, "eq")
        lb = _bound(self.lb, n, -np.inf, "lb")
        ub = _bound(self.ub, n, np.inf, "ub")
        if np.any(np.isnan(lb)) or np.any(np.isnan(ub)):
            raise ShapeError("bounds contain NaN")
        if np.any(lb > ub):
            raise ShapeError("lower bound exceeds upper bound")
        for name, arr in (("c", c), ("A_ub", A_ub), ("b_ub", b_ub),
                          ("A_eq", A_eq), ("b_eq", b_eq)):
            if not np.all(np.isfinite(arr)):
                raise ShapeError(f"{name} contains non-finite entries")
        return c, A_ub, b_ub, A_eq, b_eq, lb, ub


def _block(A, b, n, name):
    if A is None and b is None:
        return np.zeros((0, n)), np.zeros(0)
    if A is None or b is None:
        raise ShapeError(f"A_{name} and b_{name} must be given together")
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float).reshape(-1)
    if A.ndim == 1 and A.size == 0:
        A = A.reshape(0, n)
    if A.ndim != 2 or A.shape[1] != n or A.shape[0] != b.size:
        raise ShapeError(
            f"A_{name} has shape {A.shape}, expected ({b.size}, {n})")
    return A, b


def _bound(v, n, default, name):
    if v is None:
        return np.full(n, default)
    arr = np.asarray(v, dtype=float)
    if arr.ndim == 0:
        return np.full(n, float(arr))
    arr = arr.reshape(-1)
    if arr.size != n:
        raise ShapeError(f"{name} has length {arr.size}, expected {n}")
    return arr.copy()


@dataclass(frozen=True)
class LpResult:
    """Outcome of :func:`solve_lp`.

    ``dual_ub`` and ``dual_eq`` are sensitivities of the optimal value with
    respect to ``b_ub`` and ``b_eq`` (so ``dual_ub <= 0``).
    """

    status: LpStatus
    x: np.ndarray | None = None
    objective: float | None = None
    dual_ub: np.ndarray | None = None
    dual_eq: np.ndarray | None = None
    iterations: int = 0
    basis: tuple = field(default=(), repr=False)

    @property
    def optimal(self):
        return self.status is LpStatus.OPTIMAL


def _standard_form(c, A_ub, b_ub, A_eq, b_eq, lb, ub):
    """Rewrite as ``min cs.z  s.t.  M z = q, z >= 0`` with ``x = x0 + S z[:ny]``."""
    n = c.size
    x0 = np.zeros(n)
    cols = []          # (original index, sign) for each y column
    box_rows = []      # (y column, width) for finite two-sided bounds
    for i in range(n):
        lo, hi = lb[i], ub[i]
        if np.isfinite(lo):
            x0[i] = lo
            cols.append((i, 1.0))
            if np.isfinite(hi):
                box_rows.append((len(cols) - 1, hi - lo))
        elif np.isfinite(hi):
            x0[i] = hi
            cols.append((i, -1.0))
        else:
            cols.append((i, 1.0))
            cols.append((i, -1.0))
    ny = len(cols)
    S = np.zeros((n, ny))
    for k, (i, sgn) in enumerate(cols):
        S[i, k] = sgn

    m_ub, m_box, m_eq = A_ub.shape[0], len(box_rows), A_eq.shape[0]
    n_slack = m_ub + m_box
    m = n_slack + m_eq
    M = np.zeros((m, ny + n_slack))
    q = np.zeros(m)
    M[:m_ub, :ny] = A_ub @ S
    q[:m_ub] = b_ub - A_ub @ x0
    for r, (k, width) in enumerate(box_rows):
        M[m_ub + r, k] = 1.0
        q[m_ub + r] = width
    M[:n_slack, ny:] = np.eye(n_slack)
    M[n_slack:, :ny] = A_eq @ S
    q[n_slack:] = b_eq - A_eq @ x0
    cs = np.concatenate([S.T @ c, np.zeros(n_slack)])
    return M, q, cs, S, x0, ny, m_ub, n_slack


def solve_lp(lp: LinearProgram, backend: str | None = None) -> LpResult:
    """Solve ``lp`` with the two-phase simplex method.

    Raises
    ------
    ShapeError
        Inconsistent dimensions.
    LpNumericalError
        The Bland cycling guard (iteration cap) was exceeded.
    """
    if backend is not None and backend not in _BACKENDS:
        raise ValueError(f"unknown backend {backend!r}; available: {available_backends()}")
    kernel = _kernel if backend is None else _BACKENDS[backend]
    c, A_ub, b_ub, A_eq, b_eq, lb, ub = lp.normalized()
    M, q, cs, S, x0, ny, m_ub, n_slack = _standard_form(
        c, A_ub, b_ub, A_eq, b_eq, lb, ub)
    m, nz = M.shape

    sign = np.where(q < 0, -1.0, 1.0)
    M = M * sign[:, None]
    q = q * sign

    # artificial column for every row; their reduced costs carry the duals
    T = np.zeros((m + 1, nz + m + 1))
    T[:m, :nz] = M
    T[:m, nz:nz + m] = np.eye(m)
    T[:m, -1] = q
    T[m, :nz] = -M.sum(axis=0)
    T[m, -1] = -q.sum()
    basis = np.arange(nz, nz + m, dtype=np.int64)
    max_iter = _max_iter(m, nz)
    scale = max(1.0, float(np.abs(q).max(initial=0.0)))

    status, it1 = kernel.run_simplex(T, basis, nz, PIVOT_TOL, max_iter)
    if status == _simplex_py.ITERATION_LIMIT:
        raise LpNumericalError(f"phase I exceeded {max_iter} pivots")
    if -T[m, -1] > FEAS_TOL * scale:
        return LpResult(LpStatus.INFEASIBLE, iterations=it1)

    # drive zero-level artificials out of the basis where possible
    for r in range(m):
        if basis[r] >= nz:
            row = T[r, :nz]
            j = int(np.argmax(np.abs(row))) if nz else 0
            if nz and abs(row[j]) > PIVOT_TOL:
                kernel.pivot(T, basis, r, j)

    c_full = np.concatenate([cs, np.zeros(m)])
    cb = c_full[basis]
    T[m, :-1] = c_full - cb @ T[:m, :-1]
    T[m, -1] = -cb @ T[:m, -1]
    status, it2 = kernel.run_simplex(T, basis, nz, PIVOT_TOL, max_iter)
    iters = it1 + it2
    if status == _simplex_py.ITERATION_LIMIT:
        raise LpNumericalError(f"phase II exceeded {max_iter} pivots")
    if status == _simplex_py.UNBOUNDED:
        return LpResult(LpStatus.UNBOUNDED, iterations=iters)

    # recompute the basic solution and multipliers from the original data
    full = np.hstack([M, np.eye(m)])
    Bmat = full[:, basis]
    try:
        zb = np.linalg.solve(Bmat, q)
        y = np.linalg.solve(Bmat.T, c_full[basis])
    except np.linalg.LinAlgError:
        zb = T[:m, -1].copy()
        y = -T[m, nz:nz + m].copy()
    zb = np.where(np.abs(zb) < 1e-13, 0.0, zb)
    z = np.zeros(nz + m)
    z[basis] = np.maximum(zb, 0.0)
    x = x0 + S @ z[:ny]
    y = y * sign
    dual_ub = y[:m_ub].copy()
    dual_eq = y[n_slack:].copy()
    return LpResult(
        LpStatus.OPTIMAL,
        x=x,
        objective=float(c @ x),
        dual_ub=dual_ub,
        dual_eq=dual_eq,
        iterations=iters,
        basis=tuple(int(b) for b in basis),
    )


def dual_bound(lp: LinearProgram, result: LpResult) -> float:
    """Lagrangian lower bound built from the multipliers of ``result``."""
    c, A_ub, b_ub, A_eq, b_eq, lb, ub = lp.normalized()
    yu = np.minimum(result.dual_ub, 0.0)
    ye = result.dual_eq
    reduced = c - A_ub.T @ yu - A_eq.T @ ye
    bound = float(b_ub @ yu + b_eq @ ye)
    for r, lo, hi in zip(reduced, lb, ub):
        if r > 0:
            bound += r * lo if np.isfinite(lo) else -np.inf
        elif r < 0:
            bound += r * hi if np.isfinite(hi) else -np.inf
    return bound


def matmul(a, b):
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.asarray(b, dtype=float)
    b2 = b.reshape(-1, 1) if b.ndim == 1 else b
    if a.shape[1] != b2.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    out = a @ b2
    return out.reshape(-1) if b.ndim == 1 else out


def matadd(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ShapeError(f"cannot add {a.shape} and {b.shape}")
    return a + b


def transpose(a):
    return np.atleast_2d(np.asarray(a, dtype=float)).T.copy()
