"""Offset-set adaptation and constraint tightening.

The lumped disturbance is ``d = w + E theta`` with ``w`` in ``W`` and
``theta`` in the current feasible parameter set. The error set is the
infinite sum ``sum_i Psi^i (W + E Theta)``; it is never formed. Tightening
uses only support values, truncated after ``k`` terms with a geometric tail
certificate from ``||Psi^c||_inf = gamma < 1``.
"""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .errors import (EmptyPolytopeError, InconsistentDataError,
                     NotStabilizingError, ShapeError)
from .polytope import HPolytope, intersect, reduce, support, support_many
from .regulator import Gains

TAIL_REL_TOL = 1e-6
MAX_TRUNCATION_BLOCKS = 10_000


@dataclass(frozen=True, eq=False)
class FeasibleParameterSet:
    """Offset domain after ``iteration`` rounds of data; ``parent`` is the previous one."""

    theta_poly: HPolytope
    iteration: int = 0
    parent: "FeasibleParameterSet | None" = None


@dataclass(frozen=True)
class TransitionRecord:
    x_prev: np.ndarray
    u_prev: np.ndarray
    x_next: np.ndarray
    iteration: int = 0
    time: int = 0


@dataclass(frozen=True, eq=False)
class TighteningVector:
    h_s: np.ndarray
    truncation_k: int
    tail_bound: np.ndarray
    iteration: int = 0


def fps_update(prev: FeasibleParameterSet, records, W: HPolytope, A, B, E,
               ) -> FeasibleParameterSet:
    """Intersect ``prev`` with every offset consistent with the recorded transitions.

    Each transition ``(x, u, x+)`` contributes ``H_w (x+ - A x - B u - E theta) <= h_w``.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    E = np.atleast_2d(np.asarray(E, dtype=float))
    if E.shape[1] != prev.theta_poly.dim:
        raise ShapeError("E columns must match the parameter dimension")
    HE = -W.H @ E
    live = np.linalg.norm(HE, axis=1) > 1e-12
    rows, rhs = [], []
    for rec in records:
        resid = (np.asarray(rec.x_next, dtype=float)
                 - A @ np.asarray(rec.x_prev, dtype=float)
                 - B @ np.atleast_1d(np.asarray(rec.u_prev, dtype=float)))
        b = W.h - W.H @ resid
        if np.any(b[~live] < -1e-9):
            raise InconsistentDataError(
                f"transition at t={rec.time} violates W independently of theta")
        rows.append(HE[live])
        rhs.append(b[live])
    poly = prev.theta_poly
    if rows:
        poly = intersect(poly, HPolytope(np.vstack(rows), np.concatenate(rhs)))
    try:
        poly = reduce(poly)
    except EmptyPolytopeError as exc:
        raise InconsistentDataError(
            "feasible parameter set became empty: the true offset is not in "
            "the initial set or the disturbance bound was violated") from exc
    return FeasibleParameterSet(poly, prev.iteration + 1, prev)


def disturbance_support(W: HPolytope, fps: FeasibleParameterSet, E, d) -> float:
    """Support of ``W + E Theta`` in direction ``d``."""
    E = np.atleast_2d(np.asarray(E, dtype=float))
    d = np.asarray(d, dtype=float).reshape(-1)
    return support(W, d) + support(fps.theta_poly, E.T @ d)


def disturbance_support_many(W, fps, E, directions) -> np.ndarray:
    E = np.atleast_2d(np.asarray(E, dtype=float))
    D = np.atleast_2d(np.asarray(directions, dtype=float))
    return support_many(W, D) + support_many(fps.theta_poly, D @ E)


def disturbance_radius(W, fps, E) -> float:
    """Bound ``rho`` with ``||d||_inf <= rho`` for every lumped disturbance."""
    n = W.dim
    eye = np.eye(n)
    vals = disturbance_support_many(W, fps, E, np.vstack([eye, -eye]))
    return float(max(0.0, vals.max()))


def _power_norm_sum(Psi, c):
    M = np.eye(Psi.shape[0])
    total = 0.0
    for _ in range(c):
        total += float(np.abs(M).sum(axis=1).max())
        M = M @ Psi
    return total


def tail_factor(gains: Gains, blocks: int) -> float:
    """Bound on ``sum_{i >= blocks*c} ||Psi^i||_inf``."""
    S = _power_norm_sum(gains.Psi, gains.contraction_power)
    return S * gains.gamma ** blocks / (1.0 - gains.gamma)


def choose_truncation(gains: Gains, rho: float, row_norms, target: float) -> int:
    """Smallest multiple of the contraction power whose tail is below ``target``."""
    if not gains.gamma < 1.0:
        raise NotStabilizingError("gamma must be < 1")
    scale = rho * float(np.max(row_norms, initial=0.0))
    if scale == 0.0:
        return gains.contraction_power
    S = _power_norm_sum(gains.Psi, gains.contraction_power)
    need = scale * S / ((1.0 - gains.gamma) * target)
    if gains.gamma == 0.0 or need <= 1.0:
        blocks = 1
    else:
        blocks = max(1, math.ceil(math.log(need) / -math.log(gains.gamma)))
        while scale * tail_factor(gains, blocks) >= target:
            blocks += 1
    if blocks > MAX_TRUNCATION_BLOCKS:
        raise NotStabilizingError("truncation length diverges")
    return blocks * gains.contraction_power


def _direction_stack(Psi, rows, k):
    """``(Psi^i)^T row`` for ``i < k``; result has shape ``(k, len(rows), n)``."""
    out = np.empty((k,) + rows.shape)
    cur = rows.copy()
    for i in range(k):
        out[i] = cur
        cur = cur @ Psi
    return out


def tightening_vector(Phi, gains: Gains, W: HPolytope, fps: FeasibleParameterSet,
                      E, f=None, truncation_k: int | None = None) -> TighteningVector:
    """Upper bound on ``Phi e`` over every error reachable from ``e_0 = 0``.

    Each series term is clamped at zero so the bound holds for all finite
    partial sums, not only the limit set (the lumped disturbance set need not
    contain the origin once the offset set has shrunk).
    """
    if not gains.gamma < 1.0:
        raise NotStabilizingError("gamma must be < 1")
    Phi = np.atleast_2d(np.asarray(Phi, dtype=float))
    rho = disturbance_radius(W, fps, E)
    row_norms = np.abs(Phi).sum(axis=1)
    if truncation_k is None:
        fmax = 1.0 if f is None else max(1.0, float(np.abs(f).max()))
        truncation_k = choose_truncation(gains, rho, row_norms, TAIL_REL_TOL * fmax)
    k = int(truncation_k)
    if k % gains.contraction_power:
        raise ValueError("truncation_k must be a multiple of the contraction power")
    dirs = _direction_stack(gains.Psi, Phi, k)
    vals = disturbance_support_many(W, fps, E, dirs.reshape(-1, Phi.shape[1]))
    vals = np.maximum(vals.reshape(k, Phi.shape[0]), 0.0)
    tail = row_norms * rho * tail_factor(gains, k // gains.contraction_power)
    return TighteningVector(vals.sum(axis=0) + tail, k, tail, fps.iteration)


def unit_directions_2d(m_dirs: int) -> np.ndarray:
    ang = 2.0 * np.pi * np.arange(m_dirs) / m_dirs
    return np.column_stack([np.cos(ang), np.sin(ang)])


def mrpi_outer_2d(gains: Gains, W: HPolytope, fps: FeasibleParameterSet, E,
                  directions: int = 64, truncation_k: int | None = None) -> HPolytope:
    """Outer polygon of the error invariant set from sampled support values.

    No clamping here: this approximates the limit set itself.
    """
    if gains.Psi.shape[0] != 2:
        raise ShapeError("mrpi_outer_2d needs a 2D state")
    U = unit_directions_2d(directions)
    rho = disturbance_radius(W, fps, E)
    row_norms = np.abs(U).sum(axis=1)
    if truncation_k is None:
        truncation_k = choose_truncation(gains, rho, row_norms, TAIL_REL_TOL)
    k = int(truncation_k)
    dirs = _direction_stack(gains.Psi, U, k)
    vals = disturbance_support_many(W, fps, E, dirs.reshape(-1, 2))
    sup = vals.reshape(k, directions).sum(axis=0)
    sup = sup + row_norms * rho * tail_factor(gains, k // gains.contraction_power)
    return HPolytope(U, sup)
