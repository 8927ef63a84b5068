"""Fixed LQR feedback for the tube controller and its contraction certificate."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DareConvergenceError, NotStabilizingError

DARE_TOL = 1e-12
DARE_MAX_ITER = 10_000
MAX_CONTRACTION_POWER = 200


@dataclass(frozen=True, eq=False)
class Gains:
    """Feedback ``u = K (x - s) + v`` and closed loop ``Psi = A + B K``.

    ``gamma = ||Psi^contraction_power||_inf < 1`` certifies the geometric
    decay used to bound truncated invariant-set sums.
    """

    K: np.ndarray
    Psi: np.ndarray
    P_are: np.ndarray
    contraction_power: int
    gamma: float


def riccati_step(P, A, B, Q, R):
    BtP = B.T @ P
    return Q + A.T @ P @ A - A.T @ P @ B @ np.linalg.solve(R + BtP @ B, BtP @ A)


def solve_dare(A, B, Q, R, tol=DARE_TOL, max_iter=DARE_MAX_ITER):
    """Solve the discrete algebraic Riccati equation by value iteration.

    Starts from ``P = Q`` and stops when successive iterates agree to ``tol``
    in max-abs entry.
    """
    A, B, Q, R = (np.atleast_2d(np.asarray(M, dtype=float)) for M in (A, B, Q, R))
    P = Q.copy()
    for _ in range(max_iter):
        P_next = riccati_step(P, A, B, Q, R)
        P_next = 0.5 * (P_next + P_next.T)
        if not np.all(np.isfinite(P_next)):
            break
        if np.abs(P_next - P).max() < tol:
            return P_next
        P = P_next
    raise DareConvergenceError(
        f"Riccati iteration did not converge within {max_iter} steps")


def contraction(Psi, max_power=MAX_CONTRACTION_POWER):
    """Smallest ``k`` with ``||Psi^k||_inf < 1`` and that norm."""
    M = np.eye(Psi.shape[0])
    for k in range(1, max_power + 1):
        M = M @ Psi
        g = float(np.abs(M).sum(axis=1).max())
        if g < 1.0:
            return k, g
    raise NotStabilizingError(
        f"||Psi^k||_inf >= 1 for every k <= {max_power}; K does not stabilize")


def lqr_gain(A, B, Q, R) -> Gains:
    A, B, Q, R = (np.atleast_2d(np.asarray(M, dtype=float)) for M in (A, B, Q, R))
    P = solve_dare(A, B, Q, R)
    K = -np.linalg.solve(R + B.T @ P @ B, B.T @ P @ A)
    Psi = A + B @ K
    k, gamma = contraction(Psi)
    return Gains(K=K, Psi=Psi, P_are=P, contraction_power=k, gamma=gamma)
