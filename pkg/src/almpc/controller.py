"""Receding-horizon tube MPC with a learned terminal set and cost.

The whole finite-horizon problem is one LP. Variable layout, per stage ``k``:
nominal states ``s_0..s_N``, inputs ``v_0..v_{N-1}``, epigraph variables for
``|s_k|`` and ``|v_k|``, then the barycentric multipliers ``lambda``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleInitializationError, ShapeError
from .lp import LinearProgram, LpStatus, solve_lp
from .regulator import Gains
from .safe_set import DEFAULT_WEIGHTS, SampledSafeSet, StageWeights, StoredTrajectory


@dataclass(frozen=True, eq=False)
class ModelData:
    A: np.ndarray
    B: np.ndarray
    E: np.ndarray
    F: np.ndarray
    G: np.ndarray
    f: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        B = np.asarray(self.B, dtype=float)
        B = B.reshape(-1, 1) if B.ndim == 1 else B
        E = np.atleast_2d(np.asarray(self.E, dtype=float))
        F = np.atleast_2d(np.asarray(self.F, dtype=float))
        G = np.asarray(self.G, dtype=float)
        G = G.reshape(-1, 1) if G.ndim == 1 else G
        f = np.asarray(self.f, dtype=float).reshape(-1)
        nx = A.shape[0]
        if A.shape != (nx, nx):
            raise ShapeError("A must be square")
        if B.shape[0] != nx or E.shape[0] != nx:
            raise ShapeError("B and E need one row per state")
        if F.shape != (f.size, nx) or G.shape != (f.size, B.shape[1]):
            raise ShapeError("F, G, f have inconsistent shapes")
        for name, val in zip("ABEFGf", (A, B, E, F, G, f)):
            object.__setattr__(self, name, val)

    @property
    def n_x(self):
        return self.A.shape[0]

    @property
    def n_u(self):
        return self.B.shape[1]

    @property
    def n_f(self):
        return self.f.size

    @property
    def p(self):
        return self.E.shape[1]

    def Phi(self, gains: Gains):
        return self.F + self.G @ gains.K


@dataclass(frozen=True)
class MpcConfig:
    horizon: int = 3
    weights: StageWeights = DEFAULT_WEIGHTS
    eps_conv: float = 1e-3

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")


@dataclass(frozen=True, eq=False)
class MpcSolution:
    status: LpStatus
    v_seq: tuple = ()
    s_seq: tuple = ()
    lam: np.ndarray | None = None
    cost: float = float("inf")

    @property
    def optimal(self):
        return self.status is LpStatus.OPTIMAL


class _Layout:
    """Index bookkeeping for the stacked decision vector."""

    def __init__(self, nx, nu, N, n_lam):
        self.nx, self.nu, self.N = nx, nu, N
        self.s0 = 0
        self.v0 = self.s0 + nx * (N + 1)
        self.a0 = self.v0 + nu * N
        self.b0 = self.a0 + nx * N
        self.l0 = self.b0 + nu * N
        self.n = self.l0 + n_lam

    def s(self, k):
        return slice(self.s0 + k * self.nx, self.s0 + (k + 1) * self.nx)

    def v(self, k):
        return slice(self.v0 + k * self.nu, self.v0 + (k + 1) * self.nu)

    def a(self, k):
        return slice(self.a0 + k * self.nx, self.a0 + (k + 1) * self.nx)

    def b(self, k):
        return slice(self.b0 + k * self.nu, self.b0 + (k + 1) * self.nu)

    @property
    def lam(self):
        return slice(self.l0, self.n)


def _horizon_lp(s_init, model, weights, h_s, N, terminal):
    """LP over ``N`` steps; ``terminal`` is ``(point_matrix, costs)`` or ``None`` for ``s_N = 0``."""
    nx, nu = model.n_x, model.n_u
    n_lam = 0 if terminal is None else terminal[1].size
    L = _Layout(nx, nu, N, n_lam)
    qx = np.asarray(weights.state, dtype=float)
    qu = np.asarray(weights.input, dtype=float)
    if qx.size != nx or qu.size != nu:
        raise ShapeError("stage weights do not match model dimensions")

    c = np.zeros(L.n)
    for k in range(N):
        c[L.a(k)] = qx
        c[L.b(k)] = qu
    if terminal is not None:
        c[L.lam] = terminal[1]

    eq_rows, eq_rhs = [], []

    def eq(coeffs, rhs):
        row = np.zeros(L.n)
        for sl, M in coeffs:
            row[sl] += M
        eq_rows.append(row)
        eq_rhs.append(rhs)

    for i in range(nx):
        e = np.zeros(nx)
        e[i] = 1.0
        eq([(L.s(0), e)], s_init[i])
    for k in range(N):
        for i in range(nx):
            e = np.zeros(nx)
            e[i] = 1.0
            eq([(L.s(k + 1), e), (L.s(k), -model.A[i]), (L.v(k), -model.B[i])], 0.0)
    if terminal is None:
        for i in range(nx):
            e = np.zeros(nx)
            e[i] = 1.0
            eq([(L.s(N), e)], 0.0)
    else:
        P = terminal[0]
        for i in range(nx):
            e = np.zeros(nx)
            e[i] = 1.0
            eq([(L.s(N), e), (L.lam, -P[i])], 0.0)
        eq([(L.lam, np.ones(n_lam))], 1.0)

    ub_rows, ub_rhs = [], []
    f_tight = model.f - h_s
    for k in range(N):
        for r in range(model.n_f):
            row = np.zeros(L.n)
            row[L.s(k)] = model.F[r]
            row[L.v(k)] = model.G[r]
            ub_rows.append(row)
            ub_rhs.append(f_tight[r])
        for sl, asl, dim in ((L.s(k), L.a(k), nx), (L.v(k), L.b(k), nu)):
            for i in range(dim):
                for sgn in (1.0, -1.0):
                    row = np.zeros(L.n)
                    row[sl.start + i] = sgn
                    row[asl.start + i] = -1.0
                    ub_rows.append(row)
                    ub_rhs.append(0.0)

    lb = np.full(L.n, -np.inf)
    lb[L.a0:L.l0] = 0.0
    lb[L.lam] = 0.0
    lp = LinearProgram(c=c, A_ub=np.array(ub_rows), b_ub=np.array(ub_rhs),
                       A_eq=np.array(eq_rows), b_eq=np.array(eq_rhs), lb=lb)
    return lp, L


def _tightening(h_s, n_f):
    h = np.asarray(getattr(h_s, "h_s", h_s), dtype=float).reshape(-1)
    if h.size != n_f:
        raise ShapeError(f"tightening has length {h.size}, expected {n_f}")
    return h


def solve_mpc(s_t, model: ModelData, cfg: MpcConfig, h_s, ss: SampledSafeSet,
              ) -> MpcSolution:
    """Solve the tube MPC problem from nominal state ``s_t``."""
    if ss.is_empty():
        raise ValueError("safe set is empty")
    h = _tightening(h_s, model.n_f)
    s_t = np.asarray(s_t, dtype=float).reshape(-1)
    lp, L = _horizon_lp(s_t, model, cfg.weights, h, cfg.horizon,
                        (ss.point_matrix, ss.cost_vector))
    res = solve_lp(lp)
    if res.status is not LpStatus.OPTIMAL:
        return MpcSolution(LpStatus.INFEASIBLE)
    x = res.x
    N = cfg.horizon
    stage = sum(cfg.weights.cost(x[L.s(k)], x[L.v(k)]) for k in range(N))
    lam = x[L.lam].copy()
    return MpcSolution(
        LpStatus.OPTIMAL,
        v_seq=tuple(x[L.v(k)].copy() for k in range(N)),
        s_seq=tuple(x[L.s(k)].copy() for k in range(N + 1)),
        lam=lam,
        cost=stage + float(lam @ ss.cost_vector),
    )


def control_input(x_t, s_t, sol: MpcSolution, gains: Gains):
    """Applied input ``K (x - s) + v*``; no saturation."""
    if not sol.optimal:
        raise ValueError("control_input needs an optimal MPC solution")
    err = np.asarray(x_t, dtype=float) - np.asarray(s_t, dtype=float)
    return gains.K @ err + sol.v_seq[0]


def initial_trajectory(x_S, model: ModelData, h_s0, T0: int = 30,
                       weights: StageWeights = DEFAULT_WEIGHTS, iteration: int = 0,
                       ) -> StoredTrajectory:
    """Cheapest tightened-feasible nominal trajectory reaching the origin in ``T0`` steps."""
    h = _tightening(h_s0, model.n_f)
    x_S = np.asarray(x_S, dtype=float).reshape(-1)
    lp, L = _horizon_lp(x_S, model, weights, h, T0, None)
    res = solve_lp(lp)
    if res.status is not LpStatus.OPTIMAL:
        raise InfeasibleInitializationError(
            f"no tightened-feasible trajectory from {x_S.tolist()} to the origin in "
            f"T0={T0} steps; raise T0 or move x_S inward")
    x = res.x
    states = [x[L.s(k)].copy() for k in range(T0 + 1)]
    inputs = [x[L.v(k)].copy() for k in range(T0)]
    states[-1] = np.zeros(model.n_x)
    # drop the idle tail spent sitting at the origin
    last = T0
    while last > 0 and np.abs(states[last - 1]).max() <= 1e-12 \
            and np.abs(inputs[last - 1]).max() <= 1e-12:
        last -= 1
    states = states[:last + 1]
    inputs = inputs[:last]
    return StoredTrajectory.build(states, inputs, weights, iteration)
