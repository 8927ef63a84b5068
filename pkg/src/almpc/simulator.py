"""Closed-loop iterations of adaptive learning MPC and the fixed-set baseline.

One experiment runs the initializer (iteration 0) and then, per iteration:
tightening from the current offset set, a receding-horizon rollout on the
true plant, a safe-set update, and (when adaptation is enabled) an offset-set
update from the realized transitions. Disturbances are drawn once per
realized time step from a seeded generator, so two experiments with the same
seed see the same sequence.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
import logging
import math

import numpy as np

from .controller import (ModelData, MpcConfig, control_input, initial_trajectory,
                         solve_mpc)
from .errors import InfeasibleMpcError, InfeasibleTighteningError, UnsupportedSetError
from .polytope import HPolytope, box_bounds, contains
from .regulator import Gains, lqr_gain
from .safe_set import SampledSafeSet, StoredTrajectory, add_trajectory
from .uncertainty import (TAIL_REL_TOL, FeasibleParameterSet, TighteningVector,
                          TransitionRecord, choose_truncation, disturbance_radius,
                          fps_update, tightening_vector)

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    model: ModelData
    W: HPolytope
    theta0: HPolytope
    theta_true: np.ndarray
    x_S: np.ndarray
    n_iterations: int = 6
    mpc: MpcConfig = MpcConfig()
    Q: np.ndarray = field(default_factory=lambda: np.eye(2))
    R: np.ndarray = field(default_factory=lambda: np.array([[10.0]]))
    rng_seed: int = 0
    T0: int = 30
    max_steps_per_iter: int = 100
    adaptation_enabled: bool = True

    def __post_init__(self):
        theta = np.asarray(self.theta_true, dtype=float).reshape(-1)
        object.__setattr__(self, "theta_true", theta)
        object.__setattr__(self, "x_S", np.asarray(self.x_S, dtype=float).reshape(-1))
        object.__setattr__(self, "Q", np.atleast_2d(np.asarray(self.Q, dtype=float)))
        object.__setattr__(self, "R", np.atleast_2d(np.asarray(self.R, dtype=float)))
        if not contains(self.theta0, theta):
            raise ValueError("theta_true is not inside theta0")


@dataclass(eq=False)
class IterationLog:
    """Record of one iteration.

    ``theta_snapshot`` is the offset set after this iteration's update;
    ``h_s_snapshot`` is the tightening used during the iteration. Realized
    lists are empty for the initializer (iteration 0).
    """

    iteration: int
    x: list
    u: list
    w: list
    s: list
    v: list
    iter_cost_realized: float
    iter_cost_nominal: float
    theta_snapshot: HPolytope
    h_s_snapshot: np.ndarray
    mpc_costs: list
    feasible: bool
    plans: list = field(default_factory=list, repr=False)

    @property
    def n_steps(self):
        return len(self.v)


@dataclass(eq=False)
class ExperimentResult:
    config: ExperimentConfig
    gains: Gains
    truncation_k: int
    logs: list
    safe_set: SampledSafeSet


@dataclass(eq=False)
class ExperimentState:
    config: ExperimentConfig
    gains: Gains
    fps: FeasibleParameterSet
    safe_set: SampledSafeSet
    tightening: TighteningVector
    rng: np.random.Generator


def sample_disturbance(rng: np.random.Generator, W: HPolytope):
    """Uniform draw from a box-shaped ``W``; returns ``(w, rng)``."""
    bounds = box_bounds(W)
    if bounds is None:
        raise UnsupportedSetError("disturbance sampling needs an axis-aligned box")
    lower, upper = bounds
    return rng.uniform(lower, upper), rng


def run_iteration(j: int, state: ExperimentState) -> IterationLog:
    cfg = state.config
    model, gains = cfg.model, state.gains
    weights = cfg.mpc.weights
    offset = model.E @ cfg.theta_true
    x = cfg.x_S.copy()
    s = cfg.x_S.copy()
    xs, us, ws, ss_, vs, costs, plans = [x.copy()], [], [], [s.copy()], [], [], []
    converged = False
    for t in range(cfg.max_steps_per_iter + 1):
        if np.abs(s).max() <= cfg.mpc.eps_conv:
            converged = True
            break
        if t == cfg.max_steps_per_iter:
            break
        sol = solve_mpc(s, model, cfg.mpc, state.tightening, state.safe_set)
        if not sol.optimal:
            raise InfeasibleMpcError(
                f"MPC infeasible at iteration {j}, t={t}",
                diagnostics={"iteration": j, "t": t, "s": s.tolist(), "x": x.tolist(),
                             "h_s": state.tightening.h_s.tolist(),
                             "safe_set_points": state.safe_set.n_points})
        u = control_input(x, s, sol, gains)
        v = sol.v_seq[0]
        w, _ = sample_disturbance(state.rng, cfg.W)
        x = model.A @ x + model.B @ u + offset + w
        s = model.A @ s + model.B @ v
        us.append(u)
        vs.append(v.copy())
        ws.append(w)
        xs.append(x.copy())
        ss_.append(s.copy())
        costs.append(sol.cost)
        plans.append((sol.s_seq, sol.v_seq, sol.lam))
    cost_real = sum(weights.cost(a, b) for a, b in zip(xs, us))
    cost_nom = sum(weights.cost(a, b) for a, b in zip(ss_, vs))
    log.info("iteration %d: %d steps, nominal cost %.6g, realized cost %.6g%s",
             j, len(vs), cost_nom, cost_real, "" if converged else " (not converged)")
    return IterationLog(j, xs, us, ws, ss_, vs, cost_real, cost_nom,
                        state.fps.theta_poly, state.tightening.h_s.copy(), costs,
                        converged, plans)


def _check_tightening(tv: TighteningVector, model: ModelData):
    bad = np.flatnonzero(tv.h_s >= model.f)
    if bad.size:
        raise InfeasibleTighteningError(
            f"tightening {tv.h_s[bad].round(6).tolist()} meets or exceeds the "
            f"constraint bounds {model.f[bad].tolist()} on rows {bad.tolist()}; the "
            "tightened constraint set excludes the origin")


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    model = cfg.model
    gains = lqr_gain(model.A, model.B, cfg.Q, cfg.R)
    Phi = model.Phi(gains)
    fps = FeasibleParameterSet(cfg.theta0, 0)
    rho = disturbance_radius(cfg.W, fps, model.E)
    # fixed truncation: the initial set has the largest disturbance radius
    k = choose_truncation(gains, rho, np.abs(Phi).sum(axis=1),
                          TAIL_REL_TOL * max(1.0, float(np.abs(model.f).max())))
    tv = tightening_vector(Phi, gains, cfg.W, fps, model.E, truncation_k=k)
    _check_tightening(tv, model)
    traj0 = initial_trajectory(cfg.x_S, model, tv, cfg.T0, cfg.mpc.weights)
    ss = add_trajectory(SampledSafeSet(), traj0, cfg.mpc.eps_conv)
    J0 = traj0.cost_to_go[0]
    logs = [IterationLog(0, [], [], [], list(traj0.states), list(traj0.inputs),
                         math.nan, J0, fps.theta_poly, tv.h_s.copy(), [], True)]
    log.info("initializer: %d steps, cost %.6g", len(traj0.inputs), J0)
    state = ExperimentState(cfg, gains, fps, ss, tv, np.random.default_rng(cfg.rng_seed))
    for j in range(1, cfg.n_iterations + 1):
        state.tightening = tightening_vector(Phi, gains, cfg.W, state.fps, model.E,
                                             truncation_k=k)
        entry = run_iteration(j, state)
        if entry.feasible:
            traj = StoredTrajectory.build(entry.s, entry.v, cfg.mpc.weights, j)
            state.safe_set = add_trajectory(state.safe_set, traj, cfg.mpc.eps_conv)
        if cfg.adaptation_enabled:
            records = [TransitionRecord(entry.x[t], entry.u[t], entry.x[t + 1], j, t)
                       for t in range(entry.n_steps)]
            state.fps = fps_update(state.fps, records, cfg.W, model.A, model.B, model.E)
        entry.theta_snapshot = state.fps.theta_poly
        logs.append(entry)
    return ExperimentResult(cfg, gains, k, logs, state.safe_set)


def compare_runs(cfg: ExperimentConfig):
    """Adaptive and fixed-set runs sharing one disturbance sequence."""
    almpc = run_experiment(replace(cfg, adaptation_enabled=True))
    rlmpc = run_experiment(replace(cfg, adaptation_enabled=False))
    return almpc, rlmpc

