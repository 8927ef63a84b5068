"""Sampled safe set and barycentric terminal cost.

Stored trajectories end with an exact origin sample of cost-to-go zero, which
is a fixed point of the nominal dynamics with zero input. The convex hull of
all stored states is the terminal set; the terminal cost at ``s`` is the
cheapest convex combination of stored cost-to-go values reproducing ``s``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NonConvergedTrajectoryError, ShapeError
from .lp import LinearProgram, LpStatus, solve_lp

MERGE_TOL = 1e-9


@dataclass(frozen=True)
class StageWeights:
    """Stage cost ``sum_i q_i |s_i| + sum_j r_j |v_j|``."""

    state: tuple
    input: tuple

    def cost(self, s, v):
        s = np.asarray(s, dtype=float).reshape(-1)
        v = np.atleast_1d(np.asarray(v, dtype=float)).reshape(-1)
        return float(np.abs(s) @ np.asarray(self.state) + np.abs(v) @ np.asarray(self.input))


DEFAULT_WEIGHTS = StageWeights(state=(1.0, 1.0), input=(10.0,))


def cost_to_go(states, inputs, weights: StageWeights = DEFAULT_WEIGHTS):
    """Backward tail sums of the stage cost.

    ``states`` has one more entry than ``inputs``; the last state carries no
    input and cost-to-go zero.
    """
    states = [np.asarray(s, dtype=float) for s in states]
    inputs = [np.atleast_1d(np.asarray(v, dtype=float)) for v in inputs]
    if len(states) != len(inputs) + 1:
        raise ShapeError(
            f"{len(states)} states need {len(states) - 1} inputs, got {len(inputs)}")
    J = [0.0] * len(states)
    for t in range(len(inputs) - 1, -1, -1):
        J[t] = weights.cost(states[t], inputs[t]) + J[t + 1]
    return J


@dataclass(frozen=True, eq=False)
class StoredTrajectory:
    states: tuple
    inputs: tuple
    cost_to_go: tuple
    iteration: int = 0

    @classmethod
    def build(cls, states, inputs, weights=DEFAULT_WEIGHTS, iteration=0):
        states = tuple(np.asarray(s, dtype=float).copy() for s in states)
        inputs = tuple(np.atleast_1d(np.asarray(v, dtype=float)).copy() for v in inputs)
        return cls(states, inputs, tuple(cost_to_go(states, inputs, weights)), iteration)

    def __len__(self):
        return len(self.states)


@dataclass(frozen=True, eq=False)
class SampledSafeSet:
    trajectories: tuple = ()
    point_matrix: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    cost_vector: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def n_points(self):
        return self.cost_vector.size

    def is_empty(self):
        return not self.trajectories


def _merge_points(trajectories):
    pts, costs = [], []
    for traj in trajectories:
        for s, J in zip(traj.states, traj.cost_to_go):
            for k, q in enumerate(pts):
                if np.all(np.abs(q - s) <= MERGE_TOL):
                    costs[k] = min(costs[k], J)
                    break
            else:
                pts.append(s)
                costs.append(J)
    return np.column_stack(pts), np.array(costs)


def add_trajectory(ss: SampledSafeSet, traj: StoredTrajectory, eps_conv: float,
                   ) -> SampledSafeSet:
    """Append a converged trajectory (tail snapped to the origin)."""
    last = traj.states[-1]
    if np.abs(last).max() > eps_conv:
        raise NonConvergedTrajectoryError(
            f"trajectory ends at ||s||_inf = {np.abs(last).max():.3g} > {eps_conv:.3g}")
    states = traj.states[:-1] + (np.zeros_like(last),)
    cost = traj.cost_to_go[:-1] + (0.0,)
    snapped = StoredTrajectory(states, traj.inputs, cost, traj.iteration)
    trajs = ss.trajectories + (snapped,)
    P, J = _merge_points(trajs)
    return SampledSafeSet(trajs, P, J)


def terminal_lp_blocks(ss: SampledSafeSet):
    """``(point_matrix, cost_vector)`` for embedding the terminal LP."""
    return ss.point_matrix, ss.cost_vector


def query_terminal_cost(ss: SampledSafeSet, s) -> float:
    """Barycentric terminal cost at ``s``; ``inf`` outside the convex safe set."""
    if ss.is_empty():
        raise ValueError("safe set is empty")
    s = np.asarray(s, dtype=float).reshape(-1)
    P, J = ss.point_matrix, ss.cost_vector
    A_eq = np.vstack([P, np.ones((1, P.shape[1]))])
    b_eq = np.concatenate([s, [1.0]])
    res = solve_lp(LinearProgram(c=J, A_eq=A_eq, b_eq=b_eq, lb=0.0))
    if res.status is LpStatus.INFEASIBLE:
        return float("inf")
    return res.objective
