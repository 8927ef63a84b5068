from __future__ import annotations

from dataclasses import replace

import numpy as np
import pytest

from almpc import simulator
from almpc.controller import MpcSolution
from almpc.errors import InfeasibleMpcError, InfeasibleTighteningError, UnsupportedSetError
from almpc.lp import LpStatus
from almpc.polytope import HPolytope, contains, is_subset
from almpc.simulator import (ExperimentConfig, compare_runs, run_experiment,
                             sample_disturbance)

from conftest import THETA0, THETA_A, X_S, same_set, small_box

ZERO = HPolytope.box([0, 0], [0, 0])


@pytest.fixture
def cfg(model):
    return ExperimentConfig(model=model, W=small_box(0.02), theta0=THETA0,
                            theta_true=THETA_A, x_S=X_S, n_iterations=3)


def test_sample_disturbance():
    w, _ = sample_disturbance(np.random.default_rng(0), ZERO)
    np.testing.assert_array_equal(w, 0.0)
    a = [sample_disturbance(np.random.default_rng(9), small_box(1))[0] for _ in range(2)]
    np.testing.assert_array_equal(a[0], a[1])
    rng = np.random.default_rng(1)
    draws = np.array([sample_disturbance(rng, HPolytope.box([-1, 2], [1, 3]))[0]
                      for _ in range(200)])
    assert np.all(draws[:, 0] >= -1) and np.all(draws[:, 0] <= 1)
    assert np.all(draws[:, 1] >= 2) and np.all(draws[:, 1] <= 3)
    with pytest.raises(UnsupportedSetError):
        sample_disturbance(rng, HPolytope([[1, 1], [-1, 0], [0, -1]], [1, 0, 0]))


def test_truth_must_lie_in_initial_set(model):
    with pytest.raises(ValueError):
        ExperimentConfig(model=model, W=ZERO, theta0=THETA0, theta_true=[0.5, 0.0], x_S=X_S)


def test_at_rest(cfg):
    res = run_experiment(replace(cfg, W=ZERO, theta_true=np.zeros(2), x_S=np.zeros(2),
                                 n_iterations=1))
    last = res.logs[-1]
    assert last.iter_cost_realized == 0.0 and last.n_steps == 0
    np.testing.assert_array_equal(last.x[0], 0.0)


def test_zero_iterations_only_initializer(cfg):
    res = run_experiment(replace(cfg, n_iterations=0))
    assert len(res.logs) == 1
    assert res.logs[0].iteration == 0 and np.isnan(res.logs[0].iter_cost_realized)


def test_noise_free_runs_are_bit_identical(cfg):
    a = run_experiment(replace(cfg, W=ZERO))
    b = run_experiment(replace(cfg, W=ZERO))
    for la, lb in zip(a.logs, b.logs):
        for key in ("x", "u", "s", "v", "w"):
            np.testing.assert_array_equal(np.array(getattr(la, key)), np.array(getattr(lb, key)))


def test_seeded_runs_repeat_and_seeds_differ(cfg):
    a, b = run_experiment(cfg), run_experiment(cfg)
    c = run_experiment(replace(cfg, rng_seed=1))
    np.testing.assert_array_equal(np.array(a.logs[1].w), np.array(b.logs[1].w))
    assert not np.array_equal(np.array(a.logs[1].w[:3]), np.array(c.logs[1].w[:3]))


def test_compare_first_iteration_identical(cfg):
    a, r = compare_runs(replace(cfg, W=ZERO))
    np.testing.assert_array_equal(np.array(a.logs[1].x), np.array(r.logs[1].x))
    assert same_set(r.logs[-1].theta_snapshot, THETA0)
    # adaptation shrinks the set, so the second iteration differs
    assert not is_subset(THETA0, a.logs[1].theta_snapshot)


def test_compare_shares_disturbances(cfg):
    a, r = compare_runs(cfg)
    np.testing.assert_array_equal(np.array(a.logs[1].w), np.array(r.logs[1].w))


def test_logs_are_consistent(cfg):
    res = run_experiment(cfg)
    m = cfg.model
    for e in res.logs[1:]:
        assert e.feasible
        assert len(e.x) == len(e.s) == e.n_steps + 1 == len(e.u) + 1 == len(e.w) + 1
        for t in range(e.n_steps):
            np.testing.assert_allclose(
                e.x[t + 1], m.A @ e.x[t] + m.B @ e.u[t] + m.E @ cfg.theta_true + e.w[t])
            np.testing.assert_allclose(e.u[t], res.gains.K @ (e.x[t] - e.s[t]) + e.v[t])
        assert np.abs(e.s[-1]).max() <= cfg.mpc.eps_conv
        assert contains(e.theta_snapshot, THETA_A)
    assert res.truncation_k % res.gains.contraction_power == 0


def test_tightening_never_grows(cfg):
    res = run_experiment(cfg)
    for a, b in zip(res.logs[1:], res.logs[2:]):
        assert np.all(b.h_s_snapshot <= a.h_s_snapshot + 1e-9)


def test_verbatim_noise_level_rejected(verbatim_cfg):
    with pytest.raises(InfeasibleTighteningError):
        run_experiment(verbatim_cfg)


def test_infeasible_mpc_carries_diagnostics(cfg, monkeypatch):
    monkeypatch.setattr(simulator, "solve_mpc",
                        lambda *a, **k: MpcSolution(LpStatus.INFEASIBLE))
    with pytest.raises(InfeasibleMpcError) as info:
        run_experiment(cfg)
    assert info.value.diagnostics["iteration"] == 1
    assert info.value.diagnostics["t"] == 0


def test_step_budget_marks_iteration_unconverged(cfg):
    res = run_experiment(replace(cfg, max_steps_per_iter=2, n_iterations=1))
    assert not res.logs[1].feasible
    assert res.logs[1].n_steps == 2
    # the unconverged rollout is not added to the safe set
    assert len(res.safe_set.trajectories) == 1
