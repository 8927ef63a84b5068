"""Small closed-form checks, one per documented trivial example.

Run with ``almpc selftest``; each check either returns or raises.
"""
from __future__ import annotations

import tempfile
from pathlib import Path

import numpy as np

from .controller import ModelData, MpcConfig, control_input, initial_trajectory, solve_mpc
from .errors import InfeasibleInitializationError, NonConvergedTrajectoryError
from .lp import LinearProgram, LpStatus, matmul, solve_lp, transpose
from .polytope import (HPolytope, box_bounds, contains, intersect, is_subset,
                       minkowski_sum_2d, reduce, support, vertices_2d)
from .regulator import Gains, lqr_gain, solve_dare
from .safe_set import (SampledSafeSet, StoredTrajectory, add_trajectory, cost_to_go,
                       query_terminal_cost)
from .uncertainty import (FeasibleParameterSet, TransitionRecord, disturbance_support,
                          fps_update, mrpi_outer_2d, tightening_vector, unit_directions_2d)

CHECKS = []

A = np.array([[1.2, 1.5], [0.0, 1.3]])
B = np.array([[0.0], [1.0]])
THETA0 = HPolytope.box([-0.2, -0.1], [0.2, 0.1])
W = HPolytope.box([-0.8, -0.8], [0.8, 0.8])
THETA_A = np.array([0.01, 0.05])
F = np.vstack([np.eye(2), -np.eye(2), np.zeros((2, 2))])
G = np.vstack([np.zeros((4, 1)), [[1.0], [-1.0]]])
f = np.array([10, 10, 10, 10, 1, 1], dtype=float)


def check(fn):
    CHECKS.append(fn)
    return fn


def _same_set(p, q, tol=1e-8):
    return is_subset(p, q, tol) and is_subset(q, p, tol)


def _zero_box(n=2):
    return HPolytope.box(np.zeros(n), np.zeros(n))


def _model():
    return ModelData(A, B, np.eye(2), F, G, f)


def _zero_gains(n=2):
    Z = np.zeros((n, n))
    return Gains(np.zeros((1, n)), Z, np.eye(n), 1, 0.0)


# lp_core

@check
def lp_single_bound():
    r = solve_lp(LinearProgram(c=[1.0], lb=1.0))
    assert r.status is LpStatus.OPTIMAL and abs(r.x[0] - 1) < 1e-9 and abs(r.objective - 1) < 1e-9


@check
def lp_empty():
    r = solve_lp(LinearProgram(c=[0.0], A_ub=[[1.0]], b_ub=[0.0], lb=1.0))
    assert r.status is LpStatus.INFEASIBLE


@check
def lp_box_corner():
    r = solve_lp(LinearProgram(c=[-1.0, -1.0], lb=0.0, ub=1.0))
    assert r.optimal and np.allclose(r.x, 1) and abs(r.objective + 2) < 1e-9


@check
def mat_identity():
    M = np.arange(6.0).reshape(2, 3)
    assert np.array_equal(matmul(np.eye(2), M), M)


@check
def mat_ab():
    assert np.allclose(matmul(A, B), [[1.5], [1.3]])


@check
def mat_transpose_involution():
    M = np.arange(6.0).reshape(3, 2)
    assert np.array_equal(transpose(transpose(M)), M)


# polytope

@check
def support_zero_direction():
    assert support(THETA0, [0.0, 0.0]) == 0.0


@check
def support_box():
    assert abs(support(THETA0, [1.0, 1.0]) - 0.3) < 1e-9


@check
def intersect_idempotent():
    assert _same_set(intersect(THETA0, THETA0), THETA0)


@check
def intersect_intervals():
    p = intersect(HPolytope.box([-1], [1]), HPolytope.box([0], [2]))
    lo, hi = box_bounds(reduce(p))
    assert np.allclose(lo, [0]) and np.allclose(hi, [1])


@check
def intersect_cut():
    p = intersect(THETA0, HPolytope([[1.0, 0.0]], [0.05]))
    assert _same_set(p, HPolytope.box([-0.2, -0.1], [0.05, 0.1]))


@check
def reduce_duplicate():
    box = HPolytope.box([-1, -1], [1, 1])
    dup = HPolytope(np.vstack([box.H, box.H[:1]]), np.concatenate([box.h, box.h[:1]]))
    assert reduce(dup).n_rows == 4


@check
def reduce_redundant():
    box = HPolytope.box([-1, -1], [1, 1])
    assert reduce(intersect(box, HPolytope([[1.0, 0.0]], [5.0]))).n_rows == 4


@check
def contains_origin():
    assert contains(HPolytope.box([-1, -1], [1, 1]), [0, 0])


@check
def contains_outside():
    assert not contains(HPolytope.box([-1, -1], [1, 1]), [1.1, 0])


@check
def subset_self():
    assert is_subset(THETA0, THETA0)


@check
def subset_interval():
    assert is_subset(HPolytope.box([0], [1]), HPolytope.box([-1], [2]))


@check
def subset_cut_false():
    assert not is_subset(THETA0, HPolytope([[1.0, 0.0]], [0.1]))


@check
def vertices_unit_box():
    V = np.array(vertices_2d(HPolytope.box([-1, -1], [1, 1])))
    assert V.shape == (4, 2) and np.allclose(np.abs(V), 1)
    x, y = V[:, 0], V[:, 1]
    assert 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y) > 0


@check
def minkowski_zero():
    assert _same_set(minkowski_sum_2d(THETA0, _zero_box()), THETA0)


@check
def minkowski_boxes():
    s = minkowski_sum_2d(HPolytope.box([-1, -2], [1, 2]), HPolytope.box([-3, -4], [3, 4]))
    assert _same_set(s, HPolytope.box([-4, -6], [4, 6]))


@check
def minkowski_lumped():
    assert _same_set(minkowski_sum_2d(W, THETA0), HPolytope.box([-1.0, -0.9], [1.0, 0.9]))


# regulator

@check
def dare_zero_a():
    Q = np.diag([2.0, 3.0])
    assert np.allclose(solve_dare(np.zeros((2, 2)), B, Q, [[10.0]]), Q)


@check
def lqr_zero_a():
    g = lqr_gain(np.zeros((2, 2)), B, np.eye(2), [[10.0]])
    assert np.allclose(g.K, 0) and np.allclose(g.Psi, 0)
    assert g.contraction_power == 1 and g.gamma == 0.0


# uncertainty

@check
def fps_no_records():
    prev = FeasibleParameterSet(THETA0)
    assert _same_set(fps_update(prev, [], W, A, B, np.eye(2)).theta_poly, THETA0)


@check
def fps_loose_record():
    x, u = np.array([1.0, -2.0]), np.array([0.3])
    rec = TransitionRecord(x, u, A @ x + B @ u + THETA_A)
    new = fps_update(FeasibleParameterSet(THETA0), [rec], W, A, B, np.eye(2))
    assert _same_set(new.theta_poly, THETA0)


@check
def disturbance_support_axes():
    fps = FeasibleParameterSet(THETA0)
    assert abs(disturbance_support(W, fps, np.eye(2), [1, 0]) - 1.0) < 1e-9
    assert abs(disturbance_support(W, fps, np.eye(2), [0, 1]) - 0.9) < 1e-9
    assert disturbance_support(W, fps, np.eye(2), [0, 0]) == 0.0


@check
def tightening_zero_psi():
    fps = FeasibleParameterSet(THETA0)
    tv = tightening_vector(F, _zero_gains(), W, fps, np.eye(2), truncation_k=1)
    want = [max(0.0, disturbance_support(W, fps, np.eye(2), r)) for r in F]
    assert np.allclose(tv.h_s, want)


@check
def tightening_no_uncertainty():
    g = lqr_gain(A, B, np.eye(2), [[10.0]])
    tv = tightening_vector(_model().Phi(g), g, _zero_box(), FeasibleParameterSet(_zero_box()),
                           np.eye(2))
    assert np.allclose(tv.h_s, 0)


@check
def mrpi_zero_psi():
    fps = FeasibleParameterSet(THETA0)
    p = mrpi_outer_2d(_zero_gains(), W, fps, np.eye(2), 16, truncation_k=1)
    for d in unit_directions_2d(16):
        assert abs(support(p, d) - disturbance_support(W, fps, np.eye(2), d)) < 1e-8


@check
def mrpi_shrinking_theta():
    g = lqr_gain(A, B, np.eye(2), [[10.0]])
    small = FeasibleParameterSet(HPolytope.box([0.0, 0.0], [0.05, 0.08]))
    big = mrpi_outer_2d(g, W, FeasibleParameterSet(THETA0), np.eye(2), 32, truncation_k=40)
    sub = mrpi_outer_2d(g, W, small, np.eye(2), 32, truncation_k=40)
    assert is_subset(sub, big)


# safe_set

@check
def cost_zero_trajectory():
    J = cost_to_go([np.zeros(2)] * 3, [np.zeros(1)] * 2)
    assert np.allclose(J, 0)


@check
def cost_single_step():
    assert np.allclose(cost_to_go([[1.0, 0.0], [0.0, 0.0]], [[0.5]]), [6.0, 0.0])


@check
def safe_set_origin():
    traj = StoredTrajectory.build([np.zeros(2)] * 3, [np.zeros(1)] * 2)
    ss = add_trajectory(SampledSafeSet(), traj, 1e-3)
    assert ss.n_points == 1 and np.allclose(ss.point_matrix, 0)


@check
def safe_set_rejects_unconverged():
    traj = StoredTrajectory.build([np.ones(2), [2e-3, 0.0]], [np.zeros(1)])
    try:
        add_trajectory(SampledSafeSet(), traj, 1e-3)
    except NonConvergedTrajectoryError:
        return
    raise AssertionError("unconverged trajectory accepted")


def _line_safe_set():
    traj = StoredTrajectory.build([[2.0, 0.0], [1.0, 0.0], [0.0, 0.0]], [[0.0], [0.0]])
    return add_trajectory(SampledSafeSet(), traj, 1e-3)


@check
def terminal_cost_at_point():
    assert abs(query_terminal_cost(_line_safe_set(), [1.0, 0.0]) - 1.0) < 1e-9


@check
def terminal_cost_origin():
    assert abs(query_terminal_cost(_line_safe_set(), [0.0, 0.0])) < 1e-12


# controller

@check
def mpc_origin_fixed_point():
    ss = add_trajectory(SampledSafeSet(),
                        StoredTrajectory.build([np.zeros(2)] * 2, [np.zeros(1)]), 1e-3)
    sol = solve_mpc(np.zeros(2), _model(), MpcConfig(), np.zeros(6), ss)
    assert sol.optimal and np.allclose(sol.v_seq[0], 0) and abs(sol.cost) < 1e-9


def _dummy_solution(v):
    from .controller import MpcSolution
    return MpcSolution(LpStatus.OPTIMAL, v_seq=(np.array([v]),))


@check
def input_zero_error():
    g = lqr_gain(A, B, np.eye(2), [[10.0]])
    x = np.array([1.0, 2.0])
    assert np.allclose(control_input(x, x, _dummy_solution(0.3), g), 0.3)


@check
def input_zero_gain():
    u = control_input([1.0, 2.0], [0.0, 0.0], _dummy_solution(0.3), _zero_gains())
    assert np.allclose(u, 0.3)


@check
def input_unit_error():
    g = lqr_gain(A, B, np.eye(2), [[10.0]])
    u = control_input([1.0, 0.0], [0.0, 0.0], _dummy_solution(0.3), g)
    assert np.allclose(u, g.K[0, 0] + 0.3)


@check
def init_from_origin():
    traj = initial_trajectory(np.zeros(2), _model(), np.zeros(6), 5)
    assert all(np.allclose(s, 0) for s in traj.states)
    assert all(np.allclose(v, 0) for v in traj.inputs)


@check
def init_outside_box():
    try:
        initial_trajectory([11.0, 0.0], _model(), np.zeros(6), 30)
    except InfeasibleInitializationError:
        return
    raise AssertionError("start outside the state box accepted")


# simulator

def _cfg(**kw):
    from .simulator import ExperimentConfig
    base = dict(model=_model(), W=_zero_box(), theta0=THETA0, theta_true=THETA_A,
                x_S=np.array([-5.6, 1.29]), n_iterations=2)
    base.update(kw)
    return ExperimentConfig(**base)


@check
def sample_degenerate_box():
    from .simulator import sample_disturbance
    w, _ = sample_disturbance(np.random.default_rng(0), _zero_box())
    assert np.array_equal(w, np.zeros(2))


@check
def sample_seeded():
    from .simulator import sample_disturbance
    a = [sample_disturbance(r, W)[0] for r in [np.random.default_rng(3)] * 4]
    b = [sample_disturbance(r, W)[0] for r in [np.random.default_rng(3)] * 4]
    assert np.array_equal(np.array(a), np.array(b))


@check
def run_at_rest():
    from .simulator import run_experiment
    res = run_experiment(_cfg(theta_true=np.zeros(2), x_S=np.zeros(2), n_iterations=1))
    last = res.logs[-1]
    assert all(np.allclose(x, 0) for x in last.x) and last.iter_cost_realized == 0.0


@check
def run_noise_free_reproducible():
    from .simulator import run_experiment
    a, b = run_experiment(_cfg()), run_experiment(_cfg())
    for la, lb in zip(a.logs, b.logs):
        assert np.array_equal(np.array(la.x), np.array(lb.x))
        assert np.array_equal(np.array(la.s), np.array(lb.s))


@check
def run_zero_iterations():
    from .simulator import run_experiment
    assert len(run_experiment(_cfg(n_iterations=0)).logs) == 1


@check
def compare_noise_free_first_iteration():
    from .simulator import compare_runs
    a, r = compare_runs(_cfg(n_iterations=1))
    assert np.array_equal(np.array(a.logs[1].x), np.array(r.logs[1].x))


# cli plumbing

@check
def config_defaults():
    from .config import bundled_config, parse_config
    cfg = parse_config(bundled_config("paper_sec5.json"))
    assert cfg.mpc.horizon == 3 and cfg.rng_seed == 0 and cfg.T0 == 30
    assert cfg.mpc.eps_conv == 1e-3 and np.allclose(cfg.R, 10) and np.allclose(cfg.Q, np.eye(2))


@check
def config_seed_override():
    from .config import bundled_config, config_to_dict, parse_config
    path = bundled_config("paper_sec5.json")
    a, b = config_to_dict(parse_config(path)), config_to_dict(parse_config(path, ["rng_seed=7"]))
    assert b.pop("rng_seed") == 7 and a.pop("rng_seed") == 0 and a == b


@check
def export_zero_iterations():
    from .export import export_csv, read_summary
    from .simulator import run_experiment
    with tempfile.TemporaryDirectory() as tmp:
        export_csv(run_experiment(_cfg(n_iterations=0)), tmp)
        rows = read_summary(Path(tmp) / "summary.csv")
        assert [r["j"] for r in rows] == ["0"]
        assert not list(Path(tmp).glob("iteration_*.csv"))


@check
def export_round_trip():
    from .export import export_csv, read_iteration_csv
    from .simulator import run_experiment
    res = run_experiment(_cfg(W=HPolytope.box([-0.01, -0.01], [0.01, 0.01]), n_iterations=1))
    with tempfile.TemporaryDirectory() as tmp:
        export_csv(res, tmp)
        x, u, s, v, w = read_iteration_csv(Path(tmp) / "iteration_1.csv", 2, 1)
    e = res.logs[1]
    for got, want in ((x, e.x), (u, e.u), (s, e.s), (v, e.v), (w, e.w)):
        assert np.allclose(np.array(got), np.array(want), rtol=1e-12, atol=0)


@check
def svg_single_iteration():
    from .simulator import run_experiment
    from .svg import render_svg
    with tempfile.TemporaryDirectory() as tmp:
        render_svg(run_experiment(_cfg(n_iterations=1)), out_dir=tmp)
        assert (Path(tmp) / "fps.svg").read_text().count("<polygon") == 2


@check
def svg_compare_two_polylines():
    from .simulator import compare_runs
    from .svg import render_svg
    a, r = compare_runs(_cfg(n_iterations=2))
    with tempfile.TemporaryDirectory() as tmp:
        render_svg(a, r, tmp)
        assert (Path(tmp) / "costs.svg").read_text().count("<polyline") == 2


def run_selftest(verbose=False, out=print):
    """Run every check; returns ``(passed, failed_names)``."""
    passed, failed = 0, []
    for fn in CHECKS:
        try:
            fn()
        except Exception as exc:  # report and keep going
            failed.append(fn.__name__)
            out(f"FAIL {fn.__name__}: {type(exc).__name__}: {exc}")
        else:
            passed += 1
            if verbose:
                out(f"ok   {fn.__name__}")
    return passed, failed
