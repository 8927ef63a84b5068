from __future__ import annotations

import csv
import json
import re
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from almpc.cli import main
from almpc.config import (apply_overrides, bundled_config, config_from_dict, config_to_dict,
                          load_raw, parse_config)
from almpc.errors import ConfigError
from almpc.export import export_csv, export_run, load_run, read_iteration_csv, read_summary
from almpc.polytope import HPolytope, is_subset
from almpc.simulator import compare_runs, run_experiment
from almpc.svg import render_svg

VERBATIM = bundled_config("paper_sec5.json")
LOW = bundled_config("low_noise.json")


def test_bundled_config_values():
    raw = load_raw(VERBATIM)
    assert raw["A"] == [[1.2, 1.5], [0.0, 1.3]]
    assert raw["B"] == [[0.0], [1.0]]
    assert raw["state_bounds"] == {"lower": [-10, -10], "upper": [10, 10]}
    assert raw["input_bounds"] == {"lower": [-1], "upper": [1]}
    assert raw["W"] == {"lower": [-0.8, -0.8], "upper": [0.8, 0.8]}
    assert raw["theta0"] == {"lower": [-0.2, -0.1], "upper": [0.2, 0.1]}
    assert raw["theta_true"] == [0.01, 0.05]
    assert raw["x_S"] == [-5.6, 1.29]
    low = load_raw(LOW)
    assert low.pop("W") == {"lower": [-0.02, -0.02], "upper": [0.02, 0.02]}
    raw.pop("W")
    low.pop("description", None), raw.pop("description", None)
    assert low == raw


def test_defaults_applied():
    cfg = parse_config(VERBATIM)
    assert cfg.mpc.horizon == 3 and cfg.T0 == 30 and cfg.rng_seed == 0
    assert cfg.mpc.eps_conv == 1e-3 and cfg.n_iterations == 6
    np.testing.assert_array_equal(cfg.Q, np.eye(2))
    np.testing.assert_array_equal(cfg.R, [[10.0]])
    np.testing.assert_array_equal(cfg.model.E, np.eye(2))
    assert cfg.mpc.weights.state == (1.0, 1.0) and cfg.mpc.weights.input == (10.0,)


def test_seed_override_changes_only_seed():
    a = config_to_dict(parse_config(VERBATIM))
    b = config_to_dict(parse_config(VERBATIM, ["rng_seed=7"]))
    assert (a.pop("rng_seed"), b.pop("rng_seed")) == (0, 7)
    assert a == b


def test_nested_override():
    raw = apply_overrides(load_raw(VERBATIM), ["W.upper=[0.1, 0.1]", "W.lower=[-0.1,-0.1]"])
    assert raw["W"]["upper"] == [0.1, 0.1]
    with pytest.raises(ConfigError, match="x_S"):
        apply_overrides(load_raw(VERBATIM), ["x_S.foo=1"])
    with pytest.raises(ConfigError):
        apply_overrides({}, ["novalue"])


def test_round_trip_through_explicit_form():
    cfg = parse_config(LOW)
    again = config_from_dict(config_to_dict(cfg))
    assert config_to_dict(again) == config_to_dict(cfg)


@pytest.mark.parametrize("edit,field", [
    (lambda r: r.pop("A"), "A"),
    (lambda r: r.update(B=[[0.0, 1.0]]), "B"),
    (lambda r: r.update(horizon=0), "horizon"),
    (lambda r: r.update(horizon=2.5), "horizon"),
    (lambda r: r.update(W={"lower": [1, 1], "upper": [0, 0]}), "W"),
    (lambda r: r.update(theta_true=[0.5, 0.0]), "theta_true"),
    (lambda r: r.update(colour="blue"), "colour"),
    (lambda r: r.update(eps_conv=-1), "eps_conv"),
    (lambda r: r.update(adaptation_enabled="yes"), "adaptation_enabled"),
    (lambda r: r.update(x_S=[1.0]), "x_S"),
])
def test_schema_errors_name_the_field(edit, field):
    raw = load_raw(VERBATIM)
    edit(raw)
    with pytest.raises(ConfigError, match=field):
        config_from_dict(raw)


def test_truth_outside_initial_set_is_invariant_error():
    raw = load_raw(VERBATIM)
    raw["theta_true"] = [0.3, 0.0]
    with pytest.raises(ConfigError, match="invariant"):
        config_from_dict(raw)


def test_bad_json(tmp_path):
    p = tmp_path / "x.json"
    p.write_text("{ not json")
    with pytest.raises(ConfigError, match="invalid JSON"):
        parse_config(p)
    with pytest.raises(ConfigError, match="cannot read"):
        parse_config(tmp_path / "missing.json")


@pytest.fixture(scope="module")
def low_result():
    return run_experiment(parse_config(LOW))


def test_export_files_and_headers(tmp_path, low_result):
    export_csv(low_result, tmp_path)
    files = sorted(p.name for p in tmp_path.glob("iteration_*.csv"))
    assert files == [f"iteration_{j}.csv" for j in range(1, 7)]
    with (tmp_path / "iteration_1.csv").open() as fh:
        assert next(csv.reader(fh)) == ["t", "x1", "x2", "u", "s1", "s2", "v", "w1", "w2"]
    with (tmp_path / "summary.csv").open() as fh:
        assert next(csv.reader(fh)) == ["j", "cost_realized", "cost_nominal", "n_steps",
                                        "theta_area"] + [f"h_s{i}" for i in range(1, 7)]
    rows = read_summary(tmp_path / "summary.csv")
    assert [int(r["j"]) for r in rows] == list(range(7))


def test_zero_iteration_summary(tmp_path):
    res = run_experiment(replace(parse_config(LOW), n_iterations=0))
    export_csv(res, tmp_path)
    assert [r["j"] for r in read_summary(tmp_path / "summary.csv")] == ["0"]
    assert not list(tmp_path.glob("iteration_*.csv"))


def test_csv_round_trip_is_exact(tmp_path, low_result):
    export_csv(low_result, tmp_path)
    for e in low_result.logs[1:]:
        x, u, s, v, w = read_iteration_csv(tmp_path / f"iteration_{e.iteration}.csv", 2, 1)
        for got, want in ((x, e.x), (u, e.u), (s, e.s), (v, e.v), (w, e.w)):
            np.testing.assert_array_equal(np.array(got), np.array(want))
    rows = read_summary(tmp_path / "summary.csv")
    for r, e in zip(rows[1:], low_result.logs[1:]):
        assert float(r["cost_nominal"]) == e.iter_cost_nominal
        assert float(r["cost_realized"]) == e.iter_cost_realized


def test_unwritable_directory(tmp_path, low_result):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(OSError):
        export_csv(low_result, blocker / "sub")


def test_load_run_rebuilds_logs(tmp_path, low_result):
    export_run(low_result, tmp_path)
    back = load_run(tmp_path)
    assert back.truncation_k == low_result.truncation_k
    for a, b in zip(low_result.logs, back.logs):
        assert a.iteration == b.iteration
        np.testing.assert_array_equal(np.array(a.s), np.array(b.s))
        np.testing.assert_array_equal(a.theta_snapshot.h, b.theta_snapshot.h)
        np.testing.assert_array_equal(a.h_s_snapshot, b.h_s_snapshot)


def _polygons(svg_text):
    out = []
    for pts in re.findall(r'<polygon points="([^"]+)"', svg_text):
        out.append(np.array([[float(v) for v in p.split(",")] for p in pts.split()]))
    return out


def test_single_iteration_fps_shows_two_sets(tmp_path):
    res = run_experiment(replace(parse_config(LOW), n_iterations=1))
    render_svg(res, out_dir=tmp_path)
    assert len(_polygons((tmp_path / "fps.svg").read_text())) == 2


def test_compare_costs_has_two_polylines(tmp_path):
    a, r = compare_runs(replace(parse_config(LOW), n_iterations=2))
    render_svg(a, r, tmp_path)
    assert (tmp_path / "costs.svg").read_text().count("<polyline") == 2
    for name in ("fps.svg", "mrpi.svg", "trajectories.svg", "costs.svg"):
        assert (tmp_path / name).read_text().startswith("<svg")


def test_fps_polygons_nested(tmp_path, low_result):
    render_svg(low_result, out_dir=tmp_path)
    polys = _polygons((tmp_path / "fps.svg").read_text())
    assert len(polys) == 7
    # pixel coordinates flip y, which keeps containment
    sets = [HPolytope.from_vertices_2d(p) for p in polys]
    for outer, inner in zip(sets, sets[1:]):
        assert is_subset(inner, outer, tol=0.02)
    for j in range(1, 7):
        assert is_subset(low_result.logs[j].theta_snapshot, low_result.logs[j - 1].theta_snapshot)


def test_svg_skipped_for_non_planar_state(tmp_path, caplog):
    raw = {"A": [[0.5]], "B": [[1.0]], "W": {"lower": [-0.01], "upper": [0.01]},
           "theta0": {"lower": [-0.1], "upper": [0.1]}, "theta_true": [0.0], "x_S": [1.0],
           "state_bounds": {"lower": [-5], "upper": [5]},
           "input_bounds": {"lower": [-1], "upper": [1]}, "n_iterations": 1}
    res = run_experiment(config_from_dict(raw))
    written = render_svg(res, out_dir=tmp_path)
    assert [p.name for p in written] == ["costs.svg"]
    assert "skipping" in caplog.text


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["run", "-c", str(LOW), "-o", str(tmp_path / "a"),
                 "--override", "n_iterations=1"]) == 0
    assert main(["run", "-c", str(VERBATIM), "-o", str(tmp_path / "b")]) == 3
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"A": [[1.0]]}))
    assert main(["run", "-c", str(bad), "-o", str(tmp_path / "c")]) == 2
    assert main(["run", "-c", str(LOW), "-o", str(tmp_path / "d"),
                 "--override", "horizon=0"]) == 2
    assert main(["plot", "-o", str(tmp_path / "missing")]) == 4
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    assert main(["run", "-c", str(LOW), "-o", str(blocker / "x"),
                 "--override", "n_iterations=1"]) == 4
    err = capsys.readouterr().err
    assert "infeasible" in err and "config error" in err


def test_cli_compare_then_plot_reproduces_figures(tmp_path):
    out = tmp_path / "cmp"
    assert main(["compare", "-c", str(LOW), "-o", str(out),
                 "--override", "n_iterations=2"]) == 0
    for sub in ("almpc", "rlmpc"):
        assert (out / sub / "summary.csv").exists()
        assert (out / sub / "iteration_2.csv").exists()
    before = {n: (out / n).read_bytes() for n in ("fps.svg", "mrpi.svg", "trajectories.svg",
                                                  "costs.svg")}
    for n in before:
        (out / n).unlink()
    assert main(["plot", "-o", str(out)]) == 0
    for n, data in before.items():
        assert (out / n).read_bytes() == data


def test_cli_selftest(capsys):
    assert main(["selftest"]) == 0
    assert re.search(r"selftest: \d+ passed, 0 failed", capsys.readouterr().out)
