"""CSV and JSON export of experiment logs, and the reverse for re-plotting.

Floats are written with ``repr`` (shortest round-trip form), so re-reading
reproduces logged values exactly and repeated runs give identical bytes.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .config import config_from_dict, config_to_dict
from .polytope import HPolytope, area_2d
from .regulator import lqr_gain
from .simulator import ExperimentResult, IterationLog

BUNDLE_NAME = "run.json"


def _fmt(x):
    x = float(x)
    if math.isnan(x):
        return "nan"
    return repr(x)


def _names(prefix, n):
    return [prefix] if n == 1 else [f"{prefix}{i + 1}" for i in range(n)]


def iteration_header(n_x, n_u):
    return (["t"] + _names("x", n_x) + _names("u", n_u) + _names("s", n_x)
            + _names("v", n_u) + _names("w", n_x))


def _vec_names(prefix, n):
    return [f"{prefix}{i + 1}" for i in range(n)]


def summary_header(n_f):
    return (["j", "cost_realized", "cost_nominal", "n_steps", "theta_area"]
            + _vec_names("h_s", n_f))


def _theta_area(poly):
    if poly.dim != 2:
        return math.nan
    return area_2d(poly)


def export_csv(result: ExperimentResult, out_dir):
    """Write ``iteration_<j>.csv`` for ``j >= 1`` and ``summary.csv``."""
    logs = result.logs
    if not logs:
        raise ValueError("nothing to export")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    model = result.config.model
    nx, nu = model.n_x, model.n_u
    written = []
    for entry in logs[1:]:
        path = out / f"iteration_{entry.iteration}.csv"
        with path.open("w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(iteration_header(nx, nu))
            T = entry.n_steps
            for t in range(T + 1):
                row = [str(t)] + [_fmt(a) for a in entry.x[t]]
                row += [_fmt(a) for a in entry.u[t]] if t < T else [""] * nu
                row += [_fmt(a) for a in entry.s[t]]
                row += [_fmt(a) for a in entry.v[t]] if t < T else [""] * nu
                row += [_fmt(a) for a in entry.w[t]] if t < T else [""] * nx
                wr.writerow(row)
        written.append(path)
    path = out / "summary.csv"
    with path.open("w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(summary_header(model.n_f))
        for entry in logs:
            wr.writerow([str(entry.iteration), _fmt(entry.iter_cost_realized),
                         _fmt(entry.iter_cost_nominal), str(entry.n_steps),
                         _fmt(_theta_area(entry.theta_snapshot))]
                        + [_fmt(a) for a in entry.h_s_snapshot])
    written.append(path)
    return written


def write_bundle(result: ExperimentResult, out_dir):
    """Sets and safe-set data that the CSV files do not carry."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    bundle = {
        "config": config_to_dict(result.config),
        "truncation_k": result.truncation_k,
        "iterations": [
            {
                "j": e.iteration,
                "feasible": e.feasible,
                "theta": {"H": e.theta_snapshot.H.tolist(), "h": e.theta_snapshot.h.tolist()},
                "h_s": e.h_s_snapshot.tolist(),
                "mpc_costs": list(map(float, e.mpc_costs)),
            }
            for e in result.logs
        ],
        "initial_trajectory": {
            "s": [list(map(float, s)) for s in result.logs[0].s],
            "v": [list(map(float, v)) for v in result.logs[0].v],
        },
    }
    if result.safe_set is not None:
        bundle["safe_set"] = {
            "points": result.safe_set.point_matrix.T.tolist(),
            "costs": result.safe_set.cost_vector.tolist(),
        }
    path = out / BUNDLE_NAME
    path.write_text(json.dumps(bundle, indent=1, sort_keys=True) + "\n")
    return path


def export_run(result: ExperimentResult, out_dir):
    return export_csv(result, out_dir) + [write_bundle(result, out_dir)]


def read_iteration_csv(path, n_x, n_u):
    """Rows of one iteration file as ``(x, u, s, v, w)`` lists of arrays."""
    x, u, s, v, w = [], [], [], [], []
    with Path(path).open(newline="") as fh:
        rd = csv.reader(fh)
        header = next(rd)
        if header != iteration_header(n_x, n_u):
            raise ValueError(f"{path}: unexpected header {header}")
        for row in rd:
            vals = row[1:]
            cut = np.cumsum([n_x, n_u, n_x, n_u, n_x])
            parts = np.split(np.array(vals, dtype=object), cut[:-1])
            x.append(np.array(parts[0], dtype=float))
            s.append(np.array(parts[2], dtype=float))
            if parts[1][0] != "":
                u.append(np.array(parts[1], dtype=float))
                v.append(np.array(parts[3], dtype=float))
                w.append(np.array(parts[4], dtype=float))
    return x, u, s, v, w


def read_summary(path):
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))


def load_run(out_dir) -> ExperimentResult:
    """Rebuild an :class:`ExperimentResult` from exported files."""
    out = Path(out_dir)
    bundle = json.loads((out / BUNDLE_NAME).read_text())
    cfg = config_from_dict(bundle["config"])
    gains = lqr_gain(cfg.model.A, cfg.model.B, cfg.Q, cfg.R)
    nx, nu = cfg.model.n_x, cfg.model.n_u
    summary = {int(r["j"]): r for r in read_summary(out / "summary.csv")}
    logs = []
    for item in bundle["iterations"]:
        j = item["j"]
        theta = HPolytope(np.array(item["theta"]["H"]), np.array(item["theta"]["h"]))
        row = summary[j]
        if j == 0:
            init = bundle["initial_trajectory"]
            x, u, w = [], [], []
            s = [np.array(a) for a in init["s"]]
            v = [np.array(a) for a in init["v"]]
        else:
            x, u, s, v, w = read_iteration_csv(out / f"iteration_{j}.csv", nx, nu)
        logs.append(IterationLog(j, x, u, w, s, v, float(row["cost_realized"]),
                                 float(row["cost_nominal"]), theta,
                                 np.array(item["h_s"]), item["mpc_costs"],
                                 item["feasible"]))
    return ExperimentResult(cfg, gains, bundle["truncation_k"], logs, None)
