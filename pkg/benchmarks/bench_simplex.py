"""Compiled vs numpy simplex kernels on the controller's own LPs.

Usage: python benchmarks/bench_simplex.py [--repeat N]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from almpc.config import bundled_config, parse_config
from almpc.controller import _horizon_lp
from almpc.lp import LinearProgram, available_backends, solve_lp
from almpc.simulator import run_experiment


def workloads():
    """(name, LinearProgram) pairs: random dense LPs and MPC problems from a real run."""
    rng = np.random.default_rng(0)
    out = []
    for n, m in ((10, 20), (40, 80)):
        A = rng.normal(size=(m, n))
        out.append((f"random {m}x{n}",
                    LinearProgram(rng.normal(size=n), A, rng.uniform(1, 2, size=m),
                                  lb=-5.0, ub=5.0)))
    res = run_experiment(parse_config(bundled_config("low_noise.json")))
    cfg, ss = res.config, res.safe_set
    for j in (1, len(res.logs) - 1):
        s0 = res.logs[j].s[0]
        lp, _ = _horizon_lp(s0, cfg.model, cfg.mpc.weights, res.logs[j].h_s_snapshot,
                            cfg.mpc.horizon, (ss.point_matrix, ss.cost_vector))
        out.append((f"MPC N=3, {ss.n_points} safe-set points", lp))
    lp, _ = _horizon_lp(cfg.x_S, cfg.model, cfg.mpc.weights, res.logs[0].h_s_snapshot,
                        cfg.T0, None)
    out.append((f"initializer T0={cfg.T0}", lp))
    return out


def bench(lp, backend, repeat):
    solve_lp(lp, backend)
    best = np.inf
    for _ in range(repeat):
        t = time.perf_counter()
        solve_lp(lp, backend)
        best = min(best, time.perf_counter() - t)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    backends = available_backends()
    print(f"{'workload':<38}" + "".join(f"{b:>12}" for b in backends) + "     speedup")
    for name, lp in workloads():
        times = {b: bench(lp, b, args.repeat) for b in backends}
        row = f"{name:<38}" + "".join(f"{times[b] * 1e3:>10.2f}ms" for b in backends)
        if "cython" in times:
            row += f"{times['python'] / times['cython']:>11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
