"""JSON experiment configuration.

Schema (``*`` marks required keys)::

    A*            n_x x n_x matrix
    B*            n_x x n_u matrix
    E             n_x x p matrix (default: identity, needs p == n_x)
    F, G, f       constraint data F x + G u <= f, or instead
    state_bounds  {"lower": [...], "upper": [...]} and
    input_bounds  {"lower": [...], "upper": [...]}
    W*, theta0*   {"lower", "upper"} box or {"H", "h"} polytope
    theta_true*   true offset (simulation only)
    x_S*          initial state
    n_iterations  6        horizon       3
    Q             I        R             10 I
    stage_weights {"state": [1, ...], "input": [10, ...]}
    rng_seed      0        T0            30
    eps_conv      1e-3     max_steps_per_iter  100
    adaptation_enabled  true
"""
from __future__ import annotations

import copy
import json
from pathlib import Path

import numpy as np

from .controller import ModelData, MpcConfig
from .errors import ConfigError
from .polytope import HPolytope, box_bounds, contains
from .safe_set import StageWeights
from .simulator import ExperimentConfig

CONFIG_DIR = Path(__file__).resolve().parent / "configs"

KNOWN_KEYS = {
    "A", "B", "E", "F", "G", "f", "state_bounds", "input_bounds", "W", "theta0",
    "theta_true", "x_S", "n_iterations", "horizon", "Q", "R", "stage_weights",
    "rng_seed", "T0", "eps_conv", "max_steps_per_iter", "adaptation_enabled",
    "description",
}


def bundled_config(name: str) -> Path:
    """Path of a config shipped with the package, e.g. ``paper_sec5.json``."""
    return CONFIG_DIR / name


def _matrix(raw, key, rows=None, cols=None):
    try:
        M = np.array(raw, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: expected a numeric matrix") from None
    if M.ndim != 2 or M.size == 0:
        raise ConfigError(f"{key}: expected a non-empty 2D matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ConfigError(f"{key}: entries must be finite")
    if rows is not None and M.shape[0] != rows:
        raise ConfigError(f"{key}: expected {rows} rows, got {M.shape[0]}")
    if cols is not None and M.shape[1] != cols:
        raise ConfigError(f"{key}: expected {cols} columns, got {M.shape[1]}")
    return M


def _vector(raw, key, size=None):
    try:
        v = np.array(raw, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: expected a numeric vector") from None
    if v.ndim != 1:
        raise ConfigError(f"{key}: expected a flat list")
    if size is not None and v.size != size:
        raise ConfigError(f"{key}: expected length {size}, got {v.size}")
    if not np.all(np.isfinite(v)):
        raise ConfigError(f"{key}: entries must be finite")
    return v


def _int(raw, key, minimum):
    if isinstance(raw, bool) or not isinstance(raw, int):
        raise ConfigError(f"{key}: expected an integer")
    if raw < minimum:
        raise ConfigError(f"{key}: must be >= {minimum}")
    return raw


def _set(raw, key, dim):
    if not isinstance(raw, dict):
        raise ConfigError(f"{key}: expected an object with lower/upper or H/h")
    if "lower" in raw or "upper" in raw:
        lo = _vector(raw.get("lower"), f"{key}.lower", dim)
        hi = _vector(raw.get("upper"), f"{key}.upper", dim)
        if np.any(lo > hi):
            raise ConfigError(f"{key}: lower exceeds upper")
        return HPolytope.box(lo, hi)
    if "H" in raw and "h" in raw:
        H = _matrix(raw["H"], f"{key}.H", cols=dim)
        h = _vector(raw["h"], f"{key}.h", H.shape[0])
        if np.any(np.linalg.norm(H, axis=1) == 0):
            raise ConfigError(f"{key}.H: rows must be nonzero")
        return HPolytope(H, h)
    raise ConfigError(f"{key}: expected lower/upper or H/h")


def apply_overrides(raw: dict, overrides) -> dict:
    """Apply ``key=value`` strings; values are parsed as JSON when possible."""
    out = copy.deepcopy(raw)
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r}: expected key=value")
        key, text = item.split("=", 1)
        key = key.strip()
        try:
            value = json.loads(text)
        except json.JSONDecodeError:
            value = text
        parts = key.split(".")
        node = out
        for part in parts[:-1]:
            if not isinstance(node.get(part), dict):
                raise ConfigError(f"override {key}: {part} is not an object")
            node = node[part]
        node[parts[-1]] = value
    return out


def config_from_dict(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config: top level must be a JSON object")
    unknown = sorted(set(raw) - KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"{unknown[0]}: unknown field")
    for key in ("A", "B", "W", "theta0", "theta_true", "x_S"):
        if key not in raw:
            raise ConfigError(f"{key}: required field missing")
    A = _matrix(raw["A"], "A")
    nx = A.shape[0]
    if A.shape[1] != nx:
        raise ConfigError("A: must be square")
    B = _matrix(raw["B"], "B", rows=nx)
    nu = B.shape[1]
    if "E" in raw:
        E = _matrix(raw["E"], "E", rows=nx)
    else:
        E = np.eye(nx)
    p = E.shape[1]

    if "F" in raw or "G" in raw or "f" in raw:
        for key in ("F", "G", "f"):
            if key not in raw:
                raise ConfigError(f"{key}: required together with F, G, f")
        f = _vector(raw["f"], "f")
        F = _matrix(raw["F"], "F", rows=f.size, cols=nx)
        G = _matrix(raw["G"], "G", rows=f.size, cols=nu)
    elif "state_bounds" in raw and "input_bounds" in raw:
        xb = _set(raw["state_bounds"], "state_bounds", nx)
        ub = _set(raw["input_bounds"], "input_bounds", nu)
        F = np.vstack([xb.H, np.zeros((ub.n_rows, nx))])
        G = np.vstack([np.zeros((xb.n_rows, nu)), ub.H])
        f = np.concatenate([xb.h, ub.h])
    else:
        raise ConfigError("F: constraints missing (give F/G/f or state_bounds/input_bounds)")

    model = ModelData(A, B, E, F, G, f)
    W = _set(raw["W"], "W", nx)
    theta0 = _set(raw["theta0"], "theta0", p)
    theta_true = _vector(raw["theta_true"], "theta_true", p)
    x_S = _vector(raw["x_S"], "x_S", nx)
    if box_bounds(W) is None:
        raise ConfigError("W: disturbance sampling needs an axis-aligned box")
    if not contains(theta0, theta_true):
        raise ConfigError("theta_true: invariant violated, theta_true is not inside theta0")

    sw = raw.get("stage_weights", {})
    if not isinstance(sw, dict):
        raise ConfigError("stage_weights: expected an object")
    wx = _vector(sw.get("state", [1.0] * nx), "stage_weights.state", nx)
    wu = _vector(sw.get("input", [10.0] * nu), "stage_weights.input", nu)
    if np.any(wx < 0) or np.any(wu < 0):
        raise ConfigError("stage_weights: weights must be nonnegative")
    eps = raw.get("eps_conv", 1e-3)
    if isinstance(eps, bool) or not isinstance(eps, (int, float)) or eps <= 0:
        raise ConfigError("eps_conv: expected a positive number")
    mpc = MpcConfig(horizon=_int(raw.get("horizon", 3), "horizon", 1),
                    weights=StageWeights(tuple(wx.tolist()), tuple(wu.tolist())),
                    eps_conv=float(eps))
    Q = _matrix(raw.get("Q", np.eye(nx).tolist()), "Q", nx, nx)
    R = _matrix(raw.get("R", (10.0 * np.eye(nu)).tolist()), "R", nu, nu)
    adapt = raw.get("adaptation_enabled", True)
    if not isinstance(adapt, bool):
        raise ConfigError("adaptation_enabled: expected true or false")
    return ExperimentConfig(
        model=model, W=W, theta0=theta0, theta_true=theta_true, x_S=x_S,
        n_iterations=_int(raw.get("n_iterations", 6), "n_iterations", 0),
        mpc=mpc, Q=Q, R=R,
        rng_seed=_int(raw.get("rng_seed", 0), "rng_seed", 0),
        T0=_int(raw.get("T0", 30), "T0", 1),
        max_steps_per_iter=_int(raw.get("max_steps_per_iter", 100), "max_steps_per_iter", 1),
        adaptation_enabled=adapt,
    )


def load_raw(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON at line {exc.lineno}: {exc.msg}") from None


def parse_config(path, overrides=()) -> ExperimentConfig:
    return config_from_dict(apply_overrides(load_raw(path), overrides))


def config_to_dict(cfg: ExperimentConfig) -> dict:
    """Explicit (F/G/f, H/h) form; ``config_from_dict`` inverts it."""
    m = cfg.model
    return {
        "A": m.A.tolist(), "B": m.B.tolist(), "E": m.E.tolist(),
        "F": m.F.tolist(), "G": m.G.tolist(), "f": m.f.tolist(),
        "W": {"H": cfg.W.H.tolist(), "h": cfg.W.h.tolist()},
        "theta0": {"H": cfg.theta0.H.tolist(), "h": cfg.theta0.h.tolist()},
        "theta_true": cfg.theta_true.tolist(), "x_S": cfg.x_S.tolist(),
        "n_iterations": cfg.n_iterations, "horizon": cfg.mpc.horizon,
        "Q": cfg.Q.tolist(), "R": cfg.R.tolist(),
        "stage_weights": {"state": list(cfg.mpc.weights.state),
                          "input": list(cfg.mpc.weights.input)},
        "rng_seed": cfg.rng_seed, "T0": cfg.T0, "eps_conv": cfg.mpc.eps_conv,
        "max_steps_per_iter": cfg.max_steps_per_iter,
        "adaptation_enabled": cfg.adaptation_enabled,
    }
