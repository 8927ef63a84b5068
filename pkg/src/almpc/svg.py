"""Static SVG figures: offset sets, error sets, trajectories, iteration costs.

Coordinates are printed with fixed precision so identical logs give
identical files.
"""
from __future__ import annotations

import logging
import math
from pathlib import Path

import numpy as np

from .polytope import HPolytope, box_bounds, vertices_2d
from .simulator import ExperimentResult
from .uncertainty import FeasibleParameterSet, mrpi_outer_2d

log = logging.getLogger(__name__)

ALMPC_COLOR = "#1f77b4"
RLMPC_COLOR = "#d62728"
INIT_COLOR = "#7f7f7f"


def _nice_ticks(lo, hi, target=5):
    span = hi - lo
    if span <= 0:
        return [lo]
    raw = span / target
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 5, 10) if m * mag >= raw)
    start = math.ceil(lo / step - 1e-9)
    stop = math.floor(hi / step + 1e-9)
    return [k * step for k in range(start, stop + 1)]


def _blend(c1, c2, t):
    a = [int(c1[i:i + 2], 16) for i in (1, 3, 5)]
    b = [int(c2[i:i + 2], 16) for i in (1, 3, 5)]
    return "#" + "".join(f"{round(x + (y - x) * t):02x}" for x, y in zip(a, b))


class Canvas:
    def __init__(self, title, xlabel, ylabel, bounds, width=520, height=400):
        self.w, self.h = width, height
        self.ml, self.mr, self.mt, self.mb = 64, 16, 36, 48
        x0, x1, y0, y1 = bounds
        if x1 - x0 <= 0:
            x0, x1 = x0 - 1, x1 + 1
        if y1 - y0 <= 0:
            y0, y1 = y0 - 1, y1 + 1
        self.bounds = (x0, x1, y0, y1)
        self.title, self.xlabel, self.ylabel = title, xlabel, ylabel
        self.items = []
        self.legend = []

    def px(self, x, y):
        x0, x1, y0, y1 = self.bounds
        pw = self.w - self.ml - self.mr
        ph = self.h - self.mt - self.mb
        return (self.ml + (x - x0) / (x1 - x0) * pw,
                self.mt + ph - (y - y0) / (y1 - y0) * ph)

    def _pts(self, pts):
        return " ".join("{:.2f},{:.2f}".format(*self.px(x, y)) for x, y in pts)

    def polygon(self, pts, stroke, fill="none", opacity=1.0, width=1.5):
        self.items.append(
            f'<polygon points="{self._pts(pts)}" fill="{fill}" fill-opacity="{opacity:.2f}" '
            f'stroke="{stroke}" stroke-width="{width}" clip-path="url(#plot)"/>')

    def polyline(self, pts, stroke, width=1.5, dash=None):
        d = f' stroke-dasharray="{dash}"' if dash else ""
        self.items.append(
            f'<polyline points="{self._pts(pts)}" fill="none" stroke="{stroke}" '
            f'stroke-width="{width}"{d} clip-path="url(#plot)"/>')

    def marker(self, x, y, color, r=3.0):
        cx, cy = self.px(x, y)
        self.items.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="{r}" fill="{color}"/>')

    def star(self, x, y, color, r=7.0):
        cx, cy = self.px(x, y)
        pts = []
        for k in range(10):
            rad = r if k % 2 == 0 else r * 0.45
            ang = -math.pi / 2 + k * math.pi / 5
            pts.append(f"{cx + rad * math.cos(ang):.2f},{cy + rad * math.sin(ang):.2f}")
        self.items.append(f'<path d="M{" L".join(pts)} Z" fill="{color}"/>')

    def add_legend(self, label, color, dash=None):
        self.legend.append((label, color, dash))

    def render(self):
        x0, x1, y0, y1 = self.bounds
        pw = self.w - self.ml - self.mr
        ph = self.h - self.mt - self.mb
        out = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.w}" height="{self.h}" '
            f'viewBox="0 0 {self.w} {self.h}" font-family="sans-serif" font-size="11">',
            f'<defs><clipPath id="plot"><rect x="{self.ml}" y="{self.mt}" width="{pw}" '
            f'height="{ph}"/></clipPath></defs>',
            f'<rect x="0" y="0" width="{self.w}" height="{self.h}" fill="white"/>',
            f'<text x="{self.w / 2:.1f}" y="20" text-anchor="middle" font-size="13">'
            f'{self.title}</text>',
        ]
        for t in _nice_ticks(x0, x1):
            px, _ = self.px(t, y0)
            out.append(f'<line x1="{px:.2f}" y1="{self.mt}" x2="{px:.2f}" '
                       f'y2="{self.mt + ph}" stroke="#eeeeee"/>')
            out.append(f'<text x="{px:.2f}" y="{self.mt + ph + 16}" '
                       f'text-anchor="middle">{t:.6g}</text>')
        for t in _nice_ticks(y0, y1):
            _, py = self.px(x0, t)
            out.append(f'<line x1="{self.ml}" y1="{py:.2f}" x2="{self.ml + pw}" '
                       f'y2="{py:.2f}" stroke="#eeeeee"/>')
            out.append(f'<text x="{self.ml - 6}" y="{py + 4:.2f}" '
                       f'text-anchor="end">{t:.6g}</text>')
        out.append(f'<rect x="{self.ml}" y="{self.mt}" width="{pw}" height="{ph}" '
                   f'fill="none" stroke="black"/>')
        out.extend(self.items)
        out.append(f'<text x="{self.ml + pw / 2:.1f}" y="{self.h - 10}" '
                   f'text-anchor="middle">{self.xlabel}</text>')
        out.append(f'<text x="14" y="{self.mt + ph / 2:.1f}" text-anchor="middle" '
                   f'transform="rotate(-90 14 {self.mt + ph / 2:.1f})">{self.ylabel}</text>')
        for k, (label, color, dash) in enumerate(self.legend):
            y = self.mt + 14 + 15 * k
            x = self.ml + pw - 130
            d = f' stroke-dasharray="{dash}"' if dash else ""
            out.append(f'<line x1="{x}" y1="{y - 4}" x2="{x + 22}" y2="{y - 4}" '
                       f'stroke="{color}" stroke-width="2"{d}/>')
            out.append(f'<text x="{x + 28}" y="{y}">{label}</text>')
        out.append("</svg>")
        return "\n".join(out) + "\n"


def _bounds_of(point_sets, pad=0.08):
    pts = np.vstack([np.atleast_2d(p) for p in point_sets if len(p)])
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    span = np.maximum(hi - lo, 1e-9)
    lo, hi = lo - pad * span, hi + pad * span
    return lo[0], hi[0], lo[1], hi[1]


def _iteration_colors(n):
    return [_blend("#c6dbef", "#08306b", k / max(1, n - 1)) for k in range(n)]


def fps_figure(result: ExperimentResult):
    cfg = result.config
    if cfg.theta0.dim != 2:
        return None
    polys = [np.array(vertices_2d(e.theta_snapshot)) for e in result.logs]
    cv = Canvas("Feasible parameter set", "theta_1", "theta_2",
                _bounds_of(polys + [cfg.theta_true[None, :]]))
    colors = _iteration_colors(len(polys))
    for k, (V, color) in enumerate(zip(polys, colors)):
        cv.polygon(V, stroke=color, fill=color, opacity=0.25)
        cv.add_legend(f"Theta^{k}", color)
    cv.star(*cfg.theta_true, color="#1f3fff")
    return cv.render()


def mrpi_polygons(result: ExperimentResult, directions=64):
    """Outer error-set polygons for the offset set used in each iteration."""
    cfg = result.config
    out = []
    for prev in result.logs[:-1]:
        fps = FeasibleParameterSet(prev.theta_snapshot)
        out.append(mrpi_outer_2d(result.gains, cfg.W, fps, cfg.model.E, directions,
                                 result.truncation_k))
    return out


def mrpi_figure(result: ExperimentResult):
    if result.config.model.n_x != 2 or len(result.logs) < 2:
        return None
    polys = [np.array(vertices_2d(p)) for p in mrpi_polygons(result)]
    cv = Canvas("Error invariant set (outer approximation)", "e_1", "e_2",
                _bounds_of(polys))
    colors = _iteration_colors(len(polys))
    for k, (V, color) in enumerate(zip(polys, colors)):
        cv.polygon(V, stroke=color, fill=color, opacity=0.2)
        cv.add_legend(f"iteration {k + 1}", color)
    return cv.render()


def _state_box(model):
    rows = np.all(model.G == 0, axis=1)
    if not rows.any():
        return None
    return box_bounds(HPolytope(model.F[rows], model.f[rows]))


def trajectories_figure(result: ExperimentResult, paired: ExperimentResult | None = None):
    cfg = result.config
    if cfg.model.n_x != 2:
        return None
    runs = [("ALMPC", result, ALMPC_COLOR)]
    if paired is not None:
        runs.append(("RLMPC", paired, RLMPC_COLOR))
    init = np.array(result.logs[0].s)
    sets = [init]
    for _, res, _ in runs:
        last = res.logs[-1]
        if last.x:
            sets += [np.array(last.x), np.array(last.s)]
    cv = Canvas(f"Trajectories after iteration {len(result.logs) - 1}", "x_1", "x_2",
                _bounds_of(sets))
    box = _state_box(cfg.model)
    if box is not None:
        lo, hi = box
        cv.polygon([(lo[0], lo[1]), (hi[0], lo[1]), (hi[0], hi[1]), (lo[0], hi[1])],
                   stroke="black", width=2.0)
    cv.polyline(init, INIT_COLOR, dash="2,3")
    cv.add_legend("initial", INIT_COLOR, "2,3")
    for name, res, color in runs:
        last = res.logs[-1]
        if not last.x:
            continue
        cv.polyline(np.array(last.x), color)
        cv.polyline(np.array(last.s), color, width=1.0, dash="5,3")
        for p in last.x:
            cv.marker(p[0], p[1], color, r=2.0)
        cv.add_legend(f"{name} realized", color)
        cv.add_legend(f"{name} nominal", color, "5,3")
    return cv.render()


def costs_figure(result: ExperimentResult, paired: ExperimentResult | None = None):
    runs = [("ALMPC", result, ALMPC_COLOR)]
    if paired is not None:
        runs.append(("RLMPC", paired, RLMPC_COLOR))
    series = []
    for name, res, color in runs:
        pts = np.array([(e.iteration, e.iter_cost_realized) for e in res.logs[1:]])
        series.append((name, pts, color))
    if not any(len(p) for _, p, _ in series):
        return None
    cv = Canvas("Iteration cost (realized)", "iteration", "cost",
                _bounds_of([p for _, p, _ in series], pad=0.1))
    for name, pts, color in series:
        cv.polyline(pts, color, width=2.0)
        for x, y in pts:
            cv.marker(x, y, color)
        cv.add_legend(name, color)
    return cv.render()


def render_svg(result: ExperimentResult, paired: ExperimentResult | None = None,
               out_dir="."):
    """Write ``fps.svg``, ``mrpi.svg``, ``trajectories.svg``, ``costs.svg``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    figures = {
        "fps.svg": fps_figure(result),
        "mrpi.svg": mrpi_figure(result),
        "trajectories.svg": trajectories_figure(result, paired),
        "costs.svg": costs_figure(result, paired),
    }
    written = []
    for name, text in figures.items():
        if text is None:
            log.warning("skipping %s: needs 2D state/parameter data", name)
            continue
        path = out / name
        path.write_text(text)
        written.append(path)
    return written
