"""Halfspace polytopes ``{x : H x <= h}``.

H-representation is canonical. Vertex lists exist only transiently in 2D,
for plotting and for the Minkowski-sum oracle.
"""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .errors import EmptyPolytopeError, ShapeError, UnboundedDirectionError
from .lp import FEAS_TOL, LinearProgram, LpStatus, solve_lp

REDUNDANCY_TOL = 1e-9
VERTEX_DEDUP = 1e-9


@dataclass(frozen=True, eq=False)
class HPolytope:
    """Convex polytope in halfspace form with unit-norm rows."""

    H: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        H = np.atleast_2d(np.asarray(self.H, dtype=float))
        h = np.asarray(self.h, dtype=float).reshape(-1)
        if H.shape[0] != h.size:
            raise ShapeError(f"H has {H.shape[0]} rows but h has {h.size}")
        norms = np.linalg.norm(H, axis=1)
        if np.any(norms == 0.0):
            raise ShapeError("halfspace normal rows must be nonzero")
        H = H / norms[:, None]
        h = h / norms
        H.setflags(write=False)
        h.setflags(write=False)
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "h", h)

    @property
    def dim(self):
        return self.H.shape[1]

    @property
    def n_rows(self):
        return self.H.shape[0]

    @classmethod
    def box(cls, lower, upper):
        lower = np.asarray(lower, dtype=float).reshape(-1)
        upper = np.asarray(upper, dtype=float).reshape(-1)
        if lower.shape != upper.shape:
            raise ShapeError("box bounds differ in length")
        if np.any(lower > upper):
            raise EmptyPolytopeError("box lower bound exceeds upper bound")
        n = lower.size
        eye = np.eye(n)
        return cls(np.vstack([eye, -eye]), np.concatenate([upper, -lower]))

    @classmethod
    def from_vertices_2d(cls, points):
        """Smallest polytope containing ``points`` (degenerate hulls allowed)."""
        hull = convex_hull_2d(points)
        if len(hull) == 1:
            (x, y), = hull
            return cls.box([x, y], [x, y])
        if len(hull) == 2:
            a, b = hull
            t = (b - a) / np.linalg.norm(b - a)
            nrm = np.array([-t[1], t[0]])
            H = np.vstack([nrm, -nrm, t, -t])
            h = np.array([nrm @ a, -nrm @ a, t @ b, -t @ a])
            return cls(H, h)
        H, h = [], []
        for a, b in zip(hull, hull[1:] + hull[:1]):
            nrm = np.array([b[1] - a[1], a[0] - b[0]])
            H.append(nrm)
            h.append(nrm @ a)
        return cls(np.array(H), np.array(h))

    def __repr__(self):
        return f"HPolytope(dim={self.dim}, rows={self.n_rows})"


def _check_dim(p, q):
    if p.dim != q.dim:
        raise ShapeError(f"dimension mismatch: {p.dim} vs {q.dim}")


def support(p: HPolytope, d) -> float:
    """``max_{x in p} d.x``, computed by LP."""
    d = np.asarray(d, dtype=float).reshape(-1)
    if d.size != p.dim:
        raise ShapeError(f"direction has length {d.size}, polytope dim {p.dim}")
    if not np.any(d):
        return 0.0
    res = solve_lp(LinearProgram(c=-d, A_ub=p.H, b_ub=p.h, lb=-np.inf))
    if res.status is LpStatus.INFEASIBLE:
        raise EmptyPolytopeError("support of an empty polytope")
    if res.status is LpStatus.UNBOUNDED:
        raise UnboundedDirectionError(f"polytope unbounded in direction {d}")
    return -res.objective


def is_empty(p: HPolytope) -> bool:
    res = solve_lp(LinearProgram(c=np.zeros(p.dim), A_ub=p.H, b_ub=p.h,
                                 lb=-np.inf))
    return res.status is LpStatus.INFEASIBLE


def is_bounded(p: HPolytope) -> bool:
    try:
        for i in range(p.dim):
            e = np.zeros(p.dim)
            e[i] = 1.0
            support(p, e)
            support(p, -e)
    except UnboundedDirectionError:
        return False
    return True


def intersect(p: HPolytope, q: HPolytope) -> HPolytope:
    _check_dim(p, q)
    return HPolytope(np.vstack([p.H, q.H]), np.concatenate([p.h, q.h]))


def contains(p: HPolytope, x, tol: float = FEAS_TOL) -> bool:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != p.dim:
        raise ShapeError(f"point has length {x.size}, polytope dim {p.dim}")
    return bool(np.all(p.H @ x <= p.h + tol))


def is_subset(p: HPolytope, q: HPolytope, tol: float = FEAS_TOL) -> bool:
    """True iff ``p`` is contained in ``q`` (row-wise support test)."""
    _check_dim(p, q)
    for row, bound in zip(q.H, q.h):
        if support(p, row) > bound + tol:
            return False
    return True


def reduce(p: HPolytope) -> HPolytope:
    """Drop redundant rows, keeping a minimal description of the same set."""
    if is_empty(p):
        raise EmptyPolytopeError("cannot reduce an empty polytope")
    H, h = p.H, p.h
    # exact duplicates first: keep the tightest offset per normal
    keep = []
    for i in range(len(h)):
        dup = False
        for k, j in enumerate(keep):
            if np.allclose(H[i], H[j], rtol=0.0, atol=1e-12):
                if h[i] < h[j]:
                    keep[k] = i
                dup = True
                break
        if not dup:
            keep.append(i)
    rows = list(keep)
    i = 0
    while i < len(rows):
        others = rows[:i] + rows[i + 1:]
        r = rows[i]
        A = np.vstack([H[others], H[r]]) if others else H[[r]]
        b = np.concatenate([h[others], [h[r] + 1.0]]) if others else h[[r]] + 1.0
        res = solve_lp(LinearProgram(c=-H[r], A_ub=A, b_ub=b, lb=-np.inf))
        if res.optimal and -res.objective <= h[r] + REDUNDANCY_TOL:
            rows.pop(i)
        else:
            i += 1
    return HPolytope(H[rows], h[rows])


def convex_hull_2d(points):
    """Monotone-chain hull, CCW, collinear points dropped."""
    pts = sorted({(float(x), float(y)) for x, y in np.asarray(points, dtype=float)})
    pts = _dedup(pts)
    if len(pts) <= 2:
        return [np.array(pt) for pt in pts]
    scale = max(1.0, max(abs(c) for pt in pts for c in pt))
    eps = 1e-12 * scale

    def turns_left(o, a, b):
        cr = (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
        if cr <= 0.0:
            return False
        # nearly collinear: drop a only if it sits between o and b
        dx, dy = b[0] - o[0], b[1] - o[1]
        seg = math.hypot(dx, dy)
        if cr > eps * seg:
            return True
        proj = (a[0] - o[0]) * dx + (a[1] - o[1]) * dy
        return not 0.0 <= proj <= seg * seg

    lower, upper = [], []
    for pt in pts:
        while len(lower) >= 2 and not turns_left(lower[-2], lower[-1], pt):
            lower.pop()
        lower.append(pt)
    for pt in reversed(pts):
        while len(upper) >= 2 and not turns_left(upper[-2], upper[-1], pt):
            upper.pop()
        upper.append(pt)
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 2:
        hull = [pts[0], pts[-1]]
    return [np.array(pt) for pt in hull]


def _dedup(pts):
    """Drop near-duplicates from points sorted by x."""
    out = []
    for pt in pts:
        k = len(out) - 1
        while k >= 0 and pt[0] - out[k][0] <= VERTEX_DEDUP:
            if abs(pt[1] - out[k][1]) <= VERTEX_DEDUP:
                break
            k -= 1
        else:
            out.append(pt)
    return out


def vertices_2d(p: HPolytope):
    """Vertices of a bounded 2D polytope, counter-clockwise.

    Ordered by angle about the vertex centroid (ties by radius), starting
    from the smallest angle in ``[-pi, pi)``.
    """
    if p.dim != 2:
        raise ShapeError("vertices_2d needs a 2D polytope")
    if is_empty(p):
        raise EmptyPolytopeError("polytope is empty")
    if not is_bounded(p):
        raise UnboundedDirectionError("polytope is unbounded")
    H, h = p.H, p.h
    center = _interior_point(p)
    cand = _polar_vertices(H, h, center) if center is not None else _pairwise_vertices(H, h)
    pts = _dedup(sorted(cand))
    if not pts:
        raise EmptyPolytopeError("no vertices found")
    cx = sum(pt[0] for pt in pts) / len(pts)
    cy = sum(pt[1] for pt in pts) / len(pts)
    pts.sort(key=lambda pt: (round(math.atan2(pt[1] - cy, pt[0] - cx), 12),
                             math.hypot(pt[0] - cx, pt[1] - cy)))
    return [np.array(pt) for pt in pts]


def _interior_point(p: HPolytope):
    """Chebyshev center when the polygon has a nondegenerate interior, else ``None``."""
    scale = max(1.0, float(np.abs(p.h).max()))
    c = np.array([0.0, 0.0, -1.0])
    A_ub = np.hstack([p.H, np.ones((p.n_rows, 1))])
    res = solve_lp(LinearProgram(c=c, A_ub=A_ub, b_ub=p.h, lb=[-np.inf, -np.inf, 0.0]))
    if not res.optimal or res.x[2] <= 1e-7 * scale:
        return None
    return res.x[:2]


def _polar_vertices(H, h, center):
    # facets of the polar hull are the vertices of the polygon
    slack = h - H @ center
    dual = H / slack[:, None]
    hull = convex_hull_2d(dual)
    lookup = {}
    for i, q in enumerate(dual):
        lookup.setdefault((float(q[0]), float(q[1])), i)
    idx = [lookup[(float(q[0]), float(q[1]))] for q in hull]
    cand = []
    for i, j in zip(idx, idx[1:] + idx[:1]):
        M = H[[i, j]]
        x = np.linalg.solve(M, slack[[i, j]]) + center
        cand.append((float(x[0]), float(x[1])))
    return cand


def _pairwise_vertices(H, h):
    scale = max(1.0, float(np.abs(h).max()))
    cand = []
    for i in range(len(h)):
        for j in range(i + 1, len(h)):
            M = H[[i, j]]
            det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
            if abs(det) < 1e-12:
                continue
            x = np.linalg.solve(M, h[[i, j]])
            if np.all(H @ x <= h + 1e-9 * scale):
                cand.append((float(x[0]), float(x[1])))
    return cand


def minkowski_sum_2d(p: HPolytope, q: HPolytope) -> HPolytope:
    _check_dim(p, q)
    vp = vertices_2d(p)
    vq = vertices_2d(q)
    sums = [a + b for a in vp for b in vq]
    return HPolytope.from_vertices_2d(sums)


def area_2d(p: HPolytope) -> float:
    v = vertices_2d(p)
    if len(v) < 3:
        return 0.0
    x = np.array([pt[0] for pt in v])
    y = np.array([pt[1] for pt in v])
    return 0.5 * abs(float(x @ np.roll(y, -1) - y @ np.roll(x, -1)))


def linear_map_2d(M, p: HPolytope) -> HPolytope:
    """Image ``M p`` of a bounded 2D polytope under a 2x2 matrix."""
    M = np.asarray(M, dtype=float)
    return HPolytope.from_vertices_2d([M @ v for v in vertices_2d(p)])


def support_many(p: HPolytope, directions) -> np.ndarray:
    """Support values for each row of ``directions``.

    In 2D the bounded polytope's vertices are enumerated once and the
    supports are exact maxima over them; otherwise one LP per direction.
    """
    D = np.atleast_2d(np.asarray(directions, dtype=float))
    if D.shape[1] != p.dim:
        raise ShapeError(f"directions have width {D.shape[1]}, polytope dim {p.dim}")
    if p.dim == 2:
        V = np.array(vertices_2d(p))
        out = (D @ V.T).max(axis=1)
        out[~np.any(D, axis=1)] = 0.0
        return out
    return np.array([support(p, d) for d in D])


def box_bounds(p: HPolytope):
    """``(lower, upper)`` if ``p`` is an axis-aligned box, else ``None``."""
    n = p.dim
    lower = np.full(n, -np.inf)
    upper = np.full(n, np.inf)
    for row, b in zip(p.H, p.h):
        nz = np.flatnonzero(np.abs(row) > 1e-12)
        if nz.size != 1:
            return None
        i = nz[0]
        if row[i] > 0:
            upper[i] = min(upper[i], b / row[i])
        else:
            lower[i] = max(lower[i], b / row[i])
    if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
        return None
    if np.any(lower > upper):
        return None
    return lower, upper
