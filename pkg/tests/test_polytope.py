from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from almpc.errors import EmptyPolytopeError, ShapeError, UnboundedDirectionError
from almpc.polytope import (HPolytope, area_2d, box_bounds, contains, convex_hull_2d,
                            intersect, is_bounded, is_empty, is_subset, linear_map_2d,
                            minkowski_sum_2d, reduce, support, support_many, vertices_2d)

from conftest import THETA0, W, same_set

UNIT = HPolytope.box([-1, -1], [1, 1])


def test_rows_are_normalized_and_frozen():
    p = HPolytope([[3.0, 4.0]], [10.0])
    np.testing.assert_allclose(p.H, [[0.6, 0.8]])
    np.testing.assert_allclose(p.h, [2.0])
    with pytest.raises(ValueError):
        p.H[0, 0] = 1.0
    with pytest.raises(ShapeError):
        HPolytope([[0.0, 0.0]], [1.0])
    with pytest.raises(ShapeError):
        HPolytope([[1.0, 0.0]], [1.0, 2.0])


def test_support_examples():
    assert support(THETA0, [0, 0]) == 0.0
    assert support(THETA0, [1, 1]) == pytest.approx(0.3)
    assert support(W, [1, -2]) == pytest.approx(2.4)


def test_support_errors():
    with pytest.raises(EmptyPolytopeError):
        support(HPolytope([[1.0], [-1.0]], [0.0, -1.0]), [1.0])
    with pytest.raises(UnboundedDirectionError):
        support(HPolytope([[1.0, 0.0]], [1.0]), [0.0, 1.0])
    with pytest.raises(ShapeError):
        support(UNIT, [1.0, 0.0, 0.0])


def test_intersections():
    assert same_set(intersect(THETA0, THETA0), THETA0)
    lo, hi = box_bounds(reduce(intersect(HPolytope.box([-1], [1]), HPolytope.box([0], [2]))))
    np.testing.assert_allclose([lo[0], hi[0]], [0.0, 1.0])
    cut = intersect(THETA0, HPolytope([[1.0, 0.0]], [0.05]))
    assert same_set(cut, HPolytope.box([-0.2, -0.1], [0.05, 0.1]))
    with pytest.raises(ShapeError):
        intersect(UNIT, HPolytope.box([0], [1]))


def test_reduce():
    dup = HPolytope(np.vstack([UNIT.H, UNIT.H[:1]]), np.concatenate([UNIT.h, UNIT.h[:1]]))
    assert reduce(dup).n_rows == 4
    assert reduce(intersect(UNIT, HPolytope([[1.0, 0.0]], [5.0]))).n_rows == 4
    with pytest.raises(EmptyPolytopeError):
        reduce(intersect(UNIT, HPolytope([[1.0, 0.0]], [-2.0])))


def test_membership_and_subsets():
    assert contains(UNIT, [0, 0])
    assert not contains(UNIT, [1.1, 0])
    assert contains(UNIT, [1 + 1e-9, 0])
    assert is_subset(THETA0, THETA0)
    assert is_subset(HPolytope.box([0], [1]), HPolytope.box([-1], [2]))
    assert not is_subset(THETA0, HPolytope([[1.0, 0.0]], [0.1]))


def test_emptiness_and_boundedness():
    assert not is_empty(UNIT)
    assert is_empty(intersect(UNIT, HPolytope([[1.0, 0.0]], [-2.0])))
    assert is_bounded(UNIT)
    assert not is_bounded(HPolytope([[1.0, 0.0], [0.0, 1.0]], [1.0, 1.0]))


def test_unit_box_vertices_ccw():
    V = np.array(vertices_2d(UNIT))
    assert V.shape == (4, 2)
    np.testing.assert_allclose(np.abs(V), 1.0)
    for i in range(4):
        u, v = V[(i + 1) % 4] - V[i], V[(i + 2) % 4] - V[(i + 1) % 4]
        assert u[0] * v[1] - u[1] * v[0] > 0


def test_minkowski_examples():
    zero = HPolytope.box([0, 0], [0, 0])
    assert same_set(minkowski_sum_2d(THETA0, zero), THETA0)
    r1, r2 = np.array([1.0, 2.0]), np.array([3.0, 4.0])
    s = minkowski_sum_2d(HPolytope.box(-r1, r1), HPolytope.box(-r2, r2))
    assert same_set(s, HPolytope.box(-(r1 + r2), r1 + r2))
    assert same_set(minkowski_sum_2d(W, THETA0), HPolytope.box([-1.0, -0.9], [1.0, 0.9]))


def test_degenerate_hulls():
    pt = HPolytope.from_vertices_2d([[1.0, 2.0]] * 3)
    assert contains(pt, [1.0, 2.0]) and not contains(pt, [1.0, 2.1])
    seg = HPolytope.from_vertices_2d([[0.0, 0.0], [1.0, 1.0], [0.5, 0.5]])
    assert contains(seg, [0.25, 0.25]) and not contains(seg, [0.25, 0.3])
    assert area_2d(seg) == 0.0


def test_linear_map_and_area():
    M = np.array([[2.0, 0.0], [0.0, 3.0]])
    img = linear_map_2d(M, UNIT)
    assert area_2d(img) == pytest.approx(24.0)
    assert same_set(img, HPolytope.box([-2, -3], [2, 3]))


def test_box_bounds():
    lo, hi = box_bounds(THETA0)
    np.testing.assert_allclose(lo, [-0.2, -0.1])
    np.testing.assert_allclose(hi, [0.2, 0.1])
    assert box_bounds(HPolytope([[1.0, 1.0]], [1.0])) is None


points = st.lists(st.tuples(st.floats(-5, 5), st.floats(-5, 5)), min_size=3, max_size=12)


@settings(max_examples=40, deadline=None)
@given(points)
def test_hull_roundtrip_contains_points(pts):
    pts = np.array(pts)
    hull = convex_hull_2d(pts)
    if len(hull) < 3:
        return
    p = HPolytope.from_vertices_2d(pts)
    for q in pts:
        assert contains(p, q, tol=1e-7)
    V = np.array(vertices_2d(p))
    # every computed vertex is one of the input points
    for v in V:
        assert np.min(np.linalg.norm(pts - v, axis=1)) < 1e-6


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 3), st.floats(0.01, 3), st.floats(0.01, 3), st.floats(0.01, 3),
       st.floats(-np.pi, np.pi))
def test_minkowski_support_is_additive(a, b, c, d, ang):
    p, q = HPolytope.box([-a, -b], [a, b]), HPolytope.box([-c, -d], [c, d])
    direction = np.array([np.cos(ang), np.sin(ang)])
    s = minkowski_sum_2d(p, q)
    assert support(s, direction) == pytest.approx(support(p, direction) + support(q, direction),
                                                  abs=1e-8)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=2, max_size=2), st.floats(-0.5, 2))
def test_intersection_is_subset_of_both(n, b):
    if np.linalg.norm(n) < 1e-3:
        return
    cut = HPolytope([n], [b])
    p = intersect(UNIT, cut)
    if is_empty(p):
        return
    assert is_subset(p, UNIT)
    assert is_subset(p, cut)


def test_support_many_matches_lp():
    rng = np.random.default_rng(0)
    p = HPolytope.from_vertices_2d(rng.normal(size=(9, 2)))
    D = rng.normal(size=(20, 2))
    np.testing.assert_allclose(support_many(p, D), [support(p, d) for d in D], atol=1e-9)
    cube = HPolytope.box(-np.ones(3), np.ones(3))
    np.testing.assert_allclose(support_many(cube, [[1, -1, 2]]), [4.0])
