import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quanthelly import (AffineMap, Ellipsoid, HalfSpace, HPolytope,
                        ellipsoid_height, ellipsoid_in_polytope,
                        ellipsoid_volume, has_interior, intersect, is_bounded,
                        min_semiaxis, support_value, transform_ellipsoid,
                        transform_polytope, unit_ball_volume)
from quanthelly.errors import DegenerateInput, DimensionMismatch
from quanthelly.geometry import chebyshev_center, intersect_all, polytope_slacks

from _oracles import sample_ellipsoid_points, support_oracle

from conftest import bounded_random_polytope


# ---------------------------------------------------------------------------
# Half-spaces and polytopes


def test_halfspace_normalizes_to_unit_normal():
    h = HalfSpace(np.array([3.0, 4.0]), 10.0)
    assert np.allclose(h.normal, [0.6, 0.8])
    assert math.isclose(h.offset, 2.0)


def test_halfspace_rejects_zero_normal():
    with pytest.raises(DegenerateInput):
        HalfSpace(np.zeros(2), 1.0)


def test_already_unit_normal_is_preserved_exactly():
    a = np.array([1.0, 0.0])
    h = HalfSpace(a, 0.5)
    assert h.normal[0] == 1.0 and h.normal[1] == 0.0
    assert h.offset == 0.5


def test_box_contains_points():
    P = HPolytope.box([1.0, 2.0])
    inside = np.array([[0.0, 0.0], [0.99, -1.99]])
    outside = np.array([[1.01, 0.0], [0.0, -2.5]])
    assert np.all(P.contains_points(inside))
    assert not np.any(P.contains_points(outside))


def test_polytope_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        HPolytope(3, (HalfSpace(np.array([1.0, 0.0]), 1.0),))


def test_polytope_slacks_signs():
    P = HPolytope.box([1.0, 1.0])
    s = polytope_slacks(Ellipsoid.ball(np.zeros(2), 0.5), P)
    assert np.allclose(s, 0.5)
    s = polytope_slacks(Ellipsoid.ball(np.array([2.0, 0.0]), 0.5), P)
    assert s.min() == pytest.approx(-1.5)


# ---------------------------------------------------------------------------
# Ellipsoids


def test_ellipsoid_requires_spd_shape():
    with pytest.raises(DegenerateInput):
        Ellipsoid(np.array([[1.0, 0.0], [0.0, -1.0]]), np.zeros(2))
    with pytest.raises(DegenerateInput):
        Ellipsoid(np.array([[1.0, 0.5], [0.0, 1.0]]), np.zeros(2))


def test_unit_ball_volume_values():
    assert unit_ball_volume(1) == pytest.approx(2.0)
    assert unit_ball_volume(2) == pytest.approx(math.pi)
    assert unit_ball_volume(3) == pytest.approx(4.0 * math.pi / 3.0)
    assert unit_ball_volume(4) == pytest.approx(math.pi ** 2 / 2.0)


def test_ellipsoid_volume_det_formula():
    B = np.array([[2.0, 0.0], [0.0, 0.5]])
    E = Ellipsoid(B, np.zeros(2))
    assert ellipsoid_volume(E) == pytest.approx(math.pi)


def test_ellipsoid_height_and_min_semiaxis():
    E = Ellipsoid(np.diag([2.0, 0.5]), np.array([0.0, -1.5]))
    assert ellipsoid_height(E) == pytest.approx(-1.0)
    assert min_semiaxis(E) == pytest.approx(0.5)


def test_support_value_matches_sampling(rng):
    B = np.array([[1.5, 0.3], [0.3, 0.7]])
    E = Ellipsoid(B, np.array([0.2, -0.1]))
    for _ in range(5):
        u = rng.normal(size=2)
        u /= np.linalg.norm(u)
        exact = support_value(E, u)
        sampled = support_oracle(rng, B, E.center, u)
        assert sampled <= exact + 1e-12
        assert exact - sampled <= 1e-3


def test_ellipsoid_in_polytope_fixture(rng):
    P = HPolytope.box([1.0, 1.0])
    assert ellipsoid_in_polytope(Ellipsoid.unit_ball(2), P)
    assert not ellipsoid_in_polytope(Ellipsoid.ball(np.array([0.5, 0.0]), 0.7), P)


# ---------------------------------------------------------------------------
# Affine maps and transforms


def test_affine_map_inverse_compose(rng):
    L = rng.normal(size=(3, 3)) + 3.0 * np.eye(3)
    T = AffineMap(L, rng.normal(size=3))
    x = rng.normal(size=3)
    assert np.allclose(T.inverse()(T(x)), x, atol=1e-10)
    S = T.compose(T.inverse())
    assert np.allclose(S(x), x, atol=1e-9)


def test_transform_ellipsoid_matches_pointwise(rng):
    E = Ellipsoid(np.array([[1.2, 0.4], [0.4, 0.9]]), np.array([0.3, -0.2]))
    L = rng.normal(size=(2, 2)) + 2.0 * np.eye(2)
    T = AffineMap(L, np.array([1.0, -1.0]))
    TE = transform_ellipsoid(T, E)
    pts = sample_ellipsoid_points(rng, E.shape, E.center, 500, surface=True)
    img = pts @ L.T + T.shift
    u = np.linalg.solve(TE.shape, (img - TE.center).T)
    assert np.allclose(np.linalg.norm(u, axis=0), 1.0, atol=1e-9)


def test_transform_polytope_preserves_membership(rng):
    P = bounded_random_polytope(rng, 2)
    L = rng.normal(size=(2, 2)) + 2.0 * np.eye(2)
    T = AffineMap(L, rng.normal(size=2))
    TP = transform_polytope(T, P)
    pts = rng.uniform(-2.0, 2.0, size=(300, 2))
    assert np.array_equal(P.contains_points(pts),
                          TP.contains_points(pts @ L.T + T.shift))


def test_transform_volume_scaling(rng):
    E = Ellipsoid.unit_ball(2)
    L = rng.normal(size=(2, 2)) + 2.0 * np.eye(2)
    T = AffineMap(L, np.zeros(2))
    assert ellipsoid_volume(transform_ellipsoid(T, E)) == pytest.approx(
        abs(np.linalg.det(L)) * math.pi, rel=1e-10)


# ---------------------------------------------------------------------------
# Intersection, boundedness, interior


def test_intersect_concatenates_and_tags_provenance():
    P = HPolytope.box([1.0, 1.0], provenance=(("p", 0),) * 4)
    Q = HPolytope.box([2.0, 0.5], provenance=(("q", 1),) * 4)
    R = intersect(P, Q)
    assert R.n_constraints == 8
    assert R.provenance[:4] == (("p", 0),) * 4
    assert R.provenance[4:] == (("q", 1),) * 4
    R3 = intersect_all([P, Q, P])
    assert R3.n_constraints == 12


def test_is_bounded():
    assert is_bounded(HPolytope.box([1.0, 1.0]))
    half = HPolytope.from_arrays(np.array([[1.0, 0.0]]), np.array([1.0]))
    assert not is_bounded(half)


def test_chebyshev_center_of_box():
    c, r = chebyshev_center(HPolytope.box([2.0, 1.0]))
    assert np.allclose(c[1], 0.0, atol=1e-9)
    assert r == pytest.approx(1.0, abs=1e-9)


def test_has_interior_detects_degenerate_slab():
    A = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
    b = np.array([1.0, -1.0, 1.0, 1.0])  # x == 1 slab
    P = HPolytope.from_arrays(A, b)
    assert not has_interior(P)
    assert has_interior(HPolytope.box([1.0, 1.0]))


# ---------------------------------------------------------------------------
# Property tests


@given(st.integers(2, 5), st.integers(0, 10 ** 6))
def test_random_ellipsoid_volume_consistency(d, seed):
    rng = np.random.default_rng(seed)
    M = rng.normal(size=(d, d))
    B = M @ M.T + np.eye(d)
    E = Ellipsoid(B, rng.normal(size=d))
    assert ellipsoid_volume(E) == pytest.approx(
        unit_ball_volume(d) * np.linalg.det(B), rel=1e-10)


@given(st.integers(0, 10 ** 6))
def test_halfspace_canonicalization_idempotent(seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=3)
    if np.linalg.norm(a) < 1e-6:
        return
    h = HalfSpace(a, float(rng.normal()))
    h2 = HalfSpace(h.normal.copy(), h.offset)
    assert np.array_equal(h.normal, h2.normal)
    assert h.offset == h2.offset


@given(st.integers(0, 10 ** 6))
def test_boundary_points_lie_on_boundary(seed):
    rng = np.random.default_rng(seed)
    M = rng.normal(size=(2, 2))
    E = Ellipsoid(M @ M.T + np.eye(2), rng.normal(size=2))
    theta = np.linspace(0.0, 2.0 * np.pi, 64, endpoint=False)
    dirs = np.column_stack([np.cos(theta), np.sin(theta)])
    pts = E.boundary_points(dirs)
    u = np.linalg.solve(E.shape, (pts - E.center).T)
    assert np.allclose(np.linalg.norm(u, axis=0), 1.0, atol=1e-9)
