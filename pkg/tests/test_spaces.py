import math

from hypothesis import given, strategies as st
import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from numindex.spaces import (Field, NoCertifiedFace, absolute_sum, dual_of, face_sample, gamma_dual,
                             gamma_norm, lp, polyhedral, predual_weighted_max_root, weighted_max_root)

INF = math.inf

PLANES = [lp(1, 2), lp(1.5, 2), lp(2, 2), lp(3, 2), lp(INF, 2), weighted_max_root(0.3),
          predual_weighted_max_root(0.5), gamma_norm(0.25), gamma_dual(0.6),
          polyhedral([[1.0, 0.2], [0.3, 1.0], [1.0, -1.0]])]
IDS = [S.label for S in PLANES]

coords = st.floats(-10, 10, allow_nan=False)
vec2 = st.tuples(coords, coords).map(np.array)


def dense_dual_norm(S, f, n=20_000):
    """Support of the unit ball by a boundary sweep refined with a bounded scalar search.

    Independent of the closed forms: only the norm itself is evaluated.
    """
    def val(phi):
        d = np.array([np.cos(phi), np.sin(phi)])
        return abs(d @ f) / S.norm(d)

    phi = np.linspace(0, 2 * np.pi, n, endpoint=False)
    d = np.stack([np.cos(phi), np.sin(phi)], axis=1)
    v = np.abs(d @ f) / S.norm(d)
    k = int(np.argmax(v))
    h = 2 * np.pi / n
    res = minimize_scalar(lambda t: -val(t), bounds=(phi[k] - h, phi[k] + h), method="bounded",
                          options={"xatol": 1e-13})
    return max(v[k], -res.fun)


def test_lp_norm_values():
    assert lp(1, 3).norm([1, -2, 3]) == 6
    assert lp(INF, 3).norm([1, -2, 3]) == 3
    assert lp(2, 2).norm([3, 4]) == pytest.approx(5)
    assert lp(3, 2).norm([1, 1]) == pytest.approx(2 ** (1 / 3))
    assert lp(2, 2, "complex").norm([3j, 4]) == pytest.approx(5)


def test_invalid_parameters_rejected():
    with pytest.raises(ValueError):
        lp(0.5, 2)
    with pytest.raises(ValueError):
        gamma_norm(1.5)
    with pytest.raises(ValueError):
        polyhedral([[1.0, 0.0]])
    with pytest.raises(ValueError):
        lp(2, 2).norm([1, 2, 3])
    with pytest.raises(ValueError):
        lp(2, 2).norm([1, np.nan])
    with pytest.raises(ValueError):
        lp(2, 2).norm([1j, 0])


@pytest.mark.parametrize("S", PLANES, ids=IDS)
def test_dual_norm_matches_dense_support(S):
    rng = np.random.default_rng(1)
    for f in rng.standard_normal((4, 2)):
        # a sweep can only undershoot the support
        oracle = dense_dual_norm(S, f)
        assert oracle <= S.dual_norm(f) * (1 + 1e-12)
        assert S.dual_norm(f) == pytest.approx(oracle, rel=1e-7)


@pytest.mark.parametrize("r", [0.0, 0.2, 0.5, 0.9, 1.0])
def test_weighted_max_root_predual_closed_form(r):
    Z = predual_weighted_max_root(r)
    W = weighted_max_root(r)
    rng = np.random.default_rng(2)
    for z in rng.standard_normal((5, 2)):
        assert Z.norm(z) == pytest.approx(dense_dual_norm(W, z), rel=1e-7)


def test_endpoint_planes():
    z = np.array([0.3, -0.8])
    assert predual_weighted_max_root(0.0).norm(z) == pytest.approx(1.1)
    assert predual_weighted_max_root(1.0).norm(z) == pytest.approx(np.hypot(*z))


@pytest.mark.parametrize("S", PLANES, ids=IDS)
def test_bidual_is_the_space(S):
    assert S.dual().dual() is S


@pytest.mark.parametrize("S", PLANES, ids=IDS)
@given(x=vec2, y=vec2, t=st.floats(-5, 5, allow_nan=False))
def test_norm_axioms(S, x, y, t):
    nx, ny = S.norm(x), S.norm(y)
    assert S.norm(x + y) <= nx + ny + 1e-9 * (1 + nx + ny)
    assert S.norm(t * x) == pytest.approx(abs(t) * nx, rel=1e-9, abs=1e-12)
    assert nx >= 0


@pytest.mark.parametrize("S", PLANES, ids=IDS)
@given(x=vec2, f=vec2)
def test_pairing_bounded_by_norms(S, x, f):
    assert abs(S.pair(f, x)) <= S.dual_norm(f) * S.norm(x) * (1 + 1e-9) + 1e-12


@pytest.mark.parametrize("S", PLANES, ids=IDS)
@given(x=vec2)
def test_face_elements_norm_the_point(S, x):
    if S.norm(x) < 1e-6:
        return
    u = x / S.norm(x)
    F = S.face(u)
    assert np.allclose(S.dual_norm(F), 1.0, atol=1e-9)
    assert np.allclose(F @ u, 1.0, atol=1e-8)


def test_faces_of_square_corner_and_edge():
    S = lp(INF, 2)
    F = S.face([1.0, 1.0])
    assert sorted(map(tuple, F)) == [(0.0, 1.0), (1.0, 0.0)]
    assert np.allclose(S.face([1.0, 0.2]), [[1.0, 0.0]])


def test_face_of_l1_vertex_is_an_edge_of_the_square():
    F = lp(1, 2).face([0.0, -1.0])
    assert sorted(map(tuple, F)) == [(-1.0, -1.0), (1.0, -1.0)]


def test_complex_face_carries_the_phase():
    S = lp(2, 2, "complex")
    u = np.array([1j, 0]) / 1.0
    F = S.face(u)
    assert np.allclose(F @ u, 1.0)


def test_face_sample_stays_on_face():
    S = lp(INF, 2)
    rows = face_sample(S, [1.0, 1.0], 0.0, count=6, seed=3)
    assert len(rows) == 6
    assert np.allclose(rows @ [1.0, 1.0], 1.0)
    assert np.allclose(S.dual_norm(rows), 1.0)
    relaxed = face_sample(S, [1.0, 1.0], 0.1, count=6, seed=3)
    assert np.all(relaxed @ [1.0, 1.0] > 0.9)
    with pytest.raises(ValueError):
        face_sample(S, [2.0, 0.0])


def test_extreme_points():
    assert len(lp(1, 3).extreme_points()) == 6
    assert len(lp(INF, 3).extreme_points()) == 8
    assert len(gamma_norm(0.5).extreme_points()) == 6
    assert len(gamma_norm(0.0).extreme_points()) == 4
    assert lp(2, 2).extreme_points() is None
    V = polyhedral([[1, 0], [0, 1], [1, 1]]).extreme_points()
    assert len(V) == 6 and np.allclose(np.abs(V @ np.array([[1, 0], [0, 1], [1, 1]]).T).max(axis=1), 1)


def test_gamma_pair_is_dual():
    g = 0.4
    assert gamma_norm(g).dual().family == gamma_dual(g).family
    rng = np.random.default_rng(4)
    for f in rng.standard_normal((4, 2)):
        assert gamma_dual(g).norm(f) == pytest.approx(dense_dual_norm(gamma_norm(g), f), rel=1e-7)


def test_absolute_sums():
    S = absolute_sum([lp(2, 2), lp(2, 1)], "linf")
    assert S.dim == 3
    assert S.norm([3, 4, 2]) == pytest.approx(5)
    T = absolute_sum([lp(2, 2), lp(2, 1)], "l1")
    assert T.norm([3, 4, -2]) == pytest.approx(7)
    # the dual of an l1 sum is the linf sum of the duals
    assert T.dual_norm([3, 4, -2]) == pytest.approx(5)
    assert len(absolute_sum([lp(INF, 2), lp(2, 1)], "linf").extreme_points()) == 8
    assert len(absolute_sum([lp(1, 2), lp(2, 1)], "l1").extreme_points()) == 6


def test_boundary_contains_corners():
    ang, P = lp(1, 2).boundary(64)
    assert np.allclose(lp(1, 2).norm(P), 1)
    assert any(np.allclose(p, [0.0, 1.0]) for p in P)
    with pytest.raises(ValueError):
        lp(2, 3).boundary(8)


def test_sample_sphere_is_prefix_consistent():
    S = lp(3, 3)
    a, b = S.sample_sphere(10, seed=5), S.sample_sphere(20, seed=5)
    assert np.allclose(a, b[:10])
    assert np.allclose(S.norm(b), 1)
    head = lp(INF, 2).sample_sphere(6, 0)
    assert np.allclose(head[:4], lp(INF, 2).extreme_points())


def test_complex_real_view_round_trip():
    S = lp(2, 2, Field.COMPLEX)
    z = np.array([1 + 2j, -0.5j])
    assert np.allclose(S.from_real(S.to_real(z)), z)
    assert S.real_dim == 4
    assert np.allclose(S.vectors(S.to_real(z)), z)


def test_generic_dual_face_is_certified():
    D = dual_of(lp(3, 2))
    u = np.array([0.6, 0.8])
    u = u / D.norm(u)
    F = D.face(u)
    assert np.allclose(F @ u, 1.0, atol=1e-8)
    assert isinstance(NoCertifiedFace("x"), RuntimeError)
