import csv
import math

from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays
import numpy as np
import pytest

from numindex.constructions import QUARTER_TURN, ellp_rotation_radius, rotation
from numindex.operators import Operator, compose, identity, op_norm, rank_one
from numindex.numrange import (aligned_pair_lower, derivative_values, null_direction_search, range_cloud,
                               spear_probe, v_delta, v_radius, v_radius_derivative, v_radius_spatial)
from numindex.spaces import lp

INF = math.inf
L2, LINF, L3 = lp(2, 2), lp(INF, 2), lp(3, 2)
mat2 = arrays(np.float64, (2, 2), elements=st.floats(-2, 2, allow_nan=False))


def rotation_radius_oracle(p: float, n: int = 2_000_000) -> float:
    """``max |y*(A x)|`` over a sweep of unit ``x`` in ``l_p`` with ``y*`` its duality map.

    Built from the definition of the radius, not from the closed form.
    """
    phi = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
    x = np.stack([np.cos(phi), np.sin(phi)], axis=1)
    x /= (np.abs(x) ** p).sum(axis=1, keepdims=True) ** (1 / p)
    y = np.sign(x) * np.abs(x) ** (p - 1)
    Ax = x @ QUARTER_TURN.T
    return float(np.abs((y * Ax).sum(axis=1)).max())


def test_rotation_radius_constant_matches_independent_grid():
    for p in (1.5, 3.0):
        assert ellp_rotation_radius(p) == pytest.approx(rotation_radius_oracle(p), abs=1e-9)
    # frozen value: the two exponents are conjugate and give the same constant
    assert rotation_radius_oracle(1.5) == pytest.approx(0.2270833462, abs=1e-9)
    assert rotation_radius_oracle(3.0) == pytest.approx(0.2270833462, abs=1e-9)


def test_v_delta_identity_is_one():
    G = identity(L2)
    for d in (1e-1, 1e-3):
        val, (x, y) = v_delta(G, G, d)
        assert val == pytest.approx(1.0, abs=1e-9)
        assert np.real(y @ x) > 1 - d


def test_v_delta_rotation_is_small():
    val, _ = v_delta(identity(L2), QUARTER_TURN, 1e-4)
    # a pair with y*(x) > 1 - d has |y*(Jx)| at most sqrt(2 d - d^2)
    assert val <= 0.02
    # a rotation by a smaller angle keeps its cosine in the range
    val, _ = v_delta(identity(L2), rotation(0.7), 1e-4)
    assert val == pytest.approx(math.cos(0.7), abs=0.02)


def test_v_delta_rejects_nonpositive_delta():
    with pytest.raises(ValueError):
        v_delta(identity(L2), QUARTER_TURN, 0.0)


def test_quarter_turn_on_l3_tends_to_the_constant():
    est = v_radius_spatial(identity(L3), QUARTER_TURN)
    assert est.upper == pytest.approx(0.2270833462, abs=1e-3)


def test_derivative_of_g_along_itself_is_one():
    G = rank_one([1.0, 1.0], [1.0, 1.0], lp(1, 2), LINF)
    est = v_radius_derivative(G, G)
    assert est.upper == pytest.approx(1.0, abs=1e-9)
    assert est.lower == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("seed", range(4))
def test_identity_on_square_has_radius_one_for_unit_t(seed):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((2, 2))
    M = M / op_norm(Operator(LINF, LINF, M)).lower
    est = v_radius_derivative(identity(LINF), M)
    assert est.upper >= 1.0 - 1e-9
    assert est.upper == pytest.approx(1.0, abs=1e-3)


def test_rotation_on_l2_has_small_derivative_bound():
    est = v_radius_derivative(identity(L2), QUARTER_TURN)
    assert est.upper <= 1e-3
    # closed form at a single step: (sqrt(1 + a^2) - 1) / a
    g = derivative_values(identity(L2), QUARTER_TURN[None], alphas=(1e-3,))[0, 0]
    assert g == pytest.approx((math.sqrt(1 + 1e-6) - 1) / 1e-3, abs=1e-9)


def test_aligned_pairs_on_square_reach_diagonal_sign_flip():
    val, (x, y) = aligned_pair_lower(identity(LINF), np.diag([1.0, -1.0]))
    assert val == pytest.approx(1.0)
    assert np.real(y @ x) == pytest.approx(1.0, abs=1e-8)


def test_witness_pair_certifies_lower_end():
    G = identity(L3)
    est = v_radius(G, QUARTER_TURN)
    x, y = est.witness_pair
    assert L3.norm(x) == pytest.approx(1.0, abs=1e-8)
    assert np.real(y @ x) == pytest.approx(1.0, abs=1e-8)
    assert abs(y @ QUARTER_TURN @ x) >= est.lower - 1e-12


def test_combined_radius_values():
    assert v_radius(identity(L2), QUARTER_TURN).value.contains(0.0, 1e-12)
    assert v_radius(identity(L2), QUARTER_TURN).upper <= 1e-3
    est = v_radius(identity(lp(1.5, 2)), QUARTER_TURN)
    assert est.value.contains(0.2270833462, 1e-3)


def test_range_cloud_identity_on_l2():
    G = identity(L2)
    cloud = range_cloud(G, G, delta=0.05, samples=200, seed=3)
    assert len(cloud.points) > 0
    assert np.all(np.abs(cloud.points.imag) < 1e-12)
    assert np.all(cloud.points.real >= 1 - 0.05 - 1e-9)
    assert np.all(cloud.points.real <= 1 + 1e-12)
    assert cloud.hull_radius == pytest.approx(np.abs(cloud.points).max())


def test_range_cloud_complex_multiplication_by_i():
    C = lp(2, 2, "complex")
    cloud = range_cloud(identity(C), 1j * np.eye(2), delta=1e-3, samples=100, seed=1)
    # y*(i x) = i y*(x) and y*(x) is within 1e-3 of one
    assert np.all(np.abs(cloud.points - 1j) <= 0.1)


def test_range_cloud_diagonal_projection_on_square():
    d = 1e-3
    cloud = range_cloud(identity(LINF), np.diag([1.0, 0.0]), delta=d, samples=400, seed=2)
    pts = cloud.points
    assert np.all(np.abs(pts.imag) < 1e-12)
    assert pts.real.min() >= -2 * d - 1e-9 and pts.real.max() <= 1 + 1e-9
    assert np.any(np.abs(pts) < 0.05) and np.any(np.abs(pts - 1) < 0.05)


def test_range_cloud_points_are_recomputable(tmp_path):
    G = identity(L3)
    cloud = range_cloud(G, QUARTER_TURN, delta=1e-2, samples=50, seed=4)
    for p, (x, y) in zip(cloud.points, cloud.samples):
        assert p == pytest.approx(y @ QUARTER_TURN @ x, abs=1e-12)
        assert np.real(y @ x) > 1 - 1e-2
    path = tmp_path / "cloud.csv"
    cloud.to_csv(str(path))
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["re", "im", "x0", "x1", "ystar0", "ystar1"]
    assert len(rows) == len(cloud.points) + 1
    first = np.array(rows[1], dtype=float)
    assert first[0] == pytest.approx(cloud.points[0].real, rel=1e-11, abs=1e-15)


def test_range_cloud_hull_bounded_by_relaxed_radius():
    G = identity(L2)
    d = 1e-3
    cloud = range_cloud(G, QUARTER_TURN, delta=d, samples=200, seed=0)
    assert cloud.hull_radius <= math.sqrt(2 * d - d * d) + 1e-9


def test_spear_probe_verdicts():
    G = rank_one([1.0, 1.0], [1.0, 1.0], lp(1, 2), LINF)
    assert not spear_probe(G).refuted
    res = spear_probe(identity(L2))
    assert res.refuted and res.deficit < -1e-4
    assert not spear_probe(identity(LINF)).refuted


def test_null_direction_search_verdicts():
    T = null_direction_search(identity(L2))
    assert T is not None
    assert v_radius(identity(L2), T).upper < 1e-3
    assert op_norm(Operator(L2, L2, T)).lower > 0.5
    assert null_direction_search(identity(LINF)) is None
    # a smooth point of the dual sphere on the domain side
    f = np.array([0.6, 0.8])
    G = rank_one(f, [1.0, 1.0], L2, LINF)
    T = null_direction_search(G)
    assert T is not None and v_radius(G, T).upper < 1e-3


# ---------------------------------------------------------------- properties

@given(A=mat2, B=mat2)
def test_radius_is_a_seminorm(A, B):
    G = identity(L3)
    a, b, s = v_radius(G, A), v_radius(G, B), v_radius(G, A + B)
    slack = 3 * (a.value.width + b.value.width + s.value.width)
    assert s.upper <= a.upper + b.upper + slack + 1e-9


@given(A=mat2, t=st.floats(-4, 4, allow_nan=False).filter(lambda t: abs(t) > 1e-3))
def test_radius_scales_by_modulus(A, t):
    G = identity(lp(1.5, 2))
    a, b = v_radius(G, A), v_radius(G, t * A)
    assert b.upper == pytest.approx(abs(t) * a.upper, rel=1e-6, abs=1e-9)
    assert b.lower == pytest.approx(abs(t) * a.lower, rel=1e-6, abs=1e-9)


@given(A=mat2)
def test_radius_bounded_by_operator_norm(A):
    for S in (L3, LINF):
        assert v_radius(identity(S), A).upper <= op_norm(Operator(S, S, A)).upper + 1e-6


@settings(max_examples=10)
@given(A=mat2)
def test_relaxed_radius_is_monotone_in_delta(A):
    G = identity(L3)
    est = v_radius_spatial(G, A, deltas=(1e-4, 1e-3, 1e-2, 1e-1))
    vals = est.extras["values"]
    assert np.all(np.diff(vals) >= -1e-12)
    # each relaxed value is attained by a feasible pair, so it is at least the exact-pair value
    assert vals[0] >= est.lower - 1e-9


@given(A=mat2)
def test_derivative_quotient_is_monotone_in_step(A):
    G = identity(L3)
    alphas = tuple(10.0 ** -k for k in range(1, 7))
    for T in (A, -A):
        g = derivative_values(G, T[None], alphas=alphas)[0]
        # steps decrease along the schedule so the quotients must not increase,
        # up to the rounding allowance eps * norms / step that each quotient carries
        allowance = 64 * np.finfo(float).eps * (2 + np.abs(A).sum()) / np.array(alphas[1:])
        assert np.all(np.diff(g) <= allowance + 1e-12)


@given(A=mat2)
def test_composition_bounds(A):
    G = Operator(L3, lp(1.5, 2), np.array([[0.8, 0.3], [-0.2, 0.9]]))
    G = Operator(G.domain, G.codomain, G.matrix / op_norm(G).lower)
    T_dom = Operator(L3, L3, A)
    T_cod = Operator(lp(1.5, 2), lp(1.5, 2), A)
    assert v_radius(G, compose(G, T_dom)).upper <= v_radius(identity(L3), A).upper + 1e-6
    assert v_radius(G, compose(T_cod, G)).upper <= v_radius(identity(lp(1.5, 2)), A).upper + 1e-6


@settings(max_examples=15)
@given(A=mat2)
def test_lower_never_exceeds_upper(A):
    for G in (identity(L3), identity(LINF), rank_one([1.0, 1.0], [1.0, 1.0], lp(1, 2), LINF)):
        est = v_radius(G, A)
        assert est.lower <= est.upper + 1e-6
