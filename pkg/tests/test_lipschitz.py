import csv
import math

from hypothesis import given, settings, strategies as st
import numpy as np
import pytest

from numindex.constructions import QUARTER_TURN
from numindex.lipschitz import (LipschitzMap, abs_map, lip_radius_lower, lip_range_sample, linear_map,
                                piecewise_map, radial_map, slope_value)
from numindex.numrange import v_radius
from numindex.operators import identity
from numindex.spaces import lp

INF = math.inf


@pytest.mark.parametrize("p", [1.5, 3.0])
def test_quarter_turn_slopes_reach_the_linear_radius(p):
    S = lp(p, 2)
    F = linear_map(S, QUARTER_TURN)
    lower = lip_radius_lower(F, 10_000, seed=0)
    linear = v_radius(identity(S), QUARTER_TURN).upper
    assert abs(lower - linear) <= 5e-2
    # each point is a genuine slope so the lower bound cannot overshoot much
    assert lower <= linear + 1e-6


def test_rotation_on_euclidean_plane_has_zero_slopes():
    F = linear_map(lp(2, 2), QUARTER_TURN)
    cloud = lip_range_sample(F, 500, seed=1)
    assert cloud.hull_radius <= 1e-12


def test_identity_and_modulus_slopes():
    S = lp(INF, 2)
    assert lip_radius_lower(linear_map(S, np.eye(2)), 200) == pytest.approx(1.0, abs=1e-9)
    assert lip_radius_lower(abs_map(S), 2000) == pytest.approx(1.0, abs=1e-6)


def test_radial_map_slopes_are_nonnegative():
    cloud = lip_range_sample(radial_map(lp(2, 2)), 1000, seed=2)
    # on a Euclidean space xi*(F x - F y) = <x|x| - y|y|, x - y> / |x - y| >= 0
    assert cloud.points.real.min() >= -1e-12
    assert np.all(np.abs(cloud.points.imag) < 1e-15)


def test_offset_is_removed():
    F = LipschitzMap(lp(2, 2), lambda X: X + 3.0)
    assert np.allclose(F(np.zeros(2)), 0.0)
    assert np.allclose(F([1.0, 2.0]), [[1.0, 2.0]])


def test_points_are_reproducible_from_triples(tmp_path):
    F = piecewise_map(lp(3, 2), [("affine", [[1.0, 2.0], [0.5, -1.0]], [0.2, 0.0]), ("abs",)])
    cloud = lip_range_sample(F, 300, seed=5)
    for p, (x, y, xi) in zip(cloud.points, cloud.samples):
        assert slope_value(F, x, y, xi) == pytest.approx(p, abs=1e-12)
        assert lp(3, 2).dual_norm(xi) == pytest.approx(1.0, abs=1e-9)
    path = tmp_path / "lip.csv"
    cloud.to_csv(str(path))
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["re", "im", "x0", "x1", "y0", "y1", "xi0", "xi1"]
    assert len(rows) == len(cloud.points) + 1


def test_pairs_do_not_depend_on_the_map():
    S = lp(1.5, 2)
    a = lip_range_sample(linear_map(S, np.eye(2)), 50, seed=9)
    b = lip_range_sample(abs_map(S), 50, seed=9)
    for (xa, ya, _), (xb, yb, _) in zip(a.samples, b.samples):
        assert np.array_equal(xa, xb) and np.array_equal(ya, yb)


@settings(max_examples=15)
@given(t=st.floats(-5, 5, allow_nan=False).filter(lambda t: abs(t) > 1e-3))
def test_slopes_scale_with_the_map(t):
    F = piecewise_map(lp(3, 2), [("affine", [[0.4, 1.0], [-0.3, 0.8]]), ("abs",)])
    a = lip_range_sample(F, 100, seed=4)
    b = lip_range_sample(F.scaled(t), 100, seed=4)
    # the face choices draw from the same generator so the triples coincide
    assert np.allclose(b.points, t * a.points, atol=1e-12)
    assert b.hull_radius == pytest.approx(abs(t) * a.hull_radius, rel=1e-12, abs=1e-15)


def test_slope_hint_flags_violations(caplog):
    S = lp(2, 2)
    honest = linear_map(S, [[2.0, 0.0], [0.0, 1.0]])
    lip_range_sample(honest, 300)
    assert honest.violations == 0
    liar = LipschitzMap(S, lambda X: 2.0 * X, lip_bound_hint=1.0, label="liar")
    with caplog.at_level("WARNING"):
        lip_range_sample(liar, 300)
    assert liar.violations > 0
    assert "liar" in caplog.text


def test_invalid_inputs():
    S = lp(2, 2)
    with pytest.raises(ValueError):
        linear_map(S, np.eye(3))
    with pytest.raises(ValueError):
        abs_map(lp(2, 2, "complex"))
    with pytest.raises(ValueError):
        piecewise_map(S, [("rotate",)])
    with pytest.raises(ValueError):
        lip_range_sample(linear_map(S, np.eye(2)), 0)
    with pytest.raises(ValueError):
        LipschitzMap(S, lambda X: X, lip_bound_hint=-1.0)
