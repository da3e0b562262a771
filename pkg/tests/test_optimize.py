import math

import numpy as np
import pytest

from numindex.optimize import (Budget, InfeasibleError, OptimizationError, cube_surface_grid, golden_max,
                               maximize_constrained, maximize_on_sphere, minimize_on_sphere,
                               minimize_over_operator_sphere, sphere_grid)
from numindex.spaces import lp


def test_budget_validation():
    with pytest.raises(ValueError):
        Budget(starts=0)
    assert Budget().with_seed(4).seed == 4


def test_golden_max_vectorized():
    xb, fb = golden_max(lambda x: -(x - np.array([0.3, -1.0])) ** 2, [0.0, -2.0], [1.0, 0.0], 80)
    assert np.allclose(xb, [0.3, -1.0], atol=1e-8)
    assert np.allclose(fb, 0.0, atol=1e-14)


def test_cube_grid_counts():
    assert cube_surface_grid(3, 2).shape == (6 * 4, 3)
    assert cube_surface_grid(3, 2, half=True).shape == (3 * 4, 3)
    assert np.all(np.abs(cube_surface_grid(3, 4)).max(axis=1) == 1.0)


@pytest.mark.parametrize("S", [lp(2, 2), lp(1, 3), lp(3, 3)], ids=lambda s: s.label)
def test_sphere_grid_covers_the_sphere(S):
    pts, h = sphere_grid(S, 7)
    assert np.allclose(S.norm(pts), 1.0)
    probe = S.sample_sphere(300, seed=8)
    dist = np.array([S.norm(pts - p).min() for p in probe])
    assert dist.max() <= h + 1e-12


def test_maximize_linear_functional_on_l2_is_certified():
    S = lp(2, 2)
    f = np.array([0.6, 0.8])
    res = maximize_on_sphere(S, lambda Z: Z @ f, Budget(), lipschitz=1.0)
    assert res.value == pytest.approx(1.0, abs=1e-10)
    assert res.certified and res.upper >= 1.0
    assert np.allclose(res.argmax, f, atol=1e-5)


def test_minimize_on_sphere():
    S = lp(1, 3)
    res = minimize_on_sphere(S, lambda Z: np.abs(Z).max(axis=1), Budget())
    assert res.value == pytest.approx(1 / 3, abs=1e-6)


def test_nan_objective_is_an_error():
    with pytest.raises(OptimizationError):
        maximize_on_sphere(lp(2, 2), lambda Z: np.full(len(Z), np.nan), Budget())


def test_constrained_search_respects_constraint():
    S = lp(2, 2)
    res = maximize_constrained(S, S.dual(), lambda x, f: np.abs(x[:, 1] * f[:, 0]),
                               lambda x, f: np.sum(x * f, axis=1) - 0.9, Budget(starts=24))
    x, f = res.argmax
    assert np.sum(x * f) > 0.9
    # sin(a) cos(b) = (sin(a + b) + sin(a - b)) / 2 with cos(a - b) > 0.9
    best = (1 + math.sqrt(1 - 0.81)) / 2
    assert best - 1e-3 < res.value <= best + 1e-12
    with pytest.raises(InfeasibleError):
        maximize_constrained(S, S.dual(), lambda x, f: x[:, 0], lambda x, f: np.full(len(x), -1.0),
                             Budget())


def test_operator_sphere_search_finds_the_minimum_entry_norm():
    # minimize the (1,1) entry modulus over matrices of max-entry norm one: 0
    res = minimize_over_operator_sphere((2, 2), False, lambda M: np.abs(M[:, 0, 0]),
                                        lambda M: np.abs(M).reshape(len(M), -1).max(axis=1), Budget())
    assert res.value <= 1e-9
    assert res.certified and math.isfinite(res.gap)
