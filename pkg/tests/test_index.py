import math

import numpy as np
import pytest

from numindex.constructions import gamma_extension, gamma_swap, random_polygon_operator
from numindex.index import (abstract_index, adjoint_compare, characterization_check, index_over_parameters,
                            index_value_scan, n_index, n_index_brute_force, n_index_structural, n_index_upper)
from numindex.numrange import v_radius
from numindex.operators import (Operator, adjoint, compose, diag_sum, extend_codomain_one, extend_domain_infty,
                                identity, normalize, op_norm, rank_one)
from numindex.spaces import absolute_sum, gamma_dual, gamma_norm, lp, predual_weighted_max_root

INF = math.inf
L2, LINF, L1 = lp(2, 2), lp(INF, 2), lp(1, 2)


def assert_report_consistent(rep, G=None):
    assert rep.lower <= rep.upper + 1e-12
    if G is not None and rep.witness is not None and rep.witness.ndim == 2:
        T = rep.witness
        ratio = v_radius(G, T).upper / op_norm(Operator(G.domain, G.codomain, T)).lower
        assert ratio <= rep.upper + 1e-6


# ---------------------------------------------------------------- abstract index

def test_abstract_index_examples():
    rep = abstract_index(LINF, [1.0, 1.0])
    assert rep.value.contains(1.0, 1e-2)
    rep = abstract_index(L2, [0.6, 0.8])
    assert rep.value.contains(0.0, 1e-2)
    rep = abstract_index(gamma_dual(0.5), [0.0, 1.0])
    assert rep.value.contains(0.5, 1e-2)


@pytest.mark.parametrize("gamma", [0.0, 0.25, 0.5, 1.0])
def test_gamma_dual_index_is_gamma(gamma):
    rep = abstract_index(gamma_dual(gamma), [0.0, 1.0])
    assert rep.value.contains(gamma, 1e-6)


def test_abstract_index_methods_agree():
    u = np.array([1.0, 0.0])
    S = predual_weighted_max_root(0.5)
    bf = abstract_index(S, u, method="bruteforce")
    opt = abstract_index(S, u, method="optimizer")
    assert bf.value.overlaps(opt.value, 1e-2)
    with pytest.raises(ValueError):
        abstract_index(S, [2.0, 0.0])
    with pytest.raises(ValueError):
        abstract_index(S, u, method="guess")


# frozen brute-force values of h(r) = n(Z_r, (1, 0)); they follow sqrt(1 - r)
@pytest.mark.parametrize("r,expected", [(0.0, 1.0), (0.25, 0.8660254038), (0.5, 0.7071067812), (1.0, 0.0)])
def test_weighted_plane_index_curve(r, expected):
    rep = abstract_index(predual_weighted_max_root(r), [1.0, 0.0], method="bruteforce")
    assert rep.value.contains(expected, 1e-6)
    assert rep.value.width <= 1e-6


def test_index_curve_is_monotone_in_the_weight():
    reps = index_over_parameters(lambda r: (predual_weighted_max_root(r), np.array([1.0, 0.0])),
                                 [0.0, 0.2, 0.4, 0.6, 0.8, 1.0], method="bruteforce")
    uppers = [rep.upper for _, rep in reps]
    assert all(b <= a + 1e-9 for a, b in zip(uppers, uppers[1:]))


# ---------------------------------------------------------------- operator index

def test_upper_bounds_from_search():
    assert n_index_upper(identity(L2)).upper <= 1e-3
    rep = n_index_upper(identity(LINF))
    assert rep.upper == pytest.approx(1.0, abs=1e-3)
    assert_report_consistent(rep, identity(LINF))
    rep = n_index_upper(identity(lp(2, 2, "complex")))
    assert rep.upper == pytest.approx(0.5, abs=1e-2)


def test_brute_force_enclosures():
    rep = n_index_brute_force(identity(LINF), mesh=0.02)
    assert rep.value.contains(1.0, 1e-12) and rep.value.width <= 0.05
    rep = n_index_brute_force(identity(L2), mesh=0.02)
    assert rep.value.contains(0.0, 1e-12)
    rep = n_index_brute_force(identity(predual_weighted_max_root(0.5)), mesh=0.02)
    # the identity index is at most the index at any point, here h(0.5)
    assert rep.upper <= abstract_index(predual_weighted_max_root(0.5), [1.0, 0.0]).upper + 1e-6
    assert_report_consistent(rep, identity(predual_weighted_max_root(0.5)))
    with pytest.raises(ValueError):
        n_index_brute_force(identity(lp(2, 3)))


def test_structural_rules():
    G = rank_one([1.0, 1.0], [1.0, 1.0], L1, LINF)
    rep = n_index_structural(G)
    assert rep.value.contains(1.0, 1e-9) and rep.method == "structural"
    a = identity(LINF)
    b = normalize(Operator(L2, L2, np.diag([1.0, 0.5])))
    rep = n_index_structural(diag_sum([a, b], "linf"))
    assert rep.value.contains(0.0, 1e-9)
    M = np.array([[0.3, -1.2], [0.7, 0.4]])
    rep = n_index_structural(normalize(Operator(L2, lp(3, 2), M)))
    assert rep is not None and rep.upper == 0.0
    assert n_index_structural(identity(LINF)) is None


def test_structural_agrees_with_other_routes():
    G = rank_one([1.0, 0.0], [1.0, 1.0], L1, LINF)
    s = n_index_structural(G)
    up = n_index_upper(G)
    assert up.upper >= s.lower - 1e-2
    bf = n_index_brute_force(G)
    assert bf.value.overlaps(s.value, 1e-9)


def test_rank_one_on_mixed_sum_depends_on_the_vertex():
    # X = (l2^2 (+)inf R) (+)1 R; x0* = e4 is not a spear vector of X*, (0, 0, 1, 1) is
    X = absolute_sum([absolute_sum([L2, lp(2, 1)], "linf"), lp(2, 1)], "l1")
    e4 = np.array([0.0, 0.0, 0.0, 1.0])
    G = rank_one(e4, e4, X, X)
    assert n_index(G).value.contains(0.0, 1e-9)
    fixed = np.array([0.0, 0.0, 1.0, 1.0])
    G = rank_one(fixed, e4, X, X)
    assert n_index(G).value.contains(1.0, 1e-9)


def test_identity_on_gamma_extension():
    Y, first, second = gamma_extension(0.5)
    # index of the hexagonal block by brute force; the other blocks have index one
    hexagon = n_index_brute_force(identity(gamma_norm(0.5)), mesh=0.01)
    assert hexagon.value.contains(0.5, 1e-9)
    assert n_index(identity(Y)).value.overlaps(hexagon.value, 1e-9)
    assert n_index(first).value.contains(0.5, 1e-2)
    assert n_index(second).value.contains(1.0, 1e-2)


def test_swap_index_is_gamma():
    rep = n_index(gamma_swap(0.5))
    assert rep.value.contains(0.5, 1e-2)


def test_characterization_holds_at_computed_lower():
    for G in (identity(LINF), rank_one([1.0, 1.0], [1.0, 1.0], L1, LINF), identity(lp(3, 2))):
        rep = n_index(G)
        holds, worst = characterization_check(G, rep.lower - 1e-3, count=100, seed=3)
        assert holds, worst


def test_characterization_fails_above_the_index():
    # n(Id on l2^2) = 0; random T have numerical radius well below their norm
    holds, worst = characterization_check(identity(L2), 0.9, count=200, seed=1)
    assert not holds and worst < 0


# ---------------------------------------------------------------- adjoints, compositions and extensions

def test_adjoint_compare_examples():
    G = rank_one([1.0, 1.0], [1.0, 0.0], L1, lp(3, 2))
    res = adjoint_compare(G)
    assert res["consistent"] and res["overlap"]
    assert res["G"].value.overlaps(res["adjoint"].value, 1e-9)
    res = adjoint_compare(identity(lp(3, 2)))
    assert res["consistent"] and res["overlap"]


@pytest.mark.parametrize("seed", range(3))
def test_adjoint_of_random_polygon_operator(seed):
    rng = np.random.default_rng(seed + 40)
    G = random_polygon_operator(rng, seed)
    res = adjoint_compare(G, method="bruteforce")
    assert res["adjoint"].upper <= res["G"].upper + 2e-2
    assert res["G"].value.overlaps(res["adjoint"].value, 2e-2)
    assert adjoint(adjoint(G)) is G


def test_isometric_codomain_embedding_does_not_raise_the_index():
    G1 = rank_one([1.0, 1.0], [1.0, 1.0], L1, LINF)
    G = extend_codomain_one(G1, lp(2, 1))
    assert n_index_upper(G).upper <= n_index_upper(G1).upper + 2e-2


def test_quotient_first_factor_does_not_raise_the_index():
    # Q : l1^3 -> l1^2 maps the unit ball onto the unit ball
    X3 = lp(1, 3)
    Q = Operator(X3, L1, [[1.0, 0.0, 0.5], [0.0, 1.0, 0.5]])
    assert op_norm(Q).lower == pytest.approx(1.0)
    G2 = identity(L1)
    assert n_index_upper(compose(G2, Q)).upper <= n_index_upper(G2).upper + 2e-2


@pytest.mark.parametrize("seed", range(2))
def test_extensions_preserve_the_index(seed):
    rng = np.random.default_rng(seed + 70)
    G = random_polygon_operator(rng, seed + 1)
    base = n_index_brute_force(G)
    line = lp(2, 1)
    dom = n_index_brute_force(extend_domain_infty(G, line), max_dim=6)
    cod = n_index_brute_force(extend_codomain_one(G, line), max_dim=6)
    assert dom.value.overlaps(base.value, 1e-2)
    assert cod.value.overlaps(base.value, 1e-2)


# ---------------------------------------------------------------- value scans

def test_scan_on_euclidean_plane_is_zero():
    reps = index_value_scan(L2, L2, sample_count=3)
    assert reps and all(rep.upper <= 1e-2 for rep in reps)


def test_scan_on_square_contains_zero_and_one():
    reps = index_value_scan(LINF, LINF, sample_count=3)
    assert any(rep.upper <= 1e-2 for rep in reps)
    assert any(abs(rep.lower - 1.0) <= 1e-2 for rep in reps)
    for rep in reps:
        assert_report_consistent(rep)
        assert rep.notes[0].startswith("G = ")


def test_scan_on_gamma_extension_finds_both_special_values():
    Y, first, second = gamma_extension(0.5)
    reps = index_value_scan(Y, Y, sample_count=0, extra=[first, second])
    assert any(rep.value.contains(0.5, 1e-2) for rep in reps)
    assert any(rep.value.contains(1.0, 1e-2) for rep in reps)
