"""Ready-made spaces and operators with known indices."""

from __future__ import annotations

import math

import numpy as np

from .operators import Operator, identity, normalize, rank_one
from .spaces import NormedSpace, absolute_sum, gamma_norm, lp, polyhedral

#: the quarter-turn ``(x1, x2) -> (x2, -x1)``
QUARTER_TURN = np.array([[0.0, 1.0], [-1.0, 0.0]])


def rotation(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


def ellp_rotation_radius(p: float, mesh: float = 1e-6) -> float:
    """``max_{t in [0,1]} |t^(p-1) - t| / (1 + t^p)`` on a uniform grid."""
    t = np.linspace(0.0, 1.0, int(round(1.0 / mesh)) + 1)
    return float(np.max(np.abs(t ** (p - 1.0) - t) / (1.0 + t ** p)))


def gamma_swap(gamma: float) -> Operator:
    """Norm-one operator on ``gamma_norm(gamma) (+)inf linf^2`` swapping the summands.

    The two off-diagonal blocks are rank-one maps built from the corner
    ``(1, 1)`` of the square and the vertex ``(0, 1)`` of the gamma ball; the
    index of the swap equals ``gamma``.
    """
    Xg = gamma_norm(gamma)
    Z = lp(math.inf, 2)
    into_square = rank_one([0.0, 1.0], [1.0, 1.0], Xg, Z)
    into_gamma = rank_one([1.0, 0.0], [1.0, 0.0], Z, Xg)
    S = absolute_sum([Xg, Z], "linf")
    M = np.zeros((4, 4))
    M[0:2, 2:4] = into_gamma.matrix
    M[2:4, 0:2] = into_square.matrix
    return Operator(S, S, M, label=f"swap[gamma={gamma:g}]")


def gamma_extension(gamma: float) -> tuple[NormedSpace, Operator, Operator]:
    """``Y = ((S (+)inf R) (+)1 R)`` with ``S`` the swap space, and two operators on it.

    The first operator acts as the swap on ``S`` and as the identity on both
    real lines (index ``gamma``); the second is the rank-one map
    ``y -> (y5 + y6) e6`` (index one).
    """
    swap = gamma_swap(gamma)
    line = lp(2.0, 1)
    Y = absolute_sum([absolute_sum([swap.domain, line], "linf"), line], "l1")
    M = np.zeros((6, 6))
    M[:4, :4] = swap.matrix
    M[4, 4] = M[5, 5] = 1.0
    first = Operator(Y, Y, M, label=f"swap+id[gamma={gamma:g}]")
    e = np.zeros(6)
    e[4] = e[5] = 1.0
    second = rank_one(e, np.eye(6)[5], Y, Y)
    second.label = "rank-one spear"
    return Y, first, second


# ---------------------------------------------------------------- random planar data

def random_polygon_space(rng: np.random.Generator, max_sides: int = 4) -> NormedSpace:
    """A real plane normed by ``max_k |a_k . x|`` for 2 to ``max_sides`` random functionals."""
    k = int(rng.integers(2, max_sides + 1))
    ang = np.sort(rng.uniform(0.0, np.pi, k))
    rad = rng.uniform(0.5, 1.5, k)
    return polyhedral(np.stack([np.cos(ang) * rad, np.sin(ang) * rad], axis=1))


def random_plane_space(rng: np.random.Generator) -> NormedSpace:
    """A polygon norm or an ``lp`` norm on the real plane."""
    if rng.uniform() < 0.3:
        return random_polygon_space(rng)
    return lp([1.0, 1.5, 2.0, 3.0, math.inf][int(rng.integers(5))], 2)


def random_vertex_rank_one(rng: np.random.Generator, smooth_chance: float = 0.3) -> Operator:
    """Rank-one map between random polygon spaces.

    The factors are vertices of the dual ball and of the ball, except that
    each one is replaced by a random (smooth) sphere point with probability
    ``smooth_chance``.
    """
    X, Y = random_polygon_space(rng), random_polygon_space(rng)
    Xd = X.dual()
    ex, ey = Xd.extreme_points(), Y.extreme_points()
    seed = int(rng.integers(1 << 31))
    f = ex[rng.integers(len(ex))] if rng.uniform() >= smooth_chance else Xd.sample_sphere(len(ex) + 1, seed)[-1]
    y = ey[rng.integers(len(ey))] if rng.uniform() >= smooth_chance else Y.sample_sphere(len(ey) + 1, seed)[-1]
    return rank_one(f, y, X, Y)


def random_polygon_operator(rng: np.random.Generator, kind: int) -> Operator:
    """Norm-one operator between polygon spaces.

    ``kind % 3`` selects the identity of a random polygon space, a vertex
    rank-one map or a normalized Gaussian matrix.
    """
    kind %= 3
    if kind == 0:
        return identity(random_polygon_space(rng))
    if kind == 1:
        return random_vertex_rank_one(rng, smooth_chance=0.0)
    X, Y = random_polygon_space(rng), random_polygon_space(rng)
    return normalize(Operator(X, Y, rng.standard_normal((2, 2))))
