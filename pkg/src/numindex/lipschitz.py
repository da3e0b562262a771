"""Sampled Lipschitz numerical range of a self-map ``F`` with ``F(0) = 0``.

The range collects the slopes ``xi*(F(x) - F(y)) / ||x - y||`` over pairs
``x != y`` and dual unit functionals ``xi*`` norming ``x - y``.  Every sampled
slope is a genuine point of the range, so the largest modulus seen is a lower
bound for the Lipschitz numerical radius.
"""

from __future__ import annotations

import logging
from typing import Callable, Optional, Sequence

import numpy as np

from .numrange import RangeCloud
from .operators import op_norm_batch
from .spaces import NoCertifiedFace, NormedSpace

log = logging.getLogger(__name__)

#: relative excess of a sampled slope over the hint that triggers a diagnostic
SLOPE_SLACK = 1e-6
#: lengths of the short segments are log-uniform in this range
SHORT_RANGE = (1e-3, 1e-1)


class LipschitzMap:
    """A map on ``space`` normalized so that ``F(0) = 0``.

    ``fn`` maps a batch ``(N, dim)`` to ``(N, dim)``.  ``lip_bound_hint`` is an
    optional Lipschitz constant; sampled slopes above it are logged and
    counted in ``violations``.
    """

    def __init__(self, space: NormedSpace, fn: Callable[[np.ndarray], np.ndarray],
                 lip_bound_hint: Optional[float] = None, label: str = "F"):
        self.space = space
        self._fn = fn
        self.label = label
        if lip_bound_hint is not None and not lip_bound_hint > 0:
            raise ValueError("Lipschitz hint must be positive")
        self.lip_bound_hint = lip_bound_hint
        self.violations = 0
        self._offset = np.asarray(fn(np.zeros((1, space.dim), dtype=self._dtype())))[0]

    def _dtype(self):
        return complex if self.space.is_complex else float

    def __call__(self, X) -> np.ndarray:
        X = np.atleast_2d(self.space.vectors(X))
        out = np.asarray(self._fn(X)) - self._offset
        if out.shape != X.shape:
            raise ValueError(f"map returned shape {out.shape} for input {X.shape}")
        return out

    def scaled(self, factor) -> "LipschitzMap":
        hint = None if self.lip_bound_hint is None else self.lip_bound_hint * abs(factor)
        return LipschitzMap(self.space, lambda X: factor * self(X), hint or None,
                            f"{factor}*{self.label}")

    def check_slopes(self, slopes: np.ndarray) -> None:
        if self.lip_bound_hint is None:
            return
        bad = int(np.sum(slopes > self.lip_bound_hint * (1 + SLOPE_SLACK)))
        if bad:
            self.violations += bad
            log.warning("%s: %d sampled slopes exceed the hint %.6g (max %.6g)",
                        self.label, bad, self.lip_bound_hint, float(slopes.max()))


# ---------------------------------------------------------------- built-in maps

def linear_map(space: NormedSpace, matrix) -> LipschitzMap:
    A = np.array(matrix, dtype=complex if space.is_complex else float)
    if A.shape != (space.dim, space.dim):
        raise ValueError(f"linear map needs a {space.dim} x {space.dim} matrix")
    _, up = op_norm_batch(A[None], space, space)
    return LipschitzMap(space, lambda X: X @ A.T, float(up[0]) or None, "linear")


def _euclidean_constants(space: NormedSpace, count: int = 4096) -> tuple[float, float]:
    # sampled max of ||s||_2 on the unit sphere of space and of ||e|| on the Euclidean sphere
    S = space.sample_sphere(count, seed=11)
    c1 = float(np.linalg.norm(S, axis=1).max())
    E = S / np.linalg.norm(S, axis=1)[:, None]
    c2 = float(space.norm(E).max())
    return c1, c2


def radial_map(space: NormedSpace, radius: float = 1.0) -> LipschitzMap:
    """``x -> x ||x||_2``; the hint holds on the ball of the sampling ``radius``."""
    c1, c2 = _euclidean_constants(space)
    hint = 2.0 * radius * c1 * c1 * c2
    return LipschitzMap(space, lambda X: X * np.linalg.norm(X, axis=1, keepdims=True), hint, "radial")


def abs_map(space: NormedSpace) -> LipschitzMap:
    """Componentwise modulus; 1-Lipschitz for absolute norms."""
    if space.is_complex:
        raise ValueError("componentwise modulus is defined on real spaces only")
    hint = 1.0 if space.family.absolute else None
    return LipschitzMap(space, np.abs, hint, "abs")


def piecewise_map(space: NormedSpace, pieces: Sequence) -> LipschitzMap:
    """Composition of affine maps and componentwise moduli, applied left to right.

    Each piece is ``("affine", A, b)`` or ``("abs",)``.
    """
    steps = []
    hint: Optional[float] = 1.0
    for pc in pieces:
        if pc[0] == "affine":
            A = np.array(pc[1], dtype=complex if space.is_complex else float)
            b = np.zeros(space.dim) if len(pc) < 3 else np.asarray(pc[2], dtype=A.dtype)
            if A.shape != (space.dim, space.dim) or b.shape != (space.dim,):
                raise ValueError("affine pieces must map the space to itself")
            steps.append(lambda X, A=A, b=b: X @ A.T + b)
            if hint is not None:
                hint *= float(op_norm_batch(A[None], space, space)[1][0])
        elif pc[0] == "abs":
            if space.is_complex:
                raise ValueError("componentwise modulus is defined on real spaces only")
            steps.append(np.abs)
            if not space.family.absolute:
                hint = None
        else:
            raise ValueError(f"unknown piece {pc[0]!r}")

    def fn(X):
        for st in steps:
            X = st(X)
        return X

    return LipschitzMap(space, fn, hint or None, "piecewise")


# ---------------------------------------------------------------- sampling

def _pair_points(space: NormedSpace, count: int, rng: np.random.Generator, radius: float):
    """Half global pairs from the ball, half short segments."""
    n_glob = (count + 1) // 2
    n_short = count - n_glob
    S = space.sample_sphere(2 * n_glob + 2 * n_short, seed=int(rng.integers(1 << 31)))
    rng.shuffle(S)
    r = radius * rng.uniform(0, 1, 2 * n_glob + n_short)
    X = S[:n_glob] * r[:n_glob, None]
    Y = S[n_glob:2 * n_glob] * r[n_glob:2 * n_glob, None]
    base = S[2 * n_glob:2 * n_glob + n_short] * r[2 * n_glob:, None]
    dirs = S[2 * n_glob + n_short:2 * n_glob + 2 * n_short]
    t = np.exp(rng.uniform(*np.log(SHORT_RANGE), n_short))
    return np.concatenate([X, base]), np.concatenate([Y, base + t[:, None] * dirs])


def _choose_face(space: NormedSpace, w: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    F = space.face(w)
    if len(F) == 1:
        return F[0]
    return rng.dirichlet(np.ones(len(F))) @ F


def lip_range_sample(F: LipschitzMap, pair_count: int, seed: int = 0, radius: float = 1.0) -> RangeCloud:
    """Certified points of the Lipschitz numerical range with their ``(x, y, xi*)`` triples.

    Pairs and functionals depend only on ``seed`` and the space, never on ``F``.
    """
    if pair_count < 1:
        raise ValueError("pair_count must be at least 1")
    space = F.space
    rng = np.random.default_rng(seed)
    X, Y = _pair_points(space, pair_count, rng, radius)
    D = X - Y
    dn = np.atleast_1d(space.norm(D))
    FX, FY = F(X), F(Y)
    pts, recs, slopes = [], [], []
    skipped = 0
    for k in range(len(X)):
        if dn[k] <= 1e-300:
            skipped += 1
            continue
        try:
            xi = _choose_face(space, D[k] / dn[k], rng)
        except NoCertifiedFace:
            skipped += 1
            continue
        diff = FX[k] - FY[k]
        pts.append(np.sum(xi * diff) / dn[k])
        recs.append((X[k], Y[k], xi))
        slopes.append(float(space.norm(diff)) / dn[k])
    if skipped:
        log.info("lip range: %d of %d pairs skipped", skipped, len(X))
    F.check_slopes(np.array(slopes))
    pts = np.array(pts, dtype=complex)
    hull = float(np.abs(pts).max()) if len(pts) else 0.0
    return RangeCloud(points=pts, delta=0.0, samples=recs, hull_radius=hull,
                      skipped=skipped, columns=("x", "y", "xi"))


def slope_value(F: LipschitzMap, x, y, xi) -> complex:
    """Recompute one range point from its recorded triple."""
    d = np.asarray(x) - np.asarray(y)
    diff = F(np.stack([x, y]))
    return complex(np.sum(xi * (diff[0] - diff[1])) / F.space.norm(d))


def _best_slope(F: LipschitzMap, x, y) -> float:
    space = F.space
    d = x - y
    nd = float(space.norm(d))
    if nd <= 1e-300:
        return 0.0
    try:
        Fc = space.face(d / nd)
    except NoCertifiedFace:
        return 0.0
    diff = F(np.stack([x, y]))
    return float(np.abs(Fc @ (diff[0] - diff[1])).max()) / nd


def lip_radius_lower(F: LipschitzMap, pair_count: int, seed: int = 0, radius: float = 1.0,
                     refine_steps: int = 400) -> float:
    """Lower bound for the Lipschitz numerical radius.

    The best sampled pair is refined by a shrinking random local search; the
    value at every accepted pair is an exact range modulus.
    """
    cloud = lip_range_sample(F, pair_count, seed, radius)
    if not len(cloud.points):
        return 0.0
    k = int(np.argmax(np.abs(cloud.points)))
    x, y, _ = cloud.samples[k]
    x = np.array(x)
    y = np.array(y)
    best = max(float(abs(cloud.points[k])), _best_slope(F, x, y))
    rng = np.random.default_rng(seed + 1)
    step = 0.25 * float(F.space.norm(x - y)) + 1e-6
    space = F.space
    for i in range(refine_steps):
        g = space.sample_sphere(2, seed=int(rng.integers(1 << 31)))
        xn = x + step * rng.uniform() * g[0]
        yn = y + step * rng.uniform() * g[1]
        v = _best_slope(F, xn, yn)
        if v > best:
            best, x, y = v, xn, yn
        elif i % 20 == 19:
            step *= 0.5
    return best
