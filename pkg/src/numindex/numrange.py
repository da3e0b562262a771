"""Numerical ranges and radii of an operator relative to a norm-one operator ``G``.

For ``T`` in ``L(X, Y)`` the radius ``v_G(T)`` is computed two ways:

* the derivative formula ``max_theta lim (||G + a theta T|| - 1) / a``.  By
  convexity every finite ``a`` gives an upper bound, so the minimum over the
  step schedule is reported as the upper end;
* pairs ``(x, y*)`` with ``||x|| = ||y*|| = 1`` and ``y*(G x) = 1``.  Each gives
  ``|y*(T x)| <= v_G(T)``; the maximum over a finite set of such pairs is the
  lower end.  The supremum over the whole set is attained at extreme points,
  so for polyhedral spaces the set of extreme aligned pairs is exhaustive.

The relaxed radius ``v_{G,delta}`` (pairs with ``Re y*(G x) > 1 - delta``) is
estimated by constrained search and decreases to ``v_G`` as ``delta -> 0``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field as dc_field
import logging
import math
from typing import Optional

import numpy as np

from .config import TOL
from .interval import Interval
from .operators import Operator, as_matrix, op_norm_batch, op_norm_value
from .optimize import (Budget, InfeasibleError, golden_max, maximize_constrained,
                       maximize_on_sphere, minimize_over_operator_sphere)
from .spaces import NoCertifiedFace

log = logging.getLogger(__name__)

#: step schedule for the derivative formula
ALPHAS = tuple(10.0 ** -k for k in range(1, 8))
#: relaxation schedule for the spatial radius, smallest first
DELTAS = tuple(10.0 ** -k for k in range(12, 1, -1))


@dataclass
class RadiusEstimate:
    value: Interval
    witness_pair: Optional[tuple[np.ndarray, np.ndarray]]
    method: str
    extras: dict = dc_field(default_factory=dict)

    @property
    def lower(self) -> float:
        return self.value.lower

    @property
    def upper(self) -> float:
        return self.value.upper


@dataclass
class RangeCloud:
    points: np.ndarray
    delta: float
    samples: list
    hull_radius: float
    #: pairs dropped because no face element could be certified
    skipped: int = 0
    columns: tuple = ("x", "ystar")

    def to_csv(self, path: str) -> None:
        """Write ``re,im`` followed by the coordinates of each recorded vector."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            sizes = [len(np.ravel(_real_view(v))) for v in self.samples[0]] if self.samples else [0] * len(self.columns)
            head = ["re", "im"]
            for name, k in zip(self.columns, sizes):
                head += [f"{name}{i}" for i in range(k)]
            w.writerow(head)
            for p, rec in zip(self.points, self.samples):
                row = [f"{p.real:.12g}", f"{p.imag:.12g}"]
                for v in rec:
                    row += [f"{c:.12g}" for c in _real_view(v)]
                w.writerow(row)


def _real_view(v):
    v = np.asarray(v)
    if np.iscomplexobj(v):
        return np.concatenate([v.real, v.imag])
    return v


# ---------------------------------------------------------------- aligned pairs

def norming_points(G: Operator, resolution: int = 1024) -> np.ndarray:
    """Unit vectors ``x`` with ``||G x|| = ||G||`` (up to the attainment tolerance).

    Extreme points are used when the domain has finitely many; on a
    2-dimensional domain a boundary polygon plus refined local maxima; in
    general random sphere points together with multistart maximizers.
    """
    key = ("norming", resolution)
    if key in G._cache:
        return G._cache[key]
    X, Y = G.domain, G.codomain
    M = G.matrix
    gnorm = G.norm().lower
    thr = gnorm * (1.0 - TOL.attain)
    ext = X.extreme_points()
    if ext is not None:
        vals = Y.norm(ext @ M.T)
        pts = ext[vals >= thr]
    elif X.real_dim == 2:
        ang, P = X.boundary(resolution)
        vals = np.atleast_1d(Y.norm(P @ M.T))
        keep = [P[vals >= thr]]
        # refine every local maximum of the boundary polygon
        n = len(ang)
        loc = np.flatnonzero((vals >= np.roll(vals, 1)) & (vals >= np.roll(vals, -1)))
        if len(loc):
            lo = np.where(loc > 0, ang[loc - 1], ang[-1] - 2 * np.pi)
            hi = np.where(loc < n - 1, ang[(loc + 1) % n], ang[0] + 2 * np.pi)
            xb, fb = golden_max(lambda phi: Y.norm(X.boundary_point(phi) @ M.T), lo, hi, 64)
            keep.append(X.boundary_point(xb[fb >= thr]))
        pts = np.concatenate(keep)
    else:
        S = X.sample_sphere(resolution, seed=0)
        vals = Y.norm(S @ M.T)
        keep = [S[vals >= thr]]
        res = maximize_on_sphere(X, lambda Z: Y.norm(Z @ M.T), Budget(starts=16, iterations=300),
                                 use_grid=False)
        allx, allv = res.extras["all_args"], res.extras["all_values"]
        keep.append(allx[allv >= thr])
        pts = np.concatenate(keep)
    if not len(pts):
        raise NoCertifiedFace("no norming vector found for G")
    G._cache[key] = pts
    return pts


def aligned_pairs(G: Operator, resolution: int = 1024, max_pairs: int = 4096):
    """Pairs ``(x, y*)`` with ``y*(G x) = ||G x||`` at norming vectors ``x``.

    Returns ``(xs, ys, slack)`` where ``slack = 1 - Re y*(G x)`` records the
    distance of each pair from exact alignment.
    """
    key = ("pairs", resolution, max_pairs)
    if key in G._cache:
        return G._cache[key]
    X, Y = G.domain, G.codomain
    pts = norming_points(G, resolution)
    xs, ys = [], []
    for x in pts:
        gx = G.matrix @ x
        try:
            F = Y.face(gx / Y.norm(gx))
        except NoCertifiedFace:
            continue
        for f in F:
            xs.append(x)
            ys.append(f)
    if not xs:
        raise NoCertifiedFace("no aligned pair could be certified")
    xs, ys = np.array(xs), np.array(ys)
    if len(xs) > max_pairs:
        idx = np.linspace(0, len(xs) - 1, max_pairs).round().astype(int)
        xs, ys = xs[idx], ys[idx]
    slack = 1.0 - np.real(np.einsum("km,mn,kn->k", ys, G.matrix, xs))
    G._cache[key] = (xs, ys, slack)
    return xs, ys, slack


def pair_values(G: Operator, Ts, resolution: int = 1024) -> np.ndarray:
    """``|y*_k(T x_k)|`` for every aligned pair and every ``T`` in the batch."""
    xs, ys, _ = aligned_pairs(G, resolution)
    Ts = np.asarray(Ts)
    return np.abs(np.einsum("km,bmn,kn->bk", ys, Ts, xs))


def aligned_pair_lower(G: Operator, T, resolution: int = 1024) -> tuple[float, tuple]:
    """Lower bound ``max_k |y*_k(T x_k)|`` and the pair attaining it."""
    M = as_matrix(T, G)
    vals = pair_values(G, M[None], resolution)[0]
    k = int(np.argmax(vals))
    xs, ys, _ = aligned_pairs(G, resolution)
    return float(vals[k]), (xs[k], ys[k])


# ---------------------------------------------------------------- derivative formula

def _theta_grid(is_complex: bool, count: int) -> np.ndarray:
    if not is_complex:
        return np.array([1.0, -1.0])
    return np.exp(2j * np.pi * np.arange(count) / count)


def derivative_values(G: Operator, Ts, alphas=ALPHAS, theta_count: int = 256,
                      refine: bool = True) -> np.ndarray:
    """``max_theta (||G + a theta T|| - ||G||) / a`` for each ``T`` and step ``a``.

    Returns an array of shape ``(B, len(alphas))``.  For complex scalars the
    phase grid is refined by golden-section search around its maximum.
    """
    Ts = np.asarray(Ts)
    B = len(Ts)
    X, Y = G.domain, G.codomain
    base = G.norm().lower
    al = np.asarray(alphas, dtype=float)
    th = _theta_grid(G.is_complex, theta_count)
    Ms = (G.matrix[None, None, None] + al[None, :, None, None, None] * th[None, None, :, None, None]
          * Ts[:, None, None])
    shp = Ms.shape
    vals = op_norm_value(Ms.reshape((-1,) + shp[-2:]), X, Y).reshape(shp[:3])
    # rounding in ||G + a T|| - ||G|| is a few ulps of the norms, amplified by 1 / a
    ulps = 8 * np.finfo(float).eps * (np.abs(vals) + abs(base))
    g = (vals - base + ulps) / al[None, :, None]
    best = g.max(axis=2)
    if G.is_complex and refine:
        k = np.argmax(g, axis=2)
        step = 2 * np.pi / theta_count
        lo = (2 * np.pi * k / theta_count - step).ravel()
        hi = lo + 2 * step
        A = np.broadcast_to(al[None, :], (B, len(al))).ravel()
        Tb = np.repeat(Ts, len(al), axis=0)

        def fn(phi):
            Mb = G.matrix[None] + (A * np.exp(1j * phi))[:, None, None] * Tb
            nv = op_norm_value(Mb, X, Y)
            return (nv - base + 8 * np.finfo(float).eps * (np.abs(nv) + abs(base))) / A

        _, fb = golden_max(fn, lo, hi, 40)
        best = np.maximum(best, fb.reshape(B, len(al)))
    return best


def derivative_upper(G: Operator, Ts, alphas=ALPHAS, theta_count: int = 256) -> np.ndarray:
    """Upper bounds for ``v_G(T)`` over a batch (minimum over the step schedule)."""
    return derivative_values(G, Ts, alphas, theta_count).min(axis=1)


def v_radius_derivative(G: Operator, T, alphas=ALPHAS, theta_count: int = 256) -> RadiusEstimate:
    """Radius bracket from the derivative formula and aligned pairs."""
    M = as_matrix(T, G)
    gvals = derivative_values(G, M[None], alphas, theta_count)[0]
    upper = float(gvals.min())
    # the schedule has converged once successive steps agree to 1e-7
    diffs = np.abs(np.diff(gvals))
    conv = int(np.argmax(diffs < 1e-7)) + 1 if np.any(diffs < 1e-7) else len(gvals) - 1
    lower, pair = aligned_pair_lower(G, M)
    margin = _alignment_margin(G) * _mat_scale(M)
    lower = max(0.0, lower - margin)
    upper = max(upper, 0.0)
    if lower > upper:
        # both ends are accurate to rounding; keep the bracket consistent
        lower = upper
    return RadiusEstimate(Interval(lower, upper), pair, "derivative",
                          {"steps": np.asarray(alphas), "values": gvals, "converged_at": conv})


def _alignment_margin(G: Operator) -> float:
    # pairs aligned only up to slack s perturb the radius by at most about 2 sqrt(s)
    _, _, slack = aligned_pairs(G)
    s = float(np.clip(slack, 0.0, None).max())
    return 0.0 if s <= 1e-15 else 2.0 * math.sqrt(s)


def _mat_scale(M) -> float:
    return float(np.abs(M).sum(axis=1).max()) if np.size(M) else 0.0


# ---------------------------------------------------------------- spatial radius

def v_delta(G: Operator, T, delta: float, budget: Budget = Budget(),
            warm: Optional[tuple] = None) -> tuple[float, tuple]:
    """Estimate ``sup |y*(T x)|`` over unit pairs with ``Re y*(G x) > 1 - delta``.

    The value is attained by the returned feasible pair, so it is a lower bound
    for the relaxed radius.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    M = as_matrix(T, G)
    X, Yd = G.domain, G.codomain.dual()
    xs, ys, _ = aligned_pairs(G)
    vals = np.abs(np.einsum("km,mn,kn->k", ys, M, xs))
    top = np.argsort(-vals, kind="stable")[: budget.starts]
    sx, sy = [xs[top]], [ys[top]]
    if warm is not None:
        sx.append(np.atleast_2d(warm[0]))
        sy.append(np.atleast_2d(warm[1]))
    sx, sy = np.concatenate(sx), np.concatenate(sy)
    GM = G.matrix

    def objective(x, y):
        return np.abs(np.einsum("bm,mn,bn->b", y, M, x))

    def constraint(x, y):
        return np.real(np.einsum("bm,mn,bn->b", y, GM, x)) - (1.0 - delta)

    try:
        res = maximize_constrained(X, Yd, objective, constraint, budget, starts=(sx, sy))
    except InfeasibleError:
        raise
    return res.value, res.argmax


def v_radius_spatial(G: Operator, T, deltas=DELTAS, budget: Budget = Budget()) -> RadiusEstimate:
    """Relaxed radii along a ``delta`` schedule (warm-started from small to large).

    The values are nondecreasing in ``delta``; the one at the smallest ``delta``
    is reported as the estimate of ``v_G(T)``.
    """
    M = as_matrix(T, G)
    vals, warm, pairs = [], None, []
    for d in sorted(deltas):
        v, warm = v_delta(G, M, d, budget, warm)
        if vals and v < vals[-1]:
            v = vals[-1]
        vals.append(v)
        pairs.append(warm)
    lower, pair = aligned_pair_lower(G, M)
    lower = max(0.0, lower - _alignment_margin(G) * _mat_scale(M))
    est = max(vals[0], lower)
    return RadiusEstimate(Interval(lower, est), pairs[0], "spatial",
                          {"deltas": np.array(sorted(deltas)), "values": np.array(vals)})


def v_radius(G: Operator, T, budget: Budget = Budget(), spatial: bool = False) -> RadiusEstimate:
    """Certified bracket for ``v_G(T)``.

    The upper end comes from the derivative formula and the lower end from
    aligned pairs; with ``spatial`` the relaxed-radius estimate is attached
    under ``extras["spatial"]``.
    """
    est = v_radius_derivative(G, T)
    est.method = "combined"
    if spatial:
        sp = v_radius_spatial(G, T, budget=budget)
        est.extras["spatial"] = sp.upper
        est.extras["spatial_values"] = sp.extras["values"]
    return est


# ---------------------------------------------------------------- range clouds

def range_cloud(G: Operator, T, delta: float = 0.0, samples: int = 256, seed: int = 0) -> RangeCloud:
    """Points ``y*(T x)`` of the (relaxed) numerical range with their pairs."""
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    M = as_matrix(T, G)
    xs, ys, _ = aligned_pairs(G)
    rng = np.random.default_rng(seed)
    X, Yd = G.domain, G.codomain.dual()
    head = len(xs) if delta == 0 else min(len(xs), max(1, samples // 2))
    idx = np.linspace(0, len(xs) - 1, head).round().astype(int)
    px, py = list(xs[idx]), list(ys[idx])
    # convex combinations of face elements at a shared x stay in the range
    i = 0
    while len(px) < samples and i < 4 * samples:
        i += 1
        k = int(rng.integers(len(xs)))
        same = np.flatnonzero(np.all(np.isclose(xs, xs[k]), axis=1))
        if len(same) < 2 and delta == 0:
            continue
        w = rng.dirichlet(np.ones(len(same)))
        y = w @ ys[same]
        x = xs[k]
        if delta > 0:
            # steps of size delta keep the pair well inside the slab
            t = 0.5 * delta * rng.uniform()
            x = x + t * X.sample_sphere(1, int(rng.integers(1 << 31)))[0]
            x = x / X.norm(x)
            y = y + t * Yd.sample_sphere(1, int(rng.integers(1 << 31)))[0]
            y = y / Yd.norm(y)
            if not np.real(y @ G.matrix @ x) > 1.0 - delta:
                continue
        px.append(x)
        py.append(y)
    px, py = np.array(px[:max(samples, 1)]), np.array(py[:max(samples, 1)])
    pts = np.einsum("km,mn,kn->k", py, M, px).astype(complex)
    return RangeCloud(points=pts, delta=delta, samples=list(zip(px, py)),
                      hull_radius=float(np.abs(pts).max()))


# ---------------------------------------------------------------- searches over T

@dataclass
class SpearProbe:
    refuted: bool
    deficit: float
    witness: Optional[np.ndarray]
    scale: Optional[float]


def spear_deficit(G: Operator, Ts, theta_count: int = 64) -> np.ndarray:
    """Certified upper bounds for ``max_theta ||G + theta T|| - 1 - ||T||``."""
    X, Y = G.domain, G.codomain
    Ts = np.asarray(Ts)
    th = _theta_grid(G.is_complex, theta_count)
    Ms = G.matrix[None, None] + th[None, :, None, None] * Ts[:, None]
    shp = Ms.shape
    vup = op_norm_batch(Ms.reshape((-1,) + shp[-2:]), X, Y)[1].reshape(shp[:2])
    tnorm_val, tnorm_up = op_norm_batch(Ts, X, Y)
    best = vup.max(axis=1)
    if G.is_complex:
        # theta is a circle; neighbouring grid phases differ by at most pi/count in T
        best = best + (np.pi / theta_count) * tnorm_up
    return best - G.norm().lower - tnorm_val


def spear_probe(G: Operator, budget: Budget = Budget(), scales=(0.1, 0.5, 1.0, 2.0, 5.0)) -> SpearProbe:
    """Look for ``T`` refuting ``max_theta ||G + theta T|| = 1 + ||T||``."""
    X, Y = G.domain, G.codomain
    best = (math.inf, None, None)
    for t in scales:
        res = minimize_over_operator_sphere(
            G.shape, G.is_complex, lambda Ts, t=t: spear_deficit(G, t * Ts),
            lambda Ms: op_norm_value(Ms, X, Y), budget, extra_starts=search_seeds(G))
        if res.value < best[0]:
            best = (res.value, res.argmax, t)
    return SpearProbe(refuted=best[0] < -TOL.spear, deficit=float(best[0]),
                      witness=best[1], scale=best[2])


def search_seeds(G: Operator, count: int = 24) -> np.ndarray:
    """Starting matrices for searches over ``T``.

    Directions annihilated (or nearly) by the aligned-pair functionals come
    first, then rank-one matrices built from extreme points, then skew
    rotations.
    """
    m, n = G.shape
    seeds = []
    try:
        xs, ys, _ = aligned_pairs(G)
        L = np.einsum("km,kn->kmn", ys, xs).reshape(len(xs), -1)
        if G.is_complex:
            _, s, Vh = np.linalg.svd(L, full_matrices=True)
            V = Vh.conj()
        else:
            _, s, Vh = np.linalg.svd(np.real(L), full_matrices=True)
            V = Vh
        for v in V[::-1][: max(1, min(6, len(V)))]:
            seeds.append(v.reshape(m, n))
    except NoCertifiedFace:
        pass
    ey = G.codomain.extreme_points()
    ex = G.domain.dual().extreme_points()
    if ey is not None and ex is not None:
        for y in ey[:6]:
            for f in ex[:6]:
                seeds.append(np.outer(y, f))
    if m == n:
        for i in range(n):
            for j in range(i + 1, n):
                S = np.zeros((n, n))
                S[i, j], S[j, i] = 1.0, -1.0
                seeds.append(S)
        if G.is_complex:
            seeds.append(1j * np.eye(n))
    seeds = [S for S in seeds if np.abs(S).max() > 1e-12]
    if not seeds:
        return np.zeros((0, m, n))
    out = np.array(seeds[:count])
    return out if G.is_complex else np.real(out)


def radius_search(G: Operator, budget: Budget = Budget(), theta_count: int = 64,
                  extra_starts: Optional[np.ndarray] = None):
    """Minimize the derivative-formula radius over unit ``T`` (uncertified from below)."""
    X, Y = G.domain, G.codomain
    seeds = search_seeds(G)
    if extra_starts is not None and len(extra_starts):
        seeds = np.concatenate([np.asarray(extra_starts, dtype=seeds.dtype if len(seeds) else None), seeds])

    def objective(Ts):
        return derivative_values(G, Ts, alphas=(1e-6,), theta_count=theta_count).min(axis=1)

    return minimize_over_operator_sphere(G.shape, G.is_complex, objective,
                                         lambda Ms: op_norm_value(Ms, X, Y), budget,
                                         extra_starts=seeds)


def null_direction_search(G: Operator, budget: Budget = Budget()) -> Optional[np.ndarray]:
    """A unit ``T`` whose radius upper bound is below ``1e-3``, or ``None``."""
    res = radius_search(G, budget)
    T = res.argmax
    if v_radius_derivative(G, T).upper < TOL.null_radius:
        return T
    return None
