"""Deterministic maximizers over unit spheres, constrained sets and operator spheres.

All routines are vectorized over candidate batches and take their randomness
from ``numpy.random.default_rng(budget.seed)``, so a run is reproducible bit
for bit.  Ties between equal values are broken towards the lexicographically
smallest argument.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
import itertools
import logging
import math
from typing import Callable, Optional

import numpy as np

log = logging.getLogger(__name__)

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class OptimizationError(RuntimeError):
    """Raised when an objective produces non-finite values."""


class InfeasibleError(RuntimeError):
    """Raised when no feasible point of a constrained problem is found."""


@dataclass(frozen=True)
class Budget:
    """Search effort.

    ``grid_depth`` controls exhaustive grids: a circle gets ``2**grid_depth``
    points, a 3-dimensional sphere ``2**(grid_depth - 3)`` points per cube-face
    axis.
    """

    starts: int = 12
    iterations: int = 150
    grid_depth: int = 9
    seed: int = 0

    def __post_init__(self):
        if self.starts < 1 or self.iterations < 0 or self.grid_depth < 1:
            raise ValueError(f"invalid budget {self}")

    def with_seed(self, seed: int) -> "Budget":
        return replace(self, seed=int(seed))


@dataclass
class OptResult:
    value: float
    argmax: np.ndarray
    certified: bool = False
    gap: float = math.inf
    grid_value: Optional[float] = None
    evaluations: int = 0
    extras: dict = field(default_factory=dict)

    @property
    def upper(self) -> float:
        """Certified upper bound for a maximization (``inf`` if uncertified)."""
        if not self.certified:
            return math.inf
        return max(self.value, (self.grid_value if self.grid_value is not None else self.value) + self.gap)


def _check_finite(vals: np.ndarray) -> np.ndarray:
    vals = np.asarray(vals, dtype=float)
    if not np.all(np.isfinite(vals)):
        raise OptimizationError("objective returned non-finite values")
    return vals


def best_index(values: np.ndarray, args: np.ndarray) -> int:
    """Index of the maximum value; equal values go to the smallest argument."""
    vmax = values.max()
    tied = np.flatnonzero(values == vmax)
    if len(tied) == 1:
        return int(tied[0])
    keys = args[tied].reshape(len(tied), -1)
    if np.iscomplexobj(keys):
        keys = np.concatenate([keys.real, keys.imag], axis=1)
    order = np.lexsort(keys.T[::-1])
    return int(tied[order[0]])


def golden_max(fn: Callable[[np.ndarray], np.ndarray], lo: np.ndarray, hi: np.ndarray,
               iterations: int = 60) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized golden-section maximization of unimodal scalar functions.

    ``fn`` maps an array of abscissae (one per problem) to values.
    """
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    c = hi - INV_PHI * (hi - lo)
    d = lo + INV_PHI * (hi - lo)
    fc, fd = fn(c), fn(d)
    for _ in range(iterations):
        left = fc >= fd
        hi = np.where(left, d, hi)
        lo = np.where(left, lo, c)
        x_new = np.where(left, hi - INV_PHI * (hi - lo), lo + INV_PHI * (hi - lo))
        f_new = fn(x_new)
        c, d, fc, fd = (np.where(left, x_new, d), np.where(left, c, x_new),
                        np.where(left, f_new, fd), np.where(left, fc, f_new))
    take_c = fc >= fd
    return np.where(take_c, c, d), np.where(take_c, fc, fd)


# ---------------------------------------------------------------- sphere grids

def cube_surface_grid(k: int, n: int, half: bool = False) -> np.ndarray:
    """Cell centres of an ``n``-per-axis grid on the faces of ``[-1, 1]**k``.

    With ``half`` only the faces with a ``+1`` coordinate are produced, which
    suffices for even objectives.
    """
    if k == 1:
        return np.array([[1.0]]) if half else np.array([[1.0], [-1.0]])
    ticks = -1.0 + (2.0 * np.arange(n) + 1.0) / n
    free = np.array(list(itertools.product(ticks, repeat=k - 1)))
    pts = []
    for axis in range(k):
        for sgn in ((1.0,) if half else (1.0, -1.0)):
            p = np.insert(free, axis, sgn, axis=1)
            pts.append(p)
    return np.concatenate(pts, axis=0)


def sphere_grid(space, depth: int) -> tuple[np.ndarray, float]:
    """Exhaustive sphere grid (native coordinates) with its covering radius.

    The covering radius is measured in the norm of ``space``: every unit vector
    lies within that distance of some grid point.
    """
    rd = space.real_dim
    if rd <= 1:
        pts = np.array([[1.0], [-1.0]])
        return space.from_real(pts), 0.0
    if rd == 2:
        _, pts = space.boundary(2 ** depth)
        nxt = np.roll(pts, -1, axis=0)
        chord = float(space.norm(nxt - pts).max())
        return pts, chord / 2.0
    n = 2 ** max(1, depth - 3)
    cube = cube_surface_grid(rd, n)
    dirs = space.from_real(cube)
    nrm = space.norm(dirs)
    pts = dirs / nrm[:, None]
    # a unit vector x lies in some cube cell; its radial image c/||c|| is a grid
    # point, and ||x - c/||c|| || <= 2 ||x - c'|| / ||c'|| for the closest cell point
    h = 1.0 / n
    corner = space.from_real(np.full((1, rd), h))
    cell_rad = float(space.norm(corner)[0]) if rd else 0.0
    min_dir = float(nrm.min())
    return pts, 2.0 * cell_rad / max(min_dir - cell_rad, 1e-12)


# ---------------------------------------------------------------- sphere search

def _pattern_search_sphere(space, objective, starts: np.ndarray, start_vals: np.ndarray,
                           iterations: int, step0: float = 0.25, min_step: float = 1e-11):
    """Coordinate pattern search on the unit sphere, one run per start row."""
    rd = space.real_dim
    xr = space.to_real(starts).astype(float)
    vals = start_vals.astype(float).copy()
    steps = np.full(len(xr), step0)
    evals = 0
    moves = np.concatenate([np.eye(rd), -np.eye(rd)], axis=0)
    for _ in range(iterations):
        active = steps > min_step
        if not active.any():
            break
        idx = np.flatnonzero(active)
        cand = xr[idx, None, :] + steps[idx, None, None] * moves[None, :, :]
        cand = cand.reshape(-1, rd)
        native = space.from_real(cand)
        nrm = space.norm(native)
        ok = nrm > 1e-14
        native = native / np.where(ok, nrm, 1.0)[:, None]
        cvals = _check_finite(objective(native))
        cvals = np.where(ok, cvals, -np.inf)
        evals += len(cand)
        cvals = cvals.reshape(len(idx), len(moves))
        j = np.argmax(cvals, axis=1)
        bestv = cvals[np.arange(len(idx)), j]
        better = bestv > vals[idx]
        win = idx[better]
        xr[win] = space.to_real(native.reshape(len(idx), len(moves), -1)[better, j[better]])
        vals[win] = bestv[better]
        lose = idx[~better]
        steps[lose] *= 0.5
    return space.from_real(xr), vals, evals


def maximize_on_sphere(space, objective: Callable[[np.ndarray], np.ndarray], budget: Budget,
                       lipschitz: Optional[float] = None, extra_starts: Optional[np.ndarray] = None,
                       use_grid: Optional[bool] = None) -> OptResult:
    """Maximize a batch objective over the unit sphere of ``space``.

    ``objective`` receives an ``(N, dim)`` array of unit vectors and returns
    ``N`` real values.  When the real dimension is at most 3 an exhaustive grid
    is evaluated as well; if a Lipschitz constant (with respect to the norm of
    ``space``) is supplied the result is then certified with
    ``gap = lipschitz * mesh``.
    """
    grid_mode = space.real_dim <= 3 if use_grid is None else use_grid
    evals = 0
    cands, cvals = [], []
    grid_value, mesh = None, math.inf
    if grid_mode:
        grid, mesh = sphere_grid(space, budget.grid_depth)
        gvals = _check_finite(objective(grid))
        evals += len(grid)
        gi = best_index(gvals, grid)
        grid_value = float(gvals[gi])
        top = np.argsort(-gvals, kind="stable")[: max(1, budget.starts // 2)]
        cands.append(grid[top])
        cvals.append(gvals[top])
    rand = space.sample_sphere(budget.starts, budget.seed)
    cands.append(rand)
    if extra_starts is not None and len(extra_starts):
        extra = np.asarray(extra_starts)
        extra = extra / space.norm(extra)[:, None]
        cands.append(extra)
    starts = np.concatenate(cands, axis=0)
    svals = _check_finite(objective(starts[len(cvals[0]) if cvals else 0:]))
    evals += len(svals)
    start_vals = np.concatenate(cvals + [svals]) if cvals else svals
    xs, vals, n_ev = _pattern_search_sphere(space, objective, starts, start_vals, budget.iterations)
    evals += n_ev
    bi = best_index(vals, xs)
    value = float(vals[bi])
    certified = bool(grid_mode and lipschitz is not None and math.isfinite(mesh))
    gap = float(lipschitz * mesh) if certified else math.inf
    return OptResult(value=value, argmax=xs[bi], certified=certified, gap=gap,
                     grid_value=grid_value, evaluations=evals,
                     extras={"mesh": mesh, "all_values": vals, "all_args": xs})


def minimize_on_sphere(space, objective, budget: Budget, lipschitz=None, extra_starts=None,
                       use_grid=None) -> OptResult:
    """Minimization counterpart of :func:`maximize_on_sphere` (value is the minimum)."""
    res = maximize_on_sphere(space, lambda z: -objective(z), budget, lipschitz, extra_starts, use_grid)
    res.value = -res.value
    if res.grid_value is not None:
        res.grid_value = -res.grid_value
    res.extras["all_values"] = -res.extras["all_values"]
    return res


# ---------------------------------------------------------------- constrained search

def maximize_constrained(space, dual_space, objective, constraint, budget: Budget,
                         starts: Optional[tuple[np.ndarray, np.ndarray]] = None) -> OptResult:
    """Maximize ``objective(x, f)`` over unit ``x`` and unit ``f`` with ``constraint(x, f) > 0``.

    The search alternates pattern moves in ``x`` and in ``f``; every accepted
    iterate is feasible.  ``argmax`` is the pair ``(x, f)`` stored as a tuple.
    Raises :class:`InfeasibleError` when none of the starts is feasible.
    """
    if starts is None:
        xs = space.sample_sphere(budget.starts, budget.seed)
        fs = dual_space.sample_sphere(budget.starts, budget.seed + 1)
    else:
        xs, fs = (np.asarray(s) for s in starts)
    slack = np.asarray(constraint(xs, fs))
    feas = slack > 0
    if not feas.any():
        raise InfeasibleError("no feasible starting pair")
    xs, fs = xs[feas], fs[feas]
    vals = _check_finite(objective(xs, fs))
    evals = len(vals)
    # keep the most promising starts only
    keep = np.argsort(-vals, kind="stable")[: max(budget.starts, 1)]
    xs, fs, vals = xs[keep], fs[keep], vals[keep]
    for _ in range(max(1, budget.iterations // 25)):
        improved = False
        for which in (0, 1):
            sp = space if which == 0 else dual_space
            other = fs if which == 0 else xs

            def obj(z, other=other, which=which, n=len(xs)):
                # z rows are grouped per start; rebuild pairs
                reps = len(z) // n
                oth = np.repeat(other, reps, axis=0) if reps > 1 else other
                a, b = (z, oth) if which == 0 else (oth, z)
                v = objective(a, b)
                return np.where(np.asarray(constraint(a, b)) > 0, v, -np.inf)

            cur = xs if which == 0 else fs
            new, nv, ne = _pattern_search_grouped(sp, obj, cur, vals, 25)
            evals += ne
            if np.any(nv > vals + 1e-15):
                improved = True
            if which == 0:
                xs = new
            else:
                fs = new
            vals = nv
        if not improved:
            break
    args = np.concatenate([space.to_real(xs), dual_space.to_real(fs)], axis=1)
    bi = best_index(vals, args)
    return OptResult(value=float(vals[bi]), argmax=(xs[bi], fs[bi]), certified=False,
                     evaluations=evals, extras={"all_values": vals})


def _pattern_search_grouped(space, objective, starts, start_vals, iterations,
                            step0=0.25, min_step=1e-10):
    """Pattern search where run ``i`` only uses partner ``i`` (objective sees grouped rows)."""
    rd = space.real_dim
    n = len(starts)
    xr = space.to_real(starts).astype(float)
    vals = start_vals.astype(float).copy()
    steps = np.full(n, step0)
    moves = np.concatenate([np.eye(rd), -np.eye(rd)], axis=0)
    evals = 0
    for _ in range(iterations):
        if not (steps > min_step).any():
            break
        cand = xr[:, None, :] + steps[:, None, None] * moves[None, :, :]
        native = space.from_real(cand.reshape(-1, rd))
        nrm = space.norm(native)
        native = native / np.where(nrm > 1e-14, nrm, 1.0)[:, None]
        # objective expects rows ordered as partner-major blocks
        native_b = native.reshape(n, len(moves), -1).transpose(1, 0, 2).reshape(n * len(moves), -1)
        cv = np.asarray(objective(native_b), dtype=float).reshape(len(moves), n).T
        if np.any(np.isnan(cv)):
            raise OptimizationError("objective returned NaN")
        evals += cv.size
        j = np.argmax(cv, axis=1)
        bv = cv[np.arange(n), j]
        better = bv > vals
        sel = native.reshape(n, len(moves), -1)[np.arange(n), j]
        xr[better] = space.to_real(sel[better])
        vals[better] = bv[better]
        steps[~better] *= 0.5
    return space.from_real(xr), vals, evals


# ---------------------------------------------------------------- operator sphere

def minimize_over_operator_sphere(shape: tuple[int, int], is_complex: bool,
                                  objective: Callable[[np.ndarray], np.ndarray],
                                  opnorm: Callable[[np.ndarray], np.ndarray],
                                  budget: Budget, extra_starts: Optional[np.ndarray] = None,
                                  use_grid: Optional[bool] = None,
                                  grid_per_axis: int = 6) -> OptResult:
    """Minimize ``objective`` over matrices of operator norm one.

    ``objective`` and ``opnorm`` both act on batches of shape ``(N, m, n)``.
    Every proposal is divided by its operator norm before evaluation, and
    proposals whose norm is below ``1e-9`` are rejected.  In grid mode (real
    matrix dimension at most 4) the cube-surface grid is evaluated too and
    ``gap`` is the covering radius of that grid in operator norm, which turns
    ``value - gap`` into a lower bound for any 1-Lipschitz objective.
    """
    m, n = shape
    rd = m * n * (2 if is_complex else 1)
    grid_mode = rd <= 4 if use_grid is None else use_grid
    rng = np.random.default_rng(budget.seed)

    def to_mat(v):
        v = np.asarray(v, dtype=float)
        if is_complex:
            half = v.shape[-1] // 2
            z = v[..., :half] + 1j * v[..., half:]
        else:
            z = v
        return z.reshape(v.shape[:-1] + (m, n))

    def to_vec(M):
        M = np.asarray(M).reshape(M.shape[0], -1)
        if is_complex:
            M = M.astype(complex)
            return np.concatenate([M.real, M.imag], axis=1)
        return M.real.astype(float)

    def normalize(vs):
        Ms = to_mat(vs)
        nr = np.asarray(opnorm(Ms), dtype=float)
        ok = nr >= 1e-9
        Ms = Ms / np.where(ok, nr, 1.0)[:, None, None]
        return Ms, ok

    def evaluate(vs):
        Ms, ok = normalize(vs)
        vals = np.full(len(vs), np.inf)
        if ok.any():
            vals[ok] = _check_finite(objective(Ms[ok]))
        return vals, Ms

    evals = 0
    pools, pvals = [], []
    grid_value, gap = None, math.inf
    if grid_mode:
        g = cube_surface_grid(rd, grid_per_axis, half=True)
        gv, gM = evaluate(g)
        evals += len(g)
        grid_value = float(gv.min())
        # covering radius: a unit matrix T sits in some cell c of the cube scaled
        # by ||T||_max; the cell has coordinate half-width h and its radial image
        # is within 2 * ||E_h|| / ||c|| of T, where E_h bounds the cell in norm.
        h = 1.0 / grid_per_axis
        signs = np.array(list(itertools.product((-1.0, 1.0), repeat=rd)))
        cell_norms = np.asarray(opnorm(to_mat(h * signs)), dtype=float)
        cn = float(cell_norms.max())
        min_c = float(np.asarray(opnorm(to_mat(g)), dtype=float).min())
        gap = 2.0 * cn / max(min_c - cn, 1e-12)
        order = np.argsort(gv, kind="stable")[: max(1, budget.starts // 2)]
        pools.append(to_vec(gM[order]))
        pvals.append(gv[order])
    starts = [rng.standard_normal((budget.starts, rd))]
    if extra_starts is not None and len(extra_starts):
        starts.append(to_vec(np.asarray(extra_starts)))
    starts = np.concatenate(starts, axis=0)
    sv, sM = evaluate(starts)
    evals += len(starts)
    pools.append(to_vec(sM))
    pvals.append(sv)
    xs = np.concatenate(pools, axis=0)
    vals = np.concatenate(pvals)
    keep = np.isfinite(vals)
    xs, vals = xs[keep], vals[keep]
    if not len(xs):
        raise OptimizationError("every proposal had operator norm below 1e-9")
    # pattern search (minimization) from the better half of the pool
    order = np.argsort(vals, kind="stable")[: max(2, budget.starts)]
    xs, vals = xs[order], vals[order]
    steps = np.full(len(xs), 0.25)
    moves = np.concatenate([np.eye(rd), -np.eye(rd)], axis=0)
    for _ in range(budget.iterations):
        act = np.flatnonzero(steps > 1e-7)
        if not len(act):
            break
        base = xs[act] / np.abs(xs[act]).max(axis=1, keepdims=True)
        cand = (base[:, None, :] + steps[act, None, None] * moves[None]).reshape(-1, rd)
        cv, cM = evaluate(cand)
        evals += len(cand)
        cv = cv.reshape(len(act), len(moves))
        j = np.argmin(cv, axis=1)
        bv = cv[np.arange(len(act)), j]
        better = bv < vals[act]
        cvec = to_vec(cM).reshape(len(act), len(moves), rd)
        win = act[better]
        xs[win] = cvec[better, j[better]]
        vals[win] = bv[better]
        steps[act[~better]] *= 0.5
    bi = best_index(-vals, xs)
    best = to_mat(xs[bi:bi + 1])[0]
    return OptResult(value=float(vals[bi]), argmax=best, certified=bool(grid_mode),
                     gap=gap, grid_value=grid_value, evaluations=evals,
                     extras={"all_values": vals, "all_args": to_mat(xs)})
