"""Numerical indices of spaces at a point and of operators.

``n(Z, u) = inf_{||z|| = 1} v(Z, u, z)`` and ``n_G = inf_{||T|| = 1} v_G(T)``.

Three routes are available and tagged on every report:

``structural``
    closed rules: one-dimensional spaces, l1/linf sums, rank-one products,
    block-diagonal sums and operators admitting a radius-zero direction;
``bruteforce``
    the radius is the maximum of ``|phi(z)|`` (or ``|y*(T x)|``) over a finite
    set of extreme face elements (aligned pairs), so ``{radius <= 1}`` is a
    polytope and the index is ``1 / max ||vertex||``.  Exact for polyhedral
    data, a certified lower bound otherwise;
``optimizer``
    the derivative-formula radius minimized over the unit sphere, which gives
    an upper bound (the lower end is 0 unless a grid certificate applies).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
import logging
import math
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
from scipy.linalg import null_space
from scipy.spatial import HalfspaceIntersection, QhullError

from .config import TOL
from .interval import Interval
from .numrange import (aligned_pairs, derivative_values, radius_search, v_radius_derivative,
                       _alignment_margin, _theta_grid)
from .operators import (Operator, adjoint, identity, normalize, op_norm_batch, op_norm_upper_screened,
                        op_norm_value, rank_one, same_space)
from .optimize import Budget, minimize_on_sphere, sphere_grid
from .spaces import AbsoluteSum, Lp, NoCertifiedFace, NormedSpace

log = logging.getLogger(__name__)

#: phases of the outer polygon replacing a complex modulus constraint
COMPLEX_PHASES = 64
#: vertex enumeration is attempted up to this real dimension
POLYTOPE_MAX_DIM = 6


@dataclass
class IndexReport:
    value: Interval
    witness: Optional[np.ndarray]
    method: str
    notes: list = dc_field(default_factory=list)

    @property
    def lower(self) -> float:
        return self.value.lower

    @property
    def upper(self) -> float:
        return self.value.upper

    def __str__(self):
        return f"{self.value} ({self.method})"


# ---------------------------------------------------------------- polytope route

def _real_rows(C: np.ndarray, complex_coords: bool) -> np.ndarray:
    """Real halfspace normals bounding ``{t : |C t| <= 1}`` from outside.

    ``C`` holds linear functionals in a coordinate system; with
    ``complex_coords`` the coordinates are complex and the real unknown is
    ``[Re t, Im t]``, and each modulus constraint is relaxed to a polygon.
    """
    if not complex_coords and not np.iscomplexobj(C):
        R = np.real(C)
        return np.concatenate([R, -R])
    if complex_coords:
        C = np.concatenate([C, 1j * C], axis=1)
    ph = np.exp(-2j * np.pi * np.arange(COMPLEX_PHASES) / COMPLEX_PHASES)
    return np.real(ph[:, None, None] * C[None]).reshape(-1, C.shape[1])


def polytope_max(rows: np.ndarray, norm_upper: Callable[[np.ndarray], np.ndarray]):
    """``max ||t||`` over ``{t : rows @ t <= 1}``.

    Returns ``(max_value, argmax)``, or ``(inf, null_direction)`` when the
    region is unbounded.
    """
    rows = np.asarray(rows, dtype=float)
    d = rows.shape[1]
    sc = np.abs(rows).max()
    if sc == 0:
        return math.inf, np.eye(d)[0]
    # round and deduplicate halfspaces before the rank test and qhull
    R = np.unique(np.round(rows / sc, 13), axis=0) * sc
    if len(R) < d:
        return math.inf, null_space(R)[:, 0]
    _, s, vh = np.linalg.svd(R, full_matrices=False)
    if s[-1] <= 1e-10 * s[0]:
        return math.inf, vh[-1]
    if d == 1:
        pos = R[R[:, 0] > 0, 0]
        neg = R[R[:, 0] < 0, 0]
        verts = np.array([[1.0 / pos.max()], [1.0 / neg.min()]])
    else:
        hs = np.hstack([R, -np.ones((len(R), 1))])
        verts = _intersections(hs, d)
    vals = np.asarray(norm_upper(verts), dtype=float)
    k = int(np.argmax(vals))
    return float(vals[k]), verts[k]


def _intersections(hs: np.ndarray, d: int) -> np.ndarray:
    try:
        return HalfspaceIntersection(hs, np.zeros(d)).intersections
    except QhullError:
        # nearly coplanar halfspaces from dense sampling: joggle the input
        log.debug("qhull precision failure on %d halfspaces; retrying with joggle", len(hs))
        return HalfspaceIntersection(hs, np.zeros(d), qhull_options="QJ").intersections


def _abstract_polytope(space: NormedSpace, u: np.ndarray) -> Optional[IndexReport]:
    if space.real_dim > POLYTOPE_MAX_DIM:
        return None
    F = space.face(u)
    rows = _real_rows(F, space.is_complex)
    to_native = space.from_real
    mx, arg = polytope_max(rows, lambda V: space.norm(to_native(V)))
    if math.isinf(mx):
        z = to_native(arg)
        z = z / space.norm(z)
        return IndexReport(Interval(0.0, 0.0), z, "bruteforce",
                           ["face functionals share a common null direction"])
    z = to_native(arg)
    z = z / space.norm(z)
    n = 1.0 / mx
    # the upper end is the exact face radius at the extremal vertex
    up = float(np.abs(F @ z).max())
    if space.is_complex:
        notes = ["complex moduli relaxed to a 64-gon; lower end certified"]
    else:
        notes = []
    return IndexReport(Interval(min(n, up), max(n, up)), z, "bruteforce", notes)


# ---------------------------------------------------------------- abstract index

def face_radius(space: NormedSpace, u, Z) -> np.ndarray:
    """``max |phi(z)|`` over the extreme points of the face at ``u`` (vectorized in ``Z``)."""
    F = space.face(u)
    return np.abs(np.asarray(Z) @ F.T).max(axis=-1)


def derivative_radius(space: NormedSpace, u, Z, alphas=(1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7),
                      theta_count: int = 64) -> np.ndarray:
    """Derivative-formula upper bound for ``v(Z, u, z)`` over a batch ``Z``."""
    Z = np.asarray(Z)
    u = np.asarray(u)
    al = np.asarray(alphas, dtype=float)
    th = _theta_grid(space.is_complex, theta_count)
    W = u + al[None, :, None, None] * th[None, None, :, None] * Z[:, None, None, :]
    vals = space.norm(W)
    g = (vals - space.norm(u)) / al[None, :, None]
    return g.max(axis=2).min(axis=1)


def abstract_index(space: NormedSpace, u, budget: Budget = Budget(), method: str = "auto") -> IndexReport:
    """``n(Z, u)`` for a unit vector ``u``.

    ``method`` is ``auto`` (structural, then brute force, then optimizer),
    ``structural``, ``bruteforce`` or ``optimizer``.
    """
    u = space.vectors(u)
    nu = float(space.norm(u))
    if abs(nu - 1.0) > TOL.unit:
        raise ValueError(f"index point must have norm one, has {nu}")
    if method in ("auto", "structural"):
        rep = _abstract_structural(space, u, budget)
        if rep is not None or method == "structural":
            if rep is None:
                raise ValueError("no structural rule applies")
            return rep
    if method in ("auto", "bruteforce"):
        rep = _abstract_polytope(space, u)
        if rep is not None or method == "bruteforce":
            if rep is None:
                raise ValueError("brute force needs real dimension at most 6")
            return rep
    if method not in ("auto", "optimizer"):
        raise ValueError(f"unknown method {method!r}")
    return _abstract_optimizer(space, u, budget)


def _abstract_structural(space, u, budget) -> Optional[IndexReport]:
    if space.dim == 1:
        return IndexReport(Interval(1.0, 1.0), None, "structural", ["one-dimensional space"])
    fam = space.family
    if not isinstance(fam, AbsoluteSum) or fam.kind() is None:
        return None
    blocks = fam.split(u)
    norms = np.array([float(p.norm(b)) for p, b in zip(fam.parts, blocks)])
    o = fam.offsets
    if fam.kind() == "l1":
        nz = np.flatnonzero(norms > 1e-14)
        if len(nz) > 1:
            # u spreads over two blocks: moving mass between them is invisible
            i, j = nz[:2]
            z = np.zeros(space.dim, dtype=u.dtype)
            z[o[i]:o[i + 1]] = blocks[i] / norms[i] * norms[j]
            z[o[j]:o[j + 1]] = -blocks[j] / norms[j] * norms[i]
            z = z / space.norm(z)
            return IndexReport(Interval(0.0, 0.0), z, "structural",
                               ["l1 sum: point with two nonzero blocks"])
        j = int(nz[0])
        sub = abstract_index(fam.parts[j], blocks[j], budget)
        w = _embed(sub.witness, space, j)
        return IndexReport(sub.value, w, "structural" if sub.method == "structural" else sub.method,
                           [f"l1 sum: single block {j}"] + sub.notes)
    # linf
    if np.any(norms < 1.0 - 1e-12):
        j = int(np.argmin(norms))
        z = np.zeros(space.dim, dtype=u.dtype)
        for i, p in enumerate(fam.parts):
            if i != j:
                continue
            e = p.sample_sphere(1, 0)[0]
            z[o[i]:o[i + 1]] = e
        return IndexReport(Interval(0.0, 0.0), z / space.norm(z), "structural",
                           ["linf sum: a block of norm below one"])
    subs = [abstract_index(p, b, budget) for p, b in zip(fam.parts, blocks)]
    lo = min(s.lower for s in subs)
    hi = min(s.upper for s in subs)
    j = int(np.argmin([s.upper for s in subs]))
    methods = {s.method for s in subs}
    return IndexReport(Interval(lo, hi), _embed(subs[j].witness, space, j),
                       "structural" if methods == {"structural"} else "structural",
                       ["linf sum: minimum over blocks"] + [n for s in subs for n in s.notes])


def _embed(w, space, j):
    if w is None:
        return None
    fam = space.family
    o = fam.offsets
    z = np.zeros(space.dim, dtype=np.asarray(w).dtype)
    z[o[j]:o[j + 1]] = w
    return z


def _abstract_optimizer(space, u, budget) -> IndexReport:
    F = space.face(u)

    def upper_fn(Z):
        return derivative_radius(space, u, Z)

    res = minimize_on_sphere(space, upper_fn, budget)
    up = float(res.value)
    lo = 0.0
    notes = []
    if space.real_dim <= 3:
        # v(Z, u, .) is a seminorm below the norm, hence 1-Lipschitz: a grid of
        # covering radius h gives min over the grid minus h as a lower bound
        grid, h = sphere_grid(space, budget.grid_depth)
        exact = np.abs(grid @ F.T).max(axis=1)
        lo = max(0.0, float(exact.min()) - h)
        notes.append(f"grid certificate with covering radius {h:.3g}")
    lo = min(lo, up)
    return IndexReport(Interval(lo, up), res.argmax, "optimizer", notes)


# ---------------------------------------------------------------- operator index

def n_index_upper(G: Operator, budget: Budget = Budget(), extra_starts=None) -> IndexReport:
    """Upper bound for ``n_G`` from a search over unit ``T`` (lower end 0)."""
    res = radius_search(G, budget, extra_starts=extra_starts)
    T = res.argmax
    # re-evaluate on the full step and phase schedule: res.value used a single step
    up = v_radius_derivative(G, T).upper
    return IndexReport(Interval(0.0, max(up, 0.0)), T, "optimizer",
                       [f"search evaluated {res.evaluations} matrices"])


def _matrix_real_rows(G: Operator, resolution: int) -> tuple[np.ndarray, float]:
    xs, ys, _ = aligned_pairs(G, resolution)
    m, n = G.shape
    L = np.einsum("km,kn->kmn", ys, xs).reshape(len(xs), m * n)
    return _real_rows(L, G.is_complex), _alignment_margin(G)


def matrix_real_dim(G: Operator) -> int:
    m, n = G.shape
    return m * n * (2 if G.is_complex else 1)


def n_index_brute_force(G: Operator, mesh: float = 0.02, max_dim: int = 4) -> IndexReport:
    """Enclosure of ``n_G`` from the polytope of matrices with pair radius at most one.

    ``mesh`` sets the boundary sampling of norming vectors on 2-dimensional
    domains without extreme points.  Requires real matrix dimension at most
    ``max_dim``.
    """
    rd = matrix_real_dim(G)
    if rd > max_dim:
        raise ValueError(f"brute force needs real matrix dimension <= {max_dim}, got {rd}")
    X, Y = G.domain, G.codomain
    m, n = G.shape
    resolution = max(64, int(math.ceil(2 * math.pi / mesh)))
    rows, margin = _matrix_real_rows(G, resolution)

    def to_mat(V):
        V = np.asarray(V, dtype=float)
        if G.is_complex:
            h = V.shape[-1] // 2
            V = V[..., :h] + 1j * V[..., h:]
        return V.reshape(V.shape[:-1] + (m, n))

    mx, arg = polytope_max(rows, lambda V: op_norm_upper_screened(to_mat(V), X, Y))
    T = to_mat(arg[None])[0]
    T = T / op_norm_value(T[None], X, Y)[0]
    est = v_radius_derivative(G, T)
    notes = [f"{len(rows)} halfspaces"]
    if math.isinf(mx):
        notes.append("pair functionals have a common null direction")
        lower = 0.0
    else:
        lower = max(0.0, 1.0 / mx - margin)
    upper = max(est.upper, lower)
    return IndexReport(Interval(lower, upper), T, "bruteforce", notes)


def n_index_structural(G: Operator, budget: Budget = Budget()) -> Optional[IndexReport]:
    """Apply the structural rules in order; ``None`` when none applies."""
    for rule in (_rank_one_rule, _block_rule, _radius_zero_rule):
        rep = rule(G, budget)
        if rep is not None:
            return rep
    return None


def n_index(G: Operator, budget: Budget = Budget(), mesh: float = 0.02, method: str = "auto") -> IndexReport:
    """``n_G`` by the first applicable route (structural, brute force, optimizer)."""
    if method in ("auto", "structural"):
        rep = n_index_structural(G, budget)
        if rep is not None or method == "structural":
            if rep is None:
                raise ValueError("no structural rule applies")
            return rep
    if method in ("auto", "bruteforce"):
        if matrix_real_dim(G) <= 4 or method == "bruteforce":
            return n_index_brute_force(G, mesh)
    if method not in ("auto", "optimizer"):
        raise ValueError(f"unknown method {method!r}")
    return n_index_upper(G, budget)


def _unit_norm(G: Operator) -> bool:
    nr = G.norm()
    return abs(nr.lower - 1.0) <= 1e-8


def _rank_one_rule(G: Operator, budget) -> Optional[IndexReport]:
    M = G.matrix
    if "rank_one" in G._cache:
        x0s, y0 = G._cache["rank_one"]
    else:
        u, s, vh = np.linalg.svd(M)
        if s[0] == 0 or (len(s) > 1 and s[1] > 1e-12 * s[0]):
            return None
        if not _unit_norm(G):
            return None
        y = u[:, 0] * s[0]
        ny = float(G.codomain.norm(y))
        y0 = y / ny
        x0s = vh[0] * ny
        x0s = x0s / float(G.domain.dual_norm(x0s))
    a = abstract_index(G.domain.dual(), x0s, budget)
    b = abstract_index(G.codomain, y0, budget)
    return IndexReport(a.value * b.value, None, "structural",
                       [f"rank one: n(X*, x0*) in {a.value} ({a.method}), n(Y, y0) in {b.value} ({b.method})"])


def _blocks_of(G: Operator):
    """Split ``G`` into summand maps ``X_j -> Y_pi(j)`` for a permutation ``pi``.

    Permuting the summands of an l1 or linf sum is an isometry, so a
    block-monomial operator has the same index as the diagonal sum of its
    blocks.
    """
    if "blocks" in G._cache:
        kind, ops = G._cache["blocks"]
        return kind, ops, tuple(range(len(ops)))
    fx, fy = G.domain.family, G.codomain.family
    if not (isinstance(fx, AbsoluteSum) and isinstance(fy, AbsoluteSum)):
        return None
    if fx.kind() is None or fx.kind() != fy.kind() or len(fx.parts) != len(fy.parts):
        return None
    ox, oy = fx.offsets, fy.offsets
    M = G.matrix
    k = len(fx.parts)
    perm = []
    for j in range(k):
        rows = [i for i in range(k) if np.any(M[oy[i]:oy[i + 1], ox[j]:ox[j + 1]] != 0)]
        if len(rows) != 1:
            return None
        perm.append(rows[0])
    if sorted(perm) != list(range(k)):
        return None
    ops = tuple(Operator(fx.parts[j], fy.parts[perm[j]], M[oy[perm[j]]:oy[perm[j] + 1], ox[j]:ox[j + 1]])
                for j in range(k))
    return fx.kind(), ops, tuple(perm)


def _block_rule(G: Operator, budget) -> Optional[IndexReport]:
    bl = _blocks_of(G)
    if bl is None:
        return None
    kind, ops, perm = bl
    if len(ops) < 2 or not all(_unit_norm(B) for B in ops):
        return None
    reps = [n_index(B, budget) for B in ops]
    lo = min(r.lower for r in reps)
    hi = min(r.upper for r in reps)
    j = int(np.argmin([r.upper for r in reps]))
    W = None
    if reps[j].witness is not None:
        fx, fy = G.domain.family, G.codomain.family
        wj = np.asarray(reps[j].witness)
        W = np.zeros(G.shape, dtype=complex if (G.is_complex or np.iscomplexobj(wj)) else float)
        oy, ox = fy.offsets, fx.offsets
        i = perm[j]
        W[oy[i]:oy[i + 1], ox[j]:ox[j + 1]] = wj
    shape = "diagonal" if perm == tuple(range(len(ops))) else "block-monomial"
    return IndexReport(Interval(lo, hi), W, "structural",
                       [f"{kind} {shape} sum of {len(ops)} blocks; minimum at block {j}"]
                       + [f"block {i}: {r.value} ({r.method})" for i, r in enumerate(reps)])


def _is_real_euclidean(S: NormedSpace) -> bool:
    return (not S.is_complex and S.dim >= 2 and isinstance(S.family, Lp) and S.family.p == 2)


def _skew(a, b):
    return np.outer(b, a) - np.outer(a, b)


def _radius_zero_rule(G: Operator, budget) -> Optional[IndexReport]:
    """Real Euclidean factors and complex structures carry invisible directions."""
    M = G.matrix
    X, Y = G.domain, G.codomain
    cands = []
    if _is_real_euclidean(Y):
        _, _, vh = np.linalg.svd(M)
        y = M @ vh[0]
        w = _orth(y)
        cands.append((_skew(y, w) @ M, "rotation on the Euclidean codomain composed with G"))
    if _is_real_euclidean(X):
        _, _, vh = np.linalg.svd(M)
        x = vh[0]
        w = _orth(x)
        cands.append((M @ _skew(x, w), "G composed with a rotation of the Euclidean domain"))
    for S, side in ((X, "domain"), (Y, "codomain")):
        J = _complex_structure(S)
        if J is not None:
            cands.append((M @ J if side == "domain" else J @ M,
                          f"isometric complex structure on the {side}"))
    for T, why in cands:
        nt = op_norm_value(T[None], X, Y)[0]
        if nt < 1e-9:
            continue
        T = T / nt
        est = v_radius_derivative(G, T)
        if est.upper <= 1e-6:
            return IndexReport(Interval(0.0, 0.0), T, "structural",
                               [f"radius zero: {why} (v upper {est.upper:.2e})"])
    return None


def _orth(v):
    v = np.real(v)
    k = int(np.argmin(np.abs(v)))
    e = np.zeros_like(v)
    e[k] = 1.0
    w = e - (e @ v) / (v @ v) * v
    return w / np.linalg.norm(w)


def _complex_structure(S: NormedSpace) -> Optional[np.ndarray]:
    # x -> i x on a realified space: pair coordinate k with k + d/2
    if S.is_complex or S.dim % 2 or S.dim < 2 or _is_real_euclidean(S):
        return None
    h = S.dim // 2
    J = np.zeros((S.dim, S.dim))
    J[h:, :h] = np.eye(h)
    J[:h, h:] = -np.eye(h)
    P = S.sample_sphere(64, 3)
    if not np.allclose(S.norm(P @ J.T), 1.0, atol=1e-10):
        return None
    return J


# ---------------------------------------------------------------- checks and scans

def characterization_check(G: Operator, lower: float, count: int = 100, seed: int = 0,
                           tol: float = 1e-9) -> tuple[bool, float]:
    """Test ``max_theta ||G + theta T|| >= 1 + lower ||T||`` on random ``T``.

    Returns ``(holds, worst_slack)``; the left side uses attained norms and the
    right side certified ones, so a failure is a genuine counterexample up to
    the phase grid.
    """
    rng = np.random.default_rng(seed)
    m, n = G.shape
    X, Y = G.domain, G.codomain
    if G.is_complex:
        Ts = rng.standard_normal((count, m, n)) + 1j * rng.standard_normal((count, m, n))
    else:
        Ts = rng.standard_normal((count, m, n))
    _, tup = op_norm_batch(Ts, X, Y)
    scales = np.exp(rng.uniform(np.log(1e-2), np.log(3.0), count))
    Ts = Ts / tup[:, None, None] * scales[:, None, None]
    th = _theta_grid(G.is_complex, 256)
    Ms = G.matrix[None, None] + th[None, :, None, None] * Ts[:, None]
    vals = op_norm_value(Ms.reshape((-1, m, n)), X, Y).reshape(count, len(th)).max(axis=1)
    _, tn = op_norm_batch(Ts, X, Y)
    slack = vals - (G.norm().lower + lower * tn)
    worst = float(slack.min())
    return bool(worst >= -tol), worst


def index_over_parameters(build: Callable, params: Iterable, budget: Budget = Budget(), **kw) -> list:
    """Evaluate an index over a parameter grid.

    ``build(param)`` returns an ``Operator`` or a ``(space, u)`` pair.
    """
    out = []
    for p in params:
        obj = build(p)
        if isinstance(obj, Operator):
            rep = n_index(obj, budget, **kw)
        else:
            rep = abstract_index(obj[0], obj[1], budget, **kw)
        out.append((p, rep))
    return out


def scan_operators(X: NormedSpace, Y: NormedSpace, sample_count: int, seed: int = 0,
                   extra: Sequence[Operator] = ()) -> list:
    """Norm-one operators ``X -> Y`` used by the value scan.

    The identity comes first when ``X`` and ``Y`` coincide, then rank-one maps
    from extreme points, one rank-one map at a smooth (random) point of the
    dual sphere, ``extra`` and finally ``sample_count`` random matrices.
    """
    ops = []
    if same_space(X, Y):
        ops.append(identity(X))
    Xd = X.dual()
    ex, ey = Xd.extreme_points(), Y.extreme_points()
    if ex is not None and ey is not None:
        for f in ex[: 2]:
            for y in ey[: 2]:
                ops.append(rank_one(f, y, X, Y))
    # a random dual direction is a smooth point of the dual sphere almost surely
    f = Xd.sample_sphere(len(ex) + 1 if ex is not None else 1, seed=seed + 7)[-1]
    y = Y.sample_sphere(1, seed=seed + 8)[0]
    ops.append(rank_one(f / Xd.norm(f), y / Y.norm(y), X, Y))
    ops.extend(extra)
    rng = np.random.default_rng(seed)
    for _ in range(sample_count):
        M = rng.standard_normal((Y.dim, X.dim))
        if X.is_complex:
            M = M + 1j * rng.standard_normal((Y.dim, X.dim))
        ops.append(normalize(Operator(X, Y, M)))
    return ops


def index_value_scan(X: NormedSpace, Y: NormedSpace, sample_count: int = 4,
                     budget: Budget = Budget(), seed: int = 0, extra: Sequence[Operator] = (),
                     dedupe: float = 1e-3) -> list:
    """Sampled values of ``n_G`` over norm-one ``G : X -> Y`` with witnesses.

    Each operator is evaluated structurally when a rule applies and by the
    optimizer otherwise; reports whose enclosures agree to ``dedupe`` are
    merged.
    """
    out = []
    for G in scan_operators(X, Y, sample_count, seed, extra):
        rep = n_index_structural(G, budget)
        if rep is None:
            rep = n_index_upper(G, budget)
        rep.notes.insert(0, f"G = {G.label or 'matrix'}: {np.array2string(G.matrix, precision=6)}")
        if any(abs(r.lower - rep.lower) <= dedupe and abs(r.upper - rep.upper) <= dedupe for r in out):
            continue
        out.append(rep)
    return out


def adjoint_compare(G: Operator, budget: Budget = Budget(), mesh: float = 0.02,
                    method: str = "auto") -> dict:
    """Indices of ``G`` and its adjoint; the adjoint index never exceeds ``n_G``."""
    rG = n_index(G, budget, mesh, method)
    rA = n_index(adjoint(G), budget, mesh, method)
    return {"G": rG, "adjoint": rA,
            "consistent": rA.lower <= rG.upper + 1e-9,
            "overlap": rA.value.overlaps(rG.value, 1e-9)}
