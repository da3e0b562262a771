"""Finite-dimensional normed spaces with closed-form norms, duals and faces.

A space is a field, a dimension and a norm family.  Vectors are numpy arrays
whose last axis has length ``dim``; every routine is vectorized over leading
axes.  Complex spaces also accept the real view ``[re..., im...]`` of length
``2 * dim``.

Functionals act through the bilinear pairing ``f(x) = sum_i f_i x_i``; with this
convention the Banach adjoint of a matrix is its transpose.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
import enum
import itertools
import math
from typing import Optional, Sequence

import numpy as np

from .config import TOL
from .optimize import Budget, golden_max, maximize_on_sphere

#: angles used for the boundary polygon of 2-dimensional balls
BOUNDARY_POINTS = 720


class Field(str, enum.Enum):
    REAL = "real"
    COMPLEX = "complex"


class NoCertifiedFace(RuntimeError):
    """The face of a vector could not be computed to the required accuracy."""


# ---------------------------------------------------------------- families

class NormFamily:
    """Base class for norm families; subclasses implement the closed forms."""

    #: the norm is invariant under coordinatewise modulus (|x_i| = |y_i| => ||x|| = ||y||)
    absolute = True

    def validate(self, dim: int, fld: Field) -> None:
        pass

    def norm(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def dual_space(self, space: "NormedSpace") -> "NormedSpace":
        return NormedSpace(space.field, space.dim, DualOf(space), f"({space.label})*")

    def nonneg_face(self, a: np.ndarray, space: "NormedSpace") -> Optional[np.ndarray]:
        """Face elements at a nonnegative unit vector, or ``None`` without a closed form."""
        return None

    def face(self, u: np.ndarray, space: "NormedSpace") -> Optional[np.ndarray]:
        if not self.absolute:
            return None
        a = np.abs(u)
        base = self.nonneg_face(a, space)
        if base is None:
            return None
        return _phase_lift(base, u, a, space.is_complex)

    def extreme_points(self, space: "NormedSpace") -> Optional[np.ndarray]:
        return None

    def corners(self, space: "NormedSpace") -> np.ndarray:
        """Unit vectors where the sphere of a 2-dimensional real ball may have a kink."""
        ext = space.extreme_points()
        return ext if ext is not None else np.zeros((0, space.dim))

    def flat_normals(self, space: "NormedSpace") -> np.ndarray:
        """Dual unit vectors exposing segments of the sphere (2-dimensional real case)."""
        return np.zeros((0, space.dim))

    def short(self) -> str:
        return type(self).__name__


def _phase_lift(base: np.ndarray, u: np.ndarray, a: np.ndarray, is_complex: bool) -> np.ndarray:
    """Transport face elements at ``|u|`` to ``u`` for an absolute norm."""
    zero = a <= 1e-300
    if not is_complex:
        sgn = np.where(zero, 1.0, np.sign(u))
        return _unique_rows(base * sgn)
    ph = np.where(zero, 1.0, np.conj(u) / np.where(zero, 1.0, a))
    out = base.astype(complex) * ph
    zi = np.flatnonzero(zero)
    if len(zi) == 0:
        return _unique_rows(out)
    # coordinates where u vanishes take every phase; keep a quarter-turn grid
    phases = np.exp(0.5j * np.pi * np.arange(4))
    rows = []
    for r in out:
        if np.all(np.abs(r[zi]) == 0):
            rows.append(r)
            continue
        for combo in itertools.islice(itertools.product(phases, repeat=len(zi)), 256):
            rr = r.copy()
            rr[zi] = np.abs(r[zi]) * np.array(combo)
            rows.append(rr)
    return _unique_rows(np.array(rows))


def _unique_rows(rows: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    rows = np.atleast_2d(rows)
    keep = []
    for r in rows:
        if not any(np.max(np.abs(r - k)) <= tol for k in keep):
            keep.append(r)
    return np.array(keep)


def _sign_vectors(d: int) -> np.ndarray:
    return np.array(list(itertools.product((1.0, -1.0), repeat=d)))


@dataclass(frozen=True)
class Lp(NormFamily):
    p: float

    def validate(self, dim, fld):
        if not (self.p >= 1.0):
            raise ValueError(f"Lp needs p >= 1, got {self.p}")

    def norm(self, x):
        a = np.abs(x)
        p = self.p
        if p == 1:
            return a.sum(axis=-1)
        if math.isinf(p):
            return a.max(axis=-1)
        if p == 2:
            return np.sqrt((a * a).sum(axis=-1))
        m = a.max(axis=-1, keepdims=True)
        safe = np.where(m > 0, m, 1.0)
        return (m[..., 0] * ((a / safe) ** p).sum(axis=-1) ** (1.0 / p))

    def conjugate(self) -> float:
        if self.p == 1:
            return math.inf
        if math.isinf(self.p):
            return 1.0
        return self.p / (self.p - 1.0)

    def dual_space(self, space):
        return NormedSpace(space.field, space.dim, Lp(self.conjugate()))

    def nonneg_face(self, a, space):
        p = self.p
        d = len(a)
        if p == 1:
            zero = np.flatnonzero(a <= 0)
            base = np.ones(d)
            if not len(zero):
                return base[None]
            rows = []
            for s in itertools.product((1.0, -1.0), repeat=min(len(zero), 10)):
                r = base.copy()
                r[zero[: len(s)]] = s
                rows.append(r)
            return np.array(rows)
        if math.isinf(p):
            act = np.flatnonzero(a >= 1.0 - 1e-10)
            return np.eye(d)[act]
        f = a ** (p - 1.0)
        return (f / self.dual_space(space).family.norm(f))[None]

    def extreme_points(self, space):
        if space.is_complex:
            return None
        d = space.dim
        if d == 1:
            return np.array([[1.0], [-1.0]])
        if self.p == 1:
            return np.concatenate([np.eye(d), -np.eye(d)])
        if math.isinf(self.p):
            return _sign_vectors(d)
        return None

    def flat_normals(self, space):
        if space.is_complex:
            return np.zeros((0, space.dim))
        dual = Lp(self.conjugate())
        ext = dual.extreme_points(NormedSpace(space.field, space.dim, dual))
        return ext if ext is not None else np.zeros((0, space.dim))

    def short(self):
        return f"l{self.p:g}"


@dataclass(frozen=True)
class WeightedMaxRoot(NormFamily):
    """``max{|x1|, sqrt(r|x1|^2 + |x2|^2)}`` on the plane."""

    r: float

    def validate(self, dim, fld):
        if dim != 2:
            raise ValueError("WeightedMaxRoot is 2-dimensional")
        if not (0.0 <= self.r <= 1.0):
            raise ValueError(f"WeightedMaxRoot needs r in [0, 1], got {self.r}")

    def norm(self, x):
        a1 = np.abs(x[..., 0])
        a2 = np.abs(x[..., 1])
        return np.maximum(a1, np.sqrt(self.r * a1 * a1 + a2 * a2))

    def nonneg_face(self, a, space):
        n = float(self.norm(a))
        a = a / n
        rows = []
        if a[0] >= 1.0 - 1e-10:
            rows.append([1.0, 0.0])
        if math.sqrt(self.r * a[0] ** 2 + a[1] ** 2) >= 1.0 - 1e-10:
            g = np.array([self.r * a[0], a[1]])
            g = g / math.sqrt(self.r * a[0] ** 2 + a[1] ** 2)
            rows.append(g)
        return np.array(rows, dtype=float)

    def corners(self, space):
        if space.is_complex:
            return np.zeros((0, 2))
        s = math.sqrt(1.0 - self.r)
        return _unique_rows(np.array([[1.0, s], [1.0, -s], [-1.0, s], [-1.0, -s]]))

    def flat_normals(self, space):
        if space.is_complex:
            return np.zeros((0, 2))
        return np.array([[1.0, 0.0], [-1.0, 0.0]])

    def short(self):
        return f"wmr{self.r:g}"


class _PolyMixin:
    """Helpers for norms given as ``max_k |a_k . x|``."""

    def functionals(self) -> np.ndarray:
        raise NotImplementedError

    def _real_face(self, u):
        A = self.functionals()
        vals = A @ u
        n = np.abs(vals).max()
        act = np.flatnonzero(np.abs(vals) >= n * (1.0 - 1e-10))
        return _unique_rows(A[act] * np.sign(vals[act])[:, None])


@dataclass(frozen=True)
class GammaNorm(_PolyMixin, NormFamily):
    """``max{|x2|, |x1| + (1 - gamma)|x2|}`` on the plane."""

    gamma: float

    def validate(self, dim, fld):
        if dim != 2:
            raise ValueError("GammaNorm is 2-dimensional")
        if not (0.0 <= self.gamma <= 1.0):
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")

    def functionals(self):
        c = 1.0 - self.gamma
        return np.array([[0.0, 1.0], [1.0, c], [1.0, -c]])

    def norm(self, x):
        a1, a2 = np.abs(x[..., 0]), np.abs(x[..., 1])
        return np.maximum(a2, a1 + (1.0 - self.gamma) * a2)

    def dual_space(self, space):
        return NormedSpace(space.field, 2, GammaDual(self.gamma))

    def nonneg_face(self, a, space):
        return self._real_face(a)

    def extreme_points(self, space):
        if space.is_complex:
            return None
        g = self.gamma
        return _unique_rows(np.array([[1, 0], [-1, 0], [g, 1], [-g, 1], [g, -1], [-g, -1]], float))

    def flat_normals(self, space):
        return GammaDual(self.gamma).extreme_points(space)

    def short(self):
        return f"gamma{self.gamma:g}"


@dataclass(frozen=True)
class GammaDual(_PolyMixin, NormFamily):
    """``max{|x1|, gamma|x1| + |x2|}`` on the plane."""

    gamma: float

    def validate(self, dim, fld):
        GammaNorm(self.gamma).validate(dim, fld)

    def functionals(self):
        g = self.gamma
        return np.array([[1.0, 0.0], [g, 1.0], [-g, 1.0]])

    def norm(self, x):
        a1, a2 = np.abs(x[..., 0]), np.abs(x[..., 1])
        return np.maximum(a1, self.gamma * a1 + a2)

    def dual_space(self, space):
        return NormedSpace(space.field, 2, GammaNorm(self.gamma))

    def nonneg_face(self, a, space):
        return self._real_face(a)

    def extreme_points(self, space):
        if space.is_complex:
            return None
        c = 1.0 - self.gamma
        return _unique_rows(np.array([[0, 1], [0, -1], [1, c], [1, -c], [-1, c], [-1, -c]], float))

    def flat_normals(self, space):
        return GammaNorm(self.gamma).extreme_points(space)

    def short(self):
        return f"gammadual{self.gamma:g}"


@dataclass(frozen=True, eq=False)
class Polyhedral(_PolyMixin, NormFamily):
    """``max_k |a_k . x|`` for real functionals ``a_k`` spanning the dual."""

    rows: np.ndarray

    def __post_init__(self):
        A = np.array(self.rows, dtype=float)
        if A.ndim != 2 or not np.all(np.isfinite(A)):
            raise ValueError("polyhedral functionals must be a finite 2-d array")
        object.__setattr__(self, "rows", A)
        object.__setattr__(self, "_cache", {})

    @property
    def absolute(self):
        c = self._cache
        if "absolute" not in c:
            V = self._vertices()
            ok = True
            for i in range(self.rows.shape[1]):
                W = V.copy()
                W[:, i] *= -1
                ok = ok and bool(np.allclose(self.norm(W), 1.0, atol=1e-10))
            c["absolute"] = ok
        return c["absolute"]

    def validate(self, dim, fld):
        if fld is not Field.REAL:
            raise ValueError("polyhedral norms are real")
        if self.rows.shape[1] != dim:
            raise ValueError("functional length differs from dimension")
        if np.linalg.matrix_rank(self.rows) < dim:
            raise ValueError("polyhedral functionals do not span the dual; not a norm")

    def functionals(self):
        return self.rows

    def norm(self, x):
        return np.abs(np.asarray(x) @ self.rows.T).max(axis=-1)

    def _vertices(self) -> np.ndarray:
        c = self._cache
        if "vertices" not in c:
            c["vertices"] = polytope_vertices(self.rows)
        return c["vertices"]

    def dual_space(self, space):
        V = self._vertices()
        return NormedSpace(Field.REAL, space.dim, Polyhedral(_half_of_symmetric(V)))

    def face(self, u, space):
        return self._real_face(np.real(u))

    def extreme_points(self, space):
        return self._vertices()

    def flat_normals(self, space):
        A = self.rows
        n = np.abs(A @ self._vertices().T).max(axis=1)
        A = A / n[:, None]
        return _unique_rows(np.concatenate([A, -A]))

    def short(self):
        return f"poly{len(self.rows)}"


def _half_of_symmetric(V: np.ndarray) -> np.ndarray:
    keep = []
    for v in V:
        if not any(np.max(np.abs(v + k)) < 1e-10 or np.max(np.abs(v - k)) < 1e-10 for k in keep):
            keep.append(v)
    return np.array(keep)


def polytope_vertices(A: np.ndarray) -> np.ndarray:
    """Vertices of ``{x : |A x| <= 1}`` (bounded when the rows span)."""
    A = np.asarray(A, dtype=float)
    d = A.shape[1]
    if d == 1:
        s = np.abs(A[:, 0]).max()
        return np.array([[1.0 / s], [-1.0 / s]])
    if d == 2:
        return _polygon_vertices(A)
    from scipy.spatial import HalfspaceIntersection

    hs = np.concatenate([np.hstack([A, -np.ones((len(A), 1))]),
                         np.hstack([-A, -np.ones((len(A), 1))])])
    pts = HalfspaceIntersection(hs, np.zeros(d)).intersections
    # snap vertices onto the sphere
    n = np.abs(pts @ A.T).max(axis=1)
    return _unique_rows(pts / n[:, None], tol=1e-9)


def _polygon_vertices(A):
    # intersect every pair of boundary lines and keep the feasible points
    lines = np.concatenate([A, -A])
    pts = []
    for i, j in itertools.combinations(range(len(lines)), 2):
        M = np.array([lines[i], lines[j]])
        if abs(np.linalg.det(M)) < 1e-14:
            continue
        p = np.linalg.solve(M, np.ones(2))
        if np.abs(A @ p).max() <= 1.0 + 1e-10:
            pts.append(p)
    pts = np.array(pts)
    n = np.abs(pts @ A.T).max(axis=1)
    pts = _unique_rows(pts / n[:, None], tol=1e-10)
    # drop points on the interior of edges: an extreme point is not the midpoint of neighbours
    ang = np.arctan2(pts[:, 1], pts[:, 0])
    pts = pts[np.argsort(ang)]
    keep = []
    k = len(pts)
    for i in range(k):
        a, b, c = pts[i - 1], pts[i], pts[(i + 1) % k]
        cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        if abs(cross) > 1e-12:
            keep.append(b)
    return np.array(keep)


@dataclass(frozen=True, eq=False)
class DualOf(NormFamily):
    """The dual norm of ``inner``, evaluated as a supremum over its unit ball."""

    inner: "NormedSpace"

    def __post_init__(self):
        object.__setattr__(self, "_memo", {})

    @property
    def absolute(self):
        return self.inner.family.absolute

    def validate(self, dim, fld):
        if dim != self.inner.dim or fld is not self.inner.field:
            raise ValueError("DualOf must keep the dimension and field of its inner space")

    def norm(self, f):
        f = np.asarray(f)
        if isinstance(self.inner.family, WeightedMaxRoot):
            return predual_wmr_norm(self.inner.family.r, f)
        if self.inner.real_dim == 2:
            return _support_2d(self.inner, f)[0]
        flat = f.reshape(-1, f.shape[-1])
        out = np.empty(len(flat))
        for i, row in enumerate(flat):
            key = row.tobytes()
            if key not in self._memo:
                self._memo[key] = _support_generic(self.inner, row)[0]
            out[i] = self._memo[key]
        return out.reshape(f.shape[:-1])

    def dual_space(self, space):
        return self.inner

    def face(self, u, space):
        if self.inner.real_dim == 2:
            return _argmax_set_2d(self.inner, np.asarray(u))
        val, arg = _support_generic(self.inner, np.asarray(u))
        if abs(val - 1.0) > 1e-6:
            raise NoCertifiedFace("support maximization did not reach the norm")
        return arg[None] * _phase_of(u, arg)

    def corners(self, space):
        return self.inner.family.flat_normals(self.inner)

    def flat_normals(self, space):
        return self.inner.family.corners(self.inner)

    def short(self):
        return f"dual({self.inner.family.short()})"


def predual_wmr_norm(r: float, z: np.ndarray) -> np.ndarray:
    """Closed form of the norm whose dual is ``WeightedMaxRoot(r)``.

    The unit ball of the dual is an ellipse cut by ``|x1| <= 1``; the support
    is the ellipse support when its maximizer satisfies the cut, otherwise the
    maximum sits at a corner ``(+-1, +-sqrt(1 - r))``.
    """
    a1, a2 = np.abs(z[..., 0]), np.abs(z[..., 1])
    corner = a1 + math.sqrt(1.0 - r) * a2
    if r == 0:
        return corner
    ell = np.sqrt(a1 * a1 / r + a2 * a2)
    return np.where(a1 / r <= ell, ell, corner)


def _phase_of(u, x):
    v = np.sum(u * x)
    if abs(v) == 0:
        return 1.0
    return np.conj(v / abs(v)) if np.iscomplexobj(v) else np.sign(v)


def _support_2d(inner: "NormedSpace", f: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``max |f . x|`` over the unit ball of a 2-real-dimensional space."""
    f = np.asarray(f)
    shape = f.shape[:-1]
    F = f.reshape(-1, f.shape[-1])
    ang, P = inner.boundary(BOUNDARY_POINTS)
    vals = np.abs(F @ P.T)
    k = np.argmax(vals, axis=1)
    n = len(ang)
    lo = np.where(k > 0, ang[k - 1], ang[-1] - 2 * np.pi)
    hi = np.where(k < n - 1, ang[(k + 1) % n], ang[0] + 2 * np.pi)

    def fn(phi):
        return np.abs(np.sum(F * inner.boundary_point(phi), axis=1))

    xb, fb = golden_max(fn, lo, hi, 64)
    gv = vals[np.arange(len(F)), k]
    best = np.maximum(gv, fb)
    arg_ang = np.where(fb >= gv, xb, ang[k])
    return best.reshape(shape), arg_ang.reshape(shape)


def _argmax_set_2d(inner: "NormedSpace", u: np.ndarray) -> np.ndarray:
    """Points of the inner ball where ``|u . x|`` equals ``||u||`` (phase-aligned)."""
    u = np.asarray(u)
    val, phi = _support_2d(inner, u)
    val = float(val)
    ang, P = inner.boundary(BOUNDARY_POINTS)
    on = np.abs(P @ u) >= val * (1.0 - 1e-12)
    pts = [inner.boundary_point(np.array([float(phi)]))[0]]
    pts.extend(P[on])
    out = []
    for x in pts:
        out.append(x * _phase_of(u, x))
    out = np.array(out) / val
    out = out * 1.0  # functionals on the original space have unit dual norm here
    return _unique_rows(_face_endpoints_2d(out, u))


def _face_endpoints_2d(pts, u):
    # the face is a segment (or a point); keep its two extreme members
    if len(pts) <= 2:
        return pts
    if np.iscomplexobj(pts):
        return pts
    d = np.array([-u[1], u[0]], dtype=float)
    t = pts @ d
    return pts[[int(np.argmin(t)), int(np.argmax(t))]]


def _support_generic(inner: "NormedSpace", f: np.ndarray):
    budget = Budget(starts=8, iterations=200, grid_depth=7, seed=0)
    res = maximize_on_sphere(inner, lambda X: np.abs(X @ f), budget)
    return res.value, res.argmax


@dataclass(frozen=True, eq=False)
class AbsoluteSum(NormFamily):
    """``||(x_1, ..., x_n)|| = E(||x_1||, ..., ||x_n||)`` for an absolute outer norm ``E``."""

    outer: "NormedSpace"
    parts: tuple

    @property
    def absolute(self):
        return all(p.family.absolute for p in self.parts)

    def validate(self, dim, fld):
        if self.outer.field is not Field.REAL or self.outer.dim != len(self.parts):
            raise ValueError("outer norm must be real with one coordinate per part")
        if not self.outer.family.absolute:
            raise ValueError("outer norm must be absolute")
        if any(p.field is not fld for p in self.parts):
            raise ValueError("parts of an absolute sum must share the field")
        if sum(p.dim for p in self.parts) != dim:
            raise ValueError("part dimensions do not add up")

    @property
    def offsets(self) -> list[int]:
        out = [0]
        for p in self.parts:
            out.append(out[-1] + p.dim)
        return out

    def split(self, x):
        o = self.offsets
        return [x[..., o[i]:o[i + 1]] for i in range(len(self.parts))]

    def kind(self) -> Optional[str]:
        fam = self.outer.family
        if isinstance(fam, Lp) and fam.p == 1:
            return "l1"
        if isinstance(fam, Lp) and math.isinf(fam.p):
            return "linf"
        return None

    def norm(self, x):
        x = np.asarray(x)
        norms = np.stack([p.norm(b) for p, b in zip(self.parts, self.split(x))], axis=-1)
        return self.outer.norm(norms)

    def dual_space(self, space):
        return absolute_sum([p.dual() for p in self.parts], self.outer.dual().family)

    def face(self, u, space):
        blocks = self.split(np.asarray(u))
        a = np.array([float(p.norm(b)) for p, b in zip(self.parts, blocks)])
        outer_face = np.abs(self.outer.face(a / self.outer.norm(a)))
        part_faces = []
        for p, b, ai in zip(self.parts, blocks, a):
            if ai > 0:
                part_faces.append(p.face(b / ai))
            else:
                ext = p.dual().extreme_points()
                part_faces.append(ext if ext is not None else p.dual().sample_sphere(8, 0))
        rows = []
        for c in outer_face:
            choices = [pf if ci > 0 else pf[:1] for pf, ci in zip(part_faces, c)]
            for combo in itertools.islice(itertools.product(*choices), 512):
                rows.append(np.concatenate([ci * phi for ci, phi in zip(c, combo)]))
        return _unique_rows(np.array(rows))

    def extreme_points(self, space):
        if space.is_complex:
            return None
        kind = self.kind()
        exts = [p.extreme_points() for p in self.parts]
        if kind is None or any(e is None for e in exts):
            return None
        if kind == "linf":
            if np.prod([len(e) for e in exts]) > 4096:
                return None
            return np.array([np.concatenate(c) for c in itertools.product(*exts)])
        rows = []
        o = self.offsets
        for i, e in enumerate(exts):
            for v in e:
                r = np.zeros(space.dim)
                r[o[i]:o[i + 1]] = v
                rows.append(r)
        return np.array(rows)

    def flat_normals(self, space):
        ext = space.dual().extreme_points()
        return ext if ext is not None else np.zeros((0, space.dim))

    def short(self):
        return f"sum[{self.outer.family.short()}]({','.join(p.family.short() for p in self.parts)})"


# ---------------------------------------------------------------- spaces

@dataclass(eq=False)
class NormedSpace:
    """A finite-dimensional normed space ``(field, dim, family)``.

    Closed-form results (duals, extreme points, boundary polygons) are cached on
    the instance.
    """

    field: Field
    dim: int
    family: NormFamily
    label: Optional[str] = None
    _cache: dict = dc_field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.field = Field(self.field)
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.dim}")
        self.dim = int(self.dim)
        self.family.validate(self.dim, self.field)
        if self.label is None:
            k = "C" if self.is_complex else "R"
            self.label = f"{self.family.short()}^{self.dim}({k})"

    # -- coordinates
    @property
    def is_complex(self) -> bool:
        return self.field is Field.COMPLEX

    @property
    def real_dim(self) -> int:
        return 2 * self.dim if self.is_complex else self.dim

    def vectors(self, x) -> np.ndarray:
        """Validate and convert input to native coordinates."""
        x = np.asarray(x)
        if x.ndim == 0:
            x = x[None]
        if self.is_complex and not np.iscomplexobj(x) and x.shape[-1] == 2 * self.dim and self.dim > 0:
            x = self.from_real(x)
        if x.shape[-1] != self.dim:
            raise ValueError(f"vector length {x.shape[-1]} does not match dimension {self.dim}")
        if not np.all(np.isfinite(x)):
            raise ValueError("vector has non-finite entries")
        if not self.is_complex and np.iscomplexobj(x):
            if np.any(x.imag != 0):
                raise ValueError("complex vector given to a real space")
            x = x.real
        return x.astype(complex if self.is_complex else float, copy=False)

    def to_real(self, x) -> np.ndarray:
        x = np.asarray(x)
        if self.is_complex:
            x = x.astype(complex)
            return np.concatenate([x.real, x.imag], axis=-1)
        return np.real(x).astype(float)

    def from_real(self, xr) -> np.ndarray:
        xr = np.asarray(xr, dtype=float)
        if self.is_complex:
            return xr[..., : self.dim] + 1j * xr[..., self.dim:]
        return xr

    # -- norms
    def norm(self, x):
        x = self.vectors(x)
        out = self.family.norm(x)
        return float(out) if np.ndim(out) == 0 else out

    def dual(self) -> "NormedSpace":
        if "dual" not in self._cache:
            d = self.family.dual_space(self)
            if "(" not in self.label and "[" not in self.label:
                d.label = d.label if d.label else f"({self.label})*"
            # the bidual is the space itself, so double adjoints return the original spaces
            d._cache.setdefault("dual", self)
            self._cache["dual"] = d
        return self._cache["dual"]

    def dual_norm(self, f):
        return self.dual().norm(f)

    def pair(self, f, x):
        """Bilinear pairing ``f(x)`` (vectorized)."""
        return np.sum(np.asarray(f) * np.asarray(x), axis=-1)

    # -- geometry
    def extreme_points(self) -> Optional[np.ndarray]:
        if "ext" not in self._cache:
            self._cache["ext"] = self.family.extreme_points(self)
        return self._cache["ext"]

    def face(self, u) -> np.ndarray:
        """Extreme points of the face ``{f : ||f||_* = 1, f(u) = 1}`` at a unit vector ``u``.

        For strictly convex directions this is a single functional; for segments
        the two endpoints are returned.
        """
        u = self.vectors(u)
        if u.ndim != 1:
            raise ValueError("face expects a single vector")
        n = self.norm(u)
        if n == 0:
            raise ValueError("face of the zero vector is undefined")
        u = u / n
        if self.dim == 1:
            v = u[0]
            return np.array([[np.conj(v) / abs(v) ** 2 if self.is_complex else 1.0 / v]]) * 1.0
        F = self.family.face(u, self)
        if F is None:
            F = _generic_face(self, u)
        F = np.atleast_2d(F)
        # scale by the dual norm so that rounding does not leave the dual sphere
        dn = self.dual_norm(F)
        F = F / dn[:, None]
        err = np.abs(np.real(F @ u) - 1.0)
        if np.any(err > TOL.face):
            raise NoCertifiedFace(f"face elements miss the face by {err.max():.2e}")
        return F

    def boundary(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """Angles and unit vectors of a boundary polygon (real dimension 2).

        Uniform angles are merged with the kink points of the ball so corners
        appear exactly.  Points are returned in native coordinates.
        """
        if self.real_dim != 2:
            raise ValueError("boundary polygons exist for real dimension 2 only")
        key = ("boundary", n)
        if key not in self._cache:
            ang = 2 * np.pi * np.arange(n) / n
            corners = np.zeros((0, 2))
            if not self.is_complex:
                corners = np.asarray(self.family.corners(self), dtype=float).reshape(-1, 2)
            if self.is_complex:
                pts = self.boundary_point(ang)
                self._cache[key] = (ang, pts)
                return self._cache[key]
            cang = np.mod(np.arctan2(corners[:, 1], corners[:, 0]), 2 * np.pi)
            all_ang = np.concatenate([ang, cang])
            order = np.argsort(all_ang, kind="stable")
            all_ang = all_ang[order]
            pts = self.boundary_point(all_ang)
            is_corner = order >= n
            cidx = order[is_corner] - n
            pts[is_corner] = corners[cidx] / self.norm(corners[cidx])[:, None]
            # drop uniform points that duplicate a corner
            keep = np.ones(len(all_ang), bool)
            keep[1:] = np.diff(all_ang) > 1e-13
            self._cache[key] = (all_ang[keep], pts[keep])
        return self._cache[key]

    def boundary_point(self, phi) -> np.ndarray:
        phi = np.asarray(phi, dtype=float)
        d = self.from_real(np.stack([np.cos(phi), np.sin(phi)], axis=-1))
        return d / self.family.norm(d)[..., None]

    def sample_sphere(self, count: int, seed: int = 0) -> np.ndarray:
        """Deterministic unit vectors: extreme points first, then random directions.

        Random directions are drawn in one block, so a larger ``count`` extends
        a smaller one.
        """
        count = int(count)
        ext = self.extreme_points()
        head = ext[:count] if ext is not None else np.zeros((0, self.dim))
        rest = count - len(head)
        rng = np.random.default_rng(seed)
        if self.dim == 1 and not self.is_complex:
            rnd = np.where(np.arange(rest) % 2 == 0, 1.0, -1.0)[:, None]
        else:
            g = rng.standard_normal((max(rest, 0), self.real_dim))
            rnd = self.from_real(g)
        if rest > 0:
            nrm = self.family.norm(rnd)
            rnd = rnd / nrm[:, None]
        if rest <= 0:
            return head
        return np.concatenate([head.astype(rnd.dtype), rnd])

    def __repr__(self):
        return f"NormedSpace({self.label})"


def _generic_face(space: NormedSpace, u: np.ndarray) -> np.ndarray:
    """Face of a space without a closed form, through the dual space."""
    dual = space.dual()
    if dual.real_dim == 2:
        # maximize over the dual sphere the pairing with u
        val, phi = _support_2d(dual, u)
        if abs(float(val) - 1.0) > 1e-8:
            raise NoCertifiedFace("dual support does not reproduce the norm")
        return _argmax_set_2d(dual, u)
    res = maximize_on_sphere(dual, lambda F: np.real(F @ u), Budget(starts=16, iterations=300))
    if abs(res.value - 1.0) > 1e-6:
        raise NoCertifiedFace("face search did not reach the norm")
    return res.argmax[None]


# ---------------------------------------------------------------- constructors

def lp(p: float, dim: int, field: Field | str = Field.REAL) -> NormedSpace:
    return NormedSpace(Field(field), dim, Lp(float(p)))


def weighted_max_root(r: float, field: Field | str = Field.REAL) -> NormedSpace:
    return NormedSpace(Field(field), 2, WeightedMaxRoot(float(r)))


def predual_weighted_max_root(r: float, field: Field | str = Field.REAL) -> NormedSpace:
    """The space whose dual is ``weighted_max_root(r)``."""
    inner = weighted_max_root(r, field)
    return NormedSpace(Field(field), 2, DualOf(inner), f"pre(wmr{r:g})")


def gamma_norm(gamma: float, field: Field | str = Field.REAL) -> NormedSpace:
    return NormedSpace(Field(field), 2, GammaNorm(float(gamma)))


def gamma_dual(gamma: float, field: Field | str = Field.REAL) -> NormedSpace:
    return NormedSpace(Field(field), 2, GammaDual(float(gamma)))


def polyhedral(functionals) -> NormedSpace:
    A = np.asarray(functionals, dtype=float)
    return NormedSpace(Field.REAL, A.shape[1], Polyhedral(A))


def dual_of(space: NormedSpace) -> NormedSpace:
    return NormedSpace(space.field, space.dim, DualOf(space), f"({space.label})'")


def absolute_sum(parts: Sequence[NormedSpace], outer) -> NormedSpace:
    """Absolute sum of ``parts`` with outer norm ``outer``.

    ``outer`` is a family (``Lp(1)``, ``Lp(inf)``...), a real ``NormedSpace`` of
    dimension ``len(parts)``, or one of the strings ``"l1"``, ``"linf"``.
    """
    parts = tuple(parts)
    if not parts:
        raise ValueError("absolute sum needs at least one part")
    if isinstance(outer, str):
        outer = {"l1": Lp(1.0), "linf": Lp(math.inf), "l2": Lp(2.0)}[outer]
    if isinstance(outer, NormFamily):
        outer = NormedSpace(Field.REAL, len(parts), outer)
    dim = sum(p.dim for p in parts)
    fam = AbsoluteSum(outer, parts)
    label = f" (+){outer.family.short()} ".join(p.label for p in parts)
    return NormedSpace(parts[0].field, dim, fam, f"[{label}]")


# ---------------------------------------------------------------- module-level API

def norm(space: NormedSpace, x):
    return space.norm(x)


def dual_norm(space: NormedSpace, f):
    return space.dual_norm(f)


def sample_sphere(space: NormedSpace, count: int, seed: int = 0) -> np.ndarray:
    return space.sample_sphere(count, seed)


def face_sample(space: NormedSpace, u, delta: float = 0.0, count: int = 8, seed: int = 0) -> np.ndarray:
    """Dual unit functionals ``f`` with ``Re f(u) > 1 - delta`` (``>= 1`` when ``delta == 0``).

    The exact extreme points of the face come first; the remaining rows are
    convex combinations of them, or for ``delta > 0`` perturbations kept inside
    the slab.
    """
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    u = space.vectors(u)
    nu = space.norm(u)
    if nu == 0:
        raise ValueError("face of the zero vector is undefined")
    if abs(nu - 1.0) > TOL.unit:
        raise ValueError(f"face anchor must be a unit vector, norm is {nu}")
    F = space.face(u)
    rng = np.random.default_rng(seed)
    rows = list(F[:count])
    dual = space.dual()
    tries = 0
    while len(rows) < count and tries < 50 * count:
        tries += 1
        w = rng.dirichlet(np.ones(len(F)))
        f = w @ F
        if delta > 0:
            g = dual.sample_sphere(1, seed=int(rng.integers(1 << 31)))[0]
            t = rng.uniform(0, 1) * math.sqrt(delta)
            f = f + t * g
            f = f / dual.norm(f)
            if not np.real(np.sum(f * u)) > 1.0 - delta:
                continue
        rows.append(f)
    return np.array(rows)
