"""Bounded operators between finite-dimensional normed spaces."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
import logging
import math
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import block_diag

from .config import TOL
from .interval import Interval
from .optimize import Budget, golden_max, maximize_on_sphere
from .spaces import (AbsoluteSum, DualOf, Field, GammaDual, GammaNorm, Lp, NormedSpace,
                     Polyhedral, WeightedMaxRoot, absolute_sum)

log = logging.getLogger(__name__)

#: boundary points used when the operator norm is computed on a 2-dimensional domain
OPNORM_BOUNDARY = 2048


@dataclass(eq=False)
class Operator:
    """A linear map ``domain -> codomain`` given by a ``codomain.dim x domain.dim`` matrix."""

    domain: NormedSpace
    codomain: NormedSpace
    matrix: np.ndarray
    label: Optional[str] = None
    _cache: dict = dc_field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.domain.field is not self.codomain.field:
            raise ValueError("domain and codomain must share the field")
        M = np.array(self.matrix, dtype=complex if self.domain.is_complex else float)
        if M.ndim != 2 or M.shape != (self.codomain.dim, self.domain.dim):
            raise ValueError(f"matrix shape {M.shape} does not match "
                             f"{self.codomain.dim} x {self.domain.dim}")
        if not np.all(np.isfinite(M)):
            raise ValueError("matrix has non-finite entries")
        M.setflags(write=False)
        self.matrix = M

    @property
    def is_complex(self) -> bool:
        return self.domain.is_complex

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def __call__(self, x):
        return np.asarray(x) @ self.matrix.T

    def norm(self) -> Interval:
        if "norm" not in self._cache:
            self._cache["norm"] = op_norm(self)
        return self._cache["norm"]

    def with_matrix(self, M) -> "Operator":
        return Operator(self.domain, self.codomain, M)

    def __repr__(self):
        return f"Operator({self.domain.label} -> {self.codomain.label}, shape={self.shape})"


def as_matrix(T, G: Operator) -> np.ndarray:
    """Matrix of ``T`` (an ``Operator`` or array) checked against the spaces of ``G``."""
    M = T.matrix if isinstance(T, Operator) else np.asarray(T)
    if M.shape != G.shape:
        raise ValueError(f"operator shape {M.shape} differs from {G.shape}")
    return M


# ---------------------------------------------------------------- operator norms

def op_norm(G: Operator) -> Interval:
    """Operator norm as ``[attained value, certified upper bound]``."""
    val, up = op_norm_batch(G.matrix[None], G.domain, G.codomain)
    return Interval(float(val[0]), float(max(up[0], val[0])))


def op_norm_value(M, X: NormedSpace, Y: NormedSpace) -> np.ndarray:
    """Best attained values ``||M_b||`` for a batch of matrices."""
    return op_norm_batch(M, X, Y)[0]


def _is_lp(space, p):
    f = space.family
    return isinstance(f, Lp) and (f.p == p or (math.isinf(p) and math.isinf(f.p)))


def _finite_functionals(Y: NormedSpace) -> Optional[np.ndarray]:
    """Unit functionals whose moduli give the norm of ``Y`` exactly."""
    if Y.is_complex:
        if _is_lp(Y, math.inf):
            return np.eye(Y.dim)
        return None
    ext = Y.dual().extreme_points()
    return ext


def op_norm_batch(M, X: NormedSpace, Y: NormedSpace, _transposed: bool = False,
                  npts: int = OPNORM_BOUNDARY):
    """Operator norms of a batch ``M`` of shape ``(B, m, n)`` from ``X`` to ``Y``.

    Returns ``(value, upper)``: ``value`` is attained by some unit vector and
    ``upper`` is a certified bound.  Closed forms are used when the domain has
    finitely many extreme points, the codomain norm is a maximum of finitely
    many functionals, both spaces are Euclidean, or a sum structure splits the
    problem.  Otherwise a 2-dimensional boundary polygon with ``npts`` points
    is refined.
    """
    M = np.asarray(M)
    B, m, n = M.shape
    if X.dim == 1:
        e = np.ones(1)
        v = np.atleast_1d(Y.norm(M[:, :, 0])) / X.norm(e)
        return v, v
    ext = X.extreme_points()
    if ext is not None and len(ext) <= 512:
        v = Y.norm(np.einsum("bmn,kn->bkm", M, ext)).max(axis=1)
        return v, v
    if X.is_complex and _is_lp(X, 1):
        v = Y.norm(np.swapaxes(M, 1, 2)).max(axis=1)
        return v, v
    fun = _finite_functionals(Y)
    if fun is not None and len(fun) <= 512:
        v = X.dual().norm(np.einsum("km,bmn->bkn", fun, M)).max(axis=1)
        return v, v
    if _is_lp(X, 2) and _is_lp(Y, 2):
        v = np.linalg.norm(M, ord=2, axis=(1, 2))
        return v, v
    fX, fY = X.family, Y.family
    if isinstance(fX, AbsoluteSum) and fX.kind() == "l1":
        o = fX.offsets
        vals = [op_norm_batch(M[:, :, o[i]:o[i + 1]], p, Y, npts=npts) for i, p in enumerate(fX.parts)]
        return np.max([a for a, _ in vals], axis=0), np.max([b for _, b in vals], axis=0)
    if isinstance(fY, AbsoluteSum) and fY.kind() == "linf":
        o = fY.offsets
        vals = [op_norm_batch(M[:, o[i]:o[i + 1], :], X, p, npts=npts) for i, p in enumerate(fY.parts)]
        return np.max([a for a, _ in vals], axis=0), np.max([b for _, b in vals], axis=0)
    if not _transposed and _cheap_closed_form(Y.dual(), X.dual()):
        return op_norm_batch(np.swapaxes(M, 1, 2), Y.dual(), X.dual(), _transposed=True, npts=npts)
    if X.real_dim == 2 and (not isinstance(fY, DualOf) or Y.dual().real_dim != 2):
        return _boundary_opnorm(M, X, Y, npts)
    if not _transposed and Y.real_dim == 2:
        return _boundary_opnorm(np.swapaxes(M, 1, 2), Y.dual(), X.dual(), npts)
    if X.real_dim == 2:
        return _boundary_opnorm(M, X, Y, npts)
    return _search_opnorm(M, X, Y)


def op_norm_upper_screened(M, X: NormedSpace, Y: NormedSpace, coarse: int = 128) -> np.ndarray:
    """Certified upper bounds whose maximum over the batch is as tight as the fine bound.

    Every matrix gets a cheap coarse bound; only those whose coarse bound can
    still beat the best fine bound are recomputed finely.
    """
    M = np.asarray(M)
    _, up = op_norm_batch(M, X, Y, npts=coarse)
    out = up.copy()
    order = np.argsort(-up, kind="stable")
    best = -np.inf
    for start in range(0, len(order), 256):
        idx = order[start:start + 256]
        idx = idx[up[idx] > best]
        if not len(idx):
            break
        _, fine = op_norm_batch(M[idx], X, Y)
        out[idx] = fine
        best = max(best, float(fine.max()))
    return out


def _cheap_closed_form(X: NormedSpace, Y: NormedSpace) -> bool:
    if X.dim == 1:
        return True
    ext = X.extreme_points()
    if ext is not None and len(ext) <= 512:
        return True
    if X.is_complex and _is_lp(X, 1):
        return True
    fun = _finite_functionals(Y)
    if fun is not None and len(fun) <= 512:
        return True
    if _is_lp(X, 2) and _is_lp(Y, 2):
        return True
    if isinstance(X.family, AbsoluteSum) and X.family.kind() == "l1":
        return True
    if isinstance(Y.family, AbsoluteSum) and Y.family.kind() == "linf":
        return True
    return False


def _boundary_chord(X: NormedSpace, npts: int) -> float:
    key = ("chord", npts)
    if key not in X._cache:
        _, P = X.boundary(npts)
        X._cache[key] = float(X.norm(np.roll(P, -1, axis=0) - P).max())
    return X._cache[key]


def _boundary_opnorm(M, X: NormedSpace, Y: NormedSpace, npts: int = OPNORM_BOUNDARY):
    chunk = max(1, 2 ** 22 // (npts * M.shape[1]))
    if len(M) > chunk:
        parts = [_boundary_opnorm(M[i:i + chunk], X, Y, npts) for i in range(0, len(M), chunk)]
        return np.concatenate([a for a, _ in parts]), np.concatenate([b for _, b in parts])
    ang, P = X.boundary(npts)
    B = len(M)
    V = np.einsum("bmn,kn->bkm", M, P)
    vals = Y.norm(V)
    gmax = vals.max(axis=1)
    nang = len(ang)
    best = gmax.copy()
    # refine around the three best grid points
    order = np.argsort(-vals, axis=1)[:, :3]
    for j in range(order.shape[1]):
        k = order[:, j]
        lo = np.where(k > 0, ang[k - 1], ang[-1] - 2 * np.pi)
        hi = np.where(k < nang - 1, ang[(k + 1) % nang], ang[0] + 2 * np.pi)

        def fn(phi):
            x = X.boundary_point(phi)
            return Y.norm(np.einsum("bmn,bn->bm", M, x))

        _, fb = golden_max(fn, lo, hi, 60)
        best = np.maximum(best, fb)
    d = _boundary_chord(X, npts)
    up = gmax / (1.0 - d / 2.0)
    return best, np.maximum(up, best)


def _search_opnorm(M, X: NormedSpace, Y: NormedSpace):
    # no closed form and no low-dimensional side: multistart search per matrix,
    # reported without a certificate beyond the attained value
    budget = Budget(starts=16, iterations=200, grid_depth=6, seed=0)
    vals = np.empty(len(M))
    for b, Mb in enumerate(M):
        res = maximize_on_sphere(X, lambda Z, Mb=Mb: Y.norm(Z @ Mb.T), budget, use_grid=False)
        vals[b] = res.value
    log.debug("operator norm of %d matrices found by search without certificate", len(M))
    return vals, vals.copy()


# ---------------------------------------------------------------- constructions

def identity(X: NormedSpace) -> Operator:
    return Operator(X, X, np.eye(X.dim), label=f"Id[{X.label}]")


def adjoint(G: Operator) -> Operator:
    """Banach adjoint ``Y* -> X*``; its matrix is the transpose of ``G``'s."""
    if "adjoint" not in G._cache:
        A = Operator(G.codomain.dual(), G.domain.dual(), G.matrix.T.copy())
        A._cache["adjoint"] = G
        G._cache["adjoint"] = A
    return G._cache["adjoint"]


def rank_one(x0star, y0, X: NormedSpace, Y: NormedSpace) -> Operator:
    """The operator ``x -> x0star(x) y0``; both factors must have norm one."""
    x0star = X.dual().vectors(x0star)
    y0 = Y.vectors(y0)
    nx, ny = float(X.dual_norm(x0star)), float(Y.norm(y0))
    if nx == 0 or ny == 0:
        raise ValueError("rank-one factors must be nonzero")
    if abs(nx - 1) > TOL.unit or abs(ny - 1) > TOL.unit:
        raise ValueError(f"rank-one factors must have norm one (got {nx:.3g}, {ny:.3g})")
    G = Operator(X, Y, np.outer(y0, x0star))
    G._cache["rank_one"] = (x0star, y0)
    G._cache["norm"] = Interval(1.0, 1.0)
    return G


def diag_sum(ops: Sequence[Operator], kind: str) -> Operator:
    """Block-diagonal operator between ``l1`` or ``linf`` sums of the domains and codomains."""
    if kind not in ("l1", "linf"):
        raise ValueError("diagonal sums are over 'l1' or 'linf'")
    ops = list(ops)
    if not ops:
        raise ValueError("diagonal sum of no operators")
    X = absolute_sum([G.domain for G in ops], kind)
    Y = absolute_sum([G.codomain for G in ops], kind)
    G = Operator(X, Y, block_diag(*[G.matrix for G in ops]))
    G._cache["blocks"] = (kind, tuple(ops))
    return G


def compose(G2: Operator, G1: Operator) -> Operator:
    """``G2 o G1``; the codomain of ``G1`` must be the domain of ``G2``."""
    if not same_space(G1.codomain, G2.domain):
        raise ValueError("composition of operators between unrelated spaces")
    return Operator(G1.domain, G2.codomain, G2.matrix @ G1.matrix)


def extend_domain_infty(G: Operator, Z: NormedSpace) -> Operator:
    """``(x, z) -> G x`` on ``X (+)inf Z``."""
    X = absolute_sum([G.domain, Z], "linf")
    M = np.hstack([G.matrix, np.zeros((G.codomain.dim, Z.dim), dtype=G.matrix.dtype)])
    return Operator(X, G.codomain, M)


def extend_codomain_one(G: Operator, Z: NormedSpace) -> Operator:
    """``x -> (G x, 0)`` into ``Y (+)1 Z``."""
    Y = absolute_sum([G.codomain, Z], "l1")
    M = np.vstack([G.matrix, np.zeros((Z.dim, G.domain.dim), dtype=G.matrix.dtype)])
    return Operator(G.domain, Y, M)


def normalize(G: Operator) -> Operator:
    """``G / ||G||`` using the attained norm value; the factor is logged."""
    nrm = G.norm()
    if nrm.upper < TOL.tiny_opnorm:
        raise ValueError("cannot normalize an operator of norm below 1e-9")
    log.info("normalizing operator %s by %.12g", G.label or repr(G), nrm.lower)
    H = Operator(G.domain, G.codomain, G.matrix / nrm.lower, label=G.label)
    H._cache["norm"] = Interval(1.0, nrm.upper / nrm.lower)
    return H


def same_space(a: NormedSpace, b: NormedSpace) -> bool:
    """Structural equality of two spaces (same field, dimension and norm)."""
    if a is b:
        return True
    if a.field is not b.field or a.dim != b.dim or type(a.family) is not type(b.family):
        return False
    fa, fb = a.family, b.family
    if isinstance(fa, Polyhedral):
        return fa.rows.shape == fb.rows.shape and bool(np.array_equal(fa.rows, fb.rows))
    if isinstance(fa, DualOf):
        return same_space(fa.inner, fb.inner)
    if isinstance(fa, AbsoluteSum):
        return (same_space(fa.outer, fb.outer) and len(fa.parts) == len(fb.parts)
                and all(same_space(p, q) for p, q in zip(fa.parts, fb.parts)))
    return fa == fb
