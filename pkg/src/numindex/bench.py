"""Registry of reproduction cases with pinned budgets and expected values.

Every case returns an observed enclosure and a verdict.  ``run_all`` executes
the cases in registry order and renders a text table or CSV.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
import fnmatch
import io
import math
import time
from typing import Callable, Optional

import numpy as np

from .constructions import (QUARTER_TURN, gamma_extension, random_plane_space, random_polygon_operator,
                            random_vertex_rank_one)
from .index import (abstract_index, adjoint_compare, characterization_check, n_index,
                    n_index_brute_force, n_index_structural, n_index_upper)
from .interval import Interval
from .lipschitz import linear_map, lip_radius_lower
from .numrange import v_radius, v_radius_derivative, v_radius_spatial
from .operators import (Operator, diag_sum, extend_codomain_one, extend_domain_infty, identity,
                        normalize, rank_one)
from .optimize import Budget
from .spaces import gamma_dual, gamma_norm, lp, predual_weighted_max_root

#: ``max_{t in [0,1]} |t^(p-1) - t| / (1 + t^p)`` for p = 1.5 and p = 3, from a 1e-6 grid
ELLP_ROTATION_RADIUS = {1.5: 0.2270833462, 3.0: 0.2270833462}


@dataclass
class Outcome:
    passed: bool
    observed: Interval
    detail: str = ""


@dataclass
class BenchCase:
    id: str
    run: Callable[[Budget], Outcome]
    expected: str
    tolerance: float
    source_ref: str
    criterion: int
    budget: Budget = Budget()


@dataclass
class CaseResult:
    id: str
    passed: bool
    observed: Interval
    expected: str
    seconds: float
    detail: str

    @property
    def status(self) -> str:
        return "pass" if self.passed else "fail"


REGISTRY: dict[str, BenchCase] = {}


def case(id: str, expected: str, tolerance: float, source_ref: str, criterion: int,
         budget: Budget = Budget()):
    def deco(fn):
        if id in REGISTRY:
            raise ValueError(f"duplicate case id {id!r}")
        REGISTRY[id] = BenchCase(id, fn, expected, tolerance, source_ref, criterion, budget)
        return fn
    return deco


def _within(iv: Interval, target: float, tol: float) -> bool:
    return abs(iv.lower - target) <= tol and abs(iv.upper - target) <= tol


# ---------------------------------------------------------------- radius of the quarter turn

def _ellp_case(p: float):
    def run(budget: Budget) -> Outcome:
        est = v_radius(identity(lp(p, 2)), QUARTER_TURN, budget)
        target = ELLP_ROTATION_RADIUS[p]
        return Outcome(_within(est.value, target, 1e-3), est.value, f"target {target}")
    return run


for _p in (1.5, 3.0):
    case(f"mp-ellp-{_p:g}", f"{ELLP_ROTATION_RADIUS[_p]} +- 1e-3", 1e-3,
         f"quarter-turn radius on l{_p:g}^2 against the 1-d grid maximum", 1)(_ellp_case(_p))


# ---------------------------------------------------------------- Hilbert spaces

@case("hilbert-real-zero", "structural [0, 0] with rotation; optimizer upper <= 1e-2", 1e-2,
      "identity of the real Euclidean plane has index zero", 2)
def _hilbert_real(budget: Budget) -> Outcome:
    G = identity(lp(2, 2))
    rep = n_index_structural(G, budget)
    up = n_index_upper(G, budget)
    W = None if rep is None else rep.witness
    skew = W is not None and np.allclose(W, -W.T, atol=1e-12)
    ok = rep is not None and rep.value.lower == 0.0 and rep.value.upper == 0.0 and skew and up.upper <= 1e-2
    return Outcome(ok, Interval(0.0, up.upper), f"structural {rep}, optimizer {up}")


@case("hilbert-complex-half", "optimizer upper in [0.48, 0.52]", 2e-2,
      "identity of the complex Euclidean plane has index one half", 3)
def _hilbert_complex(budget: Budget) -> Outcome:
    rep = n_index_upper(identity(lp(2, 2, "complex")), budget)
    return Outcome(0.48 <= rep.upper <= 0.52, rep.value, str(rep))


# ---------------------------------------------------------------- predual planes

@case("zr-endpoint-0", "1 +- 1e-2", 1e-2, "predual plane at r = 0 is the l1 plane, index one at (1, 0)", 4)
def _zr0(budget: Budget) -> Outcome:
    rep = abstract_index(predual_weighted_max_root(0.0), [1.0, 0.0], budget)
    return Outcome(_within(rep.value, 1.0, 1e-2), rep.value, str(rep))


@case("zr-endpoint-1", "<= 1e-2", 1e-2, "predual plane at r = 1 is Euclidean, index zero", 4)
def _zr1(budget: Budget) -> Outcome:
    rep = abstract_index(predual_weighted_max_root(1.0), [1.0, 0.0], budget)
    return Outcome(rep.upper <= 1e-2, rep.value, str(rep))


@case("zr-midpoint", "brute force and optimizer overlap, combined width <= 5e-2", 5e-2,
      "continuity of the index family at r = 0.5", 4)
def _zr_half(budget: Budget) -> Outcome:
    Z = predual_weighted_max_root(0.5)
    brute = abstract_index(Z, [1.0, 0.0], budget, method="bruteforce")
    opt = abstract_index(Z, [1.0, 0.0], budget, method="optimizer")
    width = brute.value.width + opt.value.width
    ok = brute.value.overlaps(opt.value, 1e-9) and width <= 5e-2
    return Outcome(ok, brute.value.hull(opt.value), f"brute {brute}, optimizer {opt}, width {width:.3g}")


# ---------------------------------------------------------------- gamma planes

def _gamma_case(g: float):
    def run(budget: Budget) -> Outcome:
        rep = abstract_index(gamma_dual(g), [0.0, 1.0], budget)
        return Outcome(_within(rep.value, g, 1e-2), rep.value, str(rep))
    return run


for _g in (0.0, 0.25, 0.5, 1.0):
    case(f"gamma-dual-{_g:g}", f"{_g:g} +- 1e-2", 1e-2,
         "index of the dual gamma plane at the vertex (0, 1) equals gamma", 5)(_gamma_case(_g))


# ---------------------------------------------------------------- rank-one products

@case("rank-one-product", "brute force within 2e-2 of the product of point indices on 20 cases", 2e-2,
      "index of a rank-one operator is the product of the point indices", 6)
def _rank_one_product(budget: Budget) -> Outcome:
    rng = np.random.default_rng(600)
    worst, lo, hi = 0.0, math.inf, -math.inf
    for _ in range(20):
        G = random_vertex_rank_one(rng)
        x0s, y0 = G._cache["rank_one"]
        brute = n_index_brute_force(G)
        prod = (abstract_index(G.domain.dual(), x0s, budget).value
                * abstract_index(G.codomain, y0, budget).value)
        worst = max(worst, abs(brute.lower - prod.upper), abs(brute.upper - prod.lower))
        lo, hi = min(lo, brute.lower), max(hi, brute.upper)
    return Outcome(worst <= 2e-2, Interval(lo, hi), f"worst deviation {worst:.3g}")


# ---------------------------------------------------------------- sums

def _gamma_rank_one(g: float) -> Operator:
    # n = n(gamma-dual plane, (0, 1)) * n(linf plane, (1, 1)) = gamma
    return rank_one([0.0, 1.0], [1.0, 1.0], gamma_norm(g), lp(math.inf, 2))


def _sum_case(kind: str):
    def run(budget: Budget) -> Outcome:
        g = 0.5
        G = diag_sum([identity(lp(math.inf, 2)), _gamma_rank_one(g)], kind)
        rep = n_index(G, budget)
        up = n_index_upper(G, budget)
        ok = _within(rep.value, g, 2e-2) and up.upper >= rep.lower - 1e-2 and up.upper <= g + 2e-2
        return Outcome(ok, rep.value, f"{rep}; optimizer {up}")
    return run


for _k in ("linf", "l1"):
    case(f"sum-{_k}-min", "0.5 +- 2e-2 (minimum of 1 and 0.5)", 2e-2,
         f"{_k} diagonal sum has the least index of its blocks", 7)(_sum_case(_k))


# ---------------------------------------------------------------- extension example

@case("ygamma-first", "0.5 +- 2e-2", 2e-2, "swap plus identity on the six-dimensional gamma extension", 8)
def _yg_first(budget: Budget) -> Outcome:
    _, first, _ = gamma_extension(0.5)
    rep = n_index(first, budget)
    ok = _within(rep.value, 0.5, 2e-2) and characterization_check(first, rep.lower - 1e-3)[0]
    return Outcome(ok, rep.value, str(rep))


@case("ygamma-second", ">= 1 - 1e-2", 1e-2, "rank-one spear on the six-dimensional gamma extension", 8)
def _yg_second(budget: Budget) -> Outcome:
    _, _, second = gamma_extension(0.5)
    rep = n_index(second, budget)
    ok = rep.lower >= 1 - 1e-2 and characterization_check(second, rep.lower - 1e-3)[0]
    return Outcome(ok, rep.value, str(rep))


# ---------------------------------------------------------------- adjoints and extensions

@case("adjoint-random", "adjoint index <= index + 2e-2 and enclosures overlap on 20 cases", 2e-2,
      "adjoint index never exceeds the index; equal in finite dimensions", 9)
def _adjoint(budget: Budget) -> Outcome:
    rng = np.random.default_rng(900)
    bad = []
    lo, hi = math.inf, -math.inf
    for i in range(20):
        G = random_polygon_operator(rng, i)
        r = adjoint_compare(G, budget, method="bruteforce")
        a, g = r["adjoint"].value, r["G"].value
        if not (a.upper <= g.upper + 2e-2 and a.overlaps(g, 2e-2)):
            bad.append(i)
        lo, hi = min(lo, g.lower), max(hi, g.upper)
    return Outcome(not bad, Interval(lo, hi), f"failures at {bad}" if bad else "20 agreements")


@case("extension-random", "both extensions within 2e-2 of the index on 10 cases", 2e-2,
      "adding a linf summand to the domain or an l1 summand to the codomain keeps the index", 10)
def _extension(budget: Budget) -> Outcome:
    rng = np.random.default_rng(1000)
    line = lp(2, 1)
    worst, lo, hi = 0.0, math.inf, -math.inf
    for i in range(10):
        G = random_polygon_operator(rng, i)
        base = n_index_brute_force(G)
        for E in (extend_domain_infty(G, line), extend_codomain_one(G, line)):
            e = n_index_brute_force(E, max_dim=6)
            worst = max(worst, abs(e.lower - base.upper), abs(e.upper - base.lower))
        lo, hi = min(lo, base.lower), max(hi, base.upper)
    return Outcome(worst <= 2e-2, Interval(lo, hi), f"worst deviation {worst:.3g}")


# ---------------------------------------------------------------- radius formulas

@case("method-agreement", "derivative and spatial uppers within 1e-3; lower <= upper + 1e-6 on 100 cases",
      1e-3, "derivative formula and relaxed spatial radius describe the same quantity", 11)
def _agreement(budget: Budget) -> Outcome:
    rng = np.random.default_rng(1100)
    worst, inverted = 0.0, 0
    lo, hi = math.inf, -math.inf
    for _ in range(100):
        X = random_plane_space(rng)
        Y = X if rng.uniform() < 0.5 else random_plane_space(rng)
        if Y is X and rng.uniform() < 0.5:
            G = identity(X)
        else:
            G = normalize(Operator(X, Y, rng.standard_normal((2, 2))))
        T = rng.standard_normal((2, 2))
        d = v_radius_derivative(G, T)
        s = v_radius_spatial(G, T, budget=budget)
        worst = max(worst, abs(d.upper - s.upper))
        inverted += int(d.lower > d.upper + 1e-6)
        lo, hi = min(lo, d.upper), max(hi, d.upper)
    return Outcome(worst <= 1e-3 and inverted == 0, Interval(lo, hi),
                   f"worst gap {worst:.3g}, inverted brackets {inverted}")


@case("characterization", "100 random T satisfy the spear-type inequality at each lower bound", 1e-3,
      "index lower bound k gives max over phases of ||G + theta T|| >= 1 + k ||T||", 12)
def _characterization(budget: Budget) -> Outcome:
    rng = np.random.default_rng(1200)
    ops = [identity(lp(math.inf, 2)), identity(lp(1, 2)), identity(predual_weighted_max_root(0.5)),
           identity(gamma_dual(0.25)), _gamma_rank_one(0.5)]
    ops += [random_polygon_operator(rng, i) for i in range(6)]
    worst, lo, hi = math.inf, math.inf, -math.inf
    bad = []
    for i, G in enumerate(ops):
        rep = n_index(G, budget)
        ok, slack = characterization_check(G, rep.lower - 1e-3, count=100, seed=i)
        worst = min(worst, slack)
        lo, hi = min(lo, rep.lower), max(hi, rep.upper)
        if not ok:
            bad.append(i)
    return Outcome(not bad, Interval(lo, hi), f"smallest slack {worst:.3g}; failures {bad}")


# ---------------------------------------------------------------- Lipschitz range

def _lip_case(p: float):
    def run(budget: Budget) -> Outcome:
        X = lp(p, 2)
        low = lip_radius_lower(linear_map(X, QUARTER_TURN), 10_000, seed=budget.seed)
        up = v_radius(identity(X), QUARTER_TURN, budget).upper
        return Outcome(abs(low - up) <= 5e-2 and low <= up + 1e-6, Interval(min(low, up), max(low, up)),
                       f"sampled {low:.12g}, radius upper {up:.12g}")
    return run


for _p in (1.5, 3.0):
    case(f"lipschitz-linear-{_p:g}", "within 5e-2 of the radius upper bound", 5e-2,
         f"sampled Lipschitz range of the quarter turn on l{_p:g}^2 against its numerical radius",
         13)(_lip_case(_p))


# ---------------------------------------------------------------- running

def run_case(id: str, budget: Optional[Budget] = None) -> CaseResult:
    if id not in REGISTRY:
        raise KeyError(f"unknown bench case {id!r}")
    c = REGISTRY[id]
    t = time.perf_counter()
    out = c.run(budget or c.budget)
    return CaseResult(id, bool(out.passed), out.observed, c.expected, time.perf_counter() - t, out.detail)


def select(filter: Optional[str] = None) -> list[str]:
    """Case ids matching a glob ``filter`` in registry order (``None`` or ``all`` selects everything)."""
    if filter in (None, "", "all", "*"):
        return list(REGISTRY)
    return [k for k in REGISTRY if fnmatch.fnmatchcase(k, filter)]


def run_all(filter: Optional[str] = None, on_result: Optional[Callable[[CaseResult], None]] = None) -> list[CaseResult]:
    out = []
    for k in select(filter):
        res = run_case(k)
        out.append(res)
        if on_result is not None:
            on_result(res)
    return out


def format_row(r: CaseResult) -> str:
    return (f"{r.id:<22} {r.status:<5} [{r.observed.lower:.12g}, {r.observed.upper:.12g}]"
            f"  expected {r.expected}  ({r.seconds:.2f}s)")


def format_table(results: list[CaseResult]) -> str:
    lines = [format_row(r) for r in results]
    n_pass = sum(r.passed for r in results)
    total = sum(r.seconds for r in results)
    lines.append(f"{n_pass}/{len(results)} passed in {total:.1f}s")
    return "\n".join(lines)


def to_csv(results: list[CaseResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["case", "status", "observed_lo", "observed_hi", "expected", "seconds"])
    for r in results:
        w.writerow([r.id, r.status, f"{r.observed.lower:.12g}", f"{r.observed.upper:.12g}",
                    r.expected, f"{r.seconds:.3f}"])
    return buf.getvalue()
