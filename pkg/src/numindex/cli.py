"""Command-line front end.

A JSON config declares spaces and operators by name; subcommands pick them
with flags, run one computation and print a block of ``key = value`` lines
(floats with 12 significant digits).  Exit status: 0 success, 1 computation
diagnostic, 2 usage or config error.
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass, field as dc_field
import json
import logging
import math
import os
import sys
from typing import Optional

import numpy as np

from . import bench
from .index import abstract_index, index_value_scan, n_index
from .interval import Interval
from .lipschitz import abs_map, lip_radius_lower, lip_range_sample, linear_map, radial_map
from .numrange import range_cloud, v_radius
from .operators import Operator, normalize, op_norm
from .optimize import Budget, InfeasibleError, OptimizationError
from .spaces import (Field, NoCertifiedFace, NormedSpace, absolute_sum, dual_of, gamma_dual, gamma_norm,
                     lp, polyhedral, weighted_max_root)

log = logging.getLogger(__name__)

TOP_KEYS = {"field", "spaces", "operators", "budgets", "seed"}
BUDGET_KEYS = {"starts", "iterations", "grid_depth"}
FAMILY_PARAMS = {
    "lp": ({"p", "dim"}, set()),
    "wmr": ({"r"}, set()),
    "gamma": ({"gamma"}, set()),
    "gammadual": ({"gamma"}, set()),
    "poly": ({"functionals"}, set()),
    "sum": ({"parts", "outer"}, set()),
    "dualof": ({"of"}, set()),
}
OPERATOR_KEYS = {"domain", "codomain", "matrix"}
OPERATOR_OPTIONAL = {"normalize"}


class ConfigError(ValueError):
    """Invalid config file or reference; maps to exit status 2."""


@dataclass
class Config:
    field: Field
    spaces: dict
    operators: dict
    budget: Budget = Budget()
    seed: int = 0
    raw: dict = dc_field(default_factory=dict, repr=False)


# ---------------------------------------------------------------- formatting

def fmt(x) -> str:
    x = complex(x) if np.iscomplexobj(x) else float(x)
    if isinstance(x, complex):
        return f"{x.real:.12g}{x.imag:+.12g}j"
    return f"{x:.12g}"


def fmt_interval(iv: Interval) -> str:
    return f"[{fmt(iv.lower)}, {fmt(iv.upper)}]"


def fmt_vector(v) -> str:
    return "[" + ", ".join(fmt(c) for c in np.ravel(v)) + "]"


def emit(lines: list[tuple[str, str]]) -> None:
    for k, v in lines:
        print(f"{k} = {v}")


# ---------------------------------------------------------------- config parsing

def _fail_keys(where: str, got: set, required: set, optional: set = frozenset()):
    unknown = got - required - optional
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    missing = required - got
    if missing:
        raise ConfigError(f"{where}: missing keys {sorted(missing)}")


def _number(v, where: str, complex_ok: bool):
    if isinstance(v, bool):
        raise ConfigError(f"{where}: booleans are not numbers")
    if isinstance(v, (int, float)):
        return float(v)
    if isinstance(v, str) and v.lower() in ("inf", "infinity"):
        return math.inf
    if complex_ok and isinstance(v, list) and len(v) == 2 and all(
            isinstance(c, (int, float)) and not isinstance(c, bool) for c in v):
        return complex(v[0], v[1])
    raise ConfigError(f"{where}: expected a number{' or [re, im]' if complex_ok else ''}, got {v!r}")


def parse_matrix(rows, where: str, complex_ok: bool) -> np.ndarray:
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise ConfigError(f"{where}: matrix must be a nonempty list of rows")
    if len({len(r) for r in rows}) != 1:
        raise ConfigError(f"{where}: rows of different lengths")
    vals = [[_number(v, where, complex_ok) for v in r] for r in rows]
    return np.array(vals, dtype=complex if complex_ok else float)


def parse_vector(text: str, space: NormedSpace, where: str) -> np.ndarray:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{where}: {e}") from None
    if not isinstance(data, list):
        raise ConfigError(f"{where}: expected a JSON list")
    v = np.array([_number(c, where, space.is_complex) for c in data],
                 dtype=complex if space.is_complex else float)
    if len(v) != space.dim:
        raise ConfigError(f"{where}: length {len(v)} does not match dimension {space.dim}")
    return v


def _build_space(name: str, decl, decls: dict, built: dict, fld: Field, stack: tuple) -> NormedSpace:
    if name in built:
        return built[name]
    if name in stack:
        raise ConfigError(f"space {name!r}: circular reference through {' -> '.join(stack + (name,))}")
    where = f"spaces.{name}"
    if not isinstance(decl, dict):
        raise ConfigError(f"{where}: expected an object")
    _fail_keys(where, set(decl), {"family", "params"})
    fam, params = decl["family"], decl["params"]
    if fam not in FAMILY_PARAMS:
        raise ConfigError(f"{where}: unknown family {fam!r}")
    if not isinstance(params, dict):
        raise ConfigError(f"{where}.params: expected an object")
    _fail_keys(f"{where}.params", set(params), *FAMILY_PARAMS[fam])

    def ref(n):
        if not isinstance(n, str) or n not in decls:
            raise ConfigError(f"{where}: reference to undeclared space {n!r}")
        return _build_space(n, decls[n], decls, built, fld, stack + (name,))

    try:
        if fam == "lp":
            dim = params["dim"]
            if not isinstance(dim, int) or isinstance(dim, bool):
                raise ConfigError(f"{where}: dim must be an integer")
            sp = lp(_number(params["p"], where, False), dim, fld)
        elif fam == "wmr":
            sp = weighted_max_root(_number(params["r"], where, False), fld)
        elif fam == "gamma":
            sp = gamma_norm(_number(params["gamma"], where, False), fld)
        elif fam == "gammadual":
            sp = gamma_dual(_number(params["gamma"], where, False), fld)
        elif fam == "poly":
            if fld is Field.COMPLEX:
                raise ConfigError(f"{where}: polyhedral norms are real")
            sp = polyhedral(parse_matrix(params["functionals"], where, False))
        elif fam == "sum":
            parts = params["parts"]
            if not isinstance(parts, list) or not parts:
                raise ConfigError(f"{where}: parts must be a nonempty list of space names")
            outer = params["outer"]
            if outer not in ("l1", "linf", "l2"):
                outer = ref(outer)
            sp = absolute_sum([ref(p) for p in parts], outer)
        else:
            sp = dual_of(ref(params["of"]))
    except ConfigError:
        raise
    except (ValueError, TypeError) as e:
        raise ConfigError(f"{where}: {e}") from None
    sp.label = name
    built[name] = sp
    return sp


def parse_config_text(text: str, env_seed: Optional[str] = None) -> Config:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"parse error at line {e.lineno}, column {e.colno}: {e.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    _fail_keys("config", set(raw), {"field", "spaces"}, TOP_KEYS - {"field", "spaces"})
    if raw["field"] not in ("real", "complex"):
        raise ConfigError(f"field must be 'real' or 'complex', got {raw['field']!r}")
    fld = Field(raw["field"])
    decls = raw["spaces"]
    if not isinstance(decls, dict):
        raise ConfigError("spaces must be an object")
    built: dict = {}
    for name, decl in decls.items():
        _build_space(name, decl, decls, built, fld, ())
    ops = {}
    op_decls = raw.get("operators", {})
    if not isinstance(op_decls, dict):
        raise ConfigError("operators must be an object")
    for name, decl in op_decls.items():
        where = f"operators.{name}"
        if name in built:
            raise ConfigError(f"{where}: name already used by a space")
        if not isinstance(decl, dict):
            raise ConfigError(f"{where}: expected an object")
        _fail_keys(where, set(decl), OPERATOR_KEYS, OPERATOR_OPTIONAL)
        for side in ("domain", "codomain"):
            if decl[side] not in built:
                raise ConfigError(f"{where}: {side} references undeclared space {decl[side]!r}")
        X, Y = built[decl["domain"]], built[decl["codomain"]]
        if decl["matrix"] == "identity":
            if X.dim != Y.dim:
                raise ConfigError(f"{where}: identity needs a square matrix, spaces have "
                                  f"dimensions {X.dim} and {Y.dim}")
            M = np.eye(X.dim)
        else:
            M = parse_matrix(decl["matrix"], where, fld is Field.COMPLEX)
            if M.shape != (Y.dim, X.dim):
                raise ConfigError(f"{where}: matrix is {M.shape[0]} x {M.shape[1]}, spaces need "
                                  f"{Y.dim} x {X.dim}")
        norm_flag = decl.get("normalize", False)
        if not isinstance(norm_flag, bool):
            raise ConfigError(f"{where}: normalize must be true or false")
        G = Operator(X, Y, M, label=name)
        if norm_flag:
            G = normalize(G)
            G.label = name
        ops[name] = G
    budgets = raw.get("budgets", {})
    if not isinstance(budgets, dict):
        raise ConfigError("budgets must be an object")
    _fail_keys("budgets", set(budgets), set(), BUDGET_KEYS)
    for k, v in budgets.items():
        if not isinstance(v, int) or isinstance(v, bool):
            raise ConfigError(f"budgets.{k}: expected an integer")
    seed = raw.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigError("seed must be an integer")
    if env_seed is not None:
        try:
            seed = int(env_seed)
        except ValueError:
            raise ConfigError(f"NUMINDEX_SEED must be an integer, got {env_seed!r}") from None
    try:
        budget = Budget(seed=seed, **budgets)
    except ValueError as e:
        raise ConfigError(str(e)) from None
    return Config(fld, built, ops, budget, seed, raw)


def parse_config(path: str) -> Config:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise ConfigError(f"cannot read config {path!r}: {e.strerror}") from None
    return parse_config_text(text, os.environ.get("NUMINDEX_SEED"))


# ---------------------------------------------------------------- subcommands

def _op(cfg: Config, name: Optional[str], flag: str) -> Operator:
    if name is None:
        raise ConfigError(f"{flag} is required")
    if name not in cfg.operators:
        raise ConfigError(f"unknown operator {name!r}")
    return cfg.operators[name]


def _space(cfg: Config, name: Optional[str]) -> NormedSpace:
    if name is None:
        raise ConfigError("-S/--space is required")
    if name not in cfg.spaces:
        raise ConfigError(f"unknown space {name!r}")
    return cfg.spaces[name]


def cmd_norm(cfg: Config, a) -> int:
    S = _space(cfg, a.space)
    if a.vector is None:
        raise ConfigError("-x/--vector is required")
    v = parse_vector(a.vector, S, "--vector")
    emit([("space", S.label), ("vector", fmt_vector(v)), ("norm", fmt(S.norm(v))),
          ("dual_norm", fmt(S.dual_norm(v)))])
    return 0


def cmd_opnorm(cfg: Config, a) -> int:
    G = _op(cfg, a.G, "-G")
    emit([("operator", G.label), ("norm", fmt_interval(op_norm(G)))])
    return 0


def cmd_vradius(cfg: Config, a) -> int:
    G, T = _op(cfg, a.G, "-G"), _op(cfg, a.T, "-T")
    est = v_radius(G, T, cfg.budget, spatial=a.spatial)
    lines = [("G", G.label), ("T", T.label), ("method", est.method), ("radius", fmt_interval(est.value))]
    if "spatial" in est.extras:
        lines.append(("spatial", fmt(est.extras["spatial"])))
    if est.witness_pair is not None:
        lines += [("witness_x", fmt_vector(est.witness_pair[0])),
                  ("witness_ystar", fmt_vector(est.witness_pair[1]))]
    emit(lines)
    return 0


def _report_lines(rep) -> list:
    lines = [("method", rep.method), ("index", fmt_interval(rep.value))]
    if rep.witness is not None:
        lines.append(("witness", fmt_vector(rep.witness)))
    lines += [("note", n) for n in rep.notes]
    return lines


def cmd_nindex(cfg: Config, a) -> int:
    if a.G is not None:
        G = _op(cfg, a.G, "-G")
        rep = n_index(G, cfg.budget, a.mesh, a.method)
        emit([("G", G.label)] + _report_lines(rep))
    else:
        S = _space(cfg, a.space)
        if a.vector is None:
            raise ConfigError("nindex needs -G, or -S with -x")
        u = parse_vector(a.vector, S, "--vector")
        rep = abstract_index(S, u, cfg.budget, a.method)
        emit([("space", S.label), ("point", fmt_vector(u))] + _report_lines(rep))
    return 0


def cmd_range(cfg: Config, a) -> int:
    G, T = _op(cfg, a.G, "-G"), _op(cfg, a.T, "-T")
    cloud = range_cloud(G, T, a.delta, a.samples, cfg.seed)
    emit([("G", G.label), ("T", T.label), ("delta", fmt(cloud.delta)), ("points", str(len(cloud.points))),
          ("hull_radius", fmt(cloud.hull_radius))])
    if a.out:
        cloud.to_csv(a.out)
        emit([("csv", a.out)])
    return 0


def cmd_scan(cfg: Config, a) -> int:
    X = _space(cfg, a.space)
    Y = _space(cfg, a.codomain) if a.codomain else X
    extra = [_op(cfg, n, "--with") for n in (a.extra or [])]
    reps = index_value_scan(X, Y, a.samples, cfg.budget, cfg.seed, extra)
    lines = [("X", X.label), ("Y", Y.label), ("values", str(len(reps)))]
    for r in reps:
        lines.append(("value", f"{fmt_interval(r.value)} {r.method}"))
    emit(lines)
    return 0


def cmd_lip(cfg: Config, a) -> int:
    S = _space(cfg, a.space)
    if a.map == "linear":
        T = _op(cfg, a.T, "-T")
        if T.domain is not S or T.codomain is not S:
            raise ConfigError("linear map must be an operator from the space to itself")
        F = linear_map(S, T.matrix)
    elif a.map == "radial":
        F = radial_map(S)
    else:
        try:
            F = abs_map(S)
        except ValueError as e:
            raise ConfigError(str(e)) from None
    cloud = lip_range_sample(F, a.pairs, cfg.seed)
    low = lip_radius_lower(F, a.pairs, cfg.seed)
    emit([("space", S.label), ("map", F.label), ("pairs", str(a.pairs)), ("skipped", str(cloud.skipped)),
          ("hull_radius", fmt(cloud.hull_radius)), ("radius_lower", fmt(low)),
          ("slope_violations", str(F.violations))])
    if a.out:
        cloud.to_csv(a.out)
        emit([("csv", a.out)])
    return 1 if F.violations else 0


def cmd_bench(a) -> int:
    ids = bench.select(a.filter)
    results = bench.run_all(a.filter, on_result=lambda r: print(bench.format_row(r), flush=True))
    n_pass = sum(r.passed for r in results)
    print(f"{n_pass}/{len(ids)} passed")
    if a.out:
        with open(a.out, "w", newline="") as fh:
            fh.write(bench.to_csv(results))
    return 0 if n_pass == len(results) else 1


# ---------------------------------------------------------------- entry point

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="numindex", description="Numerical ranges and indices of operators.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def with_config(name, help):
        sp = sub.add_parser(name, help=help)
        sp.add_argument("-c", "--config", required=True, help="JSON config file")
        return sp

    sp = with_config("norm", "norm and dual norm of a vector")
    sp.add_argument("-S", "--space")
    sp.add_argument("-x", "--vector", help="JSON list, complex entries as [re, im]")
    sp = with_config("opnorm", "operator norm enclosure")
    sp.add_argument("-G")
    sp = with_config("vradius", "numerical radius of T relative to G")
    sp.add_argument("-G")
    sp.add_argument("-T")
    sp.add_argument("--spatial", action="store_true", help="also run the relaxed spatial estimate")
    sp = with_config("nindex", "index of an operator (-G) or of a point (-S, -x)")
    sp.add_argument("-G")
    sp.add_argument("-S", "--space")
    sp.add_argument("-x", "--vector")
    sp.add_argument("--method", default="auto", choices=["auto", "structural", "bruteforce", "optimizer"])
    sp.add_argument("--mesh", type=float, default=0.02)
    sp = with_config("range", "point cloud of the numerical range")
    sp.add_argument("-G")
    sp.add_argument("-T")
    sp.add_argument("--delta", type=float, default=0.0)
    sp.add_argument("--samples", type=int, default=256)
    sp.add_argument("--out")
    sp = with_config("scan", "sampled index values over operators X -> Y")
    sp.add_argument("-S", "--space", help="domain")
    sp.add_argument("-Y", "--codomain")
    sp.add_argument("--samples", type=int, default=4)
    sp.add_argument("--with", dest="extra", action="append", help="operator name to include")
    sp = with_config("lip", "sampled Lipschitz numerical range")
    sp.add_argument("-S", "--space")
    sp.add_argument("--map", default="linear", choices=["linear", "radial", "abs"])
    sp.add_argument("-T")
    sp.add_argument("--pairs", type=int, default=10_000)
    sp.add_argument("--out")
    sp = sub.add_parser("bench", help="run the reproduction cases")
    sp.add_argument("--filter", default="all", help="glob over case ids, or 'all'")
    sp.add_argument("--out", help="CSV report path")
    return p


COMMANDS = {"norm": cmd_norm, "opnorm": cmd_opnorm, "vradius": cmd_vradius, "nindex": cmd_nindex,
            "range": cmd_range, "scan": cmd_scan, "lip": cmd_lip}


def dispatch(argv: Optional[list] = None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 2
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if a.command == "bench":
            return cmd_bench(a)
        cfg = parse_config(a.config)
        return COMMANDS[a.command](cfg, a)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (NoCertifiedFace, OptimizationError, InfeasibleError, FloatingPointError) as e:
        print(f"diagnostic: {e}", file=sys.stderr)
        return 1
    except ValueError as e:
        # bad values that only surface inside a computation (non-unit points, sizes)
        print(f"error: {e}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(dispatch())
