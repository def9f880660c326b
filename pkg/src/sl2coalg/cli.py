"""Command-line front end.

    sl2coalg catalog
    sl2coalg verify-algebra   --kind deformed --n 3 --z 0.5
    sl2coalg verify-integrals --system poincare --param kappa=-0.5 --n 3
    sl2coalg curvature        --system z_ms --sign + --z 0.3 --at 0.7,0.4
    sl2coalg transform        --q 0.4,0.9 --z 0.6
    sl2coalg scan-curvature   --f "exp(x)" --x-range 0.01:2:50 --z 0.3
    sl2coalg simulate         --config run.json

Exit codes: 0 success, 1 verification/integration failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import jsonschema
import numpy as np

from . import catalog, coalgebra, dynamics, geometry
from .coalgebra import Realization
from .expr import ExprError
from .phase import PhaseState

__all__ = ["ConfigError", "RunConfig", "load_config", "validate_config", "run", "main"]

SCHEMA_VERSION = 1

_NUM = {"type": "number"}
_VEC = {"type": "array", "items": _NUM}
_OBJ = {"type": "object", "additionalProperties": False}

CONFIG_SCHEMA = {
    **_OBJ,
    "required": ["system", "realization"],
    "properties": {
        "schema": {"const": SCHEMA_VERSION},
        "system": {
            "oneOf": [
                {"type": "string"},
                {**_OBJ, "required": ["name"], "properties": {
                    "name": {"type": "string"},
                    "params": {"type": "object", "additionalProperties": {"type": ["number", "string"]}},
                }},
            ]
        },
        "realization": {**_OBJ, "required": ["kind", "N"], "properties": {
            "kind": {"enum": ["classical", "deformed"]},
            "N": {"type": "integer", "minimum": 1},
            "z": _NUM,
            "b": _VEC,
        }},
        "verify": {**_OBJ, "properties": {
            "samples": {"type": "integer", "minimum": 1},
            "tol": {"type": "number", "exclusiveMinimum": 0},
            "seed": {"type": "integer"},
            "ordering": {"enum": list(coalgebra.ORDERINGS)},
        }},
        "curvature": {**_OBJ, "properties": {
            "points": {"type": "array", "items": {**_VEC, "minItems": 2, "maxItems": 2}},
            "grid": {**_OBJ, "required": ["q1", "q2"], "properties": {
                "q1": {**_VEC, "minItems": 3, "maxItems": 3},
                "q2": {**_VEC, "minItems": 3, "maxItems": 3},
            }},
            "method": {"enum": ["brioschi", "both"]},
            "tol": {"type": "number", "exclusiveMinimum": 0},
            "output": {"type": "string"},
            "csv": {"type": "string"},
        }},
        "simulate": {**_OBJ, "properties": {
            "q0": _VEC,
            "p0": _VEC,
            "dt": {"type": "number", "exclusiveMinimum": 0},
            "steps": {"type": "integer", "minimum": 0},
            "integrator": {"enum": list(dynamics.INTEGRATORS)},
            "monitors": {"type": "array", "items": {"type": "string"}},
            "trajectory_csv": {"type": "string"},
            "drift_json": {"type": "string"},
        }},
        "scan": {**_OBJ, "required": ["f"], "properties": {
            "f": {"type": "string"},
            "x_range": {**_VEC, "minItems": 3, "maxItems": 3},
            "z": _NUM,
            "tol": {"type": "number", "exclusiveMinimum": 0},
        }},
        "transform": {**_OBJ, "properties": {
            "q": {**_VEC, "minItems": 2, "maxItems": 2},
            "z": _NUM,
            "lambda2sq": _NUM,
        }},
    },
}

DEFAULTS = {
    "verify": {"samples": 100, "tol": 1e-9, "seed": 42, "ordering": "ascending"},
    "curvature": {"method": "both", "tol": 1e-7},
    "simulate": {"dt": 1e-3, "steps": 10000, "integrator": "midpoint"},
    "scan": {"x_range": [0.01, 2.0, 50], "z": 1.0, "tol": 1e-9},
    "transform": {"lambda2sq": 1.0},
}


class ConfigError(ValueError):
    pass


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    system: dict
    realization: dict
    verify: dict = field(default_factory=dict)
    curvature: dict = field(default_factory=dict)
    simulate: dict = field(default_factory=dict)
    scan: dict = field(default_factory=dict)
    transform: dict = field(default_factory=dict)

    def build_realization(self) -> Realization:
        r = self.realization
        n = r["N"]
        b = r.get("b", [0.0] * n)
        if r["kind"] == "deformed":
            return Realization.deformed(n, r.get("z", 0.0), b)
        return Realization.classical(n, b)

    def build_system(self) -> catalog.SystemSpec:
        try:
            return catalog.build(self.system["name"], self.system.get("params", {}), self.build_realization())
        except (catalog.CatalogError, ExprError, ValueError) as exc:
            raise ConfigError(f"system: {exc}") from None


def validate_config(data: dict) -> RunConfig:
    """Schema-check a decoded config and fill defaults."""
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.path))
    if errors:
        e = errors[0]
        where = ".".join(str(p) for p in e.path) or "<root>"
        raise ConfigError(f"config field {where}: {e.message}")
    system = data["system"]
    if isinstance(system, str):
        system = {"name": system}
    system = {"params": {}, **system}
    if system["name"] not in catalog.CATALOG:
        raise ConfigError(f"config field system.name: unknown system {system['name']!r}; "
                          f"catalog: {', '.join(catalog.CATALOG)}")
    real = dict(data["realization"])
    if "b" in real and len(real["b"]) != real["N"]:
        raise ConfigError(f"config field realization.b: length {len(real['b'])} does not match N={real['N']}")
    if real["kind"] == "classical" and real.get("z", 0.0) != 0.0:
        raise ConfigError("config field realization.z: classical realizations take no z")
    blocks = {k: {**DEFAULTS.get(k, {}), **data.get(k, {})} for k in DEFAULTS}
    cfg = RunConfig(system, real, **blocks)
    cfg.build_system()
    return cfg


def _read_json(path: str | Path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path}: JSON parse error at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"config {path}: top level must be an object")
    return data


def load_config(path: str | Path) -> RunConfig:
    return validate_config(_read_json(path))


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _pair(text: str) -> tuple[float, float]:
    v = _floats(text)
    if len(v) != 2:
        raise argparse.ArgumentTypeError(f"expected two comma-separated numbers, got {text!r}")
    return v[0], v[1]


def _sign(text: str) -> float:
    table = {"+": 1.0, "+1": 1.0, "1": 1.0, "-": -1.0, "-1": -1.0}
    if text not in table:
        raise argparse.ArgumentTypeError(f"sign must be + or -, got {text!r}")
    return table[text]


def _range(text: str) -> list[float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"range must be start:stop:count, got {text!r}")
    try:
        return [float(parts[0]), float(parts[1]), int(parts[2])]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad range {text!r}") from None


def _param(text: str) -> tuple[str, object]:
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"parameter must be name=value, got {text!r}")
    k, v = text.split("=", 1)
    try:
        return k.strip(), float(v)
    except ValueError:
        return k.strip(), v


def _add_system(p):
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--system", help="catalog name")
    p.add_argument("--param", action="append", type=_param, default=[], metavar="NAME=VALUE",
                   help="system parameter; expressions allowed for f, T, V, U")
    for name in ("kappa", "alpha"):
        p.add_argument(f"--{name}", type=float)
    p.add_argument("--sign", type=_sign, help="+ or - (z_ms)")
    p.add_argument("--f", dest="f_expr", help="f(x) expression")
    _add_realization(p)


def _add_realization(p):
    p.add_argument("--kind", choices=["classical", "deformed"])
    p.add_argument("--n", type=int)
    p.add_argument("--z", type=float)
    p.add_argument("--b", type=_floats)


def _add_verify(p):
    p.add_argument("--samples", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="write the JSON report here")


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sl2coalg", description="sl(2) and sl_z(2) coalgebra spaces")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("catalog", help="list catalog systems")

    p = sub.add_parser("verify-algebra", help="check bracket relations and Casimir centrality")
    p.add_argument("--config")
    _add_realization(p)
    _add_verify(p)

    p = sub.add_parser("verify-integrals", help="check involution of the universal integrals")
    _add_system(p)
    _add_verify(p)
    p.add_argument("--ordering", choices=list(coalgebra.ORDERINGS))

    p = sub.add_parser("curvature", help="Gaussian curvature, closed form vs Brioschi")
    _add_system(p)
    p.add_argument("--at", type=_pair, action="append", metavar="Q1,Q2")
    p.add_argument("--grid", nargs=2, type=_range, metavar=("Q1RANGE", "Q2RANGE"))
    p.add_argument("--tol", type=float)
    p.add_argument("--out", help="curvature report JSON")
    p.add_argument("--csv", help="curvature grid CSV")

    p = sub.add_parser("transform", help="type-I geodesic polar coordinates")
    p.add_argument("--config")
    p.add_argument("--q", type=_pair, metavar="Q1,Q2")
    p.add_argument("--inverse", type=_pair, metavar="RHO,THETA")
    p.add_argument("--z", type=float)
    p.add_argument("--lambda2sq", type=float)

    p = sub.add_parser("scan-curvature", help="constant-curvature test of K(x) for H = Jp f(zJm)/2")
    p.add_argument("--config")
    p.add_argument("--f", dest="f_expr")
    p.add_argument("--x-range", type=_range)
    p.add_argument("--z", type=float)
    p.add_argument("--tol", type=float)

    p = sub.add_parser("simulate", help="integrate a catalog system")
    _add_system(p)
    p.add_argument("--q0", type=_floats)
    p.add_argument("--p0", type=_floats)
    p.add_argument("--dt", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--integrator", choices=list(dynamics.INTEGRATORS))
    p.add_argument("--monitor", action="append", help="extra monitor expression")
    p.add_argument("--csv", help="trajectory CSV path")
    p.add_argument("--drift-json", help="drift report JSON path")
    return parser


def _base_config(args) -> dict:
    """Raw config data (validated up front), or {} without --config."""
    if getattr(args, "config", None):
        data = _read_json(args.config)
        validate_config(data)
        return data
    return {}


def _merge_system(args, data: dict, default_kind: str | None = None) -> RunConfig:
    system = data.get("system", {})
    system = {"name": system} if isinstance(system, str) else dict(system)
    if getattr(args, "system", None):
        system = {"name": args.system, "params": {}}
    if not system:
        raise UsageError("no system given (use --system or --config)")
    params = dict(system.get("params", {}))
    for k, v in getattr(args, "param", []) or []:
        params[k] = v
    for k in ("kappa", "alpha"):
        if getattr(args, k, None) is not None:
            params[k] = getattr(args, k)
    if getattr(args, "sign", None) is not None:
        params["sign"] = args.sign
    if getattr(args, "f_expr", None) is not None:
        params["f"] = args.f_expr
    system["params"] = params
    name = system.get("name")
    entry = catalog.CATALOG.get(name)
    real = dict(data.get("realization", {}))
    kind = args.kind or real.get("kind") or (entry.kind if entry else default_kind) or "classical"
    real["kind"] = kind
    real["N"] = args.n if args.n is not None else real.get("N", 2)
    if args.z is not None:
        real["z"] = args.z
    if args.b is not None:
        real["b"] = args.b
    merged = {**{k: v for k, v in data.items() if k not in ("system", "realization")},
              "system": system, "realization": real}
    return validate_config(merged)


def _write(path: str | None, text: str):
    if path:
        Path(path).write_text(text)


def _override(block: dict, args, names: Sequence[str]) -> dict:
    out = dict(block)
    for n in names:
        v = getattr(args, n, None)
        if v is not None:
            out[n] = v
    return out


def cmd_catalog(args) -> int:
    for name, params, anchor, kind in catalog.list_catalog():
        print(f"{name:12s} {kind:9s} params=[{', '.join(params)}]  {anchor}")
    return 0


def cmd_verify_algebra(args) -> int:
    data = _base_config(args)
    real = dict(data.get("realization", {"kind": "classical", "N": 2}))
    if args.kind:
        real["kind"] = args.kind
    if args.n is not None:
        real["N"] = args.n
    if args.z is not None:
        real["z"] = args.z
    if args.b is not None:
        real["b"] = args.b
    cfg = validate_config({**{k: v for k, v in data.items() if k != "realization"},
                           "system": data.get("system", "euclidean") if real["kind"] == "classical" else "z_type_I",
                           "realization": real})
    v = _override(cfg.verify, args, ("samples", "tol", "seed"))
    rep = coalgebra.verify_algebra(cfg.build_realization(), v["samples"], v["tol"], v["seed"])
    print(rep.summary())
    for rel, res in rep.per_relation.items():
        print(f"  {rel:10s} {res:.3e}")
    _write(args.out, rep.to_json() + "\n")
    return 0 if rep.passed else 1


def cmd_verify_integrals(args) -> int:
    cfg = _merge_system(args, _base_config(args))
    spec = cfg.build_system()
    v = _override(cfg.verify, args, ("samples", "tol", "seed", "ordering"))
    r = spec.realization
    if r.n < 2:
        raise UsageError("integral families need N >= 2")
    if r.kind == "classical":
        fam = coalgebra.classical_integrals(r.n, r.b)
    else:
        fam = coalgebra.deformed_integrals(r.n, r.z, r.b, v["ordering"])
    rep = coalgebra.verify_involution(spec.hamiltonian, fam, v["samples"], v["tol"], v["seed"])
    print(rep.summary())
    _write(args.out, rep.to_json() + "\n")
    return 0 if rep.passed else 1


def _grid_points(grid) -> list[tuple[float, float]]:
    g1 = np.linspace(grid[0][0], grid[0][1], int(grid[0][2]))
    g2 = np.linspace(grid[1][0], grid[1][1], int(grid[1][2]))
    return [(float(a), float(b)) for a in g1 for b in g2]


def cmd_curvature(args) -> int:
    cfg = _merge_system(args, _base_config(args))
    spec = cfg.build_system()
    block = dict(cfg.curvature)
    if args.tol is not None:
        block["tol"] = args.tol
    if args.at:
        points = list(args.at)
    elif args.grid:
        points = _grid_points(args.grid)
    elif "points" in block:
        points = [tuple(p) for p in block["points"]]
    elif "grid" in block:
        points = _grid_points([block["grid"]["q1"], block["grid"]["q2"]])
    else:
        raise UsageError("no evaluation points (use --at, --grid or curvature.points)")
    try:
        rep = geometry.curvature_report(spec, points)
    except (geometry.GeometryError, ArithmeticError) as exc:
        raise ConfigError(str(exc)) from None
    ok = True
    for (q1, q2), kc, kb in zip(rep.points, rep.k_closed, rep.k_brioschi):
        line = f"q=({q1:.6g},{q2:.6g})"
        if kc is not None:
            line += f" K_closed={kc:.12g}"
            ok &= abs(kc - kb) <= block["tol"] * (1.0 + abs(kc))
        line += f" K_brioschi={kb:.12g}"
        print(line)
    if rep.max_discrepancy is not None:
        print(f"max |K_closed - K_brioschi| = {rep.max_discrepancy:.3e}")
    _write(args.out or block.get("output"), rep.to_json() + "\n")
    _write(args.csv or block.get("csv"), rep.to_csv())
    return 0 if ok else 1


def cmd_transform(args) -> int:
    data = _base_config(args)
    block = {**DEFAULTS["transform"], **data.get("transform", {})}
    if args.q is not None:
        block["q"] = list(args.q)
    if args.z is not None:
        block["z"] = args.z
    if args.lambda2sq is not None:
        block["lambda2sq"] = args.lambda2sq
    if "z" not in block:
        raise UsageError("transform needs --z")
    z, l2 = block["z"], block["lambda2sq"]
    try:
        if args.inverse is not None:
            q1, q2 = geometry.from_polar(args.inverse[0], args.inverse[1], z, l2)
            print(f"q1={float(q1):.17g} q2={float(q2):.17g}")
            return 0
        if "q" not in block:
            raise UsageError("transform needs --q or --inverse")
        rho, theta = geometry.to_polar(block["q"], z, l2)
    except geometry.GeometryError as exc:
        raise ConfigError(str(exc)) from None
    print(f"rho={float(rho):.17g} theta={float(theta):.17g}")
    return 0


def cmd_scan(args) -> int:
    data = _base_config(args)
    block = {**DEFAULTS["scan"], **data.get("scan", {})}
    if args.f_expr is not None:
        block["f"] = args.f_expr
    for k, attr in (("x_range", "x_range"), ("z", "z"), ("tol", "tol")):
        if getattr(args, attr) is not None:
            block[k] = getattr(args, attr)
    if "f" not in block:
        raise UsageError("scan-curvature needs --f")
    a, b, n = block["x_range"]
    verdict = geometry.constant_curvature_scan(block["f"], np.linspace(a, b, int(n)), block["z"], block["tol"])
    print(f"f(x) = {block['f']}: {verdict}")
    return 0


def cmd_simulate(args) -> int:
    cfg = _merge_system(args, _base_config(args))
    spec = cfg.build_system()
    block = _override(cfg.simulate, args, ("q0", "p0", "dt", "steps", "integrator"))
    if args.csv:
        block["trajectory_csv"] = args.csv
    if args.drift_json:
        block["drift_json"] = args.drift_json
    n = spec.n
    q0 = block.get("q0")
    p0 = block.get("p0", [0.0] * n)
    if q0 is None:
        raise UsageError("simulate needs an initial position (--q0 or simulate.q0)")
    if len(q0) != n or len(p0) != n:
        raise ConfigError(f"config field simulate.q0/p0: need {n} entries each")
    monitors = dynamics.default_monitors(spec)
    for src in list(block.get("monitors", [])) + list(args.monitor or []):
        monitors.append(coalgebra.compile_observable(src, spec.realization, spec.hamiltonian.params, name=src))
    traj, drift = dynamics.simulate(spec, PhaseState(q0, p0), block["dt"], block["steps"], monitors,
                                    block["integrator"])
    for name, m in drift.monitors.items():
        print(f"{name:12s} initial={m['initial']:.12g} max_abs_drift={m['max_abs_drift']:.3e} "
              f"rel_drift={m['rel_drift']:.3e}")
    _write(block.get("trajectory_csv"), traj.to_csv())
    _write(block.get("drift_json"), drift.to_json() + "\n")
    if drift.error:
        print(f"error: integration aborted at {drift.error}", file=sys.stderr)
        return 1
    return 0


COMMANDS = {
    "catalog": cmd_catalog,
    "verify-algebra": cmd_verify_algebra,
    "verify-integrals": cmd_verify_integrals,
    "curvature": cmd_curvature,
    "transform": cmd_transform,
    "scan-curvature": cmd_scan,
    "simulate": cmd_simulate,
}


def run(argv: Sequence[str] | None = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except (UsageError, ConfigError, catalog.CatalogError, ExprError) as exc:
        print(f"error: {exc}".replace("\n", " "), file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}".replace("\n", " "), file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())
