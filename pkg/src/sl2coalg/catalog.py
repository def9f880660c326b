"""Named coalgebra Hamiltonians and the generic f-/potential-family builders.

Every entry is an expression in the generators ``Jm, Jp, J3``.  Free functions
(``f``, ``T``, ``V``, ``U``) are DSL expressions in the single variable ``x``,
which is bound to ``Jm`` (classical families) or ``z*Jm`` (deformed families).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

from . import dual
from .coalgebra import Realization, compile_observable
from .expr import Ast, Binary, Const, Symbol, evaluate, parse, substitute
from .phase import Observable

__all__ = ["CatalogEntry", "SystemSpec", "CatalogError", "CATALOG", "build", "list_catalog"]


class CatalogError(ValueError):
    pass


# closed-form Gaussian curvature: (q1, q2, params, z) -> K
CurvatureFn = Callable[[object, object, Mapping[str, float], float], object]


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    params: tuple[str, ...]
    anchor: str
    kind: str  # classical | deformed
    template: Callable[[Mapping[str, object]], Ast] = field(repr=False)
    metric_convention: str = "paper-f"
    known_curvature: CurvatureFn | None = field(default=None, repr=False)
    curvature_label: str | None = None
    expr_params: tuple[str, ...] = ()


@dataclass(frozen=True)
class SystemSpec:
    name: str
    realization: Realization
    hamiltonian: Observable
    params: Mapping[str, object]
    metric_convention: str
    known_curvature: CurvatureFn | None = field(default=None, repr=False)
    curvature_label: str | None = None

    @property
    def n(self) -> int:
        return self.realization.n


_X = "x"


def _fx(src: str, arg: Ast) -> Ast:
    return substitute(parse(src), {_X: arg})


_JM = Symbol("Jm")
_ZJM = Binary("*", Symbol("z"), Symbol("Jm"))


def _half_jp_times(factor: Ast) -> Ast:
    return Binary("/", Binary("*", factor, Symbol("Jp")), Const(2.0))


def _r2(q1, q2):
    return q1 * q1 + q2 * q2


def _k_z_type_i(q1, q2, prm, z):
    return -z * dual.sinh(z * _r2(q1, q2))


def _k_z_j3sq(q1, q2, prm, z):
    a = prm["alpha"]
    x = z * _r2(q1, q2)
    return a / 2.0 - 1.5 * a * dual.cosh(2.0 * x) - z * dual.sinh(x)


CATALOG: dict[str, CatalogEntry] = {
    e.name: e
    for e in [
        CatalogEntry(
            "euclidean", (), "free motion on the flat plane: H = Jp/2", "classical",
            lambda prm: parse("Jp/2"),
            known_curvature=lambda q1, q2, prm, z: 0.0, curvature_label="K = 0",
        ),
        CatalogEntry(
            "poincare", ("kappa",), "Poincare-type constant curvature: H = (1+kappa Jm)^2 Jp/2", "classical",
            lambda prm: parse("(1+kappa*Jm)^2*Jp/2"),
            known_curvature=lambda q1, q2, prm, z: 2.0 * prm["kappa"],
            curvature_label="K = 2 kappa (ds^2 = 2/f dq^2 with f = (1+kappa x)^2)",
        ),
        CatalogEntry(
            "beltrami", ("kappa",), "Beltrami-type constant curvature: H = (1+kappa Jm)(Jp + kappa J3^2)/2", "classical",
            lambda prm: parse("(1+kappa*Jm)*(Jp+kappa*J3^2)/2"),
            metric_convention="lagrangian",
            known_curvature=lambda q1, q2, prm, z: prm["kappa"], curvature_label="K = kappa",
        ),
        CatalogEntry(
            "f_family", ("f",), "conformally flat family: H = f(Jm) Jp/2", "classical",
            lambda prm: _half_jp_times(_fx(prm["f"], _JM)),
            expr_params=("f",),
        ),
        CatalogEntry(
            "darboux3", ("alpha",), "Darboux III space: H = Jp/(2(alpha+Jm))", "classical",
            lambda prm: parse("Jp/2/(alpha+Jm)"),
            known_curvature=lambda q1, q2, prm, z: -prm["alpha"] / dual.power(prm["alpha"] + _r2(q1, q2), 3),
            curvature_label="K = -alpha/(alpha+q^2)^3",
        ),
        CatalogEntry(
            "j3sq", ("alpha",), "J3-squared deformation: H = Jp/2 + alpha J3^2", "classical",
            lambda prm: parse("Jp/2 + alpha*J3^2"),
            known_curvature=lambda q1, q2, prm, z: -prm["alpha"], curvature_label="K = -alpha",
        ),
        CatalogEntry(
            "j3sq_jm", ("alpha",), "Jm J3-squared deformation: H = Jp/2 + alpha Jm J3^2", "classical",
            lambda prm: parse("Jp/2 + alpha*Jm*J3^2"),
            known_curvature=lambda q1, q2, prm, z: -2.0 * prm["alpha"] * _r2(q1, q2),
            curvature_label="K = -2 alpha q^2",
        ),
        CatalogEntry(
            "potential", ("T", "V"), "kinetic term plus central potential: H = T(Jp,Jm,J3) + V(Jm)", "classical",
            lambda prm: Binary("+", parse(prm["T"]), _fx(prm["V"], _JM)),
            expr_params=("T", "V"),
        ),
        CatalogEntry(
            "z_f_family", ("f",), "deformed conformal family: H = Jp f(z Jm)/2", "deformed",
            lambda prm: _half_jp_times(_fx(prm["f"], _ZJM)),
            expr_params=("f",),
        ),
        CatalogEntry(
            "z_type_I", (), "deformed free motion (type I space): H = Jp/2", "deformed",
            lambda prm: parse("Jp/2"),
            known_curvature=_k_z_type_i, curvature_label="K = -z sinh(z q^2)",
        ),
        CatalogEntry(
            "z_ms", ("sign",), "deformed sphere/hyperbolic plane: H = Jp exp(+-z Jm)/2", "deformed",
            lambda prm: parse("Jp*exp(sign*z*Jm)/2"),
            known_curvature=lambda q1, q2, prm, z: prm["sign"] * z, curvature_label="K = sign z",
        ),
        CatalogEntry(
            "z_j3sq", ("alpha",), "deformed J3-squared system: H = Jp/2 + alpha J3^2", "deformed",
            lambda prm: parse("Jp/2 + alpha*J3^2"),
            known_curvature=_k_z_j3sq,
            curvature_label="K = alpha/2 - 3 alpha/2 cosh(2 z q^2) - z sinh(z q^2)",
        ),
        CatalogEntry(
            "z_potential", ("f", "U"), "deformed kinetic term plus potential: H = Jp f(z Jm)/2 + U(z Jm)", "deformed",
            lambda prm: Binary("+", _half_jp_times(_fx(prm["f"], _ZJM)), _fx(prm["U"], _ZJM)),
            expr_params=("f", "U"),
        ),
    ]
}

_CLASSICAL_TWIN = {"z_type_I": "euclidean", "z_ms": "euclidean", "z_j3sq": "j3sq"}


def list_catalog() -> list[tuple[str, tuple[str, ...], str, str]]:
    """(name, parameter names, anchor, valid realization kind) for every entry."""
    return [(e.name, e.params, e.anchor, e.kind) for e in CATALOG.values()]


def _check_limit(src: str, what: str, target: float | None):
    ast = parse(src)
    try:
        v = float(evaluate(ast, {_X: 1e-8}))
    except Exception as exc:
        raise CatalogError(f"{what}-expression {src!r} cannot be evaluated near x = 0: {exc}") from None
    if target is not None and abs(v - target) > 1e-6:
        raise CatalogError(f"{what}-expression {src!r} must tend to {target} as x -> 0, got {v!r}")


def build(name: str, params: Mapping[str, object] | None = None,
          realization: Realization | None = None) -> SystemSpec:
    """Instantiate catalog entry ``name``.

    ``z`` may be passed in ``params`` for deformed entries; it then overrides
    the realization's deformation parameter.  Without a realization an N=2,
    b=0 realization of the entry's kind is used.
    """
    if name not in CATALOG:
        raise CatalogError(f"unknown system {name!r}; catalog: {', '.join(CATALOG)}")
    entry = CATALOG[name]
    params = dict(params or {})
    z = params.pop("z", None)
    if z is not None and entry.kind != "deformed":
        raise CatalogError(f"{name}: parameter z applies to deformed systems only")
    if realization is None:
        if entry.kind == "deformed":
            realization = Realization.deformed(2, 0.0 if z is None else float(z))
        else:
            realization = Realization.classical(2)
    elif z is not None:
        if realization.kind != "deformed":
            raise CatalogError(f"{name}: parameter z requires a deformed realization")
        realization = Realization.deformed(realization.n, float(z), realization.b)
    if realization.kind != entry.kind:
        raise CatalogError(f"{name} needs a {entry.kind} realization, got {realization.kind}")
    given, wanted = set(params), set(entry.params)
    if given != wanted:
        parts = []
        if wanted - given:
            parts.append(f"missing {sorted(wanted - given)}")
        if given - wanted:
            parts.append(f"unexpected {sorted(given - wanted)}")
        raise CatalogError(f"{name}: {'; '.join(parts)} (expects {list(entry.params)})")
    numeric = {}
    for k, v in params.items():
        if k in entry.expr_params:
            if not isinstance(v, str):
                raise CatalogError(f"{name}: parameter {k} must be an expression string")
        else:
            try:
                numeric[k] = float(v)
            except (TypeError, ValueError):
                raise CatalogError(f"{name}: parameter {k} must be a number, got {v!r}") from None
            if not math.isfinite(numeric[k]):
                raise CatalogError(f"{name}: parameter {k} must be finite")
    if name == "z_ms" and numeric["sign"] not in (1.0, -1.0):
        raise CatalogError("z_ms: sign must be +1 or -1")
    if entry.kind == "deformed":
        if "f" in params:
            _check_limit(params["f"], "f", 1.0)
        if "U" in params:
            _check_limit(params["U"], "U", None)
    ast = entry.template(params)
    ham = compile_observable(ast, realization, numeric, name=name)
    return SystemSpec(name, realization, ham, {**params, **({"z": realization.z} if entry.kind == "deformed" else {})},
                      entry.metric_convention, entry.known_curvature, entry.curvature_label)


def classical_twin(spec: SystemSpec) -> SystemSpec:
    """Classical counterpart of a deformed system (z -> 0 limit)."""
    if spec.realization.kind != "deformed":
        raise CatalogError(f"{spec.name} is already classical")
    r = Realization.classical(spec.realization.n, spec.realization.b)
    prm = {k: v for k, v in spec.params.items() if k != "z"}
    if spec.name in _CLASSICAL_TWIN:
        prm.pop("sign", None)
        return build(_CLASSICAL_TWIN[spec.name], prm, r)
    if spec.name == "z_f_family":
        return build("euclidean", {}, r)
    if spec.name == "z_potential":
        # U(z Jm) -> U(0) pointwise as z -> 0
        u0 = float(evaluate(parse(prm["U"]), {_X: 0.0}))
        return build("potential", {"T": "Jp/2", "V": repr(u0) if u0 >= 0 else f"0-{-u0!r}"}, r)
    raise CatalogError(f"no classical twin for {spec.name}")
