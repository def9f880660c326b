"""Symplectic realizations of sl(2) and sl_z(2), Casimirs and universal integrals.

The classical realization on N degrees of freedom is

    Jm = sum q_i^2,   J3 = sum q_i p_i,   Jp = sum (p_i^2 + b_i / q_i^2)

and the non-standard deformation multiplies site ``i`` by ``sinhc(z q_i^2)``
(momentum terms), replaces ``b_i/q_i^2`` by ``z b_i / sinh(z q_i^2)`` and
weights everything by ``exp(z K_i)`` with
``K_i = -sum_{k<i} q_k^2 + sum_{l>i} q_l^2``.  All ``1/z`` factors are written
through ``sinhc`` so ``z = 0`` reproduces the classical values exactly.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import dual
from .expr import Ast, UnboundSymbolError, compile_ast, free_symbols, parse
from .phase import (
    Observable,
    PhaseState,
    canonical_names,
    evaluate,
    gradient,
    random_state,
    value_and_gradient,
)

__all__ = [
    "Realization",
    "GeneratorSet",
    "IntegralFamily",
    "VerificationReport",
    "make_generators",
    "compile_observable",
    "casimir",
    "classical_integrals",
    "deformed_integrals",
    "subset_casimir",
    "verify_algebra",
    "verify_involution",
    "functional_independence",
    "extra_integral_ms",
    "ORDERINGS",
]

ORDERINGS = ("ascending", "descending")
GENERATOR_NAMES = ("Jm", "Jp", "J3")


@dataclass(frozen=True)
class Realization:
    kind: str
    n: int
    b: tuple[float, ...] = ()
    z: float = 0.0

    def __post_init__(self):
        if self.kind not in ("classical", "deformed"):
            raise ValueError(f"realization kind must be 'classical' or 'deformed', got {self.kind!r}")
        if int(self.n) < 1:
            raise ValueError(f"N must be >= 1, got {self.n}")
        b = tuple(float(v) for v in self.b) if len(self.b) else (0.0,) * int(self.n)
        if len(b) != self.n:
            raise ValueError(f"b has length {len(b)}, expected N={self.n}")
        if not all(np.isfinite(b)) or not np.isfinite(self.z):
            raise ValueError("b and z must be finite")
        if self.kind == "classical" and self.z != 0.0:
            raise ValueError("classical realization takes no deformation parameter")
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "z", float(self.z))

    @classmethod
    def classical(cls, n: int, b: Sequence[float] = ()) -> "Realization":
        return cls("classical", n, tuple(b))

    @classmethod
    def deformed(cls, n: int, z: float, b: Sequence[float] = ()) -> "Realization":
        return cls("deformed", n, tuple(b), z)

    @property
    def deformed_kind(self) -> bool:
        return self.kind == "deformed"


def _site_weights(q, idx, z, ordering):
    """exp(z K_i) for the sites ``idx`` (original order), K_i within ``idx``."""
    sq = [q[i] * q[i] for i in idx]
    m = len(idx)
    out = []
    for a in range(m):
        k = 0.0
        for c in range(m):
            if c < a:
                k = k - sq[c]
            elif c > a:
                k = k + sq[c]
        if ordering == "descending":
            k = -k
        out.append(dual.exp(z * k))
    return out


def generator_values(r: Realization, q, p, idx: Sequence[int] | None = None,
                     ordering: str = "ascending"):
    """(Jm, Jp, J3) of the realization restricted to sites ``idx``."""
    idx = range(r.n) if idx is None else idx
    b = r.b
    jm = 0.0
    jp = 0.0
    j3 = 0.0
    if r.kind == "classical":
        for i in idx:
            qq = q[i] * q[i]
            jm = jm + qq
            j3 = j3 + q[i] * p[i]
            t = p[i] * p[i]
            if b[i] != 0.0:
                t = t + b[i] / qq
            jp = jp + t
        return jm, jp, j3
    z = r.z
    w = _site_weights(q, idx, z, ordering)
    for a, i in enumerate(idx):
        qq = q[i] * q[i]
        s = dual.sinhc(z * qq)
        jm = jm + qq
        j3 = j3 + s * q[i] * p[i] * w[a]
        t = s * p[i] * p[i]
        if b[i] != 0.0:
            t = t + b[i] / (qq * s)
        jp = jp + t * w[a]
    return jm, jp, j3


@dataclass(frozen=True)
class GeneratorSet:
    realization: Realization
    Jm: Observable
    Jp: Observable
    J3: Observable
    values: Callable = field(repr=False)  # (q, p) -> (Jm, Jp, J3)

    def __iter__(self):
        return iter((self.Jm, self.Jp, self.J3))


def make_generators(r: Realization) -> GeneratorSet:
    def values(q, p):
        return generator_values(r, q, p)

    obs = [
        Observable(name, r.n, (lambda q, p, k=k: values(q, p)[k]), None, r)
        for k, name in enumerate(GENERATOR_NAMES)
    ]
    return GeneratorSet(r, *obs, values=values)


def compile_observable(source: str | Ast, r: Realization, params: dict | None = None,
                       name: str | None = None, generators: GeneratorSet | None = None) -> Observable:
    """Compile an expression in Jm, Jp, J3, q_i, p_i and parameters.

    ``z`` is bound to the realization's deformation parameter unless given.
    """
    ast = parse(source) if isinstance(source, str) else source
    params = dict(params or {})
    if r.kind == "deformed":
        params.setdefault("z", r.z)
    gens = generators or make_generators(r)
    names = canonical_names(r.n)
    syms = free_symbols(ast)
    missing = syms - set(names) - set(params) - set(GENERATOR_NAMES)
    if missing:
        raise UnboundSymbolError(missing)
    uses_gens = bool(syms & set(GENERATOR_NAMES))
    uses_raw = bool(syms & set(names))
    code = compile_ast(ast)
    values = gens.values

    def fn(q, p):
        env = dict(params)
        if uses_gens:
            env.update(zip(GENERATOR_NAMES, values(q, p)))
        if uses_raw:
            env.update(zip(names, q + p))
        return code(env)

    label = name or (source if isinstance(source, str) else "expr")
    return Observable(label, r.n, fn, ast, r, params)


def _casimir_source(r: Realization) -> str:
    if r.kind == "deformed":
        return "sinhc(z*Jm)*Jm*Jp - J3^2"
    return "Jm*Jp - J3^2"


def casimir(r: Realization) -> Observable:
    """Jm Jp - J3^2, or sinh(z Jm)/z Jp - J3^2 for the deformed algebra."""
    return compile_observable(_casimir_source(r), r, name="C")


def subset_casimir(r: Realization, idx: Sequence[int], ordering: str = "ascending",
                   name: str | None = None) -> Observable:
    """Casimir of the sub-realization on sites ``idx`` (K_i recomputed inside ``idx``)."""
    idx = tuple(idx)
    if ordering not in ORDERINGS:
        raise ValueError(f"ordering must be one of {ORDERINGS}")
    z = r.z

    def fn(q, p):
        jm, jp, j3 = generator_values(r, q, p, idx, ordering)
        if r.kind == "deformed":
            return dual.sinhc(z * jm) * jm * jp - dual.power(j3, 2)
        return jm * jp - dual.power(j3, 2)

    label = name or f"C[{','.join(str(i + 1) for i in idx)}]"
    return Observable(label, r.n, fn, None, r)


@dataclass(frozen=True)
class IntegralFamily:
    left: tuple[Observable, ...]
    right: tuple[Observable, ...]
    casimir_full: Observable
    ordering: str = "ascending"

    def members(self) -> list[Observable]:
        """Distinct integrals: left C^(2..N) and right C_(2..N-1)."""
        return list(self.left) + list(self.right[:-1])


def _classical_member(n: int, b: tuple[float, ...], idx: tuple[int, ...], name: str) -> Observable:
    def fn(q, p):
        total = 0.0
        for a, i in enumerate(idx):
            for j in idx[a + 1:]:
                total = total + dual.power(q[i] * p[j] - q[j] * p[i], 2)
                if b[i] != 0.0:
                    total = total + b[i] * (q[j] * q[j]) / (q[i] * q[i])
                if b[j] != 0.0:
                    total = total + b[j] * (q[i] * q[i]) / (q[j] * q[j])
        return total + sum(b[i] for i in idx)

    return Observable(name, n, fn)


def classical_integrals(n: int, b: Sequence[float] = ()) -> IntegralFamily:
    """Left C^(m) (sites 1..m) and right C_(m) (sites N-m+1..N), m = 2..N."""
    if n < 2:
        raise ValueError(f"integral families need N >= 2, got {n}")
    r = Realization.classical(n, b)
    left = tuple(_classical_member(n, r.b, tuple(range(m)), f"C^({m})") for m in range(2, n + 1))
    right = tuple(_classical_member(n, r.b, tuple(range(n - m, n)), f"C_({m})") for m in range(2, n + 1))
    right = right[:-1] + (left[-1],)
    return IntegralFamily(left, right, left[-1])


def deformed_integrals(n: int, z: float, b: Sequence[float] = (),
                       ordering: str = "ascending") -> IntegralFamily:
    """Sub-realization Casimirs: left on sites 1..m, right on sites N-m+1..N."""
    if n < 2:
        raise ValueError(f"integral families need N >= 2, got {n}")
    r = Realization.deformed(n, z, b)
    full = casimir(r)
    full = Observable(f"C_z^({n})", n, full.fn, full.ast, r)
    left = tuple(subset_casimir(r, range(m), ordering, f"C_z^({m})") for m in range(2, n)) + (full,)
    right = tuple(subset_casimir(r, range(n - m, n), ordering, f"C_z_({m})") for m in range(2, n)) + (full,)
    return IntegralFamily(left, right, full, ordering)


@dataclass
class VerificationReport:
    relation: str
    samples: int
    seed: int
    tol: float
    max_residual: float
    worst_state: dict | None
    passed: bool
    per_relation: dict[str, float] = field(default_factory=dict)

    def to_json(self) -> str:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return json.dumps(d, indent=2, sort_keys=True)

    def summary(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (f"{verdict} {self.relation}: max residual {self.max_residual:.3e} "
                f"(tol {self.tol:.1e}, {self.samples} samples, seed {self.seed})")


class _Worst:
    def __init__(self):
        self.value = 0.0
        self.state = None
        self.per: dict[str, float] = {}

    def add(self, name: str, residual: float, s: PhaseState):
        if not np.isfinite(residual):
            residual = float("inf")
        self.per[name] = max(self.per.get(name, 0.0), residual)
        if self.state is None or residual > self.value:
            self.value = residual
            self.state = {"q": s.q.tolist(), "p": s.p.tolist(), "relation": name,
                          "residual": residual}

    def report(self, relation, samples, seed, tol) -> VerificationReport:
        return VerificationReport(relation, samples, seed, tol, self.value, self.state,
                                  bool(self.value <= tol), dict(sorted(self.per.items())))


def _residual(lhs: float, rhs: float, *magnitudes: float) -> float:
    scale = 1.0 + max(abs(lhs), abs(rhs), *(abs(m) for m in magnitudes))
    return abs(lhs - rhs) / scale


def verify_algebra(r: Realization, samples: int = 100, tol: float = 1e-9, seed: int = 42,
                   generators: GeneratorSet | None = None) -> VerificationReport:
    """Bracket relations of sl(2) / sl_z(2) and Casimir centrality at random states."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    gens = generators or make_generators(r)
    c = compile_observable(_casimir_source(r), r, name="C", generators=gens)
    rng = np.random.default_rng(seed)
    worst = _Worst()
    z = r.z
    for _ in range(samples):
        s = random_state(rng, r.n)
        jm, gm_q, gm_p = value_and_gradient(gens.Jm, s)
        jp, gp_q, gp_p = value_and_gradient(gens.Jp, s)
        j3, g3_q, g3_p = value_and_gradient(gens.J3, s)
        cv, gc_q, gc_p = value_and_gradient(c, s)
        # C is a difference of two large terms at large z*Jm; its rounding scales with them
        c_mag = abs(jm * jp * float(dual.sinhc(z * jm))) + j3 * j3

        def br(aq, ap, bq, bp):
            return float(np.dot(aq, bp) - np.dot(ap, bq))

        b3p = br(g3_q, g3_p, gp_q, gp_p)
        b3m = br(g3_q, g3_p, gm_q, gm_p)
        bmp = br(gm_q, gm_p, gp_q, gp_p)
        if r.kind == "deformed":
            rhs3p = 2.0 * jp * float(dual.cosh(z * jm))
            rhs3m = -2.0 * jm * float(dual.sinhc(z * jm))
        else:
            rhs3p = 2.0 * jp
            rhs3m = -2.0 * jm
        worst.add("{J3,Jp}", _residual(b3p, rhs3p, j3, jp), s)
        worst.add("{J3,Jm}", _residual(b3m, rhs3m, j3, jm), s)
        worst.add("{Jm,Jp}", _residual(bmp, 4.0 * j3, jm, jp), s)
        for name, v, gq, gp in (("Jm", jm, gm_q, gm_p), ("Jp", jp, gp_q, gp_p), ("J3", j3, g3_q, g3_p)):
            worst.add(f"{{C,{name}}}", _residual(br(gc_q, gc_p, gq, gp), 0.0, c_mag, v), s)
    label = "sl_z(2) algebra" if r.kind == "deformed" else "sl(2) algebra"
    return worst.report(label, samples, seed, tol)


def _bracket_with_values(a, b):
    av, aq, ap = a
    bv, bq, bp = b
    return float(np.dot(aq, bp) - np.dot(ap, bq)), av, bv


def verify_involution(H: Observable, fam: IntegralFamily, samples: int = 100, tol: float = 1e-9,
                      seed: int = 42, states: Sequence[PhaseState] | None = None) -> VerificationReport:
    """{H, C} = 0 for every integral, and involution inside each family."""
    rng = np.random.default_rng(seed)
    worst = _Worst()
    n = H.n
    left, right = list(fam.left), list(fam.right)
    uniq = {id(o): o for o in left + right}
    if states is None:
        states = [random_state(rng, n) for _ in range(samples)]
    for s in states:
        jets = {k: value_and_gradient(o, s) for k, o in uniq.items()}
        h = value_and_gradient(H, s)
        for k, o in uniq.items():
            b, hv, cv = _bracket_with_values(h, jets[k])
            worst.add(f"{{H,{o.name}}}", _residual(b, 0.0, hv, cv), s)
        for family in (left, right):
            for a in range(len(family)):
                for c in range(a + 1, len(family)):
                    fa, fc = family[a], family[c]
                    b, av, cv = _bracket_with_values(jets[id(fa)], jets[id(fc)])
                    worst.add(f"{{{fa.name},{fc.name}}}", _residual(b, 0.0, av, cv), s)
    return worst.report(f"involution of {H.name}", len(states), seed, tol)


def functional_independence(obs: Sequence[Observable], states: Sequence[PhaseState],
                            rank_tol: float = 1e-8) -> int:
    """Max over states of the numerical rank of the stacked phase-space gradients."""
    if not states:
        raise ValueError("need at least one state")
    best = 0
    for s in states:
        rows = [np.concatenate(gradient(o, s)) for o in obs]
        sv = np.linalg.svd(np.array(rows), compute_uv=False)
        if sv.size == 0 or sv[0] == 0.0:
            continue
        best = max(best, int(np.sum(sv >= rank_tol * sv[0])))
    return best


def extra_integral_ms(z: float) -> Observable:
    """sinh(z q1^2)/(2 z q1^2) exp(z q1^2) p1^2, commuting with 1/2 Jp exp(z Jm)."""
    r = Realization.deformed(2, z)
    return compile_observable("sinhc(z*q1^2)/2*exp(z*q1^2)*p1^2", r, name="I_z")
