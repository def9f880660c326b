"""Phase-space states, observables and the canonical Poisson bracket."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from . import dual
from .expr import Ast, UnboundSymbolError, compile_ast, free_symbols, parse

__all__ = [
    "PhaseState",
    "Observable",
    "SingularPointError",
    "raw_observable",
    "evaluate",
    "gradient",
    "hessian_pp",
    "poisson_bracket",
    "random_state",
]


class SingularPointError(ArithmeticError):
    """Observable evaluated on its singular set."""


@dataclass(frozen=True)
class PhaseState:
    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        q = np.array(self.q, dtype=float).reshape(-1)
        p = np.array(self.p, dtype=float).reshape(-1)
        if q.shape != p.shape or q.size == 0:
            raise ValueError(f"q and p must have equal nonzero length, got {q.size} and {p.size}")
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(p))):
            raise ValueError("phase state has non-finite entries")
        q.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)

    @property
    def n(self) -> int:
        return self.q.size

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.q, self.p])

    @classmethod
    def from_vector(cls, x: Sequence[float]) -> "PhaseState":
        x = np.asarray(x, dtype=float)
        n = x.size // 2
        return cls(x[:n], x[n:])


@dataclass(frozen=True)
class Observable:
    """Phase-space function ``fn(q, p)`` on lists of scalars of any kind.

    ``ast``/``realization``/``params`` record where a compiled observable came
    from; hand-written observables leave them empty.
    """

    name: str
    n: int
    fn: Callable[[list, list], object] = field(repr=False)
    ast: Ast | None = field(default=None, repr=False)
    realization: object | None = field(default=None, repr=False)
    params: Mapping[str, float] = field(default_factory=dict, repr=False)

    def __call__(self, q, p):
        return self.fn(list(q), list(p))


def canonical_names(n: int) -> list[str]:
    return [f"q{i + 1}" for i in range(n)] + [f"p{i + 1}" for i in range(n)]


def raw_observable(source: str | Ast, n: int, params: Mapping[str, float] | None = None,
                   name: str | None = None) -> Observable:
    """Observable from an expression in q1..qN, p1..pN and bound parameters."""
    ast = parse(source) if isinstance(source, str) else source
    params = dict(params or {})
    names = canonical_names(n)
    missing = free_symbols(ast) - set(names) - set(params)
    if missing:
        raise UnboundSymbolError(missing)
    code = compile_ast(ast)

    def fn(q, p):
        env = dict(params)
        env.update(zip(names, q + p))
        return code(env)

    return Observable(name or (source if isinstance(source, str) else "raw"), n, fn, ast, None, params)


def _check(obs: Observable, s: PhaseState):
    if s.n != obs.n:
        raise ValueError(f"{obs.name}: state has N={s.n}, observable expects N={obs.n}")


def _singular(obs: Observable, s: PhaseState, exc: Exception) -> SingularPointError:
    zeros = [f"q{i + 1}" for i, v in enumerate(s.q) if v == 0.0]
    where = f" at {', '.join(zeros)} = 0" if zeros else ""
    return SingularPointError(f"{obs.name}: singular point{where} ({exc})")


def evaluate(obs: Observable, s: PhaseState) -> float:
    _check(obs, s)
    try:
        return float(obs.fn(s.q.tolist(), s.p.tolist()))
    except ZeroDivisionError as exc:
        raise _singular(obs, s, exc) from None


def gradient(obs: Observable, s: PhaseState) -> tuple[np.ndarray, np.ndarray]:
    """Exact (dq, dp) by a single vector-dual pass."""
    _check(obs, s)
    n = s.n
    try:
        _, g = dual.gradient(lambda x: obs.fn(x[:n], x[n:]), s.as_vector())
    except ZeroDivisionError as exc:
        raise _singular(obs, s, exc) from None
    return g[:n], g[n:]


def value_and_gradient(obs: Observable, s: PhaseState) -> tuple[float, np.ndarray, np.ndarray]:
    _check(obs, s)
    n = s.n
    try:
        v, g = dual.gradient(lambda x: obs.fn(x[:n], x[n:]), s.as_vector())
    except ZeroDivisionError as exc:
        raise _singular(obs, s, exc) from None
    return float(v), g[:n], g[n:]


def hessian_pp_at(obs: Observable, q: Sequence, p: Sequence):
    """Matrix of d2/dp_i dp_j with q possibly carrying dual parts.

    Returns a nested list (entries are duals when q is).
    """
    q = list(q)
    _, _, hess = dual.hessian(lambda pp: obs.fn(q, pp), list(p))
    return hess


def hessian_pp(obs: Observable, s: PhaseState) -> np.ndarray:
    _check(obs, s)
    try:
        h = hessian_pp_at(obs, s.q.tolist(), s.p.tolist())
    except ZeroDivisionError as exc:
        raise _singular(obs, s, exc) from None
    return np.array(h, dtype=float)


def poisson_bracket(f: Observable, g: Observable, s: PhaseState) -> float:
    """sum_i df/dq_i dg/dp_i - df/dp_i dg/dq_i."""
    fq, fp = gradient(f, s)
    gq, gp = gradient(g, s)
    return float(np.dot(fq, gp) - np.dot(fp, gq))


def random_state(rng: np.random.Generator, n: int, qmin: float = 0.2, qmax: float = 2.0,
                 pmax: float = 2.0) -> PhaseState:
    """q_i uniform on [-qmax,-qmin] U [qmin,qmax], p_i uniform on [-pmax,pmax]."""
    mag = rng.uniform(qmin, qmax, size=n)
    sign = rng.choice([-1.0, 1.0], size=n)
    p = rng.uniform(-pmax, pmax, size=n)
    return PhaseState(mag * sign, p)
