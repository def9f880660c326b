"""Forward-mode scalar tower.

A :class:`Dual` is ``re + du*eps`` with ``eps**2 == 0``. Each dual carries an
integer ``tag`` naming its infinitesimal; duals nest (``re`` and ``du`` may
themselves be duals of lower tag), so hyper-dual and higher-order jets are
nested duals with distinct tags. Mixing two duals of different tags treats the
lower-tag one as a constant with respect to the higher-tag infinitesimal, which
is what makes nested differentiation free of perturbation confusion.

At the innermost level ``du`` may be a 1-D numpy array (one component per
tracked direction); such vector duals must have a float ``re`` and must not be
wrapped *around* other duals.

Value parts are computed with exactly the float operations of the plain real
path, so the value of a dual evaluation is bit-identical to the real one.
"""

from __future__ import annotations

import itertools
import math
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "Dual",
    "DomainError",
    "new_tag",
    "real_part",
    "exp",
    "log",
    "sqrt",
    "expm1",
    "log1p",
    "sinh",
    "cosh",
    "tanh",
    "sin",
    "cos",
    "asin",
    "acosh",
    "sinhc",
    "power",
    "gradient",
    "hessian",
    "third_derivative",
]

_tags = itertools.count(1)


def new_tag() -> int:
    return next(_tags)


class DomainError(ValueError):
    """Function evaluated outside its real domain."""


class Dual:
    __slots__ = ("re", "du", "tag")
    __array_ufunc__ = None  # keep numpy from broadcasting over duals

    def __init__(self, re, du, tag: int):
        self.re = re
        self.du = du
        self.tag = tag

    def __repr__(self) -> str:
        return f"Dual({self.re!r}, {self.du!r}, tag={self.tag})"

    def __add__(self, other):
        if isinstance(other, Dual):
            if other.tag == self.tag:
                return Dual(self.re + other.re, self.du + other.du, self.tag)
            if other.tag > self.tag:
                return other.__radd__(self)
        return Dual(self.re + other, self.du, self.tag)

    def __radd__(self, other):
        return Dual(other + self.re, self.du, self.tag)

    def __sub__(self, other):
        if isinstance(other, Dual):
            if other.tag == self.tag:
                return Dual(self.re - other.re, self.du - other.du, self.tag)
            if other.tag > self.tag:
                return other.__rsub__(self)
        return Dual(self.re - other, self.du, self.tag)

    def __rsub__(self, other):
        return Dual(other - self.re, -self.du, self.tag)

    def __mul__(self, other):
        if isinstance(other, Dual):
            if other.tag == self.tag:
                return Dual(
                    self.re * other.re,
                    self.re * other.du + self.du * other.re,
                    self.tag,
                )
            if other.tag > self.tag:
                return other.__rmul__(self)
        return Dual(self.re * other, self.du * other, self.tag)

    def __rmul__(self, other):
        return Dual(other * self.re, other * self.du, self.tag)

    def __truediv__(self, other):
        if isinstance(other, Dual):
            if other.tag == self.tag:
                q = self.re / other.re
                return Dual(q, (self.du - q * other.du) / other.re, self.tag)
            if other.tag > self.tag:
                return other.__rtruediv__(self)
        return Dual(self.re / other, self.du / other, self.tag)

    def __rtruediv__(self, other):
        q = other / self.re
        return Dual(q, -(q * self.du) / self.re, self.tag)

    def __neg__(self):
        return Dual(-self.re, -self.du, self.tag)

    def __pos__(self):
        return self

    def __pow__(self, other):
        return power(self, other)

    def __rpow__(self, other):
        return power(other, self)


def real_part(x) -> float:
    while isinstance(x, Dual):
        x = x.re
    return x


def _lift(fn: Callable[[float], float], deriv: Callable):
    """Extend a real function to duals given ``deriv(x_re, f_re)``."""

    def lifted(x):
        if isinstance(x, Dual):
            v = lifted(x.re)
            return Dual(v, x.du * deriv(x.re, v), x.tag)
        return fn(x)

    lifted.__name__ = fn.__name__
    return lifted


def _check_log(x):
    r = real_part(x)
    if r <= 0.0:
        raise DomainError(f"log of non-positive value {r!r}")


def _check_sqrt(x):
    r = real_part(x)
    if r < 0.0:
        raise DomainError(f"sqrt of negative value {r!r}")


exp = _lift(math.exp, lambda x, v: v)
sinh = _lift(math.sinh, lambda x, v: cosh(x))
cosh = _lift(math.cosh, lambda x, v: sinh(x))
tanh = _lift(math.tanh, lambda x, v: 1.0 - v * v)
sin = _lift(math.sin, lambda x, v: cos(x))
cos = _lift(math.cos, lambda x, v: -sin(x))
expm1 = _lift(math.expm1, lambda x, v: exp(x))
_log = _lift(math.log, lambda x, v: 1.0 / x)
_log1p = _lift(math.log1p, lambda x, v: 1.0 / (1.0 + x))
_sqrt = _lift(math.sqrt, lambda x, v: 0.5 / v)
_asin = _lift(math.asin, lambda x, v: 1.0 / _sqrt(1.0 - x * x))
_acosh = _lift(math.acosh, lambda x, v: 1.0 / _sqrt(x * x - 1.0))


def log(x):
    _check_log(x)
    return _log(x)


def log1p(x):
    r = real_part(x)
    if r <= -1.0:
        raise DomainError(f"log1p of {r!r} at or below -1")
    return _log1p(x)


def sqrt(x):
    _check_sqrt(x)
    return _sqrt(x)


def asin(x):
    r = real_part(x)
    if not -1.0 <= r <= 1.0:
        raise DomainError(f"asin of {r!r} outside [-1, 1]")
    return _asin(x)


def acosh(x):
    r = real_part(x)
    if r < 1.0:
        raise DomainError(f"acosh of {r!r} below 1")
    return _acosh(x)


_SINHC_SWITCH = 1e-2


def sinhc(x):
    """sinh(x)/x, continued by 1 at x = 0."""
    if abs(real_part(x)) < _SINHC_SWITCH:
        x2 = x * x
        return 1.0 + x2 / 6.0 + x2 * x2 / 120.0 + x2 * x2 * x2 / 5040.0
    return sinh(x) / x


def _is_integer(v) -> bool:
    return isinstance(v, (int, float)) and float(v).is_integer()


def power(base, expo):
    """``base ** expo``; integer exponents allow any sign of base.

    The value part is always computed by the real routine, so dual and real
    evaluations agree bit for bit.
    """
    bt = base.tag if isinstance(base, Dual) else -1
    et = expo.tag if isinstance(expo, Dual) else -1
    if bt < 0 and et < 0:
        if _is_integer(expo):
            n = int(expo)
            if base == 0.0 and n < 0:
                raise ZeroDivisionError("0.0 cannot be raised to a negative power")
            return float(base) ** n
        if base <= 0.0:
            raise DomainError(f"non-integer power of non-positive base {base!r}")
        return math.pow(base, expo)
    if bt >= et:
        e_re, e_du = (expo.re, expo.du) if bt == et else (expo, None)
        v = power(base.re, e_re)
        if e_du is None and _is_integer(e_re) and int(e_re) == 0:
            return Dual(v, base.du * 0.0, bt)
        d = base.du * (e_re * power(base.re, e_re - 1))
        if e_du is not None:
            d = d + e_du * (v * log(base.re))
        return Dual(v, d, bt)
    v = power(base, expo.re)
    return Dual(v, expo.du * (v * log(base)), et)


# ---------------------------------------------------------------------------
# Derivative drivers


def _part(x, tag: int, which: str):
    if isinstance(x, Dual) and x.tag == tag:
        return x.re if which == "re" else x.du
    if which == "re":
        return x
    return 0.0 * x if isinstance(x, Dual) else 0.0


def _map(out, f):
    if isinstance(out, tuple):
        return tuple(f(o) for o in out)
    return f(out)


def gradient(fn: Callable[[list], object], x: Sequence[float]):
    """Value and gradient of ``fn`` at real point ``x`` in one vector-dual pass."""
    x = [float(v) for v in x]
    n = len(x)
    tag = new_tag()
    eye = np.eye(n)
    out = fn([Dual(v, eye[i], tag) for i, v in enumerate(x)])

    def split(o):
        if isinstance(o, Dual):
            return o.re, np.asarray(o.du, dtype=float)
        return o, np.zeros(n)

    return _map(out, split)


def _seed(x, i: int, tag: int):
    return [Dual(v, 1.0 if k == i else 0.0, tag) for k, v in enumerate(x)]


def hessian(fn: Callable[[list], object], x: Sequence):
    """Value, gradient and Hessian of ``fn`` via nested scalar duals.

    ``x`` may hold duals of lower tags; derivative entries are then duals too.
    For tuple-valued ``fn`` a tuple of ``(value, grad, hess)`` is returned.
    """
    x = list(x)
    n = len(x)
    results: dict[tuple[int, int], object] = {}
    for i in range(n):
        for j in range(i, n):
            t_in, t_out = new_tag(), new_tag()
            xi = [
                Dual(Dual(v, 1.0 if k == j else 0.0, t_in), Dual(1.0 if k == i else 0.0, 0.0, t_in), t_out)
                for k, v in enumerate(x)
            ]
            results[i, j] = (fn(xi), t_in, t_out)

    def assemble(select):
        val = None
        grad = [None] * n
        hess = [[None] * n for _ in range(n)]
        for (i, j), (out, t_in, t_out) in results.items():
            o = select(out)
            re, du = _part(o, t_out, "re"), _part(o, t_out, "du")
            if val is None:
                val = _part(re, t_in, "re")
            grad[j] = _part(re, t_in, "du")
            grad[i] = _part(du, t_in, "re")
            hess[i][j] = hess[j][i] = _part(du, t_in, "du")
        return val, grad, hess

    first = results[0, 0][0]
    if isinstance(first, tuple):
        return tuple(assemble(lambda o, k=k: o[k]) for k in range(len(first)))
    return assemble(lambda o: o)


def third_derivative(fn: Callable[[list], object], x: Sequence, i: int, j: int, k: int):
    """d^3 fn / dx_i dx_j dx_k by three nested scalar duals."""
    t1, t2, t3 = new_tag(), new_tag(), new_tag()

    def lvl(v, d, tag):
        return Dual(v, d, tag)

    xs = []
    for m, v in enumerate(x):
        a = lvl(v, 1.0 if m == k else 0.0, t1)
        b = lvl(1.0 if m == j else 0.0, 0.0, t1)
        inner = lvl(a, b, t2)
        dk = lvl(lvl(1.0 if m == i else 0.0, 0.0, t1), lvl(0.0, 0.0, t1), t2)
        xs.append(lvl(inner, dk, t3))
    out = fn(xs)
    return _map(out, lambda o: _part(_part(_part(o, t3, "du"), t2, "du"), t1, "du"))
