"""Metrics of kinetic Hamiltonians, Gaussian curvature and geodesic polar charts.

A kinetic Hamiltonian ``H = 1/2 A^{ij}(q) p_i p_j`` has Hessian ``A`` in the
momenta; its metric is ``c * A^{-1}``.  Two normalisations are in use:
``paper-f`` (c = 2, as in ds^2 = 2/f(q^2) dq^2 and all deformed metrics) and
``lagrangian`` (c = 1, the Beltrami metric).  Curvature scales as 1/c.

Every derivative here comes from the dual-number tower; no finite differences.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import dual
from .catalog import SystemSpec
from .expr import Ast, compile_ast, parse
from .phase import hessian_pp_at

__all__ = [
    "Metric2D",
    "CurvatureReport",
    "GeometryError",
    "DegenerateMetricError",
    "BranchError",
    "CONVENTION_FACTOR",
    "metric_of",
    "extract_metric",
    "gauss_curvature_brioschi",
    "curvature_f_classical",
    "curvature_f_deformed",
    "constant_curvature_scan",
    "to_polar",
    "polar_radius",
    "from_polar",
    "polar_metric",
    "polar_curvature",
    "pullback",
    "metric_type_I",
    "curvature_report",
]

CONVENTION_FACTOR = {"paper-f": 2.0, "lagrangian": 1.0}


class GeometryError(ValueError):
    pass


class DegenerateMetricError(GeometryError):
    pass


class BranchError(GeometryError):
    pass


@dataclass(frozen=True)
class Metric2D:
    """ds^2 = E du^2 + 2 F du dv + G dv^2 with ``components(u, v) -> (E, F, G)``."""

    components: Callable[[object, object], tuple] = field(repr=False)
    convention: str = "paper-f"
    riemannian: bool = True

    def at(self, u: float, v: float) -> np.ndarray:
        e, f, g = (float(c) for c in self.components(float(u), float(v)))
        return np.array([[e, f], [f, g]])

    def check_positive(self, u: float, v: float) -> None:
        m = self.at(u, v)
        if not (m[0, 0] > 0 and np.linalg.det(m) > 0):
            raise DegenerateMetricError(f"metric not positive definite at ({u}, {v}): {m.tolist()}")


def _inverse_scaled(a, c: float):
    det = a[0][0] * a[1][1] - a[0][1] * a[1][0]
    if dual.real_part(det) == 0.0:
        raise DegenerateMetricError("momentum Hessian is singular")
    return c * a[1][1] / det, -(c * a[0][1]) / det, c * a[0][0] / det


def metric_of(spec: SystemSpec, convention: str | None = None) -> Metric2D:
    """Metric of a kinetic N=2 system as a differentiable function of q."""
    if spec.n != 2:
        raise GeometryError(f"{spec.name}: metric extraction needs N=2, got N={spec.n}")
    if any(spec.realization.b):
        raise GeometryError(f"{spec.name}: metric extraction needs b = 0")
    convention = convention or spec.metric_convention
    c = CONVENTION_FACTOR[convention]
    H = spec.hamiltonian

    def components(u, v):
        return _inverse_scaled(hessian_pp_at(H, [u, v], [0.0, 0.0]), c)

    return Metric2D(components, convention)


def _check_quadratic(spec: SystemSpec, q: Sequence[float], p_probe=(0.7, -0.4)) -> None:
    H = spec.hamiltonian
    q = [float(v) for v in q]
    for i, j, k in ((0, 0, 0), (0, 0, 1), (0, 1, 1), (1, 1, 1)):
        d3 = float(dual.third_derivative(lambda pp: H.fn(q, pp), list(p_probe), i, j, k))
        if abs(d3) > 1e-12:
            raise GeometryError(f"{spec.name}: Hamiltonian is not quadratic in p (d3H = {d3:.3e})")


def extract_metric(spec: SystemSpec, q: Sequence[float], convention: str | None = None) -> np.ndarray:
    """2x2 metric matrix at q: c * (d2H/dp dp)^{-1}."""
    m = metric_of(spec, convention)
    _check_quadratic(spec, q)
    return m.at(*q)


def _brioschi(e, f, g, ge, gf, gg, he, hf, hg):
    eu, ev = ge
    fu, fv = gf
    gu, gv = gg
    evv, fuv, guu = he[1][1], hf[0][1], hg[0][0]
    a11 = -0.5 * evv + fuv - 0.5 * guu
    a12, a13 = 0.5 * eu, fu - 0.5 * ev
    a21, a31 = fv - 0.5 * gu, 0.5 * gv
    det1 = a11 * (e * g - f * f) - a12 * (a21 * g - f * a31) + a13 * (a21 * f - e * a31)
    b12, b13 = 0.5 * ev, 0.5 * gu
    det2 = -b12 * (b12 * g - f * b13) + b13 * (b12 * f - e * b13)
    w = e * g - f * f
    return (det1 - det2) / (w * w)


def gauss_curvature_brioschi(m: Metric2D, q: Sequence[float]) -> float:
    """Gaussian curvature from E, F, G and their first/second derivatives."""
    u, v = (float(x) for x in q)
    (e, ge, he), (f, gf, hf), (g, gg, hg) = dual.hessian(lambda x: tuple(m.components(*x)), [u, v])
    e, f, g = float(e), float(f), float(g)
    w = e * g - f * f
    if m.riemannian and not (e > 0 and w > 0):
        raise DegenerateMetricError(f"metric not positive definite at {q}: E={e}, EG-F^2={w}")
    if w == 0.0:
        raise DegenerateMetricError(f"metric degenerate at {q}")
    fl = lambda xs: [float(x) for x in xs]  # noqa: E731
    fm = lambda xs: [[float(x) for x in row] for row in xs]  # noqa: E731
    return float(_brioschi(e, f, g, fl(ge), fl(gf), fl(gg), fm(he), fm(hf), fm(hg)))


def _f_jet(f: str | Ast, x: float):
    code = compile_ast(parse(f) if isinstance(f, str) else f)
    val, grad, hess = dual.hessian(lambda xs: code({"x": xs[0]}), [float(x)])
    fv, f1, f2 = float(val), float(grad[0]), float(hess[0][0])
    if fv == 0.0:
        raise GeometryError(f"f vanishes at x = {x}")
    return fv, f1, f2


def curvature_f_classical(f: str | Ast, x: float) -> float:
    """K of ds^2 = 2/f(q^2) dq^2 at q^2 = x: f' + x f'' - x f'^2 / f."""
    fv, f1, f2 = _f_jet(f, x)
    return f1 + x * f2 - x * f1 * f1 / fv


def curvature_f_deformed(f: str | Ast, x: float, z: float) -> float:
    """K of the space of H = 1/2 Jp f(z Jm) at x = z q^2."""
    fv, f1, f2 = _f_jet(f, x)
    return z * (f1 * math.cosh(x) + (f2 - fv - f1 * f1 / fv) * math.sinh(x))


@dataclass(frozen=True)
class ScanVerdict:
    constant: bool
    curvature: float | None
    k_min: float
    k_max: float

    def __str__(self) -> str:
        if self.constant:
            return f"constant(K={self.curvature:.12g})"
        return f"non-constant(K in [{self.k_min:.6g}, {self.k_max:.6g}])"


def constant_curvature_scan(f: str | Ast, x_grid: Sequence[float], z: float,
                            tol: float = 1e-9) -> ScanVerdict:
    """Constant iff max K - min K <= tol (1 + |mean K|) over the grid."""
    ks = np.array([curvature_f_deformed(f, float(x), z) for x in x_grid])
    lo, hi, mean = float(ks.min()), float(ks.max()), float(ks.mean())
    const = hi - lo <= tol * (1.0 + abs(mean))
    return ScanVerdict(bool(const), mean if const else None, lo, hi)


# ---------------------------------------------------------------------------
# geodesic polar charts


def _ck_c(kappa: float, x):
    """Cayley-Klein cosine: cos(sqrt(k) x), 1, cosh(sqrt(-k) x)."""
    if kappa > 0:
        return dual.cos(math.sqrt(kappa) * x)
    if kappa < 0:
        return dual.cosh(math.sqrt(-kappa) * x)
    return 1.0 + 0.0 * x


def _ck_s(kappa: float, x):
    """Cayley-Klein sine: sin(sqrt(k) x)/sqrt(k), x, sinh(sqrt(-k) x)/sqrt(-k)."""
    if kappa > 0:
        r = math.sqrt(kappa)
        return dual.sin(r * x) / r
    if kappa < 0:
        r = math.sqrt(-kappa)
        return dual.sinh(r * x) / r
    return x


def _lambda2(lambda2sq: float) -> float:
    if lambda2sq <= 0.0:
        raise BranchError("only real lambda2 (lambda2sq > 0) has a real angular chart")
    return math.sqrt(lambda2sq)


def polar_radius(q: Sequence, z: float):
    """rho with cosh(sqrt(z) rho) = exp(z q^2); needs z > 0."""
    q1, q2 = q
    if z <= 0.0:
        raise BranchError(f"real rho needs z > 0, got z = {z}")
    x = z * (q1 * q1 + q2 * q2)
    if dual.real_part(x) == 0.0:
        return 0.0 * x
    # acosh(e^x) = log(e^x + sqrt(e^{2x} - 1)); written via expm1 for small x
    return dual.log1p(dual.expm1(x) + dual.sqrt(dual.expm1(2.0 * x))) / math.sqrt(z)


def to_polar(q: Sequence, z: float, lambda2sq: float = 1.0):
    """(rho, theta) of the type-I space's geodesic polar chart."""
    q1, q2 = q
    if dual.real_part(q1) == 0.0 and dual.real_part(q2) == 0.0:
        raise BranchError("theta is undefined at the origin")
    rho = polar_radius(q, z)
    l2 = _lambda2(lambda2sq)
    ratio = dual.expm1(2.0 * z * q1 * q1) / dual.expm1(2.0 * z * (q1 * q1 + q2 * q2))
    theta = dual.asin(dual.sqrt(ratio)) / l2
    return rho, theta


def from_polar(rho, theta, z: float, lambda2sq: float = 1.0):
    """Inverse of :func:`to_polar` on the principal branch q1, q2 >= 0."""
    if z <= 0.0:
        raise BranchError(f"real rho needs z > 0, got z = {z}")
    l1 = math.sqrt(z)
    l2 = _lambda2(lambda2sq)
    s2 = dual.power(dual.sin(l2 * theta), 2)
    sh2 = dual.power(dual.sinh(l1 * rho), 2)
    q1sq = dual.log1p(s2 * sh2) / (2.0 * z)
    qsq = dual.log(dual.cosh(l1 * rho)) / z
    q2sq = qsq - q1sq
    if dual.real_part(q2sq) < 0.0:
        q2sq = 0.0 * q2sq
    return dual.sqrt(q1sq), dual.sqrt(q2sq)


def polar_metric(kind: str, lambda1sq: float, lambda2sq: float) -> Metric2D:
    """Polar-chart metrics in (rho, theta) / (r, theta).

    typeI: (1/cosh(l1 rho)) (d rho^2 + l2^2 sinh^2(l1 rho)/l1^2 d theta^2)
    ms:    d r^2 + l2^2 sin^2(l1 r)/l1^2 d theta^2
    Signed ``lambda1sq``/``lambda2sq`` select the trigonometric/hyperbolic branch.
    """
    if kind == "typeI":
        def components(rho, theta):
            c = _ck_c(-lambda1sq, rho)
            s = _ck_s(-lambda1sq, rho)
            return 1.0 / c, 0.0 * rho, lambda2sq * s * s / c
    elif kind == "ms":
        def components(r, theta):
            s = _ck_s(lambda1sq, r)
            return 1.0 + 0.0 * r, 0.0 * r, lambda2sq * s * s
    else:
        raise GeometryError(f"polar metric kind must be 'typeI' or 'ms', got {kind!r}")
    return Metric2D(components, "paper-f", riemannian=lambda2sq > 0)


def polar_curvature(kind: str, radius: float, lambda1sq: float):
    """Closed-form K in the polar chart: -1/2 l1^2 sinh^2(l1 rho)/cosh(l1 rho), or l1^2."""
    if kind == "typeI":
        s = _ck_s(-lambda1sq, radius)
        return -0.5 * lambda1sq * lambda1sq * s * s / _ck_c(-lambda1sq, radius)
    if kind == "ms":
        return lambda1sq
    raise GeometryError(f"unknown polar kind {kind!r}")


def metric_type_I(z: float) -> Metric2D:
    """ds_I^2 = 2 z q1^2/sinh(z q1^2) e^{-z q2^2} dq1^2 + 2 z q2^2/sinh(z q2^2) e^{z q1^2} dq2^2."""
    def components(q1, q2):
        e = 2.0 / dual.sinhc(z * q1 * q1) * dual.exp(-z * q2 * q2)
        g = 2.0 / dual.sinhc(z * q2 * q2) * dual.exp(z * q1 * q1)
        return e, 0.0 * q1, g

    return Metric2D(components)


def pullback(m: Metric2D, chart: Callable, q: Sequence[float]) -> np.ndarray:
    """J^T G(chart(q)) J with J the Jacobian of ``chart`` at q."""
    (a, ga), (b, gb) = dual.gradient(lambda x: tuple(chart(x)), list(q))
    jac = np.array([ga, gb])
    return jac.T @ m.at(float(a), float(b)) @ jac


@dataclass
class CurvatureReport:
    system: str
    convention: str
    points: list[tuple[float, float]]
    k_closed: list[float | None]
    k_brioschi: list[float]
    max_discrepancy: float | None
    curvature_label: str | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["q1", "q2", "K_closed", "K_brioschi"])
        for (q1, q2), kc, kb in zip(self.points, self.k_closed, self.k_brioschi):
            w.writerow([f"{q1:.17g}", f"{q2:.17g}", "" if kc is None else f"{kc:.17g}", f"{kb:.17g}"])
        return buf.getvalue()


def curvature_report(spec: SystemSpec, points: Sequence[Sequence[float]]) -> CurvatureReport:
    m = metric_of(spec)
    pts = [(float(a), float(b)) for a, b in points]
    kb, kc = [], []
    for u, v in pts:
        _check_quadratic(spec, (u, v))
        kb.append(gauss_curvature_brioschi(m, (u, v)))
        if spec.known_curvature is not None:
            kc.append(float(spec.known_curvature(u, v, spec.params, spec.realization.z)))
        else:
            kc.append(None)
    diffs = [abs(a - b) for a, b in zip(kc, kb) if a is not None]
    return CurvatureReport(spec.name, m.convention, pts, kc, kb,
                           max(diffs) if diffs else None, spec.curvature_label)
