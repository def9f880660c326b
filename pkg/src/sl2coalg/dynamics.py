"""Hamiltonian flows: exact-gradient vector field, implicit midpoint and RK4,
drift monitoring, and the radial reductions of the polar charts."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import dual
from .catalog import SystemSpec
from .coalgebra import classical_integrals, deformed_integrals, extra_integral_ms
from .geometry import _ck_c, _ck_s, to_polar
from .phase import Observable, PhaseState, SingularPointError, evaluate, gradient

__all__ = [
    "IntegratorError",
    "Trajectory",
    "DriftReport",
    "hamilton_rhs",
    "step_midpoint",
    "step_rk4",
    "default_monitors",
    "simulate",
    "reduce_radial",
    "polar_hamiltonian",
    "polar_phase_state",
]

INTEGRATORS = ("midpoint", "rk4")


class IntegratorError(RuntimeError):
    pass


def hamilton_rhs(H: Observable, s: PhaseState) -> tuple[np.ndarray, np.ndarray]:
    """(qdot, pdot) = (dH/dp, -dH/dq)."""
    dq, dp = gradient(H, s)
    return dp, -dq


def _field(H: Observable, n: int):
    fn = H.fn

    def f(x: np.ndarray) -> np.ndarray:
        if not np.all(np.isfinite(x)):
            raise IntegratorError("state left the finite domain")
        try:
            _, g = dual.gradient(lambda v: fn(v[:n], v[n:]), x)
        except ZeroDivisionError as exc:
            raise SingularPointError(f"{H.name}: singular point ({exc})") from None
        except OverflowError:
            raise IntegratorError("vector field overflowed") from None
        return np.concatenate([g[n:], -g[:n]])

    return f


def _midpoint(f, x0: np.ndarray, dt: float, tol: float, maxiter: int,
              slope: np.ndarray | None = None) -> tuple[np.ndarray, int, np.ndarray]:
    """Solve x1 = x0 + dt f((x0+x1)/2); ``slope`` seeds the predictor.

    Returns the new state, the iteration count and the converged midpoint slope.
    """
    k = f(x0) if slope is None else slope
    x1 = x0 + dt * k
    for it in range(1, maxiter + 1):
        k = f(0.5 * (x0 + x1))
        x_new = x0 + dt * k
        err = np.max(np.abs(x_new - x1))
        x1 = x_new
        if err <= tol * max(1.0, np.max(np.abs(x1))):
            return x1, it, k
    raise IntegratorError(f"implicit midpoint fixed point did not converge in {maxiter} iterations "
                          f"(last update {err:.3e})")


def step_midpoint(H: Observable, s: PhaseState, dt: float, fp_tol: float = 1e-13,
                  fp_maxiter: int = 50) -> PhaseState:
    """One implicit-midpoint step solved by fixed-point iteration."""
    if dt == 0.0:
        return s
    x, _, _ = _midpoint(_field(H, s.n), s.as_vector(), dt, fp_tol, fp_maxiter)
    return PhaseState.from_vector(x)


def _rk4(f, x: np.ndarray, dt: float) -> np.ndarray:
    k1 = f(x)
    k2 = f(x + 0.5 * dt * k1)
    k3 = f(x + 0.5 * dt * k2)
    k4 = f(x + dt * k3)
    return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def step_rk4(H: Observable, s: PhaseState, dt: float) -> PhaseState:
    return PhaseState.from_vector(_rk4(_field(H, s.n), s.as_vector(), dt))


@dataclass
class Trajectory:
    dt: float
    states: np.ndarray  # (steps+1, 2N)
    monitor_names: list[str]
    monitor_values: np.ndarray  # (steps+1, n_monitors), column 0 is H
    error: str | None = None

    @property
    def n(self) -> int:
        return self.states.shape[1] // 2

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.states.shape[0]) * self.dt

    def state(self, k: int) -> PhaseState:
        return PhaseState.from_vector(self.states[k])

    def to_csv(self) -> str:
        n = self.n
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t"] + [f"q{i + 1}" for i in range(n)] + [f"p{i + 1}" for i in range(n)]
                   + self.monitor_names)
        for t, x, m in zip(self.times, self.states, self.monitor_values):
            w.writerow([f"{v:.17g}" for v in (t, *x, *m)])
        return buf.getvalue()


@dataclass
class DriftReport:
    integrator: str
    dt: float
    steps: int
    monitors: dict[str, dict[str, float]]
    max_fp_iterations: int | None = None
    completed_steps: int = 0
    error: str | None = None

    def rel_drift(self, name: str) -> float:
        return self.monitors[name]["rel_drift"]

    def to_json(self) -> str:
        return json.dumps(
            {
                "integrator": self.integrator,
                "dt": self.dt,
                "steps": self.steps,
                "completed_steps": self.completed_steps,
                "max_fp_iterations": self.max_fp_iterations,
                "error": self.error,
                "monitors": self.monitors,
            },
            indent=2,
            sort_keys=True,
        )


def default_monitors(spec: SystemSpec) -> list[Observable]:
    """Integrals guaranteed by the coalgebra symmetry (plus I_z for z_ms with sign +1)."""
    r = spec.realization
    if r.n < 2:
        return []
    if r.kind == "classical":
        fam = classical_integrals(r.n, r.b)
    else:
        fam = deformed_integrals(r.n, r.z, r.b)
    mons = fam.members()
    if spec.name == "z_ms" and r.n == 2 and spec.params.get("sign") == 1.0 and not any(r.b):
        mons.append(extra_integral_ms(r.z))
    return mons


def _reject_singular(spec_or_h, s0: PhaseState):
    r = getattr(spec_or_h, "realization", None)
    if r is not None:
        bad = [f"q{i + 1}" for i in range(r.n) if s0.q[i] == 0.0 and r.b[i] != 0.0]
        if bad:
            raise SingularPointError(f"initial condition on the centrifugal singularity: {', '.join(bad)} = 0")


def simulate(spec: SystemSpec | Observable, s0: PhaseState, dt: float = 1e-3, steps: int = 10000,
             monitors: Sequence[Observable] | None = None, integrator: str = "midpoint",
             fp_tol: float = 1e-13, fp_maxiter: int = 50) -> tuple[Trajectory, DriftReport]:
    """Integrate with a fixed step and monitor H plus the given integrals."""
    if integrator not in INTEGRATORS:
        raise ValueError(f"integrator must be one of {INTEGRATORS}, got {integrator!r}")
    if dt <= 0 or steps < 0:
        raise ValueError("need dt > 0 and steps >= 0")
    H = spec.hamiltonian if isinstance(spec, SystemSpec) else spec
    if monitors is None:
        monitors = default_monitors(spec) if isinstance(spec, SystemSpec) else []
    _reject_singular(spec, s0)
    obs = [H] + list(monitors)
    names = ["H"] + [m.name for m in monitors]
    n = s0.n
    f = _field(H, n)
    xs = np.empty((steps + 1, 2 * n))
    vals = np.empty((steps + 1, len(obs)))
    x = s0.as_vector()
    xs[0] = x
    vals[0] = [evaluate(o, s0) for o in obs]
    max_it = 0
    error = None
    k = 0
    slope = None
    try:
        for k in range(1, steps + 1):
            if integrator == "midpoint":
                x, it, slope = _midpoint(f, x, dt, fp_tol, fp_maxiter, slope)
                max_it = max(max_it, it)
            else:
                x = _rk4(f, x, dt)
            s = PhaseState.from_vector(x)
            xs[k] = x
            vals[k] = [evaluate(o, s) for o in obs]
        done = steps
    except (IntegratorError, ArithmeticError, ValueError) as exc:
        error = f"step {k}: {exc}"
        done = k - 1
    xs, vals = xs[: done + 1], vals[: done + 1]
    report = {}
    for j, name in enumerate(names):
        v0 = float(vals[0, j])
        d = float(np.max(np.abs(vals[:, j] - v0)))
        report[name] = {"initial": v0, "max_abs_drift": d, "rel_drift": d / (1.0 + abs(v0))}
    traj = Trajectory(dt, xs, names, vals, error)
    drift = DriftReport(integrator, dt, steps, report, max_it if integrator == "midpoint" else None,
                        done, error)
    return traj, drift


# ---------------------------------------------------------------------------
# polar charts and radial reductions


def polar_hamiltonian(kind: str, lambda1sq: float, lambda2sq: float) -> Observable:
    """Free Hamiltonian in (rho, theta, p_rho, p_theta), twice the Cartesian one.

    typeI: 1/2 cosh(l1 rho) (p_rho^2 + l1^2/(l2^2 sinh^2(l1 rho)) p_theta^2)
    ms:    1/2 (p_r^2 + l1^2/(l2^2 sin^2(l1 r)) p_theta^2)
    """
    if kind == "typeI":
        def fn(q, p):
            s = _ck_s(-lambda1sq, q[0])
            return 0.5 * _ck_c(-lambda1sq, q[0]) * (p[0] * p[0] + p[1] * p[1] / (lambda2sq * s * s))
    elif kind == "ms":
        def fn(q, p):
            s = _ck_s(lambda1sq, q[0])
            return 0.5 * (p[0] * p[0] + p[1] * p[1] / (lambda2sq * s * s))
    else:
        raise ValueError(f"kind must be 'typeI' or 'ms', got {kind!r}")
    return Observable(f"H_polar[{kind}]", 2, fn)


def reduce_radial(kind: str, lambda1sq: float, lambda2sq: float, ctilde: float) -> Observable:
    """1-D radial Hamiltonian in (rho, p_rho) at fixed p_theta^2 = ctilde."""
    if ctilde < 0:
        raise ValueError("ctilde = p_theta^2 must be non-negative")
    if kind not in ("typeI", "ms"):
        raise ValueError(f"kind must be 'typeI' or 'ms', got {kind!r}")

    def fn(q, p):
        rho = q[0]
        if kind == "typeI":
            c = _ck_c(-lambda1sq, rho)
            kin = 0.5 * c * p[0] * p[0]
            if ctilde == 0.0:
                return kin
            s = _ck_s(-lambda1sq, rho)
            return kin + c / (2.0 * lambda2sq * s * s) * ctilde
        kin = 0.5 * p[0] * p[0]
        if ctilde == 0.0:
            return kin
        s = _ck_s(lambda1sq, rho)
        return kin + ctilde / (2.0 * lambda2sq * s * s)

    return Observable(f"H_radial[{kind}]", 1, fn)


def polar_phase_state(s: PhaseState, z: float, lambda2sq: float = 1.0) -> PhaseState:
    """Map a type-I Cartesian state to (rho, theta, p_rho, p_theta).

    Momenta are 2 J^{-T} p, the normalisation in which the polar Hamiltonian
    equals twice the Cartesian one and generates the same time evolution.
    """
    if s.n != 2:
        raise ValueError("polar chart needs N=2")
    (rho, grad_rho), (theta, grad_theta) = dual.gradient(lambda x: to_polar(x, z, lambda2sq), s.q)
    jac = np.array([grad_rho, grad_theta])
    p_pol = 2.0 * np.linalg.solve(jac.T, s.p)
    return PhaseState([float(rho), float(theta)], p_pol)
