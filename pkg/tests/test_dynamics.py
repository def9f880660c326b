import csv
import io
import json
import math

import numpy as np
import pytest

from shared_runs import DT, STEPS, midpoint_run, radial_runs
from sl2coalg import catalog, dynamics
from sl2coalg.coalgebra import Realization
from sl2coalg.phase import PhaseState, SingularPointError, evaluate, gradient, random_state


def test_rhs_examples():
    qd, pd = dynamics.hamilton_rhs(catalog.build("euclidean", {}).hamiltonian, PhaseState([0.3, 0.2], [1.0, 0.0]))
    assert qd.tolist() == [1.0, 0.0] and pd.tolist() == [0.0, 0.0]
    qd, pd = dynamics.hamilton_rhs(catalog.build("darboux3", {"alpha": 1}).hamiltonian, PhaseState([0.0, 0.0], [1.0, 0.0]))
    assert qd.tolist() == [1.0, 0.0] and pd.tolist() == [0.0, 0.0]


def test_midpoint_exact_on_free_flight():
    h = catalog.build("euclidean", {}).hamiltonian
    s = PhaseState([0.0, 0.0], [1.0, 0.0])
    for _ in range(10):
        s = dynamics.step_midpoint(h, s, 0.1)
    assert s.q == pytest.approx([1.0, 0.0], abs=1e-15)
    assert s.p.tolist() == [1.0, 0.0]


def test_rk4_exact_on_free_flight():
    h = catalog.build("euclidean", {}).hamiltonian
    s = dynamics.step_rk4(h, PhaseState([0.2, -0.1], [1.0, 0.5]), 0.25)
    assert s.q == pytest.approx([0.45, 0.025], abs=1e-15)


@pytest.mark.parametrize("name,params", [("darboux3", {"alpha": 1.0}), ("z_ms", {"sign": -1, "z": 0.7}),
                                         ("z_j3sq", {"alpha": 0.3, "z": 0.4})])
def test_midpoint_time_reversible(name, params, rng):
    h = catalog.build(name, params).hamiltonian
    for _ in range(5):
        s = random_state(rng, 2, qmax=1.2, pmax=1.0)
        back = dynamics.step_midpoint(h, dynamics.step_midpoint(h, s, 0.01), -0.01)
        assert np.max(np.abs(back.as_vector() - s.as_vector())) <= 1e-12


def test_fixed_point_failure_is_reported():
    h = catalog.build("z_type_I", {"z": 1.0}).hamiltonian
    with pytest.raises(dynamics.IntegratorError):
        dynamics.step_midpoint(h, PhaseState([1.5, 1.5], [3.0, 3.0]), 0.5, fp_maxiter=5)


def test_stationary_when_momentum_vanishes():
    spec = catalog.build("z_j3sq", {"alpha": 0.4, "z": 0.3})
    traj, drift = dynamics.simulate(spec, PhaseState([0.6, -0.4], [0.0, 0.0]), steps=50)
    assert np.all(traj.states == traj.states[0])


def test_singular_initial_condition_rejected():
    spec = catalog.build("euclidean", {}, Realization.classical(2, (1.0, 0.0)))
    with pytest.raises(SingularPointError, match="q1"):
        dynamics.simulate(spec, PhaseState([0.0, 1.0], [0.1, 0.1]), steps=5)


def test_failure_truncates_at_last_good_state():
    spec = catalog.build("z_type_I", {"z": 0.5})
    traj, drift = dynamics.simulate(spec, PhaseState([0.6, 0.8], [0.3, -0.5]), dt=0.05, steps=3000)
    assert drift.error is not None and drift.completed_steps < 3000
    assert traj.states.shape[0] == drift.completed_steps + 1
    assert np.all(np.isfinite(traj.states))


def test_trajectory_csv_and_drift_json():
    spec = catalog.build("darboux3", {"alpha": 1.0})
    traj, drift = dynamics.simulate(spec, PhaseState([0.5, 0.2], [0.4, -0.3]), steps=20)
    rows = list(csv.reader(io.StringIO(traj.to_csv())))
    assert rows[0] == ["t", "q1", "q2", "p1", "p2", "H", "C^(2)"]
    assert len(rows) == 22
    assert float(rows[5][0]) == 4 * 1e-3
    assert traj.times[7] == 7 * 1e-3
    d = json.loads(drift.to_json())
    assert set(d["monitors"]["H"]) == {"initial", "max_abs_drift", "rel_drift"}
    assert d["integrator"] == "midpoint" and d["dt"] == 1e-3 and d["steps"] == 20
    assert drift.to_json() == dynamics.simulate(spec, PhaseState([0.5, 0.2], [0.4, -0.3]), steps=20)[1].to_json()


def test_darboux3_energy_drift():
    traj, drift = midpoint_run("darboux3")
    assert drift.completed_steps == STEPS
    assert drift.rel_drift("H") <= 1e-6


def test_euclidean_integrals_absolute_drift():
    spec = catalog.build("euclidean", {}, Realization.classical(3))
    traj, drift = dynamics.simulate(spec, PhaseState([0.3, -0.6, 0.9], [0.2, 0.1, -0.15]), DT, STEPS)
    assert set(drift.monitors) == {"H", "C^(2)", "C^(3)", "C_(2)"}
    for name in ("C^(2)", "C^(3)", "C_(2)"):
        assert drift.monitors[name]["max_abs_drift"] <= 1e-9


def test_z_ms_integrals_drift():
    traj, drift = midpoint_run("z_ms")
    assert set(drift.monitors) == {"H", "C_z^(2)", "I_z"}
    assert drift.rel_drift("C_z^(2)") <= 1e-6 and drift.rel_drift("I_z") <= 1e-6


SWEEP = [
    ("euclidean", {}), ("poincare", {"kappa": -0.3}), ("beltrami", {"kappa": 0.2}),
    ("f_family", {"f": "exp(-x)"}), ("j3sq", {"alpha": 0.4}), ("j3sq_jm", {"alpha": 0.3}),
    ("potential", {"T": "Jp/2", "V": "x/2"}), ("z_f_family", {"f": "cosh(x)", "z": 0.3}),
    ("z_ms", {"sign": -1, "z": 0.4}), ("z_j3sq", {"alpha": 0.3, "z": 0.3}),
    ("z_potential", {"f": "1", "U": "x", "z": 0.3}),
]


def _drift_slope(traj):
    h = traj.monitor_values[:, 0]
    e = (h - h[0]) / (1 + abs(h[0]))
    return np.polyfit(np.arange(e.size), e, 1)[0]


@pytest.mark.parametrize("name,params", SWEEP, ids=[n + str(i) for i, (n, _) in enumerate(SWEEP)])
def test_midpoint_symplecticity_proxy(name, params):
    spec = catalog.build(name, params)
    traj, drift = dynamics.simulate(spec, PhaseState([0.5, 0.2], [0.1, -0.075]), DT, STEPS)
    assert drift.completed_steps == STEPS
    assert drift.rel_drift("H") <= 1e-6
    assert abs(_drift_slope(traj)) <= 1e-10
    for m, v in drift.monitors.items():
        assert v["rel_drift"] <= 1e-5, m


@pytest.mark.parametrize("key", ["darboux3", "z_type_I", "z_ms"])
def test_symplecticity_proxy_on_shared_runs(key):
    traj, drift = midpoint_run(key)
    assert abs(_drift_slope(traj)) <= 1e-10


def test_rk4_drifts_secularly_where_midpoint_stays_bounded():
    """Type-I kinetic energy with a confining potential; long horizon at coarse dt."""
    spec = catalog.build("z_potential", {"f": "1", "U": "x", "z": 0.5})
    s0 = PhaseState([0.5, 0.2], [0.4, -0.3])
    out = {}
    for integ in ("midpoint", "rk4"):
        traj, drift = dynamics.simulate(spec, s0, 0.2, 5000, [], integ)
        h = traj.monitor_values[:, 0]
        e = np.abs(h - h[0]) / (1 + abs(h[0]))
        quarter = e.size // 4
        out[integ] = (e.max(), e[:quarter].max(), e[-quarter:].max())
    assert out["rk4"][0] > out["midpoint"][0]
    assert out["rk4"][2] > 2 * out["rk4"][1]
    assert out["midpoint"][2] <= 1.5 * out["midpoint"][1]


def _global_error(h, s0, dt, t_end, integ):
    step = dynamics.step_midpoint if integ == "midpoint" else dynamics.step_rk4
    s = s0
    for _ in range(int(round(t_end / dt))):
        s = step(h, s, dt)
    return s


@pytest.mark.parametrize("integ,order", [("midpoint", 2), ("rk4", 4)])
def test_convergence_order_on_darboux3(integ, order):
    h = catalog.build("darboux3", {"alpha": 1.0}).hamiltonian
    s0 = PhaseState([0.5, 0.2], [0.4, -0.3])
    errs = []
    for dt in (0.2, 0.1, 0.05):
        ref = _global_error(h, s0, dt / 16, 1.0, "rk4")
        got = _global_error(h, s0, dt, 1.0, integ)
        errs.append(np.max(np.abs(got.as_vector() - ref.as_vector())))
    rates = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    assert all(abs(r - order) < 0.3 for r in rates), rates


def test_rk4_halving_dt_on_z_type_I():
    h = catalog.build("z_type_I", {"z": 0.5}).hamiltonian
    s0 = PhaseState([0.5, 0.3], [0.4, -0.3])
    ref = _global_error(h, s0, 0.1 / 32, 0.8, "rk4")
    e1 = np.max(np.abs(_global_error(h, s0, 0.1, 0.8, "rk4").as_vector() - ref.as_vector()))
    e2 = np.max(np.abs(_global_error(h, s0, 0.05, 0.8, "rk4").as_vector() - ref.as_vector()))
    assert 12 < e1 / e2 < 20


def test_rk4_and_midpoint_agree_to_second_order():
    h = catalog.build("z_ms", {"sign": 1, "z": 0.5}).hamiltonian
    s0 = PhaseState([0.5, 0.2], [0.4, -0.3])
    diffs = []
    for dt in (0.02, 0.01):
        a = _global_error(h, s0, dt, 0.4, "midpoint")
        b = _global_error(h, s0, dt, 0.4, "rk4")
        diffs.append(np.max(np.abs(a.as_vector() - b.as_vector())))
    assert diffs[0] / diffs[1] == pytest.approx(4.0, rel=0.1)


def test_polar_state_normalisation():
    z = 0.6
    spec = catalog.build("z_type_I", {"z": z})
    s = PhaseState([0.4, 0.9], [0.3, -0.2])
    ps = dynamics.polar_phase_state(s, z)
    h_polar = dynamics.polar_hamiltonian("typeI", z, 1.0)
    c = evaluate(catalog.build("z_type_I", {"z": z}).hamiltonian, s)
    assert evaluate(h_polar, ps) == pytest.approx(2 * c, rel=1e-13)
    from sl2coalg.coalgebra import casimir
    cz = evaluate(casimir(spec.realization), s)
    assert ps.p[1] ** 2 == pytest.approx(4 * cz, rel=1e-12)


def test_reduce_radial_examples():
    h = dynamics.reduce_radial("ms", 0.3, 1.0, 0.0)
    assert evaluate(h, PhaseState([0.7], [0.4])) == 0.5 * 0.4**2
    with pytest.raises(ValueError):
        dynamics.reduce_radial("ms", 0.3, 1.0, -1.0)
    h = dynamics.reduce_radial("typeI", 0.3, 1.0, 0.5)
    with pytest.raises(ArithmeticError):
        evaluate(h, PhaseState([0.0], [0.4]))


def test_ms_radial_matches_polar_energy():
    lam1sq, ct = 0.4, 0.3
    polar = dynamics.polar_hamiltonian("ms", lam1sq, 1.0)
    radial = dynamics.reduce_radial("ms", lam1sq, 1.0, ct)
    s = PhaseState([0.8, 1.1], [0.25, math.sqrt(ct)])
    assert evaluate(radial, PhaseState([0.8], [0.25])) == pytest.approx(evaluate(polar, s), rel=1e-15)


def test_radial_energy_matches_full_run():
    full, radial, polar, polar_drift = radial_runs()
    h_full = full.monitor_values[:, 0]
    h_rad = radial.monitor_values[:, 0]
    assert np.max(np.abs(h_rad - 2 * h_full) / (1 + np.abs(2 * h_full))) <= 1e-6
    # the radial coordinate follows the same curve in both descriptions
    z = 0.5
    from sl2coalg.geometry import polar_radius
    rho_full = np.array([float(polar_radius(x[:2], z)) for x in full.states[::500]])
    assert np.max(np.abs(rho_full - radial.states[::500, 0])) <= 1e-6


def test_p_theta_conserved_in_polar_run():
    full, radial, polar, polar_drift = radial_runs()
    assert polar_drift.completed_steps == STEPS
    assert polar_drift.monitors["p_theta"]["max_abs_drift"] <= 1e-8
