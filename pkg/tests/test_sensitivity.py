import json
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinsta.dynamics import rotation_propagator_qubit, rotation_propagator_spin1
from spinsta.errors import ConfigurationError, QuadratureError
from spinsta.invariant import AngleTrajectory
from spinsta.pulsedesign import AnsatzSpec, design_angles, flat_spec
from spinsta.sensitivity import (
    HigherOrderWarning,
    SensitivityReport,
    SimulationFit,
    amplitude,
    analytic_baseline_fidelity,
    fit_sensitivity,
    q_detuning,
    q_dm,
    q_rabi,
    q_systematic,
    report,
    sensitivity,
)

SQRT2 = np.sqrt(2.0)


@pytest.mark.parametrize("T", [0.5, 1.0, 2.0])
def test_flat_constants(T):
    a = design_angles(flat_spec(T))
    assert q_systematic(a) == pytest.approx(np.pi**2 / 2, rel=1e-10)
    assert q_rabi(a) == pytest.approx(np.pi**2 / 4, rel=1e-10)
    assert q_detuning(a) == pytest.approx((T / np.pi) ** 2, rel=1e-10)
    # the DM functional carries units of time squared, like q_Delta
    assert q_dm(a, J=0.0) == pytest.approx(T**2 / (2 * np.pi**2), rel=1e-10)


@settings(max_examples=20, deadline=None)
@given(n=st.floats(0.3, 4.0))
def test_n_family_amplitude_sensitivity(n):
    a = design_angles(AnsatzSpec("sine", "n", n=n, kappa=SQRT2))
    assert q_rabi(a) == pytest.approx(np.sin(n * np.pi) ** 2 / (4 * n * n), abs=1e-11)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_integer_n_nulls_amplitude_sensitivity(n):
    assert q_rabi(design_angles(AnsatzSpec("sine", "n", n=float(n), kappa=SQRT2))) <= 1e-20


def test_optimal_alpha_values_null_their_sensitivity():
    assert q_systematic(design_angles(AnsatzSpec(alpha=0.12509480308173726))) <= 1e-20
    assert q_dm(design_angles(AnsatzSpec(alpha=0.058655439257881074)), J=10.0) <= 1e-20
    assert q_detuning(design_angles(AnsatzSpec("sine", alpha=-0.20574557977560048, kappa=SQRT2))) <= 1e-20


def test_rounded_alphas_are_small():
    assert q_systematic(design_angles(AnsatzSpec(alpha=0.125))) <= 1e-6
    assert q_dm(design_angles(AnsatzSpec(alpha=0.059)), J=10.0) <= 1e-9
    assert q_detuning(design_angles(AnsatzSpec("sine", alpha=-0.206, kappa=SQRT2))) <= 1e-8


def test_dm_functional_piecewise_equals_single_interval():
    from scipy.integrate import quad

    a = design_angles(AnsatzSpec(alpha=0.2))
    J = 10.0
    re = quad(lambda t: np.real(np.sin(a.theta(t)) * np.exp(1j * (J * t + a.m(t)))), 0, 1, epsabs=1e-13, limit=500)[0]
    im = quad(lambda t: np.imag(np.sin(a.theta(t)) * np.exp(1j * (J * t + a.m(t)))), 0, 1, epsabs=1e-13, limit=500)[0]
    assert q_dm(a, J) == pytest.approx((re**2 + im**2) / 8, rel=1e-9)


def test_q_dm_requires_coupling():
    with pytest.raises(ConfigurationError):
        amplitude("q_D", design_angles(AnsatzSpec()))


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_non_finite_integrand_raises():
    a = design_angles(AnsatzSpec())
    bad = AngleTrajectory(a.theta, lambda t: 1.0 / (np.asarray(t) - 0.5), a.beta, a.beta_dot, 1.0,
                          mode_phase=a.mode_phase)
    with pytest.raises(QuadratureError):
        sensitivity("q_Omega", bad)


def test_report_serialises():
    r = report("q_S", design_angles(AnsatzSpec(alpha=0.125)), alpha=0.125,
               sim_fit=SimulationFit(2.9e-4, 0.01, 0.0))
    data = json.loads(r.to_json())
    assert data["kind"] == "q_S" and data["alpha"] == 0.125
    assert data["sim_fit"]["step"] == 0.01
    assert isinstance(r, SensitivityReport)


def _composite(U_of_angle, delta):
    s = 1.0 + delta
    return U_of_angle("x", np.pi / 2 * s) @ U_of_angle("y", np.pi * s) @ U_of_angle("x", np.pi / 2 * s)


@settings(max_examples=40, deadline=None)
@given(delta=st.floats(-0.5, 0.5))
def test_closed_form_baselines_match_rotations(delta):
    s = 1.0 + delta
    flat1 = rotation_propagator_spin1("x", np.pi * s)
    assert abs(flat1[2, 0]) ** 2 == pytest.approx(float(analytic_baseline_fidelity("flat_heis", delta)), abs=1e-12)
    comp1 = _composite(rotation_propagator_spin1, delta)
    assert abs(comp1[2, 0]) ** 2 == pytest.approx(float(analytic_baseline_fidelity("composite_heis", delta)), abs=1e-12)
    flat2 = rotation_propagator_qubit("x", np.pi * s)
    assert abs(flat2[1, 0]) ** 2 == pytest.approx(float(analytic_baseline_fidelity("flat_ising", delta)), abs=1e-12)
    comp2 = _composite(rotation_propagator_qubit, delta)
    assert abs(comp2[1, 0]) ** 2 == pytest.approx(float(analytic_baseline_fidelity("composite_ising", delta)), abs=1e-12)


def test_unknown_baseline():
    with pytest.raises(ConfigurationError):
        analytic_baseline_fidelity("gaussian", 0.1)


def test_fit_three_point_exact_on_quadratic():
    d = np.array([-0.01, 0.0, 0.01])
    fit = fit_sensitivity(d, 1.0 - 2.5 * d**2)
    assert fit.value == pytest.approx(2.5, rel=1e-9)
    assert fit.step == pytest.approx(0.01)


def test_fit_separates_quartic_term():
    d = np.linspace(-0.04, 0.04, 9)
    fit = fit_sensitivity(d, 1.0 - 0.3 * d**2 - 7.0 * d**4, warn=False)
    assert fit.value == pytest.approx(0.3, rel=1e-8)


def test_fit_warns_when_quartic_dominates():
    d = np.linspace(-0.2, 0.2, 5)
    with pytest.warns(HigherOrderWarning):
        fit_sensitivity(d, 1.0 - np.pi**4 / 8 * d**4)


def test_fit_composite_curve_is_flat():
    d = np.linspace(-0.02, 0.02, 5)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", HigherOrderWarning)
        fit = fit_sensitivity(d, analytic_baseline_fidelity("composite_heis", d))
    assert abs(fit.value) <= 1e-6


def test_fit_rejects_bad_samples():
    with pytest.raises(ConfigurationError):
        fit_sensitivity([0.0, 0.1], [1.0, 0.9])
    with pytest.raises(ConfigurationError):
        fit_sensitivity([0.0, 0.1, 0.3], [1.0, 0.9, 0.5])
