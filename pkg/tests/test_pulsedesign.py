import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinsta.errors import AlphaSearchError, ConfigurationError
from spinsta.pulsedesign import (
    AnsatzSpec,
    beta_closure,
    beta_closure_formula,
    composite_pulse,
    composite_sequence,
    design_angles,
    find_alpha,
    flat_pulse,
    landau_zener,
    m_family,
    synthesize,
    theta_profile,
)
from spinsta.spinmodel import Kind, SpinSystemModel

SQRT2 = np.sqrt(2.0)


def arccot(x):
    return np.arctan2(1.0, x)


@pytest.mark.parametrize("family", ["cubic", "sine"])
@pytest.mark.parametrize("T", [0.5, 1.0, 2.0])
def test_theta_boundary_conditions(family, T):
    spec = AnsatzSpec(family, T=T)
    th, thd = theta_profile(spec, np.array([0.0, T]))
    np.testing.assert_allclose(th, [0.0, np.pi], atol=1e-15)
    np.testing.assert_allclose(thd, [0.0, 0.0], atol=1e-14)


def test_theta_dot_is_derivative():
    for family in ("cubic", "sine", "linear"):
        spec = AnsatzSpec(family, T=1.3)
        t = np.linspace(0.01, 1.29, 50)
        h = 1e-6
        num = (theta_profile(spec, t + h)[0] - theta_profile(spec, t - h)[0]) / (2 * h)
        np.testing.assert_allclose(theta_profile(spec, t)[1], num, atol=1e-7)


@settings(max_examples=30, deadline=None)
@given(alpha=st.floats(-0.5, 0.5), theta=st.floats(0.0, np.pi))
def test_alpha_closure_matches_closed_form(alpha, theta):
    beta, _ = beta_closure(AnsatzSpec(alpha=alpha), theta)
    expected = -arccot(2 * (1 + 2 * alpha * np.cos(2 * theta)) * np.sin(theta))
    assert beta == pytest.approx(expected, abs=1e-13)


@settings(max_examples=30, deadline=None)
@given(n=st.floats(0.1, 5.0), theta=st.floats(0.0, np.pi))
def test_n_closure_matches_closed_form(n, theta):
    beta, _ = beta_closure(AnsatzSpec("sine", "n", n=n), theta)
    assert beta == pytest.approx(-arccot(4 * n * np.sin(theta) ** 3), abs=1e-13)


@settings(max_examples=20, deadline=None)
@given(alpha=st.floats(-0.5, 0.5))
def test_beta_dot_is_derivative(alpha):
    a = design_angles(AnsatzSpec(alpha=alpha))
    t = np.linspace(0.01, 0.99, 30)
    h = 1e-6
    num = (a.beta(t + h) - a.beta(t - h)) / (2 * h)
    np.testing.assert_allclose(a.beta_dot(t), num, atol=1e-5)


def test_m_family_derivatives():
    for spec in (AnsatzSpec(alpha=0.3), AnsatzSpec("sine", "n", n=1.7)):
        th = np.linspace(0.1, 3.0, 20)
        h = 1e-6
        m, dm, d2m = m_family(spec, th)
        np.testing.assert_allclose(dm, (m_family(spec, th + h)[0] - m_family(spec, th - h)[0]) / (2 * h), atol=1e-7)
        np.testing.assert_allclose(d2m, (m_family(spec, th + h)[1] - m_family(spec, th - h)[1]) / (2 * h), atol=1e-6)


@settings(max_examples=20, deadline=None)
@given(alpha=st.floats(-0.5, 0.5), family=st.sampled_from(["cubic", "sine"]))
def test_rabi_frequency_is_non_negative(alpha, family):
    t, om, _ = synthesize(AnsatzSpec(family, alpha=alpha)).samples(501)
    assert np.all(om >= -1e-12)


def test_designed_peak_amplitudes():
    heis = synthesize(AnsatzSpec(alpha=0.125))
    assert heis.peak_omega() == pytest.approx(8.5, abs=0.1)
    ising = synthesize(AnsatzSpec("sine", "n", n=1.0, kappa=SQRT2))
    assert ising.peak_omega() == pytest.approx(14.4, abs=0.1)


def test_delta_is_antisymmetric_for_symmetric_design():
    pulse = synthesize(AnsatzSpec(alpha=0.125))
    t = np.linspace(0.0, 1.0, 101)
    _, _, de = pulse.fields(t)
    np.testing.assert_allclose(de, -de[::-1], atol=1e-9)


def test_synthesize_checks_kappa():
    with pytest.raises(ConfigurationError):
        synthesize(AnsatzSpec(alpha=0.1), SpinSystemModel(Kind.ISING_TRANSVERSE, dim=2))


def test_ansatz_validation_and_round_trip():
    spec = AnsatzSpec("sine", "n", n=2.0, T=1.5, kappa=SQRT2)
    assert AnsatzSpec.from_dict(spec.to_dict()) == spec
    with pytest.raises(ConfigurationError):
        AnsatzSpec("gaussian")
    with pytest.raises(ConfigurationError):
        AnsatzSpec(T=0.0)
    with pytest.raises(ConfigurationError):
        AnsatzSpec("sine", "n", n=0.0)
    with pytest.raises(ConfigurationError):
        AnsatzSpec.from_dict({"theta_family": "cubic", "beta": 1.0})


def test_closure_formula_recorded():
    assert "4 n sin^3 theta" in beta_closure_formula(AnsatzSpec("sine", "n"))
    assert "alpha = 0.125" in beta_closure_formula(AnsatzSpec(alpha=0.125))


def test_find_alpha_systematic_root():
    res = find_alpha(AnsatzSpec("cubic"), "q_S")
    assert res.status == "root"
    assert res.alpha == pytest.approx(0.12509480308, abs=1e-9)
    assert res.value <= 1e-20


def test_find_alpha_prefers_smallest_root():
    res = find_alpha(AnsatzSpec("cubic"), "q_D", J=10.0)
    assert res.status == "root"
    assert res.alpha == pytest.approx(0.0586554, abs=1e-6)
    qs = dict(res.profile)
    assert min(qs.values()) < 1e-6


def test_find_alpha_reports_minimum_when_no_sign_change():
    # q_Omega of the alpha family never vanishes on this bracket but has an interior minimum
    spec = AnsatzSpec("sine", kappa=SQRT2)
    res = find_alpha(spec, "q_Omega", bracket=(-0.5, 0.5), step=0.05)
    assert res.status in ("root", "minimum")
    assert res.value <= min(v for _, v in res.profile) + 1e-12


def test_find_alpha_fails_without_interior_minimum():
    with pytest.raises(AlphaSearchError) as info:
        find_alpha(AnsatzSpec("cubic"), "q_S", bracket=(0.3, 0.5), step=0.02)
    assert len(info.value.profile) == 11


def test_find_alpha_unknown_kind():
    with pytest.raises(ConfigurationError):
        find_alpha(AnsatzSpec(), "q_X")


def test_flat_pulse_area():
    for kappa in (1.0, SQRT2, np.sqrt(3)):
        p = flat_pulse(2.0, kappa)
        _, om, de = p.samples(11)
        np.testing.assert_allclose(kappa * om * 2.0, np.pi)
        np.testing.assert_allclose(de, 0.0)


def test_composite_sequence_durations():
    segs = composite_sequence(2.0)
    assert [s.axis for s in segs] == ["x", "y", "x"]
    assert [s.angle for s in segs] == pytest.approx([np.pi / 2, np.pi, np.pi / 2])
    assert [s.duration for s in segs] == pytest.approx([0.5, 1.0, 0.5])
    with pytest.raises(ConfigurationError):
        composite_sequence(1.0, "qutrit")


def test_composite_pulse_piecewise_fields():
    p = composite_pulse(composite_sequence(2.0))
    assert p.breakpoints == pytest.approx((0.5, 1.5))
    ox, oy, _ = p.fields(np.array([0.25, 1.0, 1.75]))
    np.testing.assert_allclose(ox, [np.pi, 0.0, np.pi])
    np.testing.assert_allclose(oy, [0.0, np.pi, 0.0])


def test_landau_zener_chirp():
    p = landau_zener(8.0, 4.0, 20.0)
    _, om, de = p.samples(3)
    np.testing.assert_allclose(om, 8.0)
    np.testing.assert_allclose(de, [-40.0, 0.0, 40.0])
    with pytest.raises(ConfigurationError):
        landau_zener(0.0, 4.0, 1.0)
