import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from spinsta.errors import BasisMismatch, ConfigurationError, DecouplingViolation, DomainError
from spinsta.pulse import ControlPulse, constant
from spinsta.spinmodel import (
    Kind,
    OperatorMatrix,
    SpinSystemModel,
    aniso_product_hamiltonian,
    basis_state,
    build_hamiltonian,
    commutator,
    coupled_basis_transform,
    dm_product,
    exchange_product,
    hamiltonian_samples,
    level_crossing_times,
    product_to_coupled,
    reduce_subspace,
    spin1_generators,
    three_spin_zeeman,
    triangle_basis,
    w_state,
    zeeman_product,
)

ALL_REPRESENTATIONS = [
    (Kind.HEISENBERG_ISO, 3), (Kind.HEISENBERG_ISO, 4), (Kind.HEISENBERG_ANISO, 3),
    (Kind.HEISENBERG_ANISO, 4), (Kind.HEISENBERG_DM, 4), (Kind.ISING_TRANSVERSE, 2),
    (Kind.ISING_TRANSVERSE, 3), (Kind.ISING_TRANSVERSE, 4), (Kind.ISING_DM, 2),
    (Kind.ISING_DM, 3), (Kind.ISING_DM, 4), (Kind.TRIANGLE_ISING3, 2),
]


def static_pulse(ox=0.7, de=0.4, oy=0.0, T=1.0):
    return ControlPulse(constant(ox), constant(de), T, omega_y=constant(oy))


def test_unknown_kind_rejected():
    with pytest.raises(ConfigurationError):
        SpinSystemModel("xy_model", dim=3)


def test_invalid_representation_rejected():
    with pytest.raises(ConfigurationError):
        SpinSystemModel(Kind.HEISENBERG_DM, dim=3)
    with pytest.raises(ConfigurationError):
        SpinSystemModel(Kind.TRIANGLE_ISING3, dim=4)


def test_b0_must_be_positive():
    with pytest.raises(ConfigurationError):
        SpinSystemModel(Kind.HEISENBERG_ISO, dim=3, B0=0.0)


def test_model_dict_round_trip_and_strict_keys():
    m = SpinSystemModel(Kind.ISING_DM, dim=2, J=10.0, D=1.0)
    assert SpinSystemModel.from_dict(m.to_dict()) == m
    data = m.to_dict()
    data["bogus"] = 1
    with pytest.raises(ConfigurationError):
        SpinSystemModel.from_dict(data)


def test_kappa_per_family():
    assert SpinSystemModel(Kind.HEISENBERG_ISO, dim=3).kappa == 1.0
    assert SpinSystemModel(Kind.ISING_TRANSVERSE, dim=2).kappa == pytest.approx(np.sqrt(2))
    assert SpinSystemModel(Kind.ISING_TRANSVERSE, dim=3).kappa == pytest.approx(np.sqrt(2))
    assert SpinSystemModel(Kind.TRIANGLE_ISING3, dim=2).kappa == pytest.approx(np.sqrt(3))


def test_dm_shift_is_two_d_squared_over_j():
    assert SpinSystemModel(Kind.ISING_DM, dim=2, J=10.0, D=1.0).dm_shift == pytest.approx(0.2)
    assert SpinSystemModel(Kind.ISING_TRANSVERSE, dim=2, J=10.0, D=1.0).dm_shift == 0.0


@pytest.mark.parametrize("kind,dim", ALL_REPRESENTATIONS)
@settings(max_examples=20, deadline=None)
@given(ox=st.floats(-20, 20), oy=st.floats(-20, 20), de=st.floats(-20, 20), t=st.floats(0, 1))
def test_hamiltonians_are_hermitian(kind, dim, ox, oy, de, t):
    model = SpinSystemModel(kind, dim=dim, J=10.0, D=1.0, Jx=9.0, Jy=11.0, Jz=10.0)
    h = build_hamiltonian(model, t, static_pulse(ox, de, oy))
    assert h.dim == dim
    assert h.hermiticity_error() <= 1e-12


def test_heisenberg_three_level_matrix():
    h = build_hamiltonian(SpinSystemModel(Kind.HEISENBERG_ISO, dim=3), 0.5, static_pulse(0.7, 0.4))
    expected = np.array([[0.4, 0.7 / np.sqrt(2), 0], [0.7 / np.sqrt(2), 0, 0.7 / np.sqrt(2)],
                         [0, 0.7 / np.sqrt(2), -0.4]])
    np.testing.assert_allclose(np.asarray(h), expected, atol=1e-15)


def test_ising_effective_two_level_matrix():
    h = build_hamiltonian(SpinSystemModel(Kind.ISING_TRANSVERSE, dim=2), 0.5, static_pulse(0.7, 0.4))
    expected = 0.5 * np.array([[0.4, np.sqrt(2) * 0.7], [np.sqrt(2) * 0.7, -0.4]])
    np.testing.assert_allclose(np.asarray(h), expected, atol=1e-15)


def test_ising_dm_two_level_carries_detuning_shift():
    base = SpinSystemModel(Kind.ISING_TRANSVERSE, dim=2, J=10.0)
    dm = SpinSystemModel(Kind.ISING_DM, dim=2, J=10.0, D=1.0)
    diff = np.asarray(build_hamiltonian(dm, 0.1, static_pulse())) - np.asarray(build_hamiltonian(base, 0.1, static_pulse()))
    np.testing.assert_allclose(diff, np.diag([-0.1, 0.1]), atol=1e-15)


def test_triangle_two_level_coupling_is_sqrt3():
    h = build_hamiltonian(SpinSystemModel(Kind.TRIANGLE_ISING3, dim=2), 0.0, static_pulse(1.0, 0.0))
    assert h.data[0, 1] == pytest.approx(np.sqrt(3) / 2)
    # the same element from the three-spin Zeeman term restricted to {|uuu>, |W>}
    V = triangle_basis()
    reduced = V.conj().T @ three_spin_zeeman(1.0, 0.0, 0.0) @ V
    assert abs(reduced[0, 1]) == pytest.approx(np.sqrt(3) / 2)


def test_w_state_is_normalised_and_symmetric():
    w = w_state()
    assert np.linalg.norm(w) == pytest.approx(1.0)
    np.testing.assert_allclose(triangle_basis().conj().T @ triangle_basis(), np.eye(2), atol=1e-15)
    assert np.count_nonzero(np.abs(w) > 0) == 3


def test_coupled_transform_is_unitary():
    U = coupled_basis_transform()
    np.testing.assert_allclose(U.conj().T @ U, np.eye(4), atol=1e-15)


def test_exchange_is_diagonal_in_coupled_basis():
    J = 10.0
    h = product_to_coupled(exchange_product(J, J, J)).data
    np.testing.assert_allclose(h, np.diag([J / 4, J / 4, -3 * J / 4, J / 4]), atol=1e-14)


@settings(max_examples=25, deadline=None)
@given(J=st.floats(0.1, 20), D=st.floats(-3, 3), ox=st.floats(-5, 5), oy=st.floats(-5, 5), de=st.floats(-5, 5))
def test_dm_four_level_matches_product_construction(J, D, ox, oy, de):
    model = SpinSystemModel(Kind.HEISENBERG_DM, dim=4, J=J, D=D)
    h = hamiltonian_samples(model, static_pulse(ox, de, oy), [0.0])[0]
    prod = exchange_product(J, J, J) + zeeman_product(ox, oy, de) + dm_product(D)
    np.testing.assert_allclose(h, product_to_coupled(prod).data - J / 4 * np.eye(4), atol=1e-12)


def test_anisotropic_block_form_and_extra_coupling():
    Jx, Jy, Jz = 9.0, 11.0, 10.0
    prod = aniso_product_hamiltonian(Jx, Jy, Jz, 0.7, 0.0, 0.4)
    h = product_to_coupled(prod).data
    # singlet decoupled, but psi11 <-> psi1m1 carries (Jx - Jy)/4
    np.testing.assert_allclose(h[2, [0, 1, 3]], 0.0, atol=1e-14)
    assert h[0, 3] == pytest.approx((Jx - Jy) / 4)
    model = SpinSystemModel(Kind.HEISENBERG_ANISO, dim=4, Jx=Jx, Jy=Jy, Jz=Jz)
    np.testing.assert_allclose(hamiltonian_samples(model, static_pulse(0.7, 0.4), [0.0])[0], h, atol=1e-12)


def test_reduce_subspace_drops_decoupled_singlet():
    model = SpinSystemModel(Kind.HEISENBERG_ISO, dim=4)
    h4 = build_hamiltonian(model, 0.2, static_pulse())
    h3 = reduce_subspace(h4, [0, 1, 3])
    expected = build_hamiltonian(SpinSystemModel(Kind.HEISENBERG_ISO, dim=3), 0.2, static_pulse())
    np.testing.assert_allclose(np.asarray(h3), np.asarray(expected), atol=1e-15)


def test_reduce_subspace_refuses_dm_coupled_singlet():
    h4 = build_hamiltonian(SpinSystemModel(Kind.HEISENBERG_DM, dim=4, D=1.0), 0.2, static_pulse())
    with pytest.raises(DecouplingViolation) as info:
        reduce_subspace(h4, [0, 1, 3])
    assert info.value.max_coupling == pytest.approx(0.5)


def test_operator_basis_mismatch():
    a = OperatorMatrix(np.eye(4), "coupled")
    b = OperatorMatrix(np.eye(4), "product")
    with pytest.raises(BasisMismatch):
        a + b
    with pytest.raises(BasisMismatch):
        product_to_coupled(a)


def test_operator_matrix_is_read_only():
    a = OperatorMatrix(np.eye(3), "triplet")
    with pytest.raises(ValueError):
        a.data[0, 0] = 2.0


def test_spin1_algebra():
    jx, jy, jz = (np.asarray(g) for g in spin1_generators())
    np.testing.assert_allclose(commutator(jx, jy), 1j * jz, atol=1e-15)
    np.testing.assert_allclose(jx @ jx + jy @ jy + jz @ jz, 2 * np.eye(3), atol=1e-15)


def test_level_crossing_times():
    model = SpinSystemModel(Kind.ISING_TRANSVERSE, dim=3, J=10.0, omega=20.0, A=10.0)
    assert level_crossing_times(model) == pytest.approx((1.5, 2.0, 2.5))
    dm = model.with_(kind=Kind.ISING_DM, D=1.0)
    t12, _, t23 = level_crossing_times(dm)
    assert t12 == pytest.approx(1.52) and t23 == pytest.approx(2.48)
    with pytest.raises(DomainError):
        level_crossing_times(model.with_(A=0.0))


def test_build_hamiltonian_range_checked():
    with pytest.raises(DomainError):
        build_hamiltonian(SpinSystemModel(Kind.HEISENBERG_ISO, dim=3), 1.5, static_pulse())


def test_ising_lab_frame_equals_rotating_frame_at_matched_phase():
    """The lab-frame 4-level matrix is the 3-level rotating one after the phase transformation."""
    model4 = SpinSystemModel(Kind.ISING_TRANSVERSE, dim=4, J=10.0, omega=20.0)
    model3 = model4.with_(dim=3)
    pulse = static_pulse(0.9, 1.3)
    t = 0.37
    h4 = hamiltonian_samples(model4, pulse, [t])[0]
    h3 = hamiltonian_samples(model3, pulse, [t])[0]
    keep = [0, 1, 3]
    U = np.diag(np.exp(-1j * model4.omega * t * np.array([1.0, 0.0, -1.0])))
    rotated = U.conj().T @ h4[np.ix_(keep, keep)] @ U - np.diag([model4.omega, 0.0, -model4.omega])
    np.testing.assert_allclose(rotated, h3, atol=1e-12)


def test_basis_state_labels():
    model = SpinSystemModel(Kind.HEISENBERG_DM, dim=4)
    assert basis_state(model, "psi00")[2] == 1.0
    with pytest.raises(ConfigurationError):
        basis_state(model, "psi22")
    tri = SpinSystemModel(Kind.TRIANGLE_ISING3, dim=2)
    assert basis_state(tri, "w")[1] == 1.0


def test_rotation_generators_exponentiate():
    jx = np.asarray(spin1_generators()[0])
    U = expm(-1j * np.pi * jx)
    assert abs(U[2, 0]) == pytest.approx(1.0)
