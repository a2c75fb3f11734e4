"""Two- and three-spin Hamiltonians in the coupled (singlet-triplet) basis.

Conventions
-----------
* hbar = 1; energies in units of the reference field ``B0``, times in ``1/B0``.
* Product basis order: ``|uu>, |ud>, |du>, |dd>`` (u = spin up).
* Coupled basis order: ``|psi_{1,1}>, |psi_{1,0}>, |psi_{0,0}>, |psi_{1,-1}>``.
* Three-level (triplet) order: ``|psi_{1,1}>, |psi_{1,0}>, |psi_{1,-1}>``.
* Ising two-level order: ``|psi_{1,1}>, |psi_{1,0}>``; triangle two-level order:
  ``|psi_{3/2,3/2}>, |psi_{3/2,1/2}>``.

Drive fields come from a pulse object exposing ``fields(t) -> (omega_x,
omega_y, delta)``.  For Heisenberg models ``omega_x, omega_y, delta`` are
``B_x, B_y, B_z``.  For the Ising models ``delta`` is the effective detuning
``A t - omega + J/2`` of the rotating frame.
"""

from __future__ import annotations

import enum
from dataclasses import asdict, dataclass, fields
from typing import Sequence

import numpy as np

from .errors import BasisMismatch, ConfigurationError, DecouplingViolation, DomainError

SQRT2 = np.sqrt(2.0)
SQRT3 = np.sqrt(3.0)


class Kind(str, enum.Enum):
    HEISENBERG_ISO = "heisenberg_iso"
    HEISENBERG_ANISO = "heisenberg_aniso"
    HEISENBERG_DM = "heisenberg_dm"
    ISING_TRANSVERSE = "ising_transverse"
    ISING_DM = "ising_dm"
    TRIANGLE_ISING3 = "triangle_ising3"


# (kind, dim) -> basis tag of the working representation
_REPRESENTATIONS = {
    (Kind.HEISENBERG_ISO, 3): "coupled",
    (Kind.HEISENBERG_ISO, 4): "coupled",
    (Kind.HEISENBERG_ANISO, 3): "coupled",
    (Kind.HEISENBERG_ANISO, 4): "coupled",
    (Kind.HEISENBERG_DM, 4): "coupled",
    (Kind.ISING_TRANSVERSE, 2): "rotating",
    (Kind.ISING_TRANSVERSE, 3): "rotating",
    (Kind.ISING_TRANSVERSE, 4): "coupled",
    (Kind.ISING_DM, 2): "rotating",
    (Kind.ISING_DM, 3): "rotating",
    (Kind.ISING_DM, 4): "coupled",
    (Kind.TRIANGLE_ISING3, 2): "rotating",
}

# state labels per representation, in basis order
STATE_LABELS = {
    4: ("psi11", "psi10", "psi00", "psi1m1"),
    3: ("psi11", "psi10", "psi1m1"),
    2: ("psi11", "psi10"),
}
TRIANGLE_LABELS = ("psi3/2,3/2", "w")


@dataclass(frozen=True)
class SpinSystemModel:
    """Physical model plus the level count of its working representation."""

    kind: Kind = Kind.HEISENBERG_ISO
    dim: int = 3
    J: float = 10.0
    Jx: float | None = None
    Jy: float | None = None
    Jz: float | None = None
    D: float = 0.0
    A: float = 10.0
    omega: float = 20.0
    B0: float = 1.0

    def __post_init__(self):
        try:
            kind = Kind(self.kind)
        except ValueError:
            raise ConfigurationError(f"unknown model kind {self.kind!r}") from None
        object.__setattr__(self, "kind", kind)
        if (kind, self.dim) not in _REPRESENTATIONS:
            raise ConfigurationError(f"{kind.value} has no {self.dim}-level representation")
        if not self.B0 > 0:
            raise ConfigurationError("B0 must be positive")
        if kind is Kind.HEISENBERG_ANISO:
            for name in ("Jx", "Jy", "Jz"):
                if getattr(self, name) is None:
                    object.__setattr__(self, name, float(self.J))

    @property
    def basis(self) -> str:
        return _REPRESENTATIONS[(self.kind, self.dim)]

    @property
    def kappa(self) -> float:
        """Drive coupling factor of the effective two-level (or spin-1) design.

        Ising pairs couple with ``sqrt(2) Omega / 2`` in every representation
        (the 3- and 4-level matrices carry ``Omega / sqrt(2)``), so a pulse
        designed with ``kappa = sqrt(2)`` applies unchanged to all of them.
        """
        if self.kind is Kind.TRIANGLE_ISING3:
            return float(SQRT3)
        if self.kind in (Kind.ISING_TRANSVERSE, Kind.ISING_DM):
            return float(SQRT2)
        return 1.0

    @property
    def dm_shift(self) -> float:
        """Detuning shift 2 D^2 / J produced by eliminating the singlet (Ising DM)."""
        if self.kind is not Kind.ISING_DM or self.D == 0.0:
            return 0.0
        return 2.0 * self.D**2 / self.J

    def state_labels(self) -> tuple[str, ...]:
        if self.kind is Kind.TRIANGLE_ISING3:
            return TRIANGLE_LABELS
        return STATE_LABELS[self.dim]

    def with_(self, **changes) -> "SpinSystemModel":
        data = self.to_dict()
        data.update(changes)
        return SpinSystemModel.from_dict(data)

    def to_dict(self) -> dict:
        data = asdict(self)
        data["kind"] = self.kind.value
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "SpinSystemModel":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown model keys: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class OperatorMatrix:
    """A square complex matrix tagged with the basis it is written in."""

    data: np.ndarray
    basis: str = "coupled"

    def __post_init__(self):
        data = np.asarray(self.data, dtype=complex)
        if data.ndim != 2 or data.shape[0] != data.shape[1]:
            raise BasisMismatch(f"operator must be square, got shape {data.shape}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.data if dtype is None else self.data.astype(dtype)

    def _check(self, other: "OperatorMatrix"):
        if not isinstance(other, OperatorMatrix):
            return OperatorMatrix(np.asarray(other), self.basis)
        if other.basis != self.basis or other.dim != self.dim:
            raise BasisMismatch(f"{self.basis}[{self.dim}] vs {other.basis}[{other.dim}]")
        return other

    def __add__(self, other):
        return OperatorMatrix(self.data + self._check(other).data, self.basis)

    def __sub__(self, other):
        return OperatorMatrix(self.data - self._check(other).data, self.basis)

    def __matmul__(self, other):
        return OperatorMatrix(self.data @ self._check(other).data, self.basis)

    def __mul__(self, scalar):
        return OperatorMatrix(self.data * scalar, self.basis)

    __rmul__ = __mul__

    def dagger(self) -> "OperatorMatrix":
        return OperatorMatrix(self.data.conj().T, self.basis)

    def hermiticity_error(self) -> float:
        """max|H - H^dagger| relative to the spectral norm (0 for the zero matrix)."""
        norm = np.linalg.norm(self.data, 2)
        err = np.max(np.abs(self.data - self.data.conj().T))
        return float(err / norm) if norm > 0 else float(err)


def commutator(a, b) -> np.ndarray:
    a, b = np.asarray(a), np.asarray(b)
    return a @ b - b @ a


# -- spin operator algebra -------------------------------------------------

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def spin1_generators() -> tuple[OperatorMatrix, OperatorMatrix, OperatorMatrix]:
    """Spin-1 matrices ``J_x, J_y, J_z`` in the ``m = 1, 0, -1`` basis."""
    jx = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex) / SQRT2
    jy = np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]], dtype=complex) / SQRT2
    jz = np.diag([1.0, 0.0, -1.0]).astype(complex)
    return OperatorMatrix(jx), OperatorMatrix(jy), OperatorMatrix(jz)


def _single_spin_ops():
    return PAULI_X / 2, PAULI_Y / 2, PAULI_Z / 2


def two_spin_operators() -> tuple[tuple[np.ndarray, ...], tuple[np.ndarray, ...]]:
    """``((S1x, S1y, S1z), (S2x, S2y, S2z))`` in the product basis."""
    eye = np.eye(2)
    s = _single_spin_ops()
    return tuple(np.kron(o, eye) for o in s), tuple(np.kron(eye, o) for o in s)


def exchange_product(Jx: float, Jy: float, Jz: float) -> OperatorMatrix:
    """``sum_i J_i S1^i S2^i`` in the product basis."""
    s1, s2 = two_spin_operators()
    h = Jx * s1[0] @ s2[0] + Jy * s1[1] @ s2[1] + Jz * s1[2] @ s2[2]
    return OperatorMatrix(h, "product")


def zeeman_product(Bx: float, By: float, Bz: float) -> OperatorMatrix:
    """``B . (S1 + S2)`` in the product basis."""
    s1, s2 = two_spin_operators()
    h = sum(b * (a + c) for b, a, c in zip((Bx, By, Bz), s1, s2))
    return OperatorMatrix(h, "product")


def dm_product(D: float) -> OperatorMatrix:
    """DM term ``D z . (S1 x S2)`` in the product basis."""
    s1, s2 = two_spin_operators()
    return OperatorMatrix(D * (s1[0] @ s2[1] - s1[1] @ s2[0]), "product")


def aniso_product_hamiltonian(Jx, Jy, Jz, Bx, By, Bz) -> OperatorMatrix:
    """Anisotropic Heisenberg Hamiltonian (exchange + Zeeman), product basis."""
    return exchange_product(Jx, Jy, Jz) + zeeman_product(Bx, By, Bz)


def coupled_basis_transform() -> np.ndarray:
    """Unitary whose columns are the coupled states in the product basis."""
    v = np.zeros((4, 4), dtype=complex)
    v[0, 0] = 1.0
    v[1, 1] = v[2, 1] = 1 / SQRT2
    v[1, 2], v[2, 2] = 1 / SQRT2, -1 / SQRT2
    v[3, 3] = 1.0
    return v


def product_to_coupled(op: OperatorMatrix) -> OperatorMatrix:
    """Similarity-transform a 4x4 product-basis operator to the coupled basis."""
    if not isinstance(op, OperatorMatrix) or op.basis != "product" or op.dim != 4:
        raise BasisMismatch("product_to_coupled expects a 4x4 operator tagged 'product'")
    v = coupled_basis_transform()
    return OperatorMatrix(v.conj().T @ op.data @ v, "coupled")


def reduce_subspace(op: OperatorMatrix, keep: Sequence[int], tol: float = 1e-12) -> OperatorMatrix:
    """Principal submatrix on ``keep`` after checking the rest is decoupled.

    Raises
    ------
    DecouplingViolation
        If any dropped level couples to a kept one with magnitude above ``tol``.
    """
    keep = list(keep)
    drop = [i for i in range(op.dim) if i not in keep]
    if drop:
        block = op.data[np.ix_(keep, drop)]
        worst = float(np.max(np.abs(block))) if block.size else 0.0
        if worst > tol:
            raise DecouplingViolation(worst, tol)
    return OperatorMatrix(op.data[np.ix_(keep, keep)], op.basis)


def rotating_frame_unitary(omega: float, t: float) -> np.ndarray:
    """Diagonal unitary ``diag(e^{-i w t}, 1, 1, e^{i w t})`` taking the lab frame to the rotating one.

    With ``psi_lab = U c`` the rotating-frame amplitudes obey ``i dc/dt = (U^+ H U - i U^+ dU/dt) c``.
    """
    return np.diag([np.exp(-1j * omega * t), 1.0, 1.0, np.exp(1j * omega * t)])


def level_crossing_times(model: SpinSystemModel) -> tuple[float, float, float]:
    """Diagonal crossings ``(t12, t13, t23)`` of the rotating-frame Ising Hamiltonian."""
    if model.kind not in (Kind.ISING_TRANSVERSE, Kind.ISING_DM):
        raise ConfigurationError("level crossings are defined for Ising models only")
    if model.A == 0:
        raise DomainError("A = 0: the diagonal energies never cross")
    shift = 2.0 * model.D**2 / model.J if model.kind is Kind.ISING_DM and model.D else 0.0
    w, half = model.omega, model.J / 2
    return (
        (w - half + shift) / model.A,
        w / model.A,
        (w + half - shift) / model.A,
    )


# -- Hamiltonians ------------------------------------------------------------


def _aniso_coupled_static(model: SpinSystemModel) -> np.ndarray:
    return product_to_coupled(exchange_product(model.Jx, model.Jy, model.Jz)).data


def _zeeman_coupled(ox, oy, de):
    """Zeeman term B.(S1+S2) in the coupled basis, batched over time."""
    n = ox.shape[0]
    h = np.zeros((n, 4, 4), dtype=complex)
    w = (ox - 1j * oy) / SQRT2
    h[:, 0, 0] = de
    h[:, 3, 3] = -de
    h[:, 0, 1] = h[:, 1, 3] = w
    h[:, 1, 0] = h[:, 3, 1] = np.conj(w)
    return h


def _triplet(ox, oy, d1, d2, d3):
    n = ox.shape[0]
    h = np.zeros((n, 3, 3), dtype=complex)
    w = (ox - 1j * oy) / SQRT2
    h[:, 0, 0], h[:, 1, 1], h[:, 2, 2] = d1, d2, d3
    h[:, 0, 1] = h[:, 1, 2] = w
    h[:, 1, 0] = h[:, 2, 1] = np.conj(w)
    return h


def _qubit(ox, oy, de, kappa):
    n = ox.shape[0]
    h = np.zeros((n, 2, 2), dtype=complex)
    w = kappa * (ox - 1j * oy) / 2
    h[:, 0, 0] = de / 2
    h[:, 1, 1] = -de / 2
    h[:, 0, 1] = w
    h[:, 1, 0] = np.conj(w)
    return h


def hamiltonian_samples(model: SpinSystemModel, pulse, t) -> np.ndarray:
    """Working-representation Hamiltonian at every time in ``t``, shape ``(N, d, d)``.

    ``t`` is not range-checked here (the integrator clamps stage times itself);
    use :func:`build_hamiltonian` for checked single-time evaluation.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    ox, oy, de = (np.asarray(a, dtype=float) for a in pulse.fields(t, check=False))
    kind, dim, J = model.kind, model.dim, model.J

    if kind is Kind.HEISENBERG_ISO and dim == 3:
        return _triplet(ox, oy, de, 0.0, -de)
    if kind in (Kind.HEISENBERG_ISO, Kind.HEISENBERG_DM) and dim == 4:
        h = _zeeman_coupled(ox, oy, de)
        h[:, 2, 2] = -J
        if kind is Kind.HEISENBERG_DM:
            h[:, 1, 2] = -0.5j * model.D
            h[:, 2, 1] = 0.5j * model.D
        return h
    if kind is Kind.HEISENBERG_ANISO:
        h = _zeeman_coupled(ox, oy, de) + _aniso_coupled_static(model)
        return h if dim == 4 else h[:, [0, 1, 3]][:, :, [0, 1, 3]]
    if kind in (Kind.ISING_TRANSVERSE, Kind.ISING_DM, Kind.TRIANGLE_ISING3) and dim == 2:
        return _qubit(ox, oy, de - model.dm_shift, model.kappa)
    if kind in (Kind.ISING_TRANSVERSE, Kind.ISING_DM) and dim == 3:
        level1 = de - J / 2
        return _triplet(ox, oy, level1, -J / 2 + model.dm_shift, -level1)
    if kind in (Kind.ISING_TRANSVERSE, Kind.ISING_DM) and dim == 4:
        # lab frame: B_x - i B_y = (ox - i oy) e^{-i w t}, B_z = delta + w - J/2
        phase = np.exp(-1j * model.omega * t)
        rot = (ox - 1j * oy) * phase
        bz = de + model.omega - J / 2
        h = _zeeman_coupled(rot.real, -rot.imag, bz)
        h[:, 1, 1] = h[:, 2, 2] = -J / 2
        if kind is Kind.ISING_DM:
            h[:, 1, 2] = -0.5j * model.D
            h[:, 2, 1] = 0.5j * model.D
        return h
    raise ConfigurationError(f"no Hamiltonian for {kind.value} in dimension {dim}")


def build_hamiltonian(model: SpinSystemModel, t: float, pulse) -> OperatorMatrix:
    """Working-representation Hamiltonian at a single time ``t``.

    Raises
    ------
    DomainError
        If ``t`` lies outside ``[0, pulse.T]``.
    """
    pulse.fields(np.asarray([t], dtype=float))  # range check
    return OperatorMatrix(hamiltonian_samples(model, pulse, [t])[0], model.basis)


# -- named states --------------------------------------------------------------


def basis_state(model: SpinSystemModel, label: str | int) -> np.ndarray:
    """Unit vector of the working representation selected by label or index."""
    labels = model.state_labels()
    if isinstance(label, str):
        if label not in labels:
            raise ConfigurationError(f"state {label!r} not in {labels}")
        index = labels.index(label)
    else:
        index = int(label)
        if not 0 <= index < model.dim:
            raise ConfigurationError(f"state index {index} out of range")
    psi = np.zeros(model.dim, dtype=complex)
    psi[index] = 1.0
    return psi


def three_spin_product_state(bits: str) -> np.ndarray:
    """Product state of three spins from a string of ``u``/``d``."""
    up, down = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    psi = np.array([1.0])
    for b in bits:
        psi = np.kron(psi, up if b == "u" else down)
    return psi.astype(complex)


def w_state() -> np.ndarray:
    """``(|uud> + |udu> + |duu>)/sqrt(3)`` in the 8-dim product basis."""
    return sum(three_spin_product_state(b) for b in ("uud", "udu", "duu")) / SQRT3


def triangle_basis() -> np.ndarray:
    """8x2 isometry embedding the triangle two-level basis into the product space."""
    return np.column_stack([three_spin_product_state("uuu"), w_state()])


def three_spin_zeeman(Bx: float, By: float, Bz: float) -> np.ndarray:
    """``B . (S1 + S2 + S3)`` on three spins, product basis."""
    eye = np.eye(2)
    total = np.zeros((8, 8), dtype=complex)
    for b, op in zip((Bx, By, Bz), _single_spin_ops()):
        for k in range(3):
            mats = [eye, eye, eye]
            mats[k] = op
            total += b * np.kron(np.kron(mats[0], mats[1]), mats[2])
    return total
