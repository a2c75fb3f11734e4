"""Fixed-step RK4 propagation of the working-representation Schroedinger equation."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ._kernels import rk4_evolve as _default_kernel
from ._kernels import compiled_rk4_evolve, python_rk4_evolve
from .errors import BasisMismatch, ConfigurationError, StepSizeError
from .pulse import ControlPulse
from .spinmodel import PAULI_X, PAULI_Y, PAULI_Z, SpinSystemModel, basis_state, hamiltonian_samples, spin1_generators

#: Default number of RK4 steps per unit of time.
STEPS_PER_UNIT = 10_000
#: Maximum allowed deviation of the state norm from 1.
NORM_TOL = 1e-9
#: Steps handed to the kernel per call (bounds the stage-Hamiltonian buffer).
CHUNK = 4096
PERTURBATIONS = ("systematic", "amplitude", "detuning", "dm")


@dataclass(frozen=True)
class QuantumState:
    """Amplitudes tagged with the basis they refer to."""

    amplitudes: np.ndarray
    basis: str

    def __post_init__(self):
        amp = np.array(self.amplitudes, dtype=complex)
        if amp.ndim != 1:
            raise BasisMismatch("state amplitudes must be a vector")
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def fidelity(psi, target) -> float:
    """``|<target|psi>|^2``.

    Raises
    ------
    BasisMismatch
        If dimensions differ or both operands carry different basis tags.
    """
    if isinstance(psi, QuantumState) and isinstance(target, QuantumState) and psi.basis != target.basis:
        raise BasisMismatch(f"state bases differ: {psi.basis} vs {target.basis}")
    a = psi.amplitudes if isinstance(psi, QuantumState) else np.asarray(psi, dtype=complex)
    b = target.amplitudes if isinstance(target, QuantumState) else np.asarray(target, dtype=complex)
    if a.shape != b.shape:
        raise BasisMismatch(f"state shapes differ: {a.shape} vs {b.shape}")
    return float(abs(np.vdot(b, a)) ** 2)


@dataclass
class SimulationResult:
    """Trajectory of one integration.  ``states`` has shape ``(N, d)``."""

    times: np.ndarray
    states: np.ndarray
    labels: tuple[str, ...]
    target: np.ndarray | None = None
    pulse: ControlPulse | None = field(default=None, repr=False)

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.states) ** 2

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    @property
    def fidelities(self) -> np.ndarray | None:
        if self.target is None:
            return None
        return np.abs(self.states @ np.conj(self.target)) ** 2

    @property
    def final_fidelity(self) -> float | None:
        return None if self.target is None else fidelity(self.final_state, self.target)

    def rows(self):
        """``(t, omega, delta, p1..pd, fidelity)`` rows in time order."""
        if self.pulse is not None:
            ox, _, de = self.pulse.fields(self.times, check=False)
        else:
            ox = de = np.full(self.times.shape, np.nan)
        fid = self.fidelities
        pops = self.populations
        for i, t in enumerate(self.times):
            yield [float(t), float(ox[i]), float(de[i]), *map(float, pops[i]),
                   float("nan") if fid is None else float(fid[i])]

    def header(self) -> list[str]:
        return ["t", "omega", "delta"] + [f"p{i + 1}" for i in range(self.states.shape[1])] + ["fidelity"]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.header())
            for row in self.rows():
                writer.writerow([repr(v) for v in row])


def _kernel(backend: str | None):
    if backend is None:
        return _default_kernel
    if backend == "python":
        return python_rk4_evolve
    if backend == "cython":
        if compiled_rk4_evolve is None:
            raise ConfigurationError("compiled kernel is not available")
        return compiled_rk4_evolve
    raise ConfigurationError(f"unknown backend {backend!r}")


def _evolve(model, pulse, Y0, steps_per_unit, keep, backend, norm_tol):
    """Propagate the columns of ``Y0``; return kept times and states ``(N, d, k)``."""
    if not steps_per_unit > 0:
        raise ConfigurationError("steps_per_unit must be positive")
    kernel = _kernel(backend)
    T = pulse.T
    edges = [0.0, *sorted(b for b in pulse.breakpoints if 0.0 < b < T), T]
    eps = 1e-12 * max(T, 1.0)
    times, states = [0.0], [np.array(Y0, dtype=complex)]
    y = states[0]
    for a, b in zip(edges[:-1], edges[1:]):
        n = max(16, math.ceil((b - a) * steps_per_unit))
        h = (b - a) / n
        done = 0
        while done < n:
            m = min(CHUNK, n - done)
            stage = a + (done + 0.5 * np.arange(2 * m + 1)) * h
            stage[0] = a + done * h
            stage = np.clip(stage, a + eps, b - eps)
            H = np.ascontiguousarray(hamiltonian_samples(model, pulse, stage))
            out = kernel(H, np.ascontiguousarray(y), h)
            idx = np.arange(1, m + 1)
            if keep > 0:
                sel = idx[(done + idx) % keep == 0]
                times.extend((a + (done + sel) * h).tolist())
                states.extend(out[sel])
            y = out[-1]
            done += m
        if keep == 0 or times[-1] != b:
            times.append(b)
            states.append(y)
    drift = float(np.max(np.abs(np.linalg.norm(y, axis=0) - np.linalg.norm(Y0, axis=0))))
    if drift > norm_tol:
        raise StepSizeError(drift, norm_tol)
    if keep == 0:
        times, states = [0.0, T], [states[0], y]
    times = np.asarray(times)
    # breakpoints may duplicate a kept time; keep first occurrence
    _, first = np.unique(times, return_index=True)
    return times[first], np.asarray(states)[first]


def integrate(
    model: SpinSystemModel,
    pulse: ControlPulse,
    psi0,
    target=None,
    steps_per_unit: float = STEPS_PER_UNIT,
    store_every: int = 1,
    backend: str | None = None,
    norm_tol: float = NORM_TOL,
) -> SimulationResult:
    """Integrate ``i d psi/dt = H(t) psi`` over ``[0, pulse.T]``.

    Parameters
    ----------
    psi0, target
        Vectors or state labels of ``model``'s working representation.
    steps_per_unit
        RK4 steps per unit time; each smooth segment between breakpoints
        gets its own uniform grid so no step straddles a field jump.
    store_every
        Keep every ``store_every``-th step (segment ends are always kept).
    backend
        ``None`` (auto), ``"cython"`` or ``"python"``.

    Raises
    ------
    StepSizeError
        If the final norm drifts by more than ``norm_tol``.
    """
    psi0 = _resolve(model, psi0)
    tgt = None if target is None else _resolve(model, target)
    times, Y = _evolve(model, pulse, psi0[:, None], steps_per_unit, max(1, int(store_every)), backend, norm_tol)
    return SimulationResult(times, Y[:, :, 0], model.state_labels(), tgt, pulse)


def final_fidelity(model, pulse, psi0, target, steps_per_unit=STEPS_PER_UNIT, backend=None) -> float:
    """Fidelity of the final state only (no trajectory stored)."""
    psi0, tgt = _resolve(model, psi0), _resolve(model, target)
    _, Y = _evolve(model, pulse, psi0[:, None], steps_per_unit, 0, backend, NORM_TOL)
    return fidelity(Y[-1, :, 0], tgt)


def propagator(model, pulse, steps_per_unit=STEPS_PER_UNIT, backend=None) -> np.ndarray:
    """Time-evolution operator ``U(T, 0)``."""
    eye = np.eye(model.dim, dtype=complex)
    _, Y = _evolve(model, pulse, eye, steps_per_unit, 0, backend, 1e-8)
    return Y[-1]


def _resolve(model, state) -> np.ndarray:
    if isinstance(state, (str, int, np.integer)):
        return basis_state(model, state)
    if isinstance(state, QuantumState):
        if state.basis != model.basis:
            raise BasisMismatch(f"state basis {state.basis} vs model basis {model.basis}")
        state = state.amplitudes
    psi = np.asarray(state, dtype=complex)
    if psi.shape != (model.dim,):
        raise BasisMismatch(f"state has shape {psi.shape}, model dimension is {model.dim}")
    return psi


# -- closed-form rotations -----------------------------------------------------


def rotation_propagator_spin1(axis: str, angle: float) -> np.ndarray:
    """``exp(-i angle J_n) = 1 - i sin(angle) J_n + (cos(angle) - 1) J_n^2`` for spin 1."""
    jx, jy, jz = (np.asarray(g) for g in spin1_generators())
    Jn = {"x": jx, "y": jy, "z": jz}[axis]
    return np.eye(3) - 1j * np.sin(angle) * Jn + (np.cos(angle) - 1.0) * (Jn @ Jn)


def rotation_propagator_qubit(axis: str, angle: float) -> np.ndarray:
    """``exp(-i angle sigma_n / 2)``."""
    s = {"x": PAULI_X, "y": PAULI_Y, "z": PAULI_Z}[axis]
    return np.cos(angle / 2) * np.eye(2) - 1j * np.sin(angle / 2) * s


# -- perturbations and sweeps -----------------------------------------------


def apply_perturbation(model: SpinSystemModel, pulse: ControlPulse, kind: str, value: float):
    """Return ``(model, pulse)`` with the error of ``kind`` and strength ``value`` applied.

    ``systematic`` scales Omega and Delta by ``1 + value``; ``amplitude`` scales
    Omega only; ``detuning`` shifts Delta by ``-value``; ``dm`` sets the DM
    coupling ``D = value``.
    """
    if kind == "systematic":
        return model, pulse.perturbed(amplitude=value, detuning_scale=value)
    if kind == "amplitude":
        return model, pulse.perturbed(amplitude=value)
    if kind == "detuning":
        return model, pulse.perturbed(detuning_shift=value)
    if kind == "dm":
        return model.with_(D=value), pulse
    raise ConfigurationError(f"unknown perturbation {kind!r}; expected one of {PERTURBATIONS}")


def sweep(evaluate: Callable[[float], float], grid: Sequence[float], workers: int | None = None) -> np.ndarray:
    """Evaluate ``evaluate`` on ``grid``; returns ``(N, 2)`` rows ``(value, result)`` in grid order."""
    grid = np.asarray(grid, dtype=float)
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(evaluate, grid))
    else:
        results = [evaluate(v) for v in grid]
    return np.column_stack([grid, np.asarray(results, dtype=float)])


def fidelity_curve(model, pulse, psi0, target, kind, grid, steps_per_unit=STEPS_PER_UNIT,
                   workers=None, backend=None) -> np.ndarray:
    """Final fidelity versus error strength for one perturbation kind."""

    def one(v):
        m, p = apply_perturbation(model, pulse, kind, float(v))
        return final_fidelity(m, p, psi0, target, steps_per_unit, backend)

    return sweep(one, grid, workers)
