"""The ``ControlPulse`` container: drive components as exact evaluators."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .errors import DomainError

Field = Callable[[np.ndarray], np.ndarray]

#: Uniform export grid size.
DEFAULT_SAMPLES = 2001


def constant(value: float) -> Field:
    """Vectorised constant field."""

    def f(t):
        return np.full(np.shape(t), float(value))

    return f


def _zero(t):
    return np.zeros(np.shape(t))


@dataclass(frozen=True)
class ControlPulse:
    """A drive over ``[0, T]``.

    ``omega`` and ``delta`` are the transverse (x) amplitude and the longitudinal
    component/detuning; ``omega_y`` is only used by composite sequences.  All
    evaluators must accept numpy arrays.  ``breakpoints`` lists interior times
    where the fields jump; the integrator never steps across them.
    """

    omega: Field
    delta: Field
    T: float
    omega_y: Field | None = None
    breakpoints: tuple[float, ...] = ()
    label: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    def fields(self, t, check: bool = True):
        """Return ``(omega_x, omega_y, delta)`` evaluated at ``t``."""
        t = np.asarray(t, dtype=float)
        if check:
            tol = 1e-9 * max(self.T, 1.0)
            if np.any(t < -tol) or np.any(t > self.T + tol):
                raise DomainError(f"t outside pulse support [0, {self.T}]")
        ox = np.broadcast_to(np.asarray(self.omega(t), dtype=float), t.shape)
        oy = _zero(t) if self.omega_y is None else self.omega_y(t)
        oy = np.broadcast_to(np.asarray(oy, dtype=float), t.shape)
        de = np.broadcast_to(np.asarray(self.delta(t), dtype=float), t.shape)
        return ox, oy, de

    def samples(self, n: int = DEFAULT_SAMPLES):
        """Uniform grid export: ``(t, omega, delta)``."""
        t = np.linspace(0.0, self.T, n)
        ox, _, de = self.fields(t)
        return t, np.array(ox), np.array(de)

    def peak_omega(self, n: int = DEFAULT_SAMPLES) -> float:
        t = np.linspace(0.0, self.T, n)
        ox, oy, _ = self.fields(t)
        return float(np.max(np.hypot(ox, oy)))

    def perturbed(
        self,
        amplitude: float = 0.0,
        detuning_scale: float = 0.0,
        detuning_shift: float = 0.0,
    ) -> "ControlPulse":
        """Return the pulse with Ω→Ω(1+amplitude), Δ→Δ(1+detuning_scale)−detuning_shift."""
        if amplitude == 0.0 and detuning_scale == 0.0 and detuning_shift == 0.0:
            return self
        ox, oy, de = self.omega, self.omega_y, self.delta
        sa, sd = 1.0 + amplitude, 1.0 + detuning_scale

        def omega(t):
            return sa * np.asarray(ox(t), dtype=float)

        def delta(t):
            return sd * np.asarray(de(t), dtype=float) - detuning_shift

        omega_y = None
        if oy is not None:

            def omega_y(t):
                return sa * np.asarray(oy(t), dtype=float)

        return replace(self, omega=omega, omega_y=omega_y, delta=delta)
