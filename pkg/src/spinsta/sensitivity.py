"""Perturbative error sensitivities from LR-invariant trajectories.

For a design with angles ``(theta, beta)`` and mode phase ``m(t)`` the
leading-order infidelity under a small error of strength ``eps`` is
``1 - F ~ q eps^2`` with

========  ===========================================================  ==========
kind      ``q``                                                        prefactor
========  ===========================================================  ==========
``q_S``   ``|int (-beta_dot sin th - i theta_dot) e^{im}|^2``          1/2
``q_D``   ``|int sin th e^{iJt} e^{im}|^2``                            1/8
``q_Omega`` ``|int theta_dot sin^2 th e^{im}|^2``                      1
``q_Delta`` ``|int sin th e^{im}|^2``                                  1/4
========  ===========================================================  ==========

``q_S`` (systematic Omega and Delta scaling) and ``q_D`` (DM coupling) belong
to the spin-1 problem, ``q_Omega`` (amplitude) and ``q_Delta`` (detuning
shift) to the effective two-level problem.  The ``q_Omega`` prefactor of 1
reproduces ``pi^2/4`` for a flat pulse and ``sin^2(n pi)/(4 n^2)`` for the
``n`` family.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import asdict, dataclass

import numpy as np
from scipy.integrate import quad

from .errors import ConfigurationError, QuadratureError
from .invariant import AngleTrajectory

#: ``kind -> prefactor``.
SENSITIVITIES = {"q_S": 0.5, "q_D": 0.125, "q_Omega": 1.0, "q_Delta": 0.25}
#: Default absolute tolerance of the sensitivity quadrature.
QUAD_TOL = 1e-12
#: Oscillatory q_D integrands are split into pieces of at most this fraction of 2 pi / J.
DM_PIECE_FRACTION = 1.0 / 20.0


class HigherOrderWarning(UserWarning):
    """The fitted curve is not dominated by its quadratic term."""


def _integrand(kind: str, angles: AngleTrajectory, J: float | None):
    if kind == "q_S":

        def core(t):
            return -angles.beta_dot(t) * np.sin(angles.theta(t)) - 1j * angles.theta_dot(t)

    elif kind == "q_D":
        if J is None:
            raise ConfigurationError("q_D needs the exchange coupling J")

        def core(t):
            return np.sin(angles.theta(t)) * np.exp(1j * J * t)

    elif kind == "q_Omega":

        def core(t):
            return angles.theta_dot(t) * np.sin(angles.theta(t)) ** 2

    elif kind == "q_Delta":

        def core(t):
            return np.sin(angles.theta(t)) + 0j

    else:
        raise ConfigurationError(f"unknown sensitivity kind {kind!r}")

    def f(t):
        return core(t) * np.exp(1j * angles.m(t))

    return f


def _pieces(kind: str, T: float, J: float | None) -> np.ndarray:
    if kind == "q_D" and J:
        width = (2 * np.pi / abs(J)) * DM_PIECE_FRACTION
        return np.linspace(0.0, T, max(1, int(np.ceil(T / width))) + 1)
    return np.array([0.0, T])


def amplitude(kind: str, angles: AngleTrajectory, J: float | None = None, tol: float = QUAD_TOL):
    """Complex integral inside ``|.|^2`` and its absolute error estimate.

    Raises
    ------
    QuadratureError
        If the integrand is non-finite or adaptive quadrature does not meet ``tol``.
    """
    g = _integrand(kind, angles, J)
    edges = _pieces(kind, angles.T, J)
    probe = np.linspace(0.0, angles.T, 129)
    vals = g(probe)
    if not np.all(np.isfinite(vals)):
        bad = float(probe[np.argmax(~np.isfinite(vals))])
        raise QuadratureError(f"{kind}: non-finite integrand near t={bad:.6g}", bad)
    total, error = 0j, 0.0
    per_piece = tol / (len(edges) - 1)
    for a, b in zip(edges[:-1], edges[1:]):
        val, err = quad(lambda s: complex(g(s)), a, b, complex_func=True,
                        epsabs=per_piece, epsrel=0.0, limit=200)
        total += val
        error += abs(complex(err).real) + abs(complex(err).imag)
    if not error <= max(10 * tol, 1e-13):
        raise QuadratureError(f"{kind}: quadrature error {error:.2e} above {tol:.1e}")
    return total, error


def sensitivity(kind: str, angles: AngleTrajectory, J: float | None = None,
                tol: float = QUAD_TOL) -> tuple[float, float]:
    """``(q, error_bound)`` for any of the four kinds."""
    amp, err = amplitude(kind, angles, J=J, tol=tol)
    c = SENSITIVITIES[kind]
    return c * abs(amp) ** 2, c * (2 * abs(amp) * err + err**2)


def q_systematic(angles: AngleTrajectory, tol: float = QUAD_TOL) -> float:
    """Systematic (Omega and Delta scaled together) sensitivity of the spin-1 design."""
    return sensitivity("q_S", angles, tol=tol)[0]


def q_dm(angles: AngleTrajectory, J: float, tol: float = QUAD_TOL) -> float:
    """DM-coupling sensitivity (units of time squared) at exchange ``J``."""
    return sensitivity("q_D", angles, J=J, tol=tol)[0]


def q_rabi(angles: AngleTrajectory, tol: float = QUAD_TOL) -> float:
    """Amplitude-error sensitivity of the two-level design."""
    return sensitivity("q_Omega", angles, tol=tol)[0]


def q_detuning(angles: AngleTrajectory, tol: float = QUAD_TOL) -> float:
    """Detuning-shift sensitivity (units of time squared) of the two-level design."""
    return sensitivity("q_Delta", angles, tol=tol)[0]


@dataclass(frozen=True)
class SimulationFit:
    value: float
    step: float
    residual: float


@dataclass(frozen=True)
class SensitivityReport:
    """A sensitivity value with its provenance, serialisable to JSON."""

    kind: str
    value: float
    quad_error: float
    alpha: float | None = None
    sim_fit: SimulationFit | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def report(kind: str, angles: AngleTrajectory, J: float | None = None, alpha: float | None = None,
           tol: float = QUAD_TOL, sim_fit: SimulationFit | None = None) -> SensitivityReport:
    value, err = sensitivity(kind, angles, J=J, tol=tol)
    return SensitivityReport(kind, value, err, alpha, sim_fit)


# -- baselines and fits ----------------------------------------------------------


def analytic_baseline_fidelity(kind: str, delta):
    """Closed-form fidelity of the baseline pulses under the matching error.

    ``flat_heis``: spin-1 flat pi pulse, systematic error ``delta``.
    ``composite_heis``: spin-1 ``pi/2 - pi - pi/2`` sequence, systematic error.
    ``flat_ising``: two-level flat pi pulse, amplitude error.
    ``composite_ising``: two-level composite sequence, amplitude error.
    """
    d = np.asarray(delta, dtype=float)
    x = np.pi * d / 2
    if kind == "flat_heis":
        return np.cos(x) ** 4
    if kind == "composite_heis":
        return np.cos(x) ** 8 + np.sin(2 * x) ** 2 * np.cos(x) ** 2
    if kind == "flat_ising":
        return np.cos(x) ** 2
    if kind == "composite_ising":
        return 1.0 - np.sin(x) ** 4
    raise ConfigurationError(f"unknown baseline {kind!r}")


def fit_sensitivity(deltas, fidelities, warn: bool = True) -> SimulationFit:
    """Curvature ``q`` of ``F(delta) = 1 - q delta^2 + ...`` about ``delta = 0``.

    Three points use the central second difference.  Five or more points fit
    ``c0 + c1 d + c2 d^2 + c3 d^3 + c4 d^4`` by least squares so that a quartic
    term does not leak into ``q = -c2``; a warning is issued when the quartic
    term dominates at the sampled step.
    """
    d = np.asarray(deltas, dtype=float)
    f = np.asarray(fidelities, dtype=float)
    if d.shape != f.shape or d.size < 3:
        raise ConfigurationError("need at least three (delta, fidelity) samples")
    order = np.argsort(d)
    d, f = d[order], f[order]
    h = float(np.min(np.abs(d[d != 0]))) if np.any(d != 0) else 0.0
    if d.size == 3:
        h = (d[2] - d[0]) / 2
        if not np.isclose(d[1], 0.0, atol=1e-14 * max(1.0, h)) or not np.isclose(d[2] - d[1], d[1] - d[0]):
            raise ConfigurationError("three-point fit needs symmetric samples about 0")
        return SimulationFit(float(-(f[0] - 2 * f[1] + f[2]) / (2 * h * h)), float(h), 0.0)
    degree = min(4, d.size - 1)
    V = np.vander(d, degree + 1, increasing=True)
    coef, *_ = np.linalg.lstsq(V, f, rcond=None)
    residual = float(np.sqrt(np.mean((V @ coef - f) ** 2)))
    q = float(-coef[2])
    if warn and degree >= 4 and abs(coef[4]) * h * h > abs(q) + 1e-12:
        warnings.warn(f"quartic term dominates the fit (q={q:.3e})", HigherOrderWarning, stacklevel=2)
    return SimulationFit(q, float(h), residual)
