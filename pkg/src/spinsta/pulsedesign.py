"""Ansatz library, alpha search and baseline pulse constructors.

A design fixes ``theta(t)`` with the flip boundary conditions and a phase
family ``m(theta)``.  Requiring the LR mode phase to equal ``m`` closes the
azimuth: ``cot(beta) = -m'(theta) sin(theta)``, which for ``m = 2 th + 2 a sin 2th``
gives ``beta = -arccot[2 (1 + 2 a cos 2th) sin th]`` and for
``m = n (2 th - sin 2th)`` gives ``beta = -arccot(4 n sin^3 th)``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from typing import Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import AlphaSearchError, ConfigurationError
from .invariant import AngleTrajectory, fields_from_angles
from .pulse import ControlPulse, constant
from .spinmodel import SpinSystemModel

THETA_FAMILIES = ("cubic", "sine", "linear")
M_FAMILIES = ("alpha", "n", "zero")


@dataclass(frozen=True)
class AnsatzSpec:
    """Inverse-engineering recipe.

    ``theta_family``: ``cubic`` (3 pi s^2 - 2 pi s^3), ``sine`` or ``linear``
    (flat pulse).  ``m_family``: ``alpha`` (2 th + 2 alpha sin 2th), ``n``
    (n (2 th - sin 2th)) or ``zero``.  ``kappa`` is the drive coupling factor
    (1 spin-1, sqrt 2 Ising pair, sqrt 3 triangle).
    """

    theta_family: str = "cubic"
    m_family: str = "alpha"
    alpha: float = 0.0
    n: float = 1.0
    T: float = 1.0
    kappa: float = 1.0

    def __post_init__(self):
        if self.theta_family not in THETA_FAMILIES:
            raise ConfigurationError(f"theta_family must be one of {THETA_FAMILIES}")
        if self.m_family not in M_FAMILIES:
            raise ConfigurationError(f"m_family must be one of {M_FAMILIES}")
        if not self.T > 0:
            raise ConfigurationError("T must be positive")
        if self.m_family == "n" and not self.n > 0:
            raise ConfigurationError("n must be positive")
        if not self.kappa > 0:
            raise ConfigurationError("kappa must be positive")

    def with_(self, **changes) -> "AnsatzSpec":
        data = asdict(self)
        data.update(changes)
        return AnsatzSpec(**data)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "AnsatzSpec":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown ansatz keys: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class PulseSegment:
    axis: str
    angle: float
    duration: float


@dataclass(frozen=True)
class AlphaResult:
    """Outcome of :func:`find_alpha`.  ``status`` is ``"root"`` or ``"minimum"``."""

    alpha: float
    value: float
    status: str
    kind: str
    profile: tuple[tuple[float, float], ...] = ()


def theta_profile(spec: AnsatzSpec, t):
    """``(theta, theta_dot)`` of the chosen family at ``t``."""
    t = np.asarray(t, dtype=float)
    T = spec.T
    if spec.theta_family == "cubic":
        s = t / T
        return np.pi * (3 * s**2 - 2 * s**3), 6 * np.pi * s * (1 - s) / T
    if spec.theta_family == "sine":
        arg = np.pi * (2 * t - T) / (2 * T)
        return 0.5 * np.pi * (1 + np.sin(arg)), 0.5 * np.pi**2 / T * np.cos(arg)
    return np.pi * t / T, np.full(t.shape, np.pi / T)


def m_family(spec: AnsatzSpec, theta):
    """``(m, dm/dtheta, d2m/dtheta2)`` of the phase family at ``theta``."""
    th = np.asarray(theta, dtype=float)
    if spec.m_family == "alpha":
        a = spec.alpha
        return 2 * th + 2 * a * np.sin(2 * th), 2 + 4 * a * np.cos(2 * th), -8 * a * np.sin(2 * th)
    if spec.m_family == "n":
        n = spec.n
        return n * (2 * th - np.sin(2 * th)), 4 * n * np.sin(th) ** 2, 4 * n * np.sin(2 * th)
    zero = np.zeros_like(th)
    return zero, zero, zero


def beta_closure(spec: AnsatzSpec, theta, theta_dot=0.0):
    """``(beta, beta_dot)`` closing the ansatz; ``beta = -arccot(m'(theta) sin theta)``.

    ``arccot`` takes values in ``(0, pi)`` so ``sin(beta) < 0`` and ``Omega >= 0``.
    """
    th = np.asarray(theta, dtype=float)
    _, dm, d2m = m_family(spec, th)
    x = dm * np.sin(th)
    dx = d2m * np.sin(th) + dm * np.cos(th)
    beta = -np.arctan2(1.0, x)
    return beta, dx * theta_dot / (1.0 + x * x)


def beta_closure_formula(spec: AnsatzSpec) -> str:
    """Human-readable closure used by ``spec`` (recorded in design files)."""
    if spec.m_family == "alpha":
        return f"beta = -arccot[2 (1 + 2 alpha cos 2theta) sin theta], alpha = {spec.alpha!r}"
    if spec.m_family == "n":
        return f"beta = -arccot(4 n sin^3 theta), n = {spec.n!r}"
    return "beta = -pi/2"


def design_angles(spec: AnsatzSpec) -> AngleTrajectory:
    """Closed-form angle trajectory of an ansatz (exact derivatives, exact mode phase)."""

    def theta(t):
        return theta_profile(spec, t)[0]

    def theta_dot(t):
        return theta_profile(spec, t)[1]

    def beta(t):
        return beta_closure(spec, theta(t))[0]

    def beta_dot(t):
        th, thd = theta_profile(spec, t)
        return beta_closure(spec, th, thd)[1]

    def ratio(t):
        return -m_family(spec, theta(t))[1]

    def mode_phase(t):
        return m_family(spec, theta(t))[0]

    label = f"{spec.theta_family}/{spec.m_family}"
    if spec.m_family == "alpha":
        label += f"(alpha={spec.alpha:g})"
    elif spec.m_family == "n":
        label += f"(n={spec.n:g})"
    return AngleTrajectory(theta, theta_dot, beta, beta_dot, spec.T,
                           cot_beta_over_sin=ratio, mode_phase=mode_phase, label=label)


def synthesize(spec: AnsatzSpec, model: SpinSystemModel | None = None) -> ControlPulse:
    """Design the drive for ``spec`` (optionally checking it fits ``model``'s coupling)."""
    if model is not None and not np.isclose(model.kappa, spec.kappa):
        raise ConfigurationError(
            f"ansatz kappa {spec.kappa:g} does not match model coupling {model.kappa:g}"
        )
    pulse = fields_from_angles(design_angles(spec), spec.kappa)
    pulse.meta.update(spec=spec.to_dict())
    return pulse


# -- alpha search ---------------------------------------------------------------


def find_alpha(
    spec: AnsatzSpec,
    sensitivity: str,
    J: float | None = None,
    bracket: tuple[float, float] = (-0.5, 0.5),
    step: float = 0.01,
    tol: float = 1e-12,
) -> AlphaResult:
    """Find the ``alpha`` of the ``alpha`` phase family that nullifies a sensitivity.

    The bracket is scanned on a uniform grid.  For the symmetric ansaetze the
    complex amplitude inside ``|.|^2`` lies on a fixed line through the origin,
    so its signed projection changes sign at each zero; the zero of smallest
    ``|alpha|`` is refined with Brent's method.  Without a sign change the
    scan minimiser is refined by bounded golden-section search and flagged
    ``status="minimum"``.

    Raises
    ------
    AlphaSearchError
        If there is neither a sign change nor an interior minimum.
    """
    from .sensitivity import amplitude, SENSITIVITIES

    if sensitivity not in SENSITIVITIES:
        raise ConfigurationError(f"unknown sensitivity {sensitivity!r}")
    prefactor = SENSITIVITIES[sensitivity]
    base = spec.with_(m_family="alpha")

    def amp(a):
        return amplitude(sensitivity, design_angles(base.with_(alpha=float(a))), J=J, tol=tol)[0]

    lo, hi = bracket
    count = int(round((hi - lo) / step)) + 1
    grid = lo + step * np.arange(count)
    amps = np.array([amp(a) for a in grid])
    q = prefactor * np.abs(amps) ** 2
    profile = tuple(zip(grid.tolist(), q.tolist()))

    ref = amps[np.argmax(np.abs(amps))]
    axis = ref / abs(ref) if abs(ref) > 0 else 1.0
    proj = amps / axis
    collinear = np.max(np.abs(proj.imag)) <= 1e-6 * np.max(np.abs(amps))
    if collinear:
        s = proj.real
        changes = [i for i in range(count - 1) if s[i] == 0 or s[i] * s[i + 1] < 0]
        if changes:
            i = min(changes, key=lambda k: abs(grid[k] + grid[k + 1]))
            if s[i] == 0:
                root = float(grid[i])
            else:
                root = brentq(lambda a: (amp(a) / axis).real, grid[i], grid[i + 1],
                              xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=200)
            value = prefactor * abs(amp(root)) ** 2
            return AlphaResult(root, value, "root", sensitivity, profile)

    k = int(np.argmin(q))
    if k in (0, count - 1):
        raise AlphaSearchError(
            f"{sensitivity}: no zero and no interior minimum in [{lo}, {hi}]", profile
        )
    res = minimize_scalar(lambda a: prefactor * abs(amp(a)) ** 2, bounds=(grid[k - 1], grid[k + 1]),
                          method="bounded", options={"xatol": 1e-12})
    return AlphaResult(float(res.x), float(res.fun), "minimum", sensitivity, profile)


# -- baselines ---------------------------------------------------------------------


def flat_spec(T: float = 1.0, kappa: float = 1.0) -> AnsatzSpec:
    return AnsatzSpec("linear", "zero", T=T, kappa=kappa)


def flat_pulse(T: float = 1.0, kappa: float = 1.0) -> ControlPulse:
    """Resonant flat pi pulse: ``kappa * Omega * T = pi``, ``Delta = 0``."""
    return ControlPulse(constant(np.pi / (kappa * T)), constant(0.0), T, label="flat-pi",
                        meta={"kappa": kappa})


def composite_sequence(T_total: float, representation: str = "spin1") -> list[PulseSegment]:
    """``pi/2 (x) - pi (y) - pi/2 (x)`` with durations proportional to the angles."""
    if representation not in ("spin1", "two-level"):
        raise ConfigurationError("representation must be 'spin1' or 'two-level'")
    if not T_total > 0:
        raise ConfigurationError("T_total must be positive")
    angles = (np.pi / 2, np.pi, np.pi / 2)
    total = sum(angles)
    return [PulseSegment(ax, a, T_total * a / total) for ax, a in zip("xyx", angles)]


def composite_pulse(segments: Sequence[PulseSegment], kappa: float = 1.0) -> ControlPulse:
    """Piecewise-constant drive realising ``segments``; rotation angle = kappa*Omega*duration."""
    edges = np.cumsum([0.0] + [s.duration for s in segments])
    T = float(edges[-1])
    ax = [s.angle / (kappa * s.duration) if s.axis == "x" else 0.0 for s in segments]
    ay = [s.angle / (kappa * s.duration) if s.axis == "y" else 0.0 for s in segments]

    def piecewise(values):
        def f(t):
            t = np.asarray(t, dtype=float)
            idx = np.clip(np.searchsorted(edges, t, side="right") - 1, 0, len(values) - 1)
            return np.asarray(values)[idx]

        return f

    return ControlPulse(piecewise(ax), constant(0.0), T, omega_y=piecewise(ay),
                        breakpoints=tuple(float(e) for e in edges[1:-1]),
                        label="composite", meta={"kappa": kappa})


def landau_zener(Omega0: float, a: float, T: float) -> ControlPulse:
    """Constant Rabi frequency with linear chirp ``Delta = a (t - T/2)``."""
    if not Omega0 > 0:
        raise ConfigurationError("Omega0 must be positive")

    def delta(t):
        return a * (np.asarray(t, dtype=float) - T / 2)

    return ControlPulse(constant(Omega0), delta, T, label=f"landau-zener(T={T:g})")
