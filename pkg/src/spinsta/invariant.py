"""Lewis-Riesenfeld invariants of the spin-1 and effective two-level problems.

The invariant is parametrised by a polar angle ``theta(t)`` and an azimuth
``beta(t)``.  With ``H = kappa*Omega*S_x + Delta*S_z`` (``S`` the spin-1 or
spin-1/2 operators) the invariance condition ``dI/dt + i[H, I] = 0`` reduces to

    theta_dot = -kappa * Omega * sin(beta)
    beta_dot  = Delta - kappa * Omega * cot(theta) * cos(beta)

which :func:`fields_from_angles` inverts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad, solve_ivp

from .errors import DesignError, QuadratureError
from .pulse import ControlPulse
from .spinmodel import OperatorMatrix, SpinSystemModel, hamiltonian_samples, spin1_generators

Field = Callable[[np.ndarray], np.ndarray]

#: Relative width of the endpoint guard band used for cot(beta)/sin(theta).
GUARD = 1e-6
#: Default absolute tolerance of LR-phase quadrature.
PHASE_TOL = 1e-10


@dataclass(frozen=True)
class AngleTrajectory:
    """Invariant angles over ``[0, T]`` with exact derivative evaluators.

    ``cot_beta_over_sin`` may supply the regular closed form of
    ``cot(beta)/sin(theta)``, which is 0/0 wherever ``sin(theta) = 0``.
    ``mode_phase`` may supply ``m(t) = -int_0^t theta_dot cot(beta)/sin(theta)``
    in closed form; otherwise it is obtained by quadrature.
    """

    theta: Field
    theta_dot: Field
    beta: Field
    beta_dot: Field
    T: float
    cot_beta_over_sin: Field | None = None
    mode_phase: Field | None = None
    label: str = ""

    def ratio(self, t) -> np.ndarray:
        """``cot(beta)/sin(theta)``, regularised inside the endpoint guard band."""
        t = np.asarray(t, dtype=float)
        if self.cot_beta_over_sin is not None:
            return np.asarray(self.cot_beta_over_sin(t), dtype=float) * np.ones_like(t)
        g = GUARD * self.T
        tc = np.clip(t, g, self.T - g)
        th, b = self.theta(tc), self.beta(tc)
        return np.cos(b) / (np.sin(b) * np.sin(th))

    def phase_rate(self, t) -> np.ndarray:
        """``theta_dot * cot(beta) / sin(theta)``: the rate of the LR phase gamma_1."""
        return self.theta_dot(t) * self.ratio(t)

    def m(self, t, tol: float = PHASE_TOL) -> np.ndarray:
        """Mode phase ``m(t) = -int_0^t theta_dot cot(beta)/sin(theta) dt'``."""
        if self.mode_phase is not None:
            return np.asarray(self.mode_phase(np.asarray(t, dtype=float)), dtype=float)
        return -cumulative_phase(self, t, tol=tol)


def _check_finite(values, t, what):
    bad = ~np.isfinite(values)
    if np.any(bad):
        where = float(np.asarray(t)[np.argmax(bad)])
        raise QuadratureError(f"non-integrable singularity in {what} near t={where:.6g}", where)


def _integrate_rate(angles: AngleTrajectory, a: float, b: float, tol: float) -> float:
    if b == a:
        return 0.0
    probe = np.linspace(a, b, 65)
    _check_finite(angles.phase_rate(probe), probe, "theta_dot*cot(beta)/sin(theta)")
    val, err = quad(
        lambda s: float(angles.phase_rate(s)), a, b, epsabs=tol, epsrel=0.0, limit=400
    )
    if not err <= max(10 * tol, 1e-13):
        raise QuadratureError(f"LR phase quadrature error {err:.2e} above {tol:.1e}", b)
    return val


def cumulative_phase(angles: AngleTrajectory, t, tol: float = PHASE_TOL) -> np.ndarray:
    """``int_0^t theta_dot cot(beta)/sin(theta)`` at each (sorted or not) time in ``t``."""
    t = np.asarray(t, dtype=float)
    flat = np.atleast_1d(t).ravel()
    order = np.argsort(flat)
    out = np.empty_like(flat)
    acc, prev = 0.0, 0.0
    for i in order:
        acc += _integrate_rate(angles, prev, flat[i], tol)
        prev = flat[i]
        out[i] = acc
    return out.reshape(t.shape) if t.ndim else out[0]


def lr_phase(angles: AngleTrajectory, branch, t, dim: int = 3, tol: float = PHASE_TOL):
    """Lewis-Riesenfeld phase of an invariant eigenstate.

    Parameters
    ----------
    branch
        ``0, 1, 2`` for the spin-1 states (``gamma_0 = 0``, ``gamma_{1,2} = +-int``),
        ``'+'`` or ``'-'`` for the two-level states.
    t
        Time or array of times.
    """
    integral = cumulative_phase(angles, t, tol=tol)
    if dim == 3:
        sign = {0: 0.0, 1: 1.0, 2: -1.0}[int(branch)]
        return sign * integral
    if dim == 2:
        sign = {"+": 1.0, "-": -1.0}[str(branch)]
        t = np.asarray(t, dtype=float)
        return sign * 0.5 * (angles.beta(t) - angles.beta(np.zeros_like(t)) + integral)
    raise ValueError(f"dim must be 2 or 3, got {dim}")


def invariant_matrix(angles: AngleTrajectory, t: float, B0: float = 1.0, dim: int = 3) -> OperatorMatrix:
    """Invariant ``I(t)``: ``B0 n.J`` (spin-1) or ``(B0/2) n.sigma`` (two-level)."""
    th, b = float(angles.theta(t)), float(angles.beta(t))
    return OperatorMatrix(_invariant_from(th, b, B0, dim))


def _invariant_from(th, b, B0, dim):
    s, c = np.sin(th), np.cos(th)
    if dim == 3:
        e = s * np.exp(-1j * b) / np.sqrt(2)
        return B0 * np.array([[c, e, 0], [np.conj(e), 0, e], [0, np.conj(e), -c]])
    if dim == 2:
        e = s * np.exp(-1j * b)
        return 0.5 * B0 * np.array([[c, e], [np.conj(e), -c]])
    raise ValueError(f"dim must be 2 or 3, got {dim}")


def invariant_time_derivative(angles: AngleTrajectory, t: float, B0: float = 1.0, dim: int = 3) -> np.ndarray:
    """Exact partial time derivative of the invariant (chain rule through theta, beta)."""
    th, b = float(angles.theta(t)), float(angles.beta(t))
    thd, bd = float(angles.theta_dot(t)), float(angles.beta_dot(t))
    s, c = np.sin(th), np.cos(th)
    # d/dt [sin(theta) e^{-i beta}]
    de = (c * thd - 1j * s * bd) * np.exp(-1j * b)
    if dim == 3:
        e = de / np.sqrt(2)
        return B0 * np.array([[-s * thd, e, 0], [np.conj(e), 0, e], [0, np.conj(e), s * thd]])
    if dim == 2:
        return 0.5 * B0 * np.array([[-s * thd, de], [np.conj(de), s * thd]])
    raise ValueError(f"dim must be 2 or 3, got {dim}")


def invariant_residual(angles: AngleTrajectory, model: SpinSystemModel, pulse: ControlPulse, t) -> np.ndarray:
    """Frobenius norm of ``dI/dt + i[H, I]`` at each time in ``t``.

    Vanishes identically when ``pulse`` was designed from ``angles``.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    hs = hamiltonian_samples(model, pulse, t)
    out = np.empty(t.shape)
    for k, tk in enumerate(t):
        inv = _invariant_from(float(angles.theta(tk)), float(angles.beta(tk)), model.B0, model.dim)
        dinv = invariant_time_derivative(angles, tk, model.B0, model.dim)
        out[k] = np.linalg.norm(dinv + 1j * (hs[k] @ inv - inv @ hs[k]))
    return out


def invariant_eigenstates(angles: AngleTrajectory, t: float, dim: int = 3) -> list[np.ndarray]:
    """Eigenvectors of the invariant in the standard phase convention (phi_+ real in its second entry).

    Returns ``[phi_0, phi_1, phi_2]`` (eigenvalues ``0, +B0, -B0``) for ``dim=3``
    and ``[phi_+, phi_-]`` (eigenvalues ``+-B0/2``) for ``dim=2``.
    """
    th, b = float(angles.theta(t)), float(angles.beta(t))
    s, c = np.sin(th), np.cos(th)
    em, ep = np.exp(-1j * b), np.exp(1j * b)
    if dim == 3:
        c2, s2 = np.cos(th / 2) ** 2, np.sin(th / 2) ** 2
        phi0 = np.array([-s * em, np.sqrt(2) * c, s * ep]) / np.sqrt(2)
        phi1 = np.array([c2 * em, s / np.sqrt(2), s2 * ep])
        phi2 = np.array([s2 * em, -s / np.sqrt(2), c2 * ep])
        return [phi0, phi1, phi2]
    if dim == 2:
        ch, sh = np.cos(th / 2), np.sin(th / 2)
        return [np.array([ch * em, sh]), np.array([sh, -ch * ep])]
    raise ValueError(f"dim must be 2 or 3, got {dim}")


def fields_from_angles(angles: AngleTrajectory, kappa: float = 1.0, check_points: int = 2001) -> ControlPulse:
    """Invert the auxiliary equations: ``(theta, beta) -> (Omega, Delta)``.

    ``Omega = -theta_dot / (kappa sin(beta))`` and
    ``Delta = beta_dot - theta_dot cos(theta) cot(beta)/sin(theta)``.

    Raises
    ------
    DesignError
        If ``sin(beta)`` vanishes inside ``(0, T)`` or the fields are not finite.
    """
    T = angles.T
    probe = np.linspace(0.0, T, check_points)
    sb = np.sin(angles.beta(probe))
    interior = np.abs(sb[1:-1])
    if np.any(interior < 1e-12):
        where = probe[1:-1][np.argmin(interior)]
        raise DesignError(f"sin(beta) vanishes at t={where:.6g}; Omega is unbounded")

    def omega(t):
        return -angles.theta_dot(t) / (kappa * np.sin(angles.beta(t)))

    def delta(t):
        t = np.asarray(t, dtype=float)
        return angles.beta_dot(t) - angles.theta_dot(t) * np.cos(angles.theta(t)) * angles.ratio(t)

    for name, f in (("Omega", omega), ("Delta", delta)):
        if not np.all(np.isfinite(f(probe))):
            raise DesignError(f"{name} is not finite on [0, T]")
    return ControlPulse(omega=omega, delta=delta, T=T, label=angles.label,
                        meta={"kappa": kappa})


def angles_from_fields(
    pulse: ControlPulse,
    kappa: float = 1.0,
    theta0: float = 0.0,
    beta0: float = -np.pi / 2,
    rtol: float = 1e-12,
    atol: float = 1e-13,
) -> AngleTrajectory:
    """Integrate the auxiliary equations forward from ``(theta0, beta0)``.

    The integration runs on the unit vector ``n = (sin th cos b, sin th sin b,
    cos th)`` obeying ``dn/dt = b x n`` with ``b = (kappa Ox, kappa Oy, Delta)``,
    which stays regular at the poles where the angle equations are singular.
    """

    def rhs(t, n):
        ox, oy, de = (float(v) for v in pulse.fields(np.asarray(t), check=False))
        return np.cross((kappa * ox, kappa * oy, de), n)

    n0 = (np.sin(theta0) * np.cos(beta0), np.sin(theta0) * np.sin(beta0), np.cos(theta0))
    sol = solve_ivp(rhs, (0.0, pulse.T), n0, method="DOP853", rtol=rtol, atol=atol,
                    dense_output=True)
    if not sol.success:
        raise DesignError(f"auxiliary-equation integration failed: {sol.message}")
    dense = sol.sol

    def unit(t):
        n = dense(np.asarray(t, dtype=float))
        return n / np.linalg.norm(n, axis=0)

    def theta(t):
        nx, ny, nz = unit(t)
        return np.arctan2(np.hypot(nx, ny), nz)

    def beta(t):
        nx, ny, _ = unit(t)
        rho = np.hypot(nx, ny)
        return np.where(rho > 1e-300, np.arctan2(ny, nx), beta0)

    def _rates(t):
        t = np.asarray(t, dtype=float)
        n = unit(t)
        ox, oy, de = pulse.fields(t, check=False)
        bvec = np.array([kappa * ox, kappa * oy, de])
        nd = np.cross(bvec, n, axis=0)
        rho2 = n[0] ** 2 + n[1] ** 2
        rho = np.sqrt(rho2)
        with np.errstate(divide="ignore", invalid="ignore"):
            rhod = np.where(rho > 0, (n[0] * nd[0] + n[1] * nd[1]) / rho, 0.0)
            bd = np.where(rho2 > 0, (n[0] * nd[1] - n[1] * nd[0]) / rho2, 0.0)
        thd = n[2] * rhod - rho * nd[2]
        return thd, bd

    return AngleTrajectory(
        theta=theta,
        theta_dot=lambda t: _rates(t)[0],
        beta=beta,
        beta_dot=lambda t: _rates(t)[1],
        T=pulse.T,
        label=f"recovered:{pulse.label}",
    )
