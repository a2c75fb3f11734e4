"""Pure-Python (numpy) fixed-step RK4; same contract as the compiled kernel."""

import numpy as np


def rk4_evolve(H, Y0, h):
    """Propagate ``Y0`` (d x k) through ``n`` steps given ``2n+1`` stage Hamiltonians."""
    H = np.asarray(H, dtype=np.complex128)
    Y0 = np.asarray(Y0, dtype=np.complex128)
    if H.ndim != 3 or H.shape[0] % 2 == 0 or H.shape[1:] != (Y0.shape[0],) * 2 or Y0.ndim != 2:
        raise ValueError("H must have shape (2n+1, d, d) and Y0 shape (d, k)")
    n = (H.shape[0] - 1) // 2
    A = -1j * H
    out = np.empty((n + 1,) + Y0.shape, dtype=np.complex128)
    out[0] = y = Y0
    for s in range(n):
        a0, am, a1 = A[2 * s], A[2 * s + 1], A[2 * s + 2]
        k1 = a0 @ y
        k2 = am @ (y + 0.5 * h * k1)
        k3 = am @ (y + 0.5 * h * k2)
        k4 = a1 @ (y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[s + 1] = y
    return out
