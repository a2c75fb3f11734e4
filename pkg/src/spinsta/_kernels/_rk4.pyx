# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled fixed-step RK4 propagation of ``dY/dt = -i H(t) Y``."""

import numpy as np

cdef inline void _deriv(const double complex[:, ::1] H, double complex[:, ::1] y,
                        double complex[:, ::1] out, Py_ssize_t d, Py_ssize_t k) noexcept nogil:
    cdef Py_ssize_t i, j, c
    cdef double complex acc
    for i in range(d):
        for c in range(k):
            acc = 0
            for j in range(d):
                acc = acc + H[i, j] * y[j, c]
            out[i, c] = -1j * acc


def rk4_evolve(const double complex[:, :, ::1] H, const double complex[:, ::1] Y0, double h):
    """Propagate ``Y0`` (d x k) through ``n`` steps given ``2n+1`` stage Hamiltonians.

    ``H[2s]``, ``H[2s+1]`` and ``H[2s+2]`` are the Hamiltonian at the start,
    midpoint and end of step ``s``.  Returns all ``n+1`` states, shape ``(n+1, d, k)``.
    """
    cdef Py_ssize_t nstage = H.shape[0], d = H.shape[1], k = Y0.shape[1]
    if nstage < 1 or nstage % 2 == 0 or H.shape[2] != d or Y0.shape[0] != d:
        raise ValueError("H must have shape (2n+1, d, d) and Y0 shape (d, k)")
    cdef Py_ssize_t n = (nstage - 1) // 2
    out = np.empty((n + 1, d, k), dtype=np.complex128)
    cdef double complex[:, :, ::1] Y = out
    cdef double complex[:, ::1] k1 = np.empty((d, k), dtype=np.complex128)
    cdef double complex[:, ::1] k2 = np.empty((d, k), dtype=np.complex128)
    cdef double complex[:, ::1] k3 = np.empty((d, k), dtype=np.complex128)
    cdef double complex[:, ::1] k4 = np.empty((d, k), dtype=np.complex128)
    cdef double complex[:, ::1] tmp = np.empty((d, k), dtype=np.complex128)
    cdef Py_ssize_t s, i, c
    cdef double half = 0.5 * h, sixth = h / 6.0
    Y[0, :, :] = Y0
    with nogil:
        for s in range(n):
            _deriv(H[2 * s], Y[s], k1, d, k)
            for i in range(d):
                for c in range(k):
                    tmp[i, c] = Y[s, i, c] + half * k1[i, c]
            _deriv(H[2 * s + 1], tmp, k2, d, k)
            for i in range(d):
                for c in range(k):
                    tmp[i, c] = Y[s, i, c] + half * k2[i, c]
            _deriv(H[2 * s + 1], tmp, k3, d, k)
            for i in range(d):
                for c in range(k):
                    tmp[i, c] = Y[s, i, c] + h * k3[i, c]
            _deriv(H[2 * s + 2], tmp, k4, d, k)
            for i in range(d):
                for c in range(k):
                    Y[s + 1, i, c] = Y[s, i, c] + sixth * (
                        k1[i, c] + 2.0 * k2[i, c] + 2.0 * k3[i, c] + k4[i, c])
    return out
