"""Compare the compiled and pure-Python RK4 kernels.

Usage::

    python3 benchmarks/bench_integrator.py [--steps N] [--repeat R]

Prints wall times for the raw kernel on precomputed stage Hamiltonians and
for a full designed-pulse simulation, plus the maximum state difference
between the two backends.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from spinsta import dynamics, scenarios
from spinsta._kernels import compiled_rk4_evolve, python_rk4_evolve


def _best(fn, repeat: int) -> tuple[float, object]:
    best, out = np.inf, None
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - start)
    return best, out


def bench_kernel(n: int, dim: int, repeat: int) -> None:
    rng = np.random.default_rng(0)
    a = rng.normal(size=(2 * n + 1, dim, dim)) + 1j * rng.normal(size=(2 * n + 1, dim, dim))
    H = np.ascontiguousarray(0.5 * (a + np.conj(np.swapaxes(a, 1, 2))))
    Y0 = np.ascontiguousarray(np.eye(dim, dtype=complex)[:, :1])
    h = 1.0 / n
    t_py, y_py = _best(lambda: python_rk4_evolve(H, Y0, h), repeat)
    line = f"kernel  dim={dim} steps={n:6d}  python {t_py * 1e3:8.2f} ms"
    if compiled_rk4_evolve is not None:
        t_cy, y_cy = _best(lambda: compiled_rk4_evolve(H, Y0, h), repeat)
        diff = float(np.max(np.abs(y_cy - y_py)))
        line += f"  cython {t_cy * 1e3:8.2f} ms  speedup {t_py / t_cy:6.1f}x  max|diff| {diff:.1e}"
    print(line)


def bench_scenario(name: str, steps: float, repeat: int) -> None:
    s = scenarios.get(name)
    pulse = s.pulse()
    line = f"run     {name:18s}"
    results = {}
    for backend in ("python", "cython"):
        if backend == "cython" and compiled_rk4_evolve is None:
            continue
        t, res = _best(lambda: dynamics.integrate(s.model, pulse, s.initial, s.target,
                                                  steps_per_unit=steps, backend=backend), repeat)
        results[backend] = res
        line += f"  {backend} {t * 1e3:8.2f} ms"
    if len(results) == 2:
        diff = float(np.max(np.abs(results["python"].states - results["cython"].states)))
        line += f"  max|diff| {diff:.1e}"
    print(line)


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--steps", type=int, default=10000, help="RK4 steps (default: %(default)s)")
    parser.add_argument("--repeat", type=int, default=5, help="repetitions, best time kept")
    args = parser.parse_args(argv)
    if compiled_rk4_evolve is None:
        print("compiled kernel unavailable; timing the pure-Python fallback only")
    for dim in (2, 3, 4):
        bench_kernel(args.steps, dim, args.repeat)
    for name in ("heis-flip-optimal", "heis-flip-dm", "ising-bell-amp"):
        bench_scenario(name, args.steps, args.repeat)


if __name__ == "__main__":
    main()
