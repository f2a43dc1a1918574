#!/usr/bin/env python3
"""Benchmark the compiled kernels against the numpy fallback.

Times the raw kernel primitives on propagation-sized arrays and one full
split-step run with the active backend.  Run after building the extension
(``pip install -e .``) and again with ``FWMKIT_KERNELS=python`` exported to
compare end-to-end numbers.
"""

import math
import time

import numpy as np

from fwmkit import _kernels
from fwmkit._kernels import pykernels
from fwmkit.core import TemporalGrid, sech_pulse, wavelength_to_omega
from fwmkit.fiber import FiberSpec
from fwmkit.propagation import PropagationConfig, propagate

N_POINTS = 2**16
REPEATS = 200


def _time(fn, *args, repeats=REPEATS):
    fn(*args)  # warm up
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn(*args)
    return (time.perf_counter() - t0) / repeats


def bench_primitives():
    rng = np.random.default_rng(0)
    base = (rng.standard_normal(N_POINTS) + 1j * rng.standard_normal(N_POINTS)).astype(
        np.complex128
    )
    other = base[::-1].copy()

    backends = [("python", pykernels)]
    try:
        from fwmkit._kernels import _ckernels

        backends.append(("compiled", _ckernels))
    except ImportError:
        print("compiled kernels not built; benchmarking the fallback only")

    rows = []
    for name, impl in backends:
        a = base.copy()
        t_kerr = _time(impl.kerr_phase, a, 1e-4)
        t_power = _time(impl.total_power, base)
        t_l2 = _time(impl.l2_diff, base, other)
        t_edge = _time(impl.edge_power, base, N_POINTS // 32)
        rows.append((name, t_kerr, t_power, t_l2, t_edge))

    print(f"\nkernel primitives, {N_POINTS} complex samples, mean of {REPEATS} calls:")
    print(f"{'backend':>10} {'kerr_phase':>12} {'total_power':>12} {'l2_diff':>12} {'edge_power':>12}")
    for name, *times in rows:
        print(f"{name:>10} " + " ".join(f"{t * 1e6:>9.1f} us" for t in times))
    if len(rows) == 2:
        speedups = [p / c for p, c in zip(rows[0][1:], rows[1][1:])]
        print(f"{'speedup':>10} " + " ".join(f"{s:>10.2f}x" for s in speedups))


def bench_propagation():
    # soliton run: representative of the Monte Carlo inner loop
    b2, gam, t0p = -1e-26, 0.01, 1e-12
    p0 = abs(b2) / (gam * t0p**2)
    length = math.pi * t0p**2 / abs(b2)
    w0 = wavelength_to_omega(1060e-9)
    fib = FiberSpec.from_taylor(w0, (0.0, 0.0, b2), length=length, gamma=gam)
    grid = TemporalGrid(n_points=N_POINTS, span=80e-12, carrier=w0)
    field = sech_pulse(grid, p0, 2 * math.asinh(1.0) * t0p)
    cfg = PropagationConfig(fiber=fib, grid=grid, error_target=1e-7)

    t0 = time.perf_counter()
    propagate(field, cfg)
    dt = time.perf_counter() - t0
    print(
        f"\nfull split-step run ({N_POINTS} points, backend={_kernels.BACKEND}): {dt:.2f} s"
    )
    print("re-run with FWMKIT_KERNELS=python to compare the fallback end to end")


if __name__ == "__main__":
    print(f"active kernel backend: {_kernels.BACKEND}")
    bench_primitives()
    bench_propagation()
