"""Compare the numba and pure-numpy integrator kernels.

    python3 benchmarks/bench_kernels.py [--jmax 32] [--steps 2000]

Setting GBBM_KAM_NUMBA=0 only changes the default backend; this script runs
both explicitly and checks that they agree.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from gbbm_kam import _kernels
from gbbm_kam.dynamics import initial_torus_state
from gbbm_kam.spectral_core import dealiased_grid_size


def timed(backend, z0, dt, steps, M, method, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = _kernels.run(z0, dt, steps, steps, M, method, True, 1e-13, 50, backend)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--jmax", type=int, default=32)
    p.add_argument("--steps", type=int, default=2000)
    p.add_argument("--dt", type=float, default=0.05)
    p.add_argument("--repeats", type=int, default=3)
    args = p.parse_args(argv)

    M = dealiased_grid_size(args.jmax)
    z0 = initial_torus_state((0.05, 0.05), (0.0, 0.0), 5, 13, args.jmax).positive
    print(f"jmax={args.jmax} M={M} steps={args.steps} dt={args.dt}")
    for name, method in _kernels.INTEGRATORS.items():
        t_np, out_np = timed("numpy", z0, args.dt, args.steps, M, method, args.repeats)
        line = f"{name:18s} numpy {t_np * 1e3 / args.steps:8.3f} ms/step"
        if _kernels.HAVE_NUMBA:
            _kernels.run(z0, args.dt, 2, 2, M, method, True, 1e-13, 50, "numba")  # compile
            t_nb, out_nb = timed("numba", z0, args.dt, args.steps, M, method, args.repeats)
            diff = float(np.max(np.abs(out_np[0] - out_nb[0])))
            line += f"  numba {t_nb * 1e3 / args.steps:8.3f} ms/step  speedup {t_np / t_nb:5.1f}x  max|diff| {diff:.1e}"
        print(line)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
