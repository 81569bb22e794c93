"""Compare the compiled and pure-Python RK4 moment kernels.

Run with ``python3 benchmarks/bench_rk4.py``.  For each stage system the
script integrates the same write/readout/entangled problem with both kernels,
checks that they agree and reports wall-clock times.
"""
import argparse
import time

import numpy as np

from brillouin_memory import kernels
from brillouin_memory.dynamics import build_stage_system, integrate_moments
from brillouin_memory.gaussian import GaussianState
from brillouin_memory.params import SystemParams, optimal_pulse_duration


def _initial(n_modes, r=1.0):
    V = 0.5 * np.eye(2 * n_modes)
    V[0, 0], V[1, 1] = 0.5 * np.exp(-2 * r), 0.5 * np.exp(2 * r)
    return GaussianState(V)


def time_kernel(kernel, system, initial, grid, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        traj = integrate_moments(system, initial, grid, kernel=kernel)
        best = min(best, time.perf_counter() - t0)
    return best, traj


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--g-over-gamma", type=float, default=100.0)
    ap.add_argument("--points", type=int, default=201)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args(argv)

    if "cython" not in kernels.available_kernels():
        print("compiled kernel not available; build with `pip install -e . --no-build-isolation`")
        return 1
    p = SystemParams.from_ratios(args.g_over_gamma, Delta_as_over_Gamma=0.2, gamma_smf=1e5)
    grid = np.linspace(0, 2 * optimal_pulse_duration(p.g1), args.points)
    cases = [
        ("write/squeezed", build_stage_system("write", "squeezed", p)),
        ("readout/entangled", build_stage_system("readout", "entangled", p)),
        ("store/entangled (30 ns)", build_stage_system("store", "entangled", p)),
    ]
    print(f"{'case':<26}{'cython [ms]':>12}{'python [ms]':>13}{'speedup':>9}{'max diff':>11}")
    for name, system in cases:
        g = np.linspace(0, 30e-9, args.points) if name.startswith("store") else grid
        init = _initial(system.n_modes)
        tc, trc = time_kernel("cython", system, init, g, args.repeats)
        tp, trp = time_kernel("python", system, init, g, args.repeats)
        diff = np.max(np.abs(trc.covs - trp.covs))
        print(f"{name:<26}{tc * 1e3:>12.2f}{tp * 1e3:>13.2f}{tp / tc:>9.1f}{diff:>11.1e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
