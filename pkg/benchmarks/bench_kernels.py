"""Compare numba and numpy backends of the hot loops.

    python benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import time

import numpy as np

from oscchain import _kernels
from oscchain._accel import HAVE_NUMBA


def best_of(fn, repeat):
    fn()  # warm-up, includes JIT compile
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def verlet_case(R=64, N=64):
    rng = np.random.default_rng(0)
    half = np.array([3.0, -1.0])
    args = (half, True, np.zeros((R, N)), np.zeros((R, N)), 0, np.array([3.0]), rng.standard_normal((R, 1)),
            rng.standard_normal((R, 1)), 1e-2, np.array([500, 1000, 2000]))
    return (lambda: _kernels.verlet_numba(*args)), (lambda: _kernels.verlet_numpy(*args))


def transient_case(n_lambda=8192, n_nodes=128, n_t=64):
    omega = np.sqrt(3 - 2 * np.cos(np.linspace(0, 2 * np.pi, n_lambda, endpoint=False)))
    xs = np.linspace(2.5, 3.5, n_nodes)
    ws = np.full(n_nodes, 1.0 / n_nodes)
    ts = np.linspace(1, 200, n_t)
    return (lambda: _kernels.transient_energy_sum_numba(omega, xs, ws, ts)), (
        lambda: _kernels.transient_energy_sum_numpy(omega, xs, ws, ts)
    )


def trig_case(R=2000, J=64, T=512):
    rng = np.random.default_rng(1)
    freqs = rng.uniform(0, 4, J)
    A, B = rng.standard_normal((R, J)), rng.standard_normal((R, J))
    ts = np.linspace(0, 100, T)
    return (lambda: _kernels.trig_sum_numba(freqs, A, B, ts)), (lambda: _kernels.trig_sum_numpy(freqs, A, B, ts))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not HAVE_NUMBA:
        print("numba unavailable or disabled; both columns run the numpy path")
    print(f"{'kernel':<22}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}")
    for name, case in [("verlet 64x64x2000", verlet_case), ("transient energy", transient_case), ("trig sum", trig_case)]:
        fast, slow = case()
        tf, ts = best_of(fast, args.repeat), best_of(slow, args.repeat)
        print(f"{name:<22}{tf:>12.4f}{ts:>12.4f}{ts / tf:>10.2f}")
    print("trig sum is a matrix product; the library uses the BLAS (numpy) variant on both backends")


if __name__ == "__main__":
    main()
