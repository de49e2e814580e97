"""Time the numba kernels against their numpy twins.

    python3 benchmarks/bench_kernels.py [--repeat 5]

The first call of every numba kernel is a warm-up and is not timed.
"""
import argparse
import math
import time

import numpy as np

from ballbeam import _kernels
from ballbeam._accel import use_backend
from ballbeam.nonlinear_scheme import run
from ballbeam.verification import build_manufactured


def best_of(fn, repeat):
    fn()  # warm-up / compile
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    rng = np.random.default_rng(0)
    x = rng.uniform(-2, 2, 10_000)
    y = rng.uniform(-1, 1, 10_000)
    J, n = 16, 2000
    b0 = 1.0 + rng.uniform(0, 1, J)
    b1 = 1.0 - rng.uniform(0, 0.5, J)
    F = rng.standard_normal((n + 1, J))
    u0, u1 = rng.standard_normal(J), rng.standard_normal(J)
    cfg = build_manufactured(1, "cos").scheme_config(2000)
    return {
        "cheb_table k=40, 1e4 pts": lambda: _kernels.cheb_table(40, x, y),
        "linear_steps J=16, n=2000": lambda: _kernels.linear_steps(b0, b1, 1e-3, u0, u1, F),
        "nonlinear run J=8, n=2000": lambda: run(cfg),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    print(f"{'kernel':28s} {'numba [ms]':>11s} {'numpy [ms]':>11s} {'speed-up':>9s}")
    for name, fn in cases().items():
        with use_backend("numba"):
            tn = best_of(fn, args.repeat)
        with use_backend("numpy"):
            tp = best_of(fn, args.repeat)
        ratio = tp / tn if tn > 0 else math.inf
        print(f"{name:28s} {1e3 * tn:11.3f} {1e3 * tp:11.3f} {ratio:8.1f}x")


if __name__ == "__main__":
    main()
