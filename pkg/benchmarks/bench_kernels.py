"""Compare the compiled and pure-Python Bessel kernels.

    python3 benchmarks/bench_kernels.py [--size N] [--repeat R]
"""

import argparse
import time

import numpy as np

from shc import _backend, _kernels_py


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--size", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    x = np.linspace(0.01, 200.0, args.size).astype(np.longdouble)
    print(f"backend: {_backend.BACKEND}, points: {args.size}")
    if _backend.BACKEND != "cython":
        print("compiled kernel not available; only the fallback is timed")
    for order in (0.3, -0.3, 0.5, 2.7):
        t_py = best_of(lambda: _kernels_py.jv(order, x), args.repeat)
        line = f"order {order:5.2f}  python {t_py * 1e3:8.2f} ms"
        if _backend.BACKEND == "cython":
            t_c = best_of(lambda: _backend.jv(order, x), args.repeat)
            diff = float(np.max(np.abs(_backend.jv(order, x) - _kernels_py.jv(order, x))))
            line += f"  cython {t_c * 1e3:8.2f} ms  speedup {t_py / t_c:6.1f}x  max|diff| {diff:.1e}"
        print(line)


if __name__ == "__main__":
    main()
