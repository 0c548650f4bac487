"""Compare the compiled affine kernel with the numpy fallback, and time a full forward pass.

    python3 benchmarks/bench_kernels.py [--rows 100000] [--repeat 5]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from reluswap import kernels


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, default=100_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if kernels.affine_compiled is None:
        print("compiled kernel not available; only the fallback can be timed")
    rng = np.random.default_rng(0)
    print(f"{'shape (rows x out x in)':<26} {'python s':>10} {'compiled s':>11} {'speedup':>8} {'bitwise':>8}")
    for n_out, n_in in ((8, 2), (24, 24), (64, 64), (1, 24)):
        h = rng.uniform(-1, 1, (args.rows, n_in))
        w = rng.uniform(-1, 1, (n_out, n_in))
        b = rng.uniform(-1, 1, n_out)
        t_py = best_of(lambda: kernels.affine_python(h, w, b), args.repeat)
        label = f"{args.rows} x {n_out} x {n_in}"
        if kernels.affine_compiled is None:
            print(f"{label:<26} {t_py:>10.4f} {'-':>11} {'-':>8} {'-':>8}")
            continue
        t_c = best_of(lambda: kernels.affine_compiled(h, w, b), args.repeat)
        same = np.array_equal(kernels.affine_python(h, w, b).view(np.uint64),
                              kernels.affine_compiled(h, w, b).view(np.uint64))
        print(f"{label:<26} {t_py:>10.4f} {t_c:>11.4f} {t_py / t_c:>7.1f}x {str(same):>8}")


if __name__ == "__main__":
    main()
