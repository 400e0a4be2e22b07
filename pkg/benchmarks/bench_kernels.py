"""Time the numba and numpy paths of the hot kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Both paths are checked against each other before timing.
"""
import argparse
from fractions import Fraction
import time

import numpy as np

from bbm_wavekit import kernels
from bbm_wavekit._accel import HAVE_NUMBA
from bbm_wavekit.tree_calculus import resonance


def best_of(fn, repeat):
    fn()  # warm-up (jit compile, caches)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_conv(repeat):
    rng = np.random.default_rng(0)
    rows = []
    for R, K in ((1024, 16), (1024, 32), (64, 128), (8, 512)):
        u = rng.normal(size=(R, K)) + 1j * rng.normal(size=(R, K))
        v = rng.normal(size=(R, K)) + 1j * rng.normal(size=(R, K))
        t_np = best_of(lambda: kernels.conv_numpy(u, v), repeat)
        if HAVE_NUMBA:
            err = np.max(np.abs(kernels.conv_numba(u, v) - kernels.conv_numpy(u, v)))
            assert err < 1e-9 * K, err
            t_nb = best_of(lambda: kernels.conv_numba(u, v), repeat)
        else:
            t_nb = float("nan")
        rows.append((f"conv R={R} K={K}", t_np, t_nb))
    return rows


def bench_scan(repeat):
    rows = []
    for L2, W in ((Fraction(2), 24), (Fraction(400), 48)):
        p, q = L2.numerator, L2.denominator
        t_np = best_of(lambda: resonance._exhaustive(p, q, W, True, False), repeat)
        t_nb = best_of(lambda: resonance._exhaustive(p, q, W, True, True), repeat) if HAVE_NUMBA else float("nan")
        if HAVE_NUMBA:
            a = resonance._exhaustive(p, q, W, True, False)[0]
            b = resonance._exhaustive(p, q, W, True, True)[0]
            assert sorted(map(tuple, a)) == sorted(map(tuple, b))
        rows.append((f"exhaustive scan L2={L2} W={W}", t_np, t_nb))
    for L2, W in ((Fraction(801, 2), 600), (Fraction(400), 600)):
        p, q = L2.numerator, L2.denominator
        t_np = best_of(lambda: resonance._fast(p, q, W, False), 1)
        t_nb = best_of(lambda: resonance._fast(p, q, W, True), repeat) if HAVE_NUMBA else float("nan")
        rows.append((f"fast scan L2={L2} W={W}", t_np, t_nb))
    return rows


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    print(f"{'kernel':38s} {'numpy [s]':>12s} {'numba [s]':>12s} {'speedup':>8s}")
    for name, a, b in bench_conv(args.repeat) + bench_scan(args.repeat):
        print(f"{name:38s} {a:12.3e} {b:12.3e} {a / b:8.1f}")


if __name__ == "__main__":
    main()
