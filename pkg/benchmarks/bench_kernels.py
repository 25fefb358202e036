"""Benchmark the hot kernels on both backends (numba @njit vs pure numpy).

Usage:  python benchmarks/bench_kernels.py [--repeats 5]

The numba path is warmed once before timing so compilation is excluded.
"""

import argparse
import time

import numpy as np

from varmeas import kernels
from varmeas.mcshane import DensityMeasure, StepFn, certified_gauge


def time_call(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def build_cases(rng):
    cases = []
    for n in (16, 20, 22):
        w = rng.normal(size=n)
        cases.append((f"max_abs_subset_sum n={n}",
                      lambda impl, w=w: impl.max_abs_subset_sum(w)))
    for n in (16, 20):
        costs = rng.uniform(0, 0.2, size=n)
        gains = rng.uniform(0, 2, size=n) * costs
        cases.append((f"budget_knapsack n={n}",
                      lambda impl, g=gains, c=costs: impl.budget_knapsack(g, c, 0.5)))
    delta = rng.normal(size=(12, 360))
    cases.append(("max_set_gap_matrix 12x360",
                  lambda impl, d=delta: impl.max_set_gap_matrix(d)))

    f = StepFn(np.array([0.0, 0.21875, 0.5, 0.84375, 1.0]),
               np.array([1.0, -2.0, 0.5, 3.0]))
    m = DensityMeasure(np.array([0.0, 0.5, 1.0]), np.array([1.5, 0.5]))
    g = certified_gauge(f, m, 1e-6)
    z_lo, z_hi, z_rad = g.zones()

    def trials(impl, n_trials=1000):
        return impl.mcshane_trial_sums(z_lo, z_hi, z_rad, f.breaks, f.values2d,
                                       m.breaks, m.cum, m.densities, 7, n_trials, 4096)

    cases.append(("mcshane_trial_sums 1000 partitions", trials))
    return cases


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    cases = build_cases(rng)
    backends = {name: impl for name, impl in kernels.BACKENDS.items() if impl is not None}
    if "numba" in backends:
        for _, fn in cases:
            fn(backends["numba"])  # warm the JIT once

    width = max(len(name) for name, _ in cases)
    header = f"{'kernel':<{width}}  " + "  ".join(f"{b:>10}" for b in backends)
    if len(backends) == 2:
        header += f"  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for name, fn in cases:
        times = {b: time_call(lambda impl=impl: fn(impl), args.repeats)
                 for b, impl in backends.items()}
        row = f"{name:<{width}}  " + "  ".join(f"{times[b] * 1e3:>8.2f}ms" for b in backends)
        if len(times) == 2:
            row += f"  {times['numpy'] / times['numba']:>7.1f}x"
        print(row)


if __name__ == "__main__":
    main()
