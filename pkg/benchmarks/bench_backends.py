#!/usr/bin/env python3
"""Throughput comparison of the numba and numpy kernel backends.

Runs the same mid-size simulation on both backends (after a warm-up pass so
jit compilation does not pollute the numbers) and prints a timing table.
Results are asserted equal, so this doubles as an end-to-end consistency
check at a scale the unit tests do not reach.

Usage: python benchmarks/bench_backends.py [--users N] [--weeks W] [--repeat K]
"""

import argparse
import time

import numpy as np

from topicsim import SimConfig, run_simulation


def bench(cfg: SimConfig, backend: str, repeat: int) -> tuple[float, object]:
    run_simulation(SimConfig(**{**cfg.__dict__, "num_users": 2}), backend=backend)  # warm jit
    best = float("inf")
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = run_simulation(cfg, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, result


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--users", type=int, default=100)
    parser.add_argument("--weeks", type=int, default=20)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    cfg = SimConfig(
        num_users=args.users,
        num_websites=50_000,
        num_ad_networks=100,
        num_weeks=args.weeks,
        pages_per_epoch=334,
        user_loyalty=0.43,
        ads_on_site=10,
        max_topics=3,
        presence=0.05,
        interest_proportion=1.0,
        seed=7,
    )
    visits = cfg.num_users * cfg.num_weeks * cfg.pages_per_epoch
    print(f"config: {cfg.num_users} users x {cfg.num_weeks} weeks x "
          f"{cfg.pages_per_epoch} pages = {visits:,} page visits\n")

    timings = {}
    results = {}
    for backend in ("numba", "numpy"):
        timings[backend], results[backend] = bench(cfg, backend, args.repeat)

    assert np.array_equal(
        results["numba"].counters.present, results["numpy"].counters.present
    )
    assert results["numba"].report.fill_rate == results["numpy"].report.fill_rate

    print(f"{'backend':<8} {'seconds':>9} {'visits/s':>12}")
    for backend, secs in timings.items():
        print(f"{backend:<8} {secs:>9.3f} {visits / secs:>12,.0f}")
    speedup = timings["numpy"] / timings["numba"]
    print(f"\nnumba speedup over numpy: {speedup:.1f}x "
          f"(identical results, fill_rate={results['numba'].report.fill_rate:.4f})")


if __name__ == "__main__":
    main()
