#!/usr/bin/env python3
"""Timing harness for the hot correlation kernels.

Times a tight single-evaluation loop and one multistart simplex
maximization, printing elapsed seconds and evaluation rates. With
``--compare`` the same workload is re-run in a subprocess that sets
HYBRIDCHSH_DISABLE_NUMBA=1, so the jitted kernels and the pure-numpy
fallback print side by side along with the speedup.
"""
import argparse
import os
import re
import subprocess
import sys
import time

import numpy as np

from hybridchsh import kernels
from hybridchsh.chsh import (FATOL, MAX_EVALS_PER_START, PARAM_INDEX, XATOL,
                             counting_homodyne_scenario)


def run_bench(n_evals: int, n_starts: int, seed: int) -> float:
    """Run both timed sections; return the single-evaluation rate."""
    label = "numba" if kernels.NUMBA_ACTIVE else "pure-numpy fallback"
    print(f"kernel: {label}")

    spec = counting_homodyne_scenario(with_free_params=False).to_spec_vector()
    kernels.chsh_from_spec(spec)  # compile / warm caches outside the clock
    acc = 0.0
    start = time.perf_counter()
    for _ in range(n_evals):
        acc += kernels.chsh_from_spec(spec)
    elapsed = time.perf_counter() - start
    rate = n_evals / elapsed
    print(f"chsh evaluation: {n_evals} evals in {elapsed:.3f} s"
          f"  ({rate:.0f} evals/s)")

    scenario = counting_homodyne_scenario()
    free_idx = np.array([PARAM_INDEX[fp.name] for fp in scenario.free_params],
                        dtype=np.int64)
    lo = np.array([fp.lo for fp in scenario.free_params])
    hi = np.array([fp.hi for fp in scenario.free_params])
    rng = np.random.default_rng(seed)
    starts = lo + rng.random((n_starts, lo.size)) * (hi - lo)
    kernels.multistart_maximize(spec, free_idx, lo, hi, starts[:1],
                                XATOL, FATOL, MAX_EVALS_PER_START)
    start = time.perf_counter()
    s_values, _, converged = kernels.multistart_maximize(
        spec, free_idx, lo, hi, starts, XATOL, FATOL, MAX_EVALS_PER_START)
    elapsed = time.perf_counter() - start
    print(f"multistart simplex: {n_starts} starts in {elapsed:.3f} s"
          f"  ({n_starts / elapsed:.1f} starts/s), best S ="
          f" {float(np.max(s_values)):.9f},"
          f" converged {int(np.sum(converged))}/{n_starts}")
    return rate


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="Benchmark the correlation kernels.")
    parser.add_argument("--evals", type=int, default=50000,
                        help="iterations of the single-evaluation loop")
    parser.add_argument("--starts", type=int, default=16,
                        help="starts for the multistart section")
    parser.add_argument("--seed", type=int, default=0,
                        help="seed for the start points")
    parser.add_argument("--compare", action="store_true",
                        help="also time the pure-numpy fallback in a "
                             "subprocess and report the speedup")
    args = parser.parse_args(argv)

    rate = run_bench(args.evals, args.starts, args.seed)
    if args.compare:
        env = dict(os.environ, HYBRIDCHSH_DISABLE_NUMBA="1")
        child = subprocess.run(
            [sys.executable, __file__, "--evals", str(args.evals),
             "--starts", str(args.starts), "--seed", str(args.seed)],
            env=env, capture_output=True, text=True, check=True)
        print()
        print(child.stdout, end="")
        match = re.search(r"\((\d+) evals/s\)", child.stdout)
        if match:
            print(f"\nspeedup: {rate / float(match.group(1)):.1f}x "
                  f"on the evaluation loop")
    return 0


if __name__ == "__main__":
    sys.exit(main())
