"""Time the uncoded-scheme kernel on the numba and numpy backends.

Usage: python3 benchmarks/bench_uc_kernel.py [--trials 100000] [--repeat 3]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from edgecoding._accel import HAVE_NUMBA
from edgecoding.kernels import uc_batch
from edgecoding.model import SystemConfig, sample_batch
from edgecoding.placement import cyclic_schedule


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--trials", type=int, default=100_000)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--eta", type=float, default=0.8)
    args = parser.parse_args()

    cfg = SystemConfig(eta=args.eta)
    sched = cyclic_schedule(cfg).as_array()
    lam = sample_batch(cfg, seed=1, trials=args.trials)
    run = lambda b: uc_batch(lam, sched, cfg.m, cfg.tau, cfg.N, backend=b)

    backends = ["numpy"] + (["numba"] if HAVE_NUMBA else [])
    results = {}
    for b in backends:
        run(b)  # warm-up (includes JIT compile for numba)
        results[b] = best_of(lambda: run(b), args.repeat)
        print(f"{b:>6}: {results[b]:.3f} s for {args.trials} trials "
              f"({args.trials / results[b]:,.0f} trials/s)")
    if "numba" in results:
        print(f"speedup numba/numpy: {results['numpy'] / results['numba']:.1f}x")
        same = all(np.array_equal(x, y, equal_nan=True) for x, y in zip(run("numba"), run("numpy")))
        print(f"outputs bit-identical: {same}")
    else:
        print("numba unavailable or disabled (EDGECODING_NO_NUMBA); numpy only")


if __name__ == "__main__":
    main()
