#!/usr/bin/env python3
"""Throughput comparison: compiled competition core vs pure-Python fallback.

Runs the same seeded workloads through both backends, checks they agree
bit for bit, and prints trials/second plus the speedup.

Usage: python benchmarks/bench_bias.py [--trials N]
"""

import argparse
import time

from lighthouse import _biascore_py

try:
    from lighthouse import _biascore
except ImportError:
    _biascore = None

WORKLOADS = (
    ("raw-blockhash        F=0.50", 0, 0.50),
    ("raw-blockhash        F=0.10", 0, 0.10),
    ("lighthouse-no-coll   F=0.50", 1, 0.50),
    ("lighthouse-full-coll F=0.50", 2, 0.50),
)


def run(backend, mode: int, fraction: float, trials: int) -> tuple[tuple, float]:
    start = time.perf_counter()
    result = backend.bias_trials(mode, 42, trials, fraction, 0, 1, 10_000)
    return result, time.perf_counter() - start


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--trials", type=int, default=100_000)
    args = parser.parse_args()

    print(f"{'workload':<30} {'python':>12} {'cython':>12} {'speedup':>8}")
    for label, mode, fraction in WORKLOADS:
        py_result, py_time = run(_biascore_py, mode, fraction, args.trials)
        if _biascore is None:
            print(f"{label:<30} {args.trials / py_time:>10.0f}/s {'(not built)':>12}")
            continue
        cy_result, cy_time = run(_biascore, mode, fraction, args.trials)
        assert py_result == cy_result, f"backend mismatch on {label}: {py_result} != {cy_result}"
        print(
            f"{label:<30} {args.trials / py_time:>10.0f}/s {args.trials / cy_time:>10.0f}/s "
            f"{py_time / cy_time:>7.1f}x"
        )
    if _biascore is not None:
        print("results identical across backends")


if __name__ == "__main__":
    main()
