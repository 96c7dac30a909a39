#!/usr/bin/env python3
"""Benchmark the hot kernels on both backends and check they agree.

The package's inner loops (thermal-ensemble coherent rows, the seeded
sampler, row-wise overlaps) dispatch to numba @njit code by default and
to vectorized numpy when numba is absent or LEVSPIN_NO_NUMBA is set.
This script times both paths on thermal-Monte-Carlo-sized workloads and
reports the worst output discrepancy (expected: a few ulp).

Usage: python benchmarks/bench_kernels.py [--count N] [--n-cutoff N] [--repeat N]
"""

import argparse
import time

import numpy as np

from levspin import _kernels


def timed(fn, repeat):
    best = float("inf")
    result = None
    for _ in range(repeat):
        started = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - started)
    return best, result


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--count", type=int, default=20_000,
                        help="ensemble size (default 20000)")
    parser.add_argument("--n-cutoff", type=int, default=64, dest="n_cutoff")
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    backends = ["numpy"]
    if _kernels.BACKEND == "numba":
        backends.append("numba")
    else:
        print("numba unavailable or disabled (LEVSPIN_NO_NUMBA); timing numpy only")

    labels = _kernels.gaussian_pairs(2024, args.count, backend="numpy")
    labels = labels[:, 0] + 1j * labels[:, 1]
    rows_a, _ = _kernels.coherent_rows(labels, args.n_cutoff, backend="numpy")
    rows_b, _ = _kernels.coherent_rows(labels * 0.7 - 0.1, args.n_cutoff, backend="numpy")

    workloads = {
        "coherent_rows": lambda be: _kernels.coherent_rows(labels, args.n_cutoff, backend=be),
        "gaussian_pairs": lambda be: _kernels.gaussian_pairs(99, args.count, backend=be),
        "row_overlaps": lambda be: _kernels.row_overlaps(rows_a, rows_b, backend=be),
    }

    print(f"count = {args.count}, n_cutoff = {args.n_cutoff}, "
          f"best of {args.repeat} runs")
    print(f"{'kernel':16s} " + "".join(f"{be:>12s}" for be in backends)
          + ("     speedup    max |diff|" if len(backends) == 2 else ""))
    for name, work in workloads.items():
        times = {}
        outputs = {}
        for be in backends:
            if be == "numba":
                work(be)  # compile outside the clock
            times[be], outputs[be] = timed(lambda b=be: work(b), args.repeat)
        line = f"{name:16s} " + "".join(f"{times[be] * 1e3:10.3f}ms" for be in backends)
        if len(backends) == 2:
            out_np = outputs["numpy"][0] if isinstance(outputs["numpy"], tuple) else outputs["numpy"]
            out_nb = outputs["numba"][0] if isinstance(outputs["numba"], tuple) else outputs["numba"]
            diff = float(np.max(np.abs(out_np - out_nb)))
            line += f"  {times['numpy'] / times['numba']:9.2f}x   {diff:.3e}"
        print(line)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
