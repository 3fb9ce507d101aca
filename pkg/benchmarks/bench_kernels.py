#!/usr/bin/env python3
"""Benchmark the jitted kernels against their pure-numpy fallbacks.

Usage:
    python benchmarks/bench_kernels.py [--reps 50]

Times the three hot kernels on realistic shapes and one end-to-end Gram
assembly, once with numba enabled and once with the numpy fallback (the
same toggle as the DBARDISK_NUMBA environment variable, flipped in
process). Run with DBARDISK_NUMBA=0 to benchmark the fallback only.
"""

import argparse
import time

import numpy as np

from dbardisk import _kernels
from dbardisk.diskmap import make_map
from dbardisk.diskmap import DiskGrid
from dbardisk.geometry import make_domain
from dbardisk.secondvar import admissible_basis, assemble_gram


def _time(fn, reps):
    fn()  # warm (JIT compile / cache load)
    t0 = time.perf_counter()
    for _ in range(reps):
        fn()
    return (time.perf_counter() - t0) / reps


def bench(reps):
    rng = np.random.default_rng(0)
    nr, nt, c2 = 64, 128, 8
    fx = rng.normal(size=(nr, nt, c2))
    fy = rng.normal(size=(nr, nt, c2))
    inv_r = 1.0 / np.linspace(0.01, 1.0, nr)
    cos_t = np.cos(np.linspace(0, 2 * np.pi, nt, endpoint=False))
    sin_t = np.sin(np.linspace(0, 2 * np.pi, nt, endpoint=False))
    m = 64
    gx = rng.normal(size=(m, 32, 64, 4))
    gy = rng.normal(size=(m, 32, 64, 4))
    w2 = rng.uniform(0.1, 1.0, size=(32, 64))

    grid = DiskGrid(32, 64)
    f4 = make_map("f4", grid)
    weak = make_domain("weak_rank_one")
    basis = admissible_basis(f4, weak, 52)

    cases = {
        "energy_densities (64x128x8)": lambda: _kernels.energy_densities(fx, fy),
        "polar_to_cartesian (64x128x8)": lambda: _kernels.polar_to_cartesian(
            fx, fy, inv_r, cos_t, sin_t),
        "gram_interior (64 fields)": lambda: _kernels.gram_interior(gx, gy, w2),
        "assemble_gram end-to-end (52 fields)": lambda: assemble_gram(
            f4, weak, basis),
    }

    results = {}
    for label, fn in cases.items():
        row = {}
        if _kernels.NUMBA_ENABLED:
            row["numba"] = _time(fn, reps)
            _kernels.NUMBA_ENABLED = False
            row["numpy"] = _time(fn, reps)
            _kernels.NUMBA_ENABLED = True
        else:
            row["numpy"] = _time(fn, reps)
        results[label] = row

    width = max(len(k) for k in results)
    print(f"{'kernel':<{width}}  {'numba':>10}  {'numpy':>10}  {'ratio':>7}")
    for label, row in results.items():
        numba_s = row.get("numba")
        numpy_s = row["numpy"]
        if numba_s is None:
            print(f"{label:<{width}}  {'n/a':>10}  {numpy_s * 1e3:>8.3f}ms  {'':>7}")
        else:
            print(f"{label:<{width}}  {numba_s * 1e3:>8.3f}ms  "
                  f"{numpy_s * 1e3:>8.3f}ms  {numpy_s / numba_s:>6.2f}x")


if __name__ == "__main__":
    parser = argparse.ArgumentParser()
    parser.add_argument("--reps", type=int, default=50)
    args = parser.parse_args()
    if not _kernels.NUMBA_ENABLED:
        print("numba disabled or unavailable; timing the numpy path only")
    bench(args.reps)
