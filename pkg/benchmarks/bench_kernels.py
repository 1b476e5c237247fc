"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat N]

Both implementations are called directly, so the MGTAPF_DISABLE_NUMBA flag
does not matter here.  First-call compilation is excluded from the numba
timings (each kernel is warmed up once).
"""
import argparse
import time

import numpy as np

from mgtapf import kernels
from mgtapf._accel import numba
from mgtapf.instances import builtin_map


def _time(fn, args, repeat):
    fn(*args)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def cases(rng):
    grid = builtin_map("sparse32")
    free = np.ascontiguousarray(~grid.blocked).ravel()
    src = grid.index(grid.free_cells[0])
    yield "grid_bfs 32x32", (kernels._grid_bfs_numba, kernels._grid_bfs_numpy), \
        (free, grid.height, grid.width, src)

    for n in (10, 50, 200):
        cost = rng.integers(0, 100, size=(n, n)).astype(np.float64)
        yield f"hungarian {n}x{n}", (kernels._hungarian_numba, kernels._hungarian_numpy), (cost,)

    for m, length in ((10, 60), (40, 200)):
        pos = rng.integers(0, 64, size=(m, length)).astype(np.int64)
        yield f"scan_collisions m={m} T={length}", \
            (kernels._scan_collisions_numba, kernels._scan_collisions_numpy), (pos,)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args(argv)
    if numba is None:
        raise SystemExit("numba is not installed")
    rng = np.random.default_rng(0)
    print(f"{'kernel':32s} {'numba ms':>10s} {'numpy ms':>10s} {'speedup':>8s}")
    for name, (fast, slow), kargs in cases(rng):
        a = _time(fast, kargs, args.repeat)
        b = _time(slow, kargs, args.repeat)
        print(f"{name:32s} {a * 1e3:10.3f} {b * 1e3:10.3f} {b / a:8.1f}x")


if __name__ == "__main__":
    main()
