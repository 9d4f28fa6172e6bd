"""Benchmark the compiled integer kernels against the pure-Python twin.

The workloads mirror the hot loop of the exhaustive pencil sweep: many
small exact ranks of evaluated pencils and determinants for minor
interpolation.  Run:

    python benchmarks/bench_kernels.py
"""

import random
import time

from sfpas._kernels import pure

try:
    from sfpas._kernels import _speedups as compiled
except ImportError:
    compiled = None


def make_pencil_workload(n, rng):
    mats = []
    for _ in range(n):
        k = [[rng.randint(-1, 1) for _ in range(2)] for _ in range(3)]
        l = [[rng.randint(-1, 1) for _ in range(2)] for _ in range(3)]
        m = [[rng.randint(-1, 1) for _ in range(2)] for _ in range(3)]
        x = rng.randint(-24, 24)
        mats.append(
            [
                [x * k[i][j] + l[i][j] for j in range(2)] + m[i]
                for i in range(3)
            ]
        )
    return mats


def make_det_workload(n, rng):
    return [[[rng.randint(-60, 60) for _ in range(3)] for _ in range(3)] for _ in range(n)]


def bench(fn, data, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        for mat in data:
            fn(mat)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    rng = random.Random(0)
    ranks = make_pencil_workload(20_000, rng)
    dets = make_det_workload(20_000, rng)

    rows = []
    for name, workload, attr in (
        ("rank_int 3x4 pencil", ranks, "rank_int"),
        ("det_int 3x3", dets, "det_int"),
    ):
        t_pure = bench(getattr(pure, attr), workload)
        if compiled is not None:
            t_comp = bench(getattr(compiled, attr), workload)
            rows.append((name, t_pure, t_comp, t_pure / t_comp))
        else:
            rows.append((name, t_pure, None, None))

    n = len(ranks)
    print(f"{n} calls per workload, best of 3")
    print(f"{'workload':<24}{'pure (s)':>10}{'compiled (s)':>14}{'speedup':>10}")
    for name, t_pure, t_comp, speedup in rows:
        if t_comp is None:
            print(f"{name:<24}{t_pure:>10.3f}{'n/a':>14}{'n/a':>10}")
        else:
            print(f"{name:<24}{t_pure:>10.3f}{t_comp:>14.3f}{speedup:>9.1f}x")
    if compiled is None:
        print("compiled lane not built; install with Cython to compare")


if __name__ == "__main__":
    main()
