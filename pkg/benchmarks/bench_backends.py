#!/usr/bin/env python3
"""Benchmark the compiled kernel backend against the pure NumPy fallback.

Runs the three hot kernels on representative workloads and prints a timing
table. Usage: python benchmarks/bench_backends.py [--repeat N]
"""

import argparse
import sys
import time
from pathlib import Path

import numpy as np

try:
    import eigenseries
except ImportError:
    sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))
    import eigenseries

from eigenseries.backend import available_backends, get_impl
from eigenseries.hamiltonian import ModelSpec, generate_model, split


def _timeit(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def workloads():
    rng = np.random.default_rng(1234)

    node_sets = [np.sort(rng.choice(np.arange(8.0), size=24)) for _ in range(400)]

    def dd_load(impl):
        def run():
            for xs in node_sets:
                impl.dd_exp_sorted(xs, 0.9)
        return run

    s_dense = split(generate_model(ModelSpec("banded_random", dim=6, lam=0.2, bandwidth=5, seed=3)))

    def pathsum_load(impl):
        def run():
            impl.pathsum_order(s_dense.levels, s_dense.coupling, 9, 0.8)
        return run

    h_big = generate_model(ModelSpec("banded_random", dim=48, lam=0.5, bandwidth=8, seed=11)).entries

    def jacobi_load(impl):
        def run():
            impl.jacobi_eig(h_big, 1e-14, 100)
        return run

    return [
        ("dd_exp_sorted (400 x 24 nodes)", dd_load),
        ("pathsum_order (dim=6, l=9, dense band)", pathsum_load),
        ("jacobi_eig (dim=48)", jacobi_load),
    ]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=3, help="best-of-N timing")
    args = parser.parse_args(argv)

    names = available_backends()
    print(f"eigenseries {eigenseries.__version__}; backends: {', '.join(names)}")
    if "compiled" not in names:
        print("compiled extension not built; timing the pure backend only")

    rows = []
    for label, make in workloads():
        times = {}
        for name in names:
            impl = get_impl(name)
            times[name] = _timeit(make(impl), args.repeat)
        rows.append((label, times))

    width = max(len(r[0]) for r in rows) + 2
    header = f"{'kernel':<{width}}" + "".join(f"{n:>14}" for n in names)
    if len(names) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for label, times in rows:
        line = f"{label:<{width}}"
        for name in names:
            line += f"{times[name] * 1e3:>12.2f}ms"
        if len(names) == 2:
            line += f"{times['pure'] / times['compiled']:>9.1f}x"
        print(line)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
