"""Timing comparison of the compiled kernels against the numpy reference.

Runs each kernel on identical inputs in both backends, checks the outputs
still agree bit-for-bit, and prints a table of median wall times.

    python benchmarks/bench_kernels.py [--sizes 200,500,1000] [--repeats 5]
"""

from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from facegraph.kernels import reference

try:
    from facegraph.kernels import _native as native
except ImportError:
    native = None


def time_call(fn, *args, repeats: int) -> float:
    samples = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        samples.append(time.perf_counter() - start)
    return statistics.median(samples)


def check_equal(a, b, label: str) -> None:
    if not np.array_equal(np.asarray(a), np.asarray(b)):
        raise AssertionError(f"backends disagree on {label}")


def bench(sizes: list[int], dim: int, repeats: int, seed: int) -> None:
    rng = np.random.default_rng(seed)
    print(f"{'kernel':<28} {'n':>6} {'reference':>12} {'native':>12} {'speedup':>8}")
    print("-" * 70)
    for n in sizes:
        x = rng.normal(scale=20.0, size=(n, dim))
        q = rng.normal(scale=20.0, size=(max(8, n // 10), dim))
        groups = rng.integers(0, max(2, n // 3), size=n)
        k = min(10, n)

        cases = [
            ("pairwise_sq_dists", (x,), "pairwise_sq_dists"),
            ("dbscan_labels", (x, 50.0, 3), "dbscan_labels"),
            ("knn_indices", (q, x, k), "knn_indices"),
            ("constrained_average_linkage", (x, groups, 50.0), "constrained_average_linkage"),
        ]
        for label, args, attr in cases:
            ref_fn = getattr(reference, attr)
            ref_time = time_call(ref_fn, *args, repeats=repeats)
            if native is None:
                print(f"{label:<28} {n:>6} {ref_time * 1e3:>10.2f}ms {'absent':>12} {'—':>8}")
                continue
            nat_fn = getattr(native, attr)
            check_equal(ref_fn(*args), nat_fn(*args), f"{label} n={n}")
            nat_time = time_call(nat_fn, *args, repeats=repeats)
            speedup = ref_time / nat_time if nat_time else float("inf")
            print(
                f"{label:<28} {n:>6} {ref_time * 1e3:>10.2f}ms "
                f"{nat_time * 1e3:>10.2f}ms {speedup:>7.1f}x"
            )
        print()


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="200,500,1000", help="comma-separated point counts")
    parser.add_argument("--dim", type=int, default=128)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    if native is None:
        print("compiled backend not importable; timing reference only\n")
    sizes = [int(s) for s in args.sizes.split(",") if s]
    bench(sizes, args.dim, args.repeats, args.seed)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
