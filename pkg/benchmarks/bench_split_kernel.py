"""Compare the compiled split-scan kernel against the pure-Python fallback.

Times the raw boundary scan and a full tree fit under both backends and
verifies that the fitted trees are bit-for-bit identical.

Usage: python benchmarks/bench_split_kernel.py [--rows 20000] [--features 14]
"""

import argparse
import time

import numpy as np

import routeboost.learners as learners
from routeboost._kernels import BACKEND, scan_split, scan_split_py
from routeboost.learners import LearnerConfig, fit, learner_to_json


def time_it(fn, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_raw_scan(n):
    rng = np.random.default_rng(0)
    xs = np.sort(rng.normal(size=n))
    ys = rng.normal(size=n)
    ys -= ys.mean()

    t_compiled = time_it(lambda: scan_split(xs, ys, 5))
    t_python = time_it(lambda: scan_split_py(xs, ys, 5))
    assert scan_split(xs, ys, 5) == scan_split_py(xs, ys, 5)
    return t_compiled, t_python


def bench_tree_fit(n, p):
    rng = np.random.default_rng(1)
    X = rng.normal(size=(n, p))
    y = X @ rng.normal(size=p) + rng.normal(size=n)
    config = LearnerConfig(kind="tree", tree_max_depth=4, tree_min_leaf=5)

    t_compiled = time_it(lambda: fit(config, X, y), repeats=3)
    compiled_tree = fit(config, X, y)

    learners.scan_split = scan_split_py
    try:
        t_python = time_it(lambda: fit(config, X, y), repeats=3)
        python_tree = fit(config, X, y)
    finally:
        learners.scan_split = scan_split

    assert learner_to_json(compiled_tree) == learner_to_json(python_tree), \
        "backends disagree"
    return t_compiled, t_python


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rows", type=int, default=20000)
    parser.add_argument("--features", type=int, default=14)
    args = parser.parse_args()

    print(f"active backend: {BACKEND}")
    if BACKEND != "compiled":
        print("note: extension not built; 'compiled' numbers below use the fallback")

    t_c, t_p = bench_raw_scan(args.rows)
    print(f"\nraw scan, n={args.rows}:")
    print(f"  compiled {t_c * 1e3:9.3f} ms")
    print(f"  python   {t_p * 1e3:9.3f} ms")
    print(f"  speedup  {t_p / t_c:9.1f}x")

    t_c, t_p = bench_tree_fit(args.rows, args.features)
    print(f"\ntree fit (depth 4), n={args.rows}, p={args.features}:")
    print(f"  compiled {t_c * 1e3:9.3f} ms")
    print(f"  python   {t_p * 1e3:9.3f} ms")
    print(f"  speedup  {t_p / t_c:9.1f}x")
    print("\nfitted trees are bit-for-bit identical across backends")


if __name__ == "__main__":
    main()
