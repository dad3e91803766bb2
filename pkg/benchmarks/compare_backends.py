"""Timing comparison of the compiled and pure-Python kernels.

Runs the three kernel entry points on the same inputs through both
implementations, checks that they agree, and reports per-call times
and speedups, plus an end-to-end detection timing on the backend the
package selected at import. Invoke as

    python3 benchmarks/compare_backends.py [--sizes 100,200,400] [--repeats 3]
"""

import argparse
import math
import time

import numpy as np

from hlshift import _kernels_py
from hlshift._backend import BACKEND, median_selectors
from hlshift.detectors import run_test

try:
    from hlshift import _kernels
except ImportError:
    _kernels = None


def best_of(fn, repeats):
    best = math.inf
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="100,200,400",
                        help="comma-separated series lengths")
    parser.add_argument("--repeats", type=int, default=3,
                        help="take the best of this many runs")
    parser.add_argument("--seed", type=int, default=20260819)
    args = parser.parse_args(argv)

    sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    rng = np.random.default_rng(args.seed)

    print(f"selected backend: {BACKEND}")
    if _kernels is None:
        print("compiled extension not importable; timing the pure kernels only")

    header = f"{'kernel':<22}{'n':>6}{'pure':>12}{'compiled':>12}{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for n in sizes:
        x = rng.standard_normal(n)
        lo, hi = median_selectors(n)
        cases = (
            ("hl median sweep", lambda impl: impl.diff_sweep(x, lo, hi, 0.0, False)),
            ("rank double sums", lambda impl: impl.wmw_twod(x)),
            ("kernel pair sum", lambda impl: impl.epan_pair_sum(x, 0.35)),
        )
        for name, call in cases:
            t_pure = best_of(lambda: call(_kernels_py), args.repeats)
            if _kernels is not None:
                got_c = call(_kernels)
                got_p = call(_kernels_py)
                if name == "kernel pair sum":
                    # summation order differs between the two loops
                    assert math.isclose(got_c, got_p, rel_tol=1e-9), name
                else:
                    np.testing.assert_array_equal(got_c[0] if isinstance(got_c, tuple) else got_c,
                                                  got_p[0] if isinstance(got_p, tuple) else got_p)
                t_comp = best_of(lambda: call(_kernels), args.repeats)
                ratio = f"{t_pure / t_comp:9.1f}x"
                comp_s = f"{t_comp * 1e3:10.2f}ms"
            else:
                ratio = "      n/a"
                comp_s = "       n/a"
            print(f"{name:<22}{n:>6}{t_pure * 1e3:>10.2f}ms{comp_s}{ratio}")

    n = max(sizes)
    x = rng.standard_normal(n)
    x[n // 2:] += 1.0
    for test in ("hle", "wmw", "cusum"):
        t = best_of(lambda: run_test(x, test=test), args.repeats)
        print(f"run_test({test!r:>7}) n={n} on {BACKEND} backend: {t * 1e3:8.2f}ms")


if __name__ == "__main__":
    main()
