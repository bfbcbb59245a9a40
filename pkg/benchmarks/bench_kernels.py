#!/usr/bin/env python3
"""Benchmark: compiled extension kernels vs the pure-Python fallbacks.

Run from the repository root:

    python3 benchmarks/bench_kernels.py

Covers both hot paths — the all-pairs ball-equivalence scan and the
exhaustive subset walk for the restricted-weak-type functional — on spaces
small enough that the fallback finishes in reasonable time.
"""

import time
from fractions import Fraction

from maxtype import kernels
from maxtype.experiments import distinct_balls, integer_weights
from maxtype.generators import (build_first_gen, build_second_gen,
                                derive_sequences, tiny_custom_params)


def timed(fn, *args, **kw):
    t0 = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - t0


def bench_ball_scan():
    print("ball-equivalence scan (all ordered pairs, metric vs case lists)")
    print(f"{'space':<24}{'points':>8}{'pairs':>12}{'compiled':>12}"
          f"{'python':>12}{'speedup':>10}")
    cases = [
        ("X  p0=2   N=2", build_first_gen(derive_sequences(2, 2), "explicit")),
        ("Y  p0=2   N=2", build_second_gen(derive_sequences(2, 2), "explicit")),
        ("Y  p0=1.5 N=3", build_second_gen(derive_sequences(Fraction(3, 2), 3),
                                           "explicit")),
    ]
    for name, sp in cases:
        (pairs, bad_c), tc = timed(kernels.ball_scan_mismatches, sp)
        (_, bad_p), tp = timed(kernels.ball_scan_mismatches, sp,
                               force_python=True)
        assert bad_c == bad_p == 0
        print(f"{name:<24}{len(sp):>8}{pairs:>12}{tc:>11.3f}s{tp:>11.3f}s"
              f"{tp / tc:>9.1f}x")
    print()


def bench_subset_scan():
    print("exhaustive RWT subset scan (all nonempty subsets, exact arithmetic)")
    print(f"{'space':<24}{'points':>8}{'subsets':>12}{'compiled':>12}"
          f"{'python':>12}{'speedup':>10}")
    cases = [
        ("tiny custom", build_first_gen(tiny_custom_params(), "explicit")),
        ("X  p0=2   N=1", build_first_gen(derive_sequences(2, 1), "explicit")),
    ]
    for name, sp in cases:
        w, _ = integer_weights(sp)
        balls = distinct_balls(sp)
        fm = sum(w)
        (nc, dc, _), tc = timed(kernels._impl.exhaustive_rwt_scan,
                                w, balls, fm, 2)
        from maxtype import kernels_py

        (np_, dp, _), tp = timed(kernels_py.exhaustive_rwt_scan,
                                 w, balls, fm, 2)
        assert Fraction(nc, dc) == Fraction(np_, dp)
        print(f"{name:<24}{len(sp):>8}{(1 << len(sp)) - 1:>12}{tc:>11.3f}s"
              f"{tp:>11.3f}s{tp / tc:>9.1f}x")
    print()


def main():
    print(f"compiled kernels active: {kernels.USING_COMPILED}\n")
    if not kernels.USING_COMPILED:
        print("warning: extension not built; both columns use the fallback\n")
    bench_ball_scan()
    bench_subset_scan()


if __name__ == "__main__":
    main()
