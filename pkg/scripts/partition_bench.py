#!/usr/bin/env python3
"""Measure the partition constructor's step counts across sizes.

The instrumented step count should grow linearly in the number of divisions;
the script prints counts and the ratio drift against a linear fit.
"""

import argparse
import sys

from reassign.partition import largest_first_construct_counted


def bench(n: int, groups: int) -> int:
    base, extra = divmod(n, groups)
    sizes = [base + (1 if k < extra else 0) for k in range(groups)]
    blocks, nxt = [], 1
    for s in sizes:
        blocks.append(list(range(nxt, nxt + s)))
        nxt += s
    _, steps = largest_first_construct_counted(blocks)
    return steps


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="1000,10000,100000",
                        help="division counts to time")
    parser.add_argument("--groups", type=int, default=4)
    args = parser.parse_args()

    ns = [int(s) for s in args.sizes.split(",")]
    counts = [bench(n, args.groups) for n in ns]
    for n, c in zip(ns, counts):
        print(f"n={n:>8}  steps={c:>9}  steps/n={c / n:.3f}")
    base = counts[0] / ns[0]
    drift = max(abs(c / n - base) / base for n, c in zip(ns, counts))
    print(f"max drift from linear: {drift * 100:.2f}%")
    return 0


if __name__ == "__main__":
    sys.exit(main())
