#!/usr/bin/env python3
"""Sweep properties across mechanisms and sizes, printing one line per check.

The default plan covers the headline facts at desk scale: the order-stage
mechanisms hold SP/RI/EAP, the cyclic-endowment trading mechanism holds
CE-efficiency and SP but fails RI at n=3, the draft holds CE-efficiency but
fails SP (n>=4) and RI (n>=3), and the backward trading variant fails RI.
"""

import argparse
import json
import sys

from reassign.verifier import CHECKS, Scope

DEFAULT_PLAN = (
    ("csd", "sp", 3), ("csd", "ri", 3), ("csd", "eap", 3),
    ("csd", "sp", 4), ("csd", "ri", 4), ("csd", "eap", 4),
    ("tsd", "sp", 3), ("tsd", "ri", 3), ("tsd", "eap", 3),
    ("tsd", "sp", 4), ("tsd", "ri", 4), ("tsd", "eap", 4),
    ("sd", "sp", 4), ("sd", "ri", 4),
    ("cettc", "cee", 4), ("cettc", "sp", 4), ("cettc", "ri", 3),
    ("npb", "cee", 3), ("npb", "sp", 3), ("npb", "sp", 4), ("npb", "ri", 3),
    ("bttc", "ri", 3), ("bttc", "ce", 3),
)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--mechanism", default=None, help="limit to one mechanism tag")
    parser.add_argument("--property", default=None, choices=sorted(CHECKS),
                        help="limit to one property")
    parser.add_argument("--n", type=int, default=None, help="limit to one size")
    parser.add_argument("--scope", choices=("exhaustive", "sampled"), default="exhaustive")
    parser.add_argument("--count", type=int, default=10000)
    parser.add_argument("--seed", type=int, default=20240817)
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--format", choices=("text", "json"), default="text")
    args = parser.parse_args()

    plan = [
        row for row in DEFAULT_PLAN
        if (args.mechanism is None or row[0] == args.mechanism)
        and (args.property is None or row[1] == args.property)
        and (args.n is None or row[2] == args.n)
    ]
    if not plan:
        print("nothing to sweep with those filters", file=sys.stderr)
        return 2

    results = []
    for tag, prop, n in plan:
        scope = None
        if args.scope == "sampled":
            scope = Scope("sampled", n, count=args.count, seed=args.seed)
        kwargs = {} if prop == "own-position" else {"jobs": args.jobs}
        report = CHECKS[prop](tag, n, scope, **kwargs)
        results.append(report)
        if args.format == "text":
            print(
                f"{prop:>5} {tag:>6} n={n}: {report.verdict:5}  "
                f"checked={report.checked}  {report.elapsed:.2f}s"
            )
    if args.format == "json":
        print(json.dumps([r.to_dict() for r in results], indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
