#!/usr/bin/env python3
"""Run every reproduction report and print the diffs.

The two intro lines about the two-stage walkthrough are expected to fail;
see the package README for why the stated values are internally inconsistent.
"""

import argparse
import json
import sys

from reassign.repro import all_repro_reports


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--format", choices=("text", "json"), default="text")
    parser.add_argument("--npb-sizes", default="3,4,5,6,12",
                        help="club counts for the draft scenario")
    args = parser.parse_args()

    sizes = tuple(int(s) for s in args.npb_sizes.split(","))
    reports = all_repro_reports(npb_sizes=sizes)
    if args.format == "json":
        print(json.dumps([r.to_dict() for r in reports], indent=2))
    else:
        print("\n\n".join(r.render() for r in reports))
    bad = [line for r in reports for line in r.lines if not line.ok]
    print(f"\n{sum(len(r.lines) for r in reports)} checks, {len(bad)} failing",
          file=sys.stderr)
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
