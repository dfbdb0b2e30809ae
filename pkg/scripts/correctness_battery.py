#!/usr/bin/env python3
"""Run the full protocol-correctness battery from the command line.

Equivalent to `bbext check protocols-sync` plus `bbext check protocols-async`
but with a single progress summary, handy while iterating on a protocol or a
new adversary script.
"""

import argparse
import json
import os

from bbext.checks import suite_protocols_async, suite_protocols_sync


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seeds", type=int, default=100)
    parser.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    args = parser.parse_args()
    ok = True
    for suite in (suite_protocols_sync, suite_protocols_async):
        report = suite(seeds=args.seeds, jobs=args.jobs)
        print(json.dumps(report.to_dict(), sort_keys=True))
        ok = ok and report.passed
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
