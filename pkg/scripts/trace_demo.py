#!/usr/bin/env python3
"""Dump the message trace of one protocol run as JSON lines.

Useful for eyeballing round structure and per-step traffic, e.g.:

    python scripts/trace_demo.py --protocol sync-bb-highthresh --n 4 \
        --adversary withhold_cert
"""

import argparse
import json
import sys

from bbext.adversary import adversary_battery
from bbext.checks import build_inputs
from bbext.cli import _default_t_rule
from bbext.protocols import PROTOCOLS, SessionParams
from bbext.runner import run


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--protocol", default="sync-ba-half",
                        choices=sorted(PROTOCOLS))
    parser.add_argument("--n", type=int, default=4)
    parser.add_argument("--l", type=int, default=96)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--adversary", default="honest")
    parser.add_argument("--epsilon", type=float, default=0.5)
    args = parser.parse_args()

    spec = PROTOCOLS[args.protocol]
    rule = _default_t_rule(args.protocol)
    t = {"max_half": (args.n - 1) // 2, "max_third": (args.n - 1) // 3,
         "max_eps": int((1 - args.epsilon) * args.n)}[rule]
    params = SessionParams(n=args.n, t=t, l=args.l, k=128,
                           threshold_regime=spec.regime,
                           epsilon=args.epsilon if rule == "max_eps" else None)
    scripts = {s.name: s for s in adversary_battery()}
    inputs = build_inputs(spec.kind, params, args.seed, "all")
    result = run(args.protocol, params, inputs, adversary=scripts[args.adversary],
                 seed=args.seed, trace=True)
    for rec in result.trace:
        print(json.dumps(rec))
    print(json.dumps({"outputs": {p: repr(v) for p, v in result.outputs.items()},
                      "honest_bits": result.metrics.honest_bits_total}),
          file=sys.stderr)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
