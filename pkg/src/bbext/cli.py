"""Experiment runner CLI: parameter sweeps and property-suite checks.

``bbext run`` executes one metrics run per (protocol, n, t, l, adversary,
seed) cell, writing a JSON metrics file per cell and one aggregate CSV with
fixed column order. ``bbext check <suite>`` runs a property suite and prints
a machine-readable JSON report.

Exit codes: 0 ok, 1 property failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .adversary import adversary_battery
from .checks import SUITES, build_inputs
from .protocols import PROTOCOLS, SessionParams
from .runner import ORACLE_KINDS, run

CSV_COLUMNS = ["protocol", "n", "t", "l", "adversary", "seed",
               "honest_bits", "oracle_bits", "rounds"]

T_RULES = ("max_half", "max_third", "max_eps", "explicit")


class ConfigError(Exception):
    pass


@dataclass
class ExperimentConfig:
    protocol: str
    n_list: list[int]
    t_rule: str
    t_list: list[int] | None
    l_list: list[int]
    k: int
    epsilon: float | None
    oracles: dict[str, str]
    accumulator: str
    adversaries: list[str]
    seeds: list[int]
    out: Path
    jobs: int = 1

    @staticmethod
    def load(path: str | None, overrides: argparse.Namespace) -> "ExperimentConfig":
        raw: dict = {}
        if path:
            try:
                raw = json.loads(Path(path).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read config {path}: {exc}")
        if overrides.protocol:
            raw["protocol"] = overrides.protocol
        if overrides.n:
            raw["n"] = [int(x) for x in overrides.n.split(",")]
        if overrides.l:
            raw["l"] = [int(x) for x in overrides.l.split(",")]
        if overrides.t:
            raw["t_rule"] = "explicit"
            raw["t"] = [int(x) for x in overrides.t.split(",")]
        if overrides.seed:
            raw["seeds"] = [int(x) for x in overrides.seed.split(",")]
        if overrides.adversary:
            raw["adversaries"] = overrides.adversary.split(",")
        if overrides.acc:
            raw["accumulator"] = overrides.acc
        if overrides.out:
            raw["out"] = overrides.out
        if overrides.epsilon is not None:
            raw["epsilon"] = overrides.epsilon
        for spec in overrides.oracle or []:
            if "=" not in spec:
                raise ConfigError(f"--oracle expects kind=impl, got {spec!r}")
            kind, impl = spec.split("=", 1)
            raw.setdefault("oracles", {})[kind] = impl
        return ExperimentConfig.from_dict(raw, jobs=overrides.jobs)

    @staticmethod
    def from_dict(raw: dict, jobs: int = 1) -> "ExperimentConfig":
        try:
            protocol = raw["protocol"]
        except KeyError:
            raise ConfigError("config needs a protocol name")
        if protocol not in PROTOCOLS:
            raise ConfigError(f"unknown protocol {protocol!r}; "
                              f"choose from {sorted(PROTOCOLS)}")
        n_list = list(raw.get("n", [4]))
        l_list = list(raw.get("l", [1024]))
        if not n_list or not l_list:
            raise ConfigError("n and l lists must be non-empty")
        t_rule = raw.get("t_rule", _default_t_rule(protocol))
        if t_rule not in T_RULES:
            raise ConfigError(f"unknown t rule {t_rule!r}")
        t_list = raw.get("t")
        if t_rule == "explicit":
            if not t_list or len(t_list) != len(n_list):
                raise ConfigError("explicit t rule needs one t per n")
        seeds_raw = raw.get("seeds")
        if seeds_raw is None:
            default = int(os.environ.get("BBEXT_SEED", "0"))
            seeds = [default]
        elif isinstance(seeds_raw, dict):
            seeds = list(range(seeds_raw.get("start", 0),
                               seeds_raw.get("start", 0) + seeds_raw["count"]))
        else:
            seeds = [int(s) for s in seeds_raw]
        if not seeds:
            raise ConfigError("seed list must be non-empty")
        oracles = dict(raw.get("oracles", {}))
        for kind, impl in oracles.items():
            if kind not in ORACLE_KINDS or impl not in ("ideal", "concrete"):
                raise ConfigError(f"bad oracle setting {kind}={impl}")
        adversaries = list(raw.get("adversaries", ["honest"]))
        known = {s.name for s in adversary_battery()}
        for name in adversaries:
            if name not in known:
                raise ConfigError(f"unknown adversary {name!r}; choose from {sorted(known)}")
        return ExperimentConfig(
            protocol=protocol,
            n_list=n_list,
            t_rule=t_rule,
            t_list=list(t_list) if t_list else None,
            l_list=l_list,
            k=int(raw.get("k", 256)),
            epsilon=raw.get("epsilon"),
            oracles=oracles,
            accumulator=raw.get("accumulator", "hash_tree"),
            adversaries=adversaries,
            seeds=seeds,
            out=Path(raw.get("out", "results")),
            jobs=jobs,
        )

    def cells(self) -> list[dict]:
        out = []
        for idx, n in enumerate(self.n_list):
            t = self._t_for(n, idx)
            for l in self.l_list:
                for adv in self.adversaries:
                    for seed in self.seeds:
                        out.append({
                            "protocol": self.protocol, "n": n, "t": t, "l": l,
                            "adversary": adv, "seed": seed, "k": self.k,
                            "epsilon": self.epsilon, "oracles": self.oracles,
                            "accumulator": self.accumulator,
                        })
        return out

    def _t_for(self, n: int, idx: int) -> int:
        if self.t_rule == "explicit":
            return self.t_list[idx]
        if self.t_rule == "max_half":
            return (n - 1) // 2
        if self.t_rule == "max_third":
            return (n - 1) // 3
        eps = self.epsilon
        if not eps:
            raise ConfigError("max_eps t rule needs epsilon")
        return int((1 - eps) * n)


def _default_t_rule(protocol: str) -> str:
    regime = PROTOCOLS[protocol].regime
    return {"half": "max_half", "one_minus_eps": "max_eps",
            "third_sync_ef": "max_third", "third_async": "max_third"}[regime]


def run_cell(cell: dict) -> dict:
    spec = PROTOCOLS[cell["protocol"]]
    try:
        params = SessionParams(
            n=cell["n"], t=cell["t"], l=cell["l"], k=cell["k"],
            threshold_regime=spec.regime, epsilon=cell["epsilon"],
        )
    except ValueError as exc:
        raise ConfigError(f"cell {cell['protocol']} n={cell['n']} t={cell['t']}: {exc}")
    scripts = {s.name: s for s in adversary_battery()}
    inputs = build_inputs(spec.kind, params, cell["seed"], unanimity="all")
    result = run(cell["protocol"], params, inputs, adversary=scripts[cell["adversary"]],
                 seed=cell["seed"], oracle_impl=cell["oracles"],
                 acc_scheme=cell["accumulator"])
    metrics = result.metrics
    return {
        "cell": {k: cell[k] for k in ("protocol", "n", "t", "l", "adversary", "seed")},
        "honest_bits": metrics.honest_bits_total,
        "oracle_bits": metrics.oracle_bits(),
        "rounds": metrics.rounds_or_events_elapsed,
        "metrics_json": metrics.to_json(),
    }


def _cell_filename(cell: dict) -> str:
    return (f"{cell['protocol']}_n{cell['n']}_t{cell['t']}_l{cell['l']}"
            f"_{cell['adversary']}_s{cell['seed']}.json")


def cmd_run(args: argparse.Namespace) -> int:
    config = ExperimentConfig.load(args.config, args)
    cells = config.cells()
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            rows = list(pool.map(run_cell, cells))
    else:
        rows = [run_cell(c) for c in cells]
    config.out.mkdir(parents=True, exist_ok=True)
    for cell, row in zip(cells, rows):
        (config.out / _cell_filename(cell)).write_text(row["metrics_json"])
    rows.sort(key=lambda r: (r["cell"]["protocol"], r["cell"]["n"], r["cell"]["t"],
                             r["cell"]["l"], r["cell"]["adversary"], r["cell"]["seed"]))
    csv_path = config.out / "aggregate.csv"
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            cell = row["cell"]
            writer.writerow([
                cell["protocol"], cell["n"], cell["t"], cell["l"],
                cell["adversary"], cell["seed"],
                row["honest_bits"], row["oracle_bits"], row["rounds"],
            ])
    print(f"wrote {len(rows)} cells to {config.out} (aggregate.csv)")
    return 0


def cmd_check(args: argparse.Namespace) -> int:
    if args.suite not in SUITES:
        print(f"unknown suite {args.suite!r}; choose from {sorted(SUITES)}",
              file=sys.stderr)
        return 2
    kwargs = {}
    if args.suite.startswith("protocols"):
        kwargs = {"seeds": args.seeds, "jobs": args.jobs}
    report = SUITES[args.suite](**kwargs)
    print(json.dumps(report.to_dict(), sort_keys=True))
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bbext",
                                     description="long-message agreement experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="execute a parameter sweep")
    p_run.add_argument("--config", help="JSON experiment config")
    p_run.add_argument("--protocol")
    p_run.add_argument("--n", help="comma-separated party counts")
    p_run.add_argument("--l", help="comma-separated input lengths in bits")
    p_run.add_argument("--t", help="comma-separated explicit t per n")
    p_run.add_argument("--seed", help="comma-separated seeds")
    p_run.add_argument("--adversary", help="comma-separated script names")
    p_run.add_argument("--oracle", action="append", help="kind=ideal|concrete")
    p_run.add_argument("--acc", choices=["hash_tree", "bilinear_emulated"])
    p_run.add_argument("--epsilon", type=float)
    p_run.add_argument("--out")
    p_run.add_argument("--jobs", type=int, default=1)
    p_run.set_defaults(func=cmd_run)
    p_check = sub.add_parser("check", help="run a property suite")
    p_check.add_argument("suite")
    p_check.add_argument("--seeds", type=int, default=100)
    p_check.add_argument("--jobs", type=int, default=1)
    p_check.set_defaults(func=cmd_check)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
