"""Command-line interface: full sweeps, single-cell summaries, the Monte
Carlo quadrature cross-check, and the tiny-population exhaustive oracle.

Exit codes: 0 success, 1 configuration error, 2 I/O error.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from .harness import (
    ConfigError,
    ExperimentConfig,
    config_from_dict,
    emit,
    load_config,
    run_experiment,
    tiny_oracle,
    _rng,
    _run_cell,
)
from .secrecy import monte_carlo_eavesdrop_capacity, total_eavesdrop_capacity
from .strategies import Strategy


def _load(config_path: str | None) -> ExperimentConfig:
    if config_path is None:
        return config_from_dict({})
    return load_config(config_path)


def _cmd_run(args) -> int:
    config = _load(args.config)
    out = args.out or config.output_path
    records, traces = run_experiment(config, parallel=args.parallel, trace=args.trace)
    emit(records, out, args.format)
    if args.trace:
        import json

        trace_path = str(out) + ".trace.jsonl"
        with open(trace_path, "w") as fh:
            for row in traces:
                fh.write(json.dumps(row) + "\n")
        print(f"wrote {len(traces)} trace rows to {trace_path}")
    print(f"wrote {len(records)} records to {out}")
    return 0


def _cmd_single(args) -> int:
    config = _load(args.config)
    try:
        strategy = Strategy(args.strategy)
    except ValueError:
        raise ConfigError(f"unknown strategy {args.strategy!r}")
    from dataclasses import replace
    from .strategies import StrategyKind

    config = replace(
        config,
        strategies=(StrategyKind(strategy),),
        population_sizes=(args.devices,),
        replications=1,
    )
    records, _ = _run_cell(config, args.devices, args.replication, trace=False)
    for r in records:
        print(f"strategy={r.strategy} N={r.n_devices} replication={r.replication}")
        print(f"  rounds={r.round} converged={r.converged}")
        print(f"  avg_utility={r.avg_utility:.6g} normalized={r.normalized_utility:.6g}")
        print(f"  mean_risk_probability={r.mean_risk_probability:.6g}")
        print(f"  mean_queuing_delay={r.mean_queuing_delay:.6g} s")
        print(f"  shares={[round(s, 5) for s in r.shares]}")
    return 0


def _cmd_validate(args) -> int:
    config = _load(args.config)
    quad_val = total_eavesdrop_capacity(args.satellite, config.geometry, config.channel, config.quad)
    rng = _rng(config.master_seed, 999, args.satellite)
    mc_val = monte_carlo_eavesdrop_capacity(
        config.geometry, config.channel, args.samples, rng, args.satellite
    )
    rel = abs(mc_val - quad_val) / quad_val if quad_val else 0.0
    print(f"quadrature eavesdrop capacity: {quad_val:.6g} bit/s")
    print(f"monte carlo ({args.samples} samples): {mc_val:.6g} bit/s")
    print(f"relative difference: {rel:.4%}")
    return 0


def _cmd_oracle(args) -> int:
    if args.devices > 12 or args.sats > 3:
        raise ConfigError("oracle limited to --devices <= 12 and --sats <= 3")
    config = _load(args.config)
    report = tiny_oracle(config, args.devices, args.sats)
    print(f"exhaustive optimum counts: {report['exhaustive_counts']}")
    print(f"exhaustive optimum utility: {report['exhaustive_utility']:.9g}")
    print(f"relaxed optimum shares: {[round(s, 5) for s in report['relaxed_shares']]}")
    print(f"relaxed optimum utility: {report['relaxed_utility']:.9g}")
    print(f"evolutionary equilibrium utility: {report['evolutionary_utility']:.9g}")
    print(f"granularity bound: {report['granularity_bound']:.9g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sagin-sim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the full strategy x population sweep")
    p_run.add_argument("--config", default=None)
    p_run.add_argument("--out", default=None)
    p_run.add_argument("--format", choices=["csv", "jsonl"], default="csv")
    p_run.add_argument("--trace", action="store_true")
    p_run.add_argument("--parallel", type=int, default=1)
    p_run.set_defaults(func=_cmd_run)

    p_single = sub.add_parser("single", help="run one strategy at one population size")
    p_single.add_argument("--config", default=None)
    p_single.add_argument("--strategy", required=True)
    p_single.add_argument("--devices", type=int, required=True)
    p_single.add_argument("--replication", type=int, default=0)
    p_single.set_defaults(func=_cmd_single)

    p_val = sub.add_parser("validate", help="Monte Carlo vs quadrature eavesdrop-capacity check")
    p_val.add_argument("--config", default=None)
    p_val.add_argument("--samples", type=int, default=1_000_000)
    p_val.add_argument("--satellite", type=int, default=0)
    p_val.set_defaults(func=_cmd_validate)

    p_orc = sub.add_parser("oracle", help="tiny-population exhaustive optimum")
    p_orc.add_argument("--config", default=None)
    p_orc.add_argument("--devices", type=int, required=True)
    p_orc.add_argument("--sats", type=int, required=True)
    p_orc.set_defaults(func=_cmd_oracle)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
