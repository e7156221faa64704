"""Command line entry point.

Exit status: 0 on success, 1 on invalid arguments or data, 2 on I/O failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from sdaas.errors import MissingWindError, ValidationError
from sdaas.harness import (
    ExperimentConfig,
    benchmark,
    beaufort_key,
    distance_key,
    group_energy,
    run_experiment,
    write_grouped,
    write_timing,
)
from sdaas.network import EDGES_FILE, NODES_FILE, gen_network, load_network, save_network
from sdaas.selection import Mode, adaptive_select, fixed_select, write_detail, write_report
from sdaas.wind import SpeedDistribution, save_wind, synth_wind

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _sizes(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _add_swarm_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("swarm and model")
    g.add_argument("--battery-mah", dest="battery_capacity_mah", type=float)
    g.add_argument("--voltage", dest="voltage_v", type=float)
    g.add_argument("--battery-level", dest="battery_level_pct", type=float)
    g.add_argument("--payload-kg", dest="payload_kg", type=float)
    g.add_argument("--base-power", dest="base_power_w", type=float)
    g.add_argument("--speed", dest="drone_speed_mps", type=float)
    g.add_argument("--power-floor", dest="power_floor_w", type=float)
    g.add_argument("--tables", dest="tables_file", help="override formation_tables.csv")
    g.add_argument("--threads", type=int)
    g.add_argument("--config", help="JSON experiment config; flags override it")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sdaas", description="Formation-aware SDaaS selection")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-network", help="generate a synthetic skyway network")
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("gen-wind", help="synthesize per-segment wind")
    p.add_argument("--network", required=True, help="network directory")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dist", choices=["uniform", "constant"], default="uniform")
    p.add_argument("--min-speed", type=float, default=0.0)
    p.add_argument("--max-speed", type=float, default=13.8)

    p = sub.add_parser("select", help="run one selection algorithm")
    p.add_argument("--mode", choices=[m.value for m in Mode], required=True)
    p.add_argument("--network", dest="network_dir", required=True)
    p.add_argument("--wind", dest="wind_file", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--detail", help="also write per-drone energy CSV")
    _add_swarm_flags(p)

    p = sub.add_parser("bench", help="time both algorithms over network sizes")
    p.add_argument("--sizes", dest="bench_sizes", type=_sizes, required=True)
    p.add_argument("--reps", type=int)
    p.add_argument("--seed", dest="network_seed", type=int)
    p.add_argument("--wind-seed", type=int)
    p.add_argument("--out", required=True)
    _add_swarm_flags(p)

    p = sub.add_parser("report", help="grouped energy of both algorithms")
    p.add_argument("--group-by", choices=["distance", "wind"])
    p.add_argument("--bin-width", dest="bin_width_m", type=float)
    p.add_argument("--network", dest="network_dir", help="network directory (default: generate)")
    p.add_argument("--wind", dest="wind_file")
    p.add_argument("--nodes", dest="node_count", type=int)
    p.add_argument("--seed", dest="network_seed", type=int)
    p.add_argument("--wind-seed", type=int)
    p.add_argument("--out", help="grouped CSV path (default: stdout)")
    p.add_argument("--timing-out", help="also benchmark --sizes and write timing CSV here")
    p.add_argument("--sizes", dest="bench_sizes", type=_sizes)
    p.add_argument("--reps", type=int)
    _add_swarm_flags(p)
    return parser


_CONFIG_FIELDS = {
    "battery_capacity_mah", "voltage_v", "battery_level_pct", "payload_kg", "base_power_w",
    "drone_speed_mps", "power_floor_w", "tables_file", "threads", "network_dir", "wind_file",
    "bench_sizes", "reps", "network_seed", "wind_seed", "node_count", "group_by", "bin_width_m",
}


def _config(args: argparse.Namespace) -> ExperimentConfig:
    overrides = {k: v for k, v in vars(args).items() if k in _CONFIG_FIELDS and v is not None}
    if args.config:
        return ExperimentConfig.from_json(args.config, **overrides)
    return ExperimentConfig(**overrides)


def _run(args: argparse.Namespace) -> None:
    if args.command == "gen-network":
        save_network(gen_network(args.nodes, args.seed, k=args.k), args.out)
    elif args.command == "gen-wind":
        d = Path(args.network)
        net = load_network(d / NODES_FILE, d / EDGES_FILE)
        dist = SpeedDistribution(args.dist, args.min_speed, args.max_speed)
        save_wind(synth_wind(net, args.seed, dist), args.out)
    elif args.command == "select":
        cfg = _config(args)
        net = cfg.network()
        select = fixed_select if args.mode == Mode.FIXED.value else adaptive_select
        report = select(net.segments, cfg.swarm(), cfg.aero(), threads=cfg.threads)
        write_report(report, args.out)
        if args.detail:
            write_detail(report, args.detail)
    elif args.command == "bench":
        cfg = _config(args)
        write_timing(benchmark(cfg), args.out)
    elif args.command == "report":
        cfg = _config(args)
        if args.timing_out:
            result = run_experiment(cfg)
            write_timing(result.timing, args.timing_out)
            grouped = result.grouped
        else:
            net = cfg.network()
            swarm, aero = cfg.swarm(), cfg.aero()
            reports = [sel(net.segments, swarm, aero, threads=cfg.threads) for sel in (fixed_select, adaptive_select)]
            key = distance_key(cfg.bin_width_m) if cfg.group_by == "distance" else beaufort_key
            grouped = group_energy(reports, key)
        if args.out:
            write_grouped(grouped, args.out)
        else:
            write_grouped(grouped, sys.stdout)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
        _run(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    except (ValidationError, MissingWindError) as exc:
        print(f"sdaas: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"sdaas: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


cli = main


if __name__ == "__main__":
    sys.exit(main())
