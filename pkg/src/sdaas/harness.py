"""Experiment driver: Fixed vs Adaptive on one network, grouped energy, and timing."""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
import statistics
import time
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, TextIO

from sdaas.aero import AeroModelConfig, FormationTables
from sdaas.errors import ValidationError
from sdaas.network import EDGES_FILE, NODES_FILE, SkywayNetwork, gen_network, load_network
from sdaas.selection import (
    Mode,
    SegmentVerdict,
    SelectionReport,
    Swarm,
    adaptive_select,
    compare_reports,
    fixed_select,
)
from sdaas.wind import SpeedDistribution, load_wind, synth_wind

log = logging.getLogger(__name__)

GROUPED_HEADER = ("group_key", "mode", "mean_aero_wh", "count")
TIMING_HEADER = ("nodes", "segments", "mode", "median_ms", "reps")

SELECTORS: dict[Mode, Callable[..., SelectionReport]] = {
    Mode.FIXED: fixed_select,
    Mode.ADAPTIVE: adaptive_select,
}


@dataclass
class ExperimentConfig:
    node_count: int = 2732
    network_seed: int = 42
    network_dir: str | None = None
    wind_seed: int = 42
    wind_file: str | None = None
    wind_dist: str = "uniform"
    wind_min_mps: float = 0.0
    wind_max_mps: float = 13.8
    battery_capacity_mah: float = 4480.0
    voltage_v: float = 15.2
    battery_level_pct: float = 100.0
    payload_kg: float = 0.0
    base_power_w: float = 180.0
    drone_speed_mps: float = 15.6
    power_floor_w: float = 0.0
    tables_file: str | None = None
    group_by: str = "distance"
    bin_width_m: float = 200.0
    bench_sizes: list[int] = field(default_factory=list)
    reps: int = 5
    threads: int = 1

    def __post_init__(self):
        if self.group_by not in ("distance", "wind"):
            raise ValidationError(f"group_by must be 'distance' or 'wind', got {self.group_by!r}")
        if not self.bin_width_m > 0:
            raise ValidationError("bin width must be > 0")
        if any(b <= a for a, b in zip(self.bench_sizes, self.bench_sizes[1:])):
            raise ValidationError("benchmark sizes must be strictly increasing")
        if any(n < 2 for n in self.bench_sizes):
            raise ValidationError("benchmark sizes must be >= 2 nodes")
        if self.reps < 1:
            raise ValidationError("reps must be >= 1")
        if self.threads < 1:
            raise ValidationError("threads must be >= 1")

    @classmethod
    def from_json(cls, path: str | Path, **overrides) -> "ExperimentConfig":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(data, dict):
            raise ValidationError(f"{path}: config must be a JSON object")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"{path}: unknown config field(s) {sorted(unknown)}")
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**data)

    def swarm(self) -> Swarm:
        return Swarm.uniform(
            battery_capacity_mah=self.battery_capacity_mah,
            voltage_v=self.voltage_v,
            battery_level_pct=self.battery_level_pct,
            payload_kg=self.payload_kg,
            base_power_w=self.base_power_w,
        )

    def aero(self) -> AeroModelConfig:
        kwargs = {}
        if self.tables_file:
            kwargs["tables"] = FormationTables.from_path(self.tables_file)
        return AeroModelConfig(self.drone_speed_mps, self.power_floor_w, **kwargs)

    def speed_dist(self) -> SpeedDistribution:
        return SpeedDistribution(self.wind_dist, self.wind_min_mps, self.wind_max_mps)

    def network(self, node_count: int | None = None) -> SkywayNetwork:
        """The wind-annotated network; ``node_count`` forces a generated one."""
        if node_count is None and self.network_dir:
            d = Path(self.network_dir)
            net = load_network(d / NODES_FILE, d / EDGES_FILE)
        else:
            net = gen_network(node_count or self.node_count, self.network_seed)
        if self.wind_file and node_count is None:
            return net.with_wind(load_wind(self.wind_file))
        return net.with_wind(synth_wind(net, self.wind_seed, self.speed_dist()))


@dataclass(frozen=True)
class GroupedEnergyRow:
    group_key: float | int
    mode: Mode
    mean_aero_wh: float
    count: int


@dataclass(frozen=True)
class TimingRow:
    nodes: int
    segments: int
    mode: Mode
    median_ms: float
    reps: int


@dataclass
class ExperimentResult:
    fixed: SelectionReport
    adaptive: SelectionReport
    grouped: list[GroupedEnergyRow]
    timing: list[TimingRow]


def distance_key(bin_width_m: float) -> Callable[[SegmentVerdict], float]:
    def key(v: SegmentVerdict) -> float:
        return (v.length_m // bin_width_m) * bin_width_m

    return key


def beaufort_key(v: SegmentVerdict) -> int:
    return v.beaufort


def group_energy(
    reports: Iterable[SelectionReport],
    key: Callable[[SegmentVerdict], float | int],
) -> list[GroupedEnergyRow]:
    """Mean swarm aero energy of the selected segments, per group and mode.

    Rejected segments are left out; empty groups emit no row.
    """
    sums: dict[tuple, list[float]] = defaultdict(list)
    order = {Mode.FIXED: 0, Mode.ADAPTIVE: 1}
    for report in reports:
        for v in report.verdicts:
            if v.selected:
                sums[key(v), report.mode].append(v.aero_wh)
    rows = [
        GroupedEnergyRow(k, mode, sum(vals) / len(vals), len(vals))
        for (k, mode), vals in sums.items()
    ]
    rows.sort(key=lambda r: (r.group_key, order[r.mode]))
    return rows


def _fmt_key(key: float | int) -> str:
    return str(key) if isinstance(key, int) else f"{key:.6f}"


def write_grouped(rows: Iterable[GroupedEnergyRow], dest: str | Path | TextIO) -> None:
    if not isinstance(dest, (str, Path)):
        _write_grouped(rows, dest)
        return
    with open(dest, "w", newline="", encoding="utf-8") as fh:
        _write_grouped(rows, fh)


def _write_grouped(rows: Iterable[GroupedEnergyRow], fh: TextIO) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(GROUPED_HEADER)
    for r in rows:
        w.writerow([_fmt_key(r.group_key), r.mode.value, f"{r.mean_aero_wh:.6f}", r.count])


def read_grouped(path: str | Path) -> list[GroupedEnergyRow]:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != GROUPED_HEADER:
            raise ValidationError(f"{path}: expected header {','.join(GROUPED_HEADER)}")
        for r in reader:
            raw = r["group_key"]
            key = float(raw) if "." in raw else int(raw)
            count = int(r["count"])
            if count <= 0:
                raise ValidationError(f"{path}: line {reader.line_num}: empty group emitted")
            out.append(GroupedEnergyRow(key, Mode(r["mode"]), float(r["mean_aero_wh"]), count))
    return out


def write_timing(rows: Iterable[TimingRow], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TIMING_HEADER)
        for r in rows:
            w.writerow([r.nodes, r.segments, r.mode.value, f"{r.median_ms:.6f}", r.reps])


def read_timing(path: str | Path) -> list[TimingRow]:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != TIMING_HEADER:
            raise ValidationError(f"{path}: expected header {','.join(TIMING_HEADER)}")
        for r in reader:
            out.append(TimingRow(int(r["nodes"]), int(r["segments"]), Mode(r["mode"]), float(r["median_ms"]), int(r["reps"])))
    return out


def benchmark(config: ExperimentConfig) -> list[TimingRow]:
    """Median wall time of each selection mode over ``reps`` runs per network size."""
    swarm, aero = config.swarm(), config.aero()
    rows = []
    for size in config.bench_sizes:
        net = config.network(node_count=size)
        for mode, select in SELECTORS.items():
            samples = []
            for _ in range(config.reps):
                t0 = time.perf_counter()
                select(net.segments, swarm, aero, threads=config.threads)
                samples.append((time.perf_counter() - t0) * 1000.0)
            rows.append(TimingRow(size, len(net.segments), mode, statistics.median(samples), config.reps))
            log.info("bench nodes=%d mode=%s median=%.2f ms", size, mode.value, rows[-1].median_ms)
    return rows


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    net = config.network()
    swarm, aero = config.swarm(), config.aero()
    fixed = fixed_select(net.segments, swarm, aero, threads=config.threads)
    adaptive = adaptive_select(net.segments, swarm, aero, threads=config.threads)
    key = distance_key(config.bin_width_m) if config.group_by == "distance" else beaufort_key
    grouped = group_energy([fixed, adaptive], key)
    cmp = compare_reports(fixed, adaptive)
    log.info(
        "fixed formation %s; adaptive aero <= fixed on %d/%d segments (%d strictly), per-drone on %d",
        fixed.fixed_formation.value, cmp.aero_not_worse, cmp.segments, cmp.aero_strictly_better,
        cmp.per_drone_not_worse,
    )
    return ExperimentResult(fixed, adaptive, grouped, benchmark(config))
