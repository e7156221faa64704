"""Per-segment energy accounting and the Fixed / Adaptive service selection algorithms."""

from __future__ import annotations

import csv
import enum
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

from sdaas.aero import SWARM_SIZE, AeroModelConfig, Formation, select_formation, slot_power_terms
from sdaas.errors import MissingWindError, ValidationError
from sdaas.network import SkywaySegment
from sdaas.wind import DIRECTIONS, WindDirection

DEFAULT_CAPACITY_MAH = 4480.0
DEFAULT_VOLTAGE_V = 15.2
# Battery energy over a ~23 min hover-and-cruise endurance.
DEFAULT_BASE_POWER_W = 180.0


@dataclass(frozen=True)
class Drone:
    id: int
    battery_capacity_mah: float = DEFAULT_CAPACITY_MAH
    voltage_v: float = DEFAULT_VOLTAGE_V
    battery_level_pct: float = 100.0
    payload_kg: float = 0.0  # carried only; the energy model ignores payload
    base_power_w: float = DEFAULT_BASE_POWER_W

    def __post_init__(self):
        if not self.battery_wh > 0:
            raise ValidationError(f"drone {self.id}: battery energy must be positive")
        if not (0.0 < self.battery_level_pct <= 100.0):
            raise ValidationError(f"drone {self.id}: battery_level_pct must be in (0, 100]")
        if self.payload_kg < 0:
            raise ValidationError(f"drone {self.id}: payload_kg must be >= 0")
        if self.base_power_w < 0:
            raise ValidationError(f"drone {self.id}: base_power_w must be >= 0")

    @property
    def battery_wh(self) -> float:
        return self.battery_capacity_mah * self.voltage_v / 1000.0


@dataclass(frozen=True)
class Swarm:
    drones: tuple[Drone, ...]
    current_node: int = 0

    def __post_init__(self):
        object.__setattr__(self, "drones", tuple(self.drones))
        if len(self.drones) != SWARM_SIZE:
            raise ValidationError(f"a swarm has exactly {SWARM_SIZE} drones, got {len(self.drones)}")
        if len({d.id for d in self.drones}) != SWARM_SIZE:
            raise ValidationError("drone ids within a swarm must be unique")

    @classmethod
    def uniform(cls, current_node: int = 0, **drone_kwargs) -> "Swarm":
        return cls(tuple(Drone(i, **drone_kwargs) for i in range(1, SWARM_SIZE + 1)), current_node)


@dataclass(frozen=True)
class EnergyBreakdown:
    e_fr_wh: float
    e_drag_wh: float
    e_updown_wh: float
    total_wh: float
    pct_of_battery: float

    @property
    def aero_wh(self) -> float:
        return self.e_drag_wh + self.e_updown_wh


class Mode(enum.Enum):
    FIXED = "fixed"
    ADAPTIVE = "adaptive"


@dataclass(frozen=True)
class SegmentVerdict:
    segment_id: int
    formation: Formation
    per_drone: tuple[EnergyBreakdown, ...]
    selected: bool
    reject_reason: str | None
    travel_time_s: float
    length_m: float
    beaufort: int

    @property
    def max_drone_pct(self) -> float:
        return max(e.pct_of_battery for e in self.per_drone)

    @property
    def aero_wh(self) -> float:
        """Swarm-mean drag plus upwash/downwash energy."""
        return sum(e.aero_wh for e in self.per_drone) / len(self.per_drone)


@dataclass(frozen=True)
class SelectionReport:
    mode: Mode
    fixed_formation: Formation | None
    verdicts: tuple[SegmentVerdict, ...]
    selected_ids: frozenset[int] = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "selected_ids", frozenset(v.segment_id for v in self.verdicts if v.selected))

    def verdict(self, segment_id: int) -> SegmentVerdict:
        for v in self.verdicts:
            if v.segment_id == segment_id:
                return v
        raise KeyError(segment_id)


def segment_energy(
    segment: SkywaySegment,
    swarm: Swarm,
    formation: Formation,
    config: AeroModelConfig | None = None,
) -> tuple[EnergyBreakdown, ...]:
    """Energy each drone spends crossing ``segment`` in ``formation``, slot order."""
    config = config or AeroModelConfig()
    if segment.wind is None:
        raise MissingWindError(f"edge {segment.id} has no wind assigned")
    hours = segment.length_m / config.drone_speed_mps / 3600.0
    powers = slot_power_terms(formation, segment.wind.direction, segment.wind.beaufort, config)
    out = []
    for drone, (drag_w, updown_w) in zip(swarm.drones, powers):
        e_fr = drone.base_power_w * hours
        e_drag = drag_w * hours
        e_updown = updown_w * hours
        total = e_fr + e_drag + e_updown
        out.append(EnergyBreakdown(e_fr, e_drag, e_updown, total, total / drone.battery_wh * 100.0))
    return tuple(out)


def _judge(segment: SkywaySegment, swarm: Swarm, formation: Formation, config: AeroModelConfig) -> SegmentVerdict:
    per_drone = segment_energy(segment, swarm, formation, config)
    reason = None
    selected = True
    for slot, (drone, e) in enumerate(zip(swarm.drones, per_drone), start=1):
        if e.pct_of_battery > drone.battery_level_pct:
            selected = False
            reason = (
                f"slot {slot} (drone {drone.id}) needs {e.pct_of_battery:.6f}% "
                f"of battery, has {drone.battery_level_pct:.6f}%"
            )
            break
    if selected:
        at_limit = [
            slot
            for slot, (drone, e) in enumerate(zip(swarm.drones, per_drone), start=1)
            if e.pct_of_battery == drone.battery_level_pct
        ]
        if at_limit:
            reason = f"boundary: slot {at_limit[0]} uses exactly its available battery"
    return SegmentVerdict(
        segment_id=segment.id,
        formation=formation,
        per_drone=per_drone,
        selected=selected,
        reject_reason=reason,
        travel_time_s=segment.length_m / config.drone_speed_mps,
        length_m=segment.length_m,
        beaufort=segment.wind.beaufort,
    )


def _check_inputs(segments: Sequence[SkywaySegment]) -> list[SkywaySegment]:
    segments = sorted(segments, key=lambda s: s.id)
    if not segments:
        raise ValidationError("no SDaaS candidates to select from")
    for s in segments:
        if s.wind is None:
            raise MissingWindError(f"edge {s.id} has no wind assigned")
    return segments


def _judge_all(
    segments: list[SkywaySegment],
    choose: Callable[[SkywaySegment], Formation],
    swarm: Swarm,
    config: AeroModelConfig,
    threads: int,
) -> tuple[SegmentVerdict, ...]:
    def run(chunk: Iterable[SkywaySegment]) -> list[SegmentVerdict]:
        return [_judge(s, swarm, choose(s), config) for s in chunk]

    if threads <= 1 or len(segments) < 2 * threads:
        return tuple(run(segments))
    size = -(-len(segments) // threads)
    chunks = [segments[i : i + size] for i in range(0, len(segments), size)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        # map preserves chunk order, so the result stays sorted by segment id
        return tuple(v for part in pool.map(run, chunks) for v in part)


def majority_direction(directions: Iterable[WindDirection]) -> WindDirection:
    """Most frequent direction; ties go to Front, then Right, then Left."""
    counts = Counter(directions)
    return max(DIRECTIONS, key=lambda d: (counts[d], -DIRECTIONS.index(d)))


def fixed_select(
    segments: Sequence[SkywaySegment],
    swarm: Swarm,
    config: AeroModelConfig | None = None,
    threads: int = 1,
) -> SelectionReport:
    """One formation, picked from the averaged wind, flown over every segment."""
    config = config or AeroModelConfig()
    segments = _check_inputs(segments)
    avg_speed = sum(s.wind.speed_mps for s in segments) / len(segments)
    direction = majority_direction(s.wind.direction for s in segments)
    formation = select_formation(avg_speed, direction, config.tables)
    verdicts = _judge_all(segments, lambda s: formation, swarm, config, threads)
    return SelectionReport(Mode.FIXED, formation, verdicts)


def adaptive_select(
    segments: Sequence[SkywaySegment],
    swarm: Swarm,
    config: AeroModelConfig | None = None,
    threads: int = 1,
) -> SelectionReport:
    """Re-pick the formation for each segment from that segment's own wind."""
    config = config or AeroModelConfig()
    segments = _check_inputs(segments)

    def choose(s: SkywaySegment) -> Formation:
        return select_formation(s.wind.speed_mps, s.wind.direction, config.tables)

    verdicts = _judge_all(segments, choose, swarm, config, threads)
    return SelectionReport(Mode.ADAPTIVE, None, verdicts)


REPORT_HEADER = ("edge_id", "mode", "formation", "selected", "travel_time_s", "max_drone_pct", "reject_reason")
DETAIL_HEADER = ("edge_id", "slot", "e_fr_wh", "e_drag_wh", "e_updown_wh", "total_wh", "pct")


def write_report(report: SelectionReport, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_HEADER)
        for v in report.verdicts:
            w.writerow(
                [
                    v.segment_id,
                    report.mode.value,
                    v.formation.value,
                    "true" if v.selected else "false",
                    f"{v.travel_time_s:.6f}",
                    f"{v.max_drone_pct:.6f}",
                    v.reject_reason or "",
                ]
            )


def write_detail(report: SelectionReport, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DETAIL_HEADER)
        for v in report.verdicts:
            for slot, e in enumerate(v.per_drone, start=1):
                w.writerow(
                    [v.segment_id, slot]
                    + [f"{x:.6f}" for x in (e.e_fr_wh, e.e_drag_wh, e.e_updown_wh, e.total_wh, e.pct_of_battery)]
                )


def read_report(path: str | Path) -> list[dict]:
    """Parse a report CSV back into typed rows, checking its schema."""
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != REPORT_HEADER:
            raise ValidationError(f"{path}: expected header {','.join(REPORT_HEADER)}")
        for r in reader:
            if r["selected"] not in ("true", "false"):
                raise ValidationError(f"{path}: line {reader.line_num}: bad selected flag {r['selected']!r}")
            rows.append(
                {
                    "edge_id": int(r["edge_id"]),
                    "mode": Mode(r["mode"]),
                    "formation": Formation.parse(r["formation"]),
                    "selected": r["selected"] == "true",
                    "travel_time_s": float(r["travel_time_s"]),
                    "max_drone_pct": float(r["max_drone_pct"]),
                    "reject_reason": r["reject_reason"] or None,
                }
            )
    return rows


def read_detail(path: str | Path) -> list[dict]:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != DETAIL_HEADER:
            raise ValidationError(f"{path}: expected header {','.join(DETAIL_HEADER)}")
        for r in reader:
            row = {k: float(r[k]) for k in DETAIL_HEADER[2:]}
            row["edge_id"] = int(r["edge_id"])
            row["slot"] = int(r["slot"])
            rows.append(row)
    return rows


@dataclass(frozen=True)
class ModeComparison:
    """Segment-by-segment comparison of an Adaptive report against a Fixed one."""

    segments: int
    aero_not_worse: int  # swarm-mean aero energy adaptive <= fixed
    aero_strictly_better: int
    per_drone_not_worse: int  # every slot's total adaptive <= fixed
    fixed_only_selected: frozenset[int]
    adaptive_only_selected: frozenset[int]


def compare_reports(fixed: SelectionReport, adaptive: SelectionReport) -> ModeComparison:
    if [v.segment_id for v in fixed.verdicts] != [v.segment_id for v in adaptive.verdicts]:
        raise ValidationError("reports cover different segments")
    not_worse = strict = per_drone = 0
    for f, a in zip(fixed.verdicts, adaptive.verdicts):
        fa, aa = f.aero_wh, a.aero_wh
        not_worse += aa <= fa
        strict += aa < fa
        per_drone += all(x.total_wh <= y.total_wh for x, y in zip(a.per_drone, f.per_drone))
    return ModeComparison(
        segments=len(fixed.verdicts),
        aero_not_worse=not_worse,
        aero_strictly_better=strict,
        per_drone_not_worse=per_drone,
        fixed_only_selected=fixed.selected_ids - adaptive.selected_ids,
        adaptive_only_selected=adaptive.selected_ids - fixed.selected_ids,
    )
