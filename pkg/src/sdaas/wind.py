"""Beaufort binning and seeded per-segment wind synthesis."""

from __future__ import annotations

import bisect
import csv
import enum
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Mapping

import numpy as np

from sdaas.errors import ValidationError

if TYPE_CHECKING:
    from sdaas.network import SkywayNetwork

MAX_SAFE_SPEED_MPS = 13.8

# Lower edges of Beaufort 1..6; bins are [lower, upper) except B6 which
# closes at the safety ceiling.
_BEAUFORT_LOWER_EDGES = (0.5, 1.6, 3.4, 5.5, 8.0, 10.8)

# Representative speed per Beaufort bin, used for sweeps.
BEAUFORT_REPRESENTATIVE_SPEEDS = (0.3, 1.0, 2.5, 4.5, 7.0, 9.35, 13.0)


class WindDirection(enum.Enum):
    """Wind direction relative to the swarm's heading. No tailwind is modelled."""

    FRONT = "FRONT"
    RIGHT = "RIGHT"
    LEFT = "LEFT"

    @classmethod
    def parse(cls, text: str) -> "WindDirection":
        try:
            return cls(text.strip().upper())
        except ValueError:
            raise ValidationError(f"unknown wind direction {text!r}") from None


# Declaration order doubles as the tie-break order for the majority direction.
DIRECTIONS = tuple(WindDirection)


def beaufort_from_speed(speed_mps: float) -> int:
    """Map a wind speed in m/s to a Beaufort number in 0..6."""
    if not (0.0 <= speed_mps <= MAX_SAFE_SPEED_MPS):
        raise ValidationError(
            f"wind speed {speed_mps} m/s outside flyable range [0, {MAX_SAFE_SPEED_MPS}]"
        )
    return bisect.bisect_right(_BEAUFORT_LOWER_EDGES, speed_mps)


@dataclass(frozen=True)
class WindCondition:
    speed_mps: float
    direction: WindDirection
    beaufort: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "beaufort", beaufort_from_speed(self.speed_mps))


@dataclass(frozen=True)
class SpeedDistribution:
    """Wind speed distribution for synthesis.

    ``kind`` is ``"uniform"`` (on ``[low, high]``) or ``"constant"`` (always ``low``).
    """

    kind: str = "uniform"
    low: float = 0.0
    high: float = MAX_SAFE_SPEED_MPS

    def __post_init__(self):
        if self.kind not in ("uniform", "constant"):
            raise ValidationError(f"unknown speed distribution {self.kind!r}")
        if not (0.0 <= self.low <= self.high <= MAX_SAFE_SPEED_MPS):
            raise ValidationError(
                f"speed bounds must satisfy 0 <= low <= high <= {MAX_SAFE_SPEED_MPS}"
            )

    def sample(self, u: float) -> float:
        if self.kind == "constant":
            return self.low
        return self.low + u * (self.high - self.low)


def draw_wind(seed: int, segment_id: int, speed_dist: SpeedDistribution) -> WindCondition:
    """Wind for one segment. Keyed by (seed, segment_id) only."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, segment_id]))
    u_speed, u_dir = rng.random(2)
    # quantized so the CSV form round-trips exactly
    speed = round(speed_dist.sample(float(u_speed)), 6)
    direction = DIRECTIONS[min(int(u_dir * 3), 2)]
    return WindCondition(speed, direction)


def synth_wind(
    network: "SkywayNetwork",
    seed: int,
    speed_dist: SpeedDistribution | None = None,
) -> dict[int, WindCondition]:
    if not network.segments:
        raise ValidationError("cannot synthesize wind for a network without segments")
    if seed < 0:
        raise ValidationError("seed must be a non-negative integer")
    speed_dist = speed_dist or SpeedDistribution()
    return {s.id: draw_wind(seed, s.id, speed_dist) for s in network.segments}


WIND_HEADER = ("edge_id", "wind_speed_mps", "wind_dir")


def save_wind(wind: Mapping[int, WindCondition], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(WIND_HEADER)
        for edge_id in sorted(wind):
            w = wind[edge_id]
            writer.writerow([edge_id, f"{w.speed_mps:.6f}", w.direction.value])


def load_wind(path: str | Path) -> dict[int, WindCondition]:
    wind: dict[int, WindCondition] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != WIND_HEADER:
            raise ValidationError(f"{path}: expected header {','.join(WIND_HEADER)}")
        for row in reader:
            try:
                edge_id = int(row["edge_id"])
                speed = float(row["wind_speed_mps"])
            except ValueError as exc:
                raise ValidationError(f"{path}: line {reader.line_num}: {exc}") from None
            if edge_id in wind:
                raise ValidationError(f"{path}: duplicate edge_id {edge_id}")
            wind[edge_id] = WindCondition(speed, WindDirection.parse(row["wind_dir"]))
    return wind
