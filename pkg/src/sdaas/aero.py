"""Formation energy model calibrated on CFD drag and combined-power tables.

Per-drone aerodynamic power at Beaufort number ``B`` is

    P_i(B) = 2**(B - 5) * (D_i * v + U)

where ``D_i`` is the calibrated drag on slot ``i``, ``v`` the drone speed and
``U`` the per-drone upwash/downwash power: the tabulated combined power minus
the drag power of the tabulated average drag at the 15.6 m/s reference speed.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

from sdaas.errors import ValidationError
from sdaas.wind import DIRECTIONS, MAX_SAFE_SPEED_MPS, WindDirection

REF_SPEED_MPS = 15.6
REF_BEAUFORT = 5
SWARM_SIZE = 5
AVG_DRAG_TOLERANCE_N = 0.05

TABLES_HEADER = ("formation", "direction", "d1_n", "d2_n", "d3_n", "d4_n", "d5_n", "avg_n", "combined_w")


class Formation(enum.Enum):
    COLUMN = "COLUMN"
    FRONT = "FRONT"
    ECHELON = "ECHELON"
    VEE = "VEE"
    DIAMOND = "DIAMOND"

    @classmethod
    def parse(cls, text: str) -> "Formation":
        try:
            return cls(text.strip().upper())
        except ValueError:
            raise ValidationError(f"unknown formation {text!r}") from None


FORMATIONS = tuple(Formation)


@dataclass(frozen=True)
class FormationProfile:
    formation: Formation
    direction: WindDirection
    drone_drag_n: tuple[float, float, float, float, float]
    avg_drag_n: float
    combined_power_w: float

    def __post_init__(self):
        if len(self.drone_drag_n) != SWARM_SIZE:
            raise ValidationError(f"{self.formation.name}/{self.direction.name}: need 5 drag values")
        if any(d <= 0 for d in self.drone_drag_n) or self.avg_drag_n <= 0:
            raise ValidationError(f"{self.formation.name}/{self.direction.name}: drag must be positive")
        mean = sum(self.drone_drag_n) / SWARM_SIZE
        if abs(mean - self.avg_drag_n) > AVG_DRAG_TOLERANCE_N:
            raise ValidationError(
                f"{self.formation.name}/{self.direction.name}: avg_n {self.avg_drag_n} "
                f"disagrees with per-drone mean {mean:.3f}"
            )

    @property
    def updown_power_w(self) -> float:
        return self.combined_power_w - self.avg_drag_n * REF_SPEED_MPS


class FormationTables:
    """The 15 calibrated (formation, direction) profiles."""

    def __init__(self, profiles):
        self._profiles: dict[tuple[Formation, WindDirection], FormationProfile] = {}
        for p in profiles:
            key = (p.formation, p.direction)
            if key in self._profiles:
                raise ValidationError(f"duplicate table row {p.formation.name}/{p.direction.name}")
            self._profiles[key] = p
        missing = [(f, d) for f in FORMATIONS for d in DIRECTIONS if (f, d) not in self._profiles]
        if missing:
            f, d = missing[0]
            raise ValidationError(f"formation tables missing row {f.name}/{d.name}")

    def __getitem__(self, key: tuple[Formation, WindDirection]) -> FormationProfile:
        return self._profiles[key]

    def __iter__(self):
        return iter(self._profiles.values())

    @classmethod
    def from_csv_text(cls, text: str, source: str = "<tables>") -> "FormationTables":
        reader = csv.DictReader(io.StringIO(text))
        if tuple(reader.fieldnames or ()) != TABLES_HEADER:
            raise ValidationError(f"{source}: expected header {','.join(TABLES_HEADER)}")
        profiles = []
        for row in reader:
            try:
                drags = tuple(float(row[f"d{i}_n"]) for i in range(1, SWARM_SIZE + 1))
                profiles.append(
                    FormationProfile(
                        Formation.parse(row["formation"]),
                        WindDirection.parse(row["direction"]),
                        drags,
                        float(row["avg_n"]),
                        float(row["combined_w"]),
                    )
                )
            except ValueError as exc:
                raise ValidationError(f"{source}: line {reader.line_num}: {exc}") from None
        return cls(profiles)

    @classmethod
    def from_path(cls, path: str | Path) -> "FormationTables":
        return cls.from_csv_text(Path(path).read_text(encoding="utf-8"), str(path))


@lru_cache(maxsize=1)
def default_tables() -> FormationTables:
    text = resources.files("sdaas").joinpath("data/formation_tables.csv").read_text(encoding="utf-8")
    return FormationTables.from_csv_text(text, "formation_tables.csv")


@dataclass(frozen=True)
class AeroModelConfig:
    drone_speed_mps: float = REF_SPEED_MPS
    power_floor_w: float = 0.0
    tables: FormationTables = field(default_factory=default_tables, repr=False)

    ref_speed_mps = REF_SPEED_MPS
    ref_beaufort = REF_BEAUFORT

    def __post_init__(self):
        if not self.drone_speed_mps > 0:
            raise ValidationError("drone_speed_mps must be > 0")
        if self.power_floor_w < 0:
            raise ValidationError("power_floor_w must be >= 0")


def drag_power(drag_n: float, speed_mps: float) -> float:
    """Power in W needed to overcome ``drag_n`` newtons at ``speed_mps``."""
    if drag_n < 0 or speed_mps < 0:
        raise ValidationError("drag and speed must be non-negative")
    return drag_n * speed_mps


def beaufort_factor(beaufort: int) -> float:
    """Drag multiplier relative to the Beaufort 5 calibration: doubles per step."""
    if not (0 <= beaufort <= 6) or int(beaufort) != beaufort:
        raise ValidationError(f"Beaufort number must be an integer in 0..6, got {beaufort}")
    return 2.0 ** (int(beaufort) - REF_BEAUFORT)


def updown_power(formation: Formation, direction: WindDirection, tables: FormationTables | None = None) -> float:
    """Upwash/downwash power per drone; negative means net lift savings."""
    return (tables or default_tables())[formation, direction].updown_power_w


def select_formation(
    wind_speed_mps: float,
    direction: WindDirection,
    tables: FormationTables | None = None,
) -> Formation:
    """Formation with the least combined power for this wind.

    The Beaufort factor multiplies every formation alike, so only the
    direction matters; the speed is still range-checked.
    """
    if not (0.0 <= wind_speed_mps <= MAX_SAFE_SPEED_MPS):
        raise ValidationError(f"wind speed {wind_speed_mps} m/s outside [0, {MAX_SAFE_SPEED_MPS}]")
    tables = tables or default_tables()
    # FORMATIONS order breaks exact ties deterministically
    return min(FORMATIONS, key=lambda f: tables[f, direction].combined_power_w)


def _check_position(position: int) -> None:
    if not (1 <= position <= SWARM_SIZE) or int(position) != position:
        raise ValidationError(f"position must be in 1..{SWARM_SIZE}, got {position}")


def drone_power_terms(
    formation: Formation,
    direction: WindDirection,
    beaufort: int,
    position: int,
    config: AeroModelConfig,
) -> tuple[float, float]:
    """(drag, upwash/downwash) power for one slot after Beaufort scaling and the floor.

    When the floor binds, the upwash term absorbs the difference.
    """
    _check_position(position)
    factor = beaufort_factor(beaufort)
    profile = config.tables[formation, direction]
    drag = factor * drag_power(profile.drone_drag_n[position - 1], config.drone_speed_mps)
    updown = factor * profile.updown_power_w
    if drag + updown < config.power_floor_w:
        updown = config.power_floor_w - drag
    return drag, updown


@lru_cache(maxsize=4096)
def slot_power_terms(
    formation: Formation,
    direction: WindDirection,
    beaufort: int,
    config: AeroModelConfig,
) -> tuple[tuple[float, float], ...]:
    """``drone_power_terms`` for slots 1..5, memoized per wind class."""
    return tuple(drone_power_terms(formation, direction, beaufort, i, config) for i in range(1, SWARM_SIZE + 1))


def drone_aero_power(
    formation: Formation,
    direction: WindDirection,
    beaufort: int,
    position: int,
    config: AeroModelConfig | None = None,
) -> float:
    drag, updown = drone_power_terms(formation, direction, beaufort, position, config or AeroModelConfig())
    return drag + updown


def swarm_aero_power(
    formation: Formation,
    direction: WindDirection,
    beaufort: int,
    config: AeroModelConfig | None = None,
) -> float:
    """Mean aerodynamic power over the five slots."""
    config = config or AeroModelConfig()
    total = sum(drone_aero_power(formation, direction, beaufort, i, config) for i in range(1, SWARM_SIZE + 1))
    return total / SWARM_SIZE
