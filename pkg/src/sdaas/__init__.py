"""Formation-aware selection of swarm drone delivery services over a skyway network."""

from sdaas.aero import AeroModelConfig, Formation, select_formation
from sdaas.errors import MissingWindError, ValidationError
from sdaas.network import SkywayNetwork, SkywayNode, SkywaySegment, gen_network, load_network, save_network
from sdaas.selection import Drone, Swarm, adaptive_select, fixed_select, segment_energy
from sdaas.wind import WindCondition, WindDirection, beaufort_from_speed, synth_wind

__all__ = [
    "AeroModelConfig",
    "Drone",
    "Formation",
    "MissingWindError",
    "SkywayNetwork",
    "SkywayNode",
    "SkywaySegment",
    "Swarm",
    "ValidationError",
    "WindCondition",
    "WindDirection",
    "adaptive_select",
    "beaufort_from_speed",
    "fixed_select",
    "gen_network",
    "load_network",
    "save_network",
    "segment_energy",
    "select_formation",
    "synth_wind",
]
