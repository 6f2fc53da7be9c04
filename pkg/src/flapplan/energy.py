"""Maneuver energy cost and its accumulation along trajectories."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .dynamics.types import DomainError, Maneuver


@dataclass(frozen=True)
class EnergyModel:
    """Power draw K_aero * f**3 + c_r.

    ``K_aero`` in W/Hz^3 covers flapping; ``c_r`` in W is the residual load
    (electronics, tail servo) paid in every mode.
    """

    K_aero: float = 2.5
    c_r: float = 5.0

    def __post_init__(self):
        if self.K_aero < 0 or self.c_r < 0:
            raise DomainError("K_aero and c_r must be >= 0")

    def power(self, f: float) -> float:
        return self.K_aero * f ** 3 + self.c_r


DEFAULT_ENERGY = EnergyModel()


def maneuver_energy(maneuver: Maneuver, duration: float, model: EnergyModel = DEFAULT_ENERGY) -> float:
    """Energy in W*s for holding ``maneuver`` during ``duration`` seconds."""
    if duration < 0:
        raise DomainError(f"duration must be >= 0, got {duration}")
    return duration * (model.K_aero * maneuver.f ** 3 + model.c_r)


def trajectory_energy(segments: Iterable[tuple[Maneuver, float]],
                      model: EnergyModel = DEFAULT_ENERGY) -> float:
    total = 0.0
    for maneuver, duration in segments:
        total += maneuver_energy(maneuver, duration, model)
    return total
