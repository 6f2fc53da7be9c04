"""Planned trajectories, goal metrics and their JSON / CSV forms."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .dynamics import (
    DEFAULT_INTEGRATOR,
    CharacteristicScales,
    FlightState,
    IntegratorConfig,
    Maneuver,
    VehicleParams,
    simulate,
)
from .dynamics.types import DomainError

FULL_STATE = "full-state"
POSITION = "position"
POSITION_BOX = "position-box"
METRICS = (FULL_STATE, POSITION, POSITION_BOX)


class NoSolutionError(Exception):
    """No tree node reached the goal region.

    ``best_distance`` is the smallest goal distance seen, in the units of the
    metric that was used (``inf`` when nothing was generated at all).
    """

    def __init__(self, message: str, best_distance: float = math.inf):
        super().__init__(message)
        self.best_distance = best_distance


def goal_distance(state: FlightState, target: FlightState, metric: str,
                  scales: CharacteristicScales) -> float:
    """Distance used for goal acceptance.

    ``full-state``: Euclidean norm over all six nondimensional components.
    ``position``: Euclidean distance in the XZ plane, meters.
    ``position-box``: Chebyshev distance in the XZ plane, meters.
    """
    if metric == FULL_STATE:
        return float(np.linalg.norm(state.as_array() - target.as_array()))
    dx = (state.x - target.x) * scales.L_c
    dz = (state.z - target.z) * scales.L_c
    if metric == POSITION:
        return math.hypot(dx, dz)
    if metric == POSITION_BOX:
        return max(abs(dx), abs(dz))
    raise DomainError(f"unknown metric {metric!r}; expected one of {METRICS}")


def acceptance_radius(tolerance: float, metric: str) -> float:
    """For ``position-box`` the tolerance is the side of the square."""
    return tolerance / 2.0 if metric == POSITION_BOX else tolerance


def within_tolerance(state: FlightState, target: FlightState, tolerance: float, metric: str,
                     scales: CharacteristicScales) -> bool:
    return goal_distance(state, target, metric, scales) <= acceptance_radius(tolerance, metric)


@dataclass(frozen=True)
class Segment:
    maneuver: Maneuver
    duration: float
    energy: float
    start: FlightState
    end: FlightState

    def to_dict(self) -> dict[str, Any]:
        return {
            "maneuver": self.maneuver.to_dict(),
            "duration": self.duration,
            "energy": self.energy,
            "start": self.start.to_dict(),
            "end": self.end.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Segment":
        return cls(Maneuver.from_dict(data["maneuver"]), float(data["duration"]),
                   float(data["energy"]), FlightState.from_dict(data["start"]),
                   FlightState.from_dict(data["end"]))


@dataclass(frozen=True)
class Trajectory:
    """Root-to-goal sequence of maneuver segments.

    ``energy`` is copied from the terminal tree node so it matches the
    planner's bookkeeping bit for bit.
    """

    start: FlightState
    segments: tuple[Segment, ...]
    energy: float
    planner: str = "tree"
    info: dict[str, Any] = field(default_factory=dict, compare=False)

    @property
    def final(self) -> FlightState:
        return self.segments[-1].end if self.segments else self.start

    @property
    def maneuvers(self) -> list[Maneuver]:
        return [s.maneuver for s in self.segments]

    @property
    def duration(self) -> float:
        return sum(s.duration for s in self.segments)

    def waypoints(self, scales: CharacteristicScales) -> np.ndarray:
        """Segment end points (including the start) in meters."""
        pts = [(self.start.x, self.start.z)] + [(s.end.x, s.end.z) for s in self.segments]
        return np.array(pts) * scales.L_c

    def to_dict(self) -> dict[str, Any]:
        return {
            "planner": self.planner,
            "energy": self.energy,
            "start": self.start.to_dict(),
            "segments": [s.to_dict() for s in self.segments],
            "info": self.info,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Trajectory":
        return cls(FlightState.from_dict(data["start"]),
                   tuple(Segment.from_dict(s) for s in data["segments"]),
                   float(data["energy"]), data.get("planner", "tree"), dict(data.get("info", {})))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def write_json(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n")


def read_trajectory(path: str | Path) -> Trajectory:
    return Trajectory.from_dict(json.loads(Path(path).read_text()))


def trajectory_timeseries(
    traj: Trajectory,
    params: VehicleParams,
    scales: CharacteristicScales,
    integrator: IntegratorConfig = DEFAULT_INTEGRATOR,
) -> np.ndarray:
    """Re-integrate every segment; rows are (t [s], x [m], z [m], u, w, theta, q).

    Positions are converted to meters; velocities and rates stay
    nondimensional like the planner state.
    """
    rows = []
    t0 = 0.0
    for k, seg in enumerate(traj.segments):
        times, states = simulate(seg.start, seg.maneuver, seg.duration, params, scales, integrator)
        start = 0 if k == 0 else 1
        block = np.column_stack([t0 + times[start:], states[start:]])
        rows.append(block)
        t0 += seg.duration
    if not rows:
        return np.array([[0.0, *traj.start.as_array()]])
    out = np.vstack(rows)
    out[:, 1:3] *= scales.L_c
    return out


TIMESERIES_HEADER = ("t", "x", "z", "u", "w", "theta", "q")


def write_timeseries_csv(path: str | Path, rows: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TIMESERIES_HEADER)
        for row in rows:
            writer.writerow([repr(float(v)) for v in row])


def segments_energy(segments: Sequence[Segment]) -> float:
    total = 0.0
    for s in segments:
        total += s.energy
    return total


def maneuver_sequence(trajectories: Iterable[Trajectory]) -> list[Maneuver]:
    out: list[Maneuver] = []
    for t in trajectories:
        out.extend(t.maneuvers)
    return out
