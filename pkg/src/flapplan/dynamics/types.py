"""Domain types for the longitudinal ornithopter model."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np


class DynamicsError(Exception):
    """Base class for model evaluation failures."""


class DegenerateStateError(DynamicsError):
    """Raised when the airspeed vanishes and the angle of attack is undefined."""


class DivergenceError(DynamicsError):
    """Raised when integration produces a non-finite state."""


class ModeError(DynamicsError):
    """Raised when a flapping-only routine is called with f = 0."""


class DomainError(DynamicsError, ValueError):
    """Raised for arguments outside the domain of a function."""


STATE_FIELDS = ("x", "z", "u", "w", "theta", "q")


@dataclass(frozen=True)
class FlightState:
    """Nondimensional longitudinal state.

    ``z`` points down, so positive values mean the vehicle has descended.
    ``u`` and ``w`` are body-axis velocities, ``theta`` is pitch in radians.
    """

    x: float
    z: float
    u: float
    w: float
    theta: float
    q: float

    def __post_init__(self):
        for name in STATE_FIELDS:
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"non-finite state component {name}={getattr(self, name)}")

    @property
    def speed(self) -> float:
        return math.hypot(self.u, self.w)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.z, self.u, self.w, self.theta, self.q], dtype=float)

    @classmethod
    def from_array(cls, arr) -> "FlightState":
        return cls(*(float(v) for v in arr))

    def to_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in STATE_FIELDS}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "FlightState":
        return cls(**{name: float(data[name]) for name in STATE_FIELDS})


@dataclass(frozen=True, order=True)
class Maneuver:
    """Tail deflection ``delta`` [rad] and flapping frequency ``f`` [Hz].

    ``f == 0`` is a glide.
    """

    delta: float
    f: float

    def __post_init__(self):
        if not (math.isfinite(self.delta) and math.isfinite(self.f)):
            raise DomainError("maneuver components must be finite")
        if self.f < 0:
            raise DomainError(f"flapping frequency must be >= 0, got {self.f}")

    @classmethod
    def from_degrees(cls, delta_deg: float, f: float) -> "Maneuver":
        return cls(math.radians(delta_deg), float(f))

    @property
    def delta_deg(self) -> float:
        return math.degrees(self.delta)

    @property
    def gliding(self) -> bool:
        return self.f == 0

    def label(self) -> str:
        return f"({self.delta_deg:g}deg, {self.f:g}Hz)"

    def to_dict(self) -> dict[str, float]:
        # rounded so that JSON round trips of degree-valued sets are stable
        return {"delta_deg": round(self.delta_deg, 12), "f": self.f}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Maneuver":
        if "delta_deg" in data:
            return cls.from_degrees(float(data["delta_deg"]), float(data["f"]))
        return cls(float(data["delta"]), float(data["f"]))


@dataclass(frozen=True)
class CharacteristicScales:
    """Speed [m/s], length [m] and time [s] used to nondimensionalize."""

    U_c: float = 4.26
    L_c: float = 0.135
    t_c: float = 0.0317

    def __post_init__(self):
        if not (self.U_c > 0 and self.L_c > 0 and self.t_c > 0):
            raise DomainError("characteristic scales must be strictly positive")

    def consistency(self) -> float:
        """Relative mismatch between L_c / t_c and U_c."""
        return abs(self.L_c / self.t_c - self.U_c) / self.U_c


@dataclass(frozen=True)
class VehicleParams:
    """Dimensionless ornithopter constants and aerodynamic closure parameters.

    ``lw_ratio`` and ``lt_ratio`` are the wing and tail levers as 2*l/c.
    The defaults take l_t / l_w equal to ``L_nd`` (tail lever factor); see
    README for the calibration notes on ``h0``, ``eps_alpha`` and the levers.
    Stall angles are in degrees.
    """

    M_nd: float = 6.85
    Lambda: float = 0.278
    L_nd: float = -15.5
    R_HL: float = 1.92
    chi: float = 0.0132
    C_D0: float = 0.018
    C_D0t: float = 0.021
    AR: float = 4.44
    AR_t: float = 2.35
    Li: float = 0.0051
    eps_alpha: float = 0.1
    h0: float = 1.25
    lw_ratio: float = 0.12
    lt_ratio: float = -1.86
    stall_wing: float = 10.0
    stall_tail: float = 25.0

    def __post_init__(self):
        problems = []
        if not self.AR > 0:
            problems.append("AR > 0")
        if not self.AR_t > 0:
            problems.append("AR_t > 0")
        if not self.M_nd > 0:
            problems.append("M_nd > 0")
        if not self.chi > 0:
            problems.append("chi > 0")
        if self.C_D0 < 0 or self.C_D0t < 0:
            problems.append("C_D0, C_D0t >= 0")
        if self.Li < 0:
            problems.append("Li >= 0")
        if not (self.stall_wing > 0 and self.stall_tail > 0):
            problems.append("stall angles > 0")
        if problems:
            raise DomainError("invalid vehicle parameters: " + ", ".join(problems))

    def as_array(self, aero: bool = True) -> np.ndarray:
        return np.array([
            self.M_nd, self.Lambda, self.L_nd, self.R_HL, self.chi,
            self.C_D0, self.C_D0t, self.AR, self.AR_t, self.Li,
            self.eps_alpha, self.h0, self.lw_ratio, self.lt_ratio,
            math.radians(self.stall_wing), math.radians(self.stall_tail),
            1.0 if aero else 0.0,
        ])


@dataclass(frozen=True)
class AeroCoefficients:
    C_L: float
    C_T: float
    C_D: float
    C_Lt: float
    C_Dt: float


@dataclass(frozen=True)
class Vehicle:
    """A parameter set together with its characteristic scales."""

    params: VehicleParams = field(default_factory=VehicleParams)
    scales: CharacteristicScales = field(default_factory=CharacteristicScales)

    def to_dict(self) -> dict[str, Any]:
        return {**asdict(self.params), **asdict(self.scales)}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Vehicle":
        pnames = {f.name for f in fields(VehicleParams)}
        snames = {f.name for f in fields(CharacteristicScales)}
        unknown = set(data) - pnames - snames
        if unknown:
            raise DomainError(f"unknown vehicle keys: {sorted(unknown)}")
        params = VehicleParams(**{k: float(v) for k, v in data.items() if k in pnames})
        scales = CharacteristicScales(**{k: float(v) for k, v in data.items() if k in snames})
        return cls(params, scales)


def load_vehicle(path: str | Path | None = None) -> Vehicle:
    """Read a vehicle JSON document; ``None`` loads the bundled default."""
    if path is None:
        text = resources.files("flapplan.data").joinpath("ornithopter_default.json").read_text()
    else:
        text = Path(path).read_text()
    return Vehicle.from_dict(json.loads(text))
