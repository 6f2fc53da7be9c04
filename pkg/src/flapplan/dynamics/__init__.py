"""Nondimensional longitudinal flight model of a flapping-wing vehicle."""

from .aero import (
    aero_coefficients,
    angle_of_attack,
    drag_coeffs,
    reduced_frequency,
    tail_coeffs,
    theodorsen,
    theodorsen_table,
    wing_coeffs_flap,
    wing_coeffs_glide,
)
from .model import (
    DEFAULT_INTEGRATOR,
    IntegratorConfig,
    consistent_alpha_dot,
    from_nondimensional,
    integrate,
    integrate_many,
    simulate,
    state_derivative,
    to_nondimensional,
)
from .types import (
    AeroCoefficients,
    CharacteristicScales,
    DegenerateStateError,
    DivergenceError,
    DomainError,
    DynamicsError,
    FlightState,
    Maneuver,
    ModeError,
    Vehicle,
    VehicleParams,
    load_vehicle,
)

__all__ = [
    "AeroCoefficients", "CharacteristicScales", "DEFAULT_INTEGRATOR", "DegenerateStateError",
    "DivergenceError", "DomainError", "DynamicsError", "FlightState", "IntegratorConfig",
    "Maneuver", "ModeError", "Vehicle", "VehicleParams", "aero_coefficients", "angle_of_attack",
    "consistent_alpha_dot", "drag_coeffs", "from_nondimensional", "integrate", "integrate_many",
    "load_vehicle", "reduced_frequency", "simulate", "state_derivative", "tail_coeffs",
    "theodorsen", "theodorsen_table", "to_nondimensional", "wing_coeffs_flap", "wing_coeffs_glide",
]
