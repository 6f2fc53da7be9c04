"""Aerodynamic coefficients for gliding and flapping flight."""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy.special import hankel2

from . import _kernels as K
from .types import (
    AeroCoefficients,
    CharacteristicScales,
    DegenerateStateError,
    DomainError,
    FlightState,
    Maneuver,
    ModeError,
    VehicleParams,
)

# maps reduced frequency k to a complex gain; used for the thrust closure C1(k)
Closure = Callable[[float], complex]

TABLE_SIZE = 2 ** 15 + 1


def angle_of_attack(state: FlightState) -> float:
    """atan2(w, u); equals arctan(w/u) in forward flight."""
    if state.u == 0.0 and state.w == 0.0:
        raise DegenerateStateError("angle of attack undefined at zero airspeed")
    return math.atan2(state.w, state.u)


def theodorsen(k: float) -> tuple[float, float]:
    """Real and imaginary parts (F, G) of Theodorsen's function C(k).

    Uses Hankel functions of the second kind,
    C(k) = H1(k) / (H1(k) + i H0(k)). Returns the quasi-steady (1, 0) at k = 0.
    """
    if k < 0 or not math.isfinite(k):
        raise DomainError(f"reduced frequency must be finite and >= 0, got {k}")
    if k < 1e-100:
        # C(k) = 1 + O(k log k); the Hankel functions overflow down here
        return 1.0, 0.0
    h1 = hankel2(1, k)
    h0 = hankel2(0, k)
    c = h1 / (h1 + 1j * h0)
    return float(c.real), float(c.imag)


def theodorsen_complex(k: float) -> complex:
    F, G = theodorsen(k)
    return complex(F, G)


@lru_cache(maxsize=8)
def theodorsen_table(c1: Optional[Closure] = None, size: int = TABLE_SIZE) -> np.ndarray:
    """Tabulate (F, G, F1, G1) on s = k/(1+k) in [0, 1] for the compiled kernels.

    ``c1`` is the thrust closure; ``None`` uses C1(k) = C(k).
    """
    s = np.linspace(0.0, 1.0, size)
    table = np.empty((4, size))
    k = s[1:-1] / (1.0 - s[1:-1])
    h1 = hankel2(1, k)
    h0 = hankel2(0, k)
    c = h1 / (h1 + 1j * h0)
    table[0, 1:-1] = c.real
    table[1, 1:-1] = c.imag
    table[0, 0], table[1, 0] = 1.0, 0.0
    table[0, -1], table[1, -1] = 0.5, 0.0
    if c1 is None:
        table[2:] = table[:2]
    else:
        for i, si in enumerate(s):
            # the last node stands in for k -> infinity
            val = c1(si / (1.0 - si)) if si < 1.0 else c1(1e8)
            table[2, i] = val.real
            table[3, i] = val.imag
    table.setflags(write=False)
    return table


def reduced_frequency(state: FlightState, f: float, scales: CharacteristicScales) -> float:
    """k = 2 pi f_nd / U_b with f converted from Hz using t_c."""
    speed = state.speed
    if speed == 0.0:
        raise DegenerateStateError("reduced frequency undefined at zero airspeed")
    return 2.0 * math.pi * f * scales.t_c / speed


def _check_speed(state: FlightState) -> float:
    speed = state.speed
    if speed == 0.0:
        raise DegenerateStateError("zero airspeed")
    return speed


def wing_coeffs_glide(state: FlightState, alpha_dot: float, params: VehicleParams) -> float:
    """Gliding wing lift with the stall clamp on the effective lift angle."""
    speed = _check_speed(state)
    alpha = angle_of_attack(state)
    return K.glide_lift(alpha, alpha_dot, state.q, speed, params.as_array())


def wing_coeffs_flap(
    state: FlightState,
    maneuver: Maneuver,
    t: float,
    params: VehicleParams,
    scales: CharacteristicScales,
    theodorsen_values: Optional[tuple[float, float, float, float]] = None,
    c1: Optional[Closure] = None,
) -> tuple[float, float]:
    """Flapping wing (C_L, C_T) at nondimensional time ``t`` into the maneuver.

    ``theodorsen_values`` overrides (F, G, F1, G1); otherwise they come from
    :func:`theodorsen` and the closure ``c1`` (default C1 = C).
    """
    if maneuver.f <= 0:
        raise ModeError("flapping coefficients need f > 0; use the glide model")
    speed = _check_speed(state)
    alpha = angle_of_attack(state)
    f_nd = maneuver.f * scales.t_c
    if theodorsen_values is None:
        k = 2.0 * math.pi * f_nd / speed
        F, G = theodorsen(k)
        if c1 is None:
            F1, G1 = F, G
        else:
            val = c1(k)
            F1, G1 = val.real, val.imag
    else:
        F, G, F1, G1 = theodorsen_values
    return K.flap_lift_thrust(alpha, f_nd, t, speed, params.as_array(), F, G, F1, G1)


def tail_coeffs(state: FlightState, delta: float, alpha_dot: float, params: VehicleParams) -> float:
    """Delta-wing tail lift, clamped at the tail stall angle."""
    speed = _check_speed(state)
    alpha = angle_of_attack(state)
    return K.tail_lift(alpha, delta, alpha_dot, state.q, speed, params.as_array())


def drag_coeffs(C_L: float, C_Lt: float, params: VehicleParams) -> tuple[float, float]:
    """Friction plus induced drag for wing and tail."""
    C_D = params.C_D0 + C_L ** 2 / (math.pi * params.AR)
    C_Dt = params.C_D0t + C_Lt ** 2 / (math.pi * params.AR_t)
    return C_D, C_Dt


def aero_coefficients(
    state: FlightState,
    maneuver: Maneuver,
    t: float,
    alpha_dot: float,
    params: VehicleParams,
    scales: CharacteristicScales,
    c1: Optional[Closure] = None,
) -> AeroCoefficients:
    """All five coefficients, selecting glide or flap by ``maneuver.f``."""
    if maneuver.gliding:
        C_L = wing_coeffs_glide(state, alpha_dot, params)
        C_T = 0.0
    else:
        C_L, C_T = wing_coeffs_flap(state, maneuver, t, params, scales, c1=c1)
    C_Lt = tail_coeffs(state, maneuver.delta, alpha_dot, params)
    C_D, C_Dt = drag_coeffs(C_L, C_Lt, params)
    return AeroCoefficients(C_L, C_T, C_D, C_Lt, C_Dt)
