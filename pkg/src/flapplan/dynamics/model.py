"""Equations of motion, fixed-step RK4 integration and scaling helpers."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from . import _kernels as K
from .aero import Closure, angle_of_attack, theodorsen_table
from .types import (
    CharacteristicScales,
    DegenerateStateError,
    DivergenceError,
    DomainError,
    FlightState,
    Maneuver,
    VehicleParams,
)

ALPHA_DOT_MODES = {"consistent": K.ALPHA_DOT_CONSISTENT, "lagged": K.ALPHA_DOT_LAGGED}


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed-step RK4 settings.

    The substep is the largest value not exceeding ``max_substep`` [s] and,
    when flapping, ``1 / (substeps_per_period * f)``. ``substeps`` forces an
    exact count per segment instead.

    ``alpha_dot`` selects how the angle-of-attack rate inside the lift terms
    is obtained: ``"consistent"`` solves the algebraic loop at every
    derivative evaluation (keeps RK4 fourth order), ``"lagged"`` uses the
    finite difference over the previous substep (zero at segment start).

    ``c1`` replaces the thrust closure C1(k); ``None`` means C1 = C.
    """

    max_substep: float = 0.02
    substeps_per_period: int = 20
    substeps: Optional[int] = None
    alpha_dot: str = "consistent"
    c1: Optional[Closure] = None

    def __post_init__(self):
        if not self.max_substep > 0:
            raise DomainError("max_substep must be > 0")
        if self.substeps_per_period < 1:
            raise DomainError("substeps_per_period must be >= 1")
        if self.substeps is not None and self.substeps < 1:
            raise DomainError("substeps must be >= 1")
        if self.alpha_dot not in ALPHA_DOT_MODES:
            raise DomainError(f"alpha_dot must be one of {sorted(ALPHA_DOT_MODES)}")

    def substep_count(self, maneuver: Maneuver, duration: float) -> int:
        if self.substeps is not None:
            return self.substeps
        h = self.max_substep
        if maneuver.f > 0:
            h = min(h, 1.0 / (self.substeps_per_period * maneuver.f))
        return max(1, math.ceil(duration / h - 1e-9))

    @property
    def mode(self) -> int:
        return ALPHA_DOT_MODES[self.alpha_dot]

    def table(self) -> np.ndarray:
        return theodorsen_table(self.c1)


DEFAULT_INTEGRATOR = IntegratorConfig()


@lru_cache(maxsize=64)
def param_array(params: VehicleParams, aero: bool = True) -> np.ndarray:
    arr = params.as_array(aero)
    arr.setflags(write=False)
    return arr


def to_nondimensional(scales: CharacteristicScales, *, position=None, velocity=None,
                      time=None, frequency=None):
    """Scale dimensional quantities; returns values in the order given.

    Positions divide by L_c, velocities by U_c, times by t_c; frequencies
    multiply by t_c. A single keyword returns a bare value.
    """
    out = []
    if position is not None:
        out.append(np.asarray(position, dtype=float) / scales.L_c)
    if velocity is not None:
        out.append(np.asarray(velocity, dtype=float) / scales.U_c)
    if time is not None:
        out.append(np.asarray(time, dtype=float) / scales.t_c)
    if frequency is not None:
        out.append(np.asarray(frequency, dtype=float) * scales.t_c)
    out = [float(v) if np.ndim(v) == 0 else v for v in out]
    return out[0] if len(out) == 1 else tuple(out)


def from_nondimensional(scales: CharacteristicScales, *, position=None, velocity=None,
                        time=None, frequency=None):
    """Inverse of :func:`to_nondimensional`."""
    out = []
    if position is not None:
        out.append(np.asarray(position, dtype=float) * scales.L_c)
    if velocity is not None:
        out.append(np.asarray(velocity, dtype=float) * scales.U_c)
    if time is not None:
        out.append(np.asarray(time, dtype=float) * scales.t_c)
    if frequency is not None:
        out.append(np.asarray(frequency, dtype=float) / scales.t_c)
    out = [float(v) if np.ndim(v) == 0 else v for v in out]
    return out[0] if len(out) == 1 else tuple(out)


def state_derivative(
    state: FlightState,
    maneuver: Maneuver,
    t: float,
    alpha_dot: float,
    params: VehicleParams,
    scales: CharacteristicScales,
    *,
    aero: bool = True,
    c1: Optional[Closure] = None,
) -> np.ndarray:
    """Time derivative of (x, z, u, w, theta, q) in nondimensional units.

    ``t`` is nondimensional time into the maneuver (flapping phase) and
    ``alpha_dot`` is the rate used in the unsteady lift terms. ``aero=False``
    zeroes every aerodynamic coefficient, leaving gravity and kinematics.
    """
    angle_of_attack(state)
    out = np.empty(6)
    K.derivative(state.as_array(), maneuver.delta, maneuver.f * scales.t_c, t, alpha_dot,
                 param_array(params, aero), theodorsen_table(c1), out)
    return out


def consistent_alpha_dot(
    state: FlightState,
    maneuver: Maneuver,
    t: float,
    params: VehicleParams,
    scales: CharacteristicScales,
    *,
    c1: Optional[Closure] = None,
) -> float:
    """The alpha_dot that agrees with the accelerations it produces."""
    angle_of_attack(state)
    work = np.empty(6)
    return K.consistent_alpha_dot(state.as_array(), maneuver.delta, maneuver.f * scales.t_c, t,
                                  param_array(params), theodorsen_table(c1), 0.0, work)


def _run(state, maneuver, duration, params, scales, config, record, aero):
    if not duration > 0:
        raise DomainError(f"duration must be > 0, got {duration}")
    angle_of_attack(state)
    n_sub = config.substep_count(maneuver, duration)
    y, status, hist = K.rk4_segment(
        state.as_array(), maneuver.delta, maneuver.f * scales.t_c, duration / scales.t_c,
        n_sub, param_array(params, aero), config.table(), config.mode, record)
    if status == K.DIVERGED:
        raise DivergenceError(f"non-finite state while integrating {maneuver.label()}")
    if status == K.DEGENERATE:
        raise DegenerateStateError(f"airspeed reached zero during {maneuver.label()}")
    return y, hist, n_sub


def integrate(
    state: FlightState,
    maneuver: Maneuver,
    duration: float,
    params: VehicleParams,
    scales: CharacteristicScales,
    config: IntegratorConfig = DEFAULT_INTEGRATOR,
    *,
    aero: bool = True,
) -> FlightState:
    """Hold ``maneuver`` for ``duration`` seconds and return the final state."""
    y, _, _ = _run(state, maneuver, duration, params, scales, config, False, aero)
    return FlightState.from_array(y)


def simulate(
    state: FlightState,
    maneuver: Maneuver,
    duration: float,
    params: VehicleParams,
    scales: CharacteristicScales,
    config: IntegratorConfig = DEFAULT_INTEGRATOR,
    *,
    aero: bool = True,
) -> tuple[np.ndarray, np.ndarray]:
    """Like :func:`integrate` but returns (times [s], states) at every substep."""
    _, hist, n_sub = _run(state, maneuver, duration, params, scales, config, True, aero)
    times = np.linspace(0.0, duration, n_sub + 1)
    return times, hist


def integrate_many(
    states: np.ndarray,
    maneuvers: Sequence[Maneuver],
    durations: Sequence[float],
    params: VehicleParams,
    scales: CharacteristicScales,
    config: IntegratorConfig = DEFAULT_INTEGRATOR,
) -> tuple[np.ndarray, np.ndarray]:
    """Integrate independent (state, maneuver, duration) rows in one call.

    Returns (final states, ok mask). Rows that diverge or lose airspeed are
    flagged instead of raising.
    """
    states = np.ascontiguousarray(states, dtype=float).reshape(-1, 6)
    n = states.shape[0]
    if len(maneuvers) != n or len(durations) != n:
        raise DomainError("states, maneuvers and durations must have equal length")
    deltas = np.array([m.delta for m in maneuvers], dtype=float)
    f_nds = np.array([m.f * scales.t_c for m in maneuvers], dtype=float)
    dur_nd = np.array(durations, dtype=float) / scales.t_c
    n_subs = np.array([config.substep_count(m, d) for m, d in zip(maneuvers, durations)],
                      dtype=np.int64)
    if n == 0:
        return np.empty((0, 6)), np.empty(0, dtype=bool)
    out, status = K.rk4_batch(states, deltas, f_nds, dur_nd, n_subs,
                              param_array(params), config.table(), config.mode)
    return out, status == K.OK
