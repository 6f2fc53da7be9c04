"""Asymptotically-optimal RRT over (cost, state) with discrete maneuvers.

The tree lives in the augmented space of accumulated energy and flight
state. Each iteration samples a random (cost, state) point, finds the
nearest tree node under a weighted metric, applies one random maneuver for
a fixed control step and adds the child. Nodes whose cost already exceeds
the best goal cost are never extended.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from .dynamics import (
    DEFAULT_INTEGRATOR,
    CharacteristicScales,
    DynamicsError,
    FlightState,
    IntegratorConfig,
    Maneuver,
    VehicleParams,
    integrate,
)
from .dynamics.types import DomainError
from .energy import DEFAULT_ENERGY, EnergyModel, maneuver_energy
from .trajectory import POSITION_BOX, NoSolutionError, Segment, Trajectory, goal_distance

DEFAULT_WEIGHTS = (1.0, 1.0, 1.0, 1.0, 1.0, 0.5, 0.1)


@dataclass(frozen=True)
class RrtConfig:
    """Baseline settings.

    ``sample_bounds`` holds six (low, high) pairs for x [m], z [m], u, w,
    theta, q; ``None`` derives a box around start and target. The metric
    weights apply to (cost / cost_scale, x / length_scale, z / length_scale,
    u, w, theta, q). ``max_iterations`` caps the loop independently of the
    clock, which makes runs reproducible regardless of machine speed.
    """

    maneuver_set: tuple[Maneuver, ...]
    time_budget: float = 10.0
    control_step: float = 12.0
    goal_region: float = 6.0
    seed: int = 0
    sample_bounds: Optional[tuple[tuple[float, float], ...]] = None
    weights: tuple[float, ...] = DEFAULT_WEIGHTS
    cost_scale: float = 1000.0
    length_scale: float = 10.0
    goal_bias: float = 0.05
    max_iterations: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "maneuver_set", tuple(self.maneuver_set))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if not self.maneuver_set:
            raise DomainError("maneuver_set is empty")
        if not self.time_budget > 0:
            raise DomainError("time_budget must be > 0")
        if not self.control_step > 0:
            raise DomainError("control_step must be > 0")
        if not self.goal_region > 0:
            raise DomainError("goal_region must be > 0")
        if len(self.weights) != 7 or min(self.weights) < 0:
            raise DomainError("weights must be 7 nonnegative numbers")
        if self.sample_bounds is not None:
            bounds = tuple((float(lo), float(hi)) for lo, hi in self.sample_bounds)
            if len(bounds) != 6 or any(hi < lo for lo, hi in bounds):
                raise DomainError("sample_bounds must be six (low, high) pairs")
            object.__setattr__(self, "sample_bounds", bounds)
        if not 0 <= self.goal_bias <= 1:
            raise DomainError("goal_bias must be in [0, 1]")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise DomainError("max_iterations must be >= 1")

    def to_dict(self) -> dict[str, Any]:
        return {
            "maneuver_set": [m.to_dict() for m in self.maneuver_set],
            "time_budget": self.time_budget,
            "control_step": self.control_step,
            "goal_region": self.goal_region,
            "seed": self.seed,
            "sample_bounds": None if self.sample_bounds is None else [list(b) for b in self.sample_bounds],
            "weights": list(self.weights),
            "cost_scale": self.cost_scale,
            "length_scale": self.length_scale,
            "goal_bias": self.goal_bias,
            "max_iterations": self.max_iterations,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RrtConfig":
        kw = dict(data)
        kw["maneuver_set"] = tuple(Maneuver.from_dict(m) for m in data["maneuver_set"])
        if kw.get("sample_bounds") is not None:
            kw["sample_bounds"] = tuple(tuple(b) for b in kw["sample_bounds"])
        if "weights" in kw:
            kw["weights"] = tuple(kw["weights"])
        return cls(**kw)


def default_bounds(s0: FlightState, sf: FlightState, scales: CharacteristicScales,
                   margin: float = 20.0) -> tuple[tuple[float, float], ...]:
    """Position box around start and target plus generic flight ranges."""
    xs = sorted((s0.x * scales.L_c, sf.x * scales.L_c))
    zs = sorted((s0.z * scales.L_c, sf.z * scales.L_c))
    return (
        (xs[0] - margin, xs[1] + margin),
        (zs[0] - margin, zs[1] + margin),
        (0.5, 2.5),
        (-0.5, 0.5),
        (-0.5, 0.5),
        (-0.1, 0.1),
    )


@dataclass
class _Tree:
    states: list[FlightState] = field(default_factory=list)
    parents: list[int] = field(default_factory=list)
    maneuvers: list[Optional[Maneuver]] = field(default_factory=list)
    costs: list[float] = field(default_factory=list)
    # rows of (cost, x, z, u, w, theta, q) already scaled for the metric
    keys: np.ndarray = field(default_factory=lambda: np.empty((0, 7)))
    size: int = 0

    def add(self, state, parent, maneuver, cost, key):
        if self.size == self.keys.shape[0]:
            grown = np.empty((max(64, 2 * self.size), 7))
            grown[:self.size] = self.keys[:self.size]
            self.keys = grown
        self.keys[self.size] = key
        self.states.append(state)
        self.parents.append(parent)
        self.maneuvers.append(maneuver)
        self.costs.append(cost)
        self.size += 1
        return self.size - 1


def aorrt_plan(
    s0: FlightState,
    sf: FlightState,
    config: RrtConfig,
    params: VehicleParams,
    scales: CharacteristicScales,
    energy_model: EnergyModel = DEFAULT_ENERGY,
    integrator: IntegratorConfig = DEFAULT_INTEGRATOR,
) -> Trajectory:
    """Cheapest path found within the budget that ends inside the goal square.

    Raises :class:`NoSolutionError` when no node reached the goal square.
    """
    rng = np.random.default_rng(config.seed)
    bounds = np.array(config.sample_bounds or default_bounds(s0, sf, scales))
    w = np.sqrt(np.array(config.weights))
    scale = np.array([config.cost_scale, config.length_scale, config.length_scale, 1, 1, 1, 1])

    def key(cost: float, st: FlightState) -> np.ndarray:
        raw = np.array([cost, st.x * scales.L_c, st.z * scales.L_c, st.u, st.w, st.theta, st.q])
        return w * raw / scale

    half = config.goal_region / 2.0
    tree = _Tree()
    tree.add(s0, -1, None, 0.0, key(0.0, s0))
    best_idx, best_cost = -1, math.inf
    best_dist = goal_distance(s0, sf, POSITION_BOX, scales)
    step_cost = {m: maneuver_energy(m, config.control_step, energy_model) for m in config.maneuver_set}
    goal_raw = np.array([sf.x * scales.L_c, sf.z * scales.L_c, sf.u, sf.w, sf.theta, sf.q])
    n_man = len(config.maneuver_set)
    t_start = time.perf_counter()
    iterations = 0
    while True:
        if config.max_iterations is not None and iterations >= config.max_iterations:
            break
        if time.perf_counter() - t_start >= config.time_budget:
            break
        iterations += 1
        cost_hi = best_cost if math.isfinite(best_cost) else max(tree.costs) + max(step_cost.values())
        if rng.random() < config.goal_bias:
            target = np.concatenate([[0.0], goal_raw])
        else:
            target = np.concatenate([[rng.uniform(0.0, cost_hi)],
                                     rng.uniform(bounds[:, 0], bounds[:, 1])])
        target = w * target / scale
        d2 = np.sum((tree.keys[:tree.size] - target) ** 2, axis=1)
        if math.isfinite(best_cost):
            d2[np.asarray(tree.costs) >= best_cost] = np.inf
        near = int(np.argmin(d2))
        if not math.isfinite(d2[near]):
            continue
        m = config.maneuver_set[int(rng.integers(n_man))]
        cost = tree.costs[near] + step_cost[m]
        if cost >= best_cost:
            continue
        try:
            child = integrate(tree.states[near], m, config.control_step, params, scales, integrator)
        except DynamicsError:
            continue
        idx = tree.add(child, near, m, cost, key(cost, child))
        dist = goal_distance(child, sf, POSITION_BOX, scales)
        best_dist = min(best_dist, dist)
        if dist <= half and cost < best_cost:
            best_idx, best_cost = idx, cost
    if best_idx < 0:
        raise NoSolutionError(
            f"no node inside the {config.goal_region:g} m goal square after {iterations} "
            f"iterations; closest was {best_dist:.4g} m", best_dist)
    chain = []
    i = best_idx
    while i >= 0:
        chain.append(i)
        i = tree.parents[i]
    chain.reverse()
    segments = tuple(
        Segment(tree.maneuvers[c], config.control_step, step_cost[tree.maneuvers[c]],
                tree.states[p], tree.states[c])
        for p, c in zip(chain[:-1], chain[1:])
    )
    info = {"goal_distance": goal_distance(tree.states[best_idx], sf, POSITION_BOX, scales),
            "metric": POSITION_BOX, "iterations": iterations, "nodes": tree.size}
    return Trajectory(s0, segments, best_cost, "aorrt", info)
