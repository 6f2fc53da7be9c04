"""Segmented maneuver tree with corridor and witness pruning.

The tree grows level by level. Every leaf is expanded with every maneuver
and every time step; candidates outside the corridor or beyond the target
along X are dropped; the survivors are split into altitude bands and only
the cheapest node of each band (its witness) is expanded further. All
corridor survivors stay available as trajectory end points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional, Sequence

import numpy as np

from ..dynamics import (
    DEFAULT_INTEGRATOR,
    CharacteristicScales,
    FlightState,
    IntegratorConfig,
    Maneuver,
    VehicleParams,
    integrate_many,
)
from ..dynamics.types import DomainError
from ..energy import DEFAULT_ENERGY, EnergyModel, maneuver_energy
from ..trajectory import (
    METRICS,
    NoSolutionError,
    Segment,
    Trajectory,
    acceptance_radius,
    goal_distance,
)
from .corridor import Corridor, ReferenceCurve, corridor_distances

PARTITION_MODES = ("width", "quantile")


@dataclass(eq=False)
class PlanNode:
    state: FlightState
    parent: Optional["PlanNode"] = None
    maneuver: Optional[Maneuver] = None
    duration: float = 0.0
    energy: float = 0.0
    depth: int = 0
    index: int = 0
    corridor_distance: float = 0.0
    inserted: bool = False
    children: list["PlanNode"] = field(default_factory=list, repr=False)

    @property
    def inbound_maneuver(self) -> Optional[Maneuver]:
        return self.maneuver

    @property
    def inbound_duration(self) -> float:
        return self.duration

    @property
    def accumulated_energy(self) -> float:
        return self.energy

    def path(self) -> list["PlanNode"]:
        nodes = []
        node: Optional[PlanNode] = self
        while node is not None:
            nodes.append(node)
            node = node.parent
        return nodes[::-1]


@dataclass(frozen=True)
class PlannerConfig:
    """Search settings.

    ``k_d`` is the corridor clearance in meters (``inf`` disables the
    corridor) and ``k_w`` the number of altitude bands per level (``None``
    disables witness pruning). ``tolerance`` is in nondimensional units for
    the ``full-state`` metric, a radius in meters for ``position`` and the
    square side in meters for ``position-box``. ``max_depth=None`` derives
    a cap of three times the straight-line flight time at the
    characteristic speed.
    """

    maneuver_set: tuple[Maneuver, ...]
    time_steps: tuple[float, ...] = (12.0,)
    k_d: float = math.inf
    k_w: Optional[int] = None
    tolerance: float = 6.0
    tolerance_metric: str = "position-box"
    max_depth: Optional[int] = None
    partition_mode: str = "width"
    accept_overshoot: bool = False
    curve_samples: int = 1000

    def __post_init__(self):
        object.__setattr__(self, "maneuver_set", tuple(self.maneuver_set))
        object.__setattr__(self, "time_steps", tuple(float(t) for t in self.time_steps))
        if not self.maneuver_set:
            raise DomainError("maneuver_set is empty")
        if not self.time_steps or min(self.time_steps) <= 0:
            raise DomainError("time_steps must be a nonempty list of positive durations")
        if not self.k_d > 0:
            raise DomainError("k_d must be > 0")
        if self.k_w is not None and self.k_w < 1:
            raise DomainError("k_w must be >= 1")
        if not self.tolerance > 0:
            raise DomainError("tolerance must be > 0")
        if self.tolerance_metric not in METRICS:
            raise DomainError(f"tolerance_metric must be one of {METRICS}")
        if self.max_depth is not None and self.max_depth < 1:
            raise DomainError("max_depth must be >= 1")
        if self.partition_mode not in PARTITION_MODES:
            raise DomainError(f"partition_mode must be one of {PARTITION_MODES}")

    def depth_cap(self, x_span: float, scales: CharacteristicScales) -> int:
        if self.max_depth is not None:
            return self.max_depth
        return max(1, math.ceil(3.0 * abs(x_span) / (scales.U_c * min(self.time_steps))))

    def to_dict(self) -> dict[str, Any]:
        return {
            "maneuver_set": [m.to_dict() for m in self.maneuver_set],
            "time_steps": list(self.time_steps),
            "k_d": None if math.isinf(self.k_d) else self.k_d,
            "k_w": self.k_w,
            "tolerance": self.tolerance,
            "tolerance_metric": self.tolerance_metric,
            "max_depth": self.max_depth,
            "partition_mode": self.partition_mode,
            "accept_overshoot": self.accept_overshoot,
            "curve_samples": self.curve_samples,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "PlannerConfig":
        known = {"maneuver_set", "time_steps", "k_d", "k_w", "tolerance", "tolerance_metric",
                 "max_depth", "partition_mode", "accept_overshoot", "curve_samples"}
        unknown = set(data) - known
        if unknown:
            raise DomainError(f"unknown planner keys: {sorted(unknown)}")
        kw = dict(data)
        kw["maneuver_set"] = tuple(Maneuver.from_dict(m) for m in data["maneuver_set"])
        if "k_d" in kw:
            kw["k_d"] = math.inf if kw["k_d"] is None else float(kw["k_d"])
        return cls(**kw)


@dataclass
class PlanTree:
    root: PlanNode
    target: FlightState
    corridor: Corridor
    levels: list[list[PlanNode]] = field(default_factory=list)
    candidates: list[PlanNode] = field(default_factory=list)

    @property
    def inserted(self) -> list[PlanNode]:
        return [n for level in self.levels for n in level]

    @property
    def nodes(self) -> list[PlanNode]:
        """Root followed by every generated node (witnesses and terminals)."""
        return [self.root] + self.candidates

    @property
    def height(self) -> int:
        return len(self.levels)

    def stats(self) -> dict[str, int]:
        return {
            "levels": self.height,
            "inserted": sum(len(level) for level in self.levels),
            "candidates": len(self.candidates),
        }


def make_corridor(s0: FlightState, sf: FlightState, k_d: float, scales: CharacteristicScales,
                  samples: int = 1000) -> Corridor:
    curve = ReferenceCurve(s0.x * scales.L_c, s0.z * scales.L_c, sf.x * scales.L_c, sf.z * scales.L_c)
    return Corridor(curve, k_d, samples)


def expand_leaves(
    leaves: Sequence[PlanNode],
    config: PlannerConfig,
    params: VehicleParams,
    scales: CharacteristicScales,
    corridor: Corridor,
    target: FlightState,
    energy_model: EnergyModel = DEFAULT_ENERGY,
    integrator: IntegratorConfig = DEFAULT_INTEGRATOR,
    first_index: int = 1,
) -> list[PlanNode]:
    """Integrate every (leaf, maneuver, time step) and keep corridor survivors.

    Candidates come out in canonical order: leaf, then maneuver, then time
    step. Diverging integrations and candidates that do not advance along
    X are dropped silently.
    """
    if not leaves:
        raise DomainError("expand_leaves needs at least one leaf")
    rows = [(leaf, m, ts) for leaf in leaves for m in config.maneuver_set for ts in config.time_steps]
    starts = np.array([leaf.state.as_array() for leaf, _, _ in rows])
    finals, ok = integrate_many(starts, [r[1] for r in rows], [r[2] for r in rows],
                                params, scales, integrator)
    # forward progress only; looping maneuvers can carry the vehicle backwards
    keep = ok & (finals[:, 0] > starts[:, 0])
    overshoot = finals[:, 0] > target.x
    if config.accept_overshoot:
        radius = acceptance_radius(config.tolerance, config.tolerance_metric)
        for i in np.flatnonzero(overshoot & keep):
            st = FlightState.from_array(finals[i])
            if goal_distance(st, target, config.tolerance_metric, scales) <= radius:
                overshoot[i] = False
    keep &= ~overshoot
    dist = np.zeros(len(rows))
    if not corridor.unbounded and keep.any():
        idx = np.flatnonzero(keep)
        dist[idx] = corridor_distances(corridor, finals[idx, :2] * scales.L_c)
        keep[idx] = dist[idx] <= corridor.k_d
    out = []
    for i in np.flatnonzero(keep):
        leaf, m, ts = rows[i]
        out.append(PlanNode(
            state=FlightState.from_array(finals[i]),
            parent=leaf,
            maneuver=m,
            duration=ts,
            energy=leaf.energy + maneuver_energy(m, ts, energy_model),
            depth=leaf.depth + 1,
            index=first_index + len(out),
            corridor_distance=float(dist[i]),
        ))
    return out


def partition_by_z(candidates: Sequence[PlanNode], k_w: Optional[int],
                   mode: str = "width") -> list[list[PlanNode]]:
    """Split candidates into altitude bands.

    ``width`` uses ``k_w`` equal-width bins over the candidates' z range
    (last bin closed) and drops empty bins; ``quantile`` uses ``k_w``
    equal-count groups of the z-sorted candidates. ``k_w=None`` gives every
    candidate its own partition.
    """
    if not candidates:
        raise DomainError("partition_by_z needs candidates")
    if k_w is None:
        return [[c] for c in candidates]
    if k_w < 1:
        raise DomainError("k_w must be >= 1")
    z = np.array([c.state.z for c in candidates])
    if mode == "quantile":
        order = sorted(range(len(candidates)),
                       key=lambda i: (z[i], candidates[i].state.x, candidates[i].index))
        groups = np.array_split(np.array(order), min(k_w, len(order)))
        return [[candidates[i] for i in g] for g in groups if len(g)]
    if mode != "width":
        raise DomainError(f"unknown partition mode {mode!r}")
    lo, hi = z.min(), z.max()
    if hi == lo:
        return [list(candidates)]
    width = (hi - lo) / k_w
    bins = np.minimum(((z - lo) / width).astype(np.int64), k_w - 1)
    parts: list[list[PlanNode]] = [[] for _ in range(k_w)]
    for c, b in zip(candidates, bins):
        parts[b].append(c)
    return [p for p in parts if p]


def select_witness(partition: Sequence[PlanNode]) -> PlanNode:
    """Cheapest node; ties go to smaller z (higher altitude), then smaller x."""
    if not partition:
        raise DomainError("empty partition")
    return min(partition, key=lambda n: (n.energy, n.state.z, n.state.x, n.index))


def build_tree(
    s0: FlightState,
    sf: FlightState,
    config: PlannerConfig,
    params: VehicleParams,
    scales: CharacteristicScales,
    energy_model: EnergyModel = DEFAULT_ENERGY,
    integrator: IntegratorConfig = DEFAULT_INTEGRATOR,
) -> PlanTree:
    """Grow the pruned tree until no candidate survives or the depth cap."""
    if not sf.x > s0.x:
        raise DomainError("target must lie ahead of the start along X")
    corridor = make_corridor(s0, sf, config.k_d, scales, config.curve_samples)
    root = PlanNode(s0, inserted=True)
    tree = PlanTree(root, sf, corridor)
    leaves = [root]
    cap = config.depth_cap((sf.x - s0.x) * scales.L_c, scales)
    while leaves and tree.height < cap:
        cands = expand_leaves(leaves, config, params, scales, corridor, sf, energy_model,
                              integrator, first_index=len(tree.candidates) + 1)
        if not cands:
            break
        tree.candidates.extend(cands)
        witnesses = [select_witness(p) for p in partition_by_z(cands, config.k_w,
                                                               config.partition_mode)]
        witnesses.sort(key=lambda n: n.index)
        for w in witnesses:
            w.inserted = True
            w.parent.children.append(w)
        tree.levels.append(witnesses)
        leaves = witnesses
    return tree


def _to_trajectory(node: PlanNode, planner: str, info: dict[str, Any]) -> Trajectory:
    chain = node.path()
    segments = tuple(
        Segment(child.maneuver, child.duration, child.energy - parent.energy, parent.state, child.state)
        for parent, child in zip(chain[:-1], chain[1:])
    )
    return Trajectory(chain[0].state, segments, node.energy, planner, info)


def extract_optimal_path(
    nodes: PlanTree | Iterable[PlanNode],
    sf: FlightState,
    tolerance: float,
    tolerance_metric: str,
    scales: CharacteristicScales,
    planner: str = "tree",
) -> Trajectory:
    """Cheapest root-to-node path ending within tolerance of ``sf``.

    Every non-root node qualifies, not only leaves. Equal energies are
    resolved by goal distance, then creation order.
    """
    pool = nodes.nodes if isinstance(nodes, PlanTree) else list(nodes)
    radius = acceptance_radius(tolerance, tolerance_metric)
    best = None
    best_key = None
    closest = math.inf
    for n in pool:
        if n.parent is None:
            continue
        d = goal_distance(n.state, sf, tolerance_metric, scales)
        closest = min(closest, d)
        if d <= radius:
            key = (n.energy, d, n.index)
            if best_key is None or key < best_key:
                best, best_key = n, key
    if best is None:
        raise NoSolutionError(
            f"no node within {tolerance:g} ({tolerance_metric}) of the target; "
            f"closest was {closest:.4g}", closest)
    info = {"goal_distance": best_key[1], "metric": tolerance_metric}
    return _to_trajectory(best, planner, info)


def plan(
    s0: FlightState,
    sf: FlightState,
    config: PlannerConfig,
    params: VehicleParams,
    scales: CharacteristicScales,
    energy_model: EnergyModel = DEFAULT_ENERGY,
    integrator: IntegratorConfig = DEFAULT_INTEGRATOR,
) -> Trajectory:
    """Minimum-energy dynamically feasible trajectory from ``s0`` to ``sf``.

    Raises :class:`NoSolutionError` when no generated node enters the
    tolerance region.
    """
    tree = build_tree(s0, sf, config, params, scales, energy_model, integrator)
    traj = extract_optimal_path(tree, sf, config.tolerance, config.tolerance_metric, scales)
    traj.info.update(tree.stats())
    return traj
