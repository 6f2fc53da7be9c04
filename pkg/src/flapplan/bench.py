"""Scenario suites, metrics and experiment runners for both planners."""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import platform
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional, Sequence

import numpy as np

from .aorrt import RrtConfig, aorrt_plan
from .dynamics import (
    DEFAULT_INTEGRATOR,
    CharacteristicScales,
    FlightState,
    IntegratorConfig,
    Maneuver,
    Vehicle,
)
from .dynamics.types import DomainError
from .energy import DEFAULT_ENERGY, EnergyModel
from .planner import PlannerConfig, plan
from .trajectory import (
    FULL_STATE,
    POSITION,
    POSITION_BOX,
    NoSolutionError,
    Trajectory,
    goal_distance,
)

GRID_RECTANGLE = (200.0, 250.0, -20.0, 100.0)
RANDOM_X_RANGE = (200.0, 250.0)
RANDOM_Z_RANGE = (-90.0, 20.0)
PERCH_ALTITUDES = (2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0)
TAIL_ANGLES_DEG = (-6, -5, -4, -3, -2, -1, 0)
FREQUENCIES_HZ = (0, 4, 5, 6)


def _maneuvers(pairs: Iterable[tuple[float, float]]) -> tuple[Maneuver, ...]:
    return tuple(Maneuver.from_degrees(d, f) for d, f in pairs)


FULL_SET = _maneuvers((d, f) for d in TAIL_ANGLES_DEG for f in FREQUENCIES_HZ)
PERCHING_SET = _maneuvers([(-1, 0), (-2, 0), (-3, 0), (-4, 0), (-5, 0), (-6, 0),
                           (0, 4), (0, 5), (0, 6)])


def published_rates() -> dict[Maneuver, float]:
    """Occurrence rates of the commonly selected maneuvers (bundled data)."""
    text = resources.files("flapplan.data").joinpath("published_rates.json").read_text()
    return {Maneuver.from_dict(r): float(r["xi"]) for r in json.loads(text)["rates"]}


def reduce_maneuver_set(rates: Mapping[Maneuver, float], threshold: float,
                        universe: Optional[Sequence[Maneuver]] = None) -> tuple[Maneuver, ...]:
    """Maneuvers whose occurrence rate is at least ``threshold``.

    With a ``universe`` the result keeps its order and maneuvers missing
    from ``rates`` count as rate 0; otherwise the rates' order is kept.
    """
    if threshold < 0:
        raise DomainError("threshold must be >= 0")
    pool = list(universe) if universe is not None else list(rates)
    return tuple(m for m in pool if rates.get(m, 0.0) >= threshold)


REDUCED_SET = reduce_maneuver_set(published_rates(), 0.02)


@dataclass(frozen=True)
class Scenario:
    """Start and target states plus the goal test used to accept nodes."""

    start: FlightState
    target: FlightState
    label: str = ""
    tolerance: float = 6.0
    tolerance_metric: str = POSITION_BOX

    def __post_init__(self):
        if not self.target.x > self.start.x:
            raise DomainError(f"scenario {self.label!r}: target must lie ahead of the start")

    def target_m(self, scales: CharacteristicScales) -> tuple[float, float]:
        return self.target.x * scales.L_c, self.target.z * scales.L_c

    def to_dict(self) -> dict[str, Any]:
        return {"label": self.label, "start": self.start.to_dict(), "target": self.target.to_dict(),
                "tolerance": self.tolerance, "tolerance_metric": self.tolerance_metric}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Scenario":
        return cls(FlightState.from_dict(data["start"]), FlightState.from_dict(data["target"]),
                   data.get("label", ""), float(data.get("tolerance", 6.0)),
                   data.get("tolerance_metric", POSITION_BOX))


def make_scenario(x_m: float, z_m: float, scales: CharacteristicScales, label: str = "",
                  u0: float = 1.0, w0: float = 0.0, tolerance: float = 6.0,
                  tolerance_metric: str = POSITION_BOX) -> Scenario:
    """Start at the origin with zero pitch; target at (x_m, z_m) meters.

    The target carries the start's body velocities and zero pitch, which
    only matters for the full-state accuracy metric.
    """
    start = FlightState(0.0, 0.0, u0, w0, 0.0, 0.0)
    target = FlightState(x_m / scales.L_c, z_m / scales.L_c, u0, w0, 0.0, 0.0)
    return Scenario(start, target, label or f"x{x_m:g}_z{z_m:g}", tolerance, tolerance_metric)


def _grid_shape(count: int) -> tuple[int, int]:
    if count == 80:
        return 8, 10
    nx = int(math.isqrt(count))
    while count % nx:
        nx -= 1
    return nx, count // nx


def _axis(lo: float, hi: float, n: int) -> np.ndarray:
    return np.array([(lo + hi) / 2.0]) if n == 1 else np.linspace(lo, hi, n)


def generate_grid_scenarios(count: int = 80, rectangle: Sequence[float] = GRID_RECTANGLE,
                            scales: Optional[CharacteristicScales] = None,
                            shape: Optional[tuple[int, int]] = None, **kw) -> list[Scenario]:
    """Uniform grid of targets in ``rectangle = (x_min, x_max, z_min, z_max)``.

    ``count = 80`` uses an 8 x 10 grid (x by z); other counts use the most
    square factorization. A single target sits at the center; edges include
    the rectangle corners.
    """
    if count < 1:
        raise DomainError("count must be >= 1")
    scales = scales or CharacteristicScales()
    nx, nz = shape or _grid_shape(count)
    if nx * nz != count:
        raise DomainError(f"grid shape {nx}x{nz} does not hold {count} targets")
    x0, x1, z0, z1 = rectangle
    return [make_scenario(float(x), float(z), scales, f"grid{ix * nz + iz:03d}", **kw)
            for ix, x in enumerate(_axis(x0, x1, nx)) for iz, z in enumerate(_axis(z0, z1, nz))]


def generate_random_scenarios(count: int = 114, x_range: Sequence[float] = RANDOM_X_RANGE,
                              z_range: Sequence[float] = RANDOM_Z_RANGE, seed: int = 0,
                              scales: Optional[CharacteristicScales] = None, **kw) -> list[Scenario]:
    """Targets drawn uniformly from the given ranges with a seeded generator."""
    if count < 1:
        raise DomainError("count must be >= 1")
    scales = scales or CharacteristicScales()
    rng = np.random.default_rng(seed)
    xs = rng.uniform(x_range[0], x_range[1], count)
    zs = rng.uniform(z_range[0], z_range[1], count)
    return [make_scenario(float(x), float(z), scales, f"rand{i:03d}", **kw)
            for i, (x, z) in enumerate(zip(xs, zs))]


def accuracy(final: FlightState, target: FlightState, metric: str = FULL_STATE,
             scales: Optional[CharacteristicScales] = None) -> float:
    """Distance between a trajectory's last state and the target.

    Full-state is nondimensional; the position metrics are in meters.
    """
    return goal_distance(final, target, metric, scales or CharacteristicScales())


@dataclass
class RunRecord:
    scenario: str
    planner: str
    delta: float
    energy: float
    wall_time: float
    success: bool
    position_error: float = math.nan
    variant: str = ""
    trajectory: Optional[Trajectory] = field(default=None, repr=False)
    best_distance: float = math.nan

    def row(self) -> dict[str, Any]:
        return {"scenario": self.scenario, "planner": self.planner, "variant": self.variant,
                "success": int(self.success), "delta": self.delta, "position_error": self.position_error,
                "energy": self.energy, "wall_time": self.wall_time,
                "best_distance": self.best_distance}


RECORD_FIELDS = ("scenario", "planner", "variant", "success", "delta", "position_error",
                 "energy", "wall_time", "best_distance")


def _record(scenario: Scenario, planner: str, variant: str, traj: Optional[Trajectory],
            wall: float, scales: CharacteristicScales, best: float = math.nan) -> RunRecord:
    if traj is None:
        # unsolved runs keep the closest approach, in the scenario's goal metric
        return RunRecord(scenario.label, planner, math.nan, 0.0, wall, False, math.nan, variant,
                         best_distance=best)
    return RunRecord(
        scenario.label, planner,
        accuracy(traj.final, scenario.target, FULL_STATE, scales),
        traj.energy, wall, True,
        accuracy(traj.final, scenario.target, POSITION, scales),
        variant, traj)


def run_ospa(scenario: Scenario, config: PlannerConfig, vehicle: Vehicle,
             energy_model: EnergyModel = DEFAULT_ENERGY,
             integrator: IntegratorConfig = DEFAULT_INTEGRATOR, variant: str = "") -> RunRecord:
    """Plan one scenario with the tree planner; failures become records."""
    cfg = dataclasses.replace(config, tolerance=scenario.tolerance,
                              tolerance_metric=scenario.tolerance_metric)
    t0 = time.perf_counter()
    try:
        traj = plan(scenario.start, scenario.target, cfg, vehicle.params, vehicle.scales,
                    energy_model, integrator)
        best = math.nan
    except NoSolutionError as exc:
        traj, best = None, exc.best_distance
    return _record(scenario, "ospa", variant, traj, time.perf_counter() - t0, vehicle.scales, best)


def run_aorrt(scenario: Scenario, config: RrtConfig, vehicle: Vehicle,
              energy_model: EnergyModel = DEFAULT_ENERGY,
              integrator: IntegratorConfig = DEFAULT_INTEGRATOR, variant: str = "") -> RunRecord:
    t0 = time.perf_counter()
    try:
        traj = aorrt_plan(scenario.start, scenario.target, config, vehicle.params, vehicle.scales,
                          energy_model, integrator)
        best = math.nan
    except NoSolutionError as exc:
        traj, best = None, exc.best_distance
    return _record(scenario, "aorrt", variant, traj, time.perf_counter() - t0, vehicle.scales, best)


def precision_rate(records: Sequence[RunRecord]) -> float:
    """Fraction of runs that ended inside the goal region."""
    if not records:
        raise DomainError("precision_rate needs at least one record")
    return sum(1 for r in records if r.success) / len(records)


def occurrence_rates(trajectories: Iterable[Trajectory]) -> dict[Maneuver, float]:
    """Share of each maneuver among all segments of the given solutions.

    Sorted by decreasing rate, ties by maneuver order.
    """
    counts = Counter(m for t in trajectories for m in t.maneuvers)
    total = sum(counts.values())
    if total == 0:
        raise DomainError("occurrence_rates needs at least one segment")
    return {m: counts[m] / total for m in sorted(counts, key=lambda m: (-counts[m], m))}


def _mean_sem(values: Sequence[float]) -> tuple[float, float]:
    if not values:
        return math.nan, math.nan
    arr = np.asarray(values, dtype=float)
    sem = float(arr.std(ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else 0.0
    return float(arr.mean()), sem


def summarize(records: Sequence[RunRecord], **extra) -> dict[str, Any]:
    """Mean and standard error of accuracy, energy and time.

    Accuracy and energy use the solved runs only; time uses every run.
    """
    ok = [r for r in records if r.success]
    d, d_se = _mean_sem([r.delta for r in ok])
    e, e_se = _mean_sem([r.energy for r in ok])
    t, t_se = _mean_sem([r.wall_time for r in records])
    return {**extra, "runs": len(records), "solved": len(ok),
            "precision": len(ok) / len(records) if records else math.nan,
            "delta_mean": d, "delta_sem": d_se, "energy_mean": e, "energy_sem": e_se,
            "time_mean": t, "time_sem": t_se}


def _apply(config: PlannerConfig, names: Sequence[str], value) -> PlannerConfig:
    values = value if len(names) > 1 else (value,)
    changes = {}
    for name, v in zip(names, values):
        if name in ("t_s", "time_steps"):
            v = tuple(v) if isinstance(v, (list, tuple)) else (float(v),)
            name = "time_steps"
        elif name == "k_d":
            v = math.inf if v is None else float(v)
        elif name == "maneuver_set":
            v = tuple(v)
        changes[name] = v
    return dataclasses.replace(config, **changes)


def _ospa_job(args):
    return run_ospa(*args)


def _map(fn, jobs: list, n_jobs: int):
    if n_jobs <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(fn, jobs))


def run_sweep(parameter: str, values: Sequence[Any], scenarios: Sequence[Scenario],
              base: PlannerConfig, vehicle: Vehicle,
              energy_model: EnergyModel = DEFAULT_ENERGY,
              integrator: IntegratorConfig = DEFAULT_INTEGRATOR,
              jobs: int = 1) -> tuple[list[RunRecord], list[dict[str, Any]]]:
    """Run the tree planner for every (value, scenario) pair.

    ``parameter`` names a planner field (``t_s`` is accepted for
    ``time_steps``); a comma-joined name such as ``"k_d,k_w"`` sweeps
    several fields together, each value then being a tuple. Returns the
    records in (value, scenario) order and one summary row per value.
    """
    names = [n.strip() for n in parameter.split(",")]
    records: list[RunRecord] = []
    summary = []
    for value in values:
        cfg = _apply(base, names, value)
        variant = f"{parameter}={value}"
        recs = _map(_ospa_job, [(s, cfg, vehicle, energy_model, integrator, variant)
                                for s in scenarios], jobs)
        records.extend(recs)
        summary.append(summarize(recs, parameter=parameter, value=_jsonable(value)))
    return records, summary


def _jsonable(v):
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, Maneuver):
        return v.to_dict()
    if isinstance(v, float) and math.isinf(v):
        return None
    return v


@dataclass
class ComparisonReport:
    records: list[RunRecord]
    rows: list[dict[str, Any]]

    def waypoint_clouds(self, scales: CharacteristicScales) -> dict[str, list[list[float]]]:
        """Segment end points [m] of every solution, grouped by planner variant."""
        out: dict[str, list[list[float]]] = {}
        for r in self.records:
            if r.trajectory is None:
                continue
            name = r.planner + (f"[{r.variant}]" if r.variant else "")
            out.setdefault(name, []).extend(r.trajectory.waypoints(scales)[1:].tolist())
        return out


def run_comparison(scenarios: Sequence[Scenario], ospa_config: PlannerConfig,
                   rrt_configs: Sequence[RrtConfig], vehicle: Vehicle,
                   energy_model: EnergyModel = DEFAULT_ENERGY,
                   integrator: IntegratorConfig = DEFAULT_INTEGRATOR,
                   match_budget: bool = True) -> ComparisonReport:
    """Both planners on every scenario, AO-RRT once per configuration.

    With ``match_budget`` each AO-RRT run gets the wall time OSPA needed on
    the same scenario. Rows report precision, mean energy over each
    variant's own solutions and mean energies over the scenarios solved by
    both OSPA and that variant.
    """
    records: list[RunRecord] = []
    ospa_by = {}
    rrt_by: dict[str, dict[str, RunRecord]] = {}
    for sc in scenarios:
        rec = run_ospa(sc, ospa_config, vehicle, energy_model, integrator)
        records.append(rec)
        ospa_by[sc.label] = rec
        for rc in rrt_configs:
            cfg = dataclasses.replace(rc, goal_region=sc.tolerance)
            if match_budget:
                cfg = dataclasses.replace(cfg, time_budget=max(rec.wall_time, 1e-3))
            variant = f"control_step={rc.control_step:g}"
            r = run_aorrt(sc, cfg, vehicle, energy_model, integrator, variant)
            records.append(r)
            rrt_by.setdefault(variant, {})[sc.label] = r
    rows = [_row("ospa", "", list(ospa_by.values()), None)]
    for variant, by in rrt_by.items():
        joint = [lbl for lbl in by if by[lbl].success and ospa_by[lbl].success]
        rows.append(_row("aorrt", variant, list(by.values()), joint, ospa_by, by))
    return ComparisonReport(records, rows)


def _row(planner, variant, recs, joint, ospa_by=None, by=None):
    ok = [r.energy for r in recs if r.success]
    row = {"planner": planner, "variant": variant, "runs": len(recs),
           "solved": len(ok), "precision": precision_rate(recs),
           "energy_mean": float(np.mean(ok)) if ok else math.nan,
           "time_mean": float(np.mean([r.wall_time for r in recs]))}
    if joint is not None:
        row["joint"] = len(joint)
        row["joint_energy_ospa"] = float(np.mean([ospa_by[j].energy for j in joint])) if joint else math.nan
        row["joint_energy_aorrt"] = float(np.mean([by[j].energy for j in joint])) if joint else math.nan
    return row


def perching_config(maneuver_set: Sequence[Maneuver] = PERCHING_SET, tolerance: float = 1.0,
                    **kw) -> PlannerConfig:
    """Short-step settings for landing approaches (1 s steps, 2 m corridor, 4 bands).

    Nodes slightly past the landing spot are accepted when they fall inside
    the tolerance, since a 1 s step covers several meters.
    """
    base = dict(time_steps=(1.0,), k_d=2.0, k_w=4, tolerance=tolerance,
                tolerance_metric=POSITION, accept_overshoot=True)
    base.update(kw)
    return PlannerConfig(tuple(maneuver_set), **base)


def perching_scenarios(altitudes: Sequence[float] = PERCH_ALTITUDES, distance: float = 10.0,
                       scales: Optional[CharacteristicScales] = None, tolerance: float = 1.0,
                       **kw) -> list[Scenario]:
    if not altitudes:
        raise DomainError("altitudes must be nonempty")
    scales = scales or CharacteristicScales()
    return [make_scenario(distance, z, scales, f"perch_z{z:g}", tolerance=tolerance,
                          tolerance_metric=POSITION, **kw) for z in altitudes]


def run_perching(altitudes: Sequence[float], vehicle: Vehicle,
                 config: Optional[PlannerConfig] = None, distance: float = 10.0,
                 energy_model: EnergyModel = DEFAULT_ENERGY,
                 integrator: IntegratorConfig = DEFAULT_INTEGRATOR,
                 jobs: int = 1) -> list[RunRecord]:
    """One record per altitude; targets ``distance`` meters ahead of the origin."""
    config = config or perching_config()
    scenarios = perching_scenarios(altitudes, distance, vehicle.scales, config.tolerance)
    return _map(_ospa_job, [(s, config, vehicle, energy_model, integrator, "perch")
                            for s in scenarios], jobs)


def host_metadata() -> dict[str, str]:
    return {"python": platform.python_version(), "machine": platform.machine(),
            "processor": platform.processor() or platform.machine(), "system": platform.system()}


def write_records_csv(path: str | Path, records: Sequence[RunRecord]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=RECORD_FIELDS)
        writer.writeheader()
        for r in records:
            writer.writerow(r.row())


def write_rows_csv(path: str | Path, rows: Sequence[Mapping[str, Any]]) -> None:
    if not rows:
        Path(path).write_text("")
        return
    names = list(rows[0])
    for row in rows[1:]:
        names.extend(k for k in row if k not in names)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=names)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: json.dumps(v) if isinstance(v, (list, dict)) else v
                             for k, v in row.items()})
