"""Command-line front end: ``flapplan <subcommand> [options]``.

Every subcommand reads JSON, writes into a fresh output directory and exits
with 0 on success, 2 on configuration errors, 3 when no solution was found
and 4 on numerical divergence. Failures print a JSON error object on stderr
and leave no output directory behind.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import math
import os
import shutil
import sys
import tempfile
from pathlib import Path
from typing import Any, Optional

from . import __version__, bench
from .aorrt import RrtConfig
from .dynamics import (
    DegenerateStateError,
    DivergenceError,
    DomainError,
    FlightState,
    Maneuver,
    Vehicle,
    load_vehicle,
)
from .planner import PlannerConfig, plan
from .trajectory import (
    NoSolutionError,
    Segment,
    Trajectory,
    read_trajectory,
    trajectory_timeseries,
    write_timeseries_csv,
)
from .dynamics.model import simulate
from .energy import maneuver_energy

VEHICLE_ENV = "FLAPPLAN_VEHICLE"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NO_SOLUTION = 3
EXIT_DIVERGENCE = 4

MANEUVER_SETS = {"full": bench.FULL_SET, "reduced": bench.REDUCED_SET, "perching": bench.PERCHING_SET}

log = logging.getLogger("flapplan")


class ConfigError(Exception):
    pass


def _read_json(path: Optional[str]) -> dict[str, Any]:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})")
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return data


def _maneuver_set(value) -> tuple[Maneuver, ...]:
    if isinstance(value, str):
        if value not in MANEUVER_SETS:
            raise ConfigError(f"unknown maneuver set {value!r}; choose from {sorted(MANEUVER_SETS)}")
        return MANEUVER_SETS[value]
    return tuple(Maneuver.from_dict(m) for m in value)


def _planner(data: dict[str, Any], default_set: str = "reduced") -> PlannerConfig:
    data = dict(data)
    mset = _maneuver_set(data.pop("maneuver_set", default_set))
    data["maneuver_set"] = [m.to_dict() for m in mset]
    return PlannerConfig.from_dict(data)


def _state(data: Optional[dict[str, Any]], default: FlightState) -> FlightState:
    return default if data is None else FlightState.from_dict(data)


def _scenarios(source, vehicle: Vehicle, seed: int) -> list[bench.Scenario]:
    if isinstance(source, list):
        return [bench.Scenario.from_dict(s) for s in source]
    source = dict(source or {"kind": "grid"})
    kind = source.pop("kind", "grid")
    if kind == "grid":
        if "shape" in source:
            source["shape"] = tuple(source["shape"])
        return bench.generate_grid_scenarios(scales=vehicle.scales, **source)
    if kind == "random":
        source.setdefault("seed", seed)
        return bench.generate_random_scenarios(scales=vehicle.scales, **source)
    raise ConfigError(f"unknown scenario kind {kind!r}")


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


class Output:
    """Staging directory that becomes ``target`` only when the run succeeds."""

    def __init__(self, target: str, force: bool):
        self.target = Path(target)
        if self.target.exists() and any(self.target.iterdir()) and not force:
            raise ConfigError(f"output directory {target} is not empty (use --force)")
        self.target.parent.mkdir(parents=True, exist_ok=True)
        self.stage = Path(tempfile.mkdtemp(prefix=".flapplan-", dir=self.target.parent))

    def path(self, name: str) -> Path:
        return self.stage / name

    def write_json(self, name: str, obj) -> None:
        self.path(name).write_text(_json_text(obj))

    def commit(self) -> None:
        if self.target.exists():
            shutil.rmtree(self.target)
        os.replace(self.stage, self.target)

    def discard(self) -> None:
        shutil.rmtree(self.stage, ignore_errors=True)


def cmd_plan(args, vehicle: Vehicle, out: Output) -> int:
    cfg = _read_json(args.config)
    if "target_m" in cfg:
        x, z = cfg["target_m"]
        start = _state(cfg.get("start"), FlightState(0.0, 0.0, 1.0, 0.0, 0.0, 0.0))
        target = FlightState(x / vehicle.scales.L_c, z / vehicle.scales.L_c,
                             start.u, start.w, 0.0, 0.0)
    elif "target" in cfg:
        start = _state(cfg.get("start"), FlightState(0.0, 0.0, 1.0, 0.0, 0.0, 0.0))
        target = FlightState.from_dict(cfg["target"])
    else:
        raise ConfigError("plan config needs 'target_m' [x, z] in meters or a 'target' state")
    pcfg = _planner(cfg.get("planner", {}))
    traj = plan(start, target, pcfg, vehicle.params, vehicle.scales)
    out.path("trajectory.json").write_text(traj.to_json() + "\n")
    write_timeseries_csv(out.path("trajectory.csv"),
                         trajectory_timeseries(traj, vehicle.params, vehicle.scales))
    log.info("energy %.1f W*s over %d segments", traj.energy, len(traj.segments))
    return EXIT_OK


def cmd_sweep(args, vehicle: Vehicle, out: Output) -> int:
    cfg = _read_json(args.config)
    if "parameter" not in cfg or "values" not in cfg:
        raise ConfigError("sweep config needs 'parameter' and 'values'")
    scenarios = _scenarios(cfg.get("scenarios"), vehicle, args.seed)
    base = _planner(cfg.get("planner", {}))
    values = cfg["values"]
    if cfg["parameter"] == "maneuver_set":
        values = [_maneuver_set(v) for v in values]
    records, summary = bench.run_sweep(cfg["parameter"], values, scenarios, base, vehicle,
                                       jobs=args.jobs)
    bench.write_records_csv(out.path("records.csv"), records)
    bench.write_rows_csv(out.path("summary.csv"), summary)
    out.write_json("summary.json", {"summary": summary, "host": bench.host_metadata()})
    return EXIT_OK


def cmd_compare(args, vehicle: Vehicle, out: Output) -> int:
    cfg = _read_json(args.config)
    scenarios = _scenarios(cfg.get("scenarios", {"kind": "random", "count": 20}), vehicle, args.seed)
    ospa = _planner(cfg.get("planner", {}))
    rrt = dict(cfg.get("aorrt", {}))
    steps = rrt.pop("control_steps", [3.0, 6.0, 12.0])
    mset = _maneuver_set(rrt.pop("maneuver_set", "reduced"))
    rrt.setdefault("seed", args.seed)
    configs = [RrtConfig(mset, control_step=float(s), **rrt) for s in steps]
    report = bench.run_comparison(scenarios, ospa, configs, vehicle,
                                  match_budget=cfg.get("match_budget", True))
    bench.write_records_csv(out.path("records.csv"), report.records)
    bench.write_rows_csv(out.path("comparison.csv"), report.rows)
    out.write_json("comparison.json", {"rows": report.rows, "host": bench.host_metadata(),
                                       "waypoints": report.waypoint_clouds(vehicle.scales)})
    return EXIT_OK


def cmd_perch(args, vehicle: Vehicle, out: Output) -> int:
    cfg = _read_json(args.config)
    altitudes = cfg.get("altitudes", list(bench.PERCH_ALTITUDES))
    pdata = dict(cfg.get("planner", {}))
    pcfg = bench.perching_config(_maneuver_set(pdata.pop("maneuver_set", "perching")), **pdata)
    records = bench.run_perching(altitudes, vehicle, pcfg, float(cfg.get("distance", 10.0)),
                                 jobs=args.jobs)
    bench.write_records_csv(out.path("records.csv"), records)
    for rec in records:
        if rec.trajectory is not None:
            rec.trajectory.write_json(out.path(f"{rec.scenario}.json"))
    out.write_json("summary.json", {"summary": bench.summarize(records), "host": bench.host_metadata()})
    return EXIT_OK


def cmd_maneuvers(args, vehicle: Vehicle, out: Output) -> int:
    if args.published:
        rates = bench.published_rates()
        source = "published"
    else:
        paths = []
        for p in args.trajectories:
            p = Path(p)
            paths.extend(sorted(p.glob("**/*.json")) if p.is_dir() else [p])
        trajs = []
        for p in paths:
            try:
                trajs.append(read_trajectory(p))
            except (KeyError, TypeError, json.JSONDecodeError):
                log.info("skipping %s (not a trajectory)", p)
        if not trajs:
            raise ConfigError("no trajectories found; pass files, directories or --published")
        rates = bench.occurrence_rates(trajs)
        source = f"{len(trajs)} trajectories"
    subset = bench.reduce_maneuver_set(rates, args.threshold, bench.FULL_SET)
    out.write_json("rates.json", {"source": source, "rates": [
        {**m.to_dict(), "xi": xi} for m, xi in rates.items()]})
    out.write_json("maneuver_set.json", {"threshold": args.threshold,
                                         "maneuver_set": [m.to_dict() for m in subset]})
    log.info("%d maneuvers at threshold %g", len(subset), args.threshold)
    return EXIT_OK


def cmd_simulate(args, vehicle: Vehicle, out: Output) -> int:
    cfg = _read_json(args.config)
    if "schedule" not in cfg or not cfg["schedule"]:
        raise ConfigError("simulate config needs a nonempty 'schedule'")
    state = _state(cfg.get("start"), FlightState(0.0, 0.0, 1.0, 0.0, 0.0, 0.0))
    segments = []
    energy = 0.0
    for item in cfg["schedule"]:
        m = Maneuver.from_dict(item)
        duration = float(item["duration"])
        e = maneuver_energy(m, duration)
        _, hist = simulate(state, m, duration, vehicle.params, vehicle.scales)
        end = FlightState.from_array(hist[-1])
        segments.append(Segment(m, duration, e, state, end))
        energy += e
        state = end
    traj = Trajectory(segments[0].start, tuple(segments), energy, "schedule", {})
    out.path("trajectory.json").write_text(traj.to_json() + "\n")
    write_timeseries_csv(out.path("timeseries.csv"),
                         trajectory_timeseries(traj, vehicle.params, vehicle.scales))
    return EXIT_OK


COMMANDS = {"plan": cmd_plan, "sweep": cmd_sweep, "compare": cmd_compare, "perch": cmd_perch,
            "maneuvers": cmd_maneuvers, "simulate": cmd_simulate}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--vehicle", default=os.environ.get(VEHICLE_ENV),
                        help=f"vehicle JSON (default: ${VEHICLE_ENV} or the bundled vehicle)")
    common.add_argument("--config", help="JSON configuration for the subcommand")
    common.add_argument("--out", required=True, help="output directory")
    common.add_argument("--seed", type=int, default=0, help="seed for random scenarios and AO-RRT")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for independent runs")
    common.add_argument("--force", action="store_true", help="replace a nonempty output directory")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(prog="flapplan", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("plan", parents=[common], help="plan one trajectory")
    sub.add_parser("sweep", parents=[common], help="sweep a planner parameter over scenarios")
    sub.add_parser("compare", parents=[common], help="tree planner against AO-RRT")
    sub.add_parser("perch", parents=[common], help="landing approaches at several altitudes")
    m = sub.add_parser("maneuvers", parents=[common], help="occurrence rates and reduced sets")
    m.add_argument("trajectories", nargs="*", help="trajectory JSON files or directories")
    m.add_argument("--published", action="store_true", help="use the bundled published rates")
    m.add_argument("--threshold", type=float, default=0.02, help="minimum occurrence rate")
    sub.add_parser("simulate", parents=[common], help="integrate a maneuver schedule")
    return parser


def _fail(code: int, kind: str, message: str, **extra) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message, "exit_code": code, **extra}) + "\n")
    return code


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(message)s")
    if args.jobs < 1:
        return _fail(EXIT_CONFIG, "config", "--jobs must be >= 1")
    out = None
    try:
        vehicle = load_vehicle(args.vehicle)
        out = Output(args.out, args.force)
        code = COMMANDS[args.command](args, vehicle, out)
        out.commit()
        return code
    except NoSolutionError as exc:
        best = exc.best_distance
        return _fail(EXIT_NO_SOLUTION, "no-solution", str(exc),
                     best_distance=None if math.isinf(best) else best)
    except (DivergenceError, DegenerateStateError) as exc:
        return _fail(EXIT_DIVERGENCE, "divergence", str(exc))
    except (ConfigError, DomainError, ValueError, KeyError, TypeError, FileNotFoundError,
            json.JSONDecodeError) as exc:
        return _fail(EXIT_CONFIG, "config", str(exc) or type(exc).__name__)
    finally:
        if out is not None and out.stage.exists():
            out.discard()


if __name__ == "__main__":
    sys.exit(main())
