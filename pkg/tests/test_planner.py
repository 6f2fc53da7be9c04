import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from flapplan.dynamics import DomainError, FlightState, Maneuver, integrate
from flapplan.energy import maneuver_energy, trajectory_energy
from flapplan.planner import (
    PlanNode,
    PlannerConfig,
    build_tree,
    corridor_distances,
    expand_leaves,
    extract_optimal_path,
    make_corridor,
    partition_by_z,
    plan,
    select_witness,
)
from flapplan.trajectory import NoSolutionError, Trajectory

from oracles import exhaustive_best_energy

M4 = tuple(Maneuver.from_degrees(d, f) for d, f in [(-2, 0), (-5, 0), (-3, 5), (-1, 4)])
START = FlightState(0.0, 0.0, 1.0, 0.0, 0.0, 0.0)


def node(z=0.0, x=0.0, energy=0.0, index=0, parent=None):
    return PlanNode(FlightState(x, z, 1.0, 0.0, 0.0, 0.0), parent=parent, energy=energy, index=index)


def tiny_instances(params, scales, count=10, seed=7):
    """Targets placed next to the end of random 1-3 step maneuver sequences."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        s = START
        for _ in range(int(rng.integers(1, 4))):
            s = integrate(s, M4[int(rng.integers(len(M4)))], 15.0, params, scales)
        dx, dz = rng.uniform(0.2, 2.0), rng.uniform(-2.0, 2.0)
        target = FlightState(s.x + dx / scales.L_c, s.z + dz / scales.L_c, 1.0, 0.0, 0.0, 0.0)
        out.append(target)
    return out


# --- partitioning and witnesses ---------------------------------------------

def test_partition_examples():
    cands = [node(z=z, index=i) for i, z in enumerate([0, 1, 2, 3, 4, 5])]
    assert len(partition_by_z(cands, 1)) == 1
    parts = partition_by_z(cands, 3)
    assert [[n.state.z for n in p] for p in parts] == [[0, 1], [2, 3], [4, 5]]
    same = [node(z=2.0, index=i) for i in range(5)]
    assert len(partition_by_z(same, 4)) == 1


def test_partition_quantile_mode():
    cands = [node(z=z, index=i) for i, z in enumerate([0, 0.1, 0.2, 10, 11, 50])]
    parts = partition_by_z(cands, 3, "quantile")
    assert [len(p) for p in parts] == [2, 2, 2]


def test_partition_errors():
    with pytest.raises(DomainError):
        partition_by_z([], 2)
    with pytest.raises(DomainError):
        partition_by_z([node()], 0)


@given(st.lists(st.floats(-100, 100), min_size=1, max_size=40), st.integers(1, 12))
def test_partition_covers_each_candidate_once(zs, k_w):
    cands = [node(z=z, index=i) for i, z in enumerate(zs)]
    parts = partition_by_z(cands, k_w)
    assert 1 <= len(parts) <= k_w
    flat = [n.index for p in parts for n in p]
    assert sorted(flat) == list(range(len(zs)))
    # bands are ordered and do not overlap
    for a, b in zip(parts, parts[1:]):
        assert max(n.state.z for n in a) <= min(n.state.z for n in b)


def test_select_witness_examples():
    ns = [node(energy=e, index=i) for i, e in enumerate([5, 3, 7])]
    assert select_witness(ns).energy == 3
    assert select_witness([ns[0]]) is ns[0]
    a, b = node(z=2.0, energy=1.0, index=0), node(z=1.0, energy=1.0, index=1)
    assert select_witness([a, b]) is b
    c, d = node(z=1.0, x=5.0, energy=1.0, index=0), node(z=1.0, x=4.0, energy=1.0, index=1)
    assert select_witness([c, d]) is d


# --- expansion ----------------------------------------------------------------

def test_expand_cardinality(params, scales, vehicle):
    from flapplan.bench import REDUCED_SET
    sf = FlightState(2000.0 / scales.L_c, 0.0, 1.0, 0.0, 0.0, 0.0)
    cfg = PlannerConfig(REDUCED_SET, (3.0,))
    cor = make_corridor(START, sf, math.inf, scales)
    cands = expand_leaves([PlanNode(START)], cfg, params, scales, cor, sf)
    assert len(cands) == 17
    assert [c.maneuver for c in cands] == list(REDUCED_SET)


def test_expand_corridor_filter_matches_oracle(params, scales):
    sf = FlightState(220.0 / scales.L_c, 30.0 / scales.L_c, 1.0, 0.0, 0.0, 0.0)
    base = PlannerConfig(M4, (12.0, 15.0))
    leaves = [PlanNode(START)]
    everything = expand_leaves(leaves, base, params, scales, make_corridor(START, sf, math.inf, scales), sf)
    cor = make_corridor(START, sf, 4.0, scales)
    kept = expand_leaves(leaves, base, params, scales, cor, sf)
    pts = np.array([[c.state.x * scales.L_c, c.state.z * scales.L_c] for c in everything])
    expected = [c for c, d in zip(everything, corridor_distances(cor, pts)) if d <= 4.0]
    assert [(c.maneuver, c.duration) for c in kept] == [(c.maneuver, c.duration) for c in expected]
    assert len(kept) < len(everything)


def test_expand_thin_corridor(params, scales):
    sf = FlightState(220.0 / scales.L_c, 30.0 / scales.L_c, 1.0, 0.0, 0.0, 0.0)
    cfg = PlannerConfig(M4, (12.0,), k_d=1e-9)
    cands = expand_leaves([PlanNode(START)], cfg, params, scales, make_corridor(START, sf, 1e-9, scales), sf)
    assert cands == []


def test_expand_drops_overshoot(params, scales):
    sf = FlightState(30.0 / scales.L_c, 0.0, 1.0, 0.0, 0.0, 0.0)
    cfg = PlannerConfig(M4, (12.0,))
    cands = expand_leaves([PlanNode(START)], cfg, params, scales, make_corridor(START, sf, math.inf, scales), sf)
    assert cands == []


def test_expand_requires_leaves(params, scales):
    sf = FlightState(30.0 / scales.L_c, 0.0, 1.0, 0.0, 0.0, 0.0)
    with pytest.raises(DomainError):
        expand_leaves([], PlannerConfig(M4), params, scales, make_corridor(START, sf, 1.0, scales), sf)


# --- planning -------------------------------------------------------------

def test_single_maneuver_target(params, scales):
    ends = {m: integrate(START, m, 15.0, params, scales) for m in M4}
    m = M4[0]
    s = ends[m]
    sf = FlightState(s.x + 1.0 / scales.L_c, s.z, 1.0, 0.0, 0.0, 0.0)
    cfg = PlannerConfig(M4, (15.0,), tolerance=6.0, max_depth=1)
    traj = plan(START, sf, cfg, params, scales)
    reachable = [mm for mm, e in ends.items()
                 if e.x <= sf.x and max(abs(e.x - sf.x), abs(e.z - sf.z)) * scales.L_c <= 3.0]
    cheapest = min(maneuver_energy(mm, 15.0) for mm in reachable)
    assert len(traj.segments) == 1 and traj.energy == cheapest


def test_matches_exhaustive_search(params, scales):
    for sf in tiny_instances(params, scales, count=4, seed=11):
        cfg = PlannerConfig(M4, (15.0,), tolerance=6.0, max_depth=3)
        traj = plan(START, sf, cfg, params, scales)
        best, _ = exhaustive_best_energy(START, sf, M4, 15.0, 3, 6.0, "position-box", params, scales)
        assert traj.energy == best


def test_pruned_energy_bounded_by_exhaustive(params, scales):
    for sf in tiny_instances(params, scales, count=4, seed=5):
        cfg = PlannerConfig(M4, (15.0,), k_d=10.0, k_w=2, tolerance=6.0, max_depth=3)
        best, _ = exhaustive_best_energy(START, sf, M4, 15.0, 3, 6.0, "position-box", params, scales)
        try:
            traj = plan(START, sf, cfg, params, scales)
        except NoSolutionError:
            continue
        assert traj.energy >= best


def test_no_solution_in_thin_corridor(params, scales):
    sf = FlightState(220.0 / scales.L_c, 30.0 / scales.L_c, 1.0, 0.0, 0.0, 0.0)
    cfg = PlannerConfig(M4, (12.0,), k_d=1e-6, k_w=5)
    with pytest.raises(NoSolutionError) as info:
        plan(START, sf, cfg, params, scales)
    assert math.isinf(info.value.best_distance)


def test_target_must_be_ahead(params, scales):
    with pytest.raises(DomainError):
        plan(START, START, PlannerConfig(M4), params, scales)


@pytest.fixture(scope="module")
def medium_tree(params, scales):
    from flapplan.bench import REDUCED_SET
    sf = FlightState(225.0 / scales.L_c, 20.0 / scales.L_c, 1.0, 0.0, 0.0, 0.0)
    cfg = PlannerConfig(REDUCED_SET, (8.0,), k_d=15.0, k_w=10)
    return sf, cfg, build_tree(START, sf, cfg, params, scales)


def test_tree_invariants(medium_tree, scales):
    sf, cfg, tree = medium_tree
    cor = tree.corridor
    for n in tree.candidates:
        assert n.state.x > n.parent.state.x
        assert n.state.x <= sf.x
        assert n.energy == n.parent.energy + maneuver_energy(n.maneuver, n.duration)
        assert n.depth == n.parent.depth + 1
    pts = np.array([[n.state.x * scales.L_c, n.state.z * scales.L_c] for n in tree.candidates])
    assert np.all(corridor_distances(cor, pts) <= cfg.k_d + 1e-3)
    for level in tree.levels:
        assert len(level) <= cfg.k_w * len(cfg.time_steps)
    assert tree.stats()["inserted"] <= tree.height * cfg.k_w * len(cfg.time_steps)
    # only inserted witnesses have children
    for n in tree.candidates:
        assert n.inserted or not n.children


def test_trajectory_energy_bookkeeping(medium_tree, scales):
    sf, cfg, tree = medium_tree
    traj = extract_optimal_path(tree, sf, cfg.tolerance, cfg.tolerance_metric, scales)
    assert traj.energy == trajectory_energy([(s.maneuver, s.duration) for s in traj.segments])
    for a, b in zip(traj.segments, traj.segments[1:]):
        assert a.end == b.start


def test_plan_is_deterministic(params, scales, medium_tree):
    sf, cfg, _ = medium_tree
    a = plan(START, sf, cfg, params, scales)
    b = plan(START, sf, cfg, params, scales)
    assert a.to_json() == b.to_json()


def test_multi_resolution_width_bound(params, scales):
    sf = FlightState(150.0 / scales.L_c, 10.0 / scales.L_c, 1.0, 0.0, 0.0, 0.0)
    cfg = PlannerConfig(M4, (10.0, 12.0, 14.0), k_d=15.0, k_w=3)
    tree = build_tree(START, sf, cfg, params, scales)
    assert {c.duration for c in tree.candidates} >= {10.0, 12.0}
    assert all(len(level) <= 3 * 3 for level in tree.levels)


# --- extraction --------------------------------------------------------------

def _chain(scales, energies_and_x, target_x):
    root = PlanNode(FlightState(0, 0, 1, 0, 0, 0))
    nodes = [root]
    for i, (e, x, parent) in enumerate(energies_and_x, start=1):
        nodes.append(PlanNode(FlightState(x / scales.L_c, 0, 1, 0, 0, 0), parent=nodes[parent],
                              maneuver=Maneuver(0.0, 0.0), duration=1.0, energy=e,
                              depth=nodes[parent].depth + 1, index=i))
    return nodes


def test_extract_examples(scales):
    sf = FlightState(100.0 / scales.L_c, 0, 1, 0, 0, 0)
    nodes = _chain(scales, [(5.0, 99.0, 0)], 100.0)
    traj = extract_optimal_path(nodes, sf, 6.0, "position-box", scales)
    assert len(traj.segments) == 1 and traj.energy == 5.0
    nodes = _chain(scales, [(50.0, 60.0, 0), (100.0, 99.0, 1), (90.0, 101.0, 1)], 100.0)
    traj = extract_optimal_path(nodes, sf, 6.0, "position-box", scales)
    assert traj.energy == 90.0 and traj.final.x == nodes[3].state.x


def test_extract_inner_node_and_exhaustive_paths(scales):
    sf = FlightState(100.0 / scales.L_c, 0, 1, 0, 0, 0)
    chain = [(10.0, 98.0, 0), (30.0, 150.0, 1), (12.0, 40.0, 0), (20.0, 101.0, 3), (40.0, 99.5, 4)]
    nodes = _chain(scales, chain, 100.0)
    traj = extract_optimal_path(nodes, sf, 6.0, "position-box", scales)
    # enumerate every root-to-node path as oracle
    best = min(n.energy for n in nodes[1:] if abs(n.state.x * scales.L_c - 100.0) <= 3.0)
    assert traj.energy == best == 10.0
    assert len(traj.segments) == 1


def test_extract_no_solution(scales):
    sf = FlightState(100.0 / scales.L_c, 0, 1, 0, 0, 0)
    nodes = _chain(scales, [(5.0, 50.0, 0)], 100.0)
    with pytest.raises(NoSolutionError) as info:
        extract_optimal_path(nodes, sf, 6.0, "position-box", scales)
    assert info.value.best_distance == pytest.approx(50.0)


# --- configuration ---------------------------------------------------------

def test_config_validation():
    with pytest.raises(DomainError):
        PlannerConfig(())
    with pytest.raises(DomainError):
        PlannerConfig(M4, (0.0,))
    with pytest.raises(DomainError):
        PlannerConfig(M4, k_w=0)
    with pytest.raises(DomainError):
        PlannerConfig(M4, tolerance=0.0)
    with pytest.raises(DomainError):
        PlannerConfig(M4, tolerance_metric="manhattan")


def test_config_round_trip():
    cfg = PlannerConfig(M4, (11.0, 13.0), k_d=15.0, k_w=25, tolerance=0.5,
                        tolerance_metric="full-state", partition_mode="quantile")
    assert PlannerConfig.from_dict(cfg.to_dict()) == cfg
    unbounded = PlannerConfig(M4)
    assert unbounded.to_dict()["k_d"] is None
    assert PlannerConfig.from_dict(unbounded.to_dict()) == unbounded
    with pytest.raises(DomainError):
        PlannerConfig.from_dict({**cfg.to_dict(), "extra": 1})


def test_default_depth_cap(scales):
    cfg = PlannerConfig(M4, (12.0,))
    assert cfg.depth_cap(225.0, scales) == math.ceil(3 * 225.0 / (scales.U_c * 12.0))
    assert dataclasses.replace(cfg, max_depth=2).depth_cap(225.0, scales) == 2


def test_trajectory_json_round_trip(medium_tree, params, scales):
    sf, cfg, _ = medium_tree
    traj = plan(START, sf, cfg, params, scales)
    again = Trajectory.from_dict(__import__("json").loads(traj.to_json()))
    assert again == traj
