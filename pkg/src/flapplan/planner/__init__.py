"""Energy-optimal maneuver planning by pruned tree search."""

from .corridor import Corridor, ReferenceCurve, corridor_distance, corridor_distances, reference_curve_eval
from .tree import (
    PARTITION_MODES,
    PlanNode,
    PlannerConfig,
    PlanTree,
    build_tree,
    expand_leaves,
    extract_optimal_path,
    make_corridor,
    partition_by_z,
    plan,
    select_witness,
)

__all__ = [
    "Corridor", "PARTITION_MODES", "PlanNode", "PlanTree", "PlannerConfig", "ReferenceCurve",
    "build_tree", "corridor_distance", "corridor_distances", "expand_leaves",
    "extract_optimal_path", "make_corridor", "partition_by_z", "plan", "reference_curve_eval",
    "select_witness",
]
