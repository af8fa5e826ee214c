"""Majority-rule cellular automata on tori, grids, cycles and general graphs."""

from ._backend import kernels as _kernels
from .analysis import (
    BoundReport,
    ClusterReport,
    InstanceTooLarge,
    Rectangle,
    ThresholdsNotEstablished,
    combine,
    consensus_time_bound,
    consensus_time_bound_for,
    covering_rectangles,
    is_eternal_set,
    is_robust_set,
    moore_clusters,
    rectangle_distance,
    rectangulate,
    smallest_covering_rectangle,
    survival_bound,
    threshold_values,
)
from .dynamics import (
    BIASED,
    CONSERVATIVE,
    MAJORITY,
    Classification,
    Color,
    CycleNotFound,
    Generation,
    RuleKind,
    RunOutcome,
    UpdateRule,
    classify,
    run_to_cycle,
    step,
)
from .experiments import ExperimentConfig, SweepSummary, TopologySpec, random_generation, run_trial, sweep
from .topology import NeighborhoodKind, Topology, build_cycle, build_lattice, lattice_size, vertex_distance

BACKEND = _kernels.NAME

__version__ = "0.1.0"
