"""Layer-wise parallelism planner and accelerator-array simulator."""

__version__ = "0.1.0"

from .commcost import CommCost, Parallelism, inter_cost, intra_cost, plan_cost
from .netspec import (LayerShapes, NetworkModel, emit_model, infer_shapes,
                      parse_model)
from .planner import (PlanMatrix, brute_force, hierarchical_partition,
                      partition_two, plan_trick)
from .simarray import HardwareConfig, SimReport, simulate_step, simulate_training
from .topology import Topology, route

__all__ = [
    "CommCost", "Parallelism", "inter_cost", "intra_cost", "plan_cost",
    "LayerShapes", "NetworkModel", "emit_model", "infer_shapes", "parse_model",
    "PlanMatrix", "brute_force", "hierarchical_partition", "partition_two",
    "plan_trick", "HardwareConfig", "SimReport", "simulate_step",
    "simulate_training", "Topology", "route", "__version__",
]
