from .actor import (
    ActorState,
    advance,
    init_params,
    instantaneous_forward,
    reset,
    reset_rows,
)
from .topology import (
    VARIANTS,
    Edge,
    MacroGrouping,
    PipelineTopology,
    build_topology,
    dependency_horizon,
    mask_connections,
    mask_groups,
    topology_from_text,
    topology_to_text,
    verify_constraint,
)

__all__ = [
    "ActorState",
    "advance",
    "init_params",
    "instantaneous_forward",
    "reset",
    "reset_rows",
    "VARIANTS",
    "Edge",
    "MacroGrouping",
    "PipelineTopology",
    "build_topology",
    "dependency_horizon",
    "mask_connections",
    "mask_groups",
    "topology_from_text",
    "topology_to_text",
    "verify_constraint",
]
