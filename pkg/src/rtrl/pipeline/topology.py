"""Pipeline stage graphs for actors whose layers run in parallel.

A topology describes a feed-forward network executed as a temporal
pipeline: every stage recomputes once per tick, reading only buffers
written on the previous tick.  An edge (i, j) therefore carries a
one-tick delay, and an observation reaching the action head over a path
of length L is L ticks old.  Skip edges shorten that path; macro
grouping fuses consecutive layers into one stage when a single layer
computes faster than one environment step.

Node indices: 0 is the observation buffer, 1..n_stages are stages, and
n_stages is the action head.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import yaml

__all__ = [
    "VARIANTS",
    "Edge",
    "MacroGrouping",
    "PipelineTopology",
    "build_topology",
    "dependency_horizon",
    "verify_constraint",
    "mask_connections",
    "mask_groups",
    "topology_to_text",
    "topology_from_text",
]

VARIANTS = (
    "vanilla",
    "proj_from_obs",
    "proj_to_action",
    "proj_to_action_residual",
    "all_skips",
)

EDGE_KINDS = ("main", "skip", "residual")


@dataclass(frozen=True)
class Edge:
    """Directed connection src -> dst between pipeline nodes (one-tick delay)."""

    src: int
    dst: int
    kind: str = "main"


@dataclass(frozen=True)
class MacroGrouping:
    """How layers fold into stages when one layer is faster than one env step."""

    layers_per_slot: int
    # per stage: [start, end) indices into the layer list
    spans: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class PipelineTopology:
    variant: str
    obs_dim: int
    # output width of each linear layer; the last entry is the head width
    layer_dims: tuple[int, ...]
    # environment steps consumed while one layer computes
    exec_time: Fraction
    edges: tuple[Edge, ...]

    @property
    def n_layers(self) -> int:
        return len(self.layer_dims)

    def grouping(self) -> MacroGrouping:
        per_slot = _layers_per_slot(self.exec_time)
        spans = _stage_spans(self.n_layers, per_slot)
        return MacroGrouping(per_slot, spans)

    @property
    def n_stages(self) -> int:
        return len(self.grouping().spans)

    def node_width(self, node: int) -> int:
        """Buffer width of a node (0 = observation, 1..n_stages = stage outputs)."""
        if node == 0:
            return self.obs_dim
        start, end = self.grouping().spans[node - 1]
        return self.layer_dims[end - 1]

    def stage_in_edges(self, stage: int) -> tuple[Edge, ...]:
        """Incoming main/skip edges of a stage, main first then skips by source."""
        incoming = [e for e in self.edges if e.dst == stage and e.kind != "residual"]
        incoming.sort(key=lambda e: (e.kind != "main", e.src))
        return tuple(incoming)

    def stage_residual_edge(self, stage: int) -> Edge | None:
        for e in self.edges:
            if e.dst == stage and e.kind == "residual":
                return e
        return None

    def env_steps_per_tick(self) -> int:
        return max(1, math.ceil(self.exec_time))


def _layers_per_slot(exec_time: Fraction) -> int:
    if exec_time <= 0:
        raise ValueError(f"exec_time must be positive, got {exec_time}")
    if exec_time >= 1:
        return 1
    return math.ceil(1 / exec_time)


def _stage_spans(n_layers: int, per_slot: int) -> tuple[tuple[int, int], ...]:
    n_stages = math.ceil(n_layers / per_slot)
    spans = []
    start = 0
    for s in range(n_stages):
        # the last stage absorbs the remainder
        end = n_layers if s == n_stages - 1 else start + per_slot
        spans.append((start, end))
        start = end
    return tuple(spans)


def _variant_edges(variant: str, n_stages: int) -> tuple[Edge, ...]:
    edges = [Edge(j - 1, j, "main") for j in range(1, n_stages + 1)]
    if variant == "vanilla" or n_stages == 1:
        return tuple(edges)
    if variant == "proj_from_obs":
        edges += [Edge(0, j, "skip") for j in range(2, n_stages + 1)]
    elif variant == "proj_to_action":
        edges += [Edge(i, n_stages, "skip") for i in range(n_stages - 1)]
    elif variant == "proj_to_action_residual":
        edges += [Edge(i, n_stages, "skip") for i in range(n_stages - 1)]
        edges += [Edge(j - 1, j, "residual") for j in range(2, n_stages + 1)]
    elif variant == "all_skips":
        edges += [
            Edge(i, j, "skip")
            for i in range(n_stages)
            for j in range(i + 2, n_stages + 1)
        ]
    else:
        raise ValueError(f"unknown variant {variant!r}; known: {VARIANTS}")
    return tuple(edges)


def build_topology(
    variant: str,
    depth: int,
    obs_dim: int,
    hidden_dim: int,
    out_dim: int,
    exec_time: Fraction | int | str = 1,
    layer_dims: tuple[int, ...] | None = None,
) -> PipelineTopology:
    """Construct a topology with ``depth`` layers.

    ``layer_dims`` overrides the default [hidden]*(depth-1) + [out].
    With exec_time < 1 consecutive layers fold into macro stages and the
    skip pattern applies at stage granularity.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; known: {VARIANTS}")
    exec_time = Fraction(exec_time)
    if layer_dims is None:
        if depth < 1:
            raise ValueError("depth must be >= 1")
        layer_dims = tuple([hidden_dim] * (depth - 1) + [out_dim])
    else:
        layer_dims = tuple(int(d) for d in layer_dims)
        if len(layer_dims) != depth:
            raise ValueError(f"layer_dims length {len(layer_dims)} != depth {depth}")
    per_slot = _layers_per_slot(exec_time)
    n_stages = math.ceil(len(layer_dims) / per_slot)
    edges = _variant_edges(variant, n_stages)
    return PipelineTopology(variant, int(obs_dim), layer_dims, exec_time, edges)


def dependency_horizon(topology: PipelineTopology) -> tuple[int, int]:
    """(shortest, longest) path length in ticks from observation to head."""
    n = topology.n_stages
    adj: dict[int, list[int]] = {i: [] for i in range(n + 1)}
    for e in topology.edges:
        adj[e.src].append(e.dst)
    shortest = [math.inf] * (n + 1)
    longest = [-math.inf] * (n + 1)
    shortest[0] = longest[0] = 0
    for node in range(n + 1):  # nodes are already in topological order
        if math.isinf(shortest[node]):
            continue
        for nxt in adj[node]:
            shortest[nxt] = min(shortest[nxt], shortest[node] + 1)
            longest[nxt] = max(longest[nxt], longest[node] + 1)
    if math.isinf(shortest[n]):
        raise ValueError("no path from observation to action head")
    return int(shortest[n]), int(longest[n])


def verify_constraint(topology: PipelineTopology) -> bool:
    """Check the tick semantics: every edge crosses at least one tick and
    grouping matches the execution time.

    Under the buffer discipline an observation consumed over a path of
    length L ticks has real age L * ceil(exec_time) env steps, so the
    per-path layer budget floor(age / exec_time) is never exceeded when
    (a) the graph is a forward DAG with src < dst everywhere and (b) the
    macro group size equals ceil(1 / exec_time).
    """
    n = topology.n_stages
    for e in topology.edges:
        if not (0 <= e.src < e.dst <= n):
            return False
        if e.kind not in EDGE_KINDS:
            return False
    grouping = topology.grouping()
    if grouping.layers_per_slot != _layers_per_slot(topology.exec_time):
        return False
    ticks_per_action = topology.env_steps_per_tick()
    try:
        shortest, longest = dependency_horizon(topology)
    except ValueError:
        return False
    for path_len in (shortest, longest):
        age = path_len * ticks_per_action
        if path_len > math.floor(age / topology.exec_time):
            return False
    return True


def mask_groups(topology: PipelineTopology) -> dict[str, tuple[Edge, ...]]:
    """Named groups of maskable edges for ablation switches."""
    groups: dict[str, list[Edge]] = {}
    n = topology.n_stages
    for e in topology.edges:
        if e.kind == "skip":
            name = "from_obs" if e.src == 0 else f"from_stage_{e.src}"
            groups.setdefault(name, []).append(e)
        elif e.kind == "residual":
            groups.setdefault("residual", []).append(e)
        elif e.kind == "main" and e.src == n - 1 and e.dst == n:
            groups.setdefault("last_stage_to_head", []).append(e)
    return {k: tuple(v) for k, v in groups.items()}


def mask_connections(topology: PipelineTopology, groups: set[str] | frozenset[str]) -> frozenset[Edge]:
    """Edges disabled by the named groups; masked edges read as zeros at
    assembly while their parameter blocks stay in place."""
    available = mask_groups(topology)
    unknown = set(groups) - set(available)
    if unknown:
        raise ValueError(
            f"unknown mask groups {sorted(unknown)}; valid for this topology: {sorted(available)}"
        )
    masked: set[Edge] = set()
    for g in groups:
        masked.update(available[g])
    return frozenset(masked)


# ---------------------------------------------------------------------------
# serialization

_SCHEMA = "rtrl-topology/1"


def topology_to_text(topology: PipelineTopology) -> str:
    doc = {
        "schema": _SCHEMA,
        "variant": topology.variant,
        "obs_dim": topology.obs_dim,
        "layer_dims": list(topology.layer_dims),
        "exec_time": str(topology.exec_time),
        "edges": [[e.src, e.dst, e.kind] for e in topology.edges],
    }
    return yaml.safe_dump(doc, sort_keys=False)


def topology_from_text(text: str) -> PipelineTopology:
    doc = yaml.safe_load(text)
    if not isinstance(doc, dict):
        raise ValueError("topology document must be a mapping")
    expected = {"schema", "variant", "obs_dim", "layer_dims", "exec_time", "edges"}
    unknown = set(doc) - expected
    if unknown:
        raise ValueError(f"unknown topology keys: {sorted(unknown)}")
    missing = expected - set(doc)
    if missing:
        raise ValueError(f"missing topology keys: {sorted(missing)}")
    if doc["schema"] != _SCHEMA:
        raise ValueError(f"unsupported topology schema {doc['schema']!r}, expected {_SCHEMA!r}")
    edges = tuple(Edge(int(s), int(d), str(k)) for s, d, k in doc["edges"])
    topo = PipelineTopology(
        variant=str(doc["variant"]),
        obs_dim=int(doc["obs_dim"]),
        layer_dims=tuple(int(d) for d in doc["layer_dims"]),
        exec_time=Fraction(str(doc["exec_time"])),
        edges=edges,
    )
    if topo.variant not in VARIANTS:
        raise ValueError(f"unknown variant {topo.variant!r}")
    if not verify_constraint(topo):
        raise ValueError("topology violates the pipeline tick constraint")
    return topo
