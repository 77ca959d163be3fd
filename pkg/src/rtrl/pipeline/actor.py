"""Executing a pipeline topology tick by tick.

``advance`` performs one tick: every stage reads only buffers written on
the previous tick, computes its new output, and the incoming observation
is written to its buffer afterwards.  The function is pure (returns a
new ActorState) and runs unchanged on plain arrays or on tape-traced
tensors, which is how gradients flow through unrolled ticks.

Masked edges contribute zeros at assembly.  Dropout zeroes entries of
consumed hidden buffers (never the raw observation buffer) with the
usual 1/(1-p) rescale; p == 0 takes a separate branch that draws no
randomness at all, so it is bit-identical to not having dropout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..numerics.rng import RngStream
from ..numerics.tensor import Tensor, add, concat, matmul, mul, relu
from .topology import Edge, PipelineTopology

__all__ = ["ActorState", "init_params", "reset", "reset_rows", "advance", "instantaneous_forward"]


@dataclass(frozen=True)
class ActorState:
    """Buffers written on the previous tick: index 0 is the observation."""

    buffers: tuple[Tensor, ...]
    tick: int

    @property
    def batch(self) -> int:
        return self.buffers[0].data.shape[0]


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _as_obs(topology: PipelineTopology, obs) -> Tensor:
    t = _as_tensor(obs)
    if t.data.ndim == 1:
        t = Tensor(t.data[None, :]) if not t.traced else t
    if t.data.ndim != 2 or t.data.shape[1] != topology.obs_dim:
        raise ValueError(f"observation shape {t.data.shape} incompatible with obs_dim {topology.obs_dim}")
    return t


def init_params(
    topology: PipelineTopology,
    rng: RngStream,
    head_scale: float = 1.0,
) -> dict[str, np.ndarray]:
    """He-style init for hidden layers, scaled-down init for the head layer."""
    params: dict[str, np.ndarray] = {}
    spans = topology.grouping().spans
    n_stages = len(spans)
    for j in range(1, n_stages + 1):
        start, end = spans[j - 1]
        in_dim = sum(topology.node_width(e.src) for e in topology.stage_in_edges(j))
        for li in range(start, end):
            out_dim = topology.layer_dims[li]
            final = li == topology.n_layers - 1
            std = (1.0 / in_dim) ** 0.5 * head_scale if final else (2.0 / in_dim) ** 0.5
            params[f"s{j}_l{li}_w"] = rng.normal(0.0, std, size=(in_dim, out_dim))
            params[f"s{j}_l{li}_b"] = np.zeros(out_dim)
            in_dim = out_dim
        res = topology.stage_residual_edge(j)
        if res is not None:
            src_w = topology.node_width(res.src)
            dst_w = topology.node_width(j)
            if src_w != dst_w:
                params[f"s{j}_res_w"] = rng.normal(0.0, (1.0 / src_w) ** 0.5, size=(src_w, dst_w))
    return params


def _zero_like_node(topology: PipelineTopology, node: int, batch: int) -> Tensor:
    return Tensor(np.zeros((batch, topology.node_width(node))))


def _stage_forward(topology, params, j: int, parts: list[Tensor]) -> Tensor:
    z = concat(parts) if len(parts) > 1 else parts[0]
    start, end = topology.grouping().spans[j - 1]
    for li in range(start, end):
        z = add(matmul(z, params[f"s{j}_l{li}_w"]), params[f"s{j}_l{li}_b"])
        if li != topology.n_layers - 1:
            z = relu(z)
    return z


def _apply_residual(topology, params, j: int, out: Tensor, source: Tensor) -> Tensor:
    w = params.get(f"s{j}_res_w")
    if w is not None:
        source = matmul(source, w)
    return add(out, source)


def advance(
    topology: PipelineTopology,
    params: dict,
    state: ActorState,
    obs,
    mask: frozenset[Edge] | None = None,
    dropout_p: float = 0.0,
    rng: RngStream | None = None,
) -> tuple[Tensor, ActorState]:
    """One pipeline tick; returns (head output, next state)."""
    obs_t = _as_obs(topology, obs)
    batch = obs_t.data.shape[0]
    if state.batch != batch:
        raise ValueError(f"state batch {state.batch} != observation batch {batch}")
    n_stages = topology.n_stages
    mask = mask or frozenset()

    readable: list[Tensor] = list(state.buffers)
    if dropout_p > 0.0:
        if rng is None:
            raise ValueError("dropout_p > 0 requires an rng")
        keep = 1.0 - dropout_p
        for node in range(1, n_stages):  # hidden buffers only, never the observation
            m = (rng.random(readable[node].data.shape) >= dropout_p) / keep
            readable[node] = mul(readable[node], Tensor(m))

    outs: list[Tensor] = []
    for j in range(1, n_stages + 1):
        parts = [
            _zero_like_node(topology, e.src, batch) if e in mask else readable[e.src]
            for e in topology.stage_in_edges(j)
        ]
        out = _stage_forward(topology, params, j, parts)
        res = topology.stage_residual_edge(j)
        if res is not None and res not in mask:
            out = _apply_residual(topology, params, j, out, readable[res.src])
        outs.append(out)

    next_state = ActorState(buffers=tuple([obs_t] + outs), tick=state.tick + 1)
    return outs[-1], next_state


def instantaneous_forward(
    topology: PipelineTopology,
    params: dict,
    obs,
    mask: frozenset[Edge] | None = None,
) -> Tensor:
    """Whole network applied to one observation in a single step (no pipeline delay)."""
    vals = _instantaneous_values(topology, params, obs, mask)
    return vals[-1]


def _instantaneous_values(topology, params, obs, mask=None) -> list[Tensor]:
    obs_t = _as_obs(topology, obs)
    batch = obs_t.data.shape[0]
    mask = mask or frozenset()
    vals: list[Tensor] = [obs_t]
    for j in range(1, topology.n_stages + 1):
        parts = [
            _zero_like_node(topology, e.src, batch) if e in mask else vals[e.src]
            for e in topology.stage_in_edges(j)
        ]
        out = _stage_forward(topology, params, j, parts)
        res = topology.stage_residual_edge(j)
        if res is not None and res not in mask:
            out = _apply_residual(topology, params, j, out, vals[res.src])
        vals.append(out)
    return vals


def reset(
    topology: PipelineTopology,
    params: dict,
    obs0,
    mode: str = "zeros",
    batch: int | None = None,
) -> ActorState:
    """Fresh actor state.

    ``zeros``: every buffer zero.  ``instantaneous``: buffers filled as
    if obs0 had flowed through all stages sequentially in one step.
    """
    if mode == "zeros":
        if batch is None:
            batch = _as_obs(topology, obs0).data.shape[0] if obs0 is not None else 1
        buffers = tuple(_zero_like_node(topology, node, batch) for node in range(topology.n_stages + 1))
        return ActorState(buffers=buffers, tick=0)
    if mode == "instantaneous":
        vals = _instantaneous_values(topology, params, obs0)
        return ActorState(buffers=tuple(vals), tick=0)
    raise ValueError(f"unknown reset mode {mode!r}; use 'zeros' or 'instantaneous'")


def reset_rows(
    topology: PipelineTopology,
    params: dict,
    state: ActorState,
    done_rows: np.ndarray,
    obs0,
    mode: str = "zeros",
) -> ActorState:
    """Reset the state rows flagged in ``done_rows`` (bool, per batch row).

    Implemented as a blend so it also works inside a traced unroll:
    new = old * (1 - m) + fresh * m with m constant.
    """
    done_rows = np.asarray(done_rows, dtype=bool)
    if not done_rows.any():
        return state
    fresh = reset(topology, params, obs0, mode=mode, batch=state.batch)
    blended = []
    for old, new in zip(state.buffers, fresh.buffers):
        m = np.repeat(done_rows[:, None].astype(np.float64), old.data.shape[1], axis=1)
        blended.append(add(mul(old, Tensor(1.0 - m)), mul(new, Tensor(m))))
    return ActorState(buffers=tuple(blended), tick=state.tick)
