"""Greedy / stochastic evaluation of a saved or in-memory agent."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..numerics.policy import categorical_sample, gaussian_policy_sample
from ..numerics.rng import RngStream
from ..numerics.tensor import Tensor, cols
from ..pipeline.actor import advance, instantaneous_forward, reset
from ..pipeline.topology import Edge, PipelineTopology
from .io import load_checkpoint, save_checkpoint

__all__ = ["Agent", "EvalReport", "evaluate", "save_agent", "load_agent"]

KINDS = ("gaussian", "categorical")
MODES = ("pipelined", "instantaneous")


@dataclass
class Agent:
    """Everything needed to run a trained policy."""

    topology: PipelineTopology
    params: dict
    kind: str
    mode: str = "pipelined"
    mask: frozenset | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")


@dataclass(frozen=True)
class EvalReport:
    episodes: int
    mean_return: float
    returns: tuple
    mean_length: float


def _vec(obs) -> np.ndarray:
    return obs.vector if hasattr(obs, "vector") else np.asarray(obs, dtype=np.float64)


def _pick_action(agent: Agent, head, deterministic: bool, rng: RngStream):
    if agent.kind == "categorical":
        logits = head.data
        if deterministic:
            return int(logits[0].argmax())
        return int(categorical_sample(logits, rng)[0])
    width = head.data.shape[1] // 2
    if deterministic:
        return np.tanh(head.data[0, :width])
    mean = cols(head, 0, width)
    log_std = cols(head, width, 2 * width)
    action, _ = gaussian_policy_sample(mean, log_std, rng=rng)
    return action.data[0]


def evaluate(
    agent: Agent,
    make_env,
    episodes: int,
    seed: int,
    *,
    deterministic: bool = True,
    dropout_p: float = 0.0,
) -> EvalReport:
    rng = RngStream(seed).substream("evaluate")
    env = make_env(seed)
    ep_seeds = rng.substream("episodes")
    act_rng = rng.substream("actions")
    drop_rng = rng.substream("dropout")
    returns = []
    lengths = []
    for _ in range(episodes):
        obs = env.reset(seed=int(ep_seeds.integers(2**31)))
        # warm-start like the trainers do at episode boundaries, so reported
        # returns are comparable to training-time episodic returns
        state = reset(agent.topology, agent.params, _vec(obs)[None, :], mode="instantaneous")
        total = 0.0
        length = 0
        done = False
        while not done:
            x = _vec(obs)[None, :]
            if agent.mode == "instantaneous":
                head = instantaneous_forward(agent.topology, agent.params, x, mask=agent.mask)
            else:
                head, state = advance(
                    agent.topology, agent.params, state, x, mask=agent.mask,
                    dropout_p=dropout_p, rng=drop_rng,
                )
            action = _pick_action(agent, head, deterministic, act_rng)
            obs, r, done, _ = env.step(action)
            total += r
            length += 1
        returns.append(total)
        lengths.append(length)
    return EvalReport(
        episodes=episodes,
        mean_return=float(np.mean(returns)),
        returns=tuple(returns),
        mean_length=float(np.mean(lengths)),
    )


def save_agent(path, agent: Agent, config: dict | None = None) -> None:
    extra = {
        "kind": agent.kind,
        "mode": agent.mode,
        "mask": sorted([e.src, e.dst, e.kind] for e in agent.mask) if agent.mask else [],
    }
    save_checkpoint(path, agent.params, topology=agent.topology, config=config or {}, extra=extra)


def load_agent(path) -> Agent:
    ck = load_checkpoint(path)
    if ck.topology is None:
        raise ValueError("checkpoint has no topology; cannot rebuild an agent")
    mask = frozenset(Edge(int(s), int(d), k) for s, d, k in ck.extra.get("mask", [])) or None
    return Agent(
        topology=ck.topology,
        params=ck.params,
        kind=ck.extra["kind"],
        mode=ck.extra.get("mode", "pipelined"),
        mask=mask,
    )
