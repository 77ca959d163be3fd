"""Hyperparameter dataclasses for the two trainers.

``paper`` presets follow the published table for continuous control /
on-policy grid runs; ``desk`` presets shrink buffers, networks and step
counts so a full run fits in minutes on one core.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

__all__ = ["SacConfig", "PpoConfig"]


@dataclass(frozen=True)
class SacConfig:
    total_steps: int = 20000
    gamma: float = 0.99
    policy_lr: float = 3e-4
    q_lr: float = 1e-3
    adam_betas: tuple = (0.9, 0.999)
    adam_eps: float = 1e-8
    tau: float = 0.005
    buffer_capacity: int = 100000
    batch_size: int = 256
    learning_starts: int = 1000
    policy_frequency: int = 2
    target_entropy_scale: float = 1.0
    critic_hidden: tuple = (64, 64)
    dropout_p: float = 0.0
    metrics_every: int = 100

    @classmethod
    def paper(cls, **overrides) -> "SacConfig":
        base = cls(
            total_steps=1000000,
            buffer_capacity=1000000,
            learning_starts=10000,
            critic_hidden=(256, 256),
        )
        return replace(base, **overrides)

    @classmethod
    def desk(cls, **overrides) -> "SacConfig":
        return replace(cls(), **overrides)

    def validate(self) -> None:
        if self.batch_size < 1 or self.buffer_capacity < self.batch_size:
            raise ValueError("buffer must hold at least one batch")
        if not 0.0 < self.tau <= 1.0:
            raise ValueError("tau must be in (0, 1]")
        if self.policy_frequency < 1:
            raise ValueError("policy_frequency must be >= 1")
        if not 0.0 <= self.dropout_p < 1.0:
            raise ValueError("dropout_p must be in [0, 1)")


@dataclass(frozen=True)
class PpoConfig:
    total_steps: int = 40000
    n_envs: int = 8
    rollout_steps: int = 32
    epochs: int = 4
    gamma: float = 0.99
    gae_lambda: float = 0.95
    clip_coef: float = 0.2
    entropy_coef: float = 0.01
    value_coef: float = 0.5
    lr: float = 2.5e-4
    anneal_lr: bool = True
    adam_eps: float = 1e-5
    max_grad_norm: float = 0.5
    critic_hidden: tuple = (64, 64)
    normalize_advantages: bool = True

    @classmethod
    def paper(cls, **overrides) -> "PpoConfig":
        base = cls(total_steps=1000000, n_envs=32, critic_hidden=(64, 64))
        return replace(base, **overrides)

    @classmethod
    def desk(cls, **overrides) -> "PpoConfig":
        return replace(cls(), **overrides)

    def validate(self) -> None:
        if self.n_envs < 1 or self.rollout_steps < 1:
            raise ValueError("need at least one env and one rollout step")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.clip_coef <= 0:
            raise ValueError("clip_coef must be positive")
