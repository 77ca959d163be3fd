"""Action-delay wrapper plus observation augmentation with recent history.

One wrapper step applies the commanded action, then lets a default policy
fill the remaining delay-1 base steps, summing rewards along the way.  With
sticky actions, every application is replaced by the previously applied
action with probability sticky_prob (the pre-episode "previous" action is
the noop).  The wrapper reports what was actually applied in info, which
downstream consumers need because the commanded and applied sequences
diverge under stickiness.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from ..numerics.rng import RngStream
from .core import Env, EnvSpec

__all__ = ["DelayedEnvConfig", "AugmentedObs", "DelayedEnv", "delayed_wrap", "DEFAULT_POLICIES"]

DEFAULT_POLICIES = ("repeat_last_action", "fixed_action", "noop")


@dataclass(frozen=True)
class DelayedEnvConfig:
    delay: int = 1
    default_policy: str = "repeat_last_action"
    fixed_action: object = None
    sticky_prob: float = 0.0
    past_actions: int = 0
    past_obs: int = 0

    def validate(self) -> None:
        if self.delay < 1:
            raise ValueError("delay must be >= 1")
        if self.default_policy not in DEFAULT_POLICIES:
            raise ValueError(f"default_policy must be one of {DEFAULT_POLICIES}")
        if self.default_policy == "fixed_action" and self.fixed_action is None:
            raise ValueError("fixed_action policy needs a fixed_action value")
        if not 0.0 <= self.sticky_prob < 1.0:
            raise ValueError("sticky_prob must be in [0, 1)")
        if self.past_actions < 0 or self.past_obs < 0:
            raise ValueError("history lengths must be >= 0")


@dataclass(frozen=True)
class AugmentedObs:
    """Raw observation plus encoded action/observation history.

    Histories are ordered oldest first.  Action history covers commanded
    actions (zero vectors before the first decision); observation history
    covers raw observations from earlier decisions (first observation
    repeated as padding).
    """

    obs: np.ndarray
    recent_actions: tuple = field(default=())
    recent_obs: tuple = field(default=())

    @property
    def vector(self) -> np.ndarray:
        parts = [np.asarray(self.obs, dtype=np.float64).reshape(-1)]
        parts.extend(np.asarray(a, dtype=np.float64).reshape(-1) for a in self.recent_actions)
        parts.extend(np.asarray(o, dtype=np.float64).reshape(-1) for o in self.recent_obs)
        return np.concatenate(parts)


class DelayedEnv(Env):
    def __init__(self, env: Env, config: DelayedEnvConfig, seed: int = 0):
        config.validate()
        self.env = env
        self.config = config
        space = env.spec.action_space
        obs_dim = env.spec.obs_dim + config.past_actions * space.encoded_dim + config.past_obs * env.spec.obs_dim
        max_steps = None
        if env.spec.max_steps is not None:
            max_steps = math.ceil(env.spec.max_steps / config.delay)
        self.spec = EnvSpec(obs_dim=obs_dim, action_space=space, max_steps=max_steps)
        self._seed = seed
        self._rng = RngStream(seed).substream("delayed-wrapper")
        self._done = True

    def reset(self, seed: int | None = None):
        if seed is not None:
            self._seed = seed
            self._rng = RngStream(seed).substream("delayed-wrapper")
        raw = self.env.reset(seed=seed)
        space = self.spec.action_space
        self._last_applied = space.noop()
        self._act_hist = deque(
            (np.zeros(space.encoded_dim) for _ in range(self.config.past_actions)),
            maxlen=max(1, self.config.past_actions),
        )
        self._obs_hist = deque(
            (np.array(raw) for _ in range(self.config.past_obs)),
            maxlen=max(1, self.config.past_obs),
        )
        self._raw_obs = raw
        self._done = False
        return self._augmented()

    def _augmented(self) -> AugmentedObs:
        acts = tuple(self._act_hist)[-self.config.past_actions:] if self.config.past_actions else ()
        obss = tuple(self._obs_hist)[-self.config.past_obs:] if self.config.past_obs else ()
        return AugmentedObs(obs=self._raw_obs, recent_actions=acts, recent_obs=obss)

    def _default_action(self):
        name = self.config.default_policy
        if name == "repeat_last_action":
            return self._last_applied
        if name == "fixed_action":
            return self.config.fixed_action
        return self.spec.action_space.noop()

    def _apply_sticky(self, intended):
        if self.config.sticky_prob > 0.0 and self._rng.random() < self.config.sticky_prob:
            return self._last_applied
        return intended

    def step(self, action):
        self._guard_not_done(self._done)
        total = 0.0
        applied = []
        inner_rewards = []
        done = False
        info = {}
        raw = self._raw_obs
        for j in range(self.config.delay):
            intended = action if j == 0 else self._default_action()
            actual = self._apply_sticky(intended)
            raw, reward, done, info = self.env.step(actual)
            self._last_applied = actual
            applied.append(actual)
            inner_rewards.append(reward)
            total += reward
            if done:
                break
        if self.config.past_obs:
            self._obs_hist.append(np.array(self._raw_obs))
        if self.config.past_actions:
            self._act_hist.append(self.spec.action_space.encode(action))
        self._raw_obs = raw
        self._done = done
        out_info = {
            "state": info.get("state"),
            "applied_actions": tuple(applied),
            "inner_rewards": tuple(inner_rewards),
            "raw_obs": raw,
            "base_info": info,
        }
        return self._augmented(), total, done, out_info


def delayed_wrap(env: Env, seed: int = 0, **kwargs) -> DelayedEnv:
    return DelayedEnv(env, DelayedEnvConfig(**kwargs), seed=seed)
