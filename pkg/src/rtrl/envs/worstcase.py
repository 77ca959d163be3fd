"""Chain environment where acting on stale observations is maximally punished.

Each state s moves to its cyclic successor s+1 with probability p and to
every other state (itself included, the successor excluded) with the
residual probability split evenly.  Reward is 1 exactly when the action
names the current state, so any observation delay costs reward in
proportion to how far the modal successor chain has drifted.
"""

from __future__ import annotations

import numpy as np

from ..numerics.rng import RngStream
from .core import Discrete, Env, EnvSpec

__all__ = ["WorstCaseEnv"]


class WorstCaseEnv(Env):
    def __init__(self, n_states: int, p: float, max_steps: int | None = None, seed: int = 0):
        if n_states < 2:
            raise ValueError("need at least 2 states")
        # Below 1/n the "modal" successor is no longer the most likely next
        # state, which silently inverts what the delayed-optimal policy should
        # do.  Reject instead of letting oracles disagree with the env.
        if p < 1.0 / n_states:
            raise ValueError(f"p={p} must be >= 1/n_states={1.0 / n_states:.6g}")
        if p > 1.0:
            raise ValueError("p must be a probability")
        self.n_states = n_states
        self.p = p
        self.spec = EnvSpec(obs_dim=n_states, action_space=Discrete(n_states), max_steps=max_steps)
        self._seed = seed
        self._rng = RngStream(seed).substream("worstcase")
        self._state = 0
        self._steps = 0
        self._done = True

    def transition_matrix(self) -> np.ndarray:
        n = self.n_states
        residual = (1.0 - self.p) / (n - 1)
        P = np.full((n, n), residual)
        for s in range(n):
            P[s, (s + 1) % n] = self.p
        return P

    def _obs(self) -> np.ndarray:
        v = np.zeros(self.n_states)
        v[self._state] = 1.0
        return v

    def reset(self, seed: int | None = None) -> np.ndarray:
        if seed is not None:
            self._seed = seed
            self._rng = RngStream(seed).substream("worstcase")
        self._state = int(self._rng.integers(self.n_states))
        self._steps = 0
        self._done = False
        return self._obs()

    def set_state(self, state: int) -> None:
        """Test hook: pin the current state without consuming rng draws."""
        self._state = int(state) % self.n_states
        self._done = False

    def step(self, action):
        self._guard_not_done(self._done)
        a = int(action)
        reward = 1.0 if a == self._state else 0.0
        succ = (self._state + 1) % self.n_states
        if self._rng.random() < self.p:
            self._state = succ
        else:
            # Uniform over the n-1 states that are not the successor.
            j = int(self._rng.integers(self.n_states - 1))
            self._state = j if j < succ else j + 1
        self._steps += 1
        if self.spec.max_steps is not None and self._steps >= self.spec.max_steps:
            self._done = True
        return self._obs(), reward, self._done, {"state": self._state}
