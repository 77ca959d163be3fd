"""Double-integrator point mass driven toward the origin.

Semi-implicit Euler: velocity absorbs the action first, then position
absorbs the velocity.  From rest at the origin a constant acceleration a
therefore lands at a * dt^2 * t * (t + 1) / 2 after t steps, which the
tests pin exactly.
"""

from __future__ import annotations

import numpy as np

from ..numerics.rng import RngStream
from .core import Box, Env, EnvSpec

__all__ = ["PointMassEnv"]


class PointMassEnv(Env):
    def __init__(self, dim: int = 2, dt: float = 0.1, max_steps: int = 200, start_radius: float = 1.0, seed: int = 0):
        self.dim = dim
        self.dt = dt
        self.start_radius = start_radius
        self.spec = EnvSpec(obs_dim=2 * dim, action_space=Box(-1.0, 1.0, dim), max_steps=max_steps)
        self._seed = seed
        self._rng = RngStream(seed).substream("pointmass")
        self.pos = np.zeros(dim)
        self.vel = np.zeros(dim)
        self._steps = 0
        self._done = True

    def _obs(self) -> np.ndarray:
        return np.concatenate([self.pos, self.vel])

    def reset(self, seed: int | None = None) -> np.ndarray:
        if seed is not None:
            self._seed = seed
            self._rng = RngStream(seed).substream("pointmass")
        self.pos = self._rng.uniform(-self.start_radius, self.start_radius, size=self.dim)
        self.vel = np.zeros(self.dim)
        self._steps = 0
        self._done = False
        return self._obs()

    def step(self, action):
        self._guard_not_done(self._done)
        a = np.clip(np.asarray(action, dtype=np.float64).reshape(self.dim), -1.0, 1.0)
        self.vel = self.vel + a * self.dt
        self.pos = self.pos + self.vel * self.dt
        reward = -float(np.linalg.norm(self.pos))
        self._steps += 1
        self._done = self._steps >= self.spec.max_steps
        return self._obs(), reward, self._done, {"state": None}


def pd_policy(kp: float = 4.0, kd: float = 4.0):
    """Scripted proportional-derivative controller used as a sanity oracle."""

    def act(obs, tick=None):
        dim = obs.shape[0] // 2
        pos, vel = obs[:dim], obs[dim:]
        return np.clip(-kp * pos - kd * vel, -1.0, 1.0)

    return act
