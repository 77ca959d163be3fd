"""Environment protocol, action spaces, and episode trace export."""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass

import numpy as np

__all__ = ["Discrete", "Box", "EnvSpec", "Env", "obs_hash", "write_episode_trace", "record_episode"]


@dataclass(frozen=True)
class Discrete:
    n: int

    def noop(self):
        return 0

    @property
    def encoded_dim(self) -> int:
        return self.n

    def encode(self, action) -> np.ndarray:
        v = np.zeros(self.n)
        v[int(action)] = 1.0
        return v


@dataclass(frozen=True)
class Box:
    low: float
    high: float
    dim: int

    def noop(self):
        return np.zeros(self.dim)

    @property
    def encoded_dim(self) -> int:
        return self.dim

    def encode(self, action) -> np.ndarray:
        return np.asarray(action, dtype=np.float64).reshape(self.dim)


@dataclass(frozen=True)
class EnvSpec:
    obs_dim: int
    action_space: Discrete | Box
    max_steps: int | None


class Env:
    """reset(seed) -> obs; step(action) -> (obs, reward, done, info).

    Stepping a finished episode raises until reset is called.
    """

    spec: EnvSpec

    def reset(self, seed: int | None = None) -> np.ndarray:
        raise NotImplementedError

    def step(self, action):
        raise NotImplementedError

    def _guard_not_done(self, done: bool) -> None:
        if done:
            raise RuntimeError("episode finished; call reset before stepping again")


def obs_hash(obs) -> str:
    if hasattr(obs, "vector"):
        obs = obs.vector
    arr = np.ascontiguousarray(np.asarray(obs, dtype=np.float64))
    return hashlib.blake2s(arr.tobytes(), digest_size=8).hexdigest()


def write_episode_trace(path, rows) -> None:
    """rows: iterable of (tick, obs_hash, action, reward, done)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["tick", "obs_hash", "action", "reward", "done"])
        for tick, oh, action, reward, done in rows:
            w.writerow([tick, oh, action, repr(float(reward)), int(done)])


def record_episode(env: Env, policy, seed: int, path) -> float:
    """Roll one episode under ``policy(obs, tick) -> action`` and dump the trace CSV."""
    obs = env.reset(seed=seed)
    rows = []
    total = 0.0
    tick = 0
    done = False
    while not done:
        action = policy(obs, tick)
        next_obs, reward, done, _ = env.step(action)
        rows.append((tick, obs_hash(obs), _action_repr(action), reward, done))
        total += reward
        obs = next_obs
        tick += 1
    write_episode_trace(path, rows)
    return total


def _action_repr(action) -> str:
    arr = np.asarray(action)
    if arr.ndim == 0:
        return str(arr.item())
    return "[" + " ".join(repr(float(x)) for x in arr.reshape(-1)) + "]"
