"""Replay storage with history windows for recomputing pipelined actions.

Besides the observation the actor acted on, each slot keeps the underlying
environment state, because the critics are trained on true states even when
the actor sees delayed or augmented observations.
"""

from __future__ import annotations

import numpy as np

from ..numerics.rng import RngStream

__all__ = ["ReplayBuffer"]


class ReplayBuffer:
    def __init__(self, capacity: int, obs_dim: int, state_dim: int, action_dim: int):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.obs = np.zeros((capacity, obs_dim))
        self.state = np.zeros((capacity, state_dim))
        self.action = np.zeros((capacity, action_dim))
        self.reward = np.zeros(capacity)
        self.next_obs = np.zeros((capacity, obs_dim))
        self.next_state = np.zeros((capacity, state_dim))
        self.done = np.zeros(capacity)
        self.episode_id = np.full(capacity, -1, dtype=np.int64)
        self.step_idx = np.zeros(capacity, dtype=np.int64)
        self._next = 0
        self._size = 0

    def __len__(self) -> int:
        return self._size

    def add(self, obs, state, action, reward, next_obs, next_state, done, episode_id, step_idx) -> None:
        i = self._next
        self.obs[i] = obs
        self.state[i] = state
        self.action[i] = action
        self.reward[i] = reward
        self.next_obs[i] = next_obs
        self.next_state[i] = next_state
        self.done[i] = float(done)
        self.episode_id[i] = episode_id
        self.step_idx[i] = step_idx
        self._next = (i + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def sample(self, batch_size: int, rng: RngStream) -> dict:
        if self._size == 0:
            raise ValueError("cannot sample from an empty buffer")
        idx = rng.integers(0, self._size, size=batch_size)
        return {
            "obs": self.obs[idx],
            "state": self.state[idx],
            "action": self.action[idx],
            "reward": self.reward[idx],
            "next_obs": self.next_obs[idx],
            "next_state": self.next_state[idx],
            "done": self.done[idx],
        }

    def _window_back(self, i: int, window: int) -> list[int]:
        """Indices of up to ``window`` consecutive same-episode transitions ending at i."""
        out = [i]
        while len(out) < window:
            j = (out[-1] - 1) % self.capacity
            if self._size < self.capacity and j >= self._size:
                break
            if j == (self._next - 1) % self.capacity and self._size == self.capacity:
                # walked back onto the newest slot: the older history was overwritten
                break
            if self.episode_id[j] != self.episode_id[out[-1]] or self.step_idx[j] != self.step_idx[out[-1]] - 1:
                break
            out.append(j)
        out.reverse()
        return out

    def sample_windows(self, batch_size: int, window: int, rng: RngStream) -> dict[int, dict]:
        """Histories ending at uniformly sampled transitions, grouped by length.

        Windows stop at episode starts (and at overwritten history), so the
        groups have lengths 1..window.  Within a group, ``obs`` is stacked
        (B, L, obs_dim); the remaining fields describe only each window's
        final transition.
        """
        if window < 1:
            raise ValueError("window must be >= 1")
        groups: dict[int, list[list[int]]] = {}
        for i in rng.integers(0, self._size, size=batch_size):
            w = self._window_back(int(i), window)
            groups.setdefault(len(w), []).append(w)
        out: dict[int, dict] = {}
        for length, windows in groups.items():
            idx = np.array(windows, dtype=np.int64)
            last = idx[:, -1]
            out[length] = {
                "obs": self.obs[idx],
                "state": self.state[last],
                "action": self.action[last],
                "reward": self.reward[last],
                "next_obs": self.next_obs[last],
                "next_state": self.next_state[last],
                "done": self.done[last],
            }
        return out
