"""Generalized advantage estimation over (T, B) rollout arrays."""

from __future__ import annotations

import numpy as np

__all__ = ["gae_advantages"]


def gae_advantages(
    rewards: np.ndarray,
    values: np.ndarray,
    dones: np.ndarray,
    next_value: np.ndarray,
    gamma: float,
    lam: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Returns (advantages, returns), both (T, B).

    ``dones[t]`` flags that the episode ended at step t, which cuts both the
    bootstrap and the recursion there.  ``next_value`` is the value of the
    state after the last rollout step, shape (B,).
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    dones = np.asarray(dones, dtype=np.float64)
    T, B = rewards.shape
    adv = np.zeros((T, B))
    last = np.zeros(B)
    for t in range(T - 1, -1, -1):
        next_v = next_value if t == T - 1 else values[t + 1]
        not_done = 1.0 - dones[t]
        delta = rewards[t] + gamma * not_done * next_v - values[t]
        last = delta + gamma * lam * not_done * last
        adv[t] = last
    return adv, adv + values
