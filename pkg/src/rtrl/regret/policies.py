"""Reference policies for the chain environment regret studies."""

from __future__ import annotations

import numpy as np

__all__ = ["undelayed_optimal", "delayed_optimal", "fixed_action_policy", "uniform_policy"]


def undelayed_optimal():
    """Names the current state, which is the reward-maximising action."""

    def act(state: int, rng=None) -> int:
        return int(state)

    return act


def delayed_optimal(P: np.ndarray, delay: int):
    """Best response to a state observed ``delay`` steps ago.

    Precomputes argmax over the ``delay``-step transition kernel, so the
    policy is a plain table lookup at run time.
    """

    if delay < 1:
        raise ValueError("delay must be >= 1")
    table = np.linalg.matrix_power(P, delay).argmax(axis=1)

    def act(state: int, rng=None) -> int:
        return int(table[state])

    return act


def fixed_action_policy(action: int):
    def act(state: int, rng=None) -> int:
        return int(action)

    return act


def uniform_policy(n_actions: int):
    def act(state: int, rng) -> int:
        return int(rng.integers(n_actions))

    return act
