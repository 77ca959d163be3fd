"""Empirical check of whether a conditioning scheme makes outcomes policy-invariant.

Two behaviour policies interact with the same wrapped environment.  For each
condition bucket (what the agent conditions on at a decision) we collect the
outcome distribution (next delayed observation, discretised reward) and
measure the total-variation gap between the two policies, averaged over
buckets that both policies visited often enough.  Significance comes from a
permutation null: under the hypothesis that the conditioning screens off the
policy, outcomes within a bucket are exchangeable across policies.

Requires a discrete-action environment whose step info exposes the integer
"state" and whose raw observation is one-hot (used only to read the initial
state).
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass

import numpy as np

from ..numerics.rng import RngStream
from .core import Discrete
from .delayed import DelayedEnv

__all__ = ["MarkovCheckReport", "markov_check", "uniform_random_policy", "mixed_tracker_policy"]

CONDITIONS = ("raw", "augmented")


@dataclass(frozen=True)
class MarkovCheckReport:
    condition: str
    divergence: float
    null_mean: float
    null_std: float
    threshold: float
    distinguishable: bool
    buckets_used: int
    buckets_excluded: int
    samples_per_policy: int


def uniform_random_policy(n_actions: int):
    def act(state: int, rng: RngStream) -> int:
        return int(rng.integers(n_actions))

    return act


def mixed_tracker_policy(n_actions: int, shift: int = 1, explore_prob: float = 0.3):
    """Mostly plays (observed state + shift) mod n, sometimes explores."""

    def act(state: int, rng: RngStream) -> int:
        if rng.random() < explore_prob:
            return int(rng.integers(n_actions))
        return (state + shift) % n_actions

    return act


def _collect(env: DelayedEnv, policy, condition: str, samples: int, obs_delay: int, history_len: int, env_seed: int, policy_rng: RngStream):
    """Run one policy and bucket (condition -> Counter of outcomes)."""
    buckets: dict[tuple, Counter] = {}
    obs = env.reset(seed=env_seed)
    state = int(np.argmax(np.asarray(obs.obs)))
    state_hist = deque([state] * (obs_delay + 1), maxlen=obs_delay + 1)
    applied_hist = deque([0] * history_len, maxlen=max(1, history_len))
    for _ in range(samples):
        delayed_state = state_hist[0]
        a = policy(delayed_state, policy_rng)
        if condition == "raw":
            key = (delayed_state, a)
        else:
            key = (delayed_state, tuple(applied_hist)[-history_len:] if history_len else (), a)
        obs, reward, done, info = env.step(a)
        state_hist.append(int(info["state"]))
        for applied in info["applied_actions"]:
            applied_hist.append(int(applied))
        outcome = (state_hist[0], int(round(reward)))
        buckets.setdefault(key, Counter())[outcome] += 1
        if done:
            obs = env.reset(seed=env_seed + 1)
            state = int(np.argmax(np.asarray(obs.obs)))
            state_hist = deque([state] * (obs_delay + 1), maxlen=obs_delay + 1)
            applied_hist = deque([0] * history_len, maxlen=max(1, history_len))
    return buckets


def _tv_from_counts(ca: np.ndarray, cb: np.ndarray) -> float:
    pa = ca / ca.sum()
    pb = cb / cb.sum()
    return 0.5 * float(np.abs(pa - pb).sum())


def markov_check(
    env: DelayedEnv,
    policy_a,
    policy_b,
    condition: str = "raw",
    *,
    samples: int = 20000,
    obs_delay: int = 1,
    history_len: int = 1,
    min_count: int = 50,
    permutations: int = 200,
    seed: int = 0,
) -> MarkovCheckReport:
    if condition not in CONDITIONS:
        raise ValueError(f"condition must be one of {CONDITIONS}")
    if not isinstance(env.spec.action_space, Discrete):
        raise ValueError("markov_check needs a discrete action space")
    root = RngStream(seed).substream("markov-check")
    seed_a = int(root.substream("env-a").integers(2**31))
    seed_b = int(root.substream("env-b").integers(2**31))
    buckets_a = _collect(env, policy_a, condition, samples, obs_delay, history_len, seed_a, root.substream("policy-a"))
    buckets_b = _collect(env, policy_b, condition, samples, obs_delay, history_len, seed_b, root.substream("policy-b"))

    shared = []
    excluded = 0
    for key in set(buckets_a) | set(buckets_b):
        ca, cb = buckets_a.get(key), buckets_b.get(key)
        if ca is None or cb is None or sum(ca.values()) < min_count or sum(cb.values()) < min_count:
            excluded += 1
            continue
        outcomes = sorted(set(ca) | set(cb))
        va = np.array([ca.get(o, 0) for o in outcomes], dtype=np.float64)
        vb = np.array([cb.get(o, 0) for o in outcomes], dtype=np.float64)
        shared.append((va, vb))
    if not shared:
        raise ValueError("no bucket reached min_count for both policies; increase samples")

    divergence = float(np.mean([_tv_from_counts(va, vb) for va, vb in shared]))

    # Permutation null: reallocate each bucket's pooled outcomes to the two
    # policies at the observed sizes (multivariate hypergeometric), which is
    # exactly a random permutation split of the pooled multiset.
    perm_rng = root.substream("perm").generator
    null = np.empty(permutations)
    for i in range(permutations):
        tvs = []
        for va, vb in shared:
            pooled = (va + vb).astype(np.int64)
            na = int(va.sum())
            draw = perm_rng.multivariate_hypergeometric(pooled, na).astype(np.float64)
            tvs.append(_tv_from_counts(draw, pooled - draw))
        null[i] = np.mean(tvs)
    null_mean = float(null.mean())
    null_std = float(null.std())
    threshold = null_mean + 3.0 * null_std
    return MarkovCheckReport(
        condition=condition,
        divergence=divergence,
        null_mean=null_mean,
        null_std=null_std,
        threshold=threshold,
        distinguishable=divergence > threshold,
        buckets_used=len(shared),
        buckets_excluded=excluded,
        samples_per_policy=samples,
    )
