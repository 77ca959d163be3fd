"""Monte Carlo regret measures with exact matrix-power counterparts.

Both measures compare two interaction patterns over matched step counts:

* ``delay_regret``: a policy that acts every step but only sees the state
  from ``delay`` steps ago, against the undelayed optimal policy.
* ``inaction_regret``: an agent that decides once every ``delta`` steps
  while a default policy fills the gap, against the optimal trajectory,
  scored only at the filled (inaction) positions and normalised per
  decision.  At ``delta`` = 1 there are no inaction positions and the
  regret is exactly zero.
"""

from __future__ import annotations

from collections import deque

import numpy as np

from ..envs.delayed import delayed_wrap
from ..envs.worstcase import WorstCaseEnv
from ..numerics.rng import RngStream
from .report import RegretReport

__all__ = [
    "delay_regret",
    "inaction_regret",
    "expected_delay_regret",
    "expected_inaction_regret",
]


def _ci95(values: np.ndarray) -> float:
    return 1.96 * float(values.std(ddof=1)) / np.sqrt(len(values))


def _rollout_seeds(seed: int, rollouts: int, label: str) -> list[int]:
    rng = RngStream(seed).substream(label)
    return [int(s) for s in rng.integers(0, 2**31, size=rollouts)]


def delay_regret(
    make_env,
    policy,
    optimal_policy,
    delay: int,
    *,
    steps: int = 2000,
    rollouts: int = 30,
    seed: int = 0,
) -> RegretReport:
    """Per-step regret of acting on a ``delay``-step-old observation.

    Each rollout scores exactly ``steps`` rewards for both policies.  The
    delayed run burns in ``delay`` unscored steps first so every scored
    decision uses an observation of exact age ``delay``.
    """
    if delay < 1:
        raise ValueError("delay must be >= 1")
    if rollouts < 2:
        raise ValueError("need at least 2 rollouts for an interval")
    opt_rates = np.empty(rollouts)
    pol_rates = np.empty(rollouts)
    for i, s in enumerate(_rollout_seeds(seed, rollouts, "delay-regret")):
        env = make_env()
        obs = env.reset(seed=s)
        state = int(np.argmax(obs))
        total = 0.0
        for _ in range(steps):
            _, r, _, info = env.step(optimal_policy(state))
            state = int(info["state"])
            total += r
        opt_rates[i] = total / steps

        env = make_env()
        obs = env.reset(seed=s + 1)
        state = int(np.argmax(obs))
        history = deque([state], maxlen=delay + 1)
        for _ in range(delay):  # burn-in: fill the observation pipeline
            _, _, _, info = env.step(policy(history[0]))
            history.append(int(info["state"]))
        total = 0.0
        for _ in range(steps):
            _, r, _, info = env.step(policy(history[0]))
            history.append(int(info["state"]))
            total += r
        pol_rates[i] = total / steps
    regrets = opt_rates - pol_rates
    return RegretReport(
        steps=steps,
        rollouts=rollouts,
        optimal_rate=float(opt_rates.mean()),
        policy_rate=float(pol_rates.mean()),
        regret_per_step=float(regrets.mean()),
        ci=_ci95(regrets),
    )


def inaction_regret(
    make_env,
    agent_policy,
    default_policy: str,
    delta: int,
    *,
    decisions: int = 600,
    rollouts: int = 30,
    seed: int = 0,
    fixed_action=None,
) -> RegretReport:
    """Per-decision regret from the default policy filling delta-1 gap steps."""
    if delta < 1:
        raise ValueError("delta must be >= 1")
    if rollouts < 2:
        raise ValueError("need at least 2 rollouts for an interval")
    opt_rates = np.empty(rollouts)
    pol_rates = np.empty(rollouts)
    for i, s in enumerate(_rollout_seeds(seed, rollouts, "inaction-regret")):
        env = make_env()
        obs = env.reset(seed=s)
        state = int(np.argmax(obs))
        total = 0.0
        for t in range(decisions * delta):
            _, r, _, info = env.step(state)  # optimal trajectory
            state = int(info["state"])
            if t % delta != 0:
                total += r
        opt_rates[i] = total / decisions

        wrapped = delayed_wrap(
            make_env(), delay=delta, default_policy=default_policy, fixed_action=fixed_action, seed=s
        )
        obs = wrapped.reset(seed=s + 1)
        state = int(np.argmax(np.asarray(obs.obs)))
        total = 0.0
        for _ in range(decisions):
            _, _, _, info = wrapped.step(agent_policy(state))
            state = int(info["state"])
            total += sum(info["inner_rewards"][1:])
        pol_rates[i] = total / decisions
    regrets = opt_rates - pol_rates
    return RegretReport(
        steps=decisions,
        rollouts=rollouts,
        optimal_rate=float(opt_rates.mean()),
        policy_rate=float(pol_rates.mean()),
        regret_per_step=float(regrets.mean()),
        ci=_ci95(regrets),
    )


def expected_delay_regret(P: np.ndarray, delay: int) -> float:
    """Exact per-step regret of the delayed-optimal policy on the chain env.

    The undelayed optimal earns 1 every step; a policy acting on a state of
    age d earns at most the largest entry of the d-step kernel row, which is
    the same for every row here because the kernel is circulant.
    """
    Pd = np.linalg.matrix_power(P, delay)
    return 1.0 - float(Pd[0].max())


def expected_inaction_regret(P: np.ndarray, delta: int, default_policy: str) -> float:
    """Exact per-decision inaction regret on the chain env.

    Assumes a uniform state distribution, which is stationary for this
    kernel, and an agent that plays the undelayed optimal action at its
    decision steps.
    """
    n = P.shape[0]
    if delta == 1:
        return 0.0
    if default_policy in ("fixed_action", "noop"):
        # Gap reward is 1 exactly when the chain sits on the fixed action.
        return (delta - 1) * (1.0 - 1.0 / n)
    if default_policy == "repeat_last_action":
        # The repeated action names the decision-time state, so the gap
        # reward at lag k is the k-step return-to-start probability.
        Pk = np.eye(n)
        total = 0.0
        for _ in range(1, delta):
            Pk = Pk @ P
            total += 1.0 - float(Pk[0, 0])
        return total
    raise ValueError(f"no oracle for default_policy {default_policy!r}")


def chain_env_factory(n_states: int, p: float, seed: int = 0):
    def make() -> WorstCaseEnv:
        return WorstCaseEnv(n_states, p, seed=seed)

    return make
