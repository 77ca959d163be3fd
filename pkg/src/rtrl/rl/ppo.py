"""PPO for discrete actions with a pipelined (or instantaneous) actor.

Interaction keeps one persistent pipeline state per parallel env across
rollout boundaries; only episode ends reset it (instantaneous mode, so the
first action of an episode equals the depth-free forward pass on its first
observation).  Each update epoch re-simulates the actor over the stored
observations, starting from an instantaneous-forward state built on the
rollout's first observation and applying the same episode-boundary resets,
then optimises the clipped surrogate on the whole rollout in one batch.

The value function is a separate MLP trained on true environment states,
not on whatever delayed view the actor gets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..envs.core import Discrete
from ..numerics.optim import Adam, clip_grad_norm
from ..numerics.policy import categorical_entropy, categorical_log_prob, categorical_sample
from ..numerics.rng import RngStream
from ..numerics.tensor import Tape, Tensor, add, clamp, exp as texp, minimum, mul, neg, scale, square, sub, tmean, tsum
from ..pipeline.actor import advance, init_params, instantaneous_forward, reset, reset_rows
from ..pipeline.topology import PipelineTopology
from .config import PpoConfig
from .gae import gae_advantages
from .io import MetricsWriter
from .networks import Mlp

__all__ = ["PpoResult", "ppo_loss", "rollout_heads", "train_ppo"]


@dataclass
class PpoResult:
    topology: PipelineTopology
    actor_params: dict
    critic_params: dict
    episodic_returns: list
    steps: int


def _vec(obs) -> np.ndarray:
    return obs.vector if hasattr(obs, "vector") else np.asarray(obs, dtype=np.float64)


def _true_state(obs) -> np.ndarray:
    return np.asarray(obs.obs if hasattr(obs, "obs") else obs, dtype=np.float64)


def _log_probs_np(logits: np.ndarray, actions: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    logp = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    return logp[np.arange(len(actions)), actions]


def rollout_heads(topology, params, obs_roll, done_roll, mask=None, instantaneous=False) -> list:
    """Policy heads for every rollout step, re-simulated under ``params``.

    Pipelined mode rebuilds the actor state with an instantaneous forward at
    the rollout start and after each episode boundary, mirroring how the
    interaction loop reset it.
    """
    T = obs_roll.shape[0]
    if instantaneous:
        return [instantaneous_forward(topology, params, obs_roll[t], mask=mask) for t in range(T)]
    state = reset(topology, params, obs_roll[0], mode="instantaneous")
    heads = []
    for t in range(T):
        if t > 0 and done_roll[t - 1].any():
            state = reset_rows(
                topology, params, state, done_roll[t - 1].astype(bool), obs_roll[t], mode="instantaneous"
            )
        head, state = advance(topology, params, state, obs_roll[t], mask=mask)
        heads.append(head)
    return heads


def ppo_loss(heads, act_roll, logp_roll, adv, value_pred, returns_col, config: PpoConfig):
    """Clipped-surrogate + entropy + value objective as one traced scalar.

    Returns (loss, pg_mean, value_loss, entropy_mean); the last three are
    traced scalars too, read via .item() for logging.
    """
    T = len(heads)
    n_samples = T * act_roll.shape[1]
    pg_sum = None
    ent_sum = None
    for t in range(T):
        logp_new = categorical_log_prob(heads[t], act_roll[t])
        ratio = texp(sub(logp_new, Tensor(logp_roll[t][:, None])))
        adv_col = Tensor(adv[t][:, None])
        surr1 = mul(ratio, adv_col)
        surr2 = mul(clamp(ratio, 1.0 - config.clip_coef, 1.0 + config.clip_coef), adv_col)
        part = neg(tsum(minimum(surr1, surr2)))
        pg_sum = part if pg_sum is None else add(pg_sum, part)
        ent = tsum(categorical_entropy(heads[t]))
        ent_sum = ent if ent_sum is None else add(ent_sum, ent)
    pg_mean = scale(pg_sum, 1.0 / n_samples)
    ent_mean = scale(ent_sum, 1.0 / n_samples)
    v_loss = tmean(square(sub(value_pred, Tensor(returns_col))))
    loss = add(sub(pg_mean, scale(ent_mean, config.entropy_coef)), scale(v_loss, config.value_coef))
    return loss, pg_mean, v_loss, ent_mean


def train_ppo(
    make_env,
    topology: PipelineTopology,
    config: PpoConfig,
    seed: int,
    *,
    mask=None,
    metrics_path=None,
    instantaneous: bool = False,
) -> PpoResult:
    config.validate()
    rng = RngStream(seed).substream("ppo")
    envs = [make_env(seed * 1000 + i) for i in range(config.n_envs)]
    space = envs[0].spec.action_space
    if not isinstance(space, Discrete):
        raise ValueError("this trainer needs a discrete action space")
    n_actions = space.n
    if topology.layer_dims[-1] != n_actions:
        raise ValueError(f"actor head width {topology.layer_dims[-1]} must equal n_actions {n_actions}")
    obs_dim = envs[0].spec.obs_dim
    if topology.obs_dim != obs_dim:
        raise ValueError(f"topology obs_dim {topology.obs_dim} != env obs_dim {obs_dim}")

    actor_params = init_params(topology, rng.substream("actor-init"), head_scale=0.01)
    probe = envs[0].reset(seed=0)
    state_dim = _true_state(probe).shape[0]
    critic = Mlp("value", (state_dim, *config.critic_hidden, 1))
    critic_params = critic.init(rng.substream("critic-init"))
    all_params = {**actor_params, **critic_params}

    opt = Adam(config.lr, eps=config.adam_eps)
    env_seeds = rng.substream("episode-seeds")
    act_rng = rng.substream("action-sample")

    B, T = config.n_envs, config.rollout_steps
    obs_batch = np.zeros((B, obs_dim))
    cur_true = np.zeros((B, state_dim))
    for i, env in enumerate(envs):
        first = env.reset(seed=int(env_seeds.integers(2**31)))
        obs_batch[i] = _vec(first)
        cur_true[i] = _true_state(first)

    actor_state = reset(topology, actor_params, obs_batch, mode="instantaneous")
    ep_returns = np.zeros(B)
    episodic_returns: list = []
    writer = MetricsWriter(metrics_path) if metrics_path is not None else None

    num_updates = config.total_steps // (B * T)
    global_step = 0
    try:
        for update in range(1, num_updates + 1):
            lr = config.lr * (1.0 - (update - 1) / num_updates) if config.anneal_lr else config.lr

            obs_roll = np.zeros((T, B, obs_dim))
            true_roll = np.zeros((T, B, state_dim))
            act_roll = np.zeros((T, B), dtype=np.int64)
            logp_roll = np.zeros((T, B))
            rew_roll = np.zeros((T, B))
            done_roll = np.zeros((T, B))
            val_roll = np.zeros((T, B))

            for t in range(T):
                obs_roll[t] = obs_batch
                true_roll[t] = cur_true
                if instantaneous:
                    head = instantaneous_forward(topology, actor_params, obs_batch, mask=mask)
                else:
                    head, actor_state = advance(topology, actor_params, actor_state, obs_batch, mask=mask)
                logits = head.data
                actions = categorical_sample(logits, act_rng)
                logp_roll[t] = _log_probs_np(logits, actions)
                val_roll[t] = critic.forward(critic_params, cur_true).data.ravel()
                act_roll[t] = actions

                done_flags = np.zeros(B, dtype=bool)
                for i, env in enumerate(envs):
                    nobs, r, done, _ = env.step(int(actions[i]))
                    rew_roll[t, i] = r
                    ep_returns[i] += r
                    if done:
                        done_flags[i] = True
                        episodic_returns.append((global_step + 1, ep_returns[i]))
                        if writer:
                            writer.log(global_step + 1, episodic_return=ep_returns[i])
                        ep_returns[i] = 0.0
                        nobs = env.reset(seed=int(env_seeds.integers(2**31)))
                    obs_batch[i] = _vec(nobs)
                    cur_true[i] = _true_state(nobs)
                done_roll[t] = done_flags.astype(np.float64)
                if not instantaneous and done_flags.any():
                    actor_state = reset_rows(
                        topology, actor_params, actor_state, done_flags, obs_batch, mode="instantaneous"
                    )
                global_step += B

            next_value = critic.forward(critic_params, cur_true).data.ravel()
            adv, returns = gae_advantages(rew_roll, val_roll, done_roll, next_value, config.gamma, config.gae_lambda)
            if config.normalize_advantages:
                adv = (adv - adv.mean()) / (adv.std() + 1e-8)

            returns_col = returns.reshape(T * B, 1)
            states_flat = true_roll.reshape(T * B, state_dim)

            last_pg, last_v = 0.0, 0.0
            for _ in range(config.epochs):
                tape = Tape()
                ta = {k: tape.param(v) for k, v in actor_params.items()}
                tc = {k: tape.param(v) for k, v in critic_params.items()}

                heads = rollout_heads(topology, ta, obs_roll, done_roll, mask=mask, instantaneous=instantaneous)
                value_pred = critic.forward(tc, states_flat)
                loss, pg_mean, v_loss, _ = ppo_loss(heads, act_roll, logp_roll, adv, value_pred, returns_col, config)

                grads_map = tape.backward(loss)
                grads = {k: grads_map.grad(ta[k]) for k in ta}
                grads.update({k: grads_map.grad(tc[k]) for k in tc})
                clip_grad_norm(grads, config.max_grad_norm)
                opt.step(all_params, grads, lr=lr)
                last_pg = pg_mean.item()
                last_v = v_loss.item()
                if not (math.isfinite(last_pg) and math.isfinite(last_v)):
                    raise RuntimeError(f"non-finite loss at update {update}; aborting training")

            if writer:
                writer.log(global_step, actor_loss=last_pg, critic_loss=last_v, entropy_coef=config.entropy_coef)
    finally:
        if writer:
            writer.close()

    return PpoResult(
        topology=topology,
        actor_params=actor_params,
        critic_params=critic_params,
        episodic_returns=episodic_returns,
        steps=global_step,
    )
