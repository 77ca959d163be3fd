"""Soft actor-critic with a pipelined actor.

The actor interacts tick by tick, so an action emitted at step t was
computed from observations several ticks old (the pipeline depth decides
how many).  Training respects that: the actor update re-simulates a short
observation window through the pipeline from a zero initial state and
applies the loss only to the final step of the window, which is the only
step whose recomputed action matches how the behaviour action was produced
once the window covers the longest obs-to-head path.

Critics are ordinary MLPs trained on true environment states every step;
the critic target draws the next action from the instantaneous (depth-free)
actor forward pass.  Entropy temperature is auto-tuned toward
-action_dim * target_entropy_scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..envs.core import Box
from ..numerics.optim import Adam
from ..numerics.policy import gaussian_policy_sample
from ..numerics.rng import RngStream
from ..numerics.tensor import Tape, Tensor, add, cols, minimum, scale, square, sub, tmean, tsum
from ..pipeline.actor import advance, init_params, instantaneous_forward, reset
from ..pipeline.topology import PipelineTopology, dependency_horizon
from .buffer import ReplayBuffer
from .config import SacConfig
from .io import MetricsWriter
from .networks import TwinQ, polyak_update

__all__ = ["SacResult", "actor_window_loss", "critic_target", "train_sac"]


@dataclass
class SacResult:
    topology: PipelineTopology
    actor_params: dict
    critic_params: dict
    entropy_coef: float
    episodic_returns: list
    steps: int


def _vec(obs) -> np.ndarray:
    return obs.vector if hasattr(obs, "vector") else np.asarray(obs, dtype=np.float64)


def _true_state(obs) -> np.ndarray:
    return np.asarray(obs.obs if hasattr(obs, "obs") else obs, dtype=np.float64)


def _split_head(head, action_dim: int):
    mean = cols(head, 0, action_dim)
    log_std = cols(head, action_dim, 2 * action_dim)
    return mean, log_std


def _check_finite(value: float, what: str, step: int) -> None:
    if not math.isfinite(value):
        raise RuntimeError(f"non-finite {what} at step {step}; aborting training")


def critic_target(
    topology, actor_params, twin, target_params, batch, alpha, gamma, action_dim, *, mask=None, noise=None
):
    """Soft Bellman target r + gamma * (1 - done) * (min_i Q_i' - alpha * logp).

    The next action comes from the instantaneous (depth-free) actor forward
    on the next observation; ``noise`` pins the reparameterization draw.
    """
    next_head = instantaneous_forward(topology, actor_params, batch["next_obs"], mask=mask)
    n_mean, n_log_std = _split_head(next_head, action_dim)
    next_action, next_logp = gaussian_policy_sample(n_mean, n_log_std, noise=noise)
    q1t, q2t = twin.forward(target_params, batch["next_state"], next_action.data)
    soft_q = np.minimum(q1t.data, q2t.data).ravel() - alpha * next_logp.data.ravel()
    return batch["reward"] + gamma * (1.0 - batch["done"]) * soft_q


def actor_window_loss(
    topology, params, twin, critic_params, groups, alpha, action_dim,
    *, mask=None, dropout_p=0.0, dropout_rng=None, noise_fn=None,
):
    """Entropy-regularised policy loss over history windows grouped by length.

    Each window replays through the pipeline from a zero state and only the
    final step's head is scored: that is the step whose recomputed action
    distribution lines up with the stored transition once the window covers
    the longest obs-to-head path.  Returns (loss, mean_logp).
    """
    loss_sum = None
    logp_all = []
    total = 0
    for length in sorted(groups):
        g = groups[length]
        b = g["obs"].shape[0]
        state = reset(topology, params, None, mode="zeros", batch=b)
        head_g = None
        for t in range(length):
            head_g, state = advance(
                topology, params, state, g["obs"][:, t], mask=mask,
                dropout_p=dropout_p, rng=dropout_rng,
            )
        mean, log_std = _split_head(head_g, action_dim)
        a_new, logp = gaussian_policy_sample(mean, log_std, noise=noise_fn(b))
        q1, q2 = twin.forward(critic_params, g["state"], a_new)
        part = tsum(sub(scale(logp, alpha), minimum(q1, q2)))
        loss_sum = part if loss_sum is None else add(loss_sum, part)
        logp_all.append(logp.data.ravel())
        total += b
    return scale(loss_sum, 1.0 / total), float(np.concatenate(logp_all).mean())


def train_sac(
    make_env,
    topology: PipelineTopology,
    config: SacConfig,
    seed: int,
    *,
    mask=None,
    metrics_path=None,
) -> SacResult:
    config.validate()
    rng = RngStream(seed).substream("sac")
    env = make_env(seed)
    space = env.spec.action_space
    if not isinstance(space, Box):
        raise ValueError("this trainer needs a continuous (Box) action space")
    action_dim = space.dim
    if topology.layer_dims[-1] != 2 * action_dim:
        raise ValueError(
            f"actor head width {topology.layer_dims[-1]} must be 2 * action_dim = {2 * action_dim}"
        )
    obs_dim = env.spec.obs_dim
    if topology.obs_dim != obs_dim:
        raise ValueError(f"topology obs_dim {topology.obs_dim} != env obs_dim {obs_dim}")

    actor_params = init_params(topology, rng.substream("actor-init"))
    probe = env.reset(seed=seed)
    state_dim = _true_state(probe).shape[0]
    twin = TwinQ(state_dim, action_dim, config.critic_hidden)
    critic_params = twin.init(rng.substream("critic-init"))
    target_params = {k: v.copy() for k, v in critic_params.items()}

    log_alpha = np.zeros(())
    target_entropy = -float(action_dim) * config.target_entropy_scale

    actor_opt = Adam(config.policy_lr, betas=config.adam_betas, eps=config.adam_eps)
    critic_opt = Adam(config.q_lr, betas=config.adam_betas, eps=config.adam_eps)
    alpha_opt = Adam(config.q_lr, betas=config.adam_betas, eps=config.adam_eps)

    buffer = ReplayBuffer(config.buffer_capacity, obs_dim, state_dim, action_dim)
    window = dependency_horizon(topology)[1] + 2

    env_seeds = rng.substream("episode-seeds")
    warmup_rng = rng.substream("warmup")
    policy_rng = rng.substream("policy-noise")
    sample_rng = rng.substream("buffer-sample")
    update_rng = rng.substream("update-noise")
    dropout_rng = rng.substream("dropout")

    obs = env.reset(seed=int(env_seeds.integers(2**31)))
    actor_state = reset(topology, actor_params, _vec(obs)[None, :], mode="instantaneous")
    episode_id = 0
    step_in_ep = 0
    ep_return = 0.0
    episodic_returns: list = []
    writer = MetricsWriter(metrics_path) if metrics_path is not None else None
    last_actor_loss = None
    last_critic_loss = None

    try:
        for step in range(config.total_steps):
            head, actor_state = advance(
                topology,
                actor_params,
                actor_state,
                _vec(obs)[None, :],
                mask=mask,
                dropout_p=config.dropout_p,
                rng=dropout_rng,
            )
            if step < config.learning_starts:
                action = warmup_rng.uniform(-1.0, 1.0, size=action_dim)
            else:
                mean, log_std = _split_head(head, action_dim)
                sampled, _ = gaussian_policy_sample(mean, log_std, rng=policy_rng)
                action = sampled.data[0]
            next_obs, reward, done, info = env.step(action)
            buffer.add(
                _vec(obs), _true_state(obs), action, reward, _vec(next_obs), _true_state(next_obs),
                done, episode_id, step_in_ep,
            )
            ep_return += reward
            step_in_ep += 1
            if done:
                episodic_returns.append((step + 1, ep_return))
                if writer:
                    writer.log(step + 1, episodic_return=ep_return, entropy_coef=float(np.exp(log_alpha)))
                obs = env.reset(seed=int(env_seeds.integers(2**31)))
                actor_state = reset(topology, actor_params, _vec(obs)[None, :], mode="instantaneous")
                episode_id += 1
                step_in_ep = 0
                ep_return = 0.0
            else:
                obs = next_obs

            if step + 1 < config.learning_starts:
                continue

            batch = buffer.sample(config.batch_size, sample_rng)
            alpha = float(np.exp(log_alpha))

            # -- critic -------------------------------------------------------
            target = critic_target(
                topology, actor_params, twin, target_params, batch, alpha, config.gamma, action_dim,
                mask=mask, noise=update_rng.normal(size=(config.batch_size, action_dim)),
            )

            tape = Tape()
            tq = {k: tape.param(critic_params[k]) for k in twin.param_names}
            q1, q2 = twin.forward(tq, batch["state"], batch["action"])
            target_col = Tensor(target[:, None])
            critic_loss = add(tmean(square(sub(q1, target_col))), tmean(square(sub(q2, target_col))))
            grads = tape.backward(critic_loss)
            critic_opt.step(critic_params, {k: grads.grad(tq[k]) for k in tq})
            last_critic_loss = critic_loss.item()
            _check_finite(last_critic_loss, "critic loss", step)
            polyak_update(target_params, critic_params, config.tau)

            # -- actor + temperature -------------------------------------------
            if (step + 1) % config.policy_frequency == 0:
                groups = buffer.sample_windows(config.batch_size, window, sample_rng)
                tape = Tape()
                ta = {k: tape.param(v) for k, v in actor_params.items()}
                actor_loss, mean_logp = actor_window_loss(
                    topology, ta, twin, critic_params, groups, alpha, action_dim,
                    mask=mask, dropout_p=config.dropout_p, dropout_rng=dropout_rng,
                    noise_fn=lambda b: update_rng.normal(size=(b, action_dim)),
                )
                grads = tape.backward(actor_loss)
                actor_opt.step(actor_params, {k: grads.grad(ta[k]) for k in ta})
                last_actor_loss = actor_loss.item()
                _check_finite(last_actor_loss, "actor loss", step)

                # d/dlog_alpha of mean(-exp(log_alpha) * (logp + target_entropy))
                alpha_grad = -alpha * (mean_logp + target_entropy)
                alpha_opt.step({"log_alpha": log_alpha}, {"log_alpha": np.asarray(alpha_grad)})

            if writer and (step + 1) % config.metrics_every == 0:
                writer.log(
                    step + 1,
                    actor_loss=last_actor_loss,
                    critic_loss=last_critic_loss,
                    entropy_coef=float(np.exp(log_alpha)),
                )
    finally:
        if writer:
            writer.close()

    return SacResult(
        topology=topology,
        actor_params=actor_params,
        critic_params=critic_params,
        entropy_coef=float(np.exp(log_alpha)),
        episodic_returns=episodic_returns,
        steps=config.total_steps,
    )
