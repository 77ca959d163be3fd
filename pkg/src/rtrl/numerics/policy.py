"""Stochastic policy heads on top of the tensor ops.

The continuous head is a tanh-squashed Gaussian: the network emits mean
and log-std rows, the sample is tanh(mean + std * eps), and the log
density carries the tanh Jacobian correction.  log-std is clamped to
LOG_STD_RANGE before use.  The discrete head is a plain categorical over
logits.
"""

from __future__ import annotations

import math

import numpy as np

from .rng import RngStream
from .tensor import (
    LOG_2PI,
    Tensor,
    add,
    clamp,
    exp,
    gather_cols,
    logsoftmax_rows,
    mul,
    neg,
    scale,
    softmax_rows,
    softplus,
    square,
    sub,
    sum_rows,
    tanh,
)

__all__ = [
    "LOG_STD_RANGE",
    "gaussian_policy_sample",
    "squashed_gaussian_log_prob",
    "categorical_sample",
    "categorical_log_prob",
    "categorical_entropy",
]

LOG_STD_RANGE = (-5.0, 2.0)


def gaussian_policy_sample(
    mean: Tensor,
    log_std: Tensor,
    rng: RngStream | None = None,
    noise: np.ndarray | None = None,
) -> tuple[Tensor, Tensor]:
    """Reparameterized squashed-Gaussian sample and its log density.

    Returns (action, log_prob) with action in (-1, 1) per coordinate and
    log_prob an (m, 1) column (summed over action coordinates).  Pass
    ``noise`` to pin the standard-normal draw; otherwise it comes from
    ``rng``.  Gradients flow into mean and log_std through both the
    sample and the density.
    """
    if mean.data.shape != log_std.data.shape or mean.data.ndim != 2:
        raise ValueError(f"mean/log_std shape mismatch: {mean.data.shape} vs {log_std.data.shape}")
    if noise is None:
        if rng is None:
            raise ValueError("gaussian_policy_sample needs rng or explicit noise")
        noise = rng.normal(size=mean.data.shape)
    noise = np.asarray(noise, dtype=np.float64)

    log_std = clamp(log_std, *LOG_STD_RANGE)
    std = exp(log_std)
    u = add(mean, mul(std, Tensor(noise)))
    action = tanh(u)

    # log N(u; mean, std) written so the adjoints reach mean and log_std
    z = mul(sub(u, mean), exp(neg(log_std)))
    log_gauss = sub(scale(square(z), -0.5), add(log_std, Tensor(np.full_like(noise, 0.5 * LOG_2PI))))
    # log(1 - tanh(u)^2) = 2 (log 2 - u - softplus(-2u)), stable in both tails
    log_jac = scale(
        sub(Tensor(np.full_like(noise, math.log(2.0))), add(u, softplus(scale(u, -2.0)))),
        2.0,
    )
    log_prob = sum_rows(sub(log_gauss, log_jac))
    return action, log_prob


def squashed_gaussian_log_prob(mean: np.ndarray, log_std: np.ndarray, action: np.ndarray) -> np.ndarray:
    """Density of the squashed Gaussian at given actions (no tracing).

    Actions must lie strictly inside (-1, 1); they are nudged off the
    boundary by 1e-12 for the atanh.
    """
    mean = np.asarray(mean, dtype=np.float64)
    log_std = np.clip(np.asarray(log_std, dtype=np.float64), *LOG_STD_RANGE)
    a = np.clip(np.asarray(action, dtype=np.float64), -1.0 + 1e-12, 1.0 - 1e-12)
    u = np.arctanh(a)
    z = (u - mean) * np.exp(-log_std)
    log_gauss = -0.5 * z * z - log_std - 0.5 * LOG_2PI
    log_jac = 2.0 * (math.log(2.0) - u - np.logaddexp(0.0, -2.0 * u))
    return (log_gauss - log_jac).sum(axis=-1, keepdims=True)


def categorical_sample(logits: np.ndarray, rng: RngStream) -> np.ndarray:
    """One action index per row, sampled from softmax(logits)."""
    logits = np.asarray(logits, dtype=np.float64)
    z = logits - logits.max(axis=1, keepdims=True)
    p = np.exp(z)
    p /= p.sum(axis=1, keepdims=True)
    cdf = np.cumsum(p, axis=1)
    draws = rng.random(size=(logits.shape[0], 1))
    return (draws > cdf[:, :-1]).sum(axis=1) if logits.shape[1] > 1 else np.zeros(logits.shape[0], dtype=np.int64)


def categorical_log_prob(logits: Tensor, actions: np.ndarray) -> Tensor:
    """Log probability of chosen action indices, (m, 1) column."""
    return gather_cols(logsoftmax_rows(logits), actions)


def categorical_entropy(logits: Tensor) -> Tensor:
    """Per-row entropy of softmax(logits), (m, 1) column."""
    logp = logsoftmax_rows(logits)
    p = softmax_rows(logits)
    return neg(sum_rows(mul(p, logp)))
