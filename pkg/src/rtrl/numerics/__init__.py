from .optim import Adam, clip_grad_norm, global_grad_norm
from .policy import (
    LOG_STD_RANGE,
    categorical_entropy,
    categorical_log_prob,
    categorical_sample,
    gaussian_policy_sample,
    squashed_gaussian_log_prob,
)
from .rng import RngStream, rng_stream
from .tensor import (
    GradMap,
    Tape,
    Tensor,
    add,
    clamp,
    cols,
    concat,
    elementwise,
    exp,
    gather_cols,
    log,
    logsoftmax_rows,
    matmul,
    minimum,
    mul,
    neg,
    relu,
    scale,
    softmax_rows,
    softplus,
    square,
    sub,
    sum_rows,
    tanh,
    tensor,
    tmean,
    tsum,
)

__all__ = [
    "Adam",
    "clip_grad_norm",
    "global_grad_norm",
    "LOG_STD_RANGE",
    "categorical_entropy",
    "categorical_log_prob",
    "categorical_sample",
    "gaussian_policy_sample",
    "squashed_gaussian_log_prob",
    "RngStream",
    "rng_stream",
    "GradMap",
    "Tape",
    "Tensor",
    "add",
    "clamp",
    "cols",
    "concat",
    "elementwise",
    "exp",
    "gather_cols",
    "log",
    "logsoftmax_rows",
    "matmul",
    "minimum",
    "mul",
    "neg",
    "relu",
    "scale",
    "softmax_rows",
    "softplus",
    "square",
    "sub",
    "sum_rows",
    "tanh",
    "tensor",
    "tmean",
    "tsum",
]
