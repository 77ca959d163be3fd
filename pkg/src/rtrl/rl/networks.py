"""Plain MLPs (critics, value functions) over the tensor library."""

from __future__ import annotations

import numpy as np

from ..numerics.rng import RngStream
from ..numerics.tensor import Tensor, add, concat, matmul, relu

__all__ = ["Mlp", "TwinQ", "polyak_update"]


class Mlp:
    """Feed-forward relu net; parameters live in a shared name->array dict."""

    def __init__(self, name: str, sizes: tuple[int, ...], final_scale: float = 1.0):
        if len(sizes) < 2:
            raise ValueError("need at least input and output sizes")
        self.name = name
        self.sizes = tuple(int(s) for s in sizes)
        self.final_scale = final_scale

    def init(self, rng: RngStream) -> dict[str, np.ndarray]:
        params = {}
        n_layers = len(self.sizes) - 1
        for i in range(n_layers):
            fan_in, fan_out = self.sizes[i], self.sizes[i + 1]
            scale = np.sqrt(1.0 / fan_in) * self.final_scale if i == n_layers - 1 else np.sqrt(2.0 / fan_in)
            params[f"{self.name}_l{i}_w"] = rng.substream(f"w{i}").normal(0.0, scale, size=(fan_in, fan_out))
            params[f"{self.name}_l{i}_b"] = np.zeros(fan_out)
        return params

    @property
    def param_names(self) -> tuple[str, ...]:
        names = []
        for i in range(len(self.sizes) - 1):
            names.extend((f"{self.name}_l{i}_w", f"{self.name}_l{i}_b"))
        return tuple(names)

    def forward(self, params: dict, x) -> Tensor:
        h = x if isinstance(x, Tensor) else Tensor(np.asarray(x, dtype=np.float64))
        n_layers = len(self.sizes) - 1
        for i in range(n_layers):
            w, b = params[f"{self.name}_l{i}_w"], params[f"{self.name}_l{i}_b"]
            w = w if isinstance(w, Tensor) else Tensor(w)
            b = b if isinstance(b, Tensor) else Tensor(b)
            h = add(matmul(h, w), b)
            if i < n_layers - 1:
                h = relu(h)
        return h


class TwinQ:
    """Two independent Q(s, a) heads; the minimum is used downstream."""

    def __init__(self, state_dim: int, action_dim: int, hidden: tuple[int, ...]):
        sizes = (state_dim + action_dim, *hidden, 1)
        self.q1 = Mlp("q1", sizes)
        self.q2 = Mlp("q2", sizes)

    def init(self, rng: RngStream) -> dict[str, np.ndarray]:
        params = self.q1.init(rng.substream("q1"))
        params.update(self.q2.init(rng.substream("q2")))
        return params

    @property
    def param_names(self) -> tuple[str, ...]:
        return self.q1.param_names + self.q2.param_names

    def forward(self, params: dict, state, action) -> tuple[Tensor, Tensor]:
        s = state if isinstance(state, Tensor) else Tensor(np.asarray(state, dtype=np.float64))
        a = action if isinstance(action, Tensor) else Tensor(np.asarray(action, dtype=np.float64))
        x = concat([s, a])
        return self.q1.forward(params, x), self.q2.forward(params, x)


def polyak_update(target: dict[str, np.ndarray], source: dict[str, np.ndarray], tau: float) -> None:
    """In place: target <- (1 - tau) * target + tau * source."""
    for name, t in target.items():
        t *= 1.0 - tau
        t += tau * source[name]
