"""Dense float64 tensors with reverse-mode automatic differentiation.

Everything in this package that needs a gradient runs through the small
tape machine defined here.  Design constraints:

* all data is float64, row-major; there are no implicit dtype casts,
* the only silent broadcast allowed anywhere is adding a 1-D bias row
  vector to a 2-D matrix,
* backward walks the tape in exact reverse creation order, so gradients
  are reproducible bit-for-bit for a fixed op sequence.

A ``Tensor`` is a thin wrapper around an ``np.ndarray``.  Untraced
tensors (``tape is None``) behave like constants; ops that receive at
least one traced input record a pullback closure on the owning tape.
"""

from __future__ import annotations

import math
from typing import Callable, Iterable, Sequence

import numpy as np

__all__ = [
    "Tensor",
    "Tape",
    "tensor",
    "matmul",
    "elementwise",
    "add",
    "sub",
    "mul",
    "scale",
    "neg",
    "relu",
    "tanh",
    "exp",
    "log",
    "softplus",
    "square",
    "clamp",
    "minimum",
    "tsum",
    "tmean",
    "sum_rows",
    "concat",
    "cols",
    "gather_cols",
    "softmax_rows",
    "logsoftmax_rows",
]


def _as_f64(data) -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64)
    return np.ascontiguousarray(arr)


class Tensor:
    """Float64 array, optionally attached to a tape node."""

    __slots__ = ("data", "tape", "nid")

    def __init__(self, data, tape: "Tape | None" = None, nid: int | None = None):
        self.data = _as_f64(data)
        self.tape = tape
        self.nid = nid

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def traced(self) -> bool:
        return self.tape is not None

    def item(self) -> float:
        return float(self.data.item())

    def __repr__(self) -> str:
        tag = f" node={self.nid}" if self.traced else ""
        return f"Tensor(shape={self.data.shape}{tag})"

    # operator sugar; every operator routes through the module-level ops
    def __matmul__(self, other):
        return matmul(self, other)

    def __add__(self, other):
        return add(self, _wrap(other))

    def __radd__(self, other):
        return add(_wrap(other), self)

    def __sub__(self, other):
        return sub(self, _wrap(other))

    def __rsub__(self, other):
        return sub(_wrap(other), self)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return scale(self, float(other))
        return mul(self, other)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __neg__(self):
        return neg(self)


def tensor(data) -> Tensor:
    """Untraced constant tensor."""
    return Tensor(data)


def _wrap(x) -> Tensor:
    if isinstance(x, Tensor):
        return x
    return Tensor(x)


class Tape:
    """Ordered record of differentiable ops.

    ``param`` registers a leaf; ops append one record each.  ``backward``
    seeds the loss adjoint with 1 and replays the records in reverse
    creation order, accumulating adjoints per node id.  Nodes never
    reached from the loss keep zero adjoints (disconnected graphs are
    legal, not an error).
    """

    __slots__ = ("_records", "_n_nodes", "_shapes")

    def __init__(self):
        self._records: list[tuple[int, Callable[[np.ndarray, dict], None]]] = []
        self._n_nodes = 0
        self._shapes: dict[int, tuple[int, ...]] = {}

    def _new_node(self, shape: tuple[int, ...]) -> int:
        nid = self._n_nodes
        self._n_nodes += 1
        self._shapes[nid] = shape
        return nid

    def param(self, data) -> Tensor:
        """Register a leaf whose gradient will be collected by backward."""
        arr = _as_f64(data)
        return Tensor(arr, self, self._new_node(arr.shape))

    def record(self, out: Tensor, pull: Callable[[np.ndarray, dict], None]) -> None:
        self._records.append((out.nid, pull))

    def backward(self, loss: Tensor) -> "GradMap":
        if loss.tape is not self:
            raise ValueError("loss tensor does not belong to this tape")
        if loss.data.size != 1:
            raise ValueError(f"backward needs a scalar loss, got shape {loss.data.shape}")
        adjoints: dict[int, np.ndarray] = {loss.nid: np.ones_like(loss.data)}
        for out_nid, pull in reversed(self._records):
            g = adjoints.get(out_nid)
            if g is None:
                continue
            pull(g, adjoints)
        return GradMap(self, adjoints)


class GradMap:
    """Result of a backward pass: adjoint lookup per traced tensor."""

    __slots__ = ("_tape", "_adjoints")

    def __init__(self, tape: Tape, adjoints: dict[int, np.ndarray]):
        self._tape = tape
        self._adjoints = adjoints

    def grad(self, t: Tensor) -> np.ndarray:
        if t.tape is not self._tape:
            raise ValueError("tensor does not belong to the tape that produced these grads")
        g = self._adjoints.get(t.nid)
        if g is None:
            return np.zeros(self._tape._shapes[t.nid])
        return g


def _accumulate(adjoints: dict, nid: int, g: np.ndarray) -> None:
    prev = adjoints.get(nid)
    if prev is None:
        # copy: pulls may hand the same array (or a view of it) to several
        # inputs, and later accumulation mutates the stored array in place
        adjoints[nid] = np.array(g, dtype=np.float64)
    else:
        prev += g


def _trace_out(data: np.ndarray, inputs: Sequence[Tensor]) -> Tensor:
    tapes = {t.tape for t in inputs if t.traced}
    if not tapes:
        return Tensor(data)
    if len(tapes) > 1:
        raise ValueError("cannot mix tensors from different tapes in one op")
    tape = tapes.pop()
    return Tensor(data, tape, tape._new_node(data.shape))


# ---------------------------------------------------------------------------
# ops


def matmul(a: Tensor, b: Tensor) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    if a.data.ndim != 2 or b.data.ndim != 2 or a.data.shape[1] != b.data.shape[0]:
        raise ValueError(f"matmul shape mismatch: {a.data.shape} @ {b.data.shape}")
    out = _trace_out(a.data @ b.data, (a, b))
    if out.traced:
        a_data, b_data = a.data, b.data
        a_nid = a.nid if a.traced else None
        b_nid = b.nid if b.traced else None

        def pull(g, adj):
            if a_nid is not None:
                _accumulate(adj, a_nid, g @ b_data.T)
            if b_nid is not None:
                _accumulate(adj, b_nid, a_data.T @ g)

        out.tape.record(out, pull)
    return out


def _binary_shapes_ok(a: np.ndarray, b: np.ndarray) -> bool:
    if a.shape == b.shape:
        return True
    # the single permitted broadcast: (m, n) op (n,) row bias
    return a.ndim == 2 and b.ndim == 1 and a.shape[1] == b.shape[0]


def add(a: Tensor, b: Tensor) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    if not _binary_shapes_ok(a.data, b.data):
        raise ValueError(f"add shape mismatch: {a.data.shape} + {b.data.shape}")
    out = _trace_out(a.data + b.data, (a, b))
    if out.traced:
        a_nid = a.nid if a.traced else None
        b_nid = b.nid if b.traced else None
        bias = b.data.ndim < a.data.ndim

        def pull(g, adj):
            if a_nid is not None:
                _accumulate(adj, a_nid, g)
            if b_nid is not None:
                _accumulate(adj, b_nid, g.sum(axis=0) if bias else g)

        out.tape.record(out, pull)
    return out


def sub(a: Tensor, b: Tensor) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    if not _binary_shapes_ok(a.data, b.data):
        raise ValueError(f"sub shape mismatch: {a.data.shape} - {b.data.shape}")
    out = _trace_out(a.data - b.data, (a, b))
    if out.traced:
        a_nid = a.nid if a.traced else None
        b_nid = b.nid if b.traced else None
        bias = b.data.ndim < a.data.ndim

        def pull(g, adj):
            if a_nid is not None:
                _accumulate(adj, a_nid, g)
            if b_nid is not None:
                _accumulate(adj, b_nid, -(g.sum(axis=0) if bias else g))

        out.tape.record(out, pull)
    return out


def mul(a: Tensor, b: Tensor) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    if a.data.shape != b.data.shape:
        raise ValueError(f"mul shape mismatch: {a.data.shape} * {b.data.shape}")
    out = _trace_out(a.data * b.data, (a, b))
    if out.traced:
        a_nid = a.nid if a.traced else None
        b_nid = b.nid if b.traced else None
        a_data, b_data = a.data, b.data

        def pull(g, adj):
            if a_nid is not None:
                _accumulate(adj, a_nid, g * b_data)
            if b_nid is not None:
                _accumulate(adj, b_nid, g * a_data)

        out.tape.record(out, pull)
    return out


def scale(a: Tensor, c: float) -> Tensor:
    a = _wrap(a)
    c = float(c)
    out = _trace_out(a.data * c, (a,))
    if out.traced:
        nid = a.nid

        def pull(g, adj):
            _accumulate(adj, nid, g * c)

        out.tape.record(out, pull)
    return out


def neg(a: Tensor) -> Tensor:
    return scale(a, -1.0)


def _unary(a: Tensor, fwd, dfwd_from_saved) -> Tensor:
    """Generic unary op; dfwd_from_saved maps saved values to local derivative."""
    a = _wrap(a)
    val = fwd(a.data)
    out = _trace_out(val, (a,))
    if out.traced:
        nid = a.nid
        local = dfwd_from_saved(a.data, val)

        def pull(g, adj):
            _accumulate(adj, nid, g * local)

        out.tape.record(out, pull)
    return out


def relu(a: Tensor) -> Tensor:
    return _unary(a, lambda x: np.maximum(x, 0.0), lambda x, y: (x > 0.0).astype(np.float64))


def tanh(a: Tensor) -> Tensor:
    return _unary(a, np.tanh, lambda x, y: 1.0 - y * y)


def exp(a: Tensor) -> Tensor:
    return _unary(a, np.exp, lambda x, y: y)


def log(a: Tensor) -> Tensor:
    return _unary(a, np.log, lambda x, y: 1.0 / x)


def softplus(a: Tensor) -> Tensor:
    # log(1 + e^x), stable for large |x|
    return _unary(
        a,
        lambda x: np.logaddexp(0.0, x),
        lambda x, y: 1.0 / (1.0 + np.exp(-x)),
    )


def square(a: Tensor) -> Tensor:
    return _unary(a, np.square, lambda x, y: 2.0 * x)


def clamp(a: Tensor, lo: float, hi: float) -> Tensor:
    # subgradient: pass-through strictly inside (lo, hi), zero outside
    return _unary(
        a,
        lambda x: np.clip(x, lo, hi),
        lambda x, y: ((x > lo) & (x < hi)).astype(np.float64),
    )


def minimum(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise min; gradient routes to the smaller input (ties go to a)."""
    a, b = _wrap(a), _wrap(b)
    if a.data.shape != b.data.shape:
        raise ValueError(f"minimum shape mismatch: {a.data.shape} vs {b.data.shape}")
    out = _trace_out(np.minimum(a.data, b.data), (a, b))
    if out.traced:
        take_a = a.data <= b.data
        a_nid = a.nid if a.traced else None
        b_nid = b.nid if b.traced else None

        def pull(g, adj):
            if a_nid is not None:
                _accumulate(adj, a_nid, g * take_a)
            if b_nid is not None:
                _accumulate(adj, b_nid, g * ~take_a)

        out.tape.record(out, pull)
    return out


def tsum(a: Tensor) -> Tensor:
    a = _wrap(a)
    out = _trace_out(np.asarray(a.data.sum()), (a,))
    if out.traced:
        nid, shp = a.nid, a.data.shape

        def pull(g, adj):
            _accumulate(adj, nid, np.full(shp, g.item()))

        out.tape.record(out, pull)
    return out


def tmean(a: Tensor) -> Tensor:
    a = _wrap(a)
    return scale(tsum(a), 1.0 / a.data.size)


def sum_rows(a: Tensor) -> Tensor:
    """Row sums of a 2-D tensor, kept as an (m, 1) column."""
    a = _wrap(a)
    if a.data.ndim != 2:
        raise ValueError(f"sum_rows needs a 2-D tensor, got {a.data.shape}")
    out = _trace_out(a.data.sum(axis=1, keepdims=True), (a,))
    if out.traced:
        nid, n = a.nid, a.data.shape[1]

        def pull(g, adj):
            _accumulate(adj, nid, np.repeat(g, n, axis=1))

        out.tape.record(out, pull)
    return out


def concat(parts: Iterable[Tensor], axis: int = 1) -> Tensor:
    parts = [_wrap(p) for p in parts]
    if axis != 1 or any(p.data.ndim != 2 for p in parts):
        raise ValueError("concat supports 2-D tensors along axis 1 only")
    rows = {p.data.shape[0] for p in parts}
    if len(rows) != 1:
        raise ValueError(f"concat row mismatch: {[p.data.shape for p in parts]}")
    out = _trace_out(np.concatenate([p.data for p in parts], axis=1), parts)
    if out.traced:
        spans = []
        off = 0
        for p in parts:
            w = p.data.shape[1]
            spans.append((p.nid if p.traced else None, off, off + w))
            off += w

        def pull(g, adj):
            for nid, j0, j1 in spans:
                if nid is not None:
                    _accumulate(adj, nid, g[:, j0:j1])

        out.tape.record(out, pull)
    return out


def cols(a: Tensor, j0: int, j1: int) -> Tensor:
    """Column slice [j0, j1) of a 2-D tensor."""
    a = _wrap(a)
    if a.data.ndim != 2 or not (0 <= j0 <= j1 <= a.data.shape[1]):
        raise ValueError(f"cols({j0}, {j1}) invalid for shape {a.data.shape}")
    out = _trace_out(a.data[:, j0:j1].copy(), (a,))
    if out.traced:
        nid, shp = a.nid, a.data.shape

        def pull(g, adj):
            full = np.zeros(shp)
            full[:, j0:j1] = g
            _accumulate(adj, nid, full)

        out.tape.record(out, pull)
    return out


def gather_cols(a: Tensor, idx: np.ndarray) -> Tensor:
    """Pick one column per row: out[i, 0] = a[i, idx[i]]."""
    a = _wrap(a)
    idx = np.asarray(idx, dtype=np.int64).reshape(-1)
    if a.data.ndim != 2 or idx.shape[0] != a.data.shape[0]:
        raise ValueError(f"gather_cols index shape {idx.shape} vs tensor {a.data.shape}")
    rows = np.arange(a.data.shape[0])
    out = _trace_out(a.data[rows, idx][:, None], (a,))
    if out.traced:
        nid, shp = a.nid, a.data.shape

        def pull(g, adj):
            full = np.zeros(shp)
            full[rows, idx] = g[:, 0]
            _accumulate(adj, nid, full)

        out.tape.record(out, pull)
    return out


def softmax_rows(a: Tensor) -> Tensor:
    a = _wrap(a)
    if a.data.ndim != 2:
        raise ValueError(f"softmax_rows needs a 2-D tensor, got {a.data.shape}")
    z = a.data - a.data.max(axis=1, keepdims=True)
    e = np.exp(z)
    s = e / e.sum(axis=1, keepdims=True)
    out = _trace_out(s, (a,))
    if out.traced:
        nid = a.nid

        def pull(g, adj):
            dot = (g * s).sum(axis=1, keepdims=True)
            _accumulate(adj, nid, s * (g - dot))

        out.tape.record(out, pull)
    return out


def logsoftmax_rows(a: Tensor) -> Tensor:
    a = _wrap(a)
    if a.data.ndim != 2:
        raise ValueError(f"logsoftmax_rows needs a 2-D tensor, got {a.data.shape}")
    z = a.data - a.data.max(axis=1, keepdims=True)
    lse = np.log(np.exp(z).sum(axis=1, keepdims=True))
    out = _trace_out(z - lse, (a,))
    if out.traced:
        nid = a.nid
        soft = np.exp(out.data)

        def pull(g, adj):
            tot = g.sum(axis=1, keepdims=True)
            _accumulate(adj, nid, g - soft * tot)

        out.tape.record(out, pull)
    return out


_ELEMENTWISE = {
    "relu": relu,
    "tanh": tanh,
    "add": add,
    "mul": mul,
    "softmax_rows": softmax_rows,
}


def elementwise(op: str, *args: Tensor) -> Tensor:
    """Dispatch an elementwise op by name; unknown names are an error."""
    try:
        fn = _ELEMENTWISE[op]
    except KeyError:
        raise ValueError(f"unknown elementwise op {op!r}; known: {sorted(_ELEMENTWISE)}") from None
    return fn(*args)


LOG_2PI = math.log(2.0 * math.pi)
