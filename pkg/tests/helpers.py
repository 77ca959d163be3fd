"""Shared test oracles.

These stay independent of the library's own math paths: the matmul
oracle is a plain triple loop, gradients come from central finite
differences, and pipeline outputs are recomputed by unrolling the stage
graph over time as an explicit DAG.
"""

from __future__ import annotations

import numpy as np


def matmul_oracle(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    m, k = a.shape
    k2, n = b.shape
    assert k == k2
    out = np.zeros((m, n))
    for i in range(m):
        for j in range(n):
            acc = 0.0
            for t in range(k):
                acc += a[i, t] * b[t, j]
            out[i, j] = acc
    return out


def finite_difference_grads(
    loss_fn,
    params: dict[str, np.ndarray],
    h: float = 1e-5,
) -> dict[str, np.ndarray]:
    """Central-difference gradient of a scalar loss over a param dict."""
    grads = {}
    for name, p in params.items():
        g = np.zeros_like(p)
        flat = p.reshape(-1)
        gflat = g.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            up = loss_fn(params)
            flat[i] = orig - h
            down = loss_fn(params)
            flat[i] = orig
            gflat[i] = (up - down) / (2.0 * h)
        grads[name] = g
    return grads


def relative_grad_error(g_ad: dict[str, np.ndarray], g_fd: dict[str, np.ndarray]) -> float:
    """||g_ad - g_fd|| / max(||g_fd||, tiny), over the stacked parameter vector."""
    diffs = []
    refs = []
    for name in g_fd:
        diffs.append((g_ad[name] - g_fd[name]).reshape(-1))
        refs.append(g_fd[name].reshape(-1))
    diff = np.concatenate(diffs)
    ref = np.concatenate(refs)
    return float(np.linalg.norm(diff) / max(np.linalg.norm(ref), 1e-10))


def dag_unroll_oracle(topology, params, obs_stream, mask=frozenset()):
    """Recompute pipeline outputs by unrolling the stage graph over time.

    val(node, t) is the buffer content written at the end of tick t:
    val(0, t) is the observation fed at tick t, and a stage's value at t
    is its transform applied to source values at t - 1 (zeros for t < 0).
    Returns the head output per tick, shape (T, head_width).
    """
    n_stages = topology.n_stages
    spans = topology.grouping().spans
    n_layers = topology.n_layers
    memo = {}

    def in_edges(node):
        return topology.stage_in_edges(node)

    def val(node, t):
        if t < 0:
            return np.zeros((1, topology.node_width(node)))
        if node == 0:
            return np.asarray(obs_stream[t], dtype=np.float64).reshape(1, -1)
        key = (node, t)
        if key in memo:
            return memo[key]
        parts = []
        for e in in_edges(node):
            if e in mask:
                parts.append(np.zeros((1, topology.node_width(e.src))))
            else:
                parts.append(val(e.src, t - 1))
        z = np.concatenate(parts, axis=1)
        start, end = spans[node - 1]
        for li in range(start, end):
            z = z @ params[f"s{node}_l{li}_w"] + params[f"s{node}_l{li}_b"]
            if li != n_layers - 1:
                z = np.maximum(z, 0.0)
        res = topology.stage_residual_edge(node)
        if res is not None and res not in mask:
            r = val(res.src, t - 1)
            w = params.get(f"s{node}_res_w")
            if w is not None:
                r = r @ w
            z = z + r
        memo[key] = z
        return z

    return np.concatenate([val(n_stages, t) for t in range(len(obs_stream))], axis=0)


def enumerate_paths(topology):
    """All obs -> head paths as lists of node indices (exhaustive DFS)."""
    n = topology.n_stages
    adj = {}
    for e in topology.edges:
        adj.setdefault(e.src, []).append(e.dst)
    paths = []

    def walk(node, trail):
        if node == n:
            paths.append(trail)
            return
        for nxt in adj.get(node, []):
            walk(nxt, trail + [nxt])

    walk(0, [0])
    return paths


def identity_params(topology):
    """Unit chain: main blocks identity, skip blocks zero, biases zero.

    Requires every node width to be equal.
    """
    params = {}
    spans = topology.grouping().spans
    for j in range(1, topology.n_stages + 1):
        edges = topology.stage_in_edges(j)
        width = topology.node_width(0)
        blocks = []
        for e in edges:
            blocks.append(np.eye(width) if e.kind == "main" else np.zeros((width, width)))
        start, end = spans[j - 1]
        for li in range(start, end):
            params[f"s{j}_l{li}_w"] = np.concatenate(blocks, axis=0) if li == start else np.eye(width)
            params[f"s{j}_l{li}_b"] = np.zeros(width)
    return params
