import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rtrl.numerics import (
    Tape,
    Tensor,
    add,
    clamp,
    concat,
    elementwise,
    exp,
    gather_cols,
    gaussian_policy_sample,
    log,
    logsoftmax_rows,
    matmul,
    minimum,
    mul,
    relu,
    rng_stream,
    softmax_rows,
    softplus,
    square,
    squashed_gaussian_log_prob,
    sub,
    sum_rows,
    tanh,
    tensor,
    tmean,
    tsum,
)

from helpers import finite_difference_grads, matmul_oracle, relative_grad_error


# ---------------------------------------------------------------------------
# forward correctness


@settings(max_examples=60, deadline=None)
@given(
    m=st.integers(1, 8),
    k=st.integers(1, 8),
    n=st.integers(1, 8),
    seed=st.integers(0, 2**31 - 1),
)
def test_matmul_matches_triple_loop_oracle(m, k, n, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(m, k))
    b = rng.normal(size=(k, n))
    got = matmul(tensor(a), tensor(b)).data
    want = matmul_oracle(a, b)
    assert np.max(np.abs(got - want)) <= 1e-12


def test_matmul_shape_mismatch_raises():
    with pytest.raises(ValueError, match="matmul"):
        matmul(tensor(np.zeros((2, 3))), tensor(np.zeros((4, 2))))


def test_add_allows_only_row_bias_broadcast():
    a = tensor(np.ones((2, 3)))
    assert np.allclose(add(a, tensor(np.arange(3.0))).data, 1.0 + np.arange(3.0))
    with pytest.raises(ValueError, match="add"):
        add(a, tensor(np.ones((3, 1))))
    with pytest.raises(ValueError, match="add"):
        add(a, tensor(np.ones(2)))


def test_relu_known_values():
    x = tensor(np.array([[-3.0, 0.0, 2.5]]))
    assert np.array_equal(relu(x).data, [[0.0, 0.0, 2.5]])


def test_softmax_rows_uniform_on_symmetric_input():
    x = tensor(np.full((4, 5), 1.7))
    s = softmax_rows(x).data
    assert np.allclose(s, 0.2)
    assert np.allclose(s.sum(axis=1), 1.0)


def test_elementwise_dispatch_and_unknown_op():
    x = tensor(np.array([[1.0, -1.0]]))
    assert np.array_equal(elementwise("relu", x).data, [[1.0, 0.0]])
    with pytest.raises(ValueError, match="unknown elementwise op"):
        elementwise("conv2d", x)


def test_float64_everywhere():
    t = tensor([[1, 2], [3, 4]])
    assert t.data.dtype == np.float64
    assert relu(t).data.dtype == np.float64


# ---------------------------------------------------------------------------
# backward correctness against central finite differences


def _check_grads(build_loss, params, tol=1e-6):
    def loss_traced(ps):
        tape = Tape()
        traced = {name: tape.param(p) for name, p in ps.items()}
        loss = build_loss(traced)
        return tape, traced, loss

    tape, traced, loss = loss_traced(params)
    grads = tape.backward(loss)
    g_ad = {name: grads.grad(t) for name, t in traced.items()}

    def loss_value(ps):
        _, _, loss = loss_traced(ps)
        return loss.item()

    g_fd = finite_difference_grads(loss_value, params)
    assert relative_grad_error(g_ad, g_fd) < tol


def test_grad_matmul_chain():
    rng = np.random.default_rng(3)
    params = {"w1": rng.normal(size=(4, 5)), "w2": rng.normal(size=(5, 2))}
    x = rng.normal(size=(3, 4))

    def loss(p):
        return tsum(tanh(matmul(relu(matmul(tensor(x), p["w1"])), p["w2"])))

    _check_grads(loss, params)


def test_grad_mixed_ops():
    rng = np.random.default_rng(5)
    params = {
        "a": rng.normal(size=(3, 4)),
        "b": rng.normal(size=(3, 4)),
        "c": rng.normal(size=(4,)),
    }

    def loss(p):
        y = add(mul(p["a"], p["b"]), p["c"])
        y = sub(softplus(y), square(tanh(p["a"])))
        y = mul(exp(clamp(p["b"], -1.0, 1.0)), y)
        return tmean(y)

    _check_grads(loss, params)


def test_grad_log_exp_sum_rows():
    rng = np.random.default_rng(7)
    params = {"a": rng.uniform(0.5, 2.0, size=(4, 3))}

    def loss(p):
        return tsum(sum_rows(log(exp(p["a"]))))

    _check_grads(loss, params)


def test_grad_concat_cols_gather():
    rng = np.random.default_rng(11)
    params = {"a": rng.normal(size=(4, 3)), "b": rng.normal(size=(4, 2))}
    idx = np.array([0, 2, 1, 4])

    def loss(p):
        joined = concat([p["a"], p["b"]])
        return tsum(gather_cols(logsoftmax_rows(joined), idx))

    _check_grads(loss, params)


def test_grad_minimum_routes_to_smaller():
    a = np.array([[1.0, 5.0]])
    b = np.array([[2.0, 3.0]])
    tape = Tape()
    ta, tb = tape.param(a), tape.param(b)
    grads = tape.backward(tsum(minimum(ta, tb)))
    assert np.array_equal(grads.grad(ta), [[1.0, 0.0]])
    assert np.array_equal(grads.grad(tb), [[0.0, 1.0]])


def test_grad_softmax_rows():
    rng = np.random.default_rng(13)
    params = {"a": rng.normal(size=(3, 4))}
    w = rng.normal(size=(3, 4))

    def loss(p):
        return tsum(mul(softmax_rows(p["a"]), tensor(w)))

    _check_grads(loss, params)


def test_backward_disconnected_param_gets_zero_grad():
    tape = Tape()
    used = tape.param(np.ones((2, 2)))
    unused = tape.param(np.ones((3, 3)))
    grads = tape.backward(tsum(used))
    assert np.array_equal(grads.grad(unused), np.zeros((3, 3)))
    assert np.array_equal(grads.grad(used), np.ones((2, 2)))


def test_backward_requires_scalar_loss():
    tape = Tape()
    p = tape.param(np.ones((2, 2)))
    with pytest.raises(ValueError, match="scalar"):
        tape.backward(relu(p))


def test_mixing_tapes_raises():
    t1, t2 = Tape(), Tape()
    with pytest.raises(ValueError, match="different tapes"):
        add(t1.param(np.ones(3)), t2.param(np.ones(3)))


def test_shared_adjoint_not_aliased():
    # y = a + a feeds the same adjoint array twice; both copies must stay intact
    tape = Tape()
    a = tape.param(np.ones((2, 2)))
    y = add(a, a)
    z = mul(y, tape.param(np.full((2, 2), 3.0)))
    grads = tape.backward(tsum(z))
    assert np.array_equal(grads.grad(a), np.full((2, 2), 6.0))


# ---------------------------------------------------------------------------
# policy heads


def test_squashed_gaussian_density_integrates_to_one():
    # 1-D action: quadrature over a fine grid of (-1, 1)
    grid = np.linspace(-1.0 + 1e-6, 1.0 - 1e-6, 200001)
    da = grid[1] - grid[0]
    for mean, log_std in [(0.0, 0.0), (0.7, -1.0), (-0.3, 0.5), (1.5, -2.0)]:
        logp = squashed_gaussian_log_prob(
            np.full((grid.size, 1), mean), np.full((grid.size, 1), log_std), grid[:, None]
        )
        mass = float(np.sum(np.exp(logp)) * da)
        assert abs(mass - 1.0) <= 0.01, (mean, log_std, mass)


def test_gaussian_sample_log_prob_consistent_with_density():
    rng = rng_stream(0).substream("sample")
    mean = np.array([[0.3, -0.8]])
    log_std = np.array([[-0.5, 0.2]])
    a, logp = gaussian_policy_sample(tensor(mean), tensor(log_std), rng)
    want = squashed_gaussian_log_prob(mean, log_std, a.data)
    assert np.allclose(logp.data, want, atol=1e-9)
    assert np.all(np.abs(a.data) < 1.0)


def test_gaussian_sample_grad_matches_fd():
    rng = np.random.default_rng(17)
    noise = rng.normal(size=(4, 2))
    q_w = rng.normal(size=(2, 1))
    params = {"mean": rng.normal(size=(4, 2)) * 0.5, "log_std": rng.normal(size=(4, 2)) * 0.3}

    def loss(p):
        a, logp = gaussian_policy_sample(p["mean"], p["log_std"], noise=noise)
        return tmean(add(logp, matmul(a, tensor(q_w))))

    _check_grads(loss, params, tol=1e-5)


def test_log_std_clamp_applied():
    mean = tensor(np.zeros((1, 1)))
    wild = tensor(np.array([[12.0]]))
    a, _ = gaussian_policy_sample(mean, wild, noise=np.array([[1.0]]))
    # std capped at e^2, so |pre-squash| stays around e^2, not e^12
    assert abs(math.atanh(a.data.item())) < 10.0


# ---------------------------------------------------------------------------
# rng streams


def test_rng_streams_deterministic_and_distinct():
    r1 = rng_stream(42).substream("env")
    r2 = rng_stream(42).substream("env")
    r3 = rng_stream(42).substream("actor")
    a, b, c = r1.normal(size=5), r2.normal(size=5), r3.normal(size=5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_rng_substream_tree_stable(seed):
    left = rng_stream(seed).substream("a").substream("b")
    right = rng_stream(seed).substream("a").substream("b")
    assert np.array_equal(left.integers(0, 1000, size=8), right.integers(0, 1000, size=8))
