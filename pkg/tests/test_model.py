import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from igdpinn.activation import eval_jet
from igdpinn.errors import InvalidInputError
from igdpinn.model import (Network, apply_operator, forward, init_network, operator_gradients,
                           operator_jvp, operator_values, operator_vjp)
from igdpinn.pde import LinearOperator
from igdpinn.sampler import make_rng

HEAT = LinearOperator(0.0, [1.0, 0.0], [0.0, -1.0])


def _net(w, a, kind="tanh", bias=False):
    w = np.atleast_2d(np.asarray(w, dtype=float))
    return Network(w, np.asarray(a, dtype=float), kind, w.shape[1] - 1 - int(bias), bias)


def _brute_forward(net, x):
    x = np.r_[x, 1.0] if net.bias_augmented else np.asarray(x)
    return sum(a * eval_jet(net.kind, float(w @ x)).v0 for w, a in zip(net.w, net.a)) / np.sqrt(net.m)


def _fd_operator_in_x(net, op, x, h=1e-4):
    """L u at x by central differences of forward in x."""
    x = np.asarray(x, dtype=float)
    u0 = forward(net, x)
    out = op.c0 * u0
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        up, dn = forward(net, x + e), forward(net, x - e)
        out += op.b[i] * (up - dn) / (2 * h) + op.A[i] * (up - 2 * u0 + dn) / h**2
    return out


def test_init_determinism_and_moments():
    a = init_network(4, 1, "tanh", rng=make_rng(3))
    b = init_network(4, 1, "tanh", rng=make_rng(3))
    assert np.array_equal(a.w, b.w) and np.array_equal(a.a, b.a)
    big = init_network(10**4, 2, "tanh", rng=make_rng(4))
    assert np.mean(np.sum(big.w**2, axis=1)) == pytest.approx(3.0, rel=0.05)
    assert abs(big.a.sum()) <= 4 * np.sqrt(10**4)
    small = init_network(10**4, 2, "tanh", "invdim", rng=make_rng(4))
    assert np.mean(np.sum(small.w**2, axis=1)) == pytest.approx(1.0, rel=0.05)


def test_init_errors():
    with pytest.raises(InvalidInputError):
        init_network(0, 1, "tanh")
    with pytest.raises(InvalidInputError):
        init_network(4, 1, "tanh", scale="big")


def test_network_validation():
    with pytest.raises(InvalidInputError):
        _net([[1.0, 0.0]], [0.5])
    with pytest.raises(InvalidInputError):
        _net([[np.inf, 0.0]], [1.0])
    with pytest.raises(InvalidInputError):
        Network(np.zeros((2, 3)), [1, 1], "tanh", 1)


def test_forward_examples():
    zero = _net(np.zeros((3, 2)), [1, -1, 1])
    assert forward(zero, [0.3, 0.4]) == 0.0
    one = _net([[1.0, 0.0]], [1.0])
    assert forward(one, [1.0, 0.0]) == pytest.approx(0.761594, abs=1e-6)
    net = init_network(7, 2, "logistic", rng=make_rng(0))
    x = np.array([0.1, -0.2, 0.3])
    assert forward(net.with_signs(-net.a), x) == pytest.approx(-forward(net, x), abs=1e-15)
    with pytest.raises(InvalidInputError):
        forward(net, [0.1, 0.2])


@pytest.mark.parametrize("kind", ["tanh", "logistic", "softplus"])
@pytest.mark.parametrize("bias", [False, True])
def test_forward_matches_brute_force(kind, bias):
    net = init_network(9, 2, kind, rng=make_rng(1), bias_augmented=bias)
    X = make_rng(2).random((6, 3))
    assert np.allclose(forward(net, X), [_brute_forward(net, x) for x in X], rtol=1e-14, atol=1e-15)


def test_heat_operator_example():
    net = _net([[1.0, 1.0]], [1.0])
    jet = apply_operator(net, HEAT, np.array([0.5, 0.5]))
    j = eval_jet("tanh", 1.0)
    assert jet.value == pytest.approx(j.v1 - j.v2, abs=1e-15)
    assert jet.value == pytest.approx(1.059674, abs=1e-6)


def test_heat_gradient_termwise():
    # c0 = 0, b = e0, A = (0, -1): g_r = a/sqrt(m) [ s''(z) w0 x + s'(z) e0 - s'''(z) w1^2 x - 2 s''(z) (0, w1) ]
    net = init_network(3, 1, "tanh", rng=make_rng(5))
    x = np.array([0.3, 0.6])
    g = apply_operator(net, HEAT, x).grad
    for r in range(3):
        w0, w1 = net.w[r]
        j = eval_jet("tanh", float(net.w[r] @ x))
        terms = [j.v2 * w0 * x, j.v1 * np.array([1.0, 0.0]), -j.v3 * w1**2 * x,
                 -2 * j.v2 * np.array([0.0, w1])]
        assert np.allclose(g[r], net.a[r] / np.sqrt(3) * sum(terms), rtol=1e-14, atol=1e-16)


def test_zero_and_identity_operators():
    net = init_network(5, 1, "tanh", rng=make_rng(6))
    x = np.array([0.2, 0.7])
    zero = apply_operator(net, LinearOperator(0.0, [0, 0], [0, 0]), x)
    assert zero.value == 0 and not np.any(zero.grad)
    ident = apply_operator(net, LinearOperator.identity(2), x)
    assert ident.value == pytest.approx(forward(net, x), abs=1e-15)
    z = net.w @ x
    expect = (net.a / np.sqrt(5) * eval_jet("tanh", z).v1)[:, None] * x[None, :]
    assert np.allclose(ident.grad, expect, rtol=1e-14)


@pytest.mark.parametrize("kind", ["tanh", "logistic", "softplus"])
def test_operator_value_matches_fd_in_x(kind):
    rng = make_rng(7)
    for _ in range(5):
        op = LinearOperator(rng.normal(), rng.normal(size=3), rng.normal(size=3))
        net = init_network(6, 2, kind, rng=rng)
        x = rng.random(3) * 0.5
        assert apply_operator(net, op, x).value == pytest.approx(_fd_operator_in_x(net, op, x), abs=1e-6)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["tanh", "logistic", "softplus"]),
       st.integers(1, 8), st.integers(1, 3), st.booleans())
def test_gradient_rows_match_fd(seed, kind, m, d, bias):
    rng = make_rng(seed)
    op = LinearOperator(rng.normal(), rng.normal(size=d + 1), rng.normal(size=d + 1))
    net = init_network(m, d, kind, rng=rng, bias_augmented=bias)
    x = rng.uniform(-1, 1, d + 1) / np.sqrt(d + 1)
    g = apply_operator(net, op, x).grad
    h = 1e-5
    fd = np.empty_like(net.w)
    for r in range(m):
        for i in range(net.n_in):
            w = net.w.copy()
            w[r, i] += h
            up = apply_operator(net.with_weights(w), op, x).value
            w[r, i] -= 2 * h
            dn = apply_operator(net.with_weights(w), op, x).value
            fd[r, i] = (up - dn) / (2 * h)
    for r in range(m):
        scale = max(np.linalg.norm(g[r]), 1e-8)
        assert np.linalg.norm(fd[r] - g[r]) / scale < 1e-5


def test_duplicating_neurons_scales_by_sqrt2():
    net = init_network(4, 1, "tanh", rng=make_rng(8))
    dup = Network(np.vstack([net.w, net.w]), np.r_[net.a, net.a], "tanh", 1)
    x = np.array([0.3, 0.4])
    assert apply_operator(dup, HEAT, x).value == pytest.approx(np.sqrt(2) * apply_operator(net, HEAT, x).value, rel=1e-14)


def test_batched_paths_agree():
    rng = make_rng(9)
    net = init_network(300, 2, "softplus", rng=rng, bias_augmented=True)
    op = LinearOperator(0.5, rng.normal(size=3), rng.normal(size=3))
    X = rng.random((1000, 3)) * 0.5  # more rows than one block
    G = operator_gradients(net, op, X)
    vals = operator_values(net, op, X)
    assert np.allclose(vals, [apply_operator(net, op, x).value for x in X[:5]] + list(vals[5:]), rtol=1e-13)
    e = rng.normal(size=1000)
    assert np.allclose(operator_vjp(net, op, X, e), np.einsum("p,prk->rk", e, G), rtol=1e-11, atol=1e-14)
    V = rng.normal(size=net.w.shape)
    assert np.allclose(operator_jvp(net, op, X, V), np.einsum("prk,rk->p", G, V), rtol=1e-11, atol=1e-14)


def test_text_round_trip():
    net = init_network(5, 2, "logistic", "invdim", make_rng(10), bias_augmented=True, seed=10)
    back = Network.from_text(net.to_text())
    assert np.array_equal(back.w, net.w) and np.array_equal(back.a, net.a)
    assert (back.kind, back.d, back.scale, back.seed, back.bias_augmented) == \
        (net.kind, net.d, net.scale, net.seed, net.bias_augmented)
    assert net.to_text().splitlines()[0] == "m,d,kind,scale,seed,bias_augmented"
