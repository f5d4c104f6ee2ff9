"""Two-layer network u(x) = m^{-1/2} sum_r a_r sigma(w_r . x) with closed-form operator jets.

Only the first layer ``w`` is trainable. For a linear operator
``L = c0 + b.grad + sum_i A_i d_ii`` the neuron functional is

    phi(x; w) = c0 sigma(z) + sigma'(z) (b.w) + sigma''(z) sum_i A_i w_i^2,   z = w.x

and its gradient in ``w`` is

    [c0 sigma'(z) + sigma''(z) (b.w) + sigma'''(z) sum_i A_i w_i^2] x
        + sigma'(z) b + 2 sigma''(z) (A * w).
"""

import io
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .activation import ActivationKind, eval_jet
from .errors import InvalidInputError

INIT_SCALES = ("unit", "invdim")


@dataclass(frozen=True)
class Network:
    w: np.ndarray
    a: np.ndarray
    kind: ActivationKind
    d: int
    bias_augmented: bool = False
    scale: str = "unit"
    seed: int = None

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        a = np.asarray(self.a, dtype=float).reshape(-1)
        n_in = self.d + 1 + int(self.bias_augmented)
        if w.ndim != 2 or w.shape != (a.shape[0], n_in):
            raise InvalidInputError(f"w must have shape (m, {n_in}) matching a")
        if not np.all(np.abs(a) == 1.0):
            raise InvalidInputError("output weights must be +-1")
        if not np.all(np.isfinite(w)):
            raise InvalidInputError("weights must be finite")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "kind", ActivationKind.parse(self.kind))

    @property
    def m(self):
        return self.w.shape[0]

    @property
    def n_in(self):
        return self.w.shape[1]

    @property
    def n_params(self):
        return self.w.size

    def flat(self):
        return self.w.reshape(-1).copy()

    def with_flat(self, theta):
        return self.with_weights(np.asarray(theta, dtype=float).reshape(self.w.shape))

    def with_weights(self, w):
        return replace(self, w=w)

    def with_signs(self, a):
        return replace(self, a=np.asarray(a, dtype=float))

    def to_text(self):
        buf = io.StringIO()
        buf.write("m,d,kind,scale,seed,bias_augmented\n")
        buf.write(f"{self.m},{self.d},{self.kind.value},{self.scale},"
                  f"{'' if self.seed is None else self.seed},{str(self.bias_augmented).lower()}\n")
        buf.write(",".join([f"w{i}" for i in range(self.n_in)] + ["a"]) + "\n")
        for row, sign in zip(self.w, self.a):
            buf.write(",".join(repr(float(v)) for v in row) + f",{int(sign)}\n")
        return buf.getvalue()

    @classmethod
    def from_text(cls, text):
        lines = text.strip().splitlines()
        m, d, kind, scale, seed, bias = lines[1].split(",")
        rows = np.array([[float(v) for v in ln.split(",")] for ln in lines[3:]])
        if rows.shape[0] != int(m):
            raise InvalidInputError("row count does not match header m")
        return cls(rows[:, :-1], rows[:, -1], kind, int(d), bias == "true", scale,
                   int(seed) if seed else None)


def init_network(m, d, kind, scale="unit", rng=None, bias_augmented=False, seed=None):
    """Gaussian first layer (covariance I or I/(d+1)) and uniform random signs."""
    if int(m) < 1 or int(d) < 1:
        raise InvalidInputError("m and d must be positive")
    if scale not in INIT_SCALES:
        raise InvalidInputError(f"scale must be one of {INIT_SCALES}")
    if rng is None:
        from .sampler import make_rng
        rng = make_rng(0 if seed is None else seed)
    n_in = int(d) + 1 + int(bias_augmented)
    std = 1.0 if scale == "unit" else 1.0 / np.sqrt(d + 1)
    w = std * rng.standard_normal((int(m), n_in))
    a = np.where(rng.random(int(m)) < 0.5, -1.0, 1.0)
    return Network(w, a, kind, int(d), bool(bias_augmented), scale, seed)


def _inputs(net, X):
    X = np.asarray(X, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    if X.shape[1] != net.d + 1:
        raise InvalidInputError(f"expected points of dimension {net.d + 1}, got {X.shape[1]}")
    if net.bias_augmented:
        X = np.hstack([X, np.ones((X.shape[0], 1))])
    return X, single


def _operator(net, op):
    if op.dim != net.d + 1:
        raise InvalidInputError(f"operator dimension {op.dim} does not match input dimension {net.d + 1}")
    return op.augmented() if net.bias_augmented else op


# rows of X handled per block, sized so the (rows, m) temporaries stay cache-resident
BLOCK_ELEMS = 1 << 17


def _blocks(n, m):
    step = max(1, BLOCK_ELEMS // max(int(m), 1))
    for i in range(0, n, step):
        yield slice(i, min(i + step, n))


class _Terms(NamedTuple):
    X: np.ndarray
    jet: tuple
    bw: np.ndarray      # b . w_r
    aw: np.ndarray      # sum_i A_i w_ri^2
    coef: np.ndarray    # multiplier of x in the gradient, shape (N, m)
    op: object


def _terms(net, op, X, bw, aw, need_grad=True):
    # X and op are already in the network's (possibly bias-augmented) coordinates
    jet = eval_jet(net.kind, X @ net.w.T)
    coef = None
    if need_grad:
        coef = op.c0 * jet.v1
        if np.any(bw):
            coef += jet.v2 * bw
        if np.any(aw):
            coef += jet.v3 * aw
    return _Terms(X, jet, bw, aw, coef, op)


def _prepare(net, op, X):
    X, single = _inputs(net, X)
    op = _operator(net, op)
    return X, op, net.w @ op.b, (net.w**2) @ op.A, single


def _values(t, net):
    phi = t.op.c0 * t.jet.v0
    if np.any(t.bw):
        phi += t.jet.v1 * t.bw
    if np.any(t.aw):
        phi += t.jet.v2 * t.aw
    return phi @ net.a / np.sqrt(net.m)


def _vjp(t, net, e):
    # unscaled by a_r / sqrt(m); callers apply that once after accumulating blocks
    out = (t.coef * e[:, None]).T @ t.X
    out += np.outer(t.jet.v1.T @ e, t.op.b)
    out += 2.0 * (t.jet.v2.T @ e)[:, None] * (t.op.A * net.w)
    return out


def forward(net, X):
    """Network output at one point (returns float) or at each row of ``X``."""
    X, single = _inputs(net, X)
    out = np.empty(X.shape[0])
    for sl in _blocks(X.shape[0], net.m):
        out[sl] = eval_jet(net.kind, X[sl] @ net.w.T).v0 @ net.a
    out /= np.sqrt(net.m)
    return float(out[0]) if single else out


class OperatorJet(NamedTuple):
    value: float
    grad: np.ndarray  # (m, n_in): gradient rows g_r


def operator_values(net, op, X):
    X, op, bw, aw, _ = _prepare(net, op, X)
    out = np.empty(X.shape[0])
    for sl in _blocks(X.shape[0], net.m):
        out[sl] = _values(_terms(net, op, X[sl], bw, aw, need_grad=False), net)
    return out


def operator_values_and_vjp(net, op, X, target, weight=1.0):
    """Residuals ``e = weight * ((L u)(x_p) - target_p)`` and ``sum_p e_p grad_w (L u)(x_p)``.

    Both come out of one pass over the activation jets. Returns ``(e, grad)``.
    """
    X, op, bw, aw, _ = _prepare(net, op, X)
    target = np.broadcast_to(np.asarray(target, dtype=float), (X.shape[0],))
    e = np.empty(X.shape[0])
    grad = np.zeros_like(net.w)
    for sl in _blocks(X.shape[0], net.m):
        t = _terms(net, op, X[sl], bw, aw)
        e[sl] = weight * (_values(t, net) - target[sl])
        grad += _vjp(t, net, e[sl])
    return e, grad * (net.a / np.sqrt(net.m))[:, None]


def operator_gradients(net, op, X):
    """Per-point gradient blocks, shape ``(N, m, n_in)``."""
    X, op, bw, aw, _ = _prepare(net, op, X)
    t = _terms(net, op, X, bw, aw)
    s = net.a / np.sqrt(net.m)
    G = t.coef[:, :, None] * t.X[:, None, :]
    G += t.jet.v1[:, :, None] * t.op.b[None, None, :]
    G += 2.0 * t.jet.v2[:, :, None] * (t.op.A * net.w)[None]
    return G * s[None, :, None]


def operator_vjp(net, op, X, e):
    """``sum_p e_p * grad_w (L u)(x_p)``, shape ``(m, n_in)``."""
    X, op, bw, aw, _ = _prepare(net, op, X)
    e = np.asarray(e, dtype=float)
    grad = np.zeros_like(net.w)
    for sl in _blocks(X.shape[0], net.m):
        grad += _vjp(_terms(net, op, X[sl], bw, aw), net, e[sl])
    return grad * (net.a / np.sqrt(net.m))[:, None]


def operator_jvp(net, op, X, V):
    """Directional derivative of ``(L u)(x_p)`` along weights ``V`` (shape of ``w``), per point."""
    X, op, bw, aw, _ = _prepare(net, op, X)
    V = np.asarray(V, dtype=float).reshape(net.w.shape)
    s = net.a / np.sqrt(net.m)
    vb = V @ op.b
    va = 2.0 * np.sum(op.A * net.w * V, axis=1)
    out = np.empty(X.shape[0])
    for sl in _blocks(X.shape[0], net.m):
        t = _terms(net, op, X[sl], bw, aw)
        M = t.coef * (t.X @ V.T)
        M += t.jet.v1 * vb
        M += t.jet.v2 * va
        out[sl] = M @ s
    return out


def apply_operator(net, op, x):
    """Value of ``L u`` at a single point together with its per-neuron gradient rows."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise InvalidInputError("apply_operator takes a single point")
    value = float(operator_values(net, op, x)[0])
    return OperatorJet(value, operator_gradients(net, op, x)[0])
