"""Normalized PDE residuals, the empirical loss, its gradient and the full Jacobian.

    s_p = n1^{-1/2} ((L u)(x_p) - f(x_p)),    h_j = (lam / n2)^{1/2} (u(y_j) - g(y_j))
    L(w) = (|s|^2 + |h|^2) / 2

``lam`` is the boundary weight, fixed at 1 unless a caller overrides it.
The Jacobian ``D`` has one column per residual (interior first) and one row
per flattened first-layer weight, ordered ``w_1, ..., w_m``.
"""

from dataclasses import dataclass

import numpy as np

from . import model
from .errors import InvalidInputError
from .pde import LinearOperator


@dataclass(frozen=True)
class ResidualSystem:
    s: np.ndarray
    h: np.ndarray

    @property
    def loss(self):
        return 0.5 * (float(self.s @ self.s) + float(self.h @ self.h))

    @property
    def loss_interior(self):
        return 0.5 * float(self.s @ self.s)

    @property
    def loss_boundary(self):
        return 0.5 * float(self.h @ self.h)

    def stack(self):
        return np.concatenate([self.s, self.h])

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("index,kind,residual\n")
            for i, v in enumerate(self.s):
                fh.write(f"{i},interior,{v:.17g}\n")
            for j, v in enumerate(self.h):
                fh.write(f"{j},boundary,{v:.17g}\n")


class Collocation:
    """Residual machinery bound to one problem and one sample set."""

    def __init__(self, problem, samples, boundary_weight=1.0):
        if samples.interior.shape[1] != problem.dim:
            raise InvalidInputError("samples do not match the problem dimension")
        if not boundary_weight > 0:
            raise InvalidInputError("boundary weight must be positive")
        self.problem = problem
        self.samples = samples
        self.X_int = samples.interior
        self.X_bnd = samples.boundary
        self.f = problem.f(samples.interior_phys)
        self.g = problem.g(samples.boundary_phys)
        self.op_int = problem.network_operator()
        self.op_bnd = LinearOperator.identity(problem.dim)
        self.c_int = 1.0 / np.sqrt(samples.n1)
        self.c_bnd = np.sqrt(boundary_weight / samples.n2)

    @property
    def n1(self):
        return self.X_int.shape[0]

    @property
    def n2(self):
        return self.X_bnd.shape[0]

    def residuals(self, net):
        s = self.c_int * (model.operator_values(net, self.op_int, self.X_int) - self.f)
        h = self.c_bnd * (model.operator_values(net, self.op_bnd, self.X_bnd) - self.g)
        return ResidualSystem(s, h)

    def loss(self, net):
        return self.residuals(net).loss

    def loss_grad(self, net, rs=None):
        rs = self.residuals(net) if rs is None else rs
        G = model.operator_vjp(net, self.op_int, self.X_int, self.c_int * rs.s)
        G += model.operator_vjp(net, self.op_bnd, self.X_bnd, self.c_bnd * rs.h)
        return G.reshape(-1)

    def loss_and_grad(self, net):
        s, Gi = model.operator_values_and_vjp(net, self.op_int, self.X_int, self.f, self.c_int)
        h, Gb = model.operator_values_and_vjp(net, self.op_bnd, self.X_bnd, self.g, self.c_bnd)
        return ResidualSystem(s, h), (self.c_int * Gi + self.c_bnd * Gb).reshape(-1)

    def jacobian(self, net):
        Gi = model.operator_gradients(net, self.op_int, self.X_int) * self.c_int
        Gb = model.operator_gradients(net, self.op_bnd, self.X_bnd) * self.c_bnd
        G = np.concatenate([Gi, Gb], axis=0)
        return G.reshape(G.shape[0], -1).T

    def jvp(self, net, V):
        """``D^T v`` for a weight-space direction ``v``: the directional derivative of (s, h)."""
        ji = model.operator_jvp(net, self.op_int, self.X_int, V) * self.c_int
        jb = model.operator_jvp(net, self.op_bnd, self.X_bnd, V) * self.c_bnd
        return np.concatenate([ji, jb])


def residuals(net, problem, samples, boundary_weight=1.0):
    return Collocation(problem, samples, boundary_weight).residuals(net)


def jacobian(net, problem, samples, boundary_weight=1.0):
    return Collocation(problem, samples, boundary_weight).jacobian(net)


def loss_grad(net, problem, samples, boundary_weight=1.0):
    return Collocation(problem, samples, boundary_weight).loss_grad(net)
