"""Checks of the exact one-step residual recursions, weight drift and the quadratic toy.

For an implicit step ``w1 = w0 - eta * grad L(w1)`` with ``g = grad L(w1)``:

    (I + eta G(w1)) r(w1) = r(w0) - I(w1),
    I_p = int_0^eta < g, grad r_p(w1 + a g) - grad r_p(w1) > da,

and for an explicit step ``w1 = w0 - eta * g`` with ``g = grad L(w0)``:

    r(w1) = (I - eta G(w0)) r(w0) - chi,
    chi_p = int_0^eta < g, grad r_p(w0 - a g) - grad r_p(w0) > da,

where ``r = (s, h)`` stacks the interior and boundary residuals. The inner
products ``<v, grad r_p>`` are Jacobian-vector products, so no Jacobian is
formed for the integrals.
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson
from scipy.linalg import cho_factor, cho_solve

from .errors import InvalidInputError
from .gram import gram
from .residual import Collocation

DEFAULT_PANELS = 32


def _simpson_nodes(eta, panels):
    if int(panels) < 2 or int(panels) % 2:
        raise InvalidInputError("Simpson quadrature needs an even, positive panel count")
    return np.linspace(0.0, eta, int(panels) + 1)


def _integrate(col, net, direction, sign, eta, panels):
    nodes = _simpson_nodes(eta, panels)
    if eta == 0 or not np.any(direction):
        return np.zeros(col.n1 + col.n2)
    base = col.jvp(net, direction)
    w = net.flat()
    vals = np.array([
        col.jvp(net.with_flat(w + sign * a * direction), direction) - base for a in nodes
    ])
    return simpson(vals, x=nodes, axis=0)


def residual_terms(net_k, net_k1, eta, problem, samples, panels=DEFAULT_PANELS, boundary_weight=1.0):
    """Quadrature remainders ``(I1, I2)`` of the implicit-step recursion, evaluated at ``net_k1``."""
    col = Collocation(problem, samples, boundary_weight)
    return _implicit_terms(col, net_k1, eta, panels)


def _implicit_terms(col, net_k1, eta, panels):
    _simpson_nodes(eta, panels)
    g = col.loss_grad(net_k1)
    full = _integrate(col, net_k1, g, +1.0, eta, panels)
    return full[: col.n1], full[col.n1:]


def _explicit_terms(col, net_k, eta, panels):
    _simpson_nodes(eta, panels)
    g = col.loss_grad(net_k)
    full = _integrate(col, net_k, g, -1.0, eta, panels)
    return full[: col.n1], full[col.n1:]


@dataclass(frozen=True)
class RecursionReport:
    defect: float
    i1_norm: float
    i2_norm: float
    quadrature_panels: int
    reference_norm: float

    @property
    def relative_defect(self):
        return self.defect / self.reference_norm if self.reference_norm > 0 else 0.0


def verify_recursion(net_k, net_k1, eta, problem, samples, panels=DEFAULT_PANELS, boundary_weight=1.0):
    """Defect of ``r(k+1) = (I + eta G(k+1))^{-1} (r(k) - [I1; I2])`` for consecutive implicit iterates."""
    col = Collocation(problem, samples, boundary_weight)
    r0 = col.residuals(net_k).stack()
    r1 = col.residuals(net_k1).stack()
    i1, i2 = _implicit_terms(col, net_k1, eta, panels)
    M = np.eye(r0.size) + eta * gram(col.jacobian(net_k1))
    rhs = cho_solve(cho_factor(M), r0 - np.concatenate([i1, i2]))
    return RecursionReport(float(np.linalg.norm(r1 - rhs)), float(np.linalg.norm(i1)),
                           float(np.linalg.norm(i2)), int(panels), float(np.linalg.norm(r0)))


def gd_recursion_defect(net_k, net_k1, eta, problem, samples, panels=DEFAULT_PANELS, boundary_weight=1.0):
    """Defect of ``r(k+1) = (I - eta G(k)) r(k) - [chi1; chi2]`` for consecutive explicit iterates."""
    col = Collocation(problem, samples, boundary_weight)
    r0 = col.residuals(net_k).stack()
    r1 = col.residuals(net_k1).stack()
    c1, c2 = _explicit_terms(col, net_k, eta, panels)
    G = gram(col.jacobian(net_k))
    pred = r0 - eta * (G @ r0) - np.concatenate([c1, c2])
    return float(np.linalg.norm(r1 - pred))


def weight_drift(net_k, net0):
    if net_k.w.shape != net0.w.shape:
        raise InvalidInputError("networks differ in shape")
    drift = np.linalg.norm(net_k.w - net0.w, axis=1)
    return {"max": float(drift.max()), "mean": float(drift.mean()),
            "b_hat": float(np.linalg.norm(net_k.w, axis=1).max())}


@dataclass(frozen=True)
class ToyState:
    """``L = K1/2 (t1 - t1*)^2 + K2/2 (t2 - t2*)^2``."""

    theta1: float
    theta2: float
    K1: float
    K2: float
    theta1_star: float = 0.0
    theta2_star: float = 0.0

    def __post_init__(self):
        if not (self.K1 > 0 and self.K2 > 0):
            raise InvalidInputError("K1 and K2 must be positive")


@dataclass(frozen=True)
class ToyResult:
    ratios: np.ndarray        # L(k+1)/L(k), NaN once the loss is exactly zero
    coord_ratios: np.ndarray  # per-coordinate loss ratios, shape (steps, 2)
    losses: np.ndarray        # L(0), ..., L(steps)
    converged: bool


def quadratic_toy(state, eta, steps, mode):
    """Run exact GD or IGD updates on the two-parameter quadratic."""
    if int(steps) < 1:
        raise InvalidInputError("steps must be positive")
    mode = mode.lower()
    if mode not in ("gd", "igd"):
        raise InvalidInputError("mode must be 'gd' or 'igd'")
    K = np.array([state.K1, state.K2])
    star = np.array([state.theta1_star, state.theta2_star])
    theta = np.array([state.theta1, state.theta2], dtype=float)
    coord = [0.5 * K * (theta - star) ** 2]
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(int(steps)):
            if mode == "gd":
                theta = theta - eta * K * (theta - star)
            else:
                theta = (theta + eta * K * star) / (1.0 + eta * K)
            coord.append(0.5 * K * (theta - star) ** 2)
        coord = np.array(coord)
        losses = coord.sum(axis=1)
        prev = losses[:-1]
        ratios = np.where(prev > 0, losses[1:] / np.where(prev > 0, prev, 1.0), np.nan)
        cprev = coord[:-1]
        coord_ratios = np.where(cprev > 0, coord[1:] / np.where(cprev > 0, cprev, 1.0), np.nan)
    return ToyResult(ratios, coord_ratios, losses, bool(losses[-1] == 0.0))
