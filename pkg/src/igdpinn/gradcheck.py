"""Central-difference checks of the residual Jacobian and loss gradient on random small instances."""

from dataclasses import dataclass

import numpy as np

from .activation import ActivationKind
from .model import init_network
from .pde import Box, LinearOperator, SolutionSpec, manufactured_problem
from .residual import Collocation
from .sampler import sample_problem_points

KINDS = tuple(ActivationKind)
GRADCHECK_COLUMNS = ("instance", "kind", "m", "d", "bias", "max_rel_jacobian", "rel_gradient")


@dataclass(frozen=True)
class Instance:
    problem: object
    samples: object
    net: object
    boundary_weight: float


@dataclass(frozen=True)
class GradcheckRow:
    instance: int
    kind: str
    m: int
    d: int
    bias: bool
    max_rel_jacobian: float
    rel_gradient: float

    def row(self):
        return [getattr(self, c) for c in GRADCHECK_COLUMNS]


def random_instance(rng, kind, max_m=8, max_d=3, n1=2, n2=2):
    """A random operator, box, manufactured solution, sample set and network."""
    d = int(rng.integers(1, max_d + 1))
    dim = d + 1
    op = LinearOperator(rng.normal(), rng.normal(size=dim), rng.normal(size=dim))
    lo = rng.uniform(-1.0, 0.0, dim)
    domain = Box(lo, lo + rng.uniform(0.5, 1.5, dim), time_axis=bool(rng.integers(2)))
    exact = SolutionSpec(rng.normal(size=2), rng.uniform(0.5, 2.0, (2, dim)),
                         rng.uniform(0.0, 1.0, (2, dim)))
    problem = manufactured_problem("random", op, domain, exact)
    samples = sample_problem_points(problem, n1, n2, rng)
    net = init_network(int(rng.integers(1, max_m + 1)), d, kind, "unit", rng,
                       bias_augmented=bool(rng.integers(2)))
    return Instance(problem, samples, net, float(rng.uniform(0.5, 2.0)))


def fd_jacobian(col, net, step):
    """Central differences of the stacked residuals, same layout as ``Collocation.jacobian``."""
    w = net.flat()
    out = np.empty((w.size, col.n1 + col.n2))
    for i in range(w.size):
        e = np.zeros_like(w)
        e[i] = step
        plus = col.residuals(net.with_flat(w + e)).stack()
        minus = col.residuals(net.with_flat(w - e)).stack()
        out[i] = (plus - minus) / (2.0 * step)
    return out


def fd_gradient(col, net, step):
    w = net.flat()
    out = np.empty(w.size)
    for i in range(w.size):
        e = np.zeros_like(w)
        e[i] = step
        out[i] = (col.loss(net.with_flat(w + e)) - col.loss(net.with_flat(w - e))) / (2.0 * step)
    return out


def _rel(a, b):
    scale = np.linalg.norm(b)
    return float(np.linalg.norm(a - b) / scale) if scale > 0 else float(np.linalg.norm(a))


def check_instance(inst, step=1e-5):
    """``(max relative column error of the Jacobian, relative error of the gradient)``."""
    col = Collocation(inst.problem, inst.samples, inst.boundary_weight)
    J = col.jacobian(inst.net)
    Jfd = fd_jacobian(col, inst.net, step)
    jac = max(_rel(Jfd[:, p], J[:, p]) for p in range(J.shape[1]))
    grad = _rel(fd_gradient(col, inst.net, step), col.loss_grad(inst.net))
    return jac, grad


def run_gradcheck(rng, instances=50, step=1e-5, max_m=8, max_d=3):
    """Check ``instances`` random instances, cycling through the activation kinds."""
    rows = []
    for i in range(int(instances)):
        kind = KINDS[i % len(KINDS)]
        inst = random_instance(rng, kind, max_m, max_d)
        jac, grad = check_instance(inst, step)
        rows.append(GradcheckRow(i, kind.value, inst.net.m, inst.net.d,
                                 inst.net.bias_augmented, jac, grad))
    return rows
