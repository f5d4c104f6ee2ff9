"""Grid evaluation of a trained network against the exact solution."""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .model import forward
from .sampler import grid_points


def relative_l2(pred, exact):
    """``sqrt(sum (pred - exact)^2 / sum exact^2)`` over all nodes."""
    pred = np.asarray(pred, dtype=float)
    exact = np.asarray(exact, dtype=float)
    if pred.shape != exact.shape:
        raise InvalidInputError("prediction and exact values differ in shape")
    denom = float(np.sum(exact * exact))
    if denom == 0:
        raise InvalidInputError("exact solution is identically zero on the grid")
    return float(np.sqrt(np.sum((pred - exact) ** 2) / denom))


@dataclass(frozen=True)
class EvalGrid:
    points: np.ndarray    # physical coordinates, (N, dim)
    pred: np.ndarray
    exact: np.ndarray
    shape: tuple          # nodes per axis

    def __post_init__(self):
        n = int(np.prod(self.shape))
        if not (self.points.shape[0] == self.pred.shape[0] == self.exact.shape[0] == n):
            raise InvalidInputError("grid arrays do not match the grid shape")

    def relative_l2(self):
        return relative_l2(self.pred, self.exact)

    def to_csv(self, path):
        dim = self.points.shape[1]
        with open(path, "w") as fh:
            fh.write(",".join([f"x{i}" for i in range(dim)] + ["pred", "exact"]) + "\n")
            for x, p, e in zip(self.points, self.pred, self.exact):
                fh.write(",".join(f"{v:.17g}" for v in (*x, p, e)) + "\n")


def evaluate_on_grid(problem, net, n_per_axis):
    """Network and exact values on a regular ``n_per_axis``-per-axis grid over the closed domain."""
    if problem.exact is None:
        raise InvalidInputError("problem has no exact solution")
    X = grid_points(problem, n_per_axis)
    pred = forward(net, problem.domain.to_network(X))
    exact = problem.exact.value(X)
    return EvalGrid(X, pred, exact, (int(n_per_axis),) * problem.dim)
