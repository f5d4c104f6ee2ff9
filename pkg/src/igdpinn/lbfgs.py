"""Limited-memory BFGS with a strong-Wolfe line search.

Two-loop recursion for the search direction; bracketing/zoom line search
with safeguarded cubic interpolation (Nocedal & Wright, Algorithms 3.5/3.6).
"""

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, NumericalFailure


@dataclass(frozen=True)
class LbfgsOptions:
    memory: int = 10
    max_iters: int = 100
    grad_tol: float = 1e-8
    wolfe_c1: float = 1e-4
    wolfe_c2: float = 0.9
    max_line_search: int = 30

    def __post_init__(self):
        if not 0 < self.wolfe_c1 < self.wolfe_c2 < 1:
            raise InvalidInputError("need 0 < wolfe_c1 < wolfe_c2 < 1")
        if self.memory < 1 or self.max_iters < 1 or self.max_line_search < 1:
            raise InvalidInputError("memory, max_iters and max_line_search must be positive")
        if not self.grad_tol >= 0:
            raise InvalidInputError("grad_tol must be non-negative")


@dataclass
class LbfgsStats:
    iterations: int
    evaluations: int
    grad_norm: float
    converged: bool
    message: str = ""


def _cubic_min(a, fa, ga, b, fb, gb):
    """Minimizer of the cubic interpolating (a, fa, ga), (b, fb, gb); None if undefined."""
    d1 = ga + gb - 3.0 * (fa - fb) / (a - b)
    disc = d1 * d1 - ga * gb
    if disc < 0:
        return None
    d2 = np.copysign(np.sqrt(disc), b - a)
    denom = gb - ga + 2.0 * d2
    if denom == 0:
        return None
    return b - (b - a) * (gb + d2 - d1) / denom


def _zoom(phi, lo, hi, f0, g0, c1, c2, budget):
    # lo/hi are (alpha, f, g, extra) tuples; lo satisfies sufficient decrease
    for _ in range(budget):
        a_lo, f_lo, g_lo, _ = lo
        a_hi, f_hi, g_hi, _ = hi
        width = a_hi - a_lo
        trial = _cubic_min(a_lo, f_lo, g_lo, a_hi, f_hi, g_hi)
        lo_edge, hi_edge = sorted((a_lo + 0.1 * width, a_hi - 0.1 * width))
        if trial is None or not lo_edge <= trial <= hi_edge:
            trial = a_lo + 0.5 * width
        f, g, extra = phi(trial)
        if not np.isfinite(f) or f > f0 + c1 * trial * g0 or f >= f_lo:
            hi = (trial, f, g, extra)
        else:
            if abs(g) <= -c2 * g0:
                return (trial, f, g, extra), True
            if g * (a_hi - a_lo) >= 0:
                hi = lo
            lo = (trial, f, g, extra)
        if abs(hi[0] - lo[0]) <= 1e-16 * max(1.0, abs(lo[0])):
            break
    return lo, False


def strong_wolfe(phi, f0, g0, alpha0, c1, c2, budget):
    """Find a step satisfying the strong Wolfe conditions.

    ``phi(alpha)`` returns ``(f, directional derivative, extra)``.
    Returns ``((alpha, f, g, extra), ok)``; when ``ok`` is False the tuple is
    the best sufficient-decrease point found, or ``alpha == 0`` if none.
    """
    prev = (0.0, f0, g0, None)
    alpha = alpha0
    for i in range(budget):
        f, g, extra = phi(alpha)
        cur = (alpha, f, g, extra)
        if not np.isfinite(f) or f > f0 + c1 * alpha * g0 or (i > 0 and f >= prev[1]):
            return _zoom(phi, prev, cur, f0, g0, c1, c2, budget - i - 1)
        if abs(g) <= -c2 * g0:
            return cur, True
        if g >= 0:
            return _zoom(phi, cur, prev, f0, g0, c1, c2, budget - i - 1)
        prev = cur
        alpha *= 2.0
    return prev, False


def lbfgs_minimize(objective, x0, opts=None, callback=None):
    """Minimize ``objective(x) -> (value, gradient)`` starting at ``x0``.

    Stops when the Euclidean gradient norm is at most ``opts.grad_tol`` or
    after ``opts.max_iters`` iterations. A failed line search ends the run
    with the best iterate and ``converged=False``. Non-finite values at the
    starting point raise :class:`NumericalFailure`; non-finite trial points
    inside the line search are treated as rejected steps.
    """
    opts = opts or LbfgsOptions()
    x = np.array(x0, dtype=float)
    f, g = objective(x)
    evals = 1
    if not (np.isfinite(f) and np.all(np.isfinite(g))):
        raise NumericalFailure("objective is not finite at the starting point")
    gnorm = float(np.linalg.norm(g))
    S, Y, RHO = deque(maxlen=opts.memory), deque(maxlen=opts.memory), deque(maxlen=opts.memory)
    it = failures = 0
    while gnorm > opts.grad_tol and it < opts.max_iters:
        # two-loop recursion
        q = -g
        alphas = []
        for s, y, rho in zip(reversed(S), reversed(Y), reversed(RHO)):
            al = rho * (s @ q)
            q -= al * y
            alphas.append(al)
        if S:
            q *= (S[-1] @ Y[-1]) / (Y[-1] @ Y[-1])
        for (s, y, rho), al in zip(zip(S, Y, RHO), reversed(alphas)):
            q += (al - rho * (y @ q)) * s
        d = q
        gd = float(g @ d)
        if gd >= 0:
            S.clear(), Y.clear(), RHO.clear()
            d = -g
            gd = -gnorm**2
        alpha0 = 1.0 if it > 0 else min(1.0, 1.0 / gnorm)

        def phi(alpha):
            nonlocal evals
            evals += 1
            xt = x + alpha * d
            ft, gt = objective(xt)
            if not np.all(np.isfinite(gt)):
                ft = np.inf
            return ft, float(gt @ d) if np.isfinite(ft) else np.nan, (xt, gt)

        (alpha, f_new, _, extra), ok = strong_wolfe(
            phi, f, gd, alpha0, opts.wolfe_c1, opts.wolfe_c2, opts.max_line_search)
        if alpha == 0.0 or extra is None:
            return x, LbfgsStats(it, evals, gnorm, False, "line search failed")
        x_new, g_new = extra
        s, y = x_new - x, g_new - g
        sy = float(s @ y)
        if sy > 1e-12 * float(np.linalg.norm(s) * np.linalg.norm(y)):
            S.append(s), Y.append(y), RHO.append(1.0 / sy)
        x, f, g = x_new, f_new, g_new
        gnorm = float(np.linalg.norm(g))
        it += 1
        if callback is not None:
            callback(x, f, gnorm)
        if not ok:
            failures += 1
            if failures >= 2:
                return x, LbfgsStats(it, evals, gnorm, gnorm <= opts.grad_tol, "line search failed")
        else:
            failures = 0
    return x, LbfgsStats(it, evals, gnorm, gnorm <= opts.grad_tol,
                         "converged" if gnorm <= opts.grad_tol else "max_iters reached")
