"""Linear PDE problems: operators, domains, manufactured solutions and presets.

Points are stored as arrays of shape ``(n, dim)`` in *physical* coordinates.
The network sees affinely rescaled coordinates (see :class:`Box`); the
operator is transformed accordingly by :meth:`PdeProblem.network_operator`.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import InconsistentProblemError, InvalidInputError


@dataclass(frozen=True)
class LinearOperator:
    """``L u = c0 u + sum_i b_i d_i u + sum_i A_i d_ii u``."""

    c0: float
    b: np.ndarray
    A: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.b, dtype=float).reshape(-1)
        A = np.asarray(self.A, dtype=float).reshape(-1)
        if b.shape != A.shape:
            raise InvalidInputError("b and A must have the same length")
        if not (np.isfinite(self.c0) and np.all(np.isfinite(b)) and np.all(np.isfinite(A))):
            raise InvalidInputError("operator coefficients must be finite")
        object.__setattr__(self, "c0", float(self.c0))
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "A", A)

    @property
    def dim(self):
        return self.b.shape[0]

    @property
    def is_zero(self):
        return self.c0 == 0.0 and not np.any(self.b) and not np.any(self.A)

    @classmethod
    def identity(cls, dim):
        return cls(1.0, np.zeros(dim), np.zeros(dim))

    def rescaled(self, scale):
        """Operator acting on ``v(x~) = u(origin + scale * x~)`` in the new coordinates."""
        return LinearOperator(self.c0, self.b / scale, self.A / scale**2)

    def augmented(self):
        """Append a derivative-free coordinate (the constant bias input)."""
        return LinearOperator(self.c0, np.append(self.b, 0.0), np.append(self.A, 0.0))


@dataclass(frozen=True)
class SolutionSpec:
    """``u(x) = sum_t c_t prod_i sin(pi * (f_ti x_i + p_ti))``.

    Frequencies ``f`` and phases ``p`` are in units of pi, so a cosine factor
    is a phase of 0.5 and a constant factor is frequency 0 with phase 0.5.
    """

    coefs: np.ndarray
    freqs: np.ndarray
    phases: np.ndarray = None

    def __post_init__(self):
        coefs = np.asarray(self.coefs, dtype=float).reshape(-1)
        freqs = np.atleast_2d(np.asarray(self.freqs, dtype=float))
        if freqs.shape[0] != coefs.shape[0]:
            raise InvalidInputError("one frequency row per coefficient required")
        phases = np.zeros_like(freqs) if self.phases is None else np.atleast_2d(
            np.asarray(self.phases, dtype=float))
        if phases.shape != freqs.shape:
            raise InvalidInputError("phases must match frequencies in shape")
        object.__setattr__(self, "coefs", coefs)
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "phases", phases)

    @classmethod
    def zero(cls, dim):
        return cls(np.zeros(0), np.zeros((0, dim)))

    @classmethod
    def from_terms(cls, terms, phases=None):
        """Build from ``(coef, f_0, ..., f_d)`` tuples and optional phase rows."""
        terms = [tuple(t) for t in terms]
        if not terms:
            raise InvalidInputError("use SolutionSpec.zero for an empty term list")
        coefs = [t[0] for t in terms]
        freqs = [t[1:] for t in terms]
        return cls(coefs, freqs, phases)

    @property
    def dim(self):
        return self.freqs.shape[1]

    def _factors(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.dim:
            raise InvalidInputError(f"expected points of dimension {self.dim}")
        arg = np.pi * (X[:, None, :] * self.freqs[None] + self.phases[None])
        return np.sin(arg), np.cos(arg)

    def value(self, X):
        sn, _ = self._factors(X)
        return np.prod(sn, axis=2) @ self.coefs

    def gradient(self, X):
        """First derivatives, shape ``(n, dim)``."""
        sn, cs = self._factors(X)
        out = np.empty((sn.shape[0], self.dim))
        for i in range(self.dim):
            fac = sn.copy()
            fac[:, :, i] = np.pi * self.freqs[None, :, i] * cs[:, :, i]
            out[:, i] = np.prod(fac, axis=2) @ self.coefs
        return out

    def second_diagonal(self, X):
        """Pure second derivatives d_ii u, shape ``(n, dim)``."""
        sn, _ = self._factors(X)
        prod = np.prod(sn, axis=2)
        k2 = (np.pi * self.freqs) ** 2
        return -(prod * self.coefs) @ k2


def manufactured_forcing(op, exact, X):
    """Apply ``op`` to the closed-form solution at the rows of ``X``."""
    if op.dim != exact.dim:
        raise InvalidInputError("operator and solution dimensions differ")
    X = np.atleast_2d(np.asarray(X, dtype=float))
    out = op.c0 * exact.value(X)
    if np.any(op.b):
        out = out + exact.gradient(X) @ op.b
    if np.any(op.A):
        out = out + exact.second_diagonal(X) @ op.A
    return out


@dataclass(frozen=True)
class Box:
    """Axis-aligned box ``[lo, hi]`` with an optional leading time axis.

    With a time axis, the boundary is ``{x0 = lo0}`` (initial slice) plus the
    lateral faces of the spatial axes; the final-time face is excluded.

    Network coordinates are ``(x - origin) / scale`` where ``origin`` sits
    ``offset`` side lengths (default 0.1) below ``lo`` on every axis and ``scale`` is the largest
    corner norm after the shift, so mapped points satisfy ``||x~|| <= 1`` and
    no boundary face passes through the origin.
    """

    lo: np.ndarray
    hi: np.ndarray
    time_axis: bool = False
    offset: float = 0.1

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float).reshape(-1)
        hi = np.asarray(self.hi, dtype=float).reshape(-1)
        if lo.shape != hi.shape or not np.all(hi > lo):
            raise InvalidInputError("box needs hi > lo on every axis")
        if not (np.isfinite(self.offset) and self.offset > 0):
            raise InvalidInputError("offset must be positive")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self):
        return self.lo.shape[0]

    @property
    def lengths(self):
        return self.hi - self.lo

    @property
    def origin(self):
        return self.lo - self.offset * self.lengths

    @property
    def scale(self):
        return float(np.linalg.norm(self.hi - self.origin))

    def faces(self):
        """Boundary faces as ``(axis, side)`` pairs with ``side`` in {0: lo, 1: hi}."""
        out = []
        for axis in range(self.dim):
            out.append((axis, 0))
            if not (self.time_axis and axis == 0):
                out.append((axis, 1))
        return out

    def face_measure(self, face):
        axis, _ = face
        return float(np.prod(np.delete(self.lengths, axis)))

    def to_network(self, X):
        return (np.asarray(X, dtype=float) - self.origin) / self.scale

    def to_physical(self, Xn):
        return self.origin + self.scale * np.asarray(Xn, dtype=float)

    def is_interior(self, X):
        X = np.atleast_2d(X)
        return np.all((X > self.lo) & (X < self.hi), axis=1)

    def is_boundary(self, X):
        """Exact membership test (no tolerance)."""
        X = np.atleast_2d(X)
        inside = np.all((X >= self.lo) & (X <= self.hi), axis=1)
        on = np.zeros(X.shape[0], dtype=bool)
        for axis, side in self.faces():
            val = self.lo[axis] if side == 0 else self.hi[axis]
            on |= X[:, axis] == val
        return inside & on


@dataclass(frozen=True)
class PdeProblem:
    name: str
    op: LinearOperator
    domain: Box
    forcing: Callable
    boundary_data: Callable
    exact: Optional[SolutionSpec] = None
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.op.is_zero:
            raise InvalidInputError("problem operator must have a nonzero coefficient")
        if self.op.dim != self.domain.dim:
            raise InvalidInputError("operator and domain dimensions differ")

    @property
    def dim(self):
        return self.domain.dim

    def network_operator(self):
        return self.op.rescaled(self.domain.scale)

    def f(self, X):
        return np.asarray(self.forcing(np.atleast_2d(X)), dtype=float)

    def g(self, X):
        return np.asarray(self.boundary_data(np.atleast_2d(X)), dtype=float)


def _zero_fn(X):
    return np.zeros(np.atleast_2d(X).shape[0])


def manufactured_problem(name, op, domain, exact, g=None, notes=None):
    """Problem whose forcing is ``op`` applied to ``exact``; boundary data defaults to ``exact``."""
    return _problem_from_exact(name, op, domain, exact, g, notes)


def _problem_from_exact(name, op, domain, exact, g=None, notes=None):
    if exact is None:
        exact = SolutionSpec.zero(domain.dim)
    if exact.dim != domain.dim:
        raise InvalidInputError("solution dimension does not match the domain")
    if exact.coefs.size == 0:
        forcing = _zero_fn
    else:
        def forcing(X):
            return manufactured_forcing(op, exact, X)
    return PdeProblem(name, op, domain, forcing, g or exact.value, exact, notes or {})


def default_heat_solution(d):
    """``sin(pi x_1) ... sin(pi x_d) cos(pi x_0 / 2)``."""
    freqs = np.r_[0.5, np.ones(d)]
    phases = np.r_[0.5, np.zeros(d)]
    return SolutionSpec([1.0], [freqs], [phases])


def heat_problem(d=1, T=1.0, exact=None, offset=0.1):
    """``d_0 u - sum_i d_ii u = f`` on ``(0, T) x (0, 1)^d`` with Dirichlet/initial data."""
    if int(d) < 1 or not T > 0:
        raise InvalidInputError("heat problem needs d >= 1 and T > 0")
    d = int(d)
    dim = d + 1
    op = LinearOperator(0.0, np.eye(dim)[0], np.r_[0.0, -np.ones(d)])
    domain = Box(np.zeros(dim), np.r_[float(T), np.ones(d)], time_axis=True, offset=offset)
    return _problem_from_exact("heat", op, domain, exact or default_heat_solution(d))


HELMHOLTZ_MULTISCALE = SolutionSpec.from_terms([(1.0, 1, 1), (0.1, 10, 10)])
HELMHOLTZ_SINGLE = SolutionSpec.from_terms([(1.0, 1, 1)])


def helmholtz_problem(k=4.0, exact=None, offset=0.1):
    """``u_xx + u_yy + k^2 u = f`` on ``[0, 1]^2`` with ``u = 0`` on the boundary."""
    op = LinearOperator(float(k) ** 2, np.zeros(2), np.ones(2))
    domain = Box(np.zeros(2), np.ones(2), offset=offset)
    if exact is not None and exact.coefs.size:
        t = np.linspace(0.0, 1.0, 101)
        edges = np.concatenate([
            np.c_[t, np.zeros_like(t)], np.c_[t, np.ones_like(t)],
            np.c_[np.zeros_like(t), t], np.c_[np.ones_like(t), t],
        ])
        worst = float(np.max(np.abs(exact.value(edges))))
        if worst > 1e-12:
            raise InconsistentProblemError(
                f"exact solution does not vanish on the boundary (max |u| = {worst:.3e})")
    return _problem_from_exact("helmholtz", op, domain, exact, g=_zero_fn)
