"""Smooth activations evaluated together with their first three derivatives."""

from enum import Enum
from typing import NamedTuple

import numpy as np

from .errors import InvalidInputError


class ActivationKind(str, Enum):
    TANH = "tanh"
    LOGISTIC = "logistic"
    SOFTPLUS = "softplus"

    @classmethod
    def parse(cls, name):
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).lower())
        except ValueError:
            raise InvalidInputError(
                f"unknown activation {name!r}; expected one of "
                + ", ".join(k.value for k in cls)
            ) from None


class Jet4(NamedTuple):
    """sigma(z) and its first three derivatives (scalars or arrays)."""

    v0: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    v3: np.ndarray


def _logistic_pair(z):
    # s = 1/(1+e^-z) and 1 - s, both without cancellation
    e = np.exp(-np.abs(z))
    big = 1.0 / (1.0 + e)
    small = e / (1.0 + e)
    pos = z >= 0
    return np.where(pos, big, small), np.where(pos, small, big)


def _tanh_jet(z):
    # written with in-place ufuncs: this is the hot path of every loss evaluation
    t = np.tanh(z)
    e = np.abs(z)
    np.multiply(e, -2.0, out=e)
    np.exp(e, out=e)
    s = e + 1.0
    np.square(s, out=s)
    np.divide(e, s, out=s)
    s *= 4.0  # sech^2 z
    v2 = t * s
    v2 *= -2.0
    v3 = np.square(t, out=e)
    v3 *= 4.0
    v3 -= 2.0 * s
    v3 *= s
    return Jet4(t, s, v2, v3)


def _logistic_jet(z):
    s, c = _logistic_pair(z)
    v1 = s * c
    return Jet4(s, v1, v1 * (c - s), v1 * (1.0 - 6.0 * v1))


def _softplus_jet(z):
    s, c = _logistic_pair(z)
    v2 = s * c
    v0 = np.maximum(z, 0.0) + np.log1p(np.exp(-np.abs(z)))
    return Jet4(v0, s, v2, v2 * (c - s))


_JETS = {
    ActivationKind.TANH: _tanh_jet,
    ActivationKind.LOGISTIC: _logistic_jet,
    ActivationKind.SOFTPLUS: _softplus_jet,
}


def eval_jet(kind, z):
    """Return ``Jet4(sigma, sigma', sigma'', sigma''')`` at ``z``.

    ``z`` may be a scalar or an array; outputs broadcast to its shape.
    Raises :class:`InvalidInputError` if any entry of ``z`` is not finite.
    """
    kind = ActivationKind.parse(kind)
    arr = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("activation argument must be finite")
    if arr.ndim == 0:
        return Jet4(*(float(v[0]) for v in _JETS[kind](arr.reshape(1))))
    return _JETS[kind](arr)


def check_lipschitz(kind, zmin, zmax, steps):
    """Empirical Lipschitz constants of sigma^(k), k = 0..3, on a uniform grid.

    Returns a dict with ``lipschitz`` (list of four floats, one per derivative
    order) and ``max_abs_v3``.
    """
    if not (np.isfinite(zmin) and np.isfinite(zmax)) or not zmin < zmax:
        raise InvalidInputError("need finite zmin < zmax")
    if int(steps) < 2:
        raise InvalidInputError("need at least 2 grid points")
    z = np.linspace(zmin, zmax, int(steps))
    jet = eval_jet(kind, z)
    dz = np.diff(z)
    consts = [float(np.max(np.abs(np.diff(v)) / dz)) for v in jet]
    return {"lipschitz": consts, "max_abs_v3": float(np.max(np.abs(jet.v3)))}
