"""High-precision reference jets for the activation tests.

Each function returns, per derivative order, the exact value and the sum of
absolute values of the terms in its closed form. The second number bounds
what a double-precision evaluation of the closed form can achieve.
"""

import mpmath as mp

mp.mp.dps = 50


def tanh_ref(z):
    z = mp.mpf(z)
    t = mp.tanh(z)
    s = mp.sech(z) ** 2
    vals = [t, s, -2 * t * s, 4 * t * t * s - 2 * s * s]
    scales = [abs(t), s, abs(2 * t * s), 4 * t * t * s + 2 * s * s]
    return vals, scales


def _logistic(z):
    z = mp.mpf(z)
    s = 1 / (1 + mp.exp(-z))
    c = 1 / (1 + mp.exp(z))
    return s, c


def logistic_ref(z):
    s, c = _logistic(z)
    v1 = s * c
    vals = [s, v1, v1 * (c - s), v1 * (1 - 6 * v1)]
    scales = [s, v1, v1 * (c + s), v1 * (1 + 6 * v1)]
    return vals, scales


def softplus_ref(z):
    z = mp.mpf(z)
    s, c = _logistic(z)
    v0 = mp.log(1 + mp.exp(z))
    v2 = s * c
    return [v0, s, v2, v2 * (c - s)], [v0, s, v2, v2 * (c + s)]


REFS = {"tanh": tanh_ref, "logistic": logistic_ref, "softplus": softplus_ref}
