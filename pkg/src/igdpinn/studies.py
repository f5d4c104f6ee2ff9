"""Width sweeps: Gram deviation from its Monte-Carlo mean, and residual-term scaling."""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError
from .gram import eigenvalues, gram, gram_deviation, gram_infinity_mc
from .model import init_network
from .optim import DiagnosticsFlags, train
from .residual import Collocation
from .sampler import spawn_rngs

GRAM_STUDY_COLUMNS = ("m", "seed", "lambda_min", "dev_frobenius", "dev_spectral")
SCALING_COLUMNS = ("width", "seed", "max_i1", "max_i2", "status")


@dataclass
class GramStudy:
    rows: list                     # one tuple per (m, seed), in GRAM_STUDY_COLUMNS order
    g_inf: np.ndarray
    g_inf_stderr: np.ndarray
    lambda_min_inf: float

    def median_deviation(self, m):
        return float(np.median([r[3] for r in self.rows if r[0] == m]))

    def min_lambda(self):
        return float(min(r[2] for r in self.rows))


def gram_study(problem, samples, kind, widths, seeds, m_draw, reps, seed=0, scale="unit",
               bias_augmented=False, boundary_weight=1.0, eigen_method="auto"):
    """``G(0)`` spectra and deviations from a Monte-Carlo ``G-infinity`` across widths.

    The reference estimate and every ``(m, seed)`` draw use independent streams
    spawned from ``seed``.
    """
    widths = [int(m) for m in widths]
    if not widths or int(seeds) < 1:
        raise InvalidInputError("need at least one width and one seed")
    streams = spawn_rngs(seed, 1 + len(widths) * int(seeds))
    g_inf, stderr = gram_infinity_mc(problem, samples, kind, scale, m_draw, reps, streams[0],
                                     bias_augmented, boundary_weight)
    col = Collocation(problem, samples, boundary_weight)
    d = problem.dim - 1
    rows = []
    it = iter(streams[1:])
    for m in widths:
        for s in range(int(seeds)):
            net = init_network(m, d, kind, scale, next(it), bias_augmented)
            G = gram(col.jacobian(net))
            lam = float(eigenvalues(G, eigen_method)[0])
            dev = gram_deviation(G, g_inf, eigen_method)
            rows.append((m, s, lam, dev["frobenius"], dev["spectral"]))
    lam_inf = float(eigenvalues(g_inf, eigen_method)[0])
    return GramStudy(rows, g_inf, stderr, lam_inf)


@dataclass
class ScalingStudy:
    rows: list                     # (width, seed, max_i1, max_i2, status)
    widths: list
    median_i1: list
    median_i2: list
    slope_i1: float
    slope_i2: float
    excluded: list = field(default_factory=list)   # (width, seed) of diverged runs


def loglog_slope(x, y):
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    ok = np.isfinite(y) & (y > 0)
    if np.unique(x[ok]).size < 2:
        raise InvalidInputError("slope needs at least two distinct widths with positive values")
    return float(np.polyfit(np.log(x[ok]), np.log(y[ok]), 1)[0])


def residual_scaling_study(problem, samples, kind, eta, widths, seeds, iters=20, scale="unit",
                           opts=None, panels=32, bias_augmented=False, boundary_weight=1.0,
                           callback=None):
    """Median over seeds of ``max_k |I1(k)|`` (and ``|I2(k)|``) per width, and their log-log slopes.

    ``seeds`` is an iterable of integer seeds; each seeds the initialization
    at every width. Diverged runs are left out of the medians and listed in
    ``excluded``.
    """
    widths = [int(m) for m in widths]
    seeds = [int(s) for s in seeds]
    if len(set(widths)) < 2:
        raise InvalidInputError("scaling study needs at least two distinct widths")
    if not seeds:
        raise InvalidInputError("need at least one seed")
    flags = DiagnosticsFlags(record_residual_terms=True, panels=panels)
    d = problem.dim - 1
    rows, excluded = [], []
    med1, med2 = [], []
    for m in widths:
        per1, per2 = [], []
        for s in seeds:
            net0 = init_network(m, d, kind, scale, spawn_rngs(s, 1)[0], bias_augmented)
            res = train(problem, samples, net0, "igd", eta, iters, opts, flags, boundary_weight)
            i1 = max(r.i1_norm for r in res.records)
            i2 = max(r.i2_norm for r in res.records)
            rows.append((m, s, i1, i2, res.status))
            if callback is not None:
                callback(rows[-1])
            if res.status == "diverged":
                excluded.append((m, s))
                continue
            per1.append(i1)
            per2.append(i2)
        med1.append(float(np.median(per1)) if per1 else np.nan)
        med2.append(float(np.median(per2)) if per2 else np.nan)
    return ScalingStudy(rows, widths, med1, med2, loglog_slope(widths, med1),
                        loglog_slope(widths, med2), excluded)
