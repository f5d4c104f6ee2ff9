"""Explicit and implicit gradient descent on the first layer, and the instrumented training loop.

The implicit step solves the proximal problem

    w(k+1) = argmin_w  |w - w(k)|^2 / 2 + eta L(w)

with L-BFGS warm-started at ``w(k)``. Its first-order condition is the
implicit update ``w(k+1) = w(k) - eta grad L(w(k+1))``, so the subsolver's
final gradient norm is exactly the implicit-update residual.
"""

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .diagnostics import DEFAULT_PANELS, _explicit_terms, _implicit_terms, weight_drift
from .errors import InvalidInputError, NumericalFailure
from .gram import eigenvalues, gram
from .lbfgs import LbfgsOptions, lbfgs_minimize
from .residual import Collocation

DIVERGENCE_FACTOR = 1e6

HISTORY_COLUMNS = (
    "iter", "loss", "loss_interior", "loss_boundary", "lambda_min", "envelope", "drift",
    "max_w_norm", "i1_norm", "i2_norm", "sub_iters", "prox_slack", "wall_ms",
)


def _check_eta(eta):
    if not (np.isfinite(eta) and eta >= 0):
        raise InvalidInputError("eta must be finite and non-negative")


def gd_step(net, problem, samples, eta, boundary_weight=1.0, col=None):
    """``w <- w - eta * grad L(w)``; output weights stay fixed."""
    _check_eta(eta)
    col = col or Collocation(problem, samples, boundary_weight)
    g = col.loss_grad(net)
    if not np.all(np.isfinite(g)):
        raise NumericalFailure("non-finite loss gradient")
    w = net.flat() - eta * g
    if not np.all(np.isfinite(w)):
        raise NumericalFailure("non-finite weights after gradient step")
    return net.with_flat(w)


@dataclass
class IgdStats:
    sub_iters: int
    evaluations: int
    optimality_residual: float
    converged: bool
    loss_before: float
    loss_after: float
    step_norm: float
    prox_slack: float
    message: str = ""
    residuals: object = None  # ResidualSystem at the returned iterate


def igd_step(net, problem, samples, eta, opts=None, boundary_weight=1.0, col=None):
    """One implicit step via the proximal subproblem; returns ``(network, IgdStats)``.

    ``prox_slack = |dw|^2/2 - eta (L(k) - L(k+1))``; it is non-positive for
    any subsolver iterate that lowers the proximal objective.
    """
    _check_eta(eta)
    opts = opts or LbfgsOptions()
    col = col or Collocation(problem, samples, boundary_weight)
    w0 = net.flat()
    seen = {}  # residuals at every evaluated point, keyed by the weight bytes

    def objective(theta):
        rs, g = col.loss_and_grad(net.with_flat(theta))
        seen[theta.tobytes()] = rs
        diff = theta - w0
        return 0.5 * float(diff @ diff) + eta * rs.loss, diff + eta * g

    theta, st = lbfgs_minimize(objective, w0, opts)
    new = net.with_flat(theta)
    rs0 = seen.get(w0.tobytes()) or col.residuals(net)
    rs1 = seen.get(theta.tobytes()) or col.residuals(new)
    dw = float(np.linalg.norm(theta - w0))
    slack = 0.5 * dw * dw - eta * (rs0.loss - rs1.loss)
    return new, IgdStats(st.iterations, st.evaluations, st.grad_norm, st.converged,
                         rs0.loss, rs1.loss, dw, slack, st.message, rs1)


@dataclass(frozen=True)
class DiagnosticsFlags:
    record_gram_every: int = 0        # 0: only G(0)
    record_residual_terms: bool = False
    panels: int = DEFAULT_PANELS
    record_timing: bool = False
    eigen_method: str = "auto"


@dataclass
class TrainRecord:
    iter: int
    loss: float
    loss_interior: float
    loss_boundary: float
    lambda_min: float
    envelope: float
    drift: float
    max_w_norm: float
    i1_norm: float
    i2_norm: float
    sub_iters: int
    prox_slack: float
    wall_ms: float
    status: str = "ok"

    def row(self):
        d = asdict(self)
        return [d[c] for c in HISTORY_COLUMNS]


@dataclass
class TrainResult:
    initial: TrainRecord
    records: list
    network: object
    status: str
    lambda0: float
    gram_norm: float
    subsolver_failures: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def history(self):
        return [self.initial] + list(self.records)

    @property
    def losses(self):
        return np.array([r.loss for r in self.history])

    def fitted_rate(self):
        return fit_rate(self.losses)


def fit_rate(losses):
    """Geometric rate ``exp(slope)`` of a least-squares line through ``log L(k)``."""
    losses = np.asarray(losses, dtype=float)
    k = np.arange(losses.size)
    ok = np.isfinite(losses) & (losses > 0)
    if ok.sum() < 2:
        return math.nan
    slope = np.polyfit(k[ok], np.log(losses[ok]), 1)[0]
    return float(np.exp(slope))


def _gram_stats(col, net, method):
    ev = eigenvalues(gram(col.jacobian(net)), method)
    return float(ev[0]), float(max(abs(ev[0]), abs(ev[-1])))


def train(problem, samples, net0, mode, eta, iters, opts=None, flags=None,
          boundary_weight=1.0, abort_on_subsolver_failure=False, callback=None):
    """Run ``iters`` GD or IGD steps from ``net0`` and record per-iteration diagnostics.

    The envelope column is ``(1 + eta * lambda0 / 2)^(-k) L(0)`` with
    ``lambda0 = lambda_min(G(0))``. Runs whose loss exceeds
    ``1e6 * L(0)`` (or turns non-finite) stop with status ``"diverged"``.
    """
    mode = mode.lower()
    if mode not in ("gd", "igd"):
        raise InvalidInputError("mode must be 'gd' or 'igd'")
    if int(iters) < 1:
        raise InvalidInputError("iters must be at least 1")
    _check_eta(eta)
    opts = opts or LbfgsOptions()
    flags = flags or DiagnosticsFlags()
    col = Collocation(problem, samples, boundary_weight)

    rs0 = col.residuals(net0)
    loss0 = rs0.loss
    lambda0, gnorm = _gram_stats(col, net0, flags.eigen_method)
    rate = 1.0 / (1.0 + 0.5 * eta * lambda0)
    d0 = weight_drift(net0, net0)
    initial = TrainRecord(0, loss0, rs0.loss_interior, rs0.loss_boundary, lambda0, loss0,
                          0.0, d0["b_hat"], math.nan, math.nan, 0, math.nan, 0.0)
    records = []
    status = "ok"
    failures = 0
    net = net0
    for k in range(1, int(iters) + 1):
        t0 = time.perf_counter()
        sub_iters, slack = 0, math.nan
        try:
            rs = None
            if mode == "gd":
                new = gd_step(net, problem, samples, eta, col=col)
            else:
                new, st = igd_step(net, problem, samples, eta, opts, col=col)
                sub_iters, slack, rs = st.sub_iters, st.prox_slack, st.residuals
                if not st.converged:
                    failures += 1
                    if abort_on_subsolver_failure:
                        status = "subsolver_failed"
            rs = rs or col.residuals(new)
            if not np.isfinite(rs.loss):
                raise NumericalFailure("non-finite loss")
        except NumericalFailure:
            records.append(TrainRecord(k, math.inf, math.inf, math.inf, math.nan, loss0 * rate**k,
                                       math.nan, math.nan, math.nan, math.nan, sub_iters,
                                       math.nan, 0.0, "diverged"))
            status = "diverged"
            net = None
            break
        i1 = i2 = math.nan
        if flags.record_residual_terms:
            if mode == "gd":
                a, b = _explicit_terms(col, net, eta, flags.panels)
            else:
                a, b = _implicit_terms(col, new, eta, flags.panels)
            i1, i2 = float(np.linalg.norm(a)), float(np.linalg.norm(b))
        lam = math.nan
        if flags.record_gram_every > 0 and k % flags.record_gram_every == 0:
            lam = _gram_stats(col, new, flags.eigen_method)[0]
        dr = weight_drift(new, net0)
        wall = (time.perf_counter() - t0) * 1e3 if flags.record_timing else 0.0
        diverged = rs.loss > DIVERGENCE_FACTOR * loss0
        rec = TrainRecord(k, rs.loss, rs.loss_interior, rs.loss_boundary, lam, loss0 * rate**k,
                          dr["max"], dr["b_hat"], i1, i2, sub_iters, slack, wall,
                          "diverged" if diverged else status)
        records.append(rec)
        net = new
        if callback is not None:
            callback(rec)
        if diverged:
            status = "diverged"
            break
        if status == "subsolver_failed":
            break
    return TrainResult(initial, records, net, status, lambda0, gnorm, failures)
