"""Experiment orchestration behind the command-line subcommands.

Every run writes into its output directory:

    history.csv   per-iteration (or per-row) table for the subcommand
    summary.txt   key=value lines
    fields.csv    grid predictions (train / helmholtz only)
    config.echo   the fully resolved configuration

Floats are written with 17 significant digits.
"""

import math
import os

import numpy as np

from .config import serialize_config
from .diagnostics import ToyState, quadratic_toy
from .evaluation import evaluate_on_grid
from .gradcheck import GRADCHECK_COLUMNS, run_gradcheck
from .lbfgs import LbfgsOptions
from .model import init_network
from .optim import HISTORY_COLUMNS, DiagnosticsFlags, train
from .pde import HELMHOLTZ_MULTISCALE, HELMHOLTZ_SINGLE, heat_problem, helmholtz_problem
from .sampler import sample_problem_points, spawn_rngs
from .studies import GRAM_STUDY_COLUMNS, SCALING_COLUMNS, gram_study, residual_scaling_study

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGED = 3
EXIT_SUBSOLVER = 4

COMMANDS = ("train", "toy", "gram-study", "scaling-study", "gradcheck", "helmholtz")


def fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(fmt(x) for x in v) + "]"
    return str(v)


def write_csv(path, columns, rows):
    with open(path, "w") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def write_summary(path, items):
    with open(path, "w") as fh:
        for key, value in items.items():
            fh.write(f"{key}={fmt(value)}\n")


def read_summary(path):
    out = {}
    with open(path) as fh:
        for line in fh:
            if "=" in line:
                key, value = line.rstrip("\n").split("=", 1)
                out[key] = value
    return out


def _finite_max(values):
    vals = [v for v in values if math.isfinite(v)]
    return max(vals) if vals else math.nan


def build_problem(cfg):
    p = cfg.problem
    if p.name == "heat":
        return heat_problem(p.d, p.T, offset=p.offset)
    exact = HELMHOLTZ_SINGLE if p.solution == "single" else HELMHOLTZ_MULTISCALE
    return helmholtz_problem(p.k, exact, offset=p.offset)


def lbfgs_options(cfg):
    c = cfg.lbfgs
    return LbfgsOptions(c.memory, c.max_iters, c.grad_tol, c.wolfe_c1, c.wolfe_c2, c.max_line_search)


def diagnostics_flags(cfg):
    c = cfg.diagnostics
    return DiagnosticsFlags(c.record_gram_every, c.residual_terms, c.panels, c.timing, c.eigen_method)


def setup(cfg):
    """Problem, samples and initial network; samples and weights use separate seeded streams."""
    problem = build_problem(cfg)
    rng_samples, rng_init = spawn_rngs(cfg.seed, 2)
    samples = sample_problem_points(problem, cfg.samples.n1, cfg.samples.n2, rng_samples,
                                    cfg.samples.parallel_tol)
    net = init_network(cfg.model.m, problem.dim - 1, cfg.model.activation, cfg.model.init_scale,
                       rng_init, cfg.model.bias, seed=cfg.seed)
    return problem, samples, net


def _train(cfg, out, note=None):
    problem, samples, net0 = setup(cfg)
    opts = lbfgs_options(cfg)
    res = train(problem, samples, net0, cfg.optim.mode, cfg.optim.eta, cfg.optim.iters, opts,
                diagnostics_flags(cfg), cfg.problem.boundary_weight,
                cfg.optim.abort_on_subsolver_failure)
    write_csv(os.path.join(out, "history.csv"), HISTORY_COLUMNS, [r.row() for r in res.history])
    losses = res.losses
    slack = 10.0 * opts.grad_tol
    summary = {
        "command": "helmholtz" if note else "train",
        "problem": problem.name,
        "mode": cfg.optim.mode,
        "eta": cfg.optim.eta,
        "m": cfg.model.m,
        "n1": samples.n1,
        "n2": samples.n2,
        "status": res.status,
        "iters_run": len(res.records),
        "loss_initial": float(losses[0]),
        "loss_final": float(losses[-1]),
        "loss_reduction": float(losses[0] / losses[-1]) if losses[-1] > 0 else math.inf,
        "monotone": bool(np.all(np.diff(losses) <= slack)),
        "fitted_rate": res.fitted_rate(),
        "lambda_min_initial": res.lambda0,
        "gram_norm_initial": res.gram_norm,
        "envelope_rate": 1.0 / (1.0 + 0.5 * cfg.optim.eta * res.lambda0),
        "subsolver_failures": res.subsolver_failures,
        "max_prox_slack": _finite_max(r.prox_slack for r in res.records),
        "max_drift": _finite_max(r.drift for r in res.records),
    }
    if res.network is not None and problem.exact is not None:
        grid = evaluate_on_grid(problem, res.network, cfg.eval.grid)
        grid.to_csv(os.path.join(out, "fields.csv"))
        summary["rel_l2"] = grid.relative_l2()
        summary["grid_nodes"] = int(np.prod(grid.shape))
    if note:
        summary["model_note"] = note
    write_summary(os.path.join(out, "summary.txt"), summary)
    if res.status == "diverged":
        return EXIT_DIVERGED
    if res.status == "subsolver_failed":
        return EXIT_SUBSOLVER
    return EXIT_OK


def _helmholtz(cfg, out):
    cfg = cfg.with_values(**{"problem.name": "helmholtz"})
    note = (f"two-layer {cfg.model.activation} network of width {cfg.model.m}, "
            "first layer trained, output signs fixed")
    return _train(cfg, out, note)


def _toy(cfg, out):
    t = cfg.toy
    state = ToyState(t.theta1, t.theta2, t.K1, t.K2, t.theta1_star, t.theta2_star)
    gd = quadratic_toy(state, t.eta, t.steps, "gd")
    igd = quadratic_toy(state, t.eta, t.steps, "igd")
    rows = [(k + 1, gd.ratios[k], igd.ratios[k], *gd.coord_ratios[k], *igd.coord_ratios[k])
            for k in range(t.steps)]
    write_csv(os.path.join(out, "history.csv"),
              ("step", "ratio_gd", "ratio_igd", "gd_coord1", "gd_coord2", "igd_coord1", "igd_coord2"),
              rows)
    f_gd = [(1.0 - t.eta * K) ** 2 for K in (t.K1, t.K2)]
    f_igd = [1.0 / (1.0 + t.eta * K) ** 2 for K in (t.K1, t.K2)]
    with np.errstate(divide="ignore", invalid="ignore"):
        growth = float(gd.losses[-1] / gd.losses[0])
    write_summary(os.path.join(out, "summary.txt"), {
        "command": "toy",
        "eta": t.eta, "K1": t.K1, "K2": t.K2, "steps": t.steps,
        "D_gd_first": float(gd.ratios[0]),
        "D_igd_first": float(igd.ratios[0]),
        "D_gd_max": float(np.nanmax(gd.ratios)) if np.any(np.isfinite(gd.ratios)) else math.nan,
        "D_igd_max": float(np.nanmax(igd.ratios)) if np.any(np.isfinite(igd.ratios)) else math.nan,
        "gd_factor1": f_gd[0], "gd_factor2": f_gd[1], "gd_bound": max(f_gd),
        "igd_factor1": f_igd[0], "igd_factor2": f_igd[1], "igd_bound": max(f_igd),
        "gd_loss_growth": growth,
        "gd_converged": gd.converged, "igd_converged": igd.converged,
    })
    return EXIT_OK


def _gram_study(cfg, out):
    problem, samples, _ = setup(cfg)
    s = cfg.study
    study = gram_study(problem, samples, cfg.model.activation, s.widths, s.seeds, s.m_draw, s.reps,
                       cfg.seed, cfg.model.init_scale, cfg.model.bias,
                       cfg.problem.boundary_weight, cfg.diagnostics.eigen_method)
    write_csv(os.path.join(out, "history.csv"), GRAM_STUDY_COLUMNS, study.rows)
    medians = [study.median_deviation(m) for m in s.widths]
    write_summary(os.path.join(out, "summary.txt"), {
        "command": "gram-study",
        "widths": list(s.widths),
        "median_dev_frobenius": medians,
        "median_ratios": [a / b for a, b in zip(medians, medians[1:])],
        "lambda_min_min": study.min_lambda(),
        "lambda_min_ginf": study.lambda_min_inf,
        "m_draw": s.m_draw, "reps": s.reps,
    })
    return EXIT_OK


def _scaling_study(cfg, out):
    problem, samples, _ = setup(cfg)
    s = cfg.scaling
    study = residual_scaling_study(problem, samples, cfg.model.activation, s.eta, s.widths,
                                   [cfg.seed + i for i in range(s.seeds)], s.iters,
                                   cfg.model.init_scale, lbfgs_options(cfg), cfg.diagnostics.panels,
                                   cfg.model.bias, cfg.problem.boundary_weight)
    write_csv(os.path.join(out, "history.csv"), SCALING_COLUMNS, study.rows)
    write_summary(os.path.join(out, "summary.txt"), {
        "command": "scaling-study",
        "widths": study.widths,
        "median_max_i1": study.median_i1,
        "median_max_i2": study.median_i2,
        "slope_i1": study.slope_i1,
        "slope_i2": study.slope_i2,
        "excluded_runs": len(study.excluded),
    })
    return EXIT_OK


def _gradcheck(cfg, out):
    g = cfg.gradcheck
    rng = spawn_rngs(cfg.seed, 1)[0]
    rows = run_gradcheck(rng, g.instances, g.step, g.max_m, g.max_d)
    write_csv(os.path.join(out, "history.csv"), GRADCHECK_COLUMNS, [r.row() for r in rows])
    jac = max(r.max_rel_jacobian for r in rows)
    grad = max(r.rel_gradient for r in rows)
    write_summary(os.path.join(out, "summary.txt"), {
        "command": "gradcheck",
        "instances": len(rows),
        "step": g.step,
        "max_rel_jacobian": jac,
        "max_rel_gradient": grad,
    })
    return EXIT_OK


_RUNNERS = {
    "train": _train,
    "helmholtz": _helmholtz,
    "toy": _toy,
    "gram-study": _gram_study,
    "scaling-study": _scaling_study,
    "gradcheck": _gradcheck,
}


def run_experiment(command, cfg, out=None, plot=False):
    """Run one subcommand and write its files; returns the process exit code."""
    if command not in _RUNNERS:
        raise ValueError(f"unknown command {command!r}")
    out = out or cfg.output
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "config.echo"), "w") as fh:
        fh.write(serialize_config(cfg))
    code = _RUNNERS[command](cfg, out)
    if plot:
        from .plotting import render
        render(command, out)
    return code
