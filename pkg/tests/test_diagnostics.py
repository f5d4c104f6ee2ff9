import numpy as np
import pytest

from igdpinn.diagnostics import (ToyState, gd_recursion_defect, quadratic_toy, residual_terms,
                                 verify_recursion, weight_drift)
from igdpinn.errors import InvalidInputError
from igdpinn.lbfgs import LbfgsOptions
from igdpinn.model import init_network
from igdpinn.optim import gd_step, igd_step
from igdpinn.pde import heat_problem
from igdpinn.residual import residuals
from igdpinn.sampler import make_rng, sample_problem_points


def _instance(m=64, n1=8, n2=5, seed=0):
    prob = heat_problem(1)
    rng = make_rng(seed)
    samples = sample_problem_points(prob, n1, n2, rng)
    return prob, samples, init_network(m, 1, "tanh", rng=rng)


def test_terms_vanish_for_zero_eta():
    prob, samples, net = _instance()
    i1, i2 = residual_terms(net, net, 0.0, prob, samples)
    assert not np.any(i1) and not np.any(i2)


def test_terms_reject_odd_panels():
    prob, samples, net = _instance()
    with pytest.raises(InvalidInputError):
        residual_terms(net, net, 0.1, prob, samples, panels=3)


def test_quadrature_self_convergence_order():
    # Richardson: the error ratio between 4, 8 and 16 panels approaches 2^4
    prob, samples, net = _instance()
    vals = [np.concatenate(residual_terms(net, net, 1.0, prob, samples, panels=p)) for p in (4, 8, 16, 64)]
    e1 = np.linalg.norm(vals[0] - vals[3])
    e2 = np.linalg.norm(vals[1] - vals[3])
    e3 = np.linalg.norm(vals[2] - vals[3])
    assert np.log2(e1 / e2) >= 3.5 and np.log2(e2 / e3) >= 3.5


def test_implicit_recursion_identity():
    prob, samples, net = _instance(m=128)
    eta = 1.0
    new, _ = igd_step(net, prob, samples, eta, LbfgsOptions(grad_tol=1e-10))
    rep = verify_recursion(net, new, eta, prob, samples, panels=32)
    assert rep.relative_defect < 1e-6
    assert rep.defect >= 0 and rep.quadrature_panels == 32


def test_recursion_defect_grows_with_loose_subsolver():
    prob, samples, net = _instance(m=128)
    tight, _ = igd_step(net, prob, samples, 1.0, LbfgsOptions(grad_tol=1e-10))
    loose, _ = igd_step(net, prob, samples, 1.0, LbfgsOptions(grad_tol=1e-2))
    d_tight = verify_recursion(net, tight, 1.0, prob, samples).defect
    d_loose = verify_recursion(net, loose, 1.0, prob, samples).defect
    assert d_loose > 10 * d_tight


def test_explicit_recursion_identity():
    prob, samples, net = _instance(m=128)
    eta = 0.5
    new = gd_step(net, prob, samples, eta)
    r0 = np.linalg.norm(residuals(net, prob, samples).stack())
    assert gd_recursion_defect(net, new, eta, prob, samples, panels=32) < 1e-6 * r0


def test_weight_drift():
    prob, samples, net = _instance(m=4)
    moved = net.with_flat(net.flat() + np.r_[3.0, 4.0, np.zeros(6)])
    d = weight_drift(moved, net)
    assert d["max"] == pytest.approx(5.0) and d["mean"] == pytest.approx(1.25)
    assert weight_drift(net, net)["max"] == 0
    with pytest.raises(InvalidInputError):
        weight_drift(init_network(3, 1, "tanh", rng=make_rng(0)), net)


def test_toy_exact_factors():
    st = ToyState(1.0, 1.0, 1e-4, 1e4)
    gd = quadratic_toy(st, 1e-4, 5, "gd")
    igd = quadratic_toy(st, 1e-4, 5, "igd")
    assert np.allclose(gd.coord_ratios[0, 0], (1 - 1e-8) ** 2, rtol=1e-12)
    assert gd.coord_ratios[0, 1] == 0 and np.all(np.isnan(gd.coord_ratios[1:, 1]))
    for i, Ki in enumerate((1e-4, 1e4)):
        assert np.allclose(igd.coord_ratios[:, i], 1 / (1 + 1e-4 * Ki) ** 2, rtol=1e-12)
    assert np.all(igd.ratios < 1)


def test_toy_large_eta():
    st = ToyState(1.0, 1.0, 1e-4, 1e4)
    eta = (1 + np.sqrt(2)) / 1e-4
    igd = quadratic_toy(st, eta, 5, "igd")
    assert np.all(igd.coord_ratios < 0.5) and np.all(igd.ratios < 0.5)
    gd = quadratic_toy(st, 1.0, 5, "gd")
    assert gd.losses[-1] >= 10 * gd.losses[0]


def test_toy_at_optimum():
    res = quadratic_toy(ToyState(2.0, -1.0, 1.0, 3.0, 2.0, -1.0), 0.1, 3, "igd")
    assert res.converged and np.all(np.isnan(res.ratios))


def test_toy_rejects_bad_input():
    with pytest.raises(InvalidInputError):
        ToyState(1.0, 1.0, 0.0, 1.0)
    with pytest.raises(InvalidInputError):
        quadratic_toy(ToyState(1.0, 1.0, 1.0, 1.0), 0.1, 0, "gd")
    with pytest.raises(InvalidInputError):
        quadratic_toy(ToyState(1.0, 1.0, 1.0, 1.0), 0.1, 1, "newton")
