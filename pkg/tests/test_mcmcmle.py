import math

import numpy as np
import pytest

from mergm import DegeneracyError, ModelSpec, UndirectedNetwork
from mergm.enumeration import exact_mle
from mergm.mcmcmle import McmleConfig, _tilt_newton, fit_theta, mple
from oracles import random_network

EDGES = ModelSpec.from_string("edges")


def network_with_density(n, n_edges, seed=0):
    rng = np.random.default_rng(seed)
    dyads = [(i, j) for i in range(n) for j in range(i + 1, n)]
    pick = rng.choice(len(dyads), size=n_edges, replace=False)
    return UndirectedNetwork.from_edges(n, [dyads[k] for k in pick])


def test_mple_edges_closed_form():
    # MPLE of the edges-only model is the empirical logit
    net = network_with_density(10, 30)  # density 2/3
    theta = mple(net, EDGES)
    assert theta[0] == pytest.approx(math.log(2), abs=1e-6)


def test_fit_theta_edges_only_matches_logit():
    net = network_with_density(12, 44)  # density 44/66 = 2/3
    cfg = McmleConfig(n_sim=4000, seed=42, burn_in=2000, thin=60, newton_tol=0.05)
    res = fit_theta(net, EDGES, cfg=cfg)
    assert res.converged
    assert res.theta[0] == pytest.approx(math.log(2), abs=0.05)
    # binomial oracle for the standard error: Var(edges) = D pi (1-pi)
    d = 66
    pi = 2 / 3
    assert res.se[0] == pytest.approx(1 / math.sqrt(d * pi * (1 - pi)), rel=0.2)


def test_fit_theta_matches_enumeration_two_terms():
    spec = ModelSpec.from_string("edges,twostars")
    net = random_network(np.random.default_rng(1), 5, 0.5)
    exact = exact_mle(net, spec)  # interior MLE for this draw
    cfg = McmleConfig(n_sim=20000, seed=7, burn_in=1000, thin=25, newton_tol=0.02)
    res = fit_theta(net, spec, cfg=cfg)
    np.testing.assert_allclose(res.theta, exact, atol=0.05)


def test_fit_theta_with_offset_matches_enumeration():
    u = np.array([1.0, 0.0, 0.0, 0.0, -1.0])
    net = UndirectedNetwork.from_edges(5, [(0, 1), (0, 2), (1, 2), (0, 3)])
    exact = exact_mle(net, EDGES, u)
    cfg = McmleConfig(n_sim=20000, seed=3, burn_in=1000, thin=25, newton_tol=0.02)
    res = fit_theta(net, EDGES, u_offset=u, cfg=cfg)
    np.testing.assert_allclose(res.theta, exact, atol=0.05)


def test_empty_network_raises_degeneracy():
    net = UndirectedNetwork(10)
    cfg = McmleConfig(n_sim=500, seed=1, burn_in=500, thin=10, max_outer=5)
    with pytest.raises(DegeneracyError) as err:
        fit_theta(net, EDGES, cfg=cfg)
    assert err.value.theta is not None
    assert err.value.diagnostics is not None


def test_tilt_objective_is_overflow_safe():
    rng = np.random.default_rng(0)
    # statistic rows large enough that exp() without log-sum-exp would overflow
    S = rng.normal(loc=200, scale=30, size=(500, 2))
    target = S.mean(axis=0) + 40 * S.std(axis=0)  # far outside the cloud
    d, w, info = _tilt_newton(S, target, tol_scale=30.0)
    assert np.all(np.isfinite(d))
    assert np.all(np.isfinite(w))
    assert np.max(np.abs(d)) <= 20.0 + 1e-9


def test_newton_steps_increase_objective():
    rng = np.random.default_rng(5)
    S = rng.normal(size=(2000, 2))
    target = S.mean(axis=0) + 0.8 * S.std(axis=0)
    d, w, info = _tilt_newton(S, target, tol_scale=1.0)
    # the tilted mean must match the target at the optimum
    np.testing.assert_allclose(w @ S, target, atol=1e-6)
    assert info["newton_steps"] >= 1


def test_seed_determinism():
    net = network_with_density(8, 12, seed=2)
    cfg = McmleConfig(n_sim=1000, seed=11, burn_in=500, thin=16, newton_tol=0.05)
    a = fit_theta(net, EDGES, cfg=cfg)
    b = fit_theta(net, EDGES, cfg=cfg)
    assert np.array_equal(a.theta, b.theta)
    assert np.array_equal(a.se, b.se)


def test_gamma_stepping_recovers_from_far_start():
    # start far from the MLE so the first iterations need partial steps
    net = network_with_density(10, 9, seed=4)  # density 0.2
    cfg = McmleConfig(n_sim=3000, seed=9, burn_in=1000, thin=30, newton_tol=0.05)
    res = fit_theta(net, EDGES, theta0=np.array([3.0]), cfg=cfg)
    assert res.converged
    assert res.theta[0] == pytest.approx(math.log(0.25), abs=0.1)
    assert min(res.diagnostics["gamma_trace"]) < 1.0
    assert res.diagnostics["gamma_trace"][-1] == 1.0
