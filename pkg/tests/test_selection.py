import math

import numpy as np
import pytest

from mergm import ModelSpec, SamplerConfig, UndirectedNetwork, statistics
from mergm.enumeration import (
    exact_degree_moments,
    exact_log_kappa,
)
from mergm.glmm import SIGMA2_FLOOR
from mergm.selection import (
    AicReport,
    aic_ergm,
    aic_mergm,
    compare_aic,
    estimate_log_kappa,
    estimate_log_kappa_plugin,
    estimate_var_t,
    fisher_variance,
)
from oracles import random_network

EDGES = ModelSpec.from_string("edges")
EDGES_2STARS = ModelSpec.from_string("edges,twostars")


class FakeFit:
    def __init__(self, theta, u, sigma2):
        self.theta = np.asarray(theta, dtype=float)
        self.u = np.asarray(u, dtype=float)
        self.sigma2 = sigma2


def test_log_kappa_uniform_model_is_exact():
    net = UndirectedNetwork(5)
    cfg = SamplerConfig(n_samples=2000, seed=0, burn_in=200, thin=5)
    log_k, se, info = estimate_log_kappa(net, EDGES, [0.0], np.zeros(5), cfg)
    assert log_k == pytest.approx(10 * math.log(2), abs=1e-12)
    assert se == pytest.approx(0.0, abs=1e-12)


def test_log_kappa_two_node_closed_form():
    net = UndirectedNetwork(2)
    u = np.array([0.8, -0.3])
    cfg = SamplerConfig(n_samples=4000, seed=1, burn_in=100, thin=3)
    log_k, se, _ = estimate_log_kappa(net, EDGES, [0.0], u, cfg)
    assert log_k == pytest.approx(math.log(1 + math.exp(0.5)), abs=max(3 * se, 0.02))


def test_log_kappa_matches_enumeration():
    rng = np.random.default_rng(12)
    net = random_network(rng, 4, 0.5)
    cfg = SamplerConfig(n_samples=20000, seed=5, burn_in=200, thin=8)
    for trial in range(3):
        theta = rng.uniform(-1, 1, size=2)
        u = rng.normal(0, 0.5, size=4)
        log_k, se, _ = estimate_log_kappa(net, EDGES_2STARS, theta, u, cfg)
        exact = exact_log_kappa(4, EDGES_2STARS, theta, u)
        assert abs(log_k - exact) < max(3 * se, 0.05)


def test_log_kappa_plugin_runs_and_differs():
    # the naive plug-in average underestimates kappa in general
    net = UndirectedNetwork(4)
    theta = np.array([-0.8, 0.1])
    u = np.zeros(4)
    cfg = SamplerConfig(n_samples=4000, seed=2, burn_in=200, thin=8)
    plug, _, _ = estimate_log_kappa_plugin(net, EDGES_2STARS, theta, u, cfg)
    exact = exact_log_kappa(4, EDGES_2STARS, theta, u)
    assert np.isfinite(plug)
    assert plug < exact


def test_var_t_identical_samples_zero():
    t = np.tile([2.0, 1.0, 1.0], (50, 1))
    np.testing.assert_allclose(estimate_var_t(t), 0.0, atol=1e-14)


def test_var_t_hand_example():
    t = np.array([[0.0, 0.0], [2.0, 0.0]])
    np.testing.assert_allclose(estimate_var_t(t), [[1.0, 0.0], [0.0, 0.0]])


def test_var_t_binomial_diagonal():
    # edges-only theta=0 on n=6: each degree is Binomial(5, 1/2)
    net = UndirectedNetwork(6)
    cfg = SamplerConfig(n_samples=10000, seed=3, burn_in=300, thin=10)
    from mergm.sampler import sample

    batch = sample(net, EDGES, [0.0], np.zeros(6), cfg)
    v = estimate_var_t(batch.degrees)
    np.testing.assert_allclose(np.diag(v), 1.25, rtol=0.10)
    np.testing.assert_allclose(v, v.T, atol=1e-12)
    assert np.min(np.linalg.eigvalsh(v)) > -1e-10


def test_fisher_variance_binomial_oracle():
    n = 10
    net = UndirectedNetwork(n)
    theta = [-0.7]
    cfg = SamplerConfig(n_samples=8000, seed=7, burn_in=500, thin=20)
    fisher, se, warnings = fisher_variance(net, EDGES, theta, np.zeros(n), cfg)
    d = n * (n - 1) / 2
    pi = 1 / (1 + math.exp(0.7))
    assert fisher[0, 0] == pytest.approx(d * pi * (1 - pi), rel=0.10)
    assert se[0] == pytest.approx(1 / math.sqrt(d * pi * (1 - pi)), rel=0.10)
    assert warnings == []


def test_fisher_variance_singular_path():
    # a collapsed model yields zero-variance statistics and a warning
    net = UndirectedNetwork(6)
    cfg = SamplerConfig(n_samples=300, seed=8, burn_in=100, thin=3)
    fisher, se, warnings = fisher_variance(net, EDGES, [-30.0], np.zeros(6), cfg)
    assert fisher[0, 0] == 0.0
    assert any("singular" in w for w in warnings)


def test_aic_ergm_matches_bernoulli_closed_form():
    rng = np.random.default_rng(4)
    n = 8
    net = random_network(rng, n, 0.4)
    d = n * (n - 1) / 2
    dens = net.edge_count / d
    theta = [math.log(dens / (1 - dens))]
    cfg = SamplerConfig(n_samples=20000, seed=9, burn_in=300, thin=10)
    report = aic_ergm(theta, net, EDGES, cfg)
    closed = d * (dens * math.log(dens) + (1 - dens) * math.log(1 - dens))
    assert report.loglik == pytest.approx(closed, abs=max(3 * report.mc_se_loglik, 0.05))
    assert report.aic == pytest.approx(-2 * report.loglik + 2 * report.p)


def test_aic_ergm_uniform_model():
    net = UndirectedNetwork(5)
    cfg = SamplerConfig(n_samples=1000, seed=10, burn_in=100, thin=5)
    report = aic_ergm([0.0], net, EDGES, cfg)
    assert report.loglik == pytest.approx(-10 * math.log(2), abs=1e-10)


def test_aic_mergm_matches_enumeration_assembly():
    # assemble the Laplace log-likelihood from exact kappa and exact Var(t),
    # then check the simulation-based version lands within 3 MC errors
    rng = np.random.default_rng(6)
    net = random_network(rng, 4, 0.5)
    theta = np.array([-0.5, 0.1])
    u = rng.normal(0, 0.4, size=4)
    sigma2 = 0.5
    n = 4
    exact_logk = exact_log_kappa(n, EDGES_2STARS, theta, u)
    _, exact_vt = exact_degree_moments(n, EDGES_2STARS, theta, u)
    sign, logdet = np.linalg.slogdet(exact_vt + np.eye(n) / sigma2)
    s_obs = statistics(net, EDGES_2STARS)
    t_obs = net.deg.astype(float)
    exact_loglik = (
        theta @ s_obs
        + u @ t_obs
        - exact_logk
        - 0.5 * (u @ u) / sigma2
        - 0.5 * n * math.log(2 * math.pi)
        - 0.5 * n * math.log(sigma2)
        - 0.5 * logdet
    )
    cfg = SamplerConfig(n_samples=20000, seed=11, burn_in=300, thin=8)
    report = aic_mergm(FakeFit(theta, u, sigma2), net, EDGES_2STARS, cfg)
    # allow a little extra for Var(t) noise on top of the kappa MC error
    assert report.loglik == pytest.approx(
        float(exact_loglik), abs=max(3 * report.mc_se_loglik, 0.1)
    )
    assert report.aic == pytest.approx(-2 * report.loglik + 2 * (report.p + 1))


def test_aic_mergm_sigma_floor_smoke():
    rng = np.random.default_rng(13)
    net = random_network(rng, 5, 0.4)
    cfg = SamplerConfig(n_samples=2000, seed=12, burn_in=200, thin=6)
    report = aic_mergm(
        FakeFit([-0.3, 0.05], np.zeros(5), SIGMA2_FLOOR), net, EDGES_2STARS, cfg
    )
    assert np.isfinite(report.loglik)
    assert np.isfinite(report.aic)
    assert any("floor" in w for w in report.warnings)


def test_mergm_aic_decomposes_against_ergm_aic():
    # with u = 0 the same draws drive both reports, so the AIC difference is
    # exactly the deterministic penalty/normalization terms plus the extra
    # parameter count
    rng = np.random.default_rng(14)
    net = random_network(rng, 5, 0.5)
    theta = np.array([-0.4])
    sigma2 = 0.25
    cfg = SamplerConfig(n_samples=4000, seed=15, burn_in=200, thin=6)
    m = aic_mergm(FakeFit(theta, np.zeros(5), sigma2), net, EDGES, cfg)
    e = aic_ergm(theta, net, EDGES, cfg)
    assert m.log_kappa == pytest.approx(e.log_kappa, abs=1e-12)
    t = m.loglik_terms
    deterministic = (
        t["penalty"]
        + t["normal_const"]
        + t["variance_term"]
        - 0.5 * t["log_det_curvature"]
    )
    assert m.aic - e.aic == pytest.approx(-2 * deterministic + 2, abs=1e-9)


def test_compare_aic_self_comparison_inconclusive():
    a = AicReport("ERGM", -100.0, 204.0, 2, -50.0, 1.0, 1000)
    b = AicReport("ERGM", -100.2, 204.4, 2, -50.2, 1.0, 1000)
    out = compare_aic(a, b)
    assert abs(out["log_ratio"]) < 2 * out["mc_se"]
    assert out["inconclusive"]


def test_compare_aic_direction():
    worse = AicReport("mERGM", -200.0, 406.0, 2, -50.0, 0.1, 1000)
    better = AicReport("ERGM", -100.0, 204.0, 2, -50.0, 0.1, 1000)
    out = compare_aic(worse, better)
    assert out["log_ratio"] > 0
    assert not out["inconclusive"]
