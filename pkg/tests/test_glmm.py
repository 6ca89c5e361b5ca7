import numpy as np
import pytest
from scipy.special import expit

from mergm import ModelSpec, UndirectedNetwork
from mergm.glmm import (
    SIGMA2_FLOOR,
    NodeEffects,
    build_dyad_design,
    fit_pql,
)
from mergm.stats import dyad_index_arrays
from oracles import random_network


def cycle_network(n):
    return UndirectedNetwork.from_edges(n, [(k, (k + 1) % n) for k in range(n)])


def simulate_dyad_independent(rng, n, intercept, u):
    ii, jj = dyad_index_arrays(n)
    p = expit(intercept + u[ii] + u[jj])
    y = rng.random(len(ii)) < p
    net = UndirectedNetwork(n)
    for d in np.nonzero(y)[0]:
        net.toggle_edge(int(ii[d]), int(jj[d]))
    return net


def test_offsets_constant_for_edges_only():
    net = UndirectedNetwork.from_edges(3, [(0, 1)])
    design = build_dyad_design(net, ModelSpec.from_string("edges"), [-1.7])
    np.testing.assert_allclose(design.offset, -1.7)
    assert design.y.tolist() == [1.0, 0.0, 0.0]


def test_offsets_zero_twostars_on_empty_net():
    net = UndirectedNetwork(4)
    design = build_dyad_design(net, ModelSpec.from_string("edges,twostars"), [0.0, 1.0])
    np.testing.assert_allclose(design.offset, 0.0)


def test_offset_path_graph_hand_computed():
    net = UndirectedNetwork.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    design = build_dyad_design(
        net, ModelSpec.from_string("edges,twostars"), [-1.0, 0.5]
    )
    # dyad (0,3): degrees excluding the dyad are 1 and 1
    d03 = [k for k in range(len(design.idx_i)) if design.idx_i[k] == 0 and design.idx_j[k] == 3]
    assert design.offset[d03[0]] == pytest.approx(0.0)


def test_empty_network_goes_to_floor():
    net = UndirectedNetwork(8)
    res = fit_pql(build_dyad_design(net), with_intercept=True)
    assert res.at_floor
    assert res.effects.sigma2 == pytest.approx(SIGMA2_FLOOR)
    assert np.max(np.abs(res.effects.u)) < 1e-3
    assert "homogeneous" in " ".join(res.warnings)


def test_cycle_symmetry_gives_equal_effects():
    res = fit_pql(build_dyad_design(cycle_network(6)))
    u = res.effects.u
    assert np.max(u) - np.min(u) < 1e-6


def test_recovery_of_node_effects_and_variance():
    # dyad-independent data with known heterogeneity (Monte-Carlo oracle)
    hits_corr = 0
    hits_sig = 0
    reps = 8
    for rep in range(reps):
        rng = np.random.default_rng(1000 + rep)
        u_true = rng.normal(0, 1.0, size=50)
        net = simulate_dyad_independent(rng, 50, -1.0, u_true)
        res = fit_pql(build_dyad_design(net), with_intercept=True)
        assert res.converged
        hits_corr += np.corrcoef(res.effects.u, u_true)[0, 1] > 0.7
        hits_sig += 0.5 <= res.effects.sigma2 <= 1.6
    assert hits_corr >= reps - 1
    assert hits_sig >= reps - 1


def test_homogeneous_data_small_variance():
    rng = np.random.default_rng(55)
    net = simulate_dyad_independent(rng, 50, -1.0, np.zeros(50))
    res = fit_pql(build_dyad_design(net), with_intercept=True)
    assert res.effects.sigma2 < 0.1


def test_shrinkage_monotone_in_penalty():
    # single working step from a fixed state: larger sigma2 => larger ||u||
    rng = np.random.default_rng(3)
    net = random_network(rng, 12, 0.3)
    design = build_dyad_design(net)
    norms = []
    for sigma2 in (0.1, 1.0, 10.0):
        res = fit_pql(design, init=NodeEffects.zeros(12, sigma2), max_iter=1)
        norms.append(np.linalg.norm(res.effects.u))
    assert norms[0] <= norms[1] + 1e-12
    assert norms[1] <= norms[2] + 1e-12


def test_penalized_score_zero_at_convergence():
    rng = np.random.default_rng(9)
    u_true = rng.normal(0, 0.8, size=20)
    net = simulate_dyad_independent(rng, 20, -0.5, u_true)
    design = build_dyad_design(net)
    res = fit_pql(design, with_intercept=True, tol=1e-10)
    u = res.effects.u
    eta = res.intercept + u[design.idx_i] + u[design.idx_j]
    resid = design.y - expit(eta)
    score = np.bincount(design.idx_i, weights=resid, minlength=20)
    score += np.bincount(design.idx_j, weights=resid, minlength=20)
    score -= u / res.effects.sigma2
    assert np.max(np.abs(score)) < 1e-5
    assert abs(resid.sum()) < 1e-5  # intercept stationarity


def test_relabeling_permutes_effects():
    rng = np.random.default_rng(21)
    net = random_network(rng, 10, 0.35)
    perm = rng.permutation(10)
    permuted = UndirectedNetwork(10)
    for i, j in net.edges():
        permuted.toggle_edge(int(perm[i]), int(perm[j]))
    res = fit_pql(build_dyad_design(net), with_intercept=True, tol=1e-10)
    res_p = fit_pql(build_dyad_design(permuted), with_intercept=True, tol=1e-10)
    np.testing.assert_allclose(res_p.effects.u[perm], res.effects.u, atol=1e-6)
    assert res_p.effects.sigma2 == pytest.approx(res.effects.sigma2, rel=1e-6)


def test_nonconvergence_is_flagged_not_fatal():
    rng = np.random.default_rng(4)
    net = random_network(rng, 15, 0.4)
    res = fit_pql(build_dyad_design(net), with_intercept=True, max_iter=1)
    assert not res.converged
    assert any("converge" in w for w in res.warnings)
