"""Iterative estimation alternating penalized pseudolikelihood updates of the
node effects with MC-MLE updates of the structural parameters.

Sequence: an intercept-only GLMM initializes the node effects; then each
iteration fits theta by stepping MC-MLE with the current effects as offset
and refits the effects with theta's change-statistic contribution as offset.
Convergence is judged on theta only (max-norm change below tol); the
variance component is monitored but not part of the stopping rule.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DegeneracyError
from .glmm import NodeEffects, build_dyad_design, fit_pql
from .graph import UndirectedNetwork
from .mcmcmle import McmleConfig, fit_theta, mple
from .stats import ModelSpec

_DEFAULT_TOL = 1e-3
_DEFAULT_MAX_ITER = 50


@dataclass
class FitResult:
    theta: np.ndarray
    theta_se: np.ndarray
    u: np.ndarray
    sigma2: float
    trace: list[dict]  # per-iteration {"theta": list, "sigma2": float}
    converged: bool
    iterations: int
    model_kind: str  # "mERGM" or "ERGM"
    fisher: np.ndarray | None = None
    diagnostics: dict = field(default_factory=dict)


def fit_mergm(
    net: UndirectedNetwork,
    spec: ModelSpec,
    *,
    max_iter: int = _DEFAULT_MAX_ITER,
    tol: float = _DEFAULT_TOL,
    seed: int = 0,
    n_sim: int = 5000,
    burn_in: int | None = None,
    thin: int | None = None,
    max_outer: int = 25,
    newton_tol: float = 0.01,
    average_last: int = 0,
    with_node_effects: bool = True,
    glmm_tol: float = 1e-6,
    init: NodeEffects | None = None,
    theta_init=None,
) -> FitResult:
    """Full iterative fit; returns the final state and the whole trace.

    average_last > 1 replaces the final theta with the mean of that many
    trailing iterations to damp Monte-Carlo jitter (off by default).
    Degeneracy inside a theta update propagates with iteration context.
    """
    if max_iter < 1:
        raise ConfigError(f"max_iter must be >= 1, got {max_iter}")
    n = net.n
    master = np.random.SeedSequence(seed)

    if with_node_effects:
        if init is None:
            step0 = fit_pql(build_dyad_design(net), with_intercept=True, tol=glmm_tol)
            effects = step0.effects
        else:
            effects = NodeEffects(u=init.u.copy(), sigma2=init.sigma2)
    else:
        effects = NodeEffects(u=np.zeros(n), sigma2=0.0)

    if theta_init is None:
        theta_prev = mple(net, spec, effects.u)  # plays the role of theta_(0)
    else:
        theta_prev = np.asarray(theta_init, dtype=np.float64)
    trace: list[dict] = []
    theta_history: list[np.ndarray] = []
    converged = False
    last_mc = None
    iterations = 0
    for t in range(1, max_iter + 1):
        iterations = t
        cfg = McmleConfig(
            n_sim=n_sim,
            max_outer=max_outer,
            newton_tol=newton_tol,
            seed=np.random.SeedSequence(entropy=master.entropy, spawn_key=(t,)),
            burn_in=burn_in,
            thin=thin,
        )
        try:
            last_mc = fit_theta(net, spec, u_offset=effects.u, theta0=theta_prev, cfg=cfg)
        except DegeneracyError as exc:
            raise DegeneracyError(
                f"theta update degenerate at iteration {t}: {exc}",
                theta=exc.theta,
                diagnostics={"iteration": t, "trace": trace, **(exc.diagnostics or {})},
            ) from exc
        theta = last_mc.theta

        if with_node_effects:
            design = build_dyad_design(net, spec, theta)
            pql = fit_pql(design, init=effects, tol=glmm_tol)
            effects = pql.effects

        trace.append({"theta": theta.tolist(), "sigma2": effects.sigma2})
        theta_history.append(theta)
        if not with_node_effects:
            # nothing changes between iterations without the effect updates
            converged = last_mc.converged
            break
        if float(np.max(np.abs(theta - theta_prev))) < tol:
            converged = True
            break
        theta_prev = theta

    theta_final = theta_history[-1]
    if average_last > 1:
        k = min(average_last, len(theta_history))
        theta_final = np.mean(theta_history[-k:], axis=0)

    return FitResult(
        theta=theta_final,
        theta_se=last_mc.se,
        u=effects.u,
        sigma2=effects.sigma2,
        trace=trace,
        converged=converged,
        iterations=iterations,
        model_kind="mERGM" if with_node_effects else "ERGM",
        fisher=last_mc.fisher,
        diagnostics={
            "seed": seed,
            "n_sim": n_sim,
            "mcmle_converged": last_mc.converged,
            "mcmle_diagnostics": {
                k: v for k, v in last_mc.diagnostics.items() if k != "observed_stats"
            },
        },
    )


def fit_ergm(net: UndirectedNetwork, spec: ModelSpec, **kwargs) -> FitResult:
    """Homogeneous-model fit: node effects pinned to zero, no effect updates."""
    kwargs.pop("with_node_effects", None)
    return fit_mergm(net, spec, with_node_effects=False, **kwargs)
