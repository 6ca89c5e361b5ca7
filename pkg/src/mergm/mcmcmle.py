"""Monte-Carlo maximum likelihood for the structural parameters, with a
stepping safeguard and a fixed node-effect offset.

Each outer iteration simulates networks at the current parameter, moves the
target statistic toward the observed one only as far as the simulated cloud
supports (largest step length gamma whose target stays inside a 1.5-sd
componentwise box and a Mahalanobis ellipsoid), and maximizes the
importance-sampled log-likelihood ratio by Newton with step halving.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit, logsumexp

from .errors import ConfigError, DegeneracyError
from .graph import UndirectedNetwork
from .sampler import SamplerConfig, sample
from .stats import ModelSpec, dyad_change_matrix, dyad_index_arrays, statistics

_DEFAULT_GAMMA_GRID = (1.0, 0.8, 0.6, 0.4, 0.2, 0.1)
# componentwise band width and root-mean-square Mahalanobis radius for the
# ellipsoidal stand-in for the convex-hull check
_HULL_SD = 1.5
_NEWTON_TRUST = 20.0
_MPLE_CLIP = 10.0


@dataclass(frozen=True)
class McmleConfig:
    n_sim: int = 5000
    max_outer: int = 25
    gamma_grid: tuple[float, ...] = _DEFAULT_GAMMA_GRID
    newton_tol: float = 0.01
    seed: int = 0
    burn_in: int | None = None
    thin: int | None = None

    def __post_init__(self):
        if self.n_sim < 100:
            raise ConfigError(f"n_sim must be >= 100, got {self.n_sim}")
        if any(not (0 < g <= 1) for g in self.gamma_grid):
            raise ConfigError(f"gamma grid values must lie in (0,1]: {self.gamma_grid}")
        if self.max_outer < 1:
            raise ConfigError(f"max_outer must be >= 1, got {self.max_outer}")


@dataclass
class McmleResult:
    theta: np.ndarray
    se: np.ndarray
    fisher: np.ndarray  # simulated Var(s(y)) at the final theta
    converged: bool
    iterations: int
    diagnostics: dict = field(default_factory=dict)


def mple(net: UndirectedNetwork, spec: ModelSpec, u_offset=None) -> np.ndarray:
    """Maximum pseudolikelihood estimate: logistic fit of the dyad responses
    on the change statistics with offset u_i + u_j. Used as a starting value,
    so coefficients are clipped to a sane box under separation."""
    n = net.n
    u = np.zeros(n) if u_offset is None else np.asarray(u_offset, dtype=np.float64)
    x = dyad_change_matrix(net, spec)
    ii, jj = dyad_index_arrays(n)
    off = u[ii] + u[jj]
    y = net.adj[ii, jj].astype(np.float64)
    beta = np.zeros(spec.p)
    for _ in range(30):
        eta = np.clip(off + x @ beta, -30, 30)
        mu = expit(eta)
        w = np.maximum(mu * (1 - mu), 1e-10)
        z = x @ beta + (y - mu) / w
        xtw = x.T * w
        try:
            beta_new = np.linalg.solve(xtw @ x + 1e-8 * np.eye(spec.p), xtw @ z)
        except np.linalg.LinAlgError:
            break
        if not np.all(np.isfinite(beta_new)):
            break
        if np.max(np.abs(beta_new - beta)) < 1e-8:
            beta = beta_new
            break
        beta = beta_new
    return np.clip(beta, -_MPLE_CLIP, _MPLE_CLIP)


def _largest_safe_gamma(s_obs, s_mean, s_sd, cov_inv, grid):
    """Largest grid value whose target gamma*s_obs + (1-gamma)*mean stays
    inside the componentwise band and the Mahalanobis ellipsoid."""
    p = len(s_obs)
    for gamma in sorted(grid, reverse=True):
        t = gamma * s_obs + (1 - gamma) * s_mean
        d = t - s_mean
        if np.any(np.abs(d) > _HULL_SD * s_sd + 1e-12):
            continue
        if d @ cov_inv @ d > _HULL_SD**2 * p:
            continue
        return gamma, t, True
    gamma = min(grid)
    return gamma, gamma * s_obs + (1 - gamma) * s_mean, False


def _tilt_newton(S, t_target, tol_scale):
    """Maximize d'target - logmeanexp(S d) over the tilt d, starting at 0.

    Returns (d, weights, info). Each Newton step must increase the objective
    or it is halved; the tilt is trust-bounded to keep importance weights
    meaningful.
    """
    nsim, p = S.shape
    d = np.zeros(p)

    def objective(dv):
        return float(dv @ t_target - (logsumexp(S @ dv) - np.log(nsim)))

    obj = objective(d)
    gtol = 1e-9 * tol_scale
    info = {"newton_steps": 0, "halvings": 0}
    for _ in range(100):
        x = S @ d
        logw = x - logsumexp(x)
        w = np.exp(logw)
        mean_w = w @ S
        grad = t_target - mean_w
        if np.max(np.abs(grad)) < gtol:
            break
        centered = S - mean_w
        cov_w = (centered * w[:, None]).T @ centered
        cov_w += 1e-10 * tol_scale**2 * np.eye(p)
        try:
            step = np.linalg.solve(cov_w, grad)
        except np.linalg.LinAlgError:
            break
        alpha = 1.0
        improved = False
        for _ in range(40):
            cand = d + alpha * step
            cand_obj = objective(cand)
            if cand_obj > obj:
                improved = True
                break
            alpha *= 0.5
            info["halvings"] += 1
        if not improved:
            break
        d, obj = cand, cand_obj
        info["newton_steps"] += 1
        if np.max(np.abs(d)) > _NEWTON_TRUST:
            d = np.clip(d, -_NEWTON_TRUST, _NEWTON_TRUST)
            break
    x = S @ d
    w = np.exp(x - logsumexp(x))
    info["ess"] = float(1.0 / np.sum(w**2))
    return d, w, info


def fisher_from_stats(S: np.ndarray) -> np.ndarray:
    """Population covariance of simulated statistic rows."""
    centered = S - S.mean(axis=0)
    return centered.T @ centered / S.shape[0]


def fit_theta(
    net: UndirectedNetwork,
    spec: ModelSpec,
    u_offset=None,
    theta0=None,
    cfg: McmleConfig | None = None,
) -> McmleResult:
    """Stepping MC-MLE of theta at a fixed node-effect offset.

    Raises DegeneracyError when even the final outer iteration could not use
    the full step (gamma=1): the observed statistic is then unreachable and
    the model is degenerate for this network. The error carries the last
    theta and the stepping diagnostics.
    """
    if cfg is None:
        cfg = McmleConfig()
    n = net.n
    u = np.zeros(n) if u_offset is None else np.asarray(u_offset, dtype=np.float64)
    if u.shape != (n,):
        raise ConfigError(f"u_offset has shape {u.shape}, expected ({n},)")
    theta = (
        mple(net, spec, u)
        if theta0 is None
        else np.asarray(theta0, dtype=np.float64).copy()
    )
    if theta.shape != (spec.p,):
        raise ConfigError(f"theta0 has shape {theta.shape}, expected ({spec.p},)")

    s_obs = statistics(net, spec)
    master = (
        cfg.seed
        if isinstance(cfg.seed, np.random.SeedSequence)
        else np.random.SeedSequence(cfg.seed)
    )
    gamma_trace: list[float] = []
    ess_trace: list[float] = []
    converged = False
    iterations = 0
    gamma = float("nan")
    for outer in range(1, cfg.max_outer + 1):
        iterations = outer
        scfg = SamplerConfig(
            n_samples=cfg.n_sim,
            seed=np.random.SeedSequence(entropy=master.entropy, spawn_key=master.spawn_key + (outer,)),
            burn_in=cfg.burn_in,
            thin=cfg.thin,
        )
        batch = sample(net, spec, theta, u, scfg)
        S = batch.stats
        s_mean = S.mean(axis=0)
        s_sd = np.maximum(S.std(axis=0), 1e-12)
        cov = fisher_from_stats(S) + 1e-10 * np.outer(s_sd, s_sd) + 1e-12 * np.eye(spec.p)
        cov_inv = np.linalg.pinv(cov)
        gamma, t_target, hull_ok = _largest_safe_gamma(
            s_obs, s_mean, s_sd, cov_inv, cfg.gamma_grid
        )
        gamma_trace.append(gamma)

        tol_scale = float(np.max(s_sd))
        d, _, info = _tilt_newton(S, t_target, tol_scale)
        ess_trace.append(info["ess"])
        theta_new = theta + d
        delta = float(np.max(np.abs(d)))
        theta = theta_new
        if hull_ok and gamma == 1.0 and delta < cfg.newton_tol:
            converged = True
            break

    diagnostics = {
        "gamma_trace": gamma_trace,
        "ess_trace": ess_trace,
        "final_gamma": gamma,
        "observed_stats": s_obs,
    }
    if gamma < 1.0:
        raise DegeneracyError(
            f"observed statistic unreachable after {iterations} iterations "
            f"(final step length {gamma}); the model is degenerate for this network",
            theta=theta,
            diagnostics=diagnostics,
        )

    # standard errors from the simulated Fisher information at the final theta
    scfg = SamplerConfig(
        n_samples=cfg.n_sim,
        seed=np.random.SeedSequence(entropy=master.entropy, spawn_key=master.spawn_key + (0,)),
        burn_in=cfg.burn_in,
        thin=cfg.thin,
    )
    batch = sample(net, spec, theta, u, scfg)
    if np.any(batch.stats.std(axis=0) < 1e-9):
        # the fitted model piles all mass on one statistic value: the observed
        # statistic sits on the boundary of the mean-value space
        raise DegeneracyError(
            "simulated statistics have zero variance at the fitted parameter; "
            "the observed statistic lies on the boundary (degenerate MLE)",
            theta=theta,
            diagnostics=diagnostics,
        )
    fisher = fisher_from_stats(batch.stats)
    try:
        fisher_inv = np.linalg.inv(fisher)
    except np.linalg.LinAlgError:
        fisher_inv = np.linalg.pinv(fisher)
        diagnostics["singular_fisher"] = True
    se = np.sqrt(np.maximum(np.diag(fisher_inv), 0.0))
    diagnostics["mean_stats_at_theta"] = batch.stats.mean(axis=0)
    return McmleResult(
        theta=theta,
        se=se,
        fisher=fisher,
        converged=converged,
        iterations=iterations,
        diagnostics=diagnostics,
    )
