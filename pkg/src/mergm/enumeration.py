"""Brute-force oracle over all 2^(n(n-1)/2) graphs for tiny n.

Provides the exact normalizer, exact probabilities, and the exact MLE by
Newton iteration on the enumerated likelihood. Everything here is meant to
validate the simulation-based estimators, so it deliberately reuses only
the full-statistics path (never change statistics).
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.optimize import linprog
from scipy.special import logsumexp

from .errors import BoundaryMleError, EnumerationLimitError
from .graph import UndirectedNetwork
from .stats import ModelSpec, dyad_index_arrays, statistics

MAX_NODES = 6

_THETA_BOUND = 50.0


def _check_n(n: int) -> None:
    if n > MAX_NODES:
        raise EnumerationLimitError(
            f"exact enumeration limited to n <= {MAX_NODES} "
            f"({2 ** (MAX_NODES * (MAX_NODES - 1) // 2)} graphs); got n={n}"
        )
    if n < 1:
        raise EnumerationLimitError(f"need n >= 1, got {n}")


def network_from_mask(n: int, mask: int) -> UndirectedNetwork:
    """Graph with dyad d present iff bit d of mask is set (dyads i<j row-major)."""
    di, dj = dyad_index_arrays(n)
    net = UndirectedNetwork(n)
    for d in range(di.shape[0]):
        if (mask >> d) & 1:
            net.toggle_edge(int(di[d]), int(dj[d]))
    return net


def graph_mask(net: UndirectedNetwork) -> int:
    """Inverse of network_from_mask."""
    di, dj = dyad_index_arrays(net.n)
    mask = 0
    for d in range(di.shape[0]):
        if net.adj[di[d], dj[d]]:
            mask |= 1 << d
    return mask


@lru_cache(maxsize=16)
def _tables(n: int, spec: ModelSpec) -> tuple[np.ndarray, np.ndarray]:
    """(S, T): statistics and degree vectors for every graph, by mask order."""
    _check_n(n)
    ndyads = n * (n - 1) // 2
    ngraphs = 1 << ndyads
    S = np.empty((ngraphs, spec.p), dtype=np.float64)
    T = np.empty((ngraphs, n), dtype=np.float64)
    for mask in range(ngraphs):
        net = network_from_mask(n, mask)
        S[mask] = statistics(net, spec)
        T[mask] = net.deg
    return S, T


def _as_u(n: int, u) -> np.ndarray:
    if u is None:
        return np.zeros(n, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    if u.shape != (n,):
        raise EnumerationLimitError(f"u has shape {u.shape}, expected ({n},)")
    return u


def exact_log_kappa(n: int, spec: ModelSpec, theta, u=None) -> float:
    """log sum over all graphs of exp(theta.s(y) + u.t(y))."""
    theta = np.asarray(theta, dtype=np.float64)
    u = _as_u(n, u)
    S, T = _tables(n, spec)
    return float(logsumexp(S @ theta + T @ u))


def exact_kappa(n: int, spec: ModelSpec, theta, u=None) -> float:
    """Plain-sum normalizer; overflows to inf only for extreme parameters."""
    return float(np.exp(exact_log_kappa(n, spec, theta, u)))


def exact_probabilities(n: int, spec: ModelSpec, theta, u=None) -> np.ndarray:
    """Probability of every graph, indexed by mask."""
    theta = np.asarray(theta, dtype=np.float64)
    u = _as_u(n, u)
    S, T = _tables(n, spec)
    w = S @ theta + T @ u
    w -= logsumexp(w)
    return np.exp(w)


def exact_loglik(net: UndirectedNetwork, spec: ModelSpec, theta, u=None) -> float:
    theta = np.asarray(theta, dtype=np.float64)
    u = _as_u(net.n, u)
    s = statistics(net, spec)
    t = net.deg.astype(np.float64)
    return float(theta @ s + u @ t - exact_log_kappa(net.n, spec, theta, u))


def exact_moments(
    n: int, spec: ModelSpec, theta, u=None
) -> tuple[np.ndarray, np.ndarray]:
    """(E[s(Y)], Var[s(Y)]) under the enumerated model."""
    theta = np.asarray(theta, dtype=np.float64)
    u = _as_u(n, u)
    S, T = _tables(n, spec)
    logw = S @ theta + T @ u
    logw -= logsumexp(logw)
    w = np.exp(logw)
    mean = w @ S
    centered = S - mean
    var = (centered * w[:, None]).T @ centered
    return mean, var


def exact_degree_moments(
    n: int, spec: ModelSpec, theta, u=None
) -> tuple[np.ndarray, np.ndarray]:
    """(E[t(Y)], Var[t(Y)]) for the degree vector under the enumerated model."""
    theta = np.asarray(theta, dtype=np.float64)
    u = _as_u(n, u)
    S, T = _tables(n, spec)
    logw = S @ theta + T @ u
    logw -= logsumexp(logw)
    w = np.exp(logw)
    mean = w @ T
    centered = T - mean
    var = (centered * w[:, None]).T @ centered
    return mean, var


def _in_relative_interior(points: np.ndarray, x: np.ndarray) -> bool:
    """Is x in the relative interior of the convex hull of the given points?

    Uses the fact that for a finite point set V, ri(conv V) is exactly the
    set of convex combinations with strictly positive weight on every point:
    maximize the minimum weight by LP and check it is positive.
    """
    v = np.unique(points, axis=0)
    m = v.shape[0]
    # variables: (lambda_1..lambda_m, eps); maximize eps
    c = np.zeros(m + 1)
    c[-1] = -1.0
    a_eq = np.zeros((points.shape[1] + 1, m + 1))
    a_eq[:-1, :m] = v.T
    a_eq[-1, :m] = 1.0
    b_eq = np.append(x, 1.0)
    a_ub = np.hstack([-np.eye(m), np.ones((m, 1))])
    b_ub = np.zeros(m)
    res = linprog(
        c,
        A_ub=a_ub,
        b_ub=b_ub,
        A_eq=a_eq,
        b_eq=b_eq,
        bounds=[(0, 1)] * m + [(None, 1)],
        method="highs",
    )
    return res.status == 0 and res.x is not None and res.x[-1] > 1e-9


def exact_mle(
    net: UndirectedNetwork,
    spec: ModelSpec,
    u=None,
    *,
    tol: float = 1e-10,
    max_iter: int = 200,
) -> np.ndarray:
    """Exact MLE of theta by Newton iteration on the enumerated likelihood.

    Raises BoundaryMleError when the observed statistic sits on the boundary
    of the convex hull of achievable statistics (the MLE then diverges).
    """
    n = net.n
    u = _as_u(n, u)
    s_obs = statistics(net, spec)
    S, _ = _tables(n, spec)
    if not _in_relative_interior(S, s_obs):
        raise BoundaryMleError(
            "observed statistic lies on the convex-hull boundary; the MLE "
            "diverges"
        )
    theta = np.zeros(spec.p, dtype=np.float64)
    for _ in range(max_iter):
        mean, var = exact_moments(n, spec, theta, u)
        grad = s_obs - mean
        try:
            step = np.linalg.solve(var, grad)
        except np.linalg.LinAlgError as exc:
            raise BoundaryMleError(
                "singular Fisher information during exact MLE"
            ) from exc
        theta = theta + step
        if np.max(np.abs(theta)) > _THETA_BOUND:
            raise BoundaryMleError(
                f"exact MLE diverged (|theta| > {_THETA_BOUND}); observed "
                "statistic lies on the convex-hull boundary"
            )
        # near a hull boundary the Newton step never shrinks (theta marches
        # off at constant speed), so convergence is judged on the step
        if np.max(np.abs(step)) < tol:
            return theta
    mean, _ = exact_moments(n, spec, theta, u)
    if np.max(np.abs(s_obs - mean)) < 1e-6:
        return theta
    raise BoundaryMleError("exact MLE did not converge")
