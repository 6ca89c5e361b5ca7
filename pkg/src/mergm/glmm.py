"""Penalized quasi-likelihood estimation of nodal random effects.

The dyad-wise logistic model logit P(y_ij = 1) = offset_ij [+ b0] + u_i + u_j
is fit with a normal penalty u ~ N(0, sigma2 I). The offset carries the
structural part theta . change_stats; with no offset an intercept is
estimated instead (the initialization step of the iterative fit).

The variance component is updated with the EM-style fixed point
    sigma2 <- (u.u + sigma2 * tr[(sigma2 * Z'WZ + I)^-1]) / n,
whose trace term is the total posterior variance of u in the working
linear mixed model.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.special import expit

from .errors import ConfigError
from .graph import UndirectedNetwork
from .stats import ModelSpec, dyad_change_matrix, dyad_index_arrays

SIGMA2_FLOOR = 1e-8
SIGMA2_CAP = 1e3

_ETA_CLIP = 30.0
_WEIGHT_FLOOR = 1e-10


@dataclass
class NodeEffects:
    """Node random effects (log-odds units) and their variance component."""

    u: np.ndarray
    sigma2: float

    @classmethod
    def zeros(cls, n: int, sigma2: float = 0.5) -> "NodeEffects":
        return cls(u=np.zeros(n), sigma2=sigma2)


@dataclass
class DyadDesign:
    """One row per unordered dyad {i,j}: response, offset, incidence."""

    n: int
    y: np.ndarray  # (D,) float in {0,1}
    offset: np.ndarray  # (D,)
    idx_i: np.ndarray  # (D,) int64
    idx_j: np.ndarray  # (D,) int64

    def __post_init__(self):
        d = self.n * (self.n - 1) // 2
        if not (len(self.y) == len(self.offset) == len(self.idx_i) == len(self.idx_j) == d):
            raise ConfigError(f"dyad design needs exactly {d} rows for n={self.n}")


@dataclass
class PqlResult:
    effects: NodeEffects
    intercept: float | None
    converged: bool
    iterations: int
    at_floor: bool
    warnings: list[str] = field(default_factory=list)


def build_dyad_design(
    net: UndirectedNetwork, spec: ModelSpec | None = None, theta=None
) -> DyadDesign:
    """Dyad-level responses with offset theta . change_stats on the observed
    network; with theta=None the offsets are zero (intercept stage)."""
    n = net.n
    idx_i, idx_j = dyad_index_arrays(n)
    y = net.adj[idx_i, idx_j].astype(np.float64)
    if theta is None:
        offset = np.zeros(len(y))
    else:
        theta = np.asarray(theta, dtype=np.float64)
        if spec is None:
            raise ConfigError("spec is required when theta is given")
        if theta.shape != (spec.p,):
            raise ConfigError(f"theta has shape {theta.shape}, expected ({spec.p},)")
        offset = dyad_change_matrix(net, spec) @ theta
    return DyadDesign(n=n, y=y, offset=offset, idx_i=idx_i, idx_j=idx_j)


def _incidence_normal_matrix(design: DyadDesign, w: np.ndarray) -> np.ndarray:
    """Z'WZ for the 2-hot dyad-to-node incidence Z: off-diagonal (i,j) holds
    w_ij, diagonal i holds sum_j w_ij."""
    n = design.n
    a = np.zeros((n, n))
    a[design.idx_i, design.idx_j] = w
    a += a.T
    a[np.diag_indices(n)] = a.sum(axis=1)
    return a


def _scatter_to_nodes(design: DyadDesign, values: np.ndarray) -> np.ndarray:
    """Z' values: accumulate dyad values onto both endpoint nodes."""
    out = np.bincount(design.idx_i, weights=values, minlength=design.n)
    out += np.bincount(design.idx_j, weights=values, minlength=design.n)
    return out


def fit_pql(
    design: DyadDesign,
    *,
    with_intercept: bool = False,
    init: NodeEffects | None = None,
    max_iter: int = 200,
    tol: float = 1e-6,
) -> PqlResult:
    """Iterate the penalized quasi-likelihood fixed point to convergence.

    Non-convergence after max_iter is reported as a warning flag, not an
    error; sigma2 is kept in [SIGMA2_FLOOR, SIGMA2_CAP].
    """
    n = design.n
    if init is None:
        init = NodeEffects.zeros(n)
    u = init.u.astype(np.float64).copy()
    if u.shape != (n,):
        raise ConfigError(f"init.u has shape {u.shape}, expected ({n},)")
    sigma2 = float(np.clip(init.sigma2, SIGMA2_FLOOR, SIGMA2_CAP))
    beta0 = 0.0

    if np.all(design.y == design.y[0]):
        # constant responses: the variance component is unidentified (the
        # weights vanish and every sigma2 is an EM fixed point), so pin the
        # degenerate solution instead of iterating
        beta0 = -_ETA_CLIP if design.y[0] == 0 else _ETA_CLIP
        return PqlResult(
            effects=NodeEffects(u=np.zeros(n), sigma2=SIGMA2_FLOOR),
            intercept=beta0 if with_intercept else None,
            converged=True,
            iterations=0,
            at_floor=True,
            warnings=[
                "constant responses: variance component pinned at floor "
                "(effectively homogeneous)"
            ],
        )

    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        eta = design.offset + u[design.idx_i] + u[design.idx_j]
        if with_intercept:
            eta = eta + beta0
        mu = expit(np.clip(eta, -_ETA_CLIP, _ETA_CLIP))
        w = np.maximum(mu * (1.0 - mu), _WEIGHT_FLOOR)
        # working response for the intercept + random-effect part
        r = eta - design.offset + (design.y - mu) / w

        a = _incidence_normal_matrix(design, w)
        zt_w_r = _scatter_to_nodes(design, w * r)
        if with_intercept:
            sw = np.diag(a).copy()  # Z'W1 (each node sits in deg-many dyads)
            m = np.empty((n + 1, n + 1))
            m[0, 0] = w.sum()
            m[0, 1:] = sw
            m[1:, 0] = sw
            m[1:, 1:] = a + np.eye(n) / sigma2
            rhs = np.concatenate([[np.sum(w * r)], zt_w_r])
            sol = scipy.linalg.cho_solve(scipy.linalg.cho_factor(m, lower=True), rhs)
            beta0_new, u_new = float(sol[0]), sol[1:]
        else:
            m = a + np.eye(n) / sigma2
            u_new = scipy.linalg.cho_solve(
                scipy.linalg.cho_factor(m, lower=True), zt_w_r
            )
            beta0_new = 0.0

        # EM-style variance update; trace term is the posterior variance sum
        lam = scipy.linalg.eigvalsh(a)
        trace = float(np.sum(sigma2 / (sigma2 * lam + 1.0)))
        sigma2_new = float(np.clip((u_new @ u_new + trace) / n, SIGMA2_FLOOR, SIGMA2_CAP))

        du = float(np.max(np.abs(u_new - u)))
        dsig = abs(sigma2_new - sigma2) / sigma2
        dbeta = abs(beta0_new - beta0)
        u, sigma2, beta0 = u_new, sigma2_new, beta0_new
        if du < tol and dsig < tol and (not with_intercept or dbeta < tol):
            converged = True
            break

    warnings = []
    if not converged:
        warnings.append(f"PQL did not converge within {max_iter} iterations")
    at_floor = sigma2 <= SIGMA2_FLOOR * (1 + 1e-9)
    if at_floor:
        warnings.append("variance component at floor: effectively homogeneous")
    return PqlResult(
        effects=NodeEffects(u=u, sigma2=sigma2),
        intercept=beta0 if with_intercept else None,
        converged=converged,
        iterations=iterations,
        at_floor=at_floor,
        warnings=warnings,
    )
