"""Goodness-of-fit diagnostics: compare the observed network against
networks simulated from a fitted model on three views -- the degree
distribution, the edgewise-shared-partner distribution, and the minimum
geodesic distance distribution (unreachable pairs binned separately).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .graph import UndirectedNetwork
from .sampler import SamplerConfig, sample
from .stats import ModelSpec

_QUANTILE_KEYS = ("min", "q1", "median", "q3", "max")
_QUANTILE_LEVELS = (0.0, 0.25, 0.5, 0.75, 1.0)


@dataclass
class GofDiagnostic:
    name: str
    bins: list
    observed: np.ndarray
    simulated: np.ndarray  # (N, nbins)
    quantiles: dict[str, np.ndarray]

    def to_dict(self) -> dict:
        return {
            "diagnostic": self.name,
            "bins": list(self.bins),
            "observed": self.observed.tolist(),
            "quantiles": {k: v.tolist() for k, v in self.quantiles.items()},
        }


@dataclass
class GofReport:
    diagnostics: list[GofDiagnostic]
    n_sim: int

    def to_dict(self) -> dict:
        return {
            "n_sim": self.n_sim,
            "diagnostics": [d.to_dict() for d in self.diagnostics],
        }

    def __getitem__(self, name: str) -> GofDiagnostic:
        for d in self.diagnostics:
            if d.name == name:
                return d
        raise KeyError(name)


def degree_histogram(adj: np.ndarray) -> np.ndarray:
    """Node counts by degree, bins 0..n-1."""
    n = adj.shape[0]
    deg = adj.sum(axis=1).astype(np.int64)
    return np.bincount(deg, minlength=n)[:n]


def esp_histogram(adj: np.ndarray) -> np.ndarray:
    """Edge counts by number of shared partners, bins 0..n-2."""
    n = adj.shape[0]
    a = adj.astype(np.int64)
    common = a @ a
    iu = np.triu_indices(n, k=1)
    on_edges = common[iu][adj[iu] != 0]
    return np.bincount(on_edges, minlength=n - 1)[: n - 1]


def geodesic_histogram(adj: np.ndarray) -> np.ndarray:
    """Unordered-pair counts by shortest-path length: bins 1..n-1 followed by
    one bin for unreachable pairs (length n in total)."""
    n = adj.shape[0]
    dist = shortest_path(csr_matrix(adj), method="D", directed=False, unweighted=True)
    iu = np.triu_indices(n, k=1)
    d = dist[iu]
    reachable = np.isfinite(d)
    counts = np.bincount(d[reachable].astype(np.int64), minlength=n)[1:n]
    return np.append(counts, np.count_nonzero(~reachable))


def _geodesic_bins(n: int) -> list:
    return list(range(1, n)) + ["unreachable"]


def gof_run(
    net: UndirectedNetwork,
    spec: ModelSpec,
    theta,
    u,
    cfg: SamplerConfig,
) -> GofReport:
    """Simulate cfg.n_samples networks at (theta, u) and set the observed
    distributions against the simulated quantile envelopes."""
    n = net.n
    batch = sample(net, spec, theta, u, cfg, keep_networks=True)
    nsim = batch.n_samples

    specs = [
        ("degree", list(range(n)), degree_histogram, n),
        ("esp", list(range(n - 1)), esp_histogram, None),
        ("geodesic", _geodesic_bins(n), geodesic_histogram, None),
    ]
    diagnostics = []
    for name, bins, fn, _ in specs:
        observed = fn(net.adj)
        sim = np.empty((nsim, len(bins)), dtype=np.int64)
        for k in range(nsim):
            adj = batch.adjacencies[k]
            sim[k] = fn(adj)
            if name == "degree":
                assert sim[k].sum() == n
            elif name == "esp":
                assert sim[k].sum() == adj.sum() // 2
            else:
                assert sim[k].sum() == n * (n - 1) // 2
        q = np.quantile(sim, _QUANTILE_LEVELS, axis=0)
        quantiles = {k: q[i] for i, k in enumerate(_QUANTILE_KEYS)}
        diagnostics.append(
            GofDiagnostic(
                name=name,
                bins=bins,
                observed=observed,
                simulated=sim,
                quantiles=quantiles,
            )
        )
    return GofReport(diagnostics=diagnostics, n_sim=nsim)
