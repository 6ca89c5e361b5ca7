"""Metropolis-Hastings edge-toggle sampler for (mixed) exponential random
graph models at fixed structural parameters and node effects.

Proposals are uniform over all n(n-1)/2 dyads; the log acceptance ratio for
adding edge {i,j} is theta . change_stats(i,j) + u_i + u_j, negated for a
deletion. Setting u = 0 recovers the homogeneous model.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .errors import ConfigError
from .graph import UndirectedNetwork
from .stats import ModelSpec, dyad_index_arrays, statistics

_CHUNK = 1 << 20  # proposals per random-number block


@dataclass(frozen=True)
class SamplerConfig:
    """MCMC schedule: burn_in/thin default to 10*n^2 and n^2 if left None."""

    n_samples: int
    seed: int
    burn_in: int | None = None
    thin: int | None = None

    def __post_init__(self):
        if self.n_samples < 1:
            raise ConfigError(f"n_samples must be >= 1, got {self.n_samples}")
        if self.burn_in is not None and self.burn_in < 0:
            raise ConfigError(f"burn_in must be >= 0, got {self.burn_in}")
        if self.thin is not None and self.thin < 1:
            raise ConfigError(f"thin must be >= 1, got {self.thin}")

    def resolve(self, n: int) -> tuple[int, int]:
        burn = 10 * n * n if self.burn_in is None else self.burn_in
        thin = n * n if self.thin is None else self.thin
        return burn, thin


@dataclass
class SampleBatch:
    """Retained draws: statistic rows, degree rows, optional snapshots."""

    stats: np.ndarray  # (N, p)
    degrees: np.ndarray  # (N, n)
    adjacencies: np.ndarray | None  # (N, n, n) uint8 when networks were kept
    acceptance_rate: float
    final_state: UndirectedNetwork

    @property
    def n_samples(self) -> int:
        return self.stats.shape[0]

    @property
    def networks(self) -> list[UndirectedNetwork]:
        if self.adjacencies is None:
            raise ValueError("sample() was called without keep_networks=True")
        return [
            UndirectedNetwork.from_adjacency(self.adjacencies[k])
            for k in range(self.adjacencies.shape[0])
        ]


def _chain_rng(seed, chain: int) -> np.random.Generator:
    if isinstance(seed, np.random.SeedSequence):
        ss = seed.spawn(chain + 1)[chain]
    else:
        ss = np.random.SeedSequence(seed, spawn_key=(chain,))
    return np.random.Generator(np.random.PCG64(ss))


def sample(
    net: UndirectedNetwork,
    spec: ModelSpec,
    theta: np.ndarray,
    u: np.ndarray,
    cfg: SamplerConfig,
    *,
    keep_networks: bool = False,
    chain: int = 0,
) -> SampleBatch:
    """Draw cfg.n_samples networks starting from `net` (not mutated).

    Sample k is retained after burn_in + (k+1)*thin proposals. Identical
    seed and config give a bit-identical sequence.
    """
    theta = np.asarray(theta, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    n = net.n
    if theta.shape != (spec.p,):
        raise ConfigError(f"theta has shape {theta.shape}, expected ({spec.p},)")
    if u.shape != (n,):
        raise ConfigError(f"u has shape {u.shape}, expected ({n},)")

    burn, thin = cfg.resolve(n)
    nsamp = cfg.n_samples
    total = burn + nsamp * thin

    rng = _chain_rng(cfg.seed, chain)
    di, dj = dyad_index_arrays(n)
    ndyads = di.shape[0]

    state = net.copy()
    s = statistics(state, spec)
    codes = spec.codes()
    wtab = spec.weight_table(n)
    scratch = np.empty(spec.p, dtype=np.float64)

    S_out = np.empty((nsamp, spec.p), dtype=np.float64)
    T_out = np.empty((nsamp, n), dtype=np.int64)
    if keep_networks:
        A_out = np.empty((nsamp, n, n), dtype=np.uint8)
    else:
        A_out = np.empty((0, n, n), dtype=np.uint8)

    accepted = 0
    done = 0
    while done < total:
        m = min(_CHUNK, total - done)
        e = rng.integers(0, ndyads, size=m)
        unif = rng.random(m)
        accepted += _kernels.mh_run(
            state.adj,
            state.deg,
            s,
            theta,
            u,
            codes,
            wtab,
            di[e],
            dj[e],
            unif,
            done,
            burn,
            thin,
            S_out,
            T_out,
            A_out,
            keep_networks,
            scratch,
        )
        done += m

    return SampleBatch(
        stats=S_out,
        degrees=T_out,
        adjacencies=A_out if keep_networks else None,
        acceptance_rate=accepted / total if total else 0.0,
        final_state=state,
    )


def sample_chains(
    net: UndirectedNetwork,
    spec: ModelSpec,
    theta: np.ndarray,
    u: np.ndarray,
    cfg: SamplerConfig,
    n_chains: int,
    *,
    keep_networks: bool = False,
    parallel: bool = True,
) -> SampleBatch:
    """Run independent chains (seeds derived from (seed, chain index)) and
    concatenate their draws in chain order."""
    if n_chains < 1:
        raise ConfigError(f"n_chains must be >= 1, got {n_chains}")
    per = cfg.n_samples // n_chains
    counts = [per + (1 if c < cfg.n_samples % n_chains else 0) for c in range(n_chains)]

    def run(c: int) -> SampleBatch:
        return sample(
            net, spec, theta, u, replace(cfg, n_samples=counts[c]),
            keep_networks=keep_networks, chain=c,
        )

    if parallel and n_chains > 1:
        with ThreadPoolExecutor(max_workers=n_chains) as pool:
            batches = list(pool.map(run, range(n_chains)))
    else:
        batches = [run(c) for c in range(n_chains)]

    adjacencies = None
    if keep_networks:
        adjacencies = np.concatenate([b.adjacencies for b in batches])
    total_weight = sum(b.n_samples for b in batches)
    return SampleBatch(
        stats=np.concatenate([b.stats for b in batches]),
        degrees=np.concatenate([b.degrees for b in batches]),
        adjacencies=adjacencies,
        acceptance_rate=sum(b.acceptance_rate * b.n_samples for b in batches)
        / total_weight,
        final_state=batches[-1].final_state,
    )
