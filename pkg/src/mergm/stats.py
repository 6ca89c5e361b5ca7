"""Sufficient statistics and change statistics for undirected network models.

Supported terms:

* ``edges``      -- number of edges.
* ``twostars``   -- sum over nodes of C(degree, 2).
* ``gwesp``      -- geometrically weighted edgewise shared partners:
                    exp(tau) * sum_k [1 - (1 - exp(-tau))^k] * EP_k, with EP_k
                    the number of edges whose endpoints share exactly k
                    common neighbors.
* ``gwnsp``      -- same weighting over non-edge dyads.
* ``gwdegree``   -- same weighting over the degree distribution D_k.

Decay parameters are fixed (not estimated). Defaults are tau=0.5 for every
weighted term; since fitted coefficients depend on the decays, every result
object and CLI output reports the resolved decay values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ModelSpecError
from .graph import UndirectedNetwork

TERM_CODES = {
    "edges": _kernels.CODE_EDGES,
    "twostars": _kernels.CODE_TWOSTARS,
    "gwesp": _kernels.CODE_GWESP,
    "gwnsp": _kernels.CODE_GWNSP,
    "gwdegree": _kernels.CODE_GWDEGREE,
}
WEIGHTED_TERMS = ("gwesp", "gwnsp", "gwdegree")
DEFAULT_DECAY = 0.5


@dataclass(frozen=True)
class StatTerm:
    """A single model term; `decay` applies only to the gw* terms."""

    kind: str
    decay: float | None = None

    def __post_init__(self):
        if self.kind not in TERM_CODES:
            raise ModelSpecError(
                f"unknown term {self.kind!r}; valid terms: {', '.join(TERM_CODES)}"
            )
        if self.kind in WEIGHTED_TERMS:
            decay = DEFAULT_DECAY if self.decay is None else float(self.decay)
            if decay < 0:
                raise ModelSpecError(f"decay must be nonnegative, got {decay}")
            object.__setattr__(self, "decay", decay)
        else:
            object.__setattr__(self, "decay", None)

    @property
    def label(self) -> str:
        if self.decay is None:
            return self.kind
        return f"{self.kind}({self.decay:g})"


@dataclass(frozen=True)
class ModelSpec:
    """Ordered list of statistic terms defining s(y)."""

    terms: tuple[StatTerm, ...]

    def __post_init__(self):
        terms = tuple(self.terms)
        object.__setattr__(self, "terms", terms)
        if len(terms) < 1:
            raise ModelSpecError("model spec needs at least one term")
        kinds = [t.kind for t in terms]
        if len(set(kinds)) != len(kinds):
            raise ModelSpecError(f"duplicate terms in spec: {kinds}")

    @classmethod
    def from_string(cls, text: str) -> "ModelSpec":
        """Parse a comma-separated term string, e.g. ``edges,gwesp:0.5``."""
        terms = []
        for piece in text.split(","):
            piece = piece.strip()
            if not piece:
                continue
            name, _, decay = piece.partition(":")
            name = name.strip().lower()
            if decay:
                try:
                    terms.append(StatTerm(name, float(decay)))
                except ValueError as exc:
                    if isinstance(exc, ModelSpecError):
                        raise
                    raise ModelSpecError(f"bad decay value in term {piece!r}") from exc
            else:
                terms.append(StatTerm(name))
        return cls(tuple(terms))

    @property
    def p(self) -> int:
        return len(self.terms)

    @property
    def labels(self) -> list[str]:
        return [t.label for t in self.terms]

    def codes(self) -> np.ndarray:
        return np.array([TERM_CODES[t.kind] for t in self.terms], dtype=np.int64)

    def weight_table(self, n: int) -> np.ndarray:
        """Geometric weight rows, one per term, indexed by class k=0..n+1."""
        wtab = np.zeros((self.p, n + 2), dtype=np.float64)
        ks = np.arange(n + 2, dtype=np.float64)
        for r, term in enumerate(self.terms):
            if term.decay is not None:
                tau = term.decay
                wtab[r] = np.exp(tau) * (1.0 - (1.0 - np.exp(-tau)) ** ks)
                wtab[r, 0] = 0.0
        return wtab

    def to_config(self) -> list[dict]:
        return [{"kind": t.kind, "decay": t.decay} for t in self.terms]


def statistics(net: UndirectedNetwork, spec: ModelSpec) -> np.ndarray:
    """Full statistic vector s(y), computed from class histograms.

    Independent of the incremental change-statistic path: shared-partner
    classes come from the adjacency-product matrix, degrees from the cache.
    """
    adj = net.adj
    n = net.n
    deg = net.deg
    out = np.empty(spec.p, dtype=np.float64)
    common = None
    wtab = spec.weight_table(n)
    iu = np.triu_indices(n, k=1)
    for r, term in enumerate(spec.terms):
        if term.kind == "edges":
            out[r] = deg.sum() / 2.0
        elif term.kind == "twostars":
            out[r] = float(np.sum(deg * (deg - 1) // 2))
        elif term.kind == "gwdegree":
            counts = np.bincount(deg, minlength=n + 2)
            out[r] = float(wtab[r, : counts.shape[0]] @ counts)
        else:
            if common is None:
                a = adj.astype(np.int64)
                common = a @ a
            mask = adj[iu] != 0
            if term.kind == "gwesp":
                classes = common[iu][mask]
            else:
                classes = common[iu][~mask]
            counts = np.bincount(classes, minlength=n + 2)
            out[r] = float(wtab[r, : counts.shape[0]] @ counts)
    return out


def change_statistics(
    net: UndirectedNetwork, spec: ModelSpec, i: int, j: int
) -> np.ndarray:
    """Change statistics s(y_ij=1) - s(y_ij=0) for dyad {i,j}.

    Defined independently of the current state of the edge; the network is
    restored before returning.
    """
    net._check_dyad(i, j)
    out = np.empty(spec.p, dtype=np.float64)
    present = bool(net.adj[i, j])
    if present:
        net.toggle_edge(i, j)
    _kernels.change_stats_absent(
        net.adj, net.deg, i, j, spec.codes(), spec.weight_table(net.n), out
    )
    if present:
        net.toggle_edge(i, j)
    return out


def dyad_change_matrix(net: UndirectedNetwork, spec: ModelSpec) -> np.ndarray:
    """Change statistics for all n(n-1)/2 dyads, ordered i<j row-major."""
    n = net.n
    out = np.empty((n * (n - 1) // 2, spec.p), dtype=np.float64)
    _kernels.all_dyad_change_stats(
        net.adj, net.deg, spec.codes(), spec.weight_table(n), out
    )
    return out


def dyad_index_arrays(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Endpoint lookup (i_vec, j_vec) for dyads ordered i<j row-major."""
    iu = np.triu_indices(n, k=1)
    return iu[0].astype(np.int64), iu[1].astype(np.int64)
