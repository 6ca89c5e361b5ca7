"""Undirected binary network with O(1) edge queries and degree bookkeeping.

The adjacency matrix is kept dense (uint8) because the Metropolis-Hastings
sampler queries and toggles single edges millions of times; for the target
scale (n up to a few thousand) a dense symmetric matrix is both the fastest
and the simplest representation.
"""

from __future__ import annotations

from typing import Iterable, Iterator

import numpy as np

from .errors import InvalidNodeError


class UndirectedNetwork:
    """Symmetric binary adjacency over n labeled nodes, no self-loops.

    Nodes are 0-indexed. Degrees are cached and updated on every toggle.
    """

    __slots__ = ("n", "adj", "deg")

    def __init__(self, n: int):
        if n < 1:
            raise InvalidNodeError(f"node count must be positive, got {n}")
        self.n = int(n)
        self.adj = np.zeros((n, n), dtype=np.uint8)
        self.deg = np.zeros(n, dtype=np.int64)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "UndirectedNetwork":
        net = cls(n)
        for i, j in edges:
            if not net.has_edge(i, j):
                net.toggle_edge(i, j)
        return net

    @classmethod
    def from_adjacency(cls, matrix: np.ndarray) -> "UndirectedNetwork":
        a = np.asarray(matrix)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise InvalidNodeError("adjacency must be a square matrix")
        if not np.array_equal(a, a.T):
            raise InvalidNodeError("adjacency must be symmetric")
        if np.any(np.diag(a)):
            raise InvalidNodeError("self-loops are not allowed")
        net = cls(a.shape[0])
        net.adj = (a != 0).astype(np.uint8)
        net.deg = net.adj.sum(axis=1, dtype=np.int64)
        return net

    def _check_dyad(self, i: int, j: int) -> None:
        if i == j:
            raise InvalidNodeError(f"self-loop addressed: ({i},{j})")
        if not (0 <= i < self.n and 0 <= j < self.n):
            raise InvalidNodeError(f"node out of range: ({i},{j}) with n={self.n}")

    def has_edge(self, i: int, j: int) -> bool:
        self._check_dyad(i, j)
        return bool(self.adj[i, j])

    def toggle_edge(self, i: int, j: int) -> "UndirectedNetwork":
        """Flip edge {i,j} in place; returns self for chaining."""
        self._check_dyad(i, j)
        if self.adj[i, j]:
            self.adj[i, j] = 0
            self.adj[j, i] = 0
            self.deg[i] -= 1
            self.deg[j] -= 1
        else:
            self.adj[i, j] = 1
            self.adj[j, i] = 1
            self.deg[i] += 1
            self.deg[j] += 1
        return self

    def degree_vector(self) -> np.ndarray:
        return self.deg.copy()

    @property
    def edge_count(self) -> int:
        return int(self.deg.sum()) // 2

    @property
    def density(self) -> float:
        d = self.n * (self.n - 1) // 2
        return self.edge_count / d if d else 0.0

    def edges(self) -> Iterator[tuple[int, int]]:
        """Yield edges (i, j) with i < j in lexicographic order."""
        ii, jj = np.nonzero(np.triu(self.adj, k=1))
        for i, j in zip(ii.tolist(), jj.tolist()):
            yield i, j

    def copy(self) -> "UndirectedNetwork":
        net = UndirectedNetwork.__new__(UndirectedNetwork)
        net.n = self.n
        net.adj = self.adj.copy()
        net.deg = self.deg.copy()
        return net

    def __eq__(self, other) -> bool:
        if not isinstance(other, UndirectedNetwork):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.adj, other.adj)

    def __repr__(self) -> str:
        return f"UndirectedNetwork(n={self.n}, edges={self.edge_count})"


def empty_network(n: int) -> UndirectedNetwork:
    return UndirectedNetwork(n)


def complete_network(n: int) -> UndirectedNetwork:
    net = UndirectedNetwork(n)
    net.adj = np.ones((n, n), dtype=np.uint8)
    np.fill_diagonal(net.adj, 0)
    net.deg = np.full(n, n - 1, dtype=np.int64)
    return net
