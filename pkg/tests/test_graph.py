import numpy as np
import pytest

from mergm import InvalidNodeError, UndirectedNetwork, complete_network


def test_toggle_from_empty():
    net = UndirectedNetwork(3)
    net.toggle_edge(0, 1)
    assert net.has_edge(0, 1) and net.has_edge(1, 0)
    assert net.degree_vector().tolist() == [1, 1, 0]
    assert net.edge_count == 1


def test_double_toggle_is_identity():
    net = UndirectedNetwork.from_edges(5, [(0, 1), (2, 3)])
    before = net.copy()
    net.toggle_edge(0, 4)
    net.toggle_edge(0, 4)
    assert net == before


def test_toggle_triangle_to_path():
    net = UndirectedNetwork.from_edges(3, [(0, 1), (1, 2), (2, 0)])
    net.toggle_edge(1, 2)
    assert net.degree_vector().tolist() == [2, 1, 1]
    assert not net.has_edge(1, 2)


def test_degree_vector_examples():
    assert UndirectedNetwork(4).degree_vector().tolist() == [0, 0, 0, 0]
    tri = UndirectedNetwork.from_edges(4, [(0, 1), (1, 2), (2, 0)])
    assert tri.degree_vector().tolist() == [2, 2, 2, 0]
    assert complete_network(5).degree_vector().tolist() == [4] * 5


@pytest.mark.parametrize("i,j", [(0, 0), (2, 2), (-1, 0), (0, 3), (5, 1)])
def test_invalid_dyads_rejected(i, j):
    net = UndirectedNetwork(3)
    with pytest.raises(InvalidNodeError):
        net.toggle_edge(i, j)


def test_degree_cache_matches_recount_after_random_toggles():
    rng = np.random.default_rng(7)
    net = UndirectedNetwork(9)
    for _ in range(500):
        i, j = rng.choice(9, size=2, replace=False)
        net.toggle_edge(int(i), int(j))
        assert np.array_equal(net.deg, net.adj.sum(axis=1))
        assert net.edge_count * 2 == net.deg.sum()
        assert np.array_equal(net.adj, net.adj.T)
        assert not np.any(np.diag(net.adj))


def test_copy_is_independent():
    net = UndirectedNetwork.from_edges(4, [(0, 1)])
    dup = net.copy()
    dup.toggle_edge(2, 3)
    assert not net.has_edge(2, 3)


def test_from_adjacency_validates():
    with pytest.raises(InvalidNodeError):
        UndirectedNetwork.from_adjacency(np.array([[0, 1], [0, 0]]))
    with pytest.raises(InvalidNodeError):
        UndirectedNetwork.from_adjacency(np.eye(3))
    net = UndirectedNetwork.from_adjacency(np.array([[0, 1], [1, 0]]))
    assert net.edge_count == 1


def test_edges_iterates_sorted_pairs():
    net = UndirectedNetwork.from_edges(4, [(2, 3), (0, 2)])
    assert list(net.edges()) == [(0, 2), (2, 3)]
