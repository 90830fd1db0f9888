"""Shared fixtures and brute-force oracles."""

import numpy as np
import pytest

from anglepath.anglegraph import SimplexGraph


def make_random_graph(rng, max_nodes=12, max_edges=30, w_lo=1e-8,
                      w_hi=np.pi / 2):
    """Random undirected weighted graph as a SimplexGraph."""
    n = int(rng.integers(2, max_nodes + 1))
    n_possible = n * (n - 1) // 2
    n_edges = int(rng.integers(1, min(max_edges, n_possible) + 1))
    all_pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    chosen = rng.choice(len(all_pairs), size=n_edges, replace=False)
    ei = np.array([all_pairs[c][0] for c in chosen], dtype=int)
    ej = np.array([all_pairs[c][1] for c in chosen], dtype=int)
    w = rng.uniform(w_lo, w_hi, size=n_edges)
    return SimplexGraph(n_nodes=n, edge_i=ei, edge_j=ej, weight=w,
                        weight_mode="one-sided")


def floyd_minimax(graph):
    """Exact all-pairs minimax path distances, O(n^3)."""
    n = graph.n_nodes
    dist = np.full((n, n), np.inf)
    np.fill_diagonal(dist, 0.0)
    for i, j, w in zip(graph.edge_i, graph.edge_j, graph.weight):
        if w < dist[i, j]:
            dist[i, j] = dist[j, i] = w
    for k in range(n):
        np.minimum(dist, np.maximum(dist[:, k:k + 1], dist[k:k + 1, :]),
                   out=dist)
    return dist


def brute_knn(dist, kappa):
    """Per-node minimax distance to the kappa-th nearest other node."""
    n = dist.shape[0]
    out = np.full(n, np.inf)
    for i in range(n):
        others = np.sort(np.delete(dist[i], i))
        if kappa <= others.size:
            out[i] = others[kappa - 1]
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(0)
