import numpy as np
import pytest

from linkpred.embeddings import (embedding_from_csv, embedding_to_csv,
                                 negative_injection, spectral_embedding)
from linkpred.errors import InputError
from linkpred.graph import Graph, NodeIdMap, erdos_renyi
from linkpred.heuristics import adjacency_matrix
from linkpred.rng import stream


def test_negative_injection_counts():
    g = erdos_renyi(10, 0.2, 61)
    non_edges = [(u, v) for u in range(10) for v in range(u + 1, 10)
                 if not g.has_edge(u, v)][:3]
    g2 = negative_injection(g, non_edges)
    assert g2.edge_count == g.edge_count + 3
    assert g.edge_count == len(g.edges())  # original untouched


def test_negative_injection_empty_is_identity():
    g = erdos_renyi(8, 0.3, 62)
    assert negative_injection(g, []) == g


def test_negative_injection_rejects_existing_edge():
    g = Graph.from_edges(3, [(0, 1)])
    with pytest.raises(InputError):
        negative_injection(g, [(0, 1)])


def test_injection_makes_training_links_indistinguishable():
    # after injection every training link, positive or negative, is an edge
    g = erdos_renyi(12, 0.3, 63)
    positives = [tuple(e) for e in g.edges()[:4]]
    negatives = [(u, v) for u in range(12) for v in range(u + 1, 12)
                 if not g.has_edge(u, v)][:4]
    g2 = negative_injection(g, negatives)
    for u, v in positives + negatives:
        assert g2.has_edge(u, v)


def test_spectral_k2_eigvals_plus_minus_one():
    g = Graph.from_edges(2, [(0, 1)])
    u = spectral_embedding(g, 2)
    s = adjacency_matrix(g).toarray()  # normalized adjacency equals A here
    lam = np.diag(u.T @ s @ u)
    assert sorted(np.round(lam, 9).tolist()) == [-1.0, 1.0]
    assert np.allclose(u.T @ u, np.eye(2), atol=1e-9)


def test_spectral_columns_orthonormal():
    g = erdos_renyi(20, 0.3, 64)
    u = spectral_embedding(g, 5)
    assert np.allclose(u.T @ u, np.eye(5), atol=1e-6)


def test_spectral_deterministic():
    g = erdos_renyi(18, 0.3, 65)
    u1 = spectral_embedding(g, 4)
    u2 = spectral_embedding(g, 4)
    assert np.array_equal(u1, u2)


def test_spectral_isolated_nodes_zero_rows():
    g = Graph.from_edges(6, [(0, 1), (1, 2), (0, 2)])  # 3,4,5 isolated
    u = spectral_embedding(g, 2)
    assert np.all(u[3:] == 0.0)
    assert np.allclose(u[:3].T @ u[:3], np.eye(2), atol=1e-8)


def test_spectral_relabeling_permutes_rows():
    g = erdos_renyi(14, 0.4, 66)
    rng = stream(66, "perm")
    perm = rng.permutation(g.n)
    relabeled = Graph.from_edges(g.n, [(perm[u], perm[v]) for u, v in g.edges()])
    u1 = spectral_embedding(g, 3)
    u2 = spectral_embedding(relabeled, 3)
    moved = np.zeros_like(u1)
    moved[perm] = u1
    for j in range(3):
        col_match = np.allclose(moved[:, j], u2[:, j], atol=1e-6) or \
            np.allclose(moved[:, j], -u2[:, j], atol=1e-6)
        assert col_match, j


def test_spectral_dim_validation():
    g = Graph.from_edges(3, [(0, 1)])  # node 2 isolated
    with pytest.raises(InputError):
        spectral_embedding(g, 4)
    with pytest.raises(InputError):
        spectral_embedding(g, 3)  # only two non-isolated nodes


def test_embedding_csv_round_trip():
    g = erdos_renyi(9, 0.4, 67)
    table = spectral_embedding(g, 3)
    idmap = NodeIdMap.identity(9)
    text = embedding_to_csv(table, idmap)
    back = embedding_from_csv(text, idmap)
    assert np.array_equal(table, back)
    assert text.startswith("node_label,v0,v1,v2")


def test_embedding_csv_missing_node_errors():
    idmap = NodeIdMap.identity(3)
    with pytest.raises(InputError):
        embedding_from_csv("node_label,v0\n0,1.5\n", idmap)
