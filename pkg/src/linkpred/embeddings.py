"""Latent node features and the negative-injection trick.

Embeddings for training a link classifier must not encode which training
pairs are edges: before factorizing, the sampled negative training pairs are
temporarily added to the graph, so positive and negative training links look
identical from the embedding's point of view.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .errors import InputError, NumericalError
from .graph import Graph, NodeIdMap, add_edges
from .heuristics import adjacency_matrix

EMBED_MAX_ITER = 5000
EMBED_TOL = 1e-8


def negative_injection(g: Graph, negatives) -> Graph:
    """New graph with the sampled non-edges added; original is unchanged."""
    return add_edges(g, negatives)


def spectral_embedding(g: Graph, dim: int) -> np.ndarray:
    """Rows are the top-dim eigenvectors (largest eigenvalue first) of the
    degree-normalized adjacency D^{-1/2} A D^{-1/2}.

    Computed by orthogonal iteration on the operator shifted by +I (all its
    eigenvalues are then nonnegative, so the dominant subspace is the
    largest-eigenvalue one), followed by a Rayleigh-Ritz rotation. The
    iterated block carries guard columns beyond dim, so convergence of the
    wanted vectors is governed by the eigengap past the buffer rather than
    the one at the dim boundary. Isolated nodes get zero rows. Sign
    convention: first entry of each eigenvector with magnitude above 1e-12
    is positive. Deterministic for a fixed graph.
    """
    if dim < 1:
        raise InputError("embedding dimension must be >= 1")
    if dim > g.n:
        raise InputError("embedding dimension cannot exceed the node count")
    deg = g.degrees().astype(np.float64)
    live = np.flatnonzero(deg > 0)
    if dim > live.size:
        raise InputError(
            f"embedding dimension {dim} exceeds the {live.size} non-isolated nodes")
    a = adjacency_matrix(g)[live][:, live]
    d_inv_sqrt = 1.0 / np.sqrt(deg[live])
    s = sp.diags(d_inv_sqrt) @ a @ sp.diags(d_inv_sqrt)
    s = sp.csr_matrix(s)
    k = live.size
    block = min(k, dim + max(8, dim // 2))

    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(
        entropy=0x5eed, spawn_key=(g.n, dim))))
    u = np.linalg.qr(rng.standard_normal((k, block)))[0]
    residual = np.inf
    for _ in range(EMBED_MAX_ITER):
        u = np.linalg.qr(s @ u + u)[0]  # orthogonal iteration on S + I
        t = u.T @ (s @ u)
        t = (t + t.T) / 2.0
        theta, v = np.linalg.eigh(t)
        order = np.argsort(theta)[::-1][:dim]
        ritz = u @ v[:, order]
        residual = float(np.abs(s @ ritz - ritz * theta[order]).max())
        if residual < EMBED_TOL:
            for j in range(dim):
                col = ritz[:, j]
                nz = np.flatnonzero(np.abs(col) > 1e-12)
                if nz.size and col[nz[0]] < 0:
                    ritz[:, j] = -col
            out = np.zeros((g.n, dim))
            out[live] = ritz
            return out
    raise NumericalError("spectral embedding did not converge", residual=residual)


# ---------------------------------------------------------------------------
# CSV IO: header "node_label,v0,v1,...", one row per node. %.17g round-trips
# doubles exactly, so external tables can be swapped in freely.

def embedding_to_csv(table: np.ndarray, idmap: NodeIdMap | None = None) -> str:
    table = np.asarray(table, dtype=np.float64)
    dim = table.shape[1]
    lines = ["node_label," + ",".join(f"v{j}" for j in range(dim))]
    for i in range(table.shape[0]):
        label = idmap.label_of(i) if idmap is not None else str(i)
        lines.append(label + "," + ",".join(f"{v:.17g}" for v in table[i]))
    return "\n".join(lines) + "\n"


def embedding_from_csv(text: str, idmap: NodeIdMap) -> np.ndarray:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines or not lines[0].startswith("node_label"):
        raise InputError("embedding CSV must start with a node_label header")
    dim = len(lines[0].split(",")) - 1
    table = np.full((len(idmap), dim), np.nan)
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != dim + 1:
            raise InputError("embedding CSV row width mismatch")
        table[idmap.id_of(parts[0])] = [float(p) for p in parts[1:]]
    if np.isnan(table).any():
        raise InputError("embedding CSV does not cover every node")
    return table
