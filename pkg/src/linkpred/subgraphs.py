"""Local neighborhood extraction around a node pair and structural node labels.

The extracted region around (x, y) is the subgraph induced by every node
within h hops of either endpoint. Each node then receives an integer label
derived from its pair of distances to the two endpoints, where the distance
to one endpoint is measured with the other endpoint deleted (so the measured
distance cannot shortcut through it). Endpoints get label 1, nodes cut off by
the deletion get label 0, and everything else gets the closed-form hash below.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .graph import Graph, UNREACHABLE, bfs_distances, induce_ordered, remove_edges


@dataclass
class EnclosingSubgraph:
    local_graph: Graph
    node_map: np.ndarray          # local id -> id in the source graph
    target: tuple[int, int]       # local ids of (x, y); always (0, 1)
    hop: int
    labels: np.ndarray            # per-local-node structural label
    had_target_edge: bool         # True iff (x, y) was an edge and was removed
    global_degrees: np.ndarray    # source-graph degree of each local node

    @property
    def n(self) -> int:
        return self.local_graph.n


def drnl_hash(dx: int, dy: int) -> int:
    """Closed-form label for a finite distance pair (dx, dy), both >= 1.

    Symmetric in its arguments; orders labels by dx+dy first and dx*dy second.
    """
    dx, dy = int(dx), int(dy)
    d = dx + dy
    half, rem = divmod(d, 2)
    return 1 + min(dx, dy) + half * (half + rem - 1)


def _label_array(local: Graph, tx: int, ty: int) -> np.ndarray:
    """Labels for every node of a local graph with target pair (tx, ty).

    Distances to tx are measured with ty deleted and vice versa, so the result
    does not depend on whether the (tx, ty) edge itself is present.
    """
    dist_x = bfs_distances(local, tx, excluded=ty).dist
    dist_y = bfs_distances(local, ty, excluded=tx).dist
    labels = np.zeros(local.n, dtype=np.int64)
    for i in range(local.n):
        if i == tx or i == ty:
            labels[i] = 1
            continue
        dx, dy = dist_x[i], dist_y[i]
        if dx == UNREACHABLE or dy == UNREACHABLE:
            labels[i] = 0
        else:
            labels[i] = drnl_hash(int(dx), int(dy))
    return labels


def drnl_label(sub: EnclosingSubgraph) -> np.ndarray:
    """Recompute the label vector for an extracted subgraph."""
    tx, ty = sub.target
    return _label_array(sub.local_graph, tx, ty)


def extract_enclosing(g: Graph, x: int, y: int, h: int,
                      remove_target_edge: bool = True,
                      max_nodes: int | None = None) -> EnclosingSubgraph:
    """Induce the h-hop region around (x, y) and label its nodes.

    With remove_target_edge (the training-data convention) an existing (x, y)
    edge is deleted from the local graph and had_target_edge is set; analysis
    code that compares against whole-graph quantities passes False to keep the
    region exactly as induced.
    """
    g.check_node(x)
    g.check_node(y)
    x, y = int(x), int(y)
    if x == y:
        raise InputError("target nodes must be distinct")
    if h < 1:
        raise InputError("hop count must be >= 1")
    dx = bfs_distances(g, x).dist
    dy = bfs_distances(g, y).dist
    keep = ((dx != UNREACHABLE) & (dx <= h)) | ((dy != UNREACHABLE) & (dy <= h))
    others = np.flatnonzero(keep)
    others = others[(others != x) & (others != y)]
    order = np.concatenate([[x, y], others])
    if max_nodes is not None and order.size > max_nodes:
        raise InputError(
            f"enclosing subgraph for ({x}, {y}) has {order.size} nodes, "
            f"over the cap of {max_nodes}")
    local = induce_ordered(g, order)
    had_edge = local.has_edge(0, 1)
    removed = False
    if had_edge and remove_target_edge:
        local = remove_edges(local, [(0, 1)])
        removed = True
    labels = _label_array(local, 0, 1)
    return EnclosingSubgraph(
        local_graph=local,
        node_map=order,
        target=(0, 1),
        hop=int(h),
        labels=labels,
        had_target_edge=removed,
        global_degrees=g.degrees()[order],
    )


def build_node_info(sub: EnclosingSubgraph, label_cap: int,
                    embeddings: np.ndarray | None = None,
                    attributes: np.ndarray | None = None) -> np.ndarray:
    """Per-node feature rows: one-hot of the clamped label, then optional
    embedding and attribute blocks looked up by source-graph node id."""
    if label_cap < 1:
        raise InputError("label_cap must be >= 1")
    clamped = np.minimum(sub.labels, label_cap)
    onehot = np.zeros((sub.n, label_cap + 1), dtype=np.float64)
    onehot[np.arange(sub.n), clamped] = 1.0
    blocks = [onehot]
    for table in (embeddings, attributes):
        if table is None:
            continue
        table = np.asarray(table, dtype=np.float64)
        if table.ndim != 2:
            raise InputError("feature tables must be 2-dimensional")
        if sub.node_map.max(initial=-1) >= table.shape[0]:
            raise InputError("feature table does not cover every source node")
        blocks.append(table[sub.node_map])
    return np.concatenate(blocks, axis=1)


# ---------------------------------------------------------------------------
# Batch serialization: one JSON record per line. JSON floats round-trip
# doubles bit-exactly, so saved feature rows reload unchanged.

def _record(sub: EnclosingSubgraph, extra: np.ndarray | None, y: int | None) -> dict:
    return {
        "n": sub.n,
        "edges": [[int(u), int(v)] for u, v in sub.local_graph.edges()],
        "target": [int(sub.target[0]), int(sub.target[1])],
        "hop": sub.hop,
        "labels": [int(v) for v in sub.labels],
        "had_target_edge": bool(sub.had_target_edge),
        "global_ids": [int(v) for v in sub.node_map],
        "global_degrees": [int(v) for v in sub.global_degrees],
        "extra": None if extra is None else [[float(t) for t in row] for row in extra],
        "y": None if y is None else int(y),
    }


def _from_record(rec: dict) -> tuple[EnclosingSubgraph, np.ndarray | None, int | None]:
    sub = EnclosingSubgraph(
        local_graph=Graph.from_edges(rec["n"], [tuple(e) for e in rec["edges"]]),
        node_map=np.asarray(rec["global_ids"], dtype=np.int64),
        target=(rec["target"][0], rec["target"][1]),
        hop=int(rec["hop"]),
        labels=np.asarray(rec["labels"], dtype=np.int64),
        had_target_edge=bool(rec["had_target_edge"]),
        global_degrees=np.asarray(rec["global_degrees"], dtype=np.int64),
    )
    extra = rec.get("extra")
    if extra is not None:
        extra = np.asarray(extra, dtype=np.float64).reshape(sub.n, -1)
    y = rec.get("y")
    return sub, extra, None if y is None else int(y)


def save_batch(path, items) -> None:
    """items: iterable of (EnclosingSubgraph, extra_features|None, class_label|None)."""
    with open(path, "w", encoding="utf-8") as fh:
        for sub, extra, y in items:
            fh.write(json.dumps(_record(sub, extra, y)) + "\n")


def load_batch(path) -> list[tuple[EnclosingSubgraph, np.ndarray | None, int | None]]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            out.append(_from_record(json.loads(line)))
    return out
