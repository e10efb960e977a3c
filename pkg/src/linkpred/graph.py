"""Immutable undirected graphs in compressed adjacency form.

Nodes are dense 0-based integers internally; external string labels go through
:class:`NodeIdMap`. Graphs are simple (no self-loops, no parallel edges) and
safe to share across threads or worker processes: all arrays are frozen after
construction and every operation here is a pure function.
"""
from __future__ import annotations

import re
import warnings
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .rng import as_generator

UNREACHABLE = -1

_HEADER_RE = re.compile(r"^n=(\d+)$")


class Graph:
    """Undirected simple graph with sorted per-node neighbor lists (CSR layout)."""

    __slots__ = ("n", "indptr", "indices")

    def __init__(self, n: int, indptr: np.ndarray, indices: np.ndarray):
        self.n = int(n)
        self.indptr = indptr
        self.indices = indices
        indptr.setflags(write=False)
        indices.setflags(write=False)

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        """Build from an iterable of (u, v) pairs.

        Duplicate and reversed-duplicate pairs collapse to a single edge.
        Self-loops are rejected; callers that tolerate them must filter first.
        """
        n = int(n)
        if n < 0:
            raise InputError("node count must be nonnegative")
        pairs = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        if pairs.size:
            if pairs.min() < 0 or pairs.max() >= n:
                raise InputError("edge endpoint out of range")
            if np.any(pairs[:, 0] == pairs[:, 1]):
                raise InputError("self-loop in edge list")
            lo = np.minimum(pairs[:, 0], pairs[:, 1])
            hi = np.maximum(pairs[:, 0], pairs[:, 1])
            canon = np.unique(lo * n + hi)
            lo, hi = canon // n, canon % n
            src = np.concatenate([lo, hi])
            dst = np.concatenate([hi, lo])
        else:
            src = np.empty(0, dtype=np.int64)
            dst = np.empty(0, dtype=np.int64)
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, src + 1, 1)
        np.cumsum(indptr, out=indptr)
        return cls(n, indptr, dst)

    @property
    def edge_count(self) -> int:
        return int(self.indices.size) // 2

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def degree(self, i: int) -> int:
        return int(self.indptr[i + 1] - self.indptr[i])

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def max_degree(self) -> int:
        return int(self.degrees().max()) if self.n else 0

    def has_edge(self, u: int, v: int) -> bool:
        nbrs = self.neighbors(u)
        k = np.searchsorted(nbrs, v)
        return k < nbrs.size and nbrs[k] == v

    def edges(self) -> np.ndarray:
        """All edges as an (m, 2) array with u < v, sorted lexicographically."""
        src = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees())
        mask = src < self.indices
        return np.column_stack([src[mask], self.indices[mask]])

    def check_node(self, i: int) -> None:
        if not (0 <= int(i) < self.n):
            raise InputError(f"node id {i} out of range for graph with {self.n} nodes")

    def validate(self) -> None:
        """Assert the structural invariants; used by tests and generators."""
        degs = self.degrees()
        assert degs.min(initial=0) >= 0
        for i in range(self.n):
            nbrs = self.neighbors(i)
            assert np.all(np.diff(nbrs) > 0), "neighbor list not strictly sorted"
            assert not np.any(nbrs == i), "self-loop"
            for j in nbrs:
                assert self.has_edge(int(j), i), "asymmetric adjacency"
        assert int(degs.sum()) % 2 == 0

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Graph)
            and self.n == other.n
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
        )

    def __hash__(self):
        return hash((self.n, self.indices.tobytes()))

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.edge_count})"


@dataclass(frozen=True)
class DistanceMap:
    """BFS distances from one source; UNREACHABLE (-1) marks unreachable nodes."""

    source: int
    dist: np.ndarray

    def reachable(self, i: int) -> bool:
        return self.dist[i] != UNREACHABLE


@dataclass
class NodeIdMap:
    """Bijection between external string labels and dense internal ids."""

    labels: list[str] = field(default_factory=list)
    index: dict[str, int] = field(default_factory=dict)

    @classmethod
    def identity(cls, n: int) -> "NodeIdMap":
        labels = [str(i) for i in range(n)]
        return cls(labels, {s: i for i, s in enumerate(labels)})

    def add(self, label: str) -> int:
        if label in self.index:
            return self.index[label]
        i = len(self.labels)
        self.labels.append(label)
        self.index[label] = i
        return i

    def id_of(self, label: str) -> int:
        try:
            return self.index[label]
        except KeyError:
            raise InputError(f"unknown node label {label!r}") from None

    def label_of(self, i: int) -> str:
        return self.labels[i]

    def is_identity(self) -> bool:
        return all(s == str(i) for i, s in enumerate(self.labels))

    def __len__(self):
        return len(self.labels)

    def __eq__(self, other):
        return isinstance(other, NodeIdMap) and self.labels == other.labels


def bfs_distances(g: Graph, source: int, excluded: int | None = None) -> DistanceMap:
    """Shortest-path hop counts from source, optionally deleting one node.

    The excluded node and its incident edges are treated as absent, which can
    disconnect parts of the graph; those get UNREACHABLE.
    """
    g.check_node(source)
    if excluded is not None:
        g.check_node(excluded)
        if int(excluded) == int(source):
            raise InputError("excluded node must differ from source")
    dist = np.full(g.n, UNREACHABLE, dtype=np.int64)
    dist[source] = 0
    q = deque([int(source)])
    while q:
        u = q.popleft()
        du = dist[u]
        for v in g.neighbors(u):
            v = int(v)
            if v == excluded or dist[v] != UNREACHABLE:
                continue
            dist[v] = du + 1
            q.append(v)
    if excluded is not None:
        dist[excluded] = UNREACHABLE
    return DistanceMap(int(source), dist)


def induce_ordered(g: Graph, order: np.ndarray) -> Graph:
    """Subgraph induced by `order`, with local ids following that sequence."""
    order = np.asarray(order, dtype=np.int64)
    if order.size == 0:
        raise InputError("cannot induce a subgraph on an empty node set")
    pos = {int(v): i for i, v in enumerate(order)}
    if len(pos) != order.size:
        raise InputError("duplicate node in induction set")
    edges = []
    for new_u, old_u in enumerate(order):
        for old_v in g.neighbors(int(old_u)):
            new_v = pos.get(int(old_v))
            if new_v is not None and new_u < new_v:
                edges.append((new_u, new_v))
    return Graph.from_edges(order.size, edges)


def induce_subgraph(g: Graph, nodes) -> tuple[Graph, dict[int, int]]:
    """Subgraph induced by a node set; ids remapped densely in sorted order."""
    order = np.asarray(sorted(int(v) for v in set(nodes)), dtype=np.int64)
    if order.size == 0:
        raise InputError("cannot induce a subgraph on an empty node set")
    if order[0] < 0 or order[-1] >= g.n:
        raise InputError("induction set contains invalid node ids")
    sub = induce_ordered(g, order)
    return sub, {int(old): new for new, old in enumerate(order)}


def remove_edges(g: Graph, pairs) -> Graph:
    """New graph with the given edges deleted; absent pairs are an error."""
    drop = set()
    for u, v in pairs:
        u, v = int(u), int(v)
        if not g.has_edge(u, v):
            raise InputError(f"cannot remove nonexistent edge ({u}, {v})")
        drop.add((min(u, v), max(u, v)))
    kept = [e for e in map(tuple, g.edges()) if e not in drop]
    return Graph.from_edges(g.n, kept)


def add_edges(g: Graph, pairs) -> Graph:
    """New graph with the given non-edges added; existing pairs are an error."""
    extra = []
    for u, v in pairs:
        u, v = int(u), int(v)
        if u == v:
            raise InputError("cannot add a self-loop")
        if g.has_edge(u, v):
            raise InputError(f"pair ({u}, {v}) is already an edge")
        extra.append((u, v))
    if len({(min(u, v), max(u, v)) for u, v in extra}) != len(extra):
        raise InputError("duplicate pair in edge additions")
    return Graph.from_edges(g.n, list(map(tuple, g.edges())) + extra)


# ---------------------------------------------------------------------------
# Synthetic generators. Deterministic for a fixed seed.

def erdos_renyi(n: int, p: float, seed) -> Graph:
    if n < 0 or not (0.0 <= p <= 1.0):
        raise InputError("erdos_renyi requires n >= 0 and 0 <= p <= 1")
    rng = as_generator(seed)
    iu = np.triu_indices(n, k=1)
    mask = rng.random(iu[0].size) < p
    return Graph.from_edges(n, zip(iu[0][mask], iu[1][mask]))


def barabasi_albert(n: int, m: int, seed) -> Graph:
    """Preferential attachment: each new node links to m distinct earlier nodes
    chosen proportionally to degree (the standard repeated-nodes scheme)."""
    if m < 1 or m >= n:
        raise InputError("barabasi_albert requires 1 <= m < n")
    rng = as_generator(seed)
    targets = list(range(m))
    repeated: list[int] = []
    edges = []
    for v in range(m, n):
        edges.extend((v, t) for t in targets)
        repeated.extend(targets)
        repeated.extend([v] * m)
        chosen: set[int] = set()
        while len(chosen) < m:
            chosen.add(repeated[rng.integers(len(repeated))])
        targets = sorted(chosen)
    return Graph.from_edges(n, edges)


def watts_strogatz(n: int, k: int, beta: float, seed) -> Graph:
    """Ring lattice with k/2 neighbors per side, each edge rewired with prob beta."""
    if k % 2 != 0 or k < 2 or k >= n:
        raise InputError("watts_strogatz requires even k with 2 <= k < n")
    if not (0.0 <= beta <= 1.0):
        raise InputError("watts_strogatz requires 0 <= beta <= 1")
    rng = as_generator(seed)
    present = {(min(i, j), max(i, j)) for i in range(n) for j in
               ((i + d) % n for d in range(1, k // 2 + 1))}
    for d in range(1, k // 2 + 1):
        for i in range(n):
            j = (i + d) % n
            e = (min(i, j), max(i, j))
            if e not in present or rng.random() >= beta:
                continue
            if len(present) >= n * (n - 1) // 2:
                continue  # node set saturated, keep the lattice edge
            while True:
                w = int(rng.integers(n))
                cand = (min(i, w), max(i, w))
                if w != i and cand not in present:
                    present.remove(e)
                    present.add(cand)
                    break
    return Graph.from_edges(n, present)


_GENERATORS = {
    "erdos_renyi": (erdos_renyi, ("n", "p")),
    "barabasi_albert": (barabasi_albert, ("n", "m")),
    "watts_strogatz": (watts_strogatz, ("n", "k", "beta")),
}


def gen_synthetic(model: str, seed, **params) -> Graph:
    """Dispatch on model name; see _GENERATORS for the accepted parameters."""
    if model not in _GENERATORS:
        raise InputError(f"unknown graph model {model!r}")
    fn, names = _GENERATORS[model]
    missing = [k for k in names if k not in params]
    extra = [k for k in params if k not in names]
    if missing or extra:
        raise InputError(f"model {model!r} takes parameters {names}, "
                         f"missing={missing} unexpected={extra}")
    return fn(*(params[k] for k in names), seed)


# ---------------------------------------------------------------------------
# Edge-list text IO.
#
# Format: one edge per line, two whitespace-separated labels. '#' starts a
# comment line. An optional first content line "n=<N>" declares the node count
# (the only way to express isolated nodes); with the header, labels must be
# the integers 0..N-1.

def load_edge_list(path) -> tuple[Graph, NodeIdMap]:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.readlines()
    header_n: int | None = None
    tokens: list[tuple[str, str]] = []  # self-loop lines keep their node label
    dropped = 0
    saw_content = False
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = _HEADER_RE.match(line)
        if m:
            if saw_content or header_n is not None:
                raise InputError(f"{path}:{lineno}: header line must come first")
            header_n = int(m.group(1))
            continue
        saw_content = True
        toks = line.split()
        if len(toks) != 2:
            raise InputError(f"{path}:{lineno}: expected 2 tokens, got {len(toks)}")
        if toks[0] == toks[1]:
            dropped += 1
        tokens.append((toks[0], toks[1]))
    if not any(a != b for a, b in tokens) and header_n is None:
        raise InputError(f"{path}: no edges found")
    if dropped:
        warnings.warn(f"{path}: dropped {dropped} self-loop line(s)")

    idmap = NodeIdMap()
    if header_n is not None:
        idmap = NodeIdMap.identity(header_n)
        edges = []
        for a, b in tokens:
            try:
                u, v = int(a), int(b)
            except ValueError:
                raise InputError(
                    f"{path}: with an n= header node labels must be integers") from None
            if not (0 <= u < header_n and 0 <= v < header_n):
                raise InputError(f"{path}: node id outside 0..{header_n - 1}")
            if u != v:
                edges.append((u, v))
        return Graph.from_edges(header_n, edges), idmap
    edges = []
    for a, b in tokens:
        u, v = idmap.add(a), idmap.add(b)
        if u != v:
            edges.append((u, v))
    return Graph.from_edges(len(idmap), edges), idmap


def save_edge_list(path, g: Graph, idmap: NodeIdMap | None = None,
                   provenance: str | None = None) -> None:
    """Write a graph in the edge-list format; round-trips through load_edge_list.

    Without an explicit map the canonical integer labelling is used and an
    n= header is written so isolated nodes survive the round trip.
    """
    identityish = idmap is None or idmap.is_identity()
    if not identityish and (np.any(g.degrees() == 0) and g.n > 0):
        raise InputError("isolated nodes require the canonical integer labelling")
    with open(path, "w", encoding="utf-8") as fh:
        if provenance:
            fh.write(f"# {provenance}\n")
        if identityish:
            fh.write(f"n={g.n}\n")
            for u, v in g.edges():
                fh.write(f"{u} {v}\n")
        else:
            for u, v in g.edges():
                fh.write(f"{idmap.label_of(int(u))} {idmap.label_of(int(v))}\n")
