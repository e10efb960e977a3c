"""Walk-sum machinery behind the high-order scores.

Katz, rooted PageRank and SimRank all take the shape

    score(x, y) = eta * sum_l gamma^l * f(x, y, l)

for a per-length kernel f: walk counts for Katz, l-step visit probability for
PageRank, first co-location probability of two simultaneous walkers for
SimRank. This module computes those kernels exactly, truncates the series at
the horizon that an h-hop region around the pair fully determines (2h+1 for
the first two, h for SimRank), and measures the truncation error against the
geometric tail bound eta*(gamma*lambda)^(g+1)/(1-gamma*lambda).

A truncated kernel evaluated inside an extracted region must use each node's
*source-graph* degree (carried by the extraction record): the region contains
every walk up to the horizon, but boundary nodes have neighbors outside it,
so local degrees would distort step probabilities.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .graph import Graph, UNREACHABLE, bfs_distances
from .heuristics import HeuristicConfig, katz_exact, rooted_pagerank, simrank
from .subgraphs import EnclosingSubgraph

MAX_WALK_LENGTH = 64

DECAY_KINDS = ("katz", "pr", "sr")

CURVE_CSV_HEADER = "h,approx,exact,abs_error,bound"


def horizon(kind: str, h: int) -> int:
    """Longest series term fully determined by an h-hop region."""
    if kind in ("katz", "pr"):
        return 2 * h + 1
    if kind == "sr":
        return h
    raise InputError(f"{kind!r} has no decaying walk-sum form")


@dataclass(frozen=True)
class DecayParams:
    """Constants of one decaying walk sum, for bound evaluation."""

    gamma: float
    eta: float
    lam: float       # kernel growth bound: f(x,y,l) <= lam^l
    a: int
    b: int

    def g_of(self, h: int) -> int:
        return self.a * h + self.b

    def tail_bound(self, h: int) -> float:
        gl = self.gamma * self.lam
        if gl >= 1.0:
            return float("inf")
        return self.eta * gl ** (self.g_of(h) + 1) / (1.0 - gl)


def decay_params(kind: str, g: Graph, cfg: HeuristicConfig) -> DecayParams:
    if kind == "katz":
        return DecayParams(cfg.katz_beta, 1.0, float(g.max_degree()), 2, 1)
    if kind == "pr":
        return DecayParams(cfg.pr_alpha, 1.0 - cfg.pr_alpha, 1.0, 2, 1)
    if kind == "sr":
        return DecayParams(cfg.sr_gamma, 1.0, 1.0, 1, 0)
    raise InputError(f"{kind!r} has no decaying walk-sum form")


# ---------------------------------------------------------------------------
# Kernels

def count_walk_series(g: Graph, x: int, y: int, max_l: int) -> list[int]:
    """Exact number of length-l walks from x to y for l = 0..max_l.

    Dynamic programming over adjacency with Python integers, so the counts
    never overflow no matter how dense the graph is.
    """
    g.check_node(x)
    g.check_node(y)
    if max_l > MAX_WALK_LENGTH:
        raise InputError(f"walk length capped at {MAX_WALK_LENGTH}")
    v = [0] * g.n
    v[int(x)] = 1
    out = [v[int(y)]]
    for _ in range(max_l):
        nxt = [0] * g.n
        for j in range(g.n):
            s = 0
            for i in g.neighbors(j):
                s += v[i]
            nxt[j] = s
        v = nxt
        out.append(v[int(y)])
    return out


def count_walks(g: Graph, x: int, y: int, l: int) -> int:
    if l < 1:
        raise InputError("walk length must be >= 1")
    return count_walk_series(g, x, y, l)[l]


def _step_matrix(g: Graph, degrees: np.ndarray | None) -> tuple[np.ndarray, np.ndarray]:
    """Row-normalized adjacency as dense array plus the degree vector in use."""
    deg = g.degrees().astype(np.float64) if degrees is None \
        else np.asarray(degrees, dtype=np.float64)
    a = np.zeros((g.n, g.n))
    for i in range(g.n):
        a[i, g.neighbors(i)] = 1.0
    inv = np.divide(1.0, deg, out=np.zeros(g.n), where=deg > 0)
    return a * inv[:, None], deg


def walk_prob_series(g: Graph, x: int, max_l: int,
                     degrees: np.ndarray | None = None) -> np.ndarray:
    """Occupation probabilities: row l is the distribution after exactly l
    uniform random-walk steps from x. With a degree override, steps toward
    neighbors missing from g leak mass out instead of renormalizing."""
    g.check_node(x)
    w, deg = _step_matrix(g, degrees)
    if deg[int(x)] <= 0:
        raise InputError("walk probabilities need a start node with degree >= 1")
    out = np.zeros((max_l + 1, g.n))
    out[0, int(x)] = 1.0
    for l in range(1, max_l + 1):
        out[l] = out[l - 1] @ w
    return out


def walk_prob(g: Graph, x: int, y: int, l: int,
              degrees: np.ndarray | None = None) -> float:
    g.check_node(y)
    if l < 1:
        raise InputError("walk length must be >= 1")
    return float(walk_prob_series(g, x, l, degrees)[l, int(y)])


def first_meeting_series(g: Graph, x: int, y: int, max_l: int,
                         degrees: np.ndarray | None = None) -> np.ndarray:
    """Probability that two simultaneous walkers from x and y first occupy
    the same node at step l, for l = 1..max_l (index 0 unused, kept 0).

    State is the joint mass over ordered pairs; co-located states absorb.
    """
    g.check_node(x)
    g.check_node(y)
    if int(x) == int(y):
        raise InputError("meeting probabilities are defined for distinct nodes")
    w, _ = _step_matrix(g, degrees)
    m = np.zeros((g.n, g.n))
    m[int(x), int(y)] = 1.0
    out = np.zeros(max_l + 1)
    for l in range(1, max_l + 1):
        m = w.T @ m @ w
        out[l] = float(np.trace(m))
        np.fill_diagonal(m, 0.0)
    return out


def first_meeting_prob(g: Graph, x: int, y: int, l: int,
                       degrees: np.ndarray | None = None) -> float:
    if l < 1:
        raise InputError("walk length must be >= 1")
    return float(first_meeting_series(g, x, y, max_l=l, degrees=degrees)[l])


# ---------------------------------------------------------------------------
# Truncated scores from an extracted region

def truncated_heuristic(kind: str, sub: EnclosingSubgraph, h: int,
                        cfg: HeuristicConfig) -> float:
    """Partial walk sum up to the h-determined horizon, evaluated inside the
    extracted region with source-graph degrees.

    For 'pr' this is the one-directional probability of landing on y from x;
    callers wanting the symmetric link score sum both directions.
    """
    if kind not in DECAY_KINDS:
        raise InputError(f"{kind!r} has no decaying walk-sum form")
    tx, ty = sub.target
    local = sub.local_graph
    gh = horizon(kind, h)
    if gh < 1:
        return 0.0
    if kind == "katz":
        counts = count_walk_series(local, tx, ty, gh)
        beta = cfg.katz_beta
        return float(sum(beta ** l * float(c) for l, c in enumerate(counts) if l >= 1))
    if kind == "pr":
        alpha = cfg.pr_alpha
        series = walk_prob_series(local, tx, gh, degrees=sub.global_degrees)
        acc = 0.0
        for l in range(1, gh + 1):
            acc += alpha ** l * series[l, ty]
        return float((1.0 - alpha) * acc)
    gamma = cfg.sr_gamma
    meet = first_meeting_series(local, tx, ty, gh, degrees=sub.global_degrees)
    return float(sum(gamma ** l * meet[l] for l in range(1, gh + 1)))


def truncated_from_graph(kind: str, g: Graph, x: int, y: int, max_l: int,
                         cfg: HeuristicConfig) -> float:
    """Same partial sum evaluated on a whole graph, for cross-checks."""
    if kind == "katz":
        counts = count_walk_series(g, x, y, max_l)
        return float(sum(cfg.katz_beta ** l * float(c)
                         for l, c in enumerate(counts) if l >= 1))
    if kind == "pr":
        series = walk_prob_series(g, x, max_l)
        acc = sum(cfg.pr_alpha ** l * series[l, int(y)] for l in range(1, max_l + 1))
        return float((1.0 - cfg.pr_alpha) * acc)
    if kind == "sr":
        meet = first_meeting_series(g, x, y, max_l)
        return float(sum(cfg.sr_gamma ** l * meet[l] for l in range(1, max_l + 1)))
    raise InputError(f"{kind!r} has no decaying walk-sum form")


# ---------------------------------------------------------------------------
# Error curves

SIMRANK_REFERENCE_L = 200
SIMRANK_REFERENCE_TOL = 1e-7  # both references carry ~1e-9 iteration residue


@dataclass
class ErrorCurve:
    kind: str
    pair: tuple[int, int]
    rows: list[tuple[int, float, float, float, float]]  # (h, approx, exact, err, bound)

    def to_csv(self) -> str:
        lines = [CURVE_CSV_HEADER]
        for h, approx, exact, err, bound in self.rows:
            lines.append(f"{h},{approx:.10g},{exact:.10g},{err:.10g},{bound:.10g}")
        return "\n".join(lines) + "\n"


def exact_value(kind: str, g: Graph, x: int, y: int, cfg: HeuristicConfig) -> float:
    """Converged score on the whole graph, by the kind's own exact method."""
    if kind == "katz":
        return katz_exact(g, cfg, x, y)
    if kind == "pr":
        return float(rooted_pagerank(g, cfg, x)[int(y)])
    if kind == "sr":
        fixed = float(simrank(g, cfg)[int(x), int(y)])
        walksum = truncated_from_graph("sr", g, x, y, SIMRANK_REFERENCE_L, cfg)
        if abs(fixed - walksum) > SIMRANK_REFERENCE_TOL:
            import warnings
            warnings.warn(
                f"simrank fixed point and L={SIMRANK_REFERENCE_L} walk sum disagree "
                f"by {abs(fixed - walksum):.3g}; using the walk sum as reference")
            return walksum
        return fixed
    raise InputError(f"{kind!r} has no decaying walk-sum form")


def error_curve(kind: str, g: Graph, pair: tuple[int, int], h_range,
                cfg: HeuristicConfig) -> ErrorCurve:
    """For each hop count: extract the region (as induced, target edge kept),
    evaluate the truncated sum, and compare against the exact value."""
    from .subgraphs import extract_enclosing

    x, y = int(pair[0]), int(pair[1])
    params = decay_params(kind, g, cfg)
    exact = exact_value(kind, g, x, y, cfg)
    rows = []
    for h in h_range:
        sub = extract_enclosing(g, x, y, int(h), remove_target_edge=False)
        approx = truncated_heuristic(kind, sub, int(h), cfg)
        err = abs(exact - approx)
        rows.append((int(h), approx, exact, err, params.tail_bound(int(h))))
    return ErrorCurve(kind, (x, y), rows)


# ---------------------------------------------------------------------------
# Exhaustive containment check

def verify_lemma1(g: Graph, x: int, y: int, h: int) -> tuple[bool, list[int] | None]:
    """Enumerate every walk between x and y of length <= 2h+1 by DFS and check
    each visited node lies in the h-hop region's node set. Returns True, or
    False with a violating walk."""
    if g.n > 12:
        raise InputError("exhaustive walk enumeration capped at 12 nodes")
    g.check_node(x)
    g.check_node(y)
    x, y = int(x), int(y)
    dx = bfs_distances(g, x).dist
    dy = bfs_distances(g, y).dist
    ball = {
        i for i in range(g.n)
        if (dx[i] != UNREACHABLE and dx[i] <= h) or (dy[i] != UNREACHABLE and dy[i] <= h)
    }
    max_len = 2 * h + 1
    walk = [x]

    def dfs(u: int) -> list[int] | None:
        if len(walk) - 1 > max_len:
            return None
        if u == y and len(walk) > 1:
            for node in walk:
                if node not in ball:
                    return list(walk)
        if len(walk) - 1 == max_len:
            return None
        for v in g.neighbors(u):
            walk.append(int(v))
            bad = dfs(int(v))
            if bad is not None:
                return bad
            walk.pop()
        return None

    bad = dfs(x)
    return (bad is None), bad
