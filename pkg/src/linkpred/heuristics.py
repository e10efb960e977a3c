"""The eight classic link prediction scores and the logistic ensemble baseline.

Local scores (common neighbors, Jaccard, preferential attachment, Adamic-Adar,
resource allocation) read only the immediate neighborhoods. The global three
(Katz, rooted PageRank, SimRank) are computed exactly: dense solve, power
iteration, and fixed-point iteration respectively.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp

from .errors import InputError, NumericalError
from .graph import Graph

KINDS = ("cn", "jaccard", "pa", "aa", "ra", "katz", "pr", "sr")
LOCAL_KINDS = ("cn", "jaccard", "pa", "aa", "ra")

SIMRANK_NODE_CAP = 2000

SCORE_CSV_HEADER = "u,v,cn,jaccard,pa,aa,ra,katz,pr,sr"


@dataclass(frozen=True)
class HeuristicConfig:
    katz_beta: float = 0.001
    pr_alpha: float = 0.85
    sr_gamma: float = 0.8
    convergence_tol: float = 1e-9
    max_iter: int = 10000

    def __post_init__(self):
        for name in ("katz_beta", "pr_alpha", "sr_gamma"):
            v = getattr(self, name)
            if not (0.0 < v < 1.0):
                raise InputError(f"{name} must lie in (0, 1), got {v}")
        if self.convergence_tol <= 0 or self.max_iter <= 0:
            raise InputError("convergence_tol and max_iter must be positive")


def _check_pair(g: Graph, x: int, y: int) -> None:
    g.check_node(x)
    g.check_node(y)
    if int(x) == int(y):
        raise InputError("heuristics are defined for distinct node pairs")


def common_neighbor_ids(g: Graph, x: int, y: int) -> np.ndarray:
    return np.intersect1d(g.neighbors(x), g.neighbors(y), assume_unique=True)


def local_score(kind: str, g: Graph, x: int, y: int) -> float:
    """Exact first/second-order scores straight from the defining formulas."""
    if kind not in LOCAL_KINDS:
        raise InputError(f"{kind!r} is not a local heuristic")
    _check_pair(g, x, y)
    nx, ny = g.neighbors(x), g.neighbors(y)
    if kind == "pa":
        return float(nx.size * ny.size)
    common = np.intersect1d(nx, ny, assume_unique=True)
    if kind == "cn":
        return float(common.size)
    if kind == "jaccard":
        union = nx.size + ny.size - common.size
        return float(common.size / union) if union else 0.0
    degs = np.array([g.degree(int(z)) for z in common], dtype=np.float64)
    if kind == "aa":
        degs = degs[degs > 1]  # log(1) = 0 would blow up on induced subgraphs
        return float(np.sum(1.0 / np.log(degs))) if degs.size else 0.0
    # ra
    return float(np.sum(1.0 / degs)) if degs.size else 0.0


def adjacency_matrix(g: Graph) -> sp.csr_matrix:
    data = np.ones(g.indices.size, dtype=np.float64)
    return sp.csr_matrix((data, g.indices, g.indptr), shape=(g.n, g.n))


def katz_matrix(g: Graph, cfg: HeuristicConfig) -> np.ndarray:
    """All-pairs Katz scores: inverse of (I - beta*A) minus the identity."""
    beta = cfg.katz_beta
    if beta * g.max_degree() >= 1.0:
        raise NumericalError(
            f"katz series may diverge: beta*max_degree = {beta * g.max_degree():.4g} >= 1")
    a = adjacency_matrix(g).toarray()
    m = np.eye(g.n) - beta * a
    inv = np.linalg.solve(m, np.eye(g.n))
    # one step of iterative refinement keeps entries accurate to a few ulps
    inv += np.linalg.solve(m, np.eye(g.n) - m @ inv)
    return inv - np.eye(g.n)


def katz_exact(g: Graph, cfg: HeuristicConfig, x: int, y: int) -> float:
    """Entry (x, y) of the converged walk series, by direct dense solve."""
    _check_pair(g, x, y)
    beta = cfg.katz_beta
    if beta * g.max_degree() >= 1.0:
        raise NumericalError(
            f"katz series may diverge: beta*max_degree = {beta * g.max_degree():.4g} >= 1")
    a = adjacency_matrix(g).toarray()
    m = np.eye(g.n) - beta * a
    e = np.zeros(g.n)
    e[y] = 1.0
    col = np.linalg.solve(m, e)
    for _ in range(2):
        col += np.linalg.solve(m, e - m @ col)
    return float(col[x] - (1.0 if x == y else 0.0))


def rooted_pagerank(g: Graph, cfg: HeuristicConfig, x: int) -> np.ndarray:
    """Stationary distribution of the restart walk rooted at x.

    Power iteration on pi = alpha*P*pi + (1-alpha)*e_x with column-stochastic
    P (mass at node j spreads to its neighbors at rate 1/deg(j)). A walker
    sitting on a degree-0 node teleports back to x.
    """
    g.check_node(x)
    if g.edge_count < 1:
        raise InputError("rooted pagerank requires at least one edge")
    alpha = cfg.pr_alpha
    a = adjacency_matrix(g)
    deg = g.degrees().astype(np.float64)
    live = deg > 0
    inv_deg = np.zeros(g.n)
    inv_deg[live] = 1.0 / deg[live]
    pi = np.zeros(g.n)
    pi[x] = 1.0
    for _ in range(cfg.max_iter):
        spread = a @ (pi * inv_deg)
        dangling = float(pi[~live].sum())
        nxt = alpha * spread + (1.0 - alpha) * 0.0
        nxt[x] += alpha * dangling + (1.0 - alpha)
        resid = float(np.abs(nxt - pi).sum())
        pi = nxt
        if resid < cfg.convergence_tol:
            return pi
    raise NumericalError("rooted pagerank did not converge", residual=resid)


def pagerank_score(g: Graph, cfg: HeuristicConfig, x: int, y: int,
                   pi_cache: dict[int, np.ndarray] | None = None) -> float:
    """Symmetric link score [pi_x]_y + [pi_y]_x."""
    _check_pair(g, x, y)

    def pi_of(v: int) -> np.ndarray:
        if pi_cache is not None and v in pi_cache:
            return pi_cache[v]
        vec = rooted_pagerank(g, cfg, v)
        if pi_cache is not None:
            pi_cache[v] = vec
        return vec

    return float(pi_of(int(x))[int(y)] + pi_of(int(y))[int(x)])


def simrank(g: Graph, cfg: HeuristicConfig) -> np.ndarray:
    """Full pairwise similarity matrix by fixed-point iteration from identity.

    Pairs touching an isolated node stay at 0 (off-diagonal); diagonal is 1.
    """
    if g.n > SIMRANK_NODE_CAP:
        raise InputError(f"simrank capped at {SIMRANK_NODE_CAP} nodes, got {g.n}")
    gamma = cfg.sr_gamma
    deg = g.degrees().astype(np.float64)
    inv_deg = np.divide(1.0, deg, out=np.zeros(g.n), where=deg > 0)
    w = sp.diags(inv_deg) @ adjacency_matrix(g)  # row-stochastic where defined
    w = sp.csr_matrix(w)
    s = np.eye(g.n)
    prev_change = np.inf
    for _ in range(cfg.max_iter):
        nxt = gamma * (w @ (w @ s.T).T)  # = gamma * W S W^T, S symmetric
        nxt = (nxt + nxt.T) / 2.0        # keep exact bitwise symmetry
        np.fill_diagonal(nxt, 1.0)
        change = float(np.abs(nxt - s).max())
        s = nxt
        if change < cfg.convergence_tol:
            return s
        prev_change = change
    raise NumericalError("simrank did not converge", residual=prev_change)


def simrank_score(s_matrix: np.ndarray, x: int, y: int) -> float:
    return float(s_matrix[int(x), int(y)])


# ---------------------------------------------------------------------------
# Score tables

@dataclass
class ScoreTable:
    """Per-pair scores for each heuristic kind, in pair order."""

    pairs: np.ndarray            # (k, 2) node ids
    scores: dict[str, np.ndarray]

    def matrix(self, kinds=KINDS) -> np.ndarray:
        return np.column_stack([self.scores[k] for k in kinds])

    def to_csv(self, labels=None) -> str:
        lines = [SCORE_CSV_HEADER]
        name = (lambda i: labels.label_of(int(i))) if labels is not None else str
        for r, (u, v) in enumerate(self.pairs):
            vals = ",".join(f"{self.scores[k][r]:.10g}" for k in KINDS)
            lines.append(f"{name(u)},{name(v)},{vals}")
        return "\n".join(lines) + "\n"


def score_table(g: Graph, pairs, cfg: HeuristicConfig,
                kinds=KINDS) -> ScoreTable:
    """Score every pair under the requested kinds, sharing the heavy work
    (dense Katz solve, per-root PageRank vectors, SimRank matrix) across pairs."""
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    for u, v in pairs:
        _check_pair(g, int(u), int(v))
    out: dict[str, np.ndarray] = {}
    for kind in kinds:
        if kind in LOCAL_KINDS:
            out[kind] = np.array([local_score(kind, g, int(u), int(v)) for u, v in pairs])
    if "katz" in kinds:
        km = katz_matrix(g, cfg)
        out["katz"] = np.array([km[int(u), int(v)] for u, v in pairs])
    if "pr" in kinds:
        cache: dict[int, np.ndarray] = {}
        out["pr"] = np.array([pagerank_score(g, cfg, int(u), int(v), cache) for u, v in pairs])
    if "sr" in kinds:
        sm = simrank(g, cfg)
        out["sr"] = np.array([simrank_score(sm, int(u), int(v)) for u, v in pairs])
    return ScoreTable(pairs, out)


# ---------------------------------------------------------------------------
# Logistic-regression ensemble over the eight scores

@dataclass(frozen=True)
class EnsembleModel:
    mean: np.ndarray
    std: np.ndarray
    weights: np.ndarray   # per-feature
    bias: float

    def predict(self, features: np.ndarray) -> np.ndarray:
        z = (features - self.mean) / self.std
        return _sigmoid(z @ self.weights + self.bias)


def _sigmoid(t: np.ndarray) -> np.ndarray:
    out = np.empty_like(t, dtype=np.float64)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    e = np.exp(t[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def ensemble_fit(train_features: np.ndarray, train_labels: np.ndarray,
                 l2: float = 1e-4, tol: float = 1e-8,
                 max_iter: int = 200_000) -> EnsembleModel:
    """Logistic regression by full-batch gradient descent with backtracking.

    Features are standardized to zero mean / unit variance on the training
    set; the L2 penalty applies to weights only. Stops when the gradient
    infinity-norm drops below tol.
    """
    x = np.asarray(train_features, dtype=np.float64)
    y = np.asarray(train_labels, dtype=np.float64).ravel()
    if x.ndim != 2 or x.shape[0] != y.size:
        raise InputError("feature/label shape mismatch")
    classes = np.unique(y)
    if classes.size < 2:
        raise InputError("ensemble training needs both classes present")
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    std = np.where(std > 0, std, 1.0)
    z = (x - mean) / std
    k = z.shape[1]
    w = np.zeros(k)
    b = 0.0
    n = z.shape[0]

    def loss_grad(w, b):
        t = z @ w + b
        p = _sigmoid(t)
        # cross-entropy via log1p for stability
        ll = np.mean(np.log1p(np.exp(-np.abs(t))) + np.maximum(t, 0) - y * t)
        loss = ll + 0.5 * l2 * float(w @ w)
        gsh = (p - y) / n
        return loss, z.T @ gsh + l2 * w, float(gsh.sum())

    lr = 1.0
    loss, gw, gb = loss_grad(w, b)
    for _ in range(max_iter):
        gnorm = max(float(np.abs(gw).max()), abs(gb))
        if gnorm < tol:
            break
        while True:
            w2 = w - lr * gw
            b2 = b - lr * gb
            loss2, gw2, gb2 = loss_grad(w2, b2)
            if loss2 <= loss - 0.5 * lr * (float(gw @ gw) + gb * gb) or lr < 1e-12:
                break
            lr *= 0.5
        w, b, loss, gw, gb = w2, b2, loss2, gw2, gb2
        lr = min(lr * 2.0, 1e6)
    return EnsembleModel(mean, std, w, float(b))


def ensemble_fit_predict(train_features, train_labels, test_features) -> np.ndarray:
    """Fit on the training score vectors and return test probabilities in (0, 1)."""
    model = ensemble_fit(train_features, train_labels)
    return model.predict(np.asarray(test_features, dtype=np.float64))
