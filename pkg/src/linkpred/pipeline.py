"""Experimental protocol: link splitting, negative sampling, hop selection,
ranking metrics, and the repeated-trial driver that ties everything together.

A trial removes a fraction of edges as positive test links, keeps the rest as
the observed training graph, samples an equal number of non-edges as negative
links for each side, and carves a validation slice out of the training links.
Methods score the test links from the observed graph only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.stats

from . import gnn as gnn_mod
from .embeddings import negative_injection, spectral_embedding
from .errors import InputError, LinkpredError
from .graph import Graph, remove_edges
from .heuristics import (KINDS, HeuristicConfig, local_score,
                         score_table, ensemble_fit_predict)
from .rng import stream
from .subgraphs import extract_enclosing

REPORT_TRIAL_HEADER = "method,trial,auc,ap"
REPORT_SUMMARY_HEADER = "method,auc_mean,auc_std,ap_mean,ap_std"

METHODS = KINDS + ("ensemble", "sgnn")


@dataclass(frozen=True)
class SplitSpec:
    test_fraction: float = 0.1
    validation_fraction_of_train: float = 0.1
    seed: int = 0
    trials: int = 10

    def __post_init__(self):
        for name in ("test_fraction", "validation_fraction_of_train"):
            v = getattr(self, name)
            if not (0.0 < v < 1.0):
                raise InputError(f"{name} must lie in (0, 1), got {v}")
        if self.trials < 1:
            raise InputError("trials must be >= 1")


@dataclass
class LinkSet:
    """Canonical (u < v) node pairs with binary labels, for one role."""

    pairs: np.ndarray        # (k, 2)
    labels: np.ndarray       # (k,) in {0, 1}
    role: str                # train | validation | test

    def __post_init__(self):
        self.pairs = np.asarray(self.pairs, dtype=np.int64).reshape(-1, 2)
        self.labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        if self.pairs.shape[0] != self.labels.shape[0]:
            raise InputError("pair/label count mismatch")
        if self.pairs.size and np.any(self.pairs[:, 0] >= self.pairs[:, 1]):
            raise InputError("pairs must be in canonical u < v order")

    def positives(self) -> np.ndarray:
        return self.pairs[self.labels == 1]

    def negatives(self) -> np.ndarray:
        return self.pairs[self.labels == 0]

    def __len__(self):
        return int(self.labels.size)


@dataclass
class SplitResult:
    train_graph: Graph
    train: LinkSet
    validation: LinkSet
    test: LinkSet


def _sample_non_edges(g: Graph, count: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform without replacement over the non-edges of g (canonical order)."""
    n = g.n
    total_pairs = n * (n - 1) // 2
    available = total_pairs - g.edge_count
    if count > available:
        raise InputError(
            f"cannot sample {count} non-edges; only {available} exist")
    if total_pairs <= 5_000_000:
        iu = np.triu_indices(n, k=1)
        codes = iu[0] * n + iu[1]
        edge_codes = np.array([u * n + v for u, v in g.edges()], dtype=np.int64)
        non = np.setdiff1d(codes, edge_codes, assume_unique=True)
        pick = rng.choice(non.size, size=count, replace=False)
        chosen = np.sort(non[pick])
        return np.column_stack([chosen // n, chosen % n])
    seen: set[int] = set()
    out = []
    while len(out) < count:
        u = int(rng.integers(n))
        v = int(rng.integers(n))
        if u == v:
            continue
        u, v = (u, v) if u < v else (v, u)
        code = u * n + v
        if code in seen or g.has_edge(u, v):
            continue
        seen.add(code)
        out.append((u, v))
    return np.asarray(out, dtype=np.int64)


def split_links(g: Graph, spec: SplitSpec,
                rng_split: np.random.Generator | None = None,
                rng_neg: np.random.Generator | None = None,
                rng_val: np.random.Generator | None = None) -> SplitResult:
    """Carve test positives out of the edge set, sample matched negatives from
    the original graph's non-edges (train and test negatives disjoint), and
    split a validation slice off the training links."""
    if rng_split is None:
        rng_split = stream(spec.seed, "split")
    if rng_neg is None:
        rng_neg = stream(spec.seed, "negatives")
    if rng_val is None:
        rng_val = stream(spec.seed, "validation")
    m = g.edge_count
    if m < 2:
        raise InputError("graph too small to split")
    n_test = math.ceil(spec.test_fraction * m)
    if n_test >= m:
        raise InputError("test fraction leaves no training edges")
    edges = g.edges()
    perm = rng_split.permutation(m)
    test_pos = edges[np.sort(perm[:n_test])]
    train_pos = edges[np.sort(perm[n_test:])]
    train_graph = remove_edges(g, test_pos)

    negatives = _sample_non_edges(g, m, rng_neg)
    neg_perm = rng_neg.permutation(m)
    test_neg = negatives[np.sort(neg_perm[:n_test])]
    train_neg = negatives[np.sort(neg_perm[n_test:])]

    def carve(pool: np.ndarray, frac: float) -> tuple[np.ndarray, np.ndarray]:
        k = int(frac * pool.shape[0])
        pick = rng_val.permutation(pool.shape[0])
        return pool[np.sort(pick[k:])], pool[np.sort(pick[:k])]

    train_pos, val_pos = carve(train_pos, spec.validation_fraction_of_train)
    train_neg, val_neg = carve(train_neg, spec.validation_fraction_of_train)

    def linkset(pos, neg, role):
        pairs = np.concatenate([pos, neg]) if pos.size or neg.size else np.empty((0, 2), dtype=np.int64)
        labels = np.concatenate([np.ones(len(pos), dtype=np.int64),
                                 np.zeros(len(neg), dtype=np.int64)])
        return LinkSet(pairs, labels, role)

    return SplitResult(
        train_graph=train_graph,
        train=linkset(train_pos, train_neg, "train"),
        validation=linkset(val_pos, val_neg, "validation"),
        test=linkset(test_pos, test_neg, "test"),
    )


# ---------------------------------------------------------------------------
# Metrics

def auc(scores, labels) -> float:
    """Probability that a random positive outranks a random negative, ties
    counted one half (the rank-sum statistic)."""
    scores = np.asarray(scores, dtype=np.float64).ravel()
    labels = np.asarray(labels).ravel()
    pos = labels == 1
    n_pos = int(pos.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise InputError("auc needs both classes present")
    ranks = scipy.stats.rankdata(scores, method="average")
    return float((ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def average_precision(scores, labels) -> float:
    """Area under the precision-recall steps of the score-descending ranking;
    ties are ordered deterministically by item index."""
    scores = np.asarray(scores, dtype=np.float64).ravel()
    labels = np.asarray(labels).ravel()
    n_pos = int((labels == 1).sum())
    if n_pos == 0:
        raise InputError("average precision needs at least one positive")
    order = np.lexsort((np.arange(scores.size), -scores))
    hits = labels[order] == 1
    cum_hits = np.cumsum(hits)
    precision_at = cum_hits / (np.arange(scores.size) + 1.0)
    return float(precision_at[hits].sum() / n_pos)


# ---------------------------------------------------------------------------
# Hop selection

def select_h(train_graph: Graph, validation: LinkSet, force_h1: bool = False) -> int:
    """Pick the extraction radius: 2 if the second-order score ranks the
    validation links strictly better than the first-order one, else 1.

    Validation positives are edges of the observed graph; they are removed
    while scoring so neither heuristic sees them.
    """
    if force_h1:
        return 1
    labels = validation.labels
    if np.unique(labels).size < 2:
        raise InputError("validation set must contain both classes")
    g_val = remove_edges(train_graph, validation.positives())
    cn = [local_score("cn", g_val, int(u), int(v)) for u, v in validation.pairs]
    aa = [local_score("aa", g_val, int(u), int(v)) for u, v in validation.pairs]
    return 2 if auc(aa, labels) > auc(cn, labels) else 1


# ---------------------------------------------------------------------------
# Experiment driver

@dataclass(frozen=True)
class SgnnSettings:
    force_h1: bool = False
    label_cap: int = 50
    max_nodes: int | None = None
    use_embeddings: bool = False
    embedding_dim: int = 32
    negative_injection: bool = True
    attributes: np.ndarray | None = None


@dataclass
class MethodOutcome:
    method: str
    auc_values: list[float] = field(default_factory=list)
    ap_values: list[float] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)

    @property
    def failed(self) -> bool:
        return not self.auc_values

    def mean_std(self, values: list[float]) -> tuple[float, float]:
        arr = np.asarray(values, dtype=np.float64)
        std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
        return float(arr.mean()), std


@dataclass
class ExperimentReport:
    methods: list[MethodOutcome]
    trials: int
    config_echo: dict

    def to_csv(self, provenance: str | None = None) -> str:
        lines = []
        if provenance:
            lines.append(f"# {provenance}")
        lines.append(REPORT_TRIAL_HEADER)
        for mo in self.methods:
            for t in range(self.trials):
                a = mo.auc_values[t] if t < len(mo.auc_values) else float("nan")
                p = mo.ap_values[t] if t < len(mo.ap_values) else float("nan")
                lines.append(f"{mo.method},{t},{a:.10g},{p:.10g}")
        lines.append(REPORT_SUMMARY_HEADER)
        for mo in self.methods:
            if mo.failed:
                lines.append(f"{mo.method},nan,nan,nan,nan")
                continue
            am, asd = mo.mean_std(mo.auc_values)
            pm, psd = mo.mean_std(mo.ap_values)
            lines.append(f"{mo.method},{am:.10g},{asd:.10g},{pm:.10g},{psd:.10g}")
        return "\n".join(lines) + "\n"


def _build_dataset(graph: Graph, links: LinkSet, h: int, settings: SgnnSettings,
                   table: np.ndarray | None) -> gnn_mod.SubgraphDataset:
    ds = gnn_mod.SubgraphDataset(settings.label_cap, table)
    for (u, v), y in zip(links.pairs, links.labels):
        sub = extract_enclosing(graph, int(u), int(v), h,
                                max_nodes=settings.max_nodes)
        ds.add(sub, int(y))
    return ds


def run_sgnn_trial(split: SplitResult, hcfg: HeuristicConfig, gcfg: gnn_mod.GnnConfig,
                   settings: SgnnSettings, seed: int, trial: int) -> np.ndarray:
    """Full subgraph-classifier path for one split; returns test scores."""
    h = select_h(split.train_graph, split.validation, settings.force_h1)
    table = None
    if settings.use_embeddings:
        g_embed = split.train_graph
        if settings.negative_injection:
            train_negs = np.concatenate([split.train.negatives(),
                                         split.validation.negatives()])
            g_embed = negative_injection(g_embed, train_negs)
        table = spectral_embedding(g_embed, settings.embedding_dim)
    if settings.attributes is not None:
        attrs = np.asarray(settings.attributes, dtype=np.float64)
        table = attrs if table is None else np.concatenate([table, attrs], axis=1)
    ds_train = _build_dataset(split.train_graph, split.train, h, settings, table)
    ds_val = _build_dataset(split.train_graph, split.validation, h, settings, table)
    ds_test = _build_dataset(split.train_graph, split.test, h, settings, table)
    result = gnn_mod.train(ds_train, ds_val, gcfg,
                           stream(seed, "gnn", trial),
                           source_graph=split.train_graph)
    return gnn_mod.predict_proba(ds_test, result.params, gcfg)


def run_trial(g: Graph, methods, spec: SplitSpec, hcfg: HeuristicConfig,
              gcfg: gnn_mod.GnnConfig, settings: SgnnSettings, seed: int,
              trial: int) -> dict[str, tuple[float, float] | str]:
    """One split, all methods; values are (auc, ap) or an error string."""
    split = split_links(
        g, spec,
        rng_split=stream(seed, "split", trial),
        rng_neg=stream(seed, "negatives", trial),
        rng_val=stream(seed, "validation", trial),
    )
    out: dict[str, tuple[float, float] | str] = {}
    test_labels = split.test.labels
    heuristic_kinds = [m for m in methods if m in KINDS]
    need_table = bool(heuristic_kinds) or "ensemble" in methods
    table = None
    if need_table:
        kinds = tuple(heuristic_kinds) if "ensemble" not in methods else KINDS
        try:
            table = score_table(split.train_graph, split.test.pairs, hcfg, kinds)
        except LinkpredError as exc:
            for m in heuristic_kinds + (["ensemble"] if "ensemble" in methods else []):
                out[m] = f"{type(exc).__name__}: {exc}"
            table = None
    if table is not None:
        for m in heuristic_kinds:
            scores = table.scores[m]
            out[m] = (auc(scores, test_labels), average_precision(scores, test_labels))
        if "ensemble" in methods:
            try:
                fit_pairs = np.concatenate([split.train.pairs, split.validation.pairs])
                fit_labels = np.concatenate([split.train.labels, split.validation.labels])
                fit_table = score_table(split.train_graph, fit_pairs, hcfg, KINDS)
                probs = ensemble_fit_predict(fit_table.matrix(), fit_labels,
                                             table.matrix())
                out["ensemble"] = (auc(probs, test_labels),
                                   average_precision(probs, test_labels))
            except LinkpredError as exc:
                out["ensemble"] = f"{type(exc).__name__}: {exc}"
    if "sgnn" in methods:
        try:
            probs = run_sgnn_trial(split, hcfg, gcfg, settings, seed, trial)
            out["sgnn"] = (auc(probs, test_labels),
                           average_precision(probs, test_labels))
        except LinkpredError as exc:
            out["sgnn"] = f"{type(exc).__name__}: {exc}"
    return out


def _trial_worker(g, methods, spec, hcfg, gcfg, settings, trial):
    return run_trial(g, list(methods), spec, hcfg, gcfg, settings, spec.seed, trial)


def run_experiment(g: Graph, methods, spec: SplitSpec,
                   hcfg: HeuristicConfig | None = None,
                   gcfg: gnn_mod.GnnConfig | None = None,
                   settings: SgnnSettings | None = None,
                   config_echo: dict | None = None,
                   jobs: int = 1,
                   progress=None) -> ExperimentReport:
    """Repeat the trial protocol `spec.trials` times and aggregate per method.

    A failed method is reported as failed (its errors are kept), never
    silently dropped. Trials can run in parallel; each one derives its own
    randomness from (seed, trial), so results do not depend on `jobs`.
    """
    hcfg = hcfg or HeuristicConfig()
    gcfg = gcfg or gnn_mod.GnnConfig()
    settings = settings or SgnnSettings()
    for m in methods:
        if m not in METHODS:
            raise InputError(f"unknown method {m!r}")
    outcomes = {m: MethodOutcome(m) for m in methods}

    if jobs > 1:
        import functools
        import multiprocessing
        worker = functools.partial(_trial_worker, g, tuple(methods), spec,
                                   hcfg, gcfg, settings)
        with multiprocessing.get_context("fork").Pool(jobs) as pool:
            results = pool.map(worker, range(spec.trials))
    else:
        results = []
        for t in range(spec.trials):
            results.append(run_trial(g, methods, spec, hcfg, gcfg, settings,
                                     spec.seed, t))
            if progress:
                progress(t)
    for res in results:
        for m in methods:
            val = res.get(m)
            if isinstance(val, tuple):
                outcomes[m].auc_values.append(val[0])
                outcomes[m].ap_values.append(val[1])
            else:
                outcomes[m].errors.append(str(val))
    return ExperimentReport([outcomes[m] for m in methods], spec.trials,
                            config_echo or {})
