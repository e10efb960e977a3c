"""Graph classifier over extracted subgraphs, with hand-checked backprop.

Architecture: a stack of mean-propagation graph convolutions whose outputs
are concatenated, a sort-and-truncate pooling layer that turns each graph
into a fixed k-row matrix, a small 1-D convolution stack reading the pooled
rows, and a dense head with a 2-way linear output.

Everything is dense/sparse numpy in double precision. Batches are assembled
as one block-diagonal propagation matrix so graph convolutions across a
mini-batch are single sparse-dense products. Reductions run in a fixed order,
so training is bit-reproducible for a fixed seed.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import InputError
from .graph import Graph
from .rng import as_generator
from .subgraphs import EnclosingSubgraph

TRAIN_LOG_HEADER = "epoch,train_loss,val_loss,val_auc"

CHECKPOINT_VERSION = 1

MIN_SORTPOOL_K = 10  # pool-by-2 then width-5 convolution needs at least this


@dataclass(frozen=True)
class GnnConfig:
    conv_channels: tuple[int, ...] = (32, 32, 32, 1)
    sortpool_k: int | None = None          # None -> quantile rule at train time
    sortpool_quantile: float = 0.6
    conv1d_channels: tuple[int, int] = (16, 32)
    conv1d_kernel: int = 5                 # second 1-D conv; first uses the row width
    dense_width: int = 128
    epochs: int = 50
    learning_rate: float = 1e-4
    batch_size: int = 50
    seed: int = 0

    def __post_init__(self):
        if not self.conv_channels or self.conv_channels[-1] != 1:
            raise InputError("last graph-convolution layer must have exactly 1 channel")
        if self.sortpool_k is not None and self.sortpool_k < MIN_SORTPOOL_K:
            raise InputError(f"sortpool_k must be >= {MIN_SORTPOOL_K}")
        if not (0.0 < self.sortpool_quantile <= 1.0):
            raise InputError("sortpool_quantile must lie in (0, 1]")
        if self.epochs < 1 or self.batch_size < 1 or self.learning_rate <= 0:
            raise InputError("epochs, batch_size and learning_rate must be positive")


@dataclass
class GnnParams:
    conv_w: list[np.ndarray]
    conv_b: list[np.ndarray]
    k1: np.ndarray
    b1: np.ndarray
    k2: np.ndarray
    b2: np.ndarray
    dense_w: np.ndarray
    dense_b: np.ndarray
    out_w: np.ndarray
    out_b: np.ndarray
    sortpool_k: int
    feat_dim: int

    def named(self) -> list[tuple[str, np.ndarray]]:
        items = [(f"conv_w{i}", w) for i, w in enumerate(self.conv_w)]
        items += [(f"conv_b{i}", b) for i, b in enumerate(self.conv_b)]
        items += [("k1", self.k1), ("b1", self.b1), ("k2", self.k2), ("b2", self.b2),
                  ("dense_w", self.dense_w), ("dense_b", self.dense_b),
                  ("out_w", self.out_w), ("out_b", self.out_b)]
        return items

    def copy(self) -> "GnnParams":
        return GnnParams([w.copy() for w in self.conv_w],
                         [b.copy() for b in self.conv_b], self.k1.copy(),
                         self.b1.copy(), self.k2.copy(), self.b2.copy(),
                         self.dense_w.copy(), self.dense_b.copy(),
                         self.out_w.copy(), self.out_b.copy(),
                         self.sortpool_k, self.feat_dim)


def _glorot(rng: np.random.Generator, shape, fan_in, fan_out) -> np.ndarray:
    s = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-s, s, size=shape)


def init_params(config: GnnConfig, feat_dim: int, sortpool_k: int,
                rng: np.random.Generator | int) -> GnnParams:
    rng = as_generator(rng)
    if sortpool_k < MIN_SORTPOOL_K:
        raise InputError(f"sortpool k must be >= {MIN_SORTPOOL_K}")
    conv_w = []
    conv_b = []
    c_in = feat_dim
    for c_out in config.conv_channels:
        conv_w.append(_glorot(rng, (c_in, c_out), c_in, c_out))
        conv_b.append(_glorot(rng, (c_out,), c_in, c_out))
        c_in = c_out
    c_total = sum(config.conv_channels)
    f1, f2 = config.conv1d_channels
    ker = config.conv1d_kernel
    t3 = sortpool_k // 2 - (ker - 1)
    if t3 < 1:
        raise InputError("sortpool k too small for the 1-D convolution stack")
    # biases share the layer's uniform range; nonzero biases also keep fresh
    # parameters off the rectifier kink, where finite differences are moot
    k1 = _glorot(rng, (f1, c_total), c_total, f1)
    b1 = _glorot(rng, (f1,), c_total, f1)
    k2 = _glorot(rng, (f2, ker, f1), ker * f1, ker * f2)
    b2 = _glorot(rng, (f2,), ker * f1, ker * f2)
    dense_w = _glorot(rng, (t3 * f2, config.dense_width), t3 * f2, config.dense_width)
    dense_b = _glorot(rng, (config.dense_width,), t3 * f2, config.dense_width)
    out_w = _glorot(rng, (config.dense_width, 2), config.dense_width, 2)
    out_b = _glorot(rng, (2,), config.dense_width, 2)
    return GnnParams(conv_w, conv_b, k1, b1, k2, b2, dense_w, dense_b,
                     out_w, out_b, int(sortpool_k), int(feat_dim))


# ---------------------------------------------------------------------------
# Primitive ops

def propagation_matrix(g: Graph) -> sp.csr_matrix:
    """Row-normalized (A + I): each row averages a node with its neighbors."""
    n = g.n
    degs = g.degrees()
    indptr = np.zeros(n + 1, dtype=np.int64)
    indptr[1:] = np.cumsum(degs + 1)
    indices = np.empty(indptr[-1], dtype=np.int64)
    data = np.empty(indptr[-1], dtype=np.float64)
    for i in range(n):
        nbrs = g.neighbors(i)
        row = np.empty(nbrs.size + 1, dtype=np.int64)
        pos = np.searchsorted(nbrs, i)
        row[:pos] = nbrs[:pos]
        row[pos] = i
        row[pos + 1:] = nbrs[pos:]
        indices[indptr[i]:indptr[i + 1]] = row
        data[indptr[i]:indptr[i + 1]] = 1.0 / (nbrs.size + 1)
    return sp.csr_matrix((data, indices, indptr), shape=(n, n))


def graph_conv(adj: Graph | sp.spmatrix, x: np.ndarray, w: np.ndarray,
               activation=np.tanh) -> np.ndarray:
    """One propagation layer: activation(rownorm(A+I) @ X @ W).

    `activation=None` applies no nonlinearity (test hook).
    """
    x = np.asarray(x, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    p = propagation_matrix(adj) if isinstance(adj, Graph) else adj
    if x.shape[0] != p.shape[0] or w.shape[0] != x.shape[1]:
        raise InputError("graph_conv shape mismatch")
    z = p @ (x @ w)
    return z if activation is None else activation(z)


def sortpool(z: np.ndarray, k: int) -> np.ndarray:
    """Rows sorted descending by last column (ties: next-to-last column, then
    row index), truncated to k rows or zero-padded up to k."""
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 2 or z.shape[1] < 1:
        raise InputError("sortpool expects a 2-D matrix with >= 1 column")
    if k < 1:
        raise InputError("sortpool k must be >= 1")
    order = _sortpool_order(z)
    out = np.zeros((k, z.shape[1]))
    take = min(k, z.shape[0])
    out[:take] = z[order[:take]]
    return out


def _sortpool_order(z: np.ndarray) -> np.ndarray:
    n = z.shape[0]
    keys = [np.arange(n)]
    if z.shape[1] >= 2:
        keys.append(-z[:, -2])
    keys.append(-z[:, -1])
    return np.lexsort(tuple(keys))


# ---------------------------------------------------------------------------
# Dataset: compact per-subgraph storage with per-batch assembly.
#
# A training set of a few thousand extracted regions, each a few hundred
# nodes, must not hold per-node feature matrices: one-hot rows are rebuilt
# per batch from the clamped labels, and shared per-node tables (embeddings,
# attributes) are indexed rather than copied.

class SubgraphDataset:
    def __init__(self, label_cap: int, feature_table: np.ndarray | None = None):
        if label_cap < 1:
            raise InputError("label_cap must be >= 1")
        self.label_cap = int(label_cap)
        self.table = None if feature_table is None \
            else np.asarray(feature_table, dtype=np.float64)
        self._edges: list[np.ndarray] = []
        self._labels: list[np.ndarray] = []
        self._maps: list[np.ndarray] = []
        self._extras: list[np.ndarray | None] = []
        self.sizes: list[int] = []
        self.class_labels: list[int] = []
        self.had_target_edge: list[bool] = []
        self.global_targets: list[tuple[int, int]] = []
        self._eye = np.eye(self.label_cap + 1)

    def add(self, sub: EnclosingSubgraph, y: int,
            extra: np.ndarray | None = None) -> None:
        """extra: per-node rows for this subgraph only (overrides the table)."""
        if extra is not None:
            extra = np.asarray(extra, dtype=np.float64)
            if extra.shape[0] != sub.n:
                raise InputError("extra feature row count does not match the subgraph")
        self._edges.append(sub.local_graph.edges().astype(np.int32))
        self._labels.append(np.minimum(sub.labels, self.label_cap).astype(np.int16))
        self._maps.append(sub.node_map.astype(np.int32))
        self._extras.append(extra)
        self.sizes.append(sub.n)
        self.class_labels.append(int(y))
        self.had_target_edge.append(bool(sub.had_target_edge))
        gx = int(sub.node_map[sub.target[0]])
        gy = int(sub.node_map[sub.target[1]])
        self.global_targets.append((gx, gy))

    @classmethod
    def from_items(cls, items, label_cap: int | None = None) -> "SubgraphDataset":
        """items: (EnclosingSubgraph, feature-matrix, label) triples. The
        feature matrices are carried as explicit extra blocks; label one-hots
        are not rebuilt (label_cap washes out), so feat widths must agree."""
        widths = {np.asarray(x).shape[1] for _, x, _ in items}
        if len(widths) != 1:
            raise InputError("inconsistent feature widths across items")
        ds = cls(label_cap=1)
        ds._explicit = True
        for sub, x, y in items:
            ds.add(sub, y, extra=np.asarray(x, dtype=np.float64))
        return ds

    @property
    def feat_dim(self) -> int:
        if getattr(self, "_explicit", False):
            return int(self._extras[0].shape[1])
        return self.label_cap + 1 + (0 if self.table is None else self.table.shape[1])

    def __len__(self) -> int:
        return len(self.sizes)

    def assemble(self, idx) -> tuple[sp.csr_matrix, sp.csr_matrix, np.ndarray, np.ndarray]:
        """Block-diagonal propagation matrices, stacked features, and graph
        offsets for the chosen items."""
        idx = list(idx)
        sizes = np.array([self.sizes[i] for i in idx], dtype=np.int64)
        offsets = np.concatenate([[0], np.cumsum(sizes)])
        total = int(offsets[-1])
        srcs, dsts = [], []
        for pos, i in enumerate(idx):
            off = int(offsets[pos])
            e = self._edges[i].astype(np.int64) + off
            loop = np.arange(off, off + sizes[pos])
            srcs += [e[:, 0], e[:, 1], loop]
            dsts += [e[:, 1], e[:, 0], loop]
        src = np.concatenate(srcs)
        dst = np.concatenate(dsts)
        degp1 = np.bincount(src, minlength=total).astype(np.float64)
        data = 1.0 / degp1[src]
        p = sp.csr_matrix((data, (src, dst)), shape=(total, total))
        pt = sp.csr_matrix(p.T)
        if getattr(self, "_explicit", False):
            x = np.concatenate([self._extras[i] for i in idx], axis=0)
        else:
            labels_cat = np.concatenate([self._labels[i] for i in idx]).astype(np.int64)
            blocks = [self._eye[labels_cat]]
            if self.table is not None:
                maps_cat = np.concatenate([self._maps[i] for i in idx]).astype(np.int64)
                blocks.append(self.table[maps_cat])
            x = np.concatenate(blocks, axis=1) if len(blocks) > 1 else blocks[0]
        return p, pt, x, offsets


def _forward_stack(params: GnnParams, batch):
    """Full forward pass; returns logits and the cache backward needs.

    batch: (p, pt, x, offsets) as produced by SubgraphDataset.assemble.
    """
    p, pt, x, offsets = batch
    b = len(offsets) - 1
    k = params.sortpool_k

    zs = []
    z = x
    for w, bb in zip(params.conv_w, params.conv_b):
        z = np.tanh(p @ (z @ w + bb))
        zs.append(z)
    zcat = np.concatenate(zs, axis=1)
    c_total = zcat.shape[1]

    pooled = np.zeros((b, k, c_total))
    sel = []
    for gi in range(b):
        rows = zcat[offsets[gi]:offsets[gi + 1]]
        order = _sortpool_order(rows)[:k]
        pooled[gi, :order.size] = rows[order]
        sel.append(order + offsets[gi])

    a1 = np.tensordot(pooled, params.k1, axes=([2], [1])) + params.b1
    h1 = np.maximum(a1, 0.0)
    t2 = k // 2
    paired = h1[:, :2 * t2].reshape(b, t2, 2, -1)
    amax = paired.argmax(axis=2)
    h2 = np.take_along_axis(paired, amax[:, :, None, :], axis=2)[:, :, 0, :]
    ker = params.k2.shape[1]
    t3 = t2 - (ker - 1)
    windows = np.stack([h2[:, s:s + t3] for s in range(ker)], axis=2)  # (b,t3,ker,f1)
    a2 = np.tensordot(windows, params.k2, axes=([2, 3], [1, 2])) + params.b2
    h3 = np.maximum(a2, 0.0)
    v = h3.reshape(b, -1)
    dpre = v @ params.dense_w + params.dense_b
    d = np.maximum(dpre, 0.0)
    logits = d @ params.out_w + params.out_b
    cache = dict(p=p, pt=pt, x=x, offsets=offsets, zs=zs, zcat=zcat, sel=sel,
                 pooled=pooled, a1=a1, h1=h1, amax=amax, h2=h2, windows=windows,
                 a2=a2, h3=h3, v=v, dpre=dpre, d=d, t2=t2, t3=t3, ker=ker, b=b, k=k)
    return logits, cache


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _loss_and_dlogits(logits: np.ndarray, labels: np.ndarray):
    probs = _softmax(logits)
    b = logits.shape[0]
    idx = np.arange(b)
    eps_safe = np.maximum(probs[idx, labels], 1e-300)
    loss = float(-np.mean(np.log(eps_safe)))
    dlogits = probs
    dlogits[idx, labels] -= 1.0
    return loss, dlogits / b


def _backward_stack(params: GnnParams, cache: dict, dlogits: np.ndarray) -> dict:
    grads: dict[str, np.ndarray] = {}
    d, dpre, v = cache["d"], cache["dpre"], cache["v"]
    grads["out_w"] = d.T @ dlogits
    grads["out_b"] = dlogits.sum(axis=0)
    dd = dlogits @ params.out_w.T
    ddpre = dd * (dpre > 0)
    grads["dense_w"] = v.T @ ddpre
    grads["dense_b"] = ddpre.sum(axis=0)
    dv = ddpre @ params.dense_w.T
    b, t3, ker = cache["b"], cache["t3"], cache["ker"]
    dh3 = dv.reshape(b, t3, -1)
    da2 = dh3 * (cache["a2"] > 0)
    grads["k2"] = np.tensordot(da2, cache["windows"], axes=([0, 1], [0, 1]))
    grads["b2"] = da2.sum(axis=(0, 1))
    t2 = cache["t2"]
    dh2 = np.zeros_like(cache["h2"])
    for s in range(ker):
        dh2[:, s:s + t3] += da2 @ params.k2[:, s, :]
    dh1 = np.zeros_like(cache["h1"])
    dpaired = np.zeros((b, t2, 2, cache["h1"].shape[2]))
    np.put_along_axis(dpaired, cache["amax"][:, :, None, :], dh2[:, :, None, :], axis=2)
    dh1[:, :2 * t2] = dpaired.reshape(b, 2 * t2, -1)
    da1 = dh1 * (cache["a1"] > 0)
    grads["k1"] = np.tensordot(da1, cache["pooled"], axes=([0, 1], [0, 1]))
    grads["b1"] = da1.sum(axis=(0, 1))
    dpooled = da1 @ params.k1

    dzcat = np.zeros_like(cache["zcat"])
    for gi in range(b):
        take = cache["sel"][gi].size
        dzcat[cache["sel"][gi]] += dpooled[gi, :take]

    widths = [w.shape[1] for w in params.conv_w]
    splits = np.cumsum(widths)[:-1]
    dz_blocks = np.split(dzcat, splits, axis=1)
    pt = cache["pt"]
    zs = cache["zs"]
    x = cache["x"]
    dz = dz_blocks[-1]
    for t in range(len(params.conv_w) - 1, -1, -1):
        ds = dz * (1.0 - zs[t] ** 2)
        dm = pt @ ds  # gradient at Z W + b, before propagation
        below = x if t == 0 else zs[t - 1]
        grads[f"conv_w{t}"] = below.T @ dm
        grads[f"conv_b{t}"] = dm.sum(axis=0)
        if t > 0:
            dz = dz_blocks[t - 1] + dm @ params.conv_w[t].T
    return grads


def forward(items, params: GnnParams, config: GnnConfig) -> np.ndarray:
    """Logits for a batch of (EnclosingSubgraph, node-feature-matrix) pairs."""
    ds = SubgraphDataset.from_items([(sub, x, 0) for sub, x in items])
    if ds.feat_dim != params.feat_dim:
        raise InputError("feature width does not match the parameters")
    logits, _ = _forward_stack(params, ds.assemble(range(len(ds))))
    return logits


# ---------------------------------------------------------------------------
# Training

@dataclass
class TrainLogRow:
    epoch: int
    train_loss: float
    val_loss: float
    val_auc: float


@dataclass
class TrainResult:
    params: GnnParams
    log: list[TrainLogRow]
    best_epoch: int

    def log_csv(self) -> str:
        lines = [TRAIN_LOG_HEADER]
        for r in self.log:
            lines.append(f"{r.epoch},{r.train_loss:.10g},{r.val_loss:.10g},{r.val_auc:.10g}")
        return "\n".join(lines) + "\n"


def quantile_k(sizes, quantile: float) -> int:
    """Smallest k such that at least `quantile` of the sizes are <= k,
    floored at the smallest size the 1-D stack supports."""
    sizes = sorted(int(s) for s in sizes)
    if not sizes:
        raise InputError("cannot choose sortpool k from an empty training set")
    idx = math.ceil(quantile * len(sizes)) - 1
    return max(sizes[max(idx, 0)], MIN_SORTPOOL_K)


class _Adam:
    def __init__(self, names, lr):
        self.lr = lr
        self.t = 0
        self.m = {n: None for n in names}
        self.v = {n: None for n in names}

    def step(self, params_named: dict[str, np.ndarray], grads: dict[str, np.ndarray]):
        self.t += 1
        b1, b2, eps = 0.9, 0.999, 1e-8
        for name, arr in params_named.items():
            g = grads[name]
            if self.m[name] is None:
                self.m[name] = np.zeros_like(arr)
                self.v[name] = np.zeros_like(arr)
            self.m[name] = b1 * self.m[name] + (1 - b1) * g
            self.v[name] = b2 * self.v[name] + (1 - b2) * g * g
            mhat = self.m[name] / (1 - b1 ** self.t)
            vhat = self.v[name] / (1 - b2 ** self.t)
            arr -= self.lr * mhat / (np.sqrt(vhat) + eps)


def _as_dataset(data) -> SubgraphDataset:
    if isinstance(data, SubgraphDataset):
        return data
    return SubgraphDataset.from_items(list(data))


def _eval_set(params, ds: SubgraphDataset, labels, batch_size):
    losses = []
    probs = np.empty(len(ds))
    for lo in range(0, len(ds), batch_size):
        idx = range(lo, min(lo + batch_size, len(ds)))
        logits, _ = _forward_stack(params, ds.assemble(idx))
        pr = _softmax(logits)
        y = labels[lo:lo + len(pr)]
        losses.append(-np.log(np.maximum(pr[np.arange(len(pr)), y], 1e-300)))
        probs[lo:lo + len(pr)] = pr[:, 1]
    return float(np.mean(np.concatenate(losses))), probs


def train(train_data, val_data, config: GnnConfig, seed: int | np.random.Generator,
          source_graph: Graph | None = None) -> TrainResult:
    """Minimize 2-class cross-entropy with Adam; return the parameter snapshot
    with the lowest validation loss across epochs.

    train_data/val_data: SubgraphDataset, or lists of
    (EnclosingSubgraph, features, label) triples.
    If source_graph is given, every positive whose extraction did not strip an
    existing target edge is rejected: that edge would hand the label to the
    classifier.
    """
    from .pipeline import auc as auc_metric

    ds_train = _as_dataset(train_data)
    ds_val = _as_dataset(val_data)
    if not len(ds_train) or not len(ds_val):
        raise InputError("training and validation sets must be non-empty")
    labels_train = np.asarray(ds_train.class_labels)
    if np.unique(labels_train).size < 2:
        raise InputError("training set must contain both classes")
    if source_graph is not None:
        for ds in (ds_train, ds_val):
            for i in range(len(ds)):
                if ds.class_labels[i] == 1 and not ds.had_target_edge[i]:
                    gx, gy = ds.global_targets[i]
                    if source_graph.has_edge(gx, gy):
                        raise InputError(
                            f"positive pair ({gx}, {gy}) still carries its target "
                            "edge; extract positives with the edge removed")

    rng = as_generator(seed)
    k = config.sortpool_k
    if k is None:
        k = quantile_k(ds_train.sizes, config.sortpool_quantile)
    labels_val = np.asarray(ds_val.class_labels)
    params = init_params(config, ds_train.feat_dim, k, rng)
    adam = _Adam([n for n, _ in params.named()], config.learning_rate)

    best: GnnParams | None = None
    best_loss = np.inf
    best_epoch = -1
    log: list[TrainLogRow] = []
    n = len(ds_train)
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n)
        total = 0.0
        for lo in range(0, n, config.batch_size):
            idx = order[lo:lo + config.batch_size]
            logits, cache = _forward_stack(params, ds_train.assemble(idx))
            loss, dlogits = _loss_and_dlogits(logits, labels_train[idx])
            grads = _backward_stack(params, cache, dlogits)
            adam.step(dict(params.named()), grads)
            total += loss * len(idx)
        train_loss = total / n
        val_loss, val_probs = _eval_set(params, ds_val, labels_val, config.batch_size)
        val_auc = auc_metric(val_probs, labels_val) if np.unique(labels_val).size > 1 else 0.5
        log.append(TrainLogRow(epoch, train_loss, val_loss, val_auc))
        if val_loss < best_loss:
            best_loss = val_loss
            best = params.copy()
            best_epoch = epoch
    assert best is not None
    return TrainResult(best, log, best_epoch)


def predict_proba(data, params: GnnParams, config: GnnConfig,
                  batch_size: int = 50) -> np.ndarray:
    """Positive-class probability per subgraph.

    data: SubgraphDataset, or a list of (EnclosingSubgraph, features) pairs.
    """
    if not isinstance(data, SubgraphDataset):
        data = SubgraphDataset.from_items([(s, x, 0) for s, x in data])
    out = np.empty(len(data))
    for lo in range(0, len(data), batch_size):
        idx = range(lo, min(lo + batch_size, len(data)))
        logits, _ = _forward_stack(params, data.assemble(idx))
        out[lo:lo + len(idx)] = _softmax(logits)[:, 1]
    return out


# ---------------------------------------------------------------------------
# Gradient check

def gradient_check(params: GnnParams, config: GnnConfig, probe_items,
                   eps: float = 1e-5) -> float:
    """Central finite differences on every parameter entry against the
    analytic gradient; returns the max relative error with denominator
    max(|analytic|, |numeric|, 1e-8)."""
    ds = _as_dataset(probe_items)
    batch = ds.assemble(range(len(ds)))
    labels = np.asarray(ds.class_labels)

    def loss_of() -> float:
        logits, _ = _forward_stack(params, batch)
        loss, _ = _loss_and_dlogits(logits, labels)
        return loss

    logits, cache = _forward_stack(params, batch)
    _, dlogits = _loss_and_dlogits(logits, labels)
    grads = _backward_stack(params, cache, dlogits)

    worst = 0.0
    for name, arr in params.named():
        flat = arr.reshape(-1)
        gflat = grads[name].reshape(-1)
        for i in range(flat.size):
            keep = flat[i]
            flat[i] = keep + eps
            up = loss_of()
            flat[i] = keep - eps
            dn = loss_of()
            flat[i] = keep
            numeric = (up - dn) / (2 * eps)
            denom = max(abs(gflat[i]), abs(numeric), 1e-8)
            worst = max(worst, abs(gflat[i] - numeric) / denom)
    return worst


# ---------------------------------------------------------------------------
# Checkpoints

def save_checkpoint(path, params: GnnParams, config: GnnConfig) -> None:
    meta = {
        "version": CHECKPOINT_VERSION,
        "config": {
            "conv_channels": list(config.conv_channels),
            "sortpool_k": params.sortpool_k,
            "sortpool_quantile": config.sortpool_quantile,
            "conv1d_channels": list(config.conv1d_channels),
            "conv1d_kernel": config.conv1d_kernel,
            "dense_width": config.dense_width,
            "epochs": config.epochs,
            "learning_rate": config.learning_rate,
            "batch_size": config.batch_size,
            "seed": config.seed,
        },
        "feat_dim": params.feat_dim,
    }
    arrays = {name: arr for name, arr in params.named()}
    with open(path, "wb") as fh:
        np.savez(fh, meta=np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8),
                 **arrays)


def load_checkpoint(path) -> tuple[GnnParams, GnnConfig]:
    with np.load(path) as data:
        meta = json.loads(bytes(data["meta"]).decode())
        if meta.get("version") != CHECKPOINT_VERSION:
            raise InputError(f"unsupported checkpoint version {meta.get('version')}")
        cfg_d = meta["config"]
        config = GnnConfig(
            conv_channels=tuple(cfg_d["conv_channels"]),
            sortpool_k=cfg_d["sortpool_k"],
            sortpool_quantile=cfg_d["sortpool_quantile"],
            conv1d_channels=tuple(cfg_d["conv1d_channels"]),
            conv1d_kernel=cfg_d["conv1d_kernel"],
            dense_width=cfg_d["dense_width"],
            epochs=cfg_d["epochs"],
            learning_rate=cfg_d["learning_rate"],
            batch_size=cfg_d["batch_size"],
            seed=cfg_d["seed"],
        )
        n_conv = len(cfg_d["conv_channels"])
        params = GnnParams(
            conv_w=[data[f"conv_w{i}"] for i in range(n_conv)],
            conv_b=[data[f"conv_b{i}"] for i in range(n_conv)],
            k1=data["k1"], b1=data["b1"], k2=data["k2"], b2=data["b2"],
            dense_w=data["dense_w"], dense_b=data["dense_b"],
            out_w=data["out_w"], out_b=data["out_b"],
            sortpool_k=int(cfg_d["sortpool_k"]), feat_dim=int(meta["feat_dim"]),
        )
    return params, config
