"""Command-line entry point.

Subcommands cover the full workflow: generate, split, heuristics,
decay-study, extract, train, eval, experiment. Configuration precedence is
flags > config file > defaults. Every command takes --seed, prints a
provenance line, and stamps it on its outputs; all randomness is derived from
the seed through named streams. Outputs are written atomically and removed if
the command fails partway.

Exit codes: 0 success, 1 usage, 2 data error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys

import numpy as np

from . import __version__
from . import gnn as gnn_mod
from .decay import DECAY_KINDS, error_curve
from .embeddings import embedding_from_csv, embedding_to_csv, spectral_embedding
from .errors import InputError, LinkpredError, NumericalError
from .graph import Graph, NodeIdMap, gen_synthetic, load_edge_list, save_edge_list
from .heuristics import KINDS, HeuristicConfig, score_table
from .pipeline import (METHODS, SgnnSettings, SplitSpec, auc, average_precision,
                       run_experiment, split_links)
from .rng import stream
from .subgraphs import build_node_info, extract_enclosing, load_batch, save_batch

LINKS_HEADER = "u,v,label,role"
METRICS_HEADER = "method,auc,ap"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _hash_config(obj) -> str:
    blob = json.dumps(obj, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _provenance(command: str, seed: int, config_obj) -> str:
    return (f"provenance tool=linkpred version={__version__} command={command} "
            f"config={_hash_config(config_obj)} seed={seed}")


class _Outputs:
    """Atomic writes with rollback: nothing half-written survives a failure."""

    def __init__(self):
        self.paths: list[str] = []

    def write_text(self, path, text: str):
        tmp = f"{path}.tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
        self.paths.append(str(path))

    def register(self, path):
        self.paths.append(str(path))

    def cleanup(self):
        for p in self.paths:
            for victim in (p, f"{p}.tmp"):
                try:
                    os.unlink(victim)
                except FileNotFoundError:
                    pass


# ---------------------------------------------------------------------------
# Small IO helpers

def _write_links_csv(out: _Outputs, path, rows, provenance: str):
    lines = [f"# {provenance}", LINKS_HEADER]
    lines += [f"{u},{v},{label},{role}" for u, v, label, role in rows]
    out.write_text(path, "\n".join(lines) + "\n")


def _read_links_csv(path, idmap: NodeIdMap, role: str | None = None):
    pairs, labels, roles = [], [], []
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
    if not lines or lines[0] != LINKS_HEADER:
        raise InputError(f"{path}: expected header '{LINKS_HEADER}'")
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != 4:
            raise InputError(f"{path}: bad link row {ln!r}")
        if role is not None and parts[3] != role:
            continue
        pairs.append((idmap.id_of(parts[0]), idmap.id_of(parts[1])))
        labels.append(int(parts[2]))
        roles.append(parts[3])
    return np.asarray(pairs, dtype=np.int64).reshape(-1, 2), \
        np.asarray(labels, dtype=np.int64), roles


def _read_scores_csv(path):
    from .heuristics import SCORE_CSV_HEADER
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
    if not lines or lines[0] != SCORE_CSV_HEADER:
        raise InputError(f"{path}: expected header '{SCORE_CSV_HEADER}'")
    keys, rows = {}, []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != 10:
            raise InputError(f"{path}: bad score row {ln!r}")
        keys[(parts[0], parts[1])] = len(rows)
        rows.append([float(p) for p in parts[2:]])
    return keys, np.asarray(rows)


# ---------------------------------------------------------------------------
# Experiment configuration (JSON file + flag overrides)

_CONFIG_DEFAULTS = {
    "seed": 0,
    "trials": 10,
    "jobs": 1,
    "graph": {},
    "split": {"test_fraction": 0.1, "validation_fraction_of_train": 0.1},
    "methods": ["cn", "jaccard", "pa", "aa", "ra", "katz", "pr", "sr"],
    "heuristics": {},
    "gnn": {},
    "sgnn": {},
}

_GNN_KEYS = {"conv_channels", "sortpool_k", "sortpool_quantile", "conv1d_channels",
             "conv1d_kernel", "dense_width", "epochs", "learning_rate", "batch_size"}
_SGNN_KEYS = {"force_h1", "label_cap", "max_nodes", "use_embeddings",
              "embedding_dim", "negative_injection"}
_HEUR_KEYS = {"katz_beta", "pr_alpha", "sr_gamma", "convergence_tol", "max_iter"}
_SPLIT_KEYS = {"test_fraction", "validation_fraction_of_train"}
_GRAPH_KEYS = {"path", "model", "n", "p", "m", "k", "beta"}


def _check_keys(section: str, given: dict, allowed: set[str]):
    unknown = sorted(set(given) - allowed)
    if unknown:
        raise InputError(f"unknown key(s) in config section '{section}': {unknown}")


def load_run_config(path: str | None, overrides: dict) -> dict:
    cfg = json.loads(json.dumps(_CONFIG_DEFAULTS))  # deep copy
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                user = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: invalid JSON ({exc})") from None
        _check_keys("<top>", user, set(_CONFIG_DEFAULTS))
        for key, val in user.items():
            if isinstance(cfg.get(key), dict) and isinstance(val, dict):
                cfg[key].update(val)
            else:
                cfg[key] = val
    for key, val in overrides.items():
        if val is not None:
            cfg[key] = val
    _check_keys("graph", cfg["graph"], _GRAPH_KEYS)
    _check_keys("split", cfg["split"], _SPLIT_KEYS)
    _check_keys("heuristics", cfg["heuristics"], _HEUR_KEYS)
    _check_keys("gnn", cfg["gnn"], _GNN_KEYS)
    _check_keys("sgnn", cfg["sgnn"], _SGNN_KEYS)
    for m in cfg["methods"]:
        if m not in METHODS:
            raise InputError(f"unknown method {m!r} in config")
    return cfg


def _load_graph_source(graph_cfg: dict, seed: int):
    if "path" in graph_cfg:
        if len(graph_cfg) != 1:
            raise InputError("graph config takes either 'path' or model parameters")
        return load_edge_list(graph_cfg["path"])
    if "model" in graph_cfg:
        params = {k: v for k, v in graph_cfg.items() if k != "model"}
        g = gen_synthetic(graph_cfg["model"], stream(seed, "generate"), **params)
        return g, NodeIdMap.identity(g.n)
    raise InputError("graph config needs a 'path' or a 'model'")


def _gnn_config(d: dict) -> gnn_mod.GnnConfig:
    kw = dict(d)
    for key in ("conv_channels", "conv1d_channels"):
        if key in kw:
            kw[key] = tuple(kw[key])
    return gnn_mod.GnnConfig(**kw)


def _sgnn_settings(d: dict) -> SgnnSettings:
    return SgnnSettings(**d)


# ---------------------------------------------------------------------------
# Subcommands

def _cmd_generate(args) -> int:
    params = {}
    for name in ("n", "p", "m", "k", "beta"):
        v = getattr(args, name)
        if v is not None:
            params[name] = v
    g = gen_synthetic(args.model, stream(args.seed, "generate"), **params)
    prov = _provenance("generate", args.seed, {"model": args.model, **params})
    print(prov)
    out = _Outputs()
    try:
        save_edge_list(args.out, g, provenance=prov)
        out.register(args.out)
    except Exception:
        out.cleanup()
        raise
    print(f"wrote {args.out}: n={g.n} m={g.edge_count}")
    return 0


def _cmd_split(args) -> int:
    g, idmap = load_edge_list(args.graph)
    spec = SplitSpec(test_fraction=args.test_fraction,
                     validation_fraction_of_train=args.val_fraction,
                     seed=args.seed, trials=1)
    prov = _provenance("split", args.seed, {
        "graph": args.graph, "test_fraction": args.test_fraction,
        "val_fraction": args.val_fraction, "trial": args.trial})
    print(prov)
    res = split_links(
        g, spec,
        rng_split=stream(args.seed, "split", args.trial),
        rng_neg=stream(args.seed, "negatives", args.trial),
        rng_val=stream(args.seed, "validation", args.trial),
    )
    os.makedirs(args.out_dir, exist_ok=True)
    out = _Outputs()
    try:
        gpath = os.path.join(args.out_dir, "train_graph.edges")
        save_edge_list(gpath, res.train_graph, provenance=prov)
        out.register(gpath)
        rows = []
        for ls in (res.train, res.validation, res.test):
            for (u, v), lab in zip(ls.pairs, ls.labels):
                rows.append((u, v, lab, ls.role))
        _write_links_csv(out, os.path.join(args.out_dir, "links.csv"), rows, prov)
        if not idmap.is_identity():
            lines = [f"# {prov}", "id,label"]
            lines += [f"{i},{idmap.label_of(i)}" for i in range(len(idmap))]
            out.write_text(os.path.join(args.out_dir, "nodes.csv"),
                           "\n".join(lines) + "\n")
    except Exception:
        out.cleanup()
        raise
    print(f"wrote {args.out_dir}: train graph m={res.train_graph.edge_count}, "
          f"links train={len(res.train)} val={len(res.validation)} test={len(res.test)}")
    return 0


def _heuristic_config(args) -> HeuristicConfig:
    return HeuristicConfig(katz_beta=args.katz_beta, pr_alpha=args.pr_alpha,
                           sr_gamma=args.sr_gamma, convergence_tol=args.tol,
                           max_iter=args.max_iter)


def _cmd_heuristics(args) -> int:
    g, idmap = load_edge_list(args.graph)
    pairs, _, _ = _read_links_csv(args.links, idmap, role=args.role)
    if pairs.size == 0:
        raise InputError("no link rows matched")
    cfg = _heuristic_config(args)
    prov = _provenance("heuristics", args.seed, {
        "graph": args.graph, "links": args.links, "role": args.role,
        "config": [cfg.katz_beta, cfg.pr_alpha, cfg.sr_gamma]})
    print(prov)
    table = score_table(g, pairs, cfg)
    out = _Outputs()
    try:
        out.write_text(args.out, f"# {prov}\n" + table.to_csv(idmap))
    except Exception:
        out.cleanup()
        raise
    print(f"wrote {args.out}: {len(pairs)} pairs scored")
    return 0


def _parse_h_range(text: str) -> list[int]:
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(t) for t in text.split(",")]


def _cmd_decay_study(args) -> int:
    g, idmap = load_edge_list(args.graph)
    cfg = HeuristicConfig(katz_beta=args.beta, pr_alpha=args.alpha,
                          sr_gamma=args.gamma)
    hs = _parse_h_range(args.h)
    if args.pair is not None:
        pair_list = [(idmap.id_of(args.pair[0]), idmap.id_of(args.pair[1]))]
    else:
        rng = stream(args.seed, "decay-pairs")
        pair_list = []
        while len(pair_list) < args.pairs:
            u, v = int(rng.integers(g.n)), int(rng.integers(g.n))
            if u != v and (u, v) not in pair_list and (v, u) not in pair_list:
                pair_list.append((u, v))
    prov = _provenance("decay-study", args.seed, {
        "graph": args.graph, "heuristic": args.heuristic, "h": hs,
        "pairs": pair_list})
    print(prov)
    chunks = [f"# {prov}"]
    for x, y in pair_list:
        curve = error_curve(args.heuristic, g, (x, y), hs, cfg)
        chunks.append(f"# pair {idmap.label_of(x)} {idmap.label_of(y)}")
        chunks.append(curve.to_csv().rstrip("\n"))
    out = _Outputs()
    try:
        out.write_text(args.out, "\n".join(chunks) + "\n")
    except Exception:
        out.cleanup()
        raise
    print(f"wrote {args.out}: {len(pair_list)} pair(s), h in {hs}")
    return 0


def _cmd_extract(args) -> int:
    g, idmap = load_edge_list(args.graph)
    pairs, labels, _ = _read_links_csv(args.links, idmap, role=args.role)
    embeddings = None
    if args.embeddings:
        with open(args.embeddings, "r", encoding="utf-8") as fh:
            embeddings = embedding_from_csv(fh.read(), idmap)
    attributes = None
    if args.attributes:
        with open(args.attributes, "r", encoding="utf-8") as fh:
            attributes = embedding_from_csv(fh.read(), idmap)
    prov = _provenance("extract", args.seed, {
        "graph": args.graph, "links": args.links, "hop": args.hop,
        "label_cap": args.label_cap})
    print(prov)
    items = []
    for (u, v), y in zip(pairs, labels):
        sub = extract_enclosing(g, int(u), int(v), args.hop,
                                remove_target_edge=not args.keep_target_edge,
                                max_nodes=args.max_nodes)
        extra = None
        if embeddings is not None or attributes is not None:
            blocks = []
            if embeddings is not None:
                blocks.append(embeddings[sub.node_map])
            if attributes is not None:
                blocks.append(attributes[sub.node_map])
            extra = np.concatenate(blocks, axis=1)
        items.append((sub, extra, int(y)))
    out = _Outputs()
    try:
        save_batch(args.out, items)
        out.register(args.out)
    except Exception:
        out.cleanup()
        raise
    print(f"wrote {args.out}: {len(items)} subgraphs at hop {args.hop}")
    return 0


def _batch_to_items(batch, label_cap: int):
    items = []
    for sub, extra, y in batch:
        onehot = build_node_info(sub, label_cap)
        x = onehot if extra is None else np.concatenate([onehot, extra], axis=1)
        items.append((sub, x, 0 if y is None else y))
    return items


def _cmd_train(args) -> int:
    train_items = _batch_to_items(load_batch(args.train), args.label_cap)
    val_items = _batch_to_items(load_batch(args.val), args.label_cap)
    config = gnn_mod.GnnConfig(epochs=args.epochs, learning_rate=args.lr,
                               batch_size=args.batch_size,
                               sortpool_k=args.sortpool_k, seed=args.seed)
    prov = _provenance("train", args.seed, {
        "train": args.train, "val": args.val, "epochs": args.epochs,
        "lr": args.lr, "batch_size": args.batch_size})
    print(prov)
    result = gnn_mod.train(train_items, val_items, config, stream(args.seed, "gnn"))
    out = _Outputs()
    try:
        gnn_mod.save_checkpoint(args.out, result.params, config)
        out.register(args.out)
        if args.log:
            out.write_text(args.log, f"# {prov}\n" + result.log_csv())
    except Exception:
        out.cleanup()
        raise
    print(f"wrote {args.out}: best epoch {result.best_epoch} "
          f"(val loss {result.log[result.best_epoch - 1].val_loss:.6g})")
    return 0


def _cmd_eval(args) -> int:
    prov = _provenance("eval", args.seed, {
        "scores": args.scores, "model": args.model, "subgraphs": args.subgraphs,
        "links": args.links, "role": args.role})
    print(prov)
    rows = []
    if args.scores:
        if not args.links:
            raise InputError("--scores needs --links for the labels")
        keys, mat = _read_scores_csv(args.scores)
        with open(args.links, "r", encoding="utf-8") as fh:
            lines = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
        if not lines or lines[0] != LINKS_HEADER:
            raise InputError(f"{args.links}: expected header '{LINKS_HEADER}'")
        labels = []
        idx = []
        for ln in lines[1:]:
            u, v, lab, role = ln.split(",")
            if args.role is not None and role != args.role:
                continue
            if (u, v) not in keys:
                raise InputError(f"pair ({u}, {v}) missing from the score table")
            idx.append(keys[(u, v)])
            labels.append(int(lab))
        labels = np.asarray(labels)
        sub = mat[idx]
        for j, kind in enumerate(KINDS):
            rows.append((kind, auc(sub[:, j], labels),
                         average_precision(sub[:, j], labels)))
    elif args.model:
        if not args.subgraphs:
            raise InputError("--model needs --subgraphs")
        params, config = gnn_mod.load_checkpoint(args.model)
        batch = load_batch(args.subgraphs)
        items = _batch_to_items(batch, args.label_cap)
        labels = np.asarray([y for _, _, y in items])
        probs = gnn_mod.predict_proba([(s, x) for s, x, _ in items], params, config)
        rows.append(("sgnn", auc(probs, labels), average_precision(probs, labels)))
    else:
        raise InputError("eval needs either --scores or --model")
    lines = [f"# {prov}", METRICS_HEADER]
    lines += [f"{m},{a:.10g},{p:.10g}" for m, a, p in rows]
    out = _Outputs()
    try:
        out.write_text(args.out, "\n".join(lines) + "\n")
    except Exception:
        out.cleanup()
        raise
    for m, a, p in rows:
        print(f"{m}: auc={a:.6g} ap={p:.6g}")
    return 0


def _cmd_experiment(args) -> int:
    cfg = load_run_config(args.config, {
        "seed": args.seed, "trials": args.trials, "jobs": args.jobs})
    g, _ = _load_graph_source(cfg["graph"], cfg["seed"])
    spec = SplitSpec(seed=cfg["seed"], trials=cfg["trials"], **cfg["split"])
    hcfg = HeuristicConfig(**cfg["heuristics"])
    gcfg = _gnn_config(cfg["gnn"])
    settings = _sgnn_settings(cfg["sgnn"])
    prov = _provenance("experiment", cfg["seed"], cfg)
    print(prov)

    def progress(t):
        print(f"trial {t + 1}/{cfg['trials']} done", file=sys.stderr)

    report = run_experiment(g, cfg["methods"], spec, hcfg, gcfg, settings,
                            config_echo=cfg, jobs=cfg["jobs"], progress=progress)
    os.makedirs(args.out_dir, exist_ok=True)
    out = _Outputs()
    try:
        out.write_text(os.path.join(args.out_dir, "report.csv"),
                       report.to_csv(provenance=prov))
        payload = {
            "provenance": prov,
            "config": cfg,
            "methods": [{
                "method": mo.method,
                "auc": mo.auc_values,
                "ap": mo.ap_values,
                "errors": mo.errors,
            } for mo in report.methods],
        }
        out.write_text(os.path.join(args.out_dir, "report.json"),
                       json.dumps(payload, indent=2, sort_keys=True) + "\n")
    except Exception:
        out.cleanup()
        raise
    for mo in report.methods:
        if mo.failed:
            print(f"{mo.method}: FAILED ({mo.errors[0] if mo.errors else 'no data'})")
        else:
            am, asd = mo.mean_std(mo.auc_values)
            print(f"{mo.method}: auc {am:.4f} +/- {asd:.4f}")
    return 0


def _cmd_embed(args) -> int:
    g, idmap = load_edge_list(args.graph)
    prov = _provenance("embed", args.seed, {"graph": args.graph, "dim": args.dim})
    print(prov)
    table = spectral_embedding(g, args.dim)
    out = _Outputs()
    try:
        out.write_text(args.out, f"# {prov}\n" + embedding_to_csv(table, idmap))
    except Exception:
        out.cleanup()
        raise
    print(f"wrote {args.out}: {table.shape[0]} x {table.shape[1]}")
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="linkpred", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic graph edge list")
    p.add_argument("--model", required=True,
                   choices=["erdos_renyi", "barabasi_albert", "watts_strogatz"])
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--m", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--beta", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_generate)

    p = sub.add_parser("split", help="split a graph into train graph and link sets")
    p.add_argument("--graph", required=True)
    p.add_argument("--test-fraction", type=float, default=0.1)
    p.add_argument("--val-fraction", type=float, default=0.1)
    p.add_argument("--trial", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(fn=_cmd_split)

    p = sub.add_parser("heuristics", help="score link pairs with all eight heuristics")
    p.add_argument("--graph", required=True)
    p.add_argument("--links", required=True)
    p.add_argument("--role", default=None,
                   choices=[None, "train", "validation", "test"])
    p.add_argument("--katz-beta", type=float, default=0.001)
    p.add_argument("--pr-alpha", type=float, default=0.85)
    p.add_argument("--sr-gamma", type=float, default=0.8)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--max-iter", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_heuristics)

    p = sub.add_parser("decay-study",
                       help="truncation error vs hop radius for a walk-sum score")
    p.add_argument("--graph", required=True)
    p.add_argument("--heuristic", required=True, choices=list(DECAY_KINDS))
    p.add_argument("--h", default="1..5", help="range like 1..5 or list like 1,3,5")
    p.add_argument("--pair", nargs=2, metavar=("U", "V"))
    p.add_argument("--pairs", type=int, default=1)
    p.add_argument("--beta", type=float, default=0.001)
    p.add_argument("--alpha", type=float, default=0.85)
    p.add_argument("--gamma", type=float, default=0.8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_decay_study)

    p = sub.add_parser("extract", help="extract labeled subgraphs for a link set")
    p.add_argument("--graph", required=True)
    p.add_argument("--links", required=True)
    p.add_argument("--role", default=None,
                   choices=[None, "train", "validation", "test"])
    p.add_argument("--hop", type=int, required=True)
    p.add_argument("--label-cap", type=int, default=50)
    p.add_argument("--max-nodes", type=int, default=None)
    p.add_argument("--keep-target-edge", action="store_true")
    p.add_argument("--embeddings")
    p.add_argument("--attributes")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_extract)

    p = sub.add_parser("train", help="train the subgraph classifier")
    p.add_argument("--train", required=True)
    p.add_argument("--val", required=True)
    p.add_argument("--label-cap", type=int, default=50)
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--lr", type=float, default=1e-4)
    p.add_argument("--batch-size", type=int, default=50)
    p.add_argument("--sortpool-k", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--log")
    p.set_defaults(fn=_cmd_train)

    p = sub.add_parser("eval", help="compute metrics from scores or a model")
    p.add_argument("--scores")
    p.add_argument("--links")
    p.add_argument("--role", default=None,
                   choices=[None, "train", "validation", "test"])
    p.add_argument("--model")
    p.add_argument("--subgraphs")
    p.add_argument("--label-cap", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_eval)

    p = sub.add_parser("embed", help="write spectral node embeddings")
    p.add_argument("--graph", required=True)
    p.add_argument("--dim", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_embed)

    p = sub.add_parser("experiment", help="run the full repeated-trial protocol")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(fn=_cmd_experiment)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.fn(args)
    except UsageError as exc:
        print(f'linkpred-error code=1 kind=usage msg={json.dumps(str(exc))}',
              file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f'linkpred-error code=3 kind={type(exc).__name__} '
              f'msg={json.dumps(str(exc))}', file=sys.stderr)
        return 3
    except (InputError, LinkpredError, OSError) as exc:
        print(f'linkpred-error code=2 kind={type(exc).__name__} '
              f'msg={json.dumps(str(exc))}', file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
