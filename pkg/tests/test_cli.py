import json

import numpy as np
import pytest

from linkpred.cli import main
from linkpred.graph import load_edge_list


def run(argv):
    return main([str(a) for a in argv])


def read_csv_rows(path, header):
    lines = [ln for ln in path.read_text().splitlines()
             if ln and not ln.startswith("#")]
    assert lines[0] == header, lines[0]
    return [ln.split(",") for ln in lines[1:]]


def test_generate_and_reload(tmp_path, capsys):
    out = tmp_path / "g.edges"
    code = run(["generate", "--model", "erdos_renyi", "--n", 20, "--p", 0.3,
                "--seed", 5, "--out", out])
    assert code == 0
    text = out.read_text()
    assert text.startswith("# provenance tool=linkpred")
    g, _ = load_edge_list(out)
    assert g.n == 20
    printed = capsys.readouterr().out
    assert "provenance" in printed and "seed=5" in printed


def test_generate_deterministic(tmp_path):
    a, b = tmp_path / "a.edges", tmp_path / "b.edges"
    run(["generate", "--model", "barabasi_albert", "--n", 30, "--m", 2,
         "--seed", 9, "--out", a])
    run(["generate", "--model", "barabasi_albert", "--n", 30, "--m", 2,
         "--seed", 9, "--out", b])
    assert a.read_bytes() == b.read_bytes()


def test_generate_bad_params_exit_2(tmp_path, capsys):
    code = run(["generate", "--model", "erdos_renyi", "--n", 10, "--p", 2.0,
                "--out", tmp_path / "g.edges"])
    assert code == 2
    err = capsys.readouterr().err
    assert err.startswith("linkpred-error code=2")
    assert "\n" not in err.strip()


def test_usage_error_exit_1(capsys):
    assert run(["generate", "--model", "nonsense", "--out", "x"]) == 1
    assert capsys.readouterr().err.startswith("linkpred-error code=1")


def test_split_outputs(tmp_path):
    g = tmp_path / "g.edges"
    run(["generate", "--model", "erdos_renyi", "--n", 30, "--p", 0.25,
         "--seed", 3, "--out", g])
    out = tmp_path / "split"
    assert run(["split", "--graph", g, "--seed", 4, "--out-dir", out]) == 0
    rows = read_csv_rows(out / "links.csv", "u,v,label,role")
    roles = {r[3] for r in rows}
    assert roles == {"train", "validation", "test"}
    tg, _ = load_edge_list(out / "train_graph.edges")
    n_test_pos = sum(1 for r in rows if r[3] == "test" and r[2] == "1")
    n_test_neg = sum(1 for r in rows if r[3] == "test" and r[2] == "0")
    assert n_test_pos == n_test_neg > 0


def test_heuristics_and_eval_round(tmp_path):
    g = tmp_path / "g.edges"
    run(["generate", "--model", "barabasi_albert", "--n", 40, "--m", 2,
         "--seed", 6, "--out", g])
    out = tmp_path / "split"
    run(["split", "--graph", g, "--seed", 7, "--out-dir", out])
    scores = tmp_path / "scores.csv"
    assert run(["heuristics", "--graph", out / "train_graph.edges",
                "--links", out / "links.csv", "--role", "test",
                "--out", scores]) == 0
    rows = read_csv_rows(scores, "u,v,cn,jaccard,pa,aa,ra,katz,pr,sr")
    assert all(len(r) == 10 for r in rows)
    metrics = tmp_path / "metrics.csv"
    assert run(["eval", "--scores", scores, "--links", out / "links.csv",
                "--role", "test", "--out", metrics]) == 0
    mrows = read_csv_rows(metrics, "method,auc,ap")
    assert [r[0] for r in mrows] == list(
        ("cn", "jaccard", "pa", "aa", "ra", "katz", "pr", "sr"))
    for r in mrows:
        assert 0.0 <= float(r[1]) <= 1.0


def test_decay_study_katz(tmp_path):
    g = tmp_path / "g.edges"
    run(["generate", "--model", "erdos_renyi", "--n", 40, "--p", 0.12,
         "--seed", 8, "--out", g])
    curve = tmp_path / "curve.csv"
    assert run(["decay-study", "--graph", g, "--heuristic", "katz",
                "--beta", 0.005, "--h", "1..5", "--seed", 9,
                "--out", curve]) == 0
    rows = read_csv_rows(curve, "h,approx,exact,abs_error,bound")
    assert len(rows) == 5
    for r in rows:
        assert float(r[3]) <= float(r[4]) + 1e-12  # error within bound


def test_extract_train_eval_model(tmp_path):
    g = tmp_path / "g.edges"
    run(["generate", "--model", "barabasi_albert", "--n", 40, "--m", 2,
         "--seed", 10, "--out", g])
    out = tmp_path / "split"
    run(["split", "--graph", g, "--seed", 11, "--out-dir", out])
    tr, va, te = tmp_path / "tr.jsonl", tmp_path / "va.jsonl", tmp_path / "te.jsonl"
    for role, path in (("train", tr), ("validation", va), ("test", te)):
        assert run(["extract", "--graph", out / "train_graph.edges",
                    "--links", out / "links.csv", "--role", role,
                    "--hop", 1, "--out", path]) == 0
    model, log = tmp_path / "m.npz", tmp_path / "log.csv"
    assert run(["train", "--train", tr, "--val", va, "--epochs", 3,
                "--lr", 0.001, "--batch-size", 20, "--seed", 12,
                "--out", model, "--log", log]) == 0
    assert read_csv_rows(log, "epoch,train_loss,val_loss,val_auc")
    metrics = tmp_path / "metrics.csv"
    assert run(["eval", "--model", model, "--subgraphs", te,
                "--out", metrics]) == 0
    mrows = read_csv_rows(metrics, "method,auc,ap")
    assert mrows[0][0] == "sgnn"


def test_embed_command(tmp_path):
    g = tmp_path / "g.edges"
    run(["generate", "--model", "erdos_renyi", "--n", 15, "--p", 0.4,
         "--seed", 13, "--out", g])
    emb = tmp_path / "emb.csv"
    assert run(["embed", "--graph", g, "--dim", 4, "--out", emb]) == 0
    header = [ln for ln in emb.read_text().splitlines()
              if not ln.startswith("#")][0]
    assert header == "node_label,v0,v1,v2,v3"


def _experiment_config(tmp_path, trials=2):
    cfg = {
        "seed": 21,
        "trials": trials,
        "graph": {"model": "erdos_renyi", "n": 40, "p": 0.2},
        "methods": ["cn", "aa", "katz"],
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path


def test_experiment_runs_and_summarises(tmp_path):
    cfg = _experiment_config(tmp_path)
    out = tmp_path / "run"
    assert run(["experiment", "--config", cfg, "--out-dir", out]) == 0
    text = (out / "report.csv").read_text()
    assert text.startswith("# provenance")
    assert "method,trial,auc,ap" in text
    assert "method,auc_mean,auc_std,ap_mean,ap_std" in text
    payload = json.loads((out / "report.json").read_text())
    assert payload["config"]["seed"] == 21
    assert {m["method"] for m in payload["methods"]} == {"cn", "aa", "katz"}


def test_experiment_byte_identical_reports(tmp_path):
    cfg = _experiment_config(tmp_path)
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    run(["experiment", "--config", cfg, "--out-dir", out1])
    run(["experiment", "--config", cfg, "--out-dir", out2])
    assert (out1 / "report.csv").read_bytes() == (out2 / "report.csv").read_bytes()


def test_experiment_flag_overrides_config(tmp_path):
    cfg = _experiment_config(tmp_path, trials=5)
    out = tmp_path / "run"
    run(["experiment", "--config", cfg, "--trials", 1, "--out-dir", out])
    rows = [ln for ln in (out / "report.csv").read_text().splitlines()
            if ln.startswith("cn,")]
    assert len(rows) == 2  # one trial row plus the summary row


def test_experiment_unknown_config_key_rejected(tmp_path, capsys):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"seed": 1, "graph": {"model": "erdos_renyi",
                                "n": 10, "p": 0.2}, "mystery": True}))
    assert run(["experiment", "--config", path, "--out-dir", tmp_path / "o"]) == 2
    assert "mystery" in capsys.readouterr().err


def test_missing_file_exit_2(tmp_path):
    assert run(["heuristics", "--graph", tmp_path / "nope.edges",
                "--links", tmp_path / "nope.csv",
                "--out", tmp_path / "s.csv"]) == 2


def test_composability_matches_experiment(tmp_path):
    """split + heuristics + eval reproduces the experiment's trial-0 numbers."""
    seed = 33
    gpath = tmp_path / "g.edges"
    run(["generate", "--model", "barabasi_albert", "--n", 50, "--m", 2,
         "--seed", seed, "--out", gpath])

    cfg = {
        "seed": seed,
        "trials": 1,
        "graph": {"path": str(gpath)},
        "methods": ["cn", "aa"],
    }
    cfgpath = tmp_path / "c.json"
    cfgpath.write_text(json.dumps(cfg))
    outdir = tmp_path / "exp"
    run(["experiment", "--config", cfgpath, "--out-dir", outdir])
    report_rows = read_csv_rows(outdir / "report.csv", "method,trial,auc,ap")
    exp_auc = {r[0]: r[2] for r in report_rows if r[1] == "0"}

    split_dir = tmp_path / "split"
    run(["split", "--graph", gpath, "--seed", seed, "--trial", 0,
         "--out-dir", split_dir])
    scores = tmp_path / "scores.csv"
    run(["heuristics", "--graph", split_dir / "train_graph.edges",
         "--links", split_dir / "links.csv", "--role", "test",
         "--out", scores])
    metrics = tmp_path / "metrics.csv"
    run(["eval", "--scores", scores, "--links", split_dir / "links.csv",
         "--role", "test", "--out", metrics])
    piped_auc = {r[0]: r[1] for r in read_csv_rows(metrics, "method,auc,ap")}
    for m in ("cn", "aa"):
        assert piped_auc[m] == exp_auc[m]


def test_failed_command_leaves_no_partial_output(tmp_path):
    # scoring fails midway (links reference labels missing from the graph)
    g1 = tmp_path / "g1.edges"
    run(["generate", "--model", "erdos_renyi", "--n", 10, "--p", 0.4,
         "--seed", 1, "--out", g1])
    links = tmp_path / "links.csv"
    links.write_text("u,v,label,role\n900,901,1,test\n")
    out = tmp_path / "scores.csv"
    assert run(["heuristics", "--graph", g1, "--links", links,
                "--out", out]) == 2
    assert not out.exists()
