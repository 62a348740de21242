"""End-to-end runs of the command line against temp files.

Everything goes through main() in-process so coverage and error paths are
observable without subprocess overhead; one test shells out for real to
prove the entry point is wired up.
"""

import json
import subprocess
import sys

import numpy as np
import pytest

from homemb import load_or_build, read_embedding
from homemb.cli import main
from homemb.graphs import write_edge_list, write_feature_csv, write_labels

from conftest import SEVEN_EDGES


@pytest.fixture
def seven_paths(tmp_path):
    g = load_or_build(7, SEVEN_EDGES)
    epath = tmp_path / "seven.edges"
    write_edge_list(g, epath)
    return tmp_path, epath


def run(argv):
    return main([str(a) for a in argv])


def test_patterns_listing(capsys):
    assert run(["patterns", "--kind", "cycles", "--max-order", "10"]) == 0
    out = capsys.readouterr().out
    lines = [l for l in out.splitlines() if l.strip() and not l.startswith("#")]
    assert len(lines) == 8
    assert lines[0].startswith("C3")
    assert lines[-1].startswith("C10")


def test_unknown_flag_exits_one(capsys):
    assert run(["patterns", "--no-such-flag"]) == 1
    assert "usage" in capsys.readouterr().err.lower()


def test_no_subcommand_exits_one():
    assert run([]) == 1


def test_embed_reference_graph(seven_paths, capsys):
    tmp, epath = seven_paths
    out = tmp / "emb.csv"
    code = run(["embed", "--graph", epath, "--family", "cycles:3",
                "--family", "paths:3", "--out", out])
    assert code == 0
    e = read_embedding(out)
    assert e.column("C3:ch0")[0] == 2.0
    assert e.column("P3:ch0")[0] == 7.0
    assert e.column("P3:ch0")[2] == 8.0


def test_embed_binary_format(seven_paths):
    tmp, epath = seven_paths
    out = tmp / "emb.bin"
    assert run(["embed", "--graph", epath, "--family", "cycles:4",
                "--format", "binary", "--out", out]) == 0
    e = read_embedding(out)
    assert list(e.column_labels) == ["C3:ch0", "C4:ch0"]


def test_embed_tensor_with_features(seven_paths):
    tmp, epath = seven_paths
    fpath = tmp / "f.csv"
    write_feature_csv(np.array([[0.0, 1.0]] * 3 + [[2.0, 1.0]] * 4), fpath)
    out = tmp / "emb.csv"
    assert run(["embed", "--graph", epath, "--features", fpath, "--tensor",
                "--family", "cycles:4", "--out", out]) == 0
    e = read_embedding(out)
    # two channels, two cycle orders
    assert list(e.column_labels) == ["C3:ch0", "C4:ch0", "C3:ch1", "C4:ch1"]


def test_embed_density_and_log_conflict(seven_paths):
    tmp, epath = seven_paths
    code = run(["embed", "--graph", epath, "--family", "cycles:3",
                "--density", "--log", "--out", tmp / "x.csv"])
    assert code == 1


def test_embed_missing_graph_file_exits_two(tmp_path):
    assert run(["embed", "--graph", tmp_path / "nope.edges",
                "--family", "cycles:3", "--out", tmp_path / "x.csv"]) == 2


def test_embed_malformed_family_exits_one(seven_paths):
    tmp, epath = seven_paths
    assert run(["embed", "--graph", epath, "--family", "heptagons:3",
                "--out", tmp / "x.csv"]) == 1


def test_embed_writes_resolved_config(seven_paths):
    tmp, epath = seven_paths
    out = tmp / "emb.csv"
    assert run(["embed", "--graph", epath, "--family", "cycles:3",
                "--out", out]) == 0
    resolved = json.loads((tmp / "run.resolved.json").read_text())
    assert resolved["command"] == "embed"
    assert resolved["families"] == ["cycles:3(1)"]
    assert "version" in resolved


def test_oracle_single_node(seven_paths, capsys):
    tmp, epath = seven_paths
    assert run(["oracle", "--graph", epath, "--pattern", "C3",
                "--node", "1"]) == 0
    out = capsys.readouterr().out
    assert "4" in out.split()[-1]


def test_oracle_all_nodes(seven_paths, capsys):
    tmp, epath = seven_paths
    assert run(["oracle", "--graph", epath, "--pattern", "P3"]) == 0
    nums = [l.split()[-1] for l in capsys.readouterr().out.splitlines() if l.strip()]
    assert nums == ["7", "10", "8", "7", "8", "3", "5"]


def test_oracle_size_guard_exits_three(tmp_path):
    g = load_or_build(30, [(i, i + 1) for i in range(29)])
    epath = tmp_path / "p.edges"
    write_edge_list(g, epath)
    assert run(["oracle", "--graph", epath, "--pattern", "P7"]) == 3


def test_gen_sbm_writes_dataset(tmp_path):
    out = tmp_path / "ds"
    assert run(["gen-sbm", "--kind", "cluster", "--graphs", "3",
                "--nodes", "12:16", "--communities", "2",
                "--p", "0.6", "--q", "0.2", "--seed", "5", "--out", out]) == 0
    meta = json.loads((out / "meta.json").read_text())
    assert meta["num_graphs"] == 3
    assert (out / "graph_0.edges").exists()
    assert (out / "graph_2.labels").exists()


def test_gen_sbm_bad_probability_exits_two(tmp_path):
    assert run(["gen-sbm", "--kind", "cluster", "--graphs", "2",
                "--nodes", "10:12", "--communities", "2",
                "--p", "0.2", "--q", "0.6", "--seed", "1",
                "--out", tmp_path / "ds"]) == 2


def test_evaluate_round_trip(tmp_path, seven_paths):
    tmp, epath = seven_paths
    # tiny dataset: drive embed then evaluate on made-up labels
    emb = tmp_path / "e.csv"
    assert run(["embed", "--graph", epath, "--family", "paths:4",
                "--out", emb]) == 0
    labels = tmp_path / "y.labels"
    write_labels([0, 1, 0, 1, 0, 1, 0], labels)
    report = tmp_path / "report.json"
    assert run(["evaluate", "--embeddings", emb, "--labels", labels,
                "--folds", "2", "--reps", "1", "--trees", "5",
                "--seed", "0", "--report", report]) == 0
    data = json.loads(report.read_text())
    assert set(data) >= {"accuracy_mean", "accuracy_std",
                         "weighted_accuracy_mean", "per_fold", "importances"}
    assert len(data["per_fold"]) == 2


def test_evaluate_length_mismatch_exits_two(tmp_path, seven_paths):
    tmp, epath = seven_paths
    emb = tmp_path / "e.csv"
    run(["embed", "--graph", epath, "--family", "paths:3", "--out", emb])
    labels = tmp_path / "y.labels"
    write_labels([0, 1], labels)
    assert run(["evaluate", "--embeddings", emb, "--labels", labels,
                "--folds", "2", "--reps", "1", "--trees", "3",
                "--report", tmp_path / "r.json"]) == 2


def test_pipeline_end_to_end(tmp_path):
    out = tmp_path / "run"
    code = run(["pipeline", "--gen", "cluster", "--graphs", "6",
                "--nodes", "10:14", "--communities", "2",
                "--p", "0.7", "--q", "0.2", "--data-seed", "3",
                "--family", "cycles:4", "--tensor",
                "--folds", "2", "--reps", "1", "--trees", "5",
                "--seed", "1", "--threads", "1", "--out", out])
    assert code == 0
    assert (out / "embeddings.csv").exists()
    report = json.loads((out / "report.json").read_text())
    assert 0.0 <= report["weighted_accuracy_mean"] <= 1.0
    resolved = json.loads((out / "run.resolved.json").read_text())
    assert resolved["command"] == "pipeline"


def test_pipeline_determinism(tmp_path):
    args = ["pipeline", "--gen", "cluster", "--graphs", "4",
            "--nodes", "10:12", "--communities", "2",
            "--p", "0.7", "--q", "0.2", "--data-seed", "3",
            "--family", "cycles:4",
            "--folds", "2", "--reps", "1", "--trees", "5",
            "--seed", "1", "--threads", "1"]
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(args + ["--out", a]) == 0
    assert run(args + ["--out", b]) == 0
    assert (a / "embeddings.csv").read_bytes() == (b / "embeddings.csv").read_bytes()
    assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()


def test_pipeline_needs_dataset_or_gen(tmp_path):
    assert run(["pipeline", "--family", "cycles:3", "--out", tmp_path / "x"]) == 1


def test_console_entry_point(seven_paths):
    tmp, epath = seven_paths
    out = tmp / "emb.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "homemb.cli", "embed", "--graph", str(epath),
         "--family", "cycles:3", "--out", str(out)],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert out.exists()
