"""End-to-end command line pipeline: exit codes, outputs, determinism."""

import csv
import json

import numpy as np
import pytest

from kldiag import load_registry
from kldiag.cli import main

BENCH = {
    "bench": {
        "n": 2,
        "signatures": {"f1": [1.0, 0.0], "f2": [0.2, 1.0]},
        "magnitudes": {"f1": [5.0, 10.0], "f2": [5.0, 10.0]},
        "noise_cov": [[0.0025, 0.0005], [0.0005, 0.0025]],
        "samples_per_scenario": 500,
        "nf_scenarios": 2,
        "onset": 100,
    },
    "batch_size": 50,
    "mc_runs": 2,
}


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """A simulated corpus plus the config file every command reuses."""
    root = tmp_path_factory.mktemp("cli")
    config = root / "config.json"
    config.write_text(json.dumps(BENCH))
    corpus = root / "corpus.csv"
    assert main(["simulate", "--config", str(config), "--out", str(corpus)]) == 0
    return root, config, corpus


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_simulate_writes_and_protects(workspace, capsys):
    root, config, corpus = workspace
    assert corpus.exists()
    capsys.readouterr()
    # refuses to clobber without --force
    assert main(["simulate", "--config", str(config), "--out", str(corpus)]) == 1
    assert "--force" in capsys.readouterr().err
    before = corpus.read_bytes()
    assert main(["simulate", "--config", str(config), "--out", str(corpus), "--force"]) == 0
    assert corpus.read_bytes() == before  # same seed, same corpus


def test_train_writes_registry(workspace, capsys):
    root, config, corpus = workspace
    out = root / "registry.json"
    assert main(["train", str(corpus), "--config", str(config), "--out", str(out)]) == 0
    stdout = capsys.readouterr().out
    assert "threshold" in stdout
    registry, models = load_registry(out)
    assert set(registry.modes) == {"NF", "f1", "f2"}
    assert set(models) == {"NF", "f1", "f2"}
    assert all(m.threshold > 0 for m in models.values())
    # fault modes carry the merged fault-free members
    assert registry.modes["f1"].includes_nf

    again = root / "registry2.json"
    assert main(["train", str(corpus), "--config", str(config), "--out", str(again)]) == 0
    assert out.read_bytes() == again.read_bytes()


def test_analyze_reports(workspace):
    root, config, corpus = workspace
    out_dir = root / "analysis"
    assert main(["analyze", str(corpus), "--config", str(config),
                 "--out-dir", str(out_dir), "--gnuplot-script", "plot.gp"]) == 0
    rows = _read_csv(out_dir / "distinguishability.csv")
    assert rows, "report must not be empty"
    assert set(rows[0]) == {"true_class", "magnitude", "mode", "count",
                            "q10", "q25", "q50", "q75", "q90", "mean"}
    # with every pdf in its own mode the diagonal distinguishability is zero
    diag = [r for r in rows if r["true_class"] == r["mode"] == "f1"]
    assert diag and all(float(r["q50"]) == 0.0 for r in diag)
    # detecting is never harder than isolating, in the mean
    by_key = {(r["true_class"], r["magnitude"], r["mode"]): r for r in rows}
    for (true_class, magnitude, mode), row in by_key.items():
        if mode == "NF" or row["mean"] == "":
            continue
        nf_row = by_key[(true_class, magnitude, "NF")]
        assert float(row["mean"]) <= float(nf_row["mean"]) + 1e-12
    script = (out_dir / "plot.gp").read_text()
    assert "distinguishability.csv" in script and "f1" in script

    json_rows = json.loads((out_dir / "distinguishability.json").read_text())
    assert len(json_rows) == len(rows)


def test_analyze_split_mode_and_sweep(workspace):
    root, config, corpus = workspace
    out_dir = root / "analysis_split"
    assert main(["analyze", str(corpus), "--config", str(config),
                 "--out-dir", str(out_dir), "--use-split", "--sweep", "50,100"]) == 0
    sweep = _read_csv(out_dir / "batch_size_sweep.csv")
    assert {r["batch_size"] for r in sweep} == {"50", "100"}
    # held-out pdfs are not members, so the diagonal is strictly positive
    rows = _read_csv(out_dir / "distinguishability.csv")
    diag = [r for r in rows if r["true_class"] == r["mode"] == "f1" and r["q50"] != ""]
    assert diag and all(float(r["q50"]) > 0.0 for r in diag)


def test_classify_reports(workspace):
    root, config, corpus = workspace
    out_dir = root / "classify"
    assert main(["classify", str(corpus), "--config", str(config),
                 "--out-dir", str(out_dir)]) == 0
    rows = _read_csv(out_dir / "rejection_matrix.csv")
    assert set(rows[0]) == {"true_class", "magnitude", "tested_class",
                            "rejection_probability", "count", "runs"}
    assert all(r["runs"] == "2" for r in rows)
    probs = [float(r["rejection_probability"]) for r in rows]
    assert all(0.0 <= p <= 1.0 for p in probs)
    # fault-free batches rarely reject the fault-free hypothesis
    nf_rows = [r for r in rows if r["true_class"] == "NF" and r["tested_class"] == "NF"]
    assert nf_rows and float(nf_rows[0]["rejection_probability"]) <= 0.15

    lines = (out_dir / "diagnoses.jsonl").read_text().splitlines()
    docs = [json.loads(line) for line in lines]
    assert docs and {"verdict", "hypotheses", "scores"} <= set(docs[0])
    assert {d["verdict"] for d in docs} <= {"no_fault", "hypotheses", "unknown"}


def test_classify_hold_out_marks_unknown(workspace):
    root, config, corpus = workspace
    out_dir = root / "classify_holdout"
    assert main(["classify", str(corpus), "--config", str(config),
                 "--out-dir", str(out_dir), "--hold-out", "f1"]) == 0
    docs = [json.loads(line)
            for line in (out_dir / "diagnoses.jsonl").read_text().splitlines()]
    held = [d for d in docs if d["source_label"] == "f1"]
    assert held
    unknown = sum(d["verdict"] == "unknown" for d in held)
    assert unknown / len(held) >= 0.5
    assert all("f1" not in d["scores"] for d in docs)


def test_estimate_reports(workspace):
    root, config, corpus = workspace
    out_dir = root / "estimate"
    assert main(["estimate", str(corpus), "--config", str(config),
                 "--out-dir", str(out_dir)]) == 0
    rows = _read_csv(out_dir / "size_estimates.csv")
    assert set(rows[0]) == {"class", "magnitude", "count",
                            "kl_q10", "kl_q90", "mean_q10", "mean_q90"}
    assert {r["class"] for r in rows} == {"f1", "f2"}
    for row in rows:
        assert float(row["kl_q10"]) <= float(row["kl_q90"]) + 1e-12


def test_reports_are_byte_identical_across_reruns(workspace):
    root, config, corpus = workspace
    a, b = root / "rerun_a", root / "rerun_b"
    for out_dir in (a, b):
        assert main(["classify", str(corpus), "--config", str(config),
                     "--out-dir", str(out_dir)]) == 0
        assert main(["estimate", str(corpus), "--config", str(config),
                     "--out-dir", str(out_dir)]) == 0
    for name in ("rejection_matrix.csv", "rejection_matrix.json",
                 "diagnoses.jsonl", "size_estimates.csv", "size_estimates.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_exit_codes_and_error_channels(tmp_path, capsys):
    # usage problems (argparse or config) exit 1
    assert main(["frobnicate"]) == 1
    assert main(["train", str(tmp_path / "missing.csv"), "--alpha", "0.9"]) == 1
    capsys.readouterr()
    # data problems exit 2
    assert main(["train", str(tmp_path / "missing.csv")]) == 2
    assert "no such file" in capsys.readouterr().err
    bad = tmp_path / "bad.csv"
    bad.write_text("t,r1,label,theta\n0,oops,NF,0.0\n")
    assert main(["train", str(bad)]) == 2

    assert main(["train", str(bad), "--json-errors"]) == 2
    doc = json.loads(capsys.readouterr().err.splitlines()[-1])
    assert doc["error"]["type"] == "data"
    assert "line" in doc["error"]["message"]


def test_config_file_validation(tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"alpha": 0.05, "bogus_knob": 1}))
    assert main(["analyze", str(tmp_path / "x.csv"), "--config", str(config)]) == 1
    config.write_text("not json")
    assert main(["analyze", str(tmp_path / "x.csv"), "--config", str(config)]) == 1
    config.write_text(json.dumps({"batch_size": 1}))
    assert main(["analyze", str(tmp_path / "x.csv"), "--config", str(config)]) == 1
