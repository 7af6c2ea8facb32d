"""Command line surface: artifacts, exit codes, determinism."""

import dataclasses
import json

import numpy as np
import pytest

from absim.cli import main
from absim.scenario import ScenarioConfig
from helpers import mk_cfg


@pytest.fixture()
def tiny_config(tmp_path):
    """Config file shrunk far below defaults so CLI runs take milliseconds."""
    overrides = {
        "n_users": 20, "n_candidates": 64, "n_centroids": 8,
        "episodes": 4, "slots_per_episode": 8, "eval_episodes": 3,
        "anneal_i_max": 60,
    }
    path = tmp_path / "tiny.json"
    path.write_text(json.dumps(overrides))
    return str(path)


def test_config_dump_defaults(capsys):
    assert main(["config", "--dump-defaults"]) == 0
    got = json.loads(capsys.readouterr().out)
    assert got["n_uav"] == 3
    assert got["n_users"] == 100
    assert got["n_centroids"] == 33
    assert got["gamma_th_db"] == 5.0
    assert set(got) == {f.name for f in dataclasses.fields(ScenarioConfig)}


def test_config_resolves_file_and_seed(tiny_config, capsys):
    assert main(["config", "--config", tiny_config, "--seed", "9"]) == 0
    got = json.loads(capsys.readouterr().out)
    assert got["n_users"] == 20 and got["seed"] == 9


def test_missing_config_file_is_usage_error(capsys):
    assert main(["config", "--config", "/does/not/exist.json"]) == 2
    assert "config error" in capsys.readouterr().err


def test_unknown_config_key_is_usage_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"n_uavs": 3}')
    assert main(["train", "--config", str(bad)]) == 2
    assert "unknown" in capsys.readouterr().err


def test_invalid_method_is_argparse_error(tiny_config):
    with pytest.raises(SystemExit) as exc:
        main(["condense", "--config", tiny_config, "--method", "pca"])
    assert exc.value.code == 2


def test_missing_subcommand_is_argparse_error():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2


def test_condense_writes_graph_files(tiny_config, tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["condense", "--config", tiny_config, "--method", "qa",
                 "--out", str(out)]) == 0
    assert "distortion=" in capsys.readouterr().out
    rows = (out / "centroids.csv").read_text().strip().split("\n")
    assert len(rows) == 8 + 1
    assert (out / "edges.csv").exists()
    timings = json.loads((out / "timings.json").read_text())
    assert timings["condense_s"] >= 0.0


def test_condense_deterministic_across_invocations(tiny_config, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["condense", "--config", tiny_config, "--out", str(a)]) == 0
    assert main(["condense", "--config", tiny_config, "--out", str(b)]) == 0
    assert (a / "centroids.csv").read_bytes() == (b / "centroids.csv").read_bytes()
    assert (a / "edges.csv").read_bytes() == (b / "edges.csv").read_bytes()


def test_train_writes_full_artifact_set(tiny_config, tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["train", "--config", tiny_config, "--method", "kmeans",
                 "--out", str(out)]) == 0
    assert "network=" in capsys.readouterr().out
    for name in ("centroids.csv", "edges.csv", "learning_curve.csv",
                 "outage.csv", "trajectory.csv", "qtable.csv",
                 "timings.json", "report.json"):
        assert (out / name).exists(), name
    rep = json.loads((out / "report.json").read_text())
    assert rep["method"] == "kmeans"
    assert len(rep["reward_curve"]) == 4


def test_evaluate_requires_existing_snapshot(tiny_config, tmp_path, capsys):
    assert main(["evaluate", "--config", tiny_config, "--qtable",
                 str(tmp_path / "nope.csv"), "--out", str(tmp_path / "o")]) == 2
    assert "config error" in capsys.readouterr().err


def test_evaluate_matches_training_eval(tiny_config, tmp_path, capsys):
    out = tmp_path / "train"
    assert main(["train", "--config", tiny_config, "--out", str(out)]) == 0
    rep = json.loads((out / "report.json").read_text())
    out2 = tmp_path / "eval"
    assert main(["evaluate", "--config", tiny_config,
                 "--qtable", str(out / "qtable.csv"), "--out", str(out2)]) == 0
    ev = json.loads((out2 / "evaluation.json").read_text())
    assert ev["outage"] == rep["eval_outage"]              # byte-equal floats
    capsys.readouterr()


def test_evaluate_rejects_mismatched_snapshot(tiny_config, tmp_path, capsys):
    out = tmp_path / "train"
    assert main(["train", "--config", tiny_config, "--out", str(out)]) == 0
    other = tmp_path / "other.json"
    other.write_text(json.dumps({"n_users": 20, "n_candidates": 64,
                                 "n_centroids": 6, "episodes": 2,
                                 "slots_per_episode": 4, "eval_episodes": 2,
                                 "anneal_i_max": 40}))
    assert main(["evaluate", "--config", str(other),
                 "--qtable", str(out / "qtable.csv"),
                 "--out", str(tmp_path / "o2")]) == 2
    assert "config error" in capsys.readouterr().err


def test_sweep_row_count(tiny_config, tmp_path, capsys):
    out = tmp_path / "sweep"
    assert main(["sweep", "--config", tiny_config, "--mu", "20,40",
                 "--seeds", "1", "--out", str(out)]) == 0
    rows = (out / "sweep.csv").read_text().strip().split("\n")
    assert rows[0] == "mu_pr,seed,priority,regular,network"
    assert len(rows) == 3
    capsys.readouterr()


def test_sweep_rejects_bad_mu_list(tiny_config):
    with pytest.raises(SystemExit) as exc:
        main(["sweep", "--config", tiny_config, "--mu", "a,b"])
    assert exc.value.code == 2


def test_compare_writes_comparison_artifacts(tiny_config, tmp_path, capsys):
    out = tmp_path / "cmp"
    assert main(["compare", "--config", tiny_config, "--seeds", "1",
                 "--out", str(out)]) == 0
    rows = (out / "outage.csv").read_text().strip().split("\n")
    assert len(rows) == 1 + 3 * 3              # 3 methods x 3 classes
    timings = json.loads((out / "timings.json").read_text())
    for m in ("qa", "kmeans", "snrp"):
        assert timings[m]["0"]["condense_s"] >= 0.0
        assert timings[m]["0"]["rl_s"] > 0.0
    assert (out / "summary.md").exists()
    lc = (out / "learning_curves.csv").read_text().strip().split("\n")
    assert lc[0] == "method,seed,episode,reward,eps"
    assert len(lc) == 1 + 3 * 4                # 3 methods x 4 episodes
    capsys.readouterr()


def test_runtime_failure_exits_one(tiny_config, tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["condense", "--config", tiny_config, "--out",
                 str(blocker / "sub")]) == 1
    assert "error" in capsys.readouterr().err
