"""Command-line interface: exit codes, artefacts, reruns."""

import json
import os

import numpy as np
import pytest

from vhslice.channel import write_se_trace
from vhslice.cli import main
from vhslice.traffic import write_haptic_trace


def micro_config_file(tmp_path, **trial_over):
    trial = {"pairs": 2, "trial_ttis": 300, "warmup_ttis": 100,
             "training_ttis": 300, "eval_seeds": [101]}
    trial.update(trial_over)
    doc = {
        "trial": trial,
        "sac": {"hidden": [8, 8], "learning_rate": 1e-3, "batch_size": 8,
                "buffer_capacity": 512, "update_start": 8},
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(doc))
    return str(path)


def test_version_exits_zero(capsys):
    assert main(["--version"]) == 0
    assert capsys.readouterr().out.strip()


def test_missing_config_is_usage_error(tmp_path, capsys):
    code = main(["train", "--config", str(tmp_path / "absent.json"),
                 "--out-dir", str(tmp_path)])
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_invalid_config_value_is_usage_error(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"trial": {"pairs": 0}}))
    code = main(["train", "--config", str(path),
                 "--out-dir", str(tmp_path)])
    assert code == 2


def test_unknown_sweep_name_is_usage_error(tmp_path):
    assert main(["sweep", "--name", "nope", "--out-dir", str(tmp_path)]) == 2


def test_train_writes_artifacts(tmp_path, capsys):
    cfg = micro_config_file(tmp_path)
    out = str(tmp_path / "run")
    code = main(["train", "--config", cfg, "--out-dir", out,
                 "--t-slice", "50", "--seed", "3"])
    assert code == 0
    assert os.path.exists(os.path.join(out, "training_log.csv"))
    assert os.path.exists(os.path.join(out, "checkpoint", "meta.json"))
    with open(os.path.join(out, "manifest.json")) as fh:
        doc = json.load(fh)
    assert doc["command"] == "train"
    assert doc["config"]["trial"]["t_slice_ms"] == 50
    assert doc["config"]["trial"]["seed"] == 3


def test_eval_fixed_split(tmp_path, capsys):
    cfg = micro_config_file(tmp_path)
    out = str(tmp_path / "run")
    code = main(["eval", "--config", cfg, "--out-dir", out,
                 "--eval-seed", "101", "--kpi-log"])
    assert code == 0
    msg = capsys.readouterr().out
    assert "fixed even split" in msg
    assert os.path.exists(os.path.join(out, "kpi_seed101.csv"))


def test_eval_from_checkpoint(tmp_path, capsys):
    cfg = micro_config_file(tmp_path)
    out = str(tmp_path / "run")
    assert main(["train", "--config", cfg, "--out-dir", out]) == 0
    code = main(["eval", "--config", cfg, "--out-dir", out,
                 "--checkpoint", os.path.join(out, "checkpoint"),
                 "--eval-seed", "101"])
    assert code == 0
    assert "agent" in capsys.readouterr().out


def test_sweep_and_rerun_byte_identical(tmp_path, capsys):
    cfg = micro_config_file(tmp_path, training_ttis=0)
    out1 = str(tmp_path / "a")
    code = main(["sweep", "--name", "se", "--config", cfg,
                 "--out-dir", out1, "--sweep-seed", "5"])
    assert code == 0
    results1 = os.path.join(out1, "results.csv")
    assert os.path.exists(results1)
    assert os.path.exists(os.path.join(out1, "se.svg"))

    out2 = str(tmp_path / "b")
    code = main(["rerun", os.path.join(out1, "manifest.json"),
                 "--out-dir", out2])
    assert code == 0
    with open(results1, "rb") as fh:
        first = fh.read()
    with open(os.path.join(out2, "results.csv"), "rb") as fh:
        second = fh.read()
    assert first == second


def test_rerun_rejects_non_sweep_manifest(tmp_path, capsys):
    cfg = micro_config_file(tmp_path)
    out = str(tmp_path / "run")
    assert main(["train", "--config", cfg, "--out-dir", out]) == 0
    code = main(["rerun", os.path.join(out, "manifest.json"),
                 "--out-dir", str(tmp_path / "c")])
    assert code == 2


def test_validate_trace_reports(tmp_path, capsys):
    haptic = str(tmp_path / "h.csv")
    write_haptic_trace(haptic, np.arange(50, dtype=float), np.full(50, 64))
    se = str(tmp_path / "se.csv")
    write_se_trace(se, np.full((20, 3), 5.0))
    code = main(["validate-trace", "--haptic", haptic, "--se", se])
    assert code == 0
    msg = capsys.readouterr().out
    assert "50 samples" in msg
    assert "3 links" in msg


def test_validate_trace_rejects_malformed(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    path.write_text("timestamp_ms,payload_bits\n5.0,64\n1.0,64\n")
    code = main(["validate-trace", "--haptic", str(path)])
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_validate_trace_needs_an_input(capsys):
    assert main(["validate-trace"]) == 2


def test_plot_from_results(tmp_path):
    cfg = micro_config_file(tmp_path, training_ttis=0)
    out = str(tmp_path / "run")
    assert main(["sweep", "--name", "se", "--config", cfg, "--out-dir", out,
                 "--sweep-seed", "5"]) == 0
    svg = str(tmp_path / "fig.svg")
    code = main(["plot", "--results", os.path.join(out, "results.csv"),
                 "--out", svg])
    assert code == 0
    assert os.path.exists(svg)


def test_plot_needs_an_input(tmp_path, capsys):
    assert main(["plot", "--out", str(tmp_path / "x.svg")]) == 2


def test_plot_training_log(tmp_path):
    cfg = micro_config_file(tmp_path)
    out = str(tmp_path / "run")
    assert main(["train", "--config", cfg, "--out-dir", out]) == 0
    svg = str(tmp_path / "train.svg")
    code = main(["plot", "--training-log",
                 os.path.join(out, "training_log.csv"), "--out", svg])
    assert code == 0
    assert os.path.exists(svg)
