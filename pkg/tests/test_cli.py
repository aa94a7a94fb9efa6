import json

import pytest

from bornforge.cli import main
from bornforge.config import load_config
from bornforge.data import load_dataset


def run_train(tmp_path, name, *extra):
    out = tmp_path / name
    code = main(["train", "--n", "2", "--epochs", "1", "--seed", "3", "--out", str(out), *extra])
    return code, out


def test_train_writes_complete_artifacts(tmp_path):
    code, out = run_train(tmp_path, "run")
    assert code == 0
    for name in ("record.json", "trace.csv", "config.json", "dataset.txt"):
        assert (out / name).exists(), name

    record = json.loads((out / "record.json").read_text())
    assert record["config"]["n"] == 2
    assert record["config"]["seed"] == 3
    assert len(record["rows"]) == 2

    cfg = load_config(out / "config.json")
    assert (cfg.n, cfg.seed, cfg.loop.epochs) == (2, 3, 1)

    samples, tspec = load_dataset(out / "dataset.txt")
    assert samples.n == 2
    assert len(samples) == cfg.data.samples
    assert tspec is not None

    lines = (out / "trace.csv").read_text().splitlines()
    assert lines[0] == "epoch,cost_train,cost_test,tv"
    assert len(lines) == 3


def test_repeated_command_gives_identical_trace(tmp_path):
    _, out_a = run_train(tmp_path, "a")
    _, out_b = run_train(tmp_path, "b")
    assert (out_a / "trace.csv").read_bytes() == (out_b / "trace.csv").read_bytes()
    rec_a = json.loads((out_a / "record.json").read_text())
    rec_b = json.loads((out_b / "record.json").read_text())
    rec_a["config"].pop("out")
    rec_b["config"].pop("out")
    assert rec_a == rec_b


def test_default_out_dir_name(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(["train", "--n", "2", "--epochs", "0", "--seed", "1"]) == 0
    assert (tmp_path / "train-n2-mmd-seed1" / "trace.csv").exists()


def test_compile_adds_report(tmp_path):
    out = tmp_path / "comp"
    code = main(["compile", "--n", "2", "--epochs", "2", "--seed", "0", "--out", str(out)])
    assert code == 0
    text = (out / "report.txt").read_text()
    assert "tv final" in text
    assert "bitstring" in text
    assert (out / "record.json").exists()


def test_cost_overrides_reach_config(tmp_path):
    _, out = run_train(tmp_path, "stein", "--cost", "stein", "--score", "spectral", "--kernel", "gaussian")
    cfg = load_config(out / "config.json")
    assert cfg.cost.kind == "stein"
    assert cfg.cost.score.method == "spectral"


def test_out_of_range_n_exits_2(tmp_path, capsys):
    assert main(["train", "--n", "30", "--out", str(tmp_path / "x")]) == 2
    assert "config error" in capsys.readouterr().err


def test_invalid_config_file_exits_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    assert main(["train", "--config", str(bad)]) == 2


def test_missing_config_file_exits_5(tmp_path):
    assert main(["train", "--config", str(tmp_path / "absent.json")]) == 5


def test_unwritable_out_path_exits_5(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    assert main(["train", "--n", "2", "--epochs", "0", "--out", str(blocker / "sub")]) == 5


def test_unknown_command_exits_2(capsys):
    assert main(["frobnicate"]) == 2
    capsys.readouterr()


def test_version_flag(capsys):
    assert main(["--version"]) == 0
    assert "bornforge" in capsys.readouterr().out


def test_threads_env_default(tmp_path, monkeypatch):
    monkeypatch.setenv("BORNFORGE_THREADS", "3")
    _, out = run_train(tmp_path, "env")
    assert load_config(out / "config.json").threads == 3


def test_threads_flag_beats_env(tmp_path, monkeypatch):
    monkeypatch.setenv("BORNFORGE_THREADS", "3")
    _, out = run_train(tmp_path, "flag", "--threads", "2")
    assert load_config(out / "config.json").threads == 2


def test_bad_threads_env_exits_2(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("BORNFORGE_THREADS", "many")
    assert main(["train", "--n", "2", "--epochs", "0", "--out", str(tmp_path / "x")]) == 2
    assert "BORNFORGE_THREADS" in capsys.readouterr().err


def test_bench_small_run_passes(capsys):
    assert main(["bench", "--n", "2", "--pairs", "3"]) == 0
    assert "all applicable bounds hold" in capsys.readouterr().out


def test_oracle_check_small_run_passes(capsys):
    assert main(["oracle-check", "--n", "2", "--trials", "2"]) == 0
    assert "all oracles agree" in capsys.readouterr().out
