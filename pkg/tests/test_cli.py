import csv
import json

import numpy as np
import pytest
import tomli

from nepwave import cli
from nepwave.dynamics import Trainables
from nepwave.tasks import write_idx


def run(*argv):
    return cli.main(list(argv))


def test_train_writes_artifacts_and_is_reproducible(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run("train", "--task", "xor9", "--epochs", "3", "--out-dir", str(a)) == 0
    assert run("train", "--task", "xor9", "--epochs", "3", "--out-dir", str(b)) == 0
    for name in ("metrics.csv", "checkpoint.json", "report.txt", "config.toml"):
        assert (a / name).exists()
    rows = list(csv.DictReader(open(a / "metrics.csv")))
    assert [r["epoch"] for r in rows] == ["1", "2", "3"]
    assert list(rows[0]) == cli.METRIC_FIELDS
    strip = lambda p: [r[:-1] for r in csv.reader(open(p))]  # wall time differs
    assert strip(a / "metrics.csv") == strip(b / "metrics.csv")
    assert (a / "checkpoint.json").read_text() == (b / "checkpoint.json").read_text()


def test_resolved_config_reruns_identically(tmp_path):
    a = tmp_path / "a"
    run("train", "--task", "xor9-v", "--epochs", "2", "--seed", "4", "--out-dir", str(a))
    cfg = tomli.loads((a / "config.toml").read_text())
    assert cfg["run"]["seed"] == 4 and cfg["train"]["train_w"] is False
    b = tmp_path / "b"
    assert run("train", "--config", str(a / "config.toml"), "--out-dir", str(b)) == 0
    assert (a / "checkpoint.json").read_text() == (b / "checkpoint.json").read_text()


def test_checkpoint_roundtrip_byte_identical(tmp_path):
    rng = np.random.default_rng(3)
    tr = Trainables(rng.normal(size=9), rng.normal(size=2))
    p1, p2 = tmp_path / "c1.json", tmp_path / "c2.json"
    cli.save_checkpoint(p1, tr, 7, rng.bit_generator.state, "abc", None)
    doc = cli.load_checkpoint(p1)
    cli.save_checkpoint(p2, Trainables(np.array(doc["V"]), np.array(doc["w"])), doc["epoch"], doc["rng_state"],
                        doc["config_digest"], doc["pca"])
    assert p1.read_bytes() == p2.read_bytes()
    assert np.array_equal(np.array(doc["V"]), tr.V)
    restored = np.random.default_rng()
    restored.bit_generator.state = doc["rng_state"]
    assert restored.random() == rng.random()


def test_eval_replays_training_result_and_refuses_mismatch(tmp_path, capsys):
    d = tmp_path / "r"
    run("train", "--task", "xor9", "--epochs", "2", "--out-dir", str(d))
    capsys.readouterr()
    assert run("eval", "--task", "xor9", "--out-dir", str(d), "--checkpoint", str(d / "checkpoint.json")) == 0
    out = json.loads((d / "eval.json").read_text())
    report = (d / "report.txt").read_text().splitlines()
    table = [float(l.split()[-1]) for l in report if l.startswith("(")]
    assert np.allclose(out["outputs"], table, atol=5e-4)
    assert run("eval", "--task", "xor9", "--g", "0.2", "--out-dir", str(d),
               "--checkpoint", str(d / "checkpoint.json")) == cli.EXIT_FAILED
    assert "digest" in capsys.readouterr().err
    assert run("eval", "--task", "xor9", "--g", "0.2", "--force", "--out-dir", str(d),
               "--checkpoint", str(d / "checkpoint.json")) == 0


def test_bad_checkpoint_and_config(tmp_path, capsys):
    bad = tmp_path / "x.json"
    bad.write_text('{"format": "other"}')
    assert run("eval", "--task", "xor9", "--out-dir", str(tmp_path), "--checkpoint", str(bad)) != 0
    cfg = tmp_path / "c.toml"
    cfg.write_text('[train]\nbogus = 1\n')
    assert run("train", "--config", str(cfg), "--out-dir", str(tmp_path)) == cli.EXIT_USAGE
    assert "bogus" in capsys.readouterr().err
    assert run("train", "--task", "xor9", "--batch-size", "0", "--out-dir", str(tmp_path)) == cli.EXIT_USAGE


def test_env_overrides():
    env = {"NEPWAVE_TRAIN_EPOCHS": "7", "NEPWAVE_GPE_G": "0.02", "NEPWAVE_TRAIN_LR_V": "0.5", "OTHER": "1"}
    cfg = cli.resolve_config("xor9", environ=env, flags={"train": {"epochs": 9}})
    assert cfg["train"]["epochs"] == 9 and cfg["gpe"]["g"] == 0.02 and cfg["train"]["lr_V"] == 0.5


def test_divergence_exit_code_keeps_partial_metrics(tmp_path):
    d = tmp_path / "div"
    code = run("train", "--task", "xor9", "--epochs", "3", "--dt", "3.0", "--out-dir", str(d))
    assert code == cli.EXIT_DIVERGED
    assert (d / "metrics.csv").read_text().startswith("epoch,")


def test_v_noise_is_frozen_and_seeded():
    cfg = cli.resolve_config("xor9", flags={"task": {"v_noise": 0.05}})
    _, p1, _ = cli.build_task(cfg)
    _, p2, _ = cli.build_task(cfg)
    assert np.array_equal(p1.background, p2.background) and np.abs(p1.background).max() <= 0.05
    _, p0, _ = cli.build_task(cli.resolve_config("xor9"))
    assert p0.background is None


def test_sweep_isolates_failures_and_handles_empty(tmp_path, capsys):
    assert run("sweep", "--task", "xor9", "--param", "g", "--values", "", "--out-dir", str(tmp_path)) == 0
    d = tmp_path / "sw"
    code = run("sweep", "--task", "xor9", "--param", "lr", "--values", "0.1,-1", "--epochs", "1",
               "--out-dir", str(d))
    assert code == cli.EXIT_FAILED
    rows = list(csv.DictReader(open(d / "sweep.csv")))
    assert rows[0]["status"] == "ok" and rows[1]["status"].startswith("failed")
    assert run("sweep", "--task", "xor9", "--param", "train_flags", "--values", "V+w,V", "--epochs", "1",
               "--out-dir", str(tmp_path / "tf")) == 0
    assert (tmp_path / "tf" / "train_flags=V" / "checkpoint.json").exists()


def test_gradcheck_reports_and_applies_thresholds(tmp_path):
    cfg = cli.resolve_config("xor9", flags={"run": {"out_dir": str(tmp_path)}})
    cfg["gradcheck"].update({"gammas": [0.01], "seeds": 1, "thresholds": {"0.01": 0.99}})
    assert cli.cmd_gradcheck(cfg) == 0
    rows = json.loads((tmp_path / "gradcheck.json").read_text())
    assert rows[0]["cosine"] >= 0.99 and rows[0]["sym_residual"] < 1e-10
    cfg["gradcheck"]["thresholds"] = {"0.01": 1.01}
    assert cli.cmd_gradcheck(cfg) == cli.EXIT_THRESHOLD


@pytest.fixture
def tiny_mnist(tmp_path):
    rng = np.random.default_rng(0)
    labels = np.repeat(np.arange(10), 14).astype(np.uint8)
    images = (rng.uniform(0, 60, (140, 28, 28))).astype(np.uint8)
    for k in range(10):
        images[labels == k, 2 * k:2 * k + 6, 5:20] = 250
    ip, lp = tmp_path / "i.gz", tmp_path / "l.gz"
    write_idx(ip, lp, images, labels)
    return ip, lp


def test_mnist_train_and_eval_confusion(tmp_path, tiny_mnist):
    ip, lp = tiny_mnist
    d = tmp_path / "m"
    args = ["--task", "mnist5", "--samples-per-digit", "10", "--images", str(ip), "--labels", str(lp),
            "--out-dir", str(d)]
    assert run("train", *args, "--epochs", "1") == 0
    assert (d / "checkpoint.json").exists() and (d / "pca.json").exists()
    assert run("eval", *args, "--checkpoint", str(d / "checkpoint.json")) == 0
    rows = list(csv.reader(open(d / "confusion.csv")))
    assert rows[0][1:] == ["0", "1", "3", "6", "9"]
    counts = [sum(int(v) for v in r[1:]) for r in rows[1:]]
    assert counts == [1] * 5  # 10 train/digit -> round(10 * 0.1 / 0.8) test/digit
