import json
import shutil
import subprocess
import sys

import pytest

from hufae.cli import main
from hufae.model import load_checkpoint, read_manifest

TINY = {
    "synthetic": {"n_units": 2, "classes": 3, "windows_per_class": 12, "window_size": 128,
                  "n_subjects": 4},
    "window_size": 128,
    "model": {"dr_sae": {"channels": [2, 8]}, "lff": {"channels": [8, 8, 8, 8]},
              "gff": {"channels": [8, 8, 8, 4]},
              "dr_train": {"max_epochs": 10, "max_windows": 16},
              "lff_train": {"max_epochs": 3, "min_epochs": 1},
              "gff_train": {"max_epochs": 3, "min_epochs": 1}},
    "classifier": {"hidden": [16], "epochs": 10},
}


def _config(tmp, name="tiny.json", **overrides):
    path = tmp / name
    path.write_text(json.dumps({**TINY, **overrides}))
    return str(path)


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("cli")
    cfg = _config(tmp)
    assert main(["train", "--config", cfg, "--out", str(tmp / "run")]) == 0
    return tmp, cfg


# ------------------------------------------------------------------- synth

def test_synth_writes_corpus(tmp_path):
    out = tmp_path / "s"
    code = main(["synth", "--out", str(out), "--n-units", "2", "--classes", "3",
                 "--windows-per-class", "4", "--window-size", "128", "--seed", "1"])
    assert code == 0
    lines = (out / "synthetic.csv").read_text().splitlines()
    assert len(lines) == 1 + 3 * 4 * 128
    assert len(lines[0].split(",")) == 2 + 12
    truth = json.loads((out / "ground_truth.json").read_text())
    assert truth["config"]["seed"] == 1
    assert (out / "synth.log").exists()


def test_synth_is_byte_identical(tmp_path):
    for name in ("a", "b"):
        assert main(["synth", "--out", str(tmp_path / name), "--windows-per-class", "3",
                     "--window-size", "64", "--classes", "2"]) == 0
    for f in ("synthetic.csv", "ground_truth.json"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_synth_rejects_zero_classes_without_output(tmp_path):
    out = tmp_path / "bad"
    assert main(["synth", "--out", str(out), "--classes", "0"]) == 2
    assert not out.exists()


def test_unknown_config_key(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"windw_size": 64}))
    assert main(["train", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2


def test_malformed_config(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text("{not json")
    assert main(["train", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2


# ------------------------------------------------------------------- train

def test_train_outputs(trained):
    tmp, cfg = trained
    run = tmp / "run"
    for name in ("config.input.json", "run_config.json", "split.json", "train.log",
                 "checkpoint/manifest.json", "checkpoint/params.bin",
                 "curves/loss_classifier.csv", "curves/loss_gff.csv",
                 "curves/loss_lff_unit0.csv", "curves/loss_dr_sae_ax_stage1.csv"):
        assert (run / name).exists(), name
    assert (run / "config.input.json").read_text() == open(cfg).read()
    split = json.loads((run / "split.json").read_text())
    assert not set(split["train_subjects"]) & set(split["test_subjects"])
    log = (run / "train.log").read_text()
    assert "stage=lff.unit0 epoch=" in log and "loss=" in log
    manifest = read_manifest(run / "checkpoint")
    assert manifest["trained"] == {"dr_sae": True, "lff": True, "gff": True}
    assert any(p["name"].startswith("classifier/") for p in manifest["params"])


def test_train_single_unit_has_no_gff(tmp_path):
    syn = {**TINY["synthetic"], "n_units": 1}
    cfg = _config(tmp_path, synthetic=syn)
    assert main(["train", "--config", cfg, "--out", str(tmp_path / "r")]) == 0
    names = [p["name"] for p in read_manifest(tmp_path / "r" / "checkpoint")["params"]]
    assert not any(n.startswith("gff/") for n in names)
    assert not (tmp_path / "r" / "curves" / "loss_gff.csv").exists()


def test_resume_is_bitwise_identical(trained, tmp_path):
    tmp, cfg = trained
    first = tmp_path / "first"
    assert main(["train", "--config", cfg, "--out", str(first), "--until", "dr_sae"]) == 0
    meta = read_manifest(first / "checkpoint")["trained"]
    assert meta["dr_sae"] and not meta["lff"]
    resumed = tmp_path / "resumed"
    assert main(["train", "--config", cfg, "--out", str(resumed), "--stage", "lff",
                 "--resume", str(first / "checkpoint")]) == 0
    a = (tmp / "run" / "checkpoint" / "params.bin").read_bytes()
    b = (resumed / "checkpoint" / "params.bin").read_bytes()
    assert a == b


def test_stage_without_resume_is_usage_error(trained, tmp_path):
    _, cfg = trained
    assert main(["train", "--config", cfg, "--out", str(tmp_path / "x"), "--stage", "gff"]) == 2


def test_repeated_training_is_byte_identical(trained, tmp_path):
    tmp, cfg = trained
    assert main(["train", "--config", cfg, "--out", str(tmp_path / "again")]) == 0
    for name in ("params.bin", "manifest.json"):
        assert ((tmp / "run" / "checkpoint" / name).read_bytes()
                == (tmp_path / "again" / "checkpoint" / name).read_bytes())


# -------------------------------------------------------------------- eval

def test_eval_reports(trained, capsys):
    tmp, _ = trained
    out = tmp / "ev"
    assert main(["eval", "--checkpoint", str(tmp / "run" / "checkpoint"), "--out", str(out)]) == 0
    printed = capsys.readouterr().out
    assert printed.startswith("accuracy=") and "split=test" in printed
    report = json.loads((out / "report_test.json").read_text())
    assert 0 <= report["accuracy"] <= 1
    conf = json.loads((out / "confusion_test.json").read_text())
    assert len(conf["matrix"]) == 3
    assert (out / "confusion_test.csv").read_text().count("\n") == 4


def test_eval_mask_unit(trained, capsys):
    tmp, _ = trained
    ckpt = str(tmp / "run" / "checkpoint")
    assert main(["eval", "--checkpoint", ckpt, "--out", str(tmp / "ev"), "--mask-unit", "1"]) == 0
    assert "masked_unit=1" in capsys.readouterr().out
    assert (tmp / "ev" / "report_test_mask1.json").exists()
    assert main(["eval", "--checkpoint", ckpt, "--out", str(tmp / "ev"), "--mask-unit", "2"]) == 2


def test_eval_missing_checkpoint(tmp_path):
    assert main(["eval", "--checkpoint", str(tmp_path / "none"), "--out", str(tmp_path)]) == 5


def test_eval_corrupt_checkpoint(trained, tmp_path):
    tmp, _ = trained
    bad = tmp_path / "ck"
    shutil.copytree(tmp / "run" / "checkpoint", bad)
    raw = bytearray((bad / "params.bin").read_bytes())
    raw[100] ^= 0xFF
    (bad / "params.bin").write_bytes(bytes(raw))
    assert main(["eval", "--checkpoint", str(bad), "--out", str(tmp_path / "e")]) == 5


# ----------------------------------------------------------------- analyze

def test_analyze_fir_check(trained, capsys):
    tmp, _ = trained
    code = main(["analyze", "--checkpoint", str(tmp / "run" / "checkpoint"),
                 "--out", str(tmp / "an"), "fir", "--check"])
    assert code == 0
    dev = float(capsys.readouterr().out.split()[0].split("=")[1])
    assert dev < 1e-9


def test_analyze_spectrum_deterministic(trained, tmp_path):
    tmp, _ = trained
    ckpt = str(tmp / "run" / "checkpoint")
    for name in ("a", "b"):
        assert main(["analyze", "--checkpoint", ckpt, "--out", str(tmp_path / name),
                     "spectrum", "--paths", "6", "--seed", "4"]) == 0
    files = sorted(p.name for p in (tmp_path / "a").glob("spectrum_*.csv"))
    assert len(files) == 6 and files[0] == "spectrum_ax_composed_seed4_path0.csv"
    for f in files:
        rows = (tmp_path / "a" / f).read_text().splitlines()
        assert len(rows) == 1 + 257
        assert rows == (tmp_path / "b" / f).read_text().splitlines()


def test_analyze_unknown_block(trained, tmp_path):
    tmp, _ = trained
    assert main(["analyze", "--checkpoint", str(tmp / "run" / "checkpoint"), "--block", "qq",
                 "--out", str(tmp_path), "fir"]) == 2


def test_analyze_feature_dump(trained, tmp_path):
    tmp, _ = trained
    assert main(["analyze", "--checkpoint", str(tmp / "run" / "checkpoint"), "--block", "gy",
                 "--out", str(tmp_path), "features", "--window", "2", "--channels", "3"]) == 0
    rows = (tmp_path / "features_gy_window2.csv").read_text().splitlines()
    assert rows[0] == "t,raw,code_0,code_1,code_2" and len(rows) == 1 + 128


def test_console_script_runs(tmp_path):
    exe = shutil.which("huf")
    cmd = [exe] if exe else [sys.executable, "-m", "hufae.cli"]
    res = subprocess.run(cmd + ["synth", "--out", str(tmp_path), "--classes", "2",
                                "--windows-per-class", "2", "--window-size", "64"],
                         capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert "synth windows=4" in res.stderr


def test_loaded_checkpoint_matches_run_config(trained):
    tmp, _ = trained
    ckpt = load_checkpoint(tmp / "run" / "checkpoint")
    assert ckpt.run_config["window_size"] == 128
    assert ckpt.metadata["seed"] == 0
