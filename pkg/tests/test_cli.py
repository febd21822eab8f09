"""Command-line workflows: dataset, config validation, train/eval/cancel."""

import json
from pathlib import Path

import numpy as np
import pytest

from aflearn.checkpoint import load_checkpoint
from aflearn.cli import main, validate_train_config
from aflearn.errors import ConfigError
from aflearn.scenes import read_wav, write_wav

SPEC = {"duration": 0.6, "rir_taps": 64, "rt60_range": [0.02, 0.04]}


@pytest.fixture()
def dataset(tmp_path):
    spec_file = tmp_path / "spec.json"
    spec_file.write_text(json.dumps(SPEC))
    out = tmp_path / "data"
    assert main(["gen-data", str(spec_file), str(out), "--count", "5",
                 "--seed", "3", "--split", "3,1,1"]) == 0
    return out


def _train_config(tmp_path, dataset, **overrides):
    config = {
        "structure": "block:4",
        "hidden_size": 4,
        "dft_size": 64,
        "scenes": {"manifest": str(dataset / "manifest.json")},
        "epochs": 2,
        "batch_size": 2,
        "unroll": 8,
        "schedule": {"lr": 1e-3},
        "checkpoint": str(tmp_path / "model.ckpt"),
        "curve_csv": str(tmp_path / "curve.csv"),
    }
    config.update(overrides)
    path = tmp_path / "train.json"
    path.write_text(json.dumps(config))
    return path, config


def test_gen_data_split_counts_and_determinism(tmp_path):
    spec_file = tmp_path / "spec.json"
    spec_file.write_text(json.dumps(SPEC))
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["gen-data", str(spec_file), str(out), "--count", "10",
                     "--seed", "1"]) == 0
    manifest = json.loads((a / "manifest.json").read_text())
    assert manifest["split_counts"] == {"train": 8, "val": 1, "test": 1}
    assert len(manifest["scenes"]) == 10
    assert (a / "manifest.json").read_bytes() == (b / "manifest.json").read_bytes()
    assert (a / "scene_00000.mic.wav").read_bytes() == (b / "scene_00000.mic.wav").read_bytes()


def test_print_config_canonicalizes(capsys):
    assert main(["print-config"]) == 0
    config = json.loads(capsys.readouterr().out)
    assert config["hop"] == config["dft_size"] // 2
    assert config["schedule"]["plateau_patience"] == 5


def test_config_rejections_name_the_field(capsys):
    assert main(["print-config", "nope.json"]) == 4  # missing file is I/O
    for raw, field in [
        ({"bogus": 1}, "bogus"),
        ({"structure": "banded:3"}, "width"),
        ({"structure": "banded:6", "dft_size": 64}, "dft_size"),
        ({"hidden_size": "big"}, "hidden_size"),
        ({"schedule": {"momentum": 0.9}}, "schedule.momentum"),
        ({"scenes": {"preset": "studio"}}, "scenes.preset"),
    ]:
        with pytest.raises(ConfigError) as info:
            validate_train_config(raw)
        assert info.value.field == field


def test_train_writes_checkpoint_and_curve(tmp_path, dataset):
    config_path, config = _train_config(tmp_path, dataset)
    assert main(["train", str(config_path)]) == 0
    params, header = load_checkpoint(config["checkpoint"])
    assert params.structure.label == "block:4"
    assert header["dft_size"] == 64
    assert header["metadata"]["schedule_state"]["epoch"] == 1
    curve = Path(config["curve_csv"]).read_text().splitlines()
    assert curve[0] == "epoch,train_loss,val_serle_db,lr,seconds"
    assert len(curve) == 3


def test_train_is_deterministic(tmp_path, dataset):
    paths = []
    for run in ("x", "y"):
        ckpt = tmp_path / f"{run}.ckpt"
        config_path, _ = _train_config(tmp_path, dataset, checkpoint=str(ckpt),
                                       curve_csv=None)
        assert main(["train", str(config_path)]) == 0
        paths.append(ckpt)
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_train_resume_restores_schedule_state(tmp_path, dataset):
    config_path, config = _train_config(tmp_path, dataset)
    assert main(["train", str(config_path)]) == 0
    resumed = str(tmp_path / "resumed.ckpt")
    config_path, _ = _train_config(
        tmp_path, dataset, epochs=3, resume=config["checkpoint"], checkpoint=resumed
    )
    assert main(["train", str(config_path)]) == 0
    _, header = load_checkpoint(resumed)
    assert header["metadata"]["schedule_state"]["epoch"] == 2


def test_eval_baseline_csv_schema_and_jobs_determinism(tmp_path, dataset):
    out1, out2 = tmp_path / "r1.csv", tmp_path / "r2.csv"
    assert main(["eval", "nlms", str(dataset), str(out1), "--split", "all",
                 "--dft-size", "64"]) == 0
    assert main(["eval", "nlms", str(dataset), str(out2), "--split", "all",
                 "--dft-size", "64", "--jobs", "2"]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    lines = out1.read_text().splitlines()
    assert lines[0] == "scene,seed,split,algorithm,serle_db,erle_db,frames"
    assert len(lines) == 6
    summary = (tmp_path / "r1.summary.csv").read_text().splitlines()
    assert summary[0] == "algorithm,split,scenes,mean_serle_db,ci_lo_db,ci_hi_db"
    assert summary[1].startswith("nlms,all,5,")


def test_eval_learned_checkpoint_and_sweep(tmp_path, dataset):
    config_path, config = _train_config(tmp_path, dataset, epochs=1)
    assert main(["train", str(config_path)]) == 0
    out = tmp_path / "learned.csv"
    assert main(["eval", config["checkpoint"], str(dataset), str(out),
                 "--split", "test"]) == 0
    row = out.read_text().splitlines()[1].split(",")
    assert row[3] == "model"

    sweep_dir = tmp_path / "grid"
    sweep_dir.mkdir()
    (sweep_dir / "model.ckpt").write_bytes(Path(config["checkpoint"]).read_bytes())
    sweep_csv = tmp_path / "sweep.csv"
    assert main(["eval", str(sweep_dir), str(dataset), str(sweep_csv),
                 "--sweep", "--split", "test"]) == 0
    lines = sweep_csv.read_text().splitlines()
    assert lines[0].startswith("checkpoint,structure,hidden_size,")
    assert lines[1].startswith("model,block:4,4,")


def test_eval_missing_inputs_are_io_errors(tmp_path, dataset):
    assert main(["eval", "nlms", str(tmp_path / "nowhere"), str(tmp_path / "o.csv")]) == 4
    assert main(["eval", str(tmp_path / "no.ckpt"), str(dataset),
                 str(tmp_path / "o.csv")]) == 4


def test_cancel_silent_farend_passes_mic_through(tmp_path, dataset):
    mic = dataset / "scene_00004.mic.wav"
    silent = tmp_path / "silent.wav"
    _, d = read_wav(mic)
    write_wav(silent, np.zeros(d.size), 16000)
    out = tmp_path / "out.wav"
    assert main(["cancel", str(silent), str(mic), "nlms", str(out),
                 "--dft-size", "64"]) == 0
    _, processed = read_wav(out)
    assert processed.size == d.size
    np.testing.assert_allclose(processed, d.astype(np.float32), atol=1e-6)


def test_cancel_is_bit_identical_and_writes_telemetry(tmp_path, dataset):
    farend = dataset / "scene_00004.farend.wav"
    mic = dataset / "scene_00004.mic.wav"
    outs = []
    for name in ("a.wav", "b.wav"):
        out = tmp_path / name
        assert main(["cancel", str(farend), str(mic), "kf", str(out),
                     "--dft-size", "64",
                     "--telemetry", str(tmp_path / "tele.jsonl")]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    rows = [json.loads(l) for l in (tmp_path / "tele.jsonl").read_text().splitlines()]
    _, d = read_wav(mic)
    assert len(rows) == d.size // 32
    assert set(rows[0]) == {"frame", "erle_db", "residual_power"}


def test_cancel_rejects_rate_and_length_mismatch(tmp_path, dataset):
    mic = dataset / "scene_00004.mic.wav"
    _, d = read_wav(mic)
    wrong_rate = tmp_path / "u8k.wav"
    write_wav(wrong_rate, np.zeros(d.size), 8000)
    assert main(["cancel", str(wrong_rate), str(mic), "nlms",
                 str(tmp_path / "x.wav")]) == 2
    short = tmp_path / "short.wav"
    write_wav(short, np.zeros(d.size - 5), 16000)
    assert main(["cancel", str(short), str(mic), "nlms",
                 str(tmp_path / "x.wav")]) == 2
    assert main(["cancel", str(tmp_path / "missing.wav"), str(mic), "nlms",
                 str(tmp_path / "x.wav")]) == 4


def test_plot_script_covers_each_schema(tmp_path, dataset):
    config_path, config = _train_config(tmp_path, dataset, epochs=1)
    assert main(["train", str(config_path)]) == 0
    assert main(["eval", "rls", str(dataset), str(tmp_path / "r.csv"),
                 "--split", "test", "--dft-size", "64"]) == 0
    sweep = tmp_path / "sweep.csv"
    sweep.write_text(
        "checkpoint,structure,hidden_size,scenes,mean_serle_db,ci_lo_db,ci_hi_db,"
        "flops_per_frame\nm,block:4,4,5,1.0,0.5,1.5,4864\n"
    )
    for csv_path in (config["curve_csv"], str(tmp_path / "r.summary.csv"), str(sweep)):
        gp = tmp_path / (Path(csv_path).stem + ".gp")
        assert main(["plot-script", csv_path, str(gp)]) == 0
        text = gp.read_text()
        assert "plot" in text and Path(csv_path).name in text
    # the per-scene table has no aggregate columns to plot
    assert main(["plot-script", str(tmp_path / "r.csv"), str(tmp_path / "x.gp")]) == 2
