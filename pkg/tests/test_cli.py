"""End-to-end command line tests driven through flowhar.cli.main."""

import numpy as np
import pytest

from flowhar.cli import main
from flowhar.attitude import G0

SPEC_TEXT = """\
name = synthcli
native_rate_hz = 30
decimate = 1
gyro_unit = rad/s
label_col = 0
subject = filename:subj(\\d+)
num_classes = 2

sensor.imu0 = 1,2,3; 4,5,6; 7,8,9

label.0 = 0
label.1 = 1
"""


def synth(out_path, label, seed, extra=()):
    args = [
        "synth", "--duration", "6", "--rate", "30",
        "--seed", str(seed), "--label", str(label),
        "--accel-noise", "0.02", "--gyro-noise", "0.005", "--mag-noise", "0.005",
        "--output", str(out_path),
    ]
    if label == 1:
        args += ["--accel-down", "3.0", "--accel-freq", "2"]
    args += list(extra)
    assert main(args) == 0
    return str(out_path) + ".rec"


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    """A spec file plus two activities for each of two subjects."""
    root = tmp_path_factory.mktemp("clidata")
    spec = root / "synth.spec"
    spec.write_text(SPEC_TEXT)
    files = []
    for u in range(2):
        for label in (0, 1):
            out = root / f"subj{u}_act{label}"
            extra = ["--mounting-angle-deg", str(40.0 * u), "--mounting-axis", "1,1,0"]
            files.append(synth(out, label, seed=10 * u + label, extra=extra))
    return spec, files


class TestSynth:
    def test_writes_rec_and_truth(self, tmp_path, capsys):
        out = tmp_path / "one"
        assert main(["synth", "--duration", "2", "--rate", "30",
                     "--output", str(out)]) == 0
        rec = (out.with_suffix(".rec")).read_text().splitlines()
        truth = (out.with_suffix(".truth")).read_text().splitlines()
        assert rec[0].startswith("#") and truth[0].startswith("#")
        assert len(rec) - 1 == 60 and len(truth) - 1 == 60
        quats = np.loadtxt(str(out) + ".truth")
        assert np.allclose(np.linalg.norm(quats, axis=1), 1.0, atol=1e-9)

    def test_config_file_and_flag_precedence(self, tmp_path):
        cfg = tmp_path / "synth.cfg"
        cfg.write_text("duration = 4\nrate = 30\n")
        out_a = tmp_path / "a"
        assert main(["synth", "--config", str(cfg), "--output", str(out_a)]) == 0
        assert len((out_a.with_suffix(".rec")).read_text().splitlines()) - 1 == 120
        out_b = tmp_path / "b"
        # explicit flag beats the config file value
        assert main(["synth", "--config", str(cfg), "--duration", "2",
                     "--output", str(out_b)]) == 0
        assert len((out_b.with_suffix(".rec")).read_text().splitlines()) - 1 == 60

    def test_bad_config_line_exits_1(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("duration 4\n")
        assert main(["synth", "--config", str(cfg),
                     "--output", str(tmp_path / "x")]) == 1
        assert "config error" in capsys.readouterr().err


class TestTransform:
    def test_static_recording_columns(self, tmp_path):
        spec = tmp_path / "synth.spec"
        spec.write_text(SPEC_TEXT)
        rec = synth(tmp_path / "subj0_static", label=0, seed=0,
                    extra=["--accel-noise", "0", "--gyro-noise", "0",
                           "--mag-noise", "0"])
        out = tmp_path / "out.txt"
        assert main(["transform", "--spec", str(spec), "--input", rec,
                     "--output", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0].startswith("# columns: subject label imu0:")
        table = np.loadtxt(str(out))
        # subject, label, 9 local, 9 global, 4 quaternion = 24 columns;
        # 6 s at 30 Hz minus the 1 s warmup leaves 150 rows
        assert table.shape == (150, 24)
        assert np.all(table[:, 0] == 0) and np.all(table[:, 1] == 0)
        # global specific force of a static sensor is (0, 0, -g0)
        assert np.allclose(table[:, 11:14], [0.0, 0.0, -G0], atol=1e-6)
        assert np.allclose(np.linalg.norm(table[:, 20:24], axis=1), 1.0, atol=1e-9)

    def test_too_short_recording_exits_2(self, tmp_path, capsys):
        spec = tmp_path / "synth.spec"
        spec.write_text(SPEC_TEXT)
        rec = synth(tmp_path / "subj0_short", label=0, seed=0,
                    extra=["--duration", "0.5"])
        code = main(["transform", "--spec", str(spec), "--input", rec,
                     "--output", str(tmp_path / "out.txt")])
        assert code == 2
        assert "data error" in capsys.readouterr().err


class TestTrainEval:
    def test_train_then_eval(self, corpus, tmp_path, capsys):
        spec, files = corpus
        ckpt = tmp_path / "model.npz"
        code = main(["train", "--spec", str(spec), "--data", *files,
                     "--mode", "vG_only", "--target", "0",
                     "--win-len", "32", "--stride", "16",
                     "--epochs", "1", "--batch", "8", "--seed", "1",
                     "--checkpoint", str(ckpt)])
        out = capsys.readouterr().out
        assert code == 0
        assert "target 0: accuracy=" in out
        assert ckpt.exists()

        code = main(["eval", "--spec", str(spec), "--data", *files,
                     "--checkpoint", str(ckpt), "--mode", "vG_only",
                     "--stride", "16", "--target", "0"])
        out = capsys.readouterr().out
        assert code == 0
        assert out.startswith("accuracy=") and "weighted_f1=" in out

    def test_train_without_target_exits_1(self, corpus, tmp_path, capsys):
        spec, files = corpus
        code = main(["train", "--spec", str(spec), "--data", *files,
                     "--mode", "vG_only", "--win-len", "32", "--stride", "16",
                     "--epochs", "1"])
        assert code == 1
        assert "config error" in capsys.readouterr().err


class TestLouoReport:
    def test_louo_writes_report(self, corpus, tmp_path, capsys):
        spec, files = corpus
        out_dir = tmp_path / "sweep"
        code = main(["louo", "--spec", str(spec), "--data", *files,
                     "--mode", "vL_only", "--win-len", "32", "--stride", "16",
                     "--epochs", "1", "--batch", "8",
                     "--out", str(out_dir)])
        printed = capsys.readouterr().out
        assert code == 0
        assert "subject 0: accuracy=" in printed
        assert "subject 1: accuracy=" in printed
        assert "average: accuracy=" in printed
        assert (out_dir / "summary.json").exists()

        code = main(["report", "--out", str(out_dir)])
        printed = capsys.readouterr().out
        assert code == 0
        assert '"average_accuracy"' in printed

    def test_output_dir_env_override(self, corpus, tmp_path, capsys, monkeypatch):
        spec, files = corpus
        env_dir = tmp_path / "env_out"
        monkeypatch.setenv("FLOWHAR_OUTPUT_DIR", str(env_dir))
        code = main(["louo", "--spec", str(spec), "--data", *files,
                     "--mode", "vL_only", "--win-len", "32", "--stride", "16",
                     "--epochs", "1", "--batch", "8",
                     "--out", str(tmp_path / "ignored")])
        assert code == 0
        assert (env_dir / "summary.json").exists()
        assert not (tmp_path / "ignored").exists()
