import json

import numpy as np
import pytest

from relsignal.cli import main
from relsignal.fileio import read_labels, write_features, write_labels
from relsignal.simplex import FinitePosteriorTriple
from relsignal.synth import gaussian_mixture


def _run(capsys, argv):
    code = main(argv)
    return code, capsys.readouterr().out


class TestRssCommand:
    def test_region_report(self, tmp_path, capsys):
        triple = FinitePosteriorTriple(
            support=(0, 1), px=[0.7, 0.3],
            eta=[[0, 1], [0, 1]], eta_tilde=[[0.25, 0.75], [1, 0]],
        )
        path = tmp_path / "triple.json"
        path.write_text(triple.to_json())
        code, out = _run(capsys, ["rss", "--triple", str(path), "--kappa", "0,0.5"])
        assert code == 0
        doc = json.loads(out)
        assert doc["mass"] == [0.7, 0.0]
        assert doc["epsilon0"] == pytest.approx(0.3)


class TestImmunityCommand:
    def test_symmetric_matrix(self, tmp_path, capsys):
        path = tmp_path / "matrix.json"
        path.write_text(json.dumps([[0.9, 0.05, 0.05], [0.05, 0.9, 0.05], [0.05, 0.05, 0.9]]))
        code, out = _run(capsys, ["immunity", "--matrix", str(path)])
        assert code == 0
        doc = json.loads(out)
        assert doc["diag_dominant"] is True
        assert doc["universal_form"] is True
        assert doc["e_offdiag"] == pytest.approx(0.05)
        assert doc["counterexample"] is None

    def test_broken_matrix_reports_witness(self, tmp_path, capsys):
        path = tmp_path / "matrix.json"
        path.write_text(json.dumps([[0.4, 0.6], [0.3, 0.7]]))
        code, out = _run(capsys, ["immunity", "--matrix", str(path)])
        assert code == 0
        doc = json.loads(out)
        assert doc["universal_form"] is False
        assert doc["counterexample"] is not None


class TestBoundsCommand:
    def test_lower_zero(self, capsys):
        code, out = _run(capsys, [
            "bounds", "--epsilon", "0.1", "--kappa", "1", "--v", "11",
            "--n", "100", "--k", "10", "--which", "lower-zero",
        ])
        assert code == 0
        assert json.loads(out)["value"] == pytest.approx(0.094139, abs=1e-6)

    def test_smooth_requires_alpha(self, capsys):
        code, _ = _run(capsys, [
            "bounds", "--epsilon", "0.1", "--v", "5", "--n", "100", "--k", "4",
            "--which", "smooth",
        ])
        assert code == 2


class TestSimulateCommands:
    def test_gaussian_writes_files(self, tmp_path, capsys):
        feat = tmp_path / "x.feat"
        lab = tmp_path / "y.lab"
        code, _ = _run(capsys, [
            "simulate", "gaussian", "--n-per-class", "10", "--seed", "5",
            "--features-out", str(feat), "--labels-out", str(lab), "--out", str(tmp_path / "rows.json"),
        ])
        assert code == 0
        from relsignal.fileio import read_features
        assert read_features(feat).shape == (20, 2)
        labels, k = read_labels(lab)
        assert k == 2

    def test_flip_round_trip(self, tmp_path, capsys):
        src = tmp_path / "clean.lab"
        dst = tmp_path / "noisy.lab"
        write_labels(np.zeros(100, dtype=int), 4, src)
        code, _ = _run(capsys, [
            "simulate", "flip", "--labels", str(src), "--rate", "1.0",
            "--seed", "2", "--out", str(dst),
        ])
        assert code == 0
        flipped, _ = read_labels(dst)
        assert np.all(flipped != 0)


class TestMinimaxSimCommand:
    def test_json_summary(self, capsys):
        code, out = _run(capsys, [
            "minimax-sim", "--epsilon", "0.2", "--kappa", "1", "--v", "4",
            "--k", "6", "--n", "30", "--trials", "50", "--seed", "4",
        ])
        assert code == 0
        doc = json.loads(out)
        assert doc["trials"] == 50
        assert doc["region_breakdown"]["x0"]["mean"] >= 0

    def test_tsv_rows(self, capsys):
        code, out = _run(capsys, [
            "minimax-sim", "--epsilon", "0.2", "--kappa", "1", "--v", "4",
            "--k", "6", "--n", "30", "--trials", "5", "--seed", "4",
            "--format", "tsv",
        ])
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0].split("\t") == ["trial", "excess_risk", "x0", "rest"]
        assert len(lines) == 6


class TestTrainCommand:
    def test_train_and_eval(self, tmp_path, capsys):
        train = gaussian_mixture(40, seed=1)
        test = gaussian_mixture(40, seed=2)
        write_features(train.points, np.float64, tmp_path / "train.feat")
        write_labels(train.labels, 2, tmp_path / "train.lab")
        write_features(test.points, np.float64, tmp_path / "test.feat")
        write_labels(test.labels, 2, tmp_path / "test.lab")
        model_path = tmp_path / "model.json"
        code, out = _run(capsys, [
            "train",
            "--features", str(tmp_path / "train.feat"),
            "--labels", str(tmp_path / "train.lab"),
            "--lambda-grid", "0.1", "--iter-grid", "30", "--folds", "2",
            "--eval-features", str(tmp_path / "test.feat"),
            "--eval-labels", str(tmp_path / "test.lab"),
            "--model-out", str(model_path),
        ])
        assert code == 0
        doc = json.loads(out)
        assert doc["eval_accuracy"] > 0.8
        model_doc = json.loads(model_path.read_text())
        assert model_doc["k"] == 2
        assert len(model_doc["weights"]) == 4


class TestEstimateRssCommand:
    def test_report(self, tmp_path, capsys):
        train = gaussian_mixture(30, seed=1)
        write_features(train.points, np.float64, tmp_path / "train.feat")
        write_labels(train.labels, 2, tmp_path / "clean.lab")
        noisy = train.labels.copy()
        noisy[:5] = 1 - noisy[:5]
        write_labels(noisy, 2, tmp_path / "noisy.lab")
        out_path = tmp_path / "report.json"
        code, _ = _run(capsys, [
            "estimate-rss",
            "--train-features", str(tmp_path / "train.feat"),
            "--clean-labels", str(tmp_path / "clean.lab"),
            "--noisy-labels", str(tmp_path / "noisy.lab"),
            "--eval-features", str(tmp_path / "train.feat"),
            "--eval-clean-labels", str(tmp_path / "clean.lab"),
            "--lambda-grid", "0.1", "--iter-grid", "30", "--folds", "2",
            "--out", str(out_path),
        ])
        assert code == 0
        doc = json.loads(out_path.read_text())
        assert "epsilon_hat" in doc
        assert doc["cdf"]
        assert 0.0 <= doc["eval_accuracy_clean_model"] <= 1.0
        assert 0.0 <= doc["eval_accuracy_noisy_model"] <= 1.0


class TestPhaseCommand:
    def test_small_sweep(self, tmp_path, capsys):
        out_path = tmp_path / "phase.json"
        code, _ = _run(capsys, [
            "phase", "--grid", "0,0.9", "--trials", "1", "--n-per-class", "20",
            "--n-test-per-class", "50", "--folds", "2", "--workers", "1",
            "--out", str(out_path),
        ])
        assert code == 0
        doc = json.loads(out_path.read_text())
        assert doc["ok"] is True
        assert len(doc["rows"]) == 2
