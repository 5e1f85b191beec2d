import json

import numpy as np

from feature_export.cli import main
from relsignal.fileio import read_features, read_labels


class TestExportCommand:
    def test_smoke_export(self, smoke_dataset, tmp_path, capsys):
        out = tmp_path / "out"
        code = main([
            "export", "--dataset", f"image-folder:{smoke_dataset}", "--split", "all",
            "--backbone", "patch-mean-16", "--out", str(out), "--batch-size", "5",
        ])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["row_count"] == 16
        assert read_features(out / doc["features_file"]).shape == (16, 768)

    def test_unknown_backbone_fails(self, smoke_dataset, tmp_path, capsys):
        code = main([
            "export", "--dataset", f"image-folder:{smoke_dataset}", "--split", "all",
            "--backbone", "bogus", "--out", str(tmp_path / "out"),
        ])
        assert code == 2
        assert "bogus" in capsys.readouterr().err


class TestConvertCommand:
    def test_convert(self, tmp_path, capsys):
        import torch

        gen = np.random.Generator(np.random.Philox(2))
        clean = gen.integers(0, 10, size=500)
        noisy = clean.copy()
        idx = gen.choice(500, size=201, replace=False)
        noisy[idx] = (clean[idx] + 1) % 10
        archive = tmp_path / "arch.pt"
        torch.save({"clean_label": clean, "worse_label": noisy}, archive)
        out = tmp_path / "worst.bin"
        code = main([
            "convert-labels", "--archive", str(archive), "--kind", "Worst",
            "--out", str(out), "--expected-n", "500",
        ])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["empirical_noise_rate"] == 0.402
        labels, k = read_labels(out)
        assert k == 10
        assert np.array_equal(labels, noisy)

    def test_missing_archive(self, tmp_path, capsys):
        code = main([
            "convert-labels", "--archive", str(tmp_path / "nope.pt"),
            "--kind", "Worst", "--out", str(tmp_path / "x.bin"),
        ])
        assert code == 2
