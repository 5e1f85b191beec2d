import numpy as np
import pytest

from feature_export.convert import (
    ArchiveError,
    LABEL_KINDS,
    PUBLISHED_NOISE_RATES,
    convert_noisy_labels,
)
from relsignal.fileio import read_labels


def _make_archive(path, n=1000, seed=5, fmt="pt"):
    """Synthetic ten-class archive whose kinds hit the published rates."""
    gen = np.random.Generator(np.random.Philox(seed))
    clean = gen.integers(0, 10, size=n)
    doc = {"clean_label": clean}
    for kind in ("Aggre", "Rand1", "Rand2", "Rand3", "Worst"):
        key, _ = LABEL_KINDS[kind]
        rate = PUBLISHED_NOISE_RATES[kind]
        noisy = clean.copy()
        flips = int(round(rate * n))
        idx = gen.choice(n, size=flips, replace=False)
        noisy[idx] = (clean[idx] + gen.integers(1, 10, size=flips)) % 10
        doc[key] = noisy
    if fmt == "pt":
        import torch

        torch.save(doc, path)
    else:
        np.save(path, doc, allow_pickle=True)
    return doc


class TestConvert:
    def test_worst_kind_rate(self, tmp_path):
        archive = tmp_path / "labels.pt"
        doc = _make_archive(archive)
        out = tmp_path / "worst.bin"
        result = convert_noisy_labels(archive, "Worst", out, expected_n=1000)
        assert result.n == 1000
        assert result.k == 10
        assert result.empirical_noise_rate == pytest.approx(0.402, abs=0.005)
        labels, k = read_labels(out)
        assert k == 10
        assert np.array_equal(labels, doc["worse_label"])

    def test_aggre_kind_rate(self, tmp_path):
        archive = tmp_path / "labels.pt"
        _make_archive(archive)
        result = convert_noisy_labels(
            archive, "Aggre", tmp_path / "aggre.bin", expected_n=1000
        )
        assert result.empirical_noise_rate == pytest.approx(0.0903, abs=0.005)

    def test_clean_kind_zero_disagreement(self, tmp_path):
        archive = tmp_path / "labels.pt"
        _make_archive(archive)
        result = convert_noisy_labels(
            archive, "Clean", tmp_path / "clean.bin", expected_n=1000
        )
        assert result.empirical_noise_rate == 0.0

    def test_npy_archive(self, tmp_path):
        archive = tmp_path / "labels.npy"
        _make_archive(archive, fmt="npy")
        result = convert_noisy_labels(
            archive, "Rand1", tmp_path / "r1.bin", expected_n=1000
        )
        assert result.empirical_noise_rate == pytest.approx(0.1723, abs=0.005)

    def test_missing_kind(self, tmp_path):
        import torch

        archive = tmp_path / "bad.pt"
        torch.save({"clean_label": np.zeros(10, dtype=np.int64)}, archive)
        with pytest.raises(ArchiveError, match="no 'worse_label'"):
            convert_noisy_labels(archive, "Worst", tmp_path / "x.bin", expected_n=10)

    def test_count_mismatch(self, tmp_path):
        archive = tmp_path / "labels.pt"
        _make_archive(archive, n=1000)
        with pytest.raises(ArchiveError, match="expected 50000"):
            convert_noisy_labels(archive, "Worst", tmp_path / "x.bin")

    def test_unknown_kind(self, tmp_path):
        archive = tmp_path / "labels.pt"
        _make_archive(archive)
        with pytest.raises(ArchiveError, match="unknown label kind"):
            convert_noisy_labels(archive, "Best", tmp_path / "x.bin", expected_n=1000)

    def test_gross_rate_mismatch_rejected(self, tmp_path):
        # an archive whose "Worst" labels disagree 80% of the time is not
        # the published one
        import torch

        gen = np.random.Generator(np.random.Philox(9))
        clean = gen.integers(0, 10, size=1000)
        wrong = (clean + 1) % 10
        keep = gen.choice(1000, size=200, replace=False)
        wrong[keep] = clean[keep]
        archive = tmp_path / "off.pt"
        torch.save({"clean_label": clean, "worse_label": wrong}, archive)
        with pytest.raises(ArchiveError, match="far from the published"):
            convert_noisy_labels(archive, "Worst", tmp_path / "x.bin", expected_n=1000)
        # the escape hatch converts anyway
        result = convert_noisy_labels(
            archive, "Worst", tmp_path / "x.bin", expected_n=1000,
            check_noise_rate=False,
        )
        assert result.empirical_noise_rate == pytest.approx(0.8, abs=0.001)

    def test_label_out_of_range(self, tmp_path):
        import torch

        archive = tmp_path / "range.pt"
        torch.save({"worse_label": np.array([0, 10])}, archive)
        with pytest.raises(ArchiveError, match="out of range"):
            convert_noisy_labels(archive, "Worst", tmp_path / "x.bin", expected_n=2)
