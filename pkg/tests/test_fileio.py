import hashlib
import struct

import numpy as np
import pytest

from relsignal.fileio import (
    FEATURE_MAGIC,
    FileFormatError,
    LABEL_MAGIC,
    read_features,
    read_labels,
    write_features,
    write_labels,
)


class TestFeatureFiles:
    @pytest.mark.parametrize("dtype", [np.float32, np.float64])
    def test_round_trip_bit_identical(self, tmp_path, dtype, gen):
        matrix = gen.standard_normal((17, 5)).astype(dtype)
        path = tmp_path / "features.bin"
        write_features(matrix, dtype, path)
        again = read_features(path)
        assert again.dtype == np.dtype(dtype)
        assert np.array_equal(again, matrix)
        # writing the read-back copy reproduces the same bytes
        path2 = tmp_path / "copy.bin"
        write_features(again, dtype, path2)
        assert path.read_bytes() == path2.read_bytes()

    def test_empty_matrix(self, tmp_path):
        path = tmp_path / "empty.bin"
        write_features(np.zeros((0, 8)), np.float32, path)
        out = read_features(path)
        assert out.shape == (0, 8)

    def test_golden_layout(self, tmp_path):
        # pins the byte layout: header fields then row-major LE payload
        matrix = np.array([[1.0, -2.5], [0.5, 4.0]], dtype=np.float32)
        path = tmp_path / "golden.bin"
        write_features(matrix, np.float32, path)
        blob = path.read_bytes()
        assert blob[:8] == FEATURE_MAGIC
        assert struct.unpack("<Q", blob[8:16])[0] == 2
        assert struct.unpack("<Q", blob[16:24])[0] == 2
        assert blob[24] == 4
        assert blob[25:32] == b"\x00" * 7
        assert blob[32:] == struct.pack("<4f", 1.0, -2.5, 0.5, 4.0)
        assert hashlib.sha256(blob).hexdigest() == (
            "b6c5400cdf6d9a6c40d1bfbd68b39df3aed57467191434404e36a33a8fbe721d"
        )

    def test_wrong_magic_rejected(self, tmp_path):
        path = tmp_path / "bad.bin"
        write_features(np.ones((1, 1)), np.float64, path)
        blob = bytearray(path.read_bytes())
        blob[:8] = b"NOTMAGIC"
        path.write_bytes(bytes(blob))
        with pytest.raises(FileFormatError):
            read_features(path)

    def test_truncated_payload_rejected(self, tmp_path):
        path = tmp_path / "short.bin"
        write_features(np.ones((4, 4)), np.float64, path)
        blob = path.read_bytes()
        path.write_bytes(blob[:-8])
        with pytest.raises(FileFormatError):
            read_features(path)

    def test_non_finite_rejected(self, tmp_path):
        with pytest.raises(FileFormatError):
            write_features(np.array([[np.inf]]), np.float64, tmp_path / "inf.bin")

    def test_unsupported_dtype_rejected(self, tmp_path):
        with pytest.raises(FileFormatError):
            write_features(np.ones((1, 1)), np.int32, tmp_path / "int.bin")


class TestLabelFiles:
    def test_binary_round_trip(self, tmp_path, gen):
        labels = gen.integers(0, 10, size=10**5)
        path = tmp_path / "labels.bin"
        write_labels(labels, 10, path)
        again, k = read_labels(path)
        assert k == 10
        assert np.array_equal(again, labels)

    def test_csv_round_trip(self, tmp_path, gen):
        labels = gen.integers(0, 4, size=200)
        path = tmp_path / "labels.csv"
        write_labels(labels, 4, path)
        again, k = read_labels(path, 4)
        assert np.array_equal(again, labels)

    def test_csv_binary_interconvertible(self, tmp_path, gen):
        labels = gen.integers(0, 7, size=300)
        csv_path = tmp_path / "a.csv"
        bin_path = tmp_path / "a.bin"
        write_labels(labels, 7, csv_path)
        first, k = read_labels(csv_path, 7)
        write_labels(first, k, bin_path)
        second, _ = read_labels(bin_path)
        csv_again = tmp_path / "b.csv"
        write_labels(second, 7, csv_again)
        assert csv_path.read_bytes() == csv_again.read_bytes()

    def test_golden_binary_layout(self, tmp_path):
        path = tmp_path / "golden.bin"
        write_labels(np.array([3, 0, 2]), 4, path)
        blob = path.read_bytes()
        assert blob[:8] == LABEL_MAGIC
        assert struct.unpack("<Q", blob[8:16])[0] == 3
        assert struct.unpack("<I", blob[16:20])[0] == 4
        assert blob[20:] == struct.pack("<3I", 3, 0, 2)
        assert hashlib.sha256(blob).hexdigest() == (
            "c9267ee34b16e7462228e59007decc918c7a62793b48d6fe9ad0fdb95e0261bd"
        )

    def test_label_at_k_rejected(self, tmp_path):
        with pytest.raises(FileFormatError):
            write_labels(np.array([0, 3]), 3, tmp_path / "bad.bin")

    def test_csv_requires_complete_index(self, tmp_path):
        path = tmp_path / "gap.csv"
        path.write_text("index,label\n0,1\n2,0\n")
        with pytest.raises(FileFormatError):
            read_labels(path, 2)

    def test_csv_malformed_row(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("index,label\n0,1,9\n")
        with pytest.raises(FileFormatError):
            read_labels(path, 2)

    def test_k_mismatch_rejected(self, tmp_path):
        path = tmp_path / "labels.bin"
        write_labels(np.array([0, 1]), 5, path)
        with pytest.raises(FileFormatError):
            read_labels(path, 3)
