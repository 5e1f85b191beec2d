"""Binary and CSV carriers for feature matrices and label vectors.

Feature files (magic ``NIERMFE1``):

    magic     8 bytes
    n_rows    u64, little-endian
    n_cols    u64, little-endian
    dtype     1 byte: 4 = 32-bit float, 8 = 64-bit float
    padding   7 zero bytes
    payload   row-major little-endian values

Label files are either binary (magic ``NIERMLB1``; n u64 LE, k u32 LE, then
one u32 LE per label) or CSV with header ``index,label`` and a complete
0..n-1 index column.  Both layouts are little-endian on every platform.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

__all__ = [
    "FileFormatError",
    "FEATURE_MAGIC",
    "LABEL_MAGIC",
    "write_features",
    "read_features",
    "write_labels",
    "read_labels",
]

FEATURE_MAGIC = b"NIERMFE1"
LABEL_MAGIC = b"NIERMLB1"

_FEATURE_HEADER = struct.Struct("<8sQQB7x")
_LABEL_HEADER = struct.Struct("<8sQI")

_DTYPE_CODES = {4: np.dtype("<f4"), 8: np.dtype("<f8")}


class FileFormatError(ValueError):
    """Malformed, truncated, or out-of-contract file content."""


def write_features(matrix: np.ndarray, dtype: str | np.dtype, path: str | Path) -> None:
    """Write a 2-D float matrix; dtype must be float32 or float64."""
    arr = np.asarray(matrix)
    if arr.ndim != 2:
        raise FileFormatError(f"feature matrix must be 2-D, got shape {arr.shape}")
    if arr.size and not np.all(np.isfinite(arr)):
        raise FileFormatError("feature matrix contains non-finite values")
    dt = np.dtype(dtype)
    code = {np.dtype(np.float32): 4, np.dtype(np.float64): 8}.get(dt.newbyteorder("="))
    if code is None:
        raise FileFormatError(f"unsupported dtype {dtype!r}; use float32 or float64")
    payload = np.ascontiguousarray(arr, dtype=_DTYPE_CODES[code]).tobytes()
    header = _FEATURE_HEADER.pack(FEATURE_MAGIC, arr.shape[0], arr.shape[1], code)
    Path(path).write_bytes(header + payload)


def read_features(path: str | Path) -> np.ndarray:
    """Read a feature file back at its stored precision."""
    blob = Path(path).read_bytes()
    if len(blob) < _FEATURE_HEADER.size:
        raise FileFormatError(f"file too short for a feature header: {len(blob)} bytes")
    magic, n_rows, n_cols, code = _FEATURE_HEADER.unpack_from(blob)
    if magic != FEATURE_MAGIC:
        raise FileFormatError(f"bad magic {magic!r}, expected {FEATURE_MAGIC!r}")
    if code not in _DTYPE_CODES:
        raise FileFormatError(f"unknown dtype code {code}")
    expected = n_rows * n_cols * code
    payload = blob[_FEATURE_HEADER.size :]
    if len(payload) != expected:
        raise FileFormatError(
            f"payload is {len(payload)} bytes, expected {expected} for "
            f"{n_rows} x {n_cols} at {code} bytes per value"
        )
    arr = np.frombuffer(payload, dtype=_DTYPE_CODES[code]).reshape(n_rows, n_cols)
    arr = arr.astype(arr.dtype.newbyteorder("="))
    if arr.size and not np.all(np.isfinite(arr)):
        raise FileFormatError("feature payload contains non-finite values")
    return arr


def write_labels(
    labels: np.ndarray,
    k: int,
    path: str | Path,
    fmt: str | None = None,
) -> None:
    """Write labels as binary or CSV (inferred from a .csv suffix)."""
    labels = np.asarray(labels, dtype=np.int64)
    if labels.ndim != 1:
        raise FileFormatError(f"labels must be 1-D, got shape {labels.shape}")
    if labels.size and (labels.min() < 0 or labels.max() >= k):
        raise FileFormatError(f"labels out of range [0, {k})")
    path = Path(path)
    if fmt is None:
        fmt = "csv" if path.suffix.lower() == ".csv" else "binary"
    if fmt == "csv":
        lines = ["index,label"]
        lines += [f"{i},{int(v)}" for i, v in enumerate(labels)]
        path.write_text("\n".join(lines) + "\n")
    elif fmt == "binary":
        header = _LABEL_HEADER.pack(LABEL_MAGIC, labels.size, k)
        path.write_bytes(header + labels.astype("<u4").tobytes())
    else:
        raise FileFormatError(f"unknown label format {fmt!r}")


def read_labels(path: str | Path, k: int | None = None) -> tuple[np.ndarray, int]:
    """Read labels from either layout; returns (labels, k).

    CSV files do not carry k, so it must be supplied (or is inferred as
    max label + 1 when omitted).
    """
    path = Path(path)
    blob = path.read_bytes()
    if blob.startswith(LABEL_MAGIC):
        if len(blob) < _LABEL_HEADER.size:
            raise FileFormatError("file too short for a label header")
        _, n, k_stored = _LABEL_HEADER.unpack_from(blob)
        payload = blob[_LABEL_HEADER.size :]
        if len(payload) != n * 4:
            raise FileFormatError(f"payload is {len(payload)} bytes, expected {n * 4}")
        labels = np.frombuffer(payload, dtype="<u4").astype(np.int64)
        if k is not None and k != k_stored:
            raise FileFormatError(f"file has k={k_stored}, caller expects k={k}")
        k = int(k_stored)
    else:
        text = blob.decode("utf-8")
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0].strip().lower() != "index,label":
            raise FileFormatError("CSV label file must start with header 'index,label'")
        pairs = []
        for ln in lines[1:]:
            parts = ln.split(",")
            if len(parts) != 2:
                raise FileFormatError(f"malformed CSV row: {ln!r}")
            try:
                pairs.append((int(parts[0]), int(parts[1])))
            except ValueError as exc:
                raise FileFormatError(f"non-integer CSV row: {ln!r}") from exc
        indices = [i for i, _ in pairs]
        if sorted(indices) != list(range(len(pairs))):
            raise FileFormatError("CSV index column must be a complete 0..n-1 range")
        ordered = [0] * len(pairs)
        for i, v in pairs:
            ordered[i] = v
        labels = np.asarray(ordered, dtype=np.int64)
        if k is None:
            k = int(labels.max()) + 1 if labels.size else 0
    if labels.size and (labels.min() < 0 or labels.max() >= k):
        raise FileFormatError(f"labels out of range [0, {k})")
    return labels, int(k)
