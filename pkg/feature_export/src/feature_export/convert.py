"""Convert distributed noisy-label archives into the binary label format.

The published archives are dictionaries of integer arrays: the ten-class
one carries keys ``clean_label``, ``aggre_label``, ``random_label1..3`` and
``worse_label``; the hundred-class one carries ``clean_label`` and
``noisy_label``.  Both the torch ``.pt`` serialization and a pickled
``.npy`` dictionary are accepted.

When the archive includes clean labels, the empirical disagreement of the
requested kind is spot-checked against its published rate; a gross mismatch
means the wrong archive was supplied and is treated as an error.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from relsignal.fileio import write_labels


class ArchiveError(RuntimeError):
    """Unreadable archive, missing kind, or failed consistency check."""


#: archive key and class count per label kind
LABEL_KINDS = {
    "Clean": ("clean_label", 10),
    "Aggre": ("aggre_label", 10),
    "Rand1": ("random_label1", 10),
    "Rand2": ("random_label2", 10),
    "Rand3": ("random_label3", 10),
    "Worst": ("worse_label", 10),
    "Noisy": ("noisy_label", 100),
    "Clean100": ("clean_label", 100),
}

#: published wrong-label rates, used for the spot check
PUBLISHED_NOISE_RATES = {
    "Clean": 0.0,
    "Aggre": 0.0903,
    "Rand1": 0.1723,
    "Rand2": 0.1812,
    "Rand3": 0.1764,
    "Worst": 0.4021,
    "Noisy": 0.4020,
    "Clean100": 0.0,
}

NOISE_RATE_TOLERANCE = 0.02


@dataclass(frozen=True)
class ConversionResult:
    kind: str
    n: int
    k: int
    out_file: str
    empirical_noise_rate: float | None

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "n": self.n,
            "k": self.k,
            "out_file": self.out_file,
            "empirical_noise_rate": self.empirical_noise_rate,
        }


def _load_archive(path: str | Path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ArchiveError(f"archive {path} does not exist")
    if path.suffix in (".pt", ".pth"):
        try:
            import torch
        except Exception as exc:
            raise ArchiveError(f"torch is needed to read {path.name}: {exc}") from exc
        try:
            doc = torch.load(path, map_location="cpu", weights_only=False)
        except TypeError:
            doc = torch.load(path, map_location="cpu")
    elif path.suffix == ".npy":
        doc = np.load(path, allow_pickle=True)
        if isinstance(doc, np.ndarray):
            doc = doc.item()
    else:
        raise ArchiveError(f"unsupported archive type {path.suffix!r}; use .pt or .npy")
    if not isinstance(doc, dict):
        raise ArchiveError(f"archive {path.name} is not a label dictionary")
    return {key: np.asarray(value) for key, value in doc.items()}


def convert_noisy_labels(
    archive: str | Path,
    label_kind: str,
    out: str | Path,
    expected_n: int = 50000,
    check_noise_rate: bool = True,
) -> ConversionResult:
    """Write the requested label kind as a binary label file."""
    if label_kind not in LABEL_KINDS:
        raise ArchiveError(
            f"unknown label kind {label_kind!r}; expected one of {sorted(LABEL_KINDS)}"
        )
    key, k = LABEL_KINDS[label_kind]
    doc = _load_archive(archive)
    if key not in doc:
        raise ArchiveError(
            f"archive has no {key!r} entry for kind {label_kind!r}; "
            f"present: {sorted(doc)}"
        )
    labels = doc[key].astype(np.int64).ravel()
    if labels.size != expected_n:
        raise ArchiveError(
            f"archive holds {labels.size} labels for {label_kind!r}, expected {expected_n}"
        )
    if labels.min() < 0 or labels.max() >= k:
        raise ArchiveError(f"labels out of range [0, {k}) for kind {label_kind!r}")

    rate = None
    if "clean_label" in doc and doc["clean_label"].size == labels.size:
        clean = doc["clean_label"].astype(np.int64).ravel()
        rate = float(np.mean(labels != clean))
        published = PUBLISHED_NOISE_RATES[label_kind]
        if check_noise_rate and abs(rate - published) > NOISE_RATE_TOLERANCE:
            raise ArchiveError(
                f"empirical noise rate {rate:.4f} for {label_kind!r} is far from the "
                f"published {published:.4f}; wrong archive?"
            )
    write_labels(labels, k, out)
    return ConversionResult(
        kind=label_kind, n=int(labels.size), k=k, out_file=str(out),
        empirical_noise_rate=rate,
    )
