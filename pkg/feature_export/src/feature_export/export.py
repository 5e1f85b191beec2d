"""Feature-file export: frozen backbone over a dataset, three artifacts out.

Writes ``<dataset>_<split>.features`` (float32 feature file),
``<dataset>_<split>.labels`` (binary label file), and a JSON manifest
carrying the backbone identifier, its preprocessing recipe, the feature
dimension, the row count, and SHA-256 checksums of the emitted bytes.
Re-running with identical weights and preprocessing reproduces identical
checksums.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from relsignal.fileio import write_features, write_labels

from .backbones import Backbone, load_backbone
from .datasets import ImageDataset, load_dataset


class ExportError(RuntimeError):
    """Emitted artifacts violate the manifest contract."""


@dataclass(frozen=True)
class ExportManifest:
    dataset: str
    split: str
    backbone: str
    preprocessing: str
    feature_dim: int
    row_count: int
    k: int
    features_file: str
    labels_file: str
    features_sha256: str
    labels_sha256: str

    def to_json_dict(self) -> dict:
        return asdict(self)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "-", text).strip("-")


def export_features(
    dataset: str | ImageDataset,
    split: str,
    backbone: str | Backbone,
    out_dir: str | Path,
    batch_size: int = 64,
) -> ExportManifest:
    """Run the backbone over every image and write the three artifacts."""
    ds = dataset if isinstance(dataset, ImageDataset) else load_dataset(dataset, split)
    bb = backbone if isinstance(backbone, Backbone) else load_backbone(backbone)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    blocks: list[np.ndarray] = []
    batch: list = []
    for image, _label in ds.iter_images():
        batch.append(image.copy())
        if len(batch) == batch_size:
            blocks.append(bb.embed_batch(batch))
            batch = []
    if batch:
        blocks.append(bb.embed_batch(batch))
    features = (
        np.concatenate(blocks) if blocks else np.zeros((0, bb.dim), dtype=np.float32)
    )
    labels = np.asarray(ds.labels(), dtype=np.int64)
    if features.shape[0] != labels.size:
        raise ExportError(
            f"row count {features.shape[0]} != label count {labels.size}"
        )
    if features.shape[1] != bb.dim:
        raise ExportError(f"feature dim {features.shape[1]} drifted from backbone {bb.dim}")

    stem = f"{_slug(ds.name)}_{ds.split}"
    features_path = out_dir / f"{stem}.features"
    labels_path = out_dir / f"{stem}.labels"
    write_features(features, np.float32, features_path)
    write_labels(labels, ds.k, labels_path)

    manifest = ExportManifest(
        dataset=ds.name,
        split=ds.split,
        backbone=bb.name,
        preprocessing=bb.preprocessing,
        feature_dim=bb.dim,
        row_count=int(labels.size),
        k=ds.k,
        features_file=features_path.name,
        labels_file=labels_path.name,
        features_sha256=_sha256(features_path),
        labels_sha256=_sha256(labels_path),
    )
    (out_dir / f"{stem}.manifest.json").write_text(
        json.dumps(manifest.to_json_dict(), indent=2) + "\n"
    )
    return manifest
