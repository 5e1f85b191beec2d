"""Image dataset providers resolved by string identifier.

``cifar10`` / ``cifar100`` load through torchvision (downloading into
``FEATURE_EXPORT_DATA_DIR`` or ``~/.cache/feature-export``).  The
``image-folder:<path>`` provider reads a local directory whose immediate
subdirectories are class names holding image files; class indices follow
the sorted subdirectory order.  Splits: ``train``, ``test``, or ``all``
(image folders carry a single split, addressed as either ``train`` or
``all``).
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

from PIL import Image

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp", ".ppm")


class DatasetError(RuntimeError):
    """Unknown identifier, unavailable provider, or malformed folder."""


@dataclass(frozen=True)
class ImageDataset:
    """A fully materialized list of (path-or-image, label) pairs."""

    name: str
    split: str
    classes: tuple[str, ...]
    _items: tuple

    def __len__(self) -> int:
        return len(self._items)

    @property
    def k(self) -> int:
        return len(self.classes)

    def labels(self) -> list[int]:
        return [label for _, label in self._items]

    def iter_images(self) -> Iterator[tuple[Image.Image, int]]:
        for source, label in self._items:
            if isinstance(source, (str, Path)):
                with Image.open(source) as image:
                    yield image.convert("RGB"), label
            else:
                yield source, label


def _image_folder(path: str, split: str) -> ImageDataset:
    root = Path(path)
    if not root.is_dir():
        raise DatasetError(f"image folder {path!r} does not exist")
    if split not in ("train", "all"):
        raise DatasetError(f"image folders have a single split; got {split!r}")
    classes = tuple(sorted(p.name for p in root.iterdir() if p.is_dir()))
    if not classes:
        raise DatasetError(f"image folder {path!r} has no class subdirectories")
    items = []
    for label, cls in enumerate(classes):
        for file in sorted((root / cls).iterdir()):
            if file.suffix.lower() in IMAGE_SUFFIXES:
                items.append((file, label))
    if not items:
        raise DatasetError(f"image folder {path!r} contains no images")
    return ImageDataset(name=f"image-folder:{path}", split=split,
                        classes=classes, _items=tuple(items))


def _cifar(name: str, split: str) -> ImageDataset:
    try:
        from torchvision import datasets as tv_datasets
    except Exception as exc:
        raise DatasetError(f"torchvision unavailable for {name}: {exc}") from exc
    if split not in ("train", "test"):
        raise DatasetError(f"{name} split must be train or test, got {split!r}")
    root = os.environ.get(
        "FEATURE_EXPORT_DATA_DIR", str(Path.home() / ".cache" / "feature-export")
    )
    loader = tv_datasets.CIFAR10 if name == "cifar10" else tv_datasets.CIFAR100
    try:
        ds = loader(root=root, train=split == "train", download=True)
    except Exception as exc:
        raise DatasetError(f"{name} could not be fetched: {exc}") from exc
    items = tuple((Image.fromarray(ds.data[i]), int(ds.targets[i])) for i in range(len(ds.data)))
    return ImageDataset(name=name, split=split, classes=tuple(ds.classes), _items=items)


def load_dataset(identifier: str, split: str) -> ImageDataset:
    if identifier.startswith("image-folder:"):
        return _image_folder(identifier.split(":", 1)[1], split)
    if identifier in ("cifar10", "cifar100"):
        return _cifar(identifier, split)
    raise DatasetError(
        f"unknown dataset {identifier!r}; use cifar10, cifar100, or image-folder:<path>"
    )
