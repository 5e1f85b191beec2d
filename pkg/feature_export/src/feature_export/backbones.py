"""Frozen vision backbones resolved by string identifier.

The registry never bundles weights: pretrained models are pulled through
their providers' published loaders (torch.hub for the DINOv2 family,
torchvision for ResNet-50) at call time.  ``patch-mean-16`` is a
weight-free deterministic featurizer (bilinear resize to a 16x16 grid per
RGB channel) that exists so pipelines and tests can run fully offline.

Every backbone records its preprocessing recipe; the export manifest copies
it verbatim so emitted features stay attributable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np
from PIL import Image


class BackboneError(RuntimeError):
    """Unknown identifier or unavailable provider."""


@dataclass(frozen=True)
class Backbone:
    """A frozen image featurizer: PIL images in, float32 rows out."""

    name: str
    dim: int
    preprocessing: str
    _embed: Callable[[list[Image.Image]], np.ndarray]

    def embed_batch(self, images: list[Image.Image]) -> np.ndarray:
        out = self._embed(images)
        out = np.ascontiguousarray(out, dtype=np.float32)
        if out.shape != (len(images), self.dim):
            raise BackboneError(
                f"backbone {self.name} returned shape {out.shape}, "
                f"expected ({len(images)}, {self.dim})"
            )
        return out


def _patch_mean_embed(images: list[Image.Image]) -> np.ndarray:
    rows = []
    for image in images:
        small = image.convert("RGB").resize((16, 16), Image.BILINEAR)
        rows.append(np.asarray(small, dtype=np.float32).transpose(2, 0, 1).ravel() / 255.0)
    return np.stack(rows)


def _patch_mean_backbone() -> Backbone:
    return Backbone(
        name="patch-mean-16",
        dim=16 * 16 * 3,
        preprocessing="convert to RGB, bilinear resize to 16x16, scale to [0,1], CHW flatten",
        _embed=_patch_mean_embed,
    )


_DINOV2_DIMS = {
    "dinov2-vits14": ("dinov2_vits14", 384),
    "dinov2-vitb14": ("dinov2_vitb14", 768),
    "dinov2-vitl14": ("dinov2_vitl14", 1024),
    "dinov2-vitg14": ("dinov2_vitg14", 1536),
}

_TORCH_PREPROCESSING = (
    "convert to RGB, resize shorter side to 256 (bicubic), center crop 224, "
    "scale to [0,1], normalize mean (0.485, 0.456, 0.406) std (0.229, 0.224, 0.225)"
)


def _torch_batch(images: list[Image.Image]):
    import torch
    from torchvision import transforms

    pipe = transforms.Compose(
        [
            transforms.Lambda(lambda im: im.convert("RGB")),
            transforms.Resize(256, interpolation=transforms.InterpolationMode.BICUBIC),
            transforms.CenterCrop(224),
            transforms.ToTensor(),
            transforms.Normalize((0.485, 0.456, 0.406), (0.229, 0.224, 0.225)),
        ]
    )
    return torch.stack([pipe(image) for image in images])


def _dinov2_backbone(name: str) -> Backbone:
    import torch

    hub_name, dim = _DINOV2_DIMS[name]
    model = torch.hub.load("facebookresearch/dinov2", hub_name)
    model.eval()

    def embed(images: list[Image.Image]) -> np.ndarray:
        with torch.no_grad():
            return model(_torch_batch(images)).cpu().numpy()

    return Backbone(name=name, dim=dim, preprocessing=_TORCH_PREPROCESSING, _embed=embed)


def _resnet50_backbone() -> Backbone:
    import torch
    from torchvision.models import ResNet50_Weights, resnet50

    model = resnet50(weights=ResNet50_Weights.IMAGENET1K_V1)
    model.fc = torch.nn.Identity()
    model.eval()

    def embed(images: list[Image.Image]) -> np.ndarray:
        with torch.no_grad():
            return model(_torch_batch(images)).cpu().numpy()

    return Backbone(name="resnet50-imagenet", dim=2048,
                    preprocessing=_TORCH_PREPROCESSING, _embed=embed)


def available_backbones() -> list[str]:
    return ["patch-mean-16", "resnet50-imagenet", *sorted(_DINOV2_DIMS)]


def load_backbone(name: str) -> Backbone:
    """Resolve a backbone identifier; provider failures surface as
    BackboneError with the underlying cause attached."""
    try:
        if name == "patch-mean-16":
            return _patch_mean_backbone()
        if name in _DINOV2_DIMS:
            return _dinov2_backbone(name)
        if name == "resnet50-imagenet":
            return _resnet50_backbone()
    except BackboneError:
        raise
    except Exception as exc:
        raise BackboneError(f"backbone {name!r} could not be loaded: {exc}") from exc
    raise BackboneError(f"unknown backbone {name!r}; available: {available_backbones()}")
