"""Bridge tool for the label-free feature-extraction step: runs a frozen
vision backbone over an image dataset and writes relsignal feature/label
files, and converts distributed noisy-label archives into the same label
format."""

from .backbones import Backbone, BackboneError, available_backbones, load_backbone
from .convert import ArchiveError, ConversionResult, convert_noisy_labels
from .datasets import DatasetError, ImageDataset, load_dataset
from .export import ExportError, ExportManifest, export_features

__version__ = "0.1.0"
