import numpy as np
import pytest
from PIL import Image


@pytest.fixture
def smoke_dataset(tmp_path):
    """A 16-image two-class folder dataset with deterministic pixels."""
    gen = np.random.Generator(np.random.Philox(123))
    root = tmp_path / "smoke"
    for cls in ("cat", "dog"):
        (root / cls).mkdir(parents=True)
    for i in range(16):
        cls = "cat" if i < 8 else "dog"
        pixels = gen.integers(0, 256, size=(24, 24, 3), dtype=np.uint8)
        Image.fromarray(pixels).save(root / cls / f"img_{i:02d}.png")
    return root
