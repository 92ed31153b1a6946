"""Shared fixtures: natural-photo test images and synthetic fields."""

from __future__ import annotations

import numpy as np
import pytest
from PIL import Image as PILImage

from blockshuffle import Image

_PHOTO_NAMES = ("astronaut", "chelsea", "coffee", "camera", "immunohistochemistry")


def _bundled_photos() -> dict[str, np.ndarray]:
    import skimage.data as d

    photos = {}
    for name in _PHOTO_NAMES:
        arr = getattr(d, name)()
        if arr.ndim == 2:
            arr = np.stack([arr] * 3, axis=-1)
        photos[name] = np.ascontiguousarray(arr[:, :, :3])
    return photos


def _resized(arr: np.ndarray, width: int, height: int) -> np.ndarray:
    pil = PILImage.fromarray(arr, mode="RGB")
    return np.asarray(pil.resize((width, height), PILImage.Resampling.BICUBIC))


def clouds(width: int, height: int, *, seed: int = 0) -> Image:
    """Smooth low-frequency field with a strong left-to-right brightness trend.

    Small interior gradients, but tile-local statistics vary a lot, which is
    exactly what trips up independently normalized tiles.
    """
    rng = np.random.default_rng(seed)
    coarse = rng.normal(0.0, 1.0, (10, 10, 3))
    pil = PILImage.fromarray(
        np.uint8(np.clip(coarse * 40 + 128, 0, 255)), mode="RGB"
    ).resize((width, height), PILImage.Resampling.BICUBIC)
    base = np.asarray(pil).astype(np.float64)
    ramp = np.linspace(-60.0, 60.0, width)[None, :, None]
    out = np.clip(base * 0.6 + 96 + ramp, 0, 255)
    return Image(out.astype(np.uint8))


def random_image(width: int, height: int, seed: int) -> Image:
    rng = np.random.default_rng(seed)
    return Image(rng.integers(0, 256, (height, width, 3), dtype=np.uint8))


@pytest.fixture(scope="session")
def photos() -> dict[str, Image]:
    """The five bundled photographs at native resolution."""
    return {name: Image(arr) for name, arr in _bundled_photos().items()}


@pytest.fixture(scope="session")
def photos_2048() -> dict[str, Image]:
    """The five photographs upscaled to 2048 x 2048."""
    return {
        name: Image(_resized(arr, 2048, 2048)) for name, arr in _bundled_photos().items()
    }


@pytest.fixture(scope="session")
def seam_fixtures() -> dict[str, Image]:
    """Five 640 x 640 fixtures for seam-quality comparisons: four photographs
    plus a smooth synthetic field with a strong global brightness trend."""
    photos = _bundled_photos()
    out = {
        name: Image(_resized(photos[name], 640, 640))
        for name in ("astronaut", "chelsea", "coffee", "immunohistochemistry")
    }
    out["clouds"] = clouds(640, 640, seed=7)
    return out
