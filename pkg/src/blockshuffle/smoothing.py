"""Edge-preserving cleanup: iterated bilateral filtering of the stitched result."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .raster import Image

try:
    from numba import njit, prange

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency
    _HAVE_NUMBA = False


@dataclass(frozen=True, slots=True)
class BilateralParams:
    """Bilateral filter parameters: sigma_color in intensity units (0-255 scale),
    sigma_space and radius in pixels."""

    sigma_color: float
    sigma_space: float
    radius: int

    def __post_init__(self) -> None:
        if self.sigma_color <= 0 or self.sigma_space <= 0:
            raise ValueError("sigma_color and sigma_space must be strictly positive")
        if self.radius < 1:
            raise ValueError(f"radius must be >= 1, got {self.radius}")

    @classmethod
    def from_sigmas(cls, sigma_color: float, sigma_space: float) -> "BilateralParams":
        """Radius = ceil(2 * sigma_space), truncating the spatial Gaussian at 2 sigma."""
        return cls(sigma_color, sigma_space, max(1, math.ceil(2 * sigma_space)))


if _HAVE_NUMBA:

    @njit(parallel=True, cache=True)
    def _bilateral_kernel(padded, out, radius, inv2ss, inv2sc):  # pragma: no cover - compiled
        height, width = out.shape[0], out.shape[1]
        for y in prange(height):
            for x in range(width):
                for ch in range(3):
                    center = padded[y + radius, x + radius, ch]
                    num = 0.0
                    den = 0.0
                    for dy in range(-radius, radius + 1):
                        for dx in range(-radius, radius + 1):
                            v = padded[y + radius + dy, x + radius + dx, ch]
                            d = v - center
                            w = math.exp(-(dy * dy + dx * dx) * inv2ss - d * d * inv2sc)
                            num += w * d
                            den += w
                    # accumulate differences from the center so a constant
                    # window comes back bit-exact (num == 0)
                    out[y, x, ch] = center + num / den


def _bilateral_numpy(padded: np.ndarray, radius: int, inv2ss: float, inv2sc: float) -> np.ndarray:
    height = padded.shape[0] - 2 * radius
    width = padded.shape[1] - 2 * radius
    center = padded[radius : radius + height, radius : radius + width].astype(np.float64)
    num = np.zeros((height, width, 3))
    den = np.zeros((height, width, 3))
    for dy in range(-radius, radius + 1):
        for dx in range(-radius, radius + 1):
            win = padded[
                radius + dy : radius + dy + height, radius + dx : radius + dx + width
            ].astype(np.float64)
            d = win - center
            w = np.exp(-(dy * dy + dx * dx) * inv2ss - d * d * inv2sc)
            num += w * d
            den += w
    return (center + num / den).astype(np.float32)


def bilateral(image: Image, params: BilateralParams) -> Image:
    """Single bilateral pass over each channel: per pixel, the Gaussian-space,
    Gaussian-color weighted mean of its (2*radius+1)^2 window.

    Borders are mirror-extended (edge pixel not duplicated). Returns float
    pixels; quantize once at the end of the whole pipeline, not per pass.
    """
    arr = image.to_float().data
    radius = params.radius
    padded = np.pad(arr, ((radius, radius), (radius, radius), (0, 0)), mode="reflect")
    inv2ss = 1.0 / (2.0 * params.sigma_space**2)
    inv2sc = 1.0 / (2.0 * params.sigma_color**2)
    if _HAVE_NUMBA:
        out = np.empty_like(arr)
        _bilateral_kernel(padded, out, radius, inv2ss, inv2sc)
    else:  # pragma: no cover
        out = _bilateral_numpy(padded, radius, inv2ss, inv2sc)
    return Image(out)


SMOOTH_PASSES = 4
SMOOTH_SIGMA = 10.0


def smooth(image: Image) -> Image:
    """Four sequential small bilateral passes (sigma_color = sigma_space = 10).

    Several small passes cost far less than one wide pass (window area grows
    with radius squared) while smoothing comparably.
    """
    params = BilateralParams.from_sigmas(SMOOTH_SIGMA, SMOOTH_SIGMA)
    out = image
    for _ in range(SMOOTH_PASSES):
        out = bilateral(out, params)
    return out
