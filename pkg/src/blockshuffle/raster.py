"""Image values, reflection padding, cropping, and PNG/JPEG codecs."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image as _PILImage
from PIL import UnidentifiedImageError

_FORMATS = {"png": "PNG", "jpeg": "JPEG"}
_JPEG_QUALITY = 95


class RasterError(Exception):
    """Base class for image I/O and geometry failures."""


class UnreadableFileError(RasterError):
    """The file does not exist or cannot be opened for reading."""


class UnsupportedFormatError(RasterError):
    """The file is not a PNG or JPEG stream."""


class CorruptStreamError(RasterError):
    """The stream was recognized but could not be decoded."""


class ImageWriteError(RasterError):
    """The output path could not be written."""


def quantize_u8(values: np.ndarray) -> np.ndarray:
    """Round half away from zero and clip to the 8-bit range."""
    rounded = np.floor(np.asarray(values) + 0.5)
    return np.clip(rounded, 0, 255).astype(np.uint8)


@dataclass(frozen=True, slots=True)
class Image:
    """An RGB raster held as an (H, W, 3) array.

    uint8 at the I/O boundary, float32 in [0, 255] for internal arithmetic.
    Instances are immutable; the pixel buffer is frozen on construction.
    """

    data: np.ndarray

    def __post_init__(self) -> None:
        d = self.data
        if not isinstance(d, np.ndarray) or d.ndim != 3 or d.shape[2] != 3:
            raise ValueError(f"expected an (H, W, 3) array, got shape {getattr(d, 'shape', None)}")
        if d.shape[0] < 1 or d.shape[1] < 1:
            raise ValueError("image must be at least 1x1")
        if d.dtype not in (np.uint8, np.float32):
            raise ValueError(f"unsupported dtype {d.dtype}; use uint8 or float32")
        d.setflags(write=False)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    def to_float(self) -> "Image":
        """View of this image with float32 samples (self if already float)."""
        if self.data.dtype == np.float32:
            return self
        return Image(self.data.astype(np.float32))

    def to_u8(self) -> "Image":
        """Quantized 8-bit version of this image (self if already uint8)."""
        if self.data.dtype == np.uint8:
            return self
        return Image(quantize_u8(self.data))


@dataclass(frozen=True, slots=True)
class Rect:
    """Axis-aligned pixel region: offsets plus extent."""

    x0: int
    y0: int
    width: int
    height: int

    def __post_init__(self) -> None:
        if self.x0 < 0 or self.y0 < 0:
            raise ValueError(f"negative rect origin ({self.x0}, {self.y0})")
        if self.width < 1 or self.height < 1:
            raise ValueError(f"empty rect {self.width}x{self.height}")


def load_image(path: str | Path) -> Image:
    """Decode a PNG or JPEG file into an 8-bit RGB image.

    Grayscale is promoted to RGB and any alpha channel is dropped.
    """
    try:
        stream = open(path, "rb")
    except OSError as exc:
        raise UnreadableFileError(f"cannot open {path}: {exc}") from exc
    with stream:
        try:
            pil = _PILImage.open(stream)
        except UnidentifiedImageError as exc:
            raise UnsupportedFormatError(f"{path} is not a recognized image") from exc
        if pil.format not in _FORMATS.values():
            raise UnsupportedFormatError(f"{path}: {pil.format} is not supported (PNG/JPEG only)")
        try:
            arr = np.asarray(pil.convert("RGB"), dtype=np.uint8)
        except (OSError, SyntaxError) as exc:
            raise CorruptStreamError(f"{path} could not be decoded: {exc}") from exc
    return Image(arr)


def save_image(image: Image, path: str | Path, format: str = "png") -> None:
    """Encode an image to `path` as PNG (lossless) or JPEG (quality 95)."""
    if format not in _FORMATS:
        raise ValueError(f"unknown format {format!r}; use 'png' or 'jpeg'")
    arr = image.to_u8().data
    pil = _PILImage.fromarray(arr, mode="RGB")
    kwargs = {"quality": _JPEG_QUALITY} if format == "jpeg" else {}
    try:
        pil.save(path, format=_FORMATS[format], **kwargs)
    except OSError as exc:
        raise ImageWriteError(f"cannot write {path}: {exc}") from exc


def reflect_pad(image: Image, left: int, top: int, right: int, bottom: int) -> Image:
    """Extend an image by mirroring without repeating the edge pixel.

    A row [a, b, c] padded by 2 on the left becomes [c, b, a, b, c]. Each pad
    must be smaller than the corresponding image dimension.
    """
    pads = (left, top, right, bottom)
    if any(p < 0 for p in pads):
        raise ValueError(f"negative pad in {pads}")
    if left >= image.width or right >= image.width:
        raise ValueError(f"horizontal pad {max(left, right)} >= width {image.width}")
    if top >= image.height or bottom >= image.height:
        raise ValueError(f"vertical pad {max(top, bottom)} >= height {image.height}")
    padded = np.pad(image.data, ((top, bottom), (left, right), (0, 0)), mode="reflect")
    return Image(padded)


def crop(image: Image, rect: Rect) -> Image:
    """Copy of the pixels inside `rect`, which must lie fully inside the image."""
    if rect.x0 + rect.width > image.width or rect.y0 + rect.height > image.height:
        raise ValueError(
            f"rect {rect} exceeds image {image.width}x{image.height}"
        )
    view = image.data[rect.y0 : rect.y0 + rect.height, rect.x0 : rect.x0 + rect.width]
    return Image(view.copy())
