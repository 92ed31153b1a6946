"""Pluggable image-to-image transforms: reference implementations and a subprocess adapter."""

from __future__ import annotations

import shlex
import shutil
import subprocess
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .raster import Image, RasterError, load_image, quantize_u8, save_image

_EPS = 1e-6  # zero-variance guard for global_normalize


class TransformError(Exception):
    """A transform failed or violated its contract."""


class ExternalCommandError(TransformError):
    """Subprocess stylizer failed; carries exit status and captured stderr."""

    def __init__(self, message: str, returncode: int | None = None, stderr: str = ""):
        super().__init__(message)
        self.returncode = returncode
        self.stderr = stderr


@dataclass(frozen=True)
class Transform:
    """An opaque stylizer: maps an RGB image to an RGB image of the same size."""

    name: str
    deterministic: bool
    _fn: Callable[[Image], Image]

    def apply(self, image: Image) -> Image:
        out = self._fn(image)
        if (out.width, out.height) != (image.width, image.height):
            raise TransformError(
                f"{self.name}: output {out.width}x{out.height} does not match "
                f"input {image.width}x{image.height}"
            )
        return out

    def __call__(self, image: Image) -> Image:
        return self.apply(image)


def identity() -> Transform:
    """Transform that returns its input unchanged."""
    return Transform("identity", True, lambda image: image)


def _as_curves(curves: Sequence[Sequence[int]]) -> np.ndarray:
    arr = np.asarray(curves)
    if arr.shape != (3, 256):
        raise ValueError(f"expected a 3x256 table, got shape {arr.shape}")
    if not np.issubdtype(arr.dtype, np.integer) or arr.min() < 0 or arr.max() > 255:
        raise ValueError("curve entries must be integers in 0..255")
    return arr.astype(np.uint8)


def pointwise_lut(curves: Sequence[Sequence[int]]) -> Transform:
    """Per-channel lookup-table transform; output is independent of pixel position."""
    table = _as_curves(curves)

    def _apply(image: Image) -> Image:
        arr = image.data
        idx = arr if arr.dtype == np.uint8 else quantize_u8(arr)
        out = np.empty_like(idx)
        for ch in range(3):
            out[..., ch] = table[ch][idx[..., ch]]
        if arr.dtype != np.uint8:
            return Image(out.astype(np.float32))
        return Image(out)

    return Transform("lut", True, _apply)


def global_normalize(
    target_mean: float | Sequence[float], target_std: float | Sequence[float]
) -> Transform:
    """Shift each channel to a target mean/std computed from the whole input.

    The output depends on the global pixel statistics of whatever image the
    transform is applied to, which is exactly what makes independently
    stylized tiles disagree at their borders.
    """
    mean = np.broadcast_to(np.asarray(target_mean, np.float64), (3,)).copy()
    std = np.broadcast_to(np.asarray(target_std, np.float64), (3,)).copy()
    if np.any(std <= 0):
        raise ValueError(f"target std must be positive, got {std}")

    def _apply(image: Image) -> Image:
        arr = image.data.astype(np.float64)
        in_mean = arr.mean(axis=(0, 1))
        in_std = np.maximum(arr.std(axis=(0, 1)), _EPS)
        out = (arr - in_mean) / in_std * std + mean
        return Image(np.clip(out, 0.0, 255.0).astype(np.float32))

    return Transform("gnorm", True, _apply)


def external_command(
    command_template: str, workdir: str | Path | None = None, deterministic: bool = False
) -> Transform:
    """Adapter for an external stylizer invoked per image via temp PNG files.

    The template is tokenized with shell rules and must contain `{in}` and
    `{out}` placeholders, e.g. ``"python stylize.py --input {in} --output {out}"``.
    Each invocation uses its own temp directory, so concurrent calls never
    collide.
    """
    if "{in}" not in command_template or "{out}" not in command_template:
        raise ValueError("command template must contain both {in} and {out}")
    tokens = shlex.split(command_template)
    base = Path(workdir) if workdir is not None else None

    def _apply(image: Image) -> Image:
        tmp = Path(tempfile.mkdtemp(prefix="stylize-", dir=base))
        try:
            in_path = tmp / "in.png"
            out_path = tmp / "out.png"
            save_image(image, in_path, "png")
            args = [t.format_map({"in": str(in_path), "out": str(out_path)}) for t in tokens]
            result = subprocess.run(args, capture_output=True, text=True)
            if result.returncode != 0:
                raise ExternalCommandError(
                    f"command exited with status {result.returncode}",
                    returncode=result.returncode,
                    stderr=result.stderr,
                )
            try:
                out = load_image(out_path)
            except RasterError as exc:
                raise ExternalCommandError(
                    f"command produced no readable output image: {exc}",
                    returncode=result.returncode,
                    stderr=result.stderr,
                ) from exc
            return out
        finally:
            shutil.rmtree(tmp, ignore_errors=True)

    return Transform("cmd", deterministic, _apply)
