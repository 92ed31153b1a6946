"""Reference tiling methods: whole-image oracle, naive partition, feathered overlap."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from .raster import Image
from .tiler import FeatherCanvas, feather_profile
from .transforms import Transform


@dataclass(frozen=True, slots=True)
class TileConfig:
    """Tile side and, for the feathered method, overlap width (pixels)."""

    tile: int = 1000
    overlap: int = 128

    def __post_init__(self) -> None:
        if self.tile < 1:
            raise ValueError(f"tile must be >= 1, got {self.tile}")
        if not 0 <= self.overlap < self.tile:
            raise ValueError(
                f"overlap must satisfy 0 <= overlap < tile, got {self.overlap} vs {self.tile}"
            )


def whole(image: Image, transform: Transform) -> Image:
    """Unbudgeted oracle: the transform applied to the full image in one call."""
    return transform.apply(image).to_u8()


def _run_tiles(
    produce: Callable[[int], np.ndarray], n: int, workers: int
) -> Iterator[tuple[int, np.ndarray]]:
    # results always surface in tile index order, whatever the schedule
    if workers <= 1:
        for i in range(n):
            yield i, produce(i)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        wave = workers * 2
        for start in range(0, n, wave):
            futures = [pool.submit(produce, i) for i in range(start, min(start + wave, n))]
            for i, fut in enumerate(futures, start):
                yield i, fut.result()


def naive_tiles(
    image: Image, transform: Transform, cfg: TileConfig = TileConfig(), workers: int = 1
) -> Image:
    """Partition into tile x tile cells (edge cells smaller), transform each
    independently, and butt-join the results without blending.

    The seam-prone reference: nothing ties adjacent cells together.
    """
    arr = image.data
    origins = [
        (y0, x0)
        for y0 in range(0, image.height, cfg.tile)
        for x0 in range(0, image.width, cfg.tile)
    ]
    out = np.empty((image.height, image.width, 3), np.float32)

    def produce(i: int) -> np.ndarray:
        y0, x0 = origins[i]
        cell = arr[y0 : y0 + cfg.tile, x0 : x0 + cfg.tile]
        return transform.apply(Image(cell)).to_float().data

    for i, res in _run_tiles(produce, len(origins), workers):
        y0, x0 = origins[i]
        out[y0 : y0 + res.shape[0], x0 : x0 + res.shape[1]] = res
    return Image(out).to_u8()


def _window_origins(size: int, tile: int, step: int) -> list[int]:
    xs = [0]
    while xs[-1] + tile < size:
        xs.append(xs[-1] + step)
    return xs


def feather_tiles(
    image: Image, transform: Transform, cfg: TileConfig = TileConfig(), workers: int = 1
) -> Image:
    """Overlapping tiles on stride (tile - overlap), each transformed, then
    blended with the same distance-weighted feathering as the block stitcher.

    Adjacent windows overlap by exactly `overlap` pixels (the final window is
    clipped at the image edge, never shifted back), so the stitch weights pair
    up as (d_l, d_r) with d_l + d_r == overlap across every seam.
    """
    if cfg.overlap < 1:
        raise ValueError("feathered tiling needs overlap >= 1")
    step = cfg.tile - cfg.overlap
    xs = _window_origins(image.width, cfg.tile, step)
    ys = _window_origins(image.height, cfg.tile, step)
    jobs = [(y0, x0) for y0 in ys for x0 in xs]
    arr = image.data
    canvas = FeatherCanvas(image.width, image.height)
    profiles: dict[tuple, np.ndarray] = {}

    def profile(length: int, has_rise: bool, has_fall: bool) -> np.ndarray:
        key = (length, has_rise, has_fall)
        if key not in profiles:
            profiles[key] = feather_profile(length, has_rise, has_fall, cfg.overlap)
        return profiles[key]

    def produce(i: int) -> np.ndarray:
        y0, x0 = jobs[i]
        cell = arr[y0 : y0 + cfg.tile, x0 : x0 + cfg.tile]
        return transform.apply(Image(cell)).to_float().data

    for i, res in _run_tiles(produce, len(jobs), workers):
        y0, x0 = jobs[i]
        h, w = res.shape[:2]
        canvas.add_profiles(
            res,
            x0,
            y0,
            profile(w, x0 > 0, x0 + w < image.width),
            profile(h, y0 > 0, y0 + h < image.height),
        )
    return Image(canvas.composite()).to_u8()
