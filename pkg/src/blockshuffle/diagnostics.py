"""Quantitative evidence: histograms, error metrics, overhead and budget accounting."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .raster import Image, quantize_u8
from .tiler import (
    BlockGrid,
    BudgetExceededError,
    PipelineConfig,
    RunRecord,
    _geometry,
    _pack_subimage,
    _plan_slots,
    cut,
    expand,
    shuffle,
)

_NORM_TOL = 1e-6


@dataclass(frozen=True, slots=True, eq=False)
class Histogram:
    """Per-channel normalized 256-bin frequency table, shape (3, 256)."""

    bins: np.ndarray

    def __post_init__(self) -> None:
        b = np.asarray(self.bins, dtype=np.float64)
        if b.shape != (3, 256):
            raise ValueError(f"bins must have shape (3, 256), got {b.shape}")
        if (b < 0).any():
            raise ValueError("bins must be non-negative")
        if np.abs(b.sum(axis=1) - 1.0).max() > 1e-9:
            raise ValueError("per-channel bins must sum to 1")
        b.setflags(write=False)
        object.__setattr__(self, "bins", b)


def rgb_histogram(image: Image) -> Histogram:
    """Normalized 256-bin histogram of each channel (float pixels are quantized first)."""
    arr = image.data
    if arr.dtype != np.uint8:
        arr = quantize_u8(arr)
    n = arr.shape[0] * arr.shape[1]
    bins = np.stack(
        [np.bincount(arr[:, :, c].ravel(), minlength=256) for c in range(3)]
    ).astype(np.float64)
    return Histogram(bins / n)


def _as_bins(h: "Histogram | np.ndarray") -> np.ndarray:
    b = h.bins if isinstance(h, Histogram) else np.asarray(h, dtype=np.float64)
    if b.shape != (3, 256):
        raise ValueError(f"expected (3, 256) histogram, got {b.shape}")
    if (b < 0).any() or np.abs(b.sum(axis=1) - 1.0).max() > _NORM_TOL:
        raise ValueError("histogram is not normalized")
    return b


def histogram_distance(a: "Histogram | np.ndarray", b: "Histogram | np.ndarray") -> float:
    """Mean over channels of the L1 distance between bin vectors; range [0, 2]."""
    return float(np.abs(_as_bins(a) - _as_bins(b)).sum(axis=1).mean())


def rmse(a: Image, b: Image) -> float:
    """Root mean squared error over all channel samples, in intensity units."""
    if (a.width, a.height) != (b.width, b.height):
        raise ValueError(
            f"size mismatch: {a.width}x{a.height} vs {b.width}x{b.height}"
        )
    da = a.data.astype(np.float64)
    db = b.data.astype(np.float64)
    return float(np.sqrt(np.mean((da - db) ** 2)))


@dataclass(frozen=True, slots=True)
class OverheadReport:
    """How many pixels the transform ends up seeing per input pixel."""

    alpha: float
    measured_ratio: float
    block_ratio: float
    n_total: int
    n_block: int
    n_subimg: int
    grid_side: int
    subimage_side: int


def overhead_factor(cfg: PipelineConfig, width: int, height: int) -> OverheadReport:
    """Predicted overhead alpha = (1 + 2*w_padding/w_basic)^2 plus measured ratios.

    block_ratio counts block pixels (overlap duplication only); measured_ratio
    counts sub-image pixels, which also include filler blocks.
    """
    grid = BlockGrid.for_size(width, height, cfg)
    g, n_block, n_subimg = _geometry(cfg, grid.n_total)
    side = g * cfg.w_block
    alpha = (1.0 + 2.0 * cfg.w_padding / cfg.w_basic) ** 2
    return OverheadReport(
        alpha=alpha,
        measured_ratio=n_subimg * side * side / (width * height),
        block_ratio=grid.n_total * cfg.w_block**2 / (width * height),
        n_total=grid.n_total,
        n_block=n_block,
        n_subimg=n_subimg,
        grid_side=g,
        subimage_side=side,
    )


@dataclass(frozen=True, slots=True)
class BudgetTrace:
    """What the transform was actually handed during an instrumented run."""

    max_transform_area: int
    area_limit: int
    transform_calls: int
    peak_bytes_estimate: int


def budget_trace(record: RunRecord) -> BudgetTrace:
    """Summarize transform call sizes from a run record and enforce the budget.

    Raises BudgetExceededError if any recorded call exceeded the area limit
    (area_limit == 0 means the unbudgeted whole-image path: report only).
    The peak estimate is coarse: expanded input + stitch canvas + in-flight
    sub-image buffers.
    """
    max_area = max((w * h for w, h in record.transform_calls), default=0)
    max_area = max(max_area, record.max_transform_area)
    if record.area_limit and max_area > record.area_limit:
        raise BudgetExceededError(
            f"recorded transform call of {max_area} px exceeds budget {record.area_limit}"
        )
    ew, eh = record.expanded_size
    if record.n_subimg:
        side = record.grid_side * record.w_block
        peak = ew * eh * 3 + ew * eh * 16 + 4 * max(1, record.workers) * side * side * 12
    else:
        iw, ih = record.input_size
        peak = iw * ih * 15
    return BudgetTrace(
        max_transform_area=max_area,
        area_limit=record.area_limit,
        transform_calls=len(record.transform_calls),
        peak_bytes_estimate=peak,
    )


@dataclass(frozen=True, slots=True)
class BorderStats:
    """Adjacent-pixel jumps across named boundary lines vs everywhere else."""

    max_border_jump: float
    max_interior_jump: float
    mean_border_jump: float
    mean_interior_jump: float


def border_discontinuity(
    image: Image, xs: Sequence[int] = (), ys: Sequence[int] = ()
) -> BorderStats:
    """Measure seams: per boundary line, the worst adjacent-pixel channel jump.

    xs are vertical boundaries (between columns x-1 and x), ys horizontal
    ones; every other adjacent row/column pair counts as interior. Means are
    taken over per-line maxima.
    """
    if not xs and not ys:
        raise ValueError("need at least one boundary line")
    arr = image.data.astype(np.float64)
    h, w = arr.shape[:2]
    vjump = np.abs(arr[:, 1:] - arr[:, :-1]).max(axis=(0, 2))
    hjump = np.abs(arr[1:] - arr[:-1]).max(axis=(1, 2))
    vmask = np.zeros(w - 1, dtype=bool)
    hmask = np.zeros(h - 1, dtype=bool)
    for x in xs:
        if not 1 <= x <= w - 1:
            raise ValueError(f"vertical boundary {x} outside [1, {w - 1}]")
        vmask[x - 1] = True
    for y in ys:
        if not 1 <= y <= h - 1:
            raise ValueError(f"horizontal boundary {y} outside [1, {h - 1}]")
        hmask[y - 1] = True
    border = np.concatenate([vjump[vmask], hjump[hmask]])
    interior = np.concatenate([vjump[~vmask], hjump[~hmask]])
    return BorderStats(
        max_border_jump=float(border.max()),
        max_interior_jump=float(interior.max()) if interior.size else 0.0,
        mean_border_jump=float(border.mean()),
        mean_interior_jump=float(interior.mean()) if interior.size else 0.0,
    )


@dataclass(frozen=True, slots=True)
class DistributionReport:
    """Histogram distance to the whole image: shuffled mosaics vs contiguous tiles."""

    shuffled_mean: float
    shuffled_max: float
    contiguous_mean: float
    contiguous_max: float
    n_subimg: int
    n_tiles: int
    subimage_side: int


def subimage_distribution(image: Image, cfg: PipelineConfig) -> DistributionReport:
    """Compare pixel distributions seen by the transform under the two tilings.

    Shuffled side: the actual mosaics the pipeline would build (expanded
    image, seeded shuffle, fillers included). Contiguous side: partition
    cells of the same side (edge cells smaller). Distances are against the
    whole-image histogram; mean and worst case for each.
    """
    expanded = expand(image, cfg)
    order = shuffle(cut(expanded, cfg), cfg.seed)
    g, _n_block, n_subimg, slots = _plan_slots(order, cfg)
    side = g * cfg.w_block
    whole_hist = rgb_histogram(image)
    dtype = expanded.data.dtype

    shuffled = [
        histogram_distance(
            rgb_histogram(Image(_pack_subimage(s, g, cfg.w_block, dtype=dtype))), whole_hist
        )
        for s in slots
    ]
    contiguous = [
        histogram_distance(
            rgb_histogram(Image(image.data[y0 : y0 + side, x0 : x0 + side])), whole_hist
        )
        for y0 in range(0, image.height, side)
        for x0 in range(0, image.width, side)
    ]
    return DistributionReport(
        shuffled_mean=float(np.mean(shuffled)),
        shuffled_max=float(np.max(shuffled)),
        contiguous_mean=float(np.mean(contiguous)),
        contiguous_max=float(np.max(contiguous)),
        n_subimg=n_subimg,
        n_tiles=len(contiguous),
        subimage_side=side,
    )
