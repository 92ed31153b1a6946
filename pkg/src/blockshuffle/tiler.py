"""Shuffled-block tiling core: expand, cut, shuffle, pack, recut, sort, feathered restore."""

from __future__ import annotations

import dataclasses
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .raster import Image, reflect_pad
from .rng import PRNG_ID, shuffled
from .transforms import Transform


class ConfigError(ValueError):
    """Invalid pipeline configuration."""


class StageError(RuntimeError):
    """A pipeline stage received data inconsistent with its contract."""


class ExpandError(StageError):
    """Image too small for the requested padding; process it without tiling."""


class BudgetExceededError(StageError):
    """An image larger than the per-call pixel budget reached the transform."""


class TransformStageError(StageError):
    """The stylizer failed on one sub-image."""

    def __init__(self, subimage_index: int, cause: Exception):
        super().__init__(f"transform failed on sub-image {subimage_index}: {cause}")
        self.subimage_index = subimage_index


@dataclass(frozen=True, slots=True)
class PipelineConfig:
    """Block geometry and run parameters.

    Blocks are squares of side w_basic + 2*w_padding cut on a w_basic stride,
    so adjacent blocks overlap by 2*w_padding before trimming and by
    2*(w_padding - trim) afterwards. The degenerate w_padding == trim == 0
    configuration partitions the image without overlap or feathering.
    """

    w_basic: int = 16
    w_padding: int = 16
    w_max: int = 1000
    seed: int = 0
    trim: int = 8
    smoothing: bool = True

    def __post_init__(self) -> None:
        if self.w_basic < 1:
            raise ConfigError(f"w_basic must be >= 1, got {self.w_basic}")
        if self.w_padding < 0 or self.trim < 0:
            raise ConfigError("w_padding and trim must be non-negative")
        if not 0 <= self.seed < 1 << 64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if (self.w_padding, self.trim) != (0, 0) and self.w_padding < self.trim + 1:
            raise ConfigError(
                f"w_padding ({self.w_padding}) must be at least trim + 1 "
                f"({self.trim + 1}) so trimmed blocks still overlap by >= 2 px"
            )
        if self.w_block > self.w_max:
            raise ConfigError(
                f"block width {self.w_block} exceeds the budget side w_max {self.w_max}"
            )

    @property
    def w_block(self) -> int:
        return self.w_basic + 2 * self.w_padding

    @property
    def trimmed_side(self) -> int:
        return self.w_block - 2 * self.trim

    @property
    def blend_overlap(self) -> int:
        """Overlap width between adjacent trimmed blocks."""
        return 2 * (self.w_padding - self.trim)


@dataclass(frozen=True, slots=True)
class BlockGrid:
    """Counts of stride-w_basic windows covering an image."""

    cols: int
    rows: int
    w_block: int

    @classmethod
    def for_size(cls, width: int, height: int, cfg: PipelineConfig) -> "BlockGrid":
        return cls(
            cols=-(-width // cfg.w_basic),
            rows=-(-height // cfg.w_basic),
            w_block=cfg.w_block,
        )

    @property
    def n_total(self) -> int:
        return self.cols * self.rows


@dataclass(frozen=True, slots=True, eq=False)
class Block:
    """One square tile: its position in the grid plus its pixels (view or copy)."""

    ordinal: int
    row: int
    col: int
    pixels: np.ndarray
    filler: bool = False

    @property
    def grid_pos(self) -> tuple[int, int]:
        return (self.row, self.col)


@dataclass(slots=True, eq=False)
class SubImageBatch:
    """Square mosaics of g x g blocks, each sized within the pixel budget.

    placement[i][slot] is the block packed at that slot of sub-image i,
    including filler copies that complete the final mosaic.
    """

    g: int
    n_block: int
    n_subimg: int
    side: int
    placement: list[list[Block]]
    subimages: list[Image]

    def with_subimages(self, subimages: Sequence[Image]) -> "SubImageBatch":
        imgs = list(subimages)
        if len(imgs) != self.n_subimg:
            raise StageError(f"expected {self.n_subimg} sub-images, got {len(imgs)}")
        return dataclasses.replace(self, subimages=imgs)


@dataclass
class RunRecord:
    """Instrumentation filled in by run_pipeline; consumed by diagnostics and manifests.

    area_limit == 0 marks an unbudgeted run (whole-image path).
    """

    prng: str = PRNG_ID
    transform_name: str = ""
    workers: int = 1
    input_size: tuple[int, int] = (0, 0)
    expanded_size: tuple[int, int] = (0, 0)
    n_total: int = 0
    n_block: int = 0
    n_subimg: int = 0
    grid_side: int = 0
    w_block: int = 0
    trimmed_side: int = 0
    area_limit: int = 0
    transform_calls: list[tuple[int, int]] = field(default_factory=list)
    max_transform_area: int = 0
    smoothing_applied: bool = False
    stage_seconds: dict[str, float] = field(default_factory=dict)

    def note_transform_call(self, width: int, height: int) -> None:
        area = width * height
        self.transform_calls.append((width, height))
        if area > self.max_transform_area:
            self.max_transform_area = area
        if self.area_limit and area > self.area_limit:
            raise BudgetExceededError(
                f"transform received {width}x{height} = {area} px, budget is {self.area_limit}"
            )


def expand(image: Image, cfg: PipelineConfig) -> Image:
    """Mirror-pad so both dimensions are w_basic multiples plus a w_padding margin.

    The original sits at offset (w_padding, w_padding); the divisibility
    remainder goes into the right/bottom pads.
    """
    grid = BlockGrid.for_size(image.width, image.height, cfg)
    wp = cfg.w_padding
    pad_right = grid.cols * cfg.w_basic - image.width + wp
    pad_bottom = grid.rows * cfg.w_basic - image.height + wp
    if max(wp, pad_right) >= image.width or max(wp, pad_bottom) >= image.height:
        raise ExpandError(
            f"{image.width}x{image.height} image cannot be mirror-padded by "
            f"(left={wp}, right={pad_right}, top={wp}, bottom={pad_bottom}); "
            "bypass tiling for images this small"
        )
    return reflect_pad(image, wp, wp, pad_right, pad_bottom)


def cut(expanded: Image, cfg: PipelineConfig) -> list[Block]:
    """Slice the expanded image into overlapping w_block windows on a w_basic stride.

    Blocks are numbered row-major and hold views into the expanded buffer; no
    pixels are copied until packing.
    """
    wb, wp, side = cfg.w_basic, cfg.w_padding, cfg.w_block
    cols, rem_w = divmod(expanded.width - 2 * wp, wb)
    rows, rem_h = divmod(expanded.height - 2 * wp, wb)
    if rem_w or rem_h or cols < 1 or rows < 1:
        raise StageError(
            f"expanded size {expanded.width}x{expanded.height} does not match "
            f"w_basic={wb}, w_padding={wp}"
        )
    arr = expanded.data
    blocks = []
    for r in range(rows):
        y0 = r * wb
        for c in range(cols):
            x0 = c * wb
            blocks.append(Block(r * cols + c, r, c, arr[y0 : y0 + side, x0 : x0 + side]))
    return blocks


def shuffle(blocks: Sequence[Block], seed: int) -> list[Block]:
    """Uniform random permutation of the block list, deterministic per seed."""
    return shuffled(blocks, seed)


def _geometry(cfg: PipelineConfig, n_total: int) -> tuple[int, int, int]:
    g = cfg.w_max // cfg.w_block
    if g < 1:
        raise StageError(f"block width {cfg.w_block} exceeds w_max {cfg.w_max}")
    n_block = g * g
    n_subimg = -(-n_total // n_block)
    return g, n_block, n_subimg


def _plan_slots(blocks: Sequence[Block], cfg: PipelineConfig) -> tuple[int, int, int, list[list[Block]]]:
    n_total = len(blocks)
    if n_total == 0:
        raise StageError("no blocks to pack")
    g, n_block, n_subimg = _geometry(cfg, n_total)
    slots: list[list[Block]] = []
    fill = 0
    for i in range(n_subimg):
        chunk = list(blocks[i * n_block : (i + 1) * n_block])
        while len(chunk) < n_block:
            # cycle filler copies from the start of the shuffled list so the
            # final mosaic keeps a representative pixel distribution
            chunk.append(dataclasses.replace(blocks[fill % n_total], filler=True))
            fill += 1
        slots.append(chunk)
    return g, n_block, n_subimg, slots


def _pack_subimage(
    slots: Sequence[Block], g: int, w_block: int, dtype: type = np.float32
) -> np.ndarray:
    side = g * w_block
    out = np.empty((side, side, 3), dtype)
    for s, block in enumerate(slots):
        r, c = divmod(s, g)
        out[r * w_block : (r + 1) * w_block, c * w_block : (c + 1) * w_block] = block.pixels
    return out


def concatenate(blocks: Sequence[Block], cfg: PipelineConfig) -> SubImageBatch:
    """Pack blocks row-major, g*g at a time, into square sub-images.

    A short final chunk is topped up with filler copies drawn cyclically from
    the start of the list; fillers are discarded again at recut.
    """
    g, n_block, n_subimg, slots = _plan_slots(blocks, cfg)
    subimages = [Image(_pack_subimage(s, g, cfg.w_block)) for s in slots]
    return SubImageBatch(g, n_block, n_subimg, g * cfg.w_block, slots, subimages)


def _recut_subimage(
    arr: np.ndarray, slots: Sequence[Block], g: int, w_block: int, trim: int
) -> list[Block]:
    out = []
    inner = w_block - 2 * trim
    for s, block in enumerate(slots):
        if block.filler:
            continue
        r, c = divmod(s, g)
        y0 = r * w_block + trim
        x0 = c * w_block + trim
        tile = arr[y0 : y0 + inner, x0 : x0 + inner]
        out.append(dataclasses.replace(block, pixels=tile.copy()))
    return out


def recut(batch: SubImageBatch, cfg: PipelineConfig) -> list[Block]:
    """Cut stylized sub-images back into blocks, trimming the contaminated border.

    Each block loses `trim` pixels per side; fillers are dropped, so exactly
    the original blocks come back (in packing order).
    """
    expected = (batch.side, batch.side, 3)
    out: list[Block] = []
    for i, sub in enumerate(batch.subimages):
        if sub.data.shape != expected:
            raise StageError(f"sub-image {i} has shape {sub.data.shape}, expected {expected}")
        out.extend(_recut_subimage(sub.data, batch.placement[i], batch.g, cfg.w_block, cfg.trim))
    return out


def sort_blocks(blocks: Sequence[Block]) -> list[Block]:
    """Blocks in ascending ordinal (row-major grid) order."""
    seen = set()
    for b in blocks:
        if b.filler:
            raise StageError(f"filler block (ordinal {b.ordinal}) leaked past recut")
        if b.ordinal in seen:
            raise StageError(f"duplicate ordinal {b.ordinal}")
        seen.add(b.ordinal)
    return sorted(blocks, key=lambda b: b.ordinal)


def feather_profile(length: int, has_rise: bool, has_fall: bool, span: int) -> np.ndarray:
    """Per-axis feather weights for a patch overlapping neighbours by `span` pixels.

    Each pixel's weight is its distance (in pixels, counting the last covered
    pixel as 1) to the patch's own boundary, clipped at `span`. Where two
    patches overlap the weights pair up as (d_l, d_r) with d_l + d_r == span,
    so the normalized blend is (d_l*I_l + d_r*I_r) / (d_l + d_r). Weights are
    integer-valued, which keeps equal-value blends exact in float.
    """
    if span > length:
        raise ValueError(f"overlap span {span} exceeds patch length {length}")
    if span < 1:
        return np.ones(length, np.float32)
    w = np.full(length, float(span), np.float32)
    if has_rise:
        w = np.minimum(w, np.arange(length, dtype=np.float32))
    if has_fall:
        w = np.minimum(w, np.arange(length, 0, -1, dtype=np.float32))
    return w


class FeatherCanvas:
    """Accumulates distance-weighted patches; composite() divides color by weight.

    Every output pixel is a convex combination of the patch values placed on
    it, so overlaps where all patches agree reproduce that value exactly.
    """

    def __init__(self, width: int, height: int):
        self._num = np.zeros((height, width, 3), np.float32)
        self._den = np.zeros((height, width), np.float32)

    def add(self, pixels: np.ndarray, x0: int, y0: int, weight: np.ndarray) -> None:
        if pixels.shape[:2] != weight.shape:
            raise ValueError(f"patch {pixels.shape[:2]} vs weight {weight.shape}")
        h, w = weight.shape
        self._num[y0 : y0 + h, x0 : x0 + w] += pixels * weight[:, :, None]
        self._den[y0 : y0 + h, x0 : x0 + w] += weight

    def add_profiles(
        self, pixels: np.ndarray, x0: int, y0: int, h_profile: np.ndarray, v_profile: np.ndarray
    ) -> None:
        self.add(pixels, x0, y0, np.outer(v_profile, h_profile).astype(np.float32))

    @property
    def weight_map(self) -> np.ndarray:
        return self._den.copy()

    def composite(self) -> np.ndarray:
        if not np.all(self._den > 0):
            raise StageError("canvas has pixels no patch covered")
        out = self._num
        out /= self._den[:, :, None]
        return out


class _BlockStitcher:
    """Streaming feathered reassembly of trimmed blocks into the output frame."""

    def __init__(self, cfg: PipelineConfig, original_w: int, original_h: int):
        self._cfg = cfg
        self._grid = BlockGrid.for_size(original_w, original_h, cfg)
        self._size = (original_w, original_h)
        self._side = cfg.trimmed_side
        self._span = cfg.blend_overlap
        self._canvas = FeatherCanvas(
            self._grid.cols * cfg.w_basic + self._span,
            self._grid.rows * cfg.w_basic + self._span,
        )
        self._seen = np.zeros(self._grid.n_total, dtype=bool)
        self._weights: dict[tuple, np.ndarray] = {}

    def _weight(self, row: int, col: int) -> np.ndarray:
        key = (row > 0, row < self._grid.rows - 1, col > 0, col < self._grid.cols - 1)
        mat = self._weights.get(key)
        if mat is None:
            v = feather_profile(self._side, key[0], key[1], self._span)
            h = feather_profile(self._side, key[2], key[3], self._span)
            mat = np.outer(v, h).astype(np.float32)
            self._weights[key] = mat
        return mat

    def add(self, block: Block) -> None:
        grid = self._grid
        if block.filler:
            raise StageError(f"filler block (ordinal {block.ordinal}) reached restore")
        if not 0 <= block.ordinal < grid.n_total or self._seen[block.ordinal]:
            raise StageError(f"inconsistent block set: unexpected ordinal {block.ordinal}")
        if block.row * grid.cols + block.col != block.ordinal:
            raise StageError(f"block {block.ordinal} grid position {block.grid_pos} is wrong")
        if block.pixels.shape != (self._side, self._side, 3):
            raise StageError(
                f"block {block.ordinal} has shape {block.pixels.shape}, "
                f"expected trimmed side {self._side}"
            )
        self._seen[block.ordinal] = True
        self._canvas.add(
            block.pixels,
            block.col * self._cfg.w_basic,
            block.row * self._cfg.w_basic,
            self._weight(block.row, block.col),
        )

    def finish(self) -> Image:
        if not self._seen.all():
            missing = int(self._grid.n_total - self._seen.sum())
            raise StageError(f"inconsistent block set: {missing} blocks missing")
        out = self._canvas.composite()
        off = self._cfg.w_padding - self._cfg.trim
        w, h = self._size
        return Image(out[off : off + h, off : off + w].copy())


def restore(
    blocks: Sequence[Block], cfg: PipelineConfig, original_w: int, original_h: int
) -> Image:
    """Feather-stitch trimmed blocks and cut the frame back to the original size.

    In an overlap each block's weight is its distance to its own edge, so two
    overlapping blocks blend to the distance-weighted average of their values;
    corners blend bilinearly. Returns a float image; quantize at final output.
    """
    stitcher = _BlockStitcher(cfg, original_w, original_h)
    for b in blocks:
        stitcher.add(b)
    return stitcher.finish()


def run_pipeline(
    image: Image,
    transform: Transform,
    cfg: PipelineConfig,
    workers: int = 1,
    record: RunRecord | None = None,
) -> Image:
    """Stylize an image of any size while the transform only ever sees sub-images.

    expand -> cut -> shuffle -> pack -> transform -> recut -> sort -> stitch,
    then optional smoothing, quantized to 8-bit at the very end. Sub-images
    are materialized one wave at a time and results are assembled strictly by
    sub-image index, so any worker count or completion order yields the same
    output. Transform failures abort with the failing sub-image index.
    """
    rec = record if record is not None else RunRecord()
    rec.transform_name = transform.name
    rec.workers = workers
    rec.area_limit = cfg.w_max * cfg.w_max
    rec.input_size = (image.width, image.height)
    clock = time.perf_counter

    t0 = clock()
    expanded = expand(image, cfg)
    rec.expanded_size = (expanded.width, expanded.height)
    rec.stage_seconds["expand"] = clock() - t0

    t0 = clock()
    blocks = cut(expanded, cfg)
    rec.stage_seconds["cut"] = clock() - t0

    t0 = clock()
    order = shuffle(blocks, cfg.seed)
    rec.stage_seconds["shuffle"] = clock() - t0

    g, n_block, n_subimg, slots = _plan_slots(order, cfg)
    side = g * cfg.w_block
    rec.n_total = len(blocks)
    rec.n_block, rec.n_subimg, rec.grid_side = n_block, n_subimg, g
    rec.w_block, rec.trimmed_side = cfg.w_block, cfg.trimmed_side

    stitcher = _BlockStitcher(cfg, image.width, image.height)

    def produce(i: int) -> list[Block]:
        arr = _pack_subimage(slots[i], g, cfg.w_block)
        try:
            out = transform.apply(Image(arr))
        except Exception as exc:
            raise TransformStageError(i, exc) from exc
        return _recut_subimage(out.data, slots[i], g, cfg.w_block, cfg.trim)

    t0 = clock()
    if workers <= 1:
        for i in range(n_subimg):
            trimmed = produce(i)
            rec.note_transform_call(side, side)
            for b in trimmed:
                stitcher.add(b)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            wave = workers * 2
            for start in range(0, n_subimg, wave):
                futures = [
                    pool.submit(produce, i) for i in range(start, min(start + wave, n_subimg))
                ]
                for f in futures:
                    trimmed = f.result()
                    rec.note_transform_call(side, side)
                    for b in trimmed:
                        stitcher.add(b)
    rec.stage_seconds["stylize"] = clock() - t0

    t0 = clock()
    result = stitcher.finish()
    rec.stage_seconds["restore"] = clock() - t0

    if cfg.smoothing:
        from .smoothing import smooth

        t0 = clock()
        result = smooth(result)
        rec.stage_seconds["smooth"] = clock() - t0
        rec.smoothing_applied = True

    return result.to_u8()
