"""Stylize images of any size under a fixed per-call pixel budget.

The transform (a style-transfer model, an external command, or any
image-to-image function) only ever sees square sub-images of bounded area.
Blocks cut from the input are shuffled into those sub-images, so each one
samples the whole picture's pixel distribution; after stylization the blocks
are trimmed, sorted back, and feather-stitched, leaving no tile seams.
"""

from .baselines import TileConfig, feather_tiles, naive_tiles, whole
from .diagnostics import (
    BorderStats,
    BudgetTrace,
    DistributionReport,
    Histogram,
    OverheadReport,
    border_discontinuity,
    budget_trace,
    histogram_distance,
    overhead_factor,
    rgb_histogram,
    rmse,
    subimage_distribution,
)
from .raster import (
    CorruptStreamError,
    Image,
    ImageWriteError,
    RasterError,
    Rect,
    UnreadableFileError,
    UnsupportedFormatError,
    crop,
    load_image,
    quantize_u8,
    reflect_pad,
    save_image,
)
from .rng import PRNG_ID, SplitMix64, shuffled
from .smoothing import BilateralParams, bilateral, smooth
from .tiler import (
    Block,
    BlockGrid,
    BudgetExceededError,
    ConfigError,
    ExpandError,
    FeatherCanvas,
    PipelineConfig,
    RunRecord,
    StageError,
    SubImageBatch,
    TransformStageError,
    concatenate,
    cut,
    expand,
    feather_profile,
    recut,
    restore,
    run_pipeline,
    shuffle,
    sort_blocks,
)
from .transforms import (
    ExternalCommandError,
    Transform,
    TransformError,
    external_command,
    global_normalize,
    identity,
    pointwise_lut,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # raster
    "Image",
    "Rect",
    "RasterError",
    "UnreadableFileError",
    "UnsupportedFormatError",
    "CorruptStreamError",
    "ImageWriteError",
    "load_image",
    "save_image",
    "reflect_pad",
    "crop",
    "quantize_u8",
    # rng
    "PRNG_ID",
    "SplitMix64",
    "shuffled",
    # tiler
    "PipelineConfig",
    "BlockGrid",
    "Block",
    "SubImageBatch",
    "RunRecord",
    "ConfigError",
    "StageError",
    "ExpandError",
    "BudgetExceededError",
    "TransformStageError",
    "FeatherCanvas",
    "feather_profile",
    "expand",
    "cut",
    "shuffle",
    "concatenate",
    "recut",
    "sort_blocks",
    "restore",
    "run_pipeline",
    # transforms
    "Transform",
    "TransformError",
    "ExternalCommandError",
    "identity",
    "pointwise_lut",
    "global_normalize",
    "external_command",
    # smoothing
    "BilateralParams",
    "bilateral",
    "smooth",
    # baselines
    "TileConfig",
    "whole",
    "naive_tiles",
    "feather_tiles",
    # diagnostics
    "Histogram",
    "OverheadReport",
    "BudgetTrace",
    "BorderStats",
    "DistributionReport",
    "rgb_histogram",
    "histogram_distance",
    "rmse",
    "overhead_factor",
    "budget_trace",
    "border_discontinuity",
    "subimage_distribution",
]
