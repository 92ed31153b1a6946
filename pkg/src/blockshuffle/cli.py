"""Command-line driver: stylize / compare / diagnose with reproducible manifests."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .baselines import TileConfig, feather_tiles, naive_tiles, whole
from .diagnostics import (
    border_discontinuity,
    budget_trace,
    overhead_factor,
    rmse,
    subimage_distribution,
)
from .raster import Image, RasterError, load_image, save_image
from .rng import PRNG_ID
from .smoothing import SMOOTH_PASSES, SMOOTH_SIGMA, BilateralParams, smooth
from .tiler import (
    ConfigError,
    PipelineConfig,
    RunRecord,
    TransformStageError,
    run_pipeline,
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

MANIFEST_VERSION = 1
_METHODS = ("blockshuffle", "feather", "naive", "whole")


class CLIUsageError(ValueError):
    """Bad flag values discovered after argparse."""


def parse_transform(spec: str) -> Transform:
    """Build a transform from its CLI spec string.

    identity | lut:<json-file> | gnorm:<mean,std> | cmd:<template with {in} {out}>
    """
    if spec == "identity":
        return identity()
    if spec.startswith("lut:"):
        path = spec[4:]
        try:
            with open(path, "r", encoding="utf-8") as fh:
                curves = json.load(fh)
        except OSError as exc:
            raise RasterError(f"cannot read LUT file {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise CLIUsageError(f"LUT file {path} is not valid JSON: {exc}") from exc
        try:
            return pointwise_lut(curves)
        except (TransformError, ValueError) as exc:
            raise CLIUsageError(f"LUT file {path}: {exc}") from exc
    if spec.startswith("gnorm:"):
        parts = spec[6:].split(",")
        if len(parts) != 2:
            raise CLIUsageError(f"gnorm spec must be gnorm:<mean,std>, got {spec!r}")
        try:
            mean, std = float(parts[0]), float(parts[1])
        except ValueError as exc:
            raise CLIUsageError(f"gnorm spec {spec!r}: {exc}") from exc
        try:
            return global_normalize(mean, std)
        except (TransformError, ValueError) as exc:
            raise CLIUsageError(str(exc)) from exc
    if spec.startswith("cmd:"):
        template = spec[4:]
        try:
            return external_command(template)
        except (TransformError, ValueError) as exc:
            raise CLIUsageError(str(exc)) from exc
    raise CLIUsageError(
        f"unknown transform {spec!r}; expected identity, lut:<file>, "
        "gnorm:<mean,std> or cmd:<template>"
    )


def _sha256(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _image_format(path: str) -> str:
    return "jpeg" if Path(path).suffix.lower() in (".jpg", ".jpeg") else "png"


def _tile_config(args: argparse.Namespace) -> TileConfig:
    try:
        tcfg = TileConfig(tile=args.tile, overlap=args.overlap)
    except ValueError as exc:
        raise CLIUsageError(str(exc)) from exc
    if tcfg.tile > args.w_max:
        raise CLIUsageError(f"tile {tcfg.tile} exceeds the budget side w_max {args.w_max}")
    return tcfg


def _smoothing_entry(cfg: PipelineConfig) -> dict | None:
    if not cfg.smoothing:
        return None
    params = BilateralParams.from_sigmas(SMOOTH_SIGMA, SMOOTH_SIGMA)
    return {
        "passes": SMOOTH_PASSES,
        "sigma_color": params.sigma_color,
        "sigma_space": params.sigma_space,
        "radius": params.radius,
    }


def _record_entry(record: RunRecord) -> dict:
    trace = budget_trace(record)
    return {
        "expanded_size": list(record.expanded_size),
        "n_total": record.n_total,
        "n_block": record.n_block,
        "n_subimg": record.n_subimg,
        "grid_side": record.grid_side,
        "w_block": record.w_block,
        "trimmed_side": record.trimmed_side,
        "transform_calls": len(record.transform_calls),
        "max_transform_area": trace.max_transform_area,
        "area_limit": trace.area_limit,
        "peak_bytes_estimate": trace.peak_bytes_estimate,
        "smoothing_applied": record.smoothing_applied,
    }


def _write_manifest(path: str | Path, deterministic: dict, volatile: dict) -> None:
    doc = {
        "manifest_version": MANIFEST_VERSION,
        "tool": {"name": "blockshuffle", "version": __version__},
        "deterministic": deterministic,
        "volatile": volatile,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _run_whole_instrumented(
    image: Image, transform: Transform, cfg: PipelineConfig, record: RunRecord
) -> Image:
    # unbudgeted path: record the single full-size call, no area limit
    record.transform_name = transform.name
    record.area_limit = 0
    record.input_size = (image.width, image.height)
    record.note_transform_call(image.width, image.height)
    t0 = time.perf_counter()
    result = transform.apply(image)
    record.stage_seconds["stylize"] = time.perf_counter() - t0
    if cfg.smoothing:
        t0 = time.perf_counter()
        result = smooth(result)
        record.stage_seconds["smooth"] = time.perf_counter() - t0
        record.smoothing_applied = True
    return result.to_u8()


def cmd_stylize(args: argparse.Namespace) -> int:
    started = datetime.now(timezone.utc).isoformat()
    t_start = time.perf_counter()
    cfg = PipelineConfig(
        w_basic=args.w_basic,
        w_padding=args.w_padding,
        w_max=args.w_max,
        seed=args.seed,
        trim=args.trim,
        smoothing=not args.no_smooth,
    )
    if args.workers < 1:
        raise CLIUsageError(f"--workers must be >= 1, got {args.workers}")
    transform = parse_transform(args.transform)
    image = load_image(args.input)

    record = RunRecord()
    path_taken = args.method
    tcfg = None
    if args.method == "blockshuffle":
        fits = image.width * image.height <= cfg.w_max * cfg.w_max
        if fits and not args.force_tiling:
            # the whole image already fits the budget: tiling would only add
            # overhead, so degrade to a single transform call (plus smoothing)
            path_taken = "whole-bypass"
            out = _run_whole_instrumented(image, transform, cfg, record)
        else:
            out = run_pipeline(image, transform, cfg, workers=args.workers, record=record)
    elif args.method == "whole":
        out = _run_whole_instrumented(image, transform, cfg, record)
    elif args.method in ("naive", "feather"):
        tcfg = _tile_config(args)
        record.transform_name = transform.name
        record.input_size = (image.width, image.height)
        fn = naive_tiles if args.method == "naive" else feather_tiles
        t0 = time.perf_counter()
        out = fn(image, transform, tcfg, workers=args.workers)
        record.stage_seconds["stylize"] = time.perf_counter() - t0
    else:  # pragma: no cover - argparse restricts choices
        raise CLIUsageError(f"unknown method {args.method}")

    save_image(out, args.output, format=_image_format(args.output))

    deterministic = {
        "command": "stylize",
        "method": args.method,
        "path": path_taken,
        "input": {
            "path": str(args.input),
            "sha256": _sha256(args.input),
            "width": image.width,
            "height": image.height,
        },
        "output": {
            "path": str(args.output),
            "sha256": _sha256(args.output),
            "width": out.width,
            "height": out.height,
        },
        "transform": {
            "spec": args.transform,
            "name": transform.name,
            "deterministic": transform.deterministic,
        },
        "config": {
            "w_basic": cfg.w_basic,
            "w_padding": cfg.w_padding,
            "w_max": cfg.w_max,
            "seed": cfg.seed,
            "trim": cfg.trim,
            "smoothing": cfg.smoothing,
            "workers": args.workers,
        },
        "tiles": dataclasses.asdict(tcfg) if tcfg else None,
        "prng": PRNG_ID,
        "smoothing": _smoothing_entry(cfg),
        "run": _record_entry(record),
    }
    volatile = {
        "timestamp_utc": started,
        "elapsed_seconds": time.perf_counter() - t_start,
        "stage_seconds": dict(record.stage_seconds),
    }
    manifest_path = args.manifest or f"{args.output}.manifest.json"
    _write_manifest(manifest_path, deterministic, volatile)
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    started = datetime.now(timezone.utc).isoformat()
    t_start = time.perf_counter()
    cfg = PipelineConfig(
        w_basic=args.w_basic,
        w_padding=args.w_padding,
        w_max=args.w_max,
        seed=args.seed,
        trim=args.trim,
        smoothing=args.smooth,
    )
    if args.workers < 1:
        raise CLIUsageError(f"--workers must be >= 1, got {args.workers}")
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    for m in methods:
        if m not in ("blockshuffle", "feather", "naive"):
            raise CLIUsageError(f"unknown comparison method {m!r}")
    tcfg = _tile_config(args)
    transform = parse_transform(args.transform)
    image = load_image(args.input)
    outdir = Path(args.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.input).stem

    oracle = None
    if not args.no_oracle:
        oracle = whole(image, transform)
        save_image(oracle, outdir / f"{stem}.whole.png")

    # seam measurement lines: the naive grid for naive/blockshuffle (where
    # naive joins its cells), overlap midlines for feather
    naive_xs = list(range(tcfg.tile, image.width, tcfg.tile))
    naive_ys = list(range(tcfg.tile, image.height, tcfg.tile))
    step = tcfg.tile - tcfg.overlap
    feather_xs = [x + tcfg.overlap // 2 for x in range(step, image.width, step) if x < image.width]
    feather_ys = [y + tcfg.overlap // 2 for y in range(step, image.height, step) if y < image.height]
    feather_xs = [x for x in feather_xs if 1 <= x <= image.width - 1]
    feather_ys = [y for y in feather_ys if 1 <= y <= image.height - 1]

    results = {}
    for method in methods:
        record = RunRecord()
        if method == "blockshuffle":
            out = run_pipeline(image, transform, cfg, workers=args.workers, record=record)
            xs, ys = naive_xs, naive_ys
        elif method == "naive":
            out = naive_tiles(image, transform, tcfg, workers=args.workers)
            xs, ys = naive_xs, naive_ys
        else:
            out = feather_tiles(image, transform, tcfg, workers=args.workers)
            xs, ys = feather_xs, feather_ys
        save_image(out, outdir / f"{stem}.{method}.png")
        entry = {"output": f"{stem}.{method}.png"}
        if oracle is not None:
            entry["rmse_vs_whole"] = rmse(out, oracle)
        if xs or ys:
            entry["border"] = dataclasses.asdict(border_discontinuity(out, xs, ys))
        results[method] = entry

    if oracle is not None and (naive_xs or naive_ys):
        results["whole"] = {
            "output": f"{stem}.whole.png",
            "rmse_vs_whole": 0.0,
            "border": dataclasses.asdict(border_discontinuity(oracle, naive_xs, naive_ys)),
        }

    deterministic = {
        "command": "compare",
        "input": {
            "path": str(args.input),
            "sha256": _sha256(args.input),
            "width": image.width,
            "height": image.height,
        },
        "transform": {
            "spec": args.transform,
            "name": transform.name,
            "deterministic": transform.deterministic,
        },
        "config": {
            "w_basic": cfg.w_basic,
            "w_padding": cfg.w_padding,
            "w_max": cfg.w_max,
            "seed": cfg.seed,
            "trim": cfg.trim,
            "smoothing": cfg.smoothing,
            "workers": args.workers,
        },
        "tiles": dataclasses.asdict(tcfg),
        "prng": PRNG_ID,
        "oracle": None if args.no_oracle else "whole",
        "results": results,
    }
    volatile = {
        "timestamp_utc": started,
        "elapsed_seconds": time.perf_counter() - t_start,
    }
    _write_manifest(outdir / f"{stem}.compare.manifest.json", deterministic, volatile)

    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["method", "rmse_vs_whole", "max_border_jump", "max_interior_jump"]
            )
            for method, entry in results.items():
                border = entry.get("border") or {}
                writer.writerow(
                    [
                        method,
                        entry.get("rmse_vs_whole", ""),
                        border.get("max_border_jump", ""),
                        border.get("max_interior_jump", ""),
                    ]
                )

    for method, entry in results.items():
        line = f"{method}: "
        if "rmse_vs_whole" in entry:
            line += f"rmse={entry['rmse_vs_whole']:.4f}"
        if "border" in entry:
            line += (
                f" border_max={entry['border']['max_border_jump']:.2f}"
                f" interior_max={entry['border']['max_interior_jump']:.2f}"
            )
        print(line)
    return 0


def cmd_diagnose(args: argparse.Namespace) -> int:
    started = datetime.now(timezone.utc).isoformat()
    cfg = PipelineConfig(
        w_basic=args.w_basic,
        w_padding=args.w_padding,
        w_max=args.w_max,
        seed=args.seed,
        trim=args.trim,
    )
    image = load_image(args.input)
    report = overhead_factor(cfg, image.width, image.height)
    distribution = subimage_distribution(image, cfg)
    deterministic = {
        "command": "diagnose",
        "input": {
            "path": str(args.input),
            "sha256": _sha256(args.input),
            "width": image.width,
            "height": image.height,
        },
        "config": {
            "w_basic": cfg.w_basic,
            "w_padding": cfg.w_padding,
            "w_max": cfg.w_max,
            "seed": cfg.seed,
            "trim": cfg.trim,
        },
        "prng": PRNG_ID,
        "overhead": dataclasses.asdict(report),
        "distribution": dataclasses.asdict(distribution),
    }
    volatile = {"timestamp_utc": started}
    if args.json:
        _write_manifest(args.json, deterministic, volatile)
    print(f"alpha: {report.alpha}")
    print(f"block pixel ratio: {report.block_ratio:.4f}")
    print(f"sub-image pixel ratio: {report.measured_ratio:.4f}")
    print(
        f"blocks: {report.n_total} ({report.n_block}/sub-image, "
        f"{report.n_subimg} sub-images of side {report.subimage_side})"
    )
    print(
        f"histogram distance to whole image: shuffled mean {distribution.shuffled_mean:.4f} "
        f"(max {distribution.shuffled_max:.4f}), contiguous mean "
        f"{distribution.contiguous_mean:.4f} (max {distribution.contiguous_max:.4f})"
    )
    return 0


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--w-basic", type=int, default=16, help="basic block stride (default 16)")
    p.add_argument("--w-padding", type=int, default=16, help="context margin per side (default 16)")
    p.add_argument("--w-max", type=int, default=1000, help="budget side: transform calls stay <= w_max^2 px (default 1000)")
    p.add_argument("--seed", type=int, default=0, help="shuffle seed (default 0)")
    p.add_argument("--trim", type=int, default=8, help="pixels trimmed per block side after stylization (default 8)")


def _add_tile_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tile", type=int, default=1000, help="tile side for naive/feather methods (default 1000)")
    p.add_argument("--overlap", type=int, default=128, help="tile overlap for the feather method (default 128)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blockshuffle",
        description="Stylize images of any size while the stylizer only ever "
        "sees fixed-budget sub-images.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    st = sub.add_parser("stylize", help="stylize one image and write a manifest")
    st.add_argument("--input", required=True, help="input PNG or JPEG")
    st.add_argument("--output", required=True, help="output image path (.png or .jpg)")
    st.add_argument("--method", choices=_METHODS, default="blockshuffle")
    st.add_argument(
        "--transform",
        default="identity",
        help="identity | lut:<json-file> | gnorm:<mean,std> | cmd:<template with {in} {out}>",
    )
    _add_config_flags(st)
    _add_tile_flags(st)
    st.add_argument("--no-smooth", action="store_true", help="skip the final bilateral smoothing")
    st.add_argument(
        "--force-tiling",
        action="store_true",
        help="tile even when the whole image fits the budget",
    )
    st.add_argument("--workers", type=int, default=1, help="concurrent transform calls (default 1)")
    st.add_argument("--manifest", default=None, help="manifest path (default <output>.manifest.json)")
    st.set_defaults(func=cmd_stylize)

    cp = sub.add_parser("compare", help="run several methods and report seam metrics")
    cp.add_argument("--input", required=True)
    cp.add_argument("--transform", default="gnorm:128,64")
    cp.add_argument(
        "--methods",
        default="blockshuffle,feather,naive",
        help="comma-separated subset of blockshuffle,feather,naive",
    )
    _add_config_flags(cp)
    _add_tile_flags(cp)
    cp.add_argument("--smooth", action="store_true", help="also smooth the blockshuffle output (off by default so identity comparisons are exact)")
    cp.add_argument("--no-oracle", action="store_true", help="skip the whole-image reference (for inputs too large to transform in one call)")
    cp.add_argument("--workers", type=int, default=1)
    cp.add_argument("--output-dir", default=".", help="where method outputs and the manifest go")
    cp.add_argument("--csv", default=None, help="also write metrics as CSV")
    cp.set_defaults(func=cmd_compare)

    dg = sub.add_parser("diagnose", help="overhead factor and sub-image distribution report")
    dg.add_argument("--input", required=True)
    _add_config_flags(dg)
    dg.add_argument("--json", default=None, help="write the report as JSON")
    dg.set_defaults(func=cmd_diagnose)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CLIUsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RasterError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 3
    except TransformStageError as exc:
        print(f"transform failed: {exc}", file=sys.stderr)
        return 4
    except (TransformError, ExternalCommandError) as exc:
        print(f"transform failed: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
