"""Command-line front end: compute, bench, eval, sweep, synth, bands.

Every run that writes artifacts also writes a metadata JSON with the full
configuration (band indices, seeds, library versions), enough to reproduce
the run exactly. Exit codes: 0 success, 1 data/numerical error, 2 usage
error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import sys
import time
from importlib import resources
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .band_selection import STRATEGIES, WavelengthRange, select_bands, subset
from .bench import DEFAULT_MODES, PRODUCTS, benchmark_product, compute_product
from .cube_io import (
    load_spectrum,
    read_cube,
    save_spectrum,
    write_cube,
    write_map,
    write_mask,
    write_pgm,
)
from .errors import PlumeFiltersError
from .harness import evaluate_directory, sweep_rows
from .mag1c import MODE_TILE
from .morphology import MorphConfig
from .scenes import generate_scene, strong_plume_config, strong_plume_suite, target_spectrum

__all__ = ["main"]


def _versions() -> dict:
    return {
        "plumefilters": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": sys.version.split()[0],
    }


def load_thresholds(path: str | Path | None = None) -> dict[str, float]:
    """Per-product thresholds from an INI file (`[product] threshold = x`)."""
    parser = configparser.ConfigParser()
    if path is None:
        text = resources.files("plumefilters").joinpath("data/thresholds.ini").read_text()
        parser.read_string(text)
    else:
        if not Path(path).exists():
            raise PlumeFiltersError(f"thresholds file not found: {path}")
        parser.read(path)
    return {section: parser.getfloat(section, "threshold") for section in parser.sections()}


def _add_product_options(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--product", required=True, choices=PRODUCTS)
    sub.add_argument("--cube", required=True, help="cube container payload (.bin)")
    sub.add_argument("--spectrum", required=True, help="target spectrum CSV")
    sub.add_argument("--mode", choices=("tile", "column"), default=None,
                     help="statistics scope (default: per-product convention)")
    sub.add_argument("--iters", type=int, default=30, help="iteration count for mag1c products")
    sub.add_argument("--epsilon", type=float, default=1e-6, help="sparsity stabilizer")
    sub.add_argument("--fraction", type=float, default=0.01,
                     help="sample fraction for mag1c-sas parameter estimation")
    sub.add_argument("--bands", choices=STRATEGIES, default=None, help="band-selection strategy")
    sub.add_argument("--n-bands", type=int, default=None, help="number of bands to select")
    sub.add_argument("--wl-low", type=float, default=2100.0)
    sub.add_argument("--wl-high", type=float, default=2500.0)


def _check_product_args(parser: argparse.ArgumentParser, args: argparse.Namespace) -> None:
    if args.product == "mag1c-sas" and args.mode == "column":
        parser.error("mag1c-sas runs tile-wise only")
    if (args.bands is None) != (args.n_bands is None):
        parser.error("--bands and --n-bands must be given together")


def _prepare_inputs(args: argparse.Namespace):
    cube = read_cube(args.cube)
    spectrum = load_spectrum(args.spectrum)
    band_indices = None
    if args.bands is not None:
        selection = select_bands(
            spectrum, args.bands, args.n_bands, WavelengthRange(args.wl_low, args.wl_high)
        )
        cube, spectrum = subset(cube, spectrum, selection)
        band_indices = list(selection.indices)
    return cube, spectrum, band_indices


def _product_config(args: argparse.Namespace, band_indices) -> dict:
    config = {
        "product": args.product,
        "cube": str(args.cube),
        "spectrum": str(args.spectrum),
        "mode": args.mode or DEFAULT_MODES[args.product],
        "band_strategy": args.bands,
        "n_bands": args.n_bands,
        "band_indices": band_indices,
        "versions": _versions(),
    }
    if args.product in ("mag1c", "mag1c-sas"):
        config["n_iter"] = args.iters
        config["epsilon"] = args.epsilon
    if args.product == "mag1c-sas":
        config["fraction"] = args.fraction
    return config


def cmd_compute(parser: argparse.ArgumentParser, args: argparse.Namespace) -> int:
    _check_product_args(parser, args)
    cube, spectrum, band_indices = _prepare_inputs(args)
    start = time.perf_counter()
    enhancement = compute_product(
        args.product, cube, spectrum,
        mode=args.mode, n_iter=args.iters, epsilon=args.epsilon, fraction=args.fraction,
    )
    elapsed = time.perf_counter() - start
    out = Path(args.out)
    write_map(enhancement, out)
    if args.pgm:
        write_pgm(enhancement, out.with_suffix(".pgm"))
    meta = _product_config(args, band_indices)
    meta["wall_seconds"] = elapsed
    meta["out"] = str(out)
    meta_path = out.with_suffix(".meta.json")
    meta_path.write_text(json.dumps(meta, indent=2) + "\n")
    print(f"wrote {out} (+ header, metadata) in {elapsed:.3f}s")
    return 0


def cmd_bench(parser: argparse.ArgumentParser, args: argparse.Namespace) -> int:
    _check_product_args(parser, args)
    cube, spectrum, band_indices = _prepare_inputs(args)
    if args.time_includes_subset and band_indices is None:
        parser.error("--time-includes-subset needs --bands/--n-bands")
    if args.time_includes_subset:
        # Re-read raw inputs so subsetting happens inside the timed region.
        raw_cube = read_cube(args.cube)
        raw_spectrum = load_spectrum(args.spectrum)
        selection = select_bands(
            raw_spectrum, args.bands, args.n_bands, WavelengthRange(args.wl_low, args.wl_high)
        )
        import statistics
        import tracemalloc

        def run():
            sub_cube, sub_spectrum = subset(raw_cube, raw_spectrum, selection)
            return compute_product(
                args.product, sub_cube, sub_spectrum,
                mode=args.mode, n_iter=args.iters, epsilon=args.epsilon, fraction=args.fraction,
            )

        tracemalloc.start()
        try:
            run()
            _, peak = tracemalloc.get_traced_memory()
        finally:
            tracemalloc.stop()
        seconds = []
        for _ in range(args.runs):
            t0 = time.perf_counter()
            run()
            seconds.append(time.perf_counter() - t0)
        report = {
            "product": args.product,
            "shape": {"height": cube.height, "width": cube.width, "bands": cube.bands},
            "config": _product_config(args, band_indices) | {"time_includes_subset": True,
                                                             "runs": args.runs, "warmup_runs": 1},
            "run_seconds": seconds,
            "median_seconds": statistics.median(seconds),
            "peak_bytes": int(peak),
        }
    else:
        bench = benchmark_product(
            args.product, cube, spectrum,
            runs=args.runs, mode=args.mode,
            n_iter=args.iters, epsilon=args.epsilon, fraction=args.fraction,
        )
        report = bench.to_dict()
        report["config"] |= _product_config(args, band_indices)
    print(json.dumps(report, indent=2))
    return 0


def cmd_eval(parser: argparse.ArgumentParser, args: argparse.Namespace) -> int:
    pred_dir = Path(args.pred_dir)
    gt_dir = Path(args.gt_dir)
    if not any(pred_dir.glob("*.bin")) or not any(gt_dir.glob("*.bin")):
        parser.error(f"no .bin tiles found in {pred_dir} or {gt_dir}")
    morph = None
    if args.pred_kind == "maps":
        if args.threshold is not None:
            threshold = args.threshold
        else:
            if args.product is None:
                parser.error("evaluating maps needs --product (for its threshold) or --threshold")
            thresholds = load_thresholds(args.thresholds)
            if args.product not in thresholds:
                raise PlumeFiltersError(f"no threshold for product {args.product!r} in config")
            threshold = thresholds[args.product]
        morph = MorphConfig(
            threshold=threshold,
            kernel_size=args.kernel,
            erode_iters=args.erode,
            dilate_iters=args.dilate,
        )
    report = evaluate_directory(
        pred_dir, gt_dir,
        pred_kind=args.pred_kind, morph=morph,
        min_strong=args.min_strong, workers=args.threads,
    )
    report["versions"] = _versions()
    if morph is not None:
        report["morphology"] = {
            "threshold": morph.threshold,
            "kernel_size": morph.kernel_size,
            "erode_iters": morph.erode_iters,
            "dilate_iters": morph.dilate_iters,
        }
    print(json.dumps(report, indent=2))
    return 0


def cmd_sweep(parser: argparse.ArgumentParser, args: argparse.Namespace) -> int:
    strategies = [s.strip() for s in args.strategies.split(",") if s.strip()]
    for strategy in strategies:
        if strategy not in STRATEGIES:
            parser.error(f"unknown strategy {strategy!r}")
    try:
        channels = [int(c) for c in args.channels.split(",") if c.strip()]
    except ValueError:
        parser.error(f"--channels must be a comma list of integers, got {args.channels!r}")
    if not channels:
        parser.error("--channels must name at least one channel count")
    configs = strong_plume_suite(args.scenes, base_seed=args.seed, bands=args.scene_bands)
    rows = sweep_rows(
        args.product, configs, strategies, channels,
        runs=args.runs, n_iter=args.iters, epsilon=args.epsilon,
        fraction=args.fraction, mode=args.mode,
        min_strong=args.min_strong,
    )
    writer = csv.writer(sys.stdout)
    writer.writerow(["strategy", "n_bands", "auprc_strong", "median_seconds"])
    for row in rows:
        writer.writerow([row["strategy"], row["n_bands"], row["auprc_strong"], row["median_seconds"]])
    return 0


def cmd_synth(parser: argparse.ArgumentParser, args: argparse.Namespace) -> int:
    config = strong_plume_config(
        seed=args.seed, height=args.height, width=args.width, bands=args.bands
    )
    cube, mask, _ = generate_scene(config)
    out = Path(args.out)
    write_cube(cube, out.with_suffix(".bin"))
    write_mask(mask, out.parent / (out.stem + "_mask.bin"))
    save_spectrum(target_spectrum(config), out.parent / (out.stem + "_spectrum.csv"))
    echo = {"scene": config.to_dict(), "versions": _versions()}
    (out.parent / (out.stem + "_scene.json")).write_text(json.dumps(echo, indent=2) + "\n")
    print(f"wrote {out.with_suffix('.bin')} + mask, spectrum, scene echo")
    return 0


def cmd_bands(parser: argparse.ArgumentParser, args: argparse.Namespace) -> int:
    spectrum = load_spectrum(args.spectrum)
    selection = select_bands(
        spectrum, args.strategy, args.n, WavelengthRange(args.wl_low, args.wl_high)
    )
    payload = {
        "strategy": selection.strategy,
        "n_requested": selection.n_requested,
        "indices": list(selection.indices),
        "wavelengths_nm": [float(spectrum.wavelengths[i]) for i in selection.indices],
    }
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        print(f"strategy={payload['strategy']} selected {len(selection)} bands")
        for index, wl in zip(payload["indices"], payload["wavelengths_nm"]):
            print(f"  {index:4d}  {wl:.2f} nm")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plumefilters",
        description="Fast hyperspectral enhancement products for methane plume mapping.",
    )
    parser.add_argument("--threads", type=int, default=1, help="worker threads for eval/sweep")
    parser.add_argument("--seed", type=int, default=0, help="base seed for synthetic scenes")
    parser.add_argument("--json", action="store_true", help="machine-readable stdout where applicable")
    commands = parser.add_subparsers(dest="command", required=True)

    sub = commands.add_parser("compute", help="compute one enhancement product")
    _add_product_options(sub)
    sub.add_argument("--out", required=True, help="output map payload (.bin)")
    sub.add_argument("--pgm", action="store_true", help="also write an 8-bit PGM preview")
    sub.set_defaults(handler=cmd_compute)

    sub = commands.add_parser("bench", help="median-of-N timing of a product")
    _add_product_options(sub)
    sub.add_argument("--runs", type=int, default=5, help="timed runs (default 5)")
    sub.add_argument("--time-includes-subset", action="store_true",
                     help="include band subsetting in the timed region")
    sub.set_defaults(handler=cmd_bench)

    sub = commands.add_parser("eval", help="micro-averaged metrics over a tile directory")
    sub.add_argument("--pred-dir", required=True)
    sub.add_argument("--gt-dir", required=True)
    sub.add_argument("--pred-kind", choices=("maps", "masks"), default="maps")
    sub.add_argument("--product", choices=PRODUCTS, default=None,
                     help="product name, used to pick the configured threshold")
    sub.add_argument("--threshold", type=float, default=None, help="override map threshold")
    sub.add_argument("--thresholds", default=None, help="INI file with <product> thresholds")
    sub.add_argument("--kernel", type=int, default=3)
    sub.add_argument("--erode", type=int, default=1)
    sub.add_argument("--dilate", type=int, default=1)
    sub.add_argument("--min-strong", type=int, default=1000)
    sub.set_defaults(handler=cmd_eval)

    sub = commands.add_parser("sweep", help="strategy x channel-count sweep on synthetic scenes")
    sub.add_argument("--product", choices=PRODUCTS, default="mag1c-sas")
    sub.add_argument("--strategies", default="top-mag,var-inc,even")
    sub.add_argument("--channels", default="10,30,50")
    sub.add_argument("--scenes", type=int, default=3)
    sub.add_argument("--scene-bands", type=int, default=50)
    sub.add_argument("--runs", type=int, default=5)
    sub.add_argument("--mode", choices=("tile", "column"), default=None)
    sub.add_argument("--iters", type=int, default=30)
    sub.add_argument("--epsilon", type=float, default=1e-6)
    sub.add_argument("--fraction", type=float, default=0.01)
    sub.add_argument("--min-strong", type=int, default=1000)
    sub.set_defaults(handler=cmd_sweep)

    sub = commands.add_parser("synth", help="emit a synthetic strong-plume scene")
    sub.add_argument("--out", required=True, help="output basename (suffixes are added)")
    sub.add_argument("--height", type=int, default=256)
    sub.add_argument("--width", type=int, default=256)
    sub.add_argument("--bands", type=int, default=50)
    sub.set_defaults(handler=cmd_synth)

    sub = commands.add_parser("bands", help="run a band-selection strategy on a spectrum")
    sub.add_argument("--spectrum", required=True)
    sub.add_argument("--strategy", choices=STRATEGIES, required=True)
    sub.add_argument("--n", type=int, required=True)
    sub.add_argument("--wl-low", type=float, default=2100.0)
    sub.add_argument("--wl-high", type=float, default=2500.0)
    sub.set_defaults(handler=cmd_bands)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(parser, args)
    except PlumeFiltersError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
