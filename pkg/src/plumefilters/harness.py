"""Directory-level evaluation and band-count sweeps.

Tiles may be processed in parallel; results are keyed by tile name and
merged in sorted order, so reports are bit-identical for any worker count.
"""

from __future__ import annotations

import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import metrics
from .band_selection import select_bands, subset
from .bench import compute_product
from .cube_io import read_map, read_mask
from .errors import ValidationError
from .metrics import DEFAULT_MIN_STRONG_PIXELS, ConfusionCounts, merge_counts, metrics_from_counts
from .morphology import MorphConfig, morphological_baseline
from .scenes import SceneConfig, generate_scene, target_spectrum

__all__ = ["find_pairs", "evaluate_directory", "sweep_rows"]


def find_pairs(pred_dir: str | Path, gt_dir: str | Path) -> list[tuple[str, Path, Path]]:
    """Match `<name>.bin` containers across the two directories by stem."""
    pred_dir = Path(pred_dir)
    gt_dir = Path(gt_dir)
    pred = {p.stem: p for p in sorted(pred_dir.glob("*.bin"))}
    gt = {p.stem: p for p in sorted(gt_dir.glob("*.bin"))}
    unpaired = sorted(set(pred) ^ set(gt))
    if unpaired:
        raise ValidationError(f"unpaired tiles between {pred_dir} and {gt_dir}: {unpaired}")
    return [(stem, pred[stem], gt[stem]) for stem in sorted(pred)]


@dataclass(frozen=True)
class _TileResult:
    name: str
    counts: ConfusionCounts
    stratum: str
    auprc: float | None


def _evaluate_tile(
    name: str,
    pred_path: Path,
    gt_path: Path,
    pred_kind: str,
    morph: MorphConfig | None,
    min_strong: int,
) -> _TileResult:
    gt = read_mask(gt_path)
    stratum = metrics.stratify(gt, min_strong)
    if pred_kind == "masks":
        pred_mask = read_mask(pred_path)
        area = None
    else:
        enhancement = read_map(pred_path)
        if morph is None:
            raise ValidationError("evaluating maps needs a threshold (morphology config)")
        pred_mask = morphological_baseline(enhancement, morph)
        area = metrics.auprc(enhancement, gt) if gt.positive_count() > 0 else None
    return _TileResult(
        name=name,
        counts=metrics.confusion_counts(pred_mask, gt),
        stratum=stratum,
        auprc=area,
    )


def evaluate_directory(
    pred_dir: str | Path,
    gt_dir: str | Path,
    *,
    pred_kind: str = "maps",
    morph: MorphConfig | None = None,
    min_strong: int = DEFAULT_MIN_STRONG_PIXELS,
    workers: int = 1,
) -> dict:
    """Micro-averaged metrics over paired (prediction, ground truth) tiles.

    ``pred_kind`` is ``"maps"`` (raw responses, binarized by the
    morphological baseline, AUPRC reported) or ``"masks"`` (already
    boolean). The report always states the averaging convention.
    """
    if pred_kind not in ("maps", "masks"):
        raise ValidationError(f"pred_kind must be 'maps' or 'masks', got {pred_kind!r}")
    pairs = find_pairs(pred_dir, gt_dir)
    if not pairs:
        raise ValidationError(f"no tile pairs found in {pred_dir} / {gt_dir}")

    def work(pair: tuple[str, Path, Path]) -> _TileResult:
        return _evaluate_tile(pair[0], pair[1], pair[2], pred_kind, morph, min_strong)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, pairs))
    else:
        results = [work(pair) for pair in pairs]
    results.sort(key=lambda r: r.name)

    overall = merge_counts(r.counts for r in results)
    precision, recall, f1 = metrics_from_counts(overall)
    report: dict = {
        "averaging": "micro",
        "tiles": len(results),
        "min_strong_pixels": min_strong,
        "precision": precision,
        "recall": recall,
        "f1": f1,
    }
    for stratum in (metrics.STRATUM_STRONG, metrics.STRATUM_WEAK):
        stratum_counts = [r.counts for r in results if r.stratum == stratum]
        if stratum_counts:
            _, _, stratum_f1 = metrics_from_counts(merge_counts(stratum_counts))
            report[f"f1_{stratum}"] = stratum_f1
        else:
            report[f"f1_{stratum}"] = None
    areas = {r.name: r.auprc for r in results if r.auprc is not None}
    report["auprc"] = statistics.mean(areas.values()) if areas else None
    report["auprc_per_tile"] = areas
    report["strata"] = {r.name: r.stratum for r in results}
    return report


def sweep_rows(
    product: str,
    configs: list[SceneConfig],
    strategies: list[str],
    channels: list[int],
    *,
    runs: int = 5,
    n_iter: int = 30,
    epsilon: float = 1e-6,
    fraction: float = 0.01,
    mode: str | None = None,
    min_strong: int = DEFAULT_MIN_STRONG_PIXELS,
) -> list[dict]:
    """One row per (strategy, channel count): strong-plume AUPRC and timing.

    Band subsetting happens outside the timed region, so timings compare
    the product cost itself across channel counts.
    """
    if not configs:
        raise ValidationError("sweep needs at least one scene")
    scenes = [generate_scene(cfg) for cfg in configs]
    spectrum = target_spectrum(configs[0])
    rows = []
    for strategy in strategies:
        for n in channels:
            selection = select_bands(spectrum, strategy, n)
            areas = []
            timed = None
            for cfg, (cube, gt, _) in zip(configs, scenes):
                sub_cube, sub_spectrum = subset(cube, spectrum, selection)
                if timed is None:
                    seconds = []
                    for _ in range(runs + 1):  # first pass doubles as warm-up
                        start = time.perf_counter()
                        compute_product(
                            product, sub_cube, sub_spectrum,
                            mode=mode, n_iter=n_iter, epsilon=epsilon, fraction=fraction,
                        )
                        seconds.append(time.perf_counter() - start)
                    timed = statistics.median(seconds[1:])
                enhancement = compute_product(
                    product, sub_cube, sub_spectrum,
                    mode=mode, n_iter=n_iter, epsilon=epsilon, fraction=fraction,
                )
                if metrics.stratify(gt, min_strong) == metrics.STRATUM_STRONG:
                    areas.append(metrics.auprc(enhancement, gt))
            rows.append(
                {
                    "strategy": strategy,
                    "n_bands": len(selection),
                    "auprc_strong": float(np.mean(areas)) if areas else None,
                    "median_seconds": timed,
                }
            )
    return rows
