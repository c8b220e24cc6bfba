"""Pixel-level segmentation metrics, PR curves, and plume stratification.

Aggregation over a tile set is micro-averaged: confusion counts are summed
first (an associative merge), then precision/recall/F1 are computed once.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .cube_io import EnhancementMap, PlumeMask
from .errors import UndefinedMetricError, ValidationError

__all__ = [
    "ConfusionCounts",
    "PrCurve",
    "confusion_counts",
    "merge_counts",
    "metrics_from_counts",
    "segmentation_metrics",
    "pr_curve",
    "auprc",
    "stratify",
    "STRATA",
]

STRATUM_EMPTY = "empty"
STRATUM_WEAK = "weak"
STRATUM_STRONG = "strong"
STRATA = (STRATUM_EMPTY, STRATUM_WEAK, STRATUM_STRONG)

DEFAULT_MIN_STRONG_PIXELS = 1000


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    def __post_init__(self) -> None:
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise ValidationError("confusion counts must be nonnegative")

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(
            tp=self.tp + other.tp,
            fp=self.fp + other.fp,
            fn=self.fn + other.fn,
            tn=self.tn + other.tn,
        )

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


def confusion_counts(pred: PlumeMask, gt: PlumeMask) -> ConfusionCounts:
    if pred.values.shape != gt.values.shape:
        raise ValidationError(
            f"mask shapes differ: {pred.values.shape} vs {gt.values.shape}"
        )
    p = pred.values
    g = gt.values
    return ConfusionCounts(
        tp=int(np.count_nonzero(p & g)),
        fp=int(np.count_nonzero(p & ~g)),
        fn=int(np.count_nonzero(~p & g)),
        tn=int(np.count_nonzero(~p & ~g)),
    )


def merge_counts(counts: Iterable[ConfusionCounts]) -> ConfusionCounts:
    total = ConfusionCounts()
    for c in counts:
        total = total + c
    return total


def metrics_from_counts(counts: ConfusionCounts) -> tuple[float, float, float]:
    """(precision, recall, f1), each 0 when its denominator is 0."""
    precision = counts.tp / (counts.tp + counts.fp) if counts.tp + counts.fp else 0.0
    recall = counts.tp / (counts.tp + counts.fn) if counts.tp + counts.fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def segmentation_metrics(pred: PlumeMask, gt: PlumeMask) -> tuple[float, float, float]:
    return metrics_from_counts(confusion_counts(pred, gt))


@dataclass(frozen=True)
class PrCurve:
    """(recall, precision) points swept from high to low threshold."""

    recalls: np.ndarray
    precisions: np.ndarray

    def __post_init__(self) -> None:
        recalls = np.asarray(self.recalls, dtype=np.float64)
        precisions = np.asarray(self.precisions, dtype=np.float64)
        if recalls.shape != precisions.shape or recalls.ndim != 1:
            raise ValidationError("PR curve needs equal-length 1-D recall/precision arrays")
        if np.any(np.diff(recalls) < 0):
            raise ValidationError("recall must be nondecreasing along the curve")
        for arr in (recalls, precisions):
            if np.any((arr < 0) | (arr > 1)):
                raise ValidationError("recall and precision must lie in [0, 1]")
        object.__setattr__(self, "recalls", recalls)
        object.__setattr__(self, "precisions", precisions)

    def auc(self) -> float:
        """Step-rule area sum((R_i - R_{i-1}) * P_i) with R_0 = 0."""
        previous = np.concatenate(([0.0], self.recalls[:-1]))
        return float(np.sum((self.recalls - previous) * self.precisions))


def pr_curve(enhancement: EnhancementMap, gt: PlumeMask) -> PrCurve:
    """One PR point per distinct map value, used as a >= threshold."""
    if enhancement.values.shape != gt.values.shape:
        raise ValidationError(
            f"map shape {enhancement.values.shape} does not match mask {gt.values.shape}"
        )
    scores = enhancement.values.ravel()
    truth = gt.values.ravel()
    positives = int(truth.sum())
    if positives == 0:
        raise UndefinedMetricError("PR curve undefined: ground truth has no positive pixels")
    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_truth = truth[order]
    tp = np.cumsum(sorted_truth)
    fp = np.cumsum(~sorted_truth)
    # Keep the last index of each run of equal scores: each distinct value
    # contributes exactly one threshold.
    boundary = np.nonzero(np.diff(sorted_scores))[0]
    keep = np.concatenate((boundary, [sorted_scores.size - 1]))
    recalls = tp[keep] / positives
    precisions = tp[keep] / (tp[keep] + fp[keep])
    return PrCurve(recalls=recalls, precisions=precisions)


def auprc(enhancement: EnhancementMap, gt: PlumeMask) -> float:
    """Area under the PR curve (average-precision step rule)."""
    return pr_curve(enhancement, gt).auc()


def stratify(gt: PlumeMask, min_strong_pixels: int = DEFAULT_MIN_STRONG_PIXELS) -> str:
    """'empty' with no positives, 'strong' at >= min_strong_pixels, else 'weak'."""
    count = gt.positive_count()
    if count == 0:
        return STRATUM_EMPTY
    if count >= min_strong_pixels:
        return STRATUM_STRONG
    return STRATUM_WEAK
