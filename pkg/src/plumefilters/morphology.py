"""Morphological baseline: threshold, then binary erosion, then dilation.

Opening with a small square kernel removes isolated (salt) detections
while preserving regions at least as large as the kernel. Out-of-bounds
neighbors count as unset for both operations, which keeps erosion a subset
of the input and dilation a superset.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .cube_io import EnhancementMap, PlumeMask
from .errors import ValidationError

__all__ = ["MorphConfig", "threshold_map", "binary_erode", "binary_dilate", "morphological_baseline"]


@dataclass(frozen=True)
class MorphConfig:
    """Threshold (map units) plus square kernel side and iteration counts."""

    threshold: float
    kernel_size: int = 3
    erode_iters: int = 1
    dilate_iters: int = 1

    def __post_init__(self) -> None:
        if self.kernel_size < 1 or self.kernel_size % 2 == 0:
            raise ValidationError(f"kernel side must be odd and >= 1, got {self.kernel_size}")
        if self.erode_iters < 0 or self.dilate_iters < 0:
            raise ValidationError("iteration counts must be >= 0")
        if not np.isfinite(self.threshold):
            raise ValidationError("threshold must be finite")


def threshold_map(enhancement: EnhancementMap, threshold: float) -> PlumeMask:
    """Strictly-greater thresholding of a map into a mask."""
    return PlumeMask(values=enhancement.values > threshold)


def _structure(kernel_size: int) -> np.ndarray:
    if kernel_size < 1 or kernel_size % 2 == 0:
        raise ValidationError(f"kernel side must be odd and >= 1, got {kernel_size}")
    return np.ones((kernel_size, kernel_size), dtype=bool)


def binary_erode(mask: PlumeMask, kernel_size: int = 3, iterations: int = 1) -> PlumeMask:
    """A pixel survives iff every kernel-covered neighbor is set (borders unset)."""
    if iterations == 0:
        return mask
    eroded = ndimage.binary_erosion(
        mask.values, structure=_structure(kernel_size), iterations=iterations, border_value=0
    )
    return PlumeMask(values=eroded)


def binary_dilate(mask: PlumeMask, kernel_size: int = 3, iterations: int = 1) -> PlumeMask:
    """A pixel is set iff any kernel-covered in-bounds neighbor is set."""
    if iterations == 0:
        return mask
    dilated = ndimage.binary_dilation(
        mask.values, structure=_structure(kernel_size), iterations=iterations, border_value=0
    )
    return PlumeMask(values=dilated)


def morphological_baseline(enhancement: EnhancementMap, config: MorphConfig) -> PlumeMask:
    """Threshold, erode, dilate — in that order."""
    mask = threshold_map(enhancement, config.threshold)
    mask = binary_erode(mask, config.kernel_size, config.erode_iters)
    return binary_dilate(mask, config.kernel_size, config.dilate_iters)
