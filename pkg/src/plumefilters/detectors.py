"""Classical target-detection filters: matched filter, CEM, and ACE.

With pixel x, target t, band means mu, centered covariance C, and raw
correlation K (all statistics estimated from the scope the pixel belongs
to — the whole tile, or its sensor column):

* matched filter:  y = (x-mu)' C^-1 (t-mu) / ((t-mu)' C^-1 (t-mu))
* CEM:             y = x' K^-1 t / (t' K^-1 t)          (no centering)
* ACE:             y = [(x-mu)' C^-1 (t-mu)]^2
                       / ((t-mu)' C^-1 (t-mu) * (x-mu)' C^-1 (x-mu))

All three use divisor N-1 and cost O(p) per pixel after one O(p^3) solve
per scope (ACE additionally solves one right-hand side per pixel, which is
what makes it the slowest of the three).
"""

from __future__ import annotations

import numpy as np

from .background import KIND_CENTERED, KIND_RAW, BackgroundStats, estimate, spd_solve
from .cube_io import EnhancementMap, HyperCube, TargetSpectrum, check_alignment
from .errors import DegenerateTargetError, ValidationError

__all__ = [
    "MODES",
    "matched_filter",
    "cem",
    "ace",
    "matched_filter_scores",
    "cem_scores",
    "ace_scores",
]

MODE_TILE = "tile"
MODE_COLUMN = "column"
MODES = (MODE_TILE, MODE_COLUMN)

# A pixel whose whitened deviation energy falls below this emits an ACE
# score of 0 instead of dividing by ~0.
ACE_PIXEL_FLOOR = 1e-12

# Denominator floor, relative to |t|^2, below which the target is
# considered to have collapsed onto the background mean.
TARGET_FLOOR = 1e-12


def _degenerate_check(denom: float, target: np.ndarray, name: str, context: str) -> None:
    if not denom > TARGET_FLOOR * float(target @ target):
        raise DegenerateTargetError(
            f"{name}: target energy {denom:.3e} is degenerate ({context})"
        )


def matched_filter_scores(
    pixels: np.ndarray, stats: BackgroundStats, target: np.ndarray, context: str = ""
) -> np.ndarray:
    """Matched-filter response of each pixel under frozen statistics."""
    x = np.asarray(pixels, dtype=np.float64)
    t = np.asarray(target, dtype=np.float64)
    d = t - stats.mean
    q = spd_solve(stats, d, context)
    denom = float(d @ q)
    _degenerate_check(denom, t, "matched filter", context)
    return (x @ q - float(stats.mean @ q)) / denom


def cem_scores(
    pixels: np.ndarray, stats: BackgroundStats, target: np.ndarray, context: str = ""
) -> np.ndarray:
    """CEM response of each pixel under frozen (raw-correlation) statistics."""
    x = np.asarray(pixels, dtype=np.float64)
    t = np.asarray(target, dtype=np.float64)
    u = spd_solve(stats, t, context)
    denom = float(t @ u)
    _degenerate_check(denom, t, "cem", context)
    return (x @ u) / denom


def ace_scores(
    pixels: np.ndarray, stats: BackgroundStats, target: np.ndarray, context: str = ""
) -> np.ndarray:
    """ACE response (cosine-squared in the whitened space) per pixel."""
    x = np.asarray(pixels, dtype=np.float64)
    t = np.asarray(target, dtype=np.float64)
    d = t - stats.mean
    q = spd_solve(stats, d, context)
    denom = float(d @ q)
    _degenerate_check(denom, t, "ace", context)
    centered = x - stats.mean
    projection = centered @ q
    whitened = spd_solve(stats, centered.T, context)
    pixel_energy = np.einsum("ij,ji->i", centered, whitened)
    out = np.zeros(x.shape[0])
    live = pixel_energy >= ACE_PIXEL_FLOOR
    out[live] = projection[live] ** 2 / (denom * pixel_energy[live])
    return out


def _apply(
    cube: HyperCube,
    spectrum: TargetSpectrum,
    mode: str,
    kind: str,
    scores,
    tag: str,
) -> EnhancementMap:
    check_alignment(cube, spectrum)
    if mode not in MODES:
        raise ValidationError(f"unknown apply mode {mode!r}; expected one of {MODES}")
    target = spectrum.values
    if mode == MODE_TILE:
        pixels = cube.pixels()
        stats = estimate(pixels, kind, ddof=1)
        values = scores(pixels, stats, target, f"{tag} tile").reshape(cube.height, cube.width)
        return EnhancementMap(values=values, product_tag=tag)
    if cube.height < 2:
        raise ValidationError("column mode needs at least 2 pixels per column")
    values = np.empty((cube.height, cube.width))
    for j in range(cube.width):
        column = cube.data[:, j, :]
        stats = estimate(column, kind, ddof=1)
        values[:, j] = scores(column, stats, target, f"{tag} column {j}")
    return EnhancementMap(values=values, product_tag=tag)


def matched_filter(cube: HyperCube, spectrum: TargetSpectrum, mode: str = MODE_TILE) -> EnhancementMap:
    """Matched filter over a cube, statistics per tile or per column."""
    return _apply(cube, spectrum, mode, KIND_CENTERED, matched_filter_scores, "mf")


def cem(cube: HyperCube, spectrum: TargetSpectrum, mode: str = MODE_TILE) -> EnhancementMap:
    """Constrained energy minimization; raw correlation, no mean subtraction."""
    return _apply(cube, spectrum, mode, KIND_RAW, cem_scores, "cem")


def ace(cube: HyperCube, spectrum: TargetSpectrum, mode: str = MODE_TILE) -> EnhancementMap:
    """Adaptive cosine estimator; brightness-invariant, bounded in [0, 1]."""
    return _apply(cube, spectrum, mode, KIND_CENTERED, ace_scores, "ace")
