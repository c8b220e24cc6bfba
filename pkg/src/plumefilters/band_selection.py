"""Band-selection strategies and cube/spectrum subsetting.

Three strategies pick N bands from a target spectrum:

* ``top-mag``: the N bands with the largest absolute target value.
* ``var-inc``: greedy, seeded with the largest-magnitude band; each step
  adds the band that maximizes the sample variance (divisor k-1) of the
  selected target values.
* ``even``: N wavelengths evenly spaced across a wavelength range, each
  snapped to the nearest available band (duplicate snaps collapse, so the
  result may be shorter than N).

The wavelength range constrains only the ``even`` strategy; ties are always
broken toward the lower wavelength, which makes every strategy
deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cube_io import HyperCube, TargetSpectrum
from .errors import ValidationError

__all__ = [
    "STRATEGIES",
    "WavelengthRange",
    "BandSelection",
    "select_bands",
    "subset",
]

STRATEGY_TOP_MAGNITUDE = "top-mag"
STRATEGY_VARIANCE_INCREASE = "var-inc"
STRATEGY_EVEN = "even"
STRATEGIES = (STRATEGY_TOP_MAGNITUDE, STRATEGY_VARIANCE_INCREASE, STRATEGY_EVEN)


@dataclass(frozen=True)
class WavelengthRange:
    """Inclusive nm range; defaults to the main methane absorption window."""

    low: float = 2100.0
    high: float = 2500.0

    def __post_init__(self) -> None:
        if not self.low < self.high:
            raise ValidationError(f"wavelength range needs low < high, got [{self.low}, {self.high}]")


DEFAULT_RANGE = WavelengthRange()


@dataclass(frozen=True)
class BandSelection:
    """Sorted unique band indices produced by one strategy."""

    indices: tuple[int, ...]
    strategy: str
    n_requested: int

    def __post_init__(self) -> None:
        indices = tuple(int(i) for i in self.indices)
        if list(indices) != sorted(set(indices)):
            raise ValidationError("selection indices must be sorted and unique")
        if indices and indices[0] < 0:
            raise ValidationError("selection indices must be nonnegative")
        if len(indices) > self.n_requested:
            raise ValidationError("selection holds more indices than were requested")
        if self.strategy not in STRATEGIES:
            raise ValidationError(f"unknown strategy {self.strategy!r}")
        object.__setattr__(self, "indices", indices)

    def __len__(self) -> int:
        return len(self.indices)


def _sample_variance(values: np.ndarray) -> float:
    # Variance of a single value is defined as 0 here.
    if values.size < 2:
        return 0.0
    return float(np.var(values, ddof=1))


def _top_magnitude(spectrum: TargetSpectrum, n: int) -> list[int]:
    if n > spectrum.bands:
        raise ValidationError(f"cannot pick {n} bands from a {spectrum.bands}-band spectrum")
    # lexsort: last key is primary. Ties in |value| fall to the lower wavelength.
    order = np.lexsort((spectrum.wavelengths, -np.abs(spectrum.values)))
    return sorted(int(i) for i in order[:n])


def _variance_increase(spectrum: TargetSpectrum, n: int) -> list[int]:
    if n > spectrum.bands:
        raise ValidationError(f"cannot pick {n} bands from a {spectrum.bands}-band spectrum")
    values = spectrum.values
    seed = int(np.lexsort((spectrum.wavelengths, -np.abs(values)))[0])
    selected = [seed]
    remaining = [i for i in range(spectrum.bands) if i != seed]
    while len(selected) < n:
        best_index = -1
        best_var = -np.inf
        for candidate in remaining:  # ascending wavelength order: first win = tie-break
            var = _sample_variance(values[selected + [candidate]])
            if var > best_var:
                best_var = var
                best_index = candidate
        selected.append(best_index)
        remaining.remove(best_index)
    return sorted(selected)


def _evenly_spaced(spectrum: TargetSpectrum, n: int, wl_range: WavelengthRange) -> list[int]:
    wl = spectrum.wavelengths
    in_range = (wl >= wl_range.low) & (wl <= wl_range.high)
    if not in_range.any():
        raise ValidationError(
            f"no bands inside [{wl_range.low}, {wl_range.high}] nm for even spacing"
        )
    if n == 1:
        ideals = np.array([(wl_range.low + wl_range.high) / 2.0])
    else:
        ideals = wl_range.low + np.arange(n) * (wl_range.high - wl_range.low) / (n - 1)
    picked = []
    for ideal in ideals:
        # argmin returns the first minimum, i.e. the lower wavelength on ties.
        picked.append(int(np.argmin(np.abs(wl - ideal))))
    return sorted(set(picked))


def select_bands(
    spectrum: TargetSpectrum,
    strategy: str,
    n: int,
    wl_range: WavelengthRange = DEFAULT_RANGE,
) -> BandSelection:
    """Pick up to ``n`` bands of ``spectrum`` with the given strategy."""
    if n < 1:
        raise ValidationError(f"band count must be >= 1, got {n}")
    if strategy == STRATEGY_TOP_MAGNITUDE:
        indices = _top_magnitude(spectrum, n)
    elif strategy == STRATEGY_VARIANCE_INCREASE:
        indices = _variance_increase(spectrum, n)
    elif strategy == STRATEGY_EVEN:
        indices = _evenly_spaced(spectrum, n, wl_range)
    else:
        raise ValidationError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    return BandSelection(indices=tuple(indices), strategy=strategy, n_requested=n)


def subset(
    cube: HyperCube, spectrum: TargetSpectrum, selection: BandSelection
) -> tuple[HyperCube, TargetSpectrum]:
    """Materialize the selected bands of a cube/spectrum pair.

    Output bands stay in ascending wavelength order and keep cube/spectrum
    wavelength alignment.
    """
    if not selection.indices:
        raise ValidationError("cannot subset with an empty selection")
    top = selection.indices[-1]
    if top >= cube.bands or top >= spectrum.bands:
        raise ValidationError(
            f"selection index {top} out of range for {cube.bands}-band cube / "
            f"{spectrum.bands}-band spectrum"
        )
    idx = list(selection.indices)
    sub_cube = HyperCube(data=cube.data[:, :, idx], wavelengths=cube.wavelengths[idx])
    sub_spectrum = TargetSpectrum(
        wavelengths=spectrum.wavelengths[idx], values=spectrum.values[idx]
    )
    return sub_cube, sub_spectrum
