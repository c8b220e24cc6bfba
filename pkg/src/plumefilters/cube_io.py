"""Hyperspectral cube, spectrum, map, and mask containers.

The on-disk cube container is a raw little-endian float32 payload
(``<name>.bin``, band-interleaved-by-pixel: the spectrum of each pixel is
contiguous) next to a JSON sidecar (``<name>.json``) with exactly the keys
``{"height", "width", "bands", "wavelengths", "dtype", "layout"}`` where
``dtype`` is always ``"f32le"`` and ``layout`` is always ``"bip"``.
Enhancement maps and plume masks reuse the same container with a single
band; target spectra travel as two-column CSV (``wavelength_nm,value``).

Round-trips through :func:`write_cube` / :func:`read_cube` are bit-exact.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import FormatError, ParseError, SizeMismatchError, ValidationError

__all__ = [
    "HyperCube",
    "TargetSpectrum",
    "EnhancementMap",
    "PlumeMask",
    "read_cube",
    "write_cube",
    "load_spectrum",
    "save_spectrum",
    "read_map",
    "write_map",
    "read_mask",
    "write_mask",
    "write_pgm",
    "check_alignment",
]

HEADER_KEYS = ("height", "width", "bands", "wavelengths", "dtype", "layout")
CONTAINER_DTYPE = "f32le"
CONTAINER_LAYOUT = "bip"

# Cube wavelengths and target-spectrum wavelengths must agree to this
# tolerance (nm); alignment is checked by wavelength, never by index trust.
ALIGNMENT_TOLERANCE_NM = 0.5


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class HyperCube:
    """An H x W x p radiance cube with per-band wavelengths in nm.

    ``data`` is stored float32 (the container element type) in
    band-interleaved-by-pixel order; filters upcast to float64 internally.
    Radiance units are treated as dimensionless: every filter in this
    package is either invariant to a global positive rescaling of the data
    or self-normalizing.
    """

    data: np.ndarray
    wavelengths: np.ndarray

    def __post_init__(self) -> None:
        data = np.ascontiguousarray(self.data, dtype=np.float32)
        wavelengths = np.asarray(self.wavelengths, dtype=np.float64)
        if data.ndim != 3:
            raise ValidationError("cube data must be a 3-D (height, width, bands) array")
        h, w, p = data.shape
        if h < 1 or w < 1 or p < 1:
            raise ValidationError(f"cube dimensions must be positive, got {data.shape}")
        if wavelengths.shape != (p,):
            raise ValidationError(
                f"wavelengths length {wavelengths.shape} does not match band count {p}"
            )
        if p > 1 and not np.all(np.diff(wavelengths) > 0):
            raise ValidationError("wavelengths must be strictly increasing")
        if not np.isfinite(wavelengths).all():
            raise ValidationError("wavelengths must be finite")
        if not np.isfinite(data).all():
            raise ValidationError("cube data must be finite")
        object.__setattr__(self, "data", _freeze(data))
        object.__setattr__(self, "wavelengths", _freeze(wavelengths))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def bands(self) -> int:
        return self.data.shape[2]

    def pixels(self) -> np.ndarray:
        """All pixel spectra as a (H*W, p) view, row-major flat order."""
        return self.data.reshape(-1, self.bands)


@dataclass(frozen=True)
class TargetSpectrum:
    """Per-band target signature (unit methane absorption; typically negative)."""

    wavelengths: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        wavelengths = np.asarray(self.wavelengths, dtype=np.float64)
        values = np.asarray(self.values, dtype=np.float64)
        if wavelengths.ndim != 1 or values.shape != wavelengths.shape:
            raise ValidationError("spectrum wavelengths and values must be equal-length 1-D arrays")
        if wavelengths.size == 0:
            raise ValidationError("spectrum must contain at least one band")
        if wavelengths.size > 1 and not np.all(np.diff(wavelengths) > 0):
            raise ValidationError("spectrum wavelengths must be strictly increasing")
        if not (np.isfinite(wavelengths).all() and np.isfinite(values).all()):
            raise ValidationError("spectrum must be finite")
        if not np.any(values != 0.0):
            raise ValidationError("spectrum must not be the zero vector")
        object.__setattr__(self, "wavelengths", _freeze(wavelengths))
        object.__setattr__(self, "values", _freeze(values))

    @property
    def bands(self) -> int:
        return self.wavelengths.size


@dataclass(frozen=True)
class EnhancementMap:
    """H x W scalar filter response; ``product_tag`` names the producing filter."""

    values: np.ndarray
    product_tag: str = "map"

    def __post_init__(self) -> None:
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValidationError("enhancement map must be a 2-D array")
        if not np.isfinite(values).all():
            raise ValidationError("enhancement map values must be finite")
        object.__setattr__(self, "values", _freeze(values))

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class PlumeMask:
    """Boolean per-pixel mask with the same dimensions as its source map."""

    values: np.ndarray = field()

    def __post_init__(self) -> None:
        values = np.ascontiguousarray(self.values, dtype=bool)
        if values.ndim != 2:
            raise ValidationError("plume mask must be a 2-D array")
        object.__setattr__(self, "values", _freeze(values))

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    def positive_count(self) -> int:
        return int(self.values.sum())


def check_alignment(
    cube: HyperCube, spectrum: TargetSpectrum, tolerance_nm: float = ALIGNMENT_TOLERANCE_NM
) -> None:
    """Raise unless cube and spectrum share a band grid within ``tolerance_nm``."""
    if cube.bands != spectrum.bands:
        raise ValidationError(
            f"cube has {cube.bands} bands but spectrum has {spectrum.bands}"
        )
    delta = np.abs(cube.wavelengths - spectrum.wavelengths)
    worst = float(delta.max())
    if worst > tolerance_nm:
        raise ValidationError(
            f"cube/spectrum wavelengths disagree by up to {worst:.3g} nm "
            f"(tolerance {tolerance_nm} nm)"
        )


# ---------------------------------------------------------------------------
# container read/write


def _header_path(payload_path: Path) -> Path:
    if payload_path.suffix == ".json":
        raise ValidationError("payload path must not end in .json (reserved for the header)")
    return payload_path.with_suffix(".json")


def _write_container(data: np.ndarray, wavelengths: np.ndarray, path: Path) -> None:
    h, w, p = data.shape
    header = {
        "height": h,
        "width": w,
        "bands": p,
        "wavelengths": [float(value) for value in wavelengths],
        "dtype": CONTAINER_DTYPE,
        "layout": CONTAINER_LAYOUT,
    }
    payload = np.ascontiguousarray(data, dtype="<f4")
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(_header_path(path), "w", encoding="ascii") as fh:
        json.dump(header, fh)
        fh.write("\n")
    payload.tofile(path)


def _read_container(path: Path) -> tuple[np.ndarray, np.ndarray]:
    header_path = _header_path(path)
    if not header_path.exists():
        raise FormatError(f"missing container header {header_path}")
    if not path.exists():
        raise FormatError(f"missing container payload {path}")
    try:
        with open(header_path, "r", encoding="ascii") as fh:
            header = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise FormatError(f"corrupt container header {header_path}: {exc}") from exc
    if not isinstance(header, dict) or set(header) != set(HEADER_KEYS):
        raise FormatError(
            f"container header {header_path} must have exactly the keys {sorted(HEADER_KEYS)}"
        )
    if header["dtype"] != CONTAINER_DTYPE:
        raise FormatError(f"unsupported dtype {header['dtype']!r} (expected {CONTAINER_DTYPE!r})")
    if header["layout"] != CONTAINER_LAYOUT:
        raise FormatError(f"unsupported layout {header['layout']!r} (expected {CONTAINER_LAYOUT!r})")
    try:
        h = int(header["height"])
        w = int(header["width"])
        p = int(header["bands"])
        wavelengths = np.asarray(header["wavelengths"], dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"non-numeric fields in container header {header_path}") from exc
    if h < 1 or w < 1 or p < 1:
        raise FormatError(f"container header declares empty dimensions {h}x{w}x{p}")
    if wavelengths.ndim != 1 or wavelengths.size != p:
        raise FormatError(
            f"header wavelength count {wavelengths.size} does not match bands {p}"
        )
    payload = np.fromfile(path, dtype="<f4")
    expected = h * w * p
    if payload.size != expected:
        raise SizeMismatchError(
            f"{path}: header declares {expected} float32 values "
            f"({h}x{w}x{p}) but payload holds {payload.size}"
        )
    return payload.reshape(h, w, p), wavelengths


def write_cube(cube: HyperCube, path: str | Path) -> None:
    """Write ``cube`` as ``path`` (payload) plus a JSON sidecar header."""
    _write_container(cube.data, cube.wavelengths, Path(path))


def read_cube(path: str | Path) -> HyperCube:
    """Read a cube container; the result satisfies every HyperCube invariant.

    Cubes used as filter input must carry at least two bands; single-band
    containers are enhancement maps or masks and are read with
    :func:`read_map` / :func:`read_mask` instead.
    """
    data, wavelengths = _read_container(Path(path))
    if data.shape[2] < 2:
        raise ValidationError(f"{path}: a hyperspectral cube needs >= 2 bands, got {data.shape[2]}")
    return HyperCube(data=data, wavelengths=wavelengths)


def write_map(enhancement: EnhancementMap, path: str | Path) -> None:
    """Write a map as a single-band container (values downcast to float32)."""
    data = enhancement.values.astype(np.float32)[:, :, None]
    _write_container(data, np.zeros(1), Path(path))


def read_map(path: str | Path, product_tag: str = "map") -> EnhancementMap:
    data, _ = _read_container(Path(path))
    if data.shape[2] != 1:
        raise FormatError(f"{path}: expected a single-band map container, got {data.shape[2]} bands")
    return EnhancementMap(values=data[:, :, 0].astype(np.float64), product_tag=product_tag)


def write_mask(mask: PlumeMask, path: str | Path) -> None:
    """Write a mask as a single-band container of 0.0 / 1.0 values."""
    data = mask.values.astype(np.float32)[:, :, None]
    _write_container(data, np.zeros(1), Path(path))


def read_mask(path: str | Path) -> PlumeMask:
    data, _ = _read_container(Path(path))
    if data.shape[2] != 1:
        raise FormatError(f"{path}: expected a single-band mask container, got {data.shape[2]} bands")
    return PlumeMask(values=data[:, :, 0] > 0.5)


def write_pgm(source: EnhancementMap | PlumeMask, path: str | Path) -> None:
    """Export an 8-bit binary PGM for eyeballing (min..max scaled to 0..255)."""
    if isinstance(source, PlumeMask):
        level = source.values.astype(np.uint8) * np.uint8(255)
    else:
        values = source.values
        low = float(values.min())
        span = float(values.max()) - low
        if span <= 0.0:
            level = np.zeros(values.shape, dtype=np.uint8)
        else:
            level = np.clip(np.round((values - low) / span * 255.0), 0, 255).astype(np.uint8)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{level.shape[1]} {level.shape[0]}\n255\n".encode("ascii"))
        fh.write(level.tobytes())


# ---------------------------------------------------------------------------
# spectrum CSV


def load_spectrum(path: str | Path) -> TargetSpectrum:
    """Load a ``wavelength_nm,value`` CSV; rows are sorted ascending on load."""
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError:
        raise
    if not rows:
        raise ParseError(f"{path}: empty spectrum file")
    header = [cell.strip() for cell in rows[0]]
    if header != ["wavelength_nm", "value"]:
        raise ParseError(f"{path}: expected header 'wavelength_nm,value', got {rows[0]!r}")
    if len(rows) == 1:
        raise ParseError(f"{path}: spectrum file has a header but no data rows")
    wavelengths = []
    values = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != 2:
            raise ParseError(f"{path}:{lineno}: expected 2 cells, got {len(row)}")
        try:
            wavelengths.append(float(row[0]))
            values.append(float(row[1]))
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: non-numeric cell in {row!r}") from exc
    if not wavelengths:
        raise ParseError(f"{path}: no data rows")
    wl = np.asarray(wavelengths, dtype=np.float64)
    vals = np.asarray(values, dtype=np.float64)
    if np.unique(wl).size != wl.size:
        raise ValidationError(f"{path}: duplicate wavelengths in spectrum")
    order = np.argsort(wl)
    return TargetSpectrum(wavelengths=wl[order], values=vals[order])


def save_spectrum(spectrum: TargetSpectrum, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["wavelength_nm", "value"])
        for wl, value in zip(spectrum.wavelengths, spectrum.values):
            writer.writerow([repr(float(wl)), repr(float(value))])
