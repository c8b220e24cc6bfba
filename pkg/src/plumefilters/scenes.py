"""Synthetic hyperspectral scenes with known plume ground truth.

A scene is built as ``pixel = albedo * (mean + correlated noise + white
noise)`` with plumes injected additively as ``albedo * alpha * (mean * s)``
— the same linearized signal model the iterative filter assumes, so the
returned per-pixel alpha field is a direct oracle for filter output. A
multiplicative (Beer-Lambert style) injection is available behind a config
switch for robustness experiments.

The spectral background covariance is low-rank (three smooth spectral
factors) plus a diagonal, giving realistic band correlation without
simulating a specific sensor. All randomness comes from a single PCG64
stream, so a seed fully determines the output bit-for-bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .cube_io import HyperCube, PlumeMask, TargetSpectrum
from .errors import ValidationError

__all__ = [
    "PlumeSpec",
    "SceneConfig",
    "generate_scene",
    "target_spectrum",
    "default_wavelengths",
    "default_target_values",
    "default_background_mean",
    "strong_plume_config",
    "strong_plume_suite",
]

# Ground-truth mask cutoff: pixels where alpha exceeds this fraction of the
# strongest plume peak count as plume.
MASK_CUTOFF_FRACTION = 0.05

INJECTION_ADDITIVE = "additive"
INJECTION_MULTIPLICATIVE = "multiplicative"


def default_wavelengths(bands: int, low: float = 2100.0, high: float = 2500.0) -> np.ndarray:
    """Evenly spaced band grid over the strong methane absorption window."""
    return np.linspace(low, high, bands)


def _unit_grid(wavelengths: np.ndarray) -> np.ndarray:
    wl = np.asarray(wavelengths, dtype=np.float64)
    span = wl[-1] - wl[0]
    return (wl - wl[0]) / span if span > 0 else np.zeros_like(wl)


def default_target_values(wavelengths: np.ndarray) -> np.ndarray:
    """A synthetic absorption signature: line-structured (jagged) under a
    smooth envelope, negative everywhere, broad support.

    The fine structure matters: it keeps the target out of the smooth
    spectral subspace occupied by background variation, exactly like real
    gas transmittance combs do.
    """
    u = _unit_grid(wavelengths)
    envelope = (
        0.35 * np.exp(-(((u - 0.12) / 0.10) ** 2))
        + 1.00 * np.exp(-(((u - 0.50) / 0.22) ** 2))
        + 0.60 * np.exp(-(((u - 0.85) / 0.12) ** 2))
        + 0.02
    )
    # Chirped line comb, raised to a power for narrow spikes: most of the
    # signature's energy sits in sharp lines, not in the smooth envelope.
    comb = (0.5 * (1.0 + np.sin(40.0 * np.pi * u + 1.3 * np.sin(9.0 * np.pi * u)))) ** 4
    return -envelope * (0.08 + 1.30 * comb)


def default_background_mean(wavelengths: np.ndarray) -> np.ndarray:
    """Nearly flat, strictly positive band means (unit radiance scale).

    A flat continuum keeps the injected signature mean*s parallel to the
    target spectrum itself, which is what the classical detectors assume.
    """
    u = _unit_grid(wavelengths)
    return 1.0 + 0.02 * np.sin(2.2 * np.pi * u + 0.3)


def default_noise_sigma(wavelengths: np.ndarray) -> np.ndarray:
    """Heteroscedastic per-band white-noise sigma: mostly quiet bands with a
    few noisy windows, as real spectrometers have."""
    u = _unit_grid(wavelengths)
    return 0.008 + 0.12 * (0.5 + 0.5 * np.sin(3.0 * np.pi * u + 0.7)) ** 4


def _spectral_factors(wavelengths: np.ndarray) -> tuple[np.ndarray, float]:
    """Low-rank factors F and diagonal floor of the background covariance."""
    u = _unit_grid(wavelengths)
    factors = np.stack(
        [
            0.030 * np.ones_like(u),
            0.040 * np.sin(np.pi * u),
            0.025 * np.cos(2.0 * np.pi * u),
        ],
        axis=1,
    )
    return factors, 1.0e-4


@dataclass(frozen=True)
class PlumeSpec:
    """A radial plume: gaussian alpha bump hitting the mask cutoff at ``radius``."""

    row: float
    col: float
    radius: float
    peak_alpha: float

    def __post_init__(self) -> None:
        if not self.radius > 0:
            raise ValidationError("plume radius must be > 0")
        if self.peak_alpha < 0:
            raise ValidationError("plume peak_alpha must be >= 0")


@dataclass(frozen=True)
class SceneConfig:
    height: int = 256
    width: int = 256
    bands: int = 50
    wavelengths: np.ndarray | None = None
    background_mean: np.ndarray | None = None
    background_cov_scale: float = 1.0
    albedo_range: tuple[float, float] = (0.9, 1.1)
    plumes: tuple[PlumeSpec, ...] = ()
    noise_sigma: float | np.ndarray = 0.02
    seed: int = 0
    target_values: np.ndarray | None = None
    injection: str = INJECTION_ADDITIVE

    def __post_init__(self) -> None:
        if self.height < 1 or self.width < 1 or self.bands < 2:
            raise ValidationError("scene needs height, width >= 1 and bands >= 2")
        if self.background_cov_scale < 0 or np.any(np.asarray(self.noise_sigma) < 0):
            raise ValidationError("noise scales must be >= 0")
        lo, hi = self.albedo_range
        if not (0 < lo <= hi):
            raise ValidationError("albedo range must satisfy 0 < low <= high")
        if self.injection not in (INJECTION_ADDITIVE, INJECTION_MULTIPLICATIVE):
            raise ValidationError(f"unknown injection model {self.injection!r}")
        object.__setattr__(self, "plumes", tuple(self.plumes))

    def resolved_wavelengths(self) -> np.ndarray:
        if self.wavelengths is not None:
            return np.asarray(self.wavelengths, dtype=np.float64)
        return default_wavelengths(self.bands)

    def resolved_mean(self) -> np.ndarray:
        if self.background_mean is not None:
            return np.asarray(self.background_mean, dtype=np.float64)
        return default_background_mean(self.resolved_wavelengths())

    def resolved_target(self) -> np.ndarray:
        if self.target_values is not None:
            return np.asarray(self.target_values, dtype=np.float64)
        return default_target_values(self.resolved_wavelengths())

    def resolved_noise_sigma(self) -> np.ndarray:
        """Per-band white-noise sigma, broadcast from a scalar if needed."""
        sigma = np.asarray(self.noise_sigma, dtype=np.float64)
        if sigma.ndim == 0:
            return np.full(self.bands, float(sigma))
        if sigma.shape != (self.bands,):
            raise ValidationError("noise_sigma must be a scalar or one value per band")
        return sigma

    def to_dict(self) -> dict:
        """JSON-ready echo of every field that shaped the scene."""
        return {
            "height": self.height,
            "width": self.width,
            "bands": self.bands,
            "wavelengths": [float(v) for v in self.resolved_wavelengths()],
            "background_mean": [float(v) for v in self.resolved_mean()],
            "background_cov_scale": self.background_cov_scale,
            "albedo_range": list(self.albedo_range),
            "plumes": [
                {"row": p.row, "col": p.col, "radius": p.radius, "peak_alpha": p.peak_alpha}
                for p in self.plumes
            ],
            "noise_sigma": self.noise_sigma,
            "seed": self.seed,
            "target_values": [float(v) for v in self.resolved_target()],
            "injection": self.injection,
            "rng": "numpy PCG64",
        }


def target_spectrum(config: SceneConfig) -> TargetSpectrum:
    """The target spectrum matching a scene's band grid."""
    return TargetSpectrum(
        wavelengths=config.resolved_wavelengths(), values=config.resolved_target()
    )


def _albedo_field(rng: np.random.Generator, config: SceneConfig) -> np.ndarray:
    lo, hi = config.albedo_range
    rough = rng.standard_normal((config.height, config.width))
    smooth = ndimage.gaussian_filter(rough, sigma=max(config.height, config.width) / 16.0)
    span = smooth.max() - smooth.min()
    if span <= 0 or hi == lo:
        return np.full((config.height, config.width), (lo + hi) / 2.0)
    return lo + (smooth - smooth.min()) / span * (hi - lo)


def _alpha_field(config: SceneConfig) -> np.ndarray:
    alpha = np.zeros((config.height, config.width))
    if not config.plumes:
        return alpha
    rows = np.arange(config.height, dtype=np.float64)[:, None]
    cols = np.arange(config.width, dtype=np.float64)[None, :]
    for plume in config.plumes:
        d2 = (rows - plume.row) ** 2 + (cols - plume.col) ** 2
        # exp(-ln20 (d/radius)^2): the bump crosses 5% of peak exactly at d = radius.
        bump = plume.peak_alpha * np.exp(-math.log(20.0) * d2 / plume.radius**2)
        np.maximum(alpha, bump, out=alpha)
    return alpha


def generate_scene(config: SceneConfig) -> tuple[HyperCube, PlumeMask, np.ndarray]:
    """Build (cube, ground-truth mask, per-pixel alpha field) for a config.

    The mask is exactly ``alpha > 0.05 * max(peak_alpha)``. Draw order is
    fixed (albedo, correlated factors, white noise), so equal seeds give
    bit-identical scenes.
    """
    rng = np.random.default_rng(config.seed)
    wavelengths = config.resolved_wavelengths()
    mean = config.resolved_mean()
    s = config.resolved_target()
    if mean.shape != (config.bands,) or s.shape != (config.bands,) or wavelengths.shape != (config.bands,):
        raise ValidationError("wavelengths, background_mean, and target_values must have `bands` entries")

    albedo = _albedo_field(rng, config)
    factors, diag_floor = _spectral_factors(wavelengths)
    n_pixels = config.height * config.width

    loadings = rng.standard_normal((n_pixels, factors.shape[1]))
    white = rng.standard_normal((n_pixels, config.bands))
    correlated = math.sqrt(config.background_cov_scale) * (loadings @ factors.T)
    band_sigma = np.sqrt(
        config.background_cov_scale * diag_floor + config.resolved_noise_sigma() ** 2
    )
    background = mean[None, :] + correlated + band_sigma[None, :] * white

    alpha = _alpha_field(config)
    flat_albedo = albedo.ravel()
    flat_alpha = alpha.ravel()
    data = flat_albedo[:, None] * background
    if config.injection == INJECTION_ADDITIVE:
        data += (flat_albedo * flat_alpha)[:, None] * (mean * s)[None, :]
    else:
        data *= np.exp(flat_alpha[:, None] * s[None, :])

    peak = max((p.peak_alpha for p in config.plumes), default=0.0)
    mask = alpha > MASK_CUTOFF_FRACTION * peak
    cube = HyperCube(
        data=data.reshape(config.height, config.width, config.bands), wavelengths=wavelengths
    )
    return cube, PlumeMask(values=mask), alpha


# Signal-to-noise factor of the calibrated strong-plume scene: plume-center
# perturbation is ~5x the total per-band background noise sigma.
STRONG_PLUME_SNR = 5.0


def strong_plume_config(
    seed: int = 0,
    height: int = 768,
    width: int = 768,
    bands: int = 50,
    n_plumes: int = 1,
    snr: float = STRONG_PLUME_SNR,
) -> SceneConfig:
    """A calibrated, detectable strong-plume scene.

    One plume above the strong-stratum size (>= 1000 labeled pixels) with a
    plume-center perturbation of ``snr`` times the background noise norm.
    The default scene is 768x768: single-pass background statistics are
    contaminated by the plume itself, which bounds every one-shot filter at
    roughly peak_alpha/sqrt(Var(alpha)) sigma, and a >= 1000-pixel plume
    needs this much scene area around it for that bound to sit comfortably
    above the 5%-of-peak mask cutoff.
    """
    base = SceneConfig(height=height, width=width, bands=bands, seed=seed)
    wavelengths = base.resolved_wavelengths()
    mean = base.resolved_mean()
    s = base.resolved_target()
    noise_sigma = default_noise_sigma(wavelengths)
    factors, diag_floor = _spectral_factors(wavelengths)
    band_sigma = np.sqrt(
        base.background_cov_scale * (np.sum(factors**2, axis=1) + diag_floor)
        + noise_sigma**2
    )
    peak_alpha = snr * float(np.linalg.norm(band_sigma)) / float(np.linalg.norm(mean * s))

    placement = np.random.default_rng(seed ^ 0x5EED)
    plumes = []
    for _ in range(n_plumes):
        radius = float(placement.uniform(18.6, 20.5))
        row = float(placement.uniform(0.2 * height, 0.8 * height))
        col = float(placement.uniform(0.2 * width, 0.8 * width))
        plumes.append(PlumeSpec(row=row, col=col, radius=radius, peak_alpha=peak_alpha))
    return SceneConfig(
        height=height, width=width, bands=bands, seed=seed,
        albedo_range=(0.95, 1.05), plumes=tuple(plumes), noise_sigma=noise_sigma,
    )


def strong_plume_suite(n_scenes: int, base_seed: int = 0, **kwargs) -> list[SceneConfig]:
    """Independent strong-plume scenes with consecutive seeds."""
    return [strong_plume_config(seed=base_seed + i, **kwargs) for i in range(n_scenes)]
