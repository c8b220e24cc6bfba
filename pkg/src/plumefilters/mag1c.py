"""Iterative albedo-corrected, sparsity-reweighted matched filter (Mag1c)
and its two-stage accelerated variant (Mag1c-SAS).

The original filter runs per sensor column (or over the whole tile): it
estimates band means mu and covariance C (divisor N), fixes per-pixel
albedo weights r_i = x_i'mu / mu'mu once from the initial means, and then
repeats for N_iter iterations

    w^k     = 1 / (r * (alpha^{k-1} + eps))
    mu^k    = mean_i(x_i - r_i alpha_i^{k-1} mu^{k-1} * s)
    d_i     = x_i - r_i alpha_i^{k-1} mu^k * s - mu^k
    C^k     = mean_i(d_i d_i')
    m       = max((mu^k * s)' C^k^-1 (mu^k * s), 1)
    alpha^k = max(((x_i - mu^k)' C^k^-1 (mu^k * s) - w_i^k) / (r_i m), 0)

where ``*`` is the elementwise product and s the unit target spectrum.
Re-estimating the background after removing the previous detection keeps
the statistics target-free; the reweighted-L1 term w pushes small, likely
false-positive detections to zero.

The accelerated variant runs the full iteration only on a small uniformly
spaced pixel sample to obtain (mu, t = C^-1(mu*s), m), then filters the
whole tile in one pass, repeating only the cheap sparsity update. Scores
are returned in raw filter units (no unit conversion is applied).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .background import KIND_CENTERED, KIND_RAW, estimate
from .background import _solve_spd
from .cube_io import EnhancementMap, HyperCube, TargetSpectrum, check_alignment
from .errors import NumericalError, ValidationError

__all__ = [
    "Mag1cConfig",
    "Mag1cParams",
    "AlbedoWeights",
    "albedo_weights",
    "sample_uniform",
    "mag1c",
    "mag1c_sas",
    "compute_parameters",
    "lightweight_filter",
]

log = logging.getLogger(__name__)

MODE_TILE = "tile"
MODE_COLUMN = "column"

# Albedo weights are assumed positive; pathological non-positive weights
# are clamped here (with a warning) so denominators keep their sign.
ALBEDO_FLOOR = 1e-6


@dataclass(frozen=True)
class Mag1cConfig:
    """Iteration count, sparsity stabilizer, sample fraction, and scope."""

    n_iter: int = 30
    epsilon: float = 1e-6
    fraction: float = 0.01
    mode: str = MODE_COLUMN

    def __post_init__(self) -> None:
        if self.n_iter < 1:
            raise ValidationError(f"n_iter must be >= 1, got {self.n_iter}")
        if not self.epsilon > 0.0:
            raise ValidationError(f"epsilon must be > 0, got {self.epsilon}")
        if not 0.0 < self.fraction <= 1.0:
            raise ValidationError(f"fraction must be in (0, 1], got {self.fraction}")
        if self.mode not in (MODE_TILE, MODE_COLUMN):
            raise ValidationError(f"mode must be 'tile' or 'column', got {self.mode!r}")


@dataclass(frozen=True)
class Mag1cParams:
    """Stage-1 output handed to the lightweight filter: (mu, t, m).

    ``t_vec`` is C^-1(mu*s) for the final-iteration statistics and ``m`` the
    (unclamped) quadratic form (mu*s)'t.
    """

    mu: np.ndarray
    t_vec: np.ndarray
    m: float

    def __post_init__(self) -> None:
        mu = np.asarray(self.mu, dtype=np.float64)
        t_vec = np.asarray(self.t_vec, dtype=np.float64)
        if mu.ndim != 1 or t_vec.shape != mu.shape:
            raise ValidationError("mu and t_vec must be equal-length vectors")
        if not (np.isfinite(mu).all() and np.isfinite(t_vec).all() and np.isfinite(self.m)):
            raise ValidationError("filter parameters must be finite")
        if self.m < -1e-9:
            raise ValidationError(f"m must be a nonnegative quadratic form, got {self.m}")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "t_vec", t_vec)


@dataclass(frozen=True)
class AlbedoWeights:
    """Per-pixel albedo correction r_i = x_i'mu / mu'mu (1 for x_i = mu)."""

    r: np.ndarray

    def __post_init__(self) -> None:
        r = np.asarray(self.r, dtype=np.float64)
        if r.ndim != 1:
            raise ValidationError("albedo weights must be a 1-D array")
        if not np.isfinite(r).all():
            raise ValidationError("albedo weights must be finite")
        object.__setattr__(self, "r", r)


def albedo_weights(pixels: np.ndarray, mu: np.ndarray) -> AlbedoWeights:
    """Albedo weights of ``pixels`` against the band means ``mu``.

    einsum keeps the numerator and denominator reductions in the same
    summation order, so a pixel equal to mu gets exactly 1.0.
    """
    x = np.asarray(pixels, dtype=np.float64)
    mu = np.asarray(mu, dtype=np.float64)
    denom = float(np.einsum("p,p->", mu, mu))
    if not denom > 0.0:
        raise ValidationError("albedo weights need nonzero band means")
    return AlbedoWeights(r=np.einsum("np,p->n", x, mu) / denom)


def _effective_albedo(r: np.ndarray, context: str) -> np.ndarray:
    bad = r <= 0.0
    if bad.any():
        log.warning(
            "%d pixels with non-positive albedo clamped to %g (%s)",
            int(bad.sum()), ALBEDO_FLOOR, context,
        )
        r = r.copy()
        r[bad] = ALBEDO_FLOOR
    return r


def _check_finite(alpha: np.ndarray, iteration: int, context: str) -> None:
    if not np.isfinite(alpha).all():
        raise NumericalError(f"non-finite filter values at iteration {iteration} ({context})")


def _run_scope(
    pixels: np.ndarray,
    s: np.ndarray,
    n_iter: int,
    epsilon: float,
    context: str,
    mean_trace: list[float] | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """One full iterative filter over a pixel scope.

    Returns (alpha, mu, t, m) for the final iteration, with t = C^-1(mu*s)
    and m = (mu*s)'t before the >=1 clamp.
    """
    x = np.asarray(pixels, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValidationError(f"need at least 2 pixels per scope ({context})")

    stats = estimate(x, KIND_CENTERED, ddof=0)
    mu = stats.mean
    r = _effective_albedo(albedo_weights(x, mu).r, context)

    target = mu * s
    q = _solve_spd(stats.matrix, target, f"{context} iteration 0")
    denom = float(target @ q)
    alpha = (x @ q - float(mu @ q)) / (r * denom)
    _check_finite(alpha, 0, context)

    x_mean = mu  # mean of the raw pixels, reused by every mean update
    m_raw = denom
    for k in range(1, n_iter + 1):
        w = 1.0 / (r * (alpha + epsilon))
        coef = r * alpha
        mu = x_mean - float(coef.mean()) * target  # target still holds mu^{k-1} * s
        target = mu * s
        residual = x - coef[:, None] * target[None, :] - mu[None, :]
        cov = estimate(residual, KIND_RAW, ddof=0)
        q = _solve_spd(cov.matrix, target, f"{context} iteration {k}")
        m_raw = float(target @ q)
        m = max(m_raw, 1.0)
        alpha = np.maximum((x @ q - float(mu @ q) - w) / (r * m), 0.0)
        _check_finite(alpha, k, context)
        if mean_trace is not None:
            mean_trace.append(float(alpha.mean()))
    return alpha, mu, q, m_raw


def mag1c(cube: HyperCube, spectrum: TargetSpectrum, config: Mag1cConfig = Mag1cConfig()) -> EnhancementMap:
    """The full iterative filter, column-wise or over the whole tile."""
    check_alignment(cube, spectrum)
    s = spectrum.values
    if config.mode == MODE_TILE:
        alpha, _, _, _ = _run_scope(cube.pixels(), s, config.n_iter, config.epsilon, "mag1c tile")
        values = alpha.reshape(cube.height, cube.width)
    else:
        if cube.height < 2:
            raise ValidationError("column mode needs at least 2 pixels per column")
        values = np.empty((cube.height, cube.width))
        for j in range(cube.width):
            alpha, _, _, _ = _run_scope(
                cube.data[:, j, :], s, config.n_iter, config.epsilon, f"mag1c column {j}"
            )
            values[:, j] = alpha
    return EnhancementMap(values=values, product_tag="mag1c")


def sample_uniform(cube: HyperCube, fraction: float) -> np.ndarray:
    """Uniformly spaced pixel sample over the flattened tile.

    Picks k = max(2, floor(H*W*fraction)) pixels at flat indices
    floor(j*H*W/k); deterministic, no randomness involved.
    """
    if not 0.0 < fraction <= 1.0:
        raise ValidationError(f"fraction must be in (0, 1], got {fraction}")
    total = cube.height * cube.width
    k = max(2, int(total * fraction))
    indices = (np.arange(k, dtype=np.int64) * total) // k
    return cube.pixels()[indices]


def compute_parameters(
    pixels: np.ndarray,
    s: np.ndarray,
    n_iter: int,
    epsilon: float,
    context: str = "mag1c-sas stage 1",
) -> Mag1cParams:
    """Stage 1: full iterative estimation on a pixel sample."""
    if np.asarray(pixels).shape[0] < 2:
        raise ValidationError("parameter estimation needs a sample of at least 2 pixels")
    _, mu, t_vec, m = _run_scope(pixels, s, n_iter, epsilon, context)
    return Mag1cParams(mu=mu, t_vec=t_vec, m=m)


def lightweight_filter(
    pixels: np.ndarray,
    params: Mag1cParams,
    n_iter: int,
    epsilon: float,
    context: str = "mag1c-sas stage 2",
) -> np.ndarray:
    """Stage 2: one filter pass plus ``n_iter`` sparsity-only updates.

    With ``n_iter=0`` this returns the plain albedo-normalized filter score
    (x - mu)'t / (r m); each sparsity update only subtracts w/(r m) from
    that score and clamps at zero.
    """
    if n_iter < 0:
        raise ValidationError("n_iter must be >= 0")
    x = np.asarray(pixels, dtype=np.float64)
    r = _effective_albedo(albedo_weights(x, params.mu).r, context)
    m = max(params.m, 1.0)
    rm = r * m
    alpha0 = (x @ params.t_vec - float(params.mu @ params.t_vec)) / rm
    _check_finite(alpha0, 0, context)
    alpha = alpha0
    for k in range(1, n_iter + 1):
        w = 1.0 / (r * (alpha + epsilon))
        alpha = np.maximum(alpha0 - w / rm, 0.0)
        _check_finite(alpha, k, context)
    return alpha


def mag1c_sas(
    cube: HyperCube, spectrum: TargetSpectrum, config: Mag1cConfig = Mag1cConfig(mode=MODE_TILE)
) -> EnhancementMap:
    """Two-stage accelerated filter over the whole tile."""
    check_alignment(cube, spectrum)
    if config.mode != MODE_TILE:
        raise ValidationError("mag1c-sas runs tile-wise only")
    if cube.height * cube.width < 2:
        raise ValidationError("mag1c-sas needs at least 2 pixels")
    sample = sample_uniform(cube, config.fraction)
    params = compute_parameters(sample, spectrum.values, config.n_iter, config.epsilon)
    alpha = lightweight_filter(cube.pixels(), params, config.n_iter, config.epsilon)
    return EnhancementMap(
        values=alpha.reshape(cube.height, cube.width), product_tag="mag1c-sas"
    )
