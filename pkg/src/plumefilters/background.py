"""Background statistics (band means, covariance/correlation) and SPD solves.

Every detector funnels its ``C^-1 v`` / ``K^-1 v`` products through
:func:`spd_solve`, which factorizes with Cholesky and never forms an
explicit inverse. Accumulation is float64 even though cube payloads are
float32, so covariance of 512x512 tiles stays stable.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import SingularBackgroundError, ValidationError

__all__ = ["BackgroundStats", "KIND_CENTERED", "KIND_RAW", "estimate", "spd_solve"]

log = logging.getLogger(__name__)

KIND_CENTERED = "centered-covariance"
KIND_RAW = "raw-correlation"

# Jitter ladder for barely-singular scopes: lambda = f * trace/p with f
# escalating x10 from 1e-10 to 1e-2.
_JITTER_FRACTIONS = tuple(10.0**e for e in range(-10, -1))


@dataclass(frozen=True)
class BackgroundStats:
    """Band means plus a symmetric second-moment matrix.

    ``kind`` records whether ``matrix`` is the covariance of mean-centered
    pixels or the raw (non-centered) correlation; ``ddof`` records the
    divisor convention (N - ddof).
    """

    mean: np.ndarray
    matrix: np.ndarray
    kind: str
    ddof: int
    sample_count: int

    def __post_init__(self) -> None:
        mean = np.asarray(self.mean, dtype=np.float64)
        matrix = np.asarray(self.matrix, dtype=np.float64)
        if mean.ndim != 1 or matrix.shape != (mean.size, mean.size):
            raise ValidationError("stats matrix must be p x p with a length-p mean")
        if self.kind not in (KIND_CENTERED, KIND_RAW):
            raise ValidationError(f"unknown stats kind {self.kind!r}")
        if self.ddof not in (0, 1):
            raise ValidationError("ddof must be 0 (divisor N) or 1 (divisor N-1)")
        if self.ddof == 1 and self.sample_count < 2:
            raise ValidationError("divisor N-1 needs at least 2 samples")
        scale = float(np.abs(matrix).max()) if matrix.size else 0.0
        if not np.allclose(matrix, matrix.T, rtol=0.0, atol=1e-10 * max(scale, 1e-300)):
            raise ValidationError("stats matrix must be symmetric to 1e-10 relative")
        if np.any(np.diag(matrix) < -1e-12 * max(scale, 1.0)):
            raise ValidationError("stats matrix has a negative diagonal entry")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "matrix", matrix)

    @property
    def bands(self) -> int:
        return self.mean.size


def estimate(pixels: np.ndarray, kind: str = KIND_CENTERED, ddof: int = 1) -> BackgroundStats:
    """Estimate band means and the covariance/correlation of ``pixels``.

    ``pixels`` is an (N, p) array of pixel spectra, N >= 2. Exact symmetry
    of the result is enforced by averaging the matrix with its transpose.
    """
    x = np.asarray(pixels, dtype=np.float64)
    if x.ndim != 2:
        raise ValidationError("pixels must be a 2-D (N, p) array")
    n = x.shape[0]
    if n < 2:
        raise ValidationError(f"need at least 2 pixels to estimate statistics, got {n}")
    if kind not in (KIND_CENTERED, KIND_RAW):
        raise ValidationError(f"unknown stats kind {kind!r}")
    if ddof not in (0, 1):
        raise ValidationError("ddof must be 0 or 1")
    if not np.isfinite(x).all():
        raise ValidationError("pixels must be finite")
    mean = x.mean(axis=0)
    centered = x - mean if kind == KIND_CENTERED else x
    matrix = centered.T @ centered / (n - ddof)
    matrix = (matrix + matrix.T) / 2.0
    return BackgroundStats(mean=mean, matrix=matrix, kind=kind, ddof=ddof, sample_count=n)


def _solve_spd(matrix: np.ndarray, rhs: np.ndarray, context: str = "") -> np.ndarray:
    """Solve ``matrix @ x = rhs`` for a symmetric PSD matrix via Cholesky.

    On factorization failure, retries with escalating diagonal jitter
    lambda * I, lambda = f * trace/p for f in 1e-10 .. 1e-2; every applied
    jitter is logged. Raises SingularBackgroundError when the whole ladder
    fails.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    rhs = np.asarray(rhs, dtype=np.float64)
    where = f" ({context})" if context else ""
    try:
        factor = cho_factor(matrix, lower=True, check_finite=False)
        return cho_solve(factor, rhs, check_finite=False)
    except np.linalg.LinAlgError:
        pass
    scale = float(np.trace(matrix)) / matrix.shape[0]
    for fraction in _JITTER_FRACTIONS:
        lam = fraction * scale
        if lam <= 0.0:
            continue
        try:
            factor = cho_factor(
                matrix + lam * np.eye(matrix.shape[0]), lower=True, check_finite=False
            )
        except np.linalg.LinAlgError:
            continue
        log.warning("covariance required jitter lambda=%.3e%s", lam, where)
        return cho_solve(factor, rhs, check_finite=False)
    raise SingularBackgroundError(
        f"background matrix is singular at every jitter level{where}"
    )


def spd_solve(stats: BackgroundStats, rhs: np.ndarray, context: str = "") -> np.ndarray:
    """Solve ``stats.matrix @ x = rhs``; ``rhs`` may be a vector or a matrix."""
    return _solve_spd(stats.matrix, rhs, context)
