"""Product registry and the median-of-runs benchmark harness.

Timing follows a fixed protocol: one untimed warm-up run (which also
records a peak-memory estimate via tracemalloc), then N timed runs of the
full product computation with file I/O excluded, reported as the median.
Benchmark runs are strictly sequential.
"""

from __future__ import annotations

import statistics
import time
import tracemalloc
from dataclasses import dataclass

from .cube_io import EnhancementMap, HyperCube, TargetSpectrum
from .detectors import ace, cem, matched_filter
from .errors import ValidationError
from .mag1c import Mag1cConfig, mag1c, mag1c_sas

__all__ = ["PRODUCTS", "DEFAULT_MODES", "compute_product", "BenchReport", "benchmark_product"]

PRODUCTS = ("mf", "cem", "ace", "mag1c", "mag1c-sas")

# Scope conventions when no --mode is given: classical detectors run
# tile-wise; the iterative filter defaults to its original column-wise
# form; the accelerated variant is tile-only.
DEFAULT_MODES = {
    "mf": "tile",
    "cem": "tile",
    "ace": "tile",
    "mag1c": "column",
    "mag1c-sas": "tile",
}


def compute_product(
    product: str,
    cube: HyperCube,
    spectrum: TargetSpectrum,
    *,
    mode: str | None = None,
    n_iter: int = 30,
    epsilon: float = 1e-6,
    fraction: float = 0.01,
) -> EnhancementMap:
    """Compute one enhancement product by name."""
    if product not in PRODUCTS:
        raise ValidationError(f"unknown product {product!r}; expected one of {PRODUCTS}")
    mode = mode or DEFAULT_MODES[product]
    if product == "mf":
        return matched_filter(cube, spectrum, mode)
    if product == "cem":
        return cem(cube, spectrum, mode)
    if product == "ace":
        return ace(cube, spectrum, mode)
    config = Mag1cConfig(n_iter=n_iter, epsilon=epsilon, fraction=fraction, mode=mode)
    if product == "mag1c":
        return mag1c(cube, spectrum, config)
    return mag1c_sas(cube, spectrum, config)


@dataclass(frozen=True)
class BenchReport:
    """Per-run wall times plus their median and a peak-memory estimate."""

    product: str
    height: int
    width: int
    bands: int
    config: dict
    run_seconds: tuple[float, ...]
    median_seconds: float
    peak_bytes: int

    def __post_init__(self) -> None:
        if len(self.run_seconds) < 1:
            raise ValidationError("a benchmark needs at least 1 timed run")
        true_median = statistics.median(self.run_seconds)
        if self.median_seconds != true_median:
            raise ValidationError("median_seconds is not the median of run_seconds")

    def to_dict(self) -> dict:
        return {
            "product": self.product,
            "shape": {"height": self.height, "width": self.width, "bands": self.bands},
            "config": self.config,
            "run_seconds": list(self.run_seconds),
            "median_seconds": self.median_seconds,
            "peak_bytes": self.peak_bytes,
        }


def benchmark_product(
    product: str,
    cube: HyperCube,
    spectrum: TargetSpectrum,
    *,
    runs: int = 5,
    mode: str | None = None,
    n_iter: int = 30,
    epsilon: float = 1e-6,
    fraction: float = 0.01,
) -> BenchReport:
    """Warm up once (memory-traced, untimed), then time ``runs`` computations."""
    if runs < 1:
        raise ValidationError(f"need at least 1 timed run, got {runs}")

    def run() -> EnhancementMap:
        return compute_product(
            product, cube, spectrum, mode=mode, n_iter=n_iter, epsilon=epsilon, fraction=fraction
        )

    tracemalloc.start()
    try:
        run()
        _, peak_bytes = tracemalloc.get_traced_memory()
    finally:
        tracemalloc.stop()

    seconds = []
    for _ in range(runs):
        start = time.perf_counter()
        run()
        seconds.append(time.perf_counter() - start)

    resolved_mode = mode or DEFAULT_MODES[product]
    config: dict = {"mode": resolved_mode, "runs": runs, "warmup_runs": 1}
    if product in ("mag1c", "mag1c-sas"):
        config["n_iter"] = n_iter
        config["epsilon"] = epsilon
    if product == "mag1c-sas":
        config["fraction"] = fraction
    return BenchReport(
        product=product,
        height=cube.height,
        width=cube.width,
        bands=cube.bands,
        config=config,
        run_seconds=tuple(seconds),
        median_seconds=statistics.median(seconds),
        peak_bytes=int(peak_bytes),
    )
