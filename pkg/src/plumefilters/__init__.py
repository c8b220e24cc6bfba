"""plumefilters: fast hyperspectral target-detection products for methane.

A numpy/scipy library plus CLI implementing the classical matched filter,
CEM, and ACE detectors, the iterative albedo-corrected reweighted-L1
filter (column-wise and tile-wise) and its two-stage accelerated variant,
band-selection strategies, a morphological post-processing baseline,
segmentation metrics, a synthetic-scene generator with known ground truth,
and a median-of-runs benchmark harness.
"""

__version__ = "0.1.0"

from .band_selection import BandSelection, WavelengthRange, select_bands, subset
from .bench import BenchReport, benchmark_product, compute_product
from .cube_io import (
    EnhancementMap,
    HyperCube,
    PlumeMask,
    TargetSpectrum,
    check_alignment,
    load_spectrum,
    read_cube,
    read_map,
    read_mask,
    save_spectrum,
    write_cube,
    write_map,
    write_mask,
    write_pgm,
)
from .background import BackgroundStats, estimate, spd_solve
from .detectors import ace, cem, matched_filter
from .errors import (
    DegenerateTargetError,
    FormatError,
    NumericalError,
    ParseError,
    PlumeFiltersError,
    SingularBackgroundError,
    SizeMismatchError,
    UndefinedMetricError,
    ValidationError,
)
from .mag1c import (
    AlbedoWeights,
    Mag1cConfig,
    Mag1cParams,
    albedo_weights,
    compute_parameters,
    lightweight_filter,
    mag1c,
    mag1c_sas,
    sample_uniform,
)
from .metrics import (
    ConfusionCounts,
    PrCurve,
    auprc,
    confusion_counts,
    pr_curve,
    segmentation_metrics,
    stratify,
)
from .morphology import MorphConfig, binary_dilate, binary_erode, morphological_baseline, threshold_map
from .scenes import (
    PlumeSpec,
    SceneConfig,
    generate_scene,
    strong_plume_config,
    strong_plume_suite,
    target_spectrum,
)

__all__ = [name for name in dir() if not name.startswith("_")]
