"""Exception hierarchy shared by all plumefilters modules."""


class PlumeFiltersError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(PlumeFiltersError, ValueError):
    """An input violates a documented precondition or invariant."""


class FormatError(PlumeFiltersError, ValueError):
    """A container or sidecar file is missing, malformed, or mislabelled."""


class SizeMismatchError(FormatError):
    """Header-declared payload size disagrees with the bytes on disk."""


class ParseError(FormatError):
    """A text input (CSV spectrum) could not be parsed."""


class DegenerateTargetError(PlumeFiltersError):
    """The target spectrum collapses onto the background mean."""


class SingularBackgroundError(PlumeFiltersError):
    """Background covariance stayed non-positive-definite at every jitter level."""


class NumericalError(PlumeFiltersError):
    """A non-finite intermediate appeared during an iterative computation."""


class UndefinedMetricError(PlumeFiltersError):
    """A metric is undefined for the given ground truth (e.g. no positives)."""
