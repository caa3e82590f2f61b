"""Exception types shared across the toolkit.

Degenerate denominators and malformed inputs raise typed errors instead of
returning sentinel values, so a NaN can never leak into an aggregate.
"""


class SegevalError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(SegevalError):
    """Two rasters that must share dimensions do not."""


class EmptyManualBorder(SegevalError):
    """The manual mask holds no lesion pixels (TP + FN = 0)."""


class EmptyBackground(SegevalError):
    """The manual mask fills the whole image (FP + TN = 0)."""


class EmptyAutomaticBorder(SegevalError):
    """The automatic mask holds no lesion pixels (TP + FP = 0)."""


class EmptyImage(SegevalError):
    """A confusion table with zero total pixels."""


class EmptyObservationList(SegevalError):
    """A probability image needs at least one observation mask."""


class TooFewPixels(SegevalError):
    """Pairwise indices need at least two pixels."""


class EmptyDataset(SegevalError):
    """A dataset pair model needs at least one image."""


class DegenerateNormalization(SegevalError):
    """The expected index is (numerically) 1, so normalizing divides by zero."""


class TooFewControlPoints(SegevalError):
    """A closed quadratic spline needs at least three control points."""


class DegenerateCurve(SegevalError):
    """The closed curve encloses no pixel centers (strict fill only)."""


class ManifestError(SegevalError):
    """Base class for dataset manifest problems."""


class ManifestParseError(ManifestError):
    """The manifest is not valid JSON or lacks the required structure."""


class ManifestValidationError(ManifestError):
    """A manifest entry violates a structural invariant."""


class EmptyInput(SegevalError):
    """An aggregation was asked to summarize zero records."""


class LayoutMismatch(SegevalError):
    """Group statistics do not fit the requested table layout."""
