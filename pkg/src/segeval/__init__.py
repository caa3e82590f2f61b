"""Multi-rater evaluation toolkit for binary lesion segmentation masks.

Scores automatic borders against one or many manual borders: confusion-count
measures (XOR error, sensitivity/specificity, precision/recall, error
probability), the probabilistic border measure, and the probabilistic /
normalized probabilistic rand index with a linear-time signature engine.
Includes closed B-spline border rendering, PGM/PNG mask IO, a JSON corpus
manifest, and mean/stddev report tables grouped by rater and diagnosis.
"""

from .confusion import (
    ConfusionCounts,
    confusion,
    error_probability,
    precision,
    recall,
    sensitivity,
    specificity,
    xor_error,
)
from .dataset import (
    DatasetManifest,
    ImageEntry,
    dimension_groups,
    load_ground_truths,
    load_manifest,
    load_mask_or_annotation,
    load_method_mask,
    save_manifest,
    validate_dataset,
)
from .errors import (
    DegenerateCurve,
    DegenerateNormalization,
    DimensionMismatch,
    EmptyAutomaticBorder,
    EmptyBackground,
    EmptyDataset,
    EmptyImage,
    EmptyInput,
    EmptyManualBorder,
    EmptyObservationList,
    LayoutMismatch,
    ManifestError,
    ManifestParseError,
    ManifestValidationError,
    SegevalError,
    TooFewControlPoints,
    TooFewPixels,
)
from .mask import (
    BinaryMask,
    GroundTruthSet,
    LabelMap,
    complement,
    dims_match,
    to_label_map,
)
from .mask_io import load_mask, load_pgm, load_png, save_pgm
from .probability import (
    ProbabilityImage,
    build_probability_image,
    guillod_error,
    save_probability_pgm,
)
from .randindex import (
    DatasetPairModel,
    PriResult,
    SignatureHistogram,
    expected_pri,
    normalize_index,
    npri,
    pair_probability,
    pri_fast,
    pri_oracle,
    signature_histogram,
)
from .report import (
    GroupStat,
    MeasureRecord,
    MEASURES,
    PER_RATER_MEASURES,
    POOLED_MEASURES,
    aggregate,
    best_per_row,
    emit_table,
)
from .spline import (
    BorderAnnotation,
    fill_closed_curve,
    interpolating_control_points,
    load_annotation,
    render_border,
    save_annotation,
    spline_points,
    spline_segment_point,
)

__version__ = "0.1.0"
