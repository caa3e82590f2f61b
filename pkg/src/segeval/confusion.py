"""Single-ground-truth measures over pixel confusion counts.

A pixel is classified by crossing the manual (actual) class with the
automatic (detected) class: lesion/lesion -> TP, lesion/background -> FN,
background/lesion -> FP, background/background -> TN. Counts are exact
integers; every measure below divides exact integers in double precision,
so no accumulation error enters the percentages.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    EmptyAutomaticBorder,
    EmptyBackground,
    EmptyImage,
    EmptyManualBorder,
)
from .mask import BinaryMask, require_dims_match


@dataclass(frozen=True)
class ConfusionCounts:
    """Pixel counts of the four agreement classes between two binary masks."""

    tp: int
    fn: int
    fp: int
    tn: int

    def __post_init__(self):
        if min(self.tp, self.fn, self.fp, self.tn) < 0:
            raise ValueError(f"confusion counts must be nonnegative: {self}")

    @property
    def total(self) -> int:
        return self.tp + self.fn + self.fp + self.tn

    @property
    def manual_lesion(self) -> int:
        return self.tp + self.fn

    @property
    def automatic_lesion(self) -> int:
        return self.tp + self.fp


def confusion(manual: BinaryMask, automatic: BinaryMask) -> ConfusionCounts:
    """Count TP/FN/FP/TN pixels, manual class first, automatic second."""
    require_dims_match(manual, automatic)
    m = manual.pixels
    a = automatic.pixels
    tp = int(np.count_nonzero(m & a))
    fn = int(np.count_nonzero(m & ~a))
    fp = int(np.count_nonzero(~m & a))
    return ConfusionCounts(tp=tp, fn=fn, fp=fp, tn=m.size - tp - fn - fp)


def xor_error(c: ConfusionCounts) -> float:
    """Percentage symmetric-difference area over the manual border area.

    (FP + FN) / (TP + FN) * 100. Can exceed 100 when the disagreement region
    is larger than the manual border itself; callers must not clamp it.
    Because the manual area sits in the denominator, the same absolute
    disagreement is penalized less on large lesions than on small ones.
    """
    if c.manual_lesion == 0:
        raise EmptyManualBorder("manual mask has no lesion pixels; XOR error undefined")
    return (c.fp + c.fn) / c.manual_lesion * 100.0


def sensitivity(c: ConfusionCounts) -> float:
    """Percentage of manual lesion pixels also detected: TP / (TP + FN) * 100."""
    if c.manual_lesion == 0:
        raise EmptyManualBorder("manual mask has no lesion pixels; sensitivity undefined")
    return c.tp / c.manual_lesion * 100.0


def specificity(c: ConfusionCounts) -> float:
    """Percentage of manual background pixels kept as background: TN / (FP + TN) * 100."""
    if c.fp + c.tn == 0:
        raise EmptyBackground("manual mask fills the image; specificity undefined")
    return c.tn / (c.fp + c.tn) * 100.0


def precision(c: ConfusionCounts) -> float:
    """Percentage of detected lesion pixels that are correct: TP / (TP + FP) * 100."""
    if c.automatic_lesion == 0:
        raise EmptyAutomaticBorder("automatic mask has no lesion pixels; precision undefined")
    return c.tp / c.automatic_lesion * 100.0


def recall(c: ConfusionCounts) -> float:
    """Identical to sensitivity by definition."""
    return sensitivity(c)


def error_probability(c: ConfusionCounts) -> float:
    """Percentage of all pixels classified wrongly: (FP + FN) / total * 100.

    Ignores the class balance: a detection twice the size of a small lesion
    still scores a few percent when the image is dominated by background.
    """
    if c.total == 0:
        raise EmptyImage("confusion counts cover zero pixels")
    return (c.fp + c.fn) / c.total * 100.0
