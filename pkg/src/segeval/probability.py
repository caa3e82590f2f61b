"""Probabilistic border model built from repeated observations of one lesion.

Each pixel gets a misclassification probability p = 1 - n/N, where n counts
the observations marking it lesion and N is the observation count. An
automatic border is scored by the mean p over the pixels it includes.
The known weakness: a border that hides inside the region all observers
agree on scores 0 no matter how much agreed lesion it misses.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, EmptyAutomaticBorder, EmptyObservationList
from .mask import BinaryMask, require_dims_match
from .mask_io import pgm_bytes


@dataclass(frozen=True, eq=False)
class ProbabilityImage:
    """Per-pixel misclassification probabilities from N observation masks.

    ``p`` is a read-only float array of shape (height, width); every value is
    exactly 1 - n/N for an integer selection count n in [0, N].
    """

    p: np.ndarray
    n_observations: int

    def __post_init__(self):
        arr = np.array(self.p, dtype=np.float64, order="C")
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("probability image must be a 2-D raster")
        if self.n_observations < 1:
            raise ValueError("at least one observation required")
        if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
            raise ValueError("probabilities must lie in [0, 1]")
        arr.flags.writeable = False
        object.__setattr__(self, "p", arr)

    @property
    def width(self) -> int:
        return self.p.shape[1]

    @property
    def height(self) -> int:
        return self.p.shape[0]


def build_probability_image(observations: Sequence[BinaryMask]) -> ProbabilityImage:
    """Count lesion votes per pixel and convert to p = 1 - n/N."""
    observations = list(observations)
    if not observations:
        raise EmptyObservationList("cannot build a probability image from zero masks")
    first = observations[0]
    counts = np.zeros((first.height, first.width), dtype=np.int64)
    for obs in observations:
        require_dims_match(first, obs, "observation masks")
        counts += obs.pixels
    n = len(observations)
    return ProbabilityImage(p=1.0 - counts / n, n_observations=n)


def guillod_error(prob: ProbabilityImage, automatic: BinaryMask) -> float:
    """Mean misclassification probability over the automatic border, as a percentage."""
    if prob.width != automatic.width or prob.height != automatic.height:
        raise DimensionMismatch(
            f"probability image is {prob.width}x{prob.height}, "
            f"mask is {automatic.width}x{automatic.height}"
        )
    inside = automatic.pixels
    included = int(np.count_nonzero(inside))
    if included == 0:
        raise EmptyAutomaticBorder("automatic mask has no lesion pixels; mean probability undefined")
    return float(prob.p[inside].sum() / included * 100.0)


def save_probability_pgm(prob: ProbabilityImage, path) -> None:
    """Export p scaled to 0..255 (rounding half up) for visual inspection."""
    gray = np.floor(prob.p * 255.0 + 0.5).astype(np.uint8)
    Path(path).write_bytes(pgm_bytes(gray))
