"""Raster mask types shared by every measure.

Pixels are stored row-major: the pixel at column ``x``, row ``y`` sits at
flat index ``y * width + x``. Arrays are copied on construction and frozen,
so every type here is immutable and safe to share across threads. Equality
and hashing are defined over logical pixel values, not storage.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import DimensionMismatch

MAX_LABEL = 254


def _frozen_2d(data, dtype) -> np.ndarray:
    arr = np.array(data, dtype=dtype, order="C")
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D raster, got {arr.ndim} dimension(s)")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"raster dimensions must be >= 1, got {arr.shape[1]}x{arr.shape[0]}")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class BinaryMask:
    """Rectangular grid of lesion (True) / background (False) pixels.

    ``pixels`` is a read-only bool array of shape ``(height, width)``.
    """

    pixels: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "pixels", _frozen_2d(self.pixels, bool))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def lesion_count(self) -> int:
        return int(self.pixels.sum())

    @property
    def background_count(self) -> int:
        return self.pixels.size - self.lesion_count

    def __eq__(self, other) -> bool:
        if not isinstance(other, BinaryMask):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(
            np.array_equal(self.pixels, other.pixels)
        )

    def __hash__(self) -> int:
        return hash((self.width, self.height, np.packbits(self.pixels).tobytes()))

    def __repr__(self) -> str:
        return f"BinaryMask({self.width}x{self.height}, lesion={self.lesion_count})"


@dataclass(frozen=True, eq=False)
class LabelMap:
    """Rectangular grid of small nonnegative integer labels.

    Labels must fit in ``[0, MAX_LABEL]``; ``labels`` is a read-only uint8
    array of shape ``(height, width)``.
    """

    labels: np.ndarray

    def __post_init__(self):
        raw = np.asarray(self.labels)
        if not np.issubdtype(raw.dtype, np.integer) and not np.issubdtype(raw.dtype, np.bool_):
            raise ValueError(f"labels must be integers, got dtype {raw.dtype}")
        if raw.size and (raw.min() < 0 or raw.max() > MAX_LABEL):
            raise ValueError(f"labels must lie in [0, {MAX_LABEL}]")
        object.__setattr__(self, "labels", _frozen_2d(raw, np.uint8))

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def label_count(self) -> int:
        """Number of distinct labels present."""
        return int(np.unique(self.labels).size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LabelMap):
            return NotImplemented
        return self.labels.shape == other.labels.shape and bool(
            np.array_equal(self.labels, other.labels)
        )

    def __hash__(self) -> int:
        return hash((self.width, self.height, self.labels.tobytes()))

    def __repr__(self) -> str:
        return f"LabelMap({self.width}x{self.height}, labels={self.label_count})"


Mask = Union[BinaryMask, LabelMap]


def dims_match(a: Mask, b: Mask) -> bool:
    """True iff both rasters have equal width and height."""
    return a.width == b.width and a.height == b.height


def require_dims_match(a: Mask, b: Mask, what: str = "masks") -> None:
    if not dims_match(a, b):
        raise DimensionMismatch(
            f"{what} differ in size: {a.width}x{a.height} vs {b.width}x{b.height}"
        )


def to_label_map(m: BinaryMask) -> LabelMap:
    """Binary mask as a two-label map: lesion pixels get label 1, background 0."""
    return LabelMap(m.pixels.astype(np.uint8))


def complement(m: BinaryMask) -> BinaryMask:
    """Flip every pixel's class. An involution: complement(complement(m)) == m."""
    return BinaryMask(~m.pixels)


@dataclass(frozen=True, eq=False)
class GroundTruthSet:
    """K manual segmentations of one image, tagged by rater identity.

    Members may be binary masks or label maps; all must share dimensions and
    rater ids must be unique. The member order is significant (it is the
    order reports and pair probabilities are computed in).
    """

    masks: tuple
    rater_ids: tuple

    def __post_init__(self):
        masks = tuple(self.masks)
        rater_ids = tuple(str(r) for r in self.rater_ids)
        if len(masks) < 1:
            raise ValueError("a ground-truth set needs at least one mask")
        if len(masks) != len(rater_ids):
            raise ValueError(
                f"{len(masks)} masks but {len(rater_ids)} rater ids"
            )
        if len(set(rater_ids)) != len(rater_ids):
            raise ValueError(f"rater ids are not unique: {rater_ids}")
        for m in masks[1:]:
            require_dims_match(masks[0], m, "ground-truth masks")
        object.__setattr__(self, "masks", masks)
        object.__setattr__(self, "rater_ids", rater_ids)

    @classmethod
    def from_masks(cls, masks: Iterable[Mask], rater_ids: Sequence[str] | None = None):
        """Build a set, generating rater ids r0, r1, ... when none are given."""
        masks = tuple(masks)
        if rater_ids is None:
            rater_ids = tuple(f"r{i}" for i in range(len(masks)))
        return cls(masks, tuple(rater_ids))

    @property
    def k(self) -> int:
        return len(self.masks)

    @property
    def width(self) -> int:
        return self.masks[0].width

    @property
    def height(self) -> int:
        return self.masks[0].height
