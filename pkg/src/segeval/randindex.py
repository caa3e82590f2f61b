"""Probabilistic Rand Index family over label maps.

The pairwise definition scores a test segmentation by how well it reproduces
the same-label / different-label relation of every pixel pair, weighted by
the empirical probability that the ground-truth raters put the pair in one
region. Summing over all C(N, 2) pairs is quadratic in the pixel count, so
the production path groups pixels by their label signature -- the tuple
(test label, gt_1 label, ..., gt_K label) -- and evaluates the pair term
once per pair of signature classes. Pixels with equal signatures are
interchangeable in every pairwise sum, which makes the two routes exactly
equal; ``pri_oracle`` keeps the literal pairwise evaluation around as an
independent check.

All pair counting happens in exact integer arithmetic (falling back to
Python's arbitrary precision beyond the int64-safe range); floating point
enters only in the final division.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateNormalization,
    DimensionMismatch,
    EmptyDataset,
    TooFewPixels,
)
from .mask import BinaryMask, GroundTruthSet, LabelMap, to_label_map

DEGENERATE_EXPECTED_EPS = 1e-12


def _comb2(n: int) -> int:
    return n * (n - 1) // 2


def _flat_labels(m) -> np.ndarray:
    lm = to_label_map(m) if isinstance(m, BinaryMask) else m
    return lm.labels.ravel()


def _gt_rows(gts: GroundTruthSet) -> np.ndarray:
    """(K, N) uint8 matrix of flat per-pixel labels, one row per ground truth."""
    return np.stack([_flat_labels(m) for m in gts.masks])


def _dedupe_columns(stack: np.ndarray):
    """Collapse identical columns of an (R, N) uint8 label stack.

    Returns (class_ids, signatures, counts): the per-pixel class id (N,),
    the distinct signatures as an (S, R) uint8 array in sorted order, and
    the per-class pixel counts (S,).
    """
    r, n = stack.shape
    if r <= 8:
        # Pack each column into one uint64; a 1-D unique is much faster
        # than the row-wise one. Labels are < 256 so the packing is exact.
        weights = 256 ** np.arange(r, dtype=np.uint64)
        encoded = (stack.astype(np.uint64).T * weights).sum(axis=1)
        uniq, inverse, counts = np.unique(encoded, return_inverse=True, return_counts=True)
        signatures = np.empty((uniq.size, r), dtype=np.uint8)
        rest = uniq.copy()
        for col in range(r):
            signatures[:, col] = rest & 0xFF
            rest >>= np.uint64(8)
        return inverse.reshape(-1), signatures, counts
    uniq, inverse, counts = np.unique(stack.T, axis=0, return_inverse=True, return_counts=True)
    return inverse.reshape(-1), uniq, counts


@dataclass(frozen=True)
class SignatureHistogram:
    """Pixel counts keyed by label signature (test label, gt_1, ..., gt_K)."""

    entries: dict

    def __post_init__(self):
        if not self.entries:
            raise ValueError("signature histogram cannot be empty")
        arities = {len(sig) for sig in self.entries}
        if len(arities) != 1:
            raise ValueError(f"inconsistent signature arities: {sorted(arities)}")

    @property
    def arity(self) -> int:
        return len(next(iter(self.entries)))

    @property
    def total(self) -> int:
        return sum(self.entries.values())


def signature_histogram(test: LabelMap, gts: GroundTruthSet) -> SignatureHistogram:
    """Histogram of per-pixel label signatures across the test map and all GTs."""
    _check_pair_inputs(test, gts)
    stack = np.concatenate([_flat_labels(test)[None, :], _gt_rows(gts)])
    _, signatures, counts = _dedupe_columns(stack)
    entries = {
        tuple(int(v) for v in sig): int(c) for sig, c in zip(signatures, counts)
    }
    return SignatureHistogram(entries)


def _check_pair_inputs(test: LabelMap, gts: GroundTruthSet) -> None:
    if test.width != gts.width or test.height != gts.height:
        raise DimensionMismatch(
            f"test map is {test.width}x{test.height}, "
            f"ground truths are {gts.width}x{gts.height}"
        )
    if test.width * test.height < 2:
        raise TooFewPixels("pairwise indices need at least two pixels")


def _pair_weight_total(counts: np.ndarray, weights: np.ndarray, diag_weight: int) -> int:
    """Exact sum of n_a*n_b*w[a,b] over unordered class pairs a < b, plus
    C(n_a, 2)*diag_weight per class.

    ``weights`` must be symmetric with w[a,a] == diag_weight, which collapses
    the triangle sum to (full ordered sum - diag_weight*N) / 2. int64 is used
    while N^2 * max weight stays below 2^62; otherwise the same expressions
    run on Python integers.
    """
    n_total = int(counts.sum())
    wmax = max(int(weights.max()) if weights.size else 0, 1)
    if n_total * n_total * wmax < 2**62:
        c = counts.astype(np.int64)
        full = int(np.einsum("a,b,ab->", c, c, weights.astype(np.int64)))
    else:
        c = counts.astype(object)
        full = int((np.outer(c, c) * weights.astype(object)).sum())
    return (full - diag_weight * n_total) // 2


def _agreement_matrix(signatures: np.ndarray) -> np.ndarray:
    """m[a, b] = number of components on which signatures a and b agree."""
    s, r = signatures.shape
    m = np.zeros((s, s), dtype=np.int64)
    for col in range(r):
        v = signatures[:, col]
        m += v[:, None] == v[None, :]
    return m


def pair_probability(gts: GroundTruthSet, i: int, j: int) -> float:
    """Empirical probability that raters give flat pixels i and j one label.

    Counts, over the K ground truths, how often the two pixels share a label;
    the result is always a multiple of 1/K.
    """
    n = gts.width * gts.height
    if not (0 <= i < n) or not (0 <= j < n):
        raise IndexError(f"pixel indices ({i}, {j}) out of range for {n} pixels")
    if i == j:
        raise ValueError("pair probability needs two distinct pixels")
    rows = _gt_rows(gts)
    return int(np.count_nonzero(rows[:, i] == rows[:, j])) / gts.k


def pri_oracle(test: LabelMap, gts: GroundTruthSet) -> float:
    """Literal pairwise evaluation of the probabilistic rand index.

    Materializes the full N x N agreement matrices, so it is quadratic in
    both time and memory -- intended as an independent check for images up
    to a few thousand pixels, not for production scoring.
    """
    _check_pair_inputs(test, gts)
    t = _flat_labels(test)
    n = t.size
    same_test = t[:, None] == t[None, :]
    p = np.zeros((n, n), dtype=np.float64)
    for row in _gt_rows(gts):
        p += row[:, None] == row[None, :]
    p /= gts.k
    contrib = np.where(same_test, p, 1.0 - p)
    # Diagonal terms are all exactly 1; the matrix is symmetric.
    return float((contrib.sum() - n) / 2.0 / _comb2(n))


def pri_fast(test: LabelMap, gts: GroundTruthSet) -> float:
    """Signature-class evaluation of the probabilistic rand index.

    Equal to ``pri_oracle`` up to float rounding (well within 1e-12), but
    linear in the pixel count: one signature histogram, then one pair term
    per pair of signature classes.
    """
    _check_pair_inputs(test, gts)
    stack = np.concatenate([_flat_labels(test)[None, :], _gt_rows(gts)])
    _, signatures, counts = _dedupe_columns(stack)
    k = gts.k
    n = int(counts.sum())

    same_test = signatures[:, 0][:, None] == signatures[:, 0][None, :]
    m = _agreement_matrix(signatures[:, 1:])
    # Pair weight in units of 1/K: m where the test agrees, K - m where not.
    # Within-class pairs land on the diagonal at full weight K.
    weights = np.where(same_test, m, k - m)
    numerator_k = _pair_weight_total(counts, weights, diag_weight=k)
    return numerator_k / (k * _comb2(n))


@dataclass(frozen=True, eq=False)
class _ImageSignatures:
    """One dataset image's ground truths, compressed to signature classes."""

    class_ids: np.ndarray  # (N,) per-pixel class index
    signatures: np.ndarray  # (S, K_phi) uint8
    counts: np.ndarray  # (S,)
    k: int


@dataclass(frozen=True, eq=False)
class DatasetPairModel:
    """Corpus-wide pixel-pair statistics backing the expected index.

    Holds, per image, the signature histogram of that image's own ground
    truths (with the per-pixel class assignment that keeps the histograms
    pixel-aligned across images). All images must share dimensions: the
    expected index averages pair probabilities across images pixel-by-pixel,
    which has no meaning for mixed sizes. Immutable after construction and
    safe to score many test masks concurrently.
    """

    width: int
    height: int
    images: tuple

    @classmethod
    def from_ground_truths(cls, ground_truth_sets: Sequence[GroundTruthSet]) -> "DatasetPairModel":
        sets = list(ground_truth_sets)
        if not sets:
            raise EmptyDataset("a dataset pair model needs at least one image")
        width, height = sets[0].width, sets[0].height
        images = []
        for gts in sets:
            if gts.width != width or gts.height != height:
                raise DimensionMismatch(
                    f"dataset mixes dimensions: {width}x{height} vs {gts.width}x{gts.height}"
                )
            ids, signatures, counts = _dedupe_columns(_gt_rows(gts))
            images.append(
                _ImageSignatures(class_ids=ids, signatures=signatures, counts=counts, k=gts.k)
            )
        return cls(width=width, height=height, images=tuple(images))

    @property
    def image_count(self) -> int:
        return len(self.images)


def expected_pri(
    test_dims: tuple[int, int], gts: GroundTruthSet, dataset: DatasetPairModel
) -> float:
    """Expected index of an arbitrary segmentation of this image.

    Replaces the test's 0/1 pair relation with its dataset-wide expectation:
    the average, over all dataset images, of the per-image empirical pair
    probability. The average is pushed inside the pair sum, so each dataset
    image contributes one signature-class term joint with the current image's
    ground truths; the contraction below evaluates that joint sum via small
    count-matrix products instead of enumerating joint classes pairwise.
    """
    width, height = test_dims
    if (width, height) != (dataset.width, dataset.height):
        raise DimensionMismatch(
            f"test image is {width}x{height}, dataset model is {dataset.width}x{dataset.height}"
        )
    if gts.width != width or gts.height != height:
        raise DimensionMismatch(
            f"ground truths are {gts.width}x{gts.height}, expected {width}x{height}"
        )
    n = width * height
    if n < 2:
        raise TooFewPixels("pairwise indices need at least two pixels")

    cur_ids, cur_signatures, _ = _dedupe_columns(_gt_rows(gts))
    s_cur = cur_signatures.shape[0]
    k = gts.k
    m_cur = _agreement_matrix(cur_signatures)
    pairs = _comb2(n)

    total = Fraction(0)
    for img in dataset.images:
        s_img = img.signatures.shape[0]
        joint = img.class_ids.astype(np.int64) * s_cur + cur_ids
        q = np.bincount(joint, minlength=s_img * s_cur).reshape(s_img, s_cur)
        m_img = _agreement_matrix(img.signatures)
        # Full ordered pair sum of n_a n_b [m_img*m_cur + (K_phi-m_img)(K-m_cur)],
        # factorized through the joint count matrix q. Joint classes agree with
        # themselves on everything, so the diagonal weight is K_phi*K exactly
        # and the unordered total collapses to (full - K_phi*K*N)/2.
        agree = _contract(q, m_img, m_cur)
        disagree = _contract(q, img.k - m_img, k - m_cur)
        numerator = (agree + disagree - img.k * k * n) // 2
        total += Fraction(numerator, img.k * k * pairs)
    return float(total / dataset.image_count)


def _contract(q: np.ndarray, left: np.ndarray, right: np.ndarray) -> int:
    """Exact Sum_{u,u',v,v'} q[u,v] q[u',v'] left[u,u'] right[v,v']."""
    n_total = int(q.sum())
    wmax = max(int(left.max()) * int(right.max()) if left.size and right.size else 0, 1)
    if n_total * n_total * wmax < 2**62:
        inner = q.astype(np.int64) @ right.astype(np.int64) @ q.astype(np.int64).T
        return int((left.astype(np.int64) * inner).sum())
    qo = q.astype(object)
    inner = np.dot(np.dot(qo, right.astype(object)), qo.T)
    return int((left.astype(object) * inner).sum())


@dataclass(frozen=True)
class PriResult:
    """Index, its dataset expectation, and the normalized index for one mask."""

    pri: float
    expected: float
    npri: float
    pair_count: int

    def __post_init__(self):
        if not -1e-12 <= self.pri <= 1.0 + 1e-12:
            raise ValueError(f"index out of range: {self.pri}")
        if self.npri > 1.0 + 1e-12:
            raise ValueError(f"normalized index above 1: {self.npri}")


def normalize_index(value: float, expected: float) -> float:
    """(index - expected) / (1 - expected); max index is 1 by construction."""
    if expected >= 1.0 - DEGENERATE_EXPECTED_EPS:
        raise DegenerateNormalization(
            f"expected index {expected} leaves no room above chance; "
            "normalized index undefined"
        )
    return (value - expected) / (1.0 - expected)


def npri(test: LabelMap, gts: GroundTruthSet, dataset: DatasetPairModel) -> PriResult:
    """Normalized index: (index - expected) / (1 - expected).

    Zero means chance level for this dataset, one is perfect, and negative
    values mean worse than chance. Raises DegenerateNormalization when the
    expected index is numerically 1 (e.g. a single-image, single-rater
    dataset scored against itself).
    """
    value = pri_fast(test, gts)
    expected = expected_pri((test.width, test.height), gts, dataset)
    n = test.width * test.height
    return PriResult(
        pri=value,
        expected=expected,
        npri=normalize_index(value, expected),
        pair_count=_comb2(n),
    )
