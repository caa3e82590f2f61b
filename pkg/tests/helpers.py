"""Shared test utilities: tiny mask builders and independent brute-force oracles.

The oracles here deliberately re-derive everything from definitions (literal
pair loops, ray casting, monotone-chain hulls) so they stay independent of
the library code paths they check.
"""

from __future__ import annotations

import numpy as np

from segeval import BinaryMask, GroundTruthSet, LabelMap, to_label_map


def text_mask(drawing: str) -> BinaryMask:
    """Build a mask from an ASCII drawing: '#' is lesion, '.' background."""
    rows = [line.strip() for line in drawing.strip().splitlines()]
    return BinaryMask(np.array([[c == "#" for c in row] for row in rows]))


def random_mask(rng, width: int, height: int, p: float = 0.5) -> BinaryMask:
    return BinaryMask(rng.random((height, width)) < p)


def random_label_map(rng, width: int, height: int, labels: int) -> LabelMap:
    return LabelMap(rng.integers(0, labels, (height, width)))


def random_gts(rng, width: int, height: int, k: int, labels: int) -> GroundTruthSet:
    return GroundTruthSet.from_masks(
        [random_label_map(rng, width, height, labels) for _ in range(k)]
    )


def label_rows(gts: GroundTruthSet) -> np.ndarray:
    out = []
    for m in gts.masks:
        lm = to_label_map(m) if isinstance(m, BinaryMask) else m
        out.append(lm.labels.ravel())
    return np.stack(out)


def pairwise_expected(dims, gts: GroundTruthSet, gt_sets) -> float:
    """Brute-force expected index: literal pairwise sum with the dataset-wide
    average pair probability in place of the test relation."""
    width, height = dims
    n = width * height
    cur = label_rows(gts)
    p = np.zeros((n, n))
    for row in cur:
        p += row[:, None] == row[None, :]
    p /= gts.k
    p_dataset = np.zeros((n, n))
    for other in gt_sets:
        q = np.zeros((n, n))
        for row in label_rows(other):
            q += row[:, None] == row[None, :]
        p_dataset += q / other.k
    p_dataset /= len(gt_sets)
    contrib = p_dataset * p + (1.0 - p_dataset) * (1.0 - p)
    return float((contrib.sum() - n) / 2.0 / (n * (n - 1) // 2))


def convex_hull(points: np.ndarray) -> np.ndarray:
    """Monotone-chain convex hull, counterclockwise, no repeated endpoint."""
    pts = sorted(map(tuple, np.asarray(points, dtype=float)))
    if len(pts) <= 2:
        return np.asarray(pts)

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.asarray(lower[:-1] + upper[:-1])


def hull_signed_margin(point, hull: np.ndarray) -> float:
    """Smallest signed distance from the point to the hull edges (>= 0 inside).

    The hull must be counterclockwise; degenerate (collinear) hulls fall back
    to distance from the segment through the extreme points.
    """
    if len(hull) == 1:
        return -float(np.linalg.norm(np.asarray(point) - hull[0]))
    if len(hull) == 2:
        a, b = hull
        ab = b - a
        t = np.clip(np.dot(point - a, ab) / np.dot(ab, ab), 0.0, 1.0)
        return -float(np.linalg.norm(point - (a + t * ab)))
    margins = []
    for i in range(len(hull)):
        a = hull[i]
        b = hull[(i + 1) % len(hull)]
        edge = b - a
        normal = np.array([-edge[1], edge[0]])
        norm = np.linalg.norm(normal)
        margins.append(np.dot(point - a, normal) / norm)
    return float(min(margins))


def point_in_polygon(x: float, y: float, polyline: np.ndarray) -> bool:
    """Even-odd ray cast to the left, crossings at or left of the point count."""
    inside = False
    n = len(polyline)
    for i in range(n):
        x1, y1 = polyline[i]
        x2, y2 = polyline[(i + 1) % n]
        if (y1 <= y) != (y2 <= y):
            x_cross = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if x_cross <= x:
                inside = not inside
    return inside
