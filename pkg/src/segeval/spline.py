"""Manual border construction: clicked points -> closed quadratic B-spline -> filled mask.

The curve is the uniform periodic quadratic B-spline of the control polygon:
segment i is C_i(t) = [(1-t)^2 P_{i-1} + (-2t^2 + 2t + 1) P_i + t^2 P_{i+1}] / 2
for t in [0, 1), indices wrapping. Adjacent segments meet with equal value and
first derivative, and every curve point lies in the convex hull of the
control points. By default the curve approximates the clicked points; an
interpolating conversion (solve the cyclic midpoint system so the curve
passes through the clicks) is available behind a flag.

Rasterization fills the closed sampled polyline with an even-odd scanline
rule tested at pixel centers (pixel (x, y) owns the point (x+0.5, y+0.5)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateCurve, TooFewControlPoints
from .mask import BinaryMask


@dataclass(frozen=True, eq=False)
class BorderAnnotation:
    """Ordered border clicks in pixel coordinates plus the target mask size.

    Points may fall outside the image rectangle; the fill clips. A closed
    quadratic spline needs at least three control points.
    """

    control_points: np.ndarray
    width: int
    height: int

    def __post_init__(self):
        pts = np.array(self.control_points, dtype=np.float64, order="C")
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError(f"control points must be (M, 2), got shape {pts.shape}")
        if pts.shape[0] < 3:
            raise TooFewControlPoints(
                f"closed quadratic spline needs >= 3 control points, got {pts.shape[0]}"
            )
        if not np.isfinite(pts).all():
            raise ValueError("control points must be finite")
        if self.width < 1 or self.height < 1:
            raise ValueError(f"target dimensions must be >= 1, got {self.width}x{self.height}")
        pts.flags.writeable = False
        object.__setattr__(self, "control_points", pts)

    @property
    def point_count(self) -> int:
        return self.control_points.shape[0]


def spline_segment_point(control_points, i: int, t: float) -> np.ndarray:
    """Evaluate segment i of the closed quadratic spline at parameter t in [0, 1]."""
    pts = np.asarray(control_points, dtype=np.float64)
    m = pts.shape[0]
    prev_p, cur_p, next_p = pts[(i - 1) % m], pts[i % m], pts[(i + 1) % m]
    return ((1 - t) ** 2 * prev_p + (-2 * t * t + 2 * t + 1) * cur_p + t * t * next_p) / 2.0


def spline_points(ann: BorderAnnotation, samples_per_segment: int = 64) -> np.ndarray:
    """Sample the closed spline at t = k/samples_per_segment on every segment.

    Returns an (M * samples_per_segment, 2) array tracing the closed curve
    once; the first point is implicitly also the last.
    """
    if samples_per_segment < 1:
        raise ValueError("samples_per_segment must be >= 1")
    pts = ann.control_points
    prev_p = np.roll(pts, 1, axis=0)
    next_p = np.roll(pts, -1, axis=0)
    t = np.arange(samples_per_segment, dtype=np.float64) / samples_per_segment
    b_prev = (1.0 - t) ** 2 / 2.0
    b_cur = (-2.0 * t * t + 2.0 * t + 1.0) / 2.0
    b_next = t * t / 2.0
    # (M, samples, 2): segment-major so the polyline walks the curve in order.
    samples = (
        b_prev[None, :, None] * prev_p[:, None, :]
        + b_cur[None, :, None] * pts[:, None, :]
        + b_next[None, :, None] * next_p[:, None, :]
    )
    return samples.reshape(-1, 2)


def interpolating_control_points(clicked) -> np.ndarray:
    """Convert clicked points into control points whose spline passes through them.

    The closed quadratic spline passes through the edge midpoints of its
    control polygon, so this solves the cyclic system P_i + P_{i+1} = 2 D_i.
    The system is singular for an even number of points; least squares then
    yields the closest achievable curve (it still interpolates exactly for an
    odd count).
    """
    d = np.asarray(clicked, dtype=np.float64)
    m = d.shape[0]
    if m < 3:
        raise TooFewControlPoints(f"need >= 3 points, got {m}")
    # Row i encodes P_i + P_{i+1} = 2 D_i (indices wrap).
    system = np.eye(m) + np.roll(np.eye(m), 1, axis=1)
    solution, *_ = np.linalg.lstsq(system, 2.0 * d, rcond=None)
    return solution


def fill_closed_curve(
    polyline, width: int, height: int, strict: bool = False
) -> BinaryMask:
    """Rasterize a closed polyline into a mask by even-odd scanline filling.

    A pixel is lesion iff its center lies inside the closed curve under the
    even-odd rule. Pixels outside the image rectangle are discarded. By
    default a curve enclosing no pixel center just yields an all-background
    mask; with strict=True that raises DegenerateCurve.
    """
    pts = np.asarray(polyline, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 3:
        raise ValueError("polyline must be an (n >= 3, 2) point array")
    x1 = pts[:, 0]
    y1 = pts[:, 1]
    x2 = np.roll(x1, -1)
    y2 = np.roll(y1, -1)

    grid = np.zeros((height, width), dtype=bool)
    y_lo = max(0, int(math.floor(pts[:, 1].min() - 0.5)))
    y_hi = min(height, int(math.ceil(pts[:, 1].max() + 0.5)))
    for y in range(y_lo, y_hi):
        cy = y + 0.5
        # Half-open span rule: an edge crosses the scanline iff exactly one
        # endpoint lies at or below it; horizontal edges never cross.
        crosses = (y1 <= cy) != (y2 <= cy)
        if not crosses.any():
            continue
        frac = (cy - y1[crosses]) / (y2[crosses] - y1[crosses])
        xs = np.sort(x1[crosses] + frac * (x2[crosses] - x1[crosses]))
        for lo, hi in xs.reshape(-1, 2):
            first = max(0, math.ceil(lo - 0.5))
            last = min(width, math.ceil(hi - 0.5))
            if first < last:
                grid[y, first:last] = True
    if strict and not grid.any():
        raise DegenerateCurve("closed curve encloses no pixel centers")
    return BinaryMask(grid)


def render_border(
    ann: BorderAnnotation, samples_per_segment: int = 64, interpolate: bool = False
) -> BinaryMask:
    """Full pipeline: spline the annotation, then fill the closed curve."""
    if interpolate:
        ann = BorderAnnotation(
            interpolating_control_points(ann.control_points), ann.width, ann.height
        )
    return fill_closed_curve(spline_points(ann, samples_per_segment), ann.width, ann.height)


def load_annotation(path) -> BorderAnnotation:
    """Read the plain-text annotation format.

    Line 1: ``border <M> <width> <height>``; then M lines of ``x y``.
    """
    lines = Path(path).read_text().split("\n")
    header = lines[0].split()
    if len(header) != 4 or header[0] != "border":
        raise ValueError(f"{path}: bad annotation header {lines[0]!r}")
    count, width, height = int(header[1]), int(header[2]), int(header[3])
    points = []
    for line in lines[1 : count + 1]:
        x_str, y_str = line.split()
        points.append((float(x_str), float(y_str)))
    if len(points) != count:
        raise ValueError(f"{path}: expected {count} points, found {len(points)}")
    return BorderAnnotation(np.array(points), width, height)


def save_annotation(ann: BorderAnnotation, path) -> None:
    lines = [f"border {ann.point_count} {ann.width} {ann.height}"]
    # Python float repr round-trips exactly, so save -> load is lossless.
    lines += [f"{float(x)!r} {float(y)!r}" for x, y in ann.control_points]
    Path(path).write_text("\n".join(lines) + "\n")
