"""Aggregation and table emission: mean (standard deviation) per group.

Per-rater measures aggregate into rows of (rater, diagnosis) with one column
per method; pooled measures drop the rater key. The diagnosis axis always
carries an ``all`` pseudo-group unioning benign and melanoma. Standard
deviation defaults to the sample (n-1) convention -- this changes second
decimals versus the population convention, so it is switchable and recorded
here rather than assumed.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

from .errors import EmptyInput, LayoutMismatch

MEASURES = (
    "xor",
    "sensitivity",
    "specificity",
    "precision",
    "recall",
    "error_probability",
    "guillod",
    "pri",
    "expected_pri",
    "npri",
)
PER_RATER_MEASURES = (
    "xor",
    "sensitivity",
    "specificity",
    "precision",
    "recall",
    "error_probability",
)
POOLED_MEASURES = ("guillod", "pri", "expected_pri", "npri")
# Higher NPRI/PRI means lower border detection error; everything else is an error rate.
HIGHER_IS_BETTER = ("pri", "npri")

DIAGNOSIS_ROWS = ("benign", "melanoma", "all")
STDDEV_MODES = ("sample", "population")


@dataclass(frozen=True)
class MeasureRecord:
    """One measurement: a named measure of one method on one image."""

    image_id: str
    method_id: str
    measure: str
    value: float
    rater_id: str | None = None

    def __post_init__(self):
        if self.measure not in MEASURES:
            raise ValueError(f"unknown measure {self.measure!r}; expected one of {MEASURES}")
        if not math.isfinite(self.value):
            raise ValueError(f"non-finite value for {self.measure} on {self.image_id}")


@dataclass(frozen=True)
class GroupStat:
    """Mean and standard deviation of one (method, rater?, diagnosis) group."""

    method_id: str
    diagnosis: str
    mean: float
    stddev: float
    n: int
    rater_id: str | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("a group needs at least one record")
        if self.stddev < 0:
            raise ValueError("standard deviation cannot be negative")


def _mean_std(values, stddev_mode: str) -> tuple[float, float]:
    n = len(values)
    mean = sum(values) / n
    if n == 1:
        return mean, 0.0
    var = sum((v - mean) ** 2 for v in values)
    var /= (n - 1) if stddev_mode == "sample" else n
    return mean, math.sqrt(var)


def aggregate(
    records,
    diagnosis_by_image,
    per_rater: bool,
    stddev_mode: str = "sample",
) -> list:
    """Group records and compute mean/stddev per group.

    Groups are (method, rater, diagnosis) when per_rater is true, otherwise
    (method, diagnosis); the diagnosis axis includes the ``all`` union group.
    All records must carry the same measure name (aggregating across measures
    would be meaningless).
    """
    records = list(records)
    if not records:
        raise EmptyInput("no records to aggregate")
    if stddev_mode not in STDDEV_MODES:
        raise ValueError(f"stddev_mode must be one of {STDDEV_MODES}")
    measures = {r.measure for r in records}
    if len(measures) > 1:
        raise ValueError(f"refusing to aggregate across measures: {sorted(measures)}")

    buckets: dict = {}
    for rec in records:
        diagnosis = diagnosis_by_image[rec.image_id]
        rater = rec.rater_id if per_rater else None
        for group in (diagnosis, "all"):
            buckets.setdefault((rec.method_id, rater, group), []).append(rec.value)

    stats = []
    for (method, rater, diagnosis), values in sorted(
        buckets.items(), key=lambda kv: (kv[0][0], kv[0][1] or "", kv[0][2])
    ):
        # Summation order must not depend on record order (float addition
        # is not associative), or permuted inputs could differ in the last ulp.
        values.sort()
        mean, std = _mean_std(values, stddev_mode)
        stats.append(
            GroupStat(
                method_id=method,
                rater_id=rater,
                diagnosis=diagnosis,
                mean=mean,
                stddev=std,
                n=len(values),
            )
        )
    return stats


def format_cell(mean: float, stddev: float) -> str:
    """Fixed 3-decimal `mean (stddev)` cell. Python's float formatting
    rounds half to even, which is the documented convention."""
    return f"{mean:.3f} ({stddev:.3f})"


def _ordered(present, preferred) -> list:
    if preferred is None:
        return sorted(present)
    out = [x for x in preferred if x in present]
    missing = present - set(out)
    if missing:
        raise LayoutMismatch(f"stats contain ids outside the given order: {sorted(missing)}")
    return out


def emit_table(
    stats,
    layout: str,
    method_order=None,
    rater_order=None,
) -> str:
    """Render group statistics as deterministic CSV text.

    ``layout`` is ``per_rater`` (rows keyed rater x diagnosis) or ``pooled``
    (rows keyed diagnosis). Every row must have a cell for every method;
    otherwise the stats do not fit the layout.
    """
    stats = list(stats)
    if not stats:
        raise LayoutMismatch("no statistics to tabulate")
    if layout not in ("per_rater", "pooled"):
        raise ValueError(f"unknown layout {layout!r}")
    if layout == "per_rater" and any(s.rater_id is None for s in stats):
        raise LayoutMismatch("per-rater layout needs rater ids on every stat")
    if layout == "pooled" and any(s.rater_id is not None for s in stats):
        raise LayoutMismatch("pooled layout cannot take per-rater stats")

    unknown = {s.diagnosis for s in stats} - set(DIAGNOSIS_ROWS)
    if unknown:
        raise LayoutMismatch(f"unknown diagnosis groups: {sorted(unknown)}")
    methods = _ordered({s.method_id for s in stats}, method_order)
    cells = {(s.rater_id, s.diagnosis, s.method_id): s for s in stats}

    if layout == "per_rater":
        raters = _ordered({s.rater_id for s in stats}, rater_order)
        row_keys = [(r, d) for r in raters for d in DIAGNOSIS_ROWS]
        header = ["rater", "diagnosis", *methods]
    else:
        raters = [None]
        row_keys = [(None, d) for d in DIAGNOSIS_ROWS]
        header = ["diagnosis", *methods]

    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    for rater, diagnosis in row_keys:
        present = [m for m in methods if (rater, diagnosis, m) in cells]
        if not present:
            continue  # diagnosis group absent from this corpus
        if len(present) != len(methods):
            raise LayoutMismatch(
                f"row ({rater}, {diagnosis}) misses methods "
                f"{sorted(set(methods) - set(present))}"
            )
        row = [] if rater is None else [rater]
        row.append(diagnosis)
        row += [format_cell(cells[(rater, diagnosis, m)].mean,
                            cells[(rater, diagnosis, m)].stddev) for m in methods]
        writer.writerow(row)
    return out.getvalue()


def best_per_row(stats, higher_is_better: bool = False) -> dict:
    """Method(s) with the extremal mean per (rater, diagnosis) row.

    Returns {(rater_id, diagnosis): (method_id, ...)}; ties keep every tied
    method, in sorted order.
    """
    rows: dict = {}
    for s in stats:
        rows.setdefault((s.rater_id, s.diagnosis), []).append(s)
    best = {}
    for key, group in rows.items():
        target = max(g.mean for g in group) if higher_is_better else min(g.mean for g in group)
        best[key] = tuple(sorted(g.method_id for g in group if g.mean == target))
    return best


def aligned_text(csv_text: str) -> str:
    """Pad CSV cells into aligned columns for terminal display."""
    rows = [line.split(",") for line in csv_text.strip().split("\n")]
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return "\n".join(
        "  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows
    ) + "\n"
