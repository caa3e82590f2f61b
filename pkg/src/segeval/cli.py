"""Command-line entry point: validate, evaluate, npri, render-border.

Exit codes: 0 success, 1 validation or configuration error, 2 computation
error. Identical configuration and corpus always produce byte-identical
outputs, independent of --jobs: workers only compute per-image records and
everything is sorted on stable keys before emission.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from pathlib import Path

from .confusion import (
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
    dimension_groups,
    load_ground_truths,
    load_manifest,
    load_method_mask,
    validate_dataset,
)
from .errors import ManifestError, SegevalError, TooFewControlPoints
from .mask import to_label_map
from .mask_io import save_pgm
from .probability import build_probability_image, guillod_error
from .randindex import DatasetPairModel, expected_pri, normalize_index, pri_fast
from .report import (
    PER_RATER_MEASURES,
    MeasureRecord,
    aggregate,
    aligned_text,
    emit_table,
)
from .spline import load_annotation, render_border

JOBS_ENV_VAR = "SEGEVAL_JOBS"

_PER_RATER_FUNCS = {
    "xor": xor_error,
    "sensitivity": sensitivity,
    "specificity": specificity,
    "precision": precision,
    "recall": recall,
    "error_probability": error_probability,
}
EVALUATE_MEASURES = PER_RATER_MEASURES + ("guillod",)

# Errors that mean the inputs were wrong rather than the computation failing.
_CONFIG_ERRORS = (ManifestError, TooFewControlPoints, FileNotFoundError)


class ConfigError(Exception):
    """Bad flag combination or unknown id; reported before any computation."""


@contextmanager
def _context(label: str):
    """Re-raise module errors with image/method context in the message."""
    try:
        yield
    except SegevalError as exc:
        raise type(exc)(f"{label}: {exc}") from exc


def _split_csv(value: str | None) -> list | None:
    if value is None:
        return None
    items = [item.strip() for item in value.split(",") if item.strip()]
    if not items:
        raise ConfigError(f"empty selection: {value!r}")
    return items


def _check_known(kind: str, selected, known) -> list:
    unknown = [s for s in selected if s not in known]
    if unknown:
        raise ConfigError(f"unknown {kind}: {', '.join(unknown)} (known: {', '.join(known)})")
    return list(selected)


def _resolve_jobs(args) -> int:
    jobs = args.jobs
    if jobs is None:
        env = os.environ.get(JOBS_ENV_VAR)
        try:
            jobs = int(env) if env else 1
        except ValueError:
            raise ConfigError(f"{JOBS_ENV_VAR} must be an integer, got {env!r}")
    if jobs < 1:
        raise ConfigError(f"--jobs must be >= 1, got {jobs}")
    return jobs


def _map_entries(worker, entries, jobs: int) -> list:
    if jobs == 1 or len(entries) <= 1:
        return [worker(e) for e in entries]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, entries))


def _record_sort_key(rec: MeasureRecord):
    return (rec.measure, rec.image_id, rec.method_id, rec.rater_id or "")


def _write_records(records, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["measure", "image_id", "method_id", "rater_id", "value"])
        for rec in records:
            writer.writerow(
                [rec.measure, rec.image_id, rec.method_id, rec.rater_id or "", f"{rec.value:.12g}"]
            )


def _emit(table: str, name: str, out_dir: Path | None, pretty: bool) -> None:
    if out_dir is None:
        sys.stdout.write(f"# {name}\n")
        sys.stdout.write(aligned_text(table) if pretty else table)
    else:
        (out_dir / f"{name}.csv").write_text(table, encoding="utf-8")


def _diagnosis_map(manifest: DatasetManifest) -> dict:
    return {e.image_id: e.diagnosis for e in manifest.entries}


# ---------------------------------------------------------------- validate


def cmd_validate(args) -> int:
    manifest = load_manifest(args.manifest)
    problems = validate_dataset(manifest, spline_samples=args.spline_samples)
    groups = dimension_groups(manifest)
    if len(groups) > 1:
        dims = ", ".join(f"{w}x{h}" for w, h in groups)
        message = (
            f"images span {len(groups)} dimension groups ({dims}); a shared "
            "expected index needs identical dimensions, so npri statistics "
            "are computed per dimension group"
        )
        if args.dim_policy == "strict":
            problems.append(message)
        else:
            print(f"note: {message}")
    for problem in problems:
        print(f"problem: {problem}")
    if problems:
        print(f"{len(problems)} problem(s) found")
        return 1
    print(f"ok: {len(manifest.entries)} images, "
          f"{len(manifest.raters)} raters, {len(manifest.methods)} methods")
    return 0


# ---------------------------------------------------------------- evaluate


def _evaluate_entry(entry, manifest, methods, raters, measures, args):
    rater_order = [r for r in raters if r in entry.gt_masks]
    if not rater_order:
        raise ConfigError(
            f"image {entry.image_id!r} has no ground truth from any selected rater"
        )
    with _context(f"image {entry.image_id!r}"):
        gts = load_ground_truths(
            entry, manifest.root, rater_order=rater_order, spline_samples=args.spline_samples
        )
    manual_by_rater = dict(zip(gts.rater_ids, gts.masks))
    per_rater = [m for m in measures if m in PER_RATER_MEASURES]
    records = []
    for method in methods:
        with _context(f"image {entry.image_id!r}, method {method!r}"):
            auto = load_method_mask(entry, method, manifest.root, args.spline_samples)
            for rater in gts.rater_ids:
                counts = confusion(manual_by_rater[rater], auto)
                for measure in per_rater:
                    records.append(
                        MeasureRecord(
                            image_id=entry.image_id,
                            method_id=method,
                            measure=measure,
                            value=_PER_RATER_FUNCS[measure](counts),
                            rater_id=rater,
                        )
                    )
            if "guillod" in measures:
                observations = list(gts.masks) + ([auto] if args.guillod_include_test else [])
                prob = build_probability_image(observations)
                records.append(
                    MeasureRecord(
                        image_id=entry.image_id,
                        method_id=method,
                        measure="guillod",
                        value=guillod_error(prob, auto),
                    )
                )
    return records


def cmd_evaluate(args) -> int:
    manifest = load_manifest(args.manifest)
    measures = _check_known(
        "measure", _split_csv(args.measures) or list(EVALUATE_MEASURES), EVALUATE_MEASURES
    )
    methods = _check_known("method", _split_csv(args.methods) or manifest.methods,
                           manifest.methods)
    raters = _check_known("rater", _split_csv(args.raters) or manifest.raters, manifest.raters)
    jobs = _resolve_jobs(args)
    out_dir = _prepare_out_dir(args.out)

    worker = lambda entry: _evaluate_entry(entry, manifest, methods, raters, measures, args)
    records = [rec for batch in _map_entries(worker, manifest.entries, jobs) for rec in batch]
    records.sort(key=_record_sort_key)

    if out_dir is not None:
        _write_records(records, out_dir / "records.csv")
    diagnosis = _diagnosis_map(manifest)
    for measure in measures:
        subset = [r for r in records if r.measure == measure]
        if not subset:
            continue
        per_rater = measure in PER_RATER_MEASURES
        stats = aggregate(subset, diagnosis, per_rater=per_rater, stddev_mode=args.stddev)
        table = emit_table(
            stats,
            layout="per_rater" if per_rater else "pooled",
            method_order=methods,
            rater_order=raters,
        )
        _emit(table, measure, out_dir, args.pretty)
    return 0


# ---------------------------------------------------------------- npri


def _npri_entry(entry, manifest, model, methods, args):
    with _context(f"image {entry.image_id!r}"):
        gts = load_ground_truths(
            entry,
            manifest.root,
            rater_order=[r for r in manifest.raters if r in entry.gt_masks],
            spline_samples=args.spline_samples,
        )
        expected = expected_pri((entry.width, entry.height), gts, model)
    records = []
    details = []
    for method in methods:
        with _context(f"image {entry.image_id!r}, method {method!r}"):
            auto = load_method_mask(entry, method, manifest.root, args.spline_samples)
            value = pri_fast(to_label_map(auto), gts)
            normalized = normalize_index(value, expected)
        for measure, v in (("pri", value), ("expected_pri", expected), ("npri", normalized)):
            records.append(
                MeasureRecord(
                    image_id=entry.image_id, method_id=method, measure=measure, value=v
                )
            )
        details.append(
            [
                entry.image_id,
                method,
                f"{entry.width}x{entry.height}",
                f"{value:.12g}",
                f"{expected:.12g}",
                f"{normalized:.12g}",
            ]
        )
    return records, details


def cmd_npri(args) -> int:
    manifest = load_manifest(args.manifest)
    methods = _check_known("method", _split_csv(args.methods) or manifest.methods,
                           manifest.methods)
    jobs = _resolve_jobs(args)
    out_dir = _prepare_out_dir(args.out)

    groups = dimension_groups(manifest)
    if args.dim_policy == "strict" and len(groups) > 1:
        dims = ", ".join(f"{w}x{h}" for w, h in groups)
        raise ConfigError(
            f"images span several dimension groups ({dims}); a shared expected "
            "index needs identical dimensions (rerun with --dim-policy group)"
        )

    records = []
    details = []
    for _, entries in groups.items():
        gt_sets = [
            load_ground_truths(
                e,
                manifest.root,
                rater_order=[r for r in manifest.raters if r in e.gt_masks],
                spline_samples=args.spline_samples,
            )
            for e in entries
        ]
        model = DatasetPairModel.from_ground_truths(gt_sets)
        worker = lambda entry: _npri_entry(entry, manifest, model, methods, args)
        for recs, dets in _map_entries(worker, entries, jobs):
            records += recs
            details += dets

    records.sort(key=_record_sort_key)
    details.sort(key=lambda row: (row[0], row[1]))

    if out_dir is not None:
        with open(out_dir / "npri_detail.csv", "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(["image_id", "method_id", "dim_group", "pri", "expected_pri", "npri"])
            writer.writerows(details)

    diagnosis = _diagnosis_map(manifest)
    npri_records = [r for r in records if r.measure == "npri"]
    stats = aggregate(npri_records, diagnosis, per_rater=False, stddev_mode=args.stddev)
    table = emit_table(stats, layout="pooled", method_order=methods)
    _emit(table, "npri", out_dir, args.pretty)
    return 0


# ---------------------------------------------------------------- render


def cmd_render_border(args) -> int:
    annotation = load_annotation(args.annotation)
    mask = render_border(
        annotation, samples_per_segment=args.spline_samples, interpolate=args.interpolate
    )
    save_pgm(mask, args.out)
    return 0


# ---------------------------------------------------------------- wiring


def _prepare_out_dir(out) -> Path | None:
    if out is None:
        return None
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir


def _add_common(sub, jobs: bool = True) -> None:
    sub.add_argument("--manifest", required=True, help="path to the dataset manifest JSON")
    sub.add_argument("--spline-samples", type=int, default=64,
                     help="curve samples per spline segment for annotation files")
    if jobs:
        sub.add_argument("--out", help="output directory (default: print to stdout)")
        sub.add_argument("--methods", help="comma-separated method ids (default: all)")
        sub.add_argument("--stddev", choices=("sample", "population"), default="sample",
                         help="standard deviation convention (default: sample)")
        sub.add_argument("--jobs", type=int, default=None,
                         help=f"worker threads (default: ${JOBS_ENV_VAR} or 1)")
        sub.add_argument("--pretty", action="store_true",
                         help="align columns when printing to stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="segeval",
        description="Score automatic lesion masks against multi-rater manual borders.",
    )
    sub = parser.add_subparsers(dest="command")

    p_validate = sub.add_parser("validate", help="check a manifest and its files")
    _add_common(p_validate, jobs=False)
    p_validate.add_argument("--dim-policy", choices=("group", "strict"), default="group",
                            help="how mixed image dimensions are treated")
    p_validate.set_defaults(func=cmd_validate)

    p_eval = sub.add_parser("evaluate", help="per-rater measures and the probability measure")
    _add_common(p_eval)
    p_eval.add_argument("--measures",
                        help=f"comma-separated subset of: {', '.join(EVALUATE_MEASURES)}")
    p_eval.add_argument("--raters", help="comma-separated rater ids (default: all)")
    p_eval.add_argument("--guillod-include-test", action="store_true",
                        help="count the evaluated mask itself as an observation")
    p_eval.set_defaults(func=cmd_evaluate)

    p_npri = sub.add_parser("npri", help="probabilistic rand index, expected index, NPRI")
    _add_common(p_npri)
    p_npri.add_argument("--dim-policy", choices=("group", "strict"), default="group",
                        help="expected-index handling of mixed image dimensions")
    p_npri.set_defaults(func=cmd_npri)

    p_render = sub.add_parser("render-border", help="rasterize a border annotation to PGM")
    p_render.add_argument("annotation", help="annotation file (border <M> <w> <h>; x y lines)")
    p_render.add_argument("--out", required=True, help="output PGM path")
    p_render.add_argument("--spline-samples", type=int, default=64)
    p_render.add_argument("--interpolate", action="store_true",
                          help="make the curve pass through the clicked points")
    p_render.set_defaults(func=cmd_render_border)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits itself; remap usage errors to 1
        return 0 if exc.code in (0, None) else 1
    if not getattr(args, "func", None):
        parser.print_help()
        return 1
    try:
        return args.func(args)
    except (ConfigError, *_CONFIG_ERRORS) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SegevalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
