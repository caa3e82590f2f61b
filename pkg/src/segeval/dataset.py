"""Corpus manifest: images, per-rater ground truths, per-method masks, diagnoses.

The manifest is one JSON document with top-level keys ``raters``, ``methods``
and ``images``. Every image entry gives its id, dimensions, diagnosis group
(benign or melanoma), a ground-truth path per rater and a mask path per
method. Paths are relative to the manifest's directory. Ground truths may be
mask files (.pgm/.png) or border annotation files (.txt/.border), which are
rendered on load. Mask files are loaded lazily: parsing validates structure
only, and a dedicated validation pass checks the files.

Example::

    {
      "raters": ["WS", "JM"],
      "methods": ["srm"],
      "images": [
        {"id": "img01", "width": 768, "height": 512, "diagnosis": "benign",
         "ground_truth": {"WS": "gt/img01_ws.pgm", "JM": "gt/img01_jm.txt"},
         "methods": {"srm": "auto/img01_srm.pgm"}}
      ]
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import (
    DimensionMismatch,
    ManifestParseError,
    ManifestValidationError,
)
from .mask import BinaryMask, GroundTruthSet
from .mask_io import load_mask
from .spline import load_annotation, render_border

DIAGNOSES = ("benign", "melanoma")
ALL_GROUP = "all"
ANNOTATION_SUFFIXES = (".txt", ".border")


@dataclass(frozen=True)
class ImageEntry:
    image_id: str
    width: int
    height: int
    diagnosis: str
    gt_masks: dict  # rater id -> relative path
    method_masks: dict  # method id -> relative path


@dataclass
class DatasetManifest:
    raters: list
    methods: list
    entries: list
    root: Path = field(compare=False, default_factory=Path)

    def entry(self, image_id: str) -> ImageEntry:
        for e in self.entries:
            if e.image_id == image_id:
                return e
        raise KeyError(image_id)


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ManifestValidationError(message)


def parse_manifest(doc: dict, root: Path) -> DatasetManifest:
    """Validate the decoded JSON document and build the manifest."""
    try:
        raters = list(doc["raters"])
        methods = list(doc["methods"])
        images = list(doc["images"])
    except (KeyError, TypeError) as exc:
        raise ManifestParseError(f"manifest must define raters, methods and images: {exc}")

    _require(len(set(raters)) == len(raters), f"duplicate rater ids: {raters}")
    _require(len(set(methods)) == len(methods), f"duplicate method ids: {methods}")

    entries = []
    seen = set()
    for raw in images:
        try:
            entry = ImageEntry(
                image_id=str(raw["id"]),
                width=int(raw["width"]),
                height=int(raw["height"]),
                diagnosis=str(raw["diagnosis"]),
                gt_masks=dict(raw["ground_truth"]),
                method_masks=dict(raw.get("methods", {})),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ManifestParseError(f"malformed image entry {raw!r}: {exc}")
        _require(entry.image_id not in seen, f"duplicate image id {entry.image_id!r}")
        seen.add(entry.image_id)
        _require(
            entry.diagnosis in DIAGNOSES,
            f"image {entry.image_id!r}: diagnosis must be one of {DIAGNOSES}, "
            f"got {entry.diagnosis!r}",
        )
        _require(entry.width >= 1 and entry.height >= 1,
                 f"image {entry.image_id!r}: bad dimensions {entry.width}x{entry.height}")
        _require(len(entry.gt_masks) >= 1,
                 f"image {entry.image_id!r}: needs at least one ground truth")
        for rater in entry.gt_masks:
            _require(rater in raters,
                     f"image {entry.image_id!r}: unknown rater {rater!r}")
        for method in entry.method_masks:
            _require(method in methods,
                     f"image {entry.image_id!r}: unknown method {method!r}")
        entries.append(entry)
    return DatasetManifest(raters=raters, methods=methods, entries=entries, root=root)


def load_manifest(path) -> DatasetManifest:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ManifestParseError(f"{path}: {exc}")
    if not isinstance(doc, dict):
        raise ManifestParseError(f"{path}: manifest must be a JSON object")
    return parse_manifest(doc, root=path.parent)


def save_manifest(manifest: DatasetManifest, path) -> None:
    doc = {
        "raters": list(manifest.raters),
        "methods": list(manifest.methods),
        "images": [
            {
                "id": e.image_id,
                "width": e.width,
                "height": e.height,
                "diagnosis": e.diagnosis,
                "ground_truth": dict(e.gt_masks),
                "methods": dict(e.method_masks),
            }
            for e in manifest.entries
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def load_mask_or_annotation(path, spline_samples: int = 64) -> BinaryMask:
    """Load a mask file, rendering border annotations on the fly."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(str(path))
    if path.suffix.lower() in ANNOTATION_SUFFIXES:
        return render_border(load_annotation(path), samples_per_segment=spline_samples)
    return load_mask(path)


def _checked_mask(path, entry: ImageEntry, spline_samples: int) -> BinaryMask:
    mask = load_mask_or_annotation(path, spline_samples)
    if (mask.width, mask.height) != (entry.width, entry.height):
        raise DimensionMismatch(
            f"{path}: mask is {mask.width}x{mask.height}, "
            f"image {entry.image_id!r} declares {entry.width}x{entry.height}"
        )
    return mask


def load_ground_truths(
    entry: ImageEntry, root, rater_order=None, spline_samples: int = 64
) -> GroundTruthSet:
    """Load (or render) the entry's manual masks, in deterministic rater order.

    ``rater_order`` is normally the manifest's rater list, restricted here to
    the raters this entry has; it defaults to the entry's own declaration
    order. Pair probabilities and reports depend on this order being
    reproducible.
    """
    root = Path(root)
    if rater_order is None:
        rater_order = list(entry.gt_masks)
    raters = [r for r in rater_order if r in entry.gt_masks]
    masks = [_checked_mask(root / entry.gt_masks[r], entry, spline_samples) for r in raters]
    return GroundTruthSet(tuple(masks), tuple(raters))


def load_method_mask(
    entry: ImageEntry, method_id: str, root, spline_samples: int = 64
) -> BinaryMask:
    if method_id not in entry.method_masks:
        raise ManifestValidationError(
            f"image {entry.image_id!r} has no mask for method {method_id!r}"
        )
    return _checked_mask(Path(root) / entry.method_masks[method_id], entry, spline_samples)


def validate_dataset(manifest: DatasetManifest, spline_samples: int = 64) -> list:
    """Run all file-level checks; returns a list of diagnostic strings.

    Structure was already validated at parse time, so this pass checks that
    every referenced file exists, loads, and matches the declared dimensions.
    """
    problems = []
    for entry in manifest.entries:
        refs = [("ground truth", r, p) for r, p in sorted(entry.gt_masks.items())]
        refs += [("method", m, p) for m, p in sorted(entry.method_masks.items())]
        for kind, owner, rel in refs:
            path = manifest.root / rel
            try:
                _checked_mask(path, entry, spline_samples)
            except FileNotFoundError:
                problems.append(
                    f"image {entry.image_id!r}: missing {kind} file for {owner!r}: {path}"
                )
            except Exception as exc:
                problems.append(
                    f"image {entry.image_id!r}: {kind} file for {owner!r} failed to load: {exc}"
                )
    return problems


def dimension_groups(manifest: DatasetManifest) -> dict:
    """Image entries grouped by (width, height), in manifest order."""
    groups: dict = {}
    for entry in manifest.entries:
        groups.setdefault((entry.width, entry.height), []).append(entry)
    return groups
