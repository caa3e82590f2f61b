"""Deterministic synthetic demo corpus.

The real dermoscopy images and their manual borders are not redistributable,
so this builds a small stand-in corpus with the same shape: several images,
three raters whose borders disagree on an annulus, two automatic methods
(one tracking the first rater, one smaller and offset), and a
benign/melanoma split. Everything is a function of the image index, so the
corpus is byte-identical on every run.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .dataset import DatasetManifest, ImageEntry, save_manifest
from .mask import BinaryMask
from .mask_io import save_pgm
from .spline import BorderAnnotation, save_annotation

RATERS = ("rater_a", "rater_b", "rater_c")
METHODS = ("method_a", "method_b")


def disk_mask(width: int, height: int, cx: float, cy: float, r: float) -> BinaryMask:
    """Pixels whose centers lie strictly inside the given circle."""
    yy, xx = np.mgrid[0:height, 0:width]
    return BinaryMask((xx + 0.5 - cx) ** 2 + (yy + 0.5 - cy) ** 2 < r * r)


def circle_annotation(width: int, height: int, cx: float, cy: float, r: float,
                      points: int = 16) -> BorderAnnotation:
    angles = np.linspace(0.0, 2.0 * np.pi, points, endpoint=False)
    pts = np.stack([cx + r * np.cos(angles), cy + r * np.sin(angles)], axis=1)
    return BorderAnnotation(pts, width, height)


def write_demo_corpus(
    root, image_count: int = 6, width: int = 48, height: int = 32
) -> Path:
    """Write masks, annotations and manifest under ``root``; returns the manifest path.

    Two thirds of the images are benign, the rest melanoma. The third rater
    is stored as a border annotation instead of a mask so both ground-truth
    formats stay exercised.
    """
    root = Path(root)
    (root / "gt").mkdir(parents=True, exist_ok=True)
    (root / "auto").mkdir(parents=True, exist_ok=True)

    entries = []
    benign_count = image_count - max(1, image_count // 3)
    for i in range(image_count):
        image_id = f"img{i:02d}"
        cx = width / 2 + (i % 5) - 2
        cy = height / 2 + (i % 3) - 1
        base = min(width, height) / 4 + (i % 3)

        gt_paths = {}
        for j, rater in enumerate(RATERS[:2]):
            rel = f"gt/{image_id}_{rater}.pgm"
            save_pgm(disk_mask(width, height, cx + j, cy, base + j), root / rel)
            gt_paths[rater] = rel
        rel = f"gt/{image_id}_{RATERS[2]}.txt"
        save_annotation(circle_annotation(width, height, cx, cy, base + 2.5), root / rel)
        gt_paths[RATERS[2]] = rel

        method_paths = {}
        rel = f"auto/{image_id}_{METHODS[0]}.pgm"
        save_pgm(disk_mask(width, height, cx + 0.5, cy, base + 0.7), root / rel)
        method_paths[METHODS[0]] = rel
        rel = f"auto/{image_id}_{METHODS[1]}.pgm"
        save_pgm(disk_mask(width, height, cx + 2, cy + 1, base - 2), root / rel)
        method_paths[METHODS[1]] = rel

        entries.append(
            ImageEntry(
                image_id=image_id,
                width=width,
                height=height,
                diagnosis="benign" if i < benign_count else "melanoma",
                gt_masks=gt_paths,
                method_masks=method_paths,
            )
        )

    manifest = DatasetManifest(
        raters=list(RATERS), methods=list(METHODS), entries=entries, root=root
    )
    manifest_path = root / "manifest.json"
    save_manifest(manifest, manifest_path)
    return manifest_path
