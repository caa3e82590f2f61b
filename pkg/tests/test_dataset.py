import json

import numpy as np
import pytest

from segeval import (
    BinaryMask,
    DimensionMismatch,
    ManifestParseError,
    ManifestValidationError,
    load_ground_truths,
    load_manifest,
    load_mask_or_annotation,
    load_method_mask,
    save_manifest,
    save_pgm,
    validate_dataset,
)
from segeval.dataset import dimension_groups
from segeval.demo import write_demo_corpus
from helpers import random_mask


def block_mask(width, height, x0, y0, x1, y1):
    pixels = np.zeros((height, width), dtype=bool)
    pixels[y0:y1, x0:x1] = True
    return BinaryMask(pixels)


@pytest.fixture
def tiny_corpus(tmp_path):
    """Two 16x12 images, two raters (one via annotation), one method."""
    (tmp_path / "masks").mkdir()
    doc = {
        "raters": ["alpha", "beta"],
        "methods": ["m1"],
        "images": [],
    }
    for i, diagnosis in enumerate(["benign", "melanoma"]):
        image_id = f"img{i}"
        gt_a = f"masks/{image_id}_alpha.pgm"
        save_pgm(block_mask(16, 12, 2, 2, 10, 8), tmp_path / gt_a)
        gt_b = f"masks/{image_id}_beta.txt"
        (tmp_path / gt_b).write_text(
            "border 4 16 12\n2.0 2.0\n11.0 2.0\n11.0 9.0\n2.0 9.0\n"
        )
        method = f"masks/{image_id}_m1.pgm"
        save_pgm(block_mask(16, 12, 3, 3, 9, 9), tmp_path / method)
        doc["images"].append(
            {
                "id": image_id,
                "width": 16,
                "height": 12,
                "diagnosis": diagnosis,
                "ground_truth": {"alpha": gt_a, "beta": gt_b},
                "methods": {"m1": method},
            }
        )
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps(doc))
    return path


def test_load_manifest(tiny_corpus):
    manifest = load_manifest(tiny_corpus)
    assert manifest.raters == ["alpha", "beta"]
    assert manifest.methods == ["m1"]
    assert [e.image_id for e in manifest.entries] == ["img0", "img1"]
    assert manifest.entries[1].diagnosis == "melanoma"
    assert manifest.root == tiny_corpus.parent


def _mutate(tiny_corpus, mutate):
    doc = json.loads(tiny_corpus.read_text())
    mutate(doc)
    tiny_corpus.write_text(json.dumps(doc))


def test_duplicate_image_id_rejected(tiny_corpus):
    _mutate(tiny_corpus, lambda d: d["images"].append(dict(d["images"][0])))
    with pytest.raises(ManifestValidationError, match="img0"):
        load_manifest(tiny_corpus)


def test_unknown_rater_rejected(tiny_corpus):
    def mutate(d):
        d["images"][0]["ground_truth"]["ghost"] = "masks/none.pgm"

    _mutate(tiny_corpus, mutate)
    with pytest.raises(ManifestValidationError, match="ghost"):
        load_manifest(tiny_corpus)


def test_bad_diagnosis_rejected(tiny_corpus):
    def mutate(d):
        d["images"][0]["diagnosis"] = "unsure"

    _mutate(tiny_corpus, mutate)
    with pytest.raises(ManifestValidationError, match="unsure"):
        load_manifest(tiny_corpus)


def test_structural_problems_are_parse_errors(tmp_path):
    path = tmp_path / "manifest.json"
    path.write_text("not json at all {")
    with pytest.raises(ManifestParseError):
        load_manifest(path)
    path.write_text(json.dumps({"raters": []}))
    with pytest.raises(ManifestParseError):
        load_manifest(path)
    path.write_text(json.dumps({"raters": [], "methods": [], "images": [{"id": "x"}]}))
    with pytest.raises(ManifestParseError):
        load_manifest(path)


def test_manifest_round_trip(tiny_corpus, tmp_path):
    manifest = load_manifest(tiny_corpus)
    copy_path = tmp_path / "copy" / "manifest.json"
    copy_path.parent.mkdir()
    save_manifest(manifest, copy_path)
    reloaded = load_manifest(copy_path)
    assert reloaded.raters == manifest.raters
    assert reloaded.methods == manifest.methods
    assert reloaded.entries == manifest.entries
    assert reloaded.root != manifest.root  # only the anchor differs


def test_load_ground_truths_order_and_formats(tiny_corpus):
    manifest = load_manifest(tiny_corpus)
    entry = manifest.entries[0]
    gts = load_ground_truths(entry, manifest.root, rater_order=manifest.raters)
    assert gts.k == 2
    assert gts.rater_ids == ("alpha", "beta")
    assert (gts.width, gts.height) == (16, 12)
    # The annotation-rendered member is a real mask too.
    assert gts.masks[1].lesion_count > 0
    # Reversed order is honored (reports depend on deterministic order).
    reversed_gts = load_ground_truths(entry, manifest.root, rater_order=["beta", "alpha"])
    assert reversed_gts.rater_ids == ("beta", "alpha")


def test_mask_dimension_checked_against_entry(tiny_corpus):
    manifest = load_manifest(tiny_corpus)
    bad = random_mask(np.random.default_rng(0), 10, 10)
    save_pgm(bad, manifest.root / "masks" / "img0_alpha.pgm")
    with pytest.raises(DimensionMismatch, match="img0"):
        load_ground_truths(manifest.entries[0], manifest.root, rater_order=manifest.raters)


def test_load_method_mask(tiny_corpus):
    manifest = load_manifest(tiny_corpus)
    mask = load_method_mask(manifest.entries[0], "m1", manifest.root)
    assert mask.lesion_count == 36
    with pytest.raises(ManifestValidationError, match="m2"):
        load_method_mask(manifest.entries[0], "m2", manifest.root)


def test_load_mask_or_annotation_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_mask_or_annotation(tmp_path / "nope.pgm")


def test_validate_dataset(tiny_corpus):
    manifest = load_manifest(tiny_corpus)
    assert validate_dataset(manifest) == []
    missing = manifest.root / "masks" / "img1_m1.pgm"
    missing.unlink()
    problems = validate_dataset(manifest)
    assert len(problems) == 1
    assert "img1" in problems[0] and str(missing) in problems[0]


def test_dimension_groups(tiny_corpus):
    manifest = load_manifest(tiny_corpus)
    assert list(dimension_groups(manifest)) == [(16, 12)]


def test_demo_corpus_is_valid_and_deterministic(tmp_path):
    path_a = write_demo_corpus(tmp_path / "a")
    path_b = write_demo_corpus(tmp_path / "b")
    manifest = load_manifest(path_a)
    assert len(manifest.entries) == 6
    assert [e.diagnosis for e in manifest.entries].count("benign") == 4
    assert validate_dataset(manifest) == []
    # Same bytes for every generated file.
    for file_a in sorted((tmp_path / "a").rglob("*")):
        if file_a.is_file():
            file_b = tmp_path / "b" / file_a.relative_to(tmp_path / "a")
            assert file_a.read_bytes() == file_b.read_bytes()
