import math
import random
import statistics

import pytest

from segeval import (
    EmptyInput,
    GroupStat,
    LayoutMismatch,
    MeasureRecord,
    aggregate,
    best_per_row,
    emit_table,
)
from segeval.report import aligned_text, format_cell


def rec(image, method, value, rater=None, measure="xor"):
    return MeasureRecord(
        image_id=image, method_id=method, measure=measure, value=value, rater_id=rater
    )


DIAGNOSIS = {"i1": "benign", "i2": "benign", "i3": "melanoma"}


def test_record_validation():
    with pytest.raises(ValueError):
        rec("i1", "m", 1.0, measure="dice")
    with pytest.raises(ValueError):
        rec("i1", "m", float("nan"))


def test_group_stat_validation():
    with pytest.raises(ValueError):
        GroupStat(method_id="m", diagnosis="all", mean=1.0, stddev=0.0, n=0)
    with pytest.raises(ValueError):
        GroupStat(method_id="m", diagnosis="all", mean=1.0, stddev=-1.0, n=2)


def test_aggregate_mean_and_sample_std():
    records = [rec("i1", "m", 10.0, "r"), rec("i2", "m", 12.0, "r")]
    stats = aggregate(records, DIAGNOSIS, per_rater=True)
    by_group = {s.diagnosis: s for s in stats}
    assert by_group["benign"].mean == 11.0
    assert by_group["benign"].stddev == pytest.approx(math.sqrt(2.0))
    assert by_group["benign"].n == 2
    assert by_group["all"].mean == 11.0


def test_aggregate_single_value_has_zero_std():
    stats = aggregate([rec("i3", "m", 7.0, "r")], DIAGNOSIS, per_rater=True)
    assert all(s.mean == 7.0 and s.stddev == 0.0 and s.n == 1 for s in stats)


def test_aggregate_all_group_unions_diagnoses():
    records = [rec("i1", "m", 1.0), rec("i2", "m", 2.0), rec("i3", "m", 3.0)]
    stats = {s.diagnosis: s for s in aggregate(records, DIAGNOSIS, per_rater=False)}
    assert stats["benign"].mean == 1.5
    assert stats["melanoma"].mean == 3.0
    assert stats["all"].mean == 2.0
    assert stats["all"].n == 3


def test_aggregate_against_statistics_module():
    rng = random.Random(97)
    values = [rng.uniform(0.0, 40.0) for _ in range(17)]
    records = [rec(f"i{k}", "m", v) for k, v in enumerate(values)]
    diagnosis = {f"i{k}": "benign" for k in range(17)}
    sample = {s.diagnosis: s for s in aggregate(records, diagnosis, per_rater=False)}
    assert sample["all"].mean == pytest.approx(statistics.fmean(values), abs=1e-12)
    assert sample["all"].stddev == pytest.approx(statistics.stdev(values), abs=1e-12)
    population = {
        s.diagnosis: s
        for s in aggregate(records, diagnosis, per_rater=False, stddev_mode="population")
    }
    assert population["all"].stddev == pytest.approx(statistics.pstdev(values), abs=1e-12)


def test_aggregate_is_permutation_invariant():
    rng = random.Random(101)
    records = [
        rec(f"i{k % 3 + 1}", f"m{k % 2}", rng.uniform(0, 100), f"r{k % 2}")
        for k in range(24)
    ]
    shuffled = records[:]
    rng.shuffle(shuffled)
    assert aggregate(records, DIAGNOSIS, per_rater=True) == aggregate(
        shuffled, DIAGNOSIS, per_rater=True
    )


def test_aggregate_bounds_property():
    rng = random.Random(103)
    values = [rng.uniform(-5, 5) for _ in range(9)]
    records = [rec("i1", "m", v) for v in values]
    stats = aggregate(records, DIAGNOSIS, per_rater=False)
    for s in stats:
        assert min(values) <= s.mean <= max(values)


def test_aggregate_input_errors():
    with pytest.raises(EmptyInput):
        aggregate([], DIAGNOSIS, per_rater=False)
    mixed = [rec("i1", "m", 1.0), rec("i1", "m", 1.0, measure="npri")]
    with pytest.raises(ValueError):
        aggregate(mixed, DIAGNOSIS, per_rater=False)
    with pytest.raises(ValueError):
        aggregate([rec("i1", "m", 1.0)], DIAGNOSIS, per_rater=False, stddev_mode="huh")


def make_stats(raters, diagnoses, methods):
    stats = []
    for ri, rater in enumerate(raters):
        for di, diagnosis in enumerate(diagnoses):
            for mi, method in enumerate(methods):
                stats.append(
                    GroupStat(
                        method_id=method,
                        rater_id=rater,
                        diagnosis=diagnosis,
                        mean=10.0 + ri + di + mi,
                        stddev=float(mi),
                        n=4,
                    )
                )
    return stats


def test_emit_table_per_rater_shape():
    methods = [f"m{k}" for k in range(5)]
    stats = make_stats(["r1", "r2", "r3"], ["benign", "melanoma", "all"], methods)
    table = emit_table(stats, layout="per_rater", method_order=methods,
                       rater_order=["r1", "r2", "r3"])
    lines = table.strip().split("\n")
    assert lines[0] == "rater,diagnosis," + ",".join(methods)
    assert len(lines) == 1 + 9  # header + 3 raters x 3 diagnosis rows
    assert lines[1].startswith("r1,benign,10.000 (0.000),11.000 (1.000)")


def test_emit_table_pooled_shape():
    stats = [
        GroupStat(method_id=m, diagnosis=d, mean=1.0, stddev=0.5, n=2)
        for d in ("benign", "melanoma", "all")
        for m in ("a", "b")
    ]
    table = emit_table(stats, layout="pooled", method_order=["a", "b"])
    lines = table.strip().split("\n")
    assert lines[0] == "diagnosis,a,b"
    assert [line.split(",", 1)[0] for line in lines[1:]] == ["benign", "melanoma", "all"]


def test_emit_table_layout_errors():
    with pytest.raises(LayoutMismatch):
        emit_table([], layout="pooled")
    pooled = [GroupStat(method_id="a", diagnosis="all", mean=1.0, stddev=0.0, n=1)]
    with pytest.raises(LayoutMismatch):
        emit_table(pooled, layout="per_rater")
    per_rater = [
        GroupStat(method_id="a", rater_id="r", diagnosis="all", mean=1.0, stddev=0.0, n=1)
    ]
    with pytest.raises(LayoutMismatch):
        emit_table(per_rater, layout="pooled")
    with pytest.raises(ValueError):
        emit_table(per_rater, layout="sideways")
    # A row that misses one method's cell does not fit the layout.
    ragged = [
        GroupStat(method_id="a", diagnosis="all", mean=1.0, stddev=0.0, n=1),
        GroupStat(method_id="b", diagnosis="benign", mean=1.0, stddev=0.0, n=1),
    ]
    with pytest.raises(LayoutMismatch):
        emit_table(ragged, layout="pooled")


def test_emit_table_deterministic():
    stats = make_stats(["r1", "r2"], ["benign", "all"], ["a", "b"])
    table_one = emit_table(stats, layout="per_rater")
    table_two = emit_table(list(reversed(stats)), layout="per_rater")
    assert table_one == table_two


def test_cell_format():
    assert format_cell(10.855, 5.081) == "10.855 (5.081)"
    assert format_cell(0.5, 0.0) == "0.500 (0.000)"
    # Half-to-even at the third decimal.
    assert format_cell(0.0625, 0.0635) == "0.062 (0.064)"


def test_best_per_row():
    stats = [
        GroupStat(method_id="a", rater_id="r", diagnosis="all", mean=10.5, stddev=0, n=2),
        GroupStat(method_id="b", rater_id="r", diagnosis="all", mean=11.1, stddev=0, n=2),
    ]
    assert best_per_row(stats) == {("r", "all"): ("a",)}
    tied = [
        GroupStat(method_id="a", diagnosis="benign", mean=0.785, stddev=0, n=2),
        GroupStat(method_id="b", diagnosis="benign", mean=0.785, stddev=0, n=2),
        GroupStat(method_id="c", diagnosis="benign", mean=0.5, stddev=0, n=2),
    ]
    assert best_per_row(tied, higher_is_better=True) == {(None, "benign"): ("a", "b")}
    solo = [GroupStat(method_id="only", diagnosis="all", mean=3.0, stddev=0, n=1)]
    assert best_per_row(solo) == {(None, "all"): ("only",)}


def test_aligned_text():
    table = "diagnosis,a\nbenign,1.000 (0.000)\n"
    text = aligned_text(table)
    assert text.splitlines()[0].startswith("diagnosis")
    assert "1.000 (0.000)" in text
