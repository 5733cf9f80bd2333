import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from qsm.core import (
    CAVEATS,
    TRANSITIVITY_WARNING,
    MigrationMatrix,
    QSMError,
    RepeatRandom,
    ShiftAllTies,
    manipulate,
    migrate_from_files,
    neighborhood_report,
    run_qsm,
)
from qsm.data import ClassSet, DataError, Dataset, FeatureKind
from qsm.fixtures import IRIS_SHIFT_ALL_TIES, TRANSITIVITY_MATRIX, make_medical, make_transitivity
from qsm.model import Classifier, KnnModel
from qsm.shift import CategorySwitch, RankShift, ShiftError, ShiftSpec

TWO_CLASS = np.array([[10, 0], [1, 9]])


def labels_file(tmp_path, name, labels):
    path = tmp_path / name
    path.write_text("label\n" + "".join(f"{lab}\n" for lab in labels))
    return path


def test_manipulate_touches_only_listed_features():
    ds, _ = make_medical()
    out = manipulate(ds, ShiftSpec({"x1": RankShift(251)}))
    assert np.array_equal(out.column("x2"), ds.column("x2"))
    assert out.column("x2").tobytes() == ds.column("x2").tobytes()
    assert not np.array_equal(out.column("x1"), ds.column("x1"))


def test_manipulate_empty_spec_is_identity(iris):
    assert manipulate(iris, ShiftSpec()) == iris


def test_manipulate_saturates(iris):
    out = manipulate(iris, ShiftSpec({"petal_width": RankShift(150)}))
    assert np.all(out.column("petal_width") == iris.column("petal_width").max())


def test_manipulate_kind_mismatch():
    ds = Dataset(("c",), (FeatureKind.categorical(["r", "s"]),), (np.array([1, 2]),))
    with pytest.raises(ShiftError):
        manipulate(ds, ShiftSpec({"c": RankShift(1)}))
    assert manipulate(ds, ShiftSpec({"c": CategorySwitch("r", "s")})).column("c").tolist() == [2, 2]


def test_iris_shift_all_ties(iris, iris_tree):
    m = run_qsm(iris, ShiftSpec({"petal_width": RankShift(3)}), iris_tree, ShiftAllTies())
    assert m.classes == ("setosa", "versicolor", "virginica")
    assert m.counts.tolist() == IRIS_SHIFT_ALL_TIES.tolist()
    assert m.repetitions == 1


def test_zero_shift_is_diagonal(iris, iris_tree):
    m = run_qsm(iris, ShiftSpec({"petal_width": RankShift(0)}), iris_tree)
    assert m.counts.tolist() == np.diag([50, 54, 46]).tolist()
    assert m.trace == iris.n


def test_transitivity_table():
    ds, model = make_transitivity()
    m = run_qsm(ds, ShiftSpec({"x_l": RankShift(1)}), model)
    assert m.counts.tolist() == TRANSITIVITY_MATRIX.tolist()


def test_migrate_from_files_two_class(tmp_path):
    before = labels_file(tmp_path, "b.csv", ["A"] * 10 + ["B"] * 10)
    after = labels_file(tmp_path, "a.csv", ["A"] * 10 + ["A"] + ["B"] * 9)
    m = migrate_from_files(before, after, ["A", "B"])
    assert m.counts.tolist() == TWO_CLASS.tolist()
    same = migrate_from_files(before, before, ["A", "B"])
    assert same.counts.tolist() == [[10, 0], [0, 10]]


def test_migrate_permutation(tmp_path):
    before = labels_file(tmp_path, "b.csv", ["A", "B", "C"])
    after = labels_file(tmp_path, "a.csv", ["B", "C", "A"])
    m = migrate_from_files(before, after, ClassSet(("A", "B", "C")))
    assert m.counts.tolist() == [[0, 1, 0], [0, 0, 1], [1, 0, 0]]


def test_migrate_errors(tmp_path):
    before = labels_file(tmp_path, "b.csv", ["A", "B"])
    with pytest.raises(DataError, match="mismatch"):
        migrate_from_files(before, labels_file(tmp_path, "a.csv", ["A"]), ["A", "B"])
    with pytest.raises(DataError, match="row 1"):
        migrate_from_files(before, labels_file(tmp_path, "c.csv", ["A", "Q"]), ["A", "B"])


def test_report_two_class():
    m = MigrationMatrix(ClassSet(("A", "B")), TWO_CLASS)
    report = neighborhood_report(m)
    assert [(f.source, f.target, f.count) for f in report.findings] == [("B", "A", 1)]
    assert report.not_found == (("A", "B"),)
    assert "an area of A is modeled in the direction of the manipulation next to an area of B" in report.text()


def test_report_diagonal_has_caveats_only():
    report = neighborhood_report(MigrationMatrix(ClassSet(("A", "B")), np.diag([3, 4])))
    assert report.findings == ()
    text = report.text()
    assert "(none)" in text
    for caveat in CAVEATS:
        assert caveat in text


def test_report_transitivity_makes_no_chained_claim():
    report = neighborhood_report(MigrationMatrix(ClassSet(("A", "B", "C")), TRANSITIVITY_MATRIX))
    assert [(f.source, f.target) for f in report.findings] == [("A", "B"), ("B", "C")]
    assert ("A", "C") in report.not_found
    assert TRANSITIVITY_WARNING in report.text()


def test_matrix_json_round_trip(iris, iris_tree):
    m = run_qsm(iris, ShiftSpec({"petal_width": RankShift(3)}), iris_tree, RepeatRandom(4, 11))
    text = m.to_json()
    assert list(__import__("json").loads(text)) == ["classes", "counts", "repetitions", "seed", "strategy", "shift"]
    back = MigrationMatrix.from_dict(__import__("json").loads(text))
    assert back == m and back.seed == 11 and back.spec == {"petal_width": "+3"}


def test_matrix_validation():
    with pytest.raises(DataError):
        MigrationMatrix(ClassSet(("A", "B")), np.array([[1, -1], [0, 0]]))
    with pytest.raises(DataError):
        MigrationMatrix(ClassSet(("A", "B")), np.array([[1]]))


class Exploding(Classifier):
    class_set = ClassSet(("A", "B"))

    def __init__(self):
        self.calls = 0

    def predict(self, ds):
        self.calls += 1
        if self.calls > 2:
            raise RuntimeError("boom")
        return np.full(ds.n, "A", dtype=object)


def test_classifier_failure_carries_repetition(iris):
    with pytest.raises(QSMError, match="repetition 1") as info:
        run_qsm(iris, ShiftSpec({"petal_width": RankShift(1)}), Exploding(), RepeatRandom(3, 0))
    assert info.value.repetition == 1


def test_repeat_random_seed_validation():
    with pytest.raises(ValueError):
        RepeatRandom(0, 1)
    with pytest.raises(ValueError):
        RepeatRandom(1, -1)


# -- properties --------------------------------------------------------------

seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_oracle_equivalence(seed):
    ds, spec, model = oracles.random_case(np.random.default_rng(seed))
    m = run_qsm(ds, spec, model, ShiftAllTies())
    assert m.counts.tolist() == oracles.brute_force_matrix(ds, spec, model).tolist()


@settings(max_examples=100, deadline=None)
@given(seeds, st.integers(1, 4))
def test_row_sums_and_total(seed, reps):
    ds, spec, model = oracles.random_case(np.random.default_rng(seed), categorical=False)
    before = model.predict(ds)
    hist = np.array([np.sum(before == c) for c in model.class_set])
    for strategy in (ShiftAllTies(), RepeatRandom(reps, seed)):
        m = run_qsm(ds, spec, model, strategy)
        assert m.row_sums().tolist() == (m.repetitions * hist).tolist()
        assert m.total == ds.n * m.repetitions
        assert np.all(m.counts >= 0)


@settings(max_examples=100, deadline=None)
@given(seeds, st.integers(1, 4))
def test_trace_law(seed, reps):
    ds, spec, model = oracles.random_case(np.random.default_rng(seed), categorical=False)
    zero = ShiftSpec({name: RankShift(0) for name in spec.entries})
    for strategy in (ShiftAllTies(), RepeatRandom(reps, seed)):
        m = run_qsm(ds, zero, model, strategy)
        assert np.count_nonzero(m.counts - np.diag(np.diag(m.counts))) == 0
        assert m.trace == ds.n * m.repetitions


@settings(max_examples=100, deadline=None)
@given(seeds, st.integers(1, 5))
def test_strategies_agree_without_ties(seed, reps):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 30))
    x = rng.permutation(n).astype(float) + rng.random()
    y = rng.random(n)
    ds = Dataset(("x", "y"), (FeatureKind.metric(), FeatureKind.metric()), (x, y), rng.choice(["A", "B", "C"], n))
    model = KnnModel(ds, k=min(3, n))
    spec = ShiftSpec({"x": RankShift(int(rng.integers(-n, n + 1)))})
    single = run_qsm(ds, spec, model, ShiftAllTies())
    repeated = run_qsm(ds, spec, model, RepeatRandom(reps, seed))
    assert repeated.counts.tolist() == (reps * single.counts).tolist()


@settings(max_examples=100, deadline=None)
@given(seeds, st.integers(1, 6))
def test_repeat_random_is_reproducible(iris, iris_tree, seed, v):
    spec = ShiftSpec({"petal_width": RankShift(v), "sepal_width": RankShift(-v)})
    a = run_qsm(iris, spec, iris_tree, RepeatRandom(3, seed))
    b = run_qsm(iris, spec, iris_tree, RepeatRandom(3, seed))
    assert a == b and a.counts.tobytes() == b.counts.tobytes()


def test_random_order_moves_ties_partially():
    col = np.array([1.0, 2.0, 2.0, 2.0, 3.0])
    ds = Dataset(("x",), (FeatureKind.metric(),), (col,))
    seen = set()
    for rep in range(20):
        out = manipulate(ds, ShiftSpec({"x": RankShift(1)}), RepeatRandom(20, 5).rng(rep)).column("x")
        assert out[0] == 2.0 and out[4] == 3.0
        assert sorted(out[1:4].tolist()) == [2.0, 2.0, 3.0]
        seen.add(tuple(out[1:4]))
    assert len(seen) == 3
