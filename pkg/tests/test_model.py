import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import exhaustive_gini_split
from qsm.data import ClassSet, Dataset, FeatureKind
from qsm.fixtures import IRIS_FEATURES
from qsm.model import Condition, KnnModel, ModelError, Rule, RuleRegionModel, cart_fit, predict_argmax


def metric_ds(columns, labels=None):
    return Dataset(
        tuple(columns), tuple(FeatureKind.metric() for _ in columns), tuple(np.asarray(c, float) for c in columns.values()), labels
    )


@pytest.mark.parametrize(
    "probs, classes, expected",
    [
        ([0.2, 0.7, 0.1], "ABC", "B"),
        ([0.5, 0.5], "AB", "A"),
        ([1 / 3, 1 / 3, 1 / 3], "ABC", "A"),
    ],
)
def test_predict_argmax(probs, classes, expected):
    assert predict_argmax(probs, tuple(classes)) == expected


@pytest.mark.parametrize("probs", [[], [-0.1, 1.1], [0.3, 0.3]])
def test_predict_argmax_errors(probs):
    with pytest.raises(ModelError):
        predict_argmax(probs, tuple("AB"[: len(probs)]) if probs else ())


def test_iris_tree_against_exhaustive_search(iris, iris_tree):
    xs = [iris.column(f).tolist() for f in IRIS_FEATURES]
    ys = iris.labels.tolist()
    root = exhaustive_gini_split(xs, ys)
    # petal length 2.45 and petal width 0.8 both isolate setosa; the first feature wins
    assert (0, 2.45) in [(j, round(t, 6)) for _, j, t in root]
    keep = [i for i, x in enumerate(xs[0]) if x >= 2.45]
    second = exhaustive_gini_split([[col[i] for i in keep] for col in xs], [ys[i] for i in keep])
    assert [(j, round(t, 6)) for _, j, t in second] == [(1, 1.75)]

    splits = iris_tree.splits()
    assert [(d, f) for d, f, _ in splits] == [(0, "petal_length"), (1, "petal_width")]
    assert splits[0][2] == pytest.approx(2.45)
    assert splits[1][2] == pytest.approx(1.75)
    assert iris_tree.depth == 2
    assert [leaf.label for leaf in iris_tree.leaves()] == ["setosa", "versicolor", "virginica"]


def test_all_iris_features_give_same_tree(iris, iris_tree):
    tree = cart_fit(iris)
    assert [(f, round(t, 6)) for _, f, t in tree.splits()] == [("petal_length", 2.45), ("petal_width", 1.75)]
    assert np.array_equal(tree.predict(iris), iris_tree.predict(iris))


def test_leaves_predict_their_majority(iris, iris_tree):
    pred = iris_tree.predict(iris)
    assert np.unique(pred, return_counts=True)[1].tolist() == [50, 54, 46]
    for leaf in iris_tree.leaves():
        assert leaf.label == iris_tree.class_set.classes[int(np.argmax(leaf.counts))]


def test_single_class_gives_single_leaf():
    ds = metric_ds({"x": [1, 2, 3, 4]}, ["A"] * 4)
    tree = cart_fit(ds, min_split=2)
    assert tree.root.is_leaf and tree.root.label == "A"


def test_two_point_split_at_midpoint():
    ds = metric_ds({"x": [0.0, 1.0]}, ["A", "B"])
    assert exhaustive_gini_split([[0.0, 1.0]], ["A", "B"]) == [(0.0, 0, 0.5)]
    tree = cart_fit(ds, min_split=2, min_bucket=1)
    assert tree.splits() == [(0, "x", 0.5)]
    assert tree.predict(ds).tolist() == ["A", "B"]


def test_cart_needs_labels_and_features():
    with pytest.raises(ModelError):
        cart_fit(metric_ds({"x": [1, 2]}))
    with pytest.raises(ModelError):
        cart_fit(metric_ds({"x": [1, 2]}, ["A", "B"]), features=[])


def test_rule_region_first_match_wins():
    model = RuleRegionModel(
        (Rule((Condition("x", "<", 1.0),), "low"), Rule((Condition("x", "<", 2.0),), "mid")),
        "high",
    )
    ds = metric_ds({"x": [0.5, 1.5, 2.5, 1.0]})
    assert model.predict(ds).tolist() == ["low", "mid", "high", "mid"]
    assert model.class_set == ClassSet(("low", "mid", "high"))


def test_rules_json_round_trip(tmp_path):
    model = RuleRegionModel((Rule((Condition("a", ">=", 1.0), Condition("b", "<", 0.5)), "X"),), "Y", ClassSet(("Y", "X")))
    path = tmp_path / "rules.json"
    path.write_text(json.dumps(model.to_dict()))
    assert RuleRegionModel.load(path) == model
    with pytest.raises(ModelError):
        RuleRegionModel.from_dict({"rules": [{"when": [["a", "~", 1]], "class": "X"}], "default": "Y"})
    with pytest.raises(ModelError):
        RuleRegionModel((), "Y", ClassSet(("X",)))


def test_knn_majority_and_tie_break():
    train = metric_ds({"x": [0.0, 1.0, 10.0, 11.0]}, ["B", "B", "A", "A"])
    model = KnnModel(train, k=2)
    assert model.class_set == ClassSet(("B", "A"))
    assert model.predict(metric_ds({"x": [0.4, 10.6]})).tolist() == ["B", "A"]
    # nearest two are one B and one A: the earlier class wins
    tie = KnnModel(metric_ds({"x": [0.0, 2.0]}, ["A", "B"]), k=2, class_set=ClassSet(("B", "A")))
    assert tie.predict(metric_ds({"x": [1.0]})).tolist() == ["B"]
    with pytest.raises(ModelError):
        KnnModel(train, k=5)


def test_knn_reproduces_training_labels_with_k1(iris):
    model = KnnModel(iris.select(IRIS_FEATURES), k=1)
    pred = model.predict(iris)
    assert set(pred) <= set(model.class_set)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.floats(-5, 5), st.floats(-5, 5)), min_size=1, max_size=30))
def test_builtin_models_label_within_class_set(iris, iris_tree, points):
    xs, ys = zip(*points)
    ds = metric_ds({"sepal_length": xs, "sepal_width": xs, "petal_length": xs, "petal_width": ys})
    knn = KnnModel(iris, k=3)
    for model in (iris_tree, knn):
        pred = model.predict(ds)
        assert len(pred) == ds.n and set(pred) <= set(model.class_set)
        assert np.array_equal(pred, model.predict(ds))
