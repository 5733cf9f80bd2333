import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsm.data import ClassSet, DataError, Dataset, FeatureKind, iris_path, load_csv, write_csv


def write(tmp_path, text, name="d.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_iris_shape(iris):
    assert iris.n == 150
    assert iris.p == 4
    assert all(k.is_metric for k in iris.kinds)
    assert iris.label_name == "species"
    assert iris.class_set() == ClassSet(("setosa", "versicolor", "virginica"))
    assert np.unique(iris.column("petal_width")).size == 22


def test_single_metric_column(tmp_path):
    ds = load_csv(write(tmp_path, "x\n1\n2\n3\n4\n5\n"))
    assert (ds.n, ds.p) == (5, 1)
    assert ds.kinds[0].is_metric
    assert ds.labels is None


def test_categorical_inference(tmp_path):
    ds = load_csv(write(tmp_path, "color,y\nred,1\nblue,2\nred,3\n"))
    kind = ds.kind("color")
    assert kind.is_categorical and kind.categories == ("red", "blue")
    assert ds.column("color").tolist() == [1, 2, 1]


def test_schema_override(tmp_path):
    path = write(tmp_path, "grade,y\n1,0.5\n2,0.7\n1,0.1\n")
    ds = load_csv(path, schema={"grade": "categorical"})
    assert ds.kind("grade").categories == ("1", "2")
    ds = load_csv(path, schema={"grade": ["2", "1", "3"]})
    assert ds.column("grade").tolist() == [2, 1, 2]


@pytest.mark.parametrize(
    "text, message",
    [
        ("", "empty"),
        ("a,b\n1,2\n3\n", "row 3"),
        ("a,b\n1,\n", "missing"),
        ("a\n", "no data"),
    ],
)
def test_malformed_files(tmp_path, text, message):
    with pytest.raises(DataError, match=message):
        load_csv(write(tmp_path, text))


def test_unknown_override_column(tmp_path):
    with pytest.raises(DataError, match="unknown column"):
        load_csv(write(tmp_path, "a\n1\n"), schema={"b": "metric"})


def test_metric_override_on_text(tmp_path):
    with pytest.raises(DataError, match="not a number"):
        load_csv(write(tmp_path, "a\nx\ny\n"), schema={"a": "metric"})


def test_crlf_accepted(tmp_path):
    path = tmp_path / "crlf.csv"
    path.write_bytes(b"a,b\r\n1,x\r\n2,y\r\n")
    ds = load_csv(path)
    assert ds.column("a").tolist() == [1.0, 2.0]


def test_iris_round_trip(iris, tmp_path):
    out = tmp_path / "iris.csv"
    write_csv(iris, out)
    assert load_csv(out, label="species") == iris
    assert out.read_text().splitlines()[0] == "sepal_length,sepal_width,petal_length,petal_width,species"


def test_unlabelled_dataset_has_no_label_column(tmp_path):
    ds = Dataset(("a",), (FeatureKind.metric(),), (np.array([1.5, 2.0]),))
    buf = io.StringIO()
    write_csv(ds, buf)
    assert buf.getvalue() == "a\n1.5\n2\n"


def test_categories_written_as_identifiers(tmp_path):
    ds = Dataset(("c",), (FeatureKind.categorical(["red", "blue"]),), (np.array([2, 1, 2]),))
    out = tmp_path / "c.csv"
    write_csv(ds, out)
    assert out.read_text() == "c\nblue\nred\nblue\n"
    assert load_csv(out, schema={"c": ["red", "blue"]}) == ds


def test_dataset_invariants():
    m = FeatureKind.metric()
    with pytest.raises(DataError, match="length"):
        Dataset(("a", "b"), (m, m), (np.ones(3), np.ones(2)))
    with pytest.raises(DataError, match="unique"):
        Dataset(("a", "a"), (m, m), (np.ones(2), np.ones(2)))
    with pytest.raises(DataError, match="out of range"):
        Dataset(("c",), (FeatureKind.categorical("xy"),), (np.array([1, 3]),))
    with pytest.raises(DataError, match="at least 2"):
        FeatureKind.categorical(["only"])


def test_label_is_not_a_feature(iris):
    with pytest.raises(DataError, match="label column"):
        iris.column("species")


def test_bundled_iris_file_exists():
    assert iris_path().is_file()


finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.tuples(finite, st.sampled_from(["u", "v", "w"]), st.sampled_from(["A", "B"])), min_size=1, max_size=20)
)
def test_round_trip_property(tmp_path_factory, rows):
    xs, cs, ys = zip(*rows)
    cats = sorted(set(cs)) if len(set(cs)) > 1 else ["u", "v", "w"]
    kind = FeatureKind.categorical(cats)
    ds = Dataset(
        ("x", "c"),
        (FeatureKind.metric(), kind),
        (np.array(xs), np.array([kind.index_of(c) for c in cs])),
        ys,
        "y",
    )
    out = tmp_path_factory.mktemp("rt") / "d.csv"
    write_csv(ds, out)
    back = load_csv(out, schema={"x": "metric", "c": kind}, label="y")
    assert back == ds
    assert all(col.size == ds.n for col in back.columns)
