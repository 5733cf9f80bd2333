"""Columnar datasets, feature metadata and CSV ingestion."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

METRIC = "metric"
CATEGORICAL = "categorical"


class DataError(ValueError):
    """Raised for malformed input data or schema violations."""


@dataclass(frozen=True)
class FeatureKind:
    """Metric feature, or categorical feature with an ordered category list."""

    tag: str = METRIC
    categories: tuple[str, ...] = ()

    def __post_init__(self):
        if self.tag == METRIC:
            if self.categories:
                raise DataError("metric features carry no categories")
        elif self.tag == CATEGORICAL:
            cats = tuple(str(c) for c in self.categories)
            if len(cats) < 2:
                raise DataError("a categorical feature needs at least 2 categories")
            if len(set(cats)) != len(cats):
                raise DataError(f"duplicate categories in {cats}")
            object.__setattr__(self, "categories", cats)
        else:
            raise DataError(f"unknown feature kind {self.tag!r}")

    @classmethod
    def metric(cls) -> "FeatureKind":
        return cls(METRIC)

    @classmethod
    def categorical(cls, categories: Sequence[str]) -> "FeatureKind":
        return cls(CATEGORICAL, tuple(categories))

    @property
    def is_metric(self) -> bool:
        return self.tag == METRIC

    @property
    def is_categorical(self) -> bool:
        return self.tag == CATEGORICAL

    def index_of(self, category: str) -> int:
        """1-based index of ``category``."""
        try:
            return self.categories.index(str(category)) + 1
        except ValueError:
            raise DataError(
                f"unknown category {category!r}; expected one of {list(self.categories)}"
            ) from None


@dataclass(frozen=True)
class ClassSet:
    """Ordered class identifiers. The order fixes migration-matrix rows/columns."""

    classes: tuple[str, ...]

    def __post_init__(self):
        classes = tuple(str(c) for c in self.classes)
        if len(classes) < 1:
            raise DataError("class set is empty")
        if len(set(classes)) != len(classes):
            raise DataError(f"duplicate class identifiers in {classes}")
        object.__setattr__(self, "classes", classes)

    def __len__(self) -> int:
        return len(self.classes)

    def __iter__(self):
        return iter(self.classes)

    def __contains__(self, item) -> bool:
        return item in self.classes

    def index(self, label: str) -> int:
        try:
            return self.classes.index(label)
        except ValueError:
            raise DataError(f"label {label!r} not in class set {list(self.classes)}") from None

    @classmethod
    def from_labels(cls, labels: Sequence[str]) -> "ClassSet":
        """Class set in first-appearance order."""
        return cls(tuple(dict.fromkeys(str(lab) for lab in labels)))


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable table of ``n`` observations on ``p`` features.

    Metric columns are float arrays; categorical columns hold 1-based
    category indices. ``labels`` is optional.
    """

    feature_names: tuple[str, ...]
    kinds: tuple[FeatureKind, ...]
    columns: tuple[np.ndarray, ...]
    labels: np.ndarray | None = None
    label_name: str = "label"
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        names = tuple(str(f) for f in self.feature_names)
        if len(set(names)) != len(names):
            raise DataError(f"feature names are not unique: {names}")
        if len(names) != len(self.kinds) or len(names) != len(self.columns):
            raise DataError("feature_names, kinds and columns differ in length")
        cols = []
        n = None
        for name, kind, col in zip(names, self.kinds, self.columns):
            if kind.is_metric:
                arr = np.array(col, dtype=float)
                if not np.all(np.isfinite(arr)):
                    raise DataError(f"column {name!r} contains non-finite values")
            else:
                arr = np.array(col, dtype=np.int64)
                if arr.size and (arr.min() < 1 or arr.max() > len(kind.categories)):
                    raise DataError(f"column {name!r} has a category index out of range")
            if arr.ndim != 1:
                raise DataError(f"column {name!r} is not one-dimensional")
            if n is None:
                n = arr.size
            elif arr.size != n:
                raise DataError(f"column {name!r} has length {arr.size}, expected {n}")
            arr.setflags(write=False)
            cols.append(arr)
        labels = self.labels
        if labels is not None:
            labels = np.array([str(lab) for lab in labels], dtype=object)
            if n is not None and labels.size != n:
                raise DataError(f"{labels.size} labels for {n} observations")
            if n is None:
                n = labels.size
            labels.setflags(write=False)
        if not n:
            raise DataError("dataset has no observations")
        if self.label_name in names and labels is not None:
            raise DataError(f"label column {self.label_name!r} clashes with a feature")
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "kinds", tuple(self.kinds))
        object.__setattr__(self, "columns", tuple(cols))
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "_index", {name: i for i, name in enumerate(names)})

    @property
    def n(self) -> int:
        if self.columns:
            return int(self.columns[0].size)
        return int(self.labels.size)

    @property
    def p(self) -> int:
        return len(self.feature_names)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            if name == self.label_name and self.labels is not None:
                raise DataError(f"{name!r} is the label column, not a feature") from None
            raise DataError(f"unknown feature {name!r}") from None

    def column(self, name: str) -> np.ndarray:
        return self.columns[self.index(name)]

    def kind(self, name: str) -> FeatureKind:
        return self.kinds[self.index(name)]

    def with_columns(self, replacements: Mapping[str, np.ndarray]) -> "Dataset":
        """Copy with some columns replaced; all other columns are shared as-is."""
        cols = list(self.columns)
        for name, col in replacements.items():
            cols[self.index(name)] = col
        return Dataset(self.feature_names, self.kinds, tuple(cols), self.labels, self.label_name)

    def select(self, names: Sequence[str]) -> "Dataset":
        idx = [self.index(nm) for nm in names]
        return Dataset(
            tuple(self.feature_names[i] for i in idx),
            tuple(self.kinds[i] for i in idx),
            tuple(self.columns[i] for i in idx),
            self.labels,
            self.label_name,
        )

    def take(self, rows) -> "Dataset":
        rows = np.asarray(rows)
        labels = None if self.labels is None else self.labels[rows]
        return Dataset(
            self.feature_names, self.kinds, tuple(c[rows] for c in self.columns), labels, self.label_name
        )

    def without_labels(self) -> "Dataset":
        return Dataset(self.feature_names, self.kinds, self.columns, None, self.label_name)

    def matrix(self) -> np.ndarray:
        """``n x p`` float matrix; categorical columns contribute their indices."""
        return np.column_stack([c.astype(float) for c in self.columns])

    def cell_text(self, j: int, i: int) -> str:
        kind = self.kinds[j]
        value = self.columns[j][i]
        if kind.is_metric:
            return format_float(value)
        return kind.categories[int(value) - 1]

    def row_texts(self) -> list[list[str]]:
        return [[self.cell_text(j, i) for j in range(self.p)] for i in range(self.n)]

    def class_set(self) -> ClassSet:
        if self.labels is None:
            raise DataError("dataset has no labels")
        return ClassSet.from_labels(self.labels)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        if self.feature_names != other.feature_names or self.kinds != other.kinds:
            return False
        if not all(np.array_equal(a, b) for a, b in zip(self.columns, other.columns)):
            return False
        if (self.labels is None) != (other.labels is None):
            return False
        return self.labels is None or bool(np.array_equal(self.labels, other.labels))

    __hash__ = None


def format_float(value: float) -> str:
    """Shortest text that round-trips ``value``; integral floats lose the ``.0``."""
    value = float(value)
    if value.is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def _parse_float(text: str) -> float | None:
    try:
        value = float(text)
    except ValueError:
        return None
    return value if math.isfinite(value) else None


def _coerce_kind(spec) -> FeatureKind:
    if isinstance(spec, FeatureKind):
        return spec
    if spec == METRIC:
        return FeatureKind.metric()
    if isinstance(spec, (list, tuple)):
        return FeatureKind.categorical(spec)
    raise DataError(f"cannot interpret schema entry {spec!r}")


def read_table(path) -> tuple[list[str], list[list[str]]]:
    """Header and rows of a rectangular CSV file, rejecting ragged rows and empty cells."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if not header or header == [""]:
            raise DataError(f"{path}: empty header")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(
                    f"{path}: row {lineno} has {len(row)} fields, header has {len(header)}"
                )
            row = [cell.strip() for cell in row]
            for name, cell in zip(header, row):
                if cell == "" or cell.upper() in ("NA", "NAN"):
                    raise DataError(f"{path}: missing value in column {name!r} at row {lineno}")
            rows.append(row)
    if not rows:
        raise DataError(f"{path}: no data rows")
    return header, rows


def load_csv(path, schema: Mapping[str, object] | None = None, label: str | None = None) -> Dataset:
    """Read a CSV file into a :class:`Dataset`.

    Columns whose every cell parses as a finite float are metric; all others
    are categorical with categories in first-appearance order. ``schema``
    overrides the inferred kind per column: ``"metric"``, ``"categorical"``,
    an explicit category list, or a :class:`FeatureKind`. ``label`` names the
    column holding class labels, which is then not a feature.
    """
    header, rows = read_table(path)
    if len(set(header)) != len(header):
        raise DataError(f"{path}: duplicate column names")
    schema = dict(schema or {})
    unknown = [name for name in schema if name not in header]
    if unknown:
        raise DataError(f"schema names unknown column(s) {unknown}")
    if label is not None and label not in header:
        raise DataError(f"label column {label!r} not found in {path}")

    names, kinds, columns = [], [], []
    labels = None
    for j, name in enumerate(header):
        cells = [row[j] for row in rows]
        if name == label:
            labels = cells
            continue
        override = schema.get(name)
        floats = [_parse_float(c) for c in cells]
        numeric = all(v is not None for v in floats)
        if override is None:
            override = METRIC if numeric else CATEGORICAL
        if override == METRIC or (isinstance(override, FeatureKind) and override.is_metric):
            if not numeric:
                bad = next(i for i, v in enumerate(floats) if v is None)
                raise DataError(f"column {name!r} row {bad + 2}: {cells[bad]!r} is not a number")
            kind = FeatureKind.metric()
            col = np.array(floats, dtype=float)
        else:
            if override == CATEGORICAL:
                kind = FeatureKind.categorical(list(dict.fromkeys(cells)))
            else:
                kind = _coerce_kind(override)
            col = np.array([kind.index_of(c) for c in cells], dtype=np.int64)
        names.append(name)
        kinds.append(kind)
        columns.append(col)
    return Dataset(tuple(names), tuple(kinds), tuple(columns), labels, label or "label")


def write_csv(ds: Dataset, path) -> None:
    """Write ``ds`` as CSV to a path or text stream; categorical cells as identifiers."""
    header = list(ds.feature_names)
    if ds.labels is not None:
        header.append(ds.label_name)
    if hasattr(path, "write"):
        _write_rows(ds, header, path)
        return
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        _write_rows(ds, header, fh)


def _write_rows(ds: Dataset, header: list[str], fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(header)
    for i, row in enumerate(ds.row_texts()):
        if ds.labels is not None:
            row.append(ds.labels[i])
        writer.writerow(row)


def iris_path() -> Path:
    return Path(str(resources.files("qsm") / "datasets" / "iris.csv"))


def load_iris() -> Dataset:
    """The bundled 150-row iris data with ``species`` as label column."""
    return load_csv(iris_path(), label="species")
