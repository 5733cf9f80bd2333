"""Classifiers: the label-prediction contract and the built-in models."""
from __future__ import annotations

import json
import math
import operator
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .data import ClassSet, DataError, Dataset


class ModelError(ValueError):
    """Invalid model definition or prediction input."""


class Classifier:
    """Anything that maps the rows of a :class:`Dataset` to class labels.

    Subclasses set ``class_set`` and implement :meth:`predict`, returning one
    label from ``class_set`` per row as an object array.
    """

    class_set: ClassSet

    def predict(self, ds: Dataset) -> np.ndarray:
        raise NotImplementedError

    @property
    def concurrent_safe(self) -> bool:
        return True


def predict_argmax(probabilities: Sequence[float], classes: ClassSet | Sequence[str]) -> str:
    """Label of the most probable class; ties go to the earliest class."""
    p = np.asarray(probabilities, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ModelError("probability vector must be non-empty and one-dimensional")
    classes = tuple(classes)
    if p.size != len(classes):
        raise ModelError(f"{p.size} probabilities for {len(classes)} classes")
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise ModelError("probabilities must be finite and non-negative")
    if abs(p.sum() - 1.0) > 1e-9:
        raise ModelError(f"probabilities sum to {p.sum()!r}, not 1")
    # np.argmax returns the first maximal index
    return classes[int(np.argmax(p))]


# -- rule regions -----------------------------------------------------------

_OPS = {"<": operator.lt, "<=": operator.le, ">": operator.gt, ">=": operator.ge}


@dataclass(frozen=True)
class Condition:
    feature: str
    op: str
    threshold: float

    def __post_init__(self):
        if self.op not in _OPS:
            raise ModelError(f"unknown comparison {self.op!r}")
        if not math.isfinite(self.threshold):
            raise ModelError("thresholds must be finite")

    def holds(self, ds: Dataset) -> np.ndarray:
        return _OPS[self.op](ds.column(self.feature), self.threshold)


@dataclass(frozen=True)
class Rule:
    conditions: tuple[Condition, ...]
    label: str


@dataclass(frozen=True)
class RuleRegionModel(Classifier):
    """First matching rule wins; ``default_class`` covers the rest of the space."""

    rules: tuple[Rule, ...]
    default_class: str
    class_set: ClassSet = None

    def __post_init__(self):
        if self.class_set is None:
            labels = [r.label for r in self.rules] + [self.default_class]
            object.__setattr__(self, "class_set", ClassSet.from_labels(labels))
        for label in [r.label for r in self.rules] + [self.default_class]:
            if label not in self.class_set:
                raise ModelError(f"rule label {label!r} not in class set")

    def predict(self, ds: Dataset) -> np.ndarray:
        out = np.full(ds.n, self.default_class, dtype=object)
        done = np.zeros(ds.n, dtype=bool)
        for rule in self.rules:
            hit = ~done
            for cond in rule.conditions:
                hit &= cond.holds(ds)
            out[hit] = rule.label
            done |= hit
        return out

    def to_dict(self) -> dict:
        return {
            "classes": list(self.class_set),
            "rules": [
                {"when": [[c.feature, c.op, c.threshold] for c in r.conditions], "class": r.label}
                for r in self.rules
            ],
            "default": self.default_class,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "RuleRegionModel":
        try:
            rules = tuple(
                Rule(tuple(Condition(f, op, float(t)) for f, op, t in r["when"]), str(r["class"]))
                for r in obj["rules"]
            )
            classes = ClassSet(tuple(obj["classes"])) if "classes" in obj else None
            return cls(rules, str(obj["default"]), classes)
        except (KeyError, TypeError, ValueError) as err:
            raise ModelError(f"malformed rules document: {err}") from None

    @classmethod
    def load(cls, path) -> "RuleRegionModel":
        """Read a JSON rules file.

        Format: ``{"classes": [...], "rules": [{"when": [[feature, op, threshold], ...],
        "class": label}, ...], "default": label}``.
        """
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


# -- CART ------------------------------------------------------------------

@dataclass
class Node:
    counts: np.ndarray
    label: str
    feature: str | None = None
    threshold: float | None = None
    left: "Node | None" = None
    right: "Node | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None


def _gini(counts: np.ndarray) -> float:
    total = counts.sum()
    if total == 0:
        return 0.0
    share = counts / total
    return float(1.0 - np.dot(share, share))


@dataclass
class CartTree(Classifier):
    """Binary classification tree with axis-aligned splits (``value < threshold`` goes left)."""

    root: Node
    features: tuple[str, ...]
    class_set: ClassSet

    def predict(self, ds: Dataset) -> np.ndarray:
        out = np.empty(ds.n, dtype=object)
        self._route(self.root, ds, np.arange(ds.n), out)
        return out

    def _route(self, node: Node, ds: Dataset, rows: np.ndarray, out: np.ndarray) -> None:
        if node.is_leaf:
            out[rows] = node.label
            return
        go_left = ds.column(node.feature)[rows] < node.threshold
        self._route(node.left, ds, rows[go_left], out)
        self._route(node.right, ds, rows[~go_left], out)

    def splits(self) -> list[tuple[int, str, float]]:
        """``(depth, feature, threshold)`` in pre-order."""
        found = []

        def walk(node, depth):
            if not node.is_leaf:
                found.append((depth, node.feature, node.threshold))
                walk(node.left, depth + 1)
                walk(node.right, depth + 1)

        walk(self.root, 0)
        return found

    def leaves(self) -> list[Node]:
        found = []

        def walk(node):
            if node.is_leaf:
                found.append(node)
            else:
                walk(node.left)
                walk(node.right)

        walk(self.root)
        return found

    @property
    def depth(self) -> int:
        return 1 + max((d for d, _, _ in self.splits()), default=-1)

    def describe(self) -> str:
        lines = []

        def walk(node, indent):
            pad = "  " * indent
            if node.is_leaf:
                lines.append(f"{pad}-> {node.label} {node.counts.tolist()}")
                return
            lines.append(f"{pad}{node.feature} < {node.threshold:g}")
            walk(node.left, indent + 1)
            lines.append(f"{pad}{node.feature} >= {node.threshold:g}")
            walk(node.right, indent + 1)

        walk(self.root, 0)
        return "\n".join(lines)


def _best_split(x: np.ndarray, y: np.ndarray, k: int, min_bucket: int):
    """Best Gini split of one feature: ``(weighted child impurity, threshold)`` or None."""
    order = np.argsort(x, kind="stable")
    xs, ys = x[order], y[order]
    n = xs.size
    onehot = np.zeros((n, k))
    onehot[np.arange(n), ys] = 1.0
    left = np.cumsum(onehot, axis=0)[:-1]
    right = left[-1] + onehot[-1] - left if n > 1 else left
    n_left = np.arange(1, n)
    n_right = n - n_left
    valid = (xs[1:] > xs[:-1]) & (n_left >= min_bucket) & (n_right >= min_bucket)
    if not np.any(valid):
        return None
    gini_left = n_left - (left ** 2).sum(axis=1) / n_left
    gini_right = n_right - (right ** 2).sum(axis=1) / n_right
    score = np.where(valid, gini_left + gini_right, np.inf)
    i = int(np.argmin(score))
    return float(score[i]), float((xs[i] + xs[i + 1]) / 2.0)


def cart_fit(
    train: Dataset,
    features: Sequence[str] | None = None,
    min_split: int = 20,
    complexity: float = 0.01,
    max_depth: int = 30,
    min_bucket: int | None = None,
) -> CartTree:
    """Grow a CART tree greedily on Gini impurity.

    A node is split only if it holds at least ``min_split`` rows, both
    children keep ``min_bucket`` rows (default ``round(min_split / 3)``) and
    the split lowers the number of misclassified training rows by at least
    ``complexity`` times the root's misclassification count. Candidate
    thresholds are midpoints between consecutive distinct values; on equal
    impurity the earlier feature wins.
    """
    if train.labels is None:
        raise ModelError("training data needs labels")
    features = tuple(features) if features is not None else train.feature_names
    if not features:
        raise ModelError("at least one feature is required")
    if min_bucket is None:
        min_bucket = max(int(round(min_split / 3)), 1)
    classes = train.class_set()
    k = len(classes)
    y = np.array([classes.index(lab) for lab in train.labels], dtype=np.int64)
    cols = [train.column(f).astype(float) for f in features]

    def leaf(rows):
        counts = np.bincount(y[rows], minlength=k)
        return Node(counts, classes.classes[int(np.argmax(counts))])

    root_counts = np.bincount(y, minlength=k)
    root_risk = y.size - root_counts.max()

    def grow(rows, depth):
        node = leaf(rows)
        node_risk = rows.size - node.counts.max()
        if rows.size < min_split or depth >= max_depth or node_risk == 0:
            return node
        best = None
        for f, col in zip(features, cols):
            found = _best_split(col[rows], y[rows], k, min_bucket)
            if found is not None and (best is None or found[0] < best[0] - 1e-12):
                best = (found[0], f, found[1])
        if best is None:
            return node
        _, feat, thr = best
        mask = cols[features.index(feat)][rows] < thr
        l_rows, r_rows = rows[mask], rows[~mask]
        l_counts = np.bincount(y[l_rows], minlength=k)
        r_counts = np.bincount(y[r_rows], minlength=k)
        child_risk = (l_rows.size - l_counts.max()) + (r_rows.size - r_counts.max())
        if root_risk == 0 or (node_risk - child_risk) < complexity * root_risk:
            return node
        node.feature, node.threshold = feat, thr
        node.left = grow(l_rows, depth + 1)
        node.right = grow(r_rows, depth + 1)
        return node

    return CartTree(grow(np.arange(y.size), 0), features, classes)


# -- k nearest neighbours ----------------------------------------------------

@dataclass
class KnnModel(Classifier):
    """Majority vote among the ``k`` Euclidean-nearest training rows.

    Vote ties go to the earliest class in ``class_set``; distance ties to the
    earlier training row.
    """

    train: Dataset
    k: int = 5
    class_set: ClassSet = None
    _x: np.ndarray = field(init=False, repr=False)
    _y: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.train.labels is None:
            raise ModelError("training data needs labels")
        if not 1 <= self.k <= self.train.n:
            raise ModelError(f"k={self.k} must lie in [1, {self.train.n}]")
        if self.class_set is None:
            self.class_set = self.train.class_set()
        self._x = self.train.matrix()
        self._y = np.array([self.class_set.index(lab) for lab in self.train.labels])

    def predict(self, ds: Dataset) -> np.ndarray:
        x = ds.select(self.train.feature_names).matrix()
        d2 = ((x[:, None, :] - self._x[None, :, :]) ** 2).sum(axis=2)
        nearest = np.argsort(d2, axis=1, kind="stable")[:, : self.k]
        votes = np.zeros((ds.n, len(self.class_set)), dtype=np.int64)
        np.add.at(votes, (np.repeat(np.arange(ds.n), self.k), self._y[nearest].ravel()), 1)
        labels = np.asarray(self.class_set.classes, dtype=object)
        return labels[np.argmax(votes, axis=1)]


def select_features(ds: Dataset, names: Sequence[str]) -> Dataset:
    try:
        return ds.select(names)
    except DataError as err:
        raise ModelError(str(err)) from None
