"""Quantile shift runs: manipulate a dataset, predict before/after, count migrations."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .data import ClassSet, DataError, Dataset, read_table
from .model import Classifier
from .shift import (
    CategorySwitch,
    RankShift,
    ShiftSpec,
    shift_negative,
    shift_positive,
    shift_ranked,
    switch_category,
)


class QSMError(RuntimeError):
    """A quantile shift run failed; ``repetition`` tells which pass, if any."""

    def __init__(self, message: str, repetition: int | None = None):
        super().__init__(message)
        self.repetition = repetition


@dataclass(frozen=True)
class ShiftAllTies:
    """Single pass; tied observations move together."""

    def describe(self) -> str:
        return "all"


@dataclass(frozen=True)
class RepeatRandom:
    """``reps`` passes, each breaking ties by a fresh random order, summed."""

    reps: int
    seed: int

    def __post_init__(self):
        if int(self.reps) < 1:
            raise ValueError("reps must be >= 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    def rng(self, rep: int) -> np.random.Generator:
        """Independent PCG64 stream for repetition ``rep``."""
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(self.seed), spawn_key=(rep,))))

    def describe(self) -> str:
        return f"random:{self.reps}"


TieStrategy = ShiftAllTies | RepeatRandom


@dataclass(frozen=True, eq=False)
class MigrationMatrix:
    """Counts of (class before, class after); rows are "before"."""

    class_set: ClassSet
    counts: np.ndarray
    repetitions: int = 1
    seed: int | None = None
    spec: dict = field(default_factory=dict)
    strategy: str = "all"

    def __post_init__(self):
        counts = np.array(self.counts, dtype=np.int64)
        k = len(self.class_set)
        if counts.shape != (k, k):
            raise DataError(f"counts must be {k}x{k}, got {counts.shape}")
        if np.any(counts < 0):
            raise DataError("counts must be non-negative")
        if self.repetitions < 1:
            raise DataError("repetitions must be >= 1")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def classes(self) -> tuple[str, ...]:
        return self.class_set.classes

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def trace(self) -> int:
        return int(np.trace(self.counts))

    def row_sums(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    def col_sums(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    def __getitem__(self, pair: tuple[str, str]) -> int:
        a, b = pair
        return int(self.counts[self.class_set.index(a), self.class_set.index(b)])

    def __eq__(self, other) -> bool:
        if not isinstance(other, MigrationMatrix):
            return NotImplemented
        return (
            self.class_set == other.class_set
            and self.repetitions == other.repetitions
            and np.array_equal(self.counts, other.counts)
        )

    __hash__ = None

    def to_dict(self) -> dict:
        return {
            "classes": list(self.classes),
            "counts": self.counts.tolist(),
            "repetitions": self.repetitions,
            "seed": self.seed,
            "strategy": self.strategy,
            "shift": dict(self.spec),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def from_dict(cls, obj: dict) -> "MigrationMatrix":
        return cls(
            ClassSet(tuple(obj["classes"])),
            np.array(obj["counts"]),
            int(obj.get("repetitions", 1)),
            obj.get("seed"),
            dict(obj.get("shift", {})),
            obj.get("strategy", "all"),
        )

    @classmethod
    def load(cls, path) -> "MigrationMatrix":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def format_table(self) -> str:
        """Aligned text table: rows before the shift, columns after."""
        names = list(self.classes)
        cells = [[str(int(v)) for v in row] for row in self.counts]
        w0 = max(len("before \\ after"), *(len(s) for s in names))
        widths = [max(len(names[j]), *(len(r[j]) for r in cells)) for j in range(len(names))]
        lines = [
            "before \\ after".ljust(w0) + " | " + "  ".join(s.rjust(w) for s, w in zip(names, widths))
        ]
        lines.append("-" * len(lines[0]))
        for name, row in zip(names, cells):
            lines.append(name.ljust(w0) + " | " + "  ".join(v.rjust(w) for v, w in zip(row, widths)))
        return "\n".join(lines)


def count_migrations(before: Sequence[str], after: Sequence[str], class_set: ClassSet) -> np.ndarray:
    if len(before) != len(after):
        raise DataError(f"{len(before)} labels before but {len(after)} after")
    k = len(class_set)
    counts = np.zeros((k, k), dtype=np.int64)
    lookup = {c: i for i, c in enumerate(class_set)}
    for i, (a, b) in enumerate(zip(before, after)):
        try:
            counts[lookup[a], lookup[b]] += 1
        except KeyError:
            bad = a if a not in lookup else b
            raise DataError(f"row {i}: label {bad!r} not in class set {list(class_set)}") from None
    return counts


def _tie_order(values: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    return np.lexsort((rng.random(values.size), values))


def manipulate(ds: Dataset, spec: ShiftSpec, rng: np.random.Generator | None = None) -> Dataset:
    """Apply ``spec`` to ``ds``; unlisted features are returned untouched.

    Without ``rng`` ties move together (shift-all-ties). With ``rng`` each
    shifted metric feature gets a random strict order among equal values and
    observations move ``v`` positions along it.
    """
    spec.validate(ds)
    new = {}
    for name, entry in spec.entries.items():
        col = ds.column(name)
        if isinstance(entry, CategorySwitch):
            new[name] = switch_category(col, ds.kind(name), entry.source, entry.target)
        elif entry.v == 0:
            continue
        elif rng is not None:
            new[name] = shift_ranked(col, entry.v, _tie_order(col, rng))
        elif entry.v > 0:
            new[name] = shift_positive(col, entry.v)
        else:
            new[name] = shift_negative(col, -entry.v)
    return ds.with_columns(new) if new else ds


def _predict(clf: Classifier, ds: Dataset, class_set: ClassSet, repetition=None) -> np.ndarray:
    try:
        labels = np.asarray(clf.predict(ds), dtype=object)
    except Exception as err:
        where = "" if repetition is None else f" in repetition {repetition}"
        raise QSMError(f"classifier failed{where}: {err}", repetition) from err
    if labels.shape != (ds.n,):
        raise QSMError(f"classifier returned {labels.size} labels for {ds.n} rows", repetition)
    return labels


def run_qsm(
    ds: Dataset,
    spec: ShiftSpec,
    clf: Classifier,
    strategy: TieStrategy | None = None,
) -> MigrationMatrix:
    """Migration matrix of ``clf``'s predictions before versus after ``spec``.

    Under :class:`RepeatRandom` the per-repetition matrices are summed and
    ``repetitions`` records how many there were.
    """
    strategy = strategy or ShiftAllTies()
    spec.validate(ds)
    class_set = clf.class_set
    features = ds.without_labels()
    before = _predict(clf, features, class_set)
    if isinstance(strategy, ShiftAllTies):
        after = _predict(clf, manipulate(features, spec), class_set)
        counts = count_migrations(before, after, class_set)
        return MigrationMatrix(class_set, counts, 1, None, spec.to_dict(), strategy.describe())

    counts = np.zeros((len(class_set), len(class_set)), dtype=np.int64)
    for rep in range(strategy.reps):
        shifted = manipulate(features, spec, strategy.rng(rep))
        after = _predict(clf, shifted, class_set, rep)
        counts += count_migrations(before, after, class_set)
    return MigrationMatrix(
        class_set, counts, strategy.reps, strategy.seed, spec.to_dict(), strategy.describe()
    )


def read_labels(path) -> list[str]:
    """Labels from a one-column CSV file with header."""
    header, rows = read_table(path)
    if len(header) != 1:
        raise DataError(f"{path}: expected a single label column, found {len(header)} columns")
    return [row[0] for row in rows]


def migrate_from_files(before, after, classes: ClassSet | Sequence[str]) -> MigrationMatrix:
    """Migration matrix from two paired label files (row ``i`` before, row ``i`` after)."""
    class_set = classes if isinstance(classes, ClassSet) else ClassSet(tuple(classes))
    old, new = read_labels(before), read_labels(after)
    if len(old) != len(new):
        raise DataError(f"row count mismatch: {len(old)} rows in {before}, {len(new)} in {after}")
    return MigrationMatrix(class_set, count_migrations(old, new, class_set))


# -- reporting ---------------------------------------------------------------

TRANSITIVITY_WARNING = (
    "Do not chain findings: if B lies next to A and C lies next to B along this "
    "shift, nothing follows about A and C."
)
ABSENCE_CAVEAT = (
    "A zero cell only means no migration was observed for this shift size; the "
    "classes may still border each other (shift too small, or so large that a "
    "class in between was jumped over)."
)
EXTRAPOLATION_WARNING = (
    "Shifted observations can combine feature values never seen together in the "
    "training data; migrations there describe model extrapolation. Check the "
    "opposite shift direction before treating a neighborhood as practical."
)
CAUSALITY_NOTE = "Migrations describe the fitted model only and carry no causal meaning."
CAVEATS = (TRANSITIVITY_WARNING, ABSENCE_CAVEAT, EXTRAPOLATION_WARNING, CAUSALITY_NOTE)


@dataclass(frozen=True)
class Finding:
    source: str
    target: str
    count: int

    def sentence(self) -> str:
        return (
            f"an area of {self.target} is modeled in the direction of the manipulation "
            f"next to an area of {self.source} ({self.source} -> {self.target}: {self.count})"
        )


@dataclass(frozen=True)
class NeighborhoodReport:
    findings: tuple[Finding, ...]
    not_found: tuple[tuple[str, str], ...]
    caveats: tuple[str, ...] = CAVEATS

    def text(self) -> str:
        lines = ["Neighborhoods found:"]
        lines += [f"  - {f.sentence()}" for f in self.findings] or ["  (none)"]
        if self.not_found:
            lines.append("Not found (may still exist):")
            lines += [f"  - {a} -> {b}" for a, b in self.not_found]
        lines.append("Caveats:")
        lines += [f"  * {c}" for c in self.caveats]
        return "\n".join(lines) + "\n"


def neighborhood_report(m: MigrationMatrix) -> NeighborhoodReport:
    """One finding per nonzero off-diagonal cell, in class order."""
    findings, missing = [], []
    for i, a in enumerate(m.classes):
        for j, b in enumerate(m.classes):
            if i == j:
                continue
            if m.counts[i, j] > 0:
                findings.append(Finding(a, b, int(m.counts[i, j])))
            else:
                missing.append((a, b))
    return NeighborhoodReport(tuple(findings), tuple(missing))
