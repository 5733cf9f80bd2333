"""Empirical CDFs and quantile-shift manipulations of single feature columns.

Shift sizes are carried as integer rank steps ``v``; the quantile shift they
stand for is ``q = v / (n + 1)``. With that choice the comparison
``F(x) + q >= alpha`` reduces to integer counts, so no floating-point sum of
ecdf values is ever formed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Union

import numpy as np

from .data import DataError, FeatureKind


class ShiftError(ValueError):
    """Invalid shift size, category or shift specification."""


@dataclass(frozen=True, eq=False)
class Ecdf:
    """Empirical CDF of one metric sample (duplicates retained)."""

    sorted_values: np.ndarray
    n: int = field(init=False)

    def __post_init__(self):
        values = np.sort(np.asarray(self.sorted_values, dtype=float))
        if values.ndim != 1 or values.size == 0:
            raise ShiftError("ecdf needs a non-empty one-dimensional sample")
        if not np.all(np.isfinite(values)):
            raise ShiftError("ecdf sample contains non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "sorted_values", values)
        object.__setattr__(self, "n", int(values.size))

    def count(self, x) -> np.ndarray | int:
        """Number of observations ``<= x`` (vectorised)."""
        c = np.searchsorted(self.sorted_values, x, side="right")
        return int(c) if np.ndim(c) == 0 else c

    def eval(self, x) -> Fraction:
        """``F(x)`` as an exact fraction ``count / n``."""
        return Fraction(int(self.count(x)), self.n)

    def __call__(self, x):
        return np.asarray(self.count(x)) / self.n

    def quantile(self, alpha) -> float:
        """``inf{x : F(x) >= alpha}`` over the observed values.

        ``alpha`` may be a float or a :class:`~fractions.Fraction`; the
        comparison is exact either way.
        """
        a = Fraction(alpha)
        if a < 0 or a > 1:
            raise ShiftError(f"alpha={alpha} outside [0, 1]")
        k = max(math.ceil(a * self.n), 1)
        return float(self.sorted_values[k - 1])


def ecdf_build(column) -> Ecdf:
    return Ecdf(np.asarray(column, dtype=float))


def ecdf_quantile(e: Ecdf, alpha) -> float:
    return e.quantile(alpha)


def _check_steps(v) -> int:
    if isinstance(v, (bool, np.bool_)) or int(v) != v:
        raise ShiftError(f"rank steps must be an integer, got {v!r}")
    v = int(v)
    if v < 1:
        raise ShiftError(f"rank steps must be >= 1, got {v}")
    return v


def shift_positive(column, v: int) -> np.ndarray:
    """Raise every value by ``v`` rank steps along the column's own ecdf.

    Equivalent to ``F^{-1}(min(F(x) + v/(n+1), 1))``: an observation with
    ``c`` values at or below it lands on the ``min(c + v, n)``-th order
    statistic.
    """
    v = _check_steps(v)
    x = np.asarray(column, dtype=float)
    s = np.sort(x)
    n = s.size
    c = np.searchsorted(s, x, side="right")
    return s[np.minimum(c + v, n) - 1]


def shift_negative(column, v: int) -> np.ndarray:
    """Lower every value by ``v`` rank steps, the counterpart of :func:`shift_positive`.

    Each ``x`` maps to the smallest observed ``z`` whose positive shift
    reaches at least ``x``. Since the positive image is nondecreasing in
    sorted order, one binary search per element suffices.
    """
    v = _check_steps(v)
    x = np.asarray(column, dtype=float)
    s = np.sort(x)
    n = s.size
    image = s[np.minimum(np.searchsorted(s, s, side="right") + v, n) - 1]
    return s[np.searchsorted(image, x, side="left")]


def shift_ranked(column, v: int, order: np.ndarray) -> np.ndarray:
    """Shift by ``v`` positions along a strict total ``order`` of the observations.

    ``order`` is a permutation listing observation indices from smallest to
    largest (ties already broken). Positive ``v`` moves up, negative down,
    saturating at both ends.
    """
    x = np.asarray(column, dtype=float)
    n = x.size
    order = np.asarray(order)
    pos = np.empty(n, dtype=np.int64)
    pos[order] = np.arange(n)
    target = np.clip(pos + int(v), 0, n - 1)
    return x[order][target]


def switch_category(column, kind: FeatureKind, source, target) -> np.ndarray:
    """Move every cell in category ``source`` to ``target``; others unchanged.

    Categories may be given as identifiers or 1-based indices.
    """
    if not kind.is_categorical:
        raise ShiftError("category switches apply to categorical features only")
    r = _category_index(kind, source)
    s = _category_index(kind, target)
    if r == s:
        raise ShiftError(f"category switch {source!r} -> {target!r} is a no-op")
    col = np.asarray(column, dtype=np.int64)
    return np.where(col == r, s, col)


def _category_index(kind: FeatureKind, category) -> int:
    if isinstance(category, (int, np.integer)) and not isinstance(category, bool):
        if not 1 <= category <= len(kind.categories):
            raise ShiftError(f"category index {category} out of range")
        return int(category)
    try:
        return kind.index_of(category)
    except DataError as err:
        raise ShiftError(str(err)) from None


def steps_from_q(q, n: int, tol: float = 1e-9) -> int:
    """Convert a quantile shift size to signed integer rank steps.

    ``q`` must equal ``v/(n+1)`` within ``tol`` rank steps. ``v/n`` is also
    accepted: both select the same order statistic.
    """
    q = Fraction(q) if not isinstance(q, Fraction) else q
    if abs(q) > 1:
        raise ShiftError(f"quantile shift {q} outside [-1, 1]")
    for denom in (n + 1, n):
        exact = q * denom
        v = round(exact)
        if abs(exact - v) <= tol:
            return int(v)
    raise ShiftError(
        f"quantile shift {float(q)!r} is not of the form v/(n+1) or v/n with n={n}; use integer rank steps"
    )


@dataclass(frozen=True)
class RankShift:
    """Signed number of rank steps for a metric feature (0 leaves it unchanged)."""

    v: int

    def __post_init__(self):
        if isinstance(self.v, bool) or int(self.v) != self.v:
            raise ShiftError(f"rank steps must be an integer, got {self.v!r}")
        object.__setattr__(self, "v", int(self.v))

    def q(self, n: int) -> Fraction:
        return Fraction(self.v, n + 1)

    def __str__(self) -> str:
        return f"{self.v:+d}"


@dataclass(frozen=True)
class CategorySwitch:
    """Move a categorical feature from category ``source`` to ``target``."""

    source: str
    target: str

    def __post_init__(self):
        if str(self.source) == str(self.target):
            raise ShiftError("category switch needs two different categories")
        object.__setattr__(self, "source", str(self.source))
        object.__setattr__(self, "target", str(self.target))

    def __str__(self) -> str:
        return f"{self.source}->{self.target}"


ShiftEntry = Union[RankShift, CategorySwitch]


@dataclass(frozen=True)
class ShiftSpec:
    """Per-feature shifts; features not listed stay untouched."""

    entries: Mapping[str, ShiftEntry] = field(default_factory=dict)

    def __post_init__(self):
        entries = {}
        for name, entry in dict(self.entries).items():
            if isinstance(entry, (int, np.integer)) and not isinstance(entry, bool):
                entry = RankShift(int(entry))
            if not isinstance(entry, (RankShift, CategorySwitch)):
                raise ShiftError(f"bad shift entry for {name!r}: {entry!r}")
            entries[str(name)] = entry
        object.__setattr__(self, "entries", entries)

    @classmethod
    def of(cls, **entries) -> "ShiftSpec":
        return cls(entries)

    @property
    def features(self) -> tuple[str, ...]:
        return tuple(self.entries)

    def validate(self, ds) -> None:
        """Check every entry against the dataset's feature kinds."""
        for name, entry in self.entries.items():
            kind = ds.kind(name)
            if isinstance(entry, RankShift):
                if not kind.is_metric:
                    raise ShiftError(f"rank shift on categorical feature {name!r}")
                if abs(entry.v) > ds.n:
                    raise ShiftError(f"|v|={abs(entry.v)} exceeds n={ds.n} for {name!r}")
            else:
                if not kind.is_categorical:
                    raise ShiftError(f"category switch on metric feature {name!r}")
                for cat in (entry.source, entry.target):
                    _category_index(kind, cat)

    def to_dict(self) -> dict[str, str]:
        return {name: str(entry) for name, entry in self.entries.items()}

    def __str__(self) -> str:
        return ", ".join(f"{k}={v}" for k, v in self.to_dict().items()) or "(none)"


def parse_shift_entry(text: str, n: int | None = None) -> tuple[str, ShiftEntry]:
    """Parse ``feature=+3``, ``feature=-2/151``, ``feature=0.02`` or ``feature=r->s``.

    Fractions and decimals need ``n`` and must convert exactly to rank steps.
    """
    if "=" not in text:
        raise ShiftError(f"shift {text!r} must look like feature=+v or feature=r->s")
    name, _, value = text.partition("=")
    name, value = name.strip(), value.strip()
    if not name or not value:
        raise ShiftError(f"shift {text!r} must look like feature=+v or feature=r->s")
    if "->" in value:
        source, _, target = value.partition("->")
        return name, CategorySwitch(source.strip(), target.strip())
    try:
        return name, RankShift(int(value))
    except ValueError:
        pass
    try:
        q = Fraction(value)
    except (ValueError, ZeroDivisionError):
        raise ShiftError(f"cannot parse shift size {value!r}") from None
    if n is None:
        raise ShiftError(f"fractional shift {value!r} needs the sample size")
    return name, RankShift(steps_from_q(q, n))
