"""Worked examples: datasets, reference models and the shifts that go with them."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import RepeatRandom, ShiftAllTies, TieStrategy
from .data import ClassSet, Dataset, FeatureKind, load_iris
from .model import CartTree, Classifier, Condition, Rule, RuleRegionModel, cart_fit
from .shift import RankShift, ShiftSpec

# medical regions: x1 < MED_X1 -> medium; otherwise split on x2
MED_X1 = 0.237
MED_X2_LOW = 0.28
MED_X2_HIGH = 0.72
MEDICAL_CLASSES = ClassSet(("high pain", "medium pain", "no pain"))

IRIS_FEATURES = ("petal_length", "petal_width")
IRIS_SHIFT_ALL_TIES = np.array([[50, 0, 0], [0, 48, 6], [0, 0, 46]])
# published 10-repetition random-tie totals for v=3 and v=6
IRIS_RANDOM_TOTALS = {
    3: np.array([[500, 0, 0], [0, 510, 30], [0, 0, 460]]),
    6: np.array([[500, 0, 0], [0, 480, 60], [0, 0, 460]]),
}
TRANSITIVITY_MATRIX = np.array([[1, 1, 0], [0, 5, 1], [0, 0, 2]])
TWOCLASS_MATRIX = np.array([[10, 0], [1, 9]])


def _metric_dataset(columns: dict, labels=None, label_name="label") -> Dataset:
    return Dataset(
        tuple(columns),
        tuple(FeatureKind.metric() for _ in columns),
        tuple(np.asarray(c, dtype=float) for c in columns.values()),
        labels,
        label_name,
    )


def medical_model() -> RuleRegionModel:
    return RuleRegionModel(
        (
            Rule((Condition("x1", "<", MED_X1),), "medium pain"),
            Rule((Condition("x2", "<", MED_X2_LOW),), "no pain"),
            Rule((Condition("x2", "<", MED_X2_HIGH),), "medium pain"),
        ),
        "high pain",
        MEDICAL_CLASSES,
    )


def make_medical(n: int = 2500, seed: int = 0) -> tuple[Dataset, RuleRegionModel]:
    """Two features on (0, 1) and a three-level pain model.

    Each feature is drawn on a jittered grid (one point per ``1/n`` stratum,
    randomly paired), so a shift of ``v`` rank steps moves a value by about
    ``v/n``.
    """
    if n < 100:
        raise ValueError("medical fixture needs n >= 100")
    rng = np.random.default_rng(seed)
    x1 = (rng.permutation(n) + rng.random(n)) / n
    x2 = (rng.permutation(n) + rng.random(n)) / n
    return _metric_dataset({"x1": x1, "x2": x2}), medical_model()


def medical_specs(n: int = 2500) -> dict[str, ShiftSpec]:
    small = round(0.1004 * n)  # 251 at n=2500
    large = round(0.3004 * n)  # 751 at n=2500
    return {
        "raise_x1": ShiftSpec({"x1": RankShift(small)}),
        "raise_x1_lower_x2": ShiftSpec({"x1": RankShift(large), "x2": RankShift(-large)}),
    }


def make_transitivity() -> tuple[Dataset, RuleRegionModel]:
    """Ten points with distinct ``x_l`` whose +1 step reproduces the A->B, B->C pattern.

    C occupies low ``x_l``/low ``x_m``, A high ``x_l``/high ``x_m``, B the rest.
    """
    x_l = [1.0, 2.5, 3.0, 3.5, 5.0, 6.5, 7.0, 8.5, 9.0, 9.5]
    x_m = [1.0, 2.0, 1.0, 5.0, 2.0, 8.0, 9.0, 5.0, 3.0, 8.0]
    model = RuleRegionModel(
        (
            Rule((Condition("x_l", ">=", 2.0), Condition("x_l", "<", 4.0), Condition("x_m", "<", 3.0)), "C"),
            Rule((Condition("x_l", ">=", 6.0), Condition("x_l", "<", 8.0), Condition("x_m", ">=", 7.0)), "A"),
        ),
        "B",
        ClassSet(("A", "B", "C")),
    )
    return _metric_dataset({"x_l": x_l, "x_m": x_m}), model


def make_twoclass() -> tuple[Dataset, RuleRegionModel]:
    """Twenty points where a +1 step on ``x1`` sends exactly one B to A."""
    x1 = np.arange(1, 21, dtype=float)
    group = (x1 % 2 == 0).astype(float)
    model = RuleRegionModel(
        (Rule((Condition("group", ">=", 0.5),), "A"), Rule((Condition("x1", ">=", 19.5),), "A")),
        "B",
        ClassSet(("A", "B")),
    )
    return _metric_dataset({"x1": x1, "group": group}), model


def make_tievector() -> np.ndarray:
    """``[x1, x2, x2, x3, x4, x4, x5]`` instantiated as ``[1, 2, 2, 3, 4, 4, 5]``."""
    return np.array([1, 2, 2, 3, 4, 4, 5], dtype=float)


def make_iris_pipeline() -> tuple[Dataset, CartTree, ShiftSpec, ShiftSpec]:
    """Iris, a CART tree on the petal features, and +3 / +6 steps on petal width."""
    ds = load_iris()
    tree = cart_fit(ds, IRIS_FEATURES)
    return (
        ds,
        tree,
        ShiftSpec({"petal_width": RankShift(3)}),
        ShiftSpec({"petal_width": RankShift(6)}),
    )


@dataclass
class Scenario:
    title: str
    spec: ShiftSpec
    strategy: TieStrategy = field(default_factory=ShiftAllTies)


@dataclass
class Fixture:
    name: str
    dataset: Dataset
    model: Classifier
    scenarios: list[Scenario]


FIXTURE_NAMES = ("medical", "transitivity", "twoclass", "iris", "tievector")


def get_fixture(name: str, seed: int = 0) -> Fixture:
    """Dataset, model and canonical shifts of a named example (not ``tievector``)."""
    if name == "medical":
        ds, model = make_medical(seed=seed)
        specs = medical_specs(ds.n)
        return Fixture(name, ds, model, [
            Scenario("raise x1 by 251 rank steps", specs["raise_x1"]),
            Scenario("raise x1 and lower x2 by 751 rank steps", specs["raise_x1_lower_x2"]),
        ])
    if name == "transitivity":
        ds, model = make_transitivity()
        return Fixture(name, ds, model, [Scenario("raise x_l by 1 rank step", ShiftSpec({"x_l": RankShift(1)}))])
    if name == "twoclass":
        ds, model = make_twoclass()
        return Fixture(name, ds, model, [Scenario("raise x1 by 1 rank step", ShiftSpec({"x1": RankShift(1)}))])
    if name == "iris":
        ds, tree, s3, s6 = make_iris_pipeline()
        return Fixture(name, ds, tree, [
            Scenario("petal_width +3, shift all ties", s3),
            Scenario("petal_width +6, shift all ties", s6),
            Scenario("petal_width +3, 10 random tie orders", s3, RepeatRandom(10, seed)),
            Scenario("petal_width +6, 10 random tie orders", s6, RepeatRandom(10, seed)),
        ])
    raise KeyError(name)
