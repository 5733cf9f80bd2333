"""Quantile shift method: how a classifier partitions its feature space.

Shift features along their empirical quantiles, compare predictions before
and after, and summarise the class migrations as a matrix or chordgraph.
"""
from .chord import chord_svg, layout, render_svg
from .core import (
    MigrationMatrix,
    RepeatRandom,
    ShiftAllTies,
    manipulate,
    migrate_from_files,
    neighborhood_report,
    run_qsm,
)
from .data import ClassSet, Dataset, FeatureKind, iris_path, load_csv, load_iris, write_csv
from .external import ExternalModel
from .model import CartTree, Classifier, KnnModel, RuleRegionModel, cart_fit, predict_argmax
from .shift import (
    CategorySwitch,
    Ecdf,
    RankShift,
    ShiftSpec,
    ecdf_build,
    ecdf_quantile,
    shift_negative,
    shift_positive,
    steps_from_q,
    switch_category,
)

__version__ = "0.1.0"
