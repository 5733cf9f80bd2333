"""Reference child process for the external-model protocol.

    python -m qsm.model_server --data iris.csv --label species --model tree:petal_length,petal_width
    python -m qsm.model_server --constant A

Fits the chosen built-in model on ``--data`` and answers requests on
stdin/stdout. Rows arrive in the column order of ``--data``.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from .data import ClassSet, Dataset, FeatureKind, load_csv
from .external import serve
from .model import Classifier


class ConstantModel(Classifier):
    def __init__(self, label: str):
        self.class_set = ClassSet((label,))
        self.label = label

    def predict(self, ds: Dataset) -> np.ndarray:
        return np.full(ds.n, self.label, dtype=object)


def main(argv=None) -> int:
    from .cli import build_model  # shared model selector grammar

    parser = argparse.ArgumentParser(prog="qsm.model_server", description=__doc__.splitlines()[0])
    parser.add_argument("--data", help="training CSV")
    parser.add_argument("--label", help="label column of --data")
    parser.add_argument("--model", default="tree", help="tree[:f1,f2] | knn:k | rules:path")
    parser.add_argument("--constant", help="answer every row with this label")
    parser.add_argument("--features", type=int, default=1, help="feature count for --constant")
    args = parser.parse_args(argv)

    if args.constant:
        model = ConstantModel(args.constant)
        p = args.features
        template = Dataset(
            tuple(f"x{j + 1}" for j in range(p)),
            tuple(FeatureKind.metric() for _ in range(p)),
            tuple(np.zeros(1) for _ in range(p)),
        )
    else:
        if not args.data:
            parser.error("--data is required unless --constant is given")
        template = load_csv(args.data, label=args.label)
        model = build_model(args.model, template)
    serve(model, template.without_labels())
    return 0


if __name__ == "__main__":
    sys.exit(main())
