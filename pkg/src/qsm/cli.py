"""Command-line interface: ``qsm manipulate | run | example | migrate``.

Exit codes: 0 success, 2 validation error, 3 I/O error, 4 external model failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from pathlib import Path

import numpy as np

from . import fixtures
from .chord import ChordError, chord_svg
from .core import (
    MigrationMatrix,
    QSMError,
    RepeatRandom,
    ShiftAllTies,
    manipulate,
    migrate_from_files,
    neighborhood_report,
    run_qsm,
)
from .data import DataError, Dataset, FeatureKind, load_csv, read_table, write_csv
from .external import ExternalModel, ExternalModelError
from .model import Classifier, KnnModel, ModelError, RuleRegionModel, cart_fit
from .shift import RankShift, ShiftError, ShiftSpec, parse_shift_entry, shift_negative, shift_positive

EXIT_OK, EXIT_VALIDATION, EXIT_IO, EXIT_EXTERNAL = 0, 2, 3, 4


class UsageError(ValueError):
    pass


def resolve_label(path, label: str | None) -> str | None:
    """``auto`` picks the last column when it is not numeric; ``none`` means no labels."""
    if label is None or label == "auto":
        header, rows = read_table(path)
        if len(header) < 2:
            return None
        try:
            for row in rows:
                float(row[-1])
        except ValueError:
            return header[-1]
        return None
    if label == "none":
        return None
    return label


def build_model(selector: str, ds: Dataset) -> Classifier:
    """Model from ``tree[:f1,f2] | knn:k | rules:path | cmd:command``."""
    kind, _, arg = selector.partition(":")
    if kind == "tree":
        features = [f for f in arg.split(",") if f] if arg else None
        return cart_fit(ds, features)
    if kind == "knn":
        try:
            k = int(arg)
        except ValueError:
            raise UsageError(f"knn needs an integer k, got {arg!r}") from None
        return KnnModel(ds, k)
    if kind == "rules":
        return RuleRegionModel.load(arg)
    if kind == "cmd":
        if not arg:
            raise UsageError("cmd: needs a command line")
        return ExternalModel(arg)
    raise UsageError(f"unknown model selector {selector!r}; use tree, knn:k, rules:path or cmd:...")


def parse_spec(entries: list[str], ds: Dataset) -> ShiftSpec:
    parsed = {}
    for text in entries:
        name, entry = parse_shift_entry(text, ds.n)
        if isinstance(entry, RankShift) and entry.v == 0:
            raise UsageError(f"{text!r}: rank steps must be non-zero")
        if name in parsed:
            raise UsageError(f"feature {name!r} shifted twice")
        parsed[name] = entry
    spec = ShiftSpec(parsed)
    spec.validate(ds)
    return spec


def resolve_seed(seed: int | None) -> int | None:
    if seed is not None:
        return seed
    env = os.environ.get("QSM_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"QSM_SEED={env!r} is not an integer") from None
    return None


def parse_ties(text: str, seed: int | None):
    if text == "all":
        return ShiftAllTies()
    kind, _, reps = text.partition(":")
    if kind != "random":
        raise UsageError(f"--ties must be 'all' or 'random:REPS', got {text!r}")
    if seed is None:
        raise UsageError("--ties random needs --seed (or QSM_SEED)")
    try:
        return RepeatRandom(int(reps or 1), seed)
    except ValueError as err:
        raise UsageError(f"bad --ties {text!r}: {err}") from None


def report_text(m: MigrationMatrix, header: str) -> str:
    lines = [header, f"strategy: {m.strategy}  repetitions: {m.repetitions}  seed: {m.seed}", ""]
    lines.append(m.format_table())
    lines.append("")
    return "\n".join(lines) + neighborhood_report(m).text()


def _emit(m: MigrationMatrix, title: str, out_matrix=None, out_chord=None, out_report=None) -> None:
    if out_matrix:
        m.save(out_matrix)
    if out_chord and m.total > 0:
        Path(out_chord).write_text(chord_svg(m, title=title), encoding="utf-8")
    if out_report:
        Path(out_report).write_text(report_text(m, title), encoding="utf-8")


def _load(args) -> Dataset:
    return load_csv(args.data, label=resolve_label(args.data, args.label))


def cmd_manipulate(args) -> int:
    ds = _load(args)
    spec = parse_spec(args.shift, ds)
    seed = resolve_seed(args.seed)
    strategy = parse_ties(args.ties, seed)
    rng = strategy.rng(0) if isinstance(strategy, RepeatRandom) else None
    out = manipulate(ds, spec, rng)
    write_csv(out, args.out or sys.stdout)
    return EXIT_OK


def cmd_run(args) -> int:
    ds = _load(args)
    spec = parse_spec(args.shift, ds)
    seed = resolve_seed(args.seed)
    strategy = parse_ties(args.ties, seed)
    model = build_model(args.model, ds)
    try:
        m = run_qsm(ds, spec, model, strategy)
        if args.out_manipulated:
            rng = strategy.rng(0) if isinstance(strategy, RepeatRandom) else None
            write_csv(manipulate(ds, spec, rng), args.out_manipulated)
    finally:
        if isinstance(model, ExternalModel):
            model.close()
    m = dataclasses.replace(m, seed=seed)
    title = f"{Path(args.data).name}: {spec} ({m.strategy}, seed {seed})"
    print(m.format_table())
    _emit(m, title, args.out_matrix, args.out_chord, args.out_report)
    return EXIT_OK


def _tievector_text() -> str:
    x = fixtures.make_tievector()
    names = {v: f"x{i + 1}" for i, v in enumerate(np.unique(x))}
    pos, neg = shift_positive(x, 2), shift_negative(x, 2)
    lines = ["positive, v=2        negative, v=2", "before  after        before  after"]
    for a, b, c in zip(x, pos, neg):
        lines.append(f"{names[a]:<7} {names[b]:<12} {names[a]:<7} {names[c]}")
    return "\n".join(lines) + "\n"


def cmd_example(args) -> int:
    name = args.name
    if name not in fixtures.FIXTURE_NAMES:
        raise UsageError(f"unknown example {name!r}; choose from {', '.join(fixtures.FIXTURE_NAMES)}")
    out_dir = Path(args.out_dir or f"qsm-example-{name}")
    out_dir.mkdir(parents=True, exist_ok=True)
    if name == "tievector":
        text = _tievector_text()
        print(text, end="")
        (out_dir / "tievector.txt").write_text(text, encoding="utf-8")
        x = fixtures.make_tievector()
        ds = Dataset(("x",), (FeatureKind.metric(),), (x,))
        write_csv(ds, out_dir / "data.csv")
        return EXIT_OK
    seed = resolve_seed(args.seed)
    fx = fixtures.get_fixture(name, seed=seed or 0)
    write_csv(fx.dataset, out_dir / "data.csv")
    for i, sc in enumerate(fx.scenarios, start=1):
        m = run_qsm(fx.dataset, sc.spec, fx.model, sc.strategy)
        if seed is not None:
            m = dataclasses.replace(m, seed=seed)
        title = f"{name}: {sc.title}" + (f" (seed {seed})" if seed is not None else "")
        print(f"== {title}")
        print(m.format_table())
        print()
        _emit(m, title, out_dir / f"matrix_{i}.json", out_dir / f"chord_{i}.svg", out_dir / f"report_{i}.txt")
    print(f"wrote {out_dir}/")
    return EXIT_OK


def cmd_migrate(args) -> int:
    classes = [c.strip() for c in args.classes.split(",") if c.strip()]
    m = migrate_from_files(args.before, args.after, classes)
    print(m.format_table())
    _emit(m, f"{Path(args.before).name} -> {Path(args.after).name}", args.out_matrix, args.out_chord, args.out_report)
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qsm", description="Quantile shift explanations for classifiers.")
    sub = parser.add_subparsers(dest="command", required=True)

    def data_opts(p):
        p.add_argument("--data", required=True, help="input CSV with header")
        p.add_argument("--label", default="auto", help="label column, 'auto' (default) or 'none'")
        p.add_argument("--shift", action="append", required=True, metavar="FEATURE=SHIFT",
                       help="feature=+v, feature=-v, feature=v/(n+1) or feature=r->s; repeatable")
        p.add_argument("--ties", default="all", help="'all' or 'random:REPS'")
        p.add_argument("--seed", type=int, help="RNG seed (falls back to $QSM_SEED)")

    p = sub.add_parser("manipulate", help="write the shifted dataset")
    data_opts(p)
    p.add_argument("--out", help="output CSV (default: stdout)")
    p.set_defaults(func=cmd_manipulate)

    p = sub.add_parser("run", help="migration matrix for a model and shift")
    data_opts(p)
    p.add_argument("--model", default="tree", help="tree[:f1,f2] | knn:k | rules:path | cmd:command")
    p.add_argument("--out-matrix", help="migration matrix JSON")
    p.add_argument("--out-chord", help="chordgraph SVG")
    p.add_argument("--out-manipulated", help="shifted dataset CSV")
    p.add_argument("--out-report", help="neighborhood report text")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("example", help="reproduce a worked example")
    p.add_argument("name", help=", ".join(fixtures.FIXTURE_NAMES))
    p.add_argument("--out-dir", help="output directory (default: ./qsm-example-NAME)")
    p.add_argument("--seed", type=int, help="seed for randomized fixtures")
    p.set_defaults(func=cmd_example)

    p = sub.add_parser("migrate", help="migration matrix from two label files")
    p.add_argument("--before", required=True)
    p.add_argument("--after", required=True)
    p.add_argument("--classes", required=True, help="comma-separated class order")
    p.add_argument("--out-matrix")
    p.add_argument("--out-chord")
    p.add_argument("--out-report")
    p.set_defaults(func=cmd_migrate)
    return parser


def _external_cause(err: BaseException) -> bool:
    while err is not None:
        if isinstance(err, ExternalModelError):
            return True
        err = err.__cause__
    return False


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_VALIDATION if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (ExternalModelError, QSMError) as err:
        if _external_cause(err):
            print(f"qsm: external model failed: {err}", file=sys.stderr)
            return EXIT_EXTERNAL
        print(f"qsm: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except (DataError, ShiftError, ModelError, ChordError, UsageError, KeyError, ValueError) as err:
        print(f"qsm: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as err:
        print(f"qsm: {err}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
