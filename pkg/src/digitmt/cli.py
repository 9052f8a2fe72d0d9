"""Command-line front end.

Exit status: 0 success (misrecognitions are findings, not failures),
1 error, 2 no seed survived validation, 64 usage error.
"""
import argparse
import csv
import logging
import sys
import time
from pathlib import Path

import numpy as np

from .errors import DigitMTError, NoValidSeeds
from .harness import (
    COMPOSITE,
    IMAGE,
    OBJECT,
    build_suite,
    export_report,
    format_percent,
    load_seeds,
    read_manifest,
    read_verdicts,
    render_table,
    run_suite,
    split_composite,
    validate_seeds,
    write_manifest,
)
from .harness.extrapolate import MANUAL_IMAGES, MANUAL_MINUTES, REFERENCE_RATES, ExtrapolationInputs, extrapolate_time
from .harness.reports import render_timing, report_from_verdicts
from .imagemorph import LevelGrid, load_grid
from .imaging import find_mnist_files, load_idx_images, load_idx_labels
from .objectmorph import ObjectSettings, load_object_settings
from .rng import DEFAULT_SEED
from .sut import ExternalClassifier, KnnClassifier, MlpClassifier, TrainConfig, load_weights, mlp_train, save_weights
from .sut.mlp import accuracy

EXIT_OK, EXIT_ERROR, EXIT_SEEDS, EXIT_USAGE = 0, 1, 2, 64
SUTS = ("builtin-mlp", "knn", "external")

EPILOG = "exit status: 0 ok, 1 error, 2 no valid seeds, 64 usage error"


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _existing(path: str) -> Path:
    p = Path(path)
    if not p.exists():
        raise argparse.ArgumentTypeError(f"{path} does not exist")
    return p


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


# -- shared flag groups -----------------------------------------------------

def _seed_flags(p):
    p.add_argument("--seeds", type=_existing, help="directory of <name>_<digit>.pgm seeds (default: shipped)")
    p.add_argument("--annotations", type=_existing, help="directory of <name>_<digit>.seg files (default: --seeds)")


def _generation_flags(p):
    p.add_argument("--grid", type=_existing, help="image level grid file")
    p.add_argument("--levels", type=_existing, help="object elongation settings file")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"suite seed (default {DEFAULT_SEED})")
    p.add_argument("--jobs", type=_positive_int, default=1, help="worker processes (default 1)")


def _mnist_flags(p):
    p.add_argument("--mnist", type=_existing, help="directory holding the four MNIST IDX files")
    for key in ("train-images", "train-labels", "test-images", "test-labels"):
        p.add_argument(f"--{key}", type=Path, help=f"{key.replace('-', ' ')} IDX file (overrides --mnist)")


def _sut_flags(p):
    p.add_argument("--sut", choices=SUTS, default="builtin-mlp", help="classifier under test")
    p.add_argument("--weights", type=_existing, help="weights file for builtin-mlp")
    p.add_argument("--sut-cmd", help="command line of an external classifier (line protocol)")
    p.add_argument("--timeout", type=float, default=10.0, help="external prediction timeout, seconds")
    p.add_argument("--k", type=_positive_int, default=1, help="neighbors for knn")
    p.add_argument("--knn-ref", type=_existing,
                   help="MNIST directory whose training set is the knn reference (default: the seeds)")


def build_parser() -> Parser:
    parser = Parser(prog="digitmt", description="Metamorphic testing of digit classifiers.", epilog=EPILOG)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=Parser)

    p = sub.add_parser("train", help="train the built-in 784-512-512-10 MLP on MNIST", epilog=EPILOG)
    _mnist_flags(p)
    p.add_argument("--weights", type=Path, required=True, help="output weights file")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"initialization/shuffle seed (default {DEFAULT_SEED})")
    p.add_argument("--epochs", type=_positive_int, default=TrainConfig.epochs)
    p.add_argument("--subset", type=_positive_int, help="train on the first N training images only")
    p.add_argument("--lr", type=float, default=TrainConfig.learning_rate, help="learning rate")
    p.add_argument("--batch-size", type=_positive_int, default=TrainConfig.batch_size)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("seeds", help="seed utilities", epilog=EPILOG)
    seeds_sub = p.add_subparsers(dest="seeds_command", required=True, parser_class=Parser)
    v = seeds_sub.add_parser("validate", help="check the SUT classifies every seed correctly", epilog=EPILOG)
    _seed_flags(v)
    _sut_flags(v)
    v.set_defaults(func=cmd_seeds_validate)

    p = sub.add_parser("generate", help="generate a test suite and write it as PGM files + manifest.csv",
                       epilog=EPILOG)
    p.add_argument("kind", choices=(IMAGE, OBJECT, COMPOSITE))
    _seed_flags(p)
    _generation_flags(p)
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("run", help="validate seeds, generate (or load) a suite, evaluate the SUT, write reports",
                       epilog=EPILOG)
    p.add_argument("kind", choices=(IMAGE, OBJECT, COMPOSITE))
    _seed_flags(p)
    _generation_flags(p)
    _sut_flags(p)
    p.add_argument("--suite", type=_existing, help="manifest.csv (or its directory) from 'generate' instead of regenerating")
    p.add_argument("--out", type=Path, default=Path("report"), help="report directory (default ./report)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("extrapolate", help="linear extrapolation of generation time vs. manual production",
                       epilog=EPILOG)
    p.add_argument("--rate", action="append", metavar="NAME=SECONDS/IMAGES",
                   help="measured generation rate of one approach (repeatable; default: reference rates)")
    p.add_argument("--report", type=_existing, help="summary.tsv from 'run' to take image/object rates from")
    p.add_argument("--target", type=_positive_int, default=50_000, help="images per approach (default 50000)")
    p.add_argument("--manual-images", type=float, default=MANUAL_IMAGES)
    p.add_argument("--manual-minutes", type=float, default=MANUAL_MINUTES)
    p.set_defaults(func=cmd_extrapolate)

    p = sub.add_parser("report", help="recompute and print the summary from a verdicts.csv", epilog=EPILOG)
    p.add_argument("path", type=_existing, help="report directory or verdicts.csv")
    p.add_argument("--sut-name", help="classifier name for the table (default: from summary.tsv)")
    p.add_argument("--out", type=Path, help="rewrite verdicts.csv and summary.tsv here")
    p.set_defaults(func=cmd_report)
    return parser


# -- helpers -----------------------------------------------------------------

def _mnist_paths(args) -> dict:
    paths = find_mnist_files(args.mnist) if args.mnist else {}
    for key in ("train_images", "train_labels", "test_images", "test_labels"):
        override = getattr(args, key)
        if override is not None:
            paths[key] = override
        if key not in paths:
            raise FileNotFoundError(f"no {key.replace('_', ' ')} file: pass --mnist or --{key.replace('_', '-')}")
        if not Path(paths[key]).is_file():
            raise FileNotFoundError(f"{paths[key]} not found")
    return paths


def _make_sut(args, seeds):
    if args.sut == "builtin-mlp":
        if args.weights is None:
            raise DigitMTError("--sut builtin-mlp needs --weights (create one with 'digitmt train')")
        return MlpClassifier(load_weights(args.weights))
    if args.sut == "knn":
        if args.knn_ref:
            paths = find_mnist_files(args.knn_ref)
            return KnnClassifier(load_idx_images(paths["train_images"]), load_idx_labels(paths["train_labels"]), args.k)
        return KnnClassifier(np.stack([s.image for s in seeds]), [s.label for s in seeds], args.k)
    if not args.sut_cmd:
        raise DigitMTError("--sut external needs --sut-cmd")
    return ExternalClassifier(args.sut_cmd, timeout=args.timeout)


def _settings(args):
    grid = load_grid(args.grid) if args.grid else LevelGrid()
    settings = load_object_settings(args.levels) if args.levels else ObjectSettings()
    return grid, settings


def _validated(args, seeds, sut):
    accepted = validate_seeds(seeds, sut)
    rejected = [s.seed_id for s in seeds if s not in accepted]
    if rejected:
        print(f"rejected seeds (misclassified by {sut.name}): {', '.join(rejected)}", file=sys.stderr)
    return accepted


# -- subcommands -------------------------------------------------------------

def cmd_train(args) -> int:
    paths = _mnist_paths(args)
    train_x, train_y = load_idx_images(paths["train_images"]), load_idx_labels(paths["train_labels"])
    test_x, test_y = load_idx_images(paths["test_images"]), load_idx_labels(paths["test_labels"])
    config = TrainConfig(args.lr, args.batch_size, args.epochs, args.seed, args.subset)
    start = time.perf_counter()
    model = mlp_train(train_x, train_y, config,
                      on_epoch=lambda e, m: print(f"epoch {e + 1}/{config.epochs}", file=sys.stderr))
    elapsed = time.perf_counter() - start
    acc = accuracy(model, test_x, test_y)
    save_weights(model, args.weights)
    print(f"test accuracy: {acc:.4f} ({round(acc * len(test_y))}/{len(test_y)}) after {elapsed:.1f} s")
    print(f"weights written to {args.weights}")
    return EXIT_OK


def cmd_seeds_validate(args) -> int:
    seeds = load_seeds(args.seeds, args.annotations)
    with _make_sut(args, seeds) as sut:
        accepted = validate_seeds(seeds, sut)
    for seed in seeds:
        print(f"{seed.seed_id}\t{seed.label}\t{'accepted' if seed in accepted else 'rejected'}")
    print(f"{len(accepted)}/{len(seeds)} seeds accepted by {sut.name}")
    return EXIT_OK


def cmd_generate(args) -> int:
    seeds = load_seeds(args.seeds, args.annotations)
    grid, settings = _settings(args)
    suite = build_suite(args.kind, seeds, grid, settings, args.seed, args.jobs)
    write_manifest(suite.cases, args.out)
    print(len(suite))
    for kind, seconds in suite.generation_seconds.items():
        print(f"{kind}: {len(suite.part(kind))} cases in {seconds:.2f} s", file=sys.stderr)
    return EXIT_OK


def cmd_run(args) -> int:
    seeds = load_seeds(args.seeds, args.annotations)
    with _make_sut(args, seeds) as sut:
        accepted = _validated(args, seeds, sut)
        if args.suite:
            manifest = args.suite / "manifest.csv" if args.suite.is_dir() else args.suite
            keep = {s.seed_id for s in accepted}
            cases = [c for c in read_manifest(manifest) if c.seed_id in keep]
            if args.kind != COMPOSITE:
                cases = [c for c in cases if c.suite == args.kind]
            generation = {}
        else:
            grid, settings = _settings(args)
            suite = build_suite(args.kind, accepted, grid, settings, args.seed, args.jobs)
            cases, generation = suite.cases, suite.generation_seconds
        report, verdicts = run_suite(cases, sut, args.kind, sum(generation.values()))
    if args.kind == COMPOSITE:
        reports = split_composite(verdicts, report.sut, generation, report.evaluation_seconds)
    else:
        reports = [report]
    export_report(reports, verdicts, args.out, cases)
    print(render_table(reports))
    print(render_timing(reports), file=sys.stderr)
    return EXIT_OK


def _parse_rate(text: str):
    try:
        name, value = text.split("=", 1)
        seconds, images = value.split("/", 1)
        return name, (float(seconds), float(images))
    except ValueError:
        raise DigitMTError(f"--rate expects NAME=SECONDS/IMAGES, got {text!r}") from None


def _rates_from_summary(path: Path) -> dict:
    if path.is_dir():
        path = path / "summary.tsv"
    with path.open(newline="") as fh:
        rows = list(csv.DictReader(fh, delimiter="\t"))
    rates = {row["suite"]: (float(row["generation_seconds"]), float(row["produced"]))
             for row in rows if row["suite"] in (IMAGE, OBJECT)}
    if not rates:
        raise DigitMTError(f"{path}: no image or object rows")
    return rates


def cmd_extrapolate(args) -> int:
    if args.rate:
        rates = dict(_parse_rate(r) for r in args.rate)
    elif args.report:
        rates = _rates_from_summary(args.report)
    else:
        rates = dict(REFERENCE_RATES)
    result = extrapolate_time(ExtrapolationInputs(rates, args.manual_images, args.manual_minutes), args.target)
    for name, (seconds, images) in rates.items():
        print(f"{name}: {seconds / images:.4f} s per image")
    print(f"automated: {result.automated_hours:.2f} h for {result.total_images} images")
    print(f"manual: {result.manual_hours:.2f} h")
    print(f"reduction: {format_percent(result.reduction)}")
    return EXIT_OK


def cmd_report(args) -> int:
    verdict_path = args.path / "verdicts.csv" if args.path.is_dir() else args.path
    summary_path = verdict_path.parent / "summary.tsv"
    name, generation = args.sut_name, {}
    if summary_path.exists():
        with summary_path.open(newline="") as fh:
            for row in csv.DictReader(fh, delimiter="\t"):
                name = name or row["classifier"]
                if row["suite"] in (IMAGE, OBJECT):
                    generation[row["suite"]] = float(row["generation_seconds"])
    name = name or "unknown"
    verdicts = read_verdicts(verdict_path)
    kinds = {v.suite for v in verdicts}
    if len(kinds) > 1:
        reports = split_composite(verdicts, name, generation)
    else:
        kind = kinds.pop() if kinds else IMAGE
        reports = [report_from_verdicts(verdicts, name, kind, generation.get(kind, 0.0))]
    if args.out:
        export_report(reports, verdicts, args.out)
    print(render_table(reports))
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except NoValidSeeds as exc:
        print(f"digitmt: {exc}", file=sys.stderr)
        return EXIT_SEEDS
    except (DigitMTError, OSError, ValueError) as exc:
        print(f"digitmt: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
