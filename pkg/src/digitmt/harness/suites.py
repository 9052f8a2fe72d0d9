"""Test-suite generation and evaluation under the identity metamorphic relation.

Every generated case keeps its seed's label as the expected output.  Case ids
are ``img/<seed>/<rank>`` and ``obj/<seed>/<rank>`` so the two suites never
collide and sort image-first in a composite suite.
"""
import csv
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import MissingAnnotations, SutError
from ..imagemorph import LevelGrid, apply_plan, enumerate_plans
from ..imaging import read_pgm, write_pgm
from ..objectmorph.elongation import ObjectSettings, SeedObject, enumerate_object_plans, generate_object_image
from ..sut.base import Classifier

IMAGE = "image"
OBJECT = "object"
COMPOSITE = "composite"
KINDS = (IMAGE, OBJECT, COMPOSITE)


@dataclass(frozen=True, eq=False)
class TestCase:
    __test__ = False  # not a pytest class

    case_id: str
    seed_id: str
    suite: str
    expected_label: int
    provenance: str
    image: np.ndarray

    @property
    def is_identity(self) -> bool:
        return self.suite == OBJECT and all(p == "+0/+0" for p in self.provenance[7:].split(";"))


@dataclass
class Suite:
    kind: str
    cases: list
    generation_seconds: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.cases)

    def part(self, kind: str) -> "Suite":
        return Suite(kind, [c for c in self.cases if c.suite == kind],
                     {kind: self.generation_seconds.get(kind, 0.0)})

    @property
    def seconds(self) -> float:
        return sum(self.generation_seconds.values())


def _map(fn, jobs_args, jobs: int):
    if jobs <= 1 or len(jobs_args) <= 1:
        return [fn(*args) for args in jobs_args]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, *zip(*jobs_args)))


def _image_cases(seed, grid: LevelGrid, plans):
    return [
        TestCase(f"img/{seed.seed_id}/{plan.rank:03d}", seed.seed_id, IMAGE, seed.label,
                 plan.describe(), apply_plan(seed.image, grid, plan))
        for plan in plans
    ]


def _object_cases(seed, settings: ObjectSettings):
    obj = SeedObject.build(seed.label, seed.image, seed.annotations, settings.threshold, settings.segment_counts)
    return [
        TestCase(f"obj/{seed.seed_id}/{plan.rank:04d}", seed.seed_id, OBJECT, seed.label,
                 plan.describe(), generate_object_image(obj, plan, settings.supersample))
        for plan in enumerate_object_plans(obj, settings.levels)
    ]


def generate_image_suite(seeds, grid: LevelGrid = LevelGrid(), suite_seed: int | None = None,
                         jobs: int = 1) -> list[TestCase]:
    if suite_seed is not None:
        grid = LevelGrid(**{**grid.__dict__, "suite_seed": suite_seed})
    plans = enumerate_plans(grid)
    # one task per (seed, slice of plans) so small seed sets still fan out
    step = max(1, len(plans) // max(1, jobs))
    tasks = [(seed, grid, plans[i:i + step]) for seed in seeds for i in range(0, len(plans), step)]
    cases = [case for chunk in _map(_image_cases, tasks, jobs) for case in chunk]
    return sorted(cases, key=lambda c: c.case_id)


def generate_object_suite(seeds, settings: ObjectSettings = ObjectSettings(), jobs: int = 1) -> list[TestCase]:
    missing = [s.seed_id for s in seeds if not s.annotations]
    if missing:
        raise MissingAnnotations(f"no segment annotations for seeds: {', '.join(missing)}")
    cases = [case for chunk in _map(_object_cases, [(s, settings) for s in seeds], jobs) for case in chunk]
    return sorted(cases, key=lambda c: c.case_id)


def generate_composite_suite(seeds, grid: LevelGrid = LevelGrid(), settings: ObjectSettings = ObjectSettings(),
                             suite_seed: int | None = None, jobs: int = 1) -> list[TestCase]:
    return (generate_image_suite(seeds, grid, suite_seed, jobs)
            + generate_object_suite(seeds, settings, jobs))


def build_suite(kind: str, seeds, grid: LevelGrid = LevelGrid(), settings: ObjectSettings = ObjectSettings(),
                suite_seed: int | None = None, jobs: int = 1) -> Suite:
    """Generate a suite and record the wall-clock generation time of each part."""
    if kind not in KINDS:
        raise ValueError(f"unknown suite kind {kind!r}")
    cases, seconds = [], {}
    if kind in (IMAGE, COMPOSITE):
        start = time.perf_counter()
        cases += generate_image_suite(seeds, grid, suite_seed, jobs)
        seconds[IMAGE] = time.perf_counter() - start
    if kind in (OBJECT, COMPOSITE):
        start = time.perf_counter()
        cases += generate_object_suite(seeds, settings, jobs)
        seconds[OBJECT] = time.perf_counter() - start
    return Suite(kind, cases, seconds)


@dataclass(frozen=True)
class Verdict:
    case_id: str
    seed_id: str
    suite: str
    provenance: str
    expected: int
    predicted: int

    @property
    def misrecognized(self) -> bool:
        return self.predicted != self.expected


class EvaluationAborted(SutError):
    """The SUT failed mid-suite; ``verdicts`` holds the cases evaluated so far."""

    def __init__(self, message, verdicts):
        super().__init__(message)
        self.verdicts = verdicts


def evaluate(cases, sut: Classifier, batch_size: int = 512) -> list[Verdict]:
    cases = sorted(cases, key=lambda c: c.case_id)
    verdicts = []
    for start in range(0, len(cases), batch_size):
        chunk = cases[start:start + batch_size]
        try:
            predictions = sut.predict_batch(np.stack([c.image for c in chunk]), [c.case_id for c in chunk])
        except SutError as exc:
            raise EvaluationAborted(
                f"{sut.name} failed after {len(verdicts)} of {len(cases)} cases: {exc}", verdicts
            ) from exc
        verdicts += [Verdict(c.case_id, c.seed_id, c.suite, c.provenance, c.expected_label, p.label)
                     for c, p in zip(chunk, predictions)]
    return verdicts


def write_manifest(cases, out_dir) -> Path:
    """Write every case image as PGM under ``images/`` plus ``manifest.csv``."""
    out_dir = Path(out_dir)
    (out_dir / "images").mkdir(parents=True, exist_ok=True)
    manifest = out_dir / "manifest.csv"
    with manifest.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["case_id", "seed_id", "suite", "provenance", "expected", "image"])
        for case in sorted(cases, key=lambda c: c.case_id):
            rel = f"images/{case.case_id.replace('/', '_')}.pgm"
            write_pgm(case.image, out_dir / rel)
            writer.writerow([case.case_id, case.seed_id, case.suite, case.provenance, case.expected_label, rel])
    return manifest


def read_manifest(path) -> list[TestCase]:
    path = Path(path)
    with path.open(newline="") as fh:
        return [
            TestCase(row["case_id"], row["seed_id"], row["suite"], int(row["expected"]),
                     row["provenance"], read_pgm(path.parent / row["image"]))
            for row in csv.DictReader(fh)
        ]
