"""Suite reports: counts, rates, the composite cross-check, and file export."""
import csv
import time
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal, localcontext
from fractions import Fraction
from pathlib import Path

from ..errors import InconsistentReports, IoFailure
from ..imaging import write_pgm
from ..sut.base import Classifier
from .suites import COMPOSITE, IMAGE, OBJECT, Verdict, evaluate

SUMMARY_COLUMNS = ["classifier", "suite", "produced", "misrecognitions", "rate", "increase_vs_image",
                   "generation_seconds"]
VERDICT_COLUMNS = ["case_id", "seed_id", "suite", "provenance", "expected", "predicted", "misrecognized"]


def format_percent(value, signed: bool = False) -> str:
    """Render a ratio as a percentage with two decimals, halves rounded away from zero.

    ``value`` may be a :class:`~fractions.Fraction` (rounded exactly) or a float
    (taken at its shortest decimal representation).
    """
    if isinstance(value, Fraction):
        with localcontext() as ctx:
            ctx.prec = 60
            percent = Decimal(value.numerator) * 100 / Decimal(value.denominator)
    else:
        percent = Decimal(repr(float(value))) * 100
    text = f"{percent.quantize(Decimal('0.01'), rounding=ROUND_HALF_UP)}%"
    return f"+{text}" if signed and not text.startswith("-") else text


@dataclass
class SuiteReport:
    sut: str
    suite: str
    produced: int
    misrecognized: int
    generation_seconds: float = 0.0
    evaluation_seconds: float = 0.0
    increase: Fraction | None = None

    def __post_init__(self):
        if not 0 <= self.misrecognized <= self.produced:
            raise InconsistentReports(f"{self.misrecognized} misrecognitions of {self.produced} cases")

    @property
    def rate(self) -> Fraction:
        return Fraction(self.misrecognized, self.produced) if self.produced else Fraction(0)

    @property
    def seconds_per_image(self) -> float:
        return self.generation_seconds / self.produced if self.produced else 0.0

    @property
    def seconds_per_misrecognition(self) -> float:
        return self.generation_seconds / self.misrecognized if self.misrecognized else float("inf")

    def row(self) -> list[str]:
        increase = "" if self.increase is None else format_percent(self.increase, signed=True)
        return [self.sut, self.suite, str(self.produced), str(self.misrecognized), format_percent(self.rate),
                increase, f"{self.generation_seconds:.2f}"]


def report_from_verdicts(verdicts, sut: str, suite: str, generation_seconds: float = 0.0,
                         evaluation_seconds: float = 0.0) -> SuiteReport:
    return SuiteReport(sut, suite, len(verdicts), sum(v.misrecognized for v in verdicts),
                       generation_seconds, evaluation_seconds)


def run_suite(cases, sut: Classifier, suite: str | None = None, generation_seconds: float = 0.0):
    """Evaluate every case; returns ``(report, verdicts)`` with verdicts sorted by case id."""
    start = time.perf_counter()
    verdicts = evaluate(cases, sut)
    elapsed = time.perf_counter() - start
    if suite is None:
        kinds = {c.suite for c in cases}
        suite = kinds.pop() if len(kinds) == 1 else COMPOSITE
    return report_from_verdicts(verdicts, sut.name, suite, generation_seconds, elapsed), verdicts


def composite_additivity(image_report: SuiteReport, object_report: SuiteReport,
                         composite_report: SuiteReport) -> Fraction:
    """Check the composite report is the sum of its parts; return the increase over image-based.

    The increase is ``object misrecognitions / image misrecognitions``: how many
    more failures the composite suite finds than the image suite alone.
    """
    names = {image_report.sut, object_report.sut, composite_report.sut}
    if len(names) != 1:
        raise InconsistentReports(f"reports come from different classifiers: {sorted(names)}")
    if composite_report.produced != image_report.produced + object_report.produced:
        raise InconsistentReports(
            f"composite produced {composite_report.produced}, parts sum to "
            f"{image_report.produced + object_report.produced}")
    if composite_report.misrecognized != image_report.misrecognized + object_report.misrecognized:
        raise InconsistentReports(
            f"composite misrecognitions {composite_report.misrecognized}, parts sum to "
            f"{image_report.misrecognized + object_report.misrecognized}")
    if image_report.misrecognized == 0:
        raise InconsistentReports("increase is undefined without image-based misrecognitions")
    return Fraction(object_report.misrecognized, image_report.misrecognized)


def split_composite(verdicts, sut: str, generation_seconds: dict, evaluation_seconds: float = 0.0):
    """Image, object and composite reports for one composite run, cross-checked."""
    reports = []
    for kind in (IMAGE, OBJECT):
        part = [v for v in verdicts if v.suite == kind]
        share = evaluation_seconds * len(part) / len(verdicts) if verdicts else 0.0
        reports.append(report_from_verdicts(part, sut, kind, generation_seconds.get(kind, 0.0), share))
    composite = report_from_verdicts(verdicts, sut, COMPOSITE, sum(generation_seconds.values()),
                                     evaluation_seconds)
    if reports[0].misrecognized:
        composite.increase = composite_additivity(reports[0], reports[1], composite)
    return reports + [composite]


def render_table(reports) -> str:
    rows = [SUMMARY_COLUMNS] + [r.row() for r in reports]
    widths = [max(len(row[i]) for row in rows) for i in range(len(SUMMARY_COLUMNS))]
    return "\n".join("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows)


def render_timing(reports) -> str:
    lines = []
    for r in reports:
        per_mis = "n/a" if not r.misrecognized else f"{r.seconds_per_misrecognition:.4f}"
        lines.append(f"{r.sut} {r.suite}: {r.seconds_per_image:.4f} s per image, {per_mis} s per misrecognition, "
                     f"evaluation {r.evaluation_seconds:.2f} s")
    return "\n".join(lines)


def case_filename(case_id: str) -> str:
    return case_id.replace("/", "_") + ".pgm"


def export_report(reports, verdicts, out_dir, cases=None) -> list[Path]:
    """Write ``verdicts.csv``, ``summary.tsv`` and PGMs of misrecognized cases.

    Images are only written when ``cases`` (the evaluated test cases) is given.
    """
    out_dir = Path(out_dir)
    if isinstance(reports, SuiteReport):
        reports = [reports]
    written = []
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        verdict_path = out_dir / "verdicts.csv"
        with verdict_path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(VERDICT_COLUMNS)
            for v in sorted(verdicts, key=lambda v: v.case_id):
                writer.writerow([v.case_id, v.seed_id, v.suite, v.provenance, v.expected, v.predicted,
                                 int(v.misrecognized)])
        written.append(verdict_path)

        summary_path = out_dir / "summary.tsv"
        with summary_path.open("w", newline="") as fh:
            writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
            writer.writerow(SUMMARY_COLUMNS)
            writer.writerows(r.row() for r in reports)
        written.append(summary_path)

        if cases is not None:
            image_dir = out_dir / "misrecognized"
            image_dir.mkdir(exist_ok=True)
            wrong = {v.case_id for v in verdicts if v.misrecognized}
            for case in sorted(cases, key=lambda c: c.case_id):
                if case.case_id in wrong:
                    path = image_dir / case_filename(case.case_id)
                    write_pgm(case.image, path)
                    written.append(path)
    except OSError as exc:
        raise IoFailure(f"cannot write report to {out_dir}: {exc}") from exc
    return written


def read_verdicts(path) -> list:
    with Path(path).open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    verdicts = []
    for row in rows:
        v = Verdict(row["case_id"], row["seed_id"], row["suite"], row["provenance"], int(row["expected"]),
                    int(row["predicted"]))
        if int(row["misrecognized"]) != int(v.misrecognized):
            raise InconsistentReports(f"{path}: case {v.case_id} misrecognized flag disagrees with labels")
        verdicts.append(v)
    return verdicts
