import csv
import hashlib
import sys

import numpy as np
import pytest

from digitmt.errors import InconsistentReports, IoFailure, MissingAnnotations, NoValidSeeds
from digitmt.harness import (
    COMPOSITE,
    IMAGE,
    OBJECT,
    SeedCase,
    SuiteReport,
    build_suite,
    composite_additivity,
    export_report,
    format_percent,
    generate_composite_suite,
    generate_image_suite,
    generate_object_suite,
    load_seeds,
    read_manifest,
    read_verdicts,
    run_suite,
    split_composite,
    validate_seeds,
    write_manifest,
)
from digitmt.harness.extrapolate import ExtrapolationInputs, extrapolate_time
from digitmt.harness.suites import EvaluationAborted
from digitmt.imagemorph import LevelGrid
from digitmt.sut import Classifier, ExternalClassifier, KnnClassifier, Prediction


def onehot(label):
    return Prediction(label, tuple(1.0 if i == label else 0.0 for i in range(10)))


class Constant(Classifier):
    name = "constant"

    def __init__(self, label):
        self.label = label

    def predict(self, img):
        return onehot(self.label)


class ByLookup(Classifier):
    """Answers from a case-id table; ``shift`` turns it into an always-wrong SUT."""

    name = "lookup"

    def __init__(self, table, shift=0):
        self.table, self.shift = table, shift

    def predict_batch(self, images, case_ids=None):
        return [onehot((self.table[c] + self.shift) % 10) for c in case_ids]


def digest(cases):
    h = hashlib.sha256()
    for c in cases:
        h.update(c.case_id.encode())
        h.update(c.image.tobytes())
    return h.hexdigest()


@pytest.fixture(scope="module")
def image_suite(seeds):
    return generate_image_suite(seeds)


@pytest.fixture(scope="module")
def object_suite(seeds):
    return generate_object_suite(seeds)


# -- seeds -------------------------------------------------------------------

def test_shipped_seeds(seeds):
    assert [s.label for s in seeds] == list(range(10))
    assert all(s.image.shape == (28, 28) and s.annotations for s in seeds)


def test_validate_with_self_referencing_knn(seeds):
    knn = KnnClassifier(np.stack([s.image for s in seeds]), [s.label for s in seeds])
    assert validate_seeds(seeds, knn) == seeds


def test_validate_constant_seven(seeds):
    assert [s.label for s in validate_seeds(seeds, Constant(7))] == [7]


def test_validate_all_wrong(seeds):
    class OffByOne(Classifier):
        def predict_batch(self, images, case_ids=None):
            return [onehot((int(c[-1]) + 1) % 10) for c in case_ids]

    with pytest.raises(NoValidSeeds):
        validate_seeds(seeds, OffByOne())


def test_load_seeds_custom_dir(tmp_path, seeds):
    from digitmt.imaging import write_pgm

    write_pgm(seeds[4].image, tmp_path / "mine_4.pgm")
    (loaded,) = load_seeds(tmp_path)
    assert loaded.seed_id == "mine_4" and loaded.label == 4 and loaded.annotations is None
    write_pgm(seeds[4].image, tmp_path / "oops.pgm")
    with pytest.raises(ValueError):
        load_seeds(tmp_path)


# -- generation --------------------------------------------------------------

def test_image_suite_cardinality_and_relation(seeds, image_suite):
    assert len(image_suite) == 7290
    assert len(generate_image_suite(seeds[:1])) == 729
    assert len({c.case_id for c in image_suite}) == 7290
    label = {s.seed_id: s.label for s in seeds}
    assert all(c.expected_label == label[c.seed_id] for c in image_suite)
    assert image_suite[0].case_id == "img/digit_0/000" and image_suite[0].provenance == "image:000000"


def test_image_suite_deterministic(seeds, image_suite):
    assert digest(generate_image_suite(seeds[:2])) == digest(image_suite[:1458])
    other = generate_image_suite(seeds[:1], LevelGrid(suite_seed=99))
    assert digest(other) != digest(image_suite[:729])


def test_object_suite_cardinality(seeds, object_suite):
    assert len(object_suite) == 3906
    nine = [s for s in seeds if s.label == 9]
    assert len(generate_object_suite(nine)) == 9
    label = {s.seed_id: s.label for s in seeds}
    assert all(c.expected_label == label[c.seed_id] for c in object_suite)
    assert sum(c.is_identity for c in object_suite) == 10


def test_object_suite_needs_annotations(seeds):
    bare = [SeedCase(s.seed_id, s.label, s.image) for s in seeds[:2]]
    with pytest.raises(MissingAnnotations):
        generate_object_suite(bare)


def test_composite_is_concatenation(seeds, image_suite, object_suite):
    composite = generate_composite_suite(seeds[:1])
    assert len(composite) == 729 + 81
    assert [c.suite for c in composite[:729]] == [IMAGE] * 729
    image_hashes = {hashlib.sha256(c.image.tobytes()).digest() for c in image_suite}
    object_hashes = {hashlib.sha256(c.image.tobytes()).digest() for c in object_suite}
    assert not image_hashes & object_hashes


def test_build_suite_records_time(seeds):
    suite = build_suite(COMPOSITE, seeds[6:7])
    assert len(suite) == 729 + 9
    assert set(suite.generation_seconds) == {IMAGE, OBJECT}
    assert len(suite.part(OBJECT)) == 9
    with pytest.raises(ValueError):
        build_suite("mixed", seeds)


def test_jobs_do_not_change_output(seeds, image_suite, object_suite):
    assert digest(generate_image_suite(seeds, jobs=8)) == digest(image_suite)
    assert digest(generate_object_suite(seeds, jobs=8)) == digest(object_suite)


def test_manifest_round_trip(tmp_path, seeds):
    cases = generate_composite_suite(seeds[9:])
    write_manifest(cases, tmp_path)
    back = read_manifest(tmp_path / "manifest.csv")
    assert [(c.case_id, c.provenance, c.expected_label, c.suite) for c in back] == \
        [(c.case_id, c.provenance, c.expected_label, c.suite) for c in cases]
    assert all(np.array_equal(a.image, b.image) for a, b in zip(back, cases))


# -- evaluation --------------------------------------------------------------

def test_perfect_and_always_wrong(image_suite):
    table = {c.case_id: c.expected_label for c in image_suite}
    report, verdicts = run_suite(image_suite, ByLookup(table))
    assert report.misrecognized == 0 and report.rate == 0 and report.row()[4] == "0.00%"
    report, verdicts = run_suite(image_suite, ByLookup(table, shift=3))
    assert report.rate == 1 and report.row()[4] == "100.00%"
    assert [v.case_id for v in verdicts] == sorted(v.case_id for v in verdicts)


def test_perfect_oracle_external_stub(tmp_path, stub, seeds):
    cases = generate_image_suite(seeds[3:4])
    sidecar = tmp_path / "expected.tsv"
    sidecar.write_text("".join(f"{c.case_id}\t{c.expected_label}\n" for c in cases))
    oracle = f"""
        import sys
        expected = dict(line.split("\\t") for line in open({str(sidecar)!r}).read().splitlines())
        for line in sys.stdin:
            case = line.split()[1]
            label = int(expected[case])
            print("R", case, label, *["1" if i == label else "0" for i in range(10)], flush=True)
    """
    with ExternalClassifier(stub(oracle)) as sut:
        report, _ = run_suite(cases, sut)
    assert (report.produced, report.misrecognized) == (729, 0)


def test_sut_failure_keeps_partial_verdicts(stub, seeds):
    cases = generate_image_suite(seeds[:1])
    flaky = """
        import sys
        for n, line in enumerate(sys.stdin):
            if n == 600:
                print("garbage", flush=True)
                continue
            case = line.split()[1]
            print("R", case, 0, *["1" if i == 0 else "0" for i in range(10)], flush=True)
    """
    with ExternalClassifier(stub(flaky)) as sut:
        with pytest.raises(EvaluationAborted) as info:
            run_suite(cases, sut)
    assert len(info.value.verdicts) == 512


def test_misrecognition_count_recomputable(tmp_path, mlp, seeds):
    cases = generate_composite_suite(seeds[7:8])
    report, verdicts = run_suite(cases, mlp, COMPOSITE)
    export_report(report, verdicts, tmp_path, cases)
    with (tmp_path / "verdicts.csv").open() as fh:
        rows = list(csv.DictReader(fh))
    assert sum(r["expected"] != r["predicted"] for r in rows) == report.misrecognized
    assert len(list((tmp_path / "misrecognized").glob("*.pgm"))) == report.misrecognized
    assert read_verdicts(tmp_path / "verdicts.csv") == verdicts


# -- reports -----------------------------------------------------------------

def test_table_formatting():
    from fractions import Fraction

    assert SuiteReport("2-HL NN", IMAGE, 7290, 1954).row()[4] == "26.80%"
    assert format_percent(Fraction(1515, 1954), signed=True) == "+77.53%"
    assert format_percent(Fraction(1522, 1556), signed=True) == "+97.81%"
    assert format_percent(0.2680) == "26.80%"
    assert format_percent(Fraction(1, 800)) == "0.13%"  # half away from zero
    assert format_percent(0.00125) == "0.13%"
    assert format_percent(Fraction(-1, 800)) == "-0.13%"


def test_paper_rows_are_additive():
    for image, obj in [(1954, 1515), (1556, 1522), (1582, 1514)]:
        a = SuiteReport("sut", IMAGE, 7290, image)
        b = SuiteReport("sut", OBJECT, 3906, obj)
        c = SuiteReport("sut", COMPOSITE, 11196, image + obj)
        assert composite_additivity(a, b, c) == pytest.approx(obj / image)
    assert 1954 + 1515 == 3469


def test_additivity_violations():
    a = SuiteReport("sut", IMAGE, 10, 2)
    b = SuiteReport("sut", OBJECT, 5, 1)
    with pytest.raises(InconsistentReports):
        composite_additivity(a, b, SuiteReport("sut", COMPOSITE, 15, 4))
    with pytest.raises(InconsistentReports):
        composite_additivity(a, b, SuiteReport("sut", COMPOSITE, 16, 3))
    with pytest.raises(InconsistentReports):
        composite_additivity(a, SuiteReport("other", OBJECT, 5, 1), SuiteReport("sut", COMPOSITE, 15, 3))
    with pytest.raises(InconsistentReports):
        SuiteReport("sut", IMAGE, 3, 4)


def test_split_composite_with_stub(seeds):
    cases = generate_composite_suite(seeds[:2])
    table = {c.case_id: c.expected_label for c in cases}

    class Alternating(ByLookup):
        def predict_batch(self, images, case_ids=None):
            return [onehot(self.table[c] if hash(c) % 3 else (self.table[c] + 1) % 10) for c in case_ids]

    _, verdicts = run_suite(cases, Alternating(table))
    image, obj, comp = split_composite(verdicts, "lookup", {IMAGE: 1.0, OBJECT: 2.0})
    assert comp.misrecognized == image.misrecognized + obj.misrecognized
    assert comp.produced == len(cases) == 729 * 2 + 81 + 729
    assert comp.generation_seconds == 3.0
    assert comp.row()[5].startswith("+")


def test_export_empty_and_reproducible(tmp_path):
    report = SuiteReport("sut", IMAGE, 0, 0)
    export_report(report, [], tmp_path / "a")
    assert (tmp_path / "a" / "verdicts.csv").read_text() == \
        "case_id,seed_id,suite,provenance,expected,predicted,misrecognized\n"
    export_report(report, [], tmp_path / "b")
    for name in ("verdicts.csv", "summary.tsv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(IoFailure):
        export_report(report, [], blocker)


def test_summary_cell(tmp_path):
    export_report(SuiteReport("2-HL NN", IMAGE, 7290, 1954, 2521.8), [], tmp_path)
    lines = (tmp_path / "summary.tsv").read_text().splitlines()
    assert lines[0].split("\t") == ["classifier", "suite", "produced", "misrecognitions", "rate",
                                    "increase_vs_image", "generation_seconds"]
    assert lines[1].split("\t") == ["2-HL NN", "image", "7290", "1954", "26.80%", "", "2521.80"]


def test_both_time_metrics():
    r = SuiteReport("sut", IMAGE, 7290, 1697, 2521.80)
    assert round(r.seconds_per_image, 3) == 0.346
    assert round(r.seconds_per_misrecognition, 2) == 1.49


# -- extrapolation -----------------------------------------------------------

def test_extrapolation_reference_numbers():
    e = extrapolate_time(ExtrapolationInputs(), 50_000)
    assert e.automated_hours == pytest.approx(6.83, abs=0.01)
    assert e.manual_hours == pytest.approx(146.20, abs=0.05)
    assert 100 * e.reduction == pytest.approx(95.32, abs=0.05)
    assert e.total_images == 100_000


def test_extrapolation_is_linear():
    a = extrapolate_time(target_images_per_approach=10_000)
    b = extrapolate_time(target_images_per_approach=20_000)
    assert b.automated_hours == pytest.approx(2 * a.automated_hours)
    assert b.reduction == pytest.approx(a.reduction)


@pytest.mark.parametrize("kwargs", [dict(rates={}), dict(rates={"image": (0, 10)}), dict(rates={"x": (1, -1)}),
                                    dict(manual_minutes=0)])
def test_extrapolation_rejects_nonpositive(kwargs):
    with pytest.raises(ValueError):
        ExtrapolationInputs(**kwargs)
