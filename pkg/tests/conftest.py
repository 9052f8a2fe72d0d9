import os
import sys
import textwrap
from pathlib import Path

import numpy as np
import pytest

from digitmt.harness import load_seeds
from digitmt.imaging import find_mnist_files, load_idx_images, load_idx_labels
from digitmt.sut import MlpClassifier, TrainConfig, mlp_train
from digitmt.sut.mlp import accuracy

ROOT = Path(__file__).resolve().parents[1]
MNIST_SUBSET = ROOT / "data" / "mnist-subset"


@pytest.fixture(scope="session")
def seeds():
    return load_seeds()


@pytest.fixture(scope="session")
def mnist_subset():
    paths = find_mnist_files(MNIST_SUBSET)
    return {key: (load_idx_images(p) if key.endswith("images") else load_idx_labels(p)) for key, p in paths.items()}


@pytest.fixture(scope="session")
def trained_model(mnist_subset):
    """The built-in MLP trained at default hyperparameters on the bundled subset."""
    model = mlp_train(mnist_subset["train_images"], mnist_subset["train_labels"], TrainConfig())
    model.test_accuracy = accuracy(model, mnist_subset["test_images"], mnist_subset["test_labels"])
    return model


@pytest.fixture(scope="session")
def mlp(trained_model):
    return MlpClassifier(trained_model)


@pytest.fixture
def stub(tmp_path):
    """Write a Python script speaking the line protocol; returns its command line."""
    def make(body: str, name: str = "stub.py") -> list:
        path = tmp_path / name
        path.write_text(textwrap.dedent(body))
        return [sys.executable, str(path)]
    return make


def full_mnist_dir():
    """Directory holding the complete MNIST set, if one is available."""
    for candidate in (os.environ.get("DIGITMT_MNIST"), ROOT / "data" / "mnist"):
        if candidate and Path(candidate).is_dir():
            try:
                find_mnist_files(candidate)
                return Path(candidate)
            except FileNotFoundError:
                pass
    return None


def random_image(rng, shape=(28, 28)):
    return rng.integers(0, 256, size=shape, dtype=np.uint8)


# -- acceptance criteria: one pass/fail line each ----------------------------

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by a test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or (report.when != "call" and report.passed):
        return
    number, title = marker.args
    passed = report.passed and not hasattr(report, "wasxfail")
    previous = _criteria.get(number, (title, True, ""))
    reason = "" if passed else str(report.longrepr).strip().splitlines()[-1][:160]
    _criteria[number] = (title, previous[1] and passed, previous[2] or reason)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, passed, reason = _criteria[number]
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {title}"
        terminalreporter.write_line(line + (f"  ({reason})" if reason else ""))
