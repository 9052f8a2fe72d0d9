"""Line-delimited protocol for classifiers running in another process.

Request (one line on the child's stdin)::

    P <case-id> <784 space-separated integers 0-255>

Response (one line on the child's stdout)::

    R <case-id> <label 0-9> <10 space-separated non-negative reals>

One request is in flight at a time and the response must echo the case-id.
"""
import math
import queue
import shlex
import subprocess
import sys
import threading
from itertools import count

import numpy as np

from ..errors import ProcessSpawnFailure, ProtocolViolation, Timeout
from .base import N_CLASSES, Classifier, Prediction, check_image

DEFAULT_TIMEOUT = 10.0


def format_request(case_id: str, img) -> str:
    if not case_id or any(ch.isspace() for ch in case_id):
        raise ValueError(f"case-id must be a non-empty token, got {case_id!r}")
    pixels = check_image(img).reshape(-1)
    return f"P {case_id} " + " ".join(map(str, pixels.tolist()))


def parse_request(line: str):
    fields = line.split()
    if len(fields) != 2 + 784 or fields[0] != "P":
        raise ProtocolViolation(f"malformed request line ({len(fields)} fields)")
    try:
        pixels = np.array([int(v) for v in fields[2:]])
    except ValueError:
        raise ProtocolViolation("request pixels must be integers") from None
    if pixels.min() < 0 or pixels.max() > 255:
        raise ProtocolViolation("request pixels must lie in 0..255")
    return fields[1], pixels.astype(np.uint8).reshape(28, 28)


def format_response(case_id: str, prediction: Prediction) -> str:
    return f"R {case_id} {prediction.label} " + " ".join(repr(float(s)) for s in prediction.scores)


def parse_response(line: str, case_id: str) -> Prediction:
    fields = line.split()
    if len(fields) != 3 + N_CLASSES or fields[0] != "R":
        raise ProtocolViolation(f"malformed response line: {line.strip()[:80]!r}")
    if fields[1] != case_id:
        raise ProtocolViolation(f"response for case {fields[1]!r}, expected {case_id!r}")
    try:
        label = int(fields[2])
        scores = tuple(float(v) for v in fields[3:])
    except ValueError:
        raise ProtocolViolation(f"non-numeric response: {line.strip()[:80]!r}") from None
    if not 0 <= label < N_CLASSES:
        raise ProtocolViolation(f"label {label} outside 0..9")
    if not all(math.isfinite(s) and s >= 0 for s in scores):
        raise ProtocolViolation("scores must be finite and non-negative")
    expected = Prediction.from_scores(scores)
    if expected.label != label:
        raise ProtocolViolation(f"label {label} is not the (lowest-digit) argmax of the scores")
    return Prediction(label, scores)


class ExternalClassifier(Classifier):
    """Talks to a child process over the line protocol, one request at a time.

    The process is spawned lazily and kept alive between predictions.  Not
    safe for concurrent callers; give each worker its own instance.
    """

    def __init__(self, command, timeout: float = DEFAULT_TIMEOUT, name: str | None = None):
        self.argv = shlex.split(command) if isinstance(command, str) else list(command)
        if not self.argv:
            raise ValueError("external classifier command is empty")
        self.timeout = timeout
        self.name = name or self.argv[0]
        self._proc = None
        self._lines = None
        self._ids = count()

    def _spawn(self):
        try:
            self._proc = subprocess.Popen(
                self.argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE, text=True, bufsize=1,
            )
        except OSError as exc:
            raise ProcessSpawnFailure(f"cannot start {self.argv[0]!r}: {exc}") from exc
        self._lines = queue.Queue()
        threading.Thread(target=self._pump, args=(self._proc.stdout, self._lines), daemon=True).start()

    @staticmethod
    def _pump(stream, lines):
        for line in stream:
            lines.put(line)
        lines.put(None)

    def predict(self, img, case_id: str | None = None) -> Prediction:
        if self._proc is None:
            self._spawn()
        case_id = case_id or f"q{next(self._ids)}"
        request = format_request(case_id, img)
        try:
            self._proc.stdin.write(request + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise ProtocolViolation(f"classifier process closed its input: {exc}") from exc
        try:
            line = self._lines.get(timeout=self.timeout)
        except queue.Empty:
            self.close()
            raise Timeout(f"no response for case {case_id} within {self.timeout} s") from None
        if line is None:
            raise ProtocolViolation("classifier process exited without answering")
        return parse_response(line, case_id)

    def predict_batch(self, images, case_ids=None) -> list[Prediction]:
        if case_ids is None:
            return [self.predict(img) for img in images]
        return [self.predict(img, case_id) for img, case_id in zip(images, case_ids)]

    def close(self):
        proc, self._proc = self._proc, None
        if proc is None:
            return
        try:
            proc.stdin.close()
        except OSError:
            pass
        try:
            proc.wait(timeout=2)
        except subprocess.TimeoutExpired:
            proc.kill()
            proc.wait()


def serve(classifier: Classifier, stdin=None, stdout=None) -> int:
    """Answer protocol requests from ``stdin`` until EOF; returns the number served."""
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    served = 0
    for line in stdin:
        if not line.strip():
            continue
        case_id, img = parse_request(line)
        stdout.write(format_response(case_id, classifier.predict(img)) + "\n")
        stdout.flush()
        served += 1
    return served
