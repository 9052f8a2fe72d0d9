"""Line-segment annotations on traced contours.

An annotation file has one segment per line::

    # segment_id contour_index start_index end_index end_window
    stem 0 3 17 2

``start_index``/``end_index`` form a half-open range into the contour's point
list and ``end_window`` is how many points at each end of the range move when
the segment is elongated.
"""
import itertools
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ConfigError, TooFewVertices

# Segments per digit for the shipped seeds.
SEGMENT_COUNTS = {0: 2, 1: 3, 2: 2, 3: 3, 4: 3, 5: 3, 6: 1, 7: 3, 8: 2, 9: 1}


@dataclass(frozen=True)
class SegmentAnnotation:
    segment_id: str
    contour_index: int
    start: int
    end: int
    end_window: int = 1

    def __post_init__(self):
        if self.end - self.start < 2:
            raise ConfigError(f"segment {self.segment_id}: range [{self.start}, {self.end}) needs >= 2 points")
        if not 1 <= self.end_window <= (self.end - self.start) // 2:
            raise ConfigError(
                f"segment {self.segment_id}: end_window {self.end_window} outside 1..{(self.end - self.start) // 2}"
            )

    @property
    def length(self) -> int:
        return self.end - self.start


def check_annotations(segments, contours) -> None:
    """Every range must index its contour, and ranges on one contour must be disjoint."""
    seen = {}
    for seg in segments:
        if not 0 <= seg.contour_index < len(contours):
            raise ConfigError(f"segment {seg.segment_id}: no contour {seg.contour_index}")
        n = len(contours[seg.contour_index])
        if not 0 <= seg.start < seg.end <= n:
            raise ConfigError(f"segment {seg.segment_id}: range [{seg.start}, {seg.end}) outside 0..{n}")
        for other in seen.get(seg.contour_index, []):
            if seg.start < other.end and other.start < seg.end:
                raise ConfigError(f"segments {other.segment_id} and {seg.segment_id} overlap")
        seen.setdefault(seg.contour_index, []).append(seg)
    ids = [s.segment_id for s in segments]
    if len(set(ids)) != len(ids):
        raise ConfigError("segment ids must be unique")


def parse_annotations(text: str) -> list[SegmentAnnotation]:
    segments = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 5:
            raise ConfigError(f"line {lineno}: expected 5 fields, got {len(fields)}")
        try:
            contour, start, end, window = (int(v) for v in fields[1:])
        except ValueError:
            raise ConfigError(f"line {lineno}: indices must be integers") from None
        segments.append(SegmentAnnotation(fields[0], contour, start, end, window))
    return segments


def load_annotations(path) -> list[SegmentAnnotation]:
    try:
        return parse_annotations(Path(path).read_text())
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def format_annotations(segments) -> str:
    lines = ["# segment_id contour_index start_index end_index end_window"]
    lines += [f"{s.segment_id} {s.contour_index} {s.start} {s.end} {s.end_window}" for s in segments]
    return "\n".join(lines) + "\n"


def _point_line_distance(points, a, b):
    ab = b - a
    norm = np.hypot(*ab)
    if norm == 0:
        return np.hypot(*(points - a).T)
    return np.abs(ab[0] * (points[:, 1] - a[1]) - ab[1] * (points[:, 0] - a[0])) / norm


def rdp(points, epsilon: float) -> list[int]:
    """Ramer-Douglas-Peucker on an open polyline; returns kept indices, endpoints included."""
    points = np.asarray(points, dtype=np.float64)
    if len(points) < 3:
        return list(range(len(points)))
    keep = {0, len(points) - 1}
    stack = [(0, len(points) - 1)]
    while stack:
        lo, hi = stack.pop()
        if hi - lo < 2:
            continue
        dist = _point_line_distance(points[lo + 1:hi], points[lo], points[hi])
        worst = int(np.argmax(dist))
        if dist[worst] > epsilon:
            mid = lo + 1 + worst
            keep.add(mid)
            stack += [(lo, mid), (mid, hi)]
    return sorted(keep)


def closed_rdp(points, epsilon: float) -> list[int]:
    """RDP on a closed contour, split at point 0 and the point farthest from it."""
    points = np.asarray(points, dtype=np.float64)
    if len(points) < 3:
        return list(range(len(points)))
    far = int(np.argmax(np.hypot(*(points - points[0]).T)))
    if far == 0:
        return [0]
    head = rdp(points[:far + 1], epsilon)
    tail = rdp(np.vstack([points[far:], points[:1]]), epsilon)
    return sorted(set(head) | {far + i for i in tail[:-1]})


def suggest_segments(contour, epsilon: float = 1.0, k: int = 1, contour_index: int = 0,
                     end_window: int = 1, close_ends: bool = False) -> list[SegmentAnnotation]:
    """Propose ``k`` segments: the longest runs between RDP vertices.

    By default the runs partition the contour, ``[v_i, v_{i+1})``.  With
    ``close_ends`` each run also takes its closing vertex, ``[v_i, v_{i+1}]``,
    and only pairwise disjoint runs are chosen; the run back to point 0 is then
    not a candidate.  Both end windows of a closed run hold a corner, so moving
    them along a straight run changes the outline instead of sliding points
    along it.

    This is an authoring aid; results are meant to be reviewed and written to
    an annotation file rather than used blindly.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    points = getattr(contour, "points", contour)
    n = len(points)
    vertices = closed_rdp(points, epsilon)
    if close_ends:
        runs = [(lo, hi + 1) for lo, hi in zip(vertices[:-1], vertices[1:])]
    else:
        runs = list(zip(vertices, vertices[1:] + [n]))
    runs = [(lo, hi) for lo, hi in runs if hi - lo >= max(2, 2 * end_window)]
    # the disjoint k-subset with the most points; earlier starts break ties
    best = None
    for combo in itertools.combinations(sorted(runs), k):
        if any(b[0] < a[1] for a, b in zip(combo, combo[1:])):
            continue
        key = (sum(hi - lo for lo, hi in combo), tuple(-lo for lo, _ in combo))
        if best is None or key > best[0]:
            best = (key, combo)
    if best is None:
        raise TooFewVertices(f"simplification gives too few disjoint runs for {k} segments")
    chosen = best[1]
    return [SegmentAnnotation(f"s{i}", contour_index, lo, hi, end_window) for i, (lo, hi) in enumerate(chosen)]
