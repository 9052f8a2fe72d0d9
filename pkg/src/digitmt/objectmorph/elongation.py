"""Segment elongation: move the end points of annotated outline runs along the run."""
import itertools
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ConfigError, DegenerateSegment
from ..imaging import DEFAULT_THRESHOLD, as_image, binarize, center_digit
from .contours import ContourPolyline, trace_contours
from .raster import DEFAULT_SUPERSAMPLE, rasterize
from .segments import SEGMENT_COUNTS, SegmentAnnotation, check_annotations


@dataclass(frozen=True)
class ElongationLevels:
    deltas: tuple = (-2.0, 0.0, 2.0)

    def __post_init__(self):
        deltas = tuple(float(d) for d in self.deltas)
        if len(deltas) != 3:
            raise ConfigError(f"need exactly 3 elongation levels, got {len(deltas)}")
        if 0.0 not in deltas:
            raise ConfigError("elongation levels must include 0")
        if len(set(deltas)) != 3:
            raise ConfigError("elongation levels must be distinct")
        if not all(np.isfinite(deltas)):
            raise ConfigError("elongation levels must be finite")
        object.__setattr__(self, "deltas", deltas)


@dataclass(frozen=True)
class ObjectSettings:
    """Everything besides the seeds that defines an object-based suite."""

    levels: ElongationLevels = field(default_factory=ElongationLevels)
    supersample: int = DEFAULT_SUPERSAMPLE
    threshold: int = DEFAULT_THRESHOLD
    segment_counts: dict = field(default_factory=lambda: dict(SEGMENT_COUNTS))


@dataclass(frozen=True)
class ObjectPlan:
    """One (delta_start, delta_end) pair per annotated segment."""

    deltas: tuple
    rank: int = field(default=0, compare=False)

    @property
    def is_identity(self) -> bool:
        return all(ds == 0 and de == 0 for ds, de in self.deltas)

    def describe(self) -> str:
        return "object:" + ";".join(f"{ds:+g}/{de:+g}" for ds, de in self.deltas)


@dataclass(frozen=True, eq=False)
class SeedObject:
    label: int
    image: np.ndarray
    contours: tuple
    segments: tuple

    @classmethod
    def build(cls, label: int, image, segments, threshold: int = DEFAULT_THRESHOLD,
              segment_counts: dict | None = None) -> "SeedObject":
        """Center the seed, trace its outline and attach the annotations."""
        image = center_digit(as_image(image))
        contours = tuple(trace_contours(binarize(image, threshold)))
        segments = tuple(segments)
        check_annotations(segments, contours)
        counts = SEGMENT_COUNTS if segment_counts is None else segment_counts
        if label in counts and counts[label] != len(segments):
            raise ConfigError(f"digit {label}: {len(segments)} segments annotated, expected {counts[label]}")
        return cls(label, image, contours, segments)


def elongate(seed: SeedObject, plan: ObjectPlan) -> list[ContourPolyline]:
    if len(plan.deltas) != len(seed.segments):
        raise ValueError(f"plan has {len(plan.deltas)} delta pairs, seed has {len(seed.segments)} segments")
    edited = [np.array(c.points) for c in seed.contours]
    for seg, (d_start, d_end) in zip(seed.segments, plan.deltas):
        if d_start == 0 and d_end == 0:
            continue
        pts = seed.contours[seg.contour_index].points
        direction = pts[seg.end - 1] - pts[seg.start]
        norm = np.hypot(*direction)
        if norm == 0:
            raise DegenerateSegment(f"segment {seg.segment_id} has coincident end points")
        unit = direction / norm
        w = seg.end_window
        target = edited[seg.contour_index]
        if d_start:
            target[seg.start:seg.start + w] -= unit * d_start
        if d_end:
            target[seg.end - w:seg.end] += unit * d_end
    return [c.with_points(p) for c, p in zip(seed.contours, edited)]


def enumerate_object_plans(seed: SeedObject, levels: ElongationLevels = ElongationLevels()) -> list[ObjectPlan]:
    pairs = list(itertools.product(levels.deltas, repeat=2))
    combos = itertools.product(pairs, repeat=len(seed.segments))
    return [ObjectPlan(tuple(c), rank) for rank, c in enumerate(combos)]


def generate_object_image(seed: SeedObject, plan: ObjectPlan, supersample: int = DEFAULT_SUPERSAMPLE) -> np.ndarray:
    height, width = seed.image.shape
    return center_digit(rasterize(elongate(seed, plan), width, height, supersample))


def parse_object_settings(text: str) -> ObjectSettings:
    """Parse a levels file.

    Keys: ``deltas`` (three numbers, one of them 0), ``supersample`` and
    ``threshold`` (integers), ``segments`` (ten per-digit segment counts).
    """
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, rest = (part.strip() for part in line.partition("="))
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = values'")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        tokens = rest.replace(",", " ").split()
        try:
            if key == "deltas":
                values[key] = ElongationLevels(tuple(float(t) for t in tokens))
            elif key in ("supersample", "threshold"):
                (token,) = tokens
                values[key] = int(token)
            elif key == "segments":
                counts = [int(t) for t in tokens]
                if len(counts) != 10 or min(counts) < 1:
                    raise ConfigError(f"line {lineno}: segments needs ten counts >= 1")
                values[key] = dict(enumerate(counts))
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: {key}: {exc}") from None
    settings = ObjectSettings(
        levels=values.get("deltas", ElongationLevels()),
        supersample=values.get("supersample", DEFAULT_SUPERSAMPLE),
        threshold=values.get("threshold", DEFAULT_THRESHOLD),
        segment_counts=values.get("segments", dict(SEGMENT_COUNTS)),
    )
    if settings.supersample < 1 or not 0 <= settings.threshold <= 255:
        raise ConfigError("supersample must be >= 1 and threshold within 0..255")
    return settings


def load_object_settings(path) -> ObjectSettings:
    return parse_object_settings(Path(path).read_text())
