"""Image-level metamorphic operators and their 3-level parameter grid.

Every operator is a pure function of ``(image, parameters[, seed])`` returning a
new uint8 image of the same size.  A :class:`TransformPlan` picks one level per
operator family; :func:`apply_plan` always runs the families in
``FAMILIES`` order.
"""
import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from . import rng
from .errors import MalformedGrid, NonPositiveSigma
from .imaging import as_image


class Family(str, Enum):
    BLUR_X = "blur_x"
    BLUR_Y = "blur_y"
    NOISE = "noise"
    SHEAR = "shear"
    ROTATE = "rotate"
    ERODE = "erode"


FAMILIES = tuple(Family)
LEVELS_PER_FAMILY = 3
DEFAULT_SUITE_SEED = rng.DEFAULT_SEED


def _to_uint8(values: np.ndarray) -> np.ndarray:
    return np.clip(np.floor(values + 0.5), 0, 255).astype(np.uint8)


def gaussian_kernel(sigma: float) -> np.ndarray:
    if not sigma > 0:
        raise NonPositiveSigma(f"blur sigma must be positive, got {sigma}")
    radius = math.ceil(3 * sigma)
    taps = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-0.5 * (taps / sigma) ** 2)
    return kernel / kernel.sum()


def gaussian_blur_1d(img, axis: str, sigma: float) -> np.ndarray:
    """Blur along ``axis`` ("x" = along rows, "y" = along columns).

    The border is mirrored including the edge pixel (d c b a | a b c d), which
    conserves total intensity before rounding.
    """
    img = as_image(img)
    kernel = gaussian_kernel(sigma)
    radius = len(kernel) // 2
    ax = {"x": 1, "y": 0}[axis.lower()]
    data = np.moveaxis(img.astype(np.float64), ax, -1)
    padded = np.pad(data, [(0, 0), (radius, radius)], mode="symmetric")
    n = data.shape[-1]
    out = np.zeros_like(data)
    for k, weight in enumerate(kernel):
        out += weight * padded[:, k:k + n]
    return _to_uint8(np.moveaxis(out, -1, ax))


def add_gaussian_noise(img, sigma: float, seed: int) -> np.ndarray:
    img = as_image(img)
    if sigma < 0:
        raise ValueError(f"noise sigma must be non-negative, got {sigma}")
    if sigma == 0:
        return img.copy()
    deltas = np.floor(rng.standard_normals(seed, img.size) * sigma + 0.5)
    return _to_uint8(img.astype(np.float64) + deltas.reshape(img.shape))


def bilinear_sample(img: np.ndarray, sx: np.ndarray, sy: np.ndarray) -> np.ndarray:
    """Sample ``img`` at fractional (x, y) positions; reads outside the frame are 0."""
    height, width = img.shape
    padded = np.zeros((height + 2, width + 2), dtype=np.float64)
    padded[1:-1, 1:-1] = img
    x0 = np.floor(sx)
    y0 = np.floor(sy)
    fx = sx - x0
    fy = sy - y0
    # shift by one for the zero frame, then clamp far-away reads onto it
    xi = np.clip(x0.astype(np.int64) + 1, 0, width + 1)
    yi = np.clip(y0.astype(np.int64) + 1, 0, height + 1)
    xj = np.clip(x0.astype(np.int64) + 2, 0, width + 1)
    yj = np.clip(y0.astype(np.int64) + 2, 0, height + 1)
    return (
        padded[yi, xi] * (1 - fx) * (1 - fy)
        + padded[yi, xj] * fx * (1 - fy)
        + padded[yj, xi] * (1 - fx) * fy
        + padded[yj, xj] * fx * fy
    )


def shear(img, factor: float) -> np.ndarray:
    img = as_image(img)
    if not abs(factor) < 5:
        raise ValueError(f"shear factor must satisfy |factor| < 5, got {factor}")
    if factor == 0:
        return img.copy()
    height, width = img.shape
    ys, xs = np.indices(img.shape, dtype=np.float64)
    cy = (height - 1) / 2
    sx = xs - factor * (ys - cy)
    return _to_uint8(bilinear_sample(img, sx, ys))


def rotate(img, degrees: float) -> np.ndarray:
    """Rotate about the image center; positive angles turn counter-clockwise on screen."""
    img = as_image(img)
    if not abs(degrees) <= 180:
        raise ValueError(f"rotation must satisfy |degrees| <= 180, got {degrees}")
    if degrees == 0:
        return img.copy()
    height, width = img.shape
    cx, cy = (width - 1) / 2, (height - 1) / 2
    theta = math.radians(degrees)
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    ys, xs = np.indices(img.shape, dtype=np.float64)
    dx, dy = xs - cx, ys - cy
    sx = cx + cos_t * dx - sin_t * dy
    sy = cy + sin_t * dx + cos_t * dy
    return _to_uint8(bilinear_sample(img, sx, sy))


def erode(img, iterations: int) -> np.ndarray:
    """Grayscale erosion with a 3x3 cross; outside the frame counts as 255."""
    img = as_image(img)
    if iterations < 1:
        raise ValueError(f"erosion needs at least one iteration, got {iterations}")
    out = img
    for _ in range(int(iterations)):
        padded = np.pad(out, 1, mode="constant", constant_values=255)
        out = np.minimum.reduce([
            padded[1:-1, 1:-1],
            padded[:-2, 1:-1],
            padded[2:, 1:-1],
            padded[1:-1, :-2],
            padded[1:-1, 2:],
        ])
    return out


@dataclass(frozen=True)
class LevelGrid:
    blur_x: tuple = (0.5, 1.0, 1.5)
    blur_y: tuple = (0.5, 1.0, 1.5)
    noise: tuple = (8.0, 16.0, 24.0)
    shear: tuple = (0.1, 0.2, 0.3)
    rotate: tuple = (5.0, 10.0, 15.0)
    erode: tuple = (1, 2, 3)
    suite_seed: int = DEFAULT_SUITE_SEED

    def __post_init__(self):
        for family in FAMILIES:
            values = tuple(getattr(self, family.value))
            if len(values) != LEVELS_PER_FAMILY:
                raise MalformedGrid(f"{family.value}: expected {LEVELS_PER_FAMILY} levels, got {len(values)}")
            if not all(math.isfinite(v) for v in values):
                raise MalformedGrid(f"{family.value}: levels must be finite")
            if family is Family.ERODE:
                if any(v != int(v) or v < 1 for v in values):
                    raise MalformedGrid("erode: levels are iteration counts >= 1")
                values = tuple(int(v) for v in values)
            elif family in (Family.BLUR_X, Family.BLUR_Y) and any(v <= 0 for v in values):
                raise MalformedGrid(f"{family.value}: blur sigmas must be positive")
            elif family is Family.NOISE and any(v < 0 for v in values):
                raise MalformedGrid("noise: sigmas must be non-negative")
            object.__setattr__(self, family.value, tuple(values))

    def level(self, family: Family, index: int):
        return getattr(self, Family(family).value)[index]


@dataclass(frozen=True, order=True)
class TransformPlan:
    levels: tuple
    case_seed: int = field(default=0, compare=False)

    def __post_init__(self):
        if len(self.levels) != len(FAMILIES) or not all(0 <= i < LEVELS_PER_FAMILY for i in self.levels):
            raise MalformedGrid(f"plan needs six level indices in 0..2, got {self.levels}")

    @property
    def rank(self) -> int:
        rank = 0
        for index in self.levels:
            rank = rank * LEVELS_PER_FAMILY + index
        return rank

    def describe(self) -> str:
        return "image:" + "".join(str(i) for i in self.levels)


def case_seed(suite_seed: int, rank: int) -> int:
    return rng.mix64(suite_seed, rank)


def enumerate_plans(grid: LevelGrid) -> list[TransformPlan]:
    for family in FAMILIES:
        if len(getattr(grid, family.value)) != LEVELS_PER_FAMILY:
            raise MalformedGrid(f"{family.value}: expected {LEVELS_PER_FAMILY} levels")
    plans = []
    for rank, levels in enumerate(itertools.product(range(LEVELS_PER_FAMILY), repeat=len(FAMILIES))):
        plans.append(TransformPlan(levels, case_seed(grid.suite_seed, rank)))
    return plans


def apply_plan(img, grid: LevelGrid, plan: TransformPlan) -> np.ndarray:
    chosen = dict(zip(FAMILIES, plan.levels))
    out = as_image(img)
    out = gaussian_blur_1d(out, "x", grid.level(Family.BLUR_X, chosen[Family.BLUR_X]))
    out = gaussian_blur_1d(out, "y", grid.level(Family.BLUR_Y, chosen[Family.BLUR_Y]))
    out = add_gaussian_noise(out, grid.level(Family.NOISE, chosen[Family.NOISE]), plan.case_seed)
    out = shear(out, grid.level(Family.SHEAR, chosen[Family.SHEAR]))
    out = rotate(out, grid.level(Family.ROTATE, chosen[Family.ROTATE]))
    return erode(out, grid.level(Family.ERODE, chosen[Family.ERODE]))


def _parse_number(text: str, key: str, lineno: int):
    try:
        return float(text)
    except ValueError:
        raise MalformedGrid(f"line {lineno}: {key}: {text!r} is not a number") from None


def parse_grid(text: str) -> LevelGrid:
    """Parse a grid file.

    One ``key = value ...`` entry per line, ``#`` starts a comment.  Keys are
    the six family names (three numbers each) and ``suite_seed`` (one integer).
    Missing keys keep their defaults; unknown or repeated keys are errors.
    """
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise MalformedGrid(f"line {lineno}: expected 'key = values'")
        key, _, rest = (part.strip() for part in line.partition("="))
        if key in values:
            raise MalformedGrid(f"line {lineno}: duplicate key {key!r}")
        tokens = rest.replace(",", " ").split()
        if key == "suite_seed":
            if len(tokens) != 1:
                raise MalformedGrid(f"line {lineno}: suite_seed takes one integer")
            try:
                values[key] = int(tokens[0], 0)
            except ValueError:
                raise MalformedGrid(f"line {lineno}: suite_seed {tokens[0]!r} is not an integer") from None
        elif key in {f.value for f in FAMILIES}:
            values[key] = tuple(_parse_number(t, key, lineno) for t in tokens)
        else:
            raise MalformedGrid(f"line {lineno}: unknown key {key!r}")
    return LevelGrid(**values)


def load_grid(path) -> LevelGrid:
    return parse_grid(Path(path).read_text())


def format_grid(grid: LevelGrid) -> str:
    lines = [f"{f.value} = " + " ".join(f"{v:g}" for v in getattr(grid, f.value)) for f in FAMILIES]
    lines.append(f"suite_seed = {grid.suite_seed}")
    return "\n".join(lines) + "\n"
