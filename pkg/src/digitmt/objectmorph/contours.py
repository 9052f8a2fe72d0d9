"""Moore-neighbour boundary tracing with a state-repeat (Jacob-style) stopping criterion."""
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

OUTER = "outer"
HOLE = "hole"
MIN_COMPONENT_SIZE = 2

# Clockwise on screen (y grows downwards), starting west.
RING = ((0, -1), (-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1))
_RING_INDEX = {offset: i for i, offset in enumerate(RING)}

_EIGHT = np.ones((3, 3), dtype=bool)
_FOUR = ndimage.generate_binary_structure(2, 1)


@dataclass(frozen=True, eq=False)
class ContourPolyline:
    """Closed outline as an ``(n, 2)`` float array of (x, y) pixel-center coordinates.

    Outer contours run counter-clockwise as displayed (y down) and holes
    clockwise.  The first point is the top-most, then left-most, one.
    """

    points: np.ndarray
    orientation: str = OUTER
    closed: bool = True

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64).reshape(-1, 2)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)

    def __eq__(self, other):
        if not isinstance(other, ContourPolyline):
            return NotImplemented
        return self.orientation == other.orientation and np.array_equal(self.points, other.points)

    def with_points(self, points) -> "ContourPolyline":
        return ContourPolyline(points, self.orientation, self.closed)

    def pixel_set(self) -> set:
        return {(int(round(x)), int(round(y))) for x, y in self.points}


def moore_trace(mask: np.ndarray, start: tuple, backtrack: tuple, max_steps: int | None = None) -> list:
    """Trace the boundary through ``start`` (row, col), entered from background cell ``backtrack``.

    ``mask`` must have a background frame so neighbour reads stay in bounds.
    Returns the visited (row, col) pixels.  The walk is a function of the
    (pixel, backtrack) state, so it stops when the state reached by the first
    move comes round again.  Waiting for ``(start, backtrack)`` itself is not
    enough: on thin shapes such as a horizontal pair the start pixel is
    re-entered from another side and that state never recurs.
    """
    if max_steps is None:
        max_steps = 4 * int(mask.sum()) + 16
    p, b = start, backtrack
    contour = [p]
    first = None
    for _ in range(max_steps):
        d = _RING_INDEX[(b[0] - p[0], b[1] - p[1])]
        for i in range(1, 9):
            dy, dx = RING[(d + i) % 8]
            cand = (p[0] + dy, p[1] + dx)
            if mask[cand]:
                by, bx = RING[(d + i - 1) % 8]
                p, b = cand, (p[0] + by, p[1] + bx)
                break
        else:
            return contour  # isolated pixel
        if first is None:
            first = (p, b)
        elif (p, b) == first:
            if len(contour) > 1 and contour[-1] == start:
                contour.pop()
            return contour
        contour.append(p)
    raise RuntimeError(f"contour trace from {start} did not close within {max_steps} steps")


def signed_area(points: np.ndarray) -> float:
    """Shoelace area; positive means counter-clockwise as displayed with y down."""
    x, y = points[:, 0], -points[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _orient(points: np.ndarray, orientation: str) -> np.ndarray:
    area = signed_area(points)
    if (orientation == OUTER and area < 0) or (orientation == HOLE and area > 0):
        points = np.concatenate([points[:1], points[:0:-1]])
    # first point: top-most, then left-most
    first = int(np.lexsort((points[:, 0], points[:, 1]))[0])
    return np.roll(points, -first, axis=0)


def _to_xy(trace: list) -> np.ndarray:
    # trace is on the padded mask: (row, col) shifted by one
    return np.array([(c - 1, r - 1) for r, c in trace], dtype=np.float64)


def trace_contours(binary, min_size: int = MIN_COMPONENT_SIZE) -> list[ContourPolyline]:
    """All outer and hole contours of the 8-connected foreground components.

    Components are visited in row-major order of their first pixel; each
    component contributes its outer contour followed by its hole contours (holes
    are 4-connected background regions, also ordered row-major).  Components and
    holes with fewer than ``min_size`` pixels are skipped.
    """
    mask = np.pad(np.asarray(binary, dtype=bool), 1)
    labels, count = ndimage.label(mask, structure=_EIGHT)
    if count == 0:
        return []
    firsts = ndimage.minimum_position(np.arange(mask.size).reshape(mask.shape), labels, range(1, count + 1))
    contours = []
    for label, start in sorted(zip(range(1, count + 1), firsts), key=lambda item: item[1]):
        component = labels == label
        if int(component.sum()) < min_size:
            continue
        start = (int(start[0]), int(start[1]))
        trace = moore_trace(component, start, (start[0], start[1] - 1))
        contours.append(ContourPolyline(_orient(_to_xy(trace), OUTER), OUTER))

        background, nbg = ndimage.label(~component, structure=_FOUR)
        outside = background[0, 0]
        for hole in range(1, nbg + 1):
            if hole == outside:
                continue
            region = background == hole
            if int(region.sum()) < min_size:
                continue
            top = np.argwhere(region)[0]
            # the pixel above the first hole pixel is foreground of this component
            start = (int(top[0]) - 1, int(top[1]))
            trace = moore_trace(component, start, (int(top[0]), int(top[1])))
            contours.append(ContourPolyline(_orient(_to_xy(trace), HOLE), HOLE))
    return contours
