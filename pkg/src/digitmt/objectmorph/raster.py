"""Even-odd scanline fill of contour polygons back onto a pixel grid."""
import numpy as np

from ..imaging import as_image

DEFAULT_SUPERSAMPLE = 4
_ON_EDGE_TOL = 1e-9


def _edges(contours) -> np.ndarray:
    """Stack every closed polygon's edges as rows (x0, y0, x1, y1)."""
    parts = []
    for contour in contours:
        pts = np.asarray(getattr(contour, "points", contour), dtype=np.float64).reshape(-1, 2)
        if len(pts) == 0:
            continue
        nxt = np.roll(pts, -1, axis=0)
        parts.append(np.hstack([pts, nxt]))
    return np.vstack(parts) if parts else np.zeros((0, 4))


def coverage_mask(contours, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Boolean grid ``(len(ys), len(xs))``: sample inside (even-odd) or on any edge."""
    edges = _edges(contours)
    out = np.zeros((len(ys), len(xs)), dtype=bool)
    if len(edges) == 0:
        return out
    x0, y0, x1, y1 = edges.T
    ylo, yhi = np.minimum(y0, y1), np.maximum(y0, y1)
    xlo, xhi = np.minimum(x0, x1), np.maximum(x0, x1)
    sloped = y0 != y1
    flat = ~sloped
    for row, y in enumerate(ys):
        # half-open in y so a vertex shared by two edges is counted once
        crossing = sloped & (ylo <= y) & (y < yhi)
        if crossing.any():
            t = (y - y0[crossing]) / (y1[crossing] - y0[crossing])
            xc = np.sort(x0[crossing] + t * (x1[crossing] - x0[crossing]))
            for a, b in zip(xc[0::2], xc[1::2]):
                out[row] |= (xs >= a - _ON_EDGE_TOL) & (xs <= b + _ON_EDGE_TOL)
        # boundary points count as inside: sloped edges touched at this row ...
        touching = sloped & (ylo <= y) & (y <= yhi)
        if touching.any():
            t = (y - y0[touching]) / (y1[touching] - y0[touching])
            xt = x0[touching] + t * (x1[touching] - x0[touching])
            out[row] |= (np.abs(xs[:, None] - xt[None, :]) <= _ON_EDGE_TOL).any(axis=1)
        # ... and horizontal edges lying on it
        level = flat & (np.abs(y0 - y) <= _ON_EDGE_TOL)
        for a, b in zip(xlo[level], xhi[level]):
            out[row] |= (xs >= a - _ON_EDGE_TOL) & (xs <= b + _ON_EDGE_TOL)
    return out


def sample_positions(size: int, factor: int) -> np.ndarray:
    """Subpixel sample centres in pixel-index coordinates (pixel i spans i-0.5 .. i+0.5)."""
    return (np.arange(size * factor) + 0.5) / factor - 0.5


def rasterize(contours, width: int, height: int, supersample: int = DEFAULT_SUPERSAMPLE) -> np.ndarray:
    """Fill ``contours`` jointly with the even-odd rule and box-filter down to ``width`` x ``height``.

    Contour coordinates are pixel centres, so with ``supersample=1`` a pixel is
    foreground iff its centre lies inside or on a polygon.
    """
    if supersample < 1:
        raise ValueError(f"supersample factor must be >= 1, got {supersample}")
    f = int(supersample)
    fine = coverage_mask(contours, sample_positions(width, f), sample_positions(height, f))
    blocks = fine.reshape(height, f, width, f).sum(axis=(1, 3))
    # integer round-half-up of 255 * hits / f^2
    return as_image((255 * blocks * 2 + f * f) // (2 * f * f))
