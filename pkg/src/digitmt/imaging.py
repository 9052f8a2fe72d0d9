"""Grayscale raster helpers: IDX/PGM file I/O, mass centering, binarization.

Images are ``numpy.uint8`` arrays of shape ``(height, width)``, white digit on a
black background as in MNIST.  Binary masks are boolean arrays of the same
shape.  Image stacks read from IDX files have shape ``(count, rows, cols)``.
"""
import gzip
import math
import struct
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import (
    AllBlackImage,
    DimensionMismatch,
    LabelOutOfRange,
    MaxvalNot255,
    TruncatedFile,
    UnsupportedFormat,
    WrongMagic,
)

IDX_IMAGES_MAGIC = 2051
IDX_LABELS_MAGIC = 2049
DEFAULT_THRESHOLD = 128


class Centroid(NamedTuple):
    x: float
    y: float


def as_image(data) -> np.ndarray:
    img = np.asarray(data)
    if img.ndim != 2 or img.shape[0] < 1 or img.shape[1] < 1:
        raise DimensionMismatch(f"expected a 2-D image, got shape {img.shape}")
    if img.dtype != np.uint8:
        if img.size and (img.min() < 0 or img.max() > 255):
            raise ValueError("pixel intensities must lie in 0..255")
        img = img.astype(np.uint8)
    return img


def _read_bytes(path) -> bytes:
    raw = Path(path).read_bytes()
    # MNIST is usually distributed gzipped; accept both forms.
    if raw[:2] == b"\x1f\x8b":
        raw = gzip.decompress(raw)
    return raw


def _write_bytes(path, payload: bytes) -> None:
    path = Path(path)
    if path.suffix == ".gz":
        # mtime=0 keeps the compressed bytes reproducible
        payload = gzip.compress(payload, mtime=0)
    path.write_bytes(payload)


def load_idx_images(path) -> np.ndarray:
    raw = _read_bytes(path)
    if len(raw) < 16:
        raise TruncatedFile(f"{path}: IDX image header needs 16 bytes, got {len(raw)}")
    magic, count, rows, cols = struct.unpack(">IIII", raw[:16])
    if magic != IDX_IMAGES_MAGIC:
        raise WrongMagic(f"{path}: magic {magic}, expected {IDX_IMAGES_MAGIC}")
    if rows == 0 or cols == 0:
        raise DimensionMismatch(f"{path}: declared image size {rows}x{cols}")
    expected = 16 + count * rows * cols
    if len(raw) < expected:
        raise TruncatedFile(f"{path}: {len(raw)} bytes, header declares {expected}")
    if len(raw) > expected:
        raise DimensionMismatch(f"{path}: {len(raw) - expected} bytes beyond the declared payload")
    return np.frombuffer(raw, dtype=np.uint8, offset=16).reshape(count, rows, cols)


def load_idx_labels(path) -> np.ndarray:
    raw = _read_bytes(path)
    if len(raw) < 8:
        raise TruncatedFile(f"{path}: IDX label header needs 8 bytes, got {len(raw)}")
    magic, count = struct.unpack(">II", raw[:8])
    if magic != IDX_LABELS_MAGIC:
        raise WrongMagic(f"{path}: magic {magic}, expected {IDX_LABELS_MAGIC}")
    if len(raw) < 8 + count:
        raise TruncatedFile(f"{path}: {len(raw)} bytes, header declares {8 + count}")
    if len(raw) > 8 + count:
        raise DimensionMismatch(f"{path}: {len(raw) - 8 - count} bytes beyond the declared payload")
    labels = np.frombuffer(raw, dtype=np.uint8, offset=8)
    if labels.size and labels.max() > 9:
        bad = int(np.argmax(labels > 9))
        raise LabelOutOfRange(f"{path}: label {labels[bad]} at index {bad}")
    return labels


def save_idx_images(images, path) -> None:
    images = np.asarray(images, dtype=np.uint8)
    if images.ndim != 3:
        raise DimensionMismatch(f"expected (count, rows, cols), got {images.shape}")
    count, rows, cols = images.shape
    header = struct.pack(">IIII", IDX_IMAGES_MAGIC, count, rows, cols)
    _write_bytes(path, header + np.ascontiguousarray(images).tobytes())


def save_idx_labels(labels, path) -> None:
    labels = np.asarray(labels)
    if labels.size and (labels.min() < 0 or labels.max() > 9):
        raise LabelOutOfRange("labels must lie in 0..9")
    header = struct.pack(">II", IDX_LABELS_MAGIC, labels.size)
    _write_bytes(path, header + labels.astype(np.uint8).tobytes())


MNIST_FILES = {
    "train_images": "train-images-idx3-ubyte",
    "train_labels": "train-labels-idx1-ubyte",
    "test_images": "t10k-images-idx3-ubyte",
    "test_labels": "t10k-labels-idx1-ubyte",
}


def find_mnist_files(directory) -> dict:
    """Locate the four MNIST IDX files in ``directory`` (plain or ``.gz``, ``-`` or ``.`` before ``idx``)."""
    directory = Path(directory)
    found = {}
    for key, name in MNIST_FILES.items():
        dotted = name.replace("-idx", ".idx")
        candidates = [directory / f"{stem}{ext}" for stem in (name, dotted) for ext in ("", ".gz")]
        hit = next((c for c in candidates if c.is_file()), None)
        if hit is None:
            raise FileNotFoundError(f"{candidates[0]} (or .gz) not found")
        found[key] = hit
    return found


def _pgm_tokens(raw: bytes, path):
    """Yield (token, end_offset) for the four P5 header fields, skipping comments."""
    pos = 0
    found = 0
    while found < 4:
        while pos < len(raw) and raw[pos:pos + 1].isspace():
            pos += 1
        if pos < len(raw) and raw[pos:pos + 1] == b"#":
            while pos < len(raw) and raw[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos:pos + 1].isspace() and raw[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise TruncatedFile(f"{path}: PGM header ends early")
        found += 1
        yield raw[start:pos], pos


def read_pgm(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if raw[:2] != b"P5":
        raise UnsupportedFormat(f"{path}: only binary PGM (P5) is supported, got {raw[:2]!r}")
    fields = []
    end = 0
    for token, end in _pgm_tokens(raw, path):
        fields.append(token)
    try:
        width, height, maxval = (int(t) for t in fields[1:])
    except ValueError as exc:
        raise UnsupportedFormat(f"{path}: bad PGM header {fields!r}") from exc
    if maxval != 255:
        raise MaxvalNot255(f"{path}: maxval {maxval}")
    if width < 1 or height < 1:
        raise DimensionMismatch(f"{path}: image size {width}x{height}")
    # exactly one whitespace byte separates the header from the raster
    start = end + 1
    if len(raw) < start + width * height:
        raise TruncatedFile(f"{path}: raster needs {width * height} bytes")
    return np.frombuffer(raw, dtype=np.uint8, count=width * height, offset=start).reshape(height, width)


def pgm_bytes(img) -> bytes:
    img = as_image(img)
    height, width = img.shape
    return b"P5\n%d %d\n255\n" % (width, height) + np.ascontiguousarray(img).tobytes()


def write_pgm(img, path) -> None:
    Path(path).write_bytes(pgm_bytes(img))


def center_of_mass(img) -> Centroid:
    img = as_image(img).astype(np.float64)
    total = img.sum()
    if total <= 0:
        raise AllBlackImage("center of mass is undefined for an all-black image")
    rows, cols = np.indices(img.shape)
    return Centroid(float((img * cols).sum() / total), float((img * rows).sum() / total))


def round_half_away(value: float) -> int:
    return int(math.copysign(math.floor(abs(value) + 0.5), value))


def shift_image(img, dx: int, dy: int) -> np.ndarray:
    """Translate by whole pixels; pixels leaving the frame are lost, vacated ones are 0."""
    img = as_image(img)
    height, width = img.shape
    out = np.zeros_like(img)
    if abs(dx) >= width or abs(dy) >= height:
        return out
    src = img[max(0, -dy):height - max(0, dy), max(0, -dx):width - max(0, dx)]
    out[max(0, dy):max(0, dy) + src.shape[0], max(0, dx):max(0, dx) + src.shape[1]] = src
    return out


def centering_offset(img) -> tuple[int, int]:
    height, width = as_image(img).shape
    cx, cy = center_of_mass(img)

    def offset(residual):
        # A residual of exactly half a pixel is already as centered as an
        # integer shift can make it; moving would oscillate on re-centering.
        return 0 if abs(residual) <= 0.5 else round_half_away(residual)

    return offset((width - 1) / 2 - cx), offset((height - 1) / 2 - cy)


def center_digit(img) -> np.ndarray:
    dx, dy = centering_offset(img)
    return shift_image(img, dx, dy)


def binarize(img, threshold: int = DEFAULT_THRESHOLD) -> np.ndarray:
    return as_image(img) >= threshold
