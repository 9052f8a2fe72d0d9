import gzip
import struct

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from digitmt.errors import (
    AllBlackImage,
    DimensionMismatch,
    LabelOutOfRange,
    MaxvalNot255,
    TruncatedFile,
    UnsupportedFormat,
    WrongMagic,
)
from digitmt.imaging import (
    binarize,
    center_digit,
    center_of_mass,
    load_idx_images,
    load_idx_labels,
    pgm_bytes,
    read_pgm,
    round_half_away,
    save_idx_images,
    save_idx_labels,
    shift_image,
    write_pgm,
)

images_2d = arrays(np.uint8, st.tuples(st.integers(1, 12), st.integers(1, 12)))


# -- IDX ---------------------------------------------------------------------

def test_idx_images_hand_built_blob(tmp_path):
    blob = bytes([0, 0, 8, 3]) + (1).to_bytes(4, "big") + (2).to_bytes(4, "big") + (2).to_bytes(4, "big")
    blob += bytes([10, 20, 30, 40])
    path = tmp_path / "one.idx"
    path.write_bytes(blob)
    imgs = load_idx_images(path)
    assert imgs.shape == (1, 2, 2)
    assert imgs[0].tolist() == [[10, 20], [30, 40]]
    save_idx_images(imgs, tmp_path / "again.idx")
    assert (tmp_path / "again.idx").read_bytes() == blob


def test_idx_labels_hand_built_blob(tmp_path):
    blob = bytes([0, 0, 8, 1]) + (3).to_bytes(4, "big") + bytes([0, 5, 9])
    path = tmp_path / "labels.idx"
    path.write_bytes(blob)
    assert load_idx_labels(path).tolist() == [0, 5, 9]


def test_idx_label_out_of_range(tmp_path):
    path = tmp_path / "bad.idx"
    path.write_bytes(struct.pack(">II", 2049, 2) + bytes([3, 10]))
    with pytest.raises(LabelOutOfRange):
        load_idx_labels(path)


def test_idx_wrong_magic(tmp_path):
    path = tmp_path / "x.idx"
    path.write_bytes(struct.pack(">IIII", 2049, 1, 1, 1) + b"\0")
    with pytest.raises(WrongMagic):
        load_idx_images(path)
    path.write_bytes(struct.pack(">II", 2051, 0))
    with pytest.raises(WrongMagic):
        load_idx_labels(path)


def test_idx_truncated_and_trailing(tmp_path):
    path = tmp_path / "x.idx"
    path.write_bytes(struct.pack(">IIII", 2051, 2, 2, 2) + bytes(7))
    with pytest.raises(TruncatedFile):
        load_idx_images(path)
    path.write_bytes(struct.pack(">IIII", 2051, 1, 2, 2) + bytes(5))
    with pytest.raises(DimensionMismatch):
        load_idx_images(path)
    path.write_bytes(b"\0\0\x08")
    with pytest.raises(TruncatedFile):
        load_idx_images(path)


def test_idx_gzip_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    imgs = rng.integers(0, 256, (5, 28, 28), dtype=np.uint8)
    labels = rng.integers(0, 10, 5)
    save_idx_images(imgs, tmp_path / "i.gz")
    save_idx_labels(labels, tmp_path / "l.gz")
    assert np.array_equal(load_idx_images(tmp_path / "i.gz"), imgs)
    assert load_idx_labels(tmp_path / "l.gz").tolist() == labels.tolist()
    # reproducible compressed bytes
    first = (tmp_path / "i.gz").read_bytes()
    save_idx_images(imgs, tmp_path / "i.gz")
    assert (tmp_path / "i.gz").read_bytes() == first
    assert gzip.decompress(first)[:4] == b"\0\0\x08\x03"


@settings(max_examples=40, deadline=None)
@given(arrays(np.uint8, st.tuples(st.integers(0, 4), st.integers(1, 6), st.integers(1, 6))))
def test_idx_round_trip_property(tmp_path_factory, imgs):
    path = tmp_path_factory.mktemp("idx") / "imgs.idx"
    save_idx_images(imgs, path)
    assert np.array_equal(load_idx_images(path), imgs)


def test_bundled_subset_shapes(mnist_subset):
    assert mnist_subset["train_images"].shape == (8000, 28, 28)
    assert mnist_subset["test_images"].shape == (2000, 28, 28)
    assert len(mnist_subset["test_labels"]) == 2000
    assert set(np.unique(mnist_subset["train_labels"])) == set(range(10))


# -- PGM ---------------------------------------------------------------------

def test_pgm_single_white_pixel_bytes(tmp_path):
    path = tmp_path / "p.pgm"
    write_pgm(np.array([[255]], dtype=np.uint8), path)
    assert path.read_bytes() == b"P5\n1 1\n255\n\xff"


@settings(max_examples=50, deadline=None)
@given(images_2d)
def test_pgm_round_trip(tmp_path_factory, img):
    path = tmp_path_factory.mktemp("pgm") / "img.pgm"
    write_pgm(img, path)
    assert np.array_equal(read_pgm(path), img)
    assert path.read_bytes() == pgm_bytes(img)


def test_pgm_header_with_comment(tmp_path):
    path = tmp_path / "c.pgm"
    path.write_bytes(b"P5\n# made by hand\n2 1\n255\n\x01\x02")
    assert read_pgm(path).tolist() == [[1, 2]]


def test_pgm_errors(tmp_path):
    path = tmp_path / "e.pgm"
    path.write_bytes(b"P2\n1 1\n255\n7\n")
    with pytest.raises(UnsupportedFormat):
        read_pgm(path)
    path.write_bytes(b"P5\n1 1\n65535\n\0\0")
    with pytest.raises(MaxvalNot255):
        read_pgm(path)
    path.write_bytes(b"P5\n2 2\n255\n\0\0\0")
    with pytest.raises(TruncatedFile):
        read_pgm(path)


# -- centering ---------------------------------------------------------------

def test_center_of_mass_examples():
    img = np.zeros((28, 28), np.uint8)
    img[4, 3] = 255
    assert center_of_mass(img) == (3.0, 4.0)
    img = np.zeros((5, 5), np.uint8)
    img[0, 0] = img[0, 4] = 90
    assert center_of_mass(img) == (2.0, 0.0)
    assert center_of_mass(np.full((6, 9), 3, np.uint8)) == (4.0, 2.5)
    with pytest.raises(AllBlackImage):
        center_of_mass(np.zeros((3, 3), np.uint8))


@settings(max_examples=50, deadline=None)
@given(images_2d)
def test_center_of_mass_mirror(img):
    if img.sum() == 0:
        return
    c = center_of_mass(img)
    m = center_of_mass(img[:, ::-1])
    assert m.x == pytest.approx(img.shape[1] - 1 - c.x)
    assert m.y == pytest.approx(c.y)


def _shift_oracle(img, dx, dy):
    out = np.zeros_like(img)
    h, w = img.shape
    for y in range(h):
        for x in range(w):
            if 0 <= x + dx < w and 0 <= y + dy < h:
                out[y + dy, x + dx] = img[y, x]
    return out


def test_center_point_mass():
    img = np.zeros((28, 28), np.uint8)
    img[4, 3] = 255
    out = center_digit(img)
    assert out[14, 14] == 255 and out.sum() == 255
    assert np.array_equal(out, _shift_oracle(img, 11, 10))


def test_round_half_away():
    assert [round_half_away(v) for v in (10.5, 9.5, -0.5, -1.5, 2.4, -2.6)] == [11, 10, -1, -2, 2, -3]


def test_shift_matches_oracle():
    rng = np.random.default_rng(1)
    img = rng.integers(0, 256, (7, 9), dtype=np.uint8)
    for dx, dy in [(0, 0), (2, -1), (-3, 4), (9, 0), (-1, -7)]:
        assert np.array_equal(shift_image(img, dx, dy), _shift_oracle(img, dx, dy))


def test_centered_image_unchanged():
    img = np.zeros((28, 28), np.uint8)
    img[12:16, 12:16] = 200
    assert np.array_equal(center_digit(img), img)


@settings(max_examples=80, deadline=None)
@given(arrays(np.uint8, (28, 28), elements=st.sampled_from([0, 0, 0, 64, 255])))
def test_centering_idempotent(img):
    assume(img.sum() > 0)
    once = center_digit(img)
    # the fixpoint holds whenever centering lost no mass off the frame
    assume(int(once.sum()) == int(img.sum()))
    assert np.array_equal(center_digit(once), once)


def test_centering_preserves_mass_of_seeds(seeds):
    for seed in seeds:
        assert int(center_digit(seed.image).sum()) == int(seed.image.sum())


def test_binarize():
    assert not binarize(np.zeros((4, 4), np.uint8), 1).any()
    assert binarize(np.full((4, 4), 255, np.uint8)).all()
    assert binarize(np.array([[127, 128]], np.uint8)).tolist() == [[False, True]]
