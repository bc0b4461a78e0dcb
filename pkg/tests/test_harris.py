import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_image
from ofast import (
    HarrisParams,
    Image,
    harris_direct,
    harris_plane,
    harris_semiseparable,
    harris_separable_full,
    sobel_at,
)
from ofast.counters import MAC, new_counts
from ofast.harris import moments_direct, semisep_tile_shape
from ofast.oracle import harris_direct_map, moment_planes_direct

P = HarrisParams()


def img3(rows):
    return Image.from_array(np.array(rows, np.uint8))


def test_params_validation():
    assert P.k == 0.04 and P.window == 7 and P.apron == 4
    assert P.norm_factor == pytest.approx((1 / (4 * 7 * 255)) ** 4)
    for kwargs in [dict(k=0.03), dict(k=0.07), dict(window=6), dict(window=1), dict(norm_factor=0.0)]:
        with pytest.raises(ValueError):
            HarrisParams(**kwargs)


@pytest.mark.parametrize(
    "rows, expected",
    [
        ([[9, 9, 9]] * 3, (0, 0)),
        ([[0, 0, 0], [0, 0, 0], [255, 255, 255]], (0, 1020)),
        ([[0, 0, 255]] * 3, (1020, 0)),
    ],
)
def test_sobel_examples(rows, expected):
    assert sobel_at(img3(rows), 1, 1) == expected


def test_sobel_domain():
    with pytest.raises(ValueError):
        sobel_at(img3([[0] * 3] * 3), 0, 1)


def test_direct_constant_is_zero():
    img = Image.from_array(np.full((20, 20), 140, np.uint8))
    assert harris_direct(img, 10, 10) == 0.0


def test_direct_vertical_edge_is_negative():
    a = np.zeros((20, 20), np.uint8)
    a[:, 10:] = 200
    img = Image.from_array(a)
    m = moments_direct(img, 10, 10)
    assert m.gyy == 0 and m.gxy == 0 and m.gxx > 0
    s = harris_direct(img, 10, 10)
    assert s < 0
    assert s == pytest.approx(-P.k * m.gxx**2 * P.norm_factor)


def test_direct_checkerboard_corner_is_positive():
    a = np.zeros((20, 20), np.uint8)
    a[:10, :10] = 255
    a[10:, 10:] = 255
    assert harris_direct(Image.from_array(a), 10, 10) > 0


def test_direct_window_must_fit():
    img = Image.from_array(np.zeros((20, 20), np.uint8))
    with pytest.raises(ValueError):
        harris_direct(img, 3, 10)
    with pytest.raises(ValueError):
        harris_direct(img, 10, 16)


@pytest.mark.parametrize("seed", range(10))
def test_separable_full_matches_direct(seed):
    img = random_image(seed, 64)
    got = harris_separable_full(img)
    a = P.apron
    for y in range(0, got.shape[0], 7):
        for x in range(0, got.shape[1], 5):
            assert got[y, x] == harris_direct(img, x + a, y + a)


def test_separable_constant_and_apron():
    assert not harris_separable_full(np.full((12, 15), 3, np.uint8)).any()
    with pytest.raises(ValueError):
        harris_separable_full(np.zeros((8, 30), np.uint8))


def test_separable_point_symmetry():
    a = np.full((21, 21), 50, np.uint8)
    a[10, 10] = 250
    plane = harris_separable_full(a)
    assert np.array_equal(plane, np.rot90(plane))


def semisep_tile(img, y, x0, width=32, p=P):
    a = p.apron
    return img.data[y - a : y + a + 1, x0 - a : x0 + width + a]


@pytest.mark.parametrize("seed", range(10))
def test_semiseparable_matches_direct(seed):
    img = random_image(seed, 48)
    tile = semisep_tile(img, 20, 6)
    assert tile.shape == semisep_tile_shape(32, P) == (9, 40)
    got = harris_semiseparable(tile, 32)
    assert got.tolist() == [harris_direct(img, 6 + j, 20) for j in range(32)]


def test_semiseparable_constant_and_shape():
    assert harris_semiseparable(np.full((9, 40), 8, np.uint8), 32).tolist() == [0.0] * 32
    with pytest.raises(ValueError):
        harris_semiseparable(np.zeros((9, 38), np.uint8), 32)
    with pytest.raises(ValueError):
        harris_semiseparable(np.zeros((9, 40), np.uint8), 32, points=[True] * 31)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 31))
def test_semiseparable_single_point_column(seed, col):
    tile = random_image(seed, 9, 40).data
    points = np.zeros(32, bool)
    points[col] = True
    one = harris_semiseparable(tile, 32, points=points)
    full = harris_semiseparable(tile, 32)
    assert one[col] == full[col]
    assert np.isneginf(np.delete(one, col)).all()


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 40), st.sampled_from([3, 5, 7, 9]))
def test_kernels_agree_for_any_width_and_window(seed, width, window):
    p = HarrisParams(window=window)
    img = random_image(seed, 30, 37)
    ref = harris_direct_map(img, p)
    assert np.array_equal(harris_plane(img, p, "direct"), ref)
    assert np.array_equal(harris_plane(img, p, "para-sep"), ref)
    assert np.array_equal(harris_plane(img, p, "semi-sep", width), ref)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([3, 7]))
def test_cauchy_schwarz(seed, window):
    gxx, gyy, gxy, _ = moment_planes_direct(random_image(seed, 24), window)
    assert (gxx >= 0).all() and (gyy >= 0).all()
    assert (gxy.astype(object) ** 2 <= gxx.astype(object) * gyy.astype(object)).all()


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 255), st.integers(0, 255), st.booleans())
def test_step_edge_never_positive(seed, lo, hi, vertical):
    rng = np.random.default_rng(seed)
    line = np.where(np.arange(24) < rng.integers(1, 24), lo, hi).astype(np.uint8)
    a = np.tile(line, (24, 1))
    img = Image.from_array(a if vertical else a.T)
    plane = harris_direct_map(img)
    assert (plane[np.isfinite(plane)] <= 0).all()


@pytest.mark.parametrize("seed", range(5))
def test_rotation_covariance(seed):
    img = random_image(seed, 30, 34)
    rot = Image.from_array(np.rot90(img.data))
    for y in range(4, 26, 3):
        for x in range(4, 30, 4):
            # np.rot90 sends (x, y) to (y, width - 1 - x)
            assert harris_direct(rot, y, img.width - 1 - x) == harris_direct(img, x, y)


def test_direct_mac_count():
    img = random_image(0, 20)
    c = new_counts()
    harris_direct(img, 10, 10, counts=c)
    assert c[MAC] == 2 * 9 * 49 + 3 * 49


@pytest.mark.parametrize("width", [8, 16, 32, 64])
def test_semiseparable_amortized_macs_below_direct(width):
    img = random_image(1, 20, width + 10)
    c = new_counts()
    harris_semiseparable(semisep_tile(img, 10, 4, width), width, counts=c)
    assert c[MAC] / width < 2 * 9 * P.window**2
