import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_image
from ofast import (
    RING_OFFSETS,
    DtState,
    Image,
    buffer_generation,
    classify_pixel,
    detect_fast_baseline,
    detect_fast_binary,
    generate_test_pattern,
    oracle_fast,
    segment_check,
)
from ofast.counters import BRANCH, IMAGE_READS, new_counts
from ofast.image import pattern_centers
from ofast.oracle import has_cyclic_run, oracle_fast_map, ternary_sweep

ring_values = st.lists(st.integers(0, 255), min_size=16, max_size=16)


@pytest.mark.parametrize(
    "ip, ii, t, state",
    [
        (100, 80, 20, DtState.DARK),
        (100, 100, 20, DtState.SIMILAR),
        (100, 120, 20, DtState.BRIGHT),
        (100, 81, 20, DtState.SIMILAR),
        (100, 119, 20, DtState.SIMILAR),
        (10, 0, 20, DtState.SIMILAR),
        (250, 255, 20, DtState.SIMILAR),
    ],
)
def test_classify_pixel_examples(ip, ii, t, state):
    assert classify_pixel(ip, ii, t) == state


def test_ring_offsets():
    assert len(set(RING_OFFSETS)) == 16
    assert RING_OFFSETS[0] == (0, -3)
    for dx, dy in RING_OFFSETS:
        assert max(abs(dx), abs(dy)) == 3 or (abs(dx), abs(dy)) == (2, 2)


@pytest.mark.parametrize(
    "ring, expected",
    [
        ([200] * 16, 0x0000FFFF),
        ([100] * 16, 0),
        ([70] * 9 + [100] * 7, 0x01FF0000),
    ],
)
def test_buffer_generation_examples(ring, expected):
    assert buffer_generation(100, ring, 20) == expected


@settings(max_examples=300)
@given(st.integers(0, 255), ring_values, st.integers(1, 255))
def test_buffer_matches_classification(ip, ring, t):
    buf = buffer_generation(ip, ring, t)
    dark, bright = buf >> 16, buf & 0xFFFF
    assert dark & bright == 0
    for i, v in enumerate(ring):
        s = classify_pixel(ip, v, t)
        assert (bright >> i) & 1 == (s == DtState.BRIGHT)
        assert (dark >> i) & 1 == (s == DtState.DARK)


@pytest.mark.parametrize("low, expected", [(0xFFFF, True), (0b0000000111111111, True), (0b1111111100000001, True),
                                          (0b0000000011111111, False), (0b0101010101010101, False), (0, False)])  # fmt: skip
def test_segment_check_examples(low, expected):
    assert segment_check(low) is expected
    assert segment_check(low << 16) is expected


def test_segment_check_exhaustive_both_halves():
    for mask in range(1 << 16):
        want = has_cyclic_run(mask)
        assert segment_check(mask) == want, hex(mask)
        assert segment_check(mask << 16) == want, hex(mask)


def test_ternary_sweep_slice():
    # the full 3**16 sweep runs in the acceptance suite
    assert ternary_sweep(0, 3**12) == 0
    assert ternary_sweep(3**16 - 3**11, 3**16) == 0


@pytest.mark.parametrize(
    "ring, expected",
    [
        ([200] * 9 + [100] * 7, True),
        ([200] * 8 + [100] * 8, False),
        ([100] * 16, False),
        ([40] * 4 + [100] * 7 + [40] * 5, True),
    ],
)
def test_oracle_fast_examples(ring, expected):
    assert oracle_fast(100, ring, 20) is expected


@settings(max_examples=300)
@given(st.integers(0, 255), ring_values, st.integers(1, 255))
def test_binary_agrees_with_oracle(ip, ring, t):
    assert segment_check(buffer_generation(ip, ring, t)) == oracle_fast(ip, ring, t)


def test_threshold_range():
    img = Image.from_array(np.zeros((16, 16), np.uint8))
    for t in (0, 256, -1):
        with pytest.raises(ValueError):
            detect_fast_binary(img, t)


@pytest.mark.parametrize("detector", [detect_fast_binary, detect_fast_baseline])
def test_constant_image_has_no_flags(detector):
    assert not detector(Image.from_array(np.full((32, 32), 77, np.uint8))).any()


@pytest.mark.parametrize("detector", [detect_fast_binary, detect_fast_baseline])
def test_too_small_or_bad_margin(detector):
    with pytest.raises(ValueError):
        detector(Image.from_array(np.zeros((6, 20), np.uint8)), 20, 3)
    with pytest.raises(ValueError):
        detector(Image.from_array(np.zeros((20, 20), np.uint8)), 20, 2)


@pytest.mark.parametrize("seed", range(100))
def test_variants_equal_oracle_on_random_images(seed):
    img = random_image(seed, 40, 48)
    want = oracle_fast_map(img, 20, 3)
    assert np.array_equal(detect_fast_binary(img, 20, 3), want)
    assert np.array_equal(detect_fast_baseline(img, 20, 3), want)


@pytest.mark.parametrize("case, hit", [(1, True), (2, True), (3, True), (4, False), (5, False)])
def test_pattern_centers(case, hit):
    img = generate_test_pattern(case, grid=6, cell=20)
    for detector in (detect_fast_binary, detect_fast_baseline):
        flags = detector(img, 20, 3)
        assert all(flags[cy, cx] == hit for cx, cy in pattern_centers(6, 20))


def test_pattern_arc_pixels_also_fire():
    # an isolated bright ring pixel is itself surrounded by darker background
    img = generate_test_pattern(1, grid=2, cell=20)
    flags = detect_fast_binary(img, 20, 3)
    cx, cy = pattern_centers(2, 20)[0]
    dx, dy = RING_OFFSETS[4]
    assert flags[cy + dy, cx + dx]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 120), st.integers(1, 120))
def test_raising_threshold_never_adds_flags(seed, t1, t2):
    lo, hi = sorted((t1, t2))
    img = random_image(seed, 32)
    assert not (detect_fast_binary(img, hi, 3) & ~detect_fast_binary(img, lo, 3)).any()


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(3, 12))
def test_border_pixels_never_flagged(seed, margin):
    img = random_image(seed, 30, 36, high=256)
    for detector in (detect_fast_binary, detect_fast_baseline):
        flags = detector(img, 10, margin)
        inner = np.zeros_like(flags)
        inner[margin:-margin, margin:-margin] = True
        assert not (flags & ~inner).any()


def test_binary_reads_each_ring_pixel_once():
    img = random_image(3, 32)
    c = new_counts()
    detect_fast_binary(img, 20, 3, c)
    assert c[IMAGE_READS] == 17 * 26 * 26


def test_binary_uses_fewer_branches_and_reads_than_baseline():
    img = random_image(4, 64)
    cb, ca = new_counts(), new_counts()
    detect_fast_binary(img, 20, 3, cb)
    detect_fast_baseline(img, 20, 3, ca)
    assert cb[BRANCH] < ca[BRANCH] and cb[IMAGE_READS] < ca[IMAGE_READS]
