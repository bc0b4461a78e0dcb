"""FAST-9-16 segment test: brute-force oracle, branchy baseline, and 32-bit binary encoding.

The binary buffer keeps dark flags in the high half and bright flags in the low
half; ring neighbour ``i`` (1-based) sits at bit ``i - 1`` of its half.
"""

from __future__ import annotations

import enum

import numpy as np
from numba import njit

from .counters import BRANCH, IMAGE_READS, new_counts
from .image import Image

RUN_LENGTH = 9
SEGMENT_MASK = 0x1FF

# index 1 at (0, -3), clockwise
RING_OFFSETS = (
    (0, -3), (1, -3), (2, -2), (3, -1), (3, 0), (3, 1), (2, 2), (1, 3),
    (0, 3), (-1, 3), (-2, 2), (-3, 1), (-3, 0), (-3, -1), (-2, -2), (-1, -3),
)  # fmt: skip
RING_DX = np.array([o[0] for o in RING_OFFSETS], dtype=np.int64)
RING_DY = np.array([o[1] for o in RING_OFFSETS], dtype=np.int64)
RING_RADIUS = 3


class DtState(enum.IntEnum):
    DARK = -1
    SIMILAR = 0
    BRIGHT = 1


def check_threshold(t: int) -> int:
    # t = 0 would make an equal neighbour both dark and bright
    if not 1 <= t <= 255:
        raise ValueError(f"threshold must be in 1..255, got {t}")
    return int(t)


def classify_pixel(ip: int, ii: int, t: int) -> DtState:
    ip, ii = int(ip), int(ii)
    if ii <= ip - t:
        return DtState.DARK
    if ii >= ip + t:
        return DtState.BRIGHT
    return DtState.SIMILAR


def oracle_fast(ip: int, ring, t: int) -> bool:
    """Ground truth by scanning all 16 cyclic windows for 9 identical non-similar states."""
    states = [classify_pixel(ip, v, t) for v in ring]
    for start in range(16):
        first = states[start]
        if first == DtState.SIMILAR:
            continue
        if all(states[(start + j) % 16] == first for j in range(RUN_LENGTH)):
            return True
    return False


@njit(cache=True, nogil=True)
def _buffer_generation(ip, ring, t):
    buf = np.uint32(0)
    for i in range(16):
        # pure comparisons, no if/else
        buf |= np.uint32(ring[i] >= ip + t) << np.uint32(i)
        buf |= np.uint32(ring[i] <= ip - t) << np.uint32(i + 16)
    return buf


@njit(cache=True, nogil=True)
def _segment_check(buf, counts):
    dark = np.int64(buf) >> 16
    bright = np.int64(buf) & 0xFFFF
    dark24 = dark | ((dark & 0xFF) << 16)
    bright24 = bright | ((bright & 0xFF) << 16)
    for _ in range(16):
        counts[BRANCH] += 1
        if dark24 & SEGMENT_MASK == SEGMENT_MASK:
            return True
        dark24 >>= 1
    for _ in range(16):
        counts[BRANCH] += 1
        if bright24 & SEGMENT_MASK == SEGMENT_MASK:
            return True
        bright24 >>= 1
    return False


def buffer_generation(ip: int, ring, t: int) -> int:
    ring = np.asarray(ring, dtype=np.int64)
    if ring.shape != (16,):
        raise ValueError("ring must hold 16 intensities")
    return int(_buffer_generation(np.int64(ip), ring, np.int64(t)))


def segment_check(buf: int) -> bool:
    return bool(_segment_check(np.uint32(buf), new_counts()))


# --- per-pixel kernels over an image ---


@njit(cache=True, nogil=True)
def _fast_binary_at(data, x, y, t, counts):
    ip = np.int64(data[y, x])
    ring = np.empty(16, np.int64)
    for i in range(16):
        ring[i] = data[y + RING_DY[i], x + RING_DX[i]]
    counts[IMAGE_READS] += 17
    return _segment_check(_buffer_generation(ip, ring, t), counts)


@njit(cache=True, nogil=True)
def _fast_baseline_at(data, x, y, t, counts):
    """Prejudge a tone by majority vote, then run one 25-step early-exit scan for that tone."""
    ip = np.int64(data[y, x])
    counts[IMAGE_READS] += 1
    n_dark = 0
    n_bright = 0
    for i in range(16):
        ii = np.int64(data[y + RING_DY[i], x + RING_DX[i]])
        counts[IMAGE_READS] += 1
        counts[BRANCH] += 1
        if ii <= ip - t:
            n_dark += 1
        else:
            counts[BRANCH] += 1
            if ii >= ip + t:
                n_bright += 1
    counts[BRANCH] += 1
    count = 0
    if n_dark >= n_bright:
        for k in range(25):
            i = k % 16
            ii = np.int64(data[y + RING_DY[i], x + RING_DX[i]])
            counts[IMAGE_READS] += 1
            counts[BRANCH] += 1
            if ii <= ip - t:
                count += 1
                counts[BRANCH] += 1
                if count >= RUN_LENGTH:
                    return True
            else:
                count = 0
    else:
        for k in range(25):
            i = k % 16
            ii = np.int64(data[y + RING_DY[i], x + RING_DX[i]])
            counts[IMAGE_READS] += 1
            counts[BRANCH] += 1
            if ii >= ip + t:
                count += 1
                counts[BRANCH] += 1
                if count >= RUN_LENGTH:
                    return True
            else:
                count = 0
    return False


BINARY = 0
BASELINE = 1
FAST_VARIANTS = {"binary": BINARY, "baseline": BASELINE}


@njit(cache=True, nogil=True)
def _fast_at(data, x, y, t, variant, counts):
    if variant == BINARY:
        return _fast_binary_at(data, x, y, t, counts)
    return _fast_baseline_at(data, x, y, t, counts)


@njit(cache=True, nogil=True)
def _fast_sweep(data, t, margin, variant, counts):
    h, w = data.shape
    out = np.zeros((h, w), np.bool_)
    for y in range(margin, h - margin):
        for x in range(margin, w - margin):
            out[y, x] = _fast_at(data, x, y, t, variant, counts)
    return out


def check_margin(img: Image, margin: int, minimum: int = RING_RADIUS) -> int:
    if margin < minimum:
        raise ValueError(f"margin must be >= {minimum}, got {margin}")
    side = 2 * margin + 1
    if img.width < side or img.height < side:
        raise ValueError(f"{img.width}x{img.height} image too small for margin {margin} (needs {side}x{side})")
    return int(margin)


def detect_fast(img: Image, t: int = 20, margin: int = 3, variant: str = "binary", counts=None) -> np.ndarray:
    """Boolean flag map of FAST-9 corners; border pixels within ``margin`` are never flagged."""
    t = check_threshold(t)
    margin = check_margin(img, margin)
    if counts is None:
        counts = new_counts()
    return _fast_sweep(img.data, np.int64(t), np.int64(margin), FAST_VARIANTS[variant], counts)


def detect_fast_binary(img: Image, t: int = 20, margin: int = 3, counts=None) -> np.ndarray:
    return detect_fast(img, t, margin, "binary", counts)


def detect_fast_baseline(img: Image, t: int = 20, margin: int = 3, counts=None) -> np.ndarray:
    return detect_fast(img, t, margin, "baseline", counts)
