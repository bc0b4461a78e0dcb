"""Brute-force references that share no code path with the optimised kernels.

Used by the tests, the acceptance suite and ``ofast compare``.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .fast import RING_DX, RING_DY, RUN_LENGTH, _buffer_generation, _segment_check, check_margin, check_threshold
from .harris import HarrisParams, score_from_moment_planes
from .image import Image, build_pyramid
from .pipeline import DetectorConfig, Keypoint, centroid_angle


def has_cyclic_run(mask: int, width: int = 16, run: int = RUN_LENGTH) -> bool:
    """True if ``mask`` has ``run`` consecutive set bits, reading its ``width`` bits as a cycle."""
    bits = [(mask >> i) & 1 for i in range(width)]
    return any(all(bits[(s + j) % width] for j in range(run)) for s in range(width))


# --- FAST ---


def ring_states(img: Image, t: int, margin: int) -> np.ndarray:
    """(16, H, W) int8 states (-1 dark, 0 similar, 1 bright) for interior pixels; 0 elsewhere."""
    d = img.data.astype(np.int32)
    h, w = d.shape
    states = np.zeros((16, h, w), np.int8)
    ys = slice(margin, h - margin)
    xs = slice(margin, w - margin)
    centre = d[ys, xs]
    for i, (dx, dy) in enumerate(zip(RING_DX.tolist(), RING_DY.tolist())):
        nb = d[margin + dy : h - margin + dy, margin + dx : w - margin + dx]
        states[i, ys, xs] = np.where(nb <= centre - t, -1, np.where(nb >= centre + t, 1, 0))
    return states


def oracle_fast_map(img: Image, t: int = 20, margin: int = 3) -> np.ndarray:
    """Per-pixel FAST-9 by checking every cyclic start position directly."""
    check_threshold(t)
    check_margin(img, margin)
    states = ring_states(img, t, margin)
    out = np.zeros(states.shape[1:], bool)
    for tone in (-1, 1):
        hit = states == tone
        for start in range(16):
            run = np.ones(out.shape, bool)
            for j in range(RUN_LENGTH):
                run &= hit[(start + j) % 16]
            out |= run
    return out


@njit(cache=True)
def _naive_state_scan(states):
    for start in range(16):
        s = states[start]
        if s == 1:
            continue
        ok = True
        for j in range(RUN_LENGTH):
            if states[(start + j) % 16] != s:
                ok = False
                break
        if ok:
            return True
    return False


@njit(cache=True)
def _ternary_sweep(lo, hi):
    # digit 0 dark, 1 similar, 2 bright, realised as 70 / 100 / 130 around 100 at t = 20
    states = np.empty(16, np.int64)
    ring = np.empty(16, np.int64)
    counts = np.zeros(5, np.int64)
    mismatches = 0
    for idx in range(lo, hi):
        v = idx
        for i in range(16):
            states[i] = v % 3
            ring[i] = 70 + 30 * states[i]
            v //= 3
        got = _segment_check(_buffer_generation(np.int64(100), ring, np.int64(20)), counts)
        if got != _naive_state_scan(states):
            mismatches += 1
    return mismatches


TERNARY_CASES = 3**16


def ternary_sweep(lo: int = 0, hi: int = TERNARY_CASES) -> int:
    """Number of ternary ring-state strings where the binary test disagrees with the naive scan."""
    return int(_ternary_sweep(lo, hi))


# --- Harris ---


def sobel_planes(img: Image) -> tuple[np.ndarray, np.ndarray]:
    """Direct 3x3 Sobel responses for pixels 1..n-2 along each axis."""
    d = img.data.astype(np.int64)
    h, w = d.shape
    gx = np.zeros((h - 2, w - 2), np.int64)
    gy = np.zeros((h - 2, w - 2), np.int64)
    kx = ((-1, 0, 1), (-2, 0, 2), (-1, 0, 1))
    ky = ((-1, -2, -1), (0, 0, 0), (1, 2, 1))
    for j in range(3):
        for i in range(3):
            patch = d[j : j + h - 2, i : i + w - 2]
            gx += kx[j][i] * patch
            gy += ky[j][i] * patch
    return gx, gy


def moment_planes_direct(img: Image, window: int = 7):
    """(gxx, gyy, gxy) window sums for every pixel with a full apron, plus that apron."""
    gx, gy = sobel_planes(img)
    n = window
    rows = gx.shape[0] - n + 1
    cols = gx.shape[1] - n + 1
    out = []
    for prod in (gx * gx, gy * gy, gx * gy):
        acc = np.zeros((rows, cols), np.int64)
        for v in range(n):
            for u in range(n):
                acc += prod[v : v + rows, u : u + cols]
        out.append(acc)
    return (*out, window // 2 + 1)


def harris_direct_map(img: Image, p: HarrisParams = HarrisParams()) -> np.ndarray:
    """Image-sized Harris plane; -inf where the window does not fit."""
    gxx, gyy, gxy, a = moment_planes_direct(img, p.window)
    out = np.full((img.height, img.width), -np.inf)
    if gxx.size:
        out[a : img.height - a, a : img.width - a] = score_from_moment_planes(gxx, gyy, gxy, p.k, p.norm_factor)
    return out


# --- NMS and full pipeline ---


def naive_nms(flags: np.ndarray, scores: np.ndarray) -> np.ndarray:
    h, w = flags.shape
    keep = np.zeros_like(flags, dtype=bool)
    for y, x in zip(*np.nonzero(flags)):
        s = scores[y, x]
        ok = True
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                ny, nx = y + dy, x + dx
                if (dy, dx) == (0, 0) or not (0 <= ny < h and 0 <= nx < w) or not flags[ny, nx]:
                    continue
                o = scores[ny, nx]
                if o > s or (o == s and (ny, nx) < (y, x)):
                    ok = False
        keep[y, x] = ok
    return keep


def oracle_pipeline(img: Image, cfg: DetectorConfig = DetectorConfig()) -> list[Keypoint]:
    """Unfused reference: full FAST sweep, direct Harris at flagged pixels, naive NMS, centroid."""
    check_margin(img, cfg.margin, cfg.harris.apron)
    pyr = build_pyramid(img, cfg.levels, cfg.scale_factor)
    out = []
    for lvl, (level, scale) in enumerate(zip(pyr.levels, pyr.level_scales)):
        if min(level.width, level.height) < 2 * cfg.margin + 1:
            continue
        flags = oracle_fast_map(level, cfg.t, cfg.margin)
        scores = np.where(flags, harris_direct_map(level, cfg.harris), -np.inf)
        keep = naive_nms(flags, scores) if cfg.nms else flags
        for y, x in zip(*np.nonzero(keep)):
            y, x = int(y), int(x)
            angle = centroid_angle(level, x, y, cfg.centroid_radius)
            out.append(Keypoint(x * scale, y * scale, lvl, float(scores[y, x]), angle, x, y))
    return out

