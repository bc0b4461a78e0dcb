"""Tile-fused Oriented FAST: FAST -> Harris -> NMS -> intensity-centroid angle.

A tile is one row of ``tile_width`` scoring columns. FAST runs on every column;
Harris runs for the tile only if at least one column fired, and scores are kept
only at the columns that fired. Rows of a level are split into bands that a
thread pool processes independently, each band with its own scratch and
counters, so results never depend on tile width or worker count.
"""

from __future__ import annotations

import contextlib
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numba import njit

from .counters import BRANCH, IMAGE_READS, MAC, STAGES, CountReport, new_counts
from .fast import FAST_VARIANTS, RING_RADIUS, _fast_at, check_margin, check_threshold
from .harris import HarrisParams, _harris_direct_at, _semisep_tile, _separable_rows, semisep_scratch
from .image import Image, Pyramid, build_pyramid

DIRECT = 0
PARA_SEP = 1
SEMI_SEP = 2
HARRIS_VARIANTS = {"direct": DIRECT, "para-sep": PARA_SEP, "semi-sep": SEMI_SEP}

WORKERS_ENV = "OFAST_WORKERS"

FAST_ROW, HARRIS_ROW, NMS_ROW, CENTROID_ROW = range(len(STAGES))


@dataclass(frozen=True)
class Keypoint:
    """``x``/``y`` are in the level-0 frame; ``level_x``/``level_y`` locate it in its own level."""

    x: float
    y: float
    level: int
    response: float
    angle: float
    level_x: int = field(default=-1, compare=False, repr=False)
    level_y: int = field(default=-1, compare=False, repr=False)


@dataclass(frozen=True)
class DetectorConfig:
    t: int = 20
    harris: HarrisParams = field(default_factory=HarrisParams)
    levels: int = 4
    scale_factor: float = 1.2
    tile_width: int = 32
    margin: int = 16
    nms: bool = True
    centroid_radius: int = 15

    def __post_init__(self):
        check_threshold(self.t)
        if self.tile_width < 1:
            raise ValueError(f"tile_width must be >= 1, got {self.tile_width}")
        need = max(RING_RADIUS, self.harris.apron, self.centroid_radius)
        if self.margin < need:
            raise ValueError(f"margin {self.margin} < {need} required by the ring, Harris apron and centroid radius")
        if self.levels < 1:
            raise ValueError("levels must be >= 1")
        if not self.scale_factor > 1:
            raise ValueError("scale_factor must be > 1")
        if self.centroid_radius < 1:
            raise ValueError("centroid_radius must be >= 1")


# --- tile kernels ---


@njit(cache=True, nogil=True)
def _tile(data, x0, y, n, t, fast_variant, harris_variant, window, k, norm,
          do_fast, do_harris, flags, scores, fc, hc, colsum):  # fmt: skip
    a = window // 2 + 1
    if do_fast:
        for j in range(n):
            flags[y, x0 + j] = _fast_at(data, x0 + j, y, t, fast_variant, fc)
    if not do_harris:
        return
    any_point = False
    for j in range(n):
        any_point = any_point or flags[y, x0 + j]
    # one vote per tile, like a warp-wide any()
    hc[BRANCH] += 1
    if not any_point:
        return
    if harris_variant == DIRECT:
        for j in range(n):
            hc[BRANCH] += 1
            if flags[y, x0 + j]:
                scores[y, x0 + j] = _harris_direct_at(data, x0 + j, y, window, k, norm, hc)
        return
    tile = data[y - a : y + a + 1, x0 - a : x0 + n + a]
    if harris_variant == SEMI_SEP:
        _semisep_tile(tile, n, window, k, norm, flags[y, x0 : x0 + n], scores[y, x0 : x0 + n], hc, colsum)
    else:
        _separable_rows(tile, window, k, norm, flags[y : y + 1, x0 : x0 + n], scores[y : y + 1, x0 : x0 + n], hc)


@njit(cache=True, nogil=True)
def _process_rows(data, y0, y1, margin, tile_width, t, fast_variant, harris_variant,
                  window, k, norm, do_fast, do_harris, flags, scores, counts):  # fmt: skip
    w = data.shape[1]
    x_hi = w - margin
    cols_max = tile_width + window - 1
    # worker-owned scratch
    colsum = np.empty((3, cols_max), np.int64)
    for y in range(y0, y1):
        for x0 in range(margin, x_hi, tile_width):
            n = min(tile_width, x_hi - x0)
            _tile(data, x0, y, n, t, fast_variant, harris_variant, window, k, norm,
                  do_fast, do_harris, flags, scores, counts[0], counts[1], colsum)  # fmt: skip


def _bands(lo: int, hi: int, workers: int) -> list[tuple[int, int]]:
    n = hi - lo
    if n <= 0:
        return []
    count = min(n, max(1, workers * 4))
    edges = [lo + (n * i) // count for i in range(count + 1)]
    return [(edges[i], edges[i + 1]) for i in range(count) if edges[i] < edges[i + 1]]


def _run_bands(pool, workers, data, cfg, fast_code, harris_code, do_fast, do_harris, flags, scores, counts):
    p = cfg.harris

    def work(band):
        local = new_counts(2)
        _process_rows(data, band[0], band[1], cfg.margin, cfg.tile_width, cfg.t, fast_code, harris_code,
                      p.window, p.k, p.norm_factor, do_fast, do_harris, flags, scores, local)  # fmt: skip
        return local

    bands = _bands(cfg.margin, data.shape[0] - cfg.margin, workers)
    for local in pool.map(work, bands) if pool is not None else map(work, bands):
        counts[FAST_ROW] += local[0]
        counts[HARRIS_ROW] += local[1]


def _check_variants(variant: str, harris: str):
    if variant not in FAST_VARIANTS:
        raise ValueError(f"unknown FAST variant {variant!r}; choose from {sorted(FAST_VARIANTS)}")
    if harris not in HARRIS_VARIANTS:
        raise ValueError(f"unknown Harris variant {harris!r}; choose from {sorted(HARRIS_VARIANTS)}")


def detect_level(level: Image, cfg: DetectorConfig, variant="binary", harris="semi-sep",
                 pool=None, workers=1, counts=None, timer=None):  # fmt: skip
    """FAST flags and Harris scores (-inf where unflagged) for one pyramid level.

    With ``timer`` set, FAST and Harris run as two passes over the same tiles
    so each stage can be clocked; the outputs match the fused pass exactly.
    """
    _check_variants(variant, harris)
    if counts is None:
        counts = new_counts(len(STAGES))
    flags = np.zeros((level.height, level.width), np.bool_)
    scores = np.full((level.height, level.width), -np.inf)
    args = (pool, workers, level.data, cfg, FAST_VARIANTS[variant], HARRIS_VARIANTS[harris])
    if timer is None:
        _run_bands(*args, True, True, flags, scores, counts)
    else:
        with timer("fast"):
            _run_bands(*args, True, False, flags, scores, counts)
        with timer("harris"):
            _run_bands(*args, False, True, flags, scores, counts)
    return flags, scores


def detect_tile_fused(level: Image, x0: int, y: int, cfg: DetectorConfig, variant="binary", harris="semi-sep", counts=None):
    """Run the single tile at row ``y``, columns ``x0 .. x0 + tile_width - 1``.

    Returns (flags, scores) for the tile's columns; ``counts`` is a
    (len(STAGES), N_COUNTERS) array that receives the FAST and Harris tallies.
    """
    _check_variants(variant, harris)
    a = max(cfg.harris.apron, RING_RADIUS)
    n = cfg.tile_width
    if not (a <= y < level.height - a and a <= x0 and x0 + n + a <= level.width):
        raise ValueError(f"tile at ({x0}, {y}) of width {n} lacks a {a}-pixel apron inside {level.width}x{level.height}")
    if counts is None:
        counts = new_counts(len(STAGES))
    p = cfg.harris
    flags = np.zeros((level.height, level.width), np.bool_)
    scores = np.full((level.height, level.width), -np.inf)
    cols = n + p.window - 1
    scratch = semisep_scratch(cols)
    _tile(level.data, x0, y, n, cfg.t, FAST_VARIANTS[variant], HARRIS_VARIANTS[harris], p.window, p.k,
          p.norm_factor, True, True, flags, scores, counts[FAST_ROW], counts[HARRIS_ROW], scratch)  # fmt: skip
    return flags[y, x0 : x0 + n].copy(), scores[y, x0 : x0 + n].copy()


# --- NMS ---

# neighbours that precede a pixel in (y, x) order must be beaten strictly
_BEFORE = ((-1, -1), (-1, 0), (-1, 1), (0, -1))
_AFTER = ((0, 1), (1, -1), (1, 0), (1, 1))


def nms_3x3(flags: np.ndarray, scores: np.ndarray, counts=None) -> np.ndarray:
    """Keep flagged pixels that beat all 8 neighbours; exact ties go to the smaller (y, x)."""
    flags = np.asarray(flags, dtype=bool)
    scores = np.asarray(scores, dtype=np.float64)
    if flags.shape != scores.shape or flags.ndim != 2:
        raise ValueError(f"flag plane {flags.shape} and score plane {scores.shape} must match and be 2D")
    h, w = flags.shape
    s = np.where(flags, scores, -np.inf)
    pad = np.pad(s, 1, constant_values=-np.inf)
    keep = flags.copy()
    for offsets, strict in ((_BEFORE, True), (_AFTER, False)):
        for dy, dx in offsets:
            nb = pad[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w]
            keep &= (s > nb) if strict else (s >= nb)
    if counts is not None:
        counts[BRANCH] += 8 * int(flags.sum())
    return keep


# --- orientation ---


@lru_cache(maxsize=None)
def circle_half_widths(radius: int) -> tuple[int, ...]:
    """Half-width of the disc per row offset 0..radius, made symmetric about the diagonal."""
    umax = [0] * (radius + 1)
    vmax = int(math.floor(radius * math.sqrt(2) / 2 + 1))
    vmin = int(math.ceil(radius * math.sqrt(2) / 2))
    for v in range(min(vmax, radius) + 1):
        umax[v] = int(round(math.sqrt(radius * radius - v * v)))
    v0 = 0
    for v in range(radius, vmin - 1, -1):
        while umax[v0] == umax[v0 + 1]:
            v0 += 1
        umax[v] = v0
        v0 += 1
    return tuple(umax)


@lru_cache(maxsize=None)
def _patch_offsets(radius: int) -> tuple[np.ndarray, np.ndarray]:
    umax = circle_half_widths(radius)
    us, vs = [], []
    for v in range(-radius, radius + 1):
        for u in range(-umax[abs(v)], umax[abs(v)] + 1):
            us.append(u)
            vs.append(v)
    return np.array(us, np.int64), np.array(vs, np.int64)


def centroid_angle(level: Image, x: int, y: int, radius: int = 15, counts=None) -> float:
    """Orientation of the intensity centroid of a disc patch, in [0, 2*pi)."""
    if not (radius <= x < level.width - radius and radius <= y < level.height - radius):
        raise ValueError(f"radius-{radius} patch at ({x}, {y}) leaves the {level.width}x{level.height} level")
    us, vs = _patch_offsets(radius)
    vals = level.data[y + vs, x + us].astype(np.int64)
    m10 = int(np.dot(us, vals))
    m01 = int(np.dot(vs, vals))
    if counts is not None:
        counts[IMAGE_READS] += len(us)
        counts[MAC] += 2 * len(us)
    if m10 == 0 and m01 == 0:
        return 0.0
    angle = math.atan2(m01, m10)
    if angle < 0:
        angle += 2 * math.pi
    # -tiny + 2*pi rounds up to 2*pi
    return angle if angle < 2 * math.pi else 0.0


# --- full pipeline ---


def resolve_workers(workers: int | None) -> int:
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1"))
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    return workers


class StageTimer:
    """Accumulates wall time per stage on a monotonic clock."""

    def __init__(self):
        self.seconds: dict[str, float] = {}

    @contextlib.contextmanager
    def __call__(self, stage: str):
        start = time.perf_counter()
        try:
            yield
        finally:
            self.seconds[stage] = self.seconds.get(stage, 0.0) + time.perf_counter() - start


def _level_keypoints(level: Image, lvl: int, scale: float, flags, scores, cfg, counts, timer):
    nullctx = contextlib.nullcontext
    with timer("nms") if timer else nullctx():
        keep = nms_3x3(flags, scores, counts[NMS_ROW]) if cfg.nms else flags
    ys, xs = np.nonzero(keep)  # row-major, so already (y, x) sorted
    out = []
    with timer("centroid") if timer else nullctx():
        for y, x in zip(ys.tolist(), xs.tolist()):
            angle = centroid_angle(level, x, y, cfg.centroid_radius, counts[CENTROID_ROW])
            out.append(Keypoint(x * scale, y * scale, lvl, float(scores[y, x]), angle, x, y))
    return out


def _run(img: Image, cfg: DetectorConfig, variant: str, harris: str, workers, timer):
    _check_variants(variant, harris)
    workers = resolve_workers(workers)
    check_margin(img, cfg.margin, max(RING_RADIUS, cfg.harris.apron))
    counts = new_counts(len(STAGES))
    with timer("pyramid") if timer else contextlib.nullcontext():
        pyr = build_pyramid(img, cfg.levels, cfg.scale_factor)
    keypoints: list[Keypoint] = []
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for lvl, (level, scale) in enumerate(zip(pyr.levels, pyr.level_scales)):
            flags, scores = detect_level(level, cfg, variant, harris, pool, workers, counts, timer)
            keypoints += _level_keypoints(level, lvl, scale, flags, scores, cfg, counts, timer)
    finally:
        if pool is not None:
            pool.shutdown()
    return keypoints, counts


def run_pipeline(img: Image, cfg: DetectorConfig = DetectorConfig(), variant="binary", harris="semi-sep", workers=None) -> list[Keypoint]:
    """Oriented FAST keypoints sorted by (level, y, x)."""
    return _run(img, cfg, variant, harris, workers, None)[0]


def run_counted(img: Image, cfg: DetectorConfig = DetectorConfig(), variant="binary", harris="semi-sep", workers=None):
    keypoints, counts = _run(img, cfg, variant, harris, workers, None)
    return keypoints, CountReport.from_stage_array(counts)


def run_timed(img: Image, cfg: DetectorConfig = DetectorConfig(), variant="binary", harris="semi-sep", workers=None):
    """Like :func:`run_pipeline` but with FAST and Harris in separate passes; returns (keypoints, seconds per stage)."""
    timer = StageTimer()
    keypoints, _ = _run(img, cfg, variant, harris, workers, timer)
    return keypoints, timer.seconds


def pyramid_for(img: Image, cfg: DetectorConfig) -> Pyramid:
    return build_pyramid(img, cfg.levels, cfg.scale_factor)
