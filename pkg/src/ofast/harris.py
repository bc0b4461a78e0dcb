"""Harris response from 3x3 Sobel gradients over a square window.

Three kernels compute identical integer moments (gxx, gyy, gxy) and share one
scoring function, so their scores agree bit for bit:

* direct: full 3x3 Sobel at every gradient position of the window.
* separable (full): 1-D horizontal pass stored as whole planes, then the
  vertical pass.
* semi-separable: per column, a 3-slot circular buffer of horizontal 1-D
  results slides down the rows; vertical sums land in per-column scratch and
  each scored pixel adds ``window`` neighbouring column sums.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .counters import BRANCH, IMAGE_READS, MAC, SCRATCH_READS, SCRATCH_WRITES, new_counts
from .image import Image

SOBEL_X = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.int64)
SOBEL_Y = np.array([[-1, -2, -1], [0, 0, 0], [1, 2, 1]], dtype=np.int64)


@dataclass(frozen=True)
class HarrisParams:
    k: float = 0.04
    window: int = 7
    norm_factor: float | None = None

    def __post_init__(self):
        if not 0.04 <= self.k <= 0.06:
            raise ValueError(f"k must lie in [0.04, 0.06], got {self.k}")
        if self.window < 3 or self.window % 2 == 0:
            raise ValueError(f"window must be odd and >= 3, got {self.window}")
        if self.norm_factor is None:
            object.__setattr__(self, "norm_factor", (1.0 / (4 * self.window * 255)) ** 4)
        elif not self.norm_factor > 0:
            raise ValueError("norm_factor must be positive")

    @property
    def apron(self) -> int:
        """Raw-pixel border needed around a scored pixel."""
        return self.window // 2 + 1


@dataclass(frozen=True)
class GradientMoments:
    gxx: int
    gyy: int
    gxy: int

    def score(self, p: HarrisParams) -> float:
        return float(score_from_moments(self.gxx, self.gyy, self.gxy, p.k, p.norm_factor))


@njit(cache=True, nogil=True)
def score_from_moments(gxx, gyy, gxy, k, norm):
    # one evaluation order for every kernel
    det = np.int64(gxx) * gyy - np.int64(gxy) * gxy
    tr = np.int64(gxx) + gyy
    return (np.float64(det) - k * np.float64(tr * tr)) * norm


def score_from_moment_planes(gxx, gyy, gxy, k, norm):
    """Vectorised twin of :func:`score_from_moments` (same operation order)."""
    gxx, gyy, gxy = (np.asarray(a, dtype=np.int64) for a in (gxx, gyy, gxy))
    det = gxx * gyy - gxy * gxy
    tr = gxx + gyy
    return (det.astype(np.float64) - k * (tr * tr).astype(np.float64)) * norm


# --- direct ---


@njit(cache=True, nogil=True)
def _sobel_at(data, x, y):
    gx = np.int64(0)
    gy = np.int64(0)
    for j in range(3):
        for i in range(3):
            p = np.int64(data[y + j - 1, x + i - 1])
            gx += SOBEL_X[j, i] * p
            gy += SOBEL_Y[j, i] * p
    return gx, gy


@njit(cache=True, nogil=True)
def _moments_direct(data, x, y, window, counts):
    r = window // 2
    gxx = np.int64(0)
    gyy = np.int64(0)
    gxy = np.int64(0)
    for v in range(-r, r + 1):
        for u in range(-r, r + 1):
            gx, gy = _sobel_at(data, x + u, y + v)
            gxx += gx * gx
            gyy += gy * gy
            gxy += gx * gy
    counts[IMAGE_READS] += 9 * window * window
    counts[MAC] += (18 + 3) * window * window
    return gxx, gyy, gxy


@njit(cache=True, nogil=True)
def _harris_direct_at(data, x, y, window, k, norm, counts):
    gxx, gyy, gxy = _moments_direct(data, x, y, window, counts)
    return score_from_moments(gxx, gyy, gxy, k, norm)


def sobel_at(img: Image, x: int, y: int) -> tuple[int, int]:
    if not (1 <= x <= img.width - 2 and 1 <= y <= img.height - 2):
        raise ValueError(f"({x}, {y}) outside the Sobel domain of a {img.width}x{img.height} image")
    gx, gy = _sobel_at(img.data, x, y)
    return int(gx), int(gy)


def _check_window_fits(img: Image, x: int, y: int, p: HarrisParams):
    a = p.apron
    if not (a <= x < img.width - a and a <= y < img.height - a):
        raise ValueError(f"window {p.window} at ({x}, {y}) does not fit a {img.width}x{img.height} image")


def moments_direct(img: Image, x: int, y: int, p: HarrisParams = HarrisParams()) -> GradientMoments:
    _check_window_fits(img, x, y, p)
    return GradientMoments(*(int(v) for v in _moments_direct(img.data, x, y, p.window, new_counts())))


def harris_direct(img: Image, x: int, y: int, p: HarrisParams = HarrisParams(), counts=None) -> float:
    _check_window_fits(img, x, y, p)
    if counts is None:
        counts = new_counts()
    return float(_harris_direct_at(img.data, x, y, p.window, p.k, p.norm_factor, counts))


# --- fully separable, intermediate planes kept ---


@njit(cache=True, nogil=True)
def _moment_planes_separable(tile, window, counts):
    """Column-summed moments for every gradient column, rows reduced over ``window``.

    Returns (rows_out, cols) planes where rows_out = tile_rows - window - 1.
    """
    h, w = tile.shape
    cols = w - 2
    # horizontal 1-D pass: difference and smoothing planes
    dx = np.empty((h, cols), np.int64)
    sm = np.empty((h, cols), np.int64)
    for y in range(h):
        for c in range(cols):
            a = np.int64(tile[y, c])
            b = np.int64(tile[y, c + 1])
            d = np.int64(tile[y, c + 2])
            dx[y, c] = d - a
            sm[y, c] = a + 2 * b + d
    counts[IMAGE_READS] += 3 * h * cols
    counts[MAC] += 5 * h * cols
    counts[SCRATCH_WRITES] += 2 * h * cols
    # vertical pass into product planes
    gh = h - 2
    pxx = np.empty((gh, cols), np.int64)
    pyy = np.empty((gh, cols), np.int64)
    pxy = np.empty((gh, cols), np.int64)
    for y in range(gh):
        for c in range(cols):
            gx = dx[y, c] + 2 * dx[y + 1, c] + dx[y + 2, c]
            gy = sm[y + 2, c] - sm[y, c]
            pxx[y, c] = gx * gx
            pyy[y, c] = gy * gy
            pxy[y, c] = gx * gy
    counts[SCRATCH_READS] += 5 * gh * cols
    counts[MAC] += 8 * gh * cols
    counts[SCRATCH_WRITES] += 3 * gh * cols
    # vertical window sums
    rows_out = gh - window + 1
    sxx = np.zeros((rows_out, cols), np.int64)
    syy = np.zeros((rows_out, cols), np.int64)
    sxy = np.zeros((rows_out, cols), np.int64)
    for y in range(rows_out):
        for c in range(cols):
            for v in range(window):
                sxx[y, c] += pxx[y + v, c]
                syy[y, c] += pyy[y + v, c]
                sxy[y, c] += pxy[y + v, c]
    counts[SCRATCH_READS] += 3 * window * rows_out * cols
    counts[MAC] += 3 * window * rows_out * cols
    counts[SCRATCH_WRITES] += 3 * rows_out * cols
    return sxx, syy, sxy


@njit(cache=True, nogil=True)
def _separable_rows(tile, window, k, norm, points, out, counts):
    """Score ``points``-masked pixels of a tile whose every row of scored pixels has a full apron."""
    sxx, syy, sxy = _moment_planes_separable(tile, window, counts)
    rows, n = points.shape
    for y in range(rows):
        for j in range(n):
            counts[BRANCH] += 1
            if points[y, j]:
                gxx = np.int64(0)
                gyy = np.int64(0)
                gxy = np.int64(0)
                for u in range(window):
                    gxx += sxx[y, j + u]
                    gyy += syy[y, j + u]
                    gxy += sxy[y, j + u]
                counts[SCRATCH_READS] += 3 * window
                counts[MAC] += 3 * window
                out[y, j] = score_from_moments(gxx, gyy, gxy, k, norm)


def harris_separable_full(tile, p: HarrisParams = HarrisParams(), counts=None) -> np.ndarray:
    """Scores for every pixel of ``tile`` that has a full apron; shape shrinks by 2*apron per axis."""
    tile = _tile_array(tile)
    a = p.apron
    rows, cols = tile.shape[0] - 2 * a, tile.shape[1] - 2 * a
    if rows < 1 or cols < 1:
        raise ValueError(f"tile {tile.shape} lacks the {a}-pixel apron on each side")
    if counts is None:
        counts = new_counts()
    out = np.full((rows, cols), -np.inf)
    _separable_rows(tile, p.window, p.k, p.norm_factor, np.ones((rows, cols), np.bool_), out, counts)
    return out


# --- semi-separable with a 3-slot circular buffer per column ---


@njit(cache=True, nogil=True)
def _semisep_tile(tile, n_score, window, k, norm, points, out, counts, colsum):
    """Score one row of ``n_score`` pixels; ``tile`` is (window + 2) x (n_score + window + 1) raw pixels.

    Each column keeps its circular buffer in three register pairs
    (difference, smoothing); rows rotate through them so row ``r`` always sits
    in slot ``r % 3``. ``colsum`` (3 x cols) receives the per-column moment sums.
    """
    cols = n_score + window - 1
    sxx = colsum[0]
    syy = colsum[1]
    sxy = colsum[2]
    lanes = 0
    active = 0  # points whose window covers column c
    for c in range(cols):
        if c < n_score and points[c]:
            active += 1
        if 0 <= c - window < n_score and points[c - window]:
            active -= 1
        # serial lanes are not free: skip columns no scored pixel reads
        if active == 0:
            continue
        lanes += 1
        # step 1: seed slots 0..2 with three rows of 1-D results
        a = np.int64(tile[0, c])
        d = np.int64(tile[0, c + 2])
        dx0 = d - a
        sm0 = a + 2 * np.int64(tile[0, c + 1]) + d
        a = np.int64(tile[1, c])
        d = np.int64(tile[1, c + 2])
        dx1 = d - a
        sm1 = a + 2 * np.int64(tile[1, c + 1]) + d
        a = np.int64(tile[2, c])
        d = np.int64(tile[2, c + 2])
        dx2 = d - a
        sm2 = a + 2 * np.int64(tile[2, c + 1]) + d
        gx = dx0 + 2 * dx1 + dx2
        gy = sm2 - sm0
        gxx = gx * gx
        gyy = gy * gy
        gxy = gx * gy
        # step 2: slide down; the new row overwrites the oldest slot
        for r in range(3, window + 2):
            a = np.int64(tile[r, c])
            d = np.int64(tile[r, c + 2])
            dx_new = d - a
            sm_new = a + 2 * np.int64(tile[r, c + 1]) + d
            gx = dx1 + 2 * dx2 + dx_new
            gy = sm_new - sm1
            gxx += gx * gx
            gyy += gy * gy
            gxy += gx * gy
            # rename so (0, 1, 2) again mean (oldest, middle, newest)
            dx0, dx1, dx2 = dx1, dx2, dx_new
            sm0, sm1, sm2 = sm1, sm2, sm_new
        sxx[c] = gxx
        syy[c] = gyy
        sxy[c] = gxy
    counts[BRANCH] += cols
    counts[IMAGE_READS] += 3 * (window + 2) * lanes
    counts[MAC] += (5 * (window + 2) + 8 * window) * lanes
    counts[SCRATCH_WRITES] += 3 * lanes
    # step 3: horizontal sums, only where a point was detected
    scored = 0
    for j in range(n_score):
        if points[j]:
            scored += 1
            gxx = np.int64(0)
            gyy = np.int64(0)
            gxy = np.int64(0)
            for u in range(window):
                gxx += sxx[j + u]
                gyy += syy[j + u]
                gxy += sxy[j + u]
            out[j] = score_from_moments(gxx, gyy, gxy, k, norm)
    counts[BRANCH] += n_score
    counts[SCRATCH_READS] += 3 * window * scored
    counts[MAC] += 3 * window * scored


def semisep_scratch(cols: int):
    return np.empty((3, cols), np.int64)


def semisep_tile_shape(width: int, p: HarrisParams) -> tuple[int, int]:
    return p.window + 2, width + p.window + 1


def harris_semiseparable(tile, width: int, p: HarrisParams = HarrisParams(), points=None, counts=None) -> np.ndarray:
    """Scores for the ``width`` centre-row pixels of ``tile``; unscored columns hold -inf.

    ``tile`` must be ``semisep_tile_shape(width, p)``: for W=32 and a 7x7 window
    that is 9 rows by 40 pixels, i.e. a 7x38 gradient window plus the Sobel border.
    """
    tile = _tile_array(tile)
    if width < 1:
        raise ValueError("width must be >= 1")
    expected = semisep_tile_shape(width, p)
    if tile.shape != expected:
        raise ValueError(f"tile shape {tile.shape} != expected {expected} for width {width}")
    points = np.ones(width, np.bool_) if points is None else np.asarray(points, dtype=np.bool_)
    if points.shape != (width,):
        raise ValueError("points must have one flag per scored column")
    if counts is None:
        counts = new_counts()
    out = np.full(width, -np.inf)
    cols = width + p.window - 1
    _semisep_tile(tile, width, p.window, p.k, p.norm_factor, points, out, counts, semisep_scratch(cols))
    return out


def _tile_array(tile) -> np.ndarray:
    if isinstance(tile, Image):
        return tile.data
    arr = np.asarray(tile)
    if arr.ndim != 2:
        raise ValueError("tile must be 2D")
    if arr.dtype != np.uint8:
        if arr.size and (arr.min() < 0 or arr.max() > 255):
            raise ValueError("tile intensities must lie in 0..255")
        arr = arr.astype(np.uint8)
    return arr


# --- whole-image planes ---


@njit(cache=True, nogil=True)
def _direct_plane(data, window, k, norm, out, counts):
    a = window // 2 + 1
    h, w = data.shape
    for y in range(a, h - a):
        for x in range(a, w - a):
            out[y, x] = _harris_direct_at(data, x, y, window, k, norm, counts)


@njit(cache=True, nogil=True)
def _semisep_plane(data, width, window, k, norm, out, counts):
    a = window // 2 + 1
    h, w = data.shape
    points = np.ones(width, np.bool_)
    row = np.empty(width)
    colsum = np.empty((3, width + window - 1), np.int64)
    for y in range(a, h - a):
        for x0 in range(a, w - a, width):
            n = min(width, w - a - x0)
            tile = data[y - a : y + a + 1, x0 - a : x0 + n + a]
            _semisep_tile(tile, n, window, k, norm, points, row, counts, colsum)
            out[y, x0 : x0 + n] = row[:n]


HARRIS_KERNELS = ("direct", "para-sep", "semi-sep")


def harris_plane(img: Image, p: HarrisParams = HarrisParams(), kernel: str = "semi-sep", width: int = 32, counts=None) -> np.ndarray:
    """Image-sized score plane from one kernel; -inf where the window does not fit."""
    if kernel not in HARRIS_KERNELS:
        raise ValueError(f"unknown kernel {kernel!r}; choose from {HARRIS_KERNELS}")
    if counts is None:
        counts = new_counts()
    out = np.full((img.height, img.width), -np.inf)
    a = p.apron
    if img.width <= 2 * a or img.height <= 2 * a:
        return out
    if kernel == "direct":
        _direct_plane(img.data, p.window, p.k, p.norm_factor, out, counts)
    elif kernel == "para-sep":
        out[a:-a, a:-a] = harris_separable_full(img, p, counts)
    else:
        _semisep_plane(img.data, width, p.window, p.k, p.norm_factor, out, counts)
    return out
