"""Grayscale images, pyramids, binary PGM I/O and the five FAST test patterns."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

MIN_LEVEL_SIDE = 16
PATTERN_BACKGROUND = 100
PATTERN_BRIGHT = 200


class PGMError(ValueError):
    pass


class PGMHeaderError(PGMError):
    pass


class PGMTruncatedError(PGMError):
    pass


class PGMMaxvalError(PGMError):
    pass


@dataclass(frozen=True)
class Image:
    """8-bit grayscale raster. ``data`` is a read-only (height, width) uint8 array."""

    width: int
    height: int
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(f"image dimensions must be >= 1, got {self.width}x{self.height}")
        arr = np.asarray(self.data)
        if arr.size != self.width * self.height:
            raise ValueError(f"data length {arr.size} != {self.width}*{self.height}")
        if arr.dtype != np.uint8:
            if arr.size and (arr.min() < 0 or arr.max() > 255):
                raise ValueError("intensities must lie in 0..255")
            arr = arr.astype(np.uint8)
        arr = np.ascontiguousarray(arr.reshape(self.height, self.width))
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @classmethod
    def from_array(cls, arr) -> Image:
        arr = np.asarray(arr)
        if arr.ndim != 2:
            raise ValueError(f"expected a 2D array, got shape {arr.shape}")
        return cls(arr.shape[1], arr.shape[0], arr)

    def __eq__(self, other):
        if not isinstance(other, Image):
            return NotImplemented
        return (self.width, self.height) == (other.width, other.height) and np.array_equal(self.data, other.data)

    def __hash__(self):
        return hash((self.width, self.height, self.data.tobytes()))


@dataclass(frozen=True)
class Pyramid:
    levels: tuple[Image, ...]
    scale_factor: float

    @property
    def level_scales(self) -> tuple[float, ...]:
        return tuple(self.scale_factor**i for i in range(len(self.levels)))

    def __len__(self):
        return len(self.levels)

    def __getitem__(self, i):
        return self.levels[i]


# --- PGM ---

_TOKEN = re.compile(rb"(?:\s|#[^\n]*\n?)*([^\s#]+)")


def load_pgm(raw: bytes) -> Image:
    """Parse a binary (P5) PGM with maxval <= 255."""
    raw = bytes(raw)
    if not raw.startswith(b"P5"):
        raise PGMHeaderError("missing P5 magic")
    pos = 2
    fields = []
    for _ in range(3):
        m = _TOKEN.match(raw, pos)
        if m is None or not m.group(1).isdigit():
            raise PGMHeaderError("malformed PGM header")
        fields.append(int(m.group(1)))
        pos = m.end()
    # exactly one whitespace byte separates header and raster
    if pos >= len(raw) or raw[pos : pos + 1] not in b" \t\r\n":
        raise PGMHeaderError("header not terminated by whitespace")
    pos += 1
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise PGMHeaderError(f"invalid dimensions {width}x{height}")
    if maxval < 1 or maxval > 255:
        raise PGMMaxvalError(f"maxval {maxval} not in 1..255")
    n = width * height
    payload = raw[pos : pos + n]
    if len(payload) < n:
        raise PGMTruncatedError(f"expected {n} pixel bytes, got {len(payload)}")
    return Image(width, height, np.frombuffer(payload, dtype=np.uint8))


def dump_pgm(img: Image) -> bytes:
    return b"P5\n%d %d\n255\n" % (img.width, img.height) + img.data.tobytes()


def read_pgm(path) -> Image:
    return load_pgm(Path(path).read_bytes())


def write_pgm(path, img: Image) -> None:
    Path(path).write_bytes(dump_pgm(img))


# --- pyramid ---


def level_shape(width: int, height: int, scale: float) -> tuple[int, int]:
    # tiny epsilon so exact ratios like 1024/2**3 are not floored to 127
    return int(np.floor(width / scale + 1e-9)), int(np.floor(height / scale + 1e-9))


def resize_bilinear(img: Image, width: int, height: int, scale: float) -> Image:
    """Bilinear resample with pixel-center alignment, sampling the source at ``scale`` per output pixel."""
    src = img.data.astype(np.float64)

    def axis(n_out, n_in):
        pos = (np.arange(n_out) + 0.5) * scale - 0.5
        pos = np.clip(pos, 0.0, n_in - 1)
        i0 = np.floor(pos).astype(np.intp)
        i1 = np.minimum(i0 + 1, n_in - 1)
        return i0, i1, pos - i0

    x0, x1, fx = axis(width, img.width)
    y0, y1, fy = axis(height, img.height)
    top = src[y0][:, x0] * (1 - fx) + src[y0][:, x1] * fx
    bot = src[y1][:, x0] * (1 - fx) + src[y1][:, x1] * fx
    out = top * (1 - fy)[:, None] + bot * fy[:, None]
    return Image(width, height, np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8))


def build_pyramid(img: Image, levels: int = 4, scale_factor: float = 1.2) -> Pyramid:
    if levels < 1:
        raise ValueError(f"levels must be >= 1, got {levels}")
    if not scale_factor > 1:
        raise ValueError(f"scale_factor must be > 1, got {scale_factor}")
    out = [img]
    for lvl in range(1, levels):
        s = scale_factor**lvl
        w, h = level_shape(img.width, img.height, s)
        if w < MIN_LEVEL_SIDE or h < MIN_LEVEL_SIDE:
            raise ValueError(
                f"level {lvl} would be {w}x{h}; smallest level must be >= {MIN_LEVEL_SIDE}x{MIN_LEVEL_SIDE}"
            )
        # every level is resampled from level 0, not from its predecessor
        out.append(resize_bilinear(img, w, h, s))
    return Pyramid(tuple(out), float(scale_factor))


# --- synthetic FAST test patterns ---

# 1-based ring indices set bright per case
PATTERN_CASES = {
    1: tuple(range(1, 10)),
    2: tuple(range(6, 17)) + (1,),
    3: (14, 15, 16) + tuple(range(1, 7)),
    4: tuple(range(1, 9)),
    5: tuple(range(1, 17, 2)),
}


def pattern_centers(grid: int, cell: int) -> list[tuple[int, int]]:
    """(x, y) of every pattern center, row-major."""
    c = cell // 2
    return [(gx * cell + c, gy * cell + c) for gy in range(grid) for gx in range(grid)]


def generate_test_pattern(case_id: int, grid: int = 25, cell: int = 41) -> Image:
    from .fast import RING_OFFSETS

    if case_id not in PATTERN_CASES:
        raise ValueError(f"unknown pattern case {case_id}; expected 1..5")
    if grid < 1:
        raise ValueError(f"grid must be >= 1, got {grid}")
    if cell < 7:
        raise ValueError(f"cell must be >= 7 to hold the radius-3 ring, got {cell}")
    side = grid * cell
    data = np.full((side, side), PATTERN_BACKGROUND, dtype=np.uint8)
    bright = [RING_OFFSETS[i - 1] for i in PATTERN_CASES[case_id]]
    for cx, cy in pattern_centers(grid, cell):
        for dx, dy in bright:
            data[cy + dy, cx + dx] = PATTERN_BRIGHT
    return Image(side, side, data)
