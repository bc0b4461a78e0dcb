"""Keypoint CSV and binary record streams."""

from __future__ import annotations

import csv
import io
import struct

from .pipeline import Keypoint

CSV_HEADER = ("level", "x", "y", "response", "angle")

STREAM_MAGIC = b"OFKP"
STREAM_VERSION = 1
_HEADER = struct.Struct("<4sHI")
_RECORD = struct.Struct("<Idddd")


def keypoints_to_csv(keypoints) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for kp in keypoints:
        # repr round-trips floats exactly
        writer.writerow([kp.level, repr(float(kp.x)), repr(float(kp.y)), repr(float(kp.response)), repr(float(kp.angle))])
    return buf.getvalue()


def keypoints_from_csv(text: str) -> list[Keypoint]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise ValueError(f"expected CSV header {','.join(CSV_HEADER)}")
    return [Keypoint(float(x), float(y), int(lvl), float(r), float(a)) for lvl, x, y, r, a in rows[1:]]


def keypoints_to_bytes(keypoints) -> bytes:
    """``OFKP`` magic, u16 version, u32 count, then (u32 level, f64 x, y, response, angle) records."""
    keypoints = list(keypoints)
    parts = [_HEADER.pack(STREAM_MAGIC, STREAM_VERSION, len(keypoints))]
    parts += [_RECORD.pack(kp.level, kp.x, kp.y, kp.response, kp.angle) for kp in keypoints]
    return b"".join(parts)


def keypoints_from_bytes(raw: bytes) -> list[Keypoint]:
    if len(raw) < _HEADER.size:
        raise ValueError("stream shorter than its header")
    magic, version, n = _HEADER.unpack_from(raw)
    if magic != STREAM_MAGIC or version != STREAM_VERSION:
        raise ValueError("not an OFKP v1 keypoint stream")
    if len(raw) != _HEADER.size + n * _RECORD.size:
        raise ValueError(f"stream length does not match {n} records")
    out = []
    for i in range(n):
        lvl, x, y, r, a = _RECORD.unpack_from(raw, _HEADER.size + i * _RECORD.size)
        out.append(Keypoint(x, y, lvl, r, a))
    return out
