"""Oriented FAST feature detection with binary-encoded FAST and semi-separable Harris."""

from .counters import CountReport
from .fast import (
    RING_OFFSETS,
    DtState,
    buffer_generation,
    classify_pixel,
    detect_fast_baseline,
    detect_fast_binary,
    oracle_fast,
    segment_check,
)
from .harris import (
    GradientMoments,
    HarrisParams,
    harris_direct,
    harris_plane,
    harris_semiseparable,
    harris_separable_full,
    sobel_at,
)
from .image import Image, Pyramid, build_pyramid, dump_pgm, generate_test_pattern, load_pgm, read_pgm, write_pgm
from .pipeline import (
    DetectorConfig,
    Keypoint,
    centroid_angle,
    detect_tile_fused,
    nms_3x3,
    run_counted,
    run_pipeline,
    run_timed,
)

__all__ = [
    "CountReport", "RING_OFFSETS", "DtState", "buffer_generation", "classify_pixel", "detect_fast_baseline",
    "detect_fast_binary", "oracle_fast", "segment_check", "GradientMoments", "HarrisParams", "harris_direct", "harris_plane",
    "harris_semiseparable", "harris_separable_full", "sobel_at", "Image", "Pyramid", "build_pyramid", "dump_pgm",
    "generate_test_pattern", "load_pgm", "read_pgm", "write_pgm", "DetectorConfig", "Keypoint", "centroid_angle",
    "detect_tile_fused", "nms_3x3", "run_counted", "run_pipeline", "run_timed",
]  # fmt: skip
