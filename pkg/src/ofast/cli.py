"""``ofast`` command line: detect, gen, compare, bench.

Exit codes: 0 success, 1 usage or flag error, 2 data error (I/O, bad PGM,
variant mismatch).
"""

from __future__ import annotations

import argparse
import statistics
import sys
import time
from pathlib import Path

from .counters import STAGES
from .harris import HarrisParams
from .image import PGMError, generate_test_pattern, read_pgm, write_pgm
from .pipeline import DetectorConfig, resolve_workers, run_counted, run_timed
from .serialize import keypoints_to_csv

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2

# compare/bench variant name -> (FAST variant, Harris variant)
VARIANTS = {
    "baseline": ("baseline", "semi-sep"),
    "binary": ("binary", "semi-sep"),
    "direct-harris": ("binary", "direct"),
    "para-sep": ("binary", "para-sep"),
    "semi-sep": ("binary", "semi-sep"),
}
TIMED_STAGES = ("fast", "harris", "nms", "centroid")


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_config_flags(p):
    d = DetectorConfig()
    p.add_argument("--threshold", type=int, default=d.t, help="FAST threshold t")
    p.add_argument("--levels", type=int, default=d.levels)
    p.add_argument("--scale", type=float, default=d.scale_factor, help="pyramid scale factor")
    p.add_argument("--tile-width", type=int, default=d.tile_width)
    p.add_argument("--margin", type=int, default=d.margin)
    p.add_argument("--k", type=float, default=d.harris.k)
    p.add_argument("--window", type=int, default=d.harris.window)
    p.add_argument("--workers", type=int, default=None, help="worker threads (default: $OFAST_WORKERS or 1)")


def _config(args) -> DetectorConfig:
    try:
        return DetectorConfig(
            t=args.threshold,
            harris=HarrisParams(k=args.k, window=args.window),
            levels=args.levels,
            scale_factor=args.scale,
            tile_width=args.tile_width,
            margin=args.margin,
        )
    except ValueError as e:
        raise UsageError(str(e)) from None


def _workers(args) -> int:
    try:
        return resolve_workers(args.workers)
    except ValueError as e:
        raise UsageError(str(e)) from None


def _load(path):
    try:
        return read_pgm(path)
    except (OSError, PGMError) as e:
        raise DataError(f"{path}: {e}") from None


def _check_fits(img, cfg):
    side = 2 * cfg.margin + 1
    if img.width < side or img.height < side:
        raise UsageError(f"--margin {cfg.margin} too large for a {img.width}x{img.height} image")
    try:
        from .image import build_pyramid

        build_pyramid(img, cfg.levels, cfg.scale_factor)
    except ValueError as e:
        raise UsageError(str(e)) from None


def _write(path, text: str):
    try:
        Path(path).write_text(text)
    except OSError as e:
        raise DataError(f"{path}: {e}") from None


def cmd_detect(args) -> int:
    cfg = _config(args)
    workers = _workers(args)
    img = _load(args.input)
    _check_fits(img, cfg)
    keypoints, seconds = run_timed(img, cfg, args.variant, args.harris, workers)
    csv_text = keypoints_to_csv(keypoints)
    if args.out:
        _write(args.out, csv_text)
    else:
        sys.stdout.write(csv_text)
    per_level = [sum(1 for kp in keypoints if kp.level == lvl) for lvl in range(cfg.levels)]
    out = sys.stderr if not args.out else sys.stdout
    print(f"keypoints={len(keypoints)} per_level={','.join(map(str, per_level))}", file=out)
    print(" ".join(f"{s}_ms={1000 * seconds.get(s, 0.0):.3f}" for s in TIMED_STAGES), file=out)
    return EXIT_OK


def cmd_gen(args) -> int:
    try:
        img = generate_test_pattern(args.case, args.grid, args.cell)
    except ValueError as e:
        raise UsageError(str(e)) from None
    try:
        write_pgm(args.out, img)
    except OSError as e:
        raise DataError(f"{args.out}: {e}") from None
    print(f"wrote {args.out} ({img.width}x{img.height}, case {args.case})")
    return EXIT_OK


def _parse_variants(text: str, minimum: int) -> list[str]:
    names = [v for v in text.split(",") if v]
    unknown = [v for v in names if v not in VARIANTS]
    if unknown:
        raise UsageError(f"unknown variant(s) {unknown}; choose from {', '.join(VARIANTS)}")
    if len(names) < minimum:
        raise UsageError(f"need at least {minimum} variant(s), got {len(names)}")
    return names


def _first_difference(a, b):
    for i, (x, y) in enumerate(zip(a, b)):
        if x != y:
            return i, x, y
    i = min(len(a), len(b))
    return i, a[i] if i < len(a) else None, b[i] if i < len(b) else None


def cmd_compare(args) -> int:
    names = _parse_variants(args.variants, 2)
    cfg = _config(args)
    workers = _workers(args)
    img = _load(args.input)
    _check_fits(img, cfg)
    results = {}
    for name in names:
        fast, harris = VARIANTS[name]
        results[name] = run_counted(img, cfg, fast, harris, workers)
    ref_name = names[0]
    ref = results[ref_name][0]
    mismatch = None
    for name in names[1:]:
        if results[name][0] != ref:
            mismatch = (name, _first_difference(ref, results[name][0]))
            break
    counters = list(results[ref_name][1].counters())
    print("variant\tstage\t" + "\t".join(counters))
    for name in names:
        report = results[name][1]
        for stage in STAGES:
            row = report.stages[stage].counters()
            print(f"{name}\t{stage}\t" + "\t".join(str(row[c]) for c in counters))
    if "baseline" in results and "binary" in results:
        fb = results["binary"][1].stages["fast"]
        fa = results["baseline"][1].stages["fast"]
        print(f"fast branch ratio binary/baseline = {fb.branch_evals / max(fa.branch_evals, 1):.4f}")
        print(f"fast image-read ratio binary/baseline = {fb.image_reads / max(fa.image_reads, 1):.4f}")
    if mismatch:
        name, (i, want, got) = mismatch
        print(f"MISMATCH {ref_name} vs {name} at keypoint {i}: {want} != {got}")
        return EXIT_DATA
    print(f"EQUAL ({len(ref)} keypoints)")
    return EXIT_OK


def bench_rows(images, names, cfg, repetitions, workers):
    """(variant, stage, image, median_ms, min_ms) rows; the first run of every case is a discarded warm-up."""
    rows = []
    for label, img in images:
        for name in names:
            fast, harris = VARIANTS[name]
            run_timed(img, cfg, fast, harris, workers)
            samples = {s: [] for s in TIMED_STAGES}
            for _ in range(repetitions):
                _, seconds = run_timed(img, cfg, fast, harris, workers)
                for s in TIMED_STAGES:
                    samples[s].append(1000 * seconds.get(s, 0.0))
            for s in TIMED_STAGES:
                rows.append((name, s, label, statistics.median(samples[s]), min(samples[s])))
    return rows


def cmd_bench(args) -> int:
    if args.repetitions < 3:
        raise UsageError(f"--repetitions must be >= 3, got {args.repetitions}")
    names = _parse_variants(args.variants, 1)
    cfg = _config(args)
    workers = _workers(args)
    images = [(str(p), _load(p)) for p in args.inputs]
    if args.patterns:
        images += [(f"case{c}", generate_test_pattern(c, args.grid, args.cell)) for c in range(1, 6)]
    if not images:
        raise UsageError("give PGM inputs and/or --patterns")
    for _, img in images:
        _check_fits(img, cfg)
    start = time.perf_counter()
    rows = bench_rows(images, names, cfg, args.repetitions, workers)
    lines = ["variant,stage,image,median_ms,min_ms"]
    lines += [f"{v},{s},{i},{med:.4f},{mn:.4f}" for v, s, i, med, mn in rows]
    text = "\n".join(lines) + "\n"
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    print(f"bench finished in {time.perf_counter() - start:.1f}s", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ofast", description="Oriented FAST detector with binary FAST and semi-separable Harris.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("detect", help="detect keypoints in a PGM and write CSV")
    p.add_argument("input")
    _add_config_flags(p)
    p.add_argument("--variant", choices=["binary", "baseline"], default="binary")
    p.add_argument("--harris", choices=["semi-sep", "para-sep", "direct"], default="semi-sep")
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("gen", help="write one of the five FAST test patterns as PGM")
    p.add_argument("--case", type=int, default=1)
    p.add_argument("--grid", type=int, default=25)
    p.add_argument("--cell", type=int, default=41)
    p.add_argument("--out", default="pattern.pgm")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("compare", help="check variants produce identical keypoints and show their counters")
    p.add_argument("input")
    p.add_argument("--variants", default="baseline,binary", help=f"comma list from {', '.join(VARIANTS)}")
    _add_config_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("bench", help="per-stage timing table over images and variants")
    p.add_argument("inputs", nargs="*")
    p.add_argument("--patterns", action="store_true", help="also bench the five generated test patterns")
    p.add_argument("--grid", type=int, default=25)
    p.add_argument("--cell", type=int, default=41)
    p.add_argument("--repetitions", type=int, default=5)
    p.add_argument("--variants", default="direct-harris,semi-sep")
    _add_config_flags(p)
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"ofast {args.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as e:
        print(f"ofast {args.command}: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
