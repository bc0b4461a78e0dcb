"""Per-stage timing of every variant on the five synthetic patterns, as a pivot table."""

import argparse

from ofast import DetectorConfig, generate_test_pattern
from ofast.cli import VARIANTS, bench_rows


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--levels", type=int, default=4)
    ap.add_argument("--repetitions", type=int, default=5)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--stage", default="harris", choices=["fast", "harris", "nms", "centroid"])
    args = ap.parse_args()

    images = [(f"case{c}", generate_test_pattern(c)) for c in range(1, 6)]
    names = list(VARIANTS)
    rows = bench_rows(images, names, DetectorConfig(levels=args.levels), args.repetitions, args.workers)
    med = {(v, i): m for v, s, i, m, _ in rows if s == args.stage}
    print(f"median {args.stage} ms, levels={args.levels}, workers={args.workers}")
    print(f"{'variant':<15}" + "".join(f"{label:>10}" for label, _ in images))
    for v in names:
        print(f"{v:<15}" + "".join(f"{med[(v, label)]:>10.2f}" for label, _ in images))


if __name__ == "__main__":
    main()
