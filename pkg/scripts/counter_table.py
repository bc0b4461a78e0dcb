"""Average FAST and Harris cost counters over random images, binary vs baseline and semi-sep vs direct."""

import argparse

import numpy as np

from ofast import DetectorConfig, Image, run_counted


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--images", type=int, default=20)
    ap.add_argument("--size", type=int, default=256)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    cfg = DetectorConfig()
    rng = np.random.default_rng(args.seed)
    runs = {("binary", "semi-sep"): [], ("baseline", "semi-sep"): [], ("binary", "direct"): []}
    for _ in range(args.images):
        img = Image.from_array(rng.integers(0, 256, (args.size, args.size), dtype=np.uint8))
        for key in runs:
            runs[key].append(run_counted(img, cfg, *key)[1])

    print(f"{'variant':<22}{'stage':<8}{'branch':>12}{'img_reads':>12}{'scr_reads':>12}{'scr_writes':>12}{'mac':>14}")
    for (fast, harris), reports in runs.items():
        for stage in ("fast", "harris"):
            mean = {k: np.mean([r.stages[stage].counters()[k] for r in reports]) for k in reports[0].counters()}
            print(f"{fast + '/' + harris:<22}{stage:<8}" + "".join(f"{v:>12.0f}" for v in list(mean.values())[:4])
                  + f"{mean['mac_ops']:>14.0f}")  # fmt: skip

    def ratio(a, b, stage, key):
        return np.mean([getattr(x.stages[stage], key) / getattr(y.stages[stage], key) for x, y in zip(a, b)])

    b, a, d = runs[("binary", "semi-sep")], runs[("baseline", "semi-sep")], runs[("binary", "direct")]
    print(f"\nFAST branch ratio binary/baseline: {ratio(b, a, 'fast', 'branch_evals'):.3f}")
    print(f"FAST image-read ratio binary/baseline: {ratio(b, a, 'fast', 'image_reads'):.3f}")
    print(f"Harris MAC ratio semi-sep/direct: {ratio(b, d, 'harris', 'mac_ops'):.3f}")


if __name__ == "__main__":
    main()
