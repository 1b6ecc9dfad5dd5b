"""Monte-Carlo E||G|| for GUE matrices over a range of sizes, against 2 sqrt(p)."""

import argparse
import csv
import math
from dataclasses import dataclass, field

from kpos.randgen import mean_width_trace_ball


@dataclass
class Config:
    sizes: list = field(default_factory=lambda: [4, 16, 64, 128, 256])
    samples: int = 200
    seed: int = 1
    out: str = "gue_width.csv"


def run(cfg):
    rows = []
    for p in cfg.sizes:
        mean, se = mean_width_trace_ball(p, cfg.samples, cfg.seed)
        rows.append({"p": p, "mean": f"{mean:.9g}", "standard_error": f"{se:.9g}",
                     "ratio_to_sqrt_p": f"{mean / math.sqrt(p):.9g}",
                     "below_two_sqrt_p": int(mean <= 2 * math.sqrt(p))})
    with open(cfg.out, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
    return rows


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=Config().sizes)
    ap.add_argument("--samples", type=int, default=Config.samples)
    ap.add_argument("--seed", type=int, default=Config.seed)
    ap.add_argument("--out", default=Config.out)
    for row in run(Config(**vars(ap.parse_args()))):
        print(row)
