"""Empirical lower bounds on d_k(M_n) next to sqrt(n/k) and the closed-form bounds.

The trend is reported, not asserted: whether the sampled maps follow the
sqrt(n/k) scaling at these sizes is an open question.
"""

import argparse
import csv
import math
from dataclasses import dataclass

from kpos.bounds import d_k_bounds
from kpos.randgen import empirical_d_lower


@dataclass
class Config:
    n_max: int = 4
    samples: int = 20
    seed: int = 0
    max_seconds: float = None
    out: str = "sampling_trend.csv"


def run(cfg):
    rows = []
    for n in range(2, cfg.n_max + 1):
        for k in range(1, n + 1):
            rep = empirical_d_lower(n, k, cfg.samples, cfg.seed, max_seconds=cfg.max_seconds)
            b = d_k_bounds(n, k).as_dict()
            rows.append({
                "n": n, "k": k, "sqrt_n_over_k": f"{math.sqrt(n / k):.9g}",
                "best": f"{rep.best:.9g}", "best_source": rep.best_source,
                "heuristic_best": "" if rep.heuristic_best is None else f"{rep.heuristic_best:.9g}",
                "d_k_tomiyama": "" if b["d_k_tomiyama"] is None else f"{b['d_k_tomiyama']:.9g}",
                "d_k_upper": f"{b['d_k_upper']:.9g}",
                "discarded": rep.discarded, "truncated": int(rep.truncated),
            })
            print(rows[-1])
    with open(cfg.out, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
    return rows


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-max", type=int, default=Config.n_max)
    ap.add_argument("--samples", type=int, default=Config.samples)
    ap.add_argument("--seed", type=int, default=Config.seed)
    ap.add_argument("--max-seconds", type=float)
    ap.add_argument("--out", default=Config.out)
    run(Config(**vars(ap.parse_args())))
