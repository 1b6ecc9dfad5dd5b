"""Lower estimate of the Gaussian width of the diamond-norm unit ball for small n."""

import argparse
import json
from dataclasses import dataclass

from kpos.randgen import diamond_ball_width_check


@dataclass
class Config:
    n: int = 2
    samples: int = 50
    seed: int = 0


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=Config.n)
    ap.add_argument("--samples", type=int, default=Config.samples)
    ap.add_argument("--seed", type=int, default=Config.seed)
    cfg = Config(**vars(ap.parse_args()))
    print(json.dumps(diamond_ball_width_check(cfg.n, cfg.samples, cfg.seed), indent=2))
