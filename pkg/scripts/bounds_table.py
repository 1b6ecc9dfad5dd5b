"""Write the r_k / d_k bounds table as CSV (and optionally JSON)."""

import argparse
import json
from dataclasses import dataclass

from kpos import bounds


@dataclass
class Config:
    n_max: int = 8
    k_max: int = 8
    c: float = bounds.DEFAULT_C
    out: str = "bounds.csv"
    json_out: str = None


def run(cfg):
    rows = bounds.table(range(1, cfg.n_max + 1), range(1, cfg.k_max + 1), cfg.c)
    with open(cfg.out, "w") as fh:
        fh.write(bounds.to_csv(rows))
    if cfg.json_out:
        with open(cfg.json_out, "w") as fh:
            json.dump(bounds.to_json(rows), fh, indent=2)
    return rows


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-max", type=int, default=Config.n_max)
    ap.add_argument("--k-max", type=int, default=Config.k_max)
    ap.add_argument("--c", type=float, default=Config.c)
    ap.add_argument("--out", default=Config.out)
    ap.add_argument("--json-out")
    rows = run(Config(**vars(ap.parse_args())))
    print(f"wrote {len(rows)} rows")
