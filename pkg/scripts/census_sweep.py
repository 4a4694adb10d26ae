#!/usr/bin/env python3
"""Exact censuses across market sizes N: point counts and path proportions.

Shows the march of the per-level proportions towards the limit and the path
proportion saturating (to 1 above the critical exponent).
"""

import argparse

from fracbin import HurstParams, MarketSpec, census
from fracbin.reports import render_csv, write_text


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--H", type=float, default=0.8)
    ap.add_argument("--sigma", type=float, default=1.0)
    ap.add_argument("--n-min", type=int, default=8)
    ap.add_argument("--n-max", type=int, default=22)
    ap.add_argument("--out", default="census_sweep.csv")
    args = ap.parse_args()

    params = HurstParams(args.H, args.sigma)
    rows = []
    for N in range(args.n_min, args.n_max + 1, 2):
        c = census(MarketSpec(N=N, params=params))
        rows.append((N, c.total, c.per_level_proportions[-1], c.path_count, c.path_proportion))
    cfg = {"H": args.H, "sigma": args.sigma}
    write_text(args.out, render_csv(
        cfg, ("N", "points", "last_level_proportion", "paths", "path_proportion"), rows))
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
