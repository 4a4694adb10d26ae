#!/usr/bin/env python3
"""Tabulate the limit variable's characteristic function and fit its decay.

Emits (v, F) pairs over a log grid plus the fitted stretched-exponential
exponent, which should sit near 1/(2-2h).
"""

import argparse

import numpy as np

from fracbin import HurstParams, characteristic_function, fit_cf_decay
from fracbin.reports import render_csv, write_text


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--H", type=float, default=0.75)
    ap.add_argument("--v-min", type=float, default=0.1)
    ap.add_argument("--v-max", type=float, default=200.0)
    ap.add_argument("--points", type=int, default=80)
    ap.add_argument("--out", default="cf_decay.csv")
    args = ap.parse_args()

    p = HurstParams(args.H)
    rows = []
    for v in np.geomspace(args.v_min, args.v_max, args.points):
        rows.append((float(v), characteristic_function(p, float(v), 1e-9)))
    theta, expo, used = fit_cf_decay(p, 40.0 / p.g_H, 400.0 / p.g_H)
    cfg = {"H": args.H, "theta_fit": theta, "exponent_fit": expo,
           "exponent_target": 1.0 / (2.0 - 2.0 * p.h), "fit_points": used}
    write_text(args.out, render_csv(cfg, ("v", "F"), rows))
    print(f"wrote {args.out}; fitted exponent {expo:.4f} "
          f"(target {1.0 / (2.0 - 2.0 * p.h):.4f})")


if __name__ == "__main__":
    main()
