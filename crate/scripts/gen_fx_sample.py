#!/usr/bin/env python3
"""Writes data/fx_sample.csv: a synthetic business-day CHF-EUR / CHF-SGD
series (units of EUR and SGD per CHF) drifting between approximate
historical levels. Deterministic for a given seed."""

import argparse
import datetime as dt
import math
import random


def business_days(start, end):
    d = start
    while d <= end:
        if d.weekday() < 5:
            yield d
        d += dt.timedelta(days=1)


def bridge(rng, n, start, end, vol):
    """Log-space random walk pinned to `start` and `end`."""
    steps = [rng.gauss(0.0, vol) for _ in range(n - 1)]
    walk = [0.0]
    for s in steps:
        walk.append(walk[-1] + s)
    drift = math.log(end / start)
    return [start * math.exp(w - walk[-1] * i / (n - 1) + drift * i / (n - 1)) for i, w in enumerate(walk)]


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--seed", type=int, default=20231006)
    p.add_argument("--out", default="data/fx_sample.csv")
    args = p.parse_args()

    rng = random.Random(args.seed)
    days = list(business_days(dt.date(2020, 10, 5), dt.date(2023, 10, 6)))
    eur = bridge(rng, len(days), 0.928, 1.035, 0.0035)
    sgd = bridge(rng, len(days), 1.490, 1.505, 0.0045)
    with open(args.out, "w") as f:
        f.write("# synthetic daily closes, not market data; see scripts/gen_fx_sample.py\n")
        f.write("date,chf_eur,chf_sgd\n")
        for d, e, s in zip(days, eur, sgd):
            f.write(f"{d.isoformat()},{e:.6f},{s:.6f}\n")


if __name__ == "__main__":
    main()
