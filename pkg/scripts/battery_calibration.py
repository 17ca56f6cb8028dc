#!/usr/bin/env python3
"""Empirical size of each lognormality test under a true lognormal null.

Also reports the family-level rejection rate of the Bonferroni verdict and,
for comparison, of the naive "any test rejects" rule.
"""

import argparse

import numpy as np

from wirechan.generator import make_rng
from wirechan.stats import battery_rejects, lognormality_battery


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("-n", type=int, default=60, help="sample size")
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=8)
    ap.add_argument("--calibration", default="auto",
                    choices=("auto", "asymptotic", "monte-carlo"))
    args = ap.parse_args()

    counts, family, naive = {}, 0, 0
    for t in range(args.trials):
        x = np.exp(make_rng(args.seed, t).standard_normal(args.n))
        reports = lognormality_battery(x, calibration=args.calibration)
        for r in reports:
            key = "shapiro" if r.test_name.startswith("shapiro") else r.test_name
            counts[key] = counts.get(key, 0) + bool(r.reject_at_5pct)
        family += battery_rejects(reports)
        naive += any(r.reject_at_5pct for r in reports)
    for k, v in counts.items():
        print(f"{k:<18}{v / args.trials:.3f}")
    print(f"{'bonferroni':<18}{family / args.trials:.3f}")
    print(f"{'any-rejects':<18}{naive / args.trials:.3f}")


if __name__ == "__main__":
    main()
