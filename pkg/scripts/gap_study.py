#!/usr/bin/env python3
"""Gap curves for the reference models, written as one CSV.

Usage::

    python3 scripts/gap_study.py --out results/gap_study.csv [--mc-paths 100000]

Every model uses the Spitzer sums; ``--mc-paths`` adds a Monte Carlo curve
for the finite-activity models (exact bridge sampling) as a cross-check.
"""
import argparse
import os
import time

from levygap import catalog
from levygap.asymptotics import classify_rate
from levygap.lab import GAP_HEADER, fit_rate, gap_rows, run_gap_study, verify_prediction, write_csv
from levygap.pricing import MonteCarlo

GRIDS = {
    "brownian": [2**k for k in range(4, 13)],
    "merton": [2**k for k in range(4, 11)],
    "kou": [2**k for k in range(4, 9)],
    "cp": [2**k for k in range(4, 12)],
    "vg": [2**k for k in range(4, 11)],
    "stable": [2**k for k in range(4, 13)],
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/gap_study.csv")
    ap.add_argument("--mc-paths", type=int, default=0)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    args = ap.parse_args()

    rows = []
    for name, grid in GRIDS.items():
        model = catalog.get(name)
        t0 = time.perf_counter()
        curve = run_gap_study(model, 1.0, grid, model_id=name)
        pred = classify_rate(model)
        rep = verify_prediction(curve, pred)
        fit = fit_rate(curve)
        rows += list(gap_rows(curve, "spitzer"))
        status = "PASS" if rep.passed else "FAIL"
        print(f"{name:9s} {pred.order:19s} slope={fit.slope:+.4f} {status} ({time.perf_counter() - t0:.1f}s)")
        for c in rep.checks:
            print(f"    {c.name}: {c.value:.6g} vs {c.target:.6g}")
        if args.mc_paths and model.finite_activity:
            mc = MonteCarlo(args.mc_paths, args.seed, args.workers)
            mcurve = run_gap_study(model, 1.0, grid[:5], "mc", mc, name)
            rows += list(gap_rows(mcurve, "mc"))

    os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
    write_csv(args.out, GAP_HEADER, rows)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
