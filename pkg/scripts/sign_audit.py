#!/usr/bin/env python3
"""Sweep initial conditions on the torus and record which radial combination
stays constant along each geodesic.

Writes results/sign_audit.csv with one row per initial condition.
"""
import argparse
import csv
from pathlib import Path

import numpy as np

from pdmtorus.torus import FullState, TorusParams, integrate_full, sign_audit


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--a", type=float, default=1.0)
    ap.add_argument("--c", type=float, default=2.0)
    ap.add_argument("--t-end", type=float, default=50.0)
    ap.add_argument("--dt", type=float, default=1e-3)
    ap.add_argument("--out", default="results/sign_audit.csv")
    args = ap.parse_args()

    p = TorusParams(args.a, args.c)
    rows = []
    for v0 in np.linspace(-1.5, 1.5, 7):
        for du0 in (0.1, 0.3, 0.6):
            for dv0 in (-0.2, 0.1, 0.4):
                tr = integrate_full(FullState(0.0, v0, du0, dv0), p, args.t_end, args.dt)
                verdict = sign_audit(tr)
                rows.append((v0, du0, dv0, verdict.plus_drift, verdict.minus_drift,
                             verdict.conserved))
                print(f"v0={v0:+.2f} du0={du0:.1f} dv0={dv0:+.1f}  plus={verdict.plus_drift:.2e} "
                      f"minus={verdict.minus_drift:.2e}  -> {verdict.conserved}")

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["v0", "du0", "dv0", "plus_drift", "minus_drift", "conserved"])
        w.writerows(rows)
    counts = {k: sum(r[-1] == k for r in rows) for k in ("energy", "paper", "inconclusive")}
    print(f"wrote {out}: {counts}")


if __name__ == "__main__":
    main()
