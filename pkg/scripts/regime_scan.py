"""Regime labels and measured growth exponents across a coupling sweep.

Usage: python scripts/regime_scan.py [--family B --n1 0.75 --n3 1.25] [--out scan.csv]
"""

import argparse
import csv
import sys

import numpy as np

from tdho import scan
from tdho.model import FamilySpec


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--family", default="B")
    ap.add_argument("--n1", type=float, default=0.75)
    ap.add_argument("--n3", type=float, default=1.25)
    ap.add_argument("--lam-min", type=float, default=0.0)
    ap.add_argument("--lam-max", type=float, default=3.0)
    ap.add_argument("--steps", type=int, default=301)
    ap.add_argument("--out")
    args = ap.parse_args()
    lams = np.linspace(args.lam_min, args.lam_max, args.steps)
    fits = scan.growth_scan(FamilySpec(args.family, args.n1, args.n3), lams)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["lambda", "regime", "Lambda", "fit", "expected", "slope", "ok"])
    for f in fits:
        w.writerow([f"{f.lam:.4f}", f.kind.value, f"{f.Lambda:.6f}", f.fit, f"{f.expected:.4f}", f"{f.slope:.4f}", int(f.ok)])
    if args.out:
        fh.close()
    changes = [fits[i].lam for i in range(1, len(fits)) if fits[i].kind is not fits[i - 1].kind]
    print(f"kind changes at {changes}; {sum(not f.ok for f in fits)} fits outside tolerance", file=sys.stderr)


if __name__ == "__main__":
    main()
