"""Cyclic verdicts vs a brute-force search for timelike fixed vectors of E(tau).

Usage: python scripts/cyclic_necessity.py [--taus 200] [--mesh 100]
"""

import argparse
import math
import time

from tdho import cyclic as cy
from tdho import model, so21
from tdho import propagate as pr
from tdho.model import FamilySpec

CASES = [
    FamilySpec("A", 0, 1, 1.0),
    FamilySpec("A", 0, 0, 1.0, n2=1.0),
    FamilySpec("A", 1, 1, 1.0),
    FamilySpec("B", 0.75, 1.25, 0.2),
    FamilySpec("B", 0.75, 1.25, 0.5),
    FamilySpec("B", 0.75, 1.25, 1.0),
    FamilySpec("C", 0, 1, 2.0),
    FamilySpec("C", 0, 1, 0.5),
    FamilySpec("C", 0, 1, 1.0),
    FamilySpec("D", 0, 1, 0.5),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--taus", type=int, default=200)
    ap.add_argument("--mesh", type=int, default=100)
    args = ap.parse_args()
    phi_max = 4 * math.pi
    for spec in CASES:
        t0 = time.perf_counter()
        prof = model.family_profile(spec, phi_max)
        grid = pr.family_grid(prof, phi_max, args.taus + 1)
        tr = pr.integrate(prof, so21.vec(0, 0, 1), grid)
        kinds, bad = {}, []
        for k in range(1, len(grid)):
            v = cy.verdict(tr.E[k], tr.Eq_mat[k])
            found, res = cy.brute_force_fixed(tr.E[k], mesh=args.mesh)
            kinds[v.kind.value] = kinds.get(v.kind.value, 0) + 1
            if found != (v.kind is not cy.CyclicKind.NONE_EXIST):
                bad.append((k, v.kind.value, v.eta_sq, res))
        label = f"{spec.family} n=({spec.n1},{spec.n2},{spec.n3}) lam={spec.lam}"
        print(f"{label:32s} {kinds} disagreements={len(bad)} {bad[:3]} {time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    main()
