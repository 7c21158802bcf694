"""Integrator vs closed forms for every regime branch on phi in [0, 4 pi].

Usage: python scripts/accuracy_table.py [--nodes 201] [--step-factor 1]
"""

import argparse
import math
import time

import numpy as np

from tdho import model, so21
from tdho import oracles as O
from tdho import propagate as pr
from tdho.model import FamilySpec

SPECS = {
    "A+": FamilySpec("A", 0, 1, 1.0),
    "A-": FamilySpec("A", 1, 0, 1.0),
    "A0": FamilySpec("A", 1, 1, 1.0),
    "B1": FamilySpec("B", 0.75, 1.25, 0.2),
    "B2": FamilySpec("B", 0.75, 1.25, 1.0),
    "B3": FamilySpec("B", 0.75, 1.25, 0.5),
    "C1": FamilySpec("C", 0.75, 1.25, -2.0),
    "C2": FamilySpec("C", 0.75, 1.25, 1.0),
    "C3": FamilySpec("C", 0.75, 1.25, 2.0),
    "D": FamilySpec("D", 0.0, 1.0, 1.0),
    "B1h": FamilySpec("B", 1.25, 0.75, 0.2),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", type=int, default=201)
    ap.add_argument("--step-factor", type=float, default=1.0)
    args = ap.parse_args()
    phi_max = 4 * math.pi
    print("branch  seconds  bits  max|E|    dE/|E|    dEq/|Eq|  group     drift     trace")
    for name, spec in SPECS.items():
        prof = model.family_profile(spec, phi_max)
        grid = pr.family_grid(prof, phi_max, args.nodes)
        t0 = time.perf_counter()
        tr = pr.integrate(prof, so21.vec(0, 0, 1), grid, check=False, policy=pr.StepPolicy(step_factor=args.step_factor))
        dt = time.perf_counter() - t0
        lab = model.regime(spec)
        dE = dQ = 0.0
        for k, phi in enumerate(np.linspace(0, phi_max, args.nodes)):
            Eo, Qo = O.oracle_E(spec, phi, lab), O.oracle_Eq(spec, phi, lab)
            dE = max(dE, np.abs(tr.E[k] - Eo).max() / max(1, np.abs(Eo).max()))
            dQ = max(dQ, np.abs(tr.Eq_mat[k] - Qo).max() / max(1, np.abs(Qo).max()))
        budget = np.maximum(1.0, tr.span)
        print(
            f"{name:6s} {dt:8.2f} {str(tr.precision_bits or 53):>5s}  {np.abs(tr.E).max():8.1e}  {dE:8.1e}  {dQ:8.1e}"
            f"  {np.max(tr.group_defect / budget):8.1e}  {np.max(tr.drift / budget):8.1e}  {tr.trace_defect.max():8.1e}"
        )


if __name__ == "__main__":
    main()
