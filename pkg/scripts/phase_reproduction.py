"""Phases of the constant-n example: n = (0,0,1), phi(tau) = -2 pi N, e0 = (sinh xi0, 0, cosh xi0).

Usage: python scripts/phase_reproduction.py [--xi0 1] [--N 1] [--nodes 801]
"""

import argparse
import math

from tdho import cyclic as cy
from tdho import model, so21
from tdho import propagate as pr
from tdho import wavepacket as wp
from tdho.model import FamilySpec


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--xi0", type=float, default=1.0)
    ap.add_argument("--N", type=int, default=1)
    ap.add_argument("--nodes", type=int, default=801)
    args = ap.parse_args()
    phi_end = 2 * math.pi * args.N
    prof = model.family_profile(FamilySpec("A", 0, 1, lam=-1.0), phi_end)
    grid = pr.family_grid(prof, phi_end, args.nodes)
    e0 = so21.param_to_vec((args.xi0, 0.0))
    tr = pr.integrate(prof, e0, grid)
    v = cy.verdict(tr.E[-1], tr.Eq_mat[-1], lambda e: pr.integrate(prof, e, grid).alpha())
    ch = math.cosh(args.xi0)
    print(f"verdict {v.kind.value} N={v.N} alpha={v.alpha_tau:.12f}")
    print("u0     beta            expected        gamma(extra)    hannay          expected")
    for u0 in (0.5, 0.75, 1.5, 2.5):
        rep = pr.phases(tr, u0)
        g = cy.general_geometric_phase(u0, rep.hannay, cy.Even(v.N))
        print(
            f"{u0:<5} {rep.dynamical:15.10f} {2 * math.pi * args.N * u0 * ch:15.10f} {g:15.10f}"
            f" {rep.hannay:15.10f} {2 * math.pi * args.N * (ch - 1):15.10f}"
        )
    loop = tr.e[:-1]
    print(f"hannay from loop area {wp.hannay_projected(loop):.6f}; surface integral at I=1,3: "
          f"{wp.hannay_from_ellipses(loop[::2], 1.0):.6f}, {wp.hannay_from_ellipses(loop[::2], 3.0):.6f}")


if __name__ == "__main__":
    main()
