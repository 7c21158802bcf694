"""The ten acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line; the lines are printed in the pytest
terminal summary and by ``python tests/test_acceptance.py``.

Matrix errors are scaled by ``max(1, |reference|)`` (group defects by
``max(1, |E|^2)``): for families C and D the entries of ``E`` reach 1e10 and
beyond on ``[0, 4 pi]``, where an absolute 1e-8 would demand more than double
precision can represent.  For ``|E| <= 1`` the scaled and absolute metrics
coincide.
"""

import math
import time

import numpy as np
import pytest
from scipy.integrate import simpson

from tdho import cyclic as cy
from tdho import model, scan, so21
from tdho import oracles as O
from tdho import propagate as pr
from tdho import wavepacket as wp
from tdho.model import FamilySpec, RegimeKind

RESULTS: dict[int, tuple[bool, str]] = {}

PHI_MAX = 4 * math.pi
NODES = 201
XI1 = so21.vec(math.sinh(1.0), 0.0, math.cosh(1.0))

# one parameter set per closed-form branch, plus B1 with a hyperbolic n (epsilon = -1)
BRANCHES = {
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


def record(k: int, ok: bool, detail: str) -> None:
    RESULTS[k] = (bool(ok), detail)
    assert ok, f"criterion {k}: {detail}"


def report_lines() -> list[str]:
    return [f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {d}" for k, (ok, d) in sorted(RESULTS.items())]


def _scaled(a, ref) -> float:
    return float(np.max(np.abs(a - ref))) / max(1.0, float(np.max(np.abs(ref))))


@pytest.fixture(scope="module")
def runs():
    out = {}
    for name, spec in BRANCHES.items():
        prof = model.family_profile(spec, PHI_MAX)
        grid = pr.family_grid(prof, PHI_MAX, NODES)
        t0 = time.perf_counter()
        tr = pr.integrate(prof, so21.vec(0, 0, 1), grid, check=False)
        out[name] = (spec, tr, time.perf_counter() - t0)
    return out


def test_criterion_01_oracle_equivalence(runs):
    worst, per_family = 0.0, {}
    for name, (spec, tr, dt) in runs.items():
        assert model.regime(spec).branch == name.rstrip("h")
        lab = model.regime(spec)
        phis = np.asarray(spec.phase(tr.grid), dtype=float)
        for k, phi in enumerate(phis):
            worst = max(worst, _scaled(tr.E[k], O.oracle_E(spec, phi, lab)), _scaled(tr.Eq_mat[k], O.oracle_Eq(spec, phi, lab)))
        per_family[spec.family] = per_family.get(spec.family, 0.0) + dt
    slow = max(per_family.values())
    record(1, worst <= 1e-8 and slow <= 10.0, f"{len(runs)} sets, max scaled error {worst:.2e} (<= 1e-8), slowest family {slow:.1f} s (<= 10 s)")


def test_criterion_02_group_and_casimir(runs):
    gd = dr = 0.0
    for _, tr, _ in runs.values():
        budget = np.maximum(1.0, tr.span)
        gd = max(gd, float(np.max(tr.group_defect / budget)))
        dr = max(dr, float(np.max(tr.drift / budget)))
    record(2, gd <= 1e-9 and dr <= 1e-9, f"group defect {gd:.2e}, e^2 drift {dr:.2e} per unit phase (<= 1e-9)")


def test_criterion_03_trace_map(runs):
    num = ora = 0.0
    for spec, tr, _ in runs.values():
        num = max(num, float(np.max(tr.trace_defect)))
        for phi in np.asarray(spec.phase(tr.grid), dtype=float):
            E = O.oracle_E(spec, phi)
            ora = max(ora, _scaled(so21.trace_map(O.oracle_Eq(spec, phi)), E))
    record(3, num <= 1e-8 and ora <= 1e-10, f"numerical {num:.2e} (<= 1e-8), closed forms {ora:.2e} (<= 1e-10)")


CYCLIC_CASES = {
    "A": FamilySpec("A", 0, 1, 1.0),
    "B": FamilySpec("B", 0.75, 1.25, 0.2),
    "C": FamilySpec("C", 0.0, 1.0, 0.5),
    "D": FamilySpec("D", 0.0, 1.0, 0.5),
}


@pytest.mark.slow
def test_criterion_04_cyclic_necessity():
    bad, counts = [], {}
    d_ok = True
    for fam, spec in CYCLIC_CASES.items():
        prof = model.family_profile(spec, PHI_MAX)
        grid = pr.family_grid(prof, PHI_MAX, 201)
        tr = pr.integrate(prof, so21.vec(0, 0, 1), grid)
        for k in range(1, 201):
            v = cy.verdict(tr.E[k], tr.Eq_mat[k])
            found, _ = cy.brute_force_fixed(tr.E[k], mesh=100, match=1e-6)
            counts[(fam, v.kind.value)] = counts.get((fam, v.kind.value), 0) + 1
            if found != (v.kind is not cy.CyclicKind.NONE_EXIST):
                bad.append((fam, k))
            if fam == "D" and v.kind is not cy.CyclicKind.NONE_EXIST:
                d_ok = False
    summary = ", ".join(f"{f}:{k}={n}" for (f, k), n in sorted(counts.items()))
    record(4, not bad and d_ok, f"{len(bad)} disagreements over 4 x 200 tau; D all NoneExist={d_ok}; {summary}")


def _family_a(phi_end, e0=XI1, nodes=401):
    spec = FamilySpec("A", 0, 1, lam=-1.0)  # phi(tau) = -phi_end
    prof = model.family_profile(spec, phi_end)
    grid = pr.family_grid(prof, phi_end, nodes)
    tr = pr.integrate(prof, e0, grid)
    return tr, prof, grid, (lambda e: pr.integrate(prof, e, grid).alpha())


def _beta(tr, prof, u_traj):
    return -simpson(prof.omega(tr.grid) * so21.mdot(u_traj, prof.n(tr.grid)), x=tr.grid)


def test_criterion_05_phase_reproduction():
    tr, prof, _, afn = _family_a(2 * math.pi)
    rep = pr.phases(tr, 0.5)
    eb = abs(rep.dynamical - math.pi * math.cosh(1))
    eh = abs(rep.hannay - 2 * math.pi * (math.cosh(1) - 1))
    eg = so21.angle_distance(rep.geometric, math.pi * (1 - math.cosh(1)))
    v = cy.verdict(tr.E[-1], tr.Eq_mat[-1], afn)
    e43 = 0.0
    for n in range(6):
        kn = n + 0.5
        u = kn * tr.e
        gamma = so21.reduce_angle(kn * v.alpha_tau - _beta(tr, prof, u))
        e43 = max(e43, so21.angle_distance(gamma, -kn * rep.hannay))
        _, g_n = cy.denumerable_phases(n, v.alpha_tau, rep.hannay)
        e43 = max(e43, so21.angle_distance(g_n, gamma))
    ok = max(eb, eh, eg, e43) <= 1e-6
    record(5, ok, f"beta {eb:.1e}, hannay {eh:.1e}, gamma {eg:.1e}, gamma_n n=0..5 {e43:.1e} (<= 1e-6)")


def test_criterion_06_special_cases():
    tr, _, _, afn = _family_a(2 * math.pi)
    v = cy.verdict(tr.E[-1], tr.Eq_mat[-1], afn)
    q1 = float(np.max(np.abs(tr.Eq_mat[-1] - np.eye(2))))
    e1 = float(np.max(np.abs(tr.E[-1] - np.eye(3))))
    tr2, _, _, afn2 = _family_a(math.pi)
    v2 = cy.verdict(tr2.E[-1], tr2.Eq_mat[-1], afn2)
    q2 = float(np.max(np.abs(tr2.Eq_mat[-1] + np.eye(2))))
    e2 = float(np.max(np.abs(tr2.E[-1] - np.eye(3))))
    dp = math.inf
    if v2.parity_phases is not None:
        want = ((v2.N + 0.5) * math.pi, -(v2.N + 0.5) * math.pi)
        from_alpha = (0.5 * v2.alpha_tau, -0.5 * v2.alpha_tau)
        dp = max(max(so21.angle_distance(a, b) for a, b in zip(v2.parity_phases, want)),
                 max(so21.angle_distance(a, b) for a, b in zip(from_alpha, want)))
    ok = (v.kind is cy.CyclicKind.ALL_STATES and q1 <= 1e-7 and e1 <= 1e-7
          and v2.kind is cy.CyclicKind.ALL_DEFINITE_PARITY and q2 <= 1e-7 and dp <= 1e-7)
    record(6, ok, f"-2pi: {v.kind.value} N={v.N} |Eq-I| {q1:.1e} |E-I| {e1:.1e}; -pi: {v2.kind.value} N={v2.N} |Eq+I| {q2:.1e} |E-I| {e2:.1e} delta {dp:.1e}")


def test_criterion_07_extra_term():
    tr, prof, _, afn = _family_a(2 * math.pi)
    rep = pr.phases(tr, 0.5)
    v = cy.verdict(tr.E[-1], tr.Eq_mat[-1], afn)
    worst, notes = 0.0, []
    for u0 in (0.5, 0.75, 1.5):
        s = wp.squeezed_state(u0, XI1)
        u = np.einsum("kij,j->ki", tr.E, s.u)
        delta = v.N * math.pi  # U(tau) = exp(i N pi)
        gamma_traj = so21.reduce_angle(delta - _beta(tr, prof, u))
        g = cy.general_geometric_phase(u0, rep.hannay, cy.Even(v.N))
        worst = max(worst, so21.angle_distance(g, gamma_traj))
        if u0 in (0.5, 1.5):
            # (u0 - 1/2) integer: the extra term is a multiple of 2 pi
            worst = max(worst, so21.angle_distance(g, -u0 * rep.hannay))
        notes.append(f"u0={u0}")
    record(7, worst <= 1e-6, f"{', '.join(notes)}: max |gamma - (delta - beta)| {worst:.1e} (<= 1e-6)")


def test_criterion_08_phase_transition():
    lams = np.linspace(0.0, 3.0, 301)
    fits = scan.growth_scan(FamilySpec("B", 0.75, 1.25), lams)
    changes = [fits[i].lam for i in range(1, len(fits)) if fits[i].kind is not fits[i - 1].kind]
    poly = [f.lam for f in fits if f.kind is RegimeKind.POLY_OSCILLATING]
    kinds_ok = poly == [0.5, 2.0] and all(
        f.kind is (RegimeKind.FINITE if (f.lam < 0.5 or f.lam > 2.0) else RegimeKind.EXP_OSCILLATING) for f in fits if f.lam not in (0.5, 2.0)
    )
    bad = [f for f in fits if not f.ok]
    detail = f"kind changes at lambda {sorted(set(changes))}, PolyOscillating at {poly}; {len(bad)} of 301 slopes outside tolerance"
    record(8, kinds_ok and not bad, detail)


def test_criterion_09_alpha_independence():
    e0s = [so21.vec(0, 0, 1), XI1, so21.param_to_vec((0.7, 2.0))]
    spread = 0.0
    for phi_end in (2 * math.pi, math.pi):
        _, _, _, afn = _family_a(phi_end)
        vals = [afn(e) for e in e0s]
        spread = max(spread, max(vals) - min(vals))
    record(9, spread <= 1e-7, f"alpha(tau) spread over 3 e0 {spread:.1e} (<= 1e-7)")


def test_criterion_10_uncertainty(runs):
    # u^2 of a double-precision u carries an absolute error ~ eps |u|^2, so the
    # bound is read relative to max(1, |u|^2) like the drift; the literal value
    # is also reported for runs where |u| stays below 1e3
    drift, low, low_lit = 0.0, math.inf, math.inf
    states = [wp.eigenstate_moments(0, so21.vec(0, 0, 1)), wp.squeezed_state(0.5, XI1, 0.3, -0.4), wp.squeezed_state(1.5, so21.param_to_vec((0.6, 1.0)))]
    for _, tr, _ in runs.values():
        for s in states:
            for o in wp.evolve_along(s, tr.E, tr.Eq_mat):
                size = max(1.0, float(np.sum(o.u**2)))
                drift = max(drift, abs(o.u_sq - s.u_sq) / size)
                low = min(low, (o.u_sq - 0.25) / size)
                if size <= 1e6:
                    low_lit = min(low_lit, o.u_sq)
    ok = drift <= 1e-9 and low >= -1e-9 and low_lit >= 0.25 - 1e-9
    record(10, ok, f"u^2 drift {drift:.1e} (<= 1e-9), min (u^2 - 1/4)/max(1,|u|^2) {low:.1e} (>= -1e-9), min u^2 with |u| < 1e3 {low_lit:.12f}")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
