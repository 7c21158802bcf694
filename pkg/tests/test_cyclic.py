import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tdho import cyclic as cy
from tdho import model, so21
from tdho import oracles as O
from tdho import propagate as pr
from tdho.cyclic import CyclicKind
from tdho.errors import InvalidU0, NoUnitEigenvalue
from tdho.model import FamilySpec

from strategies import family_specs


def test_fixed_vector_identity():
    fv = cy.fixed_vector(np.eye(3))
    assert fv.multiplicity == 3 and np.allclose(fv.eta, [0, 0, 1]) and not fv.defective


def test_fixed_vector_elliptic_a():
    spec = FamilySpec("A", 0.3, math.sqrt(1.13), 1.0, n2=-0.2)
    for phi in (0.4, 2.0, 4.0):
        fv = cy.fixed_vector(O.oracle_E(spec, phi))
        assert np.allclose(fv.eta, spec.n_of_phi(0.0), atol=1e-10)
        assert fv.eta_sq == pytest.approx(1.0)
        assert fv.multiplicity == 1


def test_fixed_vector_critical_a():
    spec = FamilySpec("A", 1.0, 1.0)
    for phi in (0.3, 1.0, 5.0):
        fv = cy.fixed_vector(O.oracle_E(spec, phi))
        assert fv.multiplicity == 1
        assert fv.defective
        assert abs(fv.eta_sq) <= 1e-9
        assert np.allclose(np.linalg.eigvals(O.oracle_E(spec, phi)), 1.0, atol=1e-4)


def test_no_unit_eigenvalue():
    with pytest.raises(NoUnitEigenvalue):
        cy.fixed_vector(np.diag([2.0, 3.0, 4.0]))


@given(family_specs(), st.floats(0.05, 3.0))
def test_fixed_vector_invariant(spec, phi):
    E = O.oracle_E(spec, phi)
    fv = cy.fixed_vector(E)
    assert fv.residual <= 1e-8
    if fv.eta_sq > cy.ETA_TOL:
        assert abs(so21.msq(fv.eta) - 1) <= 1e-9 and fv.eta[2] > 0


def _traj(spec, phi_end, nodes=401, e0=(0, 0, 1)):
    prof = model.family_profile(spec, phi_end)
    grid = pr.family_grid(prof, phi_end, nodes)
    tr = pr.integrate(prof, so21.vec(*e0), grid)
    return tr, lambda e: pr.integrate(prof, e, grid).alpha()


def test_verdict_all_states():
    tr, afn = _traj(FamilySpec("A", 0, 1, lam=-1.0), 2 * math.pi)
    v = cy.verdict(tr.E[-1], tr.Eq_mat[-1], afn)
    assert v.kind is CyclicKind.ALL_STATES and v.N == 1
    assert np.max(np.abs(tr.E[-1] - np.eye(3))) <= 1e-7


def test_verdict_definite_parity():
    tr, afn = _traj(FamilySpec("A", 0, 1, lam=-1.0), math.pi)
    v = cy.verdict(tr.E[-1], tr.Eq_mat[-1], afn)
    assert v.kind is CyclicKind.ALL_DEFINITE_PARITY and v.N == 0
    assert v.parity_phases == pytest.approx((math.pi / 2, -math.pi / 2), abs=1e-12)
    assert np.max(np.abs(tr.E[-1] - np.eye(3))) <= 1e-7


def test_verdict_denumerable_b1():
    spec = FamilySpec("B", 0.75, 1.25, 0.2)
    L = model.regime(spec).Lambda
    E, Q = O.oracle_E(spec, 2 * math.pi), O.oracle_Eq(spec, 2 * math.pi)
    v = cy.verdict(E, Q)
    assert v.kind is CyclicKind.DENUMERABLE
    assert math.sin(L * 2 * math.pi) ** 2 > 0
    assert np.allclose(E @ v.eta, v.eta, atol=1e-10)


def test_verdict_family_d():
    spec = FamilySpec("D", 0.0, 1.0, 0.5)
    for phi in np.linspace(0.1, 4 * math.pi, 15):
        v = cy.verdict(O.oracle_E(spec, phi), O.oracle_Eq(spec, phi))
        assert v.kind is CyclicKind.NONE_EXIST


@given(family_specs(), st.floats(0.05, 4 * math.pi))
def test_verdict_evidence(spec, phi):
    E, Q = O.oracle_E(spec, phi), O.oracle_Eq(spec, phi)
    v = cy.verdict(E, Q)
    if v.kind is CyclicKind.ALL_STATES:
        assert np.max(np.abs(Q - np.eye(2))) <= cy.SPECIAL_TOL
    elif v.kind is CyclicKind.ALL_DEFINITE_PARITY:
        assert np.max(np.abs(Q + np.eye(2))) <= cy.SPECIAL_TOL
    elif v.kind is CyclicKind.DENUMERABLE:
        assert v.eta_sq > cy.ETA_TOL
    else:
        assert v.eta_sq <= cy.ETA_TOL


def test_alpha_constant_in_special_cases():
    for phi_end in (2 * math.pi, math.pi):
        _, afn = _traj(FamilySpec("A", 0, 1, lam=-1.0), phi_end)
        vals = [afn(so21.param_to_vec(p)) for p in ((0.0, 0.0), (1.0, 0.0), (0.7, 2.0))]
        assert max(vals) - min(vals) <= 1e-7


def test_denumerable_phases_examples():
    assert cy.denumerable_phases(0, 2 * math.pi, 0.0) == pytest.approx((math.pi, 0.0))
    h = 2 * math.pi * (math.cosh(1) - 1)
    d0, g0 = cy.denumerable_phases(0, -2 * math.pi, h)
    assert g0 == pytest.approx(-1.706138132642451, abs=1e-12)
    _, g1 = cy.denumerable_phases(1, -2 * math.pi, h)
    assert so21.angle_distance(g1, 3 * g0) <= 1e-12
    with pytest.raises(ValueError):
        cy.denumerable_phases(-1, 0.0, 0.0)


def test_general_geometric_phase_examples():
    h = 3.412276265284902
    assert cy.general_geometric_phase(0.5, h, cy.Even(3)) == pytest.approx(so21.reduce_angle(-0.5 * h))
    g = cy.general_geometric_phase(4.5, h, cy.Rational(1, 2, 1.0))
    assert so21.angle_distance(g, -4.5 * h - 2 * math.pi) <= 1e-12
    with pytest.raises(InvalidU0):
        cy.general_geometric_phase(0.4, h, cy.Even(1))
    with pytest.raises(InvalidU0):
        cy.general_geometric_phase(1.0, h, cy.Rational(1, 2, 1.0))
    gp = cy.general_geometric_phase(1.5, h, cy.Odd(0, 1))
    gm = cy.general_geometric_phase(1.5, h, cy.Odd(0, -1))
    assert so21.angle_distance(gp - gm, -math.pi) <= 1e-12


@given(st.integers(0, 8), st.integers(-4, 4), st.floats(-10, 10))
def test_general_reduces_to_eigenstate(n, N, h):
    k = n + 0.5
    _, g = cy.denumerable_phases(n, 2 * N * math.pi, h)
    assert so21.angle_distance(cy.general_geometric_phase(k, h, cy.Even(N)), g) <= 1e-9


def test_rational_alpha():
    assert cy.rational_alpha(math.pi / 2) == (1, 2)
    assert cy.rational_alpha(2 * math.pi) == (2, 1)
    assert isinstance(cy.case_for_alpha(2 * math.pi), cy.Even)
    assert isinstance(cy.case_for_alpha(3 * math.pi), cy.Odd)
    assert cy.rational_alpha(math.sqrt(2) * math.pi, 64) is None
    with pytest.raises(ValueError):
        cy.rational_alpha(1.0, 0)


def test_json_records(tmp_path):
    v = cy.verdict(np.eye(3), -np.eye(2))
    text = cy.verdicts_to_json([(1.0, v)], tmp_path / "v.json")
    doc = json.loads(text)
    assert doc["schema"] == 1
    rec = doc["verdicts"][0]
    assert {"tau", "kind", "alpha_tau", "eta", "eta_sq", "N"} <= set(rec)
    assert rec["kind"] == "AllDefiniteParity"
    assert (tmp_path / "v.json").read_text().strip() == text


def test_brute_force_examples():
    assert cy.brute_force_fixed(np.eye(3))[0]
    spec = FamilySpec("A", 0, 1)
    assert cy.brute_force_fixed(O.oracle_E(spec, 1.0))[0]
    assert not cy.brute_force_fixed(O.oracle_E(FamilySpec("D", 0, 1, 0.5), 1.0))[0]


@pytest.mark.slow
def test_necessity_small_grid():
    spec = FamilySpec("B", 0.75, 1.25, 0.2)
    for phi in np.linspace(0.2, 4 * math.pi, 20):
        E = O.oracle_E(spec, phi)
        v = cy.verdict(E, O.oracle_Eq(spec, phi))
        assert cy.brute_force_fixed(E)[0] == (v.kind is not CyclicKind.NONE_EXIST)
