import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tdho import model, so21
from tdho.errors import ConfigError, InconsistentNature, InvalidFamilyParams, NonMonotoneTime
from tdho.model import FamilySpec, Nature, RegimeKind

from strategies import family_specs


def test_classify_examples():
    assert model.classify([0, 0, 1]) is Nature.ELLIPTIC
    assert model.classify([0, 1, 0]) is Nature.HYPERBOLIC
    assert model.classify([math.cos(0.3), math.sin(0.3), 1]) is Nature.CRITICAL


def test_family_profile_examples():
    p = model.family_profile(FamilySpec("A", 0, 1, lam=1.0, phase=model.LinearPhase(2.0)), 3.0)
    t = np.linspace(0, 3, 7)
    assert np.allclose(p.n(t), [0, 0, 1])
    assert np.allclose(p.omega(t), 2.0)
    assert FamilySpec("B", 0.75, 1.25).nature is Nature.ELLIPTIC
    assert FamilySpec("D", 0.0, 1.0).nature is Nature.HYPERBOLIC


def test_invalid_specs():
    with pytest.raises(InvalidFamilyParams):
        FamilySpec("B", 1.0, 1.0 + 1e-3)
    with pytest.raises(InvalidFamilyParams):
        FamilySpec("D", 0.75, 1.25)
    with pytest.raises(InvalidFamilyParams):
        FamilySpec("E", 0, 1)
    with pytest.raises(InvalidFamilyParams):
        FamilySpec("B", 0.75, 1.25, phase=model.LinearPhase(-1.0))


def test_regime_examples():
    lab = model.regime(FamilySpec("B", 0.75, 1.25, lam=0.2))
    assert lab.kind is RegimeKind.FINITE
    assert lab.Lambda == pytest.approx(0.7348469228349535, abs=1e-12)
    assert model.regime(FamilySpec("B", 0.75, 1.25, lam=0.5)).kind is RegimeKind.POLY_OSCILLATING
    assert model.regime(FamilySpec("B", 0.75, 1.25, lam=0.8)).kind is RegimeKind.EXP_OSCILLATING
    assert model.regime(FamilySpec("B", 0.75, 1.25, lam=2.0)).kind is RegimeKind.POLY_OSCILLATING
    assert model.regime(FamilySpec("B", 0.75, 1.25, lam=2.5)).kind is RegimeKind.FINITE
    assert model.regime(FamilySpec("D", 0.0, 1.0, lam=0.5)).kind is RegimeKind.EXP_INFINITE
    assert model.regime(FamilySpec("A", 1.0, 1.0)).kind is RegimeKind.POLY_INFINITE


def _bisect_boundary(lo, hi):
    k_lo = model.regime(FamilySpec("B", 0.75, 1.25, lam=lo)).kind
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        k = model.regime(FamilySpec("B", 0.75, 1.25, lam=mid), tol=0.0).kind
        if k is k_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_regime_boundaries_bisection():
    assert abs(_bisect_boundary(0.2, 0.9) - 0.5) <= 1e-9
    assert abs(_bisect_boundary(1.0, 2.7) - 2.0) <= 1e-9


@given(family_specs(), st.floats(0.1, 5.0))
def test_nature_constant_along_profile(spec, t_max):
    prof = model.family_profile(spec, t_max)
    t = np.linspace(0, t_max, 50)
    nn = prof.n(t)
    # n^2 carries rounding ~ eps |n|^2; classify's default band is absolute
    size = np.maximum(1.0, np.sum(nn**2, axis=1))
    assert np.all(np.abs(so21.msq(nn) - spec.nature.square) <= 1e-12 * size)
    assert all(model.classify(v) is spec.nature for v, sz in zip(nn, size) if sz <= 1e4)


@given(st.floats(0.2, 3.0), st.floats(-2.0, 2.0).filter(lambda x: abs(x) > 1e-3))
def test_omega_matches_phase_derivative(rate, lam):
    spec = FamilySpec("B", 0.75, 1.25, lam=lam, phase=model.LinearPhase(rate))
    prof = model.family_profile(spec, 2.0)
    t = np.linspace(0.1, 1.9, 19)
    h = 1e-5
    num = lam * (spec.phase(t + h) - spec.phase(t - h)) / (2 * h)
    assert np.allclose(prof.omega(t), num, rtol=1e-8, atol=1e-8)


def test_tabulated_examples(tmp_path):
    p = model.tabulated_profile([(0, 1, 0, 0, 1), (1, 1, 0, 0, 1)])
    assert p.nature is Nature.ELLIPTIC
    assert np.allclose(p.n(np.array([0.3, 0.7])), [0, 0, 1])
    with pytest.raises(InconsistentNature):
        model.tabulated_profile([(0, 1, 0, 0, 1), (1, 1, 0, 1, 0)])
    with pytest.raises(NonMonotoneTime):
        model.tabulated_profile([(0, 1, 0, 0, 1), (0, 1, 0, 0, 1)])
    bad = tmp_path / "bad.csv"
    bad.write_text("t,omega,n1,n2,n3\n0,1,0,0,1\n1,x,0,0,1\n")
    with pytest.raises(ConfigError, match="row 3"):
        model.read_profile_csv(bad)
    good = tmp_path / "good.csv"
    good.write_text("t,omega,n1,n2,n3\n0,1,0,0,1\n1,2,0,0,1\n2,1,0,0,1\n")
    assert model.read_profile_csv(good).t_max == 2.0
