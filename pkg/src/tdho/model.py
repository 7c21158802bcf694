"""Hamiltonian profiles ``H(t) = omega(t) K.n^g(t)``.

Four analytic families are supported, all driven by a monotone phase
function ``phi(t)`` with ``omega(t) = lam * phi'(t)``:

* ``A``: constant ``n = (n1, n2, n3)``,
* ``B``: ``n = (n1 cos 2phi, n1 sin 2phi, n3)``,
* ``C``: ``n = (n1, n3 sinh 2phi, n3 cosh 2phi)``,
* ``D``: ``n = (n1, n3 cosh 2phi, n3 sinh 2phi)``.

Arbitrary profiles can be given as samples (see :func:`tabulated_profile`).
"""

from __future__ import annotations

import csv
import dataclasses
import enum
import math
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline, PchipInterpolator

from . import so21
from .errors import (
    AmbiguousNature,
    ConfigError,
    InconsistentNature,
    InvalidFamilyParams,
    NonMonotoneTime,
)

RADICAND_TOL = 1e-9


class Nature(str, enum.Enum):
    ELLIPTIC = "Elliptic"
    HYPERBOLIC = "Hyperbolic"
    CRITICAL = "Critical"

    @property
    def square(self) -> int:
        return {"Elliptic": 1, "Hyperbolic": -1, "Critical": 0}[self.value]


class RegimeKind(str, enum.Enum):
    FINITE = "Finite"
    EXP_OSCILLATING = "ExpOscillating"
    POLY_OSCILLATING = "PolyOscillating"
    EXP_INFINITE = "ExpInfinite"
    POLY_INFINITE = "PolyInfinite"  # constant critical n only


def classify(n, tol: float | None = None) -> Nature:
    """Nature of the Hamiltonian from the sign of ``n**2``."""
    tol = so21.TOL.invariant if tol is None else tol
    s = float(so21.msq(n))
    if abs(s) <= tol:
        return Nature.CRITICAL
    if abs(s) < 10 * tol:
        raise AmbiguousNature(f"n**2 = {s:.3e} is too close to zero to classify")
    return Nature.ELLIPTIC if s > 0 else Nature.HYPERBOLIC


# --- phase functions ------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class LinearPhase:
    """``phi(t) = rate * t``."""

    rate: float = 1.0

    def __call__(self, t):
        return self.rate * np.asarray(t, dtype=float)

    def derivative(self, t):
        return np.full(np.shape(t), self.rate, dtype=float) if np.ndim(t) else float(self.rate)

    def time_at(self, phi):
        return np.asarray(phi, dtype=float) / self.rate

    def is_monotone(self, t_max: float) -> bool:
        return self.rate > 0


@dataclasses.dataclass(frozen=True)
class TabulatedPhase:
    """Monotone cubic interpolation of sampled ``(t, phi)`` with ``phi(0) = 0``."""

    t: tuple[float, ...]
    phi: tuple[float, ...]

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        p = np.asarray(self.phi, dtype=float)
        if t.shape != p.shape or t.size < 2:
            raise InvalidFamilyParams("phase table needs matching t and phi arrays of length >= 2")
        if np.any(np.diff(t) <= 0):
            raise NonMonotoneTime("phase table times must be strictly increasing")
        object.__setattr__(self, "_interp", PchipInterpolator(t, p))
        object.__setattr__(self, "_inverse", PchipInterpolator(p, t) if np.all(np.diff(p) > 0) else None)

    def __call__(self, t):
        return self._interp(t)

    def derivative(self, t):
        return self._interp.derivative()(t)

    def time_at(self, phi):
        if self._inverse is None:
            raise InvalidFamilyParams("phase table is not strictly increasing")
        return self._inverse(phi)

    def is_monotone(self, t_max: float) -> bool:
        p = np.asarray(self.phi)
        return abs(p[0]) <= 1e-12 and self.t[0] == 0.0 and bool(np.all(np.diff(p) > 0))


PhaseFn = LinearPhase | TabulatedPhase


# --- family specification -------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class FamilySpec:
    family: str
    n1: float
    n3: float
    lam: float = 1.0
    phase: PhaseFn = LinearPhase(1.0)
    n2: float = 0.0  # family A only

    def __post_init__(self):
        object.__setattr__(self, "family", str(self.family).upper())
        validate_spec(self)

    @property
    def n_square(self) -> float:
        f = self.family
        if f == "A":
            return self.n3**2 - self.n1**2 - self.n2**2
        if f in ("B", "C"):
            return self.n3**2 - self.n1**2
        return -(self.n3**2) - self.n1**2

    @property
    def nature(self) -> Nature:
        return Nature({1: "Elliptic", -1: "Hyperbolic", 0: "Critical"}[round(self.n_square)])

    def n_of_phi(self, phi):
        """``n`` as a function of the phase (shape ``phi.shape + (3,)``)."""
        phi = np.asarray(phi, dtype=float)
        one = np.ones_like(phi)
        if self.family == "A":
            return np.stack([self.n1 * one, self.n2 * one, self.n3 * one], axis=-1)
        c, s = np.cos(2 * phi), np.sin(2 * phi)
        ch, sh = np.cosh(2 * phi), np.sinh(2 * phi)
        if self.family == "B":
            return np.stack([self.n1 * c, self.n1 * s, self.n3 * one], axis=-1)
        if self.family == "C":
            return np.stack([self.n1 * one, self.n3 * sh, self.n3 * ch], axis=-1)
        return np.stack([self.n1 * one, self.n3 * ch, self.n3 * sh], axis=-1)

    def n_rate_of_phi(self, phi):
        """``sqrt|n'(phi)**2|``, the frame-independent rate of change of ``n``."""
        phi = np.asarray(phi, dtype=float)
        if self.family == "A":
            return np.zeros_like(phi)
        if self.family == "B":
            return 2 * abs(self.n1) * np.ones_like(phi)
        return 2 * abs(self.n3) * np.ones_like(phi)


def validate_spec(spec: FamilySpec, tol: float | None = None) -> None:
    tol = so21.TOL.invariant if tol is None else tol
    if spec.family not in ("A", "B", "C", "D"):
        raise InvalidFamilyParams(f"unknown family {spec.family!r}")
    vals = (spec.n1, spec.n2, spec.n3, spec.lam)
    if not all(math.isfinite(v) for v in vals):
        raise InvalidFamilyParams("non-finite family parameter")
    if spec.family != "A" and spec.n2 != 0.0:
        raise InvalidFamilyParams("n2 is only used by family A")
    s = spec.n_square
    allowed = (-1,) if spec.family == "D" else (1, -1, 0)
    if not any(abs(s - a) <= tol for a in allowed):
        raise InvalidFamilyParams(f"family {spec.family}: n**2 = {s!r} not in {allowed}")
    if spec.family == "A" and abs(s) <= tol and abs(spec.n3) <= tol:
        raise InvalidFamilyParams("critical n must be non-zero")
    if not spec.phase.is_monotone(0.0):
        raise InvalidFamilyParams("phase function must be strictly increasing with phi(0) = 0")


# --- regime classification ------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class RegimeLabel:
    kind: RegimeKind
    Lambda: float
    xi_n: float
    epsilon: int
    boundary_lambdas: tuple[float, ...]
    branch: str  # oracle branch id: A+, A-, A0, B1..B3, C1..C3, D
    poly: bool = False
    growth_rate: float = 0.0  # expected log-linear exponent of |Eq| in phi
    phi_n: float = 0.0  # azimuth parameter (families A and D)
    scale: float = 1.0  # effective angle multiplier (family A)


def _sign(x: float) -> int:
    return 1 if x >= 0 else -1


def _boundaries(*cands: tuple[float, float]) -> tuple[float, ...]:
    out = []
    for num, den in cands:
        if abs(den) > 1e-15:
            out.append(num / den)
    return tuple(sorted(out))


def regime(spec: FamilySpec, tol: float = RADICAND_TOL) -> RegimeLabel:
    lam, n1, n3 = spec.lam, spec.n1, spec.n3
    f = spec.family
    if f == "A":
        return _regime_a(spec, tol)
    if f == "B":
        bounds = _boundaries((1.0, n3 - n1), (1.0, n3 + n1))
        a, b = lam * n3 - 1.0, lam * n1
        d = a * a - b * b
        if d > tol:
            L = math.sqrt(d)
            return RegimeLabel(RegimeKind.FINITE, L, math.asinh(b / L), _sign(a), bounds, "B1", growth_rate=0.0)
        if d < -tol:
            L = math.sqrt(-d)
            return RegimeLabel(RegimeKind.EXP_OSCILLATING, L, math.asinh(a / L), _sign(b), bounds, "B2", growth_rate=L)
        eps = _sign(a / b) if b != 0 else 1
        return RegimeLabel(RegimeKind.POLY_OSCILLATING, 0.0, 0.0, eps, bounds, "B3", poly=True, growth_rate=0.0)
    if f == "C":
        bounds = _boundaries((1.0, n3 - n1), (-1.0, n3 + n1))
        a, b = lam * n3, lam * n1 + 1.0
        d = a * a - b * b
        if d > tol:
            L = math.sqrt(d)
            return RegimeLabel(RegimeKind.EXP_OSCILLATING, L, math.asinh(b / L), _sign(a), bounds, "C1", growth_rate=1.0)
        if d < -tol:
            L = math.sqrt(-d)
            return RegimeLabel(RegimeKind.EXP_INFINITE, L, math.asinh(a / L), _sign(b), bounds, "C2", growth_rate=1.0 + L)
        eps = _sign(b / a) if a != 0 else 1
        return RegimeLabel(RegimeKind.EXP_INFINITE, 0.0, 0.0, eps, bounds, "C3", poly=True, growth_rate=1.0)
    # family D
    c, s = lam * n1 + 1.0, lam * n3
    L = math.hypot(c, s)
    phi_n = 0.5 * math.atan2(s, c) if L > 0 else 0.0
    rate = 1.0 + L if abs(s) > tol else abs(1.0 - L)
    return RegimeLabel(RegimeKind.EXP_INFINITE, L, 0.0, 1, (), "D", growth_rate=rate, phi_n=phi_n)


def _regime_a(spec: FamilySpec, tol: float) -> RegimeLabel:
    n1, n2, n3, lam = spec.n1, spec.n2, spec.n3, spec.lam
    nat = spec.nature
    if nat is Nature.ELLIPTIC:
        sgn = _sign(n3)
        xi = math.asinh(math.hypot(n1, n2))
        phi_n = 0.5 * math.atan2(sgn * n2, sgn * n1)
        return RegimeLabel(RegimeKind.FINITE, abs(lam), xi, sgn, (), "A+", phi_n=phi_n, scale=sgn * lam)
    if nat is Nature.HYPERBOLIC:
        xi = math.asinh(n3)
        phi_n = 0.5 * math.atan2(n2, n1)
        return RegimeLabel(RegimeKind.EXP_INFINITE, abs(lam), xi, 1, (), "A-", growth_rate=abs(lam), phi_n=phi_n, scale=lam)
    phi_n = 0.5 * math.atan2(n2 / n3, n1 / n3)
    return RegimeLabel(RegimeKind.POLY_INFINITE, abs(lam * n3), 0.0, 1, (), "A0", poly=True, phi_n=phi_n, scale=lam * n3)


# --- profiles -------------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class Profile:
    """Time-dependent Hamiltonian data.

    ``omega(t)`` and ``n(t)`` accept scalars or arrays; ``n`` returns shape
    ``t.shape + (3,)``.  ``n_rate(t)`` is ``sqrt|dn/dt**2|`` and feeds the
    integrator step policy.
    """

    omega: Callable
    n: Callable
    nature: Nature
    t_max: float
    n_rate: Callable
    spec: FamilySpec | None = None
    hp: Callable | None = None  # mpfr t -> (omega, n, rate) at the working precision

    @property
    def phase(self):
        return None if self.spec is None else self.spec.phase

    def rate(self, t):
        """Local rate bound ``2|omega| + sqrt|n'^2|`` used for substepping."""
        return 2.0 * np.abs(self.omega(t)) + self.n_rate(t)

    def validate(self, num: int = 201, tol: float | None = None) -> None:
        tol = so21.TOL.invariant if tol is None else tol
        t = np.linspace(0.0, self.t_max, num)
        nn = self.n(t)
        om = self.omega(t)
        if not (np.all(np.isfinite(nn)) and np.all(np.isfinite(om))):
            raise InvalidFamilyParams("profile is not finite on its validation grid")
        sq = so21.msq(nn)
        target = self.nature.square
        if np.max(np.abs(sq - target)) > 10 * tol * max(1.0, float(np.max(np.abs(nn))) ** 2):
            raise InconsistentNature(f"n**2 departs from {target} (range {sq.min():.3e}..{sq.max():.3e})")


def family_profile(spec: FamilySpec, t_max: float) -> Profile:
    """Profile whose ``n(t)`` and ``omega(t)`` follow the family formulas."""
    phase = spec.phase
    lam = spec.lam

    def omega(t):
        return lam * phase.derivative(t)

    def n(t):
        return spec.n_of_phi(phase(t))

    def n_rate(t):
        return spec.n_rate_of_phi(phase(t)) * np.abs(phase.derivative(t))

    prof = Profile(omega, n, spec.nature, float(t_max), n_rate, spec, _family_hp(spec))
    prof.validate()
    return prof


def _family_hp(spec: FamilySpec):
    """Closed-form evaluator in ``gmpy2.mpfr`` (linear phases only)."""
    if not isinstance(spec.phase, LinearPhase):
        return None
    import gmpy2

    def hp(t):
        r = gmpy2.mpfr(spec.phase.rate)
        lam, n1, n2, n3 = (gmpy2.mpfr(v) for v in (spec.lam, spec.n1, spec.n2, spec.n3))
        phi = r * t
        f = spec.family
        if f == "A":
            n = (n1, n2, n3)
            nr = 0
        elif f == "B":
            n = (n1 * gmpy2.cos(2 * phi), n1 * gmpy2.sin(2 * phi), n3)
            nr = 2 * abs(n1)
        elif f == "C":
            n = (n1, n3 * gmpy2.sinh(2 * phi), n3 * gmpy2.cosh(2 * phi))
            nr = 2 * abs(n3)
        else:
            n = (n1, n3 * gmpy2.cosh(2 * phi), n3 * gmpy2.sinh(2 * phi))
            nr = 2 * abs(n3)
        w = lam * r
        return w, n, 2 * abs(w) + nr * abs(r)

    return hp


def constant_profile(n, omega: float, t_max: float) -> Profile:
    """Time-independent ``n`` and ``omega``; ``omega = 0`` is allowed."""
    n = np.asarray(n, dtype=float)
    nat = classify(n)
    if abs(so21.msq(n) - nat.square) > so21.TOL.invariant:
        raise InvalidFamilyParams(f"n**2 = {so21.msq(n)} is not 1, -1 or 0")

    def om(t):
        return np.full(np.shape(t), omega, dtype=float) if np.ndim(t) else float(omega)

    def nf(t):
        return np.broadcast_to(n, np.shape(t) + (3,)).copy()

    def rate(t):
        return np.zeros(np.shape(t)) if np.ndim(t) else 0.0

    def hp(t):
        import gmpy2

        w = gmpy2.mpfr(float(omega))
        return w, tuple(gmpy2.mpfr(float(c)) for c in n), 2 * abs(w)

    return Profile(om, nf, nat, float(t_max), rate, None, hp)


def tabulated_profile(samples: Sequence[Sequence[float]], tol: float | None = None) -> Profile:
    """Profile from rows ``(t, omega, n1, n2, n3)``.

    ``omega`` is interpolated with a monotone cubic, the components of ``n``
    with ordinary cubic splines.  ``n`` is never renormalized: an inconsistent
    nature across samples is an error.
    """
    tol = so21.TOL.invariant if tol is None else tol
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 5:
        raise ConfigError("samples must be rows of (t, omega, n1, n2, n3)")
    if arr.shape[0] < 2:
        raise ConfigError("need at least two samples")
    if not np.all(np.isfinite(arr)):
        bad = int(np.argwhere(~np.all(np.isfinite(arr), axis=1))[0, 0])
        raise ConfigError(f"non-finite value in sample row {bad}")
    t = arr[:, 0]
    if t[0] != 0.0:
        raise NonMonotoneTime("first sample must be at t = 0")
    bad = np.flatnonzero(np.diff(t) <= 0)
    if bad.size:
        raise NonMonotoneTime(f"times not strictly increasing at row {int(bad[0]) + 1}")
    nn = arr[:, 2:5]
    sq = so21.msq(nn)
    nat = None
    for target, label in ((1, Nature.ELLIPTIC), (-1, Nature.HYPERBOLIC), (0, Nature.CRITICAL)):
        if np.all(np.abs(sq - target) <= 10 * tol):
            nat = label
            break
    if nat is None:
        raise InconsistentNature(f"n**2 not constant across samples (range {sq.min():.6g}..{sq.max():.6g})")

    kind = "natural" if len(t) > 2 else "not-a-knot"
    om = PchipInterpolator(t, arr[:, 1])
    nsp = CubicSpline(t, nn, axis=0, bc_type=kind) if len(t) > 2 else None
    dn = nsp.derivative() if nsp is not None else None
    slope = (nn[1] - nn[0]) / (t[1] - t[0])

    def n(tt):
        if nsp is not None:
            return nsp(tt)
        tt = np.asarray(tt, dtype=float)
        return nn[0] + np.multiply.outer(tt - t[0], slope)

    def n_rate(tt):
        d = dn(tt) if dn is not None else np.broadcast_to(slope, np.shape(tt) + (3,))
        return np.sqrt(np.abs(so21.msq(d)))

    def omega(tt):
        return om(tt)

    return Profile(omega, n, nat, float(t[-1]), n_rate)


def read_profile_csv(path: str | Path) -> Profile:
    """Read a ``t,omega,n1,n2,n3`` CSV file (header required)."""
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["t", "omega", "n1", "n2", "n3"]:
            raise ConfigError(f"{path}: header must be t,omega,n1,n2,n3")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 5:
                raise ConfigError(f"{path}: row {lineno} has {len(row)} fields, expected 5")
            try:
                rows.append([float(c) for c in row])
            except ValueError:
                raise ConfigError(f"{path}: row {lineno} is not numeric: {row}") from None
    return tabulated_profile(rows)
