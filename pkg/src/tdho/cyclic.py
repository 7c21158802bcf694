"""Existence and type of normalizable cyclic solutions in ``[0, tau]``.

Normalizable cyclic solutions exist iff ``E(tau)`` has a timelike fixed
vector.  Broader classes appear when ``E_q(tau) = +1`` (every state is
cyclic) or ``E_q(tau) = -1`` (every state of definite parity is cyclic).
"""

from __future__ import annotations

import dataclasses
import enum
import json
import math
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import so21
from .errors import InvalidU0, NoUnitEigenvalue

RANK_TOL = 1e-9  # relative singular-value threshold for the null space of E - I
ACCEPT_TOL = 1e-6  # smallest singular value still accepted as an eigenvalue 1
SPECIAL_TOL = 1e-7  # |Eq -+ I|_max for the two special cases
ETA_TOL = 1e-9  # |eta^2| below this is the boundary eta^2 = 0


class CyclicKind(str, enum.Enum):
    NONE_EXIST = "NoneExist"
    DENUMERABLE = "Denumerable"
    ALL_DEFINITE_PARITY = "AllDefiniteParity"
    ALL_STATES = "AllStates"


@dataclasses.dataclass(frozen=True)
class FixedVectorResult:
    """Fixed vector of ``E``.

    When the fixed direction is timelike ``eta`` is the unit timelike upper
    vector and ``eta_sq`` its square (1 within rounding).  Otherwise ``eta``
    is Euclidean-unit and ``eta_sq`` its Minkowski square, in [-1, 0].
    """

    eta: np.ndarray
    eta_sq: float
    multiplicity: int
    defective: bool
    residual: float  # |E eta - eta| / max(1, |E|) for the returned eta


def fixed_vector(E, rank_tol: float = RANK_TOL, accept_tol: float = ACCEPT_TOL) -> FixedVectorResult:
    E = np.asarray(E, dtype=float)
    norm = max(1.0, float(np.linalg.norm(E, 2)))
    _, sv, Vt = np.linalg.svd(E - np.eye(3))
    null = sv <= rank_tol * norm
    mult = int(np.count_nonzero(null))
    if mult == 0:
        if sv[-1] > accept_tol * norm:
            raise NoUnitEigenvalue(f"smallest singular value of E - I is {sv[-1] / norm:.3e} (relative)")
        mult = 1
        null = np.array([False, False, True])
    if mult == 3:
        eta = so21.vec(0.0, 0.0, 1.0)
        return FixedVectorResult(eta, 1.0, 3, False, 0.0)
    basis = Vt[null]
    if mult == 1:
        v = basis[0]
    else:
        # pick the most timelike direction of the null plane
        G = basis @ so21.METRIC @ basis.T
        w, U = np.linalg.eigh(G)
        v = U[:, -1] @ basis
        v = v / np.linalg.norm(v)
    sq = float(so21.msq(v))
    defective = mult < 3 and abs(np.trace(E) - 3.0) <= 10 * rank_tol * norm
    if sq > ETA_TOL:
        v = v / math.sqrt(sq)
        if v[2] < 0:
            v = -v
        sq = float(so21.msq(v))
    elif v[2] < 0 or (v[2] == 0 and v[np.argmax(np.abs(v))] < 0):
        v = -v
    res = float(np.max(np.abs(E @ v - v))) / max(1.0, float(np.max(np.abs(v)))) / norm
    return FixedVectorResult(v, sq, mult, bool(defective), res)


@dataclasses.dataclass(frozen=True)
class CyclicVerdict:
    kind: CyclicKind
    alpha_tau: float | None
    N: int | None
    eta: np.ndarray
    eta_sq: float
    boundary: bool = False
    parity_phases: tuple[float, float] | None = None  # (delta_+, delta_-)

    def as_dict(self, tau: float | None = None) -> dict:
        return {
            "tau": None if tau is None else float(tau),
            "kind": self.kind.value,
            "alpha_tau": None if self.alpha_tau is None else float(self.alpha_tau),
            "eta": [float(x) for x in self.eta],
            "eta_sq": float(self.eta_sq),
            "N": self.N,
            "boundary": bool(self.boundary),
        }


AlphaFn = Callable[[np.ndarray], float]


def verdict(
    E_tau,
    Eq_tau,
    alpha_tau_fn: AlphaFn | None = None,
    *,
    special_tol: float = SPECIAL_TOL,
    eta_tol: float = ETA_TOL,
) -> CyclicVerdict:
    """Decide the cyclic class at ``tau``.

    ``alpha_tau_fn(e0)`` must return ``alpha(tau)`` for a trajectory started
    at the unit vector ``e0``; without it ``alpha_tau`` and ``N`` are None.
    """
    Eq_tau = np.asarray(Eq_tau, dtype=float)
    I2 = np.eye(2)
    if np.max(np.abs(Eq_tau - I2)) <= special_tol or np.max(np.abs(Eq_tau + I2)) <= special_tol:
        plus = np.max(np.abs(Eq_tau - I2)) <= special_tol
        eta = so21.vec(0.0, 0.0, 1.0)
        alpha = N = None
        if alpha_tau_fn is not None:
            alpha = float(alpha_tau_fn(eta))
            N = int(round(alpha / (2 * math.pi))) if plus else int(round((alpha / math.pi - 1) / 2))
        if plus:
            return CyclicVerdict(CyclicKind.ALL_STATES, alpha, N, eta, 1.0)
        par = None if N is None else parity_phases(N)
        return CyclicVerdict(CyclicKind.ALL_DEFINITE_PARITY, alpha, N, eta, 1.0, parity_phases=par)
    fv = fixed_vector(E_tau)
    if fv.eta_sq > eta_tol:
        alpha = None if alpha_tau_fn is None else float(alpha_tau_fn(fv.eta))
        return CyclicVerdict(CyclicKind.DENUMERABLE, alpha, None, fv.eta, fv.eta_sq)
    return CyclicVerdict(CyclicKind.NONE_EXIST, None, None, fv.eta, fv.eta_sq, boundary=abs(fv.eta_sq) <= eta_tol)


def parity_phases(N: int) -> tuple[float, float]:
    """``delta_+-`` for ``alpha(tau) = (2N+1) pi``."""
    d = (N + 0.5) * math.pi
    return so21.reduce_angle(d), so21.reduce_angle(-d)


def denumerable_phases(n_index: int, alpha_tau: float, hannay: float) -> tuple[float, float]:
    """``(delta_n, gamma_n)`` for the eigenstate ``n`` of ``K.eta^g``."""
    if n_index < 0:
        raise ValueError("n_index must be >= 0")
    k = n_index + 0.5
    return so21.reduce_angle(k * alpha_tau), so21.reduce_angle(-k * hannay)


# --- extra-term geometric phases -------------------------------------------------


@dataclasses.dataclass(frozen=True)
class Even:
    """``alpha(tau) = 2 N pi``."""

    N: int


@dataclasses.dataclass(frozen=True)
class Odd:
    """``alpha(tau) = (2N+1) pi``; ``parity`` is +1 (even states) or -1."""

    N: int
    parity: int = 1


@dataclasses.dataclass(frozen=True)
class Rational:
    """``alpha(tau) = r0 pi / s0`` with a superposition of mean ``s_bar``."""

    r0: int
    s0: int
    s_bar: float


def general_geometric_phase(u0: float, hannay: float, case) -> float:
    if not u0 >= 0.5 - 1e-12:
        raise InvalidU0(f"u0 = {u0} is below 1/2")
    base = -u0 * hannay
    if isinstance(case, Even):
        return so21.reduce_angle(base - (u0 - 0.5) * 2 * case.N * math.pi)
    if isinstance(case, Odd):
        if case.parity not in (1, -1):
            raise ValueError("parity must be +1 or -1")
        return so21.reduce_angle(base - (u0 - case.parity * 0.5) * (2 * case.N + 1) * math.pi)
    if isinstance(case, Rational):
        expect = 2 * case.s0 * case.s_bar + 0.5
        if abs(u0 - expect) > 1e-9 * max(1.0, expect):
            raise InvalidU0(f"u0 = {u0} does not match 2 s0 s_bar + 1/2 = {expect}")
        return so21.reduce_angle(base - 2 * case.r0 * case.s_bar * math.pi)
    raise TypeError(f"unknown case {case!r}")


def rational_alpha(alpha_tau: float, max_den: int = 64, tol: float = 1e-9) -> tuple[int, int] | None:
    """Best rational ``r0/s0`` for ``alpha_tau/pi`` with ``s0 <= max_den``."""
    if max_den < 1:
        raise ValueError("max_den must be >= 1")
    x = alpha_tau / math.pi
    f = Fraction(x).limit_denominator(max_den)
    if abs(x - f.numerator / f.denominator) <= tol:
        return f.numerator, f.denominator
    return None


def case_for_alpha(alpha_tau: float, s_bar: float = 0.0, max_den: int = 64, parity: int = 1):
    """Route ``alpha_tau`` to :class:`Even`, :class:`Odd` or :class:`Rational`."""
    rat = rational_alpha(alpha_tau, max_den)
    if rat is None:
        return None
    r0, s0 = rat
    if s0 == 1:
        return Even(r0 // 2) if r0 % 2 == 0 else Odd((r0 - 1) // 2, parity)
    return Rational(r0, s0, s_bar)


def verdicts_to_json(records: Sequence[tuple[float, CyclicVerdict]], path=None) -> str:
    text = json.dumps({"schema": 1, "verdicts": [v.as_dict(t) for t, v in records]}, indent=1, sort_keys=True)
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    return text


# --- brute-force cyclic search ---------------------------------------------------


def brute_force_fixed(E, mesh: int = 100, xi_max: float = 6.0, match: float = 1e-6) -> tuple[bool, float]:
    """Search the unit hyperboloid for ``v`` with ``|E v - v| <= match |v|``.

    A ``mesh x mesh`` grid over rapidity in ``[0, xi_max]`` and azimuth seeds a
    least-squares refinement in the chart ``v = (w1, w2, sqrt(1 + w^2))`` boxed
    to ``|w_i| <= sinh(xi_max)`` (near a null fixed direction the relative residual decays with rapidity,
    so an unbounded search would report spurious matches at ``eta^2 = 0``).
    Returns (found, best relative residual).
    """
    from scipy.optimize import least_squares

    E = np.asarray(E, dtype=float)
    xi = np.linspace(0.0, xi_max, mesh)
    ph = np.linspace(0.0, 2 * math.pi, mesh, endpoint=False)
    X, P = np.meshgrid(xi, ph, indexing="ij")
    V = np.stack([np.sinh(X) * np.cos(P), np.sinh(X) * np.sin(P), np.cosh(X)], axis=-1).reshape(-1, 3)
    R = np.linalg.norm(V @ (E - np.eye(3)).T, axis=1) / np.linalg.norm(V, axis=1)
    best = float(R.min())
    if best <= match:
        return True, best
    # R is Lipschitz in the direction v/|v| with constant |E - I|_2, and every
    # point of the domain lies within 2 * cell of a mesh point in that metric
    cell = 0.5 * math.hypot(xi[1] - xi[0], ph[1] - ph[0])
    if best > match + 2.0 * cell * float(np.linalg.norm(E - np.eye(3), 2)):
        return False, best

    def resid(w):
        v = np.array([w[0], w[1], math.sqrt(1.0 + w[0] ** 2 + w[1] ** 2)])
        return (E @ v - v) / np.linalg.norm(v)

    wmax = math.sinh(xi_max)
    for idx in np.argsort(R)[:3]:
        w0 = np.clip(V[idx, :2], -wmax, wmax)
        sol = least_squares(resid, w0, bounds=(-wmax, wmax), xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=200)
        r = float(np.linalg.norm(sol.fun))
        best = min(best, r)
        if r <= match:
            return True, r
    return False, best
