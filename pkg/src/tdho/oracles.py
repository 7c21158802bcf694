"""Closed-form evolution matrices for the four analytic families.

Every matrix below is a named constructor in its standard closed form; the
family functions only compose them.  All oracle functions take the family
phase ``phi`` (not the time).
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np
from scipy.optimize import brentq

from . import so21
from .errors import InvalidFamilyParams, UnsupportedFamily
from .model import FamilySpec, RegimeLabel, regime

# --- building blocks --------------------------------------------------------------


def R(p: float) -> np.ndarray:
    c, s = math.cos(2 * p), math.sin(2 * p)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def S(xi: float, eps: int) -> np.ndarray:
    ch, sh = math.cosh(xi), math.sinh(xi)
    return np.array([[eps * ch, 0.0, sh], [0.0, 1.0, 0.0], [sh, 0.0, eps * ch]])


def T(p: float) -> np.ndarray:
    ch, sh = math.cosh(2 * p), math.sinh(2 * p)
    return np.array([[1.0, 0.0, 0.0], [0.0, ch, sh], [0.0, sh, ch]])


def R_q(p: float) -> np.ndarray:
    c, s = math.cos(p), math.sin(p)
    return np.array([[c, s], [-s, c]])


def T_q(p: float) -> np.ndarray:
    ch, sh = math.cosh(p), math.sinh(p)
    return np.array([[ch, -sh], [-sh, ch]])


def W_plus(x: float) -> np.ndarray:
    """Rotation by ``2x`` in the 1-2 block (``W^(a)_+`` and ``W^(b)_+``)."""
    return R(x)


def W_minus(x: float) -> np.ndarray:
    """Boost by ``-2x`` in the 2-3 block (``W^(a)_-`` and ``W^(b)_-``)."""
    ch, sh = math.cosh(2 * x), math.sinh(2 * x)
    return np.array([[1.0, 0.0, 0.0], [0.0, ch, -sh], [0.0, -sh, ch]])


def W0_a(p: float) -> np.ndarray:
    p2 = 2 * p * p
    return np.array(
        [[1 - p2, -2 * p, p2], [2 * p, 1.0, -2 * p], [-p2, -2 * p, 1 + p2]]
    )


def Wq_plus_a(p: float, xi: float) -> np.ndarray:
    c, s = math.cos(p), math.sin(p)
    return np.array([[c, math.exp(xi) * s], [-math.exp(-xi) * s, c]])


def Wq_minus_a(p: float, xi: float) -> np.ndarray:
    ch, sh = math.cosh(p), math.sinh(p)
    return np.array([[ch, math.exp(xi) * sh], [math.exp(-xi) * sh, ch]])


def Wq0_a(p: float) -> np.ndarray:
    return np.array([[1.0, 2 * p], [0.0, 1.0]])


def Wq_plus_b(x: float, xi: float, eps: int) -> np.ndarray:
    """``x = Lambda * phi``."""
    c, s = math.cos(x), math.sin(x)
    return np.array(
        [[c, eps * math.exp(eps * xi) * s], [-eps * math.exp(-eps * xi) * s, c]]
    )


def Wq_minus_b(x: float, xi: float, eps: int) -> np.ndarray:
    ch, sh = math.cosh(x), math.sinh(x)
    return np.array(
        [[ch, eps * math.exp(eps * xi) * sh], [eps * math.exp(-eps * xi) * sh, ch]]
    )


def D_b(p: float, a: float, eps: int) -> np.ndarray:
    """Polynomial block with ``a = lam*n1`` (family B) or ``eps*lam*n3`` (family C)."""
    a2p2 = 2 * (a * p) ** 2
    return np.array(
        [
            [1 - a2p2, -2 * eps * a * p, eps * a2p2],
            [2 * eps * a * p, 1.0, -2 * a * p],
            [-eps * a2p2, -2 * a * p, 1 + a2p2],
        ]
    )


def Wq0_b(p: float, a: float, eps: int) -> np.ndarray:
    return np.array([[1.0, (1 + eps) * a * p], [(1 - eps) * a * p, 1.0]])


def Wq_d(x: float) -> np.ndarray:
    ch, sh = math.cosh(x), math.sinh(x)
    return np.array([[ch, sh], [sh, ch]])


# --- family evaluations -----------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class OracleEval:
    E: np.ndarray
    Eq_mat: np.ndarray
    eta: np.ndarray
    eta_sq: float
    phi: float


def _label(spec: FamilySpec, label: RegimeLabel | None) -> RegimeLabel:
    return regime(spec) if label is None else label


def oracle_E(spec: FamilySpec, phi: float, label: RegimeLabel | None = None) -> np.ndarray:
    lab = _label(spec, label)
    br = lab.branch
    phi = float(phi)
    L, xi, eps = lab.Lambda, lab.xi_n, lab.epsilon
    if br in ("A+", "A-", "A0"):
        x = lab.scale * phi
        Rn = R(lab.phi_n)
        if br == "A0":
            return Rn @ W0_a(x) @ Rn.T
        Sn = S(xi, 1)
        W = W_plus(x) if br == "A+" else W_minus(x)
        return Rn @ Sn @ W @ np.linalg.inv(Sn) @ Rn.T
    if br in ("B1", "B2", "C1", "C2"):
        outer = R(phi) if br[0] == "B" else T(phi)
        Sn = S(xi, eps)
        W = W_plus(L * phi) if br[1] == "1" else W_minus(L * phi)
        return outer @ Sn @ W @ np.linalg.inv(Sn)
    if br == "B3":
        return R(phi) @ D_b(phi, spec.lam * spec.n1, eps)
    if br == "C3":
        return T(phi) @ D_b(phi, eps * spec.lam * spec.n3, eps)
    if br == "D":
        Rn = R(lab.phi_n)
        return T(phi) @ Rn @ W_minus(L * phi) @ Rn.T
    raise InvalidFamilyParams(br)


def oracle_Eq(spec: FamilySpec, phi: float, label: RegimeLabel | None = None) -> np.ndarray:
    lab = _label(spec, label)
    br = lab.branch
    phi = float(phi)
    L, xi, eps = lab.Lambda, lab.xi_n, lab.epsilon
    if br in ("A+", "A-", "A0"):
        x = lab.scale * phi
        Rq = R_q(lab.phi_n)
        if br == "A+":
            W = Wq_plus_a(x, xi)
        elif br == "A-":
            W = Wq_minus_a(x, xi)
        else:
            W = Wq0_a(x)
        return Rq @ W @ Rq.T
    if br in ("B1", "B2", "C1", "C2"):
        outer = R_q(phi) if br[0] == "B" else T_q(phi)
        W = Wq_plus_b(L * phi, xi, eps) if br[1] == "1" else Wq_minus_b(L * phi, xi, eps)
        return outer @ W
    if br == "B3":
        return R_q(phi) @ Wq0_b(phi, spec.lam * spec.n1, eps)
    if br == "C3":
        return T_q(phi) @ Wq0_b(phi, eps * spec.lam * spec.n3, eps)
    if br == "D":
        Rq = R_q(lab.phi_n)
        return T_q(phi) @ Rq @ Wq_d(L * phi) @ Rq.T
    raise InvalidFamilyParams(br)


def oracle_eta(spec: FamilySpec, phi: float, label: RegimeLabel | None = None) -> tuple[np.ndarray, float]:
    """Unnormalized fixed vector of ``E(phi)`` and its closed-form square."""
    lab = _label(spec, label)
    br = lab.branch
    phi = float(phi)
    L, xi, eps = lab.Lambda, lab.xi_n, lab.epsilon
    ch, sh = math.cosh(xi), math.sinh(xi)
    c, s = math.cos(phi), math.sin(phi)
    Ch, Sh = math.cosh(phi), math.sinh(phi)
    if br[0] == "A":
        n = spec.n_of_phi(0.0)
        return n, float(so21.msq(n))
    if br == "B1":
        sl, cl = math.sin(L * phi), math.cos(L * phi)
        eta = np.array([eps * sh * sl * c, eps * sh * sl * s, ch * sl * c + eps * cl * s])
        sq = (sh**2 * sl**2 + 1) * math.sin(phi + eps * math.atan(ch * math.tan(L * phi))) ** 2 - sh**2 * sl**2
        return eta, _safe(sq, eta)
    if br == "B2":
        sl, cl = math.sinh(L * phi), math.cosh(L * phi)
        eta = np.array([eps * ch * sl * c, eps * ch * sl * s, sh * sl * c + cl * s])
        sq = (ch**2 * sl**2 + 1) * math.sin(phi + math.atan(sh * math.tanh(L * phi))) ** 2 - ch**2 * sl**2
        return eta, sq
    if br == "B3":
        a = spec.lam * spec.n1
        eta = np.array([a * phi * c, a * phi * s, eps * a * phi * c + s])
        sq = (a * a * phi * phi + 1) * math.sin(phi + eps * math.atan(a * phi)) ** 2 - (a * phi) ** 2
        return eta, sq
    if br == "C1":
        sl, cl = math.sin(L * phi), math.cos(L * phi)
        eta = np.array([eps * (sh * Ch * sl - Sh * cl), ch * Sh * sl, ch * Ch * sl])
        sq = ch**2 * sl**2 - (ch**2 * Ch**2 - 1) * math.sin(L * phi - _atan_ratio(math.tanh(phi), sh)) ** 2
        return eta, sq
    if br == "C2":
        sl, cl = math.sinh(L * phi), math.cosh(L * phi)
        eta = np.array([eps * ch * Ch * sl - Sh * cl, sh * Sh * sl, sh * Ch * sl])
        sq = sh**2 * sl**2 - (ch * Ch * sl - eps * Sh * cl) ** 2
        return eta, sq
    if br == "C3":
        a = spec.lam * spec.n3
        eta = np.array([eps * a * phi * Ch - Sh, a * phi * Sh, a * phi * Ch])
        sq = (a * phi) ** 2 - (eps * a * phi * Ch - Sh) ** 2
        return eta, sq
    if br == "D":
        c2, s2 = math.cos(2 * lab.phi_n), math.sin(2 * lab.phi_n)
        sl, cl = math.sinh(L * phi), math.cosh(L * phi)
        eta = np.array([c2 * Ch * sl - Sh * cl, s2 * Ch * sl, s2 * Sh * sl])
        sq = -(s2**2) * sl**2 - (c2 * Ch * sl - Sh * cl) ** 2
        return eta, sq
    raise InvalidFamilyParams(br)


def eta_sq_c2_recast(spec: FamilySpec, phi: float) -> float:
    """Alternative form of the C2 square, valid for ``epsilon = +1``."""
    lab = regime(spec)
    if lab.branch != "C2" or lab.epsilon != 1:
        raise InvalidFamilyParams("recast form needs branch C2 with epsilon = +1")
    L, xi = lab.Lambda, lab.xi_n
    sh, ch = math.sinh(xi), math.cosh(xi)
    return sh**2 * math.sinh(L * phi) ** 2 - (sh**2 * math.cosh(phi) ** 2 + 1) * math.sinh(
        L * phi - math.atanh(math.tanh(phi) / ch)
    ) ** 2


def _atan_ratio(num: float, den: float) -> float:
    # arctan(num/den) continued through den = 0
    return math.atan(num / den) if den != 0 else math.copysign(math.pi / 2, num)


def _safe(sq: float, eta: np.ndarray) -> float:
    # the B1 closed form uses tan(Lambda*phi), singular where cos(Lambda*phi) = 0
    if math.isfinite(sq):
        return sq
    return float(so21.msq(eta))


def oracle(spec: FamilySpec, phi: float) -> OracleEval:
    lab = regime(spec)
    eta, sq = oracle_eta(spec, phi, lab)
    return OracleEval(oracle_E(spec, phi, lab), oracle_Eq(spec, phi, lab), eta, sq, float(phi))


# --- structured evolution operator ------------------------------------------------


@dataclasses.dataclass(frozen=True)
class Decomposition:
    """``U(phi) = exp(-i phi K_pre) exp(-i Lambda phi K.n_f^g)``."""

    prefactor: str  # "K3" or "K1"
    Lambda: float
    n_f: np.ndarray

    @property
    def Lambda_n_f(self) -> np.ndarray:
        return self.Lambda * self.n_f

    def quad_matrix(self, phi: float) -> np.ndarray:
        """Induced forward mean propagator, built from the two factors."""
        pre = so21.vec(0, 0, 1) if self.prefactor == "K3" else so21.vec(-1, 0, 0)
        first = so21.quad_rep(2 * phi, pre, tol=1e-6)
        second = _quad_exp(2 * phi * self.Lambda_n_f)
        # U = U1 U2: the Heisenberg means compose as M(U1) M(U2)
        return first @ second

    def adjoint_matrix(self, phi: float) -> np.ndarray:
        return so21.trace_map(self.quad_matrix(phi))


def _quad_exp(a: np.ndarray) -> np.ndarray:
    """Forward mean propagator of ``exp(-i K.a^g / 2)`` for any real ``a``."""
    s = float(so21.msq(a))
    A = so21.quad_generator(a)
    if s > 0:
        r = math.sqrt(s)
        return math.cos(r / 2) * np.eye(2) + math.sin(r / 2) / r * A
    if s < 0:
        r = math.sqrt(-s)
        return math.cosh(r / 2) * np.eye(2) + math.sinh(r / 2) / r * A
    return np.eye(2) + 0.5 * A


def oracle_decomposition(spec: FamilySpec) -> Decomposition:
    lam, n1, n3 = spec.lam, spec.n1, spec.n3
    if spec.family == "A":
        raise UnsupportedFamily("family A evolves as a single factor exp(-i phi K.n^g)")
    if spec.family == "B":
        ln = np.array([lam * n1, 0.0, lam * n3 - 1.0])
        pre = "K3"
    elif spec.family == "C":
        ln = np.array([lam * n1 + 1.0, 0.0, lam * n3])
        pre = "K1"
    else:
        ln = np.array([lam * n1 + 1.0, lam * n3, 0.0])
        pre = "K1"
    s = float(so21.msq(ln))
    L = math.sqrt(abs(s))
    if L <= 1e-12:
        # critical n_f: keep Lambda n_f as the null vector itself
        return Decomposition(pre, 1.0, ln)
    return Decomposition(pre, L, ln / L)


def single_factor_quad(spec: FamilySpec, phi: float) -> np.ndarray:
    """Family A: ``U = exp(-i phi K.n^g)``."""
    if spec.family != "A":
        raise UnsupportedFamily("single-factor form only applies to family A")
    n = spec.n_of_phi(0.0)
    return _quad_exp(2 * spec.lam * phi * n)


# --- transcendental roots ---------------------------------------------------------

ROOT_FAMILIES = ("tan_tanh", "tanh_cosh", "tanh_linear")


def transcendental_roots(
    which: str,
    bracket: tuple[float, float],
    *,
    Lambda: float = 1.0,
    xi_n: float = 0.0,
    slope: float = 1.0,
    mesh: float = 0.01,
    xtol: float = 1e-12,
) -> list[float]:
    """Roots in ``(a, b]`` of one of the characteristic equations.

    * ``tan_tanh``:    ``tan(Lambda phi) = tanh(phi) / sinh(xi_n)``
    * ``tanh_cosh``:   ``tanh(phi) = cosh(xi_n) tanh(Lambda phi)``
    * ``tanh_linear``: ``tanh(phi) = slope * phi``

    The trivial root ``phi = 0`` is excluded.  ``tan_tanh`` is solved in the
    pole-free form ``sinh(xi_n) sin(Lambda phi) - tanh(phi) cos(Lambda phi)``.
    """
    a, b = bracket
    if which == "tan_tanh":
        def f(p):
            return math.sinh(xi_n) * math.sin(Lambda * p) - math.tanh(p) * math.cos(Lambda * p)
    elif which == "tanh_cosh":
        def f(p):
            return math.tanh(p) - math.cosh(xi_n) * math.tanh(Lambda * p)
    elif which == "tanh_linear":
        def f(p):
            return math.tanh(p) - slope * p
    else:
        raise ValueError(f"unknown root family {which!r}")
    lo = max(a, 0.0)
    if b - lo <= 0:
        return []
    n = max(2, int(math.ceil((b - lo) / mesh)) + 1)
    grid = np.linspace(lo, b, n)
    # keep away from the trivial root at zero
    grid = grid[grid > 1e-9 * max(1.0, b)]
    if grid.size < 2:
        return []
    vals = np.array([f(p) for p in grid])
    roots = []
    for i in range(len(grid) - 1):
        fa, fb = vals[i], vals[i + 1]
        if fa == 0.0:
            roots.append(float(grid[i]))
        elif fa * fb < 0:
            roots.append(float(brentq(f, grid[i], grid[i + 1], xtol=xtol, rtol=4 * np.finfo(float).eps)))
    if vals[-1] == 0.0:
        roots.append(float(grid[-1]))
    return roots
