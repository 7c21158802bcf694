"""Minkowski vector algebra and the two finite representations of SO(2,1).

Vectors are plain ``numpy`` arrays of shape ``(3,)`` with the metric
``g = diag(-1, -1, 1)``, so that ``a**2 = a3**2 - a1**2 - a2**2``.
Units: hbar = 1 and dimensionless quadratures.

Orientation convention: every matrix returned here is a *forward*
propagator.  ``adjoint_rep(xi, b)`` maps an initial invariant vector ``e0``
to ``e`` where ``K.e^g = Q K.e0^g Q^dagger`` with
``Q = exp(-i xi K.b^g / 2)``, and ``quad_rep(xi, b)`` maps the initial means
``(xbar, pbar)`` to the means after applying ``Q``.  With this convention
``trace_map(quad_rep(xi, b)) == adjoint_rep(xi, b)``.
"""

from __future__ import annotations

import dataclasses
from typing import NamedTuple

import numpy as np

from .errors import NotOnHyperboloid, UnnormalizedGenerator

METRIC = np.diag([-1.0, -1.0, 1.0])

# J_1 = sigma_z, J_2 = -sigma_x, J_3 = identity
J_MATRICES = (
    np.array([[1.0, 0.0], [0.0, -1.0]]),
    np.array([[0.0, -1.0], [-1.0, 0.0]]),
    np.eye(2),
)


@dataclasses.dataclass
class Tolerances:
    invariant: float = 1e-9  # constructor / type invariants
    rep: float = 1e-9  # representation cross-checks
    phi_eps: float = 1e-12  # below this rapidity the azimuth is undefined


TOL = Tolerances()


def set_tolerances(**kwargs: float) -> None:
    """Override global tolerances, e.g. ``set_tolerances(invariant=1e-8)``."""
    for key, value in kwargs.items():
        if not hasattr(TOL, key):
            raise KeyError(key)
        setattr(TOL, key, float(value))


def vec(a1, a2, a3) -> np.ndarray:
    return np.array([a1, a2, a3], dtype=float)


def gflip(a):
    """``a^g = (-a1, -a2, a3)``; works on trailing axis."""
    a = np.asarray(a, dtype=float)
    return a * np.array([-1.0, -1.0, 1.0])


def mdot(a, b):
    """Minkowski pairing ``a3*b3 - a1*b1 - a2*b2`` (broadcasts)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return a[..., 2] * b[..., 2] - a[..., 0] * b[..., 0] - a[..., 1] * b[..., 1]


def msq(a):
    return mdot(a, a)


def is_unit_timelike(v, tol: float | None = None) -> bool:
    tol = TOL.invariant if tol is None else tol
    v = np.asarray(v, dtype=float)
    return bool(abs(msq(v) - 1.0) <= tol and v[2] > 0)


def check_unit_timelike(v, tol: float | None = None) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if not is_unit_timelike(v, tol):
        raise NotOnHyperboloid(f"expected unit timelike upper vector, got {v} (square {msq(v):.3e})")
    return v


class HyperParam(NamedTuple):
    """Rapidity/azimuth coordinates of the upper unit hyperboloid."""

    xi: float
    phi: float
    phi_defined: bool = True


def param_to_vec(p: HyperParam | tuple) -> np.ndarray:
    xi, phi = float(p[0]), float(p[1])
    s = np.sinh(xi)
    return np.array([s * np.cos(phi), s * np.sin(phi), np.cosh(xi)])


def vec_to_param(v, tol: float | None = None) -> HyperParam:
    """Inverse of :func:`param_to_vec`; ``phi`` is returned in (-pi, pi].

    At the apex (rapidity below ``TOL.phi_eps``) the azimuth is meaningless:
    ``phi`` is set to 0 and ``phi_defined`` is False.
    """
    v = check_unit_timelike(v, tol)
    r = np.hypot(v[0], v[1])
    xi = float(np.arcsinh(r))
    if xi < TOL.phi_eps:
        return HyperParam(xi, 0.0, False)
    phi = float(np.arctan2(v[1], v[0]))
    if phi == -np.pi:
        phi = np.pi
    return HyperParam(xi, phi, True)


# --- generators -----------------------------------------------------------------

def _cross_matrix(a) -> np.ndarray:
    return np.array([[0.0, -a[2], a[1]], [a[2], 0.0, -a[0]], [-a[1], a[0], 0.0]])


def adjoint_generator(b) -> np.ndarray:
    """Matrix ``X(b)`` with ``X(b) e = -(b^g x e^g)``.

    The invariant-vector equation reads ``de/dt = 2 omega X(n) e``.
    ``X(b)**3 == -b**2 X(b)``.
    """
    b = np.asarray(b, dtype=float)
    return -_cross_matrix(gflip(b)) @ METRIC


def quad_generator(b) -> np.ndarray:
    """Mean-value generator: ``d(xbar, pbar)/dt = omega A(n) (xbar, pbar)``.

    ``A(b)**2 == -b**2 * identity``.
    """
    b1, b2, b3 = np.asarray(b, dtype=float)
    return np.array([[b2, b1 + b3], [b1 - b3, -b2]])


def _nature_of(b, tol: float) -> int:
    s = float(msq(b))
    for target in (1, -1, 0):
        if abs(s - target) <= tol:
            return target
    raise UnnormalizedGenerator(f"b**2 = {s!r} is not 1, -1 or 0 within {tol:g}")


def adjoint_rep(xi: float, b, tol: float | None = None) -> np.ndarray:
    """3x3 forward propagator of ``Q(xi, b)`` acting on invariant vectors."""
    tol = TOL.rep if tol is None else tol
    kind = _nature_of(b, tol)
    X = adjoint_generator(b)
    X2 = X @ X
    if kind == 1:
        return np.eye(3) + np.sin(xi) * X + (1.0 - np.cos(xi)) * X2
    if kind == -1:
        return np.eye(3) + np.sinh(xi) * X + (np.cosh(xi) - 1.0) * X2
    return np.eye(3) + xi * X + 0.5 * xi * xi * X2


def quad_rep(xi: float, b, tol: float | None = None) -> np.ndarray:
    """2x2 forward propagator of ``Q(xi, b)`` acting on ``(xbar, pbar)``.

    ``quad_rep(2*pi, (0, 0, 1)) == -identity``: the double-cover sign is kept.
    """
    tol = TOL.rep if tol is None else tol
    kind = _nature_of(b, tol)
    A = quad_generator(b)
    h = 0.5 * xi
    if kind == 1:
        return np.cos(h) * np.eye(2) + np.sin(h) * A
    if kind == -1:
        return np.cosh(h) * np.eye(2) + np.sinh(h) * A
    return np.eye(2) + h * A


def trace_map(Eq) -> np.ndarray:
    """Induced 3x3 matrix ``E_ij = tr(Eq^t J_i Eq J_j) / 2``.

    A group homomorphism from SL(2,R) onto SO(2,1); ``+-identity`` both map
    to the identity.
    """
    Eq = np.asarray(Eq, dtype=float)
    E = np.empty(Eq.shape[:-2] + (3, 3))
    EqT = np.swapaxes(Eq, -1, -2)
    for i, Ji in enumerate(J_MATRICES):
        left = EqT @ Ji @ Eq
        for j, Jj in enumerate(J_MATRICES):
            E[..., i, j] = 0.5 * np.trace(left @ Jj, axis1=-2, axis2=-1)
    return E


# --- invariant checks -----------------------------------------------------------

def group_defect(E) -> float:
    """``max|E^t g E - g|`` for a single matrix."""
    E = np.asarray(E, dtype=float)
    return float(np.max(np.abs(E.T @ METRIC @ E - METRIC)))


def scaled_group_defect(E) -> float:
    """Group defect divided by ``max(1, |E|_max**2)``.

    The unscaled defect of a matrix with entries of size ``s`` cannot be
    below ``eps * s**2`` in floating point.
    """
    E = np.asarray(E, dtype=float)
    return group_defect(E) / max(1.0, float(np.max(np.abs(E))) ** 2)


def check_so21(E, tol: float | None = None) -> bool:
    tol = TOL.invariant if tol is None else tol
    E = np.asarray(E, dtype=float)
    scale = max(1.0, float(np.max(np.abs(E)))) ** 3
    det_ok = abs(np.linalg.det(E) - 1.0) / scale <= tol
    return bool(scaled_group_defect(E) <= tol and det_ok)


def check_quad(Eq, tol: float | None = None) -> bool:
    tol = TOL.invariant if tol is None else tol
    Eq = np.asarray(Eq, dtype=float)
    scale = max(1.0, float(np.max(np.abs(Eq)))) ** 2
    return bool(abs(np.linalg.det(Eq) - 1.0) / scale <= tol)


def reduce_angle(x):
    """Reduce into (-pi, pi]."""
    y = np.mod(np.asarray(x, dtype=float) + np.pi, 2.0 * np.pi) - np.pi
    y = np.where(y == -np.pi, np.pi, y)
    return float(y) if np.ndim(y) == 0 else y


def angle_distance(a: float, b: float) -> float:
    """Distance between two angles on the circle."""
    return abs(reduce_angle(a - b))
