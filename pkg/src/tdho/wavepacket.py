"""Moment-level description of normalizable states.

A state is reduced to its quadrature means ``(xbar, pbar)`` and the
second-moment vector ``u = <K>``.  Means move with ``E_q``; ``u``, ``v`` (the
mean part) and ``w = u - v`` (the width part) all move with ``E``.
"""

from __future__ import annotations

import csv
import dataclasses
import math
import numpy as np

from . import so21
from .errors import NegativeVariance, NonpositiveAction, NotOnHyperboloid, UncertaintyViolated

UNCERTAINTY_TOL = 1e-9


def mean_vector(xbar: float, pbar: float) -> np.ndarray:
    """``v`` built from the means: ``(x^2 - p^2, -2 x p, x^2 + p^2) / 2``."""
    return so21.vec(0.5 * (xbar**2 - pbar**2), -xbar * pbar, 0.5 * (xbar**2 + pbar**2))


@dataclasses.dataclass(frozen=True)
class MomentState:
    xbar: float
    pbar: float
    u: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "u", np.asarray(self.u, dtype=float))
        check_state(self)

    @property
    def u_sq(self) -> float:
        return float(so21.msq(self.u))

    @property
    def w(self) -> np.ndarray:
        return self.u - mean_vector(self.xbar, self.pbar)

    @property
    def means(self) -> np.ndarray:
        return np.array([self.xbar, self.pbar])


def check_state(s: MomentState, tol: float = UNCERTAINTY_TOL) -> None:
    u = s.u
    scale = max(1.0, float(np.sum(u**2)))
    if not (u[2] > 0 and so21.msq(u) >= 0.25 - tol * scale):
        raise UncertaintyViolated(f"u_sq = {so21.msq(u):.12g} is below 1/4 (u3 = {u[2]:.6g})")
    w = u - mean_vector(s.xbar, s.pbar)
    if w[2] + tol * scale < abs(w[0]):
        raise NegativeVariance(f"width vector w = {w} has w3 < |w1|")


def eigenstate_moments(n_index: int, e0) -> MomentState:
    if n_index < 0:
        raise ValueError("n_index must be >= 0")
    e0 = np.asarray(e0, dtype=float)
    if not so21.is_unit_timelike(e0):
        raise NotOnHyperboloid(f"e0 = {e0} is not unit timelike upper")
    return MomentState(0.0, 0.0, (n_index + 0.5) * e0)


def squeezed_state(u0: float, e0, xbar: float = 0.0, pbar: float = 0.0) -> MomentState:
    """State with ``u = u0 e0 + v(xbar, pbar)``, i.e. width vector ``u0 e0``."""
    e0 = np.asarray(e0, dtype=float)
    if not so21.is_unit_timelike(e0):
        raise NotOnHyperboloid(f"e0 = {e0} is not unit timelike upper")
    return MomentState(float(xbar), float(pbar), u0 * e0 + mean_vector(xbar, pbar))


def evolve_state(s: MomentState, E, Eq_mat) -> MomentState:
    q = np.asarray(Eq_mat, dtype=float) @ s.means
    return MomentState(float(q[0]), float(q[1]), np.asarray(E, dtype=float) @ s.u)


def evolve_along(s: MomentState, E_traj, Eq_traj) -> list[MomentState]:
    return [evolve_state(s, E, Q) for E, Q in zip(E_traj, Eq_traj)]


def variances(s: MomentState) -> tuple[float, float, float]:
    """``(dx, dp, cov)``: standard deviations and symmetrized covariance."""
    w = s.w
    a, b = w[2] + w[0], w[2] - w[0]
    slack = UNCERTAINTY_TOL * max(1.0, float(np.sum(s.u**2)))
    if a < -slack or b < -slack:
        raise NegativeVariance(f"variance from w = {w} is negative")
    return math.sqrt(max(a, 0.0)), math.sqrt(max(b, 0.0)), float(-w[1]) + 0.0


def write_moments_csv(path, times, states) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["t", "xbar", "pbar", "dx", "dp", "cov"])
        for t, s in zip(times, states):
            dx, dp, cov = variances(s)
            wr.writerow([repr(float(x)) for x in (t, s.xbar, s.pbar, dx, dp, cov)])


# --- classical action ellipse ------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class EllipseCoeffs:
    """``A_pp p^2 + A_qp q p + A_qq q^2 = 2 I``."""

    A_pp: float
    A_qp: float
    A_qq: float
    I_action: float

    def residual(self, q, p):
        return self.A_pp * p**2 + self.A_qp * q * p + self.A_qq * q**2 - 2 * self.I_action


def _check_e(e) -> np.ndarray:
    e = np.asarray(e, dtype=float)
    if not so21.is_unit_timelike(e):
        raise NotOnHyperboloid(f"e = {e} is not unit timelike upper")
    return e


def classical_ellipse(e, I_action: float) -> EllipseCoeffs:
    e = _check_e(e)
    if not I_action > 0:
        raise NonpositiveAction(f"I = {I_action} must be positive")
    return EllipseCoeffs(e[2] + e[0], 2 * e[1], e[2] - e[0], float(I_action))


def _orbit_points(e, I, theta):
    s = e[2] + e[0]
    q = np.sqrt(2 * I * s) * np.cos(theta)
    p = -np.sqrt(2 * I / s) * (e[1] * np.cos(theta) + np.sin(theta))
    return q, p


def sample_orbit(coeffs: EllipseCoeffs, theta) -> np.ndarray:
    """Points ``(q, p)`` of the ellipse at angle variables ``theta``."""
    s = coeffs.A_pp
    e1 = 0.5 * (coeffs.A_pp - coeffs.A_qq)
    e = np.array([e1, 0.5 * coeffs.A_qp, s - e1])
    q, p = _orbit_points(e, coeffs.I_action, np.asarray(theta, dtype=float))
    return np.stack([q, p], axis=-1)


def shoelace_area(points) -> float:
    x, y = np.asarray(points, dtype=float).T
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


# --- Hannay angle from a traced loop -----------------------------------------------


def hannay_projected(loop) -> float:
    """``-1/2`` of the oriented projected area integral ``dS12 / e3``.

    By Stokes the area integral over the region enclosed by the projected
    loop equals ``oint (e1 de2 - e2 de1) / (e3 + 1)``, evaluated here with
    the trapezoid rule on the loop points (closed back to the first point).
    """
    e = np.asarray(loop, dtype=float)
    e = np.vstack([e, e[:1]])
    f = 1.0 / (e[:, 2] + 1.0)
    de1, de2 = np.diff(e[:, 0]), np.diff(e[:, 1])
    fm = 0.5 * (f[1:] + f[:-1])
    e1m = 0.5 * (e[1:, 0] + e[:-1, 0])
    e2m = 0.5 * (e[1:, 1] + e[:-1, 1])
    return -0.5 * float(np.sum(fm * (e1m * de2 - e2m * de1)))


# 7-point degree-5 triangle rule: barycentric points and weights
_TRI_B = np.array(
    [
        [1 / 3, 1 / 3, 1 / 3],
        [0.059715871789770, 0.470142064105115, 0.470142064105115],
        [0.470142064105115, 0.059715871789770, 0.470142064105115],
        [0.470142064105115, 0.470142064105115, 0.059715871789770],
        [0.797426985353087, 0.101286507323456, 0.101286507323456],
        [0.101286507323456, 0.797426985353087, 0.101286507323456],
        [0.101286507323456, 0.101286507323456, 0.797426985353087],
    ]
)
_TRI_W = np.array([0.225] + [0.132394152788506] * 3 + [0.125939180544827] * 3)


def averaged_form_density(e12, I: float, n_theta: int = 64) -> np.ndarray:
    """Angle average of ``dp ^ dq`` per ``de1 ^ de2`` over sampled orbits.

    ``e12`` has shape (..., 2); ``e3`` is taken on the upper sheet.
    """
    e12 = np.asarray(e12, dtype=float)
    e1, e2 = e12[..., 0:1], e12[..., 1:2]
    e3 = np.sqrt(1 + e1**2 + e2**2)
    theta = np.linspace(0.0, 2 * math.pi, n_theta, endpoint=False)
    c, sn = np.cos(theta), np.sin(theta)
    s = e3 + e1
    s1, s2 = 1 + e1 / e3, e2 / e3
    r = math.sqrt(2 * I)
    q1 = r * c * s1 / (2 * np.sqrt(s))
    q2 = r * c * s2 / (2 * np.sqrt(s))
    g = e2 * c + sn
    p1 = r * 0.5 * s ** -1.5 * s1 * g
    p2 = r * (0.5 * s ** -1.5 * s2 * g - c / np.sqrt(s))
    return np.mean(p1 * q2 - p2 * q1, axis=-1)


def hannay_from_ellipses(loop, I_action: float = 1.0, n_theta: int = 64) -> float:
    """Hannay angle ``-d/dI`` of the surface integral of ``<dp ^ dq>``.

    The region enclosed by the projected loop is covered by a signed fan of
    triangles from the loop centroid; the angle-averaged form density of the
    orbits of action ``I`` is integrated with a 7-point rule and the ``I``
    derivative taken by a central difference.
    """
    if not I_action > 0:
        raise NonpositiveAction(f"I = {I_action} must be positive")
    pts = np.asarray(loop, dtype=float)[:, :2]
    a = pts
    b = np.roll(pts, -1, axis=0)
    c = np.broadcast_to(pts.mean(axis=0), pts.shape)
    area = 0.5 * ((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0]))
    nodes = _TRI_B[None, :, 0:1] * a[:, None] + _TRI_B[None, :, 1:2] * b[:, None] + _TRI_B[None, :, 2:3] * c[:, None]
    dI = 1e-3 * I_action

    def surf(I):
        dens = averaged_form_density(nodes, I, n_theta)
        return float(np.sum(area * (dens @ _TRI_W)))

    return -(surf(I_action + dI) - surf(I_action - dI)) / (2 * dI)
