"""Growth of the mean propagator across a coupling sweep.

For a family with fixed ``n(phi)`` the mean propagator obeys
``dEq/dphi = lam A(n(phi)) Eq`` (phase rate 1), so a whole sweep over
``lam`` shares every stage evaluation of ``A``.  The batch is advanced by
RK4 and renormalized once per unit phase; the growth exponent is then read
off the running maximum of ``log |Eq|_2``.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .model import FamilySpec, RegimeKind, regime

FIT_TOL = 0.10  # relative, for log-linear and log-log slopes
FINITE_SLOPE = 0.05  # |slope| bound for bounded motion
POLY_WINDOW = (10.0, 50.0)
SHORT_WINDOW = (1.0, 4.0)  # families C and D: n grows like cosh(2 phi)
SCAN_STEP = 0.05  # h * rate per RK4 step; slopes only need a few digits


def log_norm_history(spec: FamilySpec, lams, phi_max: float, sample: float = 0.05):
    """``log |Eq(phi)|_2`` for every ``lam`` on a uniform ``phi`` sample grid.

    Returns ``(phis, logs)`` with ``logs`` of shape ``(len(lams), len(phis))``.
    """
    lams = np.asarray(lams, dtype=float)
    B = len(lams)
    n_samp = int(round(phi_max / sample))
    phis = np.linspace(0.0, n_samp * sample, n_samp + 1)
    logs = np.zeros((B, n_samp + 1))
    Q = np.broadcast_to(np.eye(2), (B, 2, 2)).copy()
    scale = np.zeros(B)
    lam_max = float(np.max(np.abs(lams))) if B else 0.0
    for k in range(n_samp):
        a, b = phis[k], phis[k + 1]
        rate = 2 * lam_max + float(np.max(spec.n_rate_of_phi(np.array([a, b]))))
        if spec.family in ("C", "D"):
            # the Euclidean size of A(n) sets the stiffness of this frame
            rate = max(rate, 2 * lam_max * float(np.max(np.abs(spec.n_of_phi(b)))))
        m = max(1, int(math.ceil((b - a) * rate / SCAN_STEP)))
        h = (b - a) / m
        nn = spec.n_of_phi(a + 0.5 * h * np.arange(2 * m + 1))
        A = np.array([[nn[:, 1], nn[:, 0] + nn[:, 2]], [nn[:, 0] - nn[:, 2], -nn[:, 1]]])
        A = np.moveaxis(A, -1, 0)  # (2m+1, 2, 2) stage generators at unit coupling
        L = lams[:, None, None]
        for j in range(m):
            G0, G1, G2 = L * A[2 * j], L * A[2 * j + 1], L * A[2 * j + 2]
            k1 = G0 @ Q
            k2 = G1 @ (Q + 0.5 * h * k1)
            k3 = G1 @ (Q + 0.5 * h * k2)
            k4 = G2 @ (Q + h * k3)
            Q = Q + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        nrm = np.linalg.norm(Q, 2, axis=(1, 2))
        logs[:, k + 1] = scale + np.log(nrm)
        if (k + 1) % 20 == 0:
            scale = scale + np.log(nrm)
            Q = Q / nrm[:, None, None]
    return phis, logs


@dataclasses.dataclass(frozen=True)
class GrowthFit:
    lam: float
    kind: RegimeKind
    Lambda: float
    expected: float  # expected slope (log-linear, or 1 for log-log)
    slope: float
    fit: str  # "flat", "loglinear", "loglog" or "polyexp"
    window: tuple[float, float]
    ok: bool


def fit_window(spec: FamilySpec) -> tuple[str, tuple[float, float], float]:
    lab = regime(spec)
    if spec.family in ("C", "D"):
        return ("polyexp" if lab.poly else "loglinear"), SHORT_WINDOW, lab.growth_rate
    if lab.poly:
        return "loglog", POLY_WINDOW, 1.0
    if lab.kind is RegimeKind.FINITE:
        L = max(lab.Lambda, 1e-3)
        a = max(10.0, 2 * math.pi / L)
        return "flat", (a, a + max(40.0, 4 * math.pi / L)), 0.0
    L = max(lab.growth_rate, 1e-3)
    a = max(10.0, 2 * math.pi / L)
    return "loglinear", (a, a + max(40.0, 4 * math.pi / L)), lab.growth_rate


def _slope(x, y) -> float:
    return float(np.polyfit(x, y, 1)[0])


def growth_scan(spec: FamilySpec, lams, sample: float = 0.05) -> list[GrowthFit]:
    """Regime label and measured growth exponent for each ``lam``."""
    specs = [dataclasses.replace(spec, lam=float(l)) for l in lams]
    plans = [fit_window(s) for s in specs]
    phi_max = max(w[1] for _, w, _ in plans)
    phis, logs = log_norm_history(spec, lams, phi_max, sample)
    env = np.maximum.accumulate(logs, axis=1)
    out = []
    for i, (s, (fit, (a, b), expected)) in enumerate(zip(specs, plans)):
        lab = regime(s)
        sel = (phis >= a) & (phis <= b)
        if fit == "loglog":
            slope = _slope(np.log(phis[sel]), env[i, sel])
            ok = abs(slope - 1.0) <= FIT_TOL
        elif fit == "polyexp":
            # exponential growth with a power-law prefactor: fit s phi + c log(phi) + d
            X = np.stack([phis[sel], np.log(phis[sel]), np.ones(int(sel.sum()))], axis=1)
            slope = float(np.linalg.lstsq(X, env[i, sel], rcond=None)[0][0])
            ok = abs(slope - expected) <= FIT_TOL * expected
        elif fit == "flat":
            slope = _slope(phis[sel], env[i, sel])
            ok = abs(slope) <= FINITE_SLOPE
        else:
            slope = _slope(phis[sel], env[i, sel])
            ok = abs(slope - expected) <= FIT_TOL * max(expected, 1e-12)
        out.append(GrowthFit(float(s.lam), lab.kind, lab.Lambda, expected, slope, fit, (a, b), bool(ok)))
    return out
