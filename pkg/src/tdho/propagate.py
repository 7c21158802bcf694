"""Numerical propagation of the invariant vector, E(t), E_q(t) and phase accumulators.

The invariant vector obeys ``de/dt = -2 omega n^g x e^g``; the evolution
matrix ``E`` solves the same linear equation column by column and the mean
propagator ``E_q`` solves ``dEq/dt = omega A(n) Eq``.  All of them, together
with the two phase accumulators, are advanced by one fixed-step RK4 scheme.
Because the accumulator integrands depend on ``e`` only, carrying them in
the RK4 state is the same as Simpson quadrature over each substep.
"""

from __future__ import annotations

import csv
import dataclasses
import math
from pathlib import Path

import numpy as np

from . import so21
from .errors import DriftExceeded, GroupViolation, InvalidGrid, NonUnitInitialVector
from .model import Profile

STEP_BOUND = 0.01  # h * (2|omega| + |n'|) per RK4 substep


@dataclasses.dataclass(frozen=True)
class StepPolicy:
    bound: float = STEP_BOUND
    step_factor: float = 1.0  # > 1 coarsens the steps (negative controls)
    min_substeps: int = 1

    @property
    def h_rate(self) -> float:
        return self.bound * self.step_factor


def rhs(e, omega: float, n) -> np.ndarray:
    """``-2 omega (n^g x e^g)``."""
    return -2.0 * omega * np.cross(so21.gflip(n), so21.gflip(e))


@dataclasses.dataclass(frozen=True)
class Trajectory:
    grid: np.ndarray  # (N,)
    e: np.ndarray  # (N, 3)
    E: np.ndarray  # (N, 3, 3)
    Eq_mat: np.ndarray  # (N, 2, 2)
    A1: np.ndarray  # (N,)
    A2: np.ndarray  # (N,)
    e0: np.ndarray
    span: np.ndarray  # (N,) phase traversed, sets the per-unit-phase budgets
    substeps: int
    raw_mode: bool
    group_abs: np.ndarray  # |E^t g E - g|_max at the working precision
    drift_abs: np.ndarray  # |e^2 - e0^2| at the working precision
    precision_bits: int | None = None  # None: double precision

    def __len__(self) -> int:
        return len(self.grid)

    @property
    def drift(self) -> np.ndarray:
        """Scaled Casimir drift ``|e^2 - e0^2| / max(1, |e|^2)`` per node."""
        return self.drift_abs / np.maximum(1.0, np.sum(self.e**2, axis=-1))

    @property
    def group_defect(self) -> np.ndarray:
        """Scaled ``|E^t g E - g|_max / max(1, |E|_max^2)`` per node."""
        return self.group_abs / np.maximum(1.0, np.max(np.abs(self.E), axis=(1, 2)) ** 2)

    @property
    def trace_defect(self) -> np.ndarray:
        """Scaled ``|trace_map(Eq) - E|_max`` per node."""
        tm = so21.trace_map(self.Eq_mat)
        scale = np.maximum(1.0, np.max(np.abs(self.E), axis=(1, 2)))
        return np.max(np.abs(tm - self.E), axis=(1, 2)) / scale

    def alpha(self, index: int = -1) -> float:
        return float(self.A1[index] - self.A2[index])

    def to_csv(self, path: str | Path) -> None:
        header = ["t", "e1", "e2", "e3"]
        header += [f"E{i}{j}" for i in range(1, 4) for j in range(1, 4)]
        header += [f"Q{i}{j}" for i in range(1, 3) for j in range(1, 3)]
        header += ["A1", "A2"]
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for k in range(len(self.grid)):
                row = [self.grid[k], *self.e[k], *self.E[k].ravel(), *self.Eq_mat[k].ravel(), self.A1[k], self.A2[k]]
                w.writerow([repr(float(x)) for x in row])


def _check_grid(grid, t_max: float) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 1:
        raise InvalidGrid("grid must be a non-empty 1-d sequence of times")
    if not np.all(np.isfinite(grid)):
        raise InvalidGrid("grid contains non-finite times")
    if grid[0] != 0.0:
        raise InvalidGrid(f"grid must start at 0, got {grid[0]}")
    if np.any(np.diff(grid) <= 0):
        raise InvalidGrid("grid must be strictly increasing")
    if grid[-1] > t_max * (1 + 1e-12) + 1e-15:
        raise InvalidGrid(f"grid end {grid[-1]} exceeds t_max {t_max}")
    return grid


def _substep_counts(profile: Profile, grid: np.ndarray, policy: StepPolicy) -> np.ndarray:
    counts = np.empty(len(grid) - 1, dtype=int)
    probe = np.linspace(0.0, 1.0, 9)
    for i in range(len(grid) - 1):
        a, b = grid[i], grid[i + 1]
        rho = float(np.max(profile.rate(a + (b - a) * probe)))
        counts[i] = max(policy.min_substeps, int(math.ceil((b - a) * rho / policy.h_rate - 1e-9)))
    return counts


def _generators(profile: Profile, times: np.ndarray):
    om = np.asarray(profile.omega(times), dtype=float).reshape(-1)
    nn = np.asarray(profile.n(times), dtype=float).reshape(-1, 3)
    # X(b) = -[b^g]_x g, batched; right-multiplying by g scales columns
    b1, b2, b3 = -nn[:, 0], -nn[:, 1], nn[:, 2]
    C = np.zeros((len(times), 3, 3))
    C[:, 0, 1], C[:, 0, 2] = -b3, b2
    C[:, 1, 0], C[:, 1, 2] = b3, -b1
    C[:, 2, 0], C[:, 2, 1] = -b2, b1
    X = -C * np.array([-1.0, -1.0, 1.0])
    A = np.empty((len(times), 2, 2))
    A[:, 0, 0], A[:, 0, 1] = nn[:, 1], nn[:, 0] + nn[:, 2]
    A[:, 1, 0], A[:, 1, 1] = nn[:, 0] - nn[:, 2], -nn[:, 1]
    return 2.0 * om[:, None, None] * X, om[:, None, None] * A, om, nn


AUTO_N_MAX = 100.0  # above this Euclidean |n| the double-precision path loses > 1e-12


def _stage_times(grid, counts):
    starts, hs = [], []
    for i in range(len(grid) - 1):
        m = counts[i]
        h = (grid[i + 1] - grid[i]) / m
        starts.append(grid[i] + h * np.arange(m))
        hs.append(np.full(m, h))
    if not starts:
        return np.zeros(0), np.zeros(0)
    return np.concatenate(starts), np.concatenate(hs)


def _rk4_double(profile, e0, grid, counts, raw_mode):
    N = len(grid)
    t0, h = _stage_times(grid, counts)
    stage_t = np.stack([t0, t0 + 0.5 * h, t0 + h], axis=1).reshape(-1)
    M3, M2, om, nn = _generators(profile, stage_t)
    M3 = M3.reshape(-1, 3, 3, 3)
    M2 = M2.reshape(-1, 3, 2, 2)
    om = om.reshape(-1, 3)
    nn = nn.reshape(-1, 3, 3)
    span_rate = 0.5 * np.asarray(profile.rate(stage_t), dtype=float).reshape(-1, 3)

    e_out = np.empty((N, 3))
    E_out = np.empty((N, 3, 3))
    Q_out = np.empty((N, 2, 2))
    A1 = np.zeros(N)
    A2 = np.zeros(N)
    span = np.zeros(N)

    Y = np.concatenate([np.eye(3), e0[:, None]], axis=1)  # [E | e]
    Q = np.eye(2)
    a1 = a2 = s = 0.0
    e_out[0], E_out[0], Q_out[0] = e0, np.eye(3), Q
    k = 0
    for i in range(N - 1):
        for _ in range(counts[i]):
            hh = h[k]
            Ma, Mb, Mc = M3[k]
            k1 = Ma @ Y
            y2 = Y + 0.5 * hh * k1
            k2 = Mb @ y2
            y3 = Y + 0.5 * hh * k2
            k3 = Mb @ y3
            y4 = Y + hh * k3
            k4 = Mc @ y4
            if not raw_mode:
                stages_e = (Y[:, 3], y2[:, 3], y3[:, 3], y4[:, 3])
                stages_d = (k1[:, 3], k2[:, 3], k3[:, 3], k4[:, 3])
                f1 = [0.5 * (ee[0] * dd[1] - dd[0] * ee[1]) / (ee[2] + 1.0) for ee, dd in zip(stages_e, stages_d)]
                ws = (om[k, 0], om[k, 1], om[k, 1], om[k, 2])
                ns = (nn[k, 0], nn[k, 1], nn[k, 1], nn[k, 2])
                f2 = [w * (ee[2] * n_[2] - ee[0] * n_[0] - ee[1] * n_[1]) for w, ee, n_ in zip(ws, stages_e, ns)]
                a1 += hh / 6.0 * (f1[0] + 2 * f1[1] + 2 * f1[2] + f1[3])
                a2 += hh / 6.0 * (f2[0] + 2 * f2[1] + 2 * f2[2] + f2[3])
            s += hh / 6.0 * (span_rate[k, 0] + 4 * span_rate[k, 1] + span_rate[k, 2])
            Y = Y + hh / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)

            Qa, Qb, Qc = M2[k]
            q1 = Qa @ Q
            q2 = Qb @ (Q + 0.5 * hh * q1)
            q3 = Qb @ (Q + 0.5 * hh * q2)
            q4 = Qc @ (Q + hh * q3)
            Q = Q + hh / 6.0 * (q1 + 2 * q2 + 2 * q3 + q4)
            k += 1
        node = i + 1
        E_out[node] = Y[:, :3]
        e_out[node] = Y[:, 3]
        Q_out[node] = Q
        A1[node], A2[node] = a1, a2
        span[node] = s
    gd = np.max(np.abs(np.swapaxes(E_out, 1, 2) @ so21.METRIC @ E_out - so21.METRIC), axis=(1, 2))
    dr = np.abs(so21.msq(e_out) - so21.msq(e0))
    return e_out, E_out, Q_out, A1, A2, span, gd, dr


def resolve_precision(profile: Profile, grid, precision) -> int | None:
    """Working precision in bits, or None for plain double precision.

    ``"auto"`` switches to extended precision when ``|n(t)|`` (Euclidean)
    exceeds ``AUTO_N_MAX`` on the grid and the profile has a closed-form
    evaluator.
    """
    from . import hiprec

    if precision is None or precision == "double":
        return None
    probe = np.linspace(0.0, float(grid[-1]), 513)
    n_max = float(np.max(np.linalg.norm(np.asarray(profile.n(probe), dtype=float).reshape(-1, 3), axis=-1)))
    if precision == "auto":
        if n_max <= AUTO_N_MAX or profile.hp is None:
            return None
        return hiprec.bits_for(n_max)
    return int(precision)


def integrate(
    profile: Profile,
    e0,
    grid,
    *,
    raw_mode: bool = False,
    policy: StepPolicy | None = None,
    drift_tol: float = 1e-9,
    group_tol: float = 1e-9,
    check: bool = True,
    precision="auto",
) -> Trajectory:
    """RK4 propagation of ``e``, ``E``, ``E_q`` and the phase accumulators.

    Each grid interval is split into the smallest number of equal substeps
    with ``h * max(2|omega| + |n'|) <= 0.01``.  Drift and group budgets are
    per unit of traversed phase and scaled by ``max(1, |E|^2)`` (resp.
    ``max(1, |e|^2)``), measured at the working precision; pass
    ``check=False`` to get the raw result.  In ``raw_mode`` ``e0`` may be
    any vector and the accumulators are NaN.

    ``precision`` is ``"auto"``, ``"double"``/None or a mantissa size in bits
    for the extended-precision path (see :mod:`tdho.hiprec`).
    """
    policy = policy or StepPolicy()
    e0 = np.asarray(e0, dtype=float)
    if e0.shape != (3,):
        raise NonUnitInitialVector("e0 must be a 3-vector")
    if not raw_mode and not so21.is_unit_timelike(e0):
        raise NonUnitInitialVector(f"e0 = {e0} is not unit timelike upper (square {so21.msq(e0):.3e})")
    grid = _check_grid(grid, profile.t_max)
    N = len(grid)
    counts = _substep_counts(profile, grid, policy) if N > 1 else np.zeros(0, int)
    bits = resolve_precision(profile, grid, precision) if N > 1 else None
    if bits is None:
        out = _rk4_double(profile, e0, grid, counts, raw_mode)
    else:
        from . import hiprec

        out = hiprec.rk4(profile, e0, grid, counts, raw_mode, bits)
    e_out, E_out, Q_out, A1, A2, span, gd, dr = out

    if profile.spec is not None and profile.phase is not None:
        span = np.maximum(span, np.abs(np.asarray(profile.phase(grid), dtype=float)))
    if raw_mode:
        A1[:] = np.nan
        A2[:] = np.nan
        dr[:] = np.nan
    traj = Trajectory(grid, e_out, E_out, Q_out, A1, A2, e0, span, int(counts.sum()), raw_mode, gd, dr, bits)
    if check:
        budget = np.maximum(1.0, span)
        gd = traj.group_defect
        dr = traj.drift
        bad = np.flatnonzero(gd > group_tol * budget)
        if bad.size:
            j = int(bad[0])
            raise GroupViolation(f"group_defect {gd[j]:.3e} at t={grid[j]:.6g} exceeds {group_tol * budget[j]:.3e}")
        if not raw_mode:
            bad = np.flatnonzero(dr > drift_tol * budget)
            if bad.size:
                j = int(bad[0])
                raise DriftExceeded(f"casimir_drift {dr[j]:.3e} at t={grid[j]:.6g} exceeds {drift_tol * budget[j]:.3e}")
    return traj


# --- phases -----------------------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class PhaseReport:
    alpha_tau: float
    hannay: float
    dynamical: float
    total: float
    geometric: float
    u0: float

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


def phases(traj: Trajectory, u0: float, tau_index: int = -1) -> PhaseReport:
    """Phase functionals at node ``tau_index`` for initial ``u = u0 e0``.

    ``total`` and ``geometric`` are reduced into (-pi, pi]; they are the
    total and geometric phases only when the caller has established that the
    evolution is cyclic.
    """
    from .errors import InvalidU0

    if traj.raw_mode or not so21.is_unit_timelike(traj.e0):
        raise NonUnitInitialVector("phases need a trajectory started from a unit timelike upper e0")
    if not u0 >= 0.5 - 1e-12:
        raise InvalidU0(f"u0 = {u0} is below the bound 1/2")
    a1 = float(traj.A1[tau_index])
    a2 = float(traj.A2[tau_index])
    alpha = a1 - a2
    dyn = -u0 * a2
    total = so21.reduce_angle(u0 * alpha)
    geo = so21.reduce_angle(total - dyn)
    return PhaseReport(alpha, -a1, dyn, total, geo, float(u0))


def _b_phi(phi: float) -> np.ndarray:
    return so21.vec(-math.sin(phi), math.cos(phi), 0.0)


def u_decomposition(traj: Trajectory, t_index: int) -> tuple[float, float, float, float, float]:
    """``(xi_t, phi_t, alpha_t, xi_0, phi_0)`` of
    ``U(t) = Q(xi_t, phi_t) exp(i alpha_t K3) Q^dagger(xi_0, phi_0)``.

    ``phi`` values come from :func:`so21.vec_to_param`; at the apex the azimuth
    is irrelevant (set to 0).
    """
    p0 = so21.vec_to_param(traj.e0)
    e = traj.e[t_index]
    e = e / math.sqrt(so21.msq(e)) if so21.msq(e) > 0 else e
    pt = so21.vec_to_param(e, tol=1e-6)
    return pt.xi, pt.phi, traj.alpha(t_index), p0.xi, p0.phi


def decomposition_quad(xi_t: float, phi_t: float, alpha_t: float, xi_0: float, phi_0: float) -> np.ndarray:
    """Mean propagator induced by the three-factor form of ``U(t)``."""
    z = so21.vec(0.0, 0.0, 1.0)
    return (
        so21.quad_rep(xi_t, _b_phi(phi_t))
        @ so21.quad_rep(-2.0 * alpha_t, z)
        @ so21.quad_rep(-xi_0, _b_phi(phi_0))
    )


def family_grid(profile: Profile, phi_max: float, nodes: int) -> np.ndarray:
    """Time grid whose nodes are equally spaced in the family phase."""
    if profile.spec is None:
        raise InvalidGrid("family_grid needs a family profile")
    phis = np.linspace(0.0, phi_max, nodes)
    t = np.asarray(profile.spec.phase.time_at(phis), dtype=float)
    t[0] = 0.0
    return t
