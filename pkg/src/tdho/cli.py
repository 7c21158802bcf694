"""Command-line front end.

Commands: ``evolve``, ``cyclic-scan``, ``regime-scan``, ``phases``, ``verify``
and ``orbit``.  Settings come from an optional JSON config (``--config``);
every flag overrides the matching config field.  Exit codes: 0 ok, 2 bad
configuration, 3 numerical failure; the failing quantity is named on stderr.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import cyclic, model, oracles, propagate, scan, so21, wavepacket
from .errors import ConfigError, InvalidGrid, NumericalError

SCHEMA = 1
VERIFY_TOL = 1e-8


@dataclasses.dataclass
class RunConfig:
    profile: str | dict | None = None  # CSV path, "B:n1=..,n3=..,lam=.." or a JSON object
    tmax: float | None = None
    nodes: int = 201
    e0_xi: float = 0.0
    e0_phi: float = 0.0
    e0: list | None = None  # explicit vector, overrides (xi, phi)
    u0: float = 0.5
    xbar: float = 0.0
    pbar: float = 0.0
    out: str | None = None
    summary: str | None = None
    tol: float = 1e-9
    precision: str = "auto"
    step_factor: float = 1.0
    phi_grid: bool = True  # family profiles: nodes equally spaced in phase

    @property
    def e0_vec(self) -> np.ndarray:
        if self.e0 is not None:
            v = np.asarray(self.e0, dtype=float)
            if v.shape != (3,):
                raise ConfigError("e0 must have three components")
            return so21.check_unit_timelike(v)
        if self.e0_xi < 0:
            raise ConfigError("e0-xi must be >= 0")
        return so21.param_to_vec((self.e0_xi, self.e0_phi))


_SPEC_KEYS = {"family", "n1", "n2", "n3", "lam", "lambda", "rate"}


def parse_family(text: str | dict) -> model.FamilySpec:
    """``"B:n1=0.75,n3=1.25,lam=0.2"`` or a dict with the same keys."""
    if isinstance(text, dict):
        d = dict(text)
    else:
        fam, _, rest = str(text).partition(":")
        d = {"family": fam}
        for item in filter(None, (s.strip() for s in rest.split(","))):
            k, sep, v = item.partition("=")
            if not sep:
                raise ConfigError(f"profile item {item!r} is not key=value")
            d[k.strip()] = v.strip()
    unknown = set(d) - _SPEC_KEYS
    if unknown:
        raise ConfigError(f"unknown profile keys {sorted(unknown)}")
    try:
        vals = {k: float(v) for k, v in d.items() if k != "family"}
    except (TypeError, ValueError):
        raise ConfigError(f"non-numeric profile parameter in {d}") from None
    lam = vals.get("lam", vals.get("lambda", 1.0))
    rate = vals.get("rate", 1.0)
    if not rate > 0:
        raise ConfigError("phase rate must be positive")
    return model.FamilySpec(
        str(d.get("family", "")), vals.get("n1", 0.0), vals.get("n3", 0.0), lam, model.LinearPhase(rate), vals.get("n2", 0.0)
    )


def build_profile(cfg: RunConfig) -> model.Profile:
    p = cfg.profile
    if p is None:
        raise ConfigError("no profile given (--profile)")
    if isinstance(p, str) and (p.endswith(".csv") or Path(p).is_file()):
        prof = model.read_profile_csv(p)
        if cfg.tmax is not None and cfg.tmax > prof.t_max:
            raise InvalidGrid(f"tmax {cfg.tmax} is beyond the tabulated range {prof.t_max}")
        return prof
    spec = parse_family(p)
    if cfg.tmax is None or not cfg.tmax > 0:
        raise ConfigError("tmax must be positive")
    return model.family_profile(spec, cfg.tmax)


def build_grid(cfg: RunConfig, prof: model.Profile) -> np.ndarray:
    if cfg.nodes < 2:
        raise InvalidGrid("nodes must be >= 2")
    t_max = prof.t_max if cfg.tmax is None else cfg.tmax
    if prof.spec is not None and cfg.phi_grid:
        phi_max = float(prof.spec.phase(t_max))
        return propagate.family_grid(prof, phi_max, cfg.nodes)
    return np.linspace(0.0, t_max, cfg.nodes)


def run(cfg: RunConfig, prof=None, grid=None, e0=None) -> propagate.Trajectory:
    prof = prof if prof is not None else build_profile(cfg)
    grid = grid if grid is not None else build_grid(cfg, prof)
    e0 = cfg.e0_vec if e0 is None else e0
    prec = None if cfg.precision == "double" else (cfg.precision if cfg.precision == "auto" else int(cfg.precision))
    policy = propagate.StepPolicy(step_factor=cfg.step_factor)
    return propagate.integrate(prof, e0, grid, policy=policy, drift_tol=cfg.tol, group_tol=cfg.tol, precision=prec)


def _floats(a) -> list:
    return [float(x) for x in np.ravel(a)]


def _write_json(obj, path) -> str:
    text = json.dumps(obj, indent=1, sort_keys=True)
    if path:
        Path(path).write_text(text + "\n", encoding="utf-8")
    else:
        sys.stdout.write(text + "\n")
    return text


# --- commands ----------------------------------------------------------------------


def cmd_evolve(cfg: RunConfig) -> dict:
    traj = run(cfg)
    state = wavepacket.squeezed_state(cfg.u0, traj.e0, cfg.xbar, cfg.pbar)
    states = wavepacket.evolve_along(state, traj.E, traj.Eq_mat)
    usq = np.array([s.u_sq for s in states])
    rep = propagate.phases(traj, cfg.u0)
    summary = {
        "schema": SCHEMA,
        "drift_max": float(np.max(traj.drift)),
        "group_violation_max": float(np.max(traj.group_defect)),
        "trace_defect_max": float(np.max(traj.trace_defect)),
        "u_sq_drift_max": float(np.max(np.abs(usq - usq[0])) / max(1.0, float(np.max(np.abs(usq))))),
        "final_e": _floats(traj.e[-1]),
        "final_phases": rep.as_dict(),
        "nodes": len(traj),
        "substeps": traj.substeps,
        "precision_bits": traj.precision_bits,
    }
    if cfg.out:
        traj.to_csv(cfg.out)
        wavepacket.write_moments_csv(str(cfg.out) + ".moments.csv", traj.grid, states)
    summary_path = cfg.summary or (str(cfg.out) + ".json" if cfg.out else None)
    _write_json(summary, summary_path)
    return summary


def scan_verdicts(cfg: RunConfig, prof=None, n_tau: int | None = None):
    """Verdict at every grid node after the first."""
    prof = prof if prof is not None else build_profile(cfg)
    grid = build_grid(dataclasses.replace(cfg, nodes=(n_tau + 1) if n_tau else cfg.nodes), prof)
    traj = run(cfg, prof, grid)
    out = []
    for k in range(1, len(grid)):

        def alpha_fn(e, k=k):
            return run(cfg, prof, grid[: k + 1], e).alpha()

        out.append((float(grid[k]), cyclic.verdict(traj.E[k], traj.Eq_mat[k], alpha_fn)))
    return out


def cmd_cyclic_scan(cfg: RunConfig, n_tau: int | None) -> dict:
    recs = scan_verdicts(cfg, n_tau=n_tau)
    obj = {"schema": SCHEMA, "verdicts": [v.as_dict(t) for t, v in recs]}
    _write_json(obj, cfg.out)
    return obj


def cmd_regime_scan(spec: model.FamilySpec, lams, out) -> list:
    fits = scan.growth_scan(spec, lams)
    fh = open(out, "w", newline="", encoding="utf-8") if out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["lambda", "regime", "Lambda", "growth_exponent", "expected", "fit"])
        for f in fits:
            w.writerow([repr(f.lam), f.kind.value, repr(float(f.Lambda)), repr(float(f.slope)), repr(float(f.expected)), f.fit])
    finally:
        if out:
            fh.close()
    bad = [f for f in fits if not f.ok]
    if bad:
        f = bad[0]
        raise NumericalError(
            f"growth_exponent {f.slope:.4g} at lambda={f.lam:g} disagrees with {f.kind.value} (expected {f.expected:.4g})"
        )
    return fits


def cmd_phases(cfg: RunConfig) -> dict:
    prof = build_profile(cfg)
    traj = run(cfg, prof)
    grid = traj.grid
    v = cyclic.verdict(traj.E[-1], traj.Eq_mat[-1], lambda e: run(cfg, prof, grid, e).alpha())
    cyclic_here = np.max(np.abs(traj.e[-1] - traj.e0)) <= 1e-7 * max(1.0, float(np.max(np.abs(traj.e0))))
    rep = propagate.phases(traj, cfg.u0)
    obj = {
        "schema": SCHEMA,
        "tau": float(grid[-1]),
        "verdict": v.as_dict(float(grid[-1])),
        "e_returns": bool(cyclic_here),
        "phases": rep.as_dict(),
    }
    if v.kind is cyclic.CyclicKind.ALL_STATES and v.N is not None:
        obj["extra_term_geometric"] = cyclic.general_geometric_phase(cfg.u0, rep.hannay, cyclic.Even(v.N))
    elif v.kind is cyclic.CyclicKind.ALL_DEFINITE_PARITY and v.N is not None:
        obj["extra_term_geometric"] = {
            "even": cyclic.general_geometric_phase(cfg.u0, rep.hannay, cyclic.Odd(v.N, 1)),
            "odd": cyclic.general_geometric_phase(cfg.u0, rep.hannay, cyclic.Odd(v.N, -1)),
        }
    _write_json(obj, cfg.out)
    return obj


def verify_report(spec: model.FamilySpec, phi_max: float, nodes: int = 201, step_factor: float = 1.0, e0=None) -> dict:
    """Max-norm discrepancies of a run against the closed forms (scaled by ``max(1, |ref|)``)."""
    prof = model.family_profile(spec, spec.phase.time_at(phi_max))
    grid = propagate.family_grid(prof, phi_max, nodes)
    e0 = so21.vec(0.0, 0.0, 1.0) if e0 is None else e0
    traj = propagate.integrate(prof, e0, grid, policy=propagate.StepPolicy(step_factor=step_factor), check=False)
    phis = np.asarray(spec.phase(grid), dtype=float)
    label = model.regime(spec)
    dE = dQ = dEta = dDec = 0.0
    for k, phi in enumerate(phis):
        ref_E = oracles.oracle_E(spec, phi, label)
        ref_Q = oracles.oracle_Eq(spec, phi, label)
        dE = max(dE, float(np.max(np.abs(traj.E[k] - ref_E))) / max(1.0, float(np.max(np.abs(ref_E)))))
        dQ = max(dQ, float(np.max(np.abs(traj.Eq_mat[k] - ref_Q))) / max(1.0, float(np.max(np.abs(ref_Q)))))
        if k and abs(math.sin(phi)) > 1e-3:
            _, sq = oracles.oracle_eta(spec, phi, label)
            fv = cyclic.fixed_vector(traj.E[k], accept_tol=1e-3)
            if abs(sq) > 1e-6 and abs(fv.eta_sq) > 1e-6:
                # the closed form is unnormalized, so only the sign is comparable
                dEta = max(dEta, 0.0 if np.sign(sq) == np.sign(fv.eta_sq) else 1.0)
        dec = propagate.decomposition_quad(*propagate.u_decomposition(traj, k))
        dDec = max(dDec, float(np.max(np.abs(dec - traj.Eq_mat[k]))) / max(1.0, float(np.max(np.abs(dec))) ** 2))
    return {
        "schema": SCHEMA,
        "family": spec.family,
        "branch": label.branch,
        "regime": label.kind.value,
        "phi_max": float(phi_max),
        "E": dE,
        "Eq": dQ,
        "eta_sq_sign": dEta,
        "phases": dDec,
        "group_defect": float(np.max(traj.group_defect)),
        "trace_defect": float(np.max(traj.trace_defect)),
    }


def cmd_verify(spec, phi_max, nodes, step_factor, tol, out) -> dict:
    rep = verify_report(spec, phi_max, nodes, step_factor)
    _write_json(rep, out)
    for key in ("E", "Eq", "eta_sq_sign", "phases", "group_defect", "trace_defect"):
        if not rep[key] <= tol:
            raise NumericalError(f"{key} discrepancy {rep[key]:.3e} exceeds {tol:.1e}")
    return rep


def cmd_orbit(cfg: RunConfig, action: float, samples: int) -> float:
    coeffs = wavepacket.classical_ellipse(cfg.e0_vec, action)
    theta = np.linspace(0.0, 2 * math.pi, samples, endpoint=False)
    pts = wavepacket.sample_orbit(coeffs, theta)
    fh = open(cfg.out, "w", newline="", encoding="utf-8") if cfg.out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["theta", "q", "p"])
        for th, (q, p) in zip(theta, pts):
            w.writerow([repr(float(th)), repr(float(q)), repr(float(p))])
    finally:
        if cfg.out:
            fh.close()
    return wavepacket.shoelace_area(pts)


# --- argument handling ---------------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override its fields")
    p.add_argument("--profile", help="CSV file (t,omega,n1,n2,n3) or family spec like B:n1=0.75,n3=1.25,lam=0.2")
    p.add_argument("--tmax", type=float)
    p.add_argument("--nodes", type=int)
    p.add_argument("--e0-xi", dest="e0_xi", type=float)
    p.add_argument("--e0-phi", dest="e0_phi", type=float)
    p.add_argument("--u0", type=float)
    p.add_argument("--out")
    p.add_argument("--tol", type=float)
    p.add_argument("--precision", help="auto, double or mantissa bits")
    p.add_argument("--step-factor", dest="step_factor", type=float)


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tdho", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("evolve", help="integrate and write trajectory CSV + summary JSON")
    _common(p)
    p.add_argument("--summary")
    p.add_argument("--xbar", type=float)
    p.add_argument("--pbar", type=float)
    p = sub.add_parser("cyclic-scan", help="cyclic verdict at every tau node")
    _common(p)
    p.add_argument("--taus", type=int, help="number of tau values (default nodes - 1)")
    p = sub.add_parser("regime-scan", help="regime label and measured growth over a lambda range")
    p.add_argument("--profile", required=True, help="family spec; its lam is ignored")
    p.add_argument("--lam-min", dest="lam_min", type=float, default=0.0)
    p.add_argument("--lam-max", dest="lam_max", type=float, default=3.0)
    p.add_argument("--steps", type=int, default=301)
    p.add_argument("--out")
    p = sub.add_parser("phases", help="phase functionals and verdict at tmax")
    _common(p)
    p = sub.add_parser("verify", help="compare a family run with the closed forms")
    p.add_argument("--profile", required=True)
    p.add_argument("--phi-max", dest="phi_max", type=float, default=4 * math.pi)
    p.add_argument("--nodes", type=int, default=201)
    p.add_argument("--step-factor", dest="step_factor", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=VERIFY_TOL)
    p.add_argument("--out")
    p = sub.add_parser("orbit", help="sample the classical action ellipse")
    _common(p)
    p.add_argument("--action", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=400)
    return ap


def load_config(args) -> RunConfig:
    data = {}
    if getattr(args, "config", None):
        try:
            data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"config {args.config}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
    names = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(data) - names - {"schema"}
    if unknown:
        raise ConfigError(f"unknown config fields {sorted(unknown)}")
    data.pop("schema", None)
    for name in names:
        v = getattr(args, name, None)
        if v is not None:
            data[name] = v
    return RunConfig(**data)


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        if args.command == "regime-scan":
            if args.steps < 2:
                raise ConfigError("steps must be >= 2")
            cmd_regime_scan(parse_family(args.profile), np.linspace(args.lam_min, args.lam_max, args.steps), args.out)
        elif args.command == "verify":
            spec = parse_family(args.profile)
            cmd_verify(spec, args.phi_max, args.nodes, args.step_factor, args.tol, args.out)
        else:
            cfg = load_config(args)
            if args.command == "evolve":
                cmd_evolve(cfg)
            elif args.command == "cyclic-scan":
                cmd_cyclic_scan(cfg, args.taus)
            elif args.command == "phases":
                cmd_phases(cfg)
            elif args.command == "orbit":
                area = cmd_orbit(cfg, args.action, args.samples)
                print(f"area {area:.12g}", file=sys.stderr)
    except ConfigError as exc:
        print(f"config error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
