"""Command-line entry point: ``chiralwell <subcommand> [options]``.

Every subcommand validates its whole configuration before computing, writes
machine-readable output under ``--out`` and prints a short summary. Exit
status is 0 on success, 2 for configuration errors and 3 for numerical
failures.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from . import io
from .basin import basin_map, default_grid
from .collisions import CollisionProcess, ensemble_run, simulate_with_collisions
from .integrate import IntegrationConfig, IntegrationError, integrate_phase
from .model import ModelError, ModelParams, PhaseState, asymmetric_fixed_point, field, wrap_angle
from .separatrix import region_labels, separatrix_curve
from .stationary import bifurcation_point, bifurcation_scan, relaxation_time, stationary_points

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

SHORTCUTS = {
    "mu": "model.mu",
    "zeta": "model.zeta",
    "omega": "model.omega",
    "z0": "initial.z",
    "theta0": "initial.theta",
    "t_end": "integration.t_end_tau",
    "rate": "collisions.rate",
    "n": "ensemble.n",
}


def _integration(cfg, params: ModelParams, t_end_tau: float, sample_tau: float) -> IntegrationConfig:
    ic = cfg["integration"]
    step = ic["step_tau"] * params.tau if ic["step_tau"] is not None else None
    return IntegrationConfig(
        t_end=t_end_tau * params.tau,
        method=ic["method"],
        rtol=ic["rtol"],
        atol=ic["atol"],
        step=step,
        sample_interval=sample_tau * params.tau,
        pole_policy=ic["pole_policy"],
    )


def _process(cfg, params: ModelParams) -> CollisionProcess:
    c = cfg["collisions"]
    rate = c["rate"]
    if c["rate_per_relaxation"] is not None:
        rate = c["rate_per_relaxation"] / relaxation_time(params)
    return CollisionProcess(
        rate=rate,
        distribution=c["distribution"],
        delta_theta=c["delta_theta"],
        concentration=c["concentration"],
        seed=cfg["seed"],
        dead_time=c["dead_time_tau"] * params.tau,
    )


def _meta(cfg, command: str) -> dict:
    return {"command": command, "config": cfg}


def _nearest(state: PhaseState, points):
    def dist(p):
        return math.hypot(state.z - p.state.z, float(wrap_angle(state.theta - p.state.theta)))

    best = min(points, key=dist)
    return best, dist(best)


def _cplx(values, prefix):
    values = np.asarray(values)
    return {f"{prefix}_re": values.real, f"{prefix}_im": values.imag}


def cmd_simulate(cfg, out: Path):
    params = cfgmod.model_params(cfg)
    ic = cfg["integration"]
    icfg = _integration(cfg, params, ic["t_end_tau"], ic["sample_interval_tau"])
    initial = cfgmod.initial_state(cfg)
    process = _process(cfg, params) if _has_collisions(cfg) else None
    if process is not None and process.rate > 0:
        traj = simulate_with_collisions(initial, params, process, icfg.t_end, icfg)
    else:
        traj = integrate_phase(initial, params, icfg)
    meta = _meta(cfg, "simulate")
    fmt = cfg["format"]
    io.write(out / "trajectory", {
        "t": traj.t,
        "t_tau": traj.t_tau,
        "z": traj.z,
        "theta": traj.theta,
        "energy": traj.energy,
        "charge": traj.charge,
        "region": traj.region,
    }, meta, fmt)
    ev_t = np.array([e.time for e in traj.events])
    io.write(out / "events", {
        "t": ev_t,
        "t_tau": ev_t / params.tau,
        "delta_theta": [e.delta_theta for e in traj.events],
    }, meta, fmt)
    final = traj.final
    point, d = _nearest(final, stationary_points(params))
    print(f"final state at t = {traj.t[-1] / params.tau:g} tau: z = {final.z:.6f}, theta = {final.theta:.6f}")
    print(f"nearest stationary point: {point.kind.value} ({point.state.z:.6f}, {point.state.theta:.6f}),"
          f" distance {d:.3g}")
    print(f"region: {traj.region[-1]}; collisions: {len(traj.events)}; z sign changes: {traj.crossings}")


def _has_collisions(cfg) -> bool:
    c = cfg["collisions"]
    return c["rate"] > 0 or bool(c["rate_per_relaxation"])


def _stationary_columns(points):
    eig = np.array([p.eigenvalues for p in points], dtype=complex).reshape(-1, 2)
    return {
        "kind": [p.kind.value for p in points],
        "z": [p.state.z for p in points],
        "theta": [p.state.theta for p in points],
        "stability": [p.stability.value for p in points],
        **_cplx(eig[:, 0], "lambda1"),
        **_cplx(eig[:, 1], "lambda2"),
        "residual": [p.residual for p in points],
    }


def cmd_stationary(cfg, out: Path):
    params = cfgmod.model_params(cfg)
    points = stationary_points(params)
    io.write(out / "stationary", _stationary_columns(points), _meta(cfg, "stationary"), cfg["format"])
    print(f"{len(points)} stationary points at mu = {params.mu:g}, zeta = {params.zeta:g}")
    for p in points:
        l1, l2 = p.eigenvalues
        print(f"  {p.kind.value:17s} z = {p.state.z: .6f}  theta = {p.state.theta: .6f}"
              f"  {p.stability.value:15s} eigenvalues {complex(l1):.4g}, {complex(l2):.4g}")


def cmd_portrait(cfg, out: Path):
    params = cfgmod.model_params(cfg)
    pc = cfg["portrait"]
    fmt = cfg["format"]
    meta = _meta(cfg, "portrait")
    zs = np.linspace(-1.0 + 1e-3, 1.0 - 1e-3, int(pc["nz"]))
    ths = np.linspace(-math.pi, math.pi, int(pc["ntheta"]))
    Z, TH = np.meshgrid(zs, ths, indexing="ij")
    dz, dth = field(Z, TH, params)
    io.write(out / "field", {
        "z": Z.ravel(), "theta": TH.ravel(), "dz_dt": dz.ravel(), "dtheta_dt": dth.ravel(),
    }, meta, fmt)
    io.write(out / "regions", {
        "z": Z.ravel(), "theta": TH.ravel(), "region": region_labels(Z, TH, params.mu).ravel(),
    }, meta, fmt)
    points = stationary_points(params)
    io.write(out / "stationary", _stationary_columns(points), meta, fmt)
    if params.mu > 1.0:
        curve = separatrix_curve(params.mu, int(pc["separatrix_resolution"]))
        io.write(out / "separatrix", {
            "theta": np.concatenate([curve.theta, curve.theta]),
            "z": np.concatenate([curve.z, -curve.z]),
            "branch": [1] * len(curve.z) + [-1] * len(curve.z),
        }, meta, fmt)
        z3, _ = asymmetric_fixed_point(params.mu, params.zeta)
        print(f"separatrix: max |z| = {curve.max_abs_z():.6f}; chiral point z3 = {z3:.6f}")
    else:
        print(f"note: mu = {params.mu:g} <= 1, the conservative flow has no separatrix; none written")
    print(f"wrote field and region samples on a {len(zs)} x {len(ths)} grid and {len(points)} stationary points")


def cmd_bifurcate(cfg, out: Path):
    params = cfgmod.model_params(cfg)
    bc = cfg["bifurcate"]
    table = bifurcation_scan((bc["mu_min"], bc["mu_max"]), params.zeta, int(bc["resolution"]), params.omega)
    onset = bifurcation_point(params.zeta)
    meta = {**_meta(cfg, "bifurcate"), "onset_mu": onset}
    io.write(out / "branches", {
        "mu": table.mu,
        "z3": table.z3,
        "theta3": table.theta3,
        "even_stability": [s.value for s in table.even_stability],
        **_cplx(table.even_eigenvalues[:, 0], "even_lambda1"),
        **_cplx(table.even_eigenvalues[:, 1], "even_lambda2"),
        **_cplx(table.chiral_eigenvalues[:, 0], "chiral_lambda1"),
        **_cplx(table.chiral_eigenvalues[:, 1], "chiral_lambda2"),
    }, meta, cfg["format"])
    first = table.mu[table.has_branch]
    print(f"chiral branch onset at mu = {onset:.10f}")
    if len(first):
        print(f"first scanned mu with a chiral branch: {first[0]:g} of [{bc['mu_min']:g}, {bc['mu_max']:g}]")


def cmd_basin(cfg, out: Path):
    params = cfgmod.model_params(cfg)
    bc = cfg["basin"]
    grid = default_grid(int(bc["nz"]), int(bc["ntheta"]))
    budget = bc["budget_tau"] * params.tau if bc["budget_tau"] is not None else None
    bm = basin_map(params, grid, budget=budget, tol=bc["tol"])
    Z, TH = np.meshgrid(bm.z, bm.theta, indexing="ij")
    io.write(out / "basin", {"z": Z.ravel(), "theta": TH.ravel(), "label": bm.labels.ravel()},
             _meta(cfg, "basin"), cfg["format"])
    print(f"basin map {len(bm.z)} x {len(bm.theta)}: plus {bm.fraction(1):.4f},"
          f" minus {bm.fraction(-1):.4f}, undecided {bm.fraction(0):.4f}")


def cmd_ensemble(cfg, out: Path):
    params = cfgmod.model_params(cfg)
    ec = cfg["ensemble"]
    process = _process(cfg, params)
    if ec["start"] == "attractor":
        if not params.mu > 1.0:
            raise cfgmod.ConfigError("ensemble.start: 'attractor' needs model.mu > 1")
        z3, th3 = asymmetric_fixed_point(params.mu, params.zeta)
        initial = PhaseState(z3, th3)
    else:
        initial = cfgmod.initial_state(cfg)
    t_end = ec["t_end_tau"] * params.tau
    icfg = IntegrationConfig(t_end=t_end, rtol=max(cfg["integration"]["rtol"], 1e-9),
                             atol=max(cfg["integration"]["atol"], 1e-9),
                             pole_policy=cfg["integration"]["pole_policy"])
    res = ensemble_run(int(ec["n"]), initial, params, process, t_end, icfg,
                       sample_interval=ec["sample_interval_tau"] * params.tau)
    meta = {
        **_meta(cfg, "ensemble"),
        "rate": process.rate,
        "survival_fraction": res.survival_fraction,
        "survival_se": res.survival_se,
        "total_events": res.total_events,
    }
    io.write(out / "ensemble", {
        "t": res.t,
        "t_tau": res.t / params.tau,
        "mean_chirality": res.mean_chirality,
        "mean_chirality_se": res.mean_chirality_se,
    }, meta, cfg["format"])
    io.write(out / "members", {
        "seed": [s for s, _ in res.seeds],
        "member": [i for _, i in res.seeds],
        "crossings": res.crossings,
        "events": res.n_events,
    }, meta, cfg["format"])
    print(f"{res.n_molecules} molecules, {res.total_events} collisions, rate {process.rate:.6g}")
    print(f"final mean chirality {res.mean_chirality[-1]: .4f} +/- {res.mean_chirality_se[-1]:.4f}")
    print(f"survival fraction {res.survival_fraction:.4f} +/- {res.survival_se:.4f}")


COMMANDS = {
    "simulate": cmd_simulate,
    "stationary": cmd_stationary,
    "portrait": cmd_portrait,
    "bifurcate": cmd_bifurcate,
    "basin": cmd_basin,
    "ensemble": cmd_ensemble,
}

HELP = {
    "simulate": "integrate one trajectory, optionally with collisions",
    "stationary": "list stationary points with stability",
    "portrait": "export field, separatrix, regions and stationary points",
    "bifurcate": "scan the chiral branch against mu",
    "basin": "label a grid by the chiral attractor reached",
    "ensemble": "collision ensemble: mean chirality and survival",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chiralwell", description="Chiral two-level molecule in a double well.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func in COMMANDS.items():
        p = sub.add_parser(name, help=HELP[name])
        p.add_argument("--config", type=Path, help="JSON run configuration")
        p.add_argument("--seed", type=int, help="master seed")
        p.add_argument("--out", type=Path, default=Path("."), help="output directory")
        p.add_argument("--format", choices=("table", "records"), help="CSV table or JSON lines")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override any dotted config key, e.g. model.mu=4.5")
        p.add_argument("--mu", type=float)
        p.add_argument("--zeta", type=float)
        p.add_argument("--omega", type=float)
        p.add_argument("--z0", type=float)
        p.add_argument("--theta0", type=float)
        p.add_argument("--t-end", dest="t_end", type=float, help="duration in beating periods")
        p.add_argument("--rate", type=float, help="collision rate per unit time")
        p.add_argument("--n", type=int, help="ensemble size")
    return parser


def _overrides(args):
    pairs = []
    for item in args.set:
        if "=" not in item:
            raise cfgmod.ConfigError(f"--set {item!r}: expected KEY=VALUE")
        k, v = item.split("=", 1)
        pairs.append((k.strip(), v.strip()))
    for flag, key in SHORTCUTS.items():
        value = getattr(args, flag)
        if value is not None:
            pairs.append((key, value))
    if args.seed is not None:
        pairs.append(("seed", args.seed))
    if args.format is not None:
        pairs.append(("format", args.format))
    return pairs


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = cfgmod.load(args.config, _overrides(args))
        args.out.mkdir(parents=True, exist_ok=True)
        COMMANDS[args.command](cfg, args.out)
    except cfgmod.ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ModelError, IntegrationError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
