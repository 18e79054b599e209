"""Command line entry point.

``segregation <command> --config FILE [--out DIR]``.  Exit status is 0 on
success, 2 for a bad config and 3 when a computation fails numerically.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from . import asymptotic as asy
from . import config as cfgmod
from . import diagnostics as dg
from . import energy
from . import steady_kr as kr
from . import transport as tr
from .errors import ConfigError, InputError, NumericalFailure

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

log = logging.getLogger("segregation")


def _fmt(x):
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _write_report(out, cfg, lines):
    with open(out / "report.txt", "w") as fh:
        fh.write(f"command = {cfg.mode}\n")
        fh.write("# effective settings\n")
        fh.write("\n".join(cfg.describe()) + "\n")
        fh.write("# results\n")
        fh.write("\n".join(lines) + "\n")


def snapshot_rows(rho1, rho2):
    w, zeta = tr.zeta_transform(rho1, rho2)
    return zip(rho1.x, rho1.values, rho2.values, w.values, zeta)


SNAPSHOT_HEADER = ["x", "rho1", "rho2", "w", "zeta"]


# -- commands -------------------------------------------------------------------


def cmd_simulate(cfg, out):
    traj = tr.simulate(cfg)
    params = traj.params
    rows = []
    for k, state in enumerate(traj.snapshots):
        grid = tr.snapshot_grid(state, n=cfg.snapshot_cells + 1)
        rho1, rho2 = tr.reconstruct_pair(state, grid)
        _write_csv(out / f"snapshot_{k:04d}.csv", SNAPSHOT_HEADER, snapshot_rows(rho1, rho2))
        e = energy.discrete_energy(state, cfg.triple, cfg.eps, params)
        rows.append(dg.metrics(rho1, rho2, cfg.triple, cfg.eps, state.t, e))
    _write_csv(out / "summary.csv", dg.MetricsRow.header(), [r.values() for r in rows])
    first, last = rows[0], rows[-1]
    e = np.asarray(traj.energies)
    increases = int(np.sum(np.diff(e) > 1e-10 * np.maximum(1.0, np.abs(e[:-1]))))
    lines = [
        f"bandwidth = {_fmt(params.h)}",
        f"steps = {len(traj.dts)}",
        f"snapshots = {len(rows)}",
        f"energy_initial = {_fmt(e[0])}",
        f"energy_final = {_fmt(e[-1])}",
        f"energy_increases = {increases}",
        f"ordered_throughout = {all(traj.ordered)}",
        f"mass_drift = {_fmt(max(abs(last.mass1 - first.mass1), abs(last.mass2 - first.mass2)))}",
        f"overlap_initial = {_fmt(first.overlap)}",
        f"overlap_final = {_fmt(last.overlap)}",
        f"variance_initial = {_fmt(first.variance)}",
        f"variance_final = {_fmt(last.variance)}",
        f"zeta_mass_fraction_final = {_fmt(last.zeta_mass_fraction)}",
        f"n_components_w_final = {last.n_components_w}",
        f"verdict = {dg.verdict(last)}",
    ]
    return lines


def cmd_coercivity(cfg, out):
    v = energy.coercivity_check(cfg.triple, cfg.eps, cfg.xi_max, cfg.n_xi)
    line = v.csv_line()
    print(line)
    return [f"coercivity = {line}", f"verdict = {v.label}"]


def _kr_rows(profile):
    return zip(profile.rho1.x, profile.rho1.values, profile.rho2.values, profile.w.values)


def cmd_steady_kr(cfg, out):
    grid = kr.OperatorGrid(cfg.L1, cfg.L2, cfg.n1, cfg.n2)
    pre = kr.check_preconditions(cfg.triple, cfg.L1, cfg.L2, grid)
    pair = kr.principal_eigenpair(cfg.triple, grid, cfg.tol, cfg.max_iter)
    profile = kr.reconstruct_profiles(pair.vec, grid, cfg.mass_total, pair.eps)
    r1, r2 = kr.stationarity_residual(profile, cfg.triple)
    _write_csv(out / "profile.csv", ["x", "rho1", "rho2", "w"], _kr_rows(profile))
    print(f"eps,{_fmt(pair.eps)}")
    return [
        f"preconditions = {bool(pre)}",
        f"eps = {_fmt(pair.eps)}",
        f"iterations = {pair.iterations}",
        f"mass1 = {_fmt(profile.mass1)}",
        f"mass2 = {_fmt(profile.mass2)}",
        f"stationarity_residual1 = {_fmt(r1)}",
        f"stationarity_residual2 = {_fmt(r2)}",
    ]


def cmd_eps_map(cfg, out):
    rows = kr.eps_map(cfg.triple, cfg.L2_values, cfg.L1_fraction, cfg.n1, cfg.n2, cfg.tol)
    _write_csv(out / "eps_map.csv", ["L1", "L2", "eps"], [(r.L1, r.L2, r.eps) for r in rows])
    for r in rows:
        print(f"{_fmt(r.L1)},{_fmt(r.L2)},{_fmt(r.eps)}")
    return [f"eps({_fmt(r.L1)},{_fmt(r.L2)}) = {_fmt(r.eps)}" for r in rows] + [
        f"monotone_increasing = {kr.monotone_increasing(rows)}"
    ]


def cmd_steady_asymptotic(cfg, out):
    sol = asy.solve(cfg.triple, cfg.z1, cfg.eps)
    scale = cfg.mass_total
    crit = asy.criticality_check(sol, cfg.triple, cfg.eps)
    rows = zip(sol.rho1.x, scale * sol.rho1.values, scale * sol.rho2.values, scale * sol.w.values)
    _write_csv(out / "profile.csv", ["x", "rho1", "rho2", "w"], rows)
    print("C1,C2,mu,lambda,delta")
    print(",".join(_fmt(v) for v in (sol.C1, sol.C2, sol.mu, sol.lam, sol.delta)))
    res = sol.residuals()
    return [
        f"C1 = {_fmt(sol.C1)}",
        f"C2 = {_fmt(sol.C2)}",
        f"mu = {_fmt(sol.mu)}",
        f"lambda = {_fmt(sol.lam)}",
        f"delta = {_fmt(sol.delta)}",
        f"interface = {_fmt(sol.interface)}",
        f"outer_edge = {_fmt(sol.outer_edge)}",
        f"cubic_residuals = {_fmt(res[0])},{_fmt(res[1])}",
        f"criticality_relative = {_fmt(crit.relative1)},{_fmt(crit.relative2)}",
        f"criticality_ok = {crit.ok}",
    ]


def _l1(a, b, dx):
    return float(np.trapezoid(np.abs(a - b), dx=dx))


def cmd_compare(cfg, out):
    """Transport (long time), asymptotic and KR w-profiles on one grid."""
    traj = tr.integrate(
        tr.initial_state(cfg), cfg.triple, cfg.eps, cfg.T_long, dt=cfg.dt,
        params=tr.ReconstructionParams(cfg.bandwidth) if cfg.bandwidth else None,
        record_energy=False,
    )
    final = traj.final
    sol = asy.solve(cfg.triple, cfg.z1, cfg.eps)
    kgrid = kr.OperatorGrid(sol.interface, sol.outer_edge, cfg.n1, cfg.n2)
    pair = kr.principal_eigenpair(cfg.triple, kgrid, cfg.tol, cfg.max_iter)
    kprof = kr.reconstruct_profiles(pair.vec, kgrid, cfg.mass_total, pair.eps)

    e_u, e_v = tr.block_edges(final.u), tr.block_edges(final.v)
    half = 1.1 * max(abs(e_u[0]), abs(e_u[-1]), abs(e_v[0]), abs(e_v[-1]), sol.outer_edge)
    n = cfg.compare_cells + 1
    dx = 2 * half / (n - 1)
    grid = (-half, dx, n)
    x = -half + dx * np.arange(n)
    w_tr = sum(r.values for r in tr.reconstruct_pair(final, grid))
    w_asy = cfg.mass_total * asy.build_profiles(sol.C1, sol.C2, sol.z1, sol.mu, sol.lam, cfg.eps, grid).w.values
    w_kr = np.interp(x, kprof.rho1.x, kprof.w.values, left=0.0, right=0.0)

    routes = {"transport": w_tr, "asymptotic": w_asy, "kr": w_kr}
    names = list(routes)
    pairs = [(a, b, _l1(routes[a], routes[b], dx)) for i, a in enumerate(names) for b in names[i + 1:]]
    with open(out / "compare.csv", "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["route_a", "route_b", "l1_w"])
        for a, b, d in pairs:
            wr.writerow([a, b, _fmt(d)])
    _write_csv(out / "profiles.csv", ["x", "w_transport", "w_asymptotic", "w_kr"], zip(x, w_tr, w_asy, w_kr))
    for a, b, d in pairs:
        print(f"{a},{b},{_fmt(d)}")
    return [
        f"T_long = {_fmt(cfg.T_long)}",
        f"kr_eps = {_fmt(pair.eps)}",
        f"asymptotic_interface = {_fmt(sol.interface)}",
        f"asymptotic_outer_edge = {_fmt(sol.outer_edge)}",
    ] + [f"l1_w({a},{b}) = {_fmt(d)}" for a, b, d in pairs]


COMMANDS = {
    "simulate": cmd_simulate,
    "steady-kr": cmd_steady_kr,
    "steady-asymptotic": cmd_steady_asymptotic,
    "coercivity-check": cmd_coercivity,
    "eps-map": cmd_eps_map,
    "compare": cmd_compare,
}


def build_parser():
    p = argparse.ArgumentParser(prog="segregation", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in [*COMMANDS, "run"]:
        s = sub.add_parser(name, help="dispatch on run.mode" if name == "run" else None)
        s.add_argument("--config", required=True, help="INI experiment config")
        s.add_argument("--out", default=None, help="output directory (default: config run.out or out/<command>)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def run(cfg, out_dir=None, command=None):
    """Execute ``command`` (default ``cfg.mode``) and write ``report.txt``."""
    command = command or cfg.mode
    cfg.mode = command
    out = Path(out_dir or cfg.out or f"out/{command}")
    out.mkdir(parents=True, exist_ok=True)
    lines = COMMANDS[command](cfg, out)
    _write_report(out, cfg, lines)
    return lines


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = cfgmod.load(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    command = None if args.command == "run" else args.command
    try:
        run(cfg, args.out, command)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, InputError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
