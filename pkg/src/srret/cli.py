"""Command-line front end: figure grids as CSV/JSON and the validation suite.

Exit codes: 0 success, 2 validation failure, 3 configuration error, 4 I/O error.
"""
import argparse
import json
import logging
import math
import sys

import numpy as np

from . import analytic, checks, continuum, rates
from .errors import SrretError
from .greens import Regime

log = logging.getLogger("srret")

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG, EXIT_IO = 0, 2, 3, 4

# Fig. 1 setting: first donor 1.8 um from the acceptor, 19 um transition wavelength
FIG1_DISTANCE_UM = 1.8
FIG1_WAVELENGTH_UM = 19.0
FIG2_N = (2, 3, 4, 5, 8, 10)


class ConfigError(Exception):
    pass


def dimensionless(distance, wavelength):
    """X = 2 pi d / lambda for a physical distance and wavelength in the same unit."""
    if distance <= 0 or wavelength <= 0:
        raise ConfigError("--distance and --wavelength must be positive")
    return 2.0 * math.pi * distance / wavelength


def _x_from_args(args, default):
    if args.x_dimensionless is not None:
        if args.wavelength is not None or args.distance is not None:
            raise ConfigError("give either --x-dimensionless or --wavelength/--distance, not both")
        return args.x_dimensionless
    if (args.wavelength is None) != (args.distance is None):
        raise ConfigError("--wavelength and --distance must be given together")
    if args.wavelength is not None:
        return dimensionless(args.distance, args.wavelength)
    return default


def fmt(v):
    v = float(v)
    return "nan" if math.isnan(v) else "%.17g" % v


def write_table(path, columns, rows, out_format):
    """Write rows as CSV (header, %.17g floats, ``nan`` for masked) or JSON records."""
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            if out_format == "json":
                recs = [{c: (None if isinstance(v, float) and math.isnan(v) else v)
                         for c, v in zip(columns, row)} for row in rows]
                json.dump({"columns": list(columns), "rows": recs}, fh, indent=1)
                fh.write("\n")
            else:
                fh.write(",".join(columns) + "\n")
                for row in rows:
                    fh.write(",".join(fmt(v) if isinstance(v, float) else str(v) for v in row) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def write_json(path, payload):
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(payload, fh, indent=2, allow_nan=False)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def cmd_fig1(args):
    x1 = _x_from_args(args, dimensionless(FIG1_DISTANCE_UM, FIG1_WAVELENGTH_UM))
    half = args.extent * x1
    grid = rates.plane_grid(half, args.resolution)
    donor1 = np.array([x1, 0.0, 0.0])
    f = rates.second_donor_map(donor1, np.zeros(3), grid, regime=args.regime,
                               mask_radius=0.02 * x1, threads=args.threads)
    rows = [(float(p[0]), float(p[1]), float(v)) for p, v in zip(grid, f)]
    write_table(args.out, ("x", "y", "F"), rows, args.format)
    return EXIT_OK


def cmd_fig2(args):
    x = _x_from_args(args, 12.0)
    n_values = (args.n_donors,) if args.n_donors else FIG2_N
    grid = rates.plane_grid(x, args.resolution)
    outside = np.linalg.norm(grid, axis=1) > x
    rows = []
    for n in n_values:
        ens = rates.circle_ensemble(n, x, regime=args.regime)
        f = rates.fidelity_map(ens, grid, mask_radius=0.02 * x, threads=args.threads)
        f[outside] = np.nan
        rows.extend((n, float(p[0]), float(p[1]), float(v)) for p, v in zip(grid, f))
    write_table(args.out, ("n", "x", "y", "F"), rows, args.format)
    return EXIT_OK


def _two_ball_quadrature(z0, r):
    two = continuum.UnionOf((continuum.UniformBall((0, 0, z0), r),
                             continuum.UniformBall((0, 0, -z0), r)))
    return continuum.fidelity_continuum(two, np.zeros(3), Regime.NONRETARDED).fidelity


def _one_ball_quadrature(z0, r):
    ball = continuum.UniformBall((0, 0, z0), r)
    return continuum.fidelity_continuum(ball, np.zeros(3), Regime.NONRETARDED).fidelity


def cmd_fig3(args):
    r0 = args.radius
    r_one = 2.0 ** (1.0 / 3.0) * r0
    if args.method == "quadrature":
        f_two_fn, f_one_fn = _two_ball_quadrature, _one_ball_quadrature
        error = continuum.AcceptorInsideSupport
    else:
        f_two_fn = f_one_fn = analytic.two_sphere_fidelity_nr
        error = analytic.AcceptorInsideSphere
    sweep = ([args.z0] if args.z0 is not None
             else np.linspace(args.z0_min, args.z0_max, args.resolution))
    if not min(sweep) > r0:
        raise ConfigError("separations must exceed --radius")
    rows, flagged = [], 0
    for z0 in sweep:
        z0 = float(z0)
        f_two = f_two_fn(z0, r0)
        try:
            f_one, valid = f_one_fn(z0, r_one), 1
        except error:
            f_one, valid = float("nan"), 0
            flagged += 1
        rows.append((z0, f_two, f_one, valid))
    if flagged:
        log.warning("%d rows flagged: the equal-volume single sphere encloses the acceptor", flagged)
    write_table(args.out, ("z0", "F_two", "F_one", "valid_one"), rows, args.format)
    return EXIT_OK


def cmd_fig4(args):
    if (args.alpha is None) != (args.beta is None):
        raise ConfigError("--alpha and --beta must be given together")
    if args.alpha is not None:
        f = analytic.shell_fidelity(analytic.ShellParams(args.alpha, args.beta))
        write_table(args.out, ("alpha", "beta", "F"), [(args.alpha, args.beta, f)], args.format)
        return EXIT_OK
    if not args.max_param > 0:
        raise ConfigError("--max-param must be positive")
    axis = np.linspace(args.max_param / args.resolution, args.max_param, args.resolution)
    rows = []
    for b in axis:
        for a in axis:
            f = (analytic.shell_fidelity(analytic.ShellParams(float(a), float(b)))
                 if a < b else float("nan"))
            rows.append((float(a), float(b), f))
    write_table(args.out, ("alpha", "beta", "F"), rows, args.format)
    return EXIT_OK


def cmd_greedy(args):
    x = _x_from_args(args, 1.0)
    regime = args.regime
    grid = rates.ring_grid(x, args.grid_points)
    res = rates.greedy_path(args.k, grid, np.zeros(3), regime=regime)
    cell = 2 * math.pi / args.grid_points
    angles = [cell * i for i in res.indices]
    means, members = checks.cluster_angles(angles, tol=10 * cell)
    report = {
        "k": args.k,
        "grid_points": args.grid_points,
        "radius": x,
        "regime": Regime(regime).value,
        "placements": [
            {"step": s + 1, "index": i, "angle": angles[s],
             "position": [float(v) for v in res.positions[s]], "fidelity": res.fidelities[s]}
            for s, i in enumerate(res.indices)
        ],
        "clusters": [{"angle": m, "count": c} for m, c in zip(means, members)],
    }
    write_json(args.out, report)
    return EXIT_OK


def cmd_validate(args):
    report = checks.run_all(seed=args.seed)
    ok = all(c.passed for c in report)
    for c in report:
        log.info("%s %s value=%.3g tol=%.3g", "PASS" if c.passed else "FAIL", c.name, c.value, c.tolerance)
    write_json(args.out, {"passed": ok, "checks": [c.to_dict() for c in report]})
    return EXIT_OK if ok else EXIT_VALIDATION


COMMANDS = {
    "fig1": cmd_fig1, "fig2": cmd_fig2, "fig3": cmd_fig3,
    "fig4": cmd_fig4, "greedy": cmd_greedy, "validate": cmd_validate,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of flag values; command-line flags win")
    common.add_argument("--out", help="output path")
    common.add_argument("--resolution", type=int, default=201, help="points per axis, >= 8")
    common.add_argument("--threads", type=int, default=1, help="0 = one per CPU")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--regime", choices=[r.value for r in Regime],
                        help="default: full (nonretarded for greedy)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--x-dimensionless", type=float)
    common.add_argument("--wavelength", type=float)
    common.add_argument("--distance", type=float)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="srret", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("fig1", parents=[common], help="two-donor map, second donor free")
    p.add_argument("--extent", type=float, default=2.0, help="grid half-width in units of X")
    p = sub.add_parser("fig2", parents=[common], help="circle of donors, acceptor free")
    p.add_argument("--n-donors", type=int)
    p = sub.add_parser("fig3", parents=[common], help="two balls vs one of equal volume")
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--z0", type=float, help="single separation instead of a sweep")
    p.add_argument("--z0-min", type=float, default=1.1)
    p.add_argument("--z0-max", type=float, default=10.0)
    p.add_argument("--method", choices=("analytic", "quadrature"), default="analytic")
    p = sub.add_parser("fig4", parents=[common], help="hollow shell over (alpha, beta)")
    p.add_argument("--alpha", type=float, help="with --beta: evaluate a single shell")
    p.add_argument("--beta", type=float)
    p.add_argument("--max-param", type=float, default=20.0)
    p = sub.add_parser("greedy", parents=[common], help="greedy donor placement on a ring")
    p.add_argument("--k", type=int, default=6)
    p.add_argument("--grid-points", type=int, default=720)
    sub.add_parser("validate", parents=[common], help="run the oracle suite")
    return parser, sub.choices


def _load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"bad config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return {k.replace("-", "_"): v for k, v in cfg.items()}


def parse_args(argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    parser, subparsers = build_parser()
    if known.config:
        cfg = _load_config(known.config)
        for sub in subparsers.values():
            dests = {a.dest for a in sub._actions}
            sub.set_defaults(**{k: v for k, v in cfg.items() if k in dests})
        all_dests = {a.dest for sub in subparsers.values() for a in sub._actions}
        unknown = sorted(set(cfg) - all_dests)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    args = parser.parse_args(argv)
    if args.regime is None:
        args.regime = Regime.NONRETARDED if args.command == "greedy" else Regime.FULL
    args.regime = Regime(args.regime)
    if args.out is None:
        ext = "json" if args.command in ("greedy", "validate") else args.format
        args.out = f"{args.command}.{ext}"
    if args.threads < 0:
        raise ConfigError("--threads must be >= 0")
    if args.resolution < 8:
        raise ConfigError("--resolution must be >= 8")
    return args


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
    except ConfigError as exc:
        print(f"srret: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"srret: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SrretError, ValueError) as exc:
        print(f"srret: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"srret: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
