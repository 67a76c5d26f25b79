"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 numerical failure (divergence or
non-convergence).
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

from . import io as pio
from .params import PRESETS, ConfigError, RunConfig, load_config, preset, validate

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _add_config_args(p):
    p.add_argument("--config", help="configuration file")
    p.add_argument("--preset", choices=PRESETS, help="named configuration")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--scheme", choices=("ETD1RK", "ETD2RK", "ETD4RK"))
    p.add_argument("--max-steps", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--grid", type=int, help="grid points per axis (all three axes)")
    p.add_argument("--d", type=float, help="plate separation")
    p.add_argument("--q1", type=float)
    p.add_argument("--q2", type=float)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="pfvism", description="Phase-field implicit-solvent solver")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="3D gradient flow")
    _add_config_args(p)
    p.add_argument("--initial", choices=("loose", "tight", "sphere", "zero", "checkpoint"))
    p.add_argument("--log", help="energy-log CSV path")
    p.add_argument("--save", help="checkpoint path for the final field")

    p = sub.add_parser("radial", help="one-ion radial phase-field minimizer")
    p.add_argument("--Q", type=_floats, default=[1.0])
    p.add_argument("--epsilon", type=_floats, default=[0.05])
    p.add_argument("--dr", type=float, default=1e-3)
    p.add_argument("--r-max", type=float, default=5.0)
    p.add_argument("--coupling", choices=("new", "old"), default="new")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-steps", type=int, default=5_000_000)
    p.add_argument("--out", help="CSV path (default stdout)")

    p = sub.add_parser("sharp", help="sharp-interface one-ion oracle")
    p.add_argument("--Q", type=_floats, default=[0.0, 0.5, 1.0, 1.5, 2.0])
    p.add_argument("--out")

    p = sub.add_parser("rates", help="time-step convergence study at fixed final time")
    _add_config_args(p)
    p.add_argument("--schemes", "--scheme-list", dest="schemes", default="all",
                   help="'all' or comma-separated scheme names")
    p.add_argument("--t-end", type=float, default=1.0)
    p.add_argument("--dt-list", default="1e-1:halve:7")
    p.add_argument("--benchmark-dt", type=float, default=1e-4)
    p.add_argument("--benchmark-energy", type=float, help="skip the benchmark run and use this value")
    p.add_argument("--out")

    p = sub.add_parser("pmf", help="potential of mean force over plate separations")
    _add_config_args(p)
    p.add_argument("--d-list", type=_floats, required=True)
    p.add_argument("--initial", choices=("loose", "tight"), default="loose")
    p.add_argument("--warm-start", action="store_true")
    p.add_argument("--out")

    p = sub.add_parser("export", help="checkpoint to legacy structured-points file")
    p.add_argument("checkpoint")
    p.add_argument("output")
    return ap


def resolve_config(args, required: bool = True) -> RunConfig:
    """Config file or preset, then command-line overrides."""
    if args.config and args.preset:
        raise UsageError("give either --config or --preset, not both")
    if args.config:
        try:
            cfg = load_config(args.config)
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}")
    elif args.preset:
        cfg = preset(args.preset)
    elif required:
        raise UsageError("--config PATH (or --preset NAME) is required")
    else:
        cfg = preset("desk-two-plate")
    top = {}
    for arg, key in (("epsilon", "epsilon"), ("dt", "dt"), ("scheme", "scheme"),
                     ("max_steps", "max_steps"), ("tol", "tol")):
        v = getattr(args, arg, None)
        if v is not None:
            top[key] = v
    if getattr(args, "grid", None) is not None:
        top.update(N_x=args.grid, N_y=args.grid, N_z=args.grid)
    if getattr(args, "initial", None) is not None and args.command == "run":
        top["initial"] = args.initial
    sol = {k: getattr(args, k) for k in ("d", "q1", "q2") if getattr(args, k, None) is not None}
    cfg = replace(cfg, solute=replace(cfg.solute, **sol), **top)
    problems = validate(cfg)
    if problems:
        raise UsageError("; ".join(f"{v.field}: {v.message}" for v in problems))
    return cfg


def _out(path):
    return open(path, "w", newline="") if path else sys.stdout


# ---------------------------------------------------------------------------
# commands

def cmd_run(args) -> int:
    from .driver import DivergenceError, run_gradient_flow, solvent_excluded_volume
    from .grid import Grid

    cfg = resolve_config(args)
    try:
        res = run_gradient_flow(cfg)
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    if args.log:
        pio.write_energy_log(args.log, res.log_steps, res.dt, res.energies)
    if args.save:
        pio.write_checkpoint(args.save, res.phi, Grid.from_config(cfg), cfg.epsilon, res.steps, cfg.scheme)
    e = res.final_energy
    print("steps,converged,F_surf,F_vdw,F_ele,F_tot,SEV")
    sev = solvent_excluded_volume(res.phi, Grid.from_config(cfg))
    print(",".join([str(res.steps), str(res.converged)] + [pio.fmt(v) for v in e.as_tuple()] + [pio.fmt(sev)]))
    return EXIT_OK if res.converged else EXIT_NUMERICAL


def cmd_sharp(args) -> int:
    from .radial import sharp_oracle

    rows = []
    for q in args.Q:
        s = sharp_oracle(q)
        rows.append((q, 0.0, s.R_min, s.f_surf, s.f_vdw, s.f_elec, s.f_tot))
    fh = _out(args.out)
    pio.write_rows_csv(fh, RADIAL_HEADER, rows)
    if args.out:
        fh.close()
    return EXIT_OK


RADIAL_HEADER = ("Q", "epsilon", "R_min", "F_surf", "F_vdW", "F_elec", "F_tot")


def cmd_radial(args) -> int:
    from .radial import RadialConfig, radial_flow, sharp_oracle

    rows = []
    ok = True
    for q in args.Q:
        for eps in args.epsilon:
            if eps == 0:
                s = sharp_oracle(q)
                rows.append((q, 0.0, s.R_min, s.f_surf, s.f_vdw, s.f_elec, s.f_tot))
                continue
            rc = RadialConfig(r_max=args.r_max, dr=args.dr, tol=args.tol, max_steps=args.max_steps,
                              coupling=args.coupling)
            try:
                res = radial_flow(rc, q, epsilon=eps)
            except ValueError as exc:
                raise UsageError(str(exc))
            except FloatingPointError as exc:
                print(f"error: {exc}", file=sys.stderr)
                return EXIT_NUMERICAL
            ok &= res.converged
            e = res.energy
            rows.append((q, eps, res.radius, e.f_surf, e.f_vdw, e.f_ele, e.f_tot))
    fh = _out(args.out)
    pio.write_rows_csv(fh, RADIAL_HEADER, rows)
    if args.out:
        fh.close()
    return EXIT_OK if ok else EXIT_NUMERICAL


def cmd_rates(args) -> int:
    from .driver import DivergenceError, run_gradient_flow

    cfg = resolve_config(args, required=False)
    try:
        dts = pio.parse_dt_list(args.dt_list)
        pio.check_halving(dts)
    except ValueError as exc:
        raise UsageError(str(exc))
    schemes = ["ETD1RK", "ETD2RK", "ETD4RK"] if args.schemes == "all" else args.schemes.split(",")
    for s in schemes:
        if s not in ("ETD1RK", "ETD2RK", "ETD4RK"):
            raise UsageError(f"unknown scheme {s!r}")

    def energy_at(scheme, dt):
        c = cfg.replace(scheme=scheme, dt=dt, log_every=10**9)
        return run_gradient_flow(c, t_end=args.t_end).final_energy.f_tot

    try:
        bench = args.benchmark_energy
        if bench is None:
            bench = energy_at("ETD4RK", args.benchmark_dt)
        energies = {s: [energy_at(s, dt) for dt in dts] for s in schemes}
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        raise UsageError(str(exc))
    report = pio.rates_report(dts, energies, bench)
    fh = _out(args.out)
    pio.write_rates_csv(fh, report, bench)
    if args.out:
        fh.close()
    return EXIT_OK


PMF_HEADER = ("d", "G_geo", "G_vdW", "G_ele", "G_tot", "branch", "converged")


def cmd_pmf(args) -> int:
    from .driver import DivergenceError
    from .pmf import pmf_curve

    cfg = resolve_config(args)
    if cfg.solute.kind != "plates":
        raise UsageError("pmf needs a plates solute")
    try:
        pts = pmf_curve(args.d_list, cfg, args.initial, warm_start=args.warm_start)
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        raise UsageError(str(exc))
    fh = _out(args.out)
    pio.write_rows_csv(fh, PMF_HEADER,
                       [(p.d, p.G_geo, p.G_vdW, p.G_ele, p.G_tot, p.branch, p.converged) for p in pts])
    if args.out:
        fh.close()
    return EXIT_OK if all(p.converged for p in pts) else EXIT_NUMERICAL


def cmd_export(args) -> int:
    try:
        pio.export_vtk(args.checkpoint, args.output)
    except (OSError, pio.CheckpointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


COMMANDS = {"run": cmd_run, "radial": cmd_radial, "sharp": cmd_sharp, "rates": cmd_rates,
            "pmf": cmd_pmf, "export": cmd_export}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
