"""
Command-line front end.

Exit status is 0 on success, 1 on a numerical failure and 2 on a
configuration error.  Every simulation echoes its fully resolved
configuration as ``#``-prefixed lines before running.  The number of worker
processes is read from the ``RANDDD_THREADS`` environment variable.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import load_config, load_system, render
from .errors import ConfigError, NumericalError
from .experiment import (THREADS_ENV, derandomize, read_csv, run_comparison,
                         scaling_fit, write_csv)
from .groups import (USER_PATH_TOL, load_path_file, symmetrize_path,
                     verify_first_order, verify_second_order)
from .hamiltonian import hamiltonian_terms, terms_to_matrix
from .plotting import write_gnuplot, write_svg
from .presets import PRESETS, expand_preset, get_preset

EXIT_OK, EXIT_NUMERICAL, EXIT_CONFIG = 0, 1, 2


def _echo(resolved, title=None, stream=None):
    stream = stream or sys.stdout
    if title:
        print(f"# [{title}]", file=stream)
    for line in render(resolved).splitlines():
        print(f"# {line}", file=stream)


def _emit(traces, out, plot=None, svg=None):
    write_csv(traces, out)
    print(f"wrote {out}")
    if plot:
        write_gnuplot(plot, Path(out).resolve(), traces)
        print(f"wrote {plot}")
    if svg:
        write_svg(svg, traces)
        print(f"wrote {svg}")


def cmd_run(args):
    cfg, resolved = load_config(args.config, args.set)
    _echo(resolved)
    traces = run_comparison([cfg])
    _emit(traces, args.out, args.plot)


def cmd_compare(args):
    if bool(args.preset) == bool(args.config):
        raise ConfigError("compare needs either --preset or one or more --config files")
    if args.preset:
        runs = expand_preset(args.preset, args.set)
    else:
        runs = [load_config(path, args.set) for path in args.config]
    for cfg, resolved in runs:
        _echo(resolved, cfg.name)
    traces = run_comparison([cfg for cfg, _ in runs])
    _emit(traces, args.out, args.plot, args.svg)


def _model_matrix(system):
    static, modulated = hamiltonian_terms(system)
    return terms_to_matrix(static + modulated, system.n_qubits)


def cmd_verify(args):
    system = load_system(args.model)
    path = load_path_file(args.group, system.n_qubits)
    group = path.group
    h = _model_matrix(system)
    defects = group.closure_defects()
    first = verify_first_order(path, h)
    second = verify_second_order(symmetrize_path(path), h, args.dt)
    print(f"elements {len(group)}")
    print(f"closed {'yes' if not defects else 'no'} ({len(defects)} defective products)")
    print(f"first_order_residual {first:.6e}")
    print(f"symmetrized_second_order_residual {second:.6e}")
    ok = first < USER_PATH_TOL
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_NUMERICAL


def cmd_scaling(args):
    preset = get_preset(args.preset)
    grid = [float(s) for s in args.dt_grid.split(",")] if args.dt_grid else list(preset.dt_grid)
    t_probe = args.t_probe if args.t_probe is not None else preset.t_probe
    if not grid or t_probe is None:
        raise ConfigError("scaling needs --dt-grid and --t-probe")
    traces = []
    for dt in grid:
        stride = round(t_probe / dt)
        if stride < 1 or abs(stride * dt - t_probe) > 1e-9 * t_probe:
            raise ConfigError(f"t_probe {t_probe} is not a whole number of intervals of {dt}")
        overrides = [*args.set, f"evolution.dt={dt!r}", f"evolution.sample_stride={stride}",
                     f"run.total_time={t_probe!r}"]
        (cfg, resolved), = expand_preset(args.preset, overrides)
        _echo(resolved, f"dt={dt:g}")
        tr, = run_comparison([cfg])
        tr.meta["protocol"] = f"{cfg.name}-dt{dt:g}"
        traces.append(tr)
        print(f"dt {dt:.6g} infidelity {1 - tr.mean[-1]:.6e} stderr {tr.stderr[-1]:.3e}")
    fit = scaling_fit(grid, traces, t_probe)
    print(f"slope {fit.slope:.4f} ci95 [{fit.ci_low:.4f}, {fit.ci_high:.4f}] points {fit.n_points}")
    if args.out:
        _emit(traces, args.out)


def cmd_derandomize(args):
    cfg, resolved = load_config(args.config, args.set)
    _echo(resolved)
    result = derandomize(cfg, args.candidates, args.t_objective)
    print("rank,seed,fe")
    for k, (seed, fe) in enumerate(result.ranking, start=1):
        print(f"{k},{seed},{fe:.17g}")
    print(f"best_seed {result.best_seed}")
    if args.out:
        _emit([result.trace], args.out)


def cmd_plot(args):
    traces = read_csv(args.inp)
    if not traces:
        raise ConfigError(f"{args.inp} holds no traces")
    write_svg(args.out, traces, title=args.title or "")
    print(f"wrote {args.out}")
    if args.gnuplot:
        write_gnuplot(args.gnuplot, Path(args.inp).resolve(), traces)
        print(f"wrote {args.gnuplot}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="randdd",
        description="Deterministic and randomized dynamical decoupling of spin chains.",
        epilog=f"Worker processes: set {THREADS_ENV} (default 1). "
               "Exit status: 0 ok, 1 numerical failure, 2 configuration error.")
    sub = parser.add_subparsers(dest="command", required=True)

    def overrides(p):
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override one config key (repeatable)")

    p = sub.add_parser("run", help="run one protocol from a config file")
    p.add_argument("--config", required=True)
    overrides(p)
    p.add_argument("--out", required=True, help="CSV output")
    p.add_argument("--plot", help="also write a gnuplot script")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="run several protocols with paired randomness")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--config", action="append", help="config file (repeatable)")
    overrides(p)
    p.add_argument("--out", required=True, help="CSV output")
    p.add_argument("--plot", help="also write a gnuplot script")
    p.add_argument("--svg", help="also write an SVG figure")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("verify", help="decoupling residuals of a group/path file")
    p.add_argument("--group", required=True, help="one Pauli string per line, in path order")
    p.add_argument("--model", required=True, help="config file describing the system")
    p.add_argument("--dt", type=float, default=0.05,
                   help="interval length for the second-order residual (default 0.05)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("scaling", help="fit infidelity against dt at a fixed time")
    p.add_argument("--preset", required=True, choices=sorted(PRESETS))
    p.add_argument("--dt-grid", help="comma-separated dt values (default: preset grid)")
    p.add_argument("--t-probe", type=float, help="probe time in units of 1/J")
    overrides(p)
    p.add_argument("--out", help="CSV of the per-dt traces")
    p.set_defaults(func=cmd_scaling)

    p = sub.add_parser("derandomize", help="pick the best single random realization")
    p.add_argument("--config", required=True)
    p.add_argument("--candidates", type=int, required=True)
    p.add_argument("--t-objective", type=float, required=True)
    overrides(p)
    p.add_argument("--out", help="CSV of the winning trace")
    p.set_defaults(func=cmd_derandomize)

    p = sub.add_parser("plot", help="render a fidelity CSV")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True, help="SVG output")
    p.add_argument("--gnuplot", help="also write a gnuplot script")
    p.add_argument("--title")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        code = args.func(args)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK if code is None else code


if __name__ == "__main__":
    sys.exit(main())
