"""Command-line entry point: ``fasfair <subcommand> [options]``.

Exit codes: 0 success, 2 configuration error, 3 numerical non-convergence,
4 failed acceptance check (``mc-validate --strict``).
"""

from __future__ import annotations

import argparse
import contextlib
import sys
import warnings
from pathlib import Path

from .config import (ConfigError, load_config, parse_config_values, parse_overrides,
                     validate_values)
from .figures import (SOLVE_COLUMNS, SweepSpec, Table, report_row, run_figure, run_mc_validate,
                      run_sweep, solve, write_csv)
from .model import Scenario
from .montecarlo import McConfig
from .oma import ScaConfig, grid_oracle
from .outage import oma_outage_pair
from .specfun import QuadratureSpec, QuadratureWarning

EXIT_OK, EXIT_CONFIG, EXIT_NONCONVERGED, EXIT_ACCEPTANCE = 0, 2, 3, 4


class NonConvergence(RuntimeError):
    pass


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="scenario file (key = value lines)")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one scenario key; repeatable")
    parser.add_argument("--out", default="-", help="output CSV path, '-' for stdout")
    parser.add_argument("--seed", type=int, default=McConfig.seed, help="Monte Carlo seed")
    parser.add_argument("--trials", type=int, default=McConfig.trials,
                        help="Monte Carlo trials")
    parser.add_argument("--quad-nodes", type=int, default=QuadratureSpec.node_count,
                        help="Gauss-Laguerre node count")
    parser.add_argument("--tol", type=float, default=1e-8, help="bisection tolerance on alpha")
    parser.add_argument("--workers", type=int, default=1, help="worker threads")
    parser.add_argument("--strict", action="store_true",
                        help="treat quadrature warnings as non-convergence; "
                             "fail mc-validate on any 3-sigma miss")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fasfair",
        description="Outage and min-max fair allocation for FAS-assisted NOMA/OMA downlinks.")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, text in (("noma-special", "closed-form split for equal users"),
                       ("noma-bisect", "exact split by bisection"),
                       ("noma-closed", "closed-form split from the outage approximation")):
        _common(sub.add_parser(name, help=text))

    p = sub.add_parser("oma-sca", help="OMA power/time split by successive convex approximation")
    _common(p)
    p.add_argument("--eps-tau", type=float, default=ScaConfig.eps_tau)
    p.add_argument("--max-outer", type=int, default=ScaConfig.max_outer)
    p.add_argument("--relative", action="store_true", help="relative stopping rule on tau")
    p.add_argument("--oracle-step", type=float, help="also run the grid oracle at this step")

    p = sub.add_parser("mc-validate", help="Monte Carlo check of the analytic NOMA outage")
    _common(p)
    p.add_argument("--powers", type=_float_list, default=[5.0, 10.0, 15.0])
    p.add_argument("--alphas", type=_float_list, default=[0.15, 0.25, 0.333])
    p.add_argument("--antithetic", action="store_true")

    p = sub.add_parser("fig", help="data behind one figure")
    p.add_argument("fig_id", type=int, choices=range(1, 10), metavar="N")
    _common(p)

    p = sub.add_parser("sweep", help="sweep one variable for a list of methods")
    _common(p)
    p.add_argument("--variable", required=True,
                   choices=["alpha", "power_dbm", "n_c", "n_e", "r1", "r2"])
    p.add_argument("--start", type=float, required=True)
    p.add_argument("--stop", type=float, required=True)
    p.add_argument("--points", type=int, default=11)
    p.add_argument("--methods", default="bisection",
                   help="comma-separated: special_closed, bisection, theorem1_closed, sca, "
                        "noma_exact (alpha sweeps only)")
    return parser


def _scenario(args) -> tuple[Scenario, str]:
    base = load_config(args.config) if args.config else Scenario()
    overrides = parse_overrides(args.set)
    if overrides:
        values = base.to_values()
        values.update(overrides)
        base = validate_values(values)
    sid = Path(args.config).stem if args.config else "default"
    return base, sid


def _quad(args) -> QuadratureSpec:
    try:
        return QuadratureSpec(node_count=args.quad_nodes)
    except ValueError as exc:
        raise ConfigError(f"quad-nodes: {exc}", key="quad_nodes") from exc


def _run(args) -> tuple[Table, int]:
    quad = _quad(args)
    if args.workers < 1:
        raise ConfigError("workers must be >= 1", key="workers")
    if args.command == "fig":
        # a config file only overrides the keys it names; the rest come from the figure
        overrides = parse_config_values(Path(args.config).read_text()) if args.config else {}
        overrides.update(parse_overrides(args.set))
        return run_figure(args.fig_id, overrides, quad=quad, tol=args.tol,
                          workers=args.workers), EXIT_OK

    scenario, sid = _scenario(args)
    if args.command in ("noma-special", "noma-bisect", "noma-closed"):
        method = {"noma-special": "special_closed", "noma-bisect": "bisection",
                  "noma-closed": "theorem1_closed"}[args.command]
        try:
            rep = solve(scenario, method, quad, args.tol)
        except RuntimeError as exc:
            raise NonConvergence(str(exc)) from exc
        code = EXIT_OK if rep.converged else EXIT_NONCONVERGED
        return Table(SOLVE_COLUMNS, [report_row(sid, rep)]), code

    if args.command == "oma-sca":
        try:
            cfg = ScaConfig(eps_tau=args.eps_tau, max_outer=args.max_outer, relative=args.relative)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        try:
            rep = solve(scenario, "sca", quad, args.tol, cfg)
        except RuntimeError as exc:
            raise NonConvergence(str(exc)) from exc
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        table = Table(SOLVE_COLUMNS, [report_row(sid, rep)])
        if args.oracle_step is not None:
            try:
                a, b, tau = grid_oracle(scenario, args.oracle_step)
            except ValueError as exc:
                raise ConfigError(f"oracle-step: {exc}", key="oracle_step") from exc
            pair = oma_outage_pair(scenario, a, b, quad)
            table.rows.append((sid, "grid_oracle", a, b, tau, pair.p_cu, pair.p_eu, pair.p_max,
                               0, True, ""))
        return table, EXIT_OK if rep.converged else EXIT_NONCONVERGED

    if args.command == "mc-validate":
        try:
            cfg = McConfig(trials=args.trials, seed=args.seed, antithetic=args.antithetic,
                           workers=args.workers)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        table = run_mc_validate(scenario, cfg, powers=args.powers, alphas=args.alphas,
                                scenario_id=sid, quad=quad)
        failed = any(not row[table.header.index("pass")] for row in table.rows)
        return table, EXIT_ACCEPTANCE if (failed and args.strict) else EXIT_OK

    if args.command == "sweep":
        try:
            spec = SweepSpec(args.variable, args.start, args.stop, args.points,
                             tuple(m.strip() for m in args.methods.split(",") if m.strip()))
        except ValueError as exc:
            raise ConfigError(str(exc), key=args.variable) from exc
        table = run_sweep(scenario, spec, scenario_id=sid, quad=quad, tol=args.tol,
                          workers=args.workers)
        return table, EXIT_OK
    raise AssertionError(args.command)


@contextlib.contextmanager
def _output(path: str):
    if path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="\n") as fh:
            yield fh


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with warnings.catch_warnings():
            if args.strict:
                warnings.simplefilter("error", QuadratureWarning)
            table, code = _run(args)
    except ConfigError as exc:
        print(f"fasfair: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"fasfair: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NonConvergence, QuadratureWarning) as exc:
        print(f"fasfair: did not converge: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    with _output(args.out) as fh:
        write_csv(table, fh)
    return code


if __name__ == "__main__":
    sys.exit(main())
