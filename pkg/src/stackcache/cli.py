"""Command-line scenario runner.

Exit codes: 0 ok, 2 invalid config or arguments, 3 infeasible market,
4 best-response dynamics did not converge.
"""

from __future__ import annotations

import argparse
import contextlib
import sys
from typing import IO, Iterator, Optional, Sequence

from stackcache import follower, io, leader, scenarios
from stackcache.errors import DomainError, InfeasibleMarket, MarketValidationError, NonConvergence
from stackcache.model import QuantityProfile, load_market
from stackcache.stackelberg import SolveOptions, solve_stackelberg

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_INFEASIBLE = 3
EXIT_NONCONVERGENCE = 4


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got {text!r}") from exc


@contextlib.contextmanager
def _output(path: Optional[str]) -> Iterator[IO[str]]:
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _initial(args, n_cps: int) -> QuantityProfile:
    if args.init is None:
        return QuantityProfile((0.0,) * n_cps)
    if len(args.init) != n_cps:
        raise DomainError(f"--init has {len(args.init)} values, market has {n_cps} CPs")
    return QuantityProfile(tuple(args.init))


def cmd_equilibrium(args) -> int:
    config = load_market(args.config)
    opts = SolveOptions(
        parity=args.parity,
        run_dynamics=not args.no_dynamics,
        initial=None if args.init is None else tuple(_initial(args, config.n_cps).q),
        tol=args.tol,
        max_iter=args.max_iter,
        schedule=args.schedule,
        clamp_to_catalog=args.clamp_to_catalog,
    )
    report = solve_stackelberg(config, opts)
    with _output(args.out) as fh:
        if args.format == "csv":
            io.write_dict_csv(fh, report.cp_rows())
        else:
            io.write_json(fh, report.to_dict())
    return EXIT_OK


def cmd_br_trace(args) -> int:
    config = load_market(args.config)
    price = args.price if args.price is not None else leader.optimal_price(config, args.parity).price
    trace = follower.br_dynamics(
        config, price, _initial(args, config.n_cps), args.tol, args.max_iter, args.schedule
    )
    with _output(args.out) as fh:
        io.write_csv(fh, trace.header(), trace.rows())
    if not trace.converged:
        print(str(NonConvergence(trace, args.tol)), file=sys.stderr)
        return EXIT_NONCONVERGENCE
    return EXIT_OK


def cmd_price_sweep(args) -> int:
    config = load_market(args.config)
    rows = scenarios.price_sweep(
        config,
        capacities=args.capacities,
        lower=args.lower,
        upper=args.upper,
        grid=args.grid,
        price=args.price,
        parity=args.parity,
    )
    with _output(args.out) as fh:
        if args.format == "json":
            io.write_json(fh, rows)
        else:
            io.write_csv(fh, scenarios.PRICE_SWEEP_COLUMNS, ([r[k] for k in scenarios.PRICE_SWEEP_COLUMNS] for r in rows))
    return EXIT_OK


def cmd_cp_sweep(args) -> int:
    config = load_market(args.config)
    rows = scenarios.cp_sweep(config, scenarios.parse_m_range(args.m_range), args.alpha_rule, args.parity)
    with _output(args.out) as fh:
        if args.format == "json":
            io.write_json(fh, rows)
        else:
            io.write_csv(fh, scenarios.CP_SWEEP_COLUMNS, ([r[k] for k in scenarios.CP_SWEEP_COLUMNS] for r in rows))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stackcache",
        description="Leader/follower pricing game for proactive edge caching.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, formats: Sequence[str], default_format: str) -> None:
        p.add_argument("--config", required=True, help="market JSON file")
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--format", choices=formats, default=default_format)
        p.add_argument("--parity", choices=["even", "odd", "rounded"], default="even",
                       help="branch of the copies-per-file weight used for pricing")

    def dynamics(p: argparse.ArgumentParser) -> None:
        p.add_argument("--init", type=_floats, help="initial quantities, e.g. 0,0")
        p.add_argument("--tol", type=float, default=1e-9)
        p.add_argument("--max-iter", type=int, default=10_000)
        p.add_argument("--schedule", choices=["simultaneous", "sequential"], default="simultaneous")

    p = sub.add_parser("equilibrium", help="solve the full game and write a report")
    common(p, ["json", "csv"], "json")
    dynamics(p)
    p.add_argument("--no-dynamics", action="store_true", help="skip the best-response replay")
    p.add_argument("--clamp-to-catalog", action="store_true", help="cap each q_m at the CP's catalog size")
    p.set_defaults(func=cmd_equilibrium)

    p = sub.add_parser("br-trace", help="best-response dynamics at a fixed price, as CSV")
    common(p, ["csv"], "csv")
    dynamics(p)
    p.add_argument("--price", type=float, help="price in (0, 1); default is the optimal price")
    p.set_defaults(func=cmd_br_trace)

    p = sub.add_parser("price-sweep", help="leader utility against price")
    common(p, ["csv", "json"], "csv")
    p.add_argument("--grid", type=int, default=1000, help="number of grid prices per curve")
    p.add_argument("--lower", type=float, help="lowest price (default: feasible lower bound)")
    p.add_argument("--upper", type=float, help="highest price (default: 1)")
    p.add_argument("--price", type=float, help="evaluate a single price instead of a grid")
    p.add_argument("--capacities", type=_floats, help="total capacities S, one curve each, e.g. 50,100")
    p.set_defaults(func=cmd_price_sweep)

    p = sub.add_parser("cp-sweep", help="per-CP utilities against the number of CPs")
    common(p, ["csv", "json"], "csv")
    p.add_argument("--m-range", default="2..6", help="market sizes, e.g. 2..6")
    p.add_argument("--alpha-rule", choices=["shifted", "config"], default="shifted",
                   help="shifted: alpha_m = M + m; config: reuse configured CPs cyclically")
    p.set_defaults(func=cmd_cp_sweep)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_VALIDATION if exc.code else EXIT_OK
    try:
        return args.func(args)
    except MarketValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except InfeasibleMarket as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except NonConvergence as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
