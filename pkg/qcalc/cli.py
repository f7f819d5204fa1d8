#!/usr/bin/env python3
"""
qcalc command line: solve, table, verify and wronskian.

Exit codes: 0 success, 1 failure (residual above --tol, failed checks,
no convergence), 2 Picard iteration not contracting, 3 invalid input.
"""

import argparse
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError
from rich.console import Console
from rich.markup import escape
from rich.table import Table

from qcalc.config import (
    CONFIG_FILE,
    EXIT_FAILED,
    EXIT_INVALID,
    EXIT_NOT_CONTRACTING,
    EXIT_OK,
    Settings,
    load_settings,
)
from qcalc.errors import MaxIterations, NotContracting, QCalcError
from qcalc.expr import spec_from_text
from qcalc.ivp import SecondOrderSpec, solve_second_order_linear, solver_window
from qcalc.lattice import build_lattice
from qcalc.logging_setup import setup_logging
from qcalc.qsymbols import QContext
from qcalc.report import (
    SOLVE_COLUMNS,
    WRONSKIAN_COLUMNS,
    parse_funcs,
    solution_rows,
    table_columns,
    table_rows,
    wronskian_rows,
    write_rows,
)
from qcalc.verify import SUITES, run_suite
from qcalc.version import VERSION
from qcalc.wronskian import is_fundamental

logger = logging.getLogger(__name__)


class _Parser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with EXIT_INVALID."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"Error: {message}", file=sys.stderr)
        sys.exit(EXIT_INVALID)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--q", type=float, required=True, help="deformation parameter, 0 < q < 1")
    p.add_argument("--config", default=CONFIG_FILE, help="settings file (default: ./config.json)")
    p.add_argument("--log-level", default=None, help="logging level (default from settings)")


def _add_window(p: argparse.ArgumentParser, kmin: Optional[int], kmax: Optional[int]) -> None:
    p.add_argument("--kmin", type=int, default=kmin, help="outermost ring exponent")
    p.add_argument("--kmax", type=int, default=kmax, help="innermost ring exponent")


def _add_equation(p: argparse.ArgumentParser) -> None:
    p.add_argument("--a0", default="1", help="coefficient of the second derivative")
    p.add_argument("--a1", default="0", help="coefficient of the first derivative")
    p.add_argument("--a2", default="0", help="coefficient of y")
    p.add_argument("--b", default="0", help="forcing term")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qcalc", description="q-difference calculus on the lattice ±q^k ∪ {0}")
    parser.add_argument("--version", action="version", version=f"qcalc {VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser(
        "solve",
        help="solve a linear second-order q-IVP branch by branch",
        description=(
            "Solves q a0 ∂²y(qx) + a1 ∂y(x) + a2 y = b for the odd part of y and "
            "q a0 ∂²y(qx) + q a1 ∂y(qx) + a2 y = b for the even part, with y(0)=b1, ∂y(0)=b2."
        ),
    )
    _add_common(solve)
    _add_equation(solve)
    solve.add_argument("--b1", type=complex, default=1.0, help="y(0)")
    solve.add_argument("--b2", type=complex, default=0.0, help="∂_q y(0)")
    _add_window(solve, None, None)
    solve.add_argument("--tol", type=float, default=1e-8, help="residual acceptance tolerance")
    solve.add_argument("--max-iter", type=int, default=None, help="Picard iteration cap")
    solve.add_argument("--format", choices=["csv", "json"], default="csv")

    table = sub.add_parser("table", help="tabulate cos(x,q²), sin(x,q²), e(x,q²)")
    _add_common(table)
    _add_window(table, 0, 10)
    table.add_argument("--funcs", default="cos,sin,exp", help="comma separated subset of cos,sin,exp")
    table.add_argument("--format", choices=["csv", "json"], default="csv")

    verify = sub.add_parser("verify", help="run invariant suites")
    _add_common(verify)
    verify.add_argument("--suite", choices=sorted(SUITES) + ["all"], default="all")

    wronskian = sub.add_parser("wronskian", help="q-Wronskian of the fundamental pair of a homogeneous equation")
    _add_common(wronskian)
    _add_equation(wronskian)
    _add_window(wronskian, None, None)
    wronskian.add_argument("--format", choices=["csv", "json"], default="csv")
    return parser


def _spec(args, ctx: QContext, b1: complex, b2: complex) -> SecondOrderSpec:
    lat = solver_window(ctx, args.kmin, args.kmax)
    return spec_from_text(lat, args.a0, args.a1, args.a2, args.b, b1, b2)


def cmd_solve(args, settings: Settings) -> int:
    if args.max_iter is not None:
        settings = settings.model_copy(update={"max_iter": args.max_iter})
    ctx = QContext.from_settings(args.q, settings)
    spec = _spec(args, ctx, args.b1, args.b2)
    _, _, combined = solve_second_order_linear(spec, settings=settings)
    write_rows(solution_rows(combined), SOLVE_COLUMNS, args.format, sys.stdout)
    if combined.residual > args.tol:
        print(f"Error: residual {combined.residual:.3g} exceeds tolerance {args.tol:.3g}", file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


def cmd_table(args, settings: Settings) -> int:
    ctx = QContext.from_settings(args.q, settings)
    funcs = parse_funcs(args.funcs)
    lat = build_lattice(ctx, args.kmin, args.kmax)
    write_rows(table_rows(lat, funcs), table_columns(funcs), args.format, sys.stdout)
    return EXIT_OK


def cmd_verify(args, settings: Settings) -> int:
    ctx = QContext.from_settings(args.q, settings)
    results = run_suite(args.suite, ctx, settings)

    table = Table(title=f"qcalc verify --suite {args.suite} (q={ctx.q:g})")
    table.add_column("check")
    table.add_column("status")
    table.add_column("max residual", justify="right")
    table.add_column("tolerance", justify="right")
    for r in results:
        status = "[green]pass[/green]" if r.passed else "[red]FAIL[/red]"
        table.add_row(escape(r.name), status, f"{r.max_residual:.3e}", f"{r.tolerance:.3e}")
    console = Console()
    console.print(table)
    failed = [r for r in results if not r.passed]
    for r in failed:
        if r.detail:
            console.print(f"{escape(r.name)}: {escape(r.detail)}")
    console.print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_OK if not failed else EXIT_FAILED


def cmd_wronskian(args, settings: Settings) -> int:
    ctx = QContext.from_settings(args.q, settings)
    spec = _spec(args, ctx, 1.0, 1.0).homogeneous()
    even, odd, _ = solve_second_order_linear(spec, settings=settings)
    logger.info(f"fundamental pair: {is_fundamental(even.y, odd.y)}")
    write_rows(wronskian_rows(spec, even.y, odd.y), WRONSKIAN_COLUMNS, args.format, sys.stdout)
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "table": cmd_table,
    "verify": cmd_verify,
    "wronskian": cmd_wronskian,
}


def _one_line(e: Exception) -> str:
    return "; ".join(line.strip() for line in str(e).splitlines() if line.strip())


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    settings = load_settings(args.config)
    setup_logging(args.log_level or settings.log_level)

    try:
        return COMMANDS[args.command](args, settings)
    except NotContracting as e:
        print(f"Error: not contracting: {_one_line(e)}", file=sys.stderr)
        return EXIT_NOT_CONTRACTING
    except MaxIterations as e:
        print(f"Error: {_one_line(e)}", file=sys.stderr)
        return EXIT_FAILED
    except (ValidationError, ValueError) as e:
        print(f"Error: {_one_line(e)}", file=sys.stderr)
        return EXIT_INVALID
    except QCalcError as e:
        print(f"Error: {type(e).__name__}: {_one_line(e)}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
