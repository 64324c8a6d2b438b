"""
Command definitions.

One handler per subcommand: each reads its inputs, calls the
LinearizationService and returns the report with the exit code it implies.
Ansatz vectors are given in ASCENDING degree (v0 first).
"""

from __future__ import annotations

import argparse
import asyncio
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Optional

from pydantic import BaseModel

from app.core.errors import InputError
from app.models import schemas
from app.persistence.documents import pencil_to_document, read_matpoly, read_pencil, write_document
from app.persistence.literals import parse_scalar_list, parse_scalar_poly
from app.services.bases import basis_from_tag
from app.services.fields import Field, field_from_tag
from app.services.linearization_service import LinearizationService, Operand
from app.services.polynomials import ScalarPoly

DEFAULT_BATCH_TRIALS = 10


@dataclass(frozen=True)
class CommandResult:
    report: BaseModel
    exit_code: int = 0


Handler = Callable[[argparse.Namespace, LinearizationService], CommandResult]


# ---------------------------------------------------------------------------
# Handlers
# ---------------------------------------------------------------------------


def _operand(text: str, field: Field) -> Operand:
    """A document path, or a scalar polynomial literal."""
    if Path(text).is_file():
        return read_matpoly(text)
    return parse_scalar_poly(text, field)


def run_dl(args: argparse.Namespace, service: LinearizationService) -> CommandResult:
    p = read_matpoly(args.file)
    if args.ansatz is None:
        ansatz = [1] + [0] * (p.grade - 1)
    else:
        ansatz = parse_scalar_list(args.ansatz, p.field)
    report, pencil = service.dl(p, ansatz)
    if args.output:
        write_document(args.output, pencil_to_document(pencil))
    rejected = report.verdict is not None and report.verdict.kind != "linearization"
    return CommandResult(report, 1 if rejected else 0)


def run_bdl(args: argparse.Namespace, service: LinearizationService) -> CommandResult:
    p = read_matpoly(args.file)
    if "x" in args.v:
        v = parse_scalar_poly(args.v, p.field)
    else:
        v = ScalarPoly.from_coeffs(p.field, parse_scalar_list(args.v, p.field))
    return CommandResult(service.bdl(p, v))


def run_bezout(args: argparse.Namespace, service: LinearizationService) -> CommandResult:
    field = field_from_tag(args.field)
    basis = basis_from_tag(args.basis)
    multipliers = None
    if args.lt:
        multipliers = (_operand(args.lt[0], field), _operand(args.lt[1], field))
    report = service.bezout(
        _operand(args.p1, field),
        _operand(args.p2, field),
        grade=args.grade,
        multipliers=multipliers,
        onesided=args.onesided,
        field=field,
        basis=basis,
    )
    return CommandResult(report)


def run_companion(args: argparse.Namespace, service: LinearizationService) -> CommandResult:
    return CommandResult(service.companion(read_matpoly(args.file), args.which))


def run_divide(args: argparse.Namespace, service: LinearizationService) -> CommandResult:
    return CommandResult(service.divide(read_matpoly(args.v_file), read_matpoly(args.p_file), args.side))


def run_check(args: argparse.Namespace, service: LinearizationService) -> CommandResult:
    return CommandResult(service.check(read_pencil(args.pencil_file), read_matpoly(args.p_file)))


def run_condition(args: argparse.Namespace, service: LinearizationService) -> CommandResult:
    if args.file is None:
        if args.trials is not None and args.trials < 1:
            raise InputError("a random batch needs --trials of at least 1")
        trials = args.trials or DEFAULT_BATCH_TRIALS
        batch = asyncio.run(service.condition_batch(trials, seed=args.seed, n=args.n, k=args.k))
        return CommandResult(batch, 0 if batch.violations == 0 else 3)
    report = service.condition(read_matpoly(args.file), trials=args.trials or 0, seed=args.seed, eps=args.eps)
    return CommandResult(report, 0 if report.passed else 3)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _common_options() -> argparse.ArgumentParser:
    # SUPPRESS keeps a subcommand from resetting options given before it
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["text", "json"], default=argparse.SUPPRESS)
    common.add_argument("--debug", action="store_true", default=argparse.SUPPRESS)
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(
        prog="bezoutlin",
        description="Bezoutian linearizations of matrix polynomials.",
        parents=[common],
    )
    parser.set_defaults(format="text", debug=False)
    sub = parser.add_subparsers(dest="command", required=True)

    dl = sub.add_parser("dl", parents=[common], help="DL(P, v) pencil and exclusion verdict")
    dl.add_argument("file")
    dl.add_argument("--ansatz", help="ascending coefficients v0,v1,... (default: 1,0,...,0)")
    dl.add_argument("--output", help="write the pencil document here")
    dl.set_defaults(handler=run_dl)

    bdl = sub.add_parser("bdl", parents=[common], help="BDL(P, v) pencil with Q, S and A")
    bdl.add_argument("file")
    bdl.add_argument("--v", required=True, help="ascending coefficients c0,c1,... or a literal like x^2+1")
    bdl.set_defaults(handler=run_bdl)

    bez = sub.add_parser("bezout", parents=[common], help="Bezout matrix and kernel dimension")
    bez.add_argument("p1", help="polynomial literal or document path")
    bez.add_argument("p2", help="polynomial literal or document path")
    bez.add_argument("--grade", type=int)
    bez.add_argument("--lt", nargs=2, metavar=("M1", "M2"), help="multipliers with M1 P1 = M2 P2")
    bez.add_argument("--onesided", action="store_true", help="(P1(y) P2(x) - P1(x) P2(y))/(x - y)")
    bez.add_argument("--field", default="rational", help="field for literals: rational, gfP, gaussian-rational, f64, c64")
    bez.add_argument("--basis", default="monomial", help="basis for literals: monomial, chebyshev-t, legendre")
    bez.set_defaults(handler=run_bezout)

    comp = sub.add_parser("companion", parents=[common], help="first or second companion matrix")
    comp.add_argument("file")
    comp.add_argument("--which", type=int, choices=[1, 2], default=1)
    comp.set_defaults(handler=run_companion)

    div = sub.add_parser("divide", parents=[common], help="matrix polynomial division V by P")
    div.add_argument("v_file")
    div.add_argument("p_file")
    div.add_argument("--side", choices=["left", "right"], default="left")
    div.set_defaults(handler=run_divide)

    chk = sub.add_parser("check", parents=[common], help="recover the DL ansatz of a pencil or reject it")
    chk.add_argument("pencil_file")
    chk.add_argument("p_file")
    chk.set_defaults(handler=run_check)

    cond = sub.add_parser("condition", parents=[common], help="conditioning report of DL(P, 1)")
    cond.add_argument("file", nargs="?", help="Chebyshev document; omit for a random batch")
    cond.add_argument("--trials", type=int)
    cond.add_argument("--seed", type=int)
    cond.add_argument("--eps", type=float, default=1e-6)
    cond.add_argument("--n", type=int, help="batch matrix size (default: random in 1..3)")
    cond.add_argument("--k", type=int, help="batch grade (default: random in 2..4)")
    cond.set_defaults(handler=run_condition)

    return parser


# ---------------------------------------------------------------------------
# Text rendering
# ---------------------------------------------------------------------------


def _is_grid(value: Any) -> bool:
    return (
        isinstance(value, list)
        and bool(value)
        and all(isinstance(row, list) and all(isinstance(x, str) for x in row) for row in value)
    )


def _grid_lines(grid: list[list[str]], indent: str) -> list[str]:
    if not grid or not grid[0]:
        return [indent + "[]"]
    width = max(len(x) for row in grid for x in row)
    return [indent + "[ " + "  ".join(x.rjust(width) for x in row) + " ]" for row in grid]


def _render(name: str, value: Any, indent: str = "") -> list[str]:
    if isinstance(value, BaseModel):
        lines = [f"{indent}{name}:"]
        for key, item in value:
            lines.extend(_render(key, item, indent + "  "))
        return lines
    if _is_grid(value):
        return [f"{indent}{name}:"] + _grid_lines(value, indent + "  ")
    if isinstance(value, list) and value and all(_is_grid(v) for v in value):
        lines = []
        for i, grid in enumerate(value):
            lines.append(f"{indent}{name}[{i}]:")
            lines.extend(_grid_lines(grid, indent + "  "))
        return lines
    if isinstance(value, list) and value and all(isinstance(v, BaseModel) for v in value):
        lines = [f"{indent}{name}:"]
        for v in value:
            lines.append(indent + "  - " + ", ".join(f"{k}={x}" for k, x in v))
        return lines
    if isinstance(value, list):
        return [f"{indent}{name}: [{', '.join(str(v) for v in value)}]"]
    return [f"{indent}{name}: {value}"]


def render_text(report: BaseModel) -> str:
    lines: list[str] = []
    for name, value in report:
        if name == "schema_version":
            continue
        lines.extend(_render(name, value))
    return "\n".join(lines)


def emit(report: BaseModel, fmt: str) -> str:
    if fmt == "json":
        return report.model_dump_json(indent=2)
    return render_text(report)


def error_report(code: str, message: str, exit_code: int, detail: Optional[dict] = None) -> schemas.ErrorReport:
    return schemas.ErrorReport(code=code, message=message, exit_code=exit_code, detail=detail or {})
