"""
Command-line application entry point.

Configures logging, dispatches the parsed subcommand and maps errors onto
exit codes: 0 success, 1 mathematical rejection, 2 input error, 3 internal
assertion failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional, Sequence

from pydantic import ValidationError

from app.api.commands import build_parser, emit, error_report
from app.core.config import settings
from app.core.errors import InputError, LinearizationError
from app.services.linearization_service import LinearizationService


def create_app() -> argparse.ArgumentParser:
    """Creates the argument parser with every subcommand registered."""
    return build_parser()


def _fail(fmt: str, code: str, message: str, exit_code: int, detail: Optional[dict] = None) -> int:
    if fmt == "json":
        print(emit(error_report(code, message, exit_code, detail), "json"))
    else:
        print(f"error[{code}]: {message}", file=sys.stderr)
    return exit_code


def _validation_detail(exc: ValidationError) -> dict:
    return {"errors": [{"loc": [str(x) for x in e["loc"]], "msg": e["msg"]} for e in exc.errors()]}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = create_app()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse reports usage errors with status 2
        return int(exc.code or 0)

    if args.debug:
        settings.debug = True
    logging.basicConfig(
        level=logging.DEBUG if settings.debug else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    service = LinearizationService()
    try:
        result = args.handler(args, service)
    except LinearizationError as exc:
        return _fail(args.format, exc.code, exc.message, exc.exit_code, exc.detail)
    except ValidationError as exc:
        message = f"invalid document: {exc.error_count()} validation error(s)"
        return _fail(args.format, InputError.code, message, InputError.exit_code, _validation_detail(exc))

    print(emit(result.report, args.format))
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
