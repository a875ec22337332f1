"""Command-line entry point.

    pipedyn simulate scenario.json --grid 13x9 --out field.csv
    pipedyn dispatch scenario.json --out ratio.csv --actions actions.csv
    pipedyn optimize scenario.json
    pipedyn verify
    pipedyn tables junction
    pipedyn scenarios list

Exit codes: 0 ok, 2 input error, 3 infeasible or numerical failure,
4 verification failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

from dotenv import load_dotenv
from pydantic import ValidationError

from pipedyn import __version__
from pipedyn.engine import FieldEngine
from pipedyn.errors import PipedynError
from pipedyn.tools import dispatch, optimize, scenarios, simulate, tables, verify

logger = logging.getLogger(__name__)

EXIT_INPUT = 2
EXIT_INFEASIBLE = 3


def _validation_report(err: ValidationError) -> str:
    lines = [f"{err.error_count()} validation error(s) in {err.title}:"]
    for item in err.errors():
        where = ".".join(str(p) for p in item["loc"]) or "<root>"
        lines.append(f"  {where}: {item['msg']}")
    return "\n".join(lines)


def build_parser(engine: FieldEngine) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pipedyn",
        description="Transient flow, emergency dispatch and reconstruction for gas pipelines",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--verbose",
        "-v",
        action="store_true",
        help="Enable verbose logging",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for tool in (simulate, dispatch, optimize, verify, tables, scenarios):
        tool.register(subparsers, engine)
    return parser


def main(argv: list[str] | None = None) -> int:
    load_dotenv()
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")

    engine = FieldEngine()
    args = build_parser(engine).parse_args(argv)
    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)

    try:
        return args.handler(args)
    except ValidationError as e:
        logger.error("%s", _validation_report(e))
        return EXIT_INPUT
    except (FileNotFoundError, FileExistsError) as e:
        logger.error("%s", e)
        return EXIT_INPUT
    except PipedynError as e:
        logger.error("%s: %s", type(e).__name__, e)
        return EXIT_INFEASIBLE
    except ValueError as e:
        # scenario fields that are valid alone but inconsistent together
        logger.error("%s", e)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
