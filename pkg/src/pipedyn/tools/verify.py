"""verify: built-in acceptance suites."""

from __future__ import annotations

import argparse
import logging
from pathlib import Path

from pipedyn.engine import FieldEngine
from pipedyn.output import emit, write_sidecar
from pipedyn.verify import SUITES, Status, format_matrix, run_suites

logger = logging.getLogger(__name__)

EXIT_VERIFY_FAILED = 4


def register(subparsers: argparse._SubParsersAction, engine: FieldEngine) -> None:
    parser = subparsers.add_parser("verify", help="Run the acceptance suites")
    parser.add_argument(
        "--suite",
        action="append",
        choices=sorted(SUITES),
        help="Run only this suite (repeatable)",
    )
    parser.add_argument("--out", type=Path, help="Write the matrix here (default stdout)")

    def run(args: argparse.Namespace) -> int:
        checks = run_suites(args.suite)
        emit(format_matrix(checks), args.out)
        counts = {s.value: sum(c.status == s for c in checks) for s in Status}
        logger.info("verify: %s", ", ".join(f"{n} {k}" for k, n in counts.items()))
        write_sidecar(args.out, {"command": "verify", "counts": counts})
        return EXIT_VERIFY_FAILED if counts[Status.failed.value] else 0

    parser.set_defaults(handler=run)
