"""simulate: evaluate a pressure field on a grid."""

from __future__ import annotations

import argparse
import logging
from pathlib import Path

from pipedyn.crosscheck import crosscheck_for
from pipedyn.engine import FieldEngine
from pipedyn.output import emit, render_csv, write_sidecar
from pipedyn.scenario_store import ScenarioStore, dump_normalized

logger = logging.getLogger(__name__)

EXIT_ORACLE_FAILED = 4


def register(subparsers: argparse._SubParsersAction, engine: FieldEngine) -> None:
    parser = subparsers.add_parser("simulate", help="Evaluate a pressure field on an x-t grid")
    parser.add_argument("scenario", help="Scenario JSON file or stored scenario name")
    parser.add_argument("--grid", metavar="NxM", help="Override outputs.grid (x points by t points)")
    parser.add_argument("--out", type=Path, help="CSV path (default stdout)")
    parser.add_argument(
        "--oracle",
        action="store_true",
        help="Also compare the field with its finite-difference reference",
    )
    parser.add_argument(
        "--dump-normalized",
        action="store_true",
        help="Print the validated scenario with defaults filled in and stop",
    )

    def run(args: argparse.Namespace) -> int:
        scenario_file = ScenarioStore().load(args.scenario)
        if args.grid:
            outputs = scenario_file.outputs.model_validate(
                {**scenario_file.outputs.model_dump(), "grid": args.grid}
            )
            scenario_file = scenario_file.model_copy(update={"outputs": outputs})
        if args.dump_normalized:
            emit(dump_normalized(scenario_file), args.out)
            return 0

        field = engine.evaluate(scenario_file)
        emit(render_csv(["x_m", "t_s", "P_Pa"], field.rows()), args.out)
        meta = {
            "command": "simulate",
            "scenario": str(args.scenario),
            "field": scenario_file.outputs.field.value,
            "grid": scenario_file.outputs.grid,
            "threads": engine.threads,
            "sections": field.section_of_x,
        }

        status = 0
        if args.oracle:
            checks = crosscheck_for(scenario_file)
            for check in checks:
                logger.info(
                    "oracle %s: deviation %.3e (%s)",
                    check.name,
                    check.deviation,
                    "pass" if check.passed else "FAIL",
                )
            meta["oracle"] = [c.model_dump() | {"passed": c.passed} for c in checks]
            if not all(c.passed for c in checks):
                status = EXIT_ORACLE_FAILED
        write_sidecar(args.out, meta)
        return status

    parser.set_defaults(handler=run)
