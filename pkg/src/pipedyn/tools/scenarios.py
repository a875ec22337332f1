"""scenarios: list the stored scenarios or add one to a store."""

from __future__ import annotations

import argparse
from pathlib import Path

from pipedyn.engine import FieldEngine
from pipedyn.output import emit, render_csv
from pipedyn.scenario_store import SCENARIO_DIR, ScenarioStore, load_scenario


def register(subparsers: argparse._SubParsersAction, engine: FieldEngine) -> None:
    parser = subparsers.add_parser("scenarios", help="List or store named scenarios")
    parser.add_argument(
        "--dir",
        type=Path,
        default=SCENARIO_DIR,
        help="Store directory (default: the bundled scenarios)",
    )
    actions = parser.add_subparsers(dest="action", required=True)

    listing = actions.add_parser("list", help="Summarize the valid scenarios in the store")
    listing.add_argument("--out", type=Path, help="CSV path (default stdout)")

    save = actions.add_parser("save", help="Validate a scenario file and store its normalized form")
    save.add_argument("file", type=Path, help="Scenario JSON file")
    save.add_argument("--force", action="store_true", help="Replace a stored scenario of the same name")

    def run(args: argparse.Namespace) -> int:
        store = ScenarioStore(args.dir)
        if args.action == "save":
            path = store.save(load_scenario(args.file), overwrite=args.force)
            emit(f"{path}\n", None)
            return 0
        rows = [
            (s.name, s.field.value, s.length, s.leaks, "yes" if s.optimize else "no")
            for s in store.summaries()
        ]
        emit(render_csv(["name", "field", "L_m", "leaks", "optimize"], rows), args.out)
        return 0

    parser.set_defaults(handler=run)
