"""tables: regenerate a reference table by key."""

from __future__ import annotations

import argparse
from pathlib import Path

from pipedyn.engine import FieldEngine
from pipedyn.output import emit, render_csv, write_sidecar
from pipedyn.tables import build_table, list_tables


def register(subparsers: argparse._SubParsersAction, engine: FieldEngine) -> None:
    parser = subparsers.add_parser("tables", help="Regenerate a reference table")
    parser.add_argument("key", nargs="?", choices=list_tables(), help="Table key (omit to list)")
    parser.add_argument("--out", type=Path, help="CSV path (default stdout)")
    parser.add_argument(
        "--with-reference",
        action="store_true",
        help="Append the reference value and the register key of excluded rows",
    )

    def run(args: argparse.Namespace) -> int:
        if args.key is None:
            emit("\n".join(list_tables()) + "\n", args.out)
            return 0
        table = build_table(args.key)
        columns, rows = table.columns, table.rows
        if args.with_reference:
            columns = [*columns, "reference", "register"]
            refs = table.reference or [None] * len(rows)
            keys = table.excluded or [None] * len(rows)
            rows = [[*row, ref, key] for row, ref, key in zip(rows, refs, keys)]
        emit(render_csv(columns, rows), args.out)
        write_sidecar(args.out, {"command": "tables", "key": table.key, "title": table.title})
        return 0

    parser.set_defaults(handler=run)
