"""CSV writers and run-metadata sidecars.

Numbers are written as the shortest decimal that round-trips (repr), so
identical inputs give byte-identical files.  Anything that changes from
run to run goes into the <out>.meta.json sidecar, never into the CSV.
"""

from __future__ import annotations

import io
import json
import logging
import sys
from collections.abc import Iterable, Sequence
from datetime import datetime, timezone
from pathlib import Path

logger = logging.getLogger(__name__)

Cell = float | int | str | None


def format_cell(value: Cell) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def render_csv(header: Sequence[str], rows: Iterable[Sequence[Cell]]) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(format_cell(v) for v in row) + "\n")
    return buf.getvalue()


def emit(text: str, out: Path | None) -> None:
    """Write to out, or stdout when out is None."""
    if out is None:
        sys.stdout.write(text)
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, encoding="utf-8", newline="\n")
    logger.info("Wrote %s", out)


def sidecar_path(out: Path) -> Path:
    return out.with_name(out.name + ".meta.json")


def write_sidecar(out: Path | None, meta: dict) -> None:
    if out is None:
        return
    from pipedyn import __version__

    payload = {
        "generated_at": datetime.now(timezone.utc).isoformat(),
        "pipedyn_version": __version__,
        **meta,
    }
    sidecar_path(out).write_text(
        json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n", encoding="utf-8"
    )
