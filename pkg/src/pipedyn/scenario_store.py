"""Scenario files: loading with diagnostics, normalization and lookup by name.

Commands accept either a path or the name of a scenario kept in a store
directory (the bundled `scenarios/` by default), so

    pipedyn simulate mid_leak

and

    pipedyn simulate scenarios/mid_leak.json

load the same file.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path

from pydantic import BaseModel, ValidationError

from pipedyn.scenario_models import FieldKind, ScenarioFile

logger = logging.getLogger(__name__)

SCENARIO_DIR = Path(__file__).parent.parent.parent / "scenarios"


def load_scenario(path: Path) -> ScenarioFile:
    """Parse and validate a scenario file.

    Raises FileNotFoundError, or pydantic.ValidationError for malformed JSON
    and schema violations alike; the CLI maps both to exit code 2.
    """
    text = Path(path).read_text(encoding="utf-8")
    return ScenarioFile.model_validate_json(text)


def dump_normalized(scenario: ScenarioFile) -> str:
    """Canonical JSON: defaults filled in, keys sorted, stable across runs."""
    return json.dumps(scenario.model_dump(mode="json"), indent=2, sort_keys=True) + "\n"


class ScenarioSummary(BaseModel):
    name: str
    field: FieldKind
    length: float
    leaks: int
    optimize: bool
    path: Path


class ScenarioStore:
    """A directory of validated scenario files addressed by scenario name."""

    def __init__(self, directory: Path = SCENARIO_DIR) -> None:
        self.directory = Path(directory)

    def _path(self, name: str) -> Path:
        return self.directory / f"{name}.json"

    def resolve(self, ref: str | Path) -> Path:
        """An existing file path wins; otherwise ref is a name in the store."""
        candidate = Path(ref)
        if candidate.is_file():
            return candidate
        named = self._path(str(ref))
        if candidate.suffix != ".json" and named.is_file():
            return named
        known = ", ".join(s.name for s in self.summaries()) or "none"
        raise FileNotFoundError(f"no scenario file or stored scenario {str(ref)!r} (stored: {known})")

    def load(self, ref: str | Path) -> ScenarioFile:
        return load_scenario(self.resolve(ref))

    def save(self, scenario: ScenarioFile, *, overwrite: bool = False) -> Path:
        """Store the normalized form under scenario.name."""
        path = self._path(scenario.name)
        if path.exists() and not overwrite:
            raise FileExistsError(f"scenario {scenario.name!r} already stored at {path}")
        self.directory.mkdir(parents=True, exist_ok=True)
        path.write_text(dump_normalized(scenario), encoding="utf-8")
        logger.info("Stored scenario %s at %s", scenario.name, path)
        return path

    def summaries(self) -> list[ScenarioSummary]:
        """Valid scenarios in the store, sorted by file name; invalid files are skipped."""
        if not self.directory.is_dir():
            return []
        found = []
        for path in sorted(self.directory.glob("*.json")):
            try:
                sf = load_scenario(path)
            except ValidationError as e:
                logger.warning("skipping %s: %d validation error(s)", path.name, e.error_count())
                continue
            found.append(
                ScenarioSummary(
                    name=sf.name,
                    field=sf.outputs.field,
                    length=sf.line.L,
                    leaks=len(sf.events.leaks),
                    optimize=sf.optimize is not None,
                    path=path,
                )
            )
        return found
