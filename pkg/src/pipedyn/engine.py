"""Grid evaluation of the closed-form fields.

FieldEngine evaluates one field family over an (x, t) grid, spreading the x
rows over a thread pool capped by PIPEDYN_THREADS.  Rows are reassembled in
order, so output does not depend on the thread count.  Finished grids are
cached per scenario.
"""

from __future__ import annotations

import hashlib
import logging
import math
import threading
from collections import OrderedDict
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from pipedyn.config import thread_cap
from pipedyn.errors import DomainError
from pipedyn.models import LineSection, PipelineScenario, PressureField, SectionState
from pipedyn.scenario_models import FieldKind, ScenarioFile
from pipedyn.series import (
    coupled_parallel_field,
    parallel_emergency_field,
    post_closure_field,
    pre_closure_field,
    relief_field,
    ring_field,
    section_of,
)

logger = logging.getLogger(__name__)

PointFn = Callable[[float, float], float]

DEFAULT_CACHE_SIZE = 16


def _coupled_section(line: LineSection, x: float, ell2: float) -> LineSection:
    if line == LineSection.undamaged:
        return line
    return LineSection.damaged_before if x <= ell2 else LineSection.damaged_after


def point_function(scenario_file: ScenarioFile) -> tuple[PointFn, Callable[[float], str]]:
    """The point evaluator of the file's field kind and its section tagger."""
    kind = scenario_file.outputs.field
    events = scenario_file.events
    if kind == FieldKind.post_closure:
        state: SectionState = scenario_file.section_state()
        return (
            lambda x, t: post_closure_field(state, section_of(state, x), x, t),
            lambda x: str(section_of(state, x)),
        )

    scenario: PipelineScenario = scenario_file.to_scenario()

    def whole(x: float) -> str:
        return "line"

    if kind == FieldKind.pre_closure:
        return lambda x, t: pre_closure_field(scenario, x, t), whole
    if kind == FieldKind.relief:
        return lambda x, t: relief_field(scenario, x, t), whole
    if kind == FieldKind.ring:
        form = scenario_file.outputs.ring_form
        return lambda x, t: ring_field(scenario, x, t, form=form), lambda x: "ring"
    if kind == FieldKind.emergency:
        t1 = events.valve_time if events.valve_time is not None else math.inf
        return lambda x, t: parallel_emergency_field(scenario, t1, x, t), whole
    if kind == FieldKind.coupled:
        if scenario.leak is None:
            raise DomainError("the coupled field needs a leak event")
        ell2 = scenario.leak.ell2

        def coupled(x: float, t: float) -> float:
            section = _coupled_section(events.line, x, ell2)
            return coupled_parallel_field(events.variant, scenario, section, x, t)

        return coupled, lambda x: _coupled_section(events.line, x, ell2).value
    raise DomainError(f"unknown field kind {kind}")


class FieldEngine:
    """Evaluates and caches pressure grids."""

    def __init__(self, threads: int | None = None, cache_size: int = DEFAULT_CACHE_SIZE) -> None:
        self.threads = threads if threads is not None else thread_cap()
        self.cache_size = max(1, cache_size)
        self._fields: OrderedDict[str, PressureField] = OrderedDict()
        self._lock = threading.Lock()

    @staticmethod
    def _key(scenario_file: ScenarioFile, xs: np.ndarray, ts: np.ndarray) -> str:
        h = hashlib.sha256(scenario_file.model_dump_json().encode())
        h.update(np.ascontiguousarray(xs, dtype=float).tobytes())
        h.update(np.ascontiguousarray(ts, dtype=float).tobytes())
        return h.hexdigest()

    def evaluate(
        self,
        scenario_file: ScenarioFile,
        xs: np.ndarray | None = None,
        ts: np.ndarray | None = None,
    ) -> PressureField:
        if xs is None or ts is None:
            xs, ts = scenario_file.grid()
        key = self._key(scenario_file, xs, ts)
        with self._lock:
            cached = self._fields.get(key)
            if cached is not None:
                self._fields.move_to_end(key)
                return cached

        point, tag = point_function(scenario_file)
        logger.info(
            "Evaluating %s field on %dx%d grid (%d threads)",
            scenario_file.outputs.field.value,
            xs.size,
            ts.size,
            self.threads,
        )
        rows = self.map(lambda x: [point(float(x), float(t)) for t in ts], list(xs))
        field = PressureField(
            xs=np.asarray(xs, dtype=float),
            ts=np.asarray(ts, dtype=float),
            values=np.array(rows, dtype=float).reshape(len(xs), len(ts)),
            section_of_x=[tag(float(x)) for x in xs],
        )

        with self._lock:
            field = self._fields.setdefault(key, field)
            self._fields.move_to_end(key)
            while len(self._fields) > self.cache_size:
                evicted, _ = self._fields.popitem(last=False)
                logger.debug("Evicted cached grid %s", evicted[:12])
        return field

    def map(self, fn: Callable, items: list) -> list:
        """Ordered parallel map."""
        if self.threads <= 1 or len(items) <= 1:
            return [fn(item) for item in items]
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            return list(pool.map(fn, items))

    def clear(self) -> None:
        with self._lock:
            self._fields.clear()
