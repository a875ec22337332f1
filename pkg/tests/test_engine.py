"""Tests for grid evaluation, caching and the thread cap."""

import os

import numpy as np
import pytest

from pipedyn.config import DEFAULT_THREADS, THREADS_VAR, thread_cap
from pipedyn.engine import FieldEngine, point_function
from pipedyn.errors import DomainError
from pipedyn.scenario_models import FieldKind
from pipedyn.scenario_store import SCENARIO_DIR, load_scenario


@pytest.fixture(scope="module")
def mid_leak():
    return load_scenario(SCENARIO_DIR / "mid_leak.json")


@pytest.fixture(scope="module")
def closure():
    return load_scenario(SCENARIO_DIR / "closure.json")


class TestFieldEngine:
    def test_shape(self, mid_leak):
        field = FieldEngine(threads=1).evaluate(mid_leak)
        assert field.values.shape == (13, 9)
        assert field.section_of_x == ["line"] * 13

    def test_thread_count_does_not_change_values(self, mid_leak):
        one = FieldEngine(threads=1).evaluate(mid_leak)
        four = FieldEngine(threads=4).evaluate(mid_leak)
        assert np.array_equal(one.values, four.values)

    def test_cached(self, mid_leak):
        engine = FieldEngine(threads=2)
        first = engine.evaluate(mid_leak)
        assert engine.evaluate(mid_leak) is first
        engine.clear()
        assert engine.evaluate(mid_leak) is not first

    def test_explicit_grid(self, mid_leak):
        xs, ts = np.array([0.0, 1e5]), np.array([0.0])
        field = FieldEngine(threads=1).evaluate(mid_leak, xs, ts)
        assert field.values[:, 0] == pytest.approx([55e4, 25e4])

    def test_post_closure_sections(self, closure):
        field = FieldEngine(threads=1).evaluate(closure)
        assert field.section_of_x[0] == "1"
        assert field.section_of_x[6] == "2"
        assert field.section_of_x[-1] == "3"

    def test_cache_evicts_oldest(self, mid_leak, closure):
        engine = FieldEngine(threads=1, cache_size=1)
        first = engine.evaluate(mid_leak)
        engine.evaluate(closure)
        assert engine.evaluate(mid_leak) is not first

    def test_recently_used_grid_stays_cached(self, mid_leak, closure):
        engine = FieldEngine(threads=1, cache_size=2)
        first = engine.evaluate(mid_leak)
        engine.evaluate(closure)
        engine.evaluate(mid_leak)
        engine.evaluate(mid_leak, np.array([0.0]), np.array([0.0]))
        assert engine.evaluate(mid_leak) is first

    def test_ordered_map(self):
        assert FieldEngine(threads=3).map(lambda v: v * v, list(range(10))) == [v * v for v in range(10)]


class TestPointFunction:
    def test_coupled_needs_leak(self, mid_leak):
        sf = mid_leak.model_copy(
            update={
                "events": mid_leak.events.model_copy(update={"leaks": []}),
                "outputs": mid_leak.outputs.model_copy(update={"field": FieldKind.coupled}),
            }
        )
        with pytest.raises(DomainError):
            point_function(sf)


class TestThreadCap:
    def test_from_environment(self, monkeypatch):
        monkeypatch.setenv(THREADS_VAR, "2")
        assert thread_cap() == 2

    def test_non_integer(self, monkeypatch):
        monkeypatch.setenv(THREADS_VAR, "many")
        assert thread_cap() == 1

    def test_at_least_one(self, monkeypatch):
        monkeypatch.setenv(THREADS_VAR, "0")
        assert thread_cap() == 1

    def test_default(self, monkeypatch):
        monkeypatch.delenv(THREADS_VAR, raising=False)
        assert thread_cap() == min(DEFAULT_THREADS, os.cpu_count() or 1)
