"""Tests for unit handling, stationary primitives and the shared models."""

import logging
import math

import numpy as np
import pytest
from pydantic import ValidationError

from pipedyn.core import (
    charny_linearization,
    check_coordinate,
    from_pascal,
    mean_velocity,
    sound_speed,
    steady_profile,
    sum_series,
    to_pascal,
)
from pipedyn.errors import DomainError, InfeasibleError, NumericalError, PipedynError
from pipedyn.models import (
    GasProperties,
    LeakEvent,
    LineGeometry,
    Linearization,
    PipelineScenario,
    SeriesControl,
    SteadyState,
    UnitScale,
)


def _scenario(**overrides):
    data = dict(
        gas=GasProperties(c=383.3),
        line=LineGeometry(L=1e5),
        linearization=Linearization(two_a=0.1),
        steady=SteadyState(p_start=55e4, g0=30.0),
    )
    data.update(overrides)
    return PipelineScenario(**data)


class TestUnits:
    def test_scales(self):
        assert to_pascal(55.0, UnitScale.pa_1e4) == 55e4
        assert to_pascal(55.0, UnitScale.mpa_1e2) == 55e4
        assert to_pascal(55e4, UnitScale.pa) == 55e4

    def test_scale_from_string(self):
        assert to_pascal(1.5, "1e4Pa") == 15000.0

    def test_inverse(self):
        assert from_pascal(to_pascal(12.19, UnitScale.pa_1e4), UnitScale.pa_1e4) == pytest.approx(12.19)


class TestStationary:
    def test_sound_speed(self):
        assert sound_speed(0.9, 500.0, 300.0) == pytest.approx(math.sqrt(135000.0))

    def test_sound_speed_rejects_non_positive(self):
        with pytest.raises(DomainError):
            sound_speed(0.0, 500.0, 300.0)

    def test_linearization_round_trip(self):
        two_a = charny_linearization(0.03, 10.0, 0.7)
        assert two_a == pytest.approx(0.03 * 10.0 / 1.4)
        assert mean_velocity(two_a, 0.03, 0.7) == pytest.approx(10.0)

    def test_steady_profile(self):
        steady = SteadyState(p_start=55e4, g0=30.0)
        assert steady_profile(steady, 0.1, 0.0, 1e5) == 55e4
        assert steady_profile(steady, 0.1, 1e5, 1e5) == pytest.approx(25e4)

    def test_steady_profile_stops_at_line_end(self):
        steady = SteadyState(p_start=55e4, g0=30.0)
        with pytest.raises(DomainError):
            steady_profile(steady, 0.1, 1e5 + 1, 1e5)

    def test_coordinate_outside_line(self):
        with pytest.raises(DomainError):
            check_coordinate(-1.0, 1e5)
        with pytest.raises(DomainError):
            check_coordinate(1e5 + 1, 1e5)


class TestSumSeries:
    def test_sums_terms(self):
        assert sum_series(np.array([1.0, 0.5, 0.25]), SeriesControl(n_terms=3, tail_tol=1.0)) == 1.75

    def test_unconverged_tail_warns_once(self, caplog):
        control = SeriesControl(n_terms=1, tail_tol=1e-12)
        with caplog.at_level(logging.WARNING, logger="pipedyn.core"):
            sum_series(np.array([0.3]), control, "single term check")
            sum_series(np.array([0.3]), control, "single term check")
        warnings = [r for r in caplog.records if "single term check" in r.getMessage()]
        assert len(warnings) == 1

    def test_non_finite_sum(self):
        with pytest.raises(NumericalError):
            sum_series(np.array([1.0, np.inf]), SeriesControl(n_terms=2))


class TestErrors:
    def test_hierarchy(self):
        assert issubclass(DomainError, PipedynError)
        assert issubclass(InfeasibleError, ValueError)


class TestGasProperties:
    def test_derives_c(self):
        gas = GasProperties(z=0.9, R=500.0, T=300.0)
        assert gas.c == pytest.approx(math.sqrt(135000.0))
        assert gas.c2 == pytest.approx(135000.0)

    def test_needs_c_or_state(self):
        with pytest.raises(ValidationError):
            GasProperties(z=0.9, R=500.0)

    def test_inconsistent_c(self):
        with pytest.raises(ValidationError):
            GasProperties(z=0.9, R=500.0, T=300.0, c=383.3)


class TestPipelineScenario:
    def test_derived_end_pressure(self):
        s = _scenario()
        assert s.p_end == pytest.approx(25e4)
        assert s.diffusivity == pytest.approx(383.3**2 / 0.1)
        assert s.wave_time == pytest.approx(1e5 / 383.3)

    def test_inconsistent_end_pressure(self):
        with pytest.raises(ValidationError):
            _scenario(steady=SteadyState(p_start=55e4, p_end=40e4, g0=30.0))

    def test_leak_outside_line(self):
        with pytest.raises(ValidationError):
            _scenario(leaks=[LeakEvent(ell2=2e5, g_ut=1.0)])

    def test_first_leak(self):
        s = _scenario(leaks=[LeakEvent(ell2=5e3, g_ut=30.0), LeakEvent(ell2=6e3, g_ut=1.0)])
        assert s.leak.ell2 == 5e3
