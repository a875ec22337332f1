"""Tests for regime classification, localization, valve timing and the sequencer."""

import pytest

from pipedyn import tables
from pipedyn.dispatch import (
    Action,
    EmergencySequencer,
    EventKind,
    SequencerEvent,
    SequencerState,
    classify_regime,
    connector_opening_time,
    decide,
    drop_ratio_series,
    fixation_time,
    format_action_log,
    isolation_events,
    kappa_indicator,
    kappa_regime,
    kappa_series,
    locate_closed_valves,
    locate_leak,
    phi_factor,
    pressure_drop_ratio,
    regime_band,
    reopen_condition,
    valve_plan_around,
)
from pipedyn.errors import AlreadyExceededError, DomainError, NotReadyError, ProtocolError
from pipedyn.models import CompressionGuard, RatioSample, Regime
from pipedyn.series import pre_closure_field, ring_field

C, TWO_A, L = 383.3, 0.1, 1e5


def _ratio(scenario, t):
    return pressure_drop_ratio(
        scenario.steady.p_start,
        pre_closure_field(scenario, 0.0, t),
        scenario.p_end,
        pre_closure_field(scenario, scenario.line.L, t),
    )


def _accident(t=300.0, **extra):
    data = dict(
        t=t,
        kind=EventKind.fixation,
        p=1.0,
        regime=Regime.accident,
        ell1=9e3,
        ell2=1.45e4,
        ell3=1.9e4,
        p_ell1=12.19e4,
    )
    data.update(extra)
    return SequencerEvent(**data)


class TestDropRatio:
    def test_pending_below_min_drop(self):
        assert pressure_drop_ratio(55e4, 54e4, 25e4, 25e4 - 5) is None

    def test_ratio(self):
        assert pressure_drop_ratio(55e4, 54e4, 25e4, 24.5e4) == pytest.approx(2.0)

    def test_series_waits_for_wave(self):
        samples = drop_ratio_series(
            [100.0, 300.0], [54e4, 54e4], [24e4, 24e4], 55e4, 25e4, wave_time=200.0
        )
        assert samples[0].pending
        assert samples[1].p == pytest.approx(1.0)


class TestFixation:
    def test_first_extremum(self):
        series = [RatioSample(t=t, p=p) for t, p in [(0, None), (1, 3.0), (2, 2.0), (3, 2.5), (4, 2.2)]]
        assert fixation_time(series) == 2

    def test_monotone_takes_first_resolved(self):
        series = [RatioSample(t=t, p=p) for t, p in [(0, None), (1, 1.0), (2, 1.0), (3, 1.0)]]
        assert fixation_time(series) == 1

    def test_all_pending(self):
        with pytest.raises(NotReadyError):
            fixation_time([RatioSample(t=0.0), RatioSample(t=1.0)])

    def test_long_line_at_100_s_sampling(self):
        s = tables.long_line(5e3)
        ts = [100.0 * k for k in range(1, 7)]
        samples = drop_ratio_series(
            ts,
            [pre_closure_field(s, 0.0, t) for t in ts],
            [pre_closure_field(s, L, t) for t in ts],
            s.steady.p_start,
            s.p_end,
            wave_time=s.wave_time,
        )
        assert fixation_time(samples) == 300.0

    def test_report_period_carries_time_up(self):
        series = [RatioSample(t=t, p=p) for t, p in [(0, None), (1, 3.0), (2, 2.0), (3, 2.5), (4, 2.2)]]
        assert fixation_time(series, report_period=5.0) == 5.0
        assert fixation_time(series, report_period=2.0) == 2.0
        with pytest.raises(DomainError):
            fixation_time(series, report_period=0.0)

    @pytest.mark.parametrize(
        "line,period,expected",
        [(tables.long_line, 100.0, 300.0), (tables.short_line, 60.0, 120.0)],
    )
    def test_fine_sampling_reported_at_dispatch_cadence(self, line, period, expected):
        s = line(5e3)
        ts = [20.0 * k for k in range(1, 31)]
        samples = drop_ratio_series(
            ts,
            [pre_closure_field(s, 0.0, t) for t in ts],
            [pre_closure_field(s, s.line.L, t) for t in ts],
            s.steady.p_start,
            s.p_end,
            wave_time=s.wave_time,
        )
        assert fixation_time(samples) <= expected
        assert fixation_time(samples, report_period=period) == expected


class TestLocalization:
    def test_phi_at_fixation(self):
        assert phi_factor(300.0, L, TWO_A, C) == pytest.approx(0.45, abs=0.01)

    def test_midpoint(self):
        est = locate_leak(_ratio(tables.long_line(5e4), 300.0), 300.0, L, TWO_A, C)
        assert est.ell2 == pytest.approx(50000.0, abs=1.0)
        assert est.theta == pytest.approx(0.5)

    @pytest.mark.parametrize("ell2,expected,rel", [(5e3, 5512.41, 0.10), (95e3, 94800.88, 0.02)])
    def test_near_ends(self, ell2, expected, rel):
        est = locate_leak(_ratio(tables.long_line(ell2), 300.0), 300.0, L, TWO_A, C)
        assert est.ell2 == pytest.approx(expected, rel=rel)

    def test_clamped(self):
        est = locate_leak(-2.0, 300.0, L, TWO_A, C)
        assert est.clamped
        assert est.theta == 0.0

    def test_sign_law(self):
        assert locate_leak(2.0, 300.0, L, TWO_A, C).theta < 0.5
        assert locate_leak(0.5, 300.0, L, TWO_A, C).theta > 0.5


class TestRegime:
    def test_midpoint_is_accident(self):
        assert classify_regime(1.0, 300.0, L, TWO_A, C) == Regime.accident

    def test_minus_one_is_technological(self):
        assert classify_regime(-1.0, 300.0, L, TWO_A, C) == Regime.technological

    def test_wrapped_band(self):
        lo, hi = regime_band(300.0, L, TWO_A, C)
        assert lo < 0 and hi < 0
        assert classify_regime(lo + 0.01, 300.0, L, TWO_A, C) == Regime.accident
        assert classify_regime(hi * 1.5, 300.0, L, TWO_A, C) == Regime.accident

    def test_opposite_end_flows(self):
        assert classify_regime(-0.32, 60.0, 3e4, TWO_A, C) == Regime.technological

    def test_kappa(self):
        assert kappa_indicator(31.7e4, 14e4, 9.6e4) == pytest.approx(1.84, abs=0.01)
        assert kappa_regime(1.84) == Regime.accident
        assert kappa_regime(kappa_indicator(25.77e4, 14e4, 11.05e4)) == Regime.accident

    def test_kappa_series_on_ring(self):
        ring = tables.ring_main()
        series = kappa_series(ring, [50.0, 300.0])
        assert [t for t, _ in series] == [50.0, 300.0]
        mid, start = ring_field(ring, 1.5e4, 300.0), ring_field(ring, 0.0, 300.0)
        assert series[1][1] == pytest.approx(kappa_indicator(mid, ring.steady.p_start, start))


class TestValves:
    def test_locate_closed_valves(self):
        raw, _ = locate_closed_valves(13.36e4 + 1.22e4, 13.36e4, 420.0, 300.0, 10.0, TWO_A, C, 1e4)
        assert raw == pytest.approx(8809.6, abs=1.0)
        ell1, ell3 = locate_closed_valves(
            13.36e4 + 1.22e4, 13.36e4, 420.0, 300.0, 10.0, TWO_A, C, 1e4, resolution=1000.0
        )
        assert abs(ell1 - 9000.0) <= 100.0
        assert abs(ell3 - 19000.0) <= 100.0
        assert abs(ell1 - 1e4) / 1e4 == pytest.approx(0.1)

    def test_resolution_must_be_positive(self):
        with pytest.raises(DomainError):
            locate_closed_valves(14.58e4, 13.36e4, 420.0, 300.0, 10.0, TWO_A, C, 1e4, resolution=0.0)

    def test_connector_opening_time(self):
        t2 = connector_opening_time(
            300.0, 1e4, 10.0, CompressionGuard(epsilon=1.35), 14e4, 13.36e4, TWO_A, C
        )
        assert t2 - 300.0 == pytest.approx(255.0, abs=10.0)

    def test_guard_already_exceeded(self):
        with pytest.raises(AlreadyExceededError):
            connector_opening_time(300.0, 1e4, 10.0, CompressionGuard(), 14e4, 19e4, TWO_A, C)

    def test_reopen_condition(self):
        guard = CompressionGuard()
        assert reopen_condition(14e4, 15e4, 12e4, 12.5e4, guard)
        assert not reopen_condition(14e4, 19e4, 12e4, 12.5e4, guard)
        assert not reopen_condition(14e4, 15e4, 12e4, 11.5e4, guard)

    def test_plan_is_clipped_to_line(self):
        assert valve_plan_around(2e3, 3e4, 1e4) == (0.0, 1e4)


class TestSequencer:
    def test_full_cycle(self):
        seq = EmergencySequencer(p1=14e4)
        log = seq.run(
            [
                _accident(),
                SequencerEvent(t=360.0, kind=EventKind.sample, p_start=19e4, p_ell1=12.5e4),
                SequencerEvent(t=420.0, kind=EventKind.sample, p_start=15e4, p_ell1=12.5e4),
                SequencerEvent(t=3600.0, kind=EventKind.repaired),
            ]
        )
        assert [a.action for a in log] == ["locate", "close", "open_connectors", "restore"]
        assert log[2].t == 420.0
        assert seq.state == SequencerState.stationary

    def test_technological_is_advisory(self):
        seq = EmergencySequencer(p1=14e4)
        actions = seq.feed(_accident(regime=Regime.technological))
        assert [a.action for a in actions] == ["advisory"]
        assert seq.state == SequencerState.stationary

    def test_samples_before_closing_are_ignored(self):
        seq = EmergencySequencer(p1=14e4)
        assert seq.feed(SequencerEvent(t=10.0, kind=EventKind.sample, p_start=15e4, p_ell1=13e4)) == []

    def test_out_of_order(self):
        seq = EmergencySequencer(p1=14e4)
        seq.feed(_accident(t=300.0))
        with pytest.raises(ProtocolError):
            seq.feed(SequencerEvent(t=200.0, kind=EventKind.repaired))

    def test_accident_needs_valves(self):
        seq = EmergencySequencer(p1=14e4)
        with pytest.raises(ProtocolError):
            seq.feed(_accident(ell1=None))

    def test_action_log_format(self):
        text = format_action_log([Action(t=300.0, action="close", param1=9000.0, param2=19000.0)])
        assert text == "t_s,action,param1,param2\n300.0,close,9000.0,19000.0\n"


class TestDecide:
    @pytest.fixture(scope="class")
    def decision(self):
        return decide(tables.long_line(5e4), [100.0 * k for k in range(7)])

    def test_mid_leak(self, decision):
        assert decision.t1 == 300.0
        assert decision.regime == Regime.accident
        assert decision.theta == pytest.approx(0.5)
        assert decision.valve_plan.ell1 < 5e4 < decision.valve_plan.ell3
        assert decision.valve_plan.t2 >= decision.t1

    def test_early_samples_pending(self, decision):
        assert [s.pending for s in decision.p_series[:3]] == [True, True, True]

    def test_nothing_resolved(self):
        decision = decide(tables.long_line(5e4), [0.0, 100.0])
        assert decision.regime == Regime.pending
        assert decision.t1 is None

    def test_isolation_events(self, decision):
        events = isolation_events(tables.long_line(5e4), decision, step=60.0, horizon=600.0)
        assert events[0].kind == EventKind.fixation
        assert len(events) == 11
        log = EmergencySequencer(p1=55e4).run(events)
        names = [a.action for a in log]
        assert names[:2] == ["locate", "close"]
        if "open_connectors" in names:
            assert names.index("open_connectors") > names.index("close")
