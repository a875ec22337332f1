"""Tests for the closed-form field families."""

import math

import pytest

from pipedyn import tables
from pipedyn.errors import DomainError, InfeasibleError
from pipedyn.models import BoundaryVariant, LeakEvent, LineGeometry, LineSection, NewSteadySection
from pipedyn.series import (
    RingForm,
    coupled_leak_ceiling,
    coupled_parallel_field,
    decay_rate_from_observation,
    emptied_section_mass,
    influx_discharge_new_steady,
    empirical_end_decay,
    fit_decay_rate,
    hydraulic_junction_location,
    new_steady_profile,
    parallel_emergency_field,
    post_closure_field,
    pre_closure_field,
    relief_derived,
    relief_field,
    ring_field,
    ring_mean_pressure,
    section_of,
    valve_closing_time,
    valve_closing_time_scan,
)


@pytest.fixture(scope="module")
def mid_line():
    return tables.long_line(5e4)


@pytest.fixture(scope="module")
def ring():
    return tables.ring_main()


@pytest.fixture(scope="module")
def closure():
    return tables.closure_state()


class TestPreClosure:
    def test_starts_from_steady_profile(self, mid_line):
        assert pre_closure_field(mid_line, 0.0, 0.0) == 55e4
        assert pre_closure_field(mid_line, 1e5, 0.0) == pytest.approx(25e4)

    def test_pressure_at_leak(self, mid_line):
        assert pre_closure_field(mid_line, 5e4, 100.0) == pytest.approx(379484.0, rel=2e-3)

    def test_midpoint_leak_is_symmetric(self, mid_line):
        for t in (300.0, 600.0):
            drop_start = 55e4 - pre_closure_field(mid_line, 0.0, t)
            drop_end = 25e4 - pre_closure_field(mid_line, 1e5, t)
            assert drop_start == pytest.approx(drop_end, rel=1e-9)

    @pytest.mark.parametrize("x", [0.0, 1e5])
    def test_reference_values(self, x):
        s = tables.long_line(5e3)
        values = tables.PRE_CLOSURE_LONG[(5e3, x)]
        for k, expected in enumerate(values[:3]):
            assert pre_closure_field(s, x, 100.0 * (k + 1)) == pytest.approx(expected * 1e4, rel=0.02)

    def test_leak_at_end_is_rejected(self):
        with pytest.raises(InfeasibleError):
            pre_closure_field(tables.long_line(0.0), 0.0, 10.0)

    def test_negative_time(self, mid_line):
        with pytest.raises(DomainError):
            pre_closure_field(mid_line, 0.0, -1.0)


class TestEmergencyField:
    @pytest.mark.parametrize(
        "ell,ell1,beta,g_ut,t,expected",
        [
            (30000.0, 35000.0, 0.9e-3, 3.0, 250.0, 248656.0),
            (70000.0, 75000.0, 5.8e-3, 15.0, 500.0, 197788.0),
        ],
    )
    def test_end_pressure(self, ell, ell1, beta, g_ut, t, expected):
        s = tables.emergency_line(ell, ell1, beta, g_ut)
        assert parallel_emergency_field(s, math.inf, 1e5, t) == pytest.approx(expected, rel=0.02)

    def test_needs_decay_rate(self):
        s = tables.emergency_line(3e4, 3.5e4, 0.9e-3, 3.0)
        no_beta = s.model_copy(update={"leaks": [LeakEvent(ell2=3.5e4, g_ut=3.0)]})
        with pytest.raises(DomainError):
            parallel_emergency_field(no_beta, math.inf, 1e5, 10.0)

    def test_initial_state(self):
        s = tables.emergency_line(3e4, 3.5e4, 0.9e-3, 3.0)
        assert parallel_emergency_field(s, math.inf, 2e4, 0.0) == pytest.approx(55e4 - 0.1 * 30 * 2e4)


class TestValveTiming:
    def test_closed_form(self):
        timing = valve_closing_time(55e4, 30.0, 0.1, 3e4, 0.9e-3, 383.3)
        p0 = 55e4 - 0.1 * 30.0 * 3e4
        expected = 0.2 * 3e4 * p0 / (3 * 383.3**2 * (55e4 * 0.9e-3 / 9.81 - 30.0))
        assert timing.t1 == pytest.approx(expected)
        assert timing.t1 == timing[0]

    def test_scan_crossing_moves_with_drop(self):
        early = valve_closing_time_scan(55e4, 30.0, 0.1, 3e4, 0.0057, 383.3, drop_fraction=0.1)
        late = valve_closing_time_scan(55e4, 30.0, 0.1, 3e4, 0.0057, 383.3, drop_fraction=0.2)
        assert 0 < early < late

    def test_bad_drop_fraction(self):
        with pytest.raises(DomainError):
            valve_closing_time(55e4, 30.0, 0.1, 3e4, 0.9e-3, 383.3, drop_fraction=1.5)


class TestEmpiricalDecay:
    def test_reference_values(self):
        assert empirical_end_decay(25e4, 0.1, 25 / 55, 1.3e-3, 250.0) == pytest.approx(24.33e4, rel=0.02)
        assert empirical_end_decay(25e4, 0.5, 25 / 55, 2.1e-3, 500.0) == pytest.approx(18.22e4, rel=0.02)

    def test_fit_inverts_decay(self):
        p = empirical_end_decay(25e4, 0.3, 0.45, 2e-3, 400.0)
        assert fit_decay_rate(p, 25e4, 0.3, 0.45, 400.0) == pytest.approx(2e-3)

    def test_observation_needs_decay(self):
        with pytest.raises(DomainError):
            decay_rate_from_observation(25e4, 25e4, 0.1, 55e4, 25e4, 300.0)


class TestCoupledField:
    @pytest.fixture(scope="class")
    def parallel(self):
        return tables.parallel_line(2.5e4, 12.0)

    @pytest.mark.parametrize("variant", list(BoundaryVariant))
    def test_starts_steady(self, parallel, variant):
        assert coupled_parallel_field(variant, parallel, LineSection.undamaged, 1e4, 0.0) == pytest.approx(
            55e4 - 0.1 * 15 * 1e4
        )

    def test_leak_pulls_damaged_line_lower(self, parallel):
        steady = 55e4 - 0.1 * 15 * 2.5e4
        damaged = coupled_parallel_field(
            BoundaryVariant.fixed_end, parallel, LineSection.damaged_after, 2.5e4, 300.0
        )
        undamaged = coupled_parallel_field(
            BoundaryVariant.fixed_end, parallel, LineSection.undamaged, 2.5e4, 300.0
        )
        assert damaged < undamaged < steady

    def test_section_must_match_side_of_leak(self, parallel):
        with pytest.raises(DomainError):
            coupled_parallel_field(
                BoundaryVariant.fixed_end, parallel, LineSection.damaged_before, 3e4, 10.0
            )

    def test_constant_history_matches_constant_leak(self, parallel):
        direct = coupled_parallel_field(
            BoundaryVariant.flux_both, parallel, LineSection.undamaged, 5e4, 120.0
        )
        integrated = coupled_parallel_field(
            BoundaryVariant.flux_both,
            parallel,
            LineSection.undamaged,
            5e4,
            120.0,
            g_ut_history=lambda s: 12.0,
        )
        assert integrated == pytest.approx(direct, rel=1e-3)

    def test_leak_ceiling(self, parallel):
        assert coupled_leak_ceiling(BoundaryVariant.fixed_end, parallel) == pytest.approx(56250.0)
        assert coupled_leak_ceiling(BoundaryVariant.fixed_start, parallel) == pytest.approx(26250.0)
        with pytest.raises(DomainError):
            coupled_leak_ceiling(BoundaryVariant.flux_both, parallel)

    @pytest.mark.parametrize("variant", [BoundaryVariant.fixed_end, BoundaryVariant.fixed_start])
    def test_drop_at_leak_stays_below_ceiling(self, parallel, variant):
        steady = 55e4 - 0.1 * 15 * 2.5e4
        ceiling = coupled_leak_ceiling(variant, parallel)
        drops = [
            steady - coupled_parallel_field(variant, parallel, LineSection.damaged_after, 2.5e4, t)
            for t in (300.0, 1500.0, 3e4)
        ]
        assert drops == sorted(drops)
        assert drops[-1] <= ceiling
        assert drops[-1] == pytest.approx(ceiling, rel=0.03)

    def test_flux_both_lines_meet_at_both_junctions(self, parallel):
        for t in (300.0, 900.0):
            for x, damaged in ((0.0, LineSection.damaged_before), (1e5, LineSection.damaged_after)):
                a = coupled_parallel_field(BoundaryVariant.flux_both, parallel, LineSection.undamaged, x, t)
                b = coupled_parallel_field(BoundaryVariant.flux_both, parallel, damaged, x, t)
                assert a == pytest.approx(b, rel=1e-9)


class TestReliefField:
    def test_flat_limit(self):
        flat = tables.short_line(1.2e4)
        tilted = flat.model_copy(update={"line": LineGeometry(L=3e4, sin_alpha=1e-12)})
        for x in (0.0, 1.5e4, 3e4):
            assert relief_field(tilted, x, 120.0) == pytest.approx(relief_field(flat, x, 120.0), abs=1e-4)

    def test_flat_line_has_no_relief_rates(self):
        derived = relief_derived(tables.short_line(1.2e4))
        assert derived.lambda1 == 0.0
        assert derived.lambda2 == 0.0

    def test_starts_uniform(self):
        assert relief_field(tables.short_line(1.2e4), 5e3, 0.0) == 14e4


class TestRingField:
    def test_periodic(self, ring):
        for t in (20.0, 100.0):
            assert ring_field(ring, 0.0, t) == pytest.approx(ring_field(ring, 3e4, t), abs=1e-6)

    def test_reference_start_pressure(self, ring):
        assert ring_field(ring, 0.0, 50.0) == pytest.approx(122717.5, rel=0.02)

    def test_mean_depends_on_total_offtake_only(self, ring):
        moved = tables.ring_main(offtakes=((1e3, 5.0), (9e3, 2.0), (2.2e4, 3.0)))
        n = 400
        grid = [3e4 * k / n for k in range(n)]
        mean = math.fsum(ring_field(moved, x, 100.0, form=RingForm.EIGEN) for x in grid) / n
        assert mean == pytest.approx(ring_mean_pressure(ring, 100.0), abs=1e-4)

    @pytest.mark.parametrize("x", sorted(tables.RING_GRID))
    def test_default_form_reproduces_grid(self, ring, x):
        for t, expected in zip(tables.RING_TIMES, tables.RING_GRID[x]):
            assert ring_field(ring, x, t) == pytest.approx(expected, rel=0.02)

    def test_interior_rises_above_ends(self, ring):
        assert ring_field(ring, 1.2e4, 50.0) - ring_field(ring, 0.0, 50.0) > 1e5

    def test_tabulated_form_starts_flat(self, ring):
        for x in (0.0, 7.5e3, 2e4):
            assert ring_field(ring, x, 0.0, form=RingForm.TABULATED) == pytest.approx(125000.0)

    def test_unknown_form(self, ring):
        with pytest.raises(DomainError):
            ring_field(ring, 0.0, 10.0, form="spectral")


class TestJunction:
    def test_first_row(self):
        assert hydraulic_junction_location(3e4, 1.0, 0.1, 383.3, 50.0) == pytest.approx(13372.0, abs=1.0)

    def test_grows_with_demand(self):
        low = hydraulic_junction_location(3e4, 1.0, 0.1, 383.3, 300.0)
        high = hydraulic_junction_location(3e4, 1.2, 0.1, 383.3, 300.0)
        assert high > low

    def test_literal_reading_is_infeasible(self):
        with pytest.raises(InfeasibleError):
            hydraulic_junction_location(3e4, 1.0, 0.1, 383.3, 50.0, literal=True)


class TestPostClosure:
    @pytest.mark.parametrize("section,x,dt,expected", tables.POST_CLOSURE)
    def test_reference_values(self, closure, section, x, dt, expected):
        assert post_closure_field(closure, section, x, closure.t1 + dt) == pytest.approx(expected, rel=0.02)

    def test_continuous_at_closure(self, closure):
        assert post_closure_field(closure, 2, 1.45e4, closure.t1) == pytest.approx(11.56e4)

    def test_before_closure(self, closure):
        with pytest.raises(DomainError):
            post_closure_field(closure, 1, 0.0, closure.t1 - 1)

    def test_outside_section(self, closure):
        with pytest.raises(DomainError):
            post_closure_field(closure, 1, 2e4, closure.t1 + 10)

    def test_section_of(self, closure):
        assert [section_of(closure, x) for x in (0.0, 1e4, 1.5e4, 2.5e4)] == [1, 1, 2, 3]


class TestNewSteady:
    @pytest.mark.parametrize("x,expected", tables.NEW_STEADY)
    def test_profile(self, x, expected):
        assert new_steady_profile(tables.new_steady_inputs(), x) == pytest.approx(expected, rel=0.02)

    def test_profile_decreases(self):
        inputs = tables.new_steady_inputs()
        values = [new_steady_profile(inputs, x) for x, _ in tables.NEW_STEADY]
        assert values == sorted(values, reverse=True)

    def test_continuous_at_section_borders(self):
        inputs = tables.new_steady_inputs()
        for x, left, right in (
            (inputs.ell1, NewSteadySection.upstream, NewSteadySection.bypass),
            (inputs.ell3, NewSteadySection.bypass, NewSteadySection.downstream),
        ):
            assert influx_discharge_new_steady(inputs, x, left) == pytest.approx(
                influx_discharge_new_steady(inputs, x, right)
            )

    def test_section_mismatch(self):
        with pytest.raises(DomainError):
            influx_discharge_new_steady(tables.new_steady_inputs(), 25e3, NewSteadySection.upstream)


class TestEmptiedSection:
    def test_no_drop_no_loss(self):
        assert emptied_section_mass(1e4, 2e4, 383.3, 0.0) == 0.0

    def test_linear_in_section_length(self):
        one = emptied_section_mass(1e4, 2e4, 383.3, -5e3)
        two = emptied_section_mass(1e4, 3e4, 383.3, -5e3)
        assert one > 0
        assert two == pytest.approx(2 * one)

    def test_needs_ordered_valves(self):
        with pytest.raises(DomainError):
            emptied_section_mass(2e4, 1e4, 383.3, -5e3)
