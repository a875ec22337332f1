"""Closed-form time-domain solutions of the linearized transient equation.

    P_xx = (2a/c²)·P_t + 2a·G·δ(x - ℓ)

Every field is a truncated eigenfunction series evaluated at a single (x, t);
the mode sums are vectorized over the summation index with numpy.  Grid
evaluation lives in pipedyn.engine.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from enum import Enum
from typing import NamedTuple

import numpy as np

from pipedyn.core import check_coordinate, modes, steady_profile, sum_series
from pipedyn.errors import DomainError, InfeasibleError, SingularityError
from pipedyn.models import (
    BoundaryVariant,
    LeakEvent,
    LineSection,
    NewSteadyInputs,
    NewSteadySection,
    PipelineScenario,
    ReliefDerived,
    SectionState,
    SeriesControl,
)
from pipedyn.oracle import root_scan

logger = logging.getLogger(__name__)

PI2 = math.pi**2


def _control(scenario: PipelineScenario, n_terms: int | None) -> SeriesControl:
    if n_terms is None:
        return scenario.series
    return SeriesControl(n_terms=n_terms, tail_tol=scenario.series.tail_tol)


def _require_leak(scenario: PipelineScenario) -> LeakEvent:
    leak = scenario.leak
    if leak is None:
        raise DomainError("scenario has no leak event")
    return leak


def _interior_leak(scenario: PipelineScenario) -> LeakEvent:
    leak = _require_leak(scenario)
    if leak.ell2 <= 0 or leak.ell2 >= scenario.line.L:
        raise InfeasibleError("a leak at a line end collides with the boundary condition")
    return leak


def _exp_diff(rate_b: float, rate_a: np.ndarray, t: float) -> np.ndarray:
    """(e^{-b·t} - e^{-a·t}) / (a - b), with the a -> b limit t·e^{-b·t}."""
    gap = rate_a - rate_b
    close = np.abs(gap) < 1e-12 * np.maximum(np.abs(rate_a), 1.0)
    safe = np.where(close, 1.0, gap)
    value = (np.exp(-rate_b * t) - np.exp(-rate_a * t)) / safe
    return np.where(close, t * np.exp(-rate_b * t), value)


# --- parallel line with a decaying emergency withdrawal ----------------------


def _emergency_near_terms(
    p1: float,
    g0: float,
    two_a: float,
    c2: float,
    g: float,
    ell: float,
    beta: float,
    x: float,
    t: float,
    tau: float,
    control: SeriesControl,
) -> float:
    """Start-section part of the emergency field (valid for any x)."""
    n = modes(control)
    lam = n * n * PI2 * c2 / (two_a * ell * ell)
    sign = (-1.0) ** n
    cos_nx = np.cos(math.pi * n * x / ell)

    value = p1 - two_a * g0 * x + c2 * g0 * t / ell
    value += (2 * c2 * g0 / ell) * sum_series(
        sign * cos_nx * -np.expm1(-lam * t) / lam, control, "emergency flow"
    )
    if tau <= 0:
        return value
    value -= p1 * c2 / (g * ell) * -math.expm1(-beta * tau)
    value -= p1 * (2 * c2 * beta / (g * ell)) * sum_series(
        sign * cos_nx * _exp_diff(beta, lam, tau), control, "emergency decay"
    )
    return value


def parallel_emergency_field(
    scenario: PipelineScenario,
    t1: float,
    x: float,
    t: float,
    *,
    n_terms: int | None = None,
) -> float:
    """Pressure on a line that loses a decaying share of its flow.

    The valve sits at scenario.valve_at (ℓ) and the leak at leak.ell2 (ℓ₁).
    Decay and leak terms are switched on for 0 < t and frozen at t1.
    """
    leak = _require_leak(scenario)
    if leak.beta is None or leak.beta <= 0:
        raise DomainError("the emergency field needs a positive decay rate beta")
    if t < 0:
        raise DomainError(f"t={t} is negative")
    if scenario.valve_at is None:
        raise DomainError("the emergency field needs scenario.valve_at")
    L = scenario.line.L
    check_coordinate(x, L)
    if t == 0:
        return steady_profile(scenario.steady, scenario.two_a, x, L)

    control = _control(scenario, n_terms)
    two_a, c2, g = scenario.two_a, scenario.c2, scenario.line.g
    ell, ell1 = scenario.valve_at, leak.ell2
    tau = min(t, t1)
    value = _emergency_near_terms(
        scenario.steady.p_start, scenario.steady.g0, two_a, c2, g, ell, leak.beta,
        x, t, tau, control,
    )
    if x < ell1 or leak.g_ut == 0:
        return value

    n = modes(control)
    odd = 2 * n - 1
    lam1 = odd * odd * PI2 * c2 / (4 * two_a * ell1 * ell1)
    weight = (-1.0) ** (n + 1) - 1.0
    tail = sum_series(
        weight * np.sin(math.pi * x * odd / (2 * ell1)) * np.exp(-lam1 * tau) / lam1,
        control,
        "emergency leak",
    )
    return value - two_a * leak.g_ut * ((ell1 - x) + c2 / (two_a * ell1) * tail)


class ValveTiming(NamedTuple):
    t1: float
    calibration_indicator: float


def _valve_point_pressure(
    p1: float, g0: float, two_a: float, c: float, g: float, ell: float, beta: float,
    t: float, n_terms: int,
) -> float:
    control = SeriesControl(n_terms=n_terms)
    return _emergency_near_terms(p1, g0, two_a, c * c, g, ell, beta, ell, t, t, control)


def valve_closing_time(
    p_start: float,
    g0: float,
    two_a: float,
    ell: float,
    beta: float,
    c: float,
    g: float = 9.81,
    drop_fraction: float = 0.2,
    *,
    n_terms: int = 50,
) -> ValveTiming:
    """Closed-form valve operating time and the resulting calibration indicator."""
    if not 0 < drop_fraction < 1:
        raise DomainError(f"drop_fraction={drop_fraction} outside (0, 1)")
    denom = 3 * c * c * (p_start * beta / g - g0)
    if denom == 0:
        raise SingularityError("p_start·beta/g equals g0")
    t1 = drop_fraction * ell * (p_start - two_a * g0 * ell) / denom
    if t1 < 0:
        raise InfeasibleError(f"negative valve time t1={t1:.3f} s")
    p0 = p_start - two_a * g0 * ell
    pt = _valve_point_pressure(p_start, g0, two_a, c, g, ell, beta, t1, n_terms)
    return ValveTiming(t1, 1 - pt / p0)


def valve_closing_time_scan(
    p_start: float,
    g0: float,
    two_a: float,
    ell: float,
    beta: float,
    c: float,
    g: float = 9.81,
    drop_fraction: float = 0.2,
    *,
    t_max: float = 3600.0,
    n_terms: int = 50,
) -> float:
    """First time the pressure at the valve falls by drop_fraction."""
    p0 = p_start - two_a * g0 * ell
    target = (1 - drop_fraction) * p0

    def residual(t: float) -> float:
        return _valve_point_pressure(p_start, g0, two_a, c, g, ell, beta, t, n_terms) - target

    return root_scan(residual, 0.0, t_max)


# --- empirical end-pressure decay -------------------------------------------


def empirical_end_decay(
    p_l0: float, gut_over_g0: float, p2_over_p1: float, beta: float, t: float
) -> float:
    """Empirical fit of the end pressure of a leaking line."""
    if beta <= 0:
        raise DomainError(f"beta={beta} must be positive")
    for name, r in (("gut_over_g0", gut_over_g0), ("p2_over_p1", p2_over_p1)):
        if not 0 <= r <= 2:
            raise DomainError(f"{name}={r} outside [0, 2]")
    level = 1.1 - gut_over_g0 / 10
    return p_l0 * level * math.exp(-(p2_over_p1 / 1.3) * beta * t)


def fit_decay_rate(
    p_lt: float, p_l0: float, gut_over_g0: float, p2_over_p1: float, t: float
) -> float:
    """Exact inverse of empirical_end_decay for beta."""
    if t <= 0 or p_lt <= 0:
        raise DomainError("fit needs t > 0 and a positive pressure")
    level = 1.1 - gut_over_g0 / 10
    return -1.3 * math.log(p_lt / (p_l0 * level)) / (p2_over_p1 * t)


def decay_rate_from_observation(
    p_lt1: float, p_l0: float, gut_over_g0: float, p1: float, p2: float, t1: float
) -> float:
    """Decay rate from the observed end-pressure drop at the valve time."""
    if t1 <= 0:
        raise DomainError(f"t1={t1} must be positive")
    phi = 1 - p_lt1 / p_l0
    psi = 0.1 * (1 - gut_over_g0)
    if phi <= 0:
        raise DomainError("no observable end-pressure decay")
    if psi <= 0:
        raise DomainError("leak equals or exceeds the line flow")
    return p2 / (p1 * t1) * math.log(phi / psi)


# --- two parallel lines in a unified hydraulic regime ------------------------


def _unfold(variant: BoundaryVariant, section: LineSection, x: float, L: float) -> float:
    """Map a line coordinate onto the unfolded two-line domain [0, 2L]."""
    damaged = section != LineSection.undamaged
    if variant == BoundaryVariant.fixed_end:
        return L + x if damaged else L - x
    return x if damaged else 2 * L - x


def _coupled_kernel(
    variant: BoundaryVariant,
    u: float,
    u_leak: float,
    L: float,
    D: float,
    control: SeriesControl,
) -> tuple[np.ndarray, np.ndarray, float]:
    """Mode weights, decay rates and the mean-mode weight of the Green's function."""
    n = modes(control)
    if variant == BoundaryVariant.flux_both:
        k = n * math.pi / L
        return np.cos(k * (u - u_leak)) / L, D * k * k, 1 / (2 * L)
    k = n * math.pi / (2 * L)
    return np.sin(k * u) * np.sin(k * u_leak) / L, D * k * k, 0.0


def coupled_parallel_field(
    variant: BoundaryVariant,
    scenario: PipelineScenario,
    section: LineSection,
    x: float,
    t: float,
    *,
    g_ut_history: Callable[[float], float] | None = None,
    n_terms: int | None = None,
) -> float:
    """Pressure on either line of a two-line parallel pipeline after a leak.

    Both lines share start and end; steady.g0 is the per-line flux.  A
    time-varying leak is integrated by trapezoidal quadrature (step <= 1 s).
    """
    leak = _interior_leak(scenario)
    L = scenario.line.L
    check_coordinate(x, L)
    if t < 0:
        raise DomainError(f"t={t} is negative")
    section = LineSection(section)
    if section == LineSection.damaged_before and x > leak.ell2:
        raise DomainError(f"x={x} lies after the leak at {leak.ell2}")
    if section == LineSection.damaged_after and x < leak.ell2:
        raise DomainError(f"x={x} lies before the leak at {leak.ell2}")

    base = steady_profile(scenario.steady, scenario.two_a, x, L)
    if t == 0:
        return base
    control = _control(scenario, n_terms)
    variant = BoundaryVariant(variant)
    u = _unfold(variant, section, x, L)
    u_leak = _unfold(variant, LineSection.damaged_after, leak.ell2, L)
    weights, rates, mean_weight = _coupled_kernel(
        variant, u, u_leak, L, scenario.diffusivity, control
    )

    if g_ut_history is None:
        response = mean_weight * t + sum_series(
            weights * -np.expm1(-rates * t) / rates, control, "coupled leak"
        )
        return base - scenario.c2 * leak.g_ut * response

    taus = np.linspace(0.0, t, max(2, math.ceil(t) + 1))
    g_vals = np.array([g_ut_history(float(s)) for s in taus])
    kernel = np.exp(-np.outer(rates, t - taus))
    modal = np.trapezoid(kernel * g_vals, taus, axis=1)
    response = mean_weight * float(np.trapezoid(g_vals, taus)) + sum_series(
        weights * modal, control, "coupled leak history"
    )
    return base - scenario.c2 * response


def coupled_leak_ceiling(variant: BoundaryVariant, scenario: PipelineScenario) -> float:
    """Largest drop a constant leak can cause at its own location.

    The leak-point response grows monotonically towards the steady Green's
    function of the unfolded Dirichlet domain [0, 2L], so no finite time
    exceeds it.  flux_both has no steady state (the mean keeps falling).
    """
    variant = BoundaryVariant(variant)
    if variant == BoundaryVariant.flux_both:
        raise DomainError("the flux_both line has no steady leak response")
    leak = _interior_leak(scenario)
    L = scenario.line.L
    u = _unfold(variant, LineSection.damaged_after, leak.ell2, L)
    return scenario.two_a * leak.g_ut * u * (2 * L - u) / (2 * L)


# --- relief (inclined) line ------------------------------------------------


def relief_derived(scenario: PipelineScenario) -> ReliefDerived:
    """Exponential and spatial rates induced by a constant incline."""
    g, s = scenario.line.g, scenario.line.sin_alpha
    c2 = scenario.c2
    return ReliefDerived(
        lambda1=-(g * g * s * s) / (scenario.two_a * 4 * c2),
        lambda2=-g * s / (2 * c2),
    )


def relief_field(
    scenario: PipelineScenario, x: float, t: float, *, n_terms: int | None = None
) -> float:
    """Pressure on an inclined line with closed ends and a leak.

    The line starts at the uniform pressure steady.p_start.
    """
    leak = _require_leak(scenario)
    L = scenario.line.L
    check_coordinate(x, L)
    if t < 0:
        raise DomainError(f"t={t} is negative")
    p_h = scenario.steady.p_start
    if t == 0:
        return p_h
    control = _control(scenario, n_terms)
    D, c2, ell = scenario.diffusivity, scenario.c2, leak.ell2
    derived = relief_derived(scenario)
    r = -derived.lambda2
    k1 = 2 * r

    mean_norm = math.expm1(k1 * L) / k1 if k1 != 0 else L
    n = modes(control)
    mu = n * math.pi / L
    ratio = r / mu
    v_x = np.cos(mu * x) + ratio * np.sin(mu * x)
    v_l = np.cos(mu * ell) + ratio * np.sin(mu * ell)
    norms = (L / 2) * (1 + ratio * ratio)
    rates = D * mu * mu - derived.lambda1
    series = sum_series(
        v_x * v_l / norms * -np.expm1(-rates * t) / rates, control, "relief leak"
    )
    response = math.exp(k1 * ell) * t / mean_norm + math.exp(r * (ell - x)) * series
    return p_h - c2 * leak.g_ut * response


# --- ring main ------------------------------------------------------------


class RingForm(str, Enum):
    """Selector for the stationary-decay part of the ring solution."""

    EIGEN = "eigen"
    TABULATED = "tabulated"


def ring_field(
    scenario: PipelineScenario,
    x: float,
    t: float,
    *,
    form: RingForm = RingForm.TABULATED,
    n_terms: int | None = None,
) -> float:
    """Pressure on a ring main with constant offtakes (and an optional leak).

    A leak acts as one more offtake.  The default RingForm.TABULATED builds
    the stationary part from half-waves and reproduces the reference ring
    grid; RingForm.EIGEN uses the full-wave periodic modes and is the form
    the finite-difference oracle agrees with.
    """
    L = scenario.line.L
    check_coordinate(x, L)
    if t < 0:
        raise DomainError(f"t={t} is negative")
    try:
        form = RingForm(form)
    except ValueError as e:
        raise DomainError(f"unknown ring form {form!r}") from e
    control = _control(scenario, n_terms)
    c2, two_a = scenario.c2, scenario.two_a
    a = two_a / 2
    p1, g0 = scenario.steady.p_start, scenario.steady.g0

    xs, gs = (
        scenario.offtakes.as_arrays()
        if scenario.offtakes is not None
        else (np.empty(0), np.empty(0))
    )
    if scenario.leak is not None:
        xs = np.append(xs, scenario.leak.ell2)
        gs = np.append(gs, scenario.leak.g_ut)

    n = modes(control)
    rate = 4 * PI2 * c2 / (two_a * L * L)
    decay = np.exp(-n * n * rate * t)
    if form == RingForm.EIGEN:
        stationary = sum_series(
            (2 * a * g0 * L / (math.pi * n)) * np.sin(2 * math.pi * n * x / L) * decay,
            control,
            "ring stationary",
        )
    else:
        stationary = sum_series(
            2 * a * g0 * L * np.sin(math.pi * n * x / L) * -np.expm1(-n * n * rate * t)
            / (math.pi * n**3) / rate,
            control,
            "ring stationary",
        )

    value = p1 - a * g0 * L + stationary - c2 * t * float(np.sum(gs)) / L
    if gs.size:
        phase = np.cos(2 * math.pi * np.outer(n, x - xs) / L)  # (modes, offtakes)
        growth = -np.expm1(-n * n * rate * t) / (rate * n * n)
        value -= (2 * c2 / L) * sum_series((phase * gs).sum(axis=1) * growth, control, "ring offtakes")
    return value


def ring_mean_pressure(scenario: PipelineScenario, t: float) -> float:
    """Ring-average pressure of the eigen form; depends on offtakes only via their sum."""
    a = scenario.two_a / 2
    total = scenario.offtakes.total if scenario.offtakes is not None else 0.0
    if scenario.leak is not None:
        total += scenario.leak.g_ut
    L = scenario.line.L
    return scenario.steady.p_start - a * scenario.steady.g0 * L - scenario.c2 * t * total / L


def hydraulic_junction_location(
    L: float,
    g1_over_g0: float,
    two_a: float,
    c: float,
    t: float,
    *,
    literal: bool = False,
) -> float:
    """Coordinate where the counter-flows of a ring meet.

    literal=True drops the rate factor on the demand ratio, which makes the
    discriminant negative for any realistic demand.
    """
    rate = 4 * PI2 * c * c / (two_a * L * L)
    e4 = math.exp(-4 * rate * t)
    z = 1 + 8 * e4
    demand = g1_over_g0 if literal else rate * g1_over_g0
    disc = 1 - (4 * z / PI2) * ((2 * PI2 - 3 * e4) / 12 + demand)
    if disc < 0:
        raise InfeasibleError(f"negative discriminant {disc:.4f}: demand ratio too large")
    return L * (1 - math.sqrt(disc)) / z


# --- single damaged line before the valves close ----------------------------


def pre_closure_field(
    scenario: PipelineScenario, x: float, t: float, *, n_terms: int | None = None
) -> float:
    """Open-valve transient of a line with a leak and flux-measured ends."""
    leak = _interior_leak(scenario)
    L = scenario.line.L
    check_coordinate(x, L)
    if t < 0:
        raise DomainError(f"t={t} is negative")
    base = steady_profile(scenario.steady, scenario.two_a, x, L)
    if t == 0:
        return base
    control = _control(scenario, n_terms)
    two_a, c2, ell2, gut = scenario.two_a, scenario.c2, leak.ell2, leak.g_ut
    n = modes(control)
    rate = PI2 * c2 / (two_a * L * L)
    quasi = x * x / (2 * L) + ell2 * ell2 / (2 * L) + L / 3 - max(x, ell2)
    transient = sum_series(
        np.cos(math.pi * n * x / L) * np.cos(math.pi * n * ell2 / L) * np.exp(-n * n * rate * t) / (n * n),
        control,
        "pre-closure",
    )
    return (
        base
        - two_a * gut * quasi
        - c2 * gut * t / L
        + (2 * two_a * L / PI2) * gut * transient
    )


# --- sectioned line after the valves close ---------------------------------


def section_of(state: SectionState, x: float) -> int:
    if x <= state.ell1:
        return 1
    if x <= state.ell3:
        return 2
    return 3


def post_closure_field(
    state: SectionState,
    section: int,
    x: float,
    t: float,
    *,
    n_terms: int = 50,
) -> float:
    """Pressure in section 1, 2 or 3 after the valves at ell1/ell3 closed at t1.

    Section 1 fills from the source, section 2 empties through the leak,
    section 3 empties to the consumers; each starts from the t1 snapshot.
    """
    if t < state.t1:
        raise DomainError(f"t={t} precedes the closure time t1={state.t1}")
    bounds = {1: (0.0, state.ell1), 2: (state.ell1, state.ell3), 3: (state.ell3, state.length)}
    if section not in bounds:
        raise DomainError(f"unknown section {section}")
    lo, hi = bounds[section]
    if not lo <= x <= hi:
        raise DomainError(f"x={x} outside section {section} [{lo}, {hi}]")

    control = SeriesControl(n_terms=n_terms)
    n = modes(control)
    c2, two_a = state.c2, state.two_a
    dt = t - state.t1
    snap = state.snapshot_at(x)
    span = hi - lo
    rate = PI2 * c2 / (two_a * span * span)
    growth = -np.expm1(-rate * n * n * dt) / (rate * n * n)

    if section == 1:
        series = sum_series(np.cos(math.pi * n * x / span) * growth, control, "section 1")
        return (
            snap
            + c2 / span * state.g0 * dt
            + 2 * c2 * state.g0 / span * series
            + c2 / (two_a * span) * state.grad_start * dt
        )
    if section == 2:
        series = sum_series(
            np.cos(math.pi * n * (state.ell2 - lo) / span) * np.cos(math.pi * n * (x - lo) / span) * growth,
            control,
            "section 2",
        )
        return snap - c2 / span * state.g_ur * (dt + 2 * series)
    series = sum_series(
        (-1.0) ** n * np.cos(math.pi * n * (x - lo) / span) * growth, control, "section 3"
    )
    return (
        snap
        - c2 / span * state.g_s * (dt + 2 * series)
        - c2 / (two_a * span) * state.grad_end * dt
    )


def emptied_section_mass(ell1: float, ell3: float, c: float, delta_p2_at_ell3: float) -> float:
    """Integrated leak flux once the isolated section has emptied."""
    if ell3 <= ell1:
        raise DomainError("ell3 must exceed ell1")
    return -((ell3 - ell1) / (c * c)) * delta_p2_at_ell3


def influx_discharge_new_steady(
    inputs: NewSteadyInputs, x: float, section: NewSteadySection
) -> float:
    """New stationary profile after the connectors reroute flow around the
    isolated section."""
    section = NewSteadySection(section)
    L, l1, l3 = inputs.length, inputs.ell1, inputs.ell3
    bounds = {
        NewSteadySection.upstream: (0.0, l1),
        NewSteadySection.bypass: (l1, l3),
        NewSteadySection.downstream: (l3, L),
    }
    lo, hi = bounds[section]
    if not lo <= x <= hi:
        raise DomainError(f"x={x} outside the {section.value} section [{lo}, {hi}]")

    k = inputs.two_a * inputs.g0
    alpha = math.sqrt(L / (L + 3 * (L - l3)))
    denom = 2 * L + l1 - l3
    lift1 = l1 * (inputs.p1_t2 - inputs.p1_0) / denom
    lift3 = (L - l3) * (inputs.p3_t2 - inputs.p3_0) / denom

    def bypass(x: float) -> float:
        bracket = l1 * (x - l1) - (L - l3) * (l3 - x) + x * x / 2 - (L - x) ** 2 / 2
        return inputs.p_in - k * x - (2 * k * (alpha - 1) / denom) * bracket + lift1 + lift3

    if section == NewSteadySection.upstream:
        return (
            inputs.p_in
            - k * x
            - k * (alpha - 1) * (x - l1)
            + 2 * k * (alpha - 1) * (L - l3) * (l3 - l1) / denom
            + lift3
            + lift1
            + k * (alpha - 1) * ((L - l1) ** 2 - l1 * l1) / denom
        )
    if section == NewSteadySection.bypass:
        return bypass(x)
    return bypass(l3) - k * alpha * (x - l3)


def new_steady_profile(inputs: NewSteadyInputs, x: float) -> float:
    check_coordinate(x, inputs.length)
    if x <= inputs.ell1:
        return influx_discharge_new_steady(inputs, x, NewSteadySection.upstream)
    if x <= inputs.ell3:
        return influx_discharge_new_steady(inputs, x, NewSteadySection.bypass)
    return influx_discharge_new_steady(inputs, x, NewSteadySection.downstream)
