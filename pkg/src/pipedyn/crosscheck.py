"""Finite-difference references for the closed-form field families.

Each check builds the FdSetup that discretizes the same boundary-value
problem as a series solution, samples the series on the oracle grid and
reports the max relative deviation away from point sources.
"""

from __future__ import annotations

import logging
from collections.abc import Callable

import numpy as np
from pydantic import BaseModel, ConfigDict

from pipedyn.core import steady_profile
from pipedyn.errors import DomainError
from pipedyn.models import (
    BoundaryVariant,
    LineSection,
    PipelineScenario,
    PressureField,
    SectionState,
)
from pipedyn.oracle import (
    ConservationReport,
    FdSetup,
    PointSource,
    compare_fields,
    conservation_audit,
    fd_transient_solve,
    fixed_flux,
    fixed_pressure,
    ring_closure,
)
from pipedyn.scenario_models import FieldKind, ScenarioFile
from pipedyn.series import (
    coupled_leak_ceiling,
    coupled_parallel_field,
    post_closure_field,
    pre_closure_field,
    RingForm,
    relief_derived,
    relief_field,
    ring_field,
)

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 0.02


class CrossCheck(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    deviation: float
    tolerance: float = DEFAULT_TOLERANCE

    @property
    def passed(self) -> bool:
        return self.deviation <= self.tolerance


def _sample(reference: PressureField, point: Callable[[float, float], float]) -> PressureField:
    values = np.array([[point(float(x), float(t)) for t in reference.ts] for x in reference.xs])
    return PressureField(xs=reference.xs, ts=reference.ts, values=values)


def _check(
    name: str,
    setup: FdSetup,
    point: Callable[[float, float], float],
    *,
    exclude_x: tuple[float, ...] = (),
    t_min: float = 0.0,
) -> CrossCheck:
    reference = fd_transient_solve(setup)
    analytic = _sample(reference, point)
    deviation = compare_fields(analytic, reference, exclude_x, t_min=t_min)
    logger.info("crosscheck %s: max relative deviation %.2e", name, deviation)
    return CrossCheck(name=name, deviation=deviation)


def _steady_initial(p_start: float, two_a: float, g0: float) -> Callable[[np.ndarray], np.ndarray]:
    return lambda x: p_start - two_a * g0 * x


def pre_closure_setup(scenario: PipelineScenario, t_end: float = 600.0, nx: int = 64) -> FdSetup:
    leak = scenario.leak
    g0 = scenario.steady.g0
    return FdSetup(
        length=scenario.line.L,
        two_a=scenario.two_a,
        c2=scenario.c2,
        nx=nx,
        t_end=t_end,
        bc_start=fixed_flux(g0),
        bc_end=fixed_flux(g0),
        sources=[PointSource(x=leak.ell2, g=leak.g_ut)],
        initial=_steady_initial(scenario.steady.p_start, scenario.two_a, g0),
    )


def pre_closure_crosscheck(scenario: PipelineScenario, t_end: float = 600.0) -> CrossCheck:
    setup = pre_closure_setup(scenario, t_end)
    return _check(
        "pre_closure",
        setup,
        lambda x, t: pre_closure_field(scenario, x, t),
        exclude_x=(scenario.leak.ell2,),
    )


def pre_closure_conservation(scenario: PipelineScenario, t_end: float = 600.0) -> ConservationReport:
    return conservation_audit(pre_closure_setup(scenario, t_end))


def relief_crosscheck(scenario: PipelineScenario, t_end: float = 300.0) -> CrossCheck:
    leak = scenario.leak
    p_h = scenario.steady.p_start
    setup = FdSetup(
        length=scenario.line.L,
        two_a=scenario.two_a,
        c2=scenario.c2,
        t_end=t_end,
        bc_start=fixed_flux(0.0),
        bc_end=fixed_flux(0.0),
        sources=[PointSource(x=leak.ell2, g=leak.g_ut)],
        initial=lambda x: np.full_like(x, p_h),
        advection=scenario.line.g * scenario.line.sin_alpha / scenario.c2,
    )
    return _check(
        "relief",
        setup,
        lambda x, t: relief_field(scenario, x, t),
        exclude_x=(leak.ell2,),
    )


def relief_balance(scenario: PipelineScenario, t: float = 600.0, nx: int = 601) -> CrossCheck:
    """Weighted mass balance of the inclined line with closed ends.

    Under the weight e^(k1 x) every transient mode integrates to zero, so the
    weighted mean pressure falls at exactly c2*G_ut*e^(k1 ell)/int(e^(k1 x)).
    """
    leak = scenario.leak
    L = scenario.line.L
    k1 = -2 * relief_derived(scenario).lambda2
    xs = np.linspace(0.0, L, nx)
    weight = np.exp(k1 * xs) if k1 != 0 else np.ones_like(xs)
    norm = np.expm1(k1 * L) / k1 if k1 != 0 else L
    drops = scenario.steady.p_start - np.array([relief_field(scenario, float(x), t) for x in xs])
    drop = float(np.trapezoid(weight * drops, xs)) / norm
    expected = scenario.c2 * leak.g_ut * np.exp(k1 * leak.ell2) * t / norm
    deviation = abs(drop - expected) / expected
    logger.info("relief balance: weighted drop %.1f Pa, expected %.1f Pa", drop, expected)
    return CrossCheck(name="relief_balance", deviation=deviation, tolerance=1e-3)


def coupled_ceiling(variant: BoundaryVariant, scenario: PipelineScenario, t: float = 3e4) -> CrossCheck:
    """Drop at the leak on the damaged line against its steady ceiling.

    deviation is the overshoot above the ceiling, zero when the drop stays below.
    """
    leak = scenario.leak
    p0 = steady_profile(scenario.steady, scenario.two_a, leak.ell2, scenario.line.L)
    drop = p0 - coupled_parallel_field(variant, scenario, LineSection.damaged_after, leak.ell2, t)
    ceiling = coupled_leak_ceiling(variant, scenario)
    return CrossCheck(
        name=f"coupled_ceiling_{variant.value}",
        deviation=max(drop - ceiling, 0.0) / ceiling,
        tolerance=1e-6,
    )


def ring_crosscheck(scenario: PipelineScenario, t_end: float = 300.0) -> CrossCheck:
    """Eigen form of the ring against a periodic oracle (from 20 s on, after
    the start-up sawtooth has smoothed)."""
    sources = []
    if scenario.offtakes is not None:
        sources += [PointSource(x=o.x, g=o.g) for o in scenario.offtakes.items]
    if scenario.leak is not None:
        sources.append(PointSource(x=scenario.leak.ell2, g=scenario.leak.g_ut))
    setup = FdSetup(
        length=scenario.line.L,
        two_a=scenario.two_a,
        c2=scenario.c2,
        t_end=t_end,
        bc_start=ring_closure(),
        bc_end=ring_closure(),
        sources=sources,
        initial=_steady_initial(scenario.steady.p_start, scenario.two_a, scenario.steady.g0),
    )
    exclude = tuple(s.x for s in sources) + (0.0, scenario.line.L)
    return _check(
        "ring",
        setup,
        lambda x, t: ring_field(scenario, x, t, form=RingForm.EIGEN),
        exclude_x=exclude,
        t_min=20.0,
    )


def coupled_crosscheck(
    variant: BoundaryVariant, scenario: PipelineScenario, t_end: float = 300.0
) -> CrossCheck:
    """Both lines unfolded onto [0, 2L]; the shared node is interior."""
    variant = BoundaryVariant(variant)
    L, two_a, g0 = scenario.line.L, scenario.two_a, scenario.steady.g0
    p1 = scenario.steady.p_start
    p_end = p1 - two_a * g0 * L
    leak = scenario.leak

    if variant == BoundaryVariant.fixed_end:
        u_leak = L + leak.ell2
        # common start at u = L injects both line flows
        sources = [PointSource(x=L, g=-2 * g0)]
        bc_start, bc_end = fixed_pressure(p_end), fixed_pressure(p_end)

        def initial(u: np.ndarray) -> np.ndarray:
            return p1 - two_a * g0 * np.abs(u - L)

        def to_line(u: float) -> tuple[LineSection, float]:
            return (LineSection.undamaged, L - u) if u < L else (LineSection.damaged_after, u - L)

    else:
        u_leak = leak.ell2
        # common end at u = L draws both line flows
        sources = [PointSource(x=L, g=2 * g0)]
        if variant == BoundaryVariant.fixed_start:
            bc_start, bc_end = fixed_pressure(p1), fixed_pressure(p1)
        else:
            sources.append(PointSource(x=0.0, g=-2 * g0))
            bc_start, bc_end = ring_closure(), ring_closure()

        def initial(u: np.ndarray) -> np.ndarray:
            return p1 - two_a * g0 * np.minimum(u, 2 * L - u)

        def to_line(u: float) -> tuple[LineSection, float]:
            return (LineSection.damaged_after, u) if u <= L else (LineSection.undamaged, 2 * L - u)

    setup = FdSetup(
        length=2 * L,
        two_a=two_a,
        c2=scenario.c2,
        t_end=t_end,
        bc_start=bc_start,
        bc_end=bc_end,
        sources=sources + [PointSource(x=u_leak, g=leak.g_ut)],
        initial=initial,
    )

    def point(u: float, t: float) -> float:
        section, x = to_line(u)
        if section != LineSection.undamaged:
            section = LineSection.damaged_before if x <= leak.ell2 else LineSection.damaged_after
        return coupled_parallel_field(variant, scenario, section, x, t)

    return _check(f"coupled_{variant.value}", setup, point, exclude_x=(u_leak,))


def post_closure_crosscheck(state: SectionState, section: int, t_span: float = 300.0) -> CrossCheck:
    """One isolated section from a uniform snapshot with zero end gradients."""
    bounds = {1: (0.0, state.ell1), 2: (state.ell1, state.ell3), 3: (state.ell3, state.length)}
    lo, hi = bounds[section]
    bc_start, bc_end, sources = fixed_flux(0.0), fixed_flux(0.0), []
    if section == 1:
        bc_start = fixed_flux(state.g0)
    elif section == 2:
        sources = [PointSource(x=state.ell2 - lo, g=state.g_ur)]
    else:
        bc_end = fixed_flux(state.g_s)
    setup = FdSetup(
        length=hi - lo,
        two_a=state.two_a,
        c2=state.c2,
        t_end=t_span,
        bc_start=bc_start,
        bc_end=bc_end,
        sources=sources,
        initial=lambda x: np.array([state.snapshot_at(lo + xi) for xi in x]),
    )
    exclude = (state.ell2 - lo,) if section == 2 else ()
    return _check(
        f"post_closure_{section}",
        setup,
        lambda x, t: post_closure_field(state, section, min(lo + x, hi), state.t1 + t),
        exclude_x=exclude,
    )


def crosscheck_for(scenario_file: ScenarioFile) -> list[CrossCheck]:
    """Oracle checks matching the file's field kind."""
    kind = scenario_file.outputs.field
    t_end = scenario_file.outputs.t_range[1]
    if kind == FieldKind.post_closure:
        state = scenario_file.section_state()
        if t_end <= state.t1:
            raise DomainError("outputs.t_range must extend past the closure time")
        return [post_closure_crosscheck(state, k, t_end - state.t1) for k in (1, 2, 3)]
    scenario = scenario_file.to_scenario()
    if kind == FieldKind.pre_closure:
        return [pre_closure_crosscheck(scenario, t_end)]
    if kind == FieldKind.relief:
        return [relief_crosscheck(scenario, t_end)]
    if kind == FieldKind.ring:
        return [ring_crosscheck(scenario, t_end)]
    if kind == FieldKind.coupled:
        return [coupled_crosscheck(scenario_file.events.variant, scenario, t_end)]
    raise DomainError(f"no finite-difference reference for the {kind.value} field")
