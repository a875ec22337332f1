"""Dispatcher decisions: regime, leak position, valve timing and sequencing."""

from __future__ import annotations

import io
import logging
import math
from collections.abc import Iterable, Sequence
from enum import Enum

from pydantic import BaseModel, ConfigDict

from pipedyn.core import EULER_C
from pipedyn.errors import (
    AlreadyExceededError,
    DomainError,
    NotReadyError,
    ProtocolError,
    SingularityError,
)
from pipedyn.models import (
    CompressionGuard,
    DispatchDecision,
    LeakEstimate,
    PipelineScenario,
    RatioSample,
    Regime,
    SectionState,
    ValvePlan,
)
from pipedyn.series import post_closure_field, pre_closure_field, ring_field

logger = logging.getLogger(__name__)

PI2 = math.pi**2
MIN_DROP = 10.0  # Pa; smaller drops mean the wave has not arrived


def pressure_drop_ratio(
    p1: float, p1_0t: float, p2: float, p2_Lt: float, *, min_drop: float = MIN_DROP
) -> float | None:
    """(P1 - P(0,t)) / (P2 - P(L,t)); None while the end drop is below min_drop."""
    denom = p2 - p2_Lt
    if abs(denom) < min_drop:
        return None
    return (p1 - p1_0t) / denom


def drop_ratio_series(
    ts: Sequence[float],
    p_start: Sequence[float],
    p_end: Sequence[float],
    p1: float,
    p2: float,
    *,
    wave_time: float = 0.0,
    min_drop: float = MIN_DROP,
) -> list[RatioSample]:
    """Ratio samples; a sample stays pending until both end drops reach
    min_drop and the wave has had time to cross the line."""
    if not len(ts) == len(p_start) == len(p_end):
        raise DomainError("time and pressure series differ in length")
    out = []
    for t, p0, pl in zip(ts, p_start, p_end):
        resolved = t >= wave_time and min(abs(p1 - p0), abs(p2 - pl)) >= min_drop
        p = pressure_drop_ratio(p1, p0, p2, pl, min_drop=min_drop) if resolved else None
        out.append(RatioSample(t=t, p=p))
    return out


def fixation_time(
    series: Sequence[RatioSample],
    *,
    flat_tol: float = 1e-9,
    report_period: float | None = None,
) -> float:
    """Time of the first local extremum of p(t) among resolved samples.

    With no interior extremum (monotone or constant p) the first resolved
    sample is taken.  With report_period the time is carried up to the next
    dispatch report, the first moment the fixation can be acted on.
    """
    resolved = [s for s in series if not s.pending]
    if not resolved:
        raise NotReadyError("all ratio samples are pending")
    t = resolved[0].t
    for prev, cur, nxt in zip(resolved, resolved[1:], resolved[2:]):
        left, right = cur.p - prev.p, nxt.p - cur.p
        if abs(left) <= flat_tol or abs(right) <= flat_tol:
            continue
        if (left > 0) != (right > 0):
            t = cur.t
            break
    if report_period is None:
        return t
    if report_period <= 0:
        raise DomainError(f"report_period={report_period} must be positive")
    return math.ceil(t / report_period - 1e-9) * report_period


def phi_factor(t: float, L: float, two_a: float, c: float) -> float:
    """Localization weight 2/3 + (e^{-2at} - 4e^{-at})/pi², a = pi²c²/(2aL²)."""
    if t < 0:
        raise DomainError(f"t={t} is negative")
    alpha = PI2 * c * c / (two_a * L * L)
    return 2 / 3 + (math.exp(-2 * alpha * t) - 4 * math.exp(-alpha * t)) / PI2


def _theta(p: float, phi: float) -> float:
    if p == -1:
        raise SingularityError("p = -1 makes the localization singular")
    return 0.5 + phi * (1 - p) / (1 + p)


def regime_band(t: float, L: float, two_a: float, c: float) -> tuple[float, float]:
    """(lo, hi) of the accident band for p.

    For phi > 0.5 the band is lo < p < hi.  For phi < 0.5 it wraps through
    infinity: p > lo or p < hi.
    """
    phi = phi_factor(t, L, two_a, c)
    if abs(phi - 0.5) < 1e-12:
        raise SingularityError("phi = 0.5: the regime band degenerates")
    return (phi - 0.5) / (phi + 0.5), (phi + 0.5) / (phi - 0.5)


def classify_regime(p: float, t: float, L: float, two_a: float, c: float) -> Regime:
    """Accident when the implied leak position falls strictly inside the line."""
    phi = phi_factor(t, L, two_a, c)
    if abs(phi - 0.5) < 1e-12:
        raise SingularityError("phi = 0.5: the regime band degenerates")
    if p == -1:
        return Regime.technological
    theta = _theta(p, phi)
    return Regime.accident if 0 < theta < 1 else Regime.technological


def locate_leak(p_at_t1: float, t1: float, L: float, two_a: float, c: float) -> LeakEstimate:
    phi = phi_factor(t1, L, two_a, c)
    theta = _theta(p_at_t1, phi)
    clamped = not 0 <= theta <= 1
    if clamped:
        logger.info("leak estimate theta=%.4f clamped to the line", theta)
        theta = min(max(theta, 0.0), 1.0)
    return LeakEstimate(theta=theta, ell2=theta * L, phi=phi, clamped=clamped)


# --- ring-main indicator ----------------------------------------------------


def kappa_indicator(p_mid: float, p1_initial: float, p_start_t: float) -> float:
    """(P(L/2,t) - P1) / P(0,t)."""
    if p_start_t <= 0:
        raise DomainError("start pressure must be positive")
    return (p_mid - p1_initial) / p_start_t


def kappa_regime(kappa: float, threshold: float = 1.0) -> Regime:
    """Threshold rule for the ring indicator; its reliability is not assumed."""
    return Regime.accident if kappa > threshold else Regime.technological


def kappa_series(scenario: PipelineScenario, ts: Iterable[float]) -> list[tuple[float, float]]:
    L, p1 = scenario.line.L, scenario.steady.p_start
    return [
        (t, kappa_indicator(ring_field(scenario, L / 2, t), p1, ring_field(scenario, 0.0, t)))
        for t in ts
    ]


# --- valves and connectors ----------------------------------------------------


def locate_closed_valves(
    p0_t: float,
    p0_t1: float,
    t: float,
    t1: float,
    g0: float,
    two_a: float,
    c: float,
    step_ell: float,
    *,
    resolution: float | None = None,
) -> tuple[float, float]:
    """Coordinates of the valves that closed, from the start-pressure rise.

    resolution rounds ell1 half-up to that many metres, the precision
    dispatch reports carry (0.9·10⁴ m for a raw 8810 m).
    """
    if t <= t1:
        raise DomainError("valve location needs t > t1")
    z = p0_t - p0_t1
    z1 = two_a * g0 * (1 / 3 + 2 / PI2)
    if z1 <= 0:
        raise DomainError("valve location needs a positive line flux")
    disc = z * z + 8 * c * c * g0 * (1 - EULER_C) * (t - t1) * z1
    ell1 = (math.sqrt(disc) - z) / (2 * z1)
    if resolution is not None:
        if resolution <= 0:
            raise DomainError(f"resolution={resolution} must be positive")
        ell1 = math.floor(ell1 / resolution + 0.5) * resolution
    return ell1, ell1 + step_ell


def connector_opening_time(
    t1: float,
    ell1: float,
    g0: float,
    guard: CompressionGuard,
    p_b: float,
    p0_t1: float,
    two_a: float,
    c: float,
) -> float:
    """Time the start pressure reaches epsilon·P_b after closing at t1."""
    limit = guard.epsilon * p_b
    if limit <= p0_t1:
        raise AlreadyExceededError(
            f"start pressure {p0_t1:.0f} Pa already above the guard {limit:.0f} Pa"
        )
    if g0 <= 0:
        raise DomainError("connector timing needs a positive line flux")
    numerator = limit - p0_t1 - two_a * ell1 * g0 * (1 / 3 - 1 / PI2)
    delay = ell1 / (c * c * g0) * numerator / (2 - EULER_C)
    return t1 + max(delay, 0.0)


def reopen_condition(
    p1: float, p0_t: float, p_ell1_0: float, p_ell1_t: float, guard: CompressionGuard
) -> bool:
    """Connectors may open once compression stays below epsilon and flow
    toward the isolated section would not reverse."""
    if min(p1, p0_t, p_ell1_0, p_ell1_t) <= 0:
        raise DomainError("pressures must be positive")
    return p0_t / p1 < guard.epsilon and p_ell1_t / p_ell1_0 > 1


def valve_plan_around(estimate: float, L: float, step: float) -> tuple[float, float]:
    ell1 = max(0.0, estimate - step / 2)
    return ell1, min(L, ell1 + step)


# --- emergency sequencer ----------------------------------------------------


class EventKind(str, Enum):
    sample = "sample"
    fixation = "fixation"
    repaired = "repaired"


class SequencerEvent(BaseModel):
    """One observation delivered to the sequencer.

    sample carries p_start/p_ell1; fixation carries the regime, the isolating
    valves and the pressure at ell1 when they closed.
    """

    model_config = ConfigDict(frozen=True)

    t: float
    kind: EventKind
    p_start: float | None = None
    p_ell1: float | None = None
    p: float | None = None
    regime: Regime | None = None
    ell1: float | None = None
    ell2: float | None = None
    ell3: float | None = None


class Action(BaseModel):
    model_config = ConfigDict(frozen=True)

    t: float
    action: str
    param1: float | None = None
    param2: float | None = None


class SequencerState(str, Enum):
    stationary = "stationary"
    isolated = "isolated"
    rerouted = "rerouted"


class EmergencySequencer:
    """Single-threaded state machine: stationary -> isolated -> rerouted -> stationary."""

    def __init__(self, p1: float, guard: CompressionGuard | None = None):
        self.p1 = p1
        self.guard = guard or CompressionGuard()
        self.state = SequencerState.stationary
        self.log: list[Action] = []
        self._last_t = -math.inf
        self._p_ell1_ref: float | None = None

    def feed(self, event: SequencerEvent) -> list[Action]:
        if event.t < self._last_t:
            raise ProtocolError(f"event at t={event.t} after t={self._last_t}")
        self._last_t = event.t
        handler = {
            EventKind.fixation: self._on_fixation,
            EventKind.sample: self._on_sample,
            EventKind.repaired: self._on_repaired,
        }[event.kind]
        actions = handler(event)
        self.log.extend(actions)
        return actions

    def run(self, events: Iterable[SequencerEvent]) -> list[Action]:
        for event in events:
            self.feed(event)
        return list(self.log)

    def _ignore(self, event: SequencerEvent) -> list[Action]:
        logger.debug("ignoring %s at t=%s in state %s", event.kind.value, event.t, self.state.value)
        return []

    def _on_fixation(self, event: SequencerEvent) -> list[Action]:
        if self.state != SequencerState.stationary or event.regime in (None, Regime.pending):
            return self._ignore(event)
        if event.regime == Regime.technological:
            return [Action(t=event.t, action="advisory", param1=event.p)]
        if event.ell1 is None or event.ell3 is None or event.p_ell1 is None:
            raise ProtocolError("accident fixation needs ell1, ell3 and p_ell1")
        actions = []
        if event.ell2 is not None:
            actions.append(Action(t=event.t, action="locate", param1=event.ell2, param2=event.p))
        actions.append(Action(t=event.t, action="close", param1=event.ell1, param2=event.ell3))
        self._p_ell1_ref = event.p_ell1
        self.state = SequencerState.isolated
        return actions

    def _on_sample(self, event: SequencerEvent) -> list[Action]:
        if self.state != SequencerState.isolated:
            return self._ignore(event)
        if event.p_start is None or event.p_ell1 is None:
            raise ProtocolError("samples after closing need p_start and p_ell1")
        if not reopen_condition(self.p1, event.p_start, self._p_ell1_ref, event.p_ell1, self.guard):
            return []
        self.state = SequencerState.rerouted
        return [Action(t=event.t, action="open_connectors", param1=event.p_start, param2=event.p_ell1)]

    def _on_repaired(self, event: SequencerEvent) -> list[Action]:
        if self.state == SequencerState.stationary:
            return self._ignore(event)
        self.state = SequencerState.stationary
        self._p_ell1_ref = None
        return [Action(t=event.t, action="restore")]


def format_action_log(actions: Iterable[Action]) -> str:
    buf = io.StringIO()
    buf.write("t_s,action,param1,param2\n")
    for a in actions:
        p1 = "" if a.param1 is None else repr(a.param1)
        p2 = "" if a.param2 is None else repr(a.param2)
        buf.write(f"{a.t!r},{a.action},{p1},{p2}\n")
    return buf.getvalue()


# --- end-to-end decision ------------------------------------------------------


def decide(
    scenario: PipelineScenario,
    ts: Sequence[float],
    guard: CompressionGuard | None = None,
) -> DispatchDecision:
    """Run the decision chain on the open-valve transient of a damaged line."""
    guard = guard or CompressionGuard()
    L = scenario.line.L
    p1, p2 = scenario.steady.p_start, scenario.p_end
    p_start = [pre_closure_field(scenario, 0.0, t) for t in ts]
    p_end = [pre_closure_field(scenario, L, t) for t in ts]
    series = drop_ratio_series(ts, p_start, p_end, p1, p2, wave_time=scenario.wave_time)
    try:
        t1 = fixation_time(series)
    except NotReadyError:
        logger.info("no resolved ratio sample yet; regime pending")
        return DispatchDecision(p_series=series)

    p_t1 = next(s.p for s in series if s.t == t1)
    c = scenario.gas.c
    regime = classify_regime(p_t1, t1, L, scenario.two_a, c)
    logger.info("fixation at t1=%.0f s, p=%.4g, regime %s", t1, p_t1, regime.value)
    if regime != Regime.accident:
        return DispatchDecision(p_series=series, t1=t1, regime=regime)

    estimate = locate_leak(p_t1, t1, L, scenario.two_a, c)
    plan = None
    step = scenario.valve_step
    if step is not None and 0 < estimate.ell2 < L:
        ell1, ell3 = valve_plan_around(estimate.ell2, L, step)
        p0_t1 = p_start[list(ts).index(t1)]
        try:
            t2 = connector_opening_time(
                t1, ell1, scenario.steady.g0, guard, p1, p0_t1, scenario.two_a, c
            )
        except AlreadyExceededError:
            logger.warning("compression guard already exceeded at t1; connectors open at once")
            t2 = t1
        if ell1 < estimate.ell2 < ell3:
            plan = ValvePlan(ell1=ell1, ell3=ell3, t2=t2)
    return DispatchDecision(
        p_series=series,
        t1=t1,
        regime=regime,
        theta=estimate.theta,
        ell2_estimate=estimate.ell2,
        clamped=estimate.clamped,
        valve_plan=plan,
    )


def isolation_events(
    scenario: PipelineScenario,
    decision: DispatchDecision,
    *,
    step: float = 60.0,
    horizon: float = 1800.0,
) -> list[SequencerEvent]:
    """Sequencer input for a decided line.

    The fixation event is followed by start and ell1 pressures of the
    isolated line, sampled every step seconds until horizon after t1.
    Samples are only generated when the planned valves bracket the actual
    leak; otherwise the stream stops at the fixation.
    """
    if decision.t1 is None or decision.regime == Regime.pending:
        return []
    p_t1 = next(s.p for s in decision.p_series if s.t == decision.t1)
    t1 = decision.t1
    if decision.regime == Regime.technological or decision.valve_plan is None:
        return [SequencerEvent(t=t1, kind=EventKind.fixation, p=p_t1, regime=decision.regime)]

    plan = decision.valve_plan
    fixation = SequencerEvent(
        t=t1,
        kind=EventKind.fixation,
        p=p_t1,
        regime=decision.regime,
        ell1=plan.ell1,
        ell2=decision.ell2_estimate,
        ell3=plan.ell3,
        p_ell1=pre_closure_field(scenario, plan.ell1, t1),
    )
    leak = scenario.leak
    L = scenario.line.L
    if not 0 < plan.ell1 < leak.ell2 < plan.ell3 < L:
        logger.warning(
            "valves at %.0f/%.0f m miss the leak at %.0f m; no isolated samples",
            plan.ell1,
            plan.ell3,
            leak.ell2,
        )
        return [fixation]

    nodes = sorted({*(L * k / 12 for k in range(13)), plan.ell1, leak.ell2, plan.ell3})
    state = SectionState(
        ell1=plan.ell1,
        ell2=leak.ell2,
        ell3=plan.ell3,
        length=L,
        t1=t1,
        snapshot=[(x, pre_closure_field(scenario, x, t1)) for x in nodes],
        g0=scenario.steady.g0,
        g_ur=leak.g_ut,
        g_s=scenario.steady.g0,
        two_a=scenario.two_a,
        c=scenario.gas.c,
    )
    events = [fixation]
    for k in range(1, int(horizon // step) + 1):
        t = t1 + k * step
        events.append(
            SequencerEvent(
                t=t,
                kind=EventKind.sample,
                p_start=post_closure_field(state, 1, 0.0, t),
                p_ell1=post_closure_field(state, 1, plan.ell1, t),
            )
        )
    return events
