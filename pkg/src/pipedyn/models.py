"""Domain types shared by the solvers, the oracle and the dispatch layer.

All pressures are Pa, coordinates m, times s.  Charny mass flux G keeps the
unit Pa·s/m and is related to pressure through dP/dx = -2a·G.
"""

from __future__ import annotations

import math
from enum import Enum
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

DEFAULT_GRAVITY = 9.81


class UnitScale(str, Enum):
    """Pressure scale a scenario file is written in."""

    pa = "Pa"
    pa_1e4 = "1e4Pa"
    mpa_1e2 = "1e-2MPa"


class GasProperties(BaseModel):
    """Gas state; c is derived from z·R·T when not given."""

    model_config = ConfigDict(frozen=True)

    z: float | None = Field(default=None, gt=0)
    R: float | None = Field(default=None, gt=0)
    T: float | None = Field(default=None, gt=0)
    c: float | None = Field(default=None, gt=0)
    rho: float | None = Field(default=None, gt=0)

    @model_validator(mode="before")
    @classmethod
    def _derive_sound_speed(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        z, R, T = data.get("z"), data.get("R"), data.get("T")
        full = None not in (z, R, T)
        if data.get("c") is None:
            if not full:
                raise ValueError("either c or all of z, R, T must be given")
            if min(z, R, T) <= 0:
                raise ValueError("z, R and T must be positive")
            return {**data, "c": math.sqrt(z * R * T)}
        if full and min(z, R, T) > 0:
            derived = math.sqrt(z * R * T)
            if abs(derived - data["c"]) > 1e-9 * data["c"]:
                raise ValueError(f"c={data['c']} disagrees with sqrt(zRT)={derived}")
        return data

    @property
    def c2(self) -> float:
        return self.c * self.c


class LineGeometry(BaseModel):
    model_config = ConfigDict(frozen=True)

    L: float = Field(gt=0)
    d: float = Field(default=0.7, gt=0)
    lambda_h: float = Field(default=0.03, gt=0)
    n_lines: int = Field(default=1, ge=1)
    sin_alpha: float = Field(default=0.0, gt=-1, lt=1)
    g: float = Field(default=DEFAULT_GRAVITY, gt=0)

    @property
    def h(self) -> float:
        """Elevation gain over the whole length."""
        return self.L * self.sin_alpha

    @property
    def area(self) -> float:
        return math.pi * self.d * self.d / 4


class Linearization(BaseModel):
    model_config = ConfigDict(frozen=True)

    two_a: float = Field(gt=0)

    @property
    def a(self) -> float:
        return self.two_a / 2


class SteadyState(BaseModel):
    model_config = ConfigDict(frozen=True)

    p_start: float = Field(gt=0)
    p_end: float | None = Field(default=None, gt=0)
    g0: float = Field(ge=0)


class LeakEvent(BaseModel):
    """Point withdrawal at ell2; beta is the decay rate used by the
    parallel-line emergency model."""

    model_config = ConfigDict(frozen=True)

    ell2: float = Field(ge=0)
    g_ut: float = Field(ge=0)
    onset: float = 0.0
    beta: float | None = None


class Offtake(BaseModel):
    model_config = ConfigDict(frozen=True)

    x: float = Field(ge=0)
    g: float = Field(ge=0)


class OfftakeSet(BaseModel):
    model_config = ConfigDict(frozen=True)

    items: list[Offtake] = Field(default_factory=list)

    @property
    def total(self) -> float:
        return math.fsum(o.g for o in self.items)

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        xs = np.array([o.x for o in self.items], dtype=float)
        gs = np.array([o.g for o in self.items], dtype=float)
        return xs, gs


class SeriesControl(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_terms: int = Field(default=50, ge=1)
    tail_tol: float = Field(default=1e-10, gt=0)


class BoundaryVariant(str, Enum):
    """Operating condition of a two-line parallel pipeline."""

    fixed_end = "fixed_end"  # pressure held at the common end
    fixed_start = "fixed_start"  # pressure held at the common start
    flux_both = "flux_both"  # flux measured at both ends


class LineSection(str, Enum):
    undamaged = "undamaged"
    damaged_before = "damaged_before"
    damaged_after = "damaged_after"


class PipelineScenario(BaseModel):
    """The single input record every field solver consumes."""

    model_config = ConfigDict(frozen=True)

    gas: GasProperties
    line: LineGeometry
    linearization: Linearization
    steady: SteadyState
    leaks: list[LeakEvent] = Field(default_factory=list)
    offtakes: OfftakeSet | None = None
    valve_at: float | None = None
    valve_step: float | None = Field(default=None, gt=0)
    series: SeriesControl = Field(default_factory=SeriesControl)

    @model_validator(mode="after")
    def _check_consistency(self) -> PipelineScenario:
        L = self.line.L
        for leak in self.leaks:
            if not 0 <= leak.ell2 <= L:
                raise ValueError(f"leak at {leak.ell2} m outside [0, {L}]")
        if self.offtakes is not None:
            for o in self.offtakes.items:
                if not 0 <= o.x <= L:
                    raise ValueError(f"offtake at {o.x} m outside [0, {L}]")
        if self.valve_at is not None and not 0 < self.valve_at <= L:
            raise ValueError(f"valve at {self.valve_at} m outside (0, {L}]")
        s = self.steady
        if s.p_end is not None:
            expected = s.p_start - self.linearization.two_a * s.g0 * L
            if abs(s.p_end - expected) > 0.005 * s.p_start:
                raise ValueError(
                    f"p_end={s.p_end} inconsistent with steady drop "
                    f"(expected {expected:.1f} Pa)"
                )
        return self

    @property
    def c2(self) -> float:
        return self.gas.c2

    @property
    def two_a(self) -> float:
        return self.linearization.two_a

    @property
    def diffusivity(self) -> float:
        return self.gas.c2 / self.linearization.two_a

    @property
    def p_end(self) -> float:
        """End pressure of the steady profile (declared or derived)."""
        if self.steady.p_end is not None:
            return self.steady.p_end
        return self.steady.p_start - self.two_a * self.steady.g0 * self.line.L

    @property
    def leak(self) -> LeakEvent | None:
        return self.leaks[0] if self.leaks else None

    @property
    def wave_time(self) -> float:
        """Time for a pressure wave to traverse the line."""
        return self.line.L / self.gas.c


class PressureField(BaseModel):
    """Sampled P(x, t); values[i, j] is P(xs[i], ts[j])."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    xs: np.ndarray
    ts: np.ndarray
    values: np.ndarray
    section_of_x: list[str] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_shape(self) -> PressureField:
        if self.values.shape != (self.xs.size, self.ts.size):
            raise ValueError(
                f"values shape {self.values.shape} does not match "
                f"({self.xs.size}, {self.ts.size})"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field contains non-finite values")
        if self.section_of_x and len(self.section_of_x) != self.xs.size:
            raise ValueError("one section tag per coordinate required")
        return self

    def rows(self):
        """Yield (x, t, P) in x-major order."""
        for i, x in enumerate(self.xs):
            for j, t in enumerate(self.ts):
                yield float(x), float(t), float(self.values[i, j])


class ReliefDerived(BaseModel):
    model_config = ConfigDict(frozen=True)

    lambda1: float
    lambda2: float


class SectionState(BaseModel):
    """Snapshot of a sectioned line at the moment the valves close.

    Sections: 1 = [0, ell1] (fed by g0), 2 = [ell1, ell3] (leak g_ur at
    ell2), 3 = [ell3, L] (consumers draw g_s at L).
    """

    model_config = ConfigDict(frozen=True)

    ell1: float
    ell2: float
    ell3: float
    length: float
    t1: float = Field(ge=0)
    snapshot: list[tuple[float, float]]
    g0: float = Field(ge=0)
    g_ur: float = Field(ge=0)
    g_s: float = Field(ge=0)
    grad_start: float = 0.0
    grad_end: float = 0.0
    two_a: float = Field(default=0.1, gt=0)
    c: float = Field(default=383.3, gt=0)

    @model_validator(mode="after")
    def _check_layout(self) -> SectionState:
        if not 0 < self.ell1 < self.ell2 < self.ell3 < self.length:
            raise ValueError("require 0 < ell1 < ell2 < ell3 < L")
        xs = [p[0] for p in self.snapshot]
        if len(xs) < 2 or any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("snapshot needs >= 2 strictly increasing coordinates")
        if any(p[1] <= 0 for p in self.snapshot):
            raise ValueError("snapshot pressures must be positive")
        return self

    @property
    def c2(self) -> float:
        return self.c * self.c

    def snapshot_at(self, x: float) -> float:
        xs, ps = zip(*self.snapshot)
        return float(np.interp(x, xs, ps))


class NewSteadyInputs(BaseModel):
    """Handoff data for the steady state after connectors reroute flow."""

    model_config = ConfigDict(frozen=True)

    p_in: float = Field(gt=0)
    g0: float = Field(ge=0)
    two_a: float = Field(default=0.1, gt=0)
    ell1: float
    ell3: float
    length: float
    p1_t2: float = Field(gt=0)  # pressure at ell1 at hand-off
    p3_t2: float = Field(gt=0)  # pressure at ell3 at hand-off
    p1_0: float = Field(gt=0)  # original steady pressure at ell1
    p3_0: float = Field(gt=0)  # original steady pressure at ell3

    @model_validator(mode="after")
    def _check_layout(self) -> NewSteadyInputs:
        if not 0 < self.ell1 < self.ell3 < self.length:
            raise ValueError("require 0 < ell1 < ell3 < L")
        return self


class NewSteadySection(str, Enum):
    upstream = "upstream"  # 0..ell1
    bypass = "bypass"  # ell1..ell3
    downstream = "downstream"  # ell3..L


class Regime(str, Enum):
    accident = "Accident"
    technological = "Technological"
    pending = "Pending"


class RatioSample(BaseModel):
    model_config = ConfigDict(frozen=True)

    t: float
    p: float | None = None  # None while the wave has not arrived

    @property
    def pending(self) -> bool:
        return self.p is None


class CompressionGuard(BaseModel):
    model_config = ConfigDict(frozen=True)

    epsilon: float = Field(default=1.3, gt=1)


class ValvePlan(BaseModel):
    model_config = ConfigDict(frozen=True)

    ell1: float
    ell3: float
    t2: float | None = None


class LeakEstimate(BaseModel):
    model_config = ConfigDict(frozen=True)

    theta: float
    ell2: float
    phi: float
    clamped: bool = False


class DispatchDecision(BaseModel):
    model_config = ConfigDict(frozen=True)

    p_series: list[RatioSample] = Field(default_factory=list)
    t1: float | None = None
    regime: Regime = Regime.pending
    theta: float | None = None
    ell2_estimate: float | None = None
    clamped: bool = False
    valve_plan: ValvePlan | None = None
    kappa_series: list[tuple[float, float]] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_decision(self) -> DispatchDecision:
        if self.theta is not None and not 0 <= self.theta <= 1:
            raise ValueError(f"theta={self.theta} outside [0, 1]")
        plan = self.valve_plan
        if plan is not None and self.ell2_estimate is not None:
            if not plan.ell1 < self.ell2_estimate < plan.ell3:
                raise ValueError("valve plan does not bracket the leak estimate")
        if plan is not None and plan.t2 is not None and self.t1 is not None:
            if plan.t2 < self.t1:
                raise ValueError("t2 precedes t1")
        return self
