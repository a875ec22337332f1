"""Scenario file schema (JSON) and its conversion to solver inputs.

Pressures in a file are written in the declared unit scale; everything the
solvers see is converted to Pa.  Unknown keys are rejected at every level.
"""

from __future__ import annotations

import re
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from pipedyn.core import charny_linearization, to_pascal
from pipedyn.models import (
    BoundaryVariant,
    CompressionGuard,
    GasProperties,
    LeakEvent,
    LineGeometry,
    LineSection,
    Linearization,
    Offtake,
    OfftakeSet,
    PipelineScenario,
    SectionState,
    SeriesControl,
    SteadyState,
    UnitScale,
)
from pipedyn.recon_models import CompressorParams, EconomicParams
from pipedyn.series import RingForm

_GRID = re.compile(r"^(\d+)x(\d+)$")


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GasSection(_Section):
    z: float | None = None
    R: float | None = None
    T: float | None = None
    c: float | None = None
    rho: float | None = None


class LineSectionSpec(_Section):
    L: float = Field(gt=0)
    d: float = Field(default=0.7, gt=0)
    lambda_h: float = Field(default=0.03, gt=0)
    two_a: float | None = Field(default=None, gt=0)
    v_mean: float | None = Field(default=None, gt=0)
    n_lines: int = Field(default=1, ge=1)
    sin_alpha: float = Field(default=0.0, gt=-1, lt=1)
    g: float = Field(default=9.81, gt=0)

    @model_validator(mode="after")
    def _need_linearization(self) -> LineSectionSpec:
        if self.two_a is None and self.v_mean is None:
            raise ValueError("line needs two_a, or v_mean to derive it from lambda_h and d")
        return self

    def linearization(self) -> Linearization:
        if self.two_a is not None:
            return Linearization(two_a=self.two_a)
        return Linearization(two_a=charny_linearization(self.lambda_h, self.v_mean, self.d))


class SteadySection(_Section):
    p_start: float = Field(gt=0)
    p_end: float | None = Field(default=None, gt=0)
    g0: float = Field(ge=0)
    unit: UnitScale = UnitScale.pa


class LeakSpec(_Section):
    ell2: float = Field(ge=0)
    g_ut: float = Field(ge=0)
    onset: float = 0.0
    beta: float | None = None


class OfftakeSpec(_Section):
    x: float = Field(ge=0)
    g: float = Field(ge=0)


class ClosureSpec(_Section):
    """Sectioned-line state at valve closure; pressures in the steady unit."""

    ell1: float
    ell3: float
    t1: float = Field(ge=0)
    snapshot: list[tuple[float, float]]
    g_ur: float = Field(ge=0)
    g_s: float = Field(ge=0)
    grad_start: float = 0.0
    grad_end: float = 0.0


class EventsSection(_Section):
    leaks: list[LeakSpec] = Field(default_factory=list)
    offtakes: list[OfftakeSpec] = Field(default_factory=list)
    valve_step: float | None = Field(default=None, gt=0)
    valve_at: float | None = None
    valve_time: float | None = Field(default=None, ge=0)
    variant: BoundaryVariant = BoundaryVariant.fixed_end
    line: LineSection = LineSection.damaged_after
    closure: ClosureSpec | None = None


class SeriesSection(_Section):
    n_terms: int = Field(default=50, ge=1)
    tail_tol: float = Field(default=1e-10, gt=0)


class FieldKind(str, Enum):
    pre_closure = "pre_closure"
    coupled = "coupled"
    relief = "relief"
    ring = "ring"
    emergency = "emergency"
    post_closure = "post_closure"


class OutputsSection(_Section):
    field: FieldKind = FieldKind.pre_closure
    grid: str = "13x9"
    x_range: tuple[float, float] | None = None
    t_range: tuple[float, float] = (0.0, 600.0)
    ring_form: RingForm = RingForm.TABULATED
    dispatch_step: float = Field(default=100.0, gt=0)
    epsilon: float = Field(default=1.3, gt=1)

    @field_validator("grid")
    @classmethod
    def _check_grid(cls, v: str) -> str:
        m = _GRID.match(v)
        if not m or min(int(m.group(1)), int(m.group(2))) < 1:
            raise ValueError(f"grid must look like 'NxM' with N, M >= 1, got {v!r}")
        return v

    @property
    def shape(self) -> tuple[int, int]:
        nx, nt = _GRID.match(self.grid).groups()
        return int(nx), int(nt)


class LossSection(_Section):
    """Pre-closure loss inputs for valve spacing; pressures in the steady unit."""

    p_b_t1: float = Field(gt=0)
    p_s_t1: float = Field(gt=0)
    t1: float = Field(gt=0)
    rho: float = Field(default=0.73, gt=0)
    t_m: float = Field(default=323.0, gt=0)
    t_0: float = Field(default=273.15, gt=0)  # 0 °C
    p_0: float = Field(default=1e4, gt=0)
    p_m: float | None = Field(default=None, gt=0)


class TelescopicSpec(_Section):
    lc: float = Field(gt=0)
    s_p: float = Field(gt=0)
    s_h: float = Field(gt=0)
    k_tech: float = Field(gt=0)
    step: float = Field(default=1.0, gt=0)


class OptimizeSection(_Section):
    """Inputs of the reconstruction optimizers; every block is optional."""

    p_h: float | None = Field(default=None, gt=0)
    p_k: float | None = Field(default=None, gt=0)
    q0_m3h: float | None = Field(default=None, gt=0)
    demand_growth: float | None = Field(default=None, ge=1)
    loop_ell: float | None = Field(default=None, gt=0)
    phi_ratio: float | None = Field(default=None, gt=0)
    loss: LossSection | None = None
    telescopic: TelescopicSpec | None = None
    compressor: CompressorParams | None = None


class ScenarioFile(_Section):
    name: str = Field(default="scenario", pattern=r"^[A-Za-z0-9_.-]+$")
    gas: GasSection
    line: LineSectionSpec
    steady: SteadySection
    events: EventsSection = Field(default_factory=EventsSection)
    series: SeriesSection = Field(default_factory=SeriesSection)
    economics: EconomicParams | None = None
    optimize: OptimizeSection | None = None
    outputs: OutputsSection = Field(default_factory=OutputsSection)

    def _pa(self, value: float) -> float:
        return to_pascal(value, self.steady.unit)

    def to_scenario(self) -> PipelineScenario:
        steady = SteadyState(
            p_start=self._pa(self.steady.p_start),
            p_end=None if self.steady.p_end is None else self._pa(self.steady.p_end),
            g0=self.steady.g0,
        )
        line = self.line
        offtakes = (
            OfftakeSet(items=[Offtake(x=o.x, g=o.g) for o in self.events.offtakes])
            if self.events.offtakes
            else None
        )
        return PipelineScenario(
            gas=GasProperties(**self.gas.model_dump(exclude_none=True)),
            line=LineGeometry(
                L=line.L,
                d=line.d,
                lambda_h=line.lambda_h,
                n_lines=line.n_lines,
                sin_alpha=line.sin_alpha,
                g=line.g,
            ),
            linearization=line.linearization(),
            steady=steady,
            leaks=[LeakEvent(**leak.model_dump()) for leak in self.events.leaks],
            offtakes=offtakes,
            valve_at=self.events.valve_at,
            valve_step=self.events.valve_step,
            series=SeriesControl(n_terms=self.series.n_terms, tail_tol=self.series.tail_tol),
        )

    def section_state(self) -> SectionState:
        closure = self.events.closure
        if closure is None:
            raise ValueError("events.closure is required for the post-closure field")
        if not self.events.leaks:
            raise ValueError("events.leaks is required for the post-closure field")
        scenario = self.to_scenario()
        return SectionState(
            ell1=closure.ell1,
            ell2=scenario.leak.ell2,
            ell3=closure.ell3,
            length=scenario.line.L,
            t1=closure.t1,
            snapshot=[(x, self._pa(p)) for x, p in closure.snapshot],
            g0=scenario.steady.g0,
            g_ur=closure.g_ur,
            g_s=closure.g_s,
            grad_start=closure.grad_start,
            grad_end=closure.grad_end,
            two_a=scenario.two_a,
            c=scenario.gas.c,
        )

    def guard(self) -> CompressionGuard:
        return CompressionGuard(epsilon=self.outputs.epsilon)

    def grid(self) -> tuple[np.ndarray, np.ndarray]:
        nx, nt = self.outputs.shape
        lo, hi = self.outputs.x_range or (0.0, self.line.L)
        xs = np.linspace(lo, hi, nx)
        ts = np.linspace(*self.outputs.t_range, nt)
        return xs, ts

    def dispatch_times(self) -> list[float]:
        lo, hi = self.outputs.t_range
        step = self.outputs.dispatch_step
        count = int(round((hi - lo) / step))
        return [lo + k * step for k in range(count + 1)]
