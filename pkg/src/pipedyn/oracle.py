"""Independent brute-force verifiers.

fd_transient_solve integrates the linearized transient equation

    dP/dt = D·(P_xx + k1·P_x) - c²·Σ G_k·δ(x - x_k),   D = c²/2a

on a node-centred finite-volume grid with a theta-weighted implicit step.
Flux boundaries use the Charny relation dP/dx = -2a·G, so the scheme is
exactly conservative for k1 = 0.  grid_argmin and root_scan are the scanners
used to cross-check closed-form optimizers.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from enum import Enum

import numpy as np
import scipy.sparse as sp
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.optimize import brentq
from scipy.sparse.linalg import splu

from pipedyn.errors import DomainError, NotFoundError, NumericalError
from pipedyn.models import PressureField

logger = logging.getLogger(__name__)


class BoundaryKind(str, Enum):
    fixed_pressure = "fixed_pressure"
    fixed_flux = "fixed_flux"
    ring = "ring"


class BoundaryCondition(BaseModel):
    """value is a pressure (Pa) or a flux in +x direction (Pa·s/m)."""

    model_config = ConfigDict(frozen=True)

    kind: BoundaryKind
    value: float = 0.0
    schedule: Callable[[float], float] | None = None

    def at(self, t: float) -> float:
        return self.schedule(t) if self.schedule is not None else self.value


def fixed_pressure(p: float) -> BoundaryCondition:
    return BoundaryCondition(kind=BoundaryKind.fixed_pressure, value=p)


def fixed_flux(g: float, schedule: Callable[[float], float] | None = None) -> BoundaryCondition:
    return BoundaryCondition(kind=BoundaryKind.fixed_flux, value=g, schedule=schedule)


def ring_closure() -> BoundaryCondition:
    return BoundaryCondition(kind=BoundaryKind.ring)


class PointSource(BaseModel):
    """Withdrawal of flux g at x (negative g injects)."""

    model_config = ConfigDict(frozen=True)

    x: float
    g: float


class FdSetup(BaseModel):
    model_config = ConfigDict(frozen=True)

    length: float = Field(gt=0)
    two_a: float = Field(gt=0)
    c2: float = Field(gt=0)
    nx: int = Field(default=64, ge=16)
    dt: float = Field(default=1.0, gt=0, le=5.0)
    t_end: float = Field(gt=0)
    n_out: int = Field(default=64, ge=2)
    bc_start: BoundaryCondition
    bc_end: BoundaryCondition
    sources: list[PointSource] = Field(default_factory=list)
    initial: Callable[[np.ndarray], np.ndarray]
    advection: float = 0.0  # k1 = g·sin(alpha)/c²
    theta: float = Field(default=0.5, ge=0.5, le=1.0)
    startup_steps: int = Field(default=2, ge=0)

    @model_validator(mode="after")
    def _check_boundaries(self) -> FdSetup:
        ring_start = self.bc_start.kind == BoundaryKind.ring
        ring_end = self.bc_end.kind == BoundaryKind.ring
        if ring_start != ring_end:
            raise DomainError("ring closure must be applied to both ends")
        for s in self.sources:
            if not 0 <= s.x <= self.length:
                raise DomainError(f"source at {s.x} m outside the domain")
        return self

    @property
    def is_ring(self) -> bool:
        return self.bc_start.kind == BoundaryKind.ring

    @property
    def diffusivity(self) -> float:
        return self.c2 / self.two_a

    @property
    def h(self) -> float:
        return self.length / self.nx


class ConservationReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    content_change: float
    net_inflow: float
    relative_error: float


def _node_volumes(setup: FdSetup) -> np.ndarray:
    h = setup.h
    if setup.is_ring:
        return np.full(setup.nx, h)
    vol = np.full(setup.nx + 1, h)
    vol[0] = vol[-1] = h / 2
    return vol


def _operator(setup: FdSetup) -> sp.csc_matrix:
    """Assemble A in M·dP/dt = A·P + b."""
    n = setup.nx if setup.is_ring else setup.nx + 1
    D, h, k1 = setup.diffusivity, setup.h, setup.advection
    lower = D / h - D * k1 / 2
    upper = D / h + D * k1 / 2
    rows, cols, vals = [], [], []
    for i in range(n):
        left, right = i - 1, i + 1
        if setup.is_ring:
            left %= n
            right %= n
        if left >= 0 and right < n:
            rows += [i, i, i]
            cols += [left, i, right]
            vals += [lower, -2 * D / h, upper]
        elif left < 0:
            rows += [i, i]
            cols += [i, right]
            vals += [-D / h, D / h]
        else:
            rows += [i, i]
            cols += [left, i]
            vals += [D / h, -D / h]
    return sp.csc_matrix((vals, (rows, cols)), shape=(n, n))


def _forcing(setup: FdSetup, t: float, vol: np.ndarray) -> np.ndarray:
    n = vol.size
    b = np.zeros(n)
    D, k1 = setup.diffusivity, setup.advection
    if not setup.is_ring:
        for idx, bc in ((0, setup.bc_start), (n - 1, setup.bc_end)):
            if bc.kind != BoundaryKind.fixed_flux:
                continue
            grad = -setup.two_a * bc.at(t)
            sign = -1.0 if idx == 0 else 1.0
            b[idx] += sign * D * grad + vol[idx] * D * k1 * grad
    h = setup.h
    for src in setup.sources:
        pos = src.x / h
        j = min(int(math.floor(pos)), setup.nx - 1)
        w = pos - j
        right = (j + 1) % n if setup.is_ring else j + 1
        b[j % n] -= setup.c2 * src.g * (1 - w)
        b[right] -= setup.c2 * src.g * w
    return b


def _dirichlet(setup: FdSetup, t: float) -> dict[int, float]:
    if setup.is_ring:
        return {}
    fixed = {}
    if setup.bc_start.kind == BoundaryKind.fixed_pressure:
        fixed[0] = setup.bc_start.at(t)
    if setup.bc_end.kind == BoundaryKind.fixed_pressure:
        fixed[setup.nx] = setup.bc_end.at(t)
    return fixed


def _factor(setup: FdSetup, A: sp.csc_matrix, vol: np.ndarray, dt: float, theta: float):
    lhs = (sp.diags(vol) - theta * dt * A).tolil()
    for idx in _dirichlet(setup, 0.0):
        lhs.rows[idx] = [idx]
        lhs.data[idx] = [1.0]
    try:
        return splu(lhs.tocsc())
    except RuntimeError as e:
        raise NumericalError(f"implicit step matrix is singular: {e}") from e


def fd_transient_solve(setup: FdSetup) -> PressureField:
    """Integrate the transient and sample n_out equally spaced times."""
    intervals = setup.n_out - 1
    per_out = max(1, math.ceil(setup.t_end / (setup.dt * intervals)))
    n_steps = per_out * intervals
    dt = setup.t_end / n_steps

    xs = np.linspace(0.0, setup.length, setup.nx + 1)
    vol = _node_volumes(setup)
    A = _operator(setup)
    M = sp.diags(vol)
    grid = xs[:-1] if setup.is_ring else xs
    p = np.asarray(setup.initial(grid), dtype=float).copy()
    for idx, value in _dirichlet(setup, 0.0).items():
        p[idx] = value

    implicit = _factor(setup, A, vol, dt, 1.0)
    weighted = _factor(setup, A, vol, dt, setup.theta)
    logger.debug(
        "fd solve: nx=%d, steps=%d, dt=%.3f s, ring=%s", setup.nx, n_steps, dt, setup.is_ring
    )

    ts = np.linspace(0.0, setup.t_end, setup.n_out)
    out = np.empty((xs.size, ts.size))
    out[:, 0] = np.append(p, p[0]) if setup.is_ring else p
    b_now = _forcing(setup, 0.0, vol)
    for step in range(1, n_steps + 1):
        t_new = step * dt
        theta = 1.0 if step <= setup.startup_steps else setup.theta
        solver = implicit if step <= setup.startup_steps else weighted
        b_new = _forcing(setup, t_new, vol)
        rhs = (M + (1 - theta) * dt * A) @ p + dt * (theta * b_new + (1 - theta) * b_now)
        for idx, value in _dirichlet(setup, t_new).items():
            rhs[idx] = value
        p = solver.solve(rhs)
        if not np.all(np.isfinite(p)):
            raise NumericalError(f"non-finite pressure at t={t_new:.1f} s")
        b_now = b_new
        if step % per_out == 0:
            k = step // per_out
            out[:, k] = np.append(p, p[0]) if setup.is_ring else p
    return PressureField(xs=xs, ts=ts, values=out)


def conservation_audit(setup: FdSetup, field: PressureField | None = None) -> ConservationReport:
    """Compare the change of line content with the integrated net inflow."""
    if setup.advection != 0:
        raise DomainError("conservation audit requires k1 = 0")
    if BoundaryKind.fixed_pressure in (setup.bc_start.kind, setup.bc_end.kind):
        raise DomainError("conservation audit requires flux or ring boundaries")
    field = field if field is not None else fd_transient_solve(setup)
    vol = _node_volumes(setup)
    n = vol.size
    first, last = field.values[:n, 0], field.values[:n, -1]
    content_change = float(np.dot(vol, last - first)) / setup.c2

    ts = np.linspace(0.0, setup.t_end, max(2, int(setup.t_end / setup.dt) + 1))
    withdrawal = math.fsum(s.g for s in setup.sources)
    if setup.is_ring:
        rate = np.full(ts.size, -withdrawal)
    else:
        rate = np.array(
            [setup.bc_start.at(t) - setup.bc_end.at(t) - withdrawal for t in ts]
        )
    net_inflow = float(np.trapezoid(rate, ts))
    scale = max(abs(net_inflow), abs(content_change), 1e-12)
    return ConservationReport(
        content_change=content_change,
        net_inflow=net_inflow,
        relative_error=abs(content_change - net_inflow) / scale,
    )


def compare_fields(
    analytic: PressureField,
    reference: PressureField,
    exclude_x: Sequence[float] = (),
    radius_cells: int = 2,
    t_min: float = 0.0,
) -> float:
    """Max relative deviation, skipping nodes near point sources and times
    before t_min."""
    if analytic.values.shape != reference.values.shape:
        raise DomainError("fields sampled on different grids")
    h = float(reference.xs[1] - reference.xs[0])
    keep = np.ones(reference.xs.size, dtype=bool)
    for x0 in exclude_x:
        keep &= np.abs(reference.xs - x0) > radius_cells * h + 1e-9
    late = reference.ts >= t_min
    a = analytic.values[np.ix_(keep, late)]
    r = reference.values[np.ix_(keep, late)]
    return float(np.max(np.abs(a - r) / np.abs(r)))


def grid_argmin(
    objective: Callable[[float], float], lo: float, hi: float, step: float
) -> tuple[float, float]:
    """Global minimum on a uniform grid; ties go to the smaller argument."""
    if hi < lo or step <= 0:
        raise DomainError("grid_argmin needs lo <= hi and step > 0")
    count = int(round((hi - lo) / step))
    grid = lo + step * np.arange(count + 1)
    values = np.array([objective(float(x)) for x in grid])
    if not np.all(np.isfinite(values)):
        raise DomainError("objective is not finite on the grid")
    k = int(np.argmin(values))
    return float(grid[k]), float(values[k])


def root_scan(
    residual: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-9,
    samples: int = 256,
) -> float:
    """First root on [lo, hi]: bracket by sampling, then refine."""
    grid = np.linspace(lo, hi, samples + 1)
    prev_x, prev_r = float(grid[0]), residual(float(grid[0]))
    if prev_r == 0:
        return prev_x
    for x in grid[1:]:
        r = residual(float(x))
        if r == 0:
            return float(x)
        if math.copysign(1.0, r) != math.copysign(1.0, prev_r):
            return float(brentq(residual, prev_x, float(x), xtol=tol))
        prev_x, prev_r = float(x), r
    raise NotFoundError(f"no sign change of the residual on [{lo}, {hi}]")
