"""Pydantic models for the reconstruction optimizers."""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field, model_validator


class EconomicParams(BaseModel):
    """Currency is an opaque unit; only ratios matter to the optimizers."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    e: float = Field(default=0.0, ge=0)  # income per m³ delivered
    c_gas: float = Field(default=0.0, ge=0)  # cost per m³ lost
    k_av: float = Field(default=0.0, ge=0)
    k_con: float = Field(default=0.0, ge=0)
    c_av: float = Field(default=0.0, ge=0)
    c_con: float = Field(default=0.0, ge=0)
    e_n: float = Field(default=0.12, gt=0, le=1)
    omega: float = Field(default=0.0, ge=0)  # accidents per km·yr
    t_repair: float = Field(default=0.0, ge=0)  # h
    s_pc: float = Field(default=0.0, ge=0)  # installed valve cost


class ConnectorEconomics(BaseModel):
    model_config = ConfigDict(frozen=True)

    z: float
    s_g: float
    phi_econ: float


class ConnectorStep(BaseModel):
    """Closed-form step, the residual root and their relative deviation."""

    model_config = ConfigDict(frozen=True)

    mu: float
    eta: float
    xi: float
    ell: float
    ell_residual_root: float | None = None
    deviation: float | None = None


class GasLoss(BaseModel):
    model_config = ConfigDict(frozen=True)

    g_ut: float
    q1: float  # m³ lost before the valves close
    q2_per_m: float  # m³ trapped per metre of isolated line


class LossInputs(BaseModel):
    """Pressures in Pa.  Defaults are the classic design constants."""

    model_config = ConfigDict(frozen=True)

    p_b: float = Field(gt=0)  # steady start pressure
    p_s: float = Field(gt=0)  # steady end pressure
    p_b_t1: float = Field(gt=0)
    p_s_t1: float = Field(gt=0)
    g0: float = Field(ge=0)
    length: float = Field(gt=0)
    ell2: float = Field(ge=0)
    t1: float = Field(gt=0)
    d: float = Field(gt=0)
    two_a: float = Field(default=0.1, gt=0)
    rho: float = Field(default=0.73, gt=0)
    t_m: float = Field(default=323.0, gt=0)
    t_0: float = Field(default=273.15, gt=0)  # 0 °C
    p_0: float = Field(default=1e4, gt=0)  # kgf/m²
    g: float = Field(default=9.81, gt=0)
    p_m: float | None = Field(default=None, gt=0)  # kgf/m²; derived when absent


class LossSpacing(BaseModel):
    model_config = ConfigDict(frozen=True)

    p_m: float
    folded: float
    general: float | None = None
    bruteforce: float | None = None


class WearState(BaseModel):
    model_config = ConfigDict(frozen=True)

    f_phys: float = Field(ge=0, lt=1)
    m_moral: float = Field(ge=0, lt=1)
    alpha_t: float = Field(gt=0, le=1)
    alpha_lambda: float = Field(gt=0)
    k_tech: float = Field(gt=0)

    @model_validator(mode="after")
    def _check_remaining_life(self) -> WearState:
        if abs(self.alpha_t - (1 - self.f_phys)) > 1e-9:
            raise ValueError("alpha_t must equal 1 - f_phys")
        return self

    @classmethod
    def from_factors(cls, f_phys: float, m_moral: float, alpha_lambda: float) -> WearState:
        alpha_t = 1 - f_phys
        k = alpha_lambda * alpha_t * (1 - f_phys) * (1 - m_moral)
        return cls(
            f_phys=f_phys,
            m_moral=m_moral,
            alpha_t=alpha_t,
            alpha_lambda=alpha_lambda,
            k_tech=k,
        )

    @classmethod
    def with_k(cls, k_tech: float) -> WearState:
        """Wear state for a directly known composite factor."""
        return cls(f_phys=0.0, m_moral=0.0, alpha_t=1.0, alpha_lambda=1.0, k_tech=k_tech)


class TelescopicResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    curve: list[tuple[float, float]]
    lp_formula: float
    lp_bruteforce: float
    lp_stationary: float
    deviation: float


class LoopDesign(BaseModel):
    model_config = ConfigDict(frozen=True)

    length: float = Field(gt=0)
    ell: float = Field(ge=0)
    d_loop: float = Field(gt=0)
    beta_cons: float | None = None
    beta0_cons: float | None = None

    @model_validator(mode="after")
    def _check_length(self) -> LoopDesign:
        if self.ell > self.length:
            raise ValueError("loop longer than the line")
        return self


class LoopDiameter(BaseModel):
    model_config = ConfigDict(frozen=True)

    beta: float
    d_loop: float
    ratio: float
    quadratic_ratio: float


class CompressorParams(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    s0: float = Field(ge=0)
    s1: float = Field(gt=0)
    s2: float = Field(gt=0)
    epsilon: float = Field(gt=0)
    q: float | None = None
    q_bar: float = Field(gt=0)
    alpha_reserve: float = Field(ge=0)


class CompressorResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: float
    degenerate: bool = False


class ReconPlan(BaseModel):
    """Reconstruction results for one line; blocks without inputs stay None."""

    model_config = ConfigDict(frozen=True)

    length: float = Field(gt=0)
    q0: float | None = None  # Pa*s/m
    q0_volume: float | None = None  # m³/h
    connector_economics: ConnectorEconomics | None = None
    connector_step: ConnectorStep | None = None
    gas_loss: GasLoss | None = None
    loss_spacing: LossSpacing | None = None
    demand_growth: float | None = None
    demand_loop: LoopDesign | None = None  # same-diameter loop covering demand_growth
    loop: LoopDesign | None = None
    loop_diameter: LoopDiameter | None = None
    economic_looping_length: float | None = None
    telescopic: TelescopicResult | None = None
    compressor: CompressorResult | None = None

    @property
    def empty(self) -> bool:
        return all(getattr(self, name) is None for name in type(self).model_fields if name != "length")
