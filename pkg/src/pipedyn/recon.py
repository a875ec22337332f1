"""Steady capacity and reconstruction optimizers.

Every optimizer that has a printed closed form also runs a brute-force
scan, so disagreements between the two are reported rather than hidden.
"""

from __future__ import annotations

import logging
import math

from pipedyn.core import PA_PER_KGF_M2
from pipedyn.errors import DomainError, InfeasibleError, NotFoundError, SingularityError
from pipedyn.models import GasProperties
from pipedyn.oracle import grid_argmin, root_scan
from pipedyn.recon_models import (
    CompressorParams,
    CompressorResult,
    ConnectorEconomics,
    ConnectorStep,
    EconomicParams,
    GasLoss,
    LossInputs,
    LossSpacing,
    LoopDiameter,
    TelescopicResult,
    WearState,
)

logger = logging.getLogger(__name__)

SQRT3 = math.sqrt(3)
PI2 = math.pi**2


def steady_capacity(
    p_h: float,
    p_k: float,
    d: float,
    lambda_h: float,
    gas: GasProperties,
    L: float,
    n_lines: int = 1,
) -> float:
    """Stationary mass flux (Pa·s/m) of n parallel lines."""
    if not p_h > p_k > 0:
        raise DomainError(f"need p_h > p_k > 0 (got {p_h}, {p_k})")
    if L <= 0 or d <= 0 or lambda_h <= 0 or n_lines < 1:
        raise DomainError("length, diameter, friction and line count must be positive")
    return math.sqrt((p_h**2 - p_k**2) * n_lines * d / (gas.c2 * lambda_h)) / math.sqrt(L)


def to_hourly_volume(q0: float, d: float, rho: float) -> float:
    """Convert a mass flux density to m³/h through one line of diameter d."""
    return q0 * math.pi * d * d / 4 * 3600 / rho


def loop_transfer_ratio(L: float, ell: float) -> float:
    if not 0 <= ell <= L:
        raise DomainError(f"ell={ell} outside [0, {L}]")
    return (math.sqrt(2 * L / (ell + L)) + 1) / SQRT3


# --- connector spacing ---------------------------------------------------------


def connector_step_economics(
    params: EconomicParams, q0: float, n_lines: int, L: float
) -> ConnectorEconomics:
    """Annual cost per step, annual saving per step and their ratio.

    q0 is in m³/h, t_repair in h, L in m (the accident intensity is per km).
    """
    z = params.e_n * (8 * params.k_av + 3 * params.k_con) + 8 * params.c_av + 3 * params.c_con
    if z == 0:
        raise SingularityError("zero annual cost per connector step")
    s_g = q0 * params.t_repair * params.e / n_lines * params.omega * (L / 1000)
    return ConnectorEconomics(z=z, s_g=s_g, phi_econ=s_g / z)


def connector_step_residual(L: float, phi_econ: float, ell: float) -> float:
    """Balance whose root is the connector step; the 1/√3 term sits under the root."""
    return math.sqrt(2 * L / (3 * (ell + L)) + 1 / SQRT3) * phi_econ - L / ell


def optimal_connector_step(L: float, phi_econ: float) -> ConnectorStep:
    if phi_econ <= 0:
        raise DomainError("phi_econ must be positive")
    inv = 1 / phi_econ
    disc = (inv - 5 / SQRT3) ** 2 - 8
    if disc < 0:
        raise InfeasibleError(f"no real step for phi_econ={phi_econ}")
    mu = math.sqrt(disc)
    eta = 9 * SQRT3 * inv * (3 * inv * inv + 1) - (2 * SQRT3 * inv - 1) ** 3
    xi = eta / (3 * SQRT3 * mu)
    phase = math.asinh(xi)
    ell = (2 * L / SQRT3) * (mu * math.sinh(phase / 3) - inv + 1 / (2 * SQRT3))

    try:
        root = root_scan(lambda s: connector_step_residual(L, phi_econ, s), L * 1e-6, L)
    except NotFoundError:
        logger.info("step residual has no root on (0, L] for phi_econ=%s", phi_econ)
        root = None
    deviation = abs(ell - root) / root if root else None
    return ConnectorStep(mu=mu, eta=eta, xi=xi, ell=ell, ell_residual_root=root, deviation=deviation)


def emergency_gas_loss(inputs: LossInputs) -> GasLoss:
    """Leak flux from the end pressures at t1 and the resulting volumes."""
    L = inputs.length
    offset = inputs.ell2 - L / 2
    if offset == 0:
        raise SingularityError("a midpoint leak is invisible to the end-pressure balance")
    excess = inputs.p_b_t1 - inputs.p_s_t1 - inputs.two_a * inputs.g0 * L
    g_ut = excess / (inputs.two_a * offset)
    area = math.pi * inputs.d**2 / 4
    q1 = area * inputs.g * inputs.t1 * g_ut / inputs.rho
    p_m = _mean_pressure(inputs)
    q2_per_m = area * (p_m / inputs.p_0) * (inputs.t_m / inputs.t_0)
    return GasLoss(g_ut=g_ut, q1=q1, q2_per_m=q2_per_m)


def _mean_pressure(inputs: LossInputs) -> float:
    """Mean line pressure in kgf/m²."""
    if inputs.p_m is not None:
        return inputs.p_m
    pb, ps = inputs.p_b / PA_PER_KGF_M2, inputs.p_s / PA_PER_KGF_M2
    return (2 / 3) * (pb + ps * ps / (pb + ps))


def loss_based_spacing(inputs: LossInputs, econ: EconomicParams) -> LossSpacing:
    """Valve spacing at which the valve cost equals the value of the lost gas.

    folded is the engineering formula with its constants baked in (kgf/m²
    pressures); general solves the same balance with the inputs as given and
    is None when the pre-closure loss alone already exceeds the valve cost;
    bruteforce is the root of that balance found by scanning [0, L].
    """
    if econ.s_pc <= 0 or econ.c_gas <= 0:
        raise DomainError("valve cost and gas price must be positive")
    L = inputs.length
    offset = inputs.ell2 - L / 2
    if offset == 0:
        raise SingularityError("a midpoint leak is invisible to the end-pressure balance")
    p_m = _mean_pressure(inputs)
    kgf = PA_PER_KGF_M2
    excess = (inputs.p_b_t1 - inputs.p_s_t1) / kgf - 0.1 * (inputs.g0 / kgf) * L
    folded = 10767 / p_m * econ.s_pc / (econ.c_gas * inputs.d**2) - 113.6 * inputs.t1 * excess / (
        p_m * offset
    )
    if folded < 0:
        raise InfeasibleError(f"valve cost exceeds the recoverable loss (ell={folded:.1f} m)")

    # general balance in kgf/m² pressures, matching p_0
    loss = emergency_gas_loss(
        inputs.model_copy(
            update={
                "p_b_t1": inputs.p_b_t1 / kgf,
                "p_s_t1": inputs.p_s_t1 / kgf,
                "g0": inputs.g0 / kgf,
                "p_m": p_m,
            }
        )
    )
    budget = econ.s_pc / econ.c_gas
    general = (budget - loss.q1) / loss.q2_per_m
    general = general if general >= 0 else None

    def balance(ell: float) -> float:
        return econ.c_gas * (loss.q1 + loss.q2_per_m * ell) - econ.s_pc

    try:
        bruteforce = root_scan(balance, 0.0, L)
    except NotFoundError:
        bruteforce = None
    if loss.q1 >= budget:
        logger.info("gas lost before closure (%.0f m³) already exceeds the valve budget", loss.q1)
    logger.debug("loss spacing: folded=%.1f general=%s scan=%s", folded, general, bruteforce)
    return LossSpacing(p_m=p_m, folded=folded, general=general, bruteforce=bruteforce)


# --- looping ------------------------------------------------------------------


def looping_length_for_demand(L: float, b: float) -> float:
    if b < 1:
        raise DomainError(f"demand growth factor b={b} must be >= 1")
    return 4 * L * (b * b - 1) / (3 * b * b)


def capacity_ratio(L: float, ell: float) -> float:
    if ell < 0:
        raise DomainError(f"ell={ell} is negative")
    return math.sqrt((L + ell) / L)


def looping_consistency(L: float, b: float) -> float:
    """capacity_ratio at the demand-driven loop length, minus b."""
    return capacity_ratio(L, looping_length_for_demand(L, b)) - b


def economic_phi(c_b: float, f_phys: float, m_moral: float, q0: float, e: float) -> float:
    if q0 <= 0 or e <= 0:
        raise DomainError("q0 and e must be positive")
    return c_b * (1 - f_phys) * (1 - m_moral) / (q0 * e)


def economic_looping_length(L: float, phi_ratio: float) -> tuple[float, bool]:
    """(ell, clamped) with ell = L·(2phi - 1)/phi² limited to [0, L]."""
    if phi_ratio <= 0:
        raise DomainError("phi_ratio must be positive")
    ell = L * (2 * phi_ratio - 1) / phi_ratio**2
    bounded = min(max(ell, 0.0), L)
    return bounded, bounded != ell


def loop_diameter_from_beta(D: float, beta: float) -> float:
    if beta <= 0:
        raise DomainError("beta must be positive")
    return D * beta**-0.2


def optimal_loop_diameter(D: float, L: float, ell: float) -> LoopDiameter:
    """Loop diameter; finite and positive only for 0 < ell < 3L/4."""
    if ell <= 0:
        raise DomainError("loop length must be positive")
    quadratic = 1 - 3 * L / (4 * ell)
    if quadratic >= 0:
        raise InfeasibleError(f"ell={ell} >= 3L/4 gives a non-positive loop coefficient")
    beta = (L / ell) * (1 - 1 / quadratic)
    d_loop = loop_diameter_from_beta(D, beta)
    return LoopDiameter(beta=beta, d_loop=d_loop, ratio=d_loop / D, quadratic_ratio=quadratic)


def loop_coefficient_for_gain(L: float, ell: float, beta0: float, gain: float) -> float:
    """Loop consumption coefficient giving a throughput gain on a loop of length ell.

    Solves ell/(beta0 + beta)² + (L - ell)/beta0² = L/(gain·beta0)².
    """
    if not 0 < ell <= L or beta0 <= 0 or gain < 1:
        raise DomainError("need 0 < ell <= L, beta0 > 0 and gain >= 1")
    room = ell - L * (1 - 1 / gain**2)
    if room <= 0:
        raise InfeasibleError(f"a loop of {ell} m cannot raise throughput by {gain}")
    return beta0 * (math.sqrt(ell / room) - 1)


# --- telescopic reuse -------------------------------------------------------


def telescopic_cost(lp: float, lc: float, s_p: float, s_h: float, k: float) -> float:
    return s_p * lp * lp + s_h * k * (lc - lp) ** 2


def telescopic_reuse(
    lc: float, s_p: float, s_h: float, wear: WearState, step: float = 1.0
) -> TelescopicResult:
    """Cost curve of reusing lp of an old line of length lc, with its optima."""
    if s_p <= 0 or s_h <= 0:
        raise DomainError("unit costs must be positive")
    k = wear.k_tech
    count = int(round(lc / step))
    curve = [(i * step, telescopic_cost(i * step, lc, s_p, s_h, k)) for i in range(count + 1)]
    lp_formula = lc / (1 + s_p / (2 * s_h * k))
    lp_brute, _ = grid_argmin(lambda lp: telescopic_cost(lp, lc, s_p, s_h, k), 0.0, lc, step)
    lp_stationary = s_h * k * lc / (s_p + s_h * k)
    deviation = abs(lp_formula - lp_brute) / lp_brute if lp_brute else math.inf
    if deviation > 0.1:
        logger.info(
            "closed-form reuse length %.3f differs from the scanned optimum %.3f", lp_formula, lp_brute
        )
    return TelescopicResult(
        curve=curve,
        lp_formula=lp_formula,
        lp_bruteforce=lp_brute,
        lp_stationary=lp_stationary,
        deviation=deviation,
    )


# --- compressor units ---------------------------------------------------------


def compressor_balance(params: CompressorParams, n: float) -> float:
    return (params.s0 + params.s1 * params.epsilon) * n ** (2 / 3) + 0.5 * params.s2 * math.sqrt(
        params.q_bar
    ) * (n - params.alpha_reserve)


def compressor_units(params: CompressorParams) -> CompressorResult:
    """Positive root of the unit-count balance."""
    if params.epsilon < params.s0 / params.s1:
        raise InfeasibleError(
            f"epsilon={params.epsilon} below s0/s1={params.s0 / params.s1:.4f}"
        )
    if params.alpha_reserve == 0:
        logger.info("zero reserve: n = 0 is the only root")
        return CompressorResult(n=0.0, degenerate=True)
    hi = max(params.alpha_reserve, 1.0)
    return CompressorResult(n=root_scan(lambda n: compressor_balance(params, n), 0.0, hi))
