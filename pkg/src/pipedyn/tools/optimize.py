"""optimize: reconstruction optimizers for the blocks present in a scenario."""

from __future__ import annotations

import argparse
import logging
from pathlib import Path

from pipedyn import recon
from pipedyn.core import to_pascal
from pipedyn.engine import FieldEngine
from pipedyn.errors import DomainError
from pipedyn.output import emit, render_csv, write_sidecar
from pipedyn.recon_models import LoopDesign, LossInputs, ReconPlan, WearState
from pipedyn.scenario_models import ScenarioFile
from pipedyn.scenario_store import ScenarioStore

logger = logging.getLogger(__name__)

DEFAULT_RHO = 0.73  # kg/m³

Row = tuple[str, float | None, str]


def _capacity(sf: ScenarioFile) -> dict:
    opt = sf.optimize
    if opt.p_h is None or opt.p_k is None:
        return {}
    scenario = sf.to_scenario()
    line = scenario.line
    q0 = recon.steady_capacity(
        to_pascal(opt.p_h, sf.steady.unit),
        to_pascal(opt.p_k, sf.steady.unit),
        line.d,
        line.lambda_h,
        scenario.gas,
        line.L,
        line.n_lines,
    )
    rho = scenario.gas.rho or DEFAULT_RHO
    return {"q0": q0, "q0_volume": recon.to_hourly_volume(q0, line.d, rho)}


def _connectors(sf: ScenarioFile, q0_m3h: float) -> dict:
    L = sf.line.L
    econ = recon.connector_step_economics(sf.economics, q0_m3h, sf.line.n_lines, L)
    return {
        "connector_economics": econ,
        "connector_step": recon.optimal_connector_step(L, econ.phi_econ),
    }


def _loss_spacing(sf: ScenarioFile) -> dict:
    scenario = sf.to_scenario()
    if scenario.leak is None:
        raise DomainError("optimize.loss needs a leak in events.leaks")
    loss = sf.optimize.loss
    unit = sf.steady.unit
    inputs = LossInputs(
        p_b=scenario.steady.p_start,
        p_s=scenario.p_end,
        p_b_t1=to_pascal(loss.p_b_t1, unit),
        p_s_t1=to_pascal(loss.p_s_t1, unit),
        g0=scenario.steady.g0,
        length=scenario.line.L,
        ell2=scenario.leak.ell2,
        t1=loss.t1,
        d=scenario.line.d,
        two_a=scenario.two_a,
        rho=loss.rho,
        t_m=loss.t_m,
        t_0=loss.t_0,
        p_0=loss.p_0,
        g=scenario.line.g,
        p_m=loss.p_m,
    )
    return {
        "gas_loss": recon.emergency_gas_loss(inputs),
        "loss_spacing": recon.loss_based_spacing(inputs, sf.economics),
    }


def _looping(sf: ScenarioFile) -> dict:
    opt, L, D = sf.optimize, sf.line.L, sf.line.d
    parts: dict = {}
    if opt.demand_growth is not None:
        ell = recon.looping_length_for_demand(L, opt.demand_growth)
        parts["demand_growth"] = opt.demand_growth
        parts["demand_loop"] = LoopDesign(length=L, ell=ell, d_loop=D)
    if opt.loop_ell is not None:
        diameter = recon.optimal_loop_diameter(D, L, opt.loop_ell)
        parts["loop"] = LoopDesign(length=L, ell=opt.loop_ell, d_loop=diameter.d_loop)
        parts["loop_diameter"] = diameter
    if opt.phi_ratio is not None:
        ell, clamped = recon.economic_looping_length(L, opt.phi_ratio)
        if clamped:
            logger.info("economic looping length clamped to [0, L]")
        parts["economic_looping_length"] = ell
    return parts


def build_plan(sf: ScenarioFile) -> ReconPlan:
    """Run every optimizer whose inputs the scenario supplies."""
    if sf.optimize is None:
        raise DomainError("scenario has no optimize section")
    opt = sf.optimize
    parts = _capacity(sf)
    q0_m3h = opt.q0_m3h if opt.q0_m3h is not None else parts.get("q0_volume")
    if sf.economics is not None and q0_m3h is not None:
        parts |= _connectors(sf, q0_m3h)
    if sf.economics is not None and opt.loss is not None:
        parts |= _loss_spacing(sf)
    parts |= _looping(sf)
    if opt.telescopic is not None:
        spec = opt.telescopic
        parts["telescopic"] = recon.telescopic_reuse(
            spec.lc, spec.s_p, spec.s_h, WearState.with_k(spec.k_tech), spec.step
        )
    if opt.compressor is not None:
        parts["compressor"] = recon.compressor_units(opt.compressor)
    plan = ReconPlan(length=sf.line.L, **parts)
    if plan.empty:
        logger.warning("optimize section has no complete input block")
    return plan


def plan_rows(plan: ReconPlan) -> list[Row]:
    rows: list[Row] = []
    if plan.q0 is not None:
        rows += [("q0", plan.q0, "Pa*s/m"), ("q0_volume", plan.q0_volume, "m3/h")]
    if plan.connector_economics is not None:
        econ, step = plan.connector_economics, plan.connector_step
        rows += [
            ("connector_cost_z", econ.z, "currency/yr"),
            ("connector_saving_s_g", econ.s_g, "currency/yr"),
            ("phi_econ", econ.phi_econ, "1"),
            ("connector_mu", step.mu, "1"),
            ("connector_eta", step.eta, "1"),
            ("connector_xi", step.xi, "1"),
            ("connector_step", step.ell, "m"),
            ("connector_step_residual_root", step.ell_residual_root, "m"),
            ("connector_step_deviation", step.deviation, "1"),
        ]
    if plan.loss_spacing is not None:
        spacing = plan.loss_spacing
        rows += [
            ("leak_flux_g_ut", plan.gas_loss.g_ut, "Pa*s/m"),
            ("mean_pressure", spacing.p_m, "kgf/m2"),
            ("valve_spacing_folded", spacing.folded, "m"),
            ("valve_spacing_general", spacing.general, "m"),
            ("valve_spacing_scan", spacing.bruteforce, "m"),
        ]
    if plan.demand_loop is not None:
        ell = plan.demand_loop.ell
        rows += [
            ("looping_length", ell, "m"),
            ("looping_capacity_ratio", recon.capacity_ratio(plan.length, ell), "1"),
            ("looping_consistency", recon.looping_consistency(plan.length, plan.demand_growth), "1"),
        ]
    if plan.loop is not None:
        diameter = plan.loop_diameter
        rows += [
            ("loop_capacity_ratio", recon.capacity_ratio(plan.length, plan.loop.ell), "1"),
            ("loop_beta", diameter.beta, "1"),
            ("loop_diameter", plan.loop.d_loop, "m"),
            ("loop_diameter_ratio", diameter.ratio, "1"),
        ]
    if plan.economic_looping_length is not None:
        rows.append(("economic_looping_length", plan.economic_looping_length, "m"))
    if plan.telescopic is not None:
        result = plan.telescopic
        rows += [
            ("reuse_length_formula", result.lp_formula, "km"),
            ("reuse_length_scan", result.lp_bruteforce, "km"),
            ("reuse_length_stationary", result.lp_stationary, "km"),
            ("reuse_formula_deviation", result.deviation, "1"),
        ]
    if plan.compressor is not None:
        rows.append(("compressor_units", plan.compressor.n, "1"))
    return rows


def register(subparsers: argparse._SubParsersAction, engine: FieldEngine) -> None:
    parser = subparsers.add_parser("optimize", help="Run the reconstruction optimizers")
    parser.add_argument("scenario", help="Scenario JSON file or stored scenario name")
    parser.add_argument("--out", type=Path, help="CSV path (default stdout)")

    def run(args: argparse.Namespace) -> int:
        scenario_file = ScenarioStore().load(args.scenario)
        plan = build_plan(scenario_file)
        emit(render_csv(["name", "value", "units"], plan_rows(plan)), args.out)
        write_sidecar(
            args.out,
            {
                "command": "optimize",
                "scenario": str(args.scenario),
                "plan": plan.model_dump(mode="json", exclude_none=True, exclude={"telescopic": {"curve"}}),
            },
        )
        return 0

    parser.set_defaults(handler=run)
