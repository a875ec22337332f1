"""Tests for the steady capacity and reconstruction optimizers."""

import math

import pytest
from pydantic import ValidationError

from pipedyn import recon
from pipedyn.errors import DomainError, InfeasibleError, SingularityError
from pipedyn.models import GasProperties
from pipedyn.recon_models import CompressorParams, EconomicParams, LossInputs, ReconPlan, WearState
from pipedyn.scenario_store import SCENARIO_DIR, load_scenario
from pipedyn.tools.optimize import build_plan, plan_rows

GAS = GasProperties(c=383.3)
CONNECTOR_ECON = EconomicParams(
    e=1.2, k_av=1500.0, k_con=103.0, c_av=145.5, c_con=10.0, omega=0.04, t_repair=6.0
)


@pytest.fixture(scope="module")
def loss_inputs():
    return LossInputs(
        p_b=55e4,
        p_s=40e4,
        p_b_t1=53.81e4,
        p_s_t1=34.1e4,
        g0=30.0,
        length=1e5,
        ell2=7.5e3,
        t1=300.0,
        d=0.7,
    )


class TestCapacity:
    def test_three_line_corridor(self):
        q0 = recon.steady_capacity(2e6, 0.85e6, 0.5, 0.03, GAS, 4e4, 3)
        assert q0 == pytest.approx(166.99, rel=1e-3)
        assert recon.to_hourly_volume(q0, 0.5, 0.73) == pytest.approx(161028.0, rel=0.005)

    def test_needs_pressure_drop(self):
        with pytest.raises(DomainError):
            recon.steady_capacity(1e6, 1e6, 0.5, 0.03, GAS, 4e4)

    def test_more_lines_carry_more(self):
        one = recon.steady_capacity(2e6, 1e6, 0.5, 0.03, GAS, 4e4, 1)
        four = recon.steady_capacity(2e6, 1e6, 0.5, 0.03, GAS, 4e4, 4)
        assert four == pytest.approx(2 * one)

    def test_loop_transfer_ratio_bounds(self):
        assert recon.loop_transfer_ratio(1e5, 1e5) == pytest.approx(2 / math.sqrt(3))
        with pytest.raises(DomainError):
            recon.loop_transfer_ratio(1e5, 2e5)


class TestConnectorStep:
    def test_economics(self):
        econ = recon.connector_step_economics(CONNECTOR_ECON, 161028.0, 3, 4e4)
        assert econ.s_g == pytest.approx(618347.5, abs=1.0)
        assert econ.z == pytest.approx(2671.08, abs=0.01)
        assert econ.phi_econ == pytest.approx(231.5, abs=0.1)

    @pytest.mark.parametrize("phi,lo,hi", [(50.0, 0.385, 0.395), (100.0, 0.395, 0.402), (400.0, 0.401, 0.408)])
    def test_step_fraction(self, phi, lo, hi):
        step = recon.optimal_connector_step(4e4, phi)
        assert lo <= step.ell / 4e4 <= hi

    def test_residual_root_of_printed_balance(self):
        step = recon.optimal_connector_step(4e4, 232.55)
        assert step.ell_residual_root == pytest.approx(154.4, abs=0.5)
        assert recon.connector_step_residual(4e4, 232.55, step.ell_residual_root) == pytest.approx(0.0, abs=1e-6)

    def test_closed_form_coefficients(self):
        step = recon.optimal_connector_step(4e4, 232.55)
        assert step.mu == pytest.approx(0.555, abs=0.005)
        assert step.eta == pytest.approx(1.023, abs=0.005)
        assert step.xi == pytest.approx(0.355, abs=0.005)
        assert step.ell == pytest.approx(16112.0, abs=20.0)

    def test_infeasible_band(self):
        with pytest.raises(InfeasibleError):
            recon.optimal_connector_step(4e4, 1.0)

    def test_non_positive_phi(self):
        with pytest.raises(DomainError):
            recon.optimal_connector_step(4e4, 0.0)


class TestGasLoss:
    def test_leak_flux(self, loss_inputs):
        assert recon.emergency_gas_loss(loss_inputs).g_ut == pytest.approx(24.21, abs=0.01)

    def test_midpoint_is_singular(self, loss_inputs):
        with pytest.raises(SingularityError):
            recon.emergency_gas_loss(loss_inputs.model_copy(update={"ell2": 5e4}))

    def test_spacing(self, loss_inputs):
        spacing = recon.loss_based_spacing(loss_inputs, EconomicParams(s_pc=150000.0, c_gas=300.0))
        assert spacing.p_m == pytest.approx(47895.0, rel=1e-3)
        assert spacing.folded == pytest.approx(229.2, abs=0.5)
        assert spacing.general is None
        assert spacing.bruteforce is None

    def test_pre_closure_loss_exceeds_budget(self, loss_inputs):
        loss = recon.emergency_gas_loss(
            loss_inputs.model_copy(
                update={"p_b_t1": 5.381e4, "p_s_t1": 3.41e4, "g0": 3.0, "p_m": 47895.0}
            )
        )
        assert loss.q1 == pytest.approx(3756.6, rel=1e-3)
        assert loss.q1 > 150000.0 / 300.0

    def test_spacing_paths_agree_without_pre_closure_loss(self, loss_inputs):
        spacing = recon.loss_based_spacing(
            loss_inputs.model_copy(update={"t1": 1e-6}), EconomicParams(s_pc=150000.0, c_gas=300.0)
        )
        assert spacing.folded == pytest.approx(229.4, abs=0.1)
        assert spacing.general == pytest.approx(spacing.folded, rel=1e-3)
        assert spacing.bruteforce == pytest.approx(spacing.general, rel=1e-6)

    def test_spacing_needs_prices(self, loss_inputs):
        with pytest.raises(DomainError):
            recon.loss_based_spacing(loss_inputs, EconomicParams())


class TestLooping:
    def test_length_for_demand(self):
        assert recon.looping_length_for_demand(5e4, 1.2) == pytest.approx(20370.37, abs=0.01)

    def test_capacity_ratio(self):
        assert recon.capacity_ratio(1e5, 2e4) == pytest.approx(1.0954, abs=1e-4)

    def test_consistency_gap(self):
        assert recon.looping_consistency(5e4, 1.2) == pytest.approx(-0.0137, abs=5e-4)

    def test_demand_below_one(self):
        with pytest.raises(DomainError):
            recon.looping_length_for_demand(5e4, 0.9)

    @pytest.mark.parametrize(
        "phi,expected,clamped", [(1.0, 1e5, False), (2.0, 7.5e4, False), (0.5, 0.0, False)]
    )
    def test_economic_length(self, phi, expected, clamped):
        ell, was_clamped = recon.economic_looping_length(1e5, phi)
        assert ell == pytest.approx(expected)
        assert was_clamped is clamped

    @pytest.mark.parametrize("ell,beta,ratio", [(5e3, 21.43, 0.542), (2.5e4, 6.0, 0.699)])
    def test_loop_diameter(self, ell, beta, ratio):
        result = recon.optimal_loop_diameter(1.0, 1e5, ell)
        assert result.beta == pytest.approx(beta, abs=0.01)
        assert result.ratio == pytest.approx(ratio, abs=0.001)

    def test_unit_beta_keeps_diameter(self):
        assert recon.loop_diameter_from_beta(0.7, 1.0) == pytest.approx(0.7)

    def test_long_loop_is_infeasible(self):
        with pytest.raises(InfeasibleError):
            recon.optimal_loop_diameter(1.0, 1e5, 7.5e4)

    def test_gain_inverts_demand_length(self):
        ell = recon.looping_length_for_demand(5e4, 1.2)
        beta = recon.loop_coefficient_for_gain(5e4, ell, 0.8, 1.2)
        assert beta == pytest.approx(0.8)

    def test_economic_phi(self):
        assert recon.economic_phi(10.0, 0.5, 0.0, 2.0, 1.0) == pytest.approx(2.5)


class TestTelescopic:
    @pytest.fixture(scope="class")
    def result(self):
        return recon.telescopic_reuse(10.0, 80.0, 150.0, WearState.with_k(0.2))

    def test_curve(self, result):
        costs = dict(result.curve)
        assert costs[0.0] == pytest.approx(3000.0)
        assert costs[3.0] == pytest.approx(2190.0)
        assert costs[10.0] == pytest.approx(8000.0)

    def test_optima(self, result):
        assert result.lp_bruteforce == 3.0
        assert result.lp_stationary == pytest.approx(600 / 220)
        assert result.lp_formula == pytest.approx(4.2857, abs=1e-4)

    def test_wear_from_factors(self):
        wear = WearState.from_factors(0.2, 0.1, 1.5)
        assert wear.alpha_t == pytest.approx(0.8)
        assert wear.k_tech == pytest.approx(1.5 * 0.8 * 0.8 * 0.9)

    def test_inconsistent_remaining_life(self):
        with pytest.raises(ValidationError):
            WearState(f_phys=0.2, m_moral=0.0, alpha_t=0.5, alpha_lambda=1.0, k_tech=1.0)


class TestCompressor:
    def test_root(self):
        params = CompressorParams(s0=1.0, s1=2.0, s2=1.0, epsilon=1.4, q_bar=4.0, alpha_reserve=2.0)
        result = recon.compressor_units(params)
        assert result.n == pytest.approx(0.2995, abs=1e-3)
        assert recon.compressor_balance(params, result.n) == pytest.approx(0.0, abs=1e-6)

    def test_root_grows_with_reserve(self):
        roots = [
            recon.compressor_units(
                CompressorParams(s0=1.0, s1=2.0, s2=1.0, epsilon=1.4, q_bar=4.0, alpha_reserve=a)
            ).n
            for a in (1.0, 2.0, 3.0)
        ]
        assert roots == sorted(roots)
        assert len(set(roots)) == 3

    def test_zero_reserve_is_degenerate(self):
        params = CompressorParams(s0=1.0, s1=2.0, s2=1.0, epsilon=1.4, q_bar=4.0, alpha_reserve=0.0)
        assert recon.compressor_units(params).degenerate

    def test_epsilon_below_ratio(self):
        params = CompressorParams(s0=3.0, s1=2.0, s2=1.0, epsilon=1.4, q_bar=4.0, alpha_reserve=2.0)
        with pytest.raises(InfeasibleError):
            recon.compressor_units(params)


class TestReconPlan:
    @pytest.fixture(scope="class")
    def plan(self):
        return build_plan(load_scenario(SCENARIO_DIR / "reconstruction.json"))

    def test_connector_block(self, plan):
        assert plan.connector_economics.s_g == pytest.approx(618348.0, abs=1.0)
        expected = recon.optimal_connector_step(4e4, plan.connector_economics.phi_econ)
        assert plan.connector_step == expected

    def test_loop_blocks(self, plan):
        assert plan.demand_loop.ell == pytest.approx(4 * 4e4 * 0.44 / (3 * 1.44))
        assert plan.demand_loop.d_loop == 0.5
        assert plan.loop.ell == 5000.0
        assert plan.loop.d_loop == plan.loop_diameter.d_loop
        assert plan.economic_looping_length == pytest.approx(3e4)

    def test_telescopic_and_compressor(self, plan):
        assert plan.telescopic.lp_bruteforce == 3.0
        assert plan.compressor.n > 0
        assert not plan.empty

    def test_rows_follow_plan(self, plan):
        rows = {name: value for name, value, _ in plan_rows(plan)}
        assert rows["connector_step"] == plan.connector_step.ell
        assert rows["compressor_units"] == plan.compressor.n
        assert "valve_spacing_folded" not in rows

    def test_needs_optimize_section(self):
        with pytest.raises(DomainError):
            build_plan(load_scenario(SCENARIO_DIR / "mid_leak.json"))

    def test_empty_plan(self):
        assert ReconPlan(length=1e4).empty
