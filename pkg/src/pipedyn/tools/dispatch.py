"""dispatch: regime, leak position and the operator action log."""

from __future__ import annotations

import argparse
import logging
from pathlib import Path

from pipedyn.dispatch import (
    EmergencySequencer,
    classify_regime,
    decide,
    format_action_log,
    isolation_events,
    kappa_series,
)
from pipedyn.engine import FieldEngine
from pipedyn.errors import SingularityError
from pipedyn.models import Regime
from pipedyn.output import emit, render_csv, write_sidecar
from pipedyn.scenario_store import ScenarioStore

logger = logging.getLogger(__name__)


def _sample_regime(p: float | None, t: float, L: float, two_a: float, c: float) -> Regime:
    if p is None:
        return Regime.pending
    try:
        return classify_regime(p, t, L, two_a, c)
    except SingularityError:
        logger.debug("degenerate regime band at t=%s", t)
        return Regime.pending


def register(subparsers: argparse._SubParsersAction, engine: FieldEngine) -> None:
    parser = subparsers.add_parser("dispatch", help="Run the dispatcher decision chain")
    parser.add_argument("scenario", help="Scenario JSON file or stored scenario name")
    parser.add_argument("--out", type=Path, help="Ratio CSV path (default stdout)")
    parser.add_argument("--actions", type=Path, help="Write the operator action log here")
    parser.add_argument(
        "--sample-step",
        type=float,
        default=60.0,
        help="Sampling step of the isolated line for the action log (s)",
    )

    def run(args: argparse.Namespace) -> int:
        scenario_file = ScenarioStore().load(args.scenario)
        scenario = scenario_file.to_scenario()
        ts = scenario_file.dispatch_times()
        decision = decide(scenario, ts, scenario_file.guard())
        if scenario.offtakes is not None:
            decision = decision.model_copy(update={"kappa_series": kappa_series(scenario, ts)})

        L, two_a, c = scenario.line.L, scenario.two_a, scenario.gas.c
        rows = [
            (s.t, s.p, _sample_regime(s.p, s.t, L, two_a, c).value) for s in decision.p_series
        ]
        emit(render_csv(["t_s", "p_ratio", "regime"], rows), args.out)

        if decision.t1 is not None:
            logger.info("t1=%.0f s, regime %s", decision.t1, decision.regime.value)
        if decision.ell2_estimate is not None:
            logger.info(
                "leak estimate %.1f m (theta=%.4f%s)",
                decision.ell2_estimate,
                decision.theta,
                ", clamped" if decision.clamped else "",
            )

        sequencer = EmergencySequencer(p1=scenario.steady.p_start, guard=scenario_file.guard())
        actions = sequencer.run(
            isolation_events(scenario, decision, step=args.sample_step)
        )
        if args.actions is not None:
            emit(format_action_log(actions), args.actions)

        write_sidecar(
            args.out,
            {
                "command": "dispatch",
                "scenario": str(args.scenario),
                "decision": decision.model_dump(mode="json"),
                "final_state": sequencer.state.value,
            },
        )
        return 0

    parser.set_defaults(handler=run)
