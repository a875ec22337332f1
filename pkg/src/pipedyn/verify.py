"""Built-in acceptance suite.

Every check reports PASS, FAIL or FLAGGED.  FLAGGED marks reference values
the formulas cannot reproduce; they are listed with the computed value so
the discrepancy stays visible, and cite the entry of tables.REGISTER that
explains it as "[register: key]".  Only FAIL makes the suite fail.
"""

from __future__ import annotations

import logging
import math
import random
from collections.abc import Callable, Iterable
from enum import Enum

from pydantic import BaseModel, ConfigDict

from pipedyn import crosscheck, dispatch, recon, series, tables
from pipedyn.errors import InfeasibleError, PipedynError
from pipedyn.models import (
    BoundaryVariant,
    CompressionGuard,
    GasProperties,
    LeakEvent,
    LineGeometry,
    Regime,
)
from pipedyn.oracle import root_scan
from pipedyn.recon_models import EconomicParams, LossInputs, WearState

logger = logging.getLogger(__name__)


class Status(str, Enum):
    passed = "PASS"
    failed = "FAIL"
    flagged = "FLAGGED"


class Check(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    status: Status
    detail: str = ""


def _within(value: float, expected: float, rel: float) -> bool:
    return abs(value - expected) <= rel * abs(expected)


def _status(ok: bool) -> Status:
    return Status.passed if ok else Status.failed


def _registered(name: str, ok: bool, key: str, detail: str) -> Check:
    """PASS when ok, otherwise FLAGGED citing the register entry that explains the gap."""
    if ok:
        return Check(name=name, status=Status.passed, detail=detail)
    return Check(name=name, status=Status.flagged, detail=f"{detail} [register: {key}]")


# --- table reproduction --------------------------------------------------------


def table_checks() -> list[Check]:
    checks = []
    for key in tables.list_tables():
        table = tables.build_table(key)
        excluded = table.excluded or [None] * len(table.rows)
        worst, misses, compared = 0.0, 0, 0
        skipped, skipped_worst, cited = 0, 0.0, set()
        for row, ref, reason in zip(table.rows, table.reference, excluded):
            if ref is None or row[-1] is None:
                continue
            dev = abs(row[-1] - ref) / max(abs(ref), 1.0)
            if reason is not None:
                skipped += 1
                skipped_worst = max(skipped_worst, dev)
                cited.add(reason)
                continue
            compared += 1
            worst = max(worst, dev)
            misses += dev > table.tolerance
        detail = f"max relative deviation {worst:.3e} over {compared} cells"
        keys = ", ".join(sorted(cited))
        if skipped:
            detail += f"; {skipped} cells excluded (worst {skipped_worst:.3e}) [register: {keys}]"
        if misses:
            status = Status.failed
        elif compared == 0 and skipped:
            status = Status.flagged
            detail = f"{skipped} cells excluded (worst {skipped_worst:.3e}) [register: {keys}]"
        else:
            status = Status.passed
        checks.append(Check(name=f"table {key}", status=status, detail=detail))
    return checks


# --- dispatch ------------------------------------------------------------------


def _ratio(ell2: float, t: float) -> float:
    s = tables.long_line(ell2)
    L = s.line.L
    return dispatch.pressure_drop_ratio(
        s.steady.p_start,
        series.pre_closure_field(s, 0.0, t),
        s.p_end,
        series.pre_closure_field(s, L, t),
    )


def localization_checks() -> list[Check]:
    checks = []
    L = 1e5
    for ell2, expected, rel in ((5e4, 50000.0, 1e-5), (5e3, 5512.41, 0.10), (95e3, 94800.88, 0.02)):
        est = dispatch.locate_leak(_ratio(ell2, 300.0), 300.0, L, tables.TWO_A, tables.C)
        checks.append(
            Check(
                name=f"locate leak at {ell2:.0f} m",
                status=_status(_within(est.ell2, expected, rel)),
                detail=f"estimate {est.ell2:.2f} m vs {expected} m",
            )
        )

    ts = [100.0 * k for k in range(1, 7)]
    phis = [dispatch.phi_factor(t, L, tables.TWO_A, tables.C) for t in ts]
    at_300 = abs(phis[2] - tables.PHI_REFERENCE[2]) <= 0.01
    checks.append(Check(name="phi at t1", status=_status(at_300), detail=f"phi(300)={phis[2]:.4f}"))
    others = all(abs(p - r) <= 0.01 for p, r in zip(phis, tables.PHI_REFERENCE))
    checks.append(
        _registered("phi column", others, "phi-column", "computed " + ", ".join(f"{p:.3f}" for p in phis))
    )

    errors = {}
    for t in (300.0, 400.0, 500.0, 600.0):
        est = dispatch.locate_leak(_ratio(5e3, t), t, L, tables.TWO_A, tables.C)
        errors[t] = abs(est.ell2 - 5e3) / 5e3
    best = min(errors, key=errors.get)
    checks.append(
        Check(
            name="fixation minimizes localization error",
            status=_status(best == 300.0),
            detail=", ".join(f"t={t:.0f}: {e:.3f}" for t, e in errors.items()),
        )
    )
    return checks


def _fixation(scenario, step: float, t_end: float, report_period: float | None = None) -> float:
    count = int(round(t_end / step))
    ts = [step * k for k in range(1, count + 1)]
    L = scenario.line.L
    samples = dispatch.drop_ratio_series(
        ts,
        [series.pre_closure_field(scenario, 0.0, t) for t in ts],
        [series.pre_closure_field(scenario, L, t) for t in ts],
        scenario.steady.p_start,
        scenario.p_end,
        wave_time=scenario.wave_time,
    )
    return dispatch.fixation_time(samples, report_period=report_period)


def fixation_checks() -> list[Check]:
    long_t = _fixation(tables.long_line(5e3), 100.0, 600.0)
    short_t = _fixation(tables.short_line(5e3), 60.0, 600.0)
    fine = (
        _fixation(tables.long_line(5e3), 20.0, 600.0, report_period=100.0),
        _fixation(tables.short_line(5e3), 20.0, 600.0, report_period=60.0),
    )
    return [
        Check(name="fixation 100 km line", status=_status(long_t == 300.0), detail=f"t1={long_t}"),
        Check(name="fixation 30 km line", status=_status(short_t == 120.0), detail=f"t1={short_t}"),
        Check(
            name="fixation at 20 s sampling",
            status=_status(fine == (300.0, 120.0)),
            detail=f"t1={fine[0]} / {fine[1]} (reported at the 100 s / 60 s cadence)",
        ),
    ]


def _ring_grid_vertex() -> float:
    """Vertex of the parabola through the three largest 50 s ring grid values."""
    (x0, y0), (x1, y1), (x2, y2) = [(x, tables.RING_GRID[x][0]) for x in (9000.0, 12000.0, 15000.0)]
    h = x1 - x0
    return x1 + h * (y0 - y2) / (2 * (y0 - 2 * y1 + y2))


def junction_checks() -> list[Check]:
    x = series.hydraulic_junction_location(3e4, 1.0, tables.TWO_A, tables.C, 50.0)
    s = tables.ring_main()
    grid = [25.0 * k for k in range(1201)]
    argmax = max(grid, key=lambda xi: series.ring_field(s, xi, 50.0))
    vertex = _ring_grid_vertex()
    dev = abs(argmax - x) / x
    table = tables.build_table("junction")
    err_gap = max(
        abs(row[2] - (ref - tables.JUNCTION_ANCHOR) / ref) for row, ref in zip(table.rows, table.reference)
    )
    return [
        Check(name="junction formula", status=_status(abs(x - 13372.0) <= 1.0), detail=f"x_h={x:.1f} m"),
        Check(
            name="junction relative error column",
            status=_status(err_gap <= 0.002),
            detail=f"max gap {err_gap:.2e}",
        ),
        Check(
            name="ring argmax vs tabulated vertex",
            status=_status(abs(argmax - vertex) <= 0.01 * vertex),
            detail=f"argmax {argmax:.0f} m, grid vertex {vertex:.0f} m",
        ),
        _registered(
            "junction vs ring argmax",
            dev <= 0.006,
            "junction-ring-argmax",
            f"argmax {argmax:.0f} m, deviation {dev:.3f}",
        ),
    ]


def valve_checks() -> list[Check]:
    ell1, ell3 = dispatch.locate_closed_valves(
        13.36e4 + 1.22e4, 13.36e4, 420.0, 300.0, 10.0, tables.TWO_A, tables.C, 1e4, resolution=1000.0
    )
    rel = abs(ell1 - 1e4) / 1e4
    guard = CompressionGuard(epsilon=1.35)
    t2 = dispatch.connector_opening_time(300.0, 1e4, 10.0, guard, 14e4, 13.36e4, tables.TWO_A, tables.C)

    state = tables.closure_state()
    target = guard.epsilon * 14e4
    try:
        crossing = root_scan(
            lambda t: series.post_closure_field(state, 1, 0.0, t) - target, state.t1, state.t1 + 3600.0
        )
        crossing_detail = f"section-1 crossing at dt={crossing - state.t1:.1f} s"
        crossing_ok = _within(crossing - state.t1, t2 - state.t1, 0.15)
    except PipedynError as e:
        crossing_detail, crossing_ok = f"no crossing: {e}", False

    sweep, sweep_ok = [], True
    for ell in range(5000, 30001, 5000):
        args = (55e4, 30.0, tables.TWO_A, float(ell), 0.0057, tables.C)
        try:
            closed = series.valve_closing_time(*args).t1
            scanned = series.valve_closing_time_scan(*args)
            sweep_ok &= _within(closed, scanned, 0.10)
            sweep.append(f"{ell}: {closed:.0f}/{scanned:.0f} s")
        except PipedynError as e:
            sweep_ok = False
            sweep.append(f"{ell}: {type(e).__name__}")
    return [
        Check(
            name="valve location",
            status=_status(abs(ell1 - 9e3) <= 100 and abs(ell3 - 1.9e4) <= 100),
            detail=f"ell1={ell1:.0f} m, ell3={ell3:.0f} m",
        ),
        Check(name="valve location error", status=_status(abs(rel - 0.1) <= 0.02), detail=f"{rel:.3f}"),
        Check(
            name="connector opening time",
            status=_status(abs((t2 - 300.0) - 255.0) <= 10.0),
            detail=f"t2-t1={t2 - 300.0:.1f} s",
        ),
        _registered("connector time vs section-1 series", crossing_ok, "connector-time", crossing_detail),
        _registered("valve time closed form vs field scan", sweep_ok, "valve-time-sweep", "; ".join(sweep)),
    ]


# --- oracle ------------------------------------------------------------------


def oracle_checks() -> list[Check]:
    runs: list[Callable[[], crosscheck.CrossCheck]] = [
        lambda: crosscheck.pre_closure_crosscheck(tables.long_line(5e4)),
        lambda: crosscheck.relief_crosscheck(tables.relief_line(1.2e4, sin_alpha=0.2)),
        lambda: crosscheck.relief_balance(tables.relief_line(5e3)),
        lambda: crosscheck.ring_crosscheck(tables.ring_main(LeakEvent(ell2=2e4, g_ut=5.0))),
    ]
    runs += [
        (lambda v=v: crosscheck.coupled_crosscheck(v, tables.parallel_line(2.5e4, 12.0)))
        for v in BoundaryVariant
    ]
    runs += [
        (lambda v=v: crosscheck.coupled_ceiling(v, tables.parallel_line(2.5e4, 12.0)))
        for v in (BoundaryVariant.fixed_end, BoundaryVariant.fixed_start)
    ]
    uniform = tables.closure_state(
        snapshot=[(0.0, 12e4), (3e4, 12e4)], grad_start=0.0, grad_end=0.0
    )
    runs += [(lambda k=k: crosscheck.post_closure_crosscheck(uniform, k)) for k in (1, 2, 3)]

    checks = []
    for run in runs:
        result = run()
        checks.append(
            Check(
                name=f"oracle {result.name}",
                status=_status(result.passed),
                detail=f"max relative deviation {result.deviation:.2e}",
            )
        )
    audit = crosscheck.pre_closure_conservation(tables.long_line(5e4))
    checks.append(
        Check(
            name="oracle conservation",
            status=_status(audit.relative_error <= 0.005),
            detail=f"relative error {audit.relative_error:.2e}",
        )
    )
    return checks


# --- reconstruction --------------------------------------------------------------

CONNECTOR_ECON = EconomicParams(
    e=1.2, k_av=1500.0, k_con=103.0, c_av=145.5, c_con=10.0, omega=0.04, t_repair=6.0
)


def recon_checks() -> list[Check]:
    q0 = recon.steady_capacity(2e6, 0.85e6, 0.5, 0.03, GasProperties(c=tables.C), 4e4, 3)
    q0_m3h = recon.to_hourly_volume(q0, 0.5, 0.73)
    econ = recon.connector_step_economics(CONNECTOR_ECON, 161028.0, 3, 4e4)
    step = recon.optimal_connector_step(4e4, 232.55)
    spacing = recon.loss_based_spacing(_loss_inputs(), EconomicParams(s_pc=150000.0, c_gas=300.0))
    loop = recon.looping_length_for_demand(5e4, 1.2)
    alpha = recon.capacity_ratio(1e5, 2e4)
    tele = recon.telescopic_reuse(10.0, 80.0, 150.0, WearState.with_k(0.2))
    return [
        Check(
            name="steady capacity",
            status=_status(_within(q0_m3h, 161028.0, 0.005)),
            detail=f"{q0_m3h:.0f} m3/h",
        ),
        Check(
            name="connector saving",
            status=_status(abs(econ.s_g - 618348.0) <= 1.0),
            detail=f"S_g={econ.s_g:.2f}",
        ),
        _registered("connector cost", abs(econ.z - 2659.0) <= 1.0, "connector-cost", f"Z={econ.z:.2f}"),
        _registered(
            "connector step",
            abs(step.ell - 15600.0) <= 200.0,
            "connector-step",
            f"ell={step.ell:.0f} m (mu={step.mu:.4f}, eta={step.eta:.4f}, xi={step.xi:.4f})",
        ),
        _registered(
            "connector step residual root",
            step.deviation is not None and step.deviation <= 0.02,
            "connector-step",
            f"root {step.ell_residual_root}",
        ),
        _registered(
            "loss-based spacing",
            abs(spacing.folded - 7344.0) <= 50.0,
            "loss-spacing",
            f"folded {spacing.folded:.1f} m, general {spacing.general}, scan {spacing.bruteforce}",
        ),
        Check(name="looping length", status=_status(round(loop) == 20370), detail=f"{loop:.2f} m"),
        Check(name="capacity ratio", status=_status(abs(alpha - 1.0954) <= 0.001), detail=f"{alpha:.4f}"),
        Check(
            name="telescopic scan",
            status=_status(tele.lp_bruteforce == 3.0 and abs(tele.curve[3][1] - 2190.0) < 1e-6),
            detail=f"argmin {tele.lp_bruteforce} km",
        ),
        _registered(
            "telescopic closed form",
            tele.deviation <= 0.1,
            "telescopic-closed-form",
            f"closed form {tele.lp_formula:.4f} km vs scan {tele.lp_bruteforce} km",
        ),
    ]


def _loss_inputs() -> LossInputs:
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


# --- properties ------------------------------------------------------------------


def property_checks(seed: int = 7) -> list[Check]:
    rng = random.Random(seed)
    checks = []

    ratios = [_ratio(5e4, t) for t in (300.0, 600.0, 900.0)]
    checks.append(
        Check(
            name="midpoint symmetry",
            status=_status(all(abs(r - 1) <= 1e-9 for r in ratios)),
            detail=", ".join(f"{r:.12f}" for r in ratios),
        )
    )

    ring = tables.ring_main()
    periodic = max(
        abs(series.ring_field(ring, 0.0, t) - series.ring_field(ring, 3e4, t))
        for t in (20.0, 100.0, 300.0)
    )
    moved = tables.ring_main(offtakes=((1e3, 5.0), (9e3, 2.0), (2.2e4, 3.0)))
    n = 400
    grid = [3e4 * k / n for k in range(n)]
    mean_a = math.fsum(series.ring_field(ring, x, 100.0) for x in grid) / n
    mean_b = math.fsum(series.ring_field(moved, x, 100.0) for x in grid) / n
    checks.append(
        Check(
            name="ring periodicity and redistribution",
            status=_status(periodic <= 1e-9 * 14e4 and abs(mean_a - mean_b) <= 1e-9 * 14e4),
            detail=f"periodic gap {periodic:.2e} Pa, mean gap {abs(mean_a - mean_b):.2e} Pa",
        )
    )

    flat = tables.short_line(1.2e4)
    tilted = flat.model_copy(update={"line": LineGeometry(L=3e4, sin_alpha=1e-12)})
    gap = max(
        abs(series.relief_field(flat, x, 120.0) - series.relief_field(tilted, x, 120.0))
        for x in (0.0, 1e4, 3e4)
    )
    checks.append(Check(name="relief flat limit", status=_status(gap <= 1e-9 * 14e4), detail=f"{gap:.2e} Pa"))

    sign_ok = True
    for _ in range(200):
        p = math.exp(rng.uniform(-5, 5))
        t = rng.uniform(50, 900)
        phi = dispatch.phi_factor(t, 1e5, tables.TWO_A, tables.C)
        if phi <= 0 or abs(p - 1) < 1e-9:
            continue
        theta = dispatch.locate_leak(p, t, 1e5, tables.TWO_A, tables.C).theta
        sign_ok &= (theta <= 0.5) if p > 1 else (theta >= 0.5)
    checks.append(Check(name="sign law", status=_status(sign_ok)))

    safe = all(_sequencer_safe(rng) for _ in range(100))
    checks.append(Check(name="sequencer safety", status=_status(safe)))

    tele = recon.telescopic_reuse(10.0, 80.0, 150.0, WearState.with_k(0.2))
    costs = [c for _, c in tele.curve]
    convex = all(costs[i - 1] - 2 * costs[i] + costs[i + 1] > 0 for i in range(1, len(costs) - 1))
    near = abs(tele.lp_bruteforce - tele.lp_stationary) <= 1.0
    checks.append(Check(name="telescopic convexity", status=_status(convex and near)))

    checks.append(Check(name="economic scale invariance", status=_status(_scale_invariant())))
    return checks


def _sequencer_safe(rng: random.Random) -> bool:
    guard = CompressionGuard()
    seq = dispatch.EmergencySequencer(p1=14e4, guard=guard)
    t = 0.0
    events = []
    for _ in range(rng.randint(3, 12)):
        t += rng.uniform(0, 120)
        kind = rng.choice(list(dispatch.EventKind))
        if kind == dispatch.EventKind.fixation:
            events.append(
                dispatch.SequencerEvent(
                    t=t,
                    kind=kind,
                    p=rng.uniform(0.1, 10),
                    regime=rng.choice([Regime.accident, Regime.technological]),
                    ell1=9e3,
                    ell2=1.45e4,
                    ell3=1.9e4,
                    p_ell1=12.19e4,
                )
            )
        elif kind == dispatch.EventKind.sample:
            events.append(
                dispatch.SequencerEvent(
                    t=t, kind=kind, p_start=rng.uniform(12e4, 20e4), p_ell1=rng.uniform(11e4, 14e4)
                )
            )
        else:
            events.append(dispatch.SequencerEvent(t=t, kind=kind))
    log = seq.run(events)
    closed = False
    for action, event in _pair(log, events):
        if action.action == "close":
            closed = True
        if action.action == "open_connectors":
            if not closed or event.p_start / 14e4 >= guard.epsilon:
                return False
        if action.action == "restore":
            closed = False
    return True


def _pair(log: Iterable[dispatch.Action], events: list[dispatch.SequencerEvent]):
    by_time = {e.t: e for e in events}
    for action in log:
        yield action, by_time[action.t]


def _scale_invariant(factor: float = 7.0) -> bool:
    base = CONNECTOR_ECON
    scaled = base.model_copy(
        update={k: getattr(base, k) * factor for k in ("e", "k_av", "k_con", "c_av", "c_con")}
    )
    a = recon.connector_step_economics(base, 161028.0, 3, 4e4).phi_econ
    b = recon.connector_step_economics(scaled, 161028.0, 3, 4e4).phi_econ
    spacing_a = recon.loss_based_spacing(_loss_inputs(), EconomicParams(s_pc=150000.0, c_gas=300.0)).folded
    spacing_b = recon.loss_based_spacing(
        _loss_inputs(), EconomicParams(s_pc=150000.0 * factor, c_gas=300.0 * factor)
    ).folded
    tele_a = recon.telescopic_reuse(10.0, 80.0, 150.0, WearState.with_k(0.2)).lp_bruteforce
    tele_b = recon.telescopic_reuse(10.0, 80.0 * factor, 150.0 * factor, WearState.with_k(0.2)).lp_bruteforce
    return (
        math.isclose(a, b, rel_tol=1e-12)
        and math.isclose(spacing_a, spacing_b, rel_tol=1e-12)
        and tele_a == tele_b
    )


# --- known irreproducibles ----------------------------------------------------


def irreproducible_checks() -> list[Check]:
    attempts = []
    for g in (9.81, 0.981, 98.1):
        try:
            timing = series.valve_closing_time(55e4, 30.0, tables.TWO_A, 3e4, 0.9e-3, tables.C, g)
            attempts.append(f"g={g}: t1={timing.t1:.1f} s")
        except InfeasibleError as e:
            attempts.append(f"g={g}: {e}")
    kappa_leak = dispatch.kappa_indicator(31.7e4, 14e4, 9.6e4)
    kappa_tech = dispatch.kappa_indicator(25.77e4, 14e4, 11.05e4)
    ell_half, _ = recon.economic_looping_length(1.0, 0.5)
    return [
        _registered(
            "valve timing table",
            False,
            "valve-timing-table",
            "tabulated t1=224 s not reproduced; " + "; ".join(attempts),
        ),
        _registered(
            "ring indicator threshold",
            False,
            "ring-indicator",
            f"leak {kappa_leak:.3f} ({dispatch.kappa_regime(kappa_leak).value}), "
            f"no leak {kappa_tech:.3f} ({dispatch.kappa_regime(kappa_tech).value})",
        ),
        _registered(
            "economic looping prose",
            False,
            "economic-looping",
            f"phi=0.5 gives {ell_half:.3f}L by formula, worked value 0.938L",
        ),
    ]


SUITES: dict[str, Callable[[], list[Check]]] = {
    "tables": table_checks,
    "localization": localization_checks,
    "fixation": fixation_checks,
    "junction": junction_checks,
    "valves": valve_checks,
    "oracle": oracle_checks,
    "recon": recon_checks,
    "properties": property_checks,
    "irreproducible": irreproducible_checks,
}


def run_suites(names: Iterable[str] | None = None) -> list[Check]:
    checks = []
    for name in names or SUITES:
        logger.info("Running %s checks", name)
        try:
            checks.extend(SUITES[name]())
        except PipedynError as e:
            logger.error("suite %s aborted: %s", name, e)
            checks.append(Check(name=f"{name} suite", status=Status.failed, detail=str(e)))
    return checks


def format_matrix(checks: Iterable[Check]) -> str:
    lines = [f"{'status':8} {'check':42} detail"]
    for c in checks:
        lines.append(f"{c.status.value:8} {c.name:42} {c.detail}")
    return "\n".join(lines) + "\n"
