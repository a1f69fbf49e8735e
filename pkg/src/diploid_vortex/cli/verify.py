"""
Built-in verification suite run by ``diploid-vortex verify``.

Each check returns a ``CheckResult``; exceptions inside a check count as a
failure of that check only. ``quick`` shrinks lattices and replicate counts
and skips the large-b curve.
"""

import io
import math
from typing import Callable

import numpy as np
from pydantic import BaseModel, ConfigDict
from rich.console import Console
from rich.table import Table

from diploid_vortex.core.lattice import TruncatedLattice
from diploid_vortex.demography.stationary import crossing_index, stationary_law
from diploid_vortex.exceptions import DiploidVortexError
from diploid_vortex.logging import get_logger
from diploid_vortex.simulate.gillespie import mc_fixation
from diploid_vortex.simulate.meltdown import pooled_meltdown
from diploid_vortex.simulate.microscopic import simulate_microscopic
from diploid_vortex.solvers.exact import fd_gradient_table, neutral_fixation, solve_fixation
from diploid_vortex.solvers.perturbation import (
    fit_tail_asymptotics,
    fixation_first_order,
    recurrence_residuals,
    solve_tables,
    split_invariance,
    v_prime_value,
    v_value,
)
from diploid_vortex.substitution.rates import tau_exact, tau_linear, vortex_curve, write_curve_csv
from diploid_vortex.types.enums import Coupling, TablesSource, TauMethod
from diploid_vortex.types.models import DemographicParams, PopulationState

logger = get_logger(__name__)

SMALL_B = DemographicParams(b=0.02, d=1.0, c=1.0)
VORTEX_GRID = (0.5, 1.0, 1.5, 2.0, 2.5, 3.0)
SAMPLE_STATES = (
    (1, 1, 0),
    (2, 1, 0),
    (4, 1, 0),
    (1, 1, 1),
    (3, 2, 1),
    (0, 3, 1),
    (2, 2, 2),
    (5, 1, 0),
    (1, 4, 2),
    (3, 0, 3),
)


class CheckResult(BaseModel):
    name: str
    passed: bool
    detail: str

    model_config = ConfigDict(frozen=True)


def interior_states(top: int) -> list[PopulationState]:
    lattice = TruncatedLattice(top)
    return [lattice.state(i) for i in np.flatnonzero(lattice.interior)]


def max_oracle_gap(values: np.ndarray, reference: np.ndarray) -> float:
    """Largest |a - b| / max(1e-4, 1% |b|); at most 1 means within tolerance."""
    scale = np.maximum(1e-4, 0.01 * np.abs(reference))
    return float(np.max(np.abs(values - reference) / scale))


def check_neutral_exactness(quick: bool) -> CheckResult:
    n_max, top = (30, 15) if quick else (60, 30)
    worst = 0.0
    for b, d, c in ((2.0, 1.0, 0.5), (1.0, 1.0, 1.0), (0.5, 0.2, 2.0)):
        table = solve_fixation(DemographicParams(b=b, d=d, c=c), n_max)
        cut = table.lattice.offset(top + 1)
        exact = np.array([neutral_fixation(table.lattice.state(i)) for i in range(cut)])
        worst = max(worst, float(np.max(np.abs(table.u[:cut] - exact))))
    return CheckResult(
        name="neutral-exactness", passed=worst <= 1e-8, detail=f"max err {worst:.2e}"
    )


def check_mc_neutral(quick: bool) -> CheckResult:
    reps = 10_000 if quick else 100_000
    est = mc_fixation(PopulationState(k=3, m=2, n=1), DemographicParams(b=2, d=1, c=0.5), reps, 7)
    return CheckResult(
        name="mc-neutral",
        passed=est.contains(1.0 / 3.0),
        detail=f"{est.estimate:.4f} +/- {est.ci_halfwidth_99:.4f}",
    )


def check_oracle_equivalence(quick: bool) -> CheckResult:
    n_max = 40 if quick else 120
    tables = solve_tables(SMALL_B, n_max, allow_fallback=False)
    fd = fd_gradient_table(SMALL_B, n_max, h=1e-3)
    states = interior_states(15)
    v = np.array([v_value(s, tables) for s in states])
    vp = np.array([v_prime_value(s, tables) for s in states])
    ref_v = np.array([fd.value(s)[0] for s in states])
    ref_vp = np.array([fd.value(s)[1] for s in states])
    gap = max(max_oracle_gap(v, ref_v), max_oracle_gap(vp, ref_vp))
    return CheckResult(
        name="oracle-equivalence",
        passed=gap <= 1.0 and tables.source == TablesSource.RECURRENCE,
        detail=f"scaled gap {gap:.3f} ({tables.source.value})",
    )


def check_recurrence_residuals(quick: bool) -> CheckResult:
    n_max = 40 if quick else 120
    tables = solve_tables(SMALL_B, n_max, allow_fallback=False)
    worst = recurrence_residuals(SMALL_B, tables).worst
    s2_gap = abs(tables.s2 - (4.0 * tables.x[3] / 3.0 + 2.0 * tables.y[3])) / max(
        abs(tables.s2), 1e-300
    )
    h_gap, _ = split_invariance(SMALL_B, n_max)
    ok = worst <= 1e-10 and s2_gap <= 1e-10 and h_gap <= 1e-10
    return CheckResult(
        name="recurrence-residuals",
        passed=ok,
        detail=f"residual {worst:.1e}, s2 {s2_gap:.1e}, h3 split {h_gap:.1e}",
    )


def check_diagnostics(quick: bool) -> CheckResult:
    n_max = 40 if quick else 120
    tables = solve_tables(SMALL_B, n_max, allow_fallback=False)
    report = tables.diagnostics
    if report is None:
        return CheckResult(name="diagnostics", passed=False, detail="no diagnostics")
    beyond = report.levels >= 4
    norm_g = float(report.norm_g[beyond].max())
    norm_k = float(report.norm_k[beyond].max())
    fit = fit_tail_asymptotics(tables)
    ok = norm_g <= 9.0 and norm_k < SMALL_B.c / 2.0 and fit.relative_residual <= 0.01
    return CheckResult(
        name="diagnostics",
        passed=ok,
        detail=f"|G| {norm_g:.3f}, |K| {norm_k:.3f}, fit {fit.relative_residual:.1e}",
    )


def check_stationary(quick: bool) -> CheckResult:
    law = stationary_law(1.0, 0.0, 1.0)
    expected = 1.0 / (2.0 * (math.e - 2.0))
    balance = float(stationary_law(4.0, 1.0, 1.0).balance_residuals().max())
    closed = abs(law.prob(2) - expected)
    normalised = abs(law.probs.sum() + law.tail_mass - 1.0)
    ok = closed <= 1e-10 and balance <= 1e-12 and normalised <= 1e-12
    return CheckResult(
        name="stationary-law",
        passed=ok,
        detail=f"l(2) err {closed:.1e}, balance {balance:.1e}",
    )


def check_single_crossing(quick: bool) -> CheckResult:
    crossing = crossing_index(stationary_law(4.0, 1.0, 1.0), stationary_law(4.0, 2.0, 1.0))
    return CheckResult(
        name="single-crossing",
        passed=crossing.sign_changes == 1 and crossing.strictly_decreasing,
        detail=f"n0={crossing.n0}, sign changes {crossing.sign_changes}",
    )


def check_neutral_tau(quick: bool) -> CheckResult:
    params = DemographicParams(b=1.0, d=1.0, c=1.0)
    worst = 0.0
    for mu in (0.5, 1.0):
        worst = max(
            worst,
            abs(tau_exact(params, mu).tau - mu),
            abs(tau_linear(params, mu).tau - mu),
        )
    return CheckResult(name="neutral-tau", passed=worst <= 1e-8, detail=f"max err {worst:.1e}")


def check_vortex(quick: bool) -> CheckResult:
    flags = []
    for method in (TauMethod.EXACT, TauMethod.LINEAR):
        curve = vortex_curve(VORTEX_GRID, 0.02, 1.0, 0.01, 0.02, 0.5, method)
        flags.append(curve.strictly_decreasing)
    detail = f"small b: exact={flags[0]} linear={flags[1]}"
    if not quick:
        large = vortex_curve(VORTEX_GRID, 10.0, 0.1, 0.0, 0.1, 1.0, TauMethod.EXACT)
        flags.append(large.strictly_decreasing)
        detail += f", b=10 c=0.1: {flags[2]}"
    return CheckResult(name="vortex-curve", passed=all(flags), detail=detail)


def check_first_order_remainder(quick: bool) -> CheckResult:
    n_max = 30 if quick else 40
    tables = solve_tables(SMALL_B, n_max)
    samples = [PopulationState.of(*coords) for coords in SAMPLE_STATES]

    def gap(delta: float, delta_prime: float) -> float:
        params = SMALL_B.with_perturbation(delta, delta_prime)
        exact = solve_fixation(params, n_max)
        return max(
            abs(fixation_first_order(s, params, tables) - exact.value(s)) for s in samples
        )

    ratio = gap(0.02, 0.04) / max(gap(0.01, 0.02), 1e-300)
    return CheckResult(
        name="first-order-remainder", passed=ratio >= 3.0, detail=f"shrink factor {ratio:.2f}"
    )


def check_meltdown(quick: bool) -> CheckResult:
    replicates = 200 if quick else 1_000
    summary = pooled_meltdown(
        1.0, 0.02, 1.0, 0.01, 0.02, 0.5, 5, replicates, 11, coupling=Coupling.COMMON
    )
    worst_z = max(abs(z) for z in summary.z_scores())
    return CheckResult(
        name="meltdown",
        passed=summary.strictly_decreasing and worst_z <= 3.0,
        detail=f"decreasing={summary.strictly_decreasing}, max |z| {worst_z:.2f}",
    )


def check_determinism(quick: bool) -> CheckResult:
    state = PopulationState(k=2, m=1, n=1)
    params = DemographicParams(b=2.0, d=1.0, c=0.5, delta=0.0, delta_prime=0.1)
    reps = 500 if quick else 2_000
    serial = mc_fixation(state, params, reps, 3, workers=1)
    pooled = mc_fixation(state, params, reps, 3, workers=2)

    outputs = []
    for workers in (1, 2):
        buffer = io.StringIO()
        curve = vortex_curve((0.5, 1.0), 1.0, 1.0, 0.0, 0.1, 0.5, TauMethod.EXACT, workers)
        write_curve_csv(curve, buffer)
        outputs.append(buffer.getvalue())
    ok = serial == pooled and outputs[0] == outputs[1]
    return CheckResult(name="determinism", passed=ok, detail=f"{reps} replicates, 2 workers")


def check_microscopic(quick: bool) -> CheckResult:
    t_end, limit = (2_000.0, 0.1) if quick else (20_000.0, 0.05)
    run = simulate_microscopic(10, 2.0, 1.0, 0.5, 0.0, 0.0, 0.0, 1.0, 5, t_end)
    law = stationary_law(2.0, 1.0, 0.5)
    occupancy = run.occupancy_distribution()
    sizes = set(occupancy) | {int(n) for n in law.support}
    tv = 0.5 * sum(abs(occupancy.get(n, 0.0) - law.prob(n)) for n in sizes)
    ok = run.mutations == 0 and tv < limit
    return CheckResult(name="microscopic", passed=ok, detail=f"TV distance {tv:.4f}")


CHECKS: tuple[Callable[[bool], CheckResult], ...] = (
    check_neutral_exactness,
    check_mc_neutral,
    check_oracle_equivalence,
    check_recurrence_residuals,
    check_diagnostics,
    check_stationary,
    check_single_crossing,
    check_neutral_tau,
    check_vortex,
    check_first_order_remainder,
    check_meltdown,
    check_determinism,
    check_microscopic,
)


def run_verification(quick: bool = False) -> list[CheckResult]:
    results = []
    for check in CHECKS:
        name = check.__name__.removeprefix("check_").replace("_", "-")
        try:
            result = check(quick)
        except (DiploidVortexError, ArithmeticError, ValueError) as e:
            result = CheckResult(name=name, passed=False, detail=str(e))
        logger.info(
            "Verification check", extra={"check": result.name, "passed": result.passed}
        )
        results.append(result)
    return results


def render_summary(results: list[CheckResult], console: Console) -> None:
    table = Table(title="diploid-vortex verification")
    table.add_column("Check")
    table.add_column("Status")
    table.add_column("Detail")
    for result in results:
        status = "[green]PASS[/green]" if result.passed else "[red]FAIL[/red]"
        table.add_row(result.name, status, result.detail)
    console.print(table)
