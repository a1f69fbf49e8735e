"""
``diploid-vortex`` command line.

Every data command writes CSV to ``--output`` (stdout by default) preceded by
a ``#`` provenance line echoing its flags. Logs go to stderr. Failures print
one line ``error code=<CODE> exit=<n> reason=<message>`` on stderr and exit
1 (rejected input), 2 (numerical or simulation failure) or 3 (verification).
"""

import sys
from typing import Any, Optional, Sequence

import typer
from pydantic import ValidationError
from rich.console import Console

from diploid_vortex import __version__
from diploid_vortex.cli.verify import render_summary, run_verification
from diploid_vortex.config.settings import get_settings
from diploid_vortex.core.model import transitions
from diploid_vortex.demography.stationary import stationary_law, write_law_csv
from diploid_vortex.exceptions import DiploidVortexError, VerificationFailedError
from diploid_vortex.logging import RunContext, get_event_logger, get_logger, setup_logging
from diploid_vortex.simulate.gillespie import mc_fixation, trajectory, write_trajectory_csv
from diploid_vortex.simulate.meltdown import (
    pooled_meltdown,
    simulate_meltdown,
    write_meltdown_csv,
)
from diploid_vortex.simulate.microscopic import simulate_microscopic
from diploid_vortex.simulate.rng import RngStream
from diploid_vortex.solvers.exact import solve_fixation
from diploid_vortex.solvers.perturbation import (
    fixation_first_order,
    solve_tables,
    tables_from_oracle,
    write_diagnostics_csv,
    write_tables_csv,
)
from diploid_vortex.substitution.rates import substitution_rate, vortex_curve, write_curve_csv
from diploid_vortex.types.enums import Coupling, FixationMethod, LogFormat, LogLevel, TauMethod
from diploid_vortex.types.models import DemographicParams, PopulationState
from diploid_vortex.utils.csvio import open_output, provenance_line, write_rows
from diploid_vortex.utils.grid import parse_grid

logger = get_logger(__name__)

PROG_NAME = "diploid-vortex"

app = typer.Typer(
    name=PROG_NAME,
    help="Fixation probabilities, substitution rates and vortex curves of a diploid "
    "birth-death population.",
    add_completion=False,
    no_args_is_help=True,
)

# Shared option declarations
B = typer.Option(..., "--b", help="Per-capita fecundity b")
D = typer.Option(..., "--d", help="Natural death rate d of AA")
C = typer.Option(..., "--c", help="Pairwise competition rate c")
DELTA = typer.Option(0.0, "--delta", help="Heterozygote death increment")
DELTA_PRIME = typer.Option(0.0, "--delta-prime", help="aa death increment")
K = typer.Option(..., "--k", help="AA individuals")
M = typer.Option(..., "--m", help="Aa individuals")
N = typer.Option(..., "--n", help="aa individuals")
MU = typer.Option(..., "--mu", help="Mutation intensity mu")
OUTPUT = typer.Option(None, "--output", "-o", help="CSV destination (default stdout)")
WORKERS = typer.Option(None, "--workers", help="Worker processes (default from settings)")


def _seed(seed: Optional[int]) -> int:
    return get_settings().simulation.seed if seed is None else seed


def _provenance(command: str, **flags: Any) -> list[str]:
    return [provenance_line(command=command, **flags)]


@app.callback()
def configure(
    log_level: Optional[LogLevel] = typer.Option(None, "--log-level", help="Log level"),
    log_format: Optional[LogFormat] = typer.Option(None, "--log-format", help="text or json"),
) -> None:
    """Configure logging before any command runs."""
    config = get_settings().logging
    setup_logging(
        level=(log_level or config.level).value,
        format_type=(log_format or config.format).value,
        output=config.output,
        file_path=config.file_path,
        max_file_size=config.max_file_size,
        backup_count=config.backup_count,
    )


@app.command()
def rates(
    k: int = K,
    m: int = M,
    n: int = N,
    b: float = B,
    d: float = D,
    c: float = C,
    delta: float = DELTA,
    delta_prime: float = DELTA_PRIME,
    output: Optional[str] = OUTPUT,
) -> None:
    """Transition rates out of one state, in the fixed event order."""
    state = PopulationState(k=k, m=m, n=n)
    params = DemographicParams(b=b, d=d, c=c, delta=delta, delta_prime=delta_prime)
    out = transitions(state, params)
    rows = (
        (
            t.event,
            t.rate,
            "" if t.target is None else t.target.k,
            "" if t.target is None else t.target.m,
            "" if t.target is None else t.target.n,
        )
        for t in out.entries
    )
    comments = _provenance("rates", **state.model_dump(), **params.model_dump())
    with open_output(output) as stream:
        write_rows(stream, ("event", "rate", "k", "m", "n"), rows, comments)


@app.command()
def fixation(
    k: int = K,
    m: int = M,
    n: int = N,
    b: float = B,
    d: float = D,
    c: float = C,
    delta: float = DELTA,
    delta_prime: float = DELTA_PRIME,
    method: FixationMethod = typer.Option(FixationMethod.EXACT, "--method"),
    nmax: int = typer.Option(80, "--nmax", help="Lattice truncation N_max"),
    refine: bool = typer.Option(False, "--refine", help="Check convergence at 2 N_max"),
    clamp: bool = typer.Option(False, "--clamp", help="Clamp first-order value to [0, 1]"),
    reps: int = typer.Option(100_000, "--reps", help="Monte Carlo replicates"),
    seed: Optional[int] = typer.Option(None, "--seed"),
    workers: Optional[int] = WORKERS,
    output: Optional[str] = OUTPUT,
) -> None:
    """Fixation probability of allele a from one state."""
    state = PopulationState(k=k, m=m, n=n)
    params = DemographicParams(b=b, d=d, c=c, delta=delta, delta_prime=delta_prime)
    flags: dict[str, Any] = {**state.model_dump(), **params.model_dump(), "method": method}

    if method == FixationMethod.MC:
        seed = _seed(seed)
        est = mc_fixation(state, params, reps, seed, workers=workers)
        header: tuple[str, ...] = ("k", "m", "n", "u", "ci_halfwidth_99", "reps", "censored")
        row: tuple[Any, ...] = (k, m, n, est.estimate, est.ci_halfwidth_99, reps, est.censored)
        flags.update(reps=reps, seed=seed)
    elif method == FixationMethod.FIRST_ORDER:
        tables = solve_tables(params, nmax)
        header = ("k", "m", "n", "u")
        row = (k, m, n, fixation_first_order(state, params, tables, clamp=clamp))
        flags.update(nmax=nmax, clamp=clamp)
    else:
        table = solve_fixation(params, nmax, refine=refine)
        header = ("k", "m", "n", "u")
        row = (k, m, n, table.value(state))
        flags.update(nmax=nmax, refine=refine)

    with open_output(output) as stream:
        write_rows(stream, header, [row], _provenance("fixation", **flags))


@app.command()
def derivatives(
    b: float = B,
    d: float = D,
    c: float = C,
    nmax: int = typer.Option(40, "--nmax", help="Last table level N_max"),
    tol: Optional[float] = typer.Option(None, "--tol", help="Tail and residual tolerance"),
    oracle: bool = typer.Option(False, "--oracle", help="Extract tables from the lattice"),
    no_fallback: bool = typer.Option(False, "--no-fallback", help="Fail instead of falling back"),
    diagnostics: Optional[str] = typer.Option(None, "--diagnostics", help="Diagnostics CSV"),
    output: Optional[str] = OUTPUT,
) -> None:
    """Tables x_N, y_N, x'_N, y'_N of the first-order expansion."""
    params = DemographicParams(b=b, d=d, c=c)
    if oracle:
        tables = tables_from_oracle(params, nmax)
    else:
        tables = solve_tables(params, nmax, tol=tol, allow_fallback=not no_fallback)
    comments = _provenance("derivatives", b=b, d=d, c=c, nmax=nmax, oracle=oracle)
    with open_output(output) as stream:
        write_tables_csv(tables, stream, comments)
    if diagnostics is not None and tables.diagnostics is not None:
        with open_output(diagnostics) as stream:
            write_diagnostics_csv(tables.diagnostics, stream, comments)
    elif diagnostics is not None:
        logger.warning("No diagnostics for these tables", extra={"source": tables.source.value})


@app.command()
def stationary(
    b: float = B,
    d: float = D,
    c: float = C,
    tol: Optional[float] = typer.Option(None, "--tol", help="Neglected tail mass"),
    output: Optional[str] = OUTPUT,
) -> None:
    """Stationary law of the monomorphic population size."""
    law = stationary_law(b, d, c, tol)
    with open_output(output) as stream:
        write_law_csv(law, stream, _provenance("stationary", b=b, d=d, c=c))


@app.command()
def tau(
    b: float = B,
    d: float = D,
    c: float = C,
    delta: float = DELTA,
    delta_prime: float = DELTA_PRIME,
    mu: float = MU,
    method: TauMethod = typer.Option(TauMethod.EXACT, "--method"),
    output: Optional[str] = OUTPUT,
) -> None:
    """Substitution rate tau and mean waiting time T = 1/tau."""
    params = DemographicParams(b=b, d=d, c=c, delta=delta, delta_prime=delta_prime)
    rate = substitution_rate(params, mu, method)
    comments = _provenance(
        "tau", b=b, d=d, c=c, delta=delta, delta_prime=delta_prime, mu=mu, method=method
    )
    with open_output(output) as stream:
        write_rows(stream, ("tau", "T"), [(rate.tau, rate.T)], comments)


@app.command("vortex-curve")
def vortex_curve_command(
    b: float = B,
    c: float = C,
    delta: float = DELTA,
    delta_prime: float = DELTA_PRIME,
    mu: float = MU,
    d_grid: str = typer.Option(..., "--d-grid", help="start:stop:step or a comma list"),
    method: TauMethod = typer.Option(TauMethod.EXACT, "--method"),
    workers: Optional[int] = WORKERS,
    output: Optional[str] = OUTPUT,
) -> None:
    """Mean fixation time T(d) over a grid of death rates."""
    grid = parse_grid(d_grid)
    count = get_settings().simulation.workers if workers is None else workers
    curve = vortex_curve(grid, b, c, delta, delta_prime, mu, method, count)
    with open_output(output) as stream:
        write_curve_csv(curve, stream)


@app.command()
def simulate(
    k: int = K,
    m: int = M,
    n: int = N,
    b: float = B,
    d: float = D,
    c: float = C,
    delta: float = DELTA,
    delta_prime: float = DELTA_PRIME,
    seed: Optional[int] = typer.Option(None, "--seed"),
    stream_id: int = typer.Option(0, "--stream", help="Replicate stream index"),
    event_cap: Optional[int] = typer.Option(None, "--event-cap"),
    output: Optional[str] = OUTPUT,
) -> None:
    """One trajectory of the three-type process until absorption."""
    state = PopulationState(k=k, m=m, n=n)
    params = DemographicParams(b=b, d=d, c=c, delta=delta, delta_prime=delta_prime)
    seed = _seed(seed)
    outcome, log = trajectory(state, params, RngStream(seed, stream_id), event_cap)
    comments = _provenance(
        "simulate", **state.model_dump(), **params.model_dump(), seed=seed, stream=stream_id
    )
    with open_output(output) as stream:
        write_trajectory_csv(log, stream, comments)


@app.command()
def meltdown(
    d0: float = typer.Option(..., "--d0", help="Initial death rate d_0"),
    b: float = B,
    c: float = C,
    delta: float = DELTA,
    delta_prime: float = typer.Option(..., "--delta-prime", help="aa death increment"),
    mu: float = MU,
    fixations: int = typer.Option(5, "--fixations", help="Number of successive fixations"),
    replicates: int = typer.Option(1, "--replicates", help="Pooled trajectories"),
    seed: Optional[int] = typer.Option(None, "--seed"),
    method: TauMethod = typer.Option(TauMethod.EXACT, "--method"),
    coupling: Coupling = typer.Option(Coupling.INDEPENDENT, "--coupling"),
    workers: Optional[int] = WORKERS,
    output: Optional[str] = OUTPUT,
) -> None:
    """Waiting times between successive fixations of deleterious mutations."""
    seed = _seed(seed)
    comments = _provenance(
        "meltdown",
        d0=d0,
        b=b,
        c=c,
        delta=delta,
        delta_prime=delta_prime,
        mu=mu,
        fixations=fixations,
        replicates=replicates,
        seed=seed,
        method=method,
        coupling=coupling,
    )
    if replicates > 1:
        summary = pooled_meltdown(
            d0,
            b,
            c,
            delta,
            delta_prime,
            mu,
            fixations,
            replicates,
            seed,
            method=method,
            coupling=coupling,
            workers=workers,
        )
        rows = (
            (j, summary.d[j], summary.mean[j], summary.std_error[j], summary.expected[j])
            for j in range(len(summary.d))
        )
        with open_output(output) as stream:
            write_rows(
                stream, ("fixation_index", "d", "mean", "std_error", "expected"), rows, comments
            )
        return

    run = simulate_meltdown(
        d0, b, c, delta, delta_prime, mu, fixations, seed, method=method, coupling=coupling
    )
    with open_output(output) as stream:
        write_meltdown_csv(run, stream, comments)


@app.command()
def micro(
    size: int = typer.Option(..., "--size", help="Initial population size"),
    b: float = B,
    d0: float = typer.Option(..., "--d0", help="Baseline death rate"),
    c: float = C,
    delta: float = DELTA,
    delta_prime: float = DELTA_PRIME,
    mu: float = MU,
    k_scale: float = typer.Option(1.0, "--K", help="Mutation time scale K"),
    t_end: float = typer.Option(..., "--t-end", help="Simulated time"),
    seed: Optional[int] = typer.Option(None, "--seed"),
    stop_at_first_mutation: bool = typer.Option(False, "--stop-at-first-mutation"),
    occupancy: Optional[str] = typer.Option(
        None, "--occupancy", help="CSV of the monomorphic-phase size histogram"
    ),
    output: Optional[str] = OUTPUT,
) -> None:
    """Individual-based simulation with per-strand mutations."""
    seed = _seed(seed)
    run = simulate_microscopic(
        size, b, d0, c, delta, delta_prime, mu, k_scale, seed, t_end, stop_at_first_mutation
    )
    comments = _provenance(
        "micro",
        size=size,
        b=b,
        d0=d0,
        c=c,
        delta=delta,
        delta_prime=delta_prime,
        mu=mu,
        K=k_scale,
        t_end=t_end,
        seed=seed,
    )
    rows = ((e.time, e.kind, e.mutation_id, e.size) for e in run.events)
    with open_output(output) as stream:
        write_rows(stream, ("time", "kind", "mutation_id", "size"), rows, comments)
    if occupancy is not None:
        with open_output(occupancy) as stream:
            write_rows(stream, ("N", "fraction"), run.occupancy_distribution().items(), comments)


@app.command()
def verify(
    quick: bool = typer.Option(False, "--quick", help="Reduced sizes; skip the large-b curve"),
) -> None:
    """Run the built-in verification suite; exit 3 if any check fails."""
    results = run_verification(quick)
    render_summary(results, Console(stderr=True))
    failed = [r.name for r in results if not r.passed]
    get_event_logger(quick=quick).info(
        "verification_finished", checks=len(results), failed=len(failed)
    )
    if failed:
        raise VerificationFailedError(failed)


@app.command()
def version() -> None:
    """Print the package version."""
    typer.echo(__version__)


def report_error(code: str, exit_code: int, reason: str) -> None:
    reason = " ".join(reason.split())
    sys.stderr.write(f"error code={code} exit={exit_code} reason={reason}\n")


def describe_error(err: Any) -> str:
    """One pydantic error as ``field: message``, or just the message for model-level errors."""
    location = ".".join(str(part) for part in err["loc"])
    return f"{location}: {err['msg']}" if location else err["msg"]


def is_click_error(error: BaseException, name: str) -> bool:
    """
    Match a click exception by class name anywhere in its MRO.

    Recent typer releases raise exceptions from their own vendored copy of
    click, which ``isinstance`` against ``click`` does not recognise.
    """
    return any(cls.__name__ == name for cls in type(error).__mro__)


def run_command(argv: Sequence[str]) -> int:
    """Dispatch ``argv`` and map failures to exit codes."""
    command = typer.main.get_command(app)
    args = list(argv)
    commands = getattr(command, "commands", {})
    name = next((a for a in args if a in commands), None)
    try:
        with RunContext(command=name):
            result = command.main(args=args, prog_name=PROG_NAME, standalone_mode=False)
    except DiploidVortexError as e:
        report_error(e.code, e.exit_code, e.message)
        return e.exit_code
    except ValidationError as e:
        report_error("INVALID_PARAMETERS", 1, "; ".join(map(describe_error, e.errors())))
        return 1
    except Exception as e:
        if is_click_error(e, "ClickException"):
            report_error("USAGE", 1, e.format_message())  # type: ignore[attr-defined]
            return 1
        if is_click_error(e, "Abort"):
            report_error("ABORTED", 1, "aborted")
            return 1
        raise
    return result if isinstance(result, int) else 0


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
