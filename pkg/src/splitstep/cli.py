"""
Command-line interface for splitstep, built with Typer.
"""

import logging
from enum import Enum
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
import typer
from typing_extensions import Annotated

from .checks import CheckKind, run_checks
from .constants import (
    DEFAULT_ANGULAR,
    DEFAULT_ENERGY,
    DEFAULT_ITERATIONS,
    DEFAULT_LAMBDA1,
    DEFAULT_LAMBDA2,
    DEFAULT_OSCILLATOR_ITERATIONS,
    DEFAULT_OSCILLATOR_PARTITIONS,
    DEFAULT_PARTITIONS,
    DEFAULT_R0,
    DEFAULT_R_END,
    DEFAULT_STEP,
    DEFAULT_T_END,
)
from .errors import SplitstepError
from .export_to_csv import emit_csv, emit_table_text, format_orders, write_output
from .harness import ReferenceKind, StudyConfig, reference_state, run_study
from .logger_setup import setup_logging
from .problems import OscillatorSpec, SplitProblem, dahlquist_2x2, hamiltonian, radial_oscillator
from .splitting import QuadRule, iterative_split_trajectory

logger = logging.getLogger(__name__)

app = typer.Typer(help="Iterative operator splitting: convergence tables, oscillator runs and property checks.")


class OutputFormat(str, Enum):
    CSV = "csv"
    TABLE = "table"


class ProblemKind(str, Enum):
    RELAXATION = "relaxation"
    OSCILLATOR = "oscillator"


def _join(counts: Tuple[int, ...]) -> str:
    return ",".join(str(c) for c in counts)


def parse_counts(raw: str, name: str) -> Tuple[int, ...]:
    """
    Parse a comma-separated list of positive integers such as ``2,3,4``.

    Raises:
        typer.Exit: With code 2 on malformed input.
    """
    try:
        counts = tuple(int(part) for part in raw.split(",") if part.strip())
    except ValueError:
        logger.error(f"Invalid --{name} list: {raw!r}")
        typer.echo(f"Error: --{name} expects comma-separated integers, got {raw!r}", err=True)
        raise typer.Exit(2)
    if not counts:
        typer.echo(f"Error: --{name} must not be empty", err=True)
        raise typer.Exit(2)
    return counts


def _fail(e: SplitstepError) -> None:
    logger.error(f"{type(e).__name__}: {e}")
    typer.echo(f"Error: {e}", err=True)
    raise typer.Exit(2)


def render_study(problem: SplitProblem, rule: QuadRule, iterations: Tuple[int, ...],
                 partitions: Tuple[int, ...], h: float, reference: Optional[ReferenceKind],
                 fmt: OutputFormat) -> str:
    """Run one study and render it; shared by ``table`` and ``converge``."""
    cfg = StudyConfig(
        problem=problem,
        rule=rule,
        iterations=iterations,
        partitions=partitions,
        h=h,
        reference=reference,
    )
    report = run_study(cfg)
    if fmt is OutputFormat.TABLE:
        return emit_table_text(report, f"{rule.label}: {problem.name}, reference={report.reference.value}")
    lines = [f"# rule: {rule.label}", emit_csv(report).rstrip("\n"), *format_orders(report)]
    return "\n".join(lines) + "\n"


@app.callback()
def main_callback(
    debug: Annotated[bool, typer.Option("--debug", "-d", help="Enable debug logging")] = False,
) -> None:
    """
    Iterative operator splitting for u' = (A + B) u.

    Logs go to stderr and ./logs/splitstep.log.
    """
    setup_logging(debug)
    if debug:
        logger.debug("Debug mode enabled")


@app.command()
def table(
    rule: Annotated[QuadRule, typer.Option(help="Quadrature rule of every sweep")] = QuadRule.TRAPEZOID,
    fmt: Annotated[OutputFormat, typer.Option("--format", help="csv or aligned text")] = OutputFormat.CSV,
    out: Annotated[Optional[Path], typer.Option("--out", "-o", help="Write to this file instead of stdout")] = None,
) -> None:
    """
    Error table of the 2x2 relaxation problem on [0, 1]: iterations 2..6 by
    partitions 1, 10, 100, spacing h = 1e-3.
    """
    logger.info(f"Building default table for rule={rule.value}")
    try:
        text = render_study(
            dahlquist_2x2(DEFAULT_LAMBDA1, DEFAULT_LAMBDA2),
            rule, DEFAULT_ITERATIONS, DEFAULT_PARTITIONS, DEFAULT_STEP, None, fmt,
        )
    except SplitstepError as e:
        _fail(e)
    write_output(text, out)


@app.command()
def converge(
    problem: Annotated[ProblemKind, typer.Option(help="Test problem")] = ProblemKind.RELAXATION,
    rule: Annotated[QuadRule, typer.Option(help="Quadrature rule of every sweep")] = QuadRule.TRAPEZOID,
    iterations: Annotated[str, typer.Option(help="Comma-separated iteration counts")] = _join(DEFAULT_ITERATIONS),
    partitions: Annotated[str, typer.Option(help="Comma-separated partition counts")] = _join(DEFAULT_PARTITIONS),
    h: Annotated[float, typer.Option("--h", help="Intra-step node spacing")] = DEFAULT_STEP,
    lambda1: Annotated[float, typer.Option(help="Relaxation rate of the first component")] = DEFAULT_LAMBDA1,
    lambda2: Annotated[float, typer.Option(help="Relaxation rate of the second component")] = DEFAULT_LAMBDA2,
    t_end: Annotated[float, typer.Option(help="Final time of the relaxation problem")] = DEFAULT_T_END,
    energy: Annotated[float, typer.Option(help="Oscillator energy E")] = DEFAULT_ENERGY,
    l: Annotated[int, typer.Option("--l", help="Angular momentum number")] = DEFAULT_ANGULAR,
    r0: Annotated[float, typer.Option(help="Start of the radial interval")] = DEFAULT_R0,
    r_end: Annotated[float, typer.Option(help="End of the radial interval")] = DEFAULT_R_END,
    reference: Annotated[Optional[ReferenceKind], typer.Option(help="Reference solution")] = None,
    fmt: Annotated[OutputFormat, typer.Option("--format", help="csv or aligned text")] = OutputFormat.CSV,
    out: Annotated[Optional[Path], typer.Option("--out", "-o", help="Write to this file instead of stdout")] = None,
) -> None:
    """Convergence study over arbitrary iteration and partition lists."""
    iteration_counts = parse_counts(iterations, "iterations")
    partition_counts = parse_counts(partitions, "partitions")
    try:
        if problem is ProblemKind.RELAXATION:
            split_problem = dahlquist_2x2(lambda1, lambda2, t_end)
        else:
            split_problem = radial_oscillator(OscillatorSpec(energy=energy, l=l, r0=r0, r_end=r_end))
        text = render_study(split_problem, rule, iteration_counts, partition_counts, h, reference, fmt)
    except SplitstepError as e:
        _fail(e)
    write_output(text, out)


@app.command()
def schroedinger(
    energy: Annotated[float, typer.Option(help="Energy E")] = DEFAULT_ENERGY,
    l: Annotated[int, typer.Option("--l", help="Angular momentum number")] = DEFAULT_ANGULAR,
    r0: Annotated[float, typer.Option(help="Start of the radial interval")] = DEFAULT_R0,
    r_end: Annotated[float, typer.Option(help="End of the radial interval")] = DEFAULT_R_END,
    iterations: Annotated[int, typer.Option(help="Sweeps per step")] = DEFAULT_OSCILLATOR_ITERATIONS,
    partitions: Annotated[int, typer.Option(help="Number of splitting steps")] = DEFAULT_OSCILLATOR_PARTITIONS,
    rule: Annotated[QuadRule, typer.Option(help="Quadrature rule of every sweep")] = QuadRule.BODE,
    h: Annotated[float, typer.Option("--h", help="Intra-step node spacing")] = DEFAULT_STEP,
    out: Annotated[Optional[Path], typer.Option("--out", "-o", help="Write to this file instead of stdout")] = None,
) -> None:
    """
    Radial Schroedinger equation as an oscillator in r: prints t, q, p and
    the Hamiltonian at every partition boundary.
    """
    try:
        spec = OscillatorSpec(energy=energy, l=l, r0=r0, r_end=r_end)
        problem = radial_oscillator(spec)
        times, states = iterative_split_trajectory(problem, partitions, iterations, rule, h)
        if problem.exact is not None:
            exact = np.array([problem.exact(t) for t in times])
            summary = f"# max_abs_error vs rotation: {np.max(np.abs(states - exact)):.16e}"
        else:
            fine = reference_state(problem, ReferenceKind.FINE, partitions, iterations, h)
            summary = f"# self_convergence_error vs fine solve: {np.max(np.abs(states[-1] - fine)):.16e}"
    except SplitstepError as e:
        _fail(e)

    lines: List[str] = ["t,q,p,H"]
    for t, state in zip(times, states):
        lines.append(f"{t:.16e},{state[0]:.16e},{state[1]:.16e},{hamiltonian(spec, t, state):.16e}")
    lines.append(summary)
    logger.info(f"Oscillator run finished: {summary.lstrip('# ')}")
    write_output("\n".join(lines) + "\n", out)


@app.command()
def check(
    which: Annotated[CheckKind, typer.Argument(help="Suite to run")] = CheckKind.ALL,
) -> None:
    """Fixed-seed property checks; exit code 1 if any check fails."""
    try:
        results = run_checks(which)
    except SplitstepError as e:
        _fail(e)

    for result in results:
        typer.echo(result.describe())
    failed = [r.name for r in results if not r.passed]
    if failed:
        logger.error(f"Failed checks: {', '.join(failed)}")
        raise typer.Exit(1)
    logger.info(f"All {len(results)} checks passed")


def main():
    """
    Main entry point for the splitstep CLI.
    """
    app()


if __name__ == "__main__":
    main()
