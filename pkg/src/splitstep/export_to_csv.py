import csv
import io
import logging
from pathlib import Path
from typing import List, Optional, Sequence

import typer

from .harness import CellResult, ConvergenceReport

logger = logging.getLogger(__name__)

MISSING = "NA"


def _error_columns(dimension: int) -> List[str]:
    return [f"err{j + 1}" for j in range(dimension)]


def _format_error(value: float) -> str:
    # 17 significant digits: parse_csv recovers the exact float
    return f"{value:.16e}"


def emit_csv(report: ConvergenceReport) -> str:
    """
    Render a convergence report as CSV.

    Args:
        report (ConvergenceReport): The study result.

    Returns:
        str: Header ``iterations,partitions,err1,err2,...`` followed by one row
        per cell; failed cells have ``NA`` in every error column.
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["iterations", "partitions", *_error_columns(report.dimension)])
    for row in report.rows:
        if row.failed:
            errors = [MISSING] * report.dimension
        else:
            errors = [_format_error(e) for e in row.errors]
        writer.writerow([row.iterations, row.partitions, *errors])
    return buffer.getvalue()


def parse_csv(text: str, t_span: float = 1.0) -> List[CellResult]:
    """
    Read rows written by ``emit_csv``. Lines starting with ``#`` are skipped.

    Args:
        text (str): CSV text.
        t_span (float): Length of the integration interval, used to recover tau.

    Returns:
        List[CellResult]: One result per data row.
    """
    lines = [line for line in text.splitlines() if line and not line.startswith("#")]
    rows: List[CellResult] = []
    for record in csv.DictReader(lines):
        iterations = int(record["iterations"])
        partitions = int(record["partitions"])
        columns = [key for key in record if key.startswith("err")]
        values = [record[key] for key in columns]
        errors = None if MISSING in values else tuple(float(v) for v in values)
        rows.append(CellResult(
            iterations=iterations,
            partitions=partitions,
            tau=t_span / partitions,
            errors=errors,
            failure=None if errors is not None else "failed",
        ))
    return rows


def format_orders(report: ConvergenceReport) -> List[str]:
    """``# order i=<iterations>: <slope>`` comment lines, ``NA`` where no fit was possible."""
    lines = []
    for iterations, order in sorted(report.orders.items()):
        shown = MISSING if order is None else f"{order:.4f}"
        lines.append(f"# order i={iterations}: {shown}")
    return lines


def emit_table_text(report: ConvergenceReport, title: str) -> str:
    """Aligned text table of a report, headed by ``title``."""
    columns = _error_columns(report.dimension)
    fstr = "{:>10} {:>10}" + " {:>14}" * len(columns)
    lines = [title, fstr.format("iterations", "partitions", *columns)]
    for row in report.rows:
        errors = [MISSING] * report.dimension if row.failed else [f"{e:.4e}" for e in row.errors]
        lines.append(fstr.format(row.iterations, row.partitions, *errors))
    lines.extend(format_orders(report))
    return "\n".join(lines) + "\n"


def emit_order_plot_data(reports: Sequence[ConvergenceReport]) -> str:
    """
    Plot-ready convergence data.

    One tab-separated block per (report, iteration count), headed by a
    comment naming the rule, with ``tau`` increasing inside the block and a
    blank line between blocks.
    """
    lines = ["# iterative splitting convergence: tau vs max error per iteration count"]
    for report in reports:
        for iterations in sorted({row.iterations for row in report.rows}):
            lines.append("")
            lines.append(f"# rule={report.rule.label} iterations={iterations}")
            lines.append("tau\terr")
            block = sorted(
                (row for row in report.rows if row.iterations == iterations and not row.failed),
                key=lambda row: row.tau,
            )
            for row in block:
                lines.append(f"{row.tau:.6e}\t{_format_error(row.max_error)}")
    return "\n".join(lines) + "\n"


def write_output(text: str, out: Optional[Path]) -> None:
    """
    Write command output to ``out`` or, when it is None, to stdout.

    Raises:
        typer.Exit: With code 2 if the file cannot be written.
    """
    if out is None:
        typer.echo(text, nl=False)
        return

    try:
        out = Path(out)
        if out.parent and not out.parent.exists():
            out.parent.mkdir(parents=True, exist_ok=True)

        logger.debug(f"Writing {len(text)} characters to {out}")
        with open(out, mode="w", newline="\n", encoding="utf-8") as handle:
            handle.write(text)
        logger.info(f"Wrote output to {out}")

    except PermissionError as e:
        logger.error(f"Permission denied writing to {out}: {e}")
        typer.echo(f"Permission denied: Cannot write to {out}", err=True)
        raise typer.Exit(2)
    except OSError as e:
        logger.error(f"OS error writing to {out}: {e}")
        typer.echo(f"Error writing file {out}: {e}", err=True)
        raise typer.Exit(2)
