"""
Convergence studies: run the iterative splitting over a grid of
(iterations, partitions) cells, compare the final state against a
reference solution and fit empirical orders.
"""

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from functools import partial
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import linregress

from .constants import (
    BODE_FLOOR,
    DEFAULT_ITERATIONS,
    DEFAULT_MAX_THREADS,
    DEFAULT_PARTITIONS,
    DEFAULT_STEP,
    FINE_EXTRA_ITERATIONS,
    FINE_PARTITION_FACTOR,
    SIMPSON_FLOOR,
    THREADS_ENV_VAR,
    TRAPEZOID_FLOOR,
)
from .errors import InsufficientDataError, SplitstepError, StudyConfigError
from .linalg import Vector, as_vector, expm, max_abs_err
from .problems import SplitProblem
from .splitting import QuadRule, intervals_per_step, iterative_split_solve

logger = logging.getLogger(__name__)


DEFAULT_FLOORS: Dict[QuadRule, float] = {
    QuadRule.TRAPEZOID: TRAPEZOID_FLOOR,
    QuadRule.SIMPSON: SIMPSON_FLOOR,
    QuadRule.BODE: BODE_FLOOR,
}


class ReferenceKind(str, Enum):
    """Where the reference solution of a study comes from."""

    EXACT = "exact"  # closed-form solution attached to the problem
    EXPM = "expm"    # exp((A + B)(T - t0)) u0, constant problems only
    FINE = "fine"    # refined split solve with the Bode rule


def _as_counts(values: Iterable[int], name: str) -> Tuple[int, ...]:
    counts = tuple(int(v) for v in values)
    if not counts:
        raise StudyConfigError(f"{name} list must not be empty")
    if any(c < 1 for c in counts):
        raise StudyConfigError(f"{name} must be positive, got {counts}")
    if len(set(counts)) != len(counts):
        raise StudyConfigError(f"{name} must not contain duplicates, got {counts}")
    return tuple(sorted(counts))


def resolve_reference(problem: SplitProblem, requested: Optional[ReferenceKind]) -> ReferenceKind:
    """Pick the reference: the requested one if usable, else exact > expm > fine."""
    if requested is None:
        if problem.exact is not None:
            return ReferenceKind.EXACT
        return ReferenceKind.EXPM if problem.is_constant else ReferenceKind.FINE
    if requested is ReferenceKind.EXACT and problem.exact is None:
        raise StudyConfigError(f"problem {problem.name!r} has no closed-form solution")
    if requested is ReferenceKind.EXPM and not problem.is_constant:
        raise StudyConfigError(f"problem {problem.name!r} is time-dependent; expm reference unavailable")
    return requested


@dataclass(frozen=True)
class StudyConfig:
    """
    One convergence study.

    Validated on construction: lists are non-empty, positive and
    duplicate-free, and ``h`` divides every step (T - t0)/partitions.
    """

    problem: SplitProblem
    rule: QuadRule = QuadRule.TRAPEZOID
    iterations: Tuple[int, ...] = DEFAULT_ITERATIONS
    partitions: Tuple[int, ...] = DEFAULT_PARTITIONS
    h: float = DEFAULT_STEP
    reference: Optional[ReferenceKind] = None
    floor: Optional[float] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "iterations", _as_counts(self.iterations, "iterations"))
        object.__setattr__(self, "partitions", _as_counts(self.partitions, "partitions"))
        object.__setattr__(self, "reference", resolve_reference(self.problem, self.reference))
        if self.floor is None:
            object.__setattr__(self, "floor", DEFAULT_FLOORS[self.rule])
        elif not self.floor >= 0:
            raise StudyConfigError(f"floor must be non-negative, got {self.floor}")
        span = self.problem.t_end - self.problem.t0
        for count in self.partitions:
            intervals_per_step(span / count, self.h, self.rule)


@dataclass(frozen=True)
class CellResult:
    """Error of one (iterations, partitions) cell, or why it failed."""

    iterations: int
    partitions: int
    tau: float
    errors: Optional[Tuple[float, ...]] = None
    failure: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.errors is None

    @property
    def max_error(self) -> float:
        return max(self.errors) if self.errors else math.nan


@dataclass(frozen=True)
class ConvergenceReport:
    """Rows sorted by (iterations, partitions) plus one fitted order per iteration count."""

    rule: QuadRule
    floor: float
    reference: ReferenceKind
    dimension: int
    rows: Tuple[CellResult, ...] = ()
    orders: Dict[int, Optional[float]] = field(default_factory=dict)


def estimate_order(errs: Sequence[Tuple[float, float]], floor: float) -> float:
    """
    Empirical convergence order: least-squares slope of log(err) against log(tau).

    Args:
        errs: Pairs (tau, err).
        floor (float): Points with err <= floor are ignored.

    Returns:
        float: The fitted slope.

    Raises:
        InsufficientDataError: If fewer than two distinct step sizes remain.

    Example:
        >>> round(estimate_order([(1.0, 1e-2), (0.1, 1e-4)], floor=0.0), 6)
        2.0
    """
    usable = [(tau, err) for tau, err in errs if err > floor and tau > 0 and math.isfinite(err)]
    if len({tau for tau, _ in usable}) < 2:
        raise InsufficientDataError(
            f"need at least two points above the floor {floor:g}, got {len(usable)}"
        )
    taus, values = zip(*usable)
    return float(linregress(np.log(taus), np.log(values)).slope)


def reference_state(
    problem: SplitProblem,
    kind: ReferenceKind,
    partitions: int,
    iterations: int,
    h: float,
) -> Vector:
    """
    Reference u(T) for one cell.

    The fine solve uses 16x the partitions, the Bode rule, two extra
    iterations and the largest spacing <= h that gives a multiple of four
    intervals per step.
    """
    if kind is ReferenceKind.EXACT:
        return problem.exact(problem.t_end)
    if kind is ReferenceKind.EXPM:
        generator = problem.generator(problem.t0)
        return as_vector(expm(generator, problem.t_end - problem.t0) @ problem.u0)

    fine_partitions = partitions * FINE_PARTITION_FACTOR
    fine_tau = (problem.t_end - problem.t0) / fine_partitions
    intervals = 4 * max(1, math.ceil(fine_tau / (4 * h) - 1e-9))
    return iterative_split_solve(
        problem,
        partitions=fine_partitions,
        iterations=iterations + FINE_EXTRA_ITERATIONS,
        rule=QuadRule.BODE,
        h=fine_tau / intervals,
    )


def resolve_threads(threads: Optional[int] = None) -> int:
    """Worker count: explicit value, else SPLITSTEP_THREADS, else min(4, cpu count)."""
    if threads is not None:
        return max(1, int(threads))
    raw = os.environ.get(THREADS_ENV_VAR)
    if raw:
        try:
            value = int(raw)
            if value >= 1:
                return value
        except ValueError:
            pass
        logger.warning(f"Ignoring invalid {THREADS_ENV_VAR}={raw!r}")
    return min(DEFAULT_MAX_THREADS, os.cpu_count() or 1)


def _evaluate_cell(cfg: StudyConfig, shared_reference: Optional[Vector], cell: Tuple[int, int]) -> CellResult:
    iterations, partitions = cell
    tau = (cfg.problem.t_end - cfg.problem.t0) / partitions
    try:
        approx = iterative_split_solve(cfg.problem, partitions, iterations, cfg.rule, cfg.h)
        reference = shared_reference
        if reference is None:
            reference = reference_state(cfg.problem, cfg.reference, partitions, iterations, cfg.h)
        errors = tuple(max_abs_err(reference, approx))
    except SplitstepError as e:
        logger.warning(f"Cell (iterations={iterations}, partitions={partitions}) failed: {e}")
        return CellResult(iterations, partitions, tau, failure=str(e))

    logger.debug(f"Cell (iterations={iterations}, partitions={partitions}): max error {max(errors):.4e}")
    return CellResult(iterations, partitions, tau, errors=errors)


def run_study(cfg: StudyConfig, threads: Optional[int] = None) -> ConvergenceReport:
    """
    Evaluate every (iterations, partitions) cell of ``cfg``.

    Cells are independent and may run on a thread pool; rows are collected
    in (iterations, partitions) order so the report does not depend on
    scheduling. Failed cells are recorded, not raised.

    Args:
        cfg (StudyConfig): Study definition.
        threads (Optional[int]): Worker count override.

    Returns:
        ConvergenceReport: Per-cell errors and per-iteration order estimates.
    """
    cells = [(i, p) for i in cfg.iterations for p in cfg.partitions]
    workers = resolve_threads(threads)
    logger.info(
        f"Running study on {cfg.problem.name}: rule={cfg.rule.value}, {len(cells)} cells, "
        f"reference={cfg.reference.value}, threads={workers}"
    )

    shared_reference = None
    if cfg.reference is not ReferenceKind.FINE:
        shared_reference = reference_state(cfg.problem, cfg.reference, 1, 1, cfg.h)

    evaluate = partial(_evaluate_cell, cfg, shared_reference)
    if workers == 1:
        rows = [evaluate(cell) for cell in cells]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(evaluate, cells))

    orders: Dict[int, Optional[float]] = {}
    for i in cfg.iterations:
        points = [(row.tau, row.max_error) for row in rows if row.iterations == i and not row.failed]
        try:
            orders[i] = estimate_order(points, cfg.floor)
        except InsufficientDataError as e:
            logger.debug(f"No order for iterations={i}: {e}")
            orders[i] = None

    failed = sum(row.failed for row in rows)
    if failed:
        logger.warning(f"{failed} of {len(rows)} cells failed")
    logger.info("Study completed")
    return ConvergenceReport(
        rule=cfg.rule,
        floor=cfg.floor,
        reference=cfg.reference,
        dimension=cfg.problem.dimension,
        rows=tuple(rows),
        orders=orders,
    )
