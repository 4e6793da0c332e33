"""
Iterative operator splitting for u' = (A + B) u.

On every partition [t^n, t^n + tau] the iterates alternate between an
A-propagated ("odd") and a B-propagated ("even") form,

    c_i(t) = exp(P (t - t^n)) c^n + int_{t^n}^{t} exp(P (t - s)) Q c_{i-1}(s) ds,

with (P, Q) = (A, B) for odd i and (B, A) for even i, starting from
c_0 = 0. The integral is evaluated with a composite closed Newton-Cotes
rule on a uniform intra-step grid of spacing h.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import TYPE_CHECKING, Tuple

import numpy as np
from numpy.polynomial import polynomial as P

from .constants import GRID_TOLERANCE
from .errors import DimensionError, GridIncompatibleError, StudyConfigError
from .linalg import Matrix, Vector, as_vector, expm_table, require_square

if TYPE_CHECKING:
    from .problems import SplitProblem

logger = logging.getLogger(__name__)


# Closed Newton-Cotes weights in units of h, keyed by number of intervals.
_NEWTON_COTES = {
    1: np.array([1.0, 1.0]) / 2.0,
    2: np.array([1.0, 4.0, 1.0]) / 3.0,
    3: np.array([1.0, 3.0, 3.0, 1.0]) * 3.0 / 8.0,
    4: np.array([14.0, 64.0, 24.0, 64.0, 14.0]) / 45.0,
}


class QuadRule(str, Enum):
    """Quadrature rule for the variation-of-constants integral."""

    TRAPEZOID = "trapezoid"
    SIMPSON = "simpson"
    BODE = "bode"

    @property
    def panel(self) -> int:
        """Number of grid intervals covered by one panel of the rule."""
        return {"trapezoid": 1, "simpson": 2, "bode": 4}[self.value]

    @property
    def nominal_order(self) -> int:
        return {"trapezoid": 2, "simpson": 3, "bode": 4}[self.value]

    @property
    def weights(self) -> np.ndarray:
        """Weights normalised to a panel of unit length, e.g. (1/6, 4/6, 1/6)."""
        return _NEWTON_COTES[self.panel] / self.panel

    @property
    def label(self) -> str:
        return {"trapezoid": "Trapezoid", "simpson": "BDF3/Simpson", "bode": "Bode"}[self.value]


class SweepSide(str, Enum):
    """Which operator an iteration propagates exactly."""

    ODD = "odd"    # exp(A t), forced by B
    EVEN = "even"  # exp(B t), forced by A

    @classmethod
    def for_iteration(cls, i: int) -> "SweepSide":
        return cls.ODD if i % 2 == 1 else cls.EVEN


def intervals_per_step(tau: float, h: float, rule: QuadRule) -> int:
    """
    Number of grid intervals M = tau / h on one partition.

    Raises:
        GridIncompatibleError: If h does not divide tau, or the grid has
            fewer intervals than one panel of ``rule``.
    """
    if not (tau > 0 and h > 0) or not (math.isfinite(tau) and math.isfinite(h)):
        raise GridIncompatibleError(f"step {tau} and spacing {h} must be positive and finite")
    count = round(tau / h)
    if count < 1 or abs(count * h - tau) > GRID_TOLERANCE * tau:
        raise GridIncompatibleError(f"spacing h={h:g} does not divide the step tau={tau:g}")
    if count < rule.panel:
        raise GridIncompatibleError(
            f"{count} interval(s) per step is too coarse for the {rule.value} rule "
            f"(needs at least {rule.panel})"
        )
    return count


@dataclass(frozen=True)
class IterateGrid:
    """One iterate sampled on the uniform nodes t0, t0 + h, ..., t0 + tau."""

    t0: float
    tau: float
    h: float
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.values.ndim != 2 or self.values.shape[0] != self.intervals + 1:
            raise DimensionError(
                f"grid with {self.intervals} intervals needs {self.intervals + 1} rows, "
                f"got shape {self.values.shape}"
            )
        self.values.setflags(write=False)

    @property
    def intervals(self) -> int:
        return round(self.tau / self.h)

    @property
    def dimension(self) -> int:
        return self.values.shape[1]

    @property
    def nodes(self) -> np.ndarray:
        return self.t0 + self.h * np.arange(self.intervals + 1)

    @property
    def final(self) -> Vector:
        return self.values[-1]

    @classmethod
    def zeros(cls, t0: float, tau: float, h: float, dimension: int) -> "IterateGrid":
        """The c_0 = 0 starting iterate."""
        count = round(tau / h)
        return cls(t0=t0, tau=tau, h=h, values=np.zeros((count + 1, dimension)))


@lru_cache(maxsize=256)
def _cached_table(key: bytes, n: int, h: float, count: int) -> np.ndarray:
    logger.debug(f"Building propagator table: n={n}, h={h:g}, count={count}")
    return expm_table(np.frombuffer(key).reshape(n, n), h, count)


def propagator_table(p: Matrix, h: float, count: int) -> np.ndarray:
    """Cached exp(k*h*P), k = 0..count, shared by every sweep on the same grid."""
    p = np.ascontiguousarray(p, dtype=np.float64)
    n = require_square(p, "propagated operator")
    return _cached_table(p.tobytes(), n, float(h), int(count))


@lru_cache(maxsize=None)
def _lagrange_antiderivatives(width: int) -> np.ndarray:
    """Coefficients of int_0^x L_j, for the Lagrange basis on nodes 0..width (one column per j)."""
    nodes = np.arange(width + 1, dtype=np.float64)
    columns = []
    for j in range(width + 1):
        others = np.delete(nodes, j)
        basis = P.polyfromroots(others) / np.prod(nodes[j] - others)
        columns.append(P.polyint(basis))
    return np.stack(columns, axis=1)


def span_weights(width: int, lo: float, hi: float) -> np.ndarray:
    """
    Weights, in units of h, of the degree-``width`` interpolant on nodes
    0..width integrated over [lo, hi]. ``span_weights(w, 0, w)`` is the
    closed Newton-Cotes rule of the panel.
    """
    coefficients = _lagrange_antiderivatives(width)
    return P.polyval(hi, coefficients) - P.polyval(lo, coefficients)


def cumulative_integral(table: np.ndarray, forcing: np.ndarray, h: float, rule: QuadRule) -> np.ndarray:
    """
    I[m] = int_0^{s_m} exp(P (s_m - s)) g(s) ds at every node m.

    Whole panels are chained through I[k + w] = E_w I[k] + (panel sum),
    which is exactly the composite rule over nodes 0..k+w. A node inside a
    panel integrates the interpolant through all w + 1 nodes of its panel
    (the last w + 1 nodes of the grid when the panel runs past the end), so
    partial panels keep the order of the rule.

    Args:
        table (np.ndarray): exp(j*h*P) for j = 0..M, shape (M+1, n, n).
        forcing (np.ndarray): g(s_m) = Q c_{i-1}(s_m), shape (M+1, n).
        h (float): Node spacing.
        rule (QuadRule): Composite rule used for whole panels.
    """
    count = forcing.shape[0] - 1
    width = rule.panel
    integral = np.zeros_like(forcing)

    # exp(-k h P) for k = 1..width-1, needed where the panel extends past the target node
    backward = np.linalg.inv(table[1:width]) if width > 1 else table[:0]

    def kernel(k: int) -> np.ndarray:
        return table[k] if k >= 0 else backward[-k - 1]

    def span(windows: np.ndarray, lo: int, hi: int) -> np.ndarray:
        weights = _NEWTON_COTES[width] if (lo, hi) == (0, width) else span_weights(width, lo, hi)
        total = np.zeros((windows.size, forcing.shape[1]))
        for j, weight in enumerate(weights):
            total += weight * np.einsum("ij,kj->ki", kernel(hi - j), forcing[windows + j])
        return h * total

    anchors = np.arange(0, count - width + 1, width)
    panels = span(anchors, 0, width)
    for index, start in enumerate(anchors):
        integral[start + width] = table[width] @ integral[start] + panels[index]

    for remainder in range(1, width):
        starts = np.arange(0, count - remainder + 1, width)
        windows = np.minimum(starts, count - width)
        offsets = starts - windows
        for offset in np.unique(offsets):
            group = starts[offsets == offset]
            integral[group + remainder] = (
                np.einsum("ij,kj->ki", table[remainder], integral[group])
                + span(windows[offsets == offset], int(offset), int(offset) + remainder)
            )
    return integral


def sweep(
    a: Matrix,
    b: Matrix,
    prev: IterateGrid,
    c_n: Vector,
    side: SweepSide,
    rule: QuadRule,
) -> IterateGrid:
    """
    Compute the next iterate on the grid of ``prev``.

    Args:
        a (Matrix): Operator A.
        b (Matrix): Operator B.
        prev (IterateGrid): Previous iterate c_{i-1}.
        c_n (Vector): State at the start of the step.
        side (SweepSide): ODD propagates with A, EVEN with B.
        rule (QuadRule): Quadrature rule for the forcing integral.

    Returns:
        IterateGrid: c_i on the same nodes, with values[0] == c_n.

    Raises:
        GridIncompatibleError: If the grid is too coarse for ``rule``.
        DimensionError: If operators and states do not conform.
    """
    p, q = (a, b) if side is SweepSide.ODD else (b, a)
    n = require_square(p, "A" if side is SweepSide.ODD else "B")
    if q.shape != (n, n) or c_n.shape != (n,) or prev.dimension != n:
        raise DimensionError(
            f"operators {a.shape}/{b.shape}, state {c_n.shape} and grid dimension "
            f"{prev.dimension} do not conform"
        )
    count = intervals_per_step(prev.tau, prev.h, rule)

    table = propagator_table(p, prev.h, count)
    forcing = prev.values @ np.asarray(q).T
    values = np.einsum("kij,j->ki", table, c_n) + cumulative_integral(table, forcing, prev.h, rule)
    values[0] = c_n
    return IterateGrid(t0=prev.t0, tau=prev.tau, h=prev.h, values=values)


def _check_counts(partitions: int, iterations: int) -> None:
    if partitions < 1:
        raise StudyConfigError(f"partitions must be >= 1, got {partitions}")
    if iterations < 1:
        raise StudyConfigError(f"iterations must be >= 1, got {iterations}")


def split_step(a: Matrix, b: Matrix, c_n: Vector, t0: float, tau: float,
               iterations: int, rule: QuadRule, h: float) -> Vector:
    """Advance c_n over one partition with ``iterations`` alternating sweeps."""
    grid = IterateGrid.zeros(t0, tau, h, c_n.shape[0])
    for i in range(1, iterations + 1):
        grid = sweep(a, b, grid, c_n, SweepSide.for_iteration(i), rule)
    return grid.final


def iterative_split_trajectory(
    problem: "SplitProblem",
    partitions: int,
    iterations: int,
    rule: QuadRule,
    h: float,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Run the iterative splitting over [t0, T] and keep every partition boundary.

    Returns:
        Tuple[np.ndarray, np.ndarray]: Times of shape (partitions+1,) and
        states of shape (partitions+1, n).
    """
    _check_counts(partitions, iterations)
    tau = (problem.t_end - problem.t0) / partitions
    intervals_per_step(tau, h, rule)
    logger.debug(
        f"Solving {problem.name}: partitions={partitions}, iterations={iterations}, "
        f"rule={rule.value}, h={h:g}"
    )

    times = problem.t0 + tau * np.arange(partitions + 1)
    times[-1] = problem.t_end
    states = np.empty((partitions + 1, problem.u0.shape[0]))
    states[0] = problem.u0
    for step in range(partitions):
        a, b = problem.frozen_operators(times[step], times[step + 1])
        states[step + 1] = split_step(a, b, states[step], times[step], tau, iterations, rule, h)
    return times, states


def iterative_split_solve(
    problem: "SplitProblem",
    partitions: int,
    iterations: int,
    rule: QuadRule,
    h: float,
) -> Vector:
    """
    State at the final time of ``problem`` from the iterative splitting scheme.

    Args:
        problem (SplitProblem): Operators, initial state and interval.
        partitions (int): Number of equal splitting steps over [t0, T].
        iterations (int): Sweeps per step; the last iterate is kept.
        rule (QuadRule): Quadrature rule of every sweep.
        h (float): Intra-step node spacing, must divide (T - t0)/partitions.

    Returns:
        Vector: Approximation of u(T).

    Raises:
        GridIncompatibleError: If ``h`` does not fit the step or rule.
        MissingFreezePolicyError: For time-dependent operators without a policy.
    """
    _, states = iterative_split_trajectory(problem, partitions, iterations, rule, h)
    return as_vector(states[-1])
