"""
Property suites behind ``splitstep check``.

Each suite draws its matrices from a fixed seed, so repeated runs print
identical residuals.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Tuple

import numpy as np

from .constants import (
    CHECK_SAMPLES,
    CHECK_SEED,
    DEFAULT_LAMBDA1,
    DEFAULT_LAMBDA2,
    LAPLACE_TOLERANCE,
    PHI_TOLERANCE,
    SEMIGROUP_TOLERANCE,
)
from .errors import SingularMatrixError
from .exponential import (
    block_generator,
    block_iterates,
    block_semigroup_propagator,
    laplace_c2,
    laplace_c3,
    phi_functions,
)
from .linalg import Matrix, Vector, as_matrix, as_vector, expm
from .problems import dahlquist_2x2
from .splitting import IterateGrid, QuadRule, SweepSide, sweep

logger = logging.getLogger(__name__)

PHI_ORDERS = range(0, 5)
PHI_STEPS = (0.1, 1.0)
SEMIGROUP_TIMES = (0.1, 0.5, 1.0)
LAPLACE_TIME = 1.0
LAPLACE_STEP = 1e-3
BLOCK_ITERATES = 4
BLOCK_SAMPLES = 5


class CheckKind(str, Enum):
    PHI = "phi"
    SEMIGROUP = "semigroup"
    LAPLACE = "laplace"
    ALL = "all"


@dataclass(frozen=True)
class CheckResult:
    name: str
    residual: float
    tolerance: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return math.isfinite(self.residual) and self.residual <= self.tolerance

    def describe(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        line = f"{self.name:<28} residual={self.residual:.3e} tolerance={self.tolerance:.0e} {status}"
        return f"{line} {self.detail}".rstrip()


def random_matrix(rng: np.random.Generator, n: int, max_norm: float) -> Matrix:
    """Gaussian n x n matrix rescaled to a spectral norm in [0.3, 1] * max_norm."""
    m = rng.standard_normal((n, n))
    return as_matrix(m * (rng.uniform(0.3, 1.0) * max_norm / np.linalg.norm(m, 2)))


def separated_pair(rng: np.random.Generator, n: int = 2, max_cond: float = 1e3) -> Tuple[Matrix, Matrix]:
    """Random pair with ||A||, ||B|| <= 1 and B - A well conditioned."""
    while True:
        a = random_matrix(rng, n, 1.0)
        b = random_matrix(rng, n, 1.0)
        if np.linalg.cond(b - a) < max_cond:
            return a, b


def check_phi() -> List[CheckResult]:
    """phi_k = I/k! + tau M phi_{k+1} for k = 0..4."""
    rng = np.random.default_rng(CHECK_SEED)
    worst = 0.0
    for sample in range(CHECK_SAMPLES):
        m = random_matrix(rng, 2 + sample % 3, 2.0)
        n = m.shape[0]
        for tau in PHI_STEPS:
            phis = phi_functions(m, tau, max(PHI_ORDERS) + 1)
            for k in PHI_ORDERS:
                expected = np.eye(n) / math.factorial(k) + tau * m @ phis[k + 1]
                worst = max(worst, float(np.linalg.norm(phis[k] - expected, 2)))
    logger.debug(f"phi recurrence residual {worst:.3e}")
    return [CheckResult("phi recurrence", worst, PHI_TOLERANCE, f"k=0..4, {CHECK_SAMPLES} matrices")]


def check_semigroup() -> List[CheckResult]:
    """Block propagator vs exp(t C), the A = B coupling, and N-block iterates vs sweeps."""
    rng = np.random.default_rng(CHECK_SEED)
    worst = 0.0
    worst_equal = 0.0
    for _ in range(CHECK_SAMPLES):
        a = random_matrix(rng, 2, 1.0)
        b = random_matrix(rng, 2, 1.0)
        generator = block_generator(a, b)
        for t in SEMIGROUP_TIMES:
            propagator = block_semigroup_propagator(a, b, t)
            worst = max(worst, float(np.linalg.norm(propagator - expm(generator, t), 2)))

            coupling = block_semigroup_propagator(a, a, t)[2:, :2]
            worst_equal = max(worst_equal, float(np.linalg.norm(coupling - t * a @ expm(a, t), 2)))

    worst_block = 0.0
    for _ in range(BLOCK_SAMPLES):
        a = random_matrix(rng, 2, 1.0)
        b = random_matrix(rng, 2, 1.0)
        c_n = as_vector(rng.standard_normal(2))
        exact = block_iterates(a, b, c_n, LAPLACE_TIME, BLOCK_ITERATES)
        swept = sweep_iterates(a, b, c_n, LAPLACE_TIME, BLOCK_ITERATES)
        worst_block = max(worst_block, max(float(np.max(np.abs(x - y))) for x, y in zip(exact, swept)))
    return [
        CheckResult("block semigroup vs expm", worst, SEMIGROUP_TOLERANCE, f"{CHECK_SAMPLES} pairs"),
        CheckResult("block semigroup A = B", worst_equal, SEMIGROUP_TOLERANCE, "R(t) = t A exp(A t)"),
        CheckResult(
            "block generator vs sweeps", worst_block, LAPLACE_TOLERANCE,
            f"N={BLOCK_ITERATES}, {BLOCK_SAMPLES} pairs",
        ),
    ]


def sweep_iterates(a: Matrix, b: Matrix, c_n: Vector, t: float, iterations: int,
                   h: float = LAPLACE_STEP) -> List[Vector]:
    """Final values of iterates 1..iterations on one step [0, t], Bode rule."""
    grid = IterateGrid.zeros(0.0, t, h, c_n.shape[0])
    finals = []
    for i in range(1, iterations + 1):
        grid = sweep(a, b, grid, c_n, SweepSide.for_iteration(i), QuadRule.BODE)
        finals.append(grid.final)
    return finals


def check_laplace() -> List[CheckResult]:
    """Closed-form c_2, c_3 against quadrature sweeps; the relaxation pair must be singular."""
    rng = np.random.default_rng(CHECK_SEED)
    worst_c2 = 0.0
    worst_c3 = 0.0
    for _ in range(CHECK_SAMPLES):
        a, b = separated_pair(rng)
        c_n = as_vector(rng.standard_normal(2))
        _, c2, c3 = sweep_iterates(a, b, c_n, LAPLACE_TIME, 3)
        worst_c2 = max(worst_c2, float(np.max(np.abs(laplace_c2(a, b, c_n, LAPLACE_TIME) - c2))))
        worst_c3 = max(worst_c3, float(np.max(np.abs(laplace_c3(a, b, c_n, LAPLACE_TIME) - c3))))

    # B - A invertible although A and B share both eigenvalues
    a, b = as_matrix(np.diag([-1.0, -2.0])), as_matrix(np.diag([-2.0, -1.0]))
    c_n = as_vector([1.0, 1.0])
    _, c2, c3 = sweep_iterates(a, b, c_n, LAPLACE_TIME, 3)
    shared = max(
        float(np.max(np.abs(laplace_c2(a, b, c_n, LAPLACE_TIME) - c2))),
        float(np.max(np.abs(laplace_c3(a, b, c_n, LAPLACE_TIME) - c3))),
    )

    relaxation = dahlquist_2x2(DEFAULT_LAMBDA1, DEFAULT_LAMBDA2)
    try:
        laplace_c2(relaxation.operator_a, relaxation.operator_b, relaxation.u0, LAPLACE_TIME)
        singular = CheckResult("closed form singular pair", math.inf, 0.0, "expected SingularMatrixError")
    except SingularMatrixError as e:
        logger.debug(f"Relaxation pair rejected as expected: {e}")
        singular = CheckResult("closed form singular pair", 0.0, 0.0, "SingularMatrixError raised as expected")

    return [
        CheckResult("closed form c2 vs sweeps", worst_c2, LAPLACE_TOLERANCE, f"{CHECK_SAMPLES} pairs"),
        CheckResult("closed form c3 vs sweeps", worst_c3, LAPLACE_TOLERANCE, f"{CHECK_SAMPLES} pairs"),
        CheckResult("closed form shared spectrum", shared, LAPLACE_TOLERANCE, "A = diag(-1, -2), B = diag(-2, -1)"),
        singular,
    ]


def run_checks(which: CheckKind) -> List[CheckResult]:
    """Run one suite, or all of them in a fixed order."""
    suites = {
        CheckKind.PHI: check_phi,
        CheckKind.SEMIGROUP: check_semigroup,
        CheckKind.LAPLACE: check_laplace,
    }
    selected = list(suites) if which is CheckKind.ALL else [which]
    results: List[CheckResult] = []
    for kind in selected:
        logger.info(f"Running {kind.value} checks")
        results.extend(suites[kind]())
    return results
