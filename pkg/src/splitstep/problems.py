"""
Test problems for the iterative splitting scheme.

- ``dahlquist_2x2``: the conservative 2x2 relaxation system with a closed-form
  solution, split into its two column-stochastic halves.
- ``radial_oscillator``: the radial Schroedinger equation u'' = f(r, E) u read
  as a harmonic oscillator in "time" r with spring constant k = -f.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import partial
from typing import Callable, Optional, Tuple, Union


from .constants import (
    DEFAULT_ANGULAR,
    DEFAULT_ENERGY,
    DEFAULT_P0,
    DEFAULT_Q0,
    DEFAULT_R0,
    DEFAULT_R_END,
    DEFAULT_T0,
    DEFAULT_T_END,
)
from .errors import DimensionError, MissingFreezePolicyError, ProblemError, SingularPotentialError
from .linalg import Matrix, Vector, as_matrix, as_vector, require_square

logger = logging.getLogger(__name__)

Operator = Union[Matrix, Callable[[float], Matrix]]


class FreezePolicy(str, Enum):
    """Where time-dependent operators are evaluated on a partition."""

    MIDPOINT = "midpoint"
    LEFT = "left"


@dataclass(frozen=True, eq=False)
class SplitProblem:
    """
    Linear evolution problem u' = A(t) u + B(t) u, u(t0) = u0, on [t0, t_end].

    Each operator is either a constant matrix or a callable returning the
    matrix at time t. ``exact`` is the closed-form solution when one is known.
    """

    name: str
    operator_a: Operator
    operator_b: Operator
    u0: Vector
    t0: float
    t_end: float
    freeze: Optional[FreezePolicy] = None
    exact: Optional[Callable[[float], Vector]] = None

    def __post_init__(self) -> None:
        if not (math.isfinite(self.t0) and math.isfinite(self.t_end)) or self.t_end <= self.t0:
            raise ProblemError(f"need a finite interval with t_end > t0, got [{self.t0}, {self.t_end}]")
        a, b = self.operators_at(self.t0)
        n = require_square(a, "A")
        if require_square(b, "B") != n or self.u0.shape != (n,):
            raise DimensionError(
                f"A {a.shape}, B {b.shape} and u0 {self.u0.shape} are not conformable"
            )

    @property
    def is_constant(self) -> bool:
        return not (callable(self.operator_a) or callable(self.operator_b))

    @property
    def dimension(self) -> int:
        return self.u0.shape[0]

    def operators_at(self, t: float) -> Tuple[Matrix, Matrix]:
        """A(t) and B(t); constant operators ignore t."""
        a = self.operator_a(t) if callable(self.operator_a) else self.operator_a
        b = self.operator_b(t) if callable(self.operator_b) else self.operator_b
        return a, b

    def frozen_operators(self, t_start: float, t_end: float) -> Tuple[Matrix, Matrix]:
        """
        Operators held fixed over the partition [t_start, t_end].

        Raises:
            MissingFreezePolicyError: If the problem is time-dependent and has no policy.
        """
        if self.is_constant:
            return self.operators_at(t_start)
        if self.freeze is None:
            raise MissingFreezePolicyError(f"problem {self.name!r} has time-dependent operators")
        if self.freeze is FreezePolicy.MIDPOINT:
            return self.operators_at(0.5 * (t_start + t_end))
        return self.operators_at(t_start)

    def generator(self, t: float) -> Matrix:
        """Full operator A(t) + B(t)."""
        a, b = self.operators_at(t)
        return a + b


def exact_solution_2x2(lambda1: float, lambda2: float, t: float) -> Vector:
    """
    Closed-form solution of the relaxation system with u(0) = (1, 1).

    Args:
        lambda1 (float): Rate out of the first component.
        lambda2 (float): Rate out of the second component.
        t (float): Time.

    Returns:
        Vector: (c1 - c2 e^{-(l1+l2)t}, (l1/l2) c1 + c2 e^{-(l1+l2)t}).

    Raises:
        ProblemError: If lambda2 is zero.
    """
    if lambda2 == 0:
        raise ProblemError("lambda2 must be non-zero")
    ratio = lambda1 / lambda2
    c1 = 2.0 / (1.0 + ratio)
    c2 = (1.0 - ratio) / (1.0 + ratio)
    decay = math.exp(-(lambda1 + lambda2) * t)
    return as_vector([c1 - c2 * decay, ratio * c1 + c2 * decay])


def dahlquist_2x2(lambda1: float, lambda2: float, t_end: float = DEFAULT_T_END) -> SplitProblem:
    """
    The 2x2 relaxation problem split into A = [[-l1, 0], [l1, 0]] and
    B = [[0, l2], [0, -l2]], u0 = (1, 1) on [0, t_end].

    Both halves have zero column sums, so the component sum is conserved.

    Raises:
        ProblemError: If a rate is not positive.
    """
    if not (lambda1 > 0 and lambda2 > 0):
        raise ProblemError(f"rates must be positive, got lambda1={lambda1}, lambda2={lambda2}")
    return SplitProblem(
        name="dahlquist_2x2",
        operator_a=as_matrix([[-lambda1, 0.0], [lambda1, 0.0]]),
        operator_b=as_matrix([[0.0, lambda2], [0.0, -lambda2]]),
        u0=as_vector([1.0, 1.0]),
        t0=DEFAULT_T0,
        t_end=t_end,
        exact=partial(exact_solution_2x2, lambda1, lambda2),
    )


def zero_potential(r: float) -> float:
    return 0.0


@dataclass(frozen=True)
class OscillatorSpec:
    """Radial Schroedinger parameters: energy E, angular number l, potential V(r) on [r0, r_end]."""

    energy: float = DEFAULT_ENERGY
    l: int = DEFAULT_ANGULAR
    potential: Callable[[float], float] = zero_potential
    r0: float = DEFAULT_R0
    r_end: float = DEFAULT_R_END
    q0: float = DEFAULT_Q0
    p0: float = DEFAULT_P0

    def __post_init__(self) -> None:
        if int(self.l) != self.l or self.l < 0:
            raise ProblemError(f"l must be a non-negative integer, got {self.l}")
        if self.r0 <= 0:
            raise SingularPotentialError(
                f"r0 must be positive (l(l+1)/r^2 is unbounded at r=0), got r0={self.r0}"
            )
        if self.r_end <= self.r0:
            raise ProblemError(f"need r_end > r0, got [{self.r0}, {self.r_end}]")

    @property
    def has_constant_spring(self) -> bool:
        return self.l == 0 and self.potential is zero_potential


def spring_constant(spec: OscillatorSpec, r: float) -> float:
    """k(r, E) = -f(r, E) = 2E - 2V(r) - l(l+1)/r^2."""
    return 2.0 * spec.energy - 2.0 * spec.potential(r) - spec.l * (spec.l + 1) / r**2


def hamiltonian(spec: OscillatorSpec, r: float, state: Vector) -> float:
    """H = p^2/2 + k(r) q^2/2."""
    q, p = state
    return 0.5 * p**2 + 0.5 * spring_constant(spec, r) * q**2


def harmonic_solution(spec: OscillatorSpec, r: float) -> Vector:
    """
    Exact (q, p) for a constant positive spring constant: a rotation at
    frequency sqrt(k) started from (q0, p0) at r0.
    """
    if not spec.has_constant_spring:
        raise ProblemError("closed-form solution needs l = 0 and the zero potential")
    k = spring_constant(spec, spec.r0)
    if k <= 0:
        raise ProblemError(f"closed-form rotation needs k > 0, got k={k}")
    omega = math.sqrt(k)
    phase = omega * (r - spec.r0)
    cos, sin = math.cos(phase), math.sin(phase)
    return as_vector([
        spec.q0 * cos + spec.p0 / omega * sin,
        -spec.q0 * omega * sin + spec.p0 * cos,
    ])


_KINETIC = as_matrix([[0.0, 1.0], [0.0, 0.0]])


def _spring_operator(spec: OscillatorSpec, r: float) -> Matrix:
    return as_matrix([[0.0, 0.0], [-spring_constant(spec, r), 0.0]])


def radial_oscillator(spec: OscillatorSpec, freeze: FreezePolicy = FreezePolicy.MIDPOINT) -> SplitProblem:
    """
    Split problem for the state (q, p): A = [[0, 1], [0, 0]] (q' = p) and
    B(r) = [[0, 0], [-k(r), 0]] (p' = -k q) on [r0, r_end].

    Constant-spring problems carry a constant B and the exact rotation.
    """
    if spec.has_constant_spring:
        operator_b: Operator = _spring_operator(spec, spec.r0)
        exact = partial(harmonic_solution, spec) if spring_constant(spec, spec.r0) > 0 else None
    else:
        operator_b = partial(_spring_operator, spec)
        exact = None
    logger.debug(f"Radial oscillator: E={spec.energy}, l={spec.l}, interval=[{spec.r0}, {spec.r_end}]")
    return SplitProblem(
        name=f"radial_oscillator(l={spec.l})",
        operator_a=_KINETIC,
        operator_b=operator_b,
        u0=as_vector([spec.q0, spec.p0]),
        t0=spec.r0,
        t_end=spec.r_end,
        freeze=freeze,
        exact=exact,
    )
