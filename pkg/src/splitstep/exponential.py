"""
Exponential machinery around the splitting scheme: phi-functions, closed
forms of the second and third iterate, and the block generator whose
exponential carries every iterate of one step at once.
"""

import logging
import math
from typing import List

import numpy as np
from scipy.integrate import romb

from .constants import PHI_ROMBERG_LEVEL, SEMIGROUP_ROMBERG_LEVEL
from .errors import DimensionError
from .linalg import Matrix, Vector, as_matrix, as_vector, expm, expm_table, inverse, require_square

logger = logging.getLogger(__name__)


def _require_pair(a: Matrix, b: Matrix) -> int:
    n = require_square(a, "A")
    if require_square(b, "B") != n:
        raise DimensionError(f"A {a.shape} and B {b.shape} must have the same order")
    return n


def phi_functions(m: Matrix, tau: float, kmax: int) -> List[Matrix]:
    """
    phi_0 .. phi_kmax of tau*M.

    phi_0 = exp(tau M) and, for k >= 1,

        phi_k = int_0^1 exp((1 - s) tau M) s^(k-1) / (k-1)! ds,

    integrated by Romberg extrapolation on 2**PHI_ROMBERG_LEVEL + 1 samples
    that share one propagator table.
    """
    if kmax < 0:
        raise ValueError(f"k must be non-negative, got {kmax}")
    m = np.asarray(m, dtype=np.float64)
    require_square(m)
    result = [expm(m, tau)]
    if kmax == 0:
        return result

    samples = 2**PHI_ROMBERG_LEVEL
    s = np.linspace(0.0, 1.0, samples + 1)
    kernel = expm_table(m, tau / samples, samples)[::-1]
    for k in range(1, kmax + 1):
        weight = s ** (k - 1) / math.factorial(k - 1)
        result.append(as_matrix(romb(kernel * weight[:, None, None], dx=1.0 / samples, axis=0)))
    return result


def phi_k(m: Matrix, tau: float, k: int) -> Matrix:
    """
    Single phi-function phi_k(tau M).

    Args:
        m (Matrix): Square matrix.
        tau (float): Step length.
        k (int): Index, k >= 0.

    Returns:
        Matrix: phi_k; satisfies phi_k = I/k! + tau M phi_{k+1}.
    """
    return phi_functions(m, tau, k)[k]


def _guard_pair(a: Matrix, b: Matrix) -> int:
    """Shape check plus the invertibility of B - A the closed forms are stated for."""
    n = _require_pair(a, b)
    inverse(b - a)
    return n


def laplace_c2(a: Matrix, b: Matrix, c_n: Vector, t: float) -> Vector:
    """
    Closed form of the second iterate (one A-sweep, one B-sweep) at time t:

        c_2(t) = exp(B t) c + int_0^t exp(B (t - s)) A exp(A s) c ds.

    Both terms are read off exp(t [[B, A], [0, A]]); for commuting
    operators this is the partial-fraction form exp(B t) c +
    A (A - B)^{-1} (exp(A t) - exp(B t)) c.

    Raises:
        SingularMatrixError: If B - A is singular (e.g. the 2x2 relaxation pair).
    """
    n = _guard_pair(a, b)
    zero = np.zeros((n, n))
    top = expm(np.block([[b, a], [zero, a]]), t)[:n]
    return as_vector(top @ np.concatenate([c_n, c_n]))


def laplace_c3(a: Matrix, b: Matrix, c_n: Vector, t: float) -> Vector:
    """
    Closed form of the third iterate at time t,

        c_3(t) = exp(A t) c + int_0^t exp(A (t - s)) B c_2(s) ds,

    read off the first block row of exp(t M) with the upper triangular
    M = [[A, B, 0], [0, B, A], [0, 0, A]].

    Raises:
        SingularMatrixError: If B - A is singular.
    """
    n = _guard_pair(a, b)
    zero = np.zeros((n, n))
    generator = np.block([[a, b, zero], [zero, b, a], [zero, zero, a]])
    top = expm(generator, t)[:n]
    return as_vector(top @ np.concatenate([c_n, c_n, c_n]))


def block_generator(a: Matrix, b: Matrix, iterates: int = 2) -> Matrix:
    """
    Lower block-bidiagonal generator of the coupled iterate system.

    Diagonal blocks alternate A, B, A, ...; each subdiagonal block repeats
    the diagonal block above it, so x_k' = D_{k-1} x_{k-1} + D_k x_k. For
    ``iterates=2`` this is C = [[A, 0], [A, B]].
    """
    n = _require_pair(a, b)
    if iterates < 1:
        raise ValueError(f"iterates must be >= 1, got {iterates}")
    generator = np.zeros((iterates * n, iterates * n))
    for k in range(iterates):
        diagonal = a if k % 2 == 0 else b
        rows = slice(k * n, (k + 1) * n)
        generator[rows, rows] = diagonal
        if k > 0:
            generator[rows, (k - 1) * n:k * n] = b if k % 2 == 0 else a
    return as_matrix(generator)


def block_iterates(a: Matrix, b: Matrix, c_n: Vector, t: float, iterates: int) -> List[Vector]:
    """
    c_1(t) .. c_iterates(t) of one step from c_0 = 0, as exp(t C) applied to
    the stacked state (c, ..., c).
    """
    n = _require_pair(a, b)
    stacked = expm(block_generator(a, b, iterates), t) @ np.tile(c_n, iterates)
    return [as_vector(stacked[k * n:(k + 1) * n]) for k in range(iterates)]


def block_semigroup_propagator(a: Matrix, b: Matrix, t: float) -> Matrix:
    """
    T(t) = [[exp(A t), 0], [R(t), exp(B t)]] with

        R(t) = int_0^t exp(B r) A exp(A (t - r)) dr

    computed by Romberg integration. T(t) equals exp(t C) for
    C = ``block_generator(A, B)``; for A = B the coupling is t A exp(A t).

    Raises:
        DimensionError: If A and B differ in shape or are not square.
    """
    n = _require_pair(a, b)
    samples = 2**SEMIGROUP_ROMBERG_LEVEL
    step = t / samples
    e_a = expm_table(a, step, samples)
    e_b = expm_table(b, step, samples)
    coupling = romb(e_b @ a @ e_a[::-1], dx=step, axis=0)
    return as_matrix(np.block([[e_a[-1], np.zeros((n, n))], [coupling, e_b[-1]]]))
