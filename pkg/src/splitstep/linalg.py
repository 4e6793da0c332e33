"""
Dense small-matrix arithmetic for splitstep.

Operators and states are plain ``numpy`` arrays of ``float64``. The
constructors here validate them once (shape, finiteness) and hand back
read-only arrays, so values can be shared freely between threads.
"""

import logging
import math
from typing import List, Sequence, Union

import numpy as np
import numpy.typing as npt
from scipy.linalg import lu, solve, solve_triangular

from .constants import SINGULAR_THRESHOLD
from .errors import DimensionError, NonFiniteError, SingularMatrixError

logger = logging.getLogger(__name__)

Matrix = npt.NDArray[np.float64]
Vector = npt.NDArray[np.float64]
ArrayLike = Union[npt.ArrayLike, Sequence[float]]


# Diagonal Pade coefficients b_0..b_m and the 1-norm bounds up to which the
# degree-m approximant is accurate to double precision.
_PADE_COEFFS = {
    3: (120.0, 60.0, 12.0, 1.0),
    5: (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0),
    7: (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0),
    9: (17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
        2162160.0, 110880.0, 3960.0, 90.0, 1.0),
    13: (64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
         1187353796428800.0, 129060195264000.0, 10559470521600.0,
         670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
         960960.0, 16380.0, 182.0, 1.0),
}
_PADE_THETA = {
    3: 1.495585217958292e-2,
    5: 2.539398330063230e-1,
    7: 9.504178996162932e-1,
    9: 2.097847961257068e0,
    13: 5.371920351148152e0,
}


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def as_matrix(entries: ArrayLike) -> Matrix:
    """
    Build a validated, read-only matrix.

    Args:
        entries: Anything ``numpy.array`` accepts, two-dimensional.

    Returns:
        Matrix: A float64 copy of the entries.

    Raises:
        DimensionError: If the entries are not two-dimensional.
        NonFiniteError: If any entry is NaN or Inf.
    """
    matrix = np.array(entries, dtype=np.float64)
    if matrix.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise NonFiniteError("matrix entries must be finite")
    return _frozen(matrix)


def as_vector(entries: ArrayLike) -> Vector:
    """Build a validated, read-only vector (1-D, finite)."""
    vector = np.array(entries, dtype=np.float64)
    if vector.ndim != 1:
        raise DimensionError(f"expected a 1-D vector, got shape {vector.shape}")
    if not np.all(np.isfinite(vector)):
        raise NonFiniteError("vector entries must be finite")
    return _frozen(vector)


def require_square(m: Matrix, name: str = "matrix") -> int:
    """Return the order of a square matrix or raise DimensionError."""
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {m.shape}")
    return m.shape[0]


def _require_finite_time(t: float) -> float:
    if not math.isfinite(t):
        raise NonFiniteError(f"time must be finite, got {t}")
    return float(t)


def _pade(a: Matrix, degree: int) -> Matrix:
    """Evaluate the [degree/degree] Pade approximant of exp(a)."""
    c = _PADE_COEFFS[degree]
    ident = np.eye(a.shape[0])
    a2 = a @ a
    if degree == 13:
        a4 = a2 @ a2
        a6 = a2 @ a4
        u = a @ (a6 @ (c[13] * a6 + c[11] * a4 + c[9] * a2)
                 + c[7] * a6 + c[5] * a4 + c[3] * a2 + c[1] * ident)
        v = (a6 @ (c[12] * a6 + c[10] * a4 + c[8] * a2)
             + c[6] * a6 + c[4] * a4 + c[2] * a2 + c[0] * ident)
    else:
        powers = [ident, a2]
        for _ in range(2, (degree + 1) // 2):
            powers.append(powers[-1] @ a2)
        u = a @ sum(c[j] * powers[j // 2] for j in range(degree, 0, -2))
        v = sum(c[j] * powers[j // 2] for j in range(degree - 1, -1, -2))
    return solve(v - u, v + u)


def expm(m: Matrix, t: float = 1.0) -> Matrix:
    """
    Matrix exponential exp(t*M) by scaling and squaring.

    The lowest-degree diagonal Pade approximant whose 1-norm bound covers
    ``t*M`` is used directly; larger arguments are scaled by 2**-s, fed to
    the degree-13 approximant and squared s times.

    Args:
        m (Matrix): Square matrix.
        t (float): Finite scalar time.

    Returns:
        Matrix: exp(t*M).

    Raises:
        DimensionError: If ``m`` is not square.
        NonFiniteError: If ``t`` is not finite.

    Example:
        >>> expm(np.diag([-0.75]), 1.0)
        array([[0.47236655]])
    """
    m = np.asarray(m, dtype=np.float64)
    require_square(m)
    a = _require_finite_time(t) * m
    norm = np.linalg.norm(a, 1)

    for degree in (3, 5, 7, 9):
        if norm <= _PADE_THETA[degree]:
            return _frozen(_pade(a, degree))

    mantissa, squarings = math.frexp(norm / _PADE_THETA[13])
    squarings = max(0, squarings - (mantissa == 0.5))
    result = _pade(a / 2.0**squarings, 13)
    for _ in range(squarings):
        result = result @ result
    return _frozen(result)


def expm_table(m: Matrix, h: float, count: int) -> np.ndarray:
    """
    Propagators exp(k*h*M) for k = 0..count, stacked along axis 0.

    Entries are filled by block doubling: every new block is an exactly
    computed exp(j*h*M) times an earlier block, so rounding grows with
    log2(count) rather than count.
    """
    m = np.asarray(m, dtype=np.float64)
    n = require_square(m)
    if count < 0:
        raise ValueError(f"count must be non-negative, got {count}")
    h = _require_finite_time(h)

    table = np.empty((count + 1, n, n))
    table[0] = np.eye(n)
    if count >= 1:
        table[1] = expm(m, h)
    filled = 2
    while filled <= count:
        span = min(filled, count + 1 - filled)
        table[filled:filled + span] = expm(m, filled * h) @ table[:span]
        filled += span
    return _frozen(table)


def inverse(m: Matrix, threshold: float = SINGULAR_THRESHOLD) -> Matrix:
    """
    Inverse through an LU factorisation with partial pivoting.

    Args:
        m (Matrix): Square matrix.
        threshold (float): Pivots at or below ``threshold * max|M|`` count as zero.

    Returns:
        Matrix: M^{-1}.

    Raises:
        DimensionError: If ``m`` is not square.
        SingularMatrixError: If any pivot is below the threshold.
    """
    m = np.asarray(m, dtype=np.float64)
    n = require_square(m)
    scale = float(np.max(np.abs(m))) if m.size else 0.0

    perm, lower, upper = lu(m)
    pivots = np.abs(np.diag(upper))
    smallest = float(pivots.min()) if n else 0.0
    if smallest <= threshold * scale:
        logger.debug(f"Singular matrix: smallest pivot {smallest:.3e}, scale {scale:.3e}")
        raise SingularMatrixError(
            f"matrix is singular (pivot {smallest:.3e} <= {threshold:.0e} * {scale:.3e})"
        )

    # M = P L U  =>  M^{-1} = U^{-1} L^{-1} P^T
    y = solve_triangular(lower, perm.T, lower=True, unit_diagonal=True)
    return _frozen(solve_triangular(upper, y))


def mat_apply(m: Matrix, v: Vector) -> Vector:
    """Matrix-vector product M v."""
    if m.ndim != 2 or v.ndim != 1 or m.shape[1] != v.shape[0]:
        raise DimensionError(f"cannot apply {m.shape} matrix to vector of length {v.shape}")
    return _frozen(m @ v)


def mat_mul(m: Matrix, n: Matrix) -> Matrix:
    """Matrix product M N."""
    if m.ndim != 2 or n.ndim != 2 or m.shape[1] != n.shape[0]:
        raise DimensionError(f"cannot multiply {m.shape} by {n.shape}")
    return _frozen(m @ n)


def mat_add(m: Matrix, n: Matrix) -> Matrix:
    """Matrix sum M + N."""
    if m.shape != n.shape:
        raise DimensionError(f"cannot add {m.shape} and {n.shape}")
    return _frozen(m + n)


def mat_scale(m: Matrix, s: float) -> Matrix:
    """Scalar multiple s M."""
    return _frozen(float(s) * m)


def max_abs_err(u: Vector, v: Vector) -> List[float]:
    """
    Componentwise absolute error |u_j - v_j|.

    Args:
        u (Vector): First vector.
        v (Vector): Second vector of the same length.

    Returns:
        List[float]: One error per component.

    Raises:
        DimensionError: If the lengths differ.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise DimensionError(f"length mismatch: {u.shape} vs {v.shape}")
    return [float(e) for e in np.abs(u - v)]
