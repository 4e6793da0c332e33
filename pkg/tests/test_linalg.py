import math

import numpy as np
import pytest
import scipy.linalg

from splitstep.errors import DimensionError, NonFiniteError, SingularMatrixError
from splitstep.linalg import (
    as_matrix,
    as_vector,
    expm,
    expm_table,
    inverse,
    mat_add,
    mat_apply,
    mat_mul,
    mat_scale,
    max_abs_err,
)

A = as_matrix([[-0.25, 0.0], [0.25, 0.0]])
B = as_matrix([[0.0, 0.5], [0.0, -0.5]])


class TestConstructors:
    """Test cases for as_matrix and as_vector."""

    def test_matrix_is_read_only_copy(self):
        """Matrices are float64 and cannot be modified in place."""
        m = as_matrix([[1, 2], [3, 4]])
        assert m.dtype == np.float64
        with pytest.raises(ValueError):
            m[0, 0] = 5.0

    def test_matrix_rejects_wrong_rank(self):
        """A 1-D input is not a matrix."""
        with pytest.raises(DimensionError):
            as_matrix([1.0, 2.0])

    def test_matrix_rejects_nan(self):
        """NaN entries are rejected."""
        with pytest.raises(NonFiniteError):
            as_matrix([[1.0, math.nan], [0.0, 1.0]])

    def test_vector_rejects_inf(self):
        """Infinite entries are rejected."""
        with pytest.raises(NonFiniteError):
            as_vector([1.0, math.inf])

    def test_dimension_error_is_value_error(self):
        """Shape errors can be caught as ValueError."""
        with pytest.raises(ValueError):
            as_vector([[1.0]])


class TestExpm:
    """Test cases for the matrix exponential."""

    def test_zero_time_is_identity(self):
        """exp(0 M) = I."""
        np.testing.assert_allclose(expm(A, 0.0), np.eye(2), atol=0)

    def test_diagonal(self):
        """exp(diag(-0.75)) = diag(e^-0.75)."""
        np.testing.assert_allclose(expm(np.diag([-0.75]), 1.0), [[math.exp(-0.75)]], rtol=1e-14)

    def test_semigroup(self):
        """exp(A) exp(2A) = exp(3A)."""
        np.testing.assert_allclose(expm(A, 1.0) @ expm(A, 2.0), expm(A, 3.0), atol=1e-12)

    @pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
    def test_matches_scipy_on_random_matrices(self, n):
        """Agrees with scipy.linalg.expm across every Pade degree and with squaring."""
        rng = np.random.default_rng(n)
        for scale in (1e-3, 0.1, 1.0, 5.0, 10.0):
            m = rng.standard_normal((n, n))
            m *= scale / np.linalg.norm(m, 2)
            expected = scipy.linalg.expm(m)
            np.testing.assert_allclose(expm(m), expected, rtol=1e-9, atol=1e-12 * np.linalg.norm(expected))

    def test_semigroup_random(self):
        """exp(sM) exp(tM) = exp((s+t)M) for random matrices with norm up to 5."""
        rng = np.random.default_rng(7)
        for n in range(2, 7):
            m = rng.standard_normal((n, n))
            m *= 5.0 / np.linalg.norm(m, 2)
            full = expm(m, 0.7)
            residual = np.linalg.norm(expm(m, 0.3) @ expm(m, 0.4) - full, 2)
            assert residual <= 1e-10 * np.linalg.norm(full, 2)

    def test_derivative_at_zero(self):
        """(exp(hM) - I)/h approaches M linearly in h."""
        m = as_matrix([[0.0, 1.0], [-2.0, -0.3]])
        errors = [np.linalg.norm((expm(m, h) - np.eye(2)) / h - m) for h in (1e-2, 1e-3)]
        assert errors[1] < errors[0] / 5

    def test_rejects_non_square(self):
        """Non-square matrices raise DimensionError."""
        with pytest.raises(DimensionError):
            expm(np.zeros((2, 3)))

    def test_rejects_non_finite_time(self):
        """t must be finite."""
        with pytest.raises(NonFiniteError):
            expm(A, math.nan)


class TestExpmTable:
    """Test cases for expm_table."""

    def test_entries_match_direct_exponentials(self):
        """Every entry equals exp(k h M)."""
        m = as_matrix([[0.0, 1.0], [-1.0, 0.0]])
        table = expm_table(m, 0.01, 37)
        assert table.shape == (38, 2, 2)
        for k in (0, 1, 2, 5, 16, 37):
            np.testing.assert_allclose(table[k], scipy.linalg.expm(k * 0.01 * m), atol=1e-14)

    def test_zero_count(self):
        """count = 0 gives only the identity."""
        table = expm_table(A, 0.1, 0)
        np.testing.assert_array_equal(table, [np.eye(2)])

    def test_negative_count(self):
        """A negative count is rejected."""
        with pytest.raises(ValueError):
            expm_table(A, 0.1, -1)


class TestInverse:
    """Test cases for inverse."""

    def test_identity(self):
        np.testing.assert_array_equal(inverse(np.eye(3)), np.eye(3))

    def test_diagonal(self):
        np.testing.assert_allclose(inverse(np.diag([2.0, 4.0])), np.diag([0.5, 0.25]))

    def test_roundtrip(self):
        """M M^-1 = I for well-conditioned random matrices."""
        rng = np.random.default_rng(3)
        for n in range(2, 7):
            m = rng.standard_normal((n, n)) + n * np.eye(n)
            np.testing.assert_allclose(m @ inverse(m), np.eye(n), atol=1e-10)

    def test_needs_pivoting(self):
        """A zero leading entry is handled by row exchange."""
        m = np.array([[0.0, 1.0], [1.0, 0.0]])
        np.testing.assert_allclose(inverse(m), m)

    def test_relaxation_difference_is_singular(self):
        """B - A of the relaxation split has dependent rows."""
        with pytest.raises(SingularMatrixError):
            inverse(B - A)

    def test_non_square(self):
        with pytest.raises(DimensionError):
            inverse(np.zeros((2, 3)))


class TestMatrixArithmetic:
    """Test cases for the small arithmetic helpers."""

    def test_apply(self):
        np.testing.assert_allclose(mat_apply(A, as_vector([1.0, 1.0])), [-0.25, 0.25])

    def test_apply_sum(self):
        np.testing.assert_allclose(mat_apply(mat_add(A, B), as_vector([1.0, 1.0])), [0.25, -0.25])

    def test_mul_and_scale(self):
        np.testing.assert_allclose(mat_mul(A, B), A @ B)
        np.testing.assert_allclose(mat_scale(B, 2.0), 2.0 * B)

    def test_mismatches(self):
        with pytest.raises(DimensionError):
            mat_apply(A, as_vector([1.0, 2.0, 3.0]))
        with pytest.raises(DimensionError):
            mat_mul(A, np.zeros((3, 3)))
        with pytest.raises(DimensionError):
            mat_add(A, np.zeros((3, 3)))

    def test_max_abs_err(self):
        assert max_abs_err(as_vector([1.0, 2.0]), as_vector([1.5, 1.0])) == [0.5, 1.0]

    def test_max_abs_err_length_mismatch(self):
        with pytest.raises(DimensionError):
            max_abs_err(as_vector([1.0]), as_vector([1.0, 2.0]))
