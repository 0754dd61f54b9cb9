"""Tests for exact and float matrix algebra."""

from fractions import Fraction

import numpy as np
import pytest

from deforge.linalg import (
    Matrix,
    SingularMatrix,
    intersect_column_spaces,
    is_positive_definite,
    realify,
)
from deforge.scalars import EXACT, BackendMismatch, FloatField, GaussianRational

I = GaussianRational(0, 1)


class TestMatrixBasics:
    """Tests for construction and arithmetic."""

    def test_ragged_rows(self):
        """Test ragged literals are rejected."""
        with pytest.raises(ValueError):
            Matrix([[1, 2], [3]])

    def test_product(self):
        """Test a small exact product."""
        a = Matrix([[1, 2], [3, 4]])
        b = Matrix([[0, 1], [1, 0]])
        assert (a @ b).equals(Matrix([[2, 1], [4, 3]]))

    def test_shape_mismatch(self):
        """Test incompatible shapes raise ValueError."""
        with pytest.raises(ValueError):
            Matrix([[1, 2]]) @ Matrix([[1, 2]])
        with pytest.raises(ValueError):
            Matrix([[1, 2]]) + Matrix([[1], [2]])

    def test_backend_mixing(self):
        """Test exact and float matrices do not combine."""
        with pytest.raises(BackendMismatch):
            Matrix([[1]]) + Matrix([[1.0]], FloatField())

    def test_conjugate_transpose(self):
        """Test H conjugates and transposes."""
        m = Matrix([[1, I], [0, 2]])
        assert m.H.equals(Matrix([[1, 0], [-I, 2]]))
        assert not m.is_hermitian()
        assert Matrix([[2, I], [-I, 3]]).is_hermitian()

    def test_stack(self):
        """Test block stacking."""
        a = Matrix.identity(2)
        stacked = Matrix.vstack([Matrix.hstack([a, a]), Matrix.hstack([a, a])])
        assert stacked.shape == (4, 4)
        assert stacked[3, 1] == GaussianRational(1)

    def test_apply(self):
        """Test matrix-vector products."""
        assert Matrix([[1, 2], [3, 4]]).apply([1, 1]) == (GaussianRational(3), GaussianRational(7))


class TestElimination:
    """Tests for rank, kernels, inverses and solving."""

    def test_rank_and_nullspace(self):
        """Test rank-nullity on a rank-one matrix."""
        m = Matrix([[1, 2, 3], [2, 4, 6]])
        assert m.rank() == 1
        kernel = m.nullspace()
        assert kernel.shape == (3, 2)
        assert (m @ kernel).is_zero()

    def test_inverse(self):
        """Test exact inverse of a Gaussian matrix."""
        m = Matrix([[1, I], [0, 2]])
        assert (m @ m.inverse()).equals(Matrix.identity(2))
        assert m.inverse()[1, 1] == GaussianRational(Fraction(1, 2))

    def test_singular_inverse(self):
        """Test singular and non-square inverses raise SingularMatrix."""
        with pytest.raises(SingularMatrix):
            Matrix([[1, 2], [2, 4]]).inverse()
        with pytest.raises(SingularMatrix):
            Matrix([[1, 2]]).inverse()

    def test_solve(self):
        """Test consistent and inconsistent systems."""
        a = Matrix([[1, 1], [1, 1]])
        x = a.solve(Matrix([[2], [2]]))
        assert x is not None
        assert (a @ x).equals(Matrix([[2], [2]]))
        assert a.solve(Matrix([[1], [2]])) is None

    def test_spans(self):
        """Test column-space membership."""
        a = Matrix([[1], [0], [0]])
        assert a.spans(Matrix([[3], [0], [0]]))
        assert not a.spans(Matrix([[0], [1], [0]]))
        assert Matrix.zeros(3, 0).spans(Matrix.zeros(3, 1))

    def test_determinant(self):
        """Test exact determinants."""
        assert Matrix([[2, 1], [1, 1]]).determinant() == GaussianRational(1)
        assert Matrix([[0, 1], [1, 0]]).determinant() == GaussianRational(-1)
        assert Matrix([[1, 2], [2, 4]]).determinant() == GaussianRational(0)

    def test_intersection(self):
        """Test intersection of two planes in three-space is a line."""
        a = Matrix([[1, 0], [0, 1], [0, 0]])
        b = Matrix([[0, 0], [1, 0], [0, 1]])
        meet = intersect_column_spaces(a, b)
        assert meet.ncols == 1
        assert a.spans(meet) and b.spans(meet)

    def test_float_rank_uses_tolerance(self):
        """Test near-singular float matrices are rank deficient."""
        fld = FloatField(1e-9)
        m = Matrix([[1.0, 1.0], [1.0, 1.0 + 1e-12]], fld)
        assert m.rank() == 1
        assert m.nullspace().ncols == 1

    def test_float_matches_exact(self, rng):
        """Test float and exact ranks agree on random integer matrices."""
        values = rng.integers(-2, 3, size=(4, 6))
        exact = Matrix(values.tolist())
        floats = Matrix(values.astype(float).tolist(), FloatField(1e-9))
        assert exact.rank() == floats.rank() == np.linalg.matrix_rank(values)


class TestPositivity:
    """Tests for Hermitian positive-definiteness."""

    @pytest.mark.parametrize(
        "rows,expected",
        [
            ([[2, 0], [0, 1]], True),
            ([[1, 2], [2, 1]], False),
            ([[0, 0], [0, 1]], False),
            ([[2, I], [-I, 2]], True),
            ([[1, I], [I, 1]], False),
        ],
    )
    def test_exact(self, rows, expected):
        """Test exact LDL^H verdicts."""
        assert is_positive_definite(Matrix(rows)) is expected

    def test_float(self):
        """Test the eigenvalue path on the float backend."""
        m = Matrix([[2.0, 1j], [-1j, 2.0]], FloatField(1e-9))
        assert is_positive_definite(m)

    def test_realify(self):
        """Test the real form of a Hermitian matrix is symmetric and doubles the size."""
        m = Matrix([[2, I], [-I, 2]])
        real = realify(m)
        assert real.shape == (4, 4)
        assert real.equals(real.T)
        assert is_positive_definite(real)


def test_exact_field_is_default():
    """Test matrices default to the exact backend."""
    assert Matrix([[1]]).field is EXACT
