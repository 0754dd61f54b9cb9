"""
Dense Linear Algebra Module.

Field-generic dense matrices used for every operator of the engine. On the
exact backend all elimination is Gauss-Jordan over Gaussian rationals, so
ranks, kernels and inverses are exact. On the float backend the same methods
delegate to numpy (SVD-based ranks and kernels with an absolute tolerance).
"""

import logging
from collections.abc import Iterable, Sequence
from typing import Any, Optional

import numpy as np

from deforge import DeforgeError
from deforge.scalars import EXACT, ScalarField

logger = logging.getLogger(__name__)


class SingularMatrix(DeforgeError):
    """Raised when inverting a singular matrix."""


class Matrix:
    """Immutable dense matrix over a scalar field.

    Entries are stored row-major as tuples of field scalars. Construction
    through the public constructor coerces every entry; internal operations
    use ``_raw`` to skip coercion.
    """

    __slots__ = ("field", "rows", "shape")

    def __init__(
        self,
        rows: Iterable[Iterable[Any]],
        field: ScalarField = EXACT,
        ncols: Optional[int] = None,
    ):
        data = tuple(tuple(field.coerce(x) for x in row) for row in rows)
        width = len(data[0]) if data else (ncols or 0)
        for row in data:
            if len(row) != width:
                raise ValueError("ragged rows in matrix literal")
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "rows", data)
        object.__setattr__(self, "shape", (len(data), width))

    def __setattr__(self, name, value):
        raise AttributeError("Matrix is immutable")

    @classmethod
    def _raw(cls, rows: Sequence[Sequence[Any]], field: ScalarField, ncols: int) -> "Matrix":
        m = cls.__new__(cls)
        object.__setattr__(m, "field", field)
        object.__setattr__(m, "rows", tuple(tuple(r) for r in rows))
        object.__setattr__(m, "shape", (len(rows), ncols))
        return m

    # ------------------------------------------------------------------
    # Constructors
    # ------------------------------------------------------------------

    @classmethod
    def zeros(cls, nrows: int, ncols: int, field: ScalarField = EXACT) -> "Matrix":
        z = field.zero
        return cls._raw([[z] * ncols for _ in range(nrows)], field, ncols)

    @classmethod
    def identity(cls, size: int, field: ScalarField = EXACT) -> "Matrix":
        z, o = field.zero, field.one
        return cls._raw(
            [[o if i == j else z for j in range(size)] for i in range(size)], field, size
        )

    @classmethod
    def from_columns(
        cls, columns: Sequence[Sequence[Any]], nrows: int, field: ScalarField = EXACT
    ) -> "Matrix":
        """Build a matrix whose j-th column is ``columns[j]``."""
        rows = [[columns[j][i] for j in range(len(columns))] for i in range(nrows)]
        return cls._raw(rows, field, len(columns))

    @classmethod
    def from_numpy(cls, array: np.ndarray, field: ScalarField) -> "Matrix":
        array = np.atleast_2d(array)
        rows = [[field.coerce(complex(x)) for x in row] for row in array]
        return cls._raw(rows, field, array.shape[1])

    def to_numpy(self) -> np.ndarray:
        out = np.zeros(self.shape, dtype=complex)
        for i, row in enumerate(self.rows):
            for j, x in enumerate(row):
                out[i, j] = complex(x)
        return out

    # ------------------------------------------------------------------
    # Access
    # ------------------------------------------------------------------

    @property
    def nrows(self) -> int:
        return self.shape[0]

    @property
    def ncols(self) -> int:
        return self.shape[1]

    def __getitem__(self, index: tuple[int, int]) -> Any:
        i, j = index
        return self.rows[i][j]

    def row(self, i: int) -> tuple:
        return self.rows[i]

    def column(self, j: int) -> tuple:
        return tuple(row[j] for row in self.rows)

    def columns(self) -> list[tuple]:
        return [self.column(j) for j in range(self.ncols)]

    def select_columns(self, indices: Sequence[int]) -> "Matrix":
        rows = [[row[j] for j in indices] for row in self.rows]
        return Matrix._raw(rows, self.field, len(indices))

    def select_rows(self, indices: Sequence[int]) -> "Matrix":
        return Matrix._raw([self.rows[i] for i in indices], self.field, self.ncols)

    # ------------------------------------------------------------------
    # Arithmetic
    # ------------------------------------------------------------------

    def _check(self, other: "Matrix") -> None:
        self.field.check_compatible(other.field)

    def __add__(self, other: "Matrix") -> "Matrix":
        self._check(other)
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} + {other.shape}")
        return Matrix._raw(
            [[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)],
            self.field,
            self.ncols,
        )

    def __sub__(self, other: "Matrix") -> "Matrix":
        self._check(other)
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} - {other.shape}")
        return Matrix._raw(
            [[a - b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)],
            self.field,
            self.ncols,
        )

    def __neg__(self) -> "Matrix":
        return Matrix._raw([[-a for a in r] for r in self.rows], self.field, self.ncols)

    def scale(self, c: Any) -> "Matrix":
        c = self.field.coerce(c)
        return Matrix._raw([[c * a for a in r] for r in self.rows], self.field, self.ncols)

    def __matmul__(self, other: "Matrix") -> "Matrix":
        self._check(other)
        if self.ncols != other.nrows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        if not self.field.exact:
            return Matrix.from_numpy(self.to_numpy() @ other.to_numpy(), self.field) if (
                self.nrows and other.ncols
            ) else Matrix.zeros(self.nrows, other.ncols, self.field)
        zero = self.field.zero
        cols = other.columns()
        out = []
        for r in self.rows:
            nz = [(k, a) for k, a in enumerate(r) if a]
            out_row = []
            for c in cols:
                acc = zero
                for k, a in nz:
                    b = c[k]
                    if b:
                        acc = acc + a * b
                out_row.append(acc)
            out.append(out_row)
        return Matrix._raw(out, self.field, other.ncols)

    def apply(self, vector: Sequence[Any]) -> tuple:
        """Matrix-vector product."""
        if len(vector) != self.ncols:
            raise ValueError("vector length does not match column count")
        zero = self.field.zero
        out = []
        for r in self.rows:
            acc = zero
            for a, x in zip(r, vector):
                if a and x:
                    acc = acc + a * x
            out.append(acc)
        return tuple(out)

    @property
    def H(self) -> "Matrix":
        """Conjugate transpose."""
        conj = self.field.conj
        return Matrix._raw(
            [[conj(self.rows[i][j]) for i in range(self.nrows)] for j in range(self.ncols)],
            self.field,
            self.nrows,
        )

    @property
    def T(self) -> "Matrix":
        return Matrix._raw(
            [[self.rows[i][j] for i in range(self.nrows)] for j in range(self.ncols)],
            self.field,
            self.nrows,
        )

    def conjugate(self) -> "Matrix":
        conj = self.field.conj
        return Matrix._raw([[conj(a) for a in r] for r in self.rows], self.field, self.ncols)

    @staticmethod
    def hstack(blocks: Sequence["Matrix"]) -> "Matrix":
        if not blocks:
            raise ValueError("hstack of no blocks")
        nrows = blocks[0].nrows
        field = blocks[0].field
        for b in blocks:
            field.check_compatible(b.field)
            if b.nrows != nrows:
                raise ValueError("hstack row mismatch")
        rows = [sum((list(b.rows[i]) for b in blocks), []) for i in range(nrows)]
        return Matrix._raw(rows, field, sum(b.ncols for b in blocks))

    @staticmethod
    def vstack(blocks: Sequence["Matrix"]) -> "Matrix":
        if not blocks:
            raise ValueError("vstack of no blocks")
        ncols = blocks[0].ncols
        field = blocks[0].field
        rows: list = []
        for b in blocks:
            field.check_compatible(b.field)
            if b.ncols != ncols:
                raise ValueError("vstack column mismatch")
            rows.extend(b.rows)
        return Matrix._raw(rows, field, ncols)

    def is_zero(self) -> bool:
        is_zero = self.field.is_zero
        return all(is_zero(a) for r in self.rows for a in r)

    def equals(self, other: "Matrix") -> bool:
        return self.shape == other.shape and (self - other).is_zero()

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.field == other.field and self.equals(other)

    __hash__ = None  # type: ignore[assignment]

    def is_hermitian(self) -> bool:
        return self.nrows == self.ncols and self.equals(self.H)

    def __repr__(self):
        return f"Matrix({self.nrows}x{self.ncols}, {self.field.name})"

    # ------------------------------------------------------------------
    # Elimination
    # ------------------------------------------------------------------

    def rref(self) -> tuple["Matrix", tuple[int, ...]]:
        """Reduced row echelon form and pivot columns (exact backend)."""
        rows, pivots = _gauss_jordan([list(r) for r in self.rows], self.ncols, self.field)
        return Matrix._raw(rows, self.field, self.ncols), tuple(pivots)

    def _singular_values(self) -> np.ndarray:
        if self.nrows == 0 or self.ncols == 0:
            return np.zeros(0)
        return np.linalg.svd(self.to_numpy(), compute_uv=False)

    def _rank_tolerance(self, sv: np.ndarray) -> float:
        scale = max(1.0, float(sv[0])) if sv.size else 1.0
        return self.field.tolerance * scale  # type: ignore[attr-defined]

    def rank(self) -> int:
        if self.nrows == 0 or self.ncols == 0:
            return 0
        if self.field.exact:
            return len(self.rref()[1])
        sv = self._singular_values()
        return int(np.sum(sv > self._rank_tolerance(sv)))

    def nullspace(self) -> "Matrix":
        """Basis of the kernel as the columns of an ncols x k matrix."""
        n = self.ncols
        if self.nrows == 0:
            return Matrix.identity(n, self.field)
        if self.field.exact:
            reduced, pivots = self.rref()
            free = [j for j in range(n) if j not in pivots]
            zero, one = self.field.zero, self.field.one
            basis = []
            for f in free:
                vec = [zero] * n
                vec[f] = one
                for r, p in enumerate(pivots):
                    vec[p] = -reduced.rows[r][f]
                basis.append(vec)
            return Matrix.from_columns(basis, n, self.field)
        _, sv, vh = np.linalg.svd(self.to_numpy())
        rank = int(np.sum(sv > self._rank_tolerance(sv))) if sv.size else 0
        kernel = vh[rank:].conj().T
        if kernel.shape[1] == 0:
            return Matrix.zeros(n, 0, self.field)
        return Matrix.from_numpy(kernel, self.field)

    def image_basis(self) -> "Matrix":
        """Independent columns spanning the column space."""
        if self.field.exact:
            _, pivots = self.rref()
            return self.select_columns(pivots)
        if self.nrows == 0 or self.ncols == 0:
            return Matrix.zeros(self.nrows, 0, self.field)
        u, sv, _ = np.linalg.svd(self.to_numpy())
        rank = int(np.sum(sv > self._rank_tolerance(sv)))
        if rank == 0:
            return Matrix.zeros(self.nrows, 0, self.field)
        return Matrix.from_numpy(u[:, :rank], self.field)

    def inverse(self) -> "Matrix":
        """Two-sided inverse.

        Raises:
            SingularMatrix: If the matrix is not invertible.
        """
        n = self.nrows
        if n != self.ncols:
            raise SingularMatrix(f"non-square matrix {self.shape}")
        if n == 0:
            return self
        if not self.field.exact:
            if self.rank() < n:
                raise SingularMatrix("matrix is numerically singular")
            return Matrix.from_numpy(np.linalg.inv(self.to_numpy()), self.field)
        augmented = [list(r) + list(e) for r, e in zip(self.rows, Matrix.identity(n).rows)]
        rows, pivots = _gauss_jordan(augmented, n, self.field)
        if len(pivots) < n:
            raise SingularMatrix("matrix is not invertible")
        return Matrix._raw([r[n:] for r in rows], self.field, n)

    def solve(self, rhs: "Matrix") -> Optional["Matrix"]:
        """A particular solution X of self @ X = rhs, or None when inconsistent."""
        self._check(rhs)
        if rhs.nrows != self.nrows:
            raise ValueError("right-hand side row count mismatch")
        n = self.ncols
        if not self.field.exact:
            if self.nrows == 0:
                return Matrix.zeros(n, rhs.ncols, self.field)
            a, b = self.to_numpy(), rhs.to_numpy()
            x, *_ = np.linalg.lstsq(a, b, rcond=None)
            scale = max(1.0, float(np.max(np.abs(b))) if b.size else 1.0)
            tolerance = self.field.tolerance  # type: ignore[attr-defined]
            if b.size and np.max(np.abs(a @ x - b)) > tolerance * scale * 10:
                return None
            return Matrix.from_numpy(x, self.field) if n else Matrix.zeros(0, rhs.ncols, self.field)
        augmented = [list(r) + list(s) for r, s in zip(self.rows, rhs.rows)]
        rows, pivots = _gauss_jordan(augmented, n, self.field)
        rank = len(pivots)
        for r in range(rank, self.nrows):
            if any(rows[r][n:]):
                return None
        zero = self.field.zero
        solution = [[zero] * rhs.ncols for _ in range(n)]
        for r, p in enumerate(pivots):
            solution[p] = list(rows[r][n:])
        return Matrix._raw(solution, self.field, rhs.ncols)

    def spans(self, other: "Matrix") -> bool:
        """True iff every column of ``other`` lies in the column space of self."""
        if other.ncols == 0:
            return True
        if self.ncols == 0:
            return other.is_zero()
        return self.solve(other) is not None

    def determinant(self) -> Any:
        n = self.nrows
        if n != self.ncols:
            raise ValueError("determinant of non-square matrix")
        if n == 0:
            return self.field.one
        if not self.field.exact:
            return self.field.coerce(complex(np.linalg.det(self.to_numpy())))
        rows = [list(r) for r in self.rows]
        det = self.field.one
        for c in range(n):
            pivot = next((r for r in range(c, n) if rows[r][c]), None)
            if pivot is None:
                return self.field.zero
            if pivot != c:
                rows[c], rows[pivot] = rows[pivot], rows[c]
                det = -det
            p = rows[c][c]
            det = det * p
            for r in range(c + 1, n):
                f = rows[r][c]
                if f:
                    f = f / p
                    rows[r] = [a - f * b for a, b in zip(rows[r], rows[c])]
        return det


def _gauss_jordan(
    rows: list[list[Any]], ncols: int, field: ScalarField
) -> tuple[list[list[Any]], list[int]]:
    """In-place Gauss-Jordan elimination pivoting on the first ``ncols`` columns.

    Trailing columns (augmentation) are carried along. Returns the reduced rows
    and the pivot columns.
    """
    nrows = len(rows)
    pivots: list[int] = []
    r = 0
    exact = field.exact
    for c in range(ncols):
        if r >= nrows:
            break
        if exact:
            pivot = next((i for i in range(r, nrows) if rows[i][c]), None)
        else:
            best = max(range(r, nrows), key=lambda i: abs(rows[i][c]))
            pivot = None if field.is_zero(rows[best][c]) else best
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        p = rows[r][c]
        rows[r] = [a / p for a in rows[r]]
        for i in range(nrows):
            if i != r:
                f = rows[i][c]
                if f:
                    rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    return rows, pivots


def intersect_column_spaces(a: Matrix, b: Matrix) -> Matrix:
    """Basis (as columns) of col(a) ∩ col(b)."""
    if a.ncols == 0 or b.ncols == 0:
        return Matrix.zeros(a.nrows, 0, a.field)
    kernel = Matrix.hstack([a, -b]).nullspace()
    if kernel.ncols == 0:
        return Matrix.zeros(a.nrows, 0, a.field)
    coefficients = kernel.select_rows(range(a.ncols))
    return (a @ coefficients).image_basis()


def realify(m: Matrix) -> Matrix:
    """Real form [[Re, -Im], [Im, Re]] acting on stacked (Re x, Im x)."""
    field = m.field
    re = Matrix._raw([[field.real(a) for a in r] for r in m.rows], field, m.ncols)
    im = Matrix._raw([[field.imag(a) for a in r] for r in m.rows], field, m.ncols)
    return Matrix.vstack([Matrix.hstack([re, -im]), Matrix.hstack([im, re])])


def is_positive_definite(m: Matrix) -> bool:
    """Exact LDL^H test on the exact backend, eigenvalues on the float backend."""
    if not m.is_hermitian():
        return False
    n = m.nrows
    if n == 0:
        return True
    field = m.field
    if not field.exact:
        tolerance = field.tolerance  # type: ignore[attr-defined]
        return bool(np.min(np.linalg.eigvalsh(m.to_numpy())) > tolerance)
    rows = [list(r) for r in m.rows]
    for c in range(n):
        pivot = rows[c][c]
        if field.sign(pivot) <= 0:
            return False
        for r in range(c + 1, n):
            f = rows[r][c]
            if f:
                f = f / pivot
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[c])]
    return True
