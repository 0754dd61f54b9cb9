"""
Hermitian representations of (p,p)-forms.

A (p,p)-form is written ω = σ_p Σ Θ_{ij̄} β_i∧β̄_j over a basis {β_i} of
Λ^{p,0}, with σ_p = 2^{-p} i^{p²}. ω is real exactly when Θ is hermitian.
Coefficients of β_i are taken in the monomial basis of Λ^{p,0}.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional

import numpy as np

from deforge.constants import DEFAULT_TOLERANCE
from deforge.exterior import Form, Monomial, monomial_basis
from deforge.hodge import HermitianMetric
from deforge.linalg import Matrix, SingularMatrix
from deforge.positivity.grassmannian import is_decomposable
from deforge.scalars import EXACT, FloatField, ScalarField

logger = logging.getLogger(__name__)


def sigma(p: int, fld: ScalarField = EXACT) -> Any:
    """σ_p = 2^{-p} i^{p²}: real for even p, imaginary for odd p."""
    value = fld.coerce(Fraction(1, 2**p))
    return value * fld.i if p % 2 else value


def _mixed_key(holo: Monomial, anti: Monomial, n: int) -> Monomial:
    return holo + tuple(n + j for j in anti)


def assemble(n: int, p: int, coefficients: Matrix) -> Form:
    """σ_p Σ C[x][y] dz^{I_x}∧dz̄^{I_y} over the monomial basis of Λ^{p,0}."""
    fld = coefficients.field
    s = sigma(p, fld)
    keys = monomial_basis(n, p, 0)
    terms = {
        _mixed_key(a, b, n): s * coefficients[x, y]
        for x, a in enumerate(keys)
        for y, b in enumerate(keys)
    }
    return Form(n, terms, fld)


def pp_degree(omega: Form, p: Optional[int] = None) -> int:
    """p for a (p,p)-form; ``p`` must be given for the zero form.

    Raises:
        ValueError: If the form is not of type (p,p).
    """
    if p is None:
        if omega.is_zero():
            raise ValueError("the degree of the zero form must be given")
        p = omega.bidegree[0]
    if not omega.is_bihomogeneous(p, p):
        raise ValueError(f"form is not of type ({p},{p})")
    return p


@dataclass(frozen=True)
class PPFormRep:
    n: int
    p: int
    theta: Matrix
    basis: Matrix

    @property
    def field(self) -> ScalarField:
        return self.theta.field

    @property
    def q(self) -> int:
        return self.n - self.p

    @property
    def size(self) -> int:
        return self.theta.nrows

    @property
    def sigma(self) -> Any:
        return sigma(self.p, self.field)

    def is_real(self) -> bool:
        return self.theta.is_hermitian()

    def beta(self, i: int) -> Form:
        return Form.from_vector(
            self.n, monomial_basis(self.n, self.p, 0), self.basis.column(i), self.field
        )

    def reassemble(self) -> Form:
        return assemble(self.n, self.p, self.basis @ self.theta @ self.basis.H)


def hermitian_rep(
    omega: Form, basis: Optional[Matrix] = None, p: Optional[int] = None
) -> PPFormRep:
    """Θ with ω = σ_p Σ Θ_{ij̄} β_i∧β̄_j; the columns of ``basis`` are the β_i.

    Raises:
        ValueError: If ω is not a (p,p)-form or the basis does not span Λ^{p,0}.
    """
    n, fld = omega.n, omega.field
    p = pp_degree(omega, p)
    keys = monomial_basis(n, p, 0)
    size = len(keys)
    scale = fld.one / sigma(p, fld)
    coefficients = Matrix(
        [[omega.coefficient(_mixed_key(a, b, n)) * scale for b in keys] for a in keys], fld
    )
    basis = basis if basis is not None else Matrix.identity(size, fld)
    if basis.shape != (size, size):
        raise ValueError(f"basis of Λ^{{{p},0}} needs {size} vectors of length {size}")
    try:
        inverse = basis.inverse()
    except SingularMatrix as e:
        raise ValueError(f"basis does not span Λ^{{{p},0}}") from e
    return PPFormRep(n, p, inverse @ coefficients @ inverse.H, basis)


@dataclass
class CanonicalForm:
    """ω = σ_p Σ λ_j η_j∧η̄_j with η_j orthonormal for the coframe metric.

    Unit length in the coframe metric corresponds to |η_j|² = 2^p in the
    normalization of real coordinates.
    """

    n: int
    p: int
    lambdas: list
    etas: list[Form]
    exact: bool
    tolerance: float = DEFAULT_TOLERANCE
    notes: list[str] = field(default_factory=list)

    def _sign(self, value) -> int:
        if self.exact:
            return (value > 0) - (value < 0)
        scale = max(1.0, max((abs(v) for v in self.lambdas), default=1.0))
        if abs(value) <= self.tolerance * scale:
            return 0
        return 1 if value > 0 else -1

    @property
    def positive_index(self) -> int:
        return sum(1 for v in self.lambdas if self._sign(v) > 0)

    @property
    def negative_index(self) -> int:
        return sum(1 for v in self.lambdas if self._sign(v) < 0)

    def reassemble(self) -> Form:
        if not self.etas:
            return Form.zero(self.n)
        fld = self.etas[0].field
        s = sigma(self.p, fld)
        total = Form.zero(self.n, fld)
        for value, eta in zip(self.lambdas, self.etas):
            total = total + eta.wedge(eta.conjugate()).scale(s * fld.coerce(value))
        return total


def _is_diagonal(m: Matrix) -> bool:
    return all(m.field.is_zero(m[i, j]) for i in range(m.nrows) for j in range(m.ncols) if i != j)


def _hermitian_root(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    values, vectors = np.linalg.eigh(m)
    root = vectors @ np.diag(np.sqrt(values)) @ vectors.conj().T
    inverse_root = vectors @ np.diag(1.0 / np.sqrt(values)) @ vectors.conj().T
    return root, inverse_root


def canonical_form(
    omega: Form, metric: Optional[HermitianMetric] = None, p: Optional[int] = None
) -> CanonicalForm:
    """Eigen-decomposition of a real (p,p)-form relative to the metric.

    Exact when Θ is diagonal and the induced metric on Λ^{p,0} is the
    identity; otherwise computed in floating point.

    Raises:
        ValueError: If ω is not a real (p,p)-form.
    """
    n, fld = omega.n, omega.field
    p = pp_degree(omega, p)
    if not omega.is_real():
        raise ValueError("canonical form needs a real (p,p)-form")
    metric = metric or HermitianMetric.standard(n, fld)
    rep = hermitian_rep(omega, p=p)
    gram = metric.form_gram(p, 0)
    keys = monomial_basis(n, p, 0)
    tolerance = fld.tolerance if isinstance(fld, FloatField) else DEFAULT_TOLERANCE

    identity = Matrix.identity(len(keys), fld)
    if fld.exact and metric.field.exact and _is_diagonal(rep.theta) and gram.equals(identity):
        lambdas = [fld.real(rep.theta[i, i]).re for i in range(len(keys))]
        etas = [Form(n, {key: 1}, fld) for key in keys]
        return CanonicalForm(n, p, lambdas, etas, exact=True)

    logger.info(f"Canonical form of a ({p},{p})-form on n={n} computed in floating point")
    root, inverse_root = _hermitian_root(gram.to_numpy())
    a = root @ rep.theta.to_numpy() @ root
    values, vectors = np.linalg.eigh((a + a.conj().T) / 2)
    frame = inverse_root @ vectors
    flt = FloatField(tolerance)
    etas = [
        Form(n, {key: complex(x) for key, x in zip(keys, frame[:, j])}, flt)
        for j in range(len(keys))
    ]
    return CanonicalForm(
        n,
        p,
        [float(v) for v in values],
        etas,
        exact=False,
        tolerance=tolerance,
        notes=["floating-point eigen-decomposition"],
    )


def check_strong_certificate(
    omega: Form, weights: Sequence[Any], taus: Sequence[Form]
) -> tuple[bool, str]:
    """Check ω = Σ w_j σ_p τ_j∧τ̄_j with w_j ≥ 0 and decomposable (p,0)-forms τ_j."""
    if len(weights) != len(taus):
        return False, "weights and forms differ in length"
    n, fld = omega.n, omega.field
    if omega.is_zero() and not taus:
        return True, ""
    try:
        p = pp_degree(omega) if not omega.is_zero() else taus[0].bidegree[0]
    except ValueError as e:
        return False, str(e)
    s = sigma(p, fld)
    total = Form.zero(n, fld)
    for index, (w, tau) in enumerate(zip(weights, taus)):
        w = fld.coerce(w)
        if not fld.is_zero(fld.imag(w)) or fld.sign(fld.real(w)) < 0:
            return False, f"weight {index} is not a non-negative real"
        if not tau.is_bihomogeneous(p, 0):
            return False, f"form {index} is not of type ({p},0)"
        if not is_decomposable(tau):
            return False, f"form {index} is not decomposable"
        total = total + tau.wedge(tau.conjugate()).scale(s * w)
    if not total.equals(omega):
        return False, "convex combination does not reassemble the form"
    return True, ""
