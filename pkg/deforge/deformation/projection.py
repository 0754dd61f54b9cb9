"""
d-closed and ∂∂̄-closed extension by projection.

The complex structure X_t is pulled back to the fixed algebra through
D_t = Λ(X^{-1}) d Λ(X), which on Λ^{r,s} splits into ∂_t^♭ + ∂̄_t^♭. The
extension of a closed form is its orthogonal projection onto
ker ∂_t^♭ ∩ ker ∂̄_t^♭ (Bott-Chern) or ker ∂_t^♭∂̄_t^♭ (Aeppli), computed
from a power series of kernel bases. The kernel dimension is assumed
constant in t; only its value at t = 0 is inspected.
"""

import logging
from enum import Enum
from typing import Optional

from deforge.calculus import LieAlgebraPresentation, ce_d, partial, partial_bar
from deforge.deformation import ObstructionHit
from deforge.deformation.series import (
    BiIndex,
    BiSeries,
    bi_indices,
    compose_series,
    d_series,
    extension_series,
    form_series,
    inverse_series,
    lambda_series,
)
from deforge.exterior import Form
from deforge.hodge import FormSpace, HermitianMetric, HodgeComplex
from deforge.linalg import Matrix

logger = logging.getLogger(__name__)


class ProjectionVariant(str, Enum):
    BOTT_CHERN = "bc"
    AEPPLI = "aeppli"


def pulled_back_operators(
    alg: LieAlgebraPresentation, phi: BiSeries, r: int, s: int
) -> tuple[BiSeries, BiSeries]:
    """(∂_t^♭, ∂̄_t^♭) on Λ^{r,s} as matrix series."""
    n, fld = alg.n, alg.field
    source = FormSpace(n, r, s)
    targets = (FormSpace(n, r + 1, s), FormSpace(n, r, s + 1))
    x = extension_series(phi)
    x_inv = inverse_series(x)
    columns: list[BiSeries] = []
    for key in source.basis:
        unit = form_series(n, fld, phi.order, phi.params).with_terms(
            {phi.origin: Form(n, {key: 1}, fld)}
        )
        columns.append(lambda_series(x_inv, d_series(alg, lambda_series(x, unit))))
    indices = sorted({k for col in columns for k, _ in col.items()})
    results = []
    for target in targets:
        terms = {}
        for index in indices:
            coords = [target.coords(col.at(index).component(target.p, target.q)) for col in columns]
            terms[index] = Matrix.from_columns(coords, target.dim, fld)
        zero = Matrix.zeros(target.dim, source.dim, fld)
        results.append(BiSeries(phi.order, zero, terms, phi.params))
    return results[0], results[1]


def constraint_series(
    alg: LieAlgebraPresentation, phi: BiSeries, r: int, s: int, variant: ProjectionVariant
) -> BiSeries:
    """Matrix series whose kernel is the target subspace of Λ^{r,s}."""
    variant = ProjectionVariant(variant)
    if variant is ProjectionVariant.BOTT_CHERN:
        del_op, dbar_op = pulled_back_operators(alg, phi, r, s)
        rows = del_op.zero.nrows + dbar_op.zero.nrows
        keys = {k for k, _ in del_op.items()} | {k for k, _ in dbar_op.items()}
        terms = {k: Matrix.vstack([del_op.at(k), dbar_op.at(k)]) for k in keys}
        zero = Matrix.zeros(rows, del_op.zero.ncols, alg.field)
        return BiSeries(phi.order, zero, terms, phi.params)
    _, dbar_op = pulled_back_operators(alg, phi, r, s)
    del_next, _ = pulled_back_operators(alg, phi, r, s + 1)
    return compose_series(del_next, dbar_op)


def kernel_basis_series(constraint: BiSeries) -> BiSeries:
    """K(t) with A(t)K(t) = 0 through the order and K(0) a kernel basis of A(0).

    Raises:
        ObstructionHit: If some order of the kernel equation has no solution.
    """
    a0 = constraint.at(constraint.origin)
    k0 = a0.nullspace()
    fld = constraint.field
    zero = Matrix.zeros(a0.ncols, k0.ncols, fld)
    kernel = BiSeries(constraint.order, zero, {constraint.origin: k0}, constraint.params)
    if k0.ncols == 0:
        return kernel
    a_terms = [(k, v) for k, v in constraint.items() if k != constraint.origin]
    for degree in range(1, constraint.order + 1):
        updates: dict[BiIndex, Matrix] = {}
        for index in bi_indices(constraint.params, degree):
            rhs = Matrix.zeros(a0.nrows, k0.ncols, fld)
            for (ia, ja), a in a_terms:
                ri, rj = _sub(index[0], ia), _sub(index[1], ja)
                if ri is None or rj is None:
                    continue
                rhs = rhs - a @ kernel.at((ri, rj))
            if rhs.is_zero():
                continue
            solution = a0.solve(rhs) if a0.nrows else None
            if solution is None:
                raise ObstructionHit(degree, "kernel-basis", rhs)
            updates[index] = solution
        kernel = kernel.with_terms(updates)
    return kernel


def _sub(a: tuple[int, ...], b: tuple[int, ...]) -> Optional[tuple[int, ...]]:
    out = tuple(x - y for x, y in zip(a, b))
    return out if all(v >= 0 for v in out) else None


def _adjoint_series(k: BiSeries) -> BiSeries:
    zero = Matrix.zeros(k.zero.ncols, k.zero.nrows, k.field)
    return BiSeries(k.order, zero, {(j, i): v.H for (i, j), v in k.items()}, k.params)


def extend_dclosed_projection(
    alg: LieAlgebraPresentation,
    metric: Optional[HermitianMetric],
    form: Form,
    phi: BiSeries,
    order: Optional[int] = None,
    variant: ProjectionVariant = ProjectionVariant.BOTT_CHERN,
    complex_: Optional[HodgeComplex] = None,
) -> BiSeries:
    """Series β(t) in Λ^{r,s} with β(0) = form and e^{ι_φ|ι_φ̄}β(t) d-closed.

    For the Aeppli variant β(t) is ∂_t∂̄_t-closed instead.

    Raises:
        ValueError: If the input is not closed for the chosen variant.
        ObstructionHit: If the kernel-basis series breaks down.
    """
    variant = ProjectionVariant(variant)
    hc = complex_ or HodgeComplex(alg, metric)
    r, s = form.bidegree
    if variant is ProjectionVariant.BOTT_CHERN and not ce_d(alg, form).is_zero():
        raise ValueError("input form is not d-closed")
    if variant is ProjectionVariant.AEPPLI and not partial(alg, partial_bar(alg, form)).is_zero():
        raise ValueError("input form is not ∂∂̄-closed")
    order = phi.order if order is None else min(order, phi.order)
    phi = phi.truncate(order)
    space = FormSpace(alg.n, r, s)

    constraint = constraint_series(alg, phi, r, s, variant)
    kernel = kernel_basis_series(constraint)
    logger.info(
        f"Projection extension on {alg.name} at ({r},{s}): "
        f"kernel dimension {kernel.zero.ncols} at t = 0"
    )
    gram = BiSeries.constant(hc.gram(space), order, phi.params)
    kernel_h = _adjoint_series(kernel)
    weighted = compose_series(kernel_h, gram)
    normal = compose_series(weighted, kernel)
    start = Matrix.from_columns([space.coords(form)], space.dim, alg.field)
    coefficients = compose_series(weighted, BiSeries.constant(start, order, phi.params))
    if kernel.zero.ncols:
        coefficients = compose_series(inverse_series(normal), coefficients)
    projected = compose_series(kernel, coefficients)
    terms = {index: space.element(m.column(0), alg.field) for index, m in projected.items()}
    return form_series(alg.n, alg.field, order, phi.params, terms)


def projection_residual(
    alg: LieAlgebraPresentation, phi: BiSeries, series: BiSeries, variant: ProjectionVariant
) -> BiSeries:
    """A(t)β(t) for the variant's constraint; zero for a valid extension."""
    r, s = series.at(series.origin).bidegree
    space = FormSpace(alg.n, r, s)
    constraint = constraint_series(alg, phi.truncate(series.order), r, s, variant)
    zero = Matrix.zeros(space.dim, 1, alg.field)
    column = BiSeries(
        series.order,
        zero,
        {
            index: Matrix.from_columns([space.coords(f)], space.dim, alg.field)
            for index, f in series.items()
        },
        series.params,
    )
    return compose_series(constraint, column)
