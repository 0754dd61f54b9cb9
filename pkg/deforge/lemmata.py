"""
ddbar-Lemma Module.

Decides the family of (n-1,n)-th ∂∂̄-lemmata (mild, dual mild, weak, strong)
and the full ∂∂̄-lemma at any bidegree on the invariant model, and classifies
invariant complex structures (abelian, complex parallelizable, nilpotent).
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from typing import Any, Optional

from deforge.calculus import LieAlgebraPresentation, ce_d
from deforge.exterior import Form, _conjugate_key, monomial_basis
from deforge.hodge import FormSpace, HodgeComplex, OperatorMatrix
from deforge.linalg import Matrix, intersect_column_spaces, realify

logger = logging.getLogger(__name__)


class LemmaKind(str, Enum):
    """Variants of the ∂∂̄-lemma."""

    MILD = "mild"
    DUAL_MILD = "dual_mild"
    WEAK = "weak"
    STRONG = "strong"
    FULL = "full"


class Classification(str, Enum):
    """Type of an invariant complex structure."""

    ABELIAN = "abelian"
    COMPLEX_PARALLELIZABLE = "complex_parallelizable"
    NILPOTENT = "nilpotent"
    NON_NILPOTENT = "non_nilpotent"


# Cohomologies whose invariant computation the lift to the nilmanifold needs
_LIFT_HYPOTHESES = {
    LemmaKind.MILD: ("Bott-Chern", "∂"),
    LemmaKind.DUAL_MILD: ("Bott-Chern", "Dolbeault"),
    LemmaKind.WEAK: ("Bott-Chern", "∂", "Dolbeault"),
    LemmaKind.STRONG: ("Bott-Chern", "Aeppli"),
    LemmaKind.FULL: ("Bott-Chern", "Aeppli"),
}


@dataclass
class LemmaVerdict:
    """Outcome of a ∂∂̄-lemma check on the invariant model.

    A failing verdict carries ``witness``, a form in the tested subspace that is
    not ∂∂̄-exact, and when available ``preimage``, the form it came from.
    """

    kind: LemmaKind
    bidegree: tuple[int, int]
    holds: bool
    witness: Optional[Form] = None
    preimage: Optional[Form] = None
    details: dict[str, Any] = field(default_factory=dict)

    @property
    def consistent(self) -> bool:
        return self.details.get("consistent", True)

    @property
    def nilmanifold_conclusion(self) -> str:
        """Conditional statement for the compact quotient, with its hypotheses named."""
        p, q = self.bidegree
        hypotheses = ", ".join(f"{name} cohomology" for name in _LIFT_HYPOTHESES[self.kind])
        state = "holds" if self.holds else "fails"
        return (
            f"The ({p},{q})-th {self.kind.value.replace('_', ' ')} ∂∂̄-lemma {state} on the "
            f"nilmanifold provided the inclusion of invariant forms induces isomorphisms "
            f"in ({p},{q}) {hypotheses} (symmetrization)."
        )


def _first_outside(image: Matrix, vectors: Matrix) -> Optional[int]:
    """Index of the first column of ``vectors`` outside col(image), or None."""
    for j in range(vectors.ncols):
        if not image.spans(vectors.select_columns([j])):
            return j
    return None


def check_mild(
    alg: LieAlgebraPresentation, complex_: Optional[HodgeComplex] = None
) -> LemmaVerdict:
    """(n-1,n)-th mild lemma: ∂(Λ^{n-2,n}) ⊆ Im ∂∂̄, cross-checked by dimensions."""
    hc = complex_ or HodgeComplex(alg)
    n, fld = alg.n, alg.field
    p, q = n - 1, n
    del_from = hc.base_operator("d", p - 1, q)
    ddbar = hc.ddbar(p - 1, q - 1)
    failing = _first_outside(ddbar.matrix, del_from.matrix)
    bc = hc.cohomology_dim("bc", p, q)
    dd = hc.cohomology_dim("del", p, q)
    by_dims = bc == dd
    holds = failing is None
    verdict = LemmaVerdict(
        LemmaKind.MILD,
        (p, q),
        holds,
        details={"dim_bc": bc, "dim_del": dd, "dimension_test": by_dims, "containment_test": holds},
    )
    if failing is not None:
        xi = del_from.source.element(_unit(del_from.source.dim, failing, fld), fld)
        verdict.preimage = xi
        verdict.witness = del_from.apply(xi)
    if by_dims != holds:
        verdict.details["consistent"] = False
        logger.error(
            f"Mild lemma tests disagree on {alg.name}: dims {by_dims}, containment {holds}"
        )
    logger.info(f"Mild lemma on {alg.name}: holds={holds}")
    return verdict


def check_dual_mild(
    alg: LieAlgebraPresentation, complex_: Optional[HodgeComplex] = None
) -> LemmaVerdict:
    """ker ∂ ∩ ker ∂̄ ∩ Im ∂̄ ⊆ Im ∂∂̄ at (n-1,n)."""
    hc = complex_ or HodgeComplex(alg)
    n = alg.n
    p, q = n - 1, n
    return _containment_verdict(
        hc, LemmaKind.DUAL_MILD, p, q, exact_parts=[hc.base_operator("db", p, q - 1).matrix]
    )


def check_full_ddbar(
    alg: LieAlgebraPresentation, bidegree: tuple[int, int], complex_: Optional[HodgeComplex] = None
) -> LemmaVerdict:
    """ker ∂ ∩ ker ∂̄ ∩ (Im ∂ + Im ∂̄) ⊆ Im ∂∂̄ at ``bidegree``."""
    hc = complex_ or HodgeComplex(alg)
    p, q = bidegree
    return _containment_verdict(
        hc,
        LemmaKind.FULL,
        p,
        q,
        exact_parts=[
            hc.base_operator("d", p - 1, q).matrix,
            hc.base_operator("db", p, q - 1).matrix,
        ],
    )


def _containment_verdict(
    hc: HodgeComplex, kind: LemmaKind, p: int, q: int, exact_parts: list[Matrix]
) -> LemmaVerdict:
    fld = hc.field
    dim = FormSpace(hc.n, p, q).dim
    operators = (hc.base_operator("d", p, q).matrix, hc.base_operator("db", p, q).matrix)
    stacked = [m for m in operators if m.nrows]
    closed = Matrix.vstack(stacked).nullspace() if stacked else Matrix.identity(dim, fld)
    parts = [m for m in exact_parts if m.ncols]
    exact = Matrix.hstack(parts) if parts else Matrix.zeros(dim, 0, fld)
    subspace = intersect_column_spaces(closed, exact)
    ddbar = hc.ddbar(p - 1, q - 1).matrix
    failing = _first_outside(ddbar, subspace)
    verdict = LemmaVerdict(kind, (p, q), failing is None, details={"tested_dim": subspace.ncols})
    if failing is not None:
        verdict.witness = FormSpace(hc.n, p, q).element(subspace.column(failing), fld)
    logger.info(f"{kind.value} lemma at ({p},{q}) on {hc.alg.name}: holds={verdict.holds}")
    return verdict


def check_strong(
    alg: LieAlgebraPresentation, complex_: Optional[HodgeComplex] = None
) -> LemmaVerdict:
    """dim H^{n-1,n}_BC = dim H^{n-1,n}_A, checked against mild ∧ dual mild."""
    hc = complex_ or HodgeComplex(alg)
    n = alg.n
    p, q = n - 1, n
    bc = hc.cohomology_dim("bc", p, q)
    aeppli = hc.cohomology_dim("aeppli", p, q)
    mild = check_mild(alg, hc)
    dual = check_dual_mild(alg, hc)
    holds = bc == aeppli
    verdict = LemmaVerdict(
        LemmaKind.STRONG,
        (p, q),
        holds,
        witness=None if holds else (mild.witness or dual.witness),
        preimage=None if holds else mild.preimage,
        details={"dim_bc": bc, "dim_aeppli": aeppli, "mild": mild.holds, "dual_mild": dual.holds},
    )
    if holds != (mild.holds and dual.holds):
        verdict.details["consistent"] = False
        logger.error(f"Strong lemma disagrees with mild and dual mild on {alg.name}")
    return verdict


def _conjugation_matrix(n: int, p: int, fld) -> Matrix:
    """Signed permutation C on Λ^{p,p} coordinates: coords(conj α) = C conj(coords α)."""
    basis = monomial_basis(n, p, p)
    index = {m: i for i, m in enumerate(basis)}
    rows = [[fld.zero] * len(basis) for _ in basis]
    for i, m in enumerate(basis):
        sign, image = _conjugate_key(m, n)
        rows[index[image]][i] = fld.one if sign > 0 else -fld.one
    return Matrix(rows, fld)


def check_weak(
    alg: LieAlgebraPresentation, complex_: Optional[HodgeComplex] = None
) -> LemmaVerdict:
    """∂̄ψ ∈ Im ∂∂̄ for every real (n-1,n-1)-form ψ with ∂̄ψ ∈ Im ∂.

    Works over the reals: a complex coordinate vector x = a + ib is stored as (a; b).
    """
    hc = complex_ or HodgeComplex(alg)
    fld = alg.field
    n = alg.n
    p = n - 1
    dbar = hc.base_operator("db", p, p)
    dee = hc.base_operator("d", p - 1, n)
    size, rows_out = dbar.source.dim, dbar.target.dim
    c = _conjugation_matrix(n, p, fld)
    one = Matrix.identity(size, fld)
    zero_x = Matrix.zeros(size, size, fld)
    real_dbar = realify(dbar.matrix)
    real_del = realify(dee.matrix) if dee.matrix.ncols else Matrix.zeros(2 * rows_out, 0, fld)
    m_cols = real_del.ncols
    equations = [
        Matrix.hstack([real_dbar, -real_del]) if m_cols else real_dbar,
        Matrix.hstack(
            [Matrix.hstack([c - one, zero_x]), Matrix.zeros(size, m_cols, fld)]
        ) if m_cols else Matrix.hstack([c - one, zero_x]),
        Matrix.hstack(
            [Matrix.hstack([zero_x, -c - one]), Matrix.zeros(size, m_cols, fld)]
        ) if m_cols else Matrix.hstack([zero_x, -c - one]),
    ]
    solutions = Matrix.vstack(equations).nullspace()
    real_part = solutions.select_rows(range(size))
    imag_part = solutions.select_rows(range(size, 2 * size))
    i = fld.i
    if solutions.ncols:
        psis = (real_part + imag_part.scale(i)).image_basis()
    else:
        psis = Matrix.zeros(size, 0, fld)
    images = dbar.matrix @ psis if psis.ncols else Matrix.zeros(rows_out, 0, fld)
    ddbar = hc.ddbar(p - 1, n - 1).matrix
    failing = _first_outside(ddbar, images)
    verdict = LemmaVerdict(
        LemmaKind.WEAK, (n - 1, n), failing is None, details={"tested_dim": psis.ncols}
    )
    if failing is not None:
        psi = dbar.source.element(psis.column(failing), fld)
        verdict.preimage = psi
        verdict.witness = dbar.apply(psi)
    logger.info(f"Weak lemma on {alg.name}: holds={verdict.holds}")
    return verdict


def check_lemma(
    alg: LieAlgebraPresentation,
    kind: LemmaKind,
    bidegree: Optional[tuple[int, int]] = None,
    complex_: Optional[HodgeComplex] = None,
) -> LemmaVerdict:
    kind = LemmaKind(kind)
    if kind is LemmaKind.MILD:
        return check_mild(alg, complex_)
    if kind is LemmaKind.DUAL_MILD:
        return check_dual_mild(alg, complex_)
    if kind is LemmaKind.WEAK:
        return check_weak(alg, complex_)
    if kind is LemmaKind.STRONG:
        return check_strong(alg, complex_)
    return check_full_ddbar(alg, bidegree or (alg.n - 1, alg.n), complex_)


# ----------------------------------------------------------------------
# Classification
# ----------------------------------------------------------------------


def _closed_subspace_step(alg: LieAlgebraPresentation, current: list[Form]) -> list[Form]:
    """{α ∈ Λ^{1,0} : dα ∈ Λ²(span(current ∪ conj current))}."""
    n, fld = alg.n, alg.field
    two_basis = list(combinations(range(2 * n), 2))
    span = current + [f.conjugate() for f in current]
    wedges = [a.wedge(b) for a, b in combinations(span, 2)]
    d_columns = [ce_d(alg, Form.generator(n, k, fld)).vector(two_basis) for k in range(n)]
    d_matrix = Matrix.from_columns(d_columns, len(two_basis), fld)
    if wedges:
        w_matrix = Matrix.from_columns([w.vector(two_basis) for w in wedges], len(two_basis), fld)
        kernel = Matrix.hstack([d_matrix, -w_matrix]).nullspace().select_rows(range(n))
    else:
        kernel = d_matrix.nullspace()
    kernel = kernel.image_basis() if kernel.ncols else kernel
    return [Form(n, {(k,): col[k] for k in range(n)}, fld) for col in kernel.columns()]


def nilpotent_filtration(alg: LieAlgebraPresentation) -> list[int]:
    """Dimensions of the increasing chain V_1 ⊆ V_2 ⊆ ... of (1,0)-forms until it stabilizes."""
    dims: list[int] = []
    current: list[Form] = []
    while True:
        current = _closed_subspace_step(alg, current)
        if dims and len(current) == dims[-1]:
            return dims
        dims.append(len(current))
        if len(current) == alg.n:
            return dims


def classify(alg: LieAlgebraPresentation) -> Classification:
    n = alg.n
    differentials = alg.d_table[:n]
    if all(d.is_bihomogeneous(1, 1) for d in differentials):
        result = Classification.ABELIAN
    elif all(d.is_bihomogeneous(2, 0) for d in differentials):
        result = Classification.COMPLEX_PARALLELIZABLE
    elif nilpotent_filtration(alg)[-1] == n:
        result = Classification.NILPOTENT
    else:
        result = Classification.NON_NILPOTENT
    logger.info(f"Classified {alg.name} as {result.value}")
    return result


def _unit(size: int, index: int, fld) -> list:
    vec = [fld.zero] * size
    vec[index] = fld.one
    return vec
