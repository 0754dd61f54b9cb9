"""
Calculus Module.

Chevalley-Eilenberg differential of a Lie algebra with complex structure, its
bidegree splitting d = ∂ + ∂̄, the bracket of Beltrami differentials and the
integrability defect ∂̄φ - ½[φ,φ].
"""

import logging
import threading
from collections.abc import Sequence
from fractions import Fraction
from typing import Optional

from deforge import DeforgeError
from deforge.exterior import (
    DimensionMismatch,
    Form,
    Monomial,
    VectorForm,
    contract,
)
from deforge.scalars import EXACT, ScalarField

logger = logging.getLogger(__name__)


class IntegrabilityViolation(DeforgeError):
    """Raised when d of a form has components outside (p+1,q) ⊕ (p,q+1)."""


class InvariantViolation(DeforgeError):
    """Raised when a Lie algebra presentation fails a structural check."""

    def __init__(self, check: str, message: str):
        super().__init__(f"{check}: {message}")
        self.check = check


class LieAlgebraPresentation:
    """Structure equations of a Lie algebra with complex structure.

    ``d_table`` lists d(dz^k) for the holomorphic generators; the differentials
    of the conjugate generators are derived by conjugation. A table of length 2n
    is accepted too and then checked for conjugation compatibility.
    """

    def __init__(
        self,
        name: str,
        n: int,
        d_table: Sequence[Form],
        field: ScalarField = EXACT,
        validate: bool = True,
    ):
        if len(d_table) not in (n, 2 * n):
            raise InvariantViolation(
                "shape", f"expected {n} or {2 * n} differentials, got {len(d_table)}"
            )
        for form in d_table:
            if form.n != n:
                raise DimensionMismatch(f"differential has n={form.n}, expected {n}")
            field.check_compatible(form.field)
            if not all(len(k) == 2 for k in form.keys()):
                raise InvariantViolation("degree", "differentials of generators must be 2-forms")
        holomorphic = list(d_table[:n])
        full = holomorphic + [f.conjugate() for f in holomorphic]
        if len(d_table) == 2 * n:
            for k in range(n):
                if not d_table[n + k].equals(full[n + k]):
                    raise InvariantViolation(
                        "conjugation", f"d(w~{k + 1}) is not the conjugate of d(w{k + 1})"
                    )
        self.name = name
        self.n = n
        self.field = field
        self.d_table: tuple[Form, ...] = tuple(full)
        self._cache: dict[Monomial, Form] = {}
        self._lock = threading.Lock()
        if validate:
            self.validate()

    def __repr__(self):
        return f"LieAlgebraPresentation(name={self.name!r}, n={self.n})"

    def validate(self) -> None:
        """Check integrability and d² = 0 on every generator.

        Raises:
            InvariantViolation: Naming the failed check.
        """
        n = self.n
        for k in range(n):
            if not self.d_table[k].component(0, 2).is_zero():
                raise InvariantViolation(
                    "integrability", f"d(w{k + 1}) has a (0,2) component"
                )
        for g in range(2 * n):
            dd = ce_d(self, self.d_table[g])
            if not dd.is_zero():
                raise InvariantViolation("d-squared", f"d(d(generator {g + 1})) = {dd.format()}")
        logger.debug(f"Presentation {self.name} passed validation")

    def with_field(self, field: ScalarField) -> "LieAlgebraPresentation":
        """The same structure equations over another scalar backend."""
        if field == self.field:
            return self
        table = [
            Form(self.n, {k: field.coerce(v) for k, v in f.items()}, field)
            for f in self.d_table[: self.n]
        ]
        return LieAlgebraPresentation(self.name, self.n, table, field, validate=False)

    def equals(self, other: "LieAlgebraPresentation") -> bool:
        return self.n == other.n and all(a.equals(b) for a, b in zip(self.d_table, other.d_table))

    def d_monomial(self, key: Monomial) -> Form:
        """d of a coefficient-one monomial, by the graded Leibniz rule."""
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        n, field = self.n, self.field
        result = Form.zero(n, field)
        for i, g in enumerate(key):
            dg = self.d_table[g]
            if dg.is_zero():
                continue
            left = Form._raw(n, {key[:i]: field.one}, field)
            right = Form._raw(n, {key[i + 1 :]: field.one}, field)
            term = left.wedge(dg).wedge(right)
            result = result - term if i % 2 else result + term
        with self._lock:
            self._cache[key] = result
        return result


def ce_d(alg: LieAlgebraPresentation, a: Form) -> Form:
    """Chevalley-Eilenberg differential extended by the graded Leibniz rule."""
    if a.n != alg.n:
        raise DimensionMismatch(f"form has n={a.n}, algebra has n={alg.n}")
    result = Form.zero(a.n, a.field)
    for key, value in a.items():
        dm = alg.d_monomial(key)
        if not dm.is_zero():
            result = result + dm.scale(value)
    return result


def split_d(alg: LieAlgebraPresentation, a: Form) -> tuple[Form, Form]:
    """(∂a, ∂̄a) from the bidegree components of d.

    Raises:
        IntegrabilityViolation: If d leaves (p+1,q) ⊕ (p,q+1) on some component.
    """
    n = a.n
    holo_part = Form.zero(n, a.field)
    anti_part = Form.zero(n, a.field)
    for p, q in sorted(a.bidegrees()):
        da = ce_d(alg, a.component(p, q))
        d10 = da.component(p + 1, q)
        d01 = da.component(p, q + 1)
        rest = da - d10 - d01
        if not rest.is_zero():
            raise IntegrabilityViolation(
                f"d of a ({p},{q})-form has components in {sorted(rest.bidegrees())}"
            )
        holo_part = holo_part + d10
        anti_part = anti_part + d01
    return holo_part, anti_part


def partial(alg: LieAlgebraPresentation, a: Form) -> Form:
    """∂: the (p+1,q) part of d on each (p,q) component."""
    return split_d(alg, a)[0]


def partial_bar(alg: LieAlgebraPresentation, a: Form) -> Form:
    """∂̄: the (p,q+1) part of d on each (p,q) component."""
    return split_d(alg, a)[1]


def partial_vector(alg: LieAlgebraPresentation, v: VectorForm) -> VectorForm:
    """∂ acting on each slot form independently."""
    return v.map_forms(lambda f: partial(alg, f))


def _form_degree(v: VectorForm) -> Optional[int]:
    degrees = {p + q for p, q in v.bidegrees()}
    if len(degrees) > 1:
        raise ValueError(f"vector form mixes form degrees {sorted(degrees)}")
    return next(iter(degrees), None)


def partial_bar_vector(alg: LieAlgebraPresentation, psi: VectorForm) -> VectorForm:
    """Covariant ∂̄ on T^{1,0}-valued forms.

    (∂̄ψ)^k = ∂̄(ψ^k) + (-1)^{r+s} ψ⌟∂̄(dz^k). On algebras with ∂̄dz^k = 0 this
    is the componentwise operator.
    """
    n = alg.n
    if any(s >= n for s, _ in psi.items()):
        raise ValueError("covariant ∂̄ is defined for (1,0)-vector valued forms")
    degree = _form_degree(psi)
    if degree is None:
        return psi
    sign = -1 if degree % 2 else 1
    slots = {}
    for k in range(n):
        value = partial_bar(alg, psi.slot(k))
        dbar_generator = partial_bar(alg, Form.generator(n, k, alg.field))
        if not dbar_generator.is_zero():
            correction = contract(psi, dbar_generator)
            value = value + correction if sign > 0 else value - correction
        slots[k] = value
    return VectorForm(n, slots, psi.field)


def bracket(alg: LieAlgebraPresentation, phi: VectorForm, psi: VectorForm) -> VectorForm:
    """[φ,ψ] of two Beltrami differentials, read off on the generators.

    [φ,ψ]^k = -ψ⌟φ⌟∂dz^k + φ⌟∂(ψ^k) + ψ⌟∂(φ^k).
    """
    n = alg.n
    slots = {}
    for k in range(n):
        d_gen = partial(alg, Form.generator(n, k, alg.field))
        value = contract(phi, partial(alg, psi.slot(k))) + contract(psi, partial(alg, phi.slot(k)))
        if not d_gen.is_zero():
            value = value - contract(psi, contract(phi, d_gen))
        slots[k] = value
    return VectorForm(n, slots, alg.field)


def bracket_contraction(
    alg: LieAlgebraPresentation, phi: VectorForm, psi: VectorForm, a: Form
) -> Form:
    """[φ,ψ]⌟α expanded through ∂ and contractions on an arbitrary form.

    -∂(ψ⌟φ⌟α) - ψ⌟φ⌟∂α + φ⌟∂(ψ⌟α) + ψ⌟∂(φ⌟α)
    """
    return (
        -partial(alg, contract(psi, contract(phi, a)))
        - contract(psi, contract(phi, partial(alg, a)))
        + contract(phi, partial(alg, contract(psi, a)))
        + contract(psi, partial(alg, contract(phi, a)))
    )


def integrability_defect(alg: LieAlgebraPresentation, phi: VectorForm) -> VectorForm:
    """∂̄φ - ½[φ,φ]; zero iff φ defines an integrable deformation."""
    return partial_bar_vector(alg, phi) - bracket(alg, phi, phi).scale(Fraction(1, 2))
