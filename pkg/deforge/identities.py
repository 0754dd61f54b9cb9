"""
Identity Validation Module.

Every algebraic identity the deformation calculus relies on is registered here
as a validator that evaluates both sides on concrete inputs and compares them.
The fuzzer drives the validators with random exact inputs from a deterministic
per-case seed.
"""

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Optional, Union

import numpy as np

from deforge import DeforgeError
from deforge.calculus import (
    LieAlgebraPresentation,
    bracket,
    bracket_contraction,
    ce_d,
    integrability_defect,
    partial,
    partial_bar,
    partial_bar_vector,
)
from deforge.constants import FUZZ_COEFFICIENT_RANGE, FUZZ_DENOMINATOR_RANGE
from deforge.exterior import (
    Form,
    FrameDegenerate,
    FrameEndomorphism,
    VectorForm,
    contract,
    contract_vector,
    exp_contract,
    extend,
    extend_inverse,
    monomial_basis,
    simul_contract,
)
from deforge.scalars import GaussianRational, ScalarField
from deforge.utils.parallel import run_ordered

logger = logging.getLogger(__name__)

Value = Union[Form, VectorForm]


class DegreeMismatch(DeforgeError):
    """Raised when identity inputs have the wrong type or bidegree."""


@dataclass
class IdentityResult:
    """Outcome of evaluating one identity on one input."""

    name: str
    holds: bool
    applicable: bool = True
    lhs: Optional[Value] = None
    rhs: Optional[Value] = None
    detail: str = ""

    def difference(self) -> Optional[Value]:
        if self.lhs is None or self.rhs is None:
            return None
        return self.lhs - self.rhs


@dataclass
class FuzzSummary:
    """Aggregated fuzzing outcome for one identity."""

    name: str
    cases: int
    passed: int = 0
    not_applicable: int = 0
    first_failure: Optional[int] = None
    failure_detail: str = ""

    @property
    def holds(self) -> bool:
        return self.first_failure is None


IdentityCheck = Callable[[LieAlgebraPresentation, VectorForm, VectorForm, Form], IdentityResult]

# Registry: identity name -> validator
_identities: dict[str, IdentityCheck] = {}


def register_identity(name: str) -> Callable[[IdentityCheck], IdentityCheck]:
    """Decorator registering an identity validator under ``name``."""

    def decorator(fn: IdentityCheck) -> IdentityCheck:
        _identities[name] = fn
        logger.debug(f"Registered identity: {name}")
        return fn

    return decorator


def get_identity(name: str) -> Optional[IdentityCheck]:
    return _identities.get(name)


def get_all_identity_names() -> list[str]:
    return list(_identities)


def resolve_identity_names(selection: Union[str, Sequence[str]]) -> list[str]:
    """Expand "all" or a comma list into registered identity names.

    Raises:
        KeyError: If a name is not registered.
    """
    if isinstance(selection, str):
        selection = [s.strip() for s in selection.split(",") if s.strip()]
    if list(selection) == ["all"]:
        return get_all_identity_names()
    unknown = [s for s in selection if s not in _identities]
    if unknown:
        raise KeyError(f"Unknown identities: {', '.join(unknown)}")
    return list(selection)


def _compare(name: str, lhs: Value, rhs: Value) -> IdentityResult:
    holds = lhs.equals(rhs)
    detail = "" if holds else f"lhs - rhs = {lhs - rhs!r}"
    return IdentityResult(name=name, holds=holds, lhs=lhs, rhs=rhs, detail=detail)


def _require_beltrami(*vector_forms: VectorForm) -> None:
    for v in vector_forms:
        if not v.is_beltrami():
            raise DegreeMismatch("expected a Beltrami differential of type (0,1)")


def validate_identity(
    alg: LieAlgebraPresentation,
    which: str,
    phi: VectorForm,
    psi: VectorForm,
    alpha: Form,
) -> IdentityResult:
    """Evaluate the named identity on (φ, ψ, α).

    Raises:
        KeyError: If the identity is not registered.
        DegreeMismatch: If the inputs do not fit the identity.
    """
    check = get_identity(which)
    if check is None:
        raise KeyError(f"Unknown identity: {which}")
    return check(alg, phi, psi, alpha)


# ----------------------------------------------------------------------
# Identities
# ----------------------------------------------------------------------


@register_identity("extension-commutator")
def _extension_commutator(alg, phi, psi, alpha):
    """d∘e^{ι_φ} = e^{ι_φ}(d + ∂ι_φ - ι_φ∂ + ι_{∂̄φ-½[φ,φ]})."""
    _require_beltrami(phi)
    lhs = ce_d(alg, exp_contract(phi, alpha))
    inner = (
        ce_d(alg, alpha)
        + partial(alg, contract(phi, alpha))
        - contract(phi, partial(alg, alpha))
        + contract(integrability_defect(alg, phi), alpha)
    )
    return _compare("extension-commutator", lhs, exp_contract(phi, inner))


@register_identity("bracket-formula")
def _bracket_formula(alg, phi, psi, alpha):
    """[φ,ψ]⌟α = -∂(ψ⌟φ⌟α) - ψ⌟φ⌟∂α + φ⌟∂(ψ⌟α) + ψ⌟∂(φ⌟α)."""
    _require_beltrami(phi, psi)
    lhs = contract(bracket(alg, phi, psi), alpha)
    return _compare("bracket-formula", lhs, bracket_contraction(alg, phi, psi, alpha))


@register_identity("contraction-reorder")
def _contraction_reorder(alg, phi, psi, alpha):
    """φ⌟φ̄⌟α - (φ⌟φ̄)⌟α = φ̄⌟φ⌟α - (φ̄⌟φ)⌟α."""
    _require_beltrami(phi)
    phibar = phi.conjugate()
    lhs = contract(phi, contract(phibar, alpha)) - contract(contract_vector(phi, phibar), alpha)
    rhs = contract(phibar, contract(phi, alpha)) - contract(contract_vector(phibar, phi), alpha)
    return _compare("contraction-reorder", lhs, rhs)


def _bracket_contraction_sides(alg, phi, alpha):
    phibar = phi.conjugate()
    bar_alpha = contract(phibar, alpha)
    lhs = contract(bracket(alg, phi, phi), bar_alpha)
    main = contract(phi, partial(alg, contract(phi, bar_alpha))).scale(2) - contract(
        phi, contract(phi, partial(alg, bar_alpha))
    )
    closing = partial(alg, contract(phi, contract(phi, bar_alpha)))
    return lhs, main, closing


@register_identity("bracket-contraction")
def _bracket_contraction(alg, phi, psi, alpha):
    """[φ,φ]⌟φ̄⌟α = 2φ⌟∂(φ⌟φ̄⌟α) - φ⌟φ⌟∂(φ̄⌟α) - ∂(φ⌟φ⌟φ̄⌟α)."""
    _require_beltrami(phi)
    lhs, main, closing = _bracket_contraction_sides(alg, phi, alpha)
    return _compare("bracket-contraction", lhs, main - closing)


@register_identity("bracket-contraction-closed")
def _bracket_contraction_closed(alg, phi, psi, alpha):
    """Two-term form, valid where ∂(φ⌟φ⌟φ̄⌟α) = 0."""
    _require_beltrami(phi)
    lhs, main, closing = _bracket_contraction_sides(alg, phi, alpha)
    if not closing.is_zero():
        return IdentityResult(
            name="bracket-contraction-closed",
            holds=True,
            applicable=False,
            detail="∂(φ⌟φ⌟φ̄⌟α) is nonzero",
        )
    return _compare("bracket-contraction-closed", lhs, main)


def dbar_leibniz(alg: LieAlgebraPresentation, psi: VectorForm, alpha: Form) -> IdentityResult:
    """∂̄(ψ⌟α) = (∂̄ψ)⌟α + (-1)^{r+s+1} ψ⌟∂̄α for T^{1,0}-valued ψ of degree r+s."""
    degrees = {p + q for p, q in psi.bidegrees()}
    if len(degrees) > 1 or any(s >= alg.n for s, _ in psi.items()):
        raise DegreeMismatch("ψ must be a homogeneous (1,0)-vector valued form")
    degree = next(iter(degrees), 0)
    lhs = partial_bar(alg, contract(psi, alpha))
    tail = contract(psi, partial_bar(alg, alpha))
    rhs = contract(partial_bar_vector(alg, psi), alpha)
    rhs = rhs - tail if degree % 2 == 0 else rhs + tail
    return _compare("dbar-leibniz", lhs, rhs)


@register_identity("dbar-leibniz")
def _dbar_leibniz(alg, phi, psi, alpha):
    return dbar_leibniz(alg, psi, alpha)


def _double_conjugate_sides(phi, alpha):
    phibar = phi.conjugate()
    lhs = contract(phibar, contract(phibar, contract(phi, alpha))) - contract(
        phi, contract(phibar, contract(phibar, alpha))
    )
    bar_phi = contract_vector(phi, phibar)
    phi_bar = contract_vector(phibar, phi)
    first = contract(phibar, contract(phi_bar, alpha))
    second = contract(bar_phi, contract(phibar, alpha))
    return lhs, first, second


@register_identity("double-conjugate-contraction")
def _double_conjugate(alg, phi, psi, alpha):
    """φ̄⌟φ̄⌟φ⌟α - φ⌟φ̄⌟φ̄⌟α = 2(φ̄⌟(φφ̄)⌟α - (φ̄φ)⌟φ̄⌟α)."""
    _require_beltrami(phi)
    lhs, first, second = _double_conjugate_sides(phi, alpha)
    return _compare("double-conjugate-contraction", lhs, (first - second).scale(2))


@register_identity("double-conjugate-contraction-11")
def _double_conjugate_11(alg, phi, psi, alpha):
    """On (1,1)-forms the right side reduces to 2φ̄⌟(φφ̄)⌟α."""
    _require_beltrami(phi)
    if not alpha.is_bihomogeneous(1, 1):
        raise DegreeMismatch("the (1,1) case needs α of bidegree (1,1)")
    lhs, first, _ = _double_conjugate_sides(phi, alpha)
    return _compare("double-conjugate-contraction-11", lhs, first.scale(2))


@register_identity("bracket-commutes")
def _bracket_commutes(alg, phi, psi, alpha):
    """ι_φ∘ι_{[φ,φ]} = ι_{[φ,φ]}∘ι_φ."""
    _require_beltrami(phi)
    chi = bracket(alg, phi, phi)
    return _compare(
        "bracket-commutes", contract(phi, contract(chi, alpha)), contract(chi, contract(phi, alpha))
    )


def twisted_extension_endomorphism(phi: VectorForm) -> FrameEndomorphism:
    """1 - φ∘φ̄ + φ̄."""
    n = phi.n
    a = FrameEndomorphism.from_vector_form(phi)
    b = FrameEndomorphism.from_vector_form(phi.conjugate())
    return FrameEndomorphism.identity(n, phi.field) - a @ b + b


def inverse_twisted_endomorphism(phi: VectorForm) -> FrameEndomorphism:
    """P - φ̄∘P with P = (1 - φ∘φ̄)^{-1}."""
    n = phi.n
    a = FrameEndomorphism.from_vector_form(phi)
    b = FrameEndomorphism.from_vector_form(phi.conjugate())
    p = (FrameEndomorphism.identity(n, phi.field) - a @ b).inverse()
    return p - b @ p


@register_identity("twisted-extension")
def _twisted_extension(alg, phi, psi, alpha):
    """e^{-ι_φ}∘e^{ι_φ|ι_φ̄}α = (1 - φ̄φ + φ̄)⨝α."""
    _require_beltrami(phi)
    lhs = exp_contract(-phi, extend(phi, alpha))
    return _compare(
        "twisted-extension", lhs, simul_contract(twisted_extension_endomorphism(phi), alpha)
    )


@register_identity("inverse-extension")
def _inverse_extension(alg, phi, psi, alpha):
    """e^{-ι_φ|-ι_φ̄}∘e^{ι_φ}α = ((1-φ̄φ)^{-1} - (1-φ̄φ)^{-1}φ̄)⨝α."""
    _require_beltrami(phi)
    try:
        lhs = extend_inverse(phi, exp_contract(phi, alpha))
        rhs = simul_contract(inverse_twisted_endomorphism(phi), alpha)
    except FrameDegenerate as e:
        return IdentityResult(name="inverse-extension", holds=True, applicable=False, detail=str(e))
    return _compare("inverse-extension", lhs, rhs)


# ----------------------------------------------------------------------
# Random inputs and fuzzing
# ----------------------------------------------------------------------


def random_scalar(rng: np.random.Generator, field: ScalarField) -> Any:
    """Gaussian rational with small numerators and denominators."""
    parts = []
    for _ in range(2):
        num = int(rng.integers(-FUZZ_COEFFICIENT_RANGE, FUZZ_COEFFICIENT_RANGE + 1))
        den = int(rng.integers(1, FUZZ_DENOMINATOR_RANGE + 1))
        parts.append(Fraction(num, den))
    return field.coerce(GaussianRational(parts[0], parts[1]))


def random_form(
    rng: np.random.Generator,
    n: int,
    field: ScalarField,
    bidegree: Optional[tuple[int, int]] = None,
    max_terms: int = 4,
) -> Form:
    """Random bihomogeneous form with at most ``max_terms`` monomials."""
    if bidegree is None:
        bidegree = (int(rng.integers(0, n + 1)), int(rng.integers(0, n + 1)))
    basis = monomial_basis(n, *bidegree)
    count = min(len(basis), int(rng.integers(1, max_terms + 1)))
    picks = rng.choice(len(basis), size=count, replace=False)
    return Form(n, {basis[int(i)]: random_scalar(rng, field) for i in picks}, field)


def random_beltrami(
    rng: np.random.Generator, n: int, field: ScalarField, density: float = 0.5
) -> VectorForm:
    rows = [
        [random_scalar(rng, field) if rng.random() < density else 0 for _ in range(n)]
        for _ in range(n)
    ]
    return VectorForm.beltrami(n, rows, field)


def _case_inputs(alg: LieAlgebraPresentation, name: str, seed: int, case: int):
    rng = np.random.default_rng([seed, case])
    n, field = alg.n, alg.field
    phi = random_beltrami(rng, n, field)
    psi = random_beltrami(rng, n, field)
    bidegree = (1, 1) if name == "double-conjugate-contraction-11" else None
    alpha = random_form(rng, n, field, bidegree)
    return phi, psi, alpha


def fuzz_identity(
    alg: LieAlgebraPresentation, name: str, cases: int, seed: int, workers: Optional[int] = None
) -> FuzzSummary:
    """Validate ``name`` on ``cases`` random inputs; case k uses seed sequence (seed, k)."""
    check = get_identity(name)
    if check is None:
        raise KeyError(f"Unknown identity: {name}")

    def run_case(case: int) -> IdentityResult:
        return check(alg, *_case_inputs(alg, name, seed, case))

    results = run_ordered(run_case, range(cases), workers)
    summary = FuzzSummary(name=name, cases=cases)
    for case, result in enumerate(results):
        if not result.applicable:
            summary.not_applicable += 1
        elif result.holds:
            summary.passed += 1
        elif summary.first_failure is None:
            summary.first_failure = case
            summary.failure_detail = result.detail
            logger.error(f"Identity {name} failed on {alg.name} case {case}: {result.detail}")
    logger.info(
        f"Identity {name} on {alg.name}: {summary.passed} passed, "
        f"{summary.not_applicable} not applicable, {cases} cases"
    )
    return summary
