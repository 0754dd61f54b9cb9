"""
Exterior Algebra Module.

This module implements the bigraded exterior algebra over the complexified dual
of a Lie algebra with complex structure, together with the contraction and
extension operators used by the deformation machinery.

Coframe generators are numbered 0..2n-1: holomorphic dz^k is generator k and
antiholomorphic dz̄^k is generator n+k. A monomial is a strictly increasing
tuple of generators, which is exactly the canonical order dz^I ∧ dz̄^J.
"""

import logging
from collections.abc import Iterable, Iterator, Mapping
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import factorial
from typing import Any, Optional

from deforge import DeforgeError
from deforge.linalg import Matrix, SingularMatrix
from deforge.scalars import EXACT, ScalarField

logger = logging.getLogger(__name__)

Monomial = tuple[int, ...]


class DimensionMismatch(DeforgeError):
    """Raised when forms over different ambient algebras are combined."""


class FrameDegenerate(DeforgeError):
    """Raised when 1 - φ∘φ̄ is singular and the extension cannot be inverted."""


# ----------------------------------------------------------------------
# Monomial helpers
# ----------------------------------------------------------------------


@lru_cache(maxsize=65536)
def merge_monomials(a: Monomial, b: Monomial) -> Optional[tuple[int, Monomial]]:
    """Wedge two monomials: (sign, sorted key), or None when a factor repeats."""
    if not a:
        return 1, b
    if not b:
        return 1, a
    seen = set(a)
    if any(g in seen for g in b):
        return None
    inversions = 0
    for y in b:
        inversions += sum(1 for x in a if x > y)
    sign = -1 if inversions % 2 else 1
    return sign, tuple(sorted(a + b))


def split_monomial(key: Monomial, n: int) -> tuple[Monomial, Monomial]:
    """Split a key into (holomorphic indices, antiholomorphic indices), both 0-based."""
    holo = tuple(g for g in key if g < n)
    anti = tuple(g - n for g in key if g >= n)
    return holo, anti


def monomial_bidegree(key: Monomial, n: int) -> tuple[int, int]:
    p = sum(1 for g in key if g < n)
    return p, len(key) - p


@lru_cache(maxsize=1024)
def monomial_basis(n: int, p: int, q: int) -> tuple[Monomial, ...]:
    """Canonical basis of Λ^{p,q}: holomorphic index sets major, antiholomorphic minor."""
    if p < 0 or q < 0 or p > n or q > n:
        return ()
    return tuple(
        holo + tuple(n + j for j in anti)
        for holo in combinations(range(n), p)
        for anti in combinations(range(n), q)
    )


def _conjugate_key(key: Monomial, n: int) -> tuple[int, Monomial]:
    holo, anti = split_monomial(key, n)
    sign = -1 if (len(holo) * len(anti)) % 2 else 1
    return sign, anti + tuple(n + k for k in holo)


def _generator_name(g: int, n: int) -> str:
    return f"w{g + 1}" if g < n else f"w~{g - n + 1}"


# ----------------------------------------------------------------------
# Form
# ----------------------------------------------------------------------


class Form:
    """Sparse element of the bigraded exterior algebra.

    Forms are immutable; zero coefficients are never stored. A form may mix
    bidegrees, use ``component`` to extract one.
    """

    __slots__ = ("n", "field", "_terms")

    def __init__(self, n: int, terms: Mapping[Monomial, Any] = None, field: ScalarField = EXACT):
        clean: dict[Monomial, Any] = {}
        for key, value in (terms or {}).items():
            key = tuple(key)
            if any(g < 0 or g >= 2 * n for g in key) or list(key) != sorted(set(key)):
                raise ValueError(f"invalid monomial {key} for n={n}")
            value = field.coerce(value)
            if not field.is_zero(value):
                clean[key] = value
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "_terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("Form is immutable")

    @classmethod
    def _raw(cls, n: int, terms: dict[Monomial, Any], field: ScalarField) -> "Form":
        form = cls.__new__(cls)
        is_zero = field.is_zero
        object.__setattr__(form, "n", n)
        object.__setattr__(form, "field", field)
        object.__setattr__(form, "_terms", {k: v for k, v in terms.items() if not is_zero(v)})
        return form

    # Constructors -----------------------------------------------------

    @classmethod
    def zero(cls, n: int, field: ScalarField = EXACT) -> "Form":
        return cls._raw(n, {}, field)

    @classmethod
    def one(cls, n: int, field: ScalarField = EXACT) -> "Form":
        return cls._raw(n, {(): field.one}, field)

    @classmethod
    def generator(cls, n: int, g: int, field: ScalarField = EXACT, coefficient: Any = 1) -> "Form":
        return cls(n, {(g,): coefficient}, field)

    @classmethod
    def monomial(
        cls,
        n: int,
        holo: Iterable[int],
        anti: Iterable[int],
        coefficient: Any = 1,
        field: ScalarField = EXACT,
    ) -> "Form":
        """c · dz^{i1}∧...∧dz̄^{j1}∧... with 0-based indices in any order (sign tracked)."""
        result = cls.one(n, field).scale(coefficient)
        for k in holo:
            result = result.wedge(cls.generator(n, k, field))
        for k in anti:
            result = result.wedge(cls.generator(n, n + k, field))
        return result

    @classmethod
    def from_vector(
        cls, n: int, basis: Iterable[Monomial], vector: Iterable[Any], field: ScalarField = EXACT
    ) -> "Form":
        return cls._raw(n, dict(zip(basis, vector)), field)

    # Access -----------------------------------------------------------

    def items(self) -> Iterator[tuple[Monomial, Any]]:
        return iter(self._terms.items())

    def keys(self) -> Iterator[Monomial]:
        return iter(self._terms)

    def coefficient(self, key: Monomial) -> Any:
        return self._terms.get(tuple(key), self.field.zero)

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def bidegrees(self) -> set[tuple[int, int]]:
        return {monomial_bidegree(k, self.n) for k in self._terms}

    @property
    def bidegree(self) -> tuple[int, int]:
        """Bidegree of a homogeneous nonzero form.

        Raises:
            ValueError: If the form is zero or mixes bidegrees.
        """
        degrees = self.bidegrees()
        if len(degrees) != 1:
            raise ValueError(f"form is not bihomogeneous: {sorted(degrees)}")
        return next(iter(degrees))

    def is_bihomogeneous(self, p: int, q: int) -> bool:
        return all(monomial_bidegree(k, self.n) == (p, q) for k in self._terms)

    def component(self, p: int, q: int) -> "Form":
        n = self.n
        terms = {k: v for k, v in self._terms.items() if monomial_bidegree(k, n) == (p, q)}
        return Form._raw(n, terms, self.field)

    def degree_component(self, d: int) -> "Form":
        return Form._raw(self.n, {k: v for k, v in self._terms.items() if len(k) == d}, self.field)

    def vector(self, basis: Iterable[Monomial]) -> tuple:
        return tuple(self.coefficient(k) for k in basis)

    # Arithmetic -------------------------------------------------------

    def _check(self, other: "Form") -> None:
        if not isinstance(other, Form):
            raise TypeError(f"expected Form, got {type(other).__name__}")
        if other.n != self.n:
            raise DimensionMismatch(f"ambient dimensions differ: {self.n} vs {other.n}")
        self.field.check_compatible(other.field)

    def __add__(self, other: "Form") -> "Form":
        self._check(other)
        terms = dict(self._terms)
        for k, v in other._terms.items():
            terms[k] = terms[k] + v if k in terms else v
        return Form._raw(self.n, terms, self.field)

    def __sub__(self, other: "Form") -> "Form":
        return self + (-other)

    def __neg__(self) -> "Form":
        return Form._raw(self.n, {k: -v for k, v in self._terms.items()}, self.field)

    def scale(self, c: Any) -> "Form":
        c = self.field.coerce(c)
        return Form._raw(self.n, {k: c * v for k, v in self._terms.items()}, self.field)

    def __mul__(self, c: Any) -> "Form":
        if isinstance(c, (Form, VectorForm)):
            return NotImplemented
        return self.scale(c)

    __rmul__ = __mul__

    def wedge(self, other: "Form") -> "Form":
        self._check(other)
        terms: dict[Monomial, Any] = {}
        for ka, va in self._terms.items():
            for kb, vb in other._terms.items():
                merged = merge_monomials(ka, kb)
                if merged is None:
                    continue
                sign, key = merged
                value = va * vb if sign > 0 else -(va * vb)
                terms[key] = terms[key] + value if key in terms else value
        return Form._raw(self.n, terms, self.field)

    def __xor__(self, other: "Form") -> "Form":
        return self.wedge(other)

    def conjugate(self) -> "Form":
        conj = self.field.conj
        terms = {}
        for key, value in self._terms.items():
            sign, ckey = _conjugate_key(key, self.n)
            terms[ckey] = conj(value) if sign > 0 else -conj(value)
        return Form._raw(self.n, terms, self.field)

    def is_real(self) -> bool:
        return self.equals(self.conjugate())

    def interior(self, g: int) -> "Form":
        """Interior product with the frame vector dual to generator g."""
        terms = {}
        for key, value in self._terms.items():
            if g in key:
                pos = key.index(g)
                terms[key[:pos] + key[pos + 1 :]] = -value if pos % 2 else value
        return Form._raw(self.n, terms, self.field)

    def map_coefficients(self, fn) -> "Form":
        return Form._raw(self.n, {k: fn(v) for k, v in self._terms.items()}, self.field)

    def equals(self, other: "Form") -> bool:
        self._check(other)
        return (self - other).is_zero()

    def __eq__(self, other):
        if not isinstance(other, Form):
            return NotImplemented
        if other.n != self.n or self.field != other.field:
            return False
        return self.equals(other)

    __hash__ = None  # type: ignore[assignment]

    def format(self) -> str:
        """Text in the structure-constant file syntax, 1-based generator names."""
        if not self._terms:
            return "0"
        parts = []
        for key in sorted(self._terms, key=lambda k: (len(k), k)):
            coefficient = self.field.format(self._terms[key])
            if key:
                names = "^".join(_generator_name(g, self.n) for g in key)
                parts.append(f"({coefficient})*{names}")
            else:
                parts.append(f"({coefficient})")
        return " + ".join(parts)

    def __repr__(self):
        return f"Form(n={self.n}, {self.format()})"


def wedge(a: Form, b: Form) -> Form:
    """Exterior product; graded anticommutative and associative."""
    return a.wedge(b)


def conjugate(a: Form) -> Form:
    """c·dz^I∧dz̄^J ↦ (−1)^{|I||J|}·conj(c)·dz^J∧dz̄^I."""
    return a.conjugate()


def dz(n: int, k: int, field: ScalarField = EXACT) -> Form:
    return Form.generator(n, k, field)


def dzbar(n: int, k: int, field: ScalarField = EXACT) -> Form:
    return Form.generator(n, n + k, field)


# ----------------------------------------------------------------------
# VectorForm
# ----------------------------------------------------------------------


class VectorForm:
    """Form valued in the complexified tangent frame.

    ``slots`` maps a frame slot to its coefficient form: slot k < n is the
    (1,0)-vector e_k, slot n+k is ē_k. A Beltrami differential has only
    holomorphic slots with (0,1) coefficients.
    """

    __slots__ = ("n", "field", "_slots")

    def __init__(self, n: int, slots: Mapping[int, Form] = None, field: ScalarField = EXACT):
        clean = {}
        for slot, form in (slots or {}).items():
            if not 0 <= slot < 2 * n:
                raise ValueError(f"invalid slot {slot} for n={n}")
            if form.n != n:
                raise DimensionMismatch(f"slot form has n={form.n}, expected {n}")
            field.check_compatible(form.field)
            if not form.is_zero():
                clean[slot] = form
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "_slots", clean)

    def __setattr__(self, name, value):
        raise AttributeError("VectorForm is immutable")

    @classmethod
    def zero(cls, n: int, field: ScalarField = EXACT) -> "VectorForm":
        return cls(n, {}, field)

    @classmethod
    def beltrami(cls, n: int, coefficients: Iterable[Iterable[Any]], field: ScalarField = EXACT):
        """φ with φ^k = Σ_j a[k][j] dz̄^j."""
        slots = {}
        for k, row in enumerate(coefficients):
            slots[k] = Form(n, {(n + j,): a for j, a in enumerate(row)}, field)
        return cls(n, slots, field)

    def slot(self, s: int) -> Form:
        return self._slots.get(s, Form.zero(self.n, self.field))

    def items(self) -> Iterator[tuple[int, Form]]:
        return iter(self._slots.items())

    def is_zero(self) -> bool:
        return not self._slots

    def bidegrees(self) -> set[tuple[int, int]]:
        out: set[tuple[int, int]] = set()
        for form in self._slots.values():
            out |= form.bidegrees()
        return out

    def is_beltrami(self) -> bool:
        return all(s < self.n for s in self._slots) and all(
            f.is_bihomogeneous(0, 1) for f in self._slots.values()
        )

    def _check(self, other: "VectorForm") -> None:
        if not isinstance(other, VectorForm):
            raise TypeError(f"expected VectorForm, got {type(other).__name__}")
        if other.n != self.n:
            raise DimensionMismatch(f"ambient dimensions differ: {self.n} vs {other.n}")
        self.field.check_compatible(other.field)

    def __add__(self, other: "VectorForm") -> "VectorForm":
        self._check(other)
        slots = dict(self._slots)
        for s, f in other._slots.items():
            slots[s] = slots[s] + f if s in slots else f
        return VectorForm(self.n, slots, self.field)

    def __sub__(self, other: "VectorForm") -> "VectorForm":
        return self + (-other)

    def __neg__(self) -> "VectorForm":
        return VectorForm(self.n, {s: -f for s, f in self._slots.items()}, self.field)

    def scale(self, c: Any) -> "VectorForm":
        return VectorForm(self.n, {s: f.scale(c) for s, f in self._slots.items()}, self.field)

    def __mul__(self, c: Any) -> "VectorForm":
        if isinstance(c, (Form, VectorForm)):
            return NotImplemented
        return self.scale(c)

    __rmul__ = __mul__

    def map_forms(self, fn) -> "VectorForm":
        return VectorForm(self.n, {s: fn(f) for s, f in self._slots.items()}, self.field)

    def conjugate(self) -> "VectorForm":
        n = self.n
        return VectorForm(
            n, {(s + n) % (2 * n): f.conjugate() for s, f in self._slots.items()}, self.field
        )

    def equals(self, other: "VectorForm") -> bool:
        self._check(other)
        return (self - other).is_zero()

    def __eq__(self, other):
        if not isinstance(other, VectorForm):
            return NotImplemented
        return other.n == self.n and self.field == other.field and self.equals(other)

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self):
        body = ", ".join(
            f"{_slot_name(s, self.n)}: {f.format()}" for s, f in sorted(self._slots.items())
        )
        return f"VectorForm(n={self.n}, {{{body}}})"


def _slot_name(s: int, n: int) -> str:
    return f"e{s + 1}" if s < n else f"e~{s - n + 1}"


def contract(phi: VectorForm, a: Form) -> Form:
    """ι_V α = Σ_slot V[slot] ∧ ι_slot α.

    For a Beltrami φ this is the even derivation with ι_φ(dz^k) = φ^k.
    """
    if phi.n != a.n:
        raise DimensionMismatch(f"ambient dimensions differ: {phi.n} vs {a.n}")
    phi.field.check_compatible(a.field)
    result = Form.zero(a.n, a.field)
    for slot, form in phi.items():
        inner = a.interior(slot)
        if not inner.is_zero():
            result = result + form.wedge(inner)
    return result


def contract_vector(v: VectorForm, w: VectorForm) -> VectorForm:
    """Slotwise contraction (v⌟w)[s] = v⌟(w[s]); as frame maps this is v∘w."""
    v._check(w)
    return VectorForm(w.n, {s: contract(v, f) for s, f in w.items()}, w.field)


def exp_contract(phi: VectorForm, a: Form) -> Form:
    """e^{ι_φ}α = Σ_k ι_φ^k α / k!, truncated at the form degree of α."""
    result = a
    term = a
    max_degree = max((len(k) for k in a.keys()), default=0)
    for k in range(1, max_degree + 1):
        term = contract(phi, term)
        if term.is_zero():
            break
        result = result + term.scale(Fraction(1, factorial(k)))
    return result


# ----------------------------------------------------------------------
# Frame endomorphisms and simultaneous contraction
# ----------------------------------------------------------------------


class FrameEndomorphism:
    """Linear map of the coframe, E[h][g] = coefficient of generator h in the image of g.

    Acting on forms by the induced exterior power: Λ(A)Λ(B) = Λ(A∘B).
    """

    __slots__ = ("n", "matrix")

    def __init__(self, n: int, matrix: Matrix):
        if matrix.shape != (2 * n, 2 * n):
            raise DimensionMismatch(
                f"frame endomorphism must be {2 * n}x{2 * n}, got {matrix.shape}"
            )
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "matrix", matrix)

    def __setattr__(self, name, value):
        raise AttributeError("FrameEndomorphism is immutable")

    @property
    def field(self) -> ScalarField:
        return self.matrix.field

    @classmethod
    def identity(cls, n: int, field: ScalarField = EXACT) -> "FrameEndomorphism":
        return cls(n, Matrix.identity(2 * n, field))

    @classmethod
    def from_vector_form(cls, v: VectorForm) -> "FrameEndomorphism":
        """Endomorphism dz^g ↦ v[g] of a vector form with 1-form coefficients."""
        n = v.n
        columns = []
        for g in range(2 * n):
            image = v.slot(g)
            if any(len(k) != 1 for k in image.keys()):
                raise ValueError("frame endomorphisms need 1-form coefficients")
            columns.append([image.coefficient((h,)) for h in range(2 * n)])
        return cls(n, Matrix.from_columns(columns, 2 * n, v.field))

    def to_vector_form(self) -> VectorForm:
        n = self.n
        return VectorForm(
            n,
            {
                g: Form._raw(n, {(h,): self.matrix[h, g] for h in range(2 * n)}, self.field)
                for g in range(2 * n)
            },
            self.field,
        )

    def __add__(self, other: "FrameEndomorphism") -> "FrameEndomorphism":
        return FrameEndomorphism(self.n, self.matrix + other.matrix)

    def __sub__(self, other: "FrameEndomorphism") -> "FrameEndomorphism":
        return FrameEndomorphism(self.n, self.matrix - other.matrix)

    def __neg__(self) -> "FrameEndomorphism":
        return FrameEndomorphism(self.n, -self.matrix)

    def scale(self, c: Any) -> "FrameEndomorphism":
        return FrameEndomorphism(self.n, self.matrix.scale(c))

    def __matmul__(self, other: "FrameEndomorphism") -> "FrameEndomorphism":
        """Composition self∘other."""
        return FrameEndomorphism(self.n, self.matrix @ other.matrix)

    def inverse(self) -> "FrameEndomorphism":
        try:
            return FrameEndomorphism(self.n, self.matrix.inverse())
        except SingularMatrix as e:
            raise FrameDegenerate(f"frame endomorphism is singular: {e}") from e

    def image(self, g: int) -> Form:
        return Form._raw(self.n, {(h,): self.matrix[h, g] for h in range(2 * self.n)}, self.field)

    def is_zero(self) -> bool:
        return self.matrix.is_zero()

    def conjugate(self) -> "FrameEndomorphism":
        """Ē with Λ(Ē)ᾱ = conj(Λ(E)α)."""
        return FrameEndomorphism.from_vector_form(self.to_vector_form().conjugate())

    def equals(self, other: "FrameEndomorphism") -> bool:
        return self.n == other.n and self.matrix.equals(other.matrix)

    def __repr__(self):
        return f"FrameEndomorphism(n={self.n}, {self.field.name})"


def simul_contract(endo: FrameEndomorphism, a: Form) -> Form:
    """(E⨝α): apply E to every factor of every monomial at once.

    Not additive in E. The identity endomorphism acts as the identity map.
    """
    if endo.n != a.n:
        raise DimensionMismatch(f"ambient dimensions differ: {endo.n} vs {a.n}")
    endo.field.check_compatible(a.field)
    images = [endo.image(g) for g in range(2 * a.n)]
    result = Form.zero(a.n, a.field)
    for key, value in a.items():
        term = Form.one(a.n, a.field).scale(value)
        for g in key:
            term = term.wedge(images[g])
            if term.is_zero():
                break
        result = result + term
    return result


def beltrami_endomorphism(phi: VectorForm) -> FrameEndomorphism:
    """φ as a frame map: column k carries φ^k in the antiholomorphic rows."""
    if not phi.is_beltrami():
        raise ValueError("expected a Beltrami differential")
    return FrameEndomorphism.from_vector_form(phi)


def extension_endomorphism(phi: VectorForm) -> FrameEndomorphism:
    """X = 1 + φ + φ̄."""
    n = phi.n
    return (
        FrameEndomorphism.identity(n, phi.field)
        + FrameEndomorphism.from_vector_form(phi)
        + FrameEndomorphism.from_vector_form(phi.conjugate())
    )


def extend(phi: VectorForm, a: Form) -> Form:
    """e^{ι_φ|ι_φ̄}α = Λ(1 + φ + φ̄)α."""
    return simul_contract(extension_endomorphism(phi), a)


def extend_blockwise(phi: VectorForm, a: Form) -> Form:
    """Monomial-by-monomial definition: e^{ι_φ}(dz^I) ∧ e^{ι_φ̄}(dz̄^J)."""
    n = a.n
    phibar = phi.conjugate()
    result = Form.zero(n, a.field)
    for key, value in a.items():
        holo = tuple(g for g in key if g < n)
        anti = tuple(g for g in key if g >= n)
        left = exp_contract(phi, Form._raw(n, {holo: value}, a.field))
        right = exp_contract(phibar, Form._raw(n, {anti: a.field.one}, a.field))
        result = result + left.wedge(right)
    return result


def extend_inverse(phi: VectorForm, a: Form) -> Form:
    """Inverse of ``extend``: Λ((1 + φ + φ̄)^{-1}).

    Raises:
        FrameDegenerate: If 1 - φ∘φ̄ is singular.
    """
    return simul_contract(extension_endomorphism(phi).inverse(), a)
