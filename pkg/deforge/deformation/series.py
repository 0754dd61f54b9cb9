"""
Truncated bi-power series in (t, t̄).

A ``BiSeries`` stores coefficients indexed by pairs of multi-indices (i, j),
standing for t^i t̄^j, with |i| + |j| bounded by the truncation order. Values are
forms, vector forms, frame endomorphisms or matrices; every product truncates so
that the degree-k output only reads input degrees ≤ k.
"""

import operator
from collections.abc import Callable, Iterator, Sequence
from functools import lru_cache
from typing import Any, Optional, Union

from deforge.calculus import LieAlgebraPresentation, ce_d, partial, partial_bar
from deforge.exterior import Form, FrameEndomorphism, VectorForm, contract, contract_vector
from deforge.linalg import Matrix

Index = tuple[int, ...]
BiIndex = tuple[Index, Index]
Value = Union[Form, VectorForm, FrameEndomorphism, Matrix]

_KINDS = {Form: "form", VectorForm: "vector", FrameEndomorphism: "frame", Matrix: "matrix"}


@lru_cache(maxsize=256)
def multi_indices(params: int, degree: int) -> tuple[Index, ...]:
    """All multi-indices of length ``params`` and total ``degree``."""
    if params == 1:
        return ((degree,),)
    out = []
    for first in range(degree, -1, -1):
        for rest in multi_indices(params - 1, degree - first):
            out.append((first,) + rest)
    return tuple(out)


@lru_cache(maxsize=256)
def bi_indices(params: int, degree: int) -> tuple[BiIndex, ...]:
    """All (i, j) with |i| + |j| = degree, holomorphic-heavy first."""
    return tuple(
        (i, j)
        for a in range(degree, -1, -1)
        for i in multi_indices(params, a)
        for j in multi_indices(params, degree - a)
    )


def add_index(a: Index, b: Index) -> Index:
    return tuple(x + y for x, y in zip(a, b))


def bi_degree(index: BiIndex) -> int:
    return sum(index[0]) + sum(index[1])


def _normalize_index(value: Union[int, Sequence[int]]) -> Index:
    return (value,) if isinstance(value, int) else tuple(value)


class BiSeries:
    """Immutable truncated series Σ c_{i,j} t^i t̄^j."""

    __slots__ = ("order", "params", "zero", "_terms")

    def __init__(
        self,
        order: int,
        zero: Value,
        terms: Optional[dict[BiIndex, Value]] = None,
        params: int = 1,
    ):
        if order < 0:
            raise ValueError(f"truncation order must be non-negative, got {order}")
        if params < 1:
            raise ValueError(f"parameter count must be positive, got {params}")
        if type(zero) not in _KINDS:
            raise TypeError(f"unsupported coefficient type {type(zero).__name__}")
        clean: dict[BiIndex, Value] = {}
        for (i, j), value in (terms or {}).items():
            i, j = _normalize_index(i), _normalize_index(j)
            if len(i) != params or len(j) != params:
                raise ValueError(f"index {(i, j)} does not match {params} parameter(s)")
            if sum(i) + sum(j) > order or value.is_zero():
                continue
            clean[(i, j)] = value
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "zero", zero)
        object.__setattr__(self, "_terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("BiSeries is immutable")

    @classmethod
    def constant(cls, value: Value, order: int, params: int = 1) -> "BiSeries":
        origin = (0,) * params
        return cls(order, _zero_like(value), {(origin, origin): value}, params)

    @property
    def kind(self) -> str:
        return _KINDS[type(self.zero)]

    @property
    def field(self):
        return self.zero.field

    @property
    def origin(self) -> BiIndex:
        return (0,) * self.params, (0,) * self.params

    def coefficient(
        self, i: Union[int, Sequence[int]], j: Union[int, Sequence[int], None] = None
    ) -> Value:
        """Coefficient of t^i t̄^j; integers are accepted for one parameter."""
        i = _normalize_index(i)
        j = (0,) * self.params if j is None else _normalize_index(j)
        return self._terms.get((i, j), self.zero)

    def at(self, index: BiIndex) -> Value:
        return self._terms.get(index, self.zero)

    def items(self) -> Iterator[tuple[BiIndex, Value]]:
        for key in sorted(self._terms, key=lambda k: (bi_degree(k), k)):
            yield key, self._terms[key]

    def terms(self) -> dict[BiIndex, Value]:
        return dict(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_holomorphic(self) -> bool:
        return all(not any(j) for _, j in self._terms)

    def min_degree(self) -> Optional[int]:
        return min((bi_degree(k) for k in self._terms), default=None)

    def degree_part(self, degree: int) -> "BiSeries":
        return BiSeries(
            self.order,
            self.zero,
            {k: v for k, v in self._terms.items() if bi_degree(k) == degree},
            self.params,
        )

    def truncate(self, order: int) -> "BiSeries":
        return BiSeries(min(order, self.order), self.zero, self._terms, self.params)

    def with_terms(self, updates: dict[BiIndex, Value]) -> "BiSeries":
        merged = dict(self._terms)
        merged.update(updates)
        return BiSeries(self.order, self.zero, merged, self.params)

    # Arithmetic ------------------------------------------------------------

    def _check(self, other: "BiSeries") -> None:
        if self.params != other.params:
            raise ValueError(f"parameter counts differ: {self.params} vs {other.params}")
        if self.kind != other.kind:
            raise TypeError(f"cannot combine {self.kind} and {other.kind} series")

    def __add__(self, other: "BiSeries") -> "BiSeries":
        self._check(other)
        terms = dict(self._terms)
        for key, value in other._terms.items():
            terms[key] = terms[key] + value if key in terms else value
        return BiSeries(min(self.order, other.order), self.zero, terms, self.params)

    def __sub__(self, other: "BiSeries") -> "BiSeries":
        return self + (-other)

    def __neg__(self) -> "BiSeries":
        return BiSeries(self.order, self.zero, {k: -v for k, v in self._terms.items()}, self.params)

    def scale(self, c: Any) -> "BiSeries":
        terms = {k: v.scale(c) for k, v in self._terms.items()}
        return BiSeries(self.order, self.zero, terms, self.params)

    def map(self, fn: Callable[[Value], Value], zero: Optional[Value] = None) -> "BiSeries":
        """Apply a linear map to every coefficient."""
        new_zero = zero if zero is not None else fn(self.zero)
        terms = {k: fn(v) for k, v in self._terms.items()}
        return BiSeries(self.order, new_zero, terms, self.params)

    def convolve(
        self, other: "BiSeries", fn: Callable[[Value, Value], Value], zero: Value
    ) -> "BiSeries":
        """Cauchy product for a bilinear ``fn``, truncated at the smaller order."""
        if self.params != other.params:
            raise ValueError(f"parameter counts differ: {self.params} vs {other.params}")
        order = min(self.order, other.order)
        terms: dict[BiIndex, Value] = {}
        for (ia, ja), a in self._terms.items():
            da = sum(ia) + sum(ja)
            for (ib, jb), b in other._terms.items():
                if da + sum(ib) + sum(jb) > order:
                    continue
                value = fn(a, b)
                if value.is_zero():
                    continue
                key = (add_index(ia, ib), add_index(ja, jb))
                terms[key] = terms[key] + value if key in terms else value
        return BiSeries(order, zero, terms, self.params)

    def conjugate(self) -> "BiSeries":
        """Conjugate series: coefficient (i, j) becomes conj(coefficient (j, i))."""
        terms = {(j, i): v.conjugate() for (i, j), v in self._terms.items()}
        return BiSeries(self.order, self.zero, terms, self.params)

    def is_real(self) -> bool:
        return self.equals(self.conjugate())

    def equals(self, other: "BiSeries") -> bool:
        if self.params != other.params or self.kind != other.kind:
            return False
        keys = set(self._terms) | set(other._terms)
        return all(self.at(k).equals(other.at(k)) for k in keys)

    def __eq__(self, other):
        if not isinstance(other, BiSeries):
            return NotImplemented
        return self.equals(other)

    __hash__ = None

    def evaluate(self, t: Sequence[Any]) -> Value:
        """Sum the truncated series at parameter values ``t``."""
        if len(t) != self.params:
            raise ValueError(f"expected {self.params} parameter value(s)")
        fld = self.field
        values = [fld.coerce(x) for x in t]
        total = self.zero
        for (i, j), coefficient in self._terms.items():
            scalar = fld.one
            for x, a, b in zip(values, i, j):
                scalar = scalar * x**a * fld.conj(x) ** b
            total = total + coefficient.scale(scalar)
        return total

    def __repr__(self):
        return (
            f"BiSeries(kind={self.kind}, order={self.order}, params={self.params}, "
            f"terms={len(self._terms)})"
        )


def _zero_like(value: Value) -> Value:
    if isinstance(value, Form):
        return Form.zero(value.n, value.field)
    if isinstance(value, VectorForm):
        return VectorForm.zero(value.n, value.field)
    if isinstance(value, FrameEndomorphism):
        return FrameEndomorphism(value.n, Matrix.zeros(2 * value.n, 2 * value.n, value.field))
    return Matrix.zeros(value.nrows, value.ncols, value.field)


def _identity_like(value: Union[FrameEndomorphism, Matrix]) -> Union[FrameEndomorphism, Matrix]:
    if isinstance(value, FrameEndomorphism):
        return FrameEndomorphism.identity(value.n, value.field)
    return Matrix.identity(value.nrows, value.field)


# ----------------------------------------------------------------------
# Series operations
# ----------------------------------------------------------------------


def wedge_series(a: BiSeries, b: BiSeries) -> BiSeries:
    return a.convolve(b, lambda x, y: x.wedge(y), a.zero)


def contract_series(phi: BiSeries, a: BiSeries) -> BiSeries:
    """ι_φ(t) α(t) for a vector-form series φ."""
    return phi.convolve(a, contract, a.zero)


def contract_vector_series(v: BiSeries, w: BiSeries) -> BiSeries:
    return v.convolve(w, contract_vector, w.zero)


def compose_series(a: BiSeries, b: BiSeries) -> BiSeries:
    """a(t)∘b(t) for frame-endomorphism or matrix series."""
    zero = a.zero if a.kind == "frame" else Matrix.zeros(a.zero.nrows, b.zero.ncols, a.field)
    return a.convolve(b, operator.matmul, zero)


def frame_series(v: BiSeries) -> BiSeries:
    """Coefficientwise frame endomorphism of a vector-form series."""
    n = v.zero.n
    return v.map(
        FrameEndomorphism.from_vector_form,
        zero=FrameEndomorphism(n, Matrix.zeros(2 * n, 2 * n, v.field)),
    )


def inverse_series(s: BiSeries) -> BiSeries:
    """Formal inverse of a frame or matrix series with invertible constant term."""
    c = s.at(s.origin)
    c_inv = c.inverse()
    rest = s - BiSeries.constant(c, s.order, s.params)
    step = -compose_series(BiSeries.constant(c_inv, s.order, s.params), rest)
    total = BiSeries.constant(_identity_like(c), s.order, s.params)
    power = total
    for _ in range(s.order):
        power = compose_series(power, step)
        if power.is_zero():
            break
        total = total + power
    return compose_series(total, BiSeries.constant(c_inv, s.order, s.params))


def neumann_inverse(phi: BiSeries, order: Optional[int] = None) -> BiSeries:
    """Σ_k (φ̄φ)^k truncated at ``order``: the formal inverse of 1 - φ∘φ̄.

    Raises:
        ValueError: If φ has a constant term.
    """
    if not phi.at(phi.origin).is_zero():
        raise ValueError("the Beltrami series must vanish at t = 0")
    phi = phi.truncate(order if order is not None else phi.order)
    product = compose_series(frame_series(phi), frame_series(phi.conjugate()))
    identity = BiSeries.constant(
        FrameEndomorphism.identity(phi.zero.n, phi.field), phi.order, phi.params
    )
    total = identity
    power = identity
    for _ in range(phi.order):
        power = compose_series(power, product)
        if power.is_zero():
            break
        total = total + power
    return total


def extension_series(phi: BiSeries) -> BiSeries:
    """X(t) = 1 + φ(t) + φ̄(t) as a frame series."""
    identity = BiSeries.constant(
        FrameEndomorphism.identity(phi.zero.n, phi.field), phi.order, phi.params
    )
    return identity + frame_series(phi) + frame_series(phi.conjugate())


def lambda_series(endo: BiSeries, a: BiSeries) -> BiSeries:
    """Λ(E(t)) α(t): every coframe factor replaced by its image series."""
    n, fld = a.zero.n, a.field
    order = min(endo.order, a.order)
    images = [
        endo.map(lambda e, g=g: e.image(g), zero=Form.zero(n, fld)).truncate(order)
        for g in range(2 * n)
    ]
    result = BiSeries(order, a.zero, params=a.params)
    for index, form in a.items():
        for key, value in form.items():
            term = BiSeries(order, a.zero, {index: Form.one(n, fld).scale(value)}, a.params)
            for g in key:
                term = wedge_series(term, images[g])
                if term.is_zero():
                    break
            result = result + term
    return result


def extend_series(phi: BiSeries, a: BiSeries) -> BiSeries:
    """e^{ι_φ|ι_φ̄} applied to a form series."""
    return lambda_series(extension_series(phi), a)


def d_series(alg: LieAlgebraPresentation, a: BiSeries) -> BiSeries:
    return a.map(lambda f: ce_d(alg, f))


def partial_series(alg: LieAlgebraPresentation, a: BiSeries) -> BiSeries:
    return a.map(lambda f: partial(alg, f))


def partial_bar_series(alg: LieAlgebraPresentation, a: BiSeries) -> BiSeries:
    return a.map(lambda f: partial_bar(alg, f))


def form_series(
    n: int, field, order: int, params: int = 1, terms: Optional[dict] = None
) -> BiSeries:
    return BiSeries(order, Form.zero(n, field), terms, params)


def vector_series(
    n: int, field, order: int, params: int = 1, terms: Optional[dict] = None
) -> BiSeries:
    return BiSeries(order, VectorForm.zero(n, field), terms, params)
