"""
Majorant series comparison.

A(t) = (β/16γ) Σ_{m≥1} γ^m t^m / m² dominates a series b(t) when b_m ≤ A_m for
every m. Series of forms are compared through per-degree coefficient norms:
the sum over i + j = m of the largest |Re| + |Im| among the coefficients.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from deforge.deformation.series import BiSeries, bi_degree
from deforge.exterior import Form, FrameEndomorphism, VectorForm
from deforge.linalg import Matrix

logger = logging.getLogger(__name__)

Rational = Union[int, Fraction]


@dataclass(frozen=True)
class MajorantParams:
    beta: Fraction
    gamma: Fraction
    order: int

    def __post_init__(self):
        object.__setattr__(self, "beta", Fraction(self.beta))
        object.__setattr__(self, "gamma", Fraction(self.gamma))
        if self.beta <= 0 or self.gamma <= 0:
            raise ValueError("beta and gamma must be positive")
        if self.order < 1:
            raise ValueError("majorant order must be at least 1")


def majorant(params: MajorantParams) -> list[Fraction]:
    """[A_0, A_1, ..., A_M] with A_0 = 0."""
    lead = params.beta / (16 * params.gamma)
    return [Fraction(0)] + [lead * params.gamma**m / (m * m) for m in range(1, params.order + 1)]


def series_power(coefficients: Sequence[Fraction], power: int) -> list[Fraction]:
    """Coefficients of a(t)^power truncated at the length of ``coefficients``."""
    size = len(coefficients)
    result = [Fraction(1)] + [Fraction(0)] * (size - 1)
    for _ in range(power):
        result = [
            sum((result[k] * coefficients[m - k] for k in range(m + 1)), Fraction(0))
            for m in range(size)
        ]
    return result


def dominates(norms: Sequence[Rational], coefficients: Sequence[Rational]) -> bool:
    """b ≪ A: every b_m ≤ A_m for m ≥ 1 up to the shorter length."""
    return all(b <= a for b, a in zip(norms[1:], coefficients[1:]))


def power_bound_holds(params: MajorantParams, power: int) -> bool:
    """A(t)^power ≪ (β/γ)^{power-1} A(t) through the order."""
    if power < 1:
        raise ValueError("power must be at least 1")
    a = majorant(params)
    factor = (params.beta / params.gamma) ** (power - 1)
    return dominates(series_power(a, power), [factor * c for c in a])


def _max_norm(value) -> Rational:
    fld = value.field
    if isinstance(value, Form):
        coefficients = [c for _, c in value.items()]
    elif isinstance(value, VectorForm):
        coefficients = [c for _, f in value.items() for _, c in f.items()]
    elif isinstance(value, FrameEndomorphism):
        coefficients = [c for row in value.matrix.rows for c in row]
    elif isinstance(value, Matrix):
        coefficients = [c for row in value.rows for c in row]
    else:
        raise TypeError(f"cannot take the norm of {type(value).__name__}")
    return max((fld.abs_bound(c) for c in coefficients), default=Fraction(0))


def series_norms(series: BiSeries) -> list[Rational]:
    """[n_0, ..., n_N] with n_m = Σ_{i+j=m} max-norm of the coefficient (i, j)."""
    norms: list[Rational] = [Fraction(0)] * (series.order + 1)
    for index, value in series.items():
        norms[bi_degree(index)] += _max_norm(value)
    return norms
