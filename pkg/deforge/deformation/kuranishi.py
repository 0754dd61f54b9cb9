"""
Kuranishi family of Beltrami differentials.

φ(t) = Σ_ν t_ν η_ν + Σ_{|I|≥2} φ_I t^I with φ_I = ½ ∂̄*G Σ_{J+L=I} [φ_J, φ_L],
over a harmonic basis {η} of the invariant (0,1)-forms with values in T^{1,0}.
Obstructions are the harmonic parts of the bracket sums and are returned as
data, never raised.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Any, Optional

from deforge.calculus import LieAlgebraPresentation, bracket, partial_bar_vector
from deforge.deformation.series import (
    BiIndex,
    BiSeries,
    Index,
    multi_indices,
    vector_series,
)
from deforge.exterior import VectorForm
from deforge.hodge import HermitianMetric, HodgeComplex
from deforge.utils.parallel import run_ordered

logger = logging.getLogger(__name__)

HALF = Fraction(1, 2)


@dataclass
class KuranishiFamily:
    """Kuranishi recursion output with the per-order obstructions."""

    phi: BiSeries
    basis: list[VectorForm]
    directions: list[VectorForm]
    obstructions: dict[int, list[VectorForm]] = field(default_factory=dict)

    @property
    def unobstructed(self) -> bool:
        return not any(self.obstructions.values())

    @property
    def first_obstructed_order(self) -> Optional[int]:
        return min((k for k, hits in self.obstructions.items() if hits), default=None)


def _split_direction(direction: Sequence[Any]) -> list[list[Any]]:
    if direction and isinstance(direction[0], (list, tuple)):
        return [list(d) for d in direction]
    return [list(direction)]


def _sub_indices(index: Index) -> list[Index]:
    """Multi-indices J with 0 < |J| < |I| and J ≤ I componentwise."""
    total = sum(index)
    return [j for j in product(*(range(k + 1) for k in index)) if 0 < sum(j) < total]


def kuranishi(
    alg: LieAlgebraPresentation,
    metric: Optional[HermitianMetric],
    order: int,
    direction: Sequence[Any],
    complex_: Optional[HodgeComplex] = None,
    workers: Optional[int] = 1,
) -> KuranishiFamily:
    """Run the recursion through ``order``.

    ``direction`` holds coefficients over the harmonic basis; a sequence of such
    sequences gives one parameter per entry.

    Raises:
        ValueError: If a direction does not match the harmonic basis size.
    """
    hc = complex_ or HodgeComplex(alg, metric)
    fld, n = alg.field, alg.n
    basis = hc.harmonic_basis("dbar", 0, 1, vector=True)
    rows = _split_direction(direction)
    params = len(rows)
    etas = []
    for row in rows:
        if len(row) != len(basis):
            raise ValueError(
                f"direction has {len(row)} coefficients, harmonic basis has {len(basis)}"
            )
        eta = VectorForm.zero(n, fld)
        for c, b in zip(row, basis):
            eta = eta + b.scale(c)
        etas.append(eta)
    logger.info(
        f"Kuranishi on {alg.name}: {len(basis)} harmonic directions, "
        f"{params} parameter(s), order {order}"
    )

    coefficients: dict[Index, VectorForm] = {}
    for nu, eta in enumerate(etas):
        unit = tuple(1 if k == nu else 0 for k in range(params))
        coefficients[unit] = eta
    obstructions: dict[int, list[VectorForm]] = {1: []} if order >= 1 else {}

    def solve_index(index: Index) -> tuple[VectorForm, VectorForm]:
        total = VectorForm.zero(n, fld)
        for j in _sub_indices(index):
            left = coefficients.get(j)
            right = coefficients.get(tuple(a - b for a, b in zip(index, j)))
            if left is None or right is None:
                continue
            total = total + bracket(alg, left, right)
        harmonic = hc.harmonic_part(total, "dbar", (0, 2)) if not total.is_zero() else total
        return hc.dbar_star_green(total, (0, 2)).scale(HALF), harmonic

    for k in range(2, order + 1):
        indices = multi_indices(params, k)
        results = run_ordered(solve_index, indices, workers)
        hits = []
        for index, (value, harmonic) in zip(indices, results):
            if not value.is_zero():
                coefficients[index] = value
            if not harmonic.is_zero():
                hits.append(harmonic)
        obstructions[k] = hits
        if hits:
            logger.warning(f"Kuranishi obstruction at order {k} on {alg.name}")

    origin = (0,) * params
    terms: dict[BiIndex, VectorForm] = {(i, origin): v for i, v in coefficients.items()}
    phi = vector_series(n, fld, order, params, terms)
    return KuranishiFamily(phi=phi, basis=basis, directions=etas, obstructions=obstructions)


def integrability_residual(alg: LieAlgebraPresentation, phi: BiSeries) -> BiSeries:
    """(∂̄φ - ½[φ,φ]) order by order."""
    dbar = phi.map(lambda v: partial_bar_vector(alg, v))
    square = phi.convolve(phi, lambda a, b: bracket(alg, a, b), phi.zero)
    return dbar - square.scale(HALF)


def fixed_point_residual(
    alg: LieAlgebraPresentation, phi: BiSeries, complex_: HodgeComplex
) -> BiSeries:
    """φ - φ₁ - ½∂̄*G[φ,φ]: zero for the recursion output."""
    square = phi.convolve(phi, lambda a, b: bracket(alg, a, b), phi.zero)
    correction = square.map(lambda v: complex_.dbar_star_green(v, (0, 2)) if not v.is_zero() else v)
    return phi - phi.degree_part(1) - correction.scale(HALF)
