"""
Kähler extension along a Beltrami family.

Solves the reduced system

    ∂̄ω = ∂̄(φ̄φ⌟ω - φ⌟φ̄⌟ω) - ∂(φ⌟ω)
    ∂ω = ∂(φφ̄⌟ω - φ̄⌟φ⌟ω) - ∂̄(φ̄⌟ω)

order by order with the canonical real solution
ω_N = (φ̄φ⌟ω - φ⌟φ̄⌟ω)_N + (∂∂̄*G(φ⌟ω) + ∂̄∂*G(φ̄⌟ω))_N.
"""

import logging
from typing import Optional

from deforge.calculus import LieAlgebraPresentation, ce_d, partial, partial_bar
from deforge.deformation import ExtensionError, ObstructionHit
from deforge.deformation.series import (
    BiSeries,
    bi_indices,
    compose_series,
    contract_series,
    contract_vector_series,
    form_series,
    frame_series,
    lambda_series,
    partial_bar_series,
    partial_series,
)
from deforge.deformation.verify import ResidualReport, ddbar_commutator
from deforge.exterior import Form, FrameEndomorphism
from deforge.hodge import HermitianMetric, HodgeComplex

logger = logging.getLogger(__name__)


def _check_kahler_form(alg: LieAlgebraPresentation, omega0: Form) -> None:
    if not omega0.is_bihomogeneous(1, 1) or not omega0.is_real():
        raise ValueError("initial form must be a real (1,1)-form")
    if not ce_d(alg, omega0).is_zero():
        raise ValueError("initial form is not d-closed")


def reduced_system_residuals(
    alg: LieAlgebraPresentation, omega: BiSeries, phi: BiSeries
) -> tuple[BiSeries, BiSeries]:
    """Left minus right side of both reduced equations."""
    phibar = phi.conjugate()
    phibar_phi = contract_vector_series(phi, phibar)
    phi_phibar = contract_vector_series(phibar, phi)
    first = partial_bar_series(alg, omega) - (
        partial_bar_series(
            alg,
            contract_series(phibar_phi, omega)
            - contract_series(phi, contract_series(phibar, omega)),
        )
        - partial_series(alg, contract_series(phi, omega))
    )
    second = partial_series(alg, omega) - (
        partial_series(
            alg,
            contract_series(phi_phibar, omega)
            - contract_series(phibar, contract_series(phi, omega)),
        )
        - partial_bar_series(alg, contract_series(phibar, omega))
    )
    return first, second


def extend_kahler(
    alg: LieAlgebraPresentation,
    metric: Optional[HermitianMetric],
    omega0: Form,
    phi: BiSeries,
    order: Optional[int] = None,
    complex_: Optional[HodgeComplex] = None,
) -> BiSeries:
    """Real series ω(t) with ω(0) = ω₀ and e^{ι_φ|ι_φ̄}ω(t) d-closed through ``order``.

    Raises:
        ValueError: If ω₀ is not a real d-closed (1,1)-form.
        ObstructionHit: If ∂̄(φ⌟ω)_k ≠ 0 or a reduced equation keeps a residual.
        ExtensionError: If the assembled series is not real.
    """
    _check_kahler_form(alg, omega0)
    hc = complex_ or HodgeComplex(alg, metric)
    order = phi.order if order is None else min(order, phi.order)
    phi = phi.truncate(order)
    phibar = phi.conjugate()
    phibar_phi = contract_vector_series(phi, phibar)
    n, fld, params = alg.n, alg.field, phi.params
    omega = form_series(n, fld, order, params).with_terms({phi.origin: omega0})

    for k in range(1, order + 1):
        phi_omega = contract_series(phi, omega)
        _check_side_condition(alg, phi_omega, k)
        bar_omega = contract_series(phibar, omega)
        algebraic = contract_series(phibar_phi, omega) - contract_series(phi, bar_omega)
        updates = {}
        for index in bi_indices(params, k):
            x = phi_omega.at(index)
            y = bar_omega.at(index)
            value = algebraic.at(index)
            if not x.is_zero():
                value = value + partial(alg, hc.dbar_star_green(x, (0, 2)))
            if not y.is_zero():
                value = value + partial_bar(alg, hc.del_star_green(y, (2, 0)))
            updates[index] = value
        omega = omega.with_terms(updates)
        first, second = reduced_system_residuals(alg, omega, phi)
        for equation, residual in (("reduced-dbar", first), ("reduced-del", second)):
            part = residual.degree_part(k)
            if not part.is_zero():
                witness = next(v for _, v in part.items())
                raise ObstructionHit(k, equation, witness)
        logger.debug(f"Kähler extension on {alg.name}: order {k} solved")

    if not omega.is_real():
        logger.error(f"Kähler extension on {alg.name} lost reality")
        drift = next((v for _, v in (omega - omega.conjugate()).items()), None)
        raise ExtensionError("kahler", "result is not real", drift)
    return omega


def _check_side_condition(alg: LieAlgebraPresentation, phi_omega: BiSeries, k: int) -> None:
    closed = partial_bar_series(alg, phi_omega.degree_part(k))
    if not closed.is_zero():
        raise ObstructionHit(k, "dbar-closed", next(v for _, v in closed.items()))


def _frame_product_identity(phi: BiSeries) -> BiSeries:
    identity = BiSeries.constant(
        FrameEndomorphism.identity(phi.zero.n, phi.field), phi.order, phi.params
    )
    return identity - compose_series(frame_series(phi), frame_series(phi.conjugate()))


def verify_reduction(
    alg: LieAlgebraPresentation, omega: BiSeries, phi: BiSeries, order: Optional[int] = None
) -> ResidualReport:
    """Residuals of the reduced system, of both closedness equations

        ([∂,ι_φ] + ∂̄)(1 - φ̄φ)⨝ω = 0,  ([∂̄,ι_φ̄] + ∂)(1 - φφ̄)⨝ω = 0

    and of the side condition ∂̄(φ⌟ω)_k = 0 for k ≤ order + 1.
    """
    order = min(order if order is not None else omega.order, omega.order, phi.order)
    omega_n = omega.truncate(order)
    phi_n = phi.truncate(order)
    first, second = reduced_system_residuals(alg, omega_n, phi_n)

    beta = lambda_series(_frame_product_identity(phi_n), omega_n)
    phibar = phi_n.conjugate()
    gamma = lambda_series(_frame_product_identity(phibar), omega_n)
    w_first = ddbar_commutator(alg, phi_n, beta) + partial_bar_series(alg, beta)
    w_second = (
        partial_bar_series(alg, contract_series(phibar, gamma))
        - contract_series(phibar, partial_bar_series(alg, gamma))
        + partial_series(alg, gamma)
    )

    widened_omega = BiSeries(order + 1, omega.zero, omega.terms(), omega.params)
    widened_phi = BiSeries(order + 1, phi.zero, phi.terms(), phi.params)
    side = partial_bar_series(alg, contract_series(widened_phi, widened_omega))
    report = ResidualReport(
        "kahler-reduction",
        order,
        residuals={
            "reduced-dbar": first,
            "reduced-del": second,
            "closed-first": w_first,
            "closed-second": w_second,
            "dbar-closed": side,
        },
    )
    report.checks["real"] = omega_n.is_real()
    logger.info(f"Kähler reduction check on {alg.name}: passed={report.passed}")
    return report
