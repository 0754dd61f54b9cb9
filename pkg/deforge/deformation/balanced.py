"""
Balanced extension along a Beltrami family.

With ψ = φ̄∘(1 - φ∘φ̄)^{-1} the closedness of e^{ι_φ|ι_φ̄}Ω is rewritten in
terms of Ω̃ = e^{-ι_ψ}e^{-ι_φ}e^{ι_φ|ι_φ̄}Ω, which keeps the type (n-1,n-1):

    (∂̄ + ∂ι_φ + ∂̄ι_φι_ψ + ½∂ι_φι_φι_ψ) Ω̃ = 0
    (∂ + ∂̄ι_ψ + ∂ι_φι_ψ) Ω̃ = 0

Each order needs two ∂∂̄-equations, solvable when the mild ∂∂̄-lemma holds.
"""

import logging
from fractions import Fraction
from typing import Optional

from deforge.calculus import LieAlgebraPresentation, ce_d, partial, partial_bar
from deforge.deformation import ObstructionHit
from deforge.deformation.series import (
    BiSeries,
    bi_indices,
    compose_series,
    contract_series,
    extension_series,
    form_series,
    frame_series,
    inverse_series,
    lambda_series,
    neumann_inverse,
    partial_bar_series,
    partial_series,
)
from deforge.deformation.verify import ResidualReport, ddbar_commutator
from deforge.exterior import Form, FrameEndomorphism
from deforge.hodge import HermitianMetric, HodgeComplex, Unsolvable
from deforge.lemmata import check_mild

logger = logging.getLogger(__name__)

HALF = Fraction(1, 2)


def form_power(omega: Form, k: int) -> Form:
    result = Form.one(omega.n, omega.field)
    for _ in range(k):
        result = result.wedge(omega)
    return result


def twisting_series(phi: BiSeries) -> BiSeries:
    """ψ(t) = φ̄∘(1 - φ∘φ̄)^{-1} as a vector-form series."""
    psi = compose_series(frame_series(phi.conjugate()), neumann_inverse(phi))
    return psi.map(FrameEndomorphism.to_vector_form)


def recover_omega(phi: BiSeries, omega_tilde: BiSeries) -> BiSeries:
    """Ω = e^{-ι_φ|-ι_φ̄} e^{ι_φ} e^{ι_ψ} Ω̃."""
    identity = BiSeries.constant(
        FrameEndomorphism.identity(phi.zero.n, phi.field), phi.order, phi.params
    )
    psi_frame = compose_series(frame_series(phi.conjugate()), neumann_inverse(phi))
    total = compose_series(
        inverse_series(extension_series(phi)),
        compose_series(identity + frame_series(phi), identity + psi_frame),
    )
    return lambda_series(total, omega_tilde)


def _solve_ddbar(
    hc: HodgeComplex, y: Form, bidegree: tuple[int, int], order: int, equation: str
) -> Form:
    if y.is_zero():
        return y
    try:
        return hc.solve_ddbar_minimal(y, bidegree)
    except Unsolvable as e:
        raise ObstructionHit(order, equation, e.witness) from e


def extend_balanced(
    alg: LieAlgebraPresentation,
    metric: Optional[HermitianMetric],
    omega0: Form,
    phi: BiSeries,
    order: Optional[int] = None,
    complex_: Optional[HodgeComplex] = None,
) -> tuple[BiSeries, BiSeries]:
    """(Ω, Ω̃) with Ω̃(0) = ω₀^{n-1}; Ω is real and e^{ι_φ|ι_φ̄}Ω is d-closed through ``order``.

    Raises:
        ValueError: If ω₀ is not a real (1,1)-form with d(ω₀^{n-1}) = 0.
        ObstructionHit: At the first order whose ∂∂̄-equation has no solution.
    """
    n, fld = alg.n, alg.field
    if not omega0.is_bihomogeneous(1, 1) or not omega0.is_real():
        raise ValueError("initial form must be a real (1,1)-form")
    start = form_power(omega0, n - 1)
    if not ce_d(alg, start).is_zero():
        raise ValueError("initial form is not balanced")
    hc = complex_ or HodgeComplex(alg, metric)
    if not check_mild(alg, hc).holds:
        logger.warning(
            f"{alg.name} fails the mild ∂∂̄-lemma; the balanced extension may be obstructed"
        )

    order = phi.order if order is None else min(order, phi.order)
    phi = phi.truncate(order)
    params = phi.params
    psi = twisting_series(phi)
    tilde = form_series(n, fld, order, params).with_terms({phi.origin: start})

    for k in range(1, order + 1):
        psi_part = contract_series(psi, tilde)
        phi_psi = contract_series(phi, psi_part)
        driver = contract_series(phi, tilde) + contract_series(phi, phi_psi).scale(HALF)
        updates = {}
        for index in bi_indices(params, k):
            mu = -_solve_ddbar(
                hc, partial_bar(alg, psi_part.at(index)), (n, n - 1), k, "ddbar-dbar"
            )
            nu = _solve_ddbar(hc, partial(alg, driver.at(index)), (n - 1, n), k, "ddbar-del")
            updates[index] = -phi_psi.at(index) + partial_bar(alg, mu) + partial(alg, nu)
        tilde = tilde.with_terms(updates)
        logger.debug(f"Balanced extension on {alg.name}: order {k} solved")

    omega = recover_omega(phi, tilde)
    symmetric = (omega + omega.conjugate()).scale(HALF)
    return symmetric, tilde


def verify_balanced_system(
    alg: LieAlgebraPresentation, omega_tilde: BiSeries, phi: BiSeries, order: Optional[int] = None
) -> ResidualReport:
    """Residuals of the compact and the expanded form of the balanced system."""
    order = min(order if order is not None else omega_tilde.order, omega_tilde.order, phi.order)
    tilde = omega_tilde.truncate(order)
    phi = phi.truncate(order)
    psi = twisting_series(phi)
    psi_part = contract_series(psi, tilde)
    phi_psi = contract_series(phi, psi_part)

    compact_first = partial_bar_series(alg, tilde) + ddbar_commutator(alg, phi, tilde)
    compact_second = (
        partial_series(alg, tilde)
        + partial_bar_series(alg, psi_part)
        + partial_series(alg, contract_series(phi, psi_part))
    )
    expanded_first = (
        partial_bar_series(alg, tilde)
        + partial_series(alg, contract_series(phi, tilde))
        + partial_bar_series(alg, phi_psi)
        + partial_series(alg, contract_series(phi, phi_psi)).scale(HALF)
    )
    expanded_second = (
        partial_series(alg, tilde)
        + partial_bar_series(alg, psi_part)
        + partial_series(alg, phi_psi)
    )
    report = ResidualReport(
        "balanced-system",
        order,
        residuals={
            "compact-first": compact_first,
            "compact-second": compact_second,
            "expanded-first": expanded_first,
            "expanded-second": expanded_second,
        },
    )
    logger.info(f"Balanced system check on {alg.name}: passed={report.passed}")
    return report
