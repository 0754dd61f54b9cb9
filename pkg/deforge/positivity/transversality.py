"""
Transversality of real (p,p)-forms.

ω is transverse when ω ∧ σ_q τ∧τ̄ is a positive volume form for every nonzero
decomposable (q,0)-form τ. On coordinates a of τ the objective is the
hermitian quadratic form a Q ā / |a|² of the pairing matrix Q. When every
(q,0)-form is decomposable (Plücker codimension zero) the verdict is the exact
positive-definiteness of Q; otherwise it is sampled with local descent.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import Enum
from math import pi
from typing import Any, Optional

import numpy as np

from deforge.constants import (
    DEFAULT_MARGIN,
    DEFAULT_REFINE_ROUNDS,
    DEFAULT_REFINE_STEPS,
    DEFAULT_SAMPLES,
    DEFAULT_SEED,
    PERSISTENCE_GRID_ANGLES,
    PERSISTENCE_GRID_RADII,
    PERSISTENCE_MAX_RADIUS,
    PERSISTENCE_SAMPLES,
)
from deforge.deformation.series import BiSeries
from deforge.exterior import Form, VectorForm, exp_contract, monomial_basis
from deforge.hodge import HermitianMetric
from deforge.linalg import Matrix, is_positive_definite
from deforge.positivity.grassmannian import (
    coordinates_form,
    descend,
    plucker_coordinates,
    pluecker_codim,
    sample_frames,
)
from deforge.positivity.hermitian import canonical_form, hermitian_rep, pp_degree, sigma
from deforge.scalars import FloatField, ScalarField

logger = logging.getLogger(__name__)

REFINE_STARTS = 3


class Verdict(str, Enum):
    TRANSVERSE = "transverse"
    NOT_TRANSVERSE = "not_transverse"
    INCONCLUSIVE = "inconclusive"


@dataclass
class TransversalityVerdict:
    verdict: Verdict
    margin: float
    witness: Optional[Form]
    samples: int
    exact: bool = False
    seed: Optional[int] = None
    details: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict is Verdict.NOT_TRANSVERSE and self.witness is None:
            raise ValueError("a negative verdict needs a witness")

    @property
    def transverse(self) -> bool:
        return self.verdict is Verdict.TRANSVERSE

    def to_dict(self) -> dict[str, Any]:
        return {
            "verdict": self.verdict.value,
            "margin": self.margin,
            "witness": self.witness.format() if self.witness is not None else None,
            "samples": self.samples,
            "exact": self.exact,
            "seed": self.seed,
            "details": dict(self.details),
        }


def _top(n: int) -> tuple[int, ...]:
    return tuple(range(2 * n))


def _pairing(
    left: Sequence[Form], right: Sequence[Form], n: int, q: int, fld: ScalarField
) -> Matrix:
    """Q[J][K] = (ω∧σ_q x_J∧conj(y_K))_top / σ_n with ω folded into ``left``."""
    scale = sigma(q, fld) / sigma(n, fld)
    top = _top(n)
    conjugates = [y.conjugate() for y in right]
    return Matrix([[x.wedge(y).coefficient(top) * scale for y in conjugates] for x in left], fld)


def pairing_matrix(omega: Form, p: Optional[int] = None) -> Matrix:
    """Hermitian Q with ω∧σ_q τ∧τ̄ = (a Q ā) vol for τ = Σ a_J dz^J."""
    n, fld = omega.n, omega.field
    p = pp_degree(omega, p)
    q = n - p
    units = [Form(n, {key: 1}, fld) for key in monomial_basis(n, q, 0)]
    return _pairing([omega.wedge(u) for u in units], units, n, q, fld)


def _float_value(value, fld: FloatField):
    if isinstance(value, Form):
        return Form(value.n, {k: complex(c) for k, c in value.items()}, fld)
    return VectorForm(value.n, {s: _float_value(f, fld) for s, f in value.items()}, fld)


def objective(omega: Form, tau: Form) -> float:
    """(ω∧σ_q τ∧τ̄)/(|τ|² vol) for a (q,0)-form τ with its coefficient norm."""
    n = omega.n
    q = n - pp_degree(omega)
    fld = FloatField()
    omega, tau = _float_value(omega, fld), _float_value(tau, fld)
    value = omega.wedge(tau).wedge(tau.conjugate()).coefficient(_top(n)) * (
        sigma(q, fld) / sigma(n, fld)
    )
    norm = sum(abs(complex(c)) ** 2 for _, c in tau.items())
    if norm == 0:
        raise ValueError("objective of the zero form")
    return complex(value).real / norm


def _quadratic(qm: np.ndarray, coords: np.ndarray) -> np.ndarray:
    coords = np.atleast_2d(coords)
    values = np.einsum("sj,jk,sk->s", coords, qm, coords.conj()).real
    return values / np.sum(np.abs(coords) ** 2, axis=1)


def _as_numpy(qmat: Matrix) -> np.ndarray:
    qm = qmat.to_numpy()
    return (qm + qm.conj().T) / 2


def transversality(
    omega: Form,
    samples: Optional[Sequence[Form]] = None,
    refine: bool = True,
    count: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
    margin: float = DEFAULT_MARGIN,
    p: Optional[int] = None,
) -> TransversalityVerdict:
    """Transverse, not transverse (with a witness τ) or inconclusive.

    Raises:
        ValueError: If ω is not a real (p,p)-form.
    """
    n = omega.n
    p = pp_degree(omega, p)
    q = n - p
    if not omega.is_real():
        raise ValueError("transversality needs a real (p,p)-form")
    qmat = pairing_matrix(omega, p)
    qm = _as_numpy(qmat)
    k = pluecker_codim(n, q)
    certificate = is_positive_definite(qmat)
    details: dict[str, Any] = {"p": p, "q": q, "codim": k, "certificate": certificate}

    if k == 0:
        values, vectors = np.linalg.eigh(qm)
        if p in (1, n - 1):
            theta = hermitian_rep(omega, p=p).theta
            details["theta_positive_definite"] = is_positive_definite(theta)
        if certificate:
            return TransversalityVerdict(
                Verdict.TRANSVERSE, float(values[0]), None, 0, True, seed, details
            )
        witness = coordinates_form(vectors[:, 0].conj(), n, q)
        return TransversalityVerdict(
            Verdict.NOT_TRANSVERSE, min(float(values[0]), 0.0), witness, 0, True, seed, details
        )

    rng = np.random.default_rng(seed)
    frames = sample_frames(n, q, count, seed)
    coords = plucker_coordinates(frames, n, q)
    values = _quadratic(qm, coords)
    best_value, best_coords = float(np.min(values)), coords[int(np.argmin(values))]
    used = len(frames)
    for tau in samples or ():
        tau_coords = np.array([complex(tau.coefficient(key)) for key in monomial_basis(n, q, 0)])
        value = float(_quadratic(qm, tau_coords)[0])
        used += 1
        if value < best_value:
            best_value, best_coords = value, tau_coords

    if refine:
        def frame_objective(frame: np.ndarray) -> float:
            return float(_quadratic(qm, plucker_coordinates(frame, n, q))[0])

        for start in np.argsort(values)[:REFINE_STARTS]:
            frame, value = descend(
                frame_objective, frames[start], rng, DEFAULT_REFINE_ROUNDS, DEFAULT_REFINE_STEPS
            )
            used += DEFAULT_REFINE_ROUNDS * DEFAULT_REFINE_STEPS
            if value < best_value:
                best_value, best_coords = value, plucker_coordinates(frame, n, q)[0]

    witness = coordinates_form(best_coords, n, q)
    if certificate:
        verdict, exact = Verdict.TRANSVERSE, True
    elif best_value <= 0:
        verdict, exact = Verdict.NOT_TRANSVERSE, False
    elif best_value > margin:
        verdict, exact = Verdict.TRANSVERSE, False
    else:
        verdict, exact = Verdict.INCONCLUSIVE, False
    logger.info(
        f"Transversality of a ({p},{p})-form on n={n}: {verdict.value}, "
        f"margin {best_value:.3e}"
    )
    return TransversalityVerdict(verdict, best_value, witness, used, exact, seed, details)


@dataclass
class IndexBoundReport:
    positive_index: int
    bound: int
    verdict: TransversalityVerdict
    holds: Optional[bool]

    def to_dict(self) -> dict[str, Any]:
        return {
            "positive_index": self.positive_index,
            "bound": self.bound,
            "transversality": self.verdict.to_dict(),
            "holds": self.holds,
        }


def positive_index_bound_check(
    omega: Form,
    metric: Optional[HermitianMetric] = None,
    verdict: Optional[TransversalityVerdict] = None,
    count: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
) -> IndexBoundReport:
    """Positive index of a transverse form against the lower bound N - k."""
    n = omega.n
    p = pp_degree(omega)
    q = n - p
    verdict = verdict or transversality(omega, count=count, seed=seed)
    index = canonical_form(omega, metric).positive_index
    bound = hermitian_rep(omega).size - pluecker_codim(n, q)
    holds = index >= bound if verdict.transverse else None
    if holds is False:
        logger.error(f"Transverse ({p},{p})-form with positive index {index} below {bound}")
    return IndexBoundReport(index, bound, verdict, holds)


# ----------------------------------------------------------------------
# Persistence along a family
# ----------------------------------------------------------------------


def _evaluate(series: BiSeries, t: complex, fld: FloatField):
    if series.params != 1:
        raise ValueError("persistence needs a one-parameter family")
    total = None
    for (i, j), coefficient in series.items():
        term = _float_value(coefficient, fld).scale(complex(t ** i[0] * np.conj(t) ** j[0]))
        total = term if total is None else total + term
    if total is None:
        return _float_value(series.zero, fld)
    return total


@dataclass
class PersistenceEstimate:
    delta: float
    radii: list[float]
    minima: list[float]

    def to_dict(self) -> dict[str, Any]:
        return {"delta": self.delta, "radii": list(self.radii), "minima": list(self.minima)}


def persistence(
    family: BiSeries,
    phi: BiSeries,
    count: int = PERSISTENCE_SAMPLES,
    seed: int = DEFAULT_SEED,
    max_radius: float = PERSISTENCE_MAX_RADIUS,
    radii: int = PERSISTENCE_GRID_RADII,
    angles: int = PERSISTENCE_GRID_ANGLES,
) -> PersistenceEstimate:
    """Largest grid radius up to which Ω_t ∧ σ_q e^{ι_φ}τ ∧ conj(e^{ι_φ}τ) stays positive.

    Every sampled τ and every grid angle is checked at each radius; the
    estimate is the last radius before the first failure.

    Raises:
        ValueError: If the degree-0 form is not transverse.
    """
    omega0 = family.at(family.origin)
    n = omega0.n
    p = pp_degree(omega0)
    q = n - p
    if not transversality(omega0, count=count, seed=seed).transverse:
        raise ValueError("the degree-0 form is not transverse")
    fld = FloatField()
    frames = sample_frames(n, q, count, seed)
    coords = plucker_coordinates(frames, n, q)
    units = [Form(n, {key: 1}, fld) for key in monomial_basis(n, q, 0)]
    grid = [max_radius * (m + 1) / radii for m in range(radii)]
    minima: list[float] = []
    delta = 0.0
    failed = False
    for radius in grid:
        lowest = np.inf
        for a in range(angles):
            t = radius * np.exp(2j * pi * a / angles)
            omega_t = _evaluate(family, t, fld)
            phi_t = _evaluate(phi, t, fld)
            twisted = [exp_contract(phi_t, u) for u in units]
            qmat = _pairing([omega_t.wedge(x) for x in twisted], twisted, n, q, fld)
            lowest = min(lowest, float(np.min(_quadratic(_as_numpy(qmat), coords))))
        minima.append(lowest)
        failed = failed or lowest <= 0
        if not failed:
            delta = radius
    logger.info(f"Transversality persists up to |t| = {delta} on the sampled grid")
    return PersistenceEstimate(delta, grid, minima)
