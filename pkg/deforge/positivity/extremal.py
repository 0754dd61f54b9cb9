"""
Extremal transverse (p,p)-forms.

With k the Plücker codimension and N = C(n,p), a basis η_1..η_N of Λ^{p,0}
whose first N - k members have no common decomposable annihilator gives

    exact index:     Ω = σ_p Σ_{j ≤ N-k} η_j∧η̄_j
    negative index:  Ω + λ σ_p η_{N-k+1}∧η̄_{N-k+1},  λ = -a/2

where a is the sampled minimum of the transversality objective of the first
form, rescaled by the largest value of the added term. Random bases are drawn
until the sampled checks pass.
"""

import logging
from enum import Enum
from fractions import Fraction
from math import comb

import numpy as np
from tenacity import Retrying, before_sleep_log, retry_if_exception_type, stop_after_attempt

from deforge.constants import (
    DEFAULT_EXTREMAL_RETRIES,
    DEFAULT_SAMPLES,
    DEFAULT_SEED,
    EXTREMAL_DENOMINATOR,
)
from deforge.exterior import Form, monomial_basis
from deforge.linalg import Matrix
from deforge.positivity import ConstructionFailed
from deforge.positivity.grassmannian import pluecker_codim
from deforge.positivity.hermitian import sigma
from deforge.positivity.transversality import pairing_matrix, transversality
from deforge.scalars import EXACT, GaussianRational

logger = logging.getLogger(__name__)


class ExtremalKind(str, Enum):
    EXACT_INDEX = "exact_index"
    NEGATIVE_INDEX = "negative_index"


class _Degenerate(Exception):
    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


def _random_basis(size: int, rng: np.random.Generator) -> Matrix:
    """Identity plus a small Gaussian-integer perturbation."""
    half = Fraction(1, 2)
    rows = [
        [
            GaussianRational(
                int(rng.integers(-2, 3)) * half + (1 if i == j else 0),
                int(rng.integers(-2, 3)) * half,
            )
            for j in range(size)
        ]
        for i in range(size)
    ]
    return Matrix(rows, EXACT)


def _square(eta: Form, p: int) -> Form:
    return eta.wedge(eta.conjugate()).scale(sigma(p, EXACT))


def _attempt(n: int, p: int, kind: ExtremalKind, rng: np.random.Generator, count: int) -> Form:
    q = n - p
    size = comb(n, p)
    k = pluecker_codim(n, q)
    basis = _random_basis(size, rng)
    if EXACT.is_zero(basis.determinant()):
        raise _Degenerate("random basis is singular")
    keys = monomial_basis(n, p, 0)
    etas = [Form.from_vector(n, keys, basis.column(j), EXACT) for j in range(size)]

    omega = Form.zero(n)
    for eta in etas[: size - k]:
        omega = omega + _square(eta, p)
    seed = int(rng.integers(2**31))
    verdict = transversality(omega, count=count, seed=seed)
    if not verdict.transverse:
        raise _Degenerate("leading basis forms share a decomposable annihilator", verdict.witness)
    if kind is ExtremalKind.EXACT_INDEX:
        return omega

    extra = _square(etas[size - k], p)
    largest = float(np.max(np.linalg.eigvalsh(pairing_matrix(extra).to_numpy())))
    scale = Fraction(verdict.margin / (2 * largest)).limit_denominator(EXTREMAL_DENOMINATOR)
    if scale <= 0:
        raise _Degenerate(
            "sampled minimum leaves no room for a negative eigenvalue", verdict.witness
        )
    candidate = omega - extra.scale(scale)
    check = transversality(candidate, count=count, seed=seed + 1)
    if not check.transverse:
        raise _Degenerate("negative-index candidate is not transverse", check.witness)
    logger.info(f"Negative-index ({p},{p})-form on n={n} built with λ = -{scale}")
    return candidate


def construct_extremal(
    n: int,
    p: int,
    kind: ExtremalKind = ExtremalKind.EXACT_INDEX,
    seed: int = DEFAULT_SEED,
    count: int = DEFAULT_SAMPLES,
    retries: int = DEFAULT_EXTREMAL_RETRIES,
) -> Form:
    """A transverse real (p,p)-form with positive index N - k, or with a negative eigenvalue.

    Raises:
        ValueError: If a negative index is requested where every transverse form is positive.
        ConstructionFailed: If every attempt produced a degenerate basis.
    """
    kind = ExtremalKind(kind)
    if not 1 <= p <= n - 1:
        raise ValueError(f"p={p} out of range for n={n}")
    if kind is ExtremalKind.NEGATIVE_INDEX and pluecker_codim(n, n - p) == 0:
        raise ValueError(f"every transverse ({p},{p})-form on n={n} is positive-definite")
    rng = np.random.default_rng(seed)
    retrying = Retrying(
        stop=stop_after_attempt(retries),
        retry=retry_if_exception_type(_Degenerate),
        before_sleep=before_sleep_log(logger, logging.INFO),
        reraise=True,
    )
    try:
        for attempt in retrying:
            with attempt:
                return _attempt(n, p, kind, rng, count)
    except _Degenerate as e:
        raise ConstructionFailed(
            f"no extremal ({p},{p})-form on n={n} after {retries} attempts: {e}", e.witness
        ) from e
    raise ConstructionFailed(f"no extremal ({p},{p})-form on n={n}")
