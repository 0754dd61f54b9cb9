"""
Decomposable (q,0)-forms.

A decomposable τ = γ_1∧...∧γ_q is carried as a q×n frame of coefficient rows;
its coordinates in the monomial basis of Λ^{q,0} are the q×q minors of the
frame (Plücker coordinates).
"""

import logging
from collections.abc import Sequence
from math import comb, pi
from typing import Optional

import numpy as np

from deforge.exterior import Form, monomial_basis
from deforge.linalg import Matrix
from deforge.scalars import FloatField, ScalarField

logger = logging.getLogger(__name__)

SWEEP_ANGLES = 4


def pluecker_codim(n: int, q: int) -> int:
    """Codimension of the Grassmannian G(q, n) in P(Λ^q C^n): (N - 1) - pq."""
    if not 0 <= q <= n:
        raise ValueError(f"q={q} out of range for n={n}")
    return comb(n, q) - 1 - (n - q) * q


def plucker_coordinates(frames: np.ndarray, n: int, q: int) -> np.ndarray:
    """Rows of minors for a stack of q×n frames, columns in monomial order."""
    frames = np.asarray(frames, dtype=complex).reshape(-1, q, n)
    keys = monomial_basis(n, q, 0)
    out = np.empty((frames.shape[0], len(keys)), dtype=complex)
    for column, key in enumerate(keys):
        out[:, column] = np.linalg.det(frames[:, :, list(key)]) if q else 1.0
    return out


def coordinates_form(
    coords: Sequence[complex], n: int, q: int, fld: Optional[ScalarField] = None
) -> Form:
    fld = fld or FloatField()
    keys = monomial_basis(n, q, 0)
    return Form(n, {key: complex(c) for key, c in zip(keys, coords)}, fld)


def frame_form(frame: np.ndarray, fld: Optional[ScalarField] = None) -> Form:
    """γ_1∧...∧γ_q for the rows γ_i of ``frame``."""
    q, n = np.shape(frame)
    return coordinates_form(plucker_coordinates(frame, n, q)[0], n, q, fld)


def is_decomposable(tau: Form) -> bool:
    """A nonzero (q,0)-form is decomposable iff {v ∈ Λ^{1,0} : v∧τ = 0} has dimension q."""
    if tau.is_zero():
        return False
    n, fld = tau.n, tau.field
    q = tau.bidegree[0]
    if not tau.is_bihomogeneous(q, 0):
        return False
    keys = monomial_basis(n, q + 1, 0)
    columns = [
        Form.generator(n, k, fld).wedge(tau).vector(keys) for k in range(n)
    ]
    return Matrix.from_columns(columns, len(keys), fld).nullspace().ncols == q


def _unit_rows(frames: np.ndarray) -> np.ndarray:
    return frames / np.linalg.norm(frames, axis=-1, keepdims=True)


def sweep_frames(n: int, q: int) -> list[np.ndarray]:
    """Coordinate frames and their rotations of one row towards a missing axis."""
    frames = []
    eye = np.eye(n, dtype=complex)
    for key in monomial_basis(n, q, 0):
        base = eye[list(key)]
        frames.append(base)
        for row, j in enumerate(key):
            for k in range(n):
                if k in key:
                    continue
                for a in range(SWEEP_ANGLES):
                    rotated = base.copy()
                    phase = np.exp(2j * pi * a / SWEEP_ANGLES)
                    rotated[row] = (eye[j] + phase * eye[k]) / np.sqrt(2)
                    frames.append(rotated)
    return frames


def random_frames(n: int, q: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` frames of q random unit (1,0)-covectors."""
    raw = rng.standard_normal((count, q, n)) + 1j * rng.standard_normal((count, q, n))
    return _unit_rows(raw)


def sample_frames(n: int, q: int, count: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    sweep = sweep_frames(n, q)
    stacked = np.array(sweep, dtype=complex).reshape(len(sweep), q, n)
    return np.concatenate([stacked, random_frames(n, q, count, rng)])


def sample_decomposable(
    n: int,
    q: int,
    count: int,
    seed: int,
    extra: Optional[Sequence[Form]] = None,
    fld: Optional[ScalarField] = None,
) -> list[Form]:
    """Sweep frames plus ``count`` seeded random wedges of q unit (1,0)-forms.

    Raises:
        ValueError: If an extra form is not a decomposable (q,0)-form.
    """
    fld = fld or FloatField()
    frames = sample_frames(n, q, count, seed)
    coords = plucker_coordinates(frames, n, q)
    samples = [coordinates_form(row, n, q, fld) for row in coords]
    for tau in extra or ():
        if not is_decomposable(tau) or tau.bidegree != (q, 0):
            raise ValueError(f"extra sample {tau} is not a decomposable ({q},0)-form")
        samples.append(tau)
    logger.debug(f"Sampled {len(samples)} decomposable ({q},0)-forms on n={n} with seed {seed}")
    return samples


def descend(objective, frame: np.ndarray, rng: np.random.Generator, rounds: int, steps: int):
    """Random local descent on one frame; returns the best (frame, value)."""
    best = frame
    value = objective(best)
    step = 0.5
    for _ in range(rounds):
        for _ in range(steps):
            noise = rng.standard_normal(frame.shape) + 1j * rng.standard_normal(frame.shape)
            candidate = _unit_rows(best + step * noise)
            candidate_value = objective(candidate)
            if candidate_value < value:
                best, value = candidate, candidate_value
        step /= 4
    return best, value
