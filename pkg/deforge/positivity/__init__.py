"""
(p,p)-positivity toolkit.

Hermitian representations and canonical forms of real (p,p)-forms, the
Plücker codimension of decomposable (q,0)-forms, transversality verdicts,
positive-index bounds and the extremal constructions.
"""

from typing import Any, Optional

from deforge import DeforgeError


class ConstructionFailed(DeforgeError):
    """The extremal basis search ran out of retries."""

    def __init__(self, message: str, witness: Optional[Any] = None):
        super().__init__(message)
        self.witness = witness
