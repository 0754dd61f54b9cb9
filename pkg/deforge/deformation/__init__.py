"""
Deformation Package.

Truncated power series in the deformation parameter and the order-by-order
solvers built on them: Kuranishi family, Kähler and balanced extensions,
d-closed extension by projection, verifiers and majorant comparison.
"""

from typing import Any, Optional

from deforge import DeforgeError


class ObstructionHit(DeforgeError):
    """An order-by-order equation had no solution.

    ``order`` is the total degree in (t, t̄), ``equation`` names the failing
    equation and ``witness`` is the obstructing form.
    """

    def __init__(self, order: int, equation: str, witness: Optional[Any] = None):
        super().__init__(f"obstruction at order {order} in {equation}")
        self.order = order
        self.equation = equation
        self.witness = witness


class ExtensionError(DeforgeError):
    """A solver produced a series that breaks one of its own invariants.

    ``structure`` names the solver and ``detail`` holds the offending value.
    """

    def __init__(self, structure: str, reason: str, detail: Optional[Any] = None):
        super().__init__(f"{structure} extension: {reason}")
        self.structure = structure
        self.detail = detail
