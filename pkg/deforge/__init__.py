"""
Deform Forge.

Exact-arithmetic engine for deformations of invariant complex structures on
nilmanifolds: extension maps, Kuranishi series, Kähler and balanced
obstruction systems, the (n-1,n) ddbar-lemma family and (p,p)-positivity.
"""

__version__ = "1.0.0"


class DeforgeError(Exception):
    """Base class for every error raised by the engine."""
