"""
Catalog of example algebras, the structure-constant file format and reports.
"""

from deforge import DeforgeError


class ParseError(DeforgeError):
    """Malformed structure-constant text, with a 1-based line and column."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class UnknownName(DeforgeError):
    """No catalog entry or identity with the requested name."""
