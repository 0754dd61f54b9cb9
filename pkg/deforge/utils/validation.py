"""
Input Validation Utilities.

Checks for user-supplied values (CLI flags, catalog names, bidegrees) that
report problems as (is_valid, error_message[, value]) tuples instead of raising.
"""

import re
from fractions import Fraction
from typing import Any

IDENTIFIER_PATTERN = re.compile(r"^[A-Za-z][A-Za-z0-9_\-\.]*$")
BIDEGREE_PATTERN = re.compile(r"^\s*(\d+)\s*,\s*(\d+)\s*$")
RATIONAL_PATTERN = re.compile(r"^[+-]?\d+(?:/\d+)?$")


def validate_identifier(name: str, max_length: int = 64) -> tuple[bool, str | None]:
    """Validate an algebra or catalog identifier.

    Returns:
        Tuple of (is_valid, error_message).
    """
    if not name:
        return False, "Identifier cannot be empty"

    if len(name) > max_length:
        return False, f"Identifier exceeds maximum length of {max_length}"

    if not IDENTIFIER_PATTERN.match(name):
        return (
            False,
            "Identifier must start with a letter and contain only letters, digits, "
            "underscore, hyphen and dot",
        )

    return True, None


def validate_bidegree(n: int, p: int, q: int) -> tuple[bool, str | None]:
    """Validate a bidegree (p, q) for complex dimension n."""
    if not 0 <= p <= n or not 0 <= q <= n:
        return False, f"Bidegree ({p},{q}) is outside 0..{n}"
    return True, None


def parse_bidegree(text: str) -> tuple[bool, str | None, tuple[int, int] | None]:
    """Parse "p,q" into a pair of integers.

    Returns:
        Tuple of (is_valid, error_message, bidegree).
    """
    match = BIDEGREE_PATTERN.match(text or "")
    if not match:
        return False, f"Bidegree must look like 'p,q', got {text!r}", None
    return True, None, (int(match.group(1)), int(match.group(2)))


def validate_order(value: Any, max_order: int = 12) -> tuple[bool, str | None, int | None]:
    """Validate a truncation order N (0 <= N <= max_order)."""
    try:
        order = int(value)
    except (ValueError, TypeError):
        return False, "Order must be an integer", None

    if order < 0:
        return False, "Order must be non-negative", None

    if order > max_order:
        return False, f"Order must be at most {max_order}", None

    return True, None, order


def validate_positive_rational(value: Any) -> tuple[bool, str | None, Fraction | None]:
    """Validate a strictly positive rational written as "a" or "a/b"."""
    text = str(value).strip()
    if not RATIONAL_PATTERN.match(text):
        return False, f"Not a rational number: {text!r}", None
    number = Fraction(text)
    if number <= 0:
        return False, "Value must be positive", None
    return True, None, number
