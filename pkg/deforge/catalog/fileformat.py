"""
Structure-Constant File Format.

A line-oriented text format for presentations::

    # Iwasawa manifold
    name=iwasawa
    n=3
    d w1 = 0
    d w2 = 0
    d w3 = (1+0*i)*w1^w2

Each right-hand side is a signed sum of ``coefficient*monomial`` terms, the
coefficient being a parenthesized Gaussian rational, a bare rational or ``i``
(and optional), ``w~k`` the conjugate of ``wk``. Differentials of the conjugate
generators are derived; unstated holomorphic differentials are zero.
"""

import logging
import re
from pathlib import Path
from typing import Union

from deforge.calculus import LieAlgebraPresentation
from deforge.catalog import ParseError
from deforge.exterior import Form
from deforge.scalars import EXACT, GaussianRational, ScalarField
from deforge.utils.validation import validate_identifier

logger = logging.getLogger(__name__)

_HEADER = re.compile(r"^(?P<key>[a-z]+)\s*=\s*(?P<value>.*)$")
_DIFFERENTIAL = re.compile(r"^d\s+w(?P<conj>~?)(?P<index>\d+)\s*=\s*")
_TERM = re.compile(
    r"\s*(?P<sign>[+-])?\s*"
    r"(?:(?P<coef>\([^()]*\)|\d+(?:/\d+)?|i)\s*\*\s*)?"
    r"(?P<mono>w~?\d+(?:\s*\^\s*w~?\d+)*)\s*"
)
_GENERATOR = re.compile(r"w(~?)(\d+)")


def _coefficient(text: str, line: int, column: int) -> GaussianRational:
    if text is None:
        return GaussianRational(1)
    if text.startswith("("):
        text = text[1:-1]
    try:
        return GaussianRational.parse(text)
    except ValueError as e:
        raise ParseError(str(e), line, column) from e


def _generator(match: re.Match, n: int, line: int, column: int) -> int:
    k = int(match.group(2))
    if not 1 <= k <= n:
        raise ParseError(f"generator w{match.group(1)}{k} outside 1..{n}", line, column)
    return k - 1 + (n if match.group(1) else 0)


def parse_polynomial(
    text: str, n: int, fld: ScalarField = EXACT, line: int = 0, offset: int = 0
) -> Form:
    """Parse a sum of terms into a form; ``offset`` is the 0-based column of ``text``.

    Raises:
        ParseError: On any malformed term.
    """
    stripped = text.strip()
    if stripped in ("", "0"):
        if not stripped:
            raise ParseError("empty right-hand side", line, offset + 1)
        return Form.zero(n, fld)
    total = Form.zero(n, fld)
    pos = 0
    while pos < len(text):
        match = _TERM.match(text, pos)
        if match is None or match.end() == pos:
            raise ParseError(f"cannot parse term at {text[pos:pos + 12]!r}", line, offset + pos + 1)
        if pos > 0 and match.group("sign") is None:
            raise ParseError("terms must be separated by + or -", line, offset + pos + 1)
        coefficient = _coefficient(match.group("coef"), line, offset + match.start("coef") + 1)
        if match.group("sign") == "-":
            coefficient = -coefficient
        term = Form.one(n, fld).scale(coefficient)
        for gen in _GENERATOR.finditer(match.group("mono")):
            column = offset + match.start("mono") + gen.start() + 1
            term = term.wedge(Form.generator(n, _generator(gen, n, line, column), fld))
        total = total + term
        pos = match.end()
    return total


def parse(text: str, fld: ScalarField = EXACT) -> LieAlgebraPresentation:
    """Parse structure-constant text into a validated presentation.

    Raises:
        ParseError: With the 1-based line and column of the problem.
        InvariantViolation: If the parsed equations fail d² = 0 or integrability.
    """
    header: dict[str, str] = {}
    differentials: dict[int, Form] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        indent = len(line) - len(line.lstrip())
        line = line.strip()
        d_match = _DIFFERENTIAL.match(line)
        if d_match:
            if "n" not in header:
                raise ParseError("'n=' must precede the differentials", number, indent + 1)
            n = int(header["n"])
            if d_match.group("conj"):
                raise ParseError(
                    "conjugate differentials are derived, not stated", number, indent + 1
                )
            k = int(d_match.group("index"))
            if not 1 <= k <= n:
                raise ParseError(f"generator w{k} outside 1..{n}", number, indent + 1)
            if k - 1 in differentials:
                raise ParseError(f"d w{k} stated twice", number, indent + 1)
            differentials[k - 1] = parse_polynomial(
                line[d_match.end():], n, fld, number, indent + d_match.end()
            )
            continue
        h_match = _HEADER.match(line)
        if not h_match:
            raise ParseError(f"unrecognized line {line!r}", number, indent + 1)
        key, value = h_match.group("key"), h_match.group("value").strip()
        if key not in ("name", "n"):
            raise ParseError(f"unknown header key {key!r}", number, indent + 1)
        if key in header:
            raise ParseError(f"header {key!r} given twice", number, indent + 1)
        if key == "n" and not (value.isdigit() and int(value) >= 1):
            raise ParseError(f"n must be a positive integer, got {value!r}", number, indent + 3)
        if key == "name":
            is_valid, error = validate_identifier(value)
            if not is_valid:
                raise ParseError(error, number, indent + 6)
        header[key] = value
    if "name" not in header or "n" not in header:
        raise ParseError("missing 'name=' or 'n=' header", 1, 1)
    n = int(header["n"])
    table = [differentials.get(k, Form.zero(n, fld)) for k in range(n)]
    alg = LieAlgebraPresentation(header["name"], n, table, fld)
    logger.debug(f"Parsed presentation {alg.name} with n={n}")
    return alg


def load(path: Union[str, Path], fld: ScalarField = EXACT) -> LieAlgebraPresentation:
    """Read and parse a structure-constant file."""
    text = Path(path).read_text(encoding="utf-8")
    logger.info(f"Loading structure constants from {path}")
    return parse(text, fld)


def dump(alg: LieAlgebraPresentation) -> str:
    lines = [f"name={alg.name}", f"n={alg.n}"]
    lines += [f"d w{k + 1} = {alg.d_table[k].format()}" for k in range(alg.n)]
    return "\n".join(lines) + "\n"


def save(alg: LieAlgebraPresentation, path: Union[str, Path]) -> None:
    Path(path).write_text(dump(alg), encoding="utf-8")


def parse_form(text: str, fld: ScalarField = EXACT) -> Form:
    """Parse a single form given as ``n=<dim>`` and ``form = <terms>`` lines.

    Raises:
        ParseError: With the 1-based line and column of the problem.
    """
    n = None
    result = None
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        indent = len(line) - len(line.lstrip())
        match = _HEADER.match(line.strip())
        if not match:
            raise ParseError(f"unrecognized line {line.strip()!r}", number, indent + 1)
        key, value = match.group("key"), match.group("value")
        if key == "n":
            if not (value.strip().isdigit() and int(value) >= 1):
                raise ParseError(f"n must be a positive integer, got {value!r}", number, indent + 3)
            n = int(value)
        elif key == "form":
            if n is None:
                raise ParseError("'n=' must precede the form", number, indent + 1)
            if result is not None:
                raise ParseError("form given twice", number, indent + 1)
            result = parse_polynomial(value, n, fld, number, indent + match.start("value"))
        elif key != "name":
            raise ParseError(f"unknown key {key!r}", number, indent + 1)
    if result is None:
        raise ParseError("missing 'form =' line", 1, 1)
    return result


def load_form(path: Union[str, Path], fld: ScalarField = EXACT) -> Form:
    logger.info(f"Loading form from {path}")
    return parse_form(Path(path).read_text(encoding="utf-8"), fld)
