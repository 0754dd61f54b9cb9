"""
Built-in Catalog.

Example algebras with their default metric and known facts. Every fact
carries a provenance tag and is re-derived when the entry is first built;
a mismatch on an entry whose equations are our own raises, a mismatch on an
entry transcribed from an outside source is logged and reported.

Entries are built lazily, once per name, by a process-wide catalog.
"""

import logging
import re
import threading
from collections.abc import Callable
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Optional

from deforge.calculus import InvariantViolation, LieAlgebraPresentation, ce_d
from deforge.catalog import UnknownName
from deforge.deformation.balanced import form_power
from deforge.exterior import Form
from deforge.hodge import HermitianMetric
from deforge.lemmata import Classification, LemmaKind, check_lemma, classify
from deforge.scalars import EXACT, GaussianRational
from deforge.utils.singleton import SingletonMeta

logger = logging.getLogger(__name__)


class Provenance(str, Enum):
    PAPER = "PAPER"
    DERIVED = "DERIVED"
    EXTERNAL = "EXTERNAL"


@dataclass
class Fact:
    """An expected value with its source; ``actual`` is filled in by the self-check."""

    name: str
    expected: Any
    provenance: Provenance
    note: str = ""
    actual: Any = None

    @property
    def matches(self) -> bool:
        return self.actual == self.expected

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "expected": _plain(self.expected),
            "actual": _plain(self.actual),
            "provenance": self.provenance.value,
            "matches": self.matches,
            "note": self.note,
        }


def _plain(value: Any) -> Any:
    return value.value if isinstance(value, Enum) else value


@dataclass
class CatalogEntry:
    name: str
    algebra: LieAlgebraPresentation
    metric: HermitianMetric
    provenance: Provenance
    facts: list[Fact] = field(default_factory=list)
    convention: str = ""

    def fact(self, name: str) -> Optional[Fact]:
        return next((f for f in self.facts if f.name == name), None)

    @property
    def classification(self):
        fact = self.fact("classification")
        return fact.actual if fact is not None else classify(self.algebra)

    def self_check(self) -> list[Fact]:
        """Re-derive every fact; returns the mismatches.

        Raises:
            InvariantViolation: On a mismatch of an entry that is not externally sourced.
        """
        for fact in self.facts:
            fact.actual = _derive(self, fact.name)
        mismatches = [f for f in self.facts if not f.matches]
        for fact in mismatches:
            message = (
                f"{self.name}: {fact.name} expected {_plain(fact.expected)}, "
                f"got {_plain(fact.actual)}"
            )
            if self.provenance is Provenance.EXTERNAL:
                logger.warning(f"Catalog fact mismatch on transcribed equations: {message}")
            else:
                raise InvariantViolation("catalog-fact", message)
        return mismatches


def _derive(entry: CatalogEntry, name: str) -> Any:
    alg = entry.algebra
    if name == "classification":
        return classify(alg)
    if name.startswith("lemma."):
        return check_lemma(alg, LemmaKind(name.split(".", 1)[1])).holds
    if name == "balanced":
        omega = entry.metric.fundamental_form()
        return ce_d(alg, form_power(omega, alg.n - 1)).is_zero()
    if name == "kahler":
        return ce_d(alg, entry.metric.fundamental_form()).is_zero()
    raise KeyError(f"no derivation for fact {name!r}")


# ----------------------------------------------------------------------
# Structure equations
# ----------------------------------------------------------------------


def _w(n: int, *names: str) -> Form:
    """Coefficient-one monomial from names like "1", "~2" (1-based, ~ for conjugate)."""
    result = Form.one(n)
    for name in names:
        k = int(name.lstrip("~")) - 1
        result = result.wedge(Form.generator(n, n + k if name.startswith("~") else k))
    return result


def torus(n: int) -> CatalogEntry:
    alg = LieAlgebraPresentation(f"torus_{n}", n, [Form.zero(n)] * n)
    facts = [
        Fact(f"lemma.{kind.value}", True, Provenance.DERIVED, "all differentials vanish")
        for kind in LemmaKind
    ]
    facts += [
        Fact("classification", Classification.ABELIAN, Provenance.DERIVED),
        Fact("kahler", True, Provenance.DERIVED),
    ]
    return CatalogEntry(
        alg.name, alg, HermitianMetric.standard(n, EXACT), Provenance.DERIVED, facts
    )


def iwasawa() -> CatalogEntry:
    n = 3
    alg = LieAlgebraPresentation("iwasawa", n, [Form.zero(n), Form.zero(n), _w(n, "1", "2")])
    facts = [
        Fact("classification", Classification.COMPLEX_PARALLELIZABLE, Provenance.PAPER),
        Fact("lemma.weak", True, Provenance.PAPER),
        Fact("lemma.dual_mild", True, Provenance.PAPER),
        Fact(
            "lemma.mild",
            False,
            Provenance.PAPER,
            "∂(w3^w~1^w~2^w~3) = w1^w2^w~1^w~2^w~3 is not ∂∂̄-exact",
        ),
        Fact("balanced", True, Provenance.DERIVED, "complex parallelizable"),
    ]
    return CatalogEntry(
        "iwasawa",
        alg,
        HermitianMetric.standard(n, EXACT),
        Provenance.PAPER,
        facts,
        convention="d w3 = w1^w2",
    )


def i_lambda(value: Fraction) -> CatalogEntry:
    n = 3
    lam = GaussianRational(value)
    d3 = _w(n, "1", "2").scale(lam) + _w(n, "1", "~1") + _w(n, "1", "~2") - _w(n, "2", "~2")
    name = "abelian_I0" if value == 0 else f"i_lambda({value})"
    alg = LieAlgebraPresentation(name, n, [Form.zero(n), Form.zero(n), d3])
    facts = [Fact("balanced", True, Provenance.PAPER, "standard metric is balanced")]
    if value != 0:
        facts.append(Fact("lemma.weak", False, Provenance.PAPER))
    else:
        facts += [
            Fact("classification", Classification.ABELIAN, Provenance.DERIVED),
            Fact("lemma.mild", True, Provenance.PAPER, "abelian complex structures"),
            Fact("lemma.dual_mild", False, Provenance.DERIVED),
        ]
    return CatalogEntry(
        name,
        alg,
        HermitianMetric.standard(n, EXACT),
        Provenance.EXTERNAL,
        facts,
        convention="d w3 = λ w1^w2 + w1^w~1 + w1^w~2 - w2^w~2",
    )


def category_iii(epsilon: Fraction = Fraction(1)) -> CatalogEntry:
    n = 3
    i = GaussianRational(0, 1)
    d2 = _w(n, "1", "3") + _w(n, "1", "~3")
    d3 = _w(n, "1", "~1").scale(i * epsilon) + (_w(n, "1", "~2") - _w(n, "2", "~1")).scale(i)
    name = "category_iii" if epsilon == 1 else f"category_iii({epsilon})"
    alg = LieAlgebraPresentation(name, n, [Form.zero(n), d2, d3])
    facts = [Fact("classification", Classification.NON_NILPOTENT, Provenance.PAPER)]
    return CatalogEntry(
        name,
        alg,
        HermitianMetric.standard(n, EXACT),
        Provenance.DERIVED,
        facts,
        convention="d w2 = w1^w3 + w1^w~3, d w3 = iε w1^w~1 + i(w1^w~2 - w2^w~1)",
    )


# ----------------------------------------------------------------------
# Registry
# ----------------------------------------------------------------------

_BUILDERS: list[tuple[re.Pattern, Callable[[re.Match], CatalogEntry]]] = []

SHIPPED_NAMES = ("torus_2", "torus_3", "iwasawa", "abelian_I0", "category_iii", "i_lambda(1)")


def register_entry(pattern: str) -> Callable:
    """Decorator registering a builder for names matching ``pattern``."""

    def decorator(
        builder: Callable[[re.Match], CatalogEntry],
    ) -> Callable[[re.Match], CatalogEntry]:
        _BUILDERS.append((re.compile(pattern + r"$"), builder))
        return builder

    return decorator


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as e:
        raise UnknownName(f"not a rational parameter: {text!r}") from e


@register_entry(r"torus_(\d+)")
def _build_torus(match: re.Match) -> CatalogEntry:
    n = int(match.group(1))
    if n < 2:
        raise UnknownName("torus_n needs n >= 2")
    return torus(n)


@register_entry(r"iwasawa")
def _build_iwasawa(match: re.Match) -> CatalogEntry:
    return iwasawa()


@register_entry(r"abelian_I0")
def _build_abelian(match: re.Match) -> CatalogEntry:
    return i_lambda(Fraction(0))


@register_entry(r"i_lambda\(([^()]+)\)")
def _build_i_lambda(match: re.Match) -> CatalogEntry:
    return i_lambda(_rational(match.group(1)))


@register_entry(r"category_iii(?:\(([^()]+)\))?")
def _build_category_iii(match: re.Match) -> CatalogEntry:
    return category_iii(_rational(match.group(1)) if match.group(1) else Fraction(1))


class Catalog(metaclass=SingletonMeta):
    """Process-wide cache of self-checked catalog entries."""

    def __init__(self):
        self._entries: dict[str, CatalogEntry] = {}
        self._lock = threading.Lock()

    def get(self, name: str) -> CatalogEntry:
        """Build (once) and return an entry.

        Raises:
            UnknownName: If no registered pattern matches.
            InvariantViolation: If a self-check fails on a non-external entry.
        """
        name = name.strip()
        with self._lock:
            entry = self._entries.get(name)
            if entry is not None:
                return entry
            for pattern, builder in _BUILDERS:
                match = pattern.match(name)
                if match:
                    entry = builder(match)
                    break
            else:
                raise UnknownName(f"no catalog entry named {name!r}")
            mismatches = entry.self_check()
            logger.info(f"Catalog entry {entry.name} built, {len(mismatches)} fact mismatch(es)")
            self._entries[name] = entry
            return entry

    def names(self) -> tuple[str, ...]:
        return SHIPPED_NAMES


def builtin(name: str) -> CatalogEntry:
    return Catalog().get(name)


def is_builtin(name: str) -> bool:
    return any(pattern.match(name.strip()) for pattern, _ in _BUILDERS)
