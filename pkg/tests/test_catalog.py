"""
Tests for the catalog package.

Covers the structure-constant file format, the built-in entries with their
self-checked facts, the process-wide catalog cache and report serialization.
"""

import json
import logging
from enum import Enum
from fractions import Fraction

import numpy as np
import pytest
from pydantic import ValidationError

from deforge.calculus import InvariantViolation
from deforge.catalog import ParseError, UnknownName
from deforge.catalog.builtin import (
    SHIPPED_NAMES,
    Catalog,
    CatalogEntry,
    Fact,
    Provenance,
    builtin,
    is_builtin,
)
from deforge.catalog.fileformat import dump, load, load_form, parse, parse_form, save
from deforge.catalog.report import FactModel, ReportModel, emit_report, parse_report, to_jsonable
from deforge.constants import REPORT_SCHEMA
from deforge.deformation.series import form_series
from deforge.exterior import Form
from deforge.hodge import HermitianMetric
from deforge.lemmata import Classification
from deforge.scalars import EXACT, GaussianRational

HEADER = "name=test\nn=2\n"


class TestParse:
    """Tests for parsing structure-constant text."""

    def test_iwasawa(self, iwasawa_text):
        """Test the Iwasawa file parses with derived conjugate differentials."""
        alg = parse(iwasawa_text)
        assert alg.name == "iwasawa"
        assert alg.n == 3
        w12 = Form.generator(3, 0).wedge(Form.generator(3, 1))
        assert alg.d_table[2].equals(w12)
        assert alg.d_table[5].equals(w12.conjugate())
        assert alg.d_table[0].is_zero()

    def test_coefficients(self):
        """Test parenthesized, bare and imaginary coefficients."""
        text = "name=c\nn=3\nd w3 = (1/2+3*i)*w1^w2 - i*w1^w~1 + 2/3*w2^w~2\n"
        d3 = parse(text).d_table[2]
        assert d3.coefficient((0, 1)) == GaussianRational(Fraction(1, 2), 3)
        assert d3.coefficient((0, 3)) == GaussianRational(0, -1)
        assert d3.coefficient((1, 4)) == GaussianRational(Fraction(2, 3))

    def test_comments_and_blank_lines(self):
        """Test comments and blank lines are ignored."""
        text = "# header\n\nname=t  # trailing\nn=2\n\nd w2 = w1^w~1\n"
        assert parse(text).d_table[1].equals(Form(2, {(0, 2): 1}))

    def test_unstated_differentials_vanish(self):
        """Test missing differentials default to zero."""
        alg = parse(HEADER)
        assert all(d.is_zero() for d in alg.d_table)

    @pytest.mark.parametrize(
        "text,line,column,message",
        [
            ("name=x\nd w1 = 0\n", 2, 1, "must precede"),
            (HEADER + "d w~1 = 0\n", 3, 1, "derived"),
            (HEADER + "d w3 = 0\n", 3, 1, "outside"),
            (HEADER + "d w1 = 0\nd w1 = 0\n", 4, 1, "twice"),
            (HEADER + "foo bar\n", 3, 1, "unrecognized"),
            ("name=x\nn=two\n", 2, 3, "positive integer"),
            ("n=2\nd w1 = 0\n", 1, 1, "missing"),
            (HEADER + "size=3\n", 3, 1, "unknown header"),
            (HEADER + "n=3\n", 3, 1, "given twice"),
            (HEADER + "d w2 = w1^w~1 w1\n", 3, 15, "separated"),
            (HEADER + "d w2 = w1^w3\n", 3, 11, "outside"),
            (HEADER + "d w2 =\n", 3, 7, "empty"),
            (HEADER + "d w2 = (1/2x)*w1^w~1\n", 3, 8, "Gaussian rational"),
        ],
    )
    def test_errors_carry_position(self, text, line, column, message):
        """Test malformed input reports the line and column."""
        with pytest.raises(ParseError) as exc:
            parse(text)
        assert exc.value.line == line
        assert exc.value.column == column
        assert message in str(exc.value)

    def test_structural_violation(self):
        """Test parsed equations are validated."""
        with pytest.raises(InvariantViolation) as exc:
            parse(HEADER + "d w2 = w~1^w~2\n")
        assert exc.value.check == "integrability"

    @pytest.mark.parametrize("name", ["iwasawa", "abelian_I0", "category_iii", "torus_2"])
    def test_dump_round_trip(self, name):
        """Test dumped presentations parse back to the same equations."""
        alg = builtin(name).algebra
        again = parse(dump(alg))
        assert again.name == alg.name
        assert all(a.equals(b) for a, b in zip(again.d_table, alg.d_table))

    def test_save_and_load(self, iwasawa, tmp_path):
        """Test files written by save are read by load."""
        path = tmp_path / "iwasawa.nil"
        save(iwasawa, path)
        assert path.read_text(encoding="utf-8").startswith("name=iwasawa\n")
        assert load(path).d_table[2].equals(iwasawa.d_table[2])


class TestParseForm:
    """Tests for single-form files."""

    def test_parse_form(self):
        """Test a form file parses into a form."""
        form = parse_form("n=3\nform = i*w1^w~1 + 2*w2^w~2\n")
        assert form.equals(Form(3, {(0, 3): GaussianRational(0, 1), (1, 4): 2}))

    def test_load_form(self, tmp_path):
        """Test reading a form from disk."""
        path = tmp_path / "omega.form"
        path.write_text("name=omega\nn=2\nform = w1^w~1\n", encoding="utf-8")
        assert load_form(path).equals(Form(2, {(0, 2): 1}))

    @pytest.mark.parametrize(
        "text,message",
        [
            ("form = w1\n", "must precede"),
            ("n=2\n", "missing"),
            ("n=2\nform = w1\nform = w2\n", "twice"),
            ("n=2\ncolor = red\n", "unknown key"),
            ("n=0\nform = w1\n", "positive integer"),
        ],
    )
    def test_errors(self, text, message):
        """Test malformed form files."""
        with pytest.raises(ParseError) as exc:
            parse_form(text)
        assert message in str(exc.value)


class TestBuiltin:
    """Tests for the built-in entries and their facts."""

    @pytest.mark.parametrize("name", SHIPPED_NAMES)
    def test_shipped_entries_build(self, name):
        """Test every shipped entry builds and passes its self-check."""
        entry = builtin(name)
        assert entry.algebra.n >= 2
        if entry.provenance is not Provenance.EXTERNAL:
            assert all(f.matches for f in entry.facts)

    def test_iwasawa_facts(self):
        """Test the recorded Iwasawa facts."""
        entry = builtin("iwasawa")
        assert entry.classification is Classification.COMPLEX_PARALLELIZABLE
        assert entry.fact("lemma.mild").actual is False
        assert entry.fact("lemma.dual_mild").actual is True
        assert entry.fact("balanced").matches
        assert entry.fact("nonexistent") is None

    def test_abelian_facts(self):
        """Test the transcribed abelian structure reproduces its facts."""
        entry = builtin("abelian_I0")
        assert entry.provenance is Provenance.EXTERNAL
        assert all(f.matches for f in entry.facts)
        assert entry.convention.startswith("d w3 = λ")

    def test_parameterized_names(self):
        """Test parameters are parsed from the name."""
        assert builtin("torus_2").algebra.n == 2
        assert is_builtin("torus_7")
        assert builtin("category_iii(2)").algebra.name == "category_iii(2)"
        assert builtin("i_lambda(1/2)").algebra.name == "i_lambda(1/2)"

    @pytest.mark.parametrize("name", ["torus_1", "klein", "i_lambda(x)"])
    def test_unknown_names(self, name):
        """Test unmatched names raise UnknownName."""
        with pytest.raises(UnknownName):
            builtin(name)

    def test_is_builtin(self):
        """Test name matching without building."""
        assert is_builtin("i_lambda(3/4)")
        assert is_builtin(" iwasawa ")
        assert not is_builtin("klein")


class TestSelfCheck:
    """Tests for fact re-derivation."""

    def _entry(self, provenance):
        alg = builtin("iwasawa").algebra
        facts = [Fact("lemma.mild", True, Provenance.PAPER, "deliberately wrong")]
        return CatalogEntry("wrong", alg, HermitianMetric.standard(3, EXACT), provenance, facts)

    def test_external_mismatch_is_logged(self, caplog):
        """Test a mismatch on transcribed equations warns and is returned."""
        entry = self._entry(Provenance.EXTERNAL)
        with caplog.at_level(logging.WARNING, logger="deforge.catalog.builtin"):
            mismatches = entry.self_check()
        assert [f.name for f in mismatches] == ["lemma.mild"]
        assert "mismatch" in caplog.text

    def test_own_mismatch_raises(self):
        """Test a mismatch on our own equations is an invariant violation."""
        with pytest.raises(InvariantViolation) as exc:
            self._entry(Provenance.DERIVED).self_check()
        assert exc.value.check == "catalog-fact"

    def test_unknown_fact(self):
        """Test facts without a derivation raise KeyError."""
        entry = self._entry(Provenance.EXTERNAL)
        entry.facts = [Fact("spin", True, Provenance.DERIVED)]
        with pytest.raises(KeyError):
            entry.self_check()

    def test_fact_to_dict(self):
        """Test fact dictionaries use plain values."""
        data = builtin("torus_2").fact("classification").to_dict()
        assert data == {
            "name": "classification",
            "expected": "abelian",
            "actual": "abelian",
            "provenance": "DERIVED",
            "matches": True,
            "note": "",
        }


class TestCatalogCache:
    """Tests for the process-wide catalog."""

    def test_entries_are_cached(self, mocker):
        """Test an entry is built and self-checked once."""
        spy = mocker.spy(CatalogEntry, "self_check")
        first = builtin("iwasawa")
        second = Catalog().get("iwasawa")
        assert first is second
        assert spy.call_count == 1

    def test_catalog_is_singleton(self):
        """Test every call returns the same catalog."""
        assert Catalog() is Catalog()
        assert Catalog().names() == SHIPPED_NAMES

    def test_reset_rebuilds(self):
        """Test resetting the singleton drops cached entries."""
        first = builtin("torus_2")
        Catalog.reset_instance()
        assert builtin("torus_2") is not first


class Color(Enum):
    RED = "red"


class TestReport:
    """Tests for report serialization."""

    @pytest.mark.parametrize(
        "value,expected",
        [
            (GaussianRational(Fraction(-1, 2), Fraction(3, 4)), "-1/2+3/4*i"),
            (GaussianRational(1, -2), "1-2*i"),
            (Fraction(1, 3), "1/3"),
            (0.1234567890123456, 0.123456789012),
            (Color.RED, "red"),
            ({3, 1, 2}, [1, 2, 3]),
            ((1, "a"), [1, "a"]),
            (np.int64(4), 4),
            (None, None),
        ],
    )
    def test_to_jsonable(self, value, expected):
        """Test conversion of scalars and containers."""
        assert to_jsonable(value) == expected

    def test_forms_and_series(self):
        """Test forms use the file syntax and series use bi-index keys."""
        form = Form(2, {(0, 2): 1})
        assert to_jsonable(form) == "(1+0*i)*w1^w~1"
        series = form_series(2, EXACT, 1, terms={((1,), (0,)): form})
        assert to_jsonable(series) == {"1|0": "(1+0*i)*w1^w~1"}

    def test_unsupported(self):
        """Test unknown objects raise TypeError."""
        with pytest.raises(TypeError):
            to_jsonable(object())

    def test_emit_is_deterministic(self):
        """Test emitting sorts keys and ends with a newline."""
        results = {"b": 1, "a": Fraction(1, 2)}
        report = ReportModel(command="lemma", algebra="iwasawa", results=results)
        text = emit_report(report)
        assert text == emit_report(report)
        assert text.endswith("\n")
        data = json.loads(text)
        assert data["schema"] == REPORT_SCHEMA
        assert data["results"] == {"a": "1/2", "b": 1}
        assert list(data) == sorted(data)

    def test_round_trip(self):
        """Test parsing an emitted report."""
        fact = FactModel(
            name="kahler", expected=True, actual=True, provenance="DERIVED", matches=True
        )
        report = ReportModel(command="catalog", passed=False, facts=[fact], seed=4)
        parsed = parse_report(emit_report(report))
        assert parsed.command == "catalog"
        assert parsed.passed is False
        assert parsed.seed == 4
        assert parsed.facts[0].name == "kahler"

    def test_rejects_unknown_fields(self):
        """Test reports with extra fields fail validation."""
        text = json.dumps({"schema": REPORT_SCHEMA, "command": "fuzz", "extra": 1})
        with pytest.raises(ValidationError):
            parse_report(text)

    def test_requires_command(self):
        """Test the command is mandatory and non-empty."""
        with pytest.raises(ValidationError):
            ReportModel(command="")

    def test_foreign_schema_warns(self, caplog):
        """Test a different schema id is accepted with a warning."""
        text = json.dumps({"schema": "other/9", "command": "fuzz"})
        with caplog.at_level(logging.WARNING, logger="deforge.catalog.report"):
            report = parse_report(text)
        assert report.schema_id == "other/9"
        assert "differs" in caplog.text
