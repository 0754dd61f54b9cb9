"""
Tests for the scalar backends.

Covers Gaussian rational arithmetic and parsing, report formatting and the
exact/float field objects.
"""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deforge.scalars import (
    EXACT,
    BackendMismatch,
    FloatField,
    GaussianRational,
    format_exact,
    get_field,
)

rationals = st.fractions(max_denominator=12).filter(lambda f: abs(f) < 50)
gaussians = st.builds(GaussianRational, rationals, rationals)


class TestGaussianRational:
    """Tests for exact complex scalars."""

    def test_multiplication(self):
        """Test (1+2i)(3-i) = 5+5i."""
        assert GaussianRational(1, 2) * GaussianRational(3, -1) == GaussianRational(5, 5)

    def test_division(self):
        """Test 1/i = -i."""
        assert GaussianRational(1) / GaussianRational(0, 1) == GaussianRational(0, -1)

    def test_division_by_zero(self):
        """Test dividing by zero raises."""
        with pytest.raises(ZeroDivisionError):
            GaussianRational(1) / GaussianRational(0)

    def test_integers_coerce(self):
        """Test ints and Fractions mix transparently."""
        z = GaussianRational(Fraction(1, 2), 1)
        assert 2 * z == GaussianRational(1, 2)
        assert z - 1 == GaussianRational(Fraction(-1, 2), 1)
        assert z == GaussianRational(Fraction(1, 2), 1)

    def test_float_rejected(self):
        """Test floats never enter the exact backend."""
        with pytest.raises(BackendMismatch):
            GaussianRational(0.5)
        with pytest.raises(BackendMismatch):
            GaussianRational(1) + 0.5

    def test_power(self):
        """Test i^4 = 1 and negative powers."""
        i = GaussianRational(0, 1)
        assert i**4 == GaussianRational(1)
        assert i**-1 == GaussianRational(0, -1)

    def test_immutable(self):
        """Test attributes cannot be reassigned."""
        z = GaussianRational(1)
        with pytest.raises(AttributeError):
            z.re = Fraction(2)

    def test_hash_matches_rational(self):
        """Test real Gaussian rationals hash like their rational value."""
        assert hash(GaussianRational(3)) == hash(Fraction(3))

    @pytest.mark.parametrize(
        "text,expected",
        [
            ("1", GaussianRational(1)),
            ("-1/2", GaussianRational(Fraction(-1, 2))),
            ("i", GaussianRational(0, 1)),
            ("-i", GaussianRational(0, -1)),
            ("3/4*i", GaussianRational(0, Fraction(3, 4))),
            ("1+0*i", GaussianRational(1)),
            ("-1/2-3/4*i", GaussianRational(Fraction(-1, 2), Fraction(-3, 4))),
            ("2 + i", GaussianRational(2, 1)),
        ],
    )
    def test_parse(self, text, expected):
        """Test literal parsing."""
        assert GaussianRational.parse(text) == expected

    @pytest.mark.parametrize("text", ["", "x", "1.5", "1/2/3", "2+x*i"])
    def test_parse_invalid(self, text):
        """Test malformed literals raise ValueError."""
        with pytest.raises(ValueError):
            GaussianRational.parse(text)

    @pytest.mark.parametrize(
        "value,text",
        [
            (GaussianRational(1), "1+0*i"),
            (GaussianRational(Fraction(-1, 2), Fraction(-3, 4)), "-1/2-3/4*i"),
            (GaussianRational(0, 2), "0+2*i"),
        ],
    )
    def test_format_exact(self, value, text):
        """Test canonical report text."""
        assert format_exact(value) == text

    @settings(max_examples=200, derandomize=True)
    @given(gaussians)
    def test_format_parses_back(self, z):
        """Test report text parses back to the same value."""
        assert GaussianRational.parse(format_exact(z)) == z

    @settings(max_examples=200, derandomize=True)
    @given(gaussians, gaussians, gaussians)
    def test_distributive(self, a, b, c):
        """Test a(b+c) = ab+ac."""
        assert a * (b + c) == a * b + a * c

    @settings(max_examples=200, derandomize=True)
    @given(gaussians)
    def test_abs2_is_norm(self, z):
        """Test |z|^2 = z conj(z)."""
        assert z * z.conjugate() == GaussianRational(z.abs2())


class TestFields:
    """Tests for the exact and float field objects."""

    def test_get_field(self):
        """Test backend lookup by name."""
        assert get_field("exact") is EXACT
        assert isinstance(get_field("float", 1e-6), FloatField)
        assert get_field("float", 1e-6).tolerance == 1e-6

    def test_get_field_unknown(self):
        """Test unknown backends raise ValueError."""
        with pytest.raises(ValueError):
            get_field("quad")

    def test_exact_coerce(self):
        """Test exact coercion of ints, Fractions and literals."""
        assert EXACT.coerce(2) == GaussianRational(2)
        assert EXACT.coerce("1/2*i") == GaussianRational(0, Fraction(1, 2))
        with pytest.raises(BackendMismatch):
            EXACT.coerce(1.0)

    def test_float_tolerance(self):
        """Test the float field compares with its tolerance."""
        fld = FloatField(1e-6)
        assert fld.is_zero(1e-7)
        assert not fld.is_zero(1e-5)
        assert fld.eq(1.0, 1.0 + 1e-8)

    def test_sign(self):
        """Test sign of real scalars and rejection of non-real ones."""
        assert EXACT.sign(GaussianRational(-2)) == -1
        assert FloatField().sign(0j) == 0
        with pytest.raises(ValueError):
            EXACT.sign(GaussianRational(0, 1))

    def test_check_compatible(self):
        """Test mixing backends raises BackendMismatch."""
        with pytest.raises(BackendMismatch):
            EXACT.check_compatible(FloatField())
        FloatField(1e-3).check_compatible(FloatField(1e-9))

    def test_float_format(self):
        """Test float values format with twelve significant digits."""
        assert FloatField().format(0.5 - 0.25j) == "0.5-0.25*i"
