"""
Tests for utility modules.

This module tests the singleton metaclass, validation utilities and the
ordered parallel map.
"""

import logging
import threading
import time
from fractions import Fraction

import pytest

from deforge.constants import THREADS_ENV_VAR
from deforge.utils.parallel import resolve_workers, run_ordered
from deforge.utils.singleton import SingletonMeta
from deforge.utils.validation import (
    parse_bidegree,
    validate_bidegree,
    validate_identifier,
    validate_order,
    validate_positive_rational,
)

# =============================================================================
# SingletonMeta Tests
# =============================================================================


class TestSingletonMeta:
    """Tests for the SingletonMeta metaclass."""

    def test_singleton_returns_same_instance(self):
        """Test that singleton always returns the same instance."""

        class TestClass(metaclass=SingletonMeta):
            def __init__(self, value: int = 0):
                self.value = value

        instance1 = TestClass(1)
        instance2 = TestClass(2)

        assert instance1 is instance2
        assert instance1.value == 1

    def test_singleton_reset_instance(self):
        """Test that reset_instance allows new initialization."""

        class Resettable(metaclass=SingletonMeta):
            def __init__(self, value: int = 0):
                self.value = value

        instance1 = Resettable(10)
        Resettable.reset_instance()
        instance2 = Resettable(20)

        assert instance2.value == 20
        assert instance1 is not instance2

    def test_singleton_is_initialized_and_instance(self):
        """Test is_initialized and the instance property."""

        class Accessible(metaclass=SingletonMeta):
            pass

        assert Accessible.is_initialized() is False
        assert Accessible.instance is None

        obj = Accessible()

        assert Accessible.is_initialized() is True
        assert Accessible.instance is obj

    def test_reset_all(self):
        """Test reset_all drops every cached instance."""

        class ClassA(metaclass=SingletonMeta):
            pass

        class ClassB(metaclass=SingletonMeta):
            pass

        a = ClassA()
        ClassB()
        SingletonMeta.reset_all()

        assert not ClassB.is_initialized()
        assert ClassA() is not a

    def test_singleton_thread_safety(self):
        """Test that concurrent construction yields one instance."""

        class ThreadSafe(metaclass=SingletonMeta):
            pass

        instances = []
        threads = [
            threading.Thread(target=lambda: instances.append(ThreadSafe())) for _ in range(50)
        ]

        for t in threads:
            t.start()
        for t in threads:
            t.join()

        assert len(instances) == 50
        assert all(inst is instances[0] for inst in instances)


# =============================================================================
# Validation Tests
# =============================================================================


class TestValidateIdentifier:
    """Tests for validate_identifier."""

    @pytest.mark.parametrize("name", ["iwasawa", "torus_3", "abelian-I0", "h4.v2"])
    def test_valid_identifier(self, name):
        """Test valid identifiers."""
        assert validate_identifier(name) == (True, None)

    @pytest.mark.parametrize("name", ["", "3torus", "has space", "semi;colon"])
    def test_invalid_identifier(self, name):
        """Test invalid identifiers carry a message."""
        is_valid, error = validate_identifier(name)
        assert is_valid is False
        assert error

    def test_max_length(self):
        """Test the length limit."""
        assert validate_identifier("a" * 10, max_length=5)[0] is False


class TestBidegree:
    """Tests for bidegree parsing and validation."""

    @pytest.mark.parametrize("text,expected", [("1,1", (1, 1)), (" 2 , 0 ", (2, 0))])
    def test_parse_bidegree(self, text, expected):
        """Test valid bidegree strings."""
        assert parse_bidegree(text) == (True, None, expected)

    @pytest.mark.parametrize("text", ["", "1", "1,2,3", "a,b", "-1,0", None])
    def test_parse_bidegree_invalid(self, text):
        """Test malformed bidegrees."""
        is_valid, error, value = parse_bidegree(text)
        assert is_valid is False
        assert "p,q" in error
        assert value is None

    def test_validate_bidegree(self):
        """Test bidegree range against the dimension."""
        assert validate_bidegree(3, 3, 0) == (True, None)
        is_valid, error = validate_bidegree(3, 4, 1)
        assert is_valid is False
        assert "0..3" in error


class TestValidateOrder:
    """Tests for validate_order."""

    @pytest.mark.parametrize("value,expected", [(0, 0), ("5", 5), (12, 12)])
    def test_valid_order(self, value, expected):
        """Test accepted orders."""
        assert validate_order(value) == (True, None, expected)

    @pytest.mark.parametrize(
        "value,message",
        [("x", "integer"), (None, "integer"), (-1, "non-negative"), (13, "at most")],
    )
    def test_invalid_order(self, value, message):
        """Test rejected orders."""
        is_valid, error, order = validate_order(value)
        assert is_valid is False
        assert message in error
        assert order is None

    def test_custom_max(self):
        """Test a custom maximum order."""
        assert validate_order(20, max_order=30)[2] == 20


class TestValidatePositiveRational:
    """Tests for validate_positive_rational."""

    @pytest.mark.parametrize(
        "value,expected", [("1", Fraction(1)), ("3/4", Fraction(3, 4)), (2, 2)]
    )
    def test_valid(self, value, expected):
        """Test positive rationals."""
        assert validate_positive_rational(value) == (True, None, expected)

    @pytest.mark.parametrize("value", ["0", "-1/2", "0.5", "abc"])
    def test_invalid(self, value):
        """Test rejected values."""
        assert validate_positive_rational(value)[0] is False


# =============================================================================
# Parallel Map Tests
# =============================================================================


class TestResolveWorkers:
    """Tests for resolve_workers."""

    def test_configured_value(self, monkeypatch):
        """Test the configured value is used without an override."""
        monkeypatch.delenv(THREADS_ENV_VAR, raising=False)
        assert resolve_workers(3) == 3

    def test_env_override(self, monkeypatch):
        """Test DEFORGE_THREADS caps a larger configured value."""
        monkeypatch.setenv(THREADS_ENV_VAR, "2")
        assert resolve_workers(7) == 2

    def test_env_does_not_raise_count(self, monkeypatch):
        """Test a cap above the configured value leaves it unchanged."""
        monkeypatch.setenv(THREADS_ENV_VAR, "8")
        assert resolve_workers(3) == 3

    def test_env_caps_cpu_count(self, monkeypatch, mocker):
        """Test the cap also applies when the CPU count is used."""
        monkeypatch.setenv(THREADS_ENV_VAR, "4")
        mocker.patch("deforge.utils.parallel.os.cpu_count", return_value=16)
        assert resolve_workers(0) == 4

    @pytest.mark.parametrize("value", ["0", "-3"])
    def test_non_positive_env_ignored(self, monkeypatch, caplog, value):
        """Test a non-positive cap is ignored with a warning."""
        monkeypatch.setenv(THREADS_ENV_VAR, value)
        with caplog.at_level(logging.WARNING, logger="deforge.utils.parallel"):
            assert resolve_workers(5) == 5
        assert "non-positive" in caplog.text

    @pytest.mark.parametrize("configured", [None, 0, -1])
    def test_cpu_count_fallback(self, monkeypatch, mocker, configured):
        """Test unset or non-positive values mean the CPU count."""
        monkeypatch.delenv(THREADS_ENV_VAR, raising=False)
        mocker.patch("deforge.utils.parallel.os.cpu_count", return_value=6)
        assert resolve_workers(configured) == 6

    def test_invalid_env(self, monkeypatch, caplog):
        """Test a non-integer override is ignored with a warning."""
        monkeypatch.setenv(THREADS_ENV_VAR, "many")
        with caplog.at_level(logging.WARNING, logger="deforge.utils.parallel"):
            assert resolve_workers(4) == 4
        assert "Ignoring" in caplog.text


class TestRunOrdered:
    """Tests for run_ordered."""

    def test_preserves_order(self, monkeypatch):
        """Test results come back in input order despite uneven run times."""
        monkeypatch.delenv(THREADS_ENV_VAR, raising=False)

        def slow_square(x):
            time.sleep(0.01 * (5 - x))
            return x * x

        assert run_ordered(slow_square, range(5), workers=4) == [0, 1, 4, 9, 16]

    def test_serial_and_parallel_agree(self, monkeypatch):
        """Test worker count does not change results."""
        monkeypatch.delenv(THREADS_ENV_VAR, raising=False)
        items = list(range(20))
        assert run_ordered(str, items, workers=1) == run_ordered(str, items, workers=3)

    def test_empty(self):
        """Test an empty input gives an empty result."""
        assert run_ordered(str, []) == []

    def test_exception_propagates(self, monkeypatch):
        """Test a failing item raises from the map."""
        monkeypatch.delenv(THREADS_ENV_VAR, raising=False)

        def fail_on_three(x):
            if x == 3:
                raise ValueError("three")
            return x

        with pytest.raises(ValueError, match="three"):
            run_ordered(fail_on_three, range(6), workers=2)
