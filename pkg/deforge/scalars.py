"""
Scalar Backends Module.

This module defines the two coefficient fields every form, matrix and series
is built over: exact Gaussian rationals a+bi with arbitrary-precision rational
parts, and complex doubles compared with a configured tolerance. A computation
picks one backend up front; combining values of different backends raises
BackendMismatch instead of silently coercing.
"""

import abc
import logging
import re
from fractions import Fraction
from typing import Any, Union

from deforge import DeforgeError
from deforge.constants import DEFAULT_TOLERANCE

logger = logging.getLogger(__name__)

Rational = Union[int, Fraction]

_RATIONAL_PATTERN = re.compile(r"^[+-]?\d+(?:/\d+)?$")


class BackendMismatch(DeforgeError):
    """Raised when scalars from the exact and float backends are combined."""


class GaussianRational:
    """Exact complex number a + b*i with rational a and b.

    Instances are immutable and hashable; integers and Fractions coerce
    transparently, floats never do.
    """

    __slots__ = ("re", "im")

    def __init__(self, re: Rational = 0, im: Rational = 0):
        if isinstance(re, float) or isinstance(im, float):
            raise BackendMismatch("float value passed to the exact backend")
        object.__setattr__(self, "re", Fraction(re))
        object.__setattr__(self, "im", Fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussianRational is immutable")

    @staticmethod
    def _lift(value: Any) -> "GaussianRational":
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, (int, Fraction)):
            return GaussianRational(value)
        if isinstance(value, (float, complex)):
            raise BackendMismatch(f"cannot combine exact scalar with {type(value).__name__}")
        return NotImplemented

    def __add__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return o - self

    def __mul__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return GaussianRational(
            self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        denom = o.re * o.re + o.im * o.im
        if denom == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return GaussianRational(
            (self.re * o.re + self.im * o.im) / denom,
            (self.im * o.re - self.re * o.im) / denom,
        )

    def __rtruediv__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return o / self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __pos__(self):
        return self

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int):
            return NotImplemented
        if exponent < 0:
            return GaussianRational(1) / (self**-exponent)
        result = GaussianRational(1)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, (float, complex)):
            return NotImplemented
        o = self._lift(other)
        if o is NotImplemented:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def abs2(self) -> Fraction:
        """Squared modulus |z|^2 = z * conj(z), always a non-negative rational."""
        return self.re * self.re + self.im * self.im

    def is_real(self) -> bool:
        return self.im == 0

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussianRational({self.re!s}, {self.im!s})"

    def __str__(self):
        return format_exact(self)

    @classmethod
    def parse(cls, text: str) -> "GaussianRational":
        """Parse "a/b+c/d*i" style text (also "a", "c*i", "a-c*i").

        Raises:
            ValueError: If the text is not a Gaussian rational literal.
        """
        s = text.replace(" ", "")
        if not s:
            raise ValueError("empty scalar literal")
        if not s.endswith("i"):
            return cls(_parse_rational(s, text))
        body = s[:-1]
        if body.endswith("*"):
            body = body[:-1]
        split = max(body.rfind("+"), body.rfind("-"))
        if split > 0:
            re_text, im_text = body[:split], body[split:]
        else:
            re_text, im_text = "", body
        re_part = _parse_rational(re_text, text) if re_text else Fraction(0)
        if im_text in ("", "+", "-"):
            im_part = Fraction(-1 if im_text == "-" else 1)
        else:
            im_part = _parse_rational(im_text, text)
        return cls(re_part, im_part)


def _parse_rational(token: str, text: str) -> Fraction:
    if not _RATIONAL_PATTERN.match(token):
        raise ValueError(f"not a Gaussian rational: {text!r}")
    return Fraction(token)


I = GaussianRational(0, 1)


def format_exact(z: GaussianRational) -> str:
    """Canonical report text, e.g. "1+0*i" or "-1/2-3/4*i"."""
    sign = "-" if z.im < 0 else "+"
    return f"{z.re}{sign}{abs(z.im)}*i"


class ScalarField(abc.ABC):
    """Coefficient field of a computation."""

    name: str = ""
    exact: bool = True

    @property
    @abc.abstractmethod
    def zero(self) -> Any:
        pass

    @property
    @abc.abstractmethod
    def one(self) -> Any:
        pass

    @property
    @abc.abstractmethod
    def i(self) -> Any:
        pass

    @abc.abstractmethod
    def coerce(self, value: Any) -> Any:
        """Convert a Python number into this field's scalar type."""

    @abc.abstractmethod
    def is_zero(self, x: Any) -> bool:
        pass

    def eq(self, a: Any, b: Any) -> bool:
        return self.is_zero(a - b)

    @abc.abstractmethod
    def conj(self, x: Any) -> Any:
        pass

    @abc.abstractmethod
    def real(self, x: Any) -> Any:
        """Real part, as a field scalar."""

    @abc.abstractmethod
    def imag(self, x: Any) -> Any:
        """Imaginary part, as a field scalar."""

    @abc.abstractmethod
    def abs_bound(self, x: Any) -> Any:
        """A non-negative upper bound of |x| in the field's number system."""

    @abc.abstractmethod
    def sign(self, x: Any) -> int:
        """Sign of a real scalar: -1, 0 or 1."""

    @abc.abstractmethod
    def format(self, x: Any) -> str:
        pass

    def to_complex(self, x: Any) -> complex:
        return complex(x)

    def check_compatible(self, other: "ScalarField") -> None:
        """Raise BackendMismatch unless ``other`` is the same backend."""
        if self.name != other.name:
            raise BackendMismatch(f"cannot mix {self.name} and {other.name} backends")

    def __eq__(self, other):
        return isinstance(other, ScalarField) and self.name == other.name

    def __hash__(self):
        return hash(self.name)

    def __repr__(self):
        return f"{type(self).__name__}()"


class ExactField(ScalarField):
    """Gaussian rationals; equality is decidable."""

    name = "exact"
    exact = True

    _zero = GaussianRational(0)
    _one = GaussianRational(1)

    @property
    def zero(self) -> GaussianRational:
        return self._zero

    @property
    def one(self) -> GaussianRational:
        return self._one

    @property
    def i(self) -> GaussianRational:
        return I

    def coerce(self, value: Any) -> GaussianRational:
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, (int, Fraction)):
            return GaussianRational(value)
        if isinstance(value, str):
            return GaussianRational.parse(value)
        raise BackendMismatch(f"exact backend cannot take {type(value).__name__} {value!r}")

    def is_zero(self, x: GaussianRational) -> bool:
        return not x

    def conj(self, x: GaussianRational) -> GaussianRational:
        return x.conjugate()

    def real(self, x: GaussianRational) -> GaussianRational:
        return GaussianRational(x.re)

    def imag(self, x: GaussianRational) -> GaussianRational:
        return GaussianRational(x.im)

    def abs_bound(self, x: GaussianRational) -> Fraction:
        return abs(x.re) + abs(x.im)

    def sign(self, x: GaussianRational) -> int:
        if x.im != 0:
            raise ValueError(f"sign of non-real scalar {x}")
        return (x.re > 0) - (x.re < 0)

    def format(self, x: GaussianRational) -> str:
        return format_exact(x)


class FloatField(ScalarField):
    """Complex doubles with absolute tolerance comparisons."""

    name = "float"
    exact = False

    def __init__(self, tolerance: float = DEFAULT_TOLERANCE):
        self.tolerance = float(tolerance)

    @property
    def zero(self) -> complex:
        return 0j

    @property
    def one(self) -> complex:
        return 1 + 0j

    @property
    def i(self) -> complex:
        return 1j

    def coerce(self, value: Any) -> complex:
        if isinstance(value, GaussianRational):
            return complex(value)
        if isinstance(value, str):
            return complex(GaussianRational.parse(value))
        return complex(value)

    def is_zero(self, x: complex) -> bool:
        return abs(x) <= self.tolerance

    def conj(self, x: complex) -> complex:
        return complex(x).conjugate()

    def real(self, x: complex) -> complex:
        return complex(x.real, 0.0)

    def imag(self, x: complex) -> complex:
        return complex(x.imag, 0.0)

    def abs_bound(self, x: complex) -> float:
        return abs(x)

    def sign(self, x: complex) -> int:
        if abs(x.imag) > self.tolerance:
            raise ValueError(f"sign of non-real scalar {x}")
        if abs(x.real) <= self.tolerance:
            return 0
        return 1 if x.real > 0 else -1

    def format(self, x: complex) -> str:
        x = complex(x)
        sign = "-" if x.imag < 0 else "+"
        return f"{x.real:.12g}{sign}{abs(x.imag):.12g}*i"

    def __repr__(self):
        return f"FloatField(tolerance={self.tolerance})"


EXACT = ExactField()


def get_field(backend: str = "exact", tolerance: float = DEFAULT_TOLERANCE) -> ScalarField:
    """Return the scalar field for a backend name.

    Raises:
        ValueError: If the backend name is unknown.
    """
    if backend == "exact":
        return EXACT
    if backend == "float":
        return FloatField(tolerance)
    raise ValueError(f"Unknown backend: {backend}")
