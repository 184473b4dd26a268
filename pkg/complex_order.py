"""
Partial order on the complex plane
z1 ≾ z2 iff Re z1 <= Re z2 and Im z1 <= Im z2; ⪇ excludes equality; ≺ is strict
in both components. Every cone/contraction predicate in the toolkit goes through
the functions below.
"""

import math
import re
from dataclasses import dataclass
from typing import Union

from errors import NonFiniteValueError


@dataclass(frozen=True)
class ComplexScalar:
    """Immutable finite complex number with componentwise order predicates"""

    re: float
    im: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.re) and math.isfinite(self.im)):
            raise NonFiniteValueError(f"Non-finite complex value: ({self.re}, {self.im})")
        object.__setattr__(self, "re", float(self.re))
        object.__setattr__(self, "im", float(self.im))

    @classmethod
    def from_complex(cls, z: complex) -> "ComplexScalar":
        return cls(z.real, z.imag)

    @classmethod
    def real(cls, r: float) -> "ComplexScalar":
        """Embed a real number as r + 0i"""
        return cls(r, 0.0)

    def to_complex(self) -> complex:
        return complex(self.re, self.im)

    def __abs__(self) -> float:
        return math.hypot(self.re, self.im)

    def __add__(self, other: "Scalar") -> "ComplexScalar":
        o = as_scalar(other)
        return ComplexScalar(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other: "Scalar") -> "ComplexScalar":
        o = as_scalar(other)
        return ComplexScalar(self.re - o.re, self.im - o.im)

    def __rsub__(self, other: "Scalar") -> "ComplexScalar":
        return as_scalar(other) - self

    def __neg__(self) -> "ComplexScalar":
        return ComplexScalar(-self.re, -self.im)

    def __mul__(self, other: "Scalar") -> "ComplexScalar":
        if isinstance(other, (int, float)):
            return ComplexScalar(self.re * other, self.im * other)
        o = as_scalar(other)
        return ComplexScalar(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )

    __rmul__ = __mul__

    def is_zero(self, tol: float = 0.0) -> bool:
        return abs(self.re) <= tol and abs(self.im) <= tol

    def __str__(self) -> str:
        return format_complex(self)


Scalar = Union[ComplexScalar, complex, float, int]

ZERO = ComplexScalar(0.0, 0.0)
ONE = ComplexScalar(1.0, 0.0)


def as_scalar(z: Scalar) -> ComplexScalar:
    """Coerce Python numbers into ComplexScalar"""
    if isinstance(z, ComplexScalar):
        return z
    if isinstance(z, (int, float)):
        return ComplexScalar(float(z), 0.0)
    if isinstance(z, complex):
        return ComplexScalar(z.real, z.imag)
    # numpy scalars and anything else exposing real/imag
    try:
        return ComplexScalar(float(z.real), float(z.imag))
    except AttributeError:
        raise TypeError(f"Cannot interpret {z!r} as a complex scalar")


@dataclass(frozen=True)
class OrderConfig:
    """Absolute tolerance for treating components as equal"""

    eq_tolerance: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.eq_tolerance) and self.eq_tolerance >= 0):
            raise ValueError(f"eq_tolerance must be >= 0, got {self.eq_tolerance}")


EXACT = OrderConfig()


def precsim(z1: Scalar, z2: Scalar, cfg: OrderConfig = EXACT) -> bool:
    """z1 ≾ z2"""
    a, b = as_scalar(z1), as_scalar(z2)
    tol = cfg.eq_tolerance
    return a.re <= b.re + tol and a.im <= b.im + tol


def _components_equal(a: ComplexScalar, b: ComplexScalar, tol: float) -> bool:
    return abs(a.re - b.re) <= tol and abs(a.im - b.im) <= tol


def precnsim(z1: Scalar, z2: Scalar, cfg: OrderConfig = EXACT) -> bool:
    """z1 ⪇ z2: z1 ≾ z2 and z1 != z2"""
    a, b = as_scalar(z1), as_scalar(z2)
    return precsim(a, b, cfg) and not _components_equal(a, b, cfg.eq_tolerance)


def prec(z1: Scalar, z2: Scalar, cfg: OrderConfig = EXACT) -> bool:
    """z1 ≺ z2: strict in both components"""
    a, b = as_scalar(z1), as_scalar(z2)
    tol = cfg.eq_tolerance
    return a.re < b.re - tol and a.im < b.im - tol


def in_cone(z: Scalar) -> bool:
    """z ∈ S = {z : 0 ≾ z}"""
    return precsim(ZERO, z)


def in_cone_within(z: Scalar, cfg: OrderConfig) -> bool:
    """Cone membership with the checker's slack"""
    return precsim(ZERO, z, cfg)


_NUMBER = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_FULL_LITERAL = re.compile(
    rf"^(?P<re>[+-]?{_NUMBER})(?:(?P<sign>[+-])(?P<im>{_NUMBER})?i)?$"
)
_IMAG_LITERAL = re.compile(rf"^(?P<sign>[+-]?)(?P<im>{_NUMBER})?i$")


def parse_complex(text: str) -> ComplexScalar:
    """Parse "a+bi", "a-bi", "a", "bi" or "i" into a ComplexScalar"""
    literal = text.strip().replace(" ", "")
    match = _FULL_LITERAL.match(literal)
    if match:
        real_part = float(match.group("re"))
        if match.group("sign") is None:
            return ComplexScalar(real_part, 0.0)
        magnitude = float(match.group("im")) if match.group("im") else 1.0
        sign = -1.0 if match.group("sign") == "-" else 1.0
        return ComplexScalar(real_part, sign * magnitude)
    match = _IMAG_LITERAL.match(literal)
    if match:
        magnitude = float(match.group("im")) if match.group("im") else 1.0
        sign = -1.0 if match.group("sign") == "-" else 1.0
        return ComplexScalar(0.0, sign * magnitude)
    raise ValueError(f"Malformed complex literal: {text!r} (expected a+bi)")


def format_complex(z: Scalar) -> str:
    """Render as "a+bi" with full double precision"""
    s = as_scalar(z)
    sign = "-" if math.copysign(1.0, s.im) < 0 else "+"
    return f"{s.re!r}{sign}{abs(s.im)!r}i"
