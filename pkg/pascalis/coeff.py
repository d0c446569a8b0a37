"""
pascalis - Exact coefficient fields

Q (rationals, fractions.Fraction) and GF(p) for prime p. Coefficients are
stored "raw" inside polynomials for speed:
  - Q: int when integral, otherwise a reduced Fraction
  - GF(p): int in [0, p)
`Coefficient` wraps a raw value together with its field for public use.
"""

import math
import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, Optional, Union

from .errors import DivisionByZero, InvalidField, MixedFields

Raw = Union[int, Fraction]

_GF_PATTERN = re.compile(r"^\s*(?:GF|F)\s*(?:\(\s*(\d+)\s*\)|:\s*(\d+))\s*$", re.IGNORECASE)


class FieldKind(str, Enum):
    RATIONALS = "Q"
    PRIME = "GF"


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p < 4:
        return True
    if p % 2 == 0:
        return False
    for q in range(3, math.isqrt(p) + 1, 2):
        if p % q == 0:
            return False
    return True


@dataclass(frozen=True)
class FieldSpec:
    """Coefficient field: Q or GF(p)."""

    kind: FieldKind
    p: Optional[int] = None

    def __post_init__(self):
        if self.kind is FieldKind.RATIONALS:
            if self.p is not None:
                raise InvalidField("Q takes no modulus")
        elif self.p is None or not is_prime(self.p):
            raise InvalidField(f"GF({self.p}): modulus must be prime")

    # ------------------------------------------------------------------
    # Construction
    # ------------------------------------------------------------------

    @classmethod
    def rationals(cls) -> "FieldSpec":
        return cls(FieldKind.RATIONALS)

    @classmethod
    def prime(cls, p: int) -> "FieldSpec":
        return cls(FieldKind.PRIME, p)

    @classmethod
    def parse(cls, text: str) -> "FieldSpec":
        """Accepts "Q", "QQ", "GF(p)", "gf:p" (case-insensitive)."""
        stripped = text.strip()
        if stripped.upper() in ("Q", "QQ"):
            return cls.rationals()
        match = _GF_PATTERN.match(stripped)
        if not match:
            raise InvalidField(f"unrecognised field {text!r} (expected Q or GF(p))")
        return cls.prime(int(match.group(1) or match.group(2)))

    # ------------------------------------------------------------------
    # Properties
    # ------------------------------------------------------------------

    @property
    def characteristic(self) -> int:
        return 0 if self.p is None else self.p

    @property
    def is_finite(self) -> bool:
        return self.p is not None

    def __str__(self) -> str:
        return "Q" if self.p is None else f"GF({self.p})"

    # ------------------------------------------------------------------
    # Raw arithmetic
    # ------------------------------------------------------------------

    def reduce(self, value: Any) -> Raw:
        """Canonical raw representative of an int, Fraction or Coefficient."""
        if isinstance(value, Coefficient):
            if value.field != self:
                raise MixedFields(f"coefficient over {value.field} used in {self}")
            return value.value
        if self.p is None:
            if isinstance(value, int):
                return int(value)
            value = Fraction(value)
            return value.numerator if value.denominator == 1 else value
        p = self.p
        if isinstance(value, Fraction):
            if value.denominator % p == 0:
                raise DivisionByZero(f"denominator {value.denominator} vanishes in {self}")
            return value.numerator * pow(value.denominator, -1, p) % p
        return int(value) % p

    def norm(self, value: Raw) -> Raw:
        """Normalise the result of raw arithmetic (no type conversion)."""
        if self.p is not None:
            return value % self.p
        if type(value) is Fraction and value.denominator == 1:
            return value.numerator
        return value

    def canonical(self, terms: Dict[Any, Raw]) -> Dict[Any, Raw]:
        """Normalise all values of a term dict and drop zeros."""
        out = {}
        p = self.p
        if p is None:
            for key, value in terms.items():
                if value:
                    if type(value) is Fraction and value.denominator == 1:
                        value = value.numerator
                    out[key] = value
        else:
            for key, value in terms.items():
                value %= p
                if value:
                    out[key] = value
        return out

    def add(self, a: Raw, b: Raw) -> Raw:
        return self.norm(a + b)

    def sub(self, a: Raw, b: Raw) -> Raw:
        return self.norm(a - b)

    def mul(self, a: Raw, b: Raw) -> Raw:
        return self.norm(a * b)

    def neg(self, a: Raw) -> Raw:
        return self.norm(-a)

    def inv(self, a: Raw) -> Raw:
        if not a:
            raise DivisionByZero(f"division by zero in {self}")
        if self.p is not None:
            return pow(a, -1, self.p)
        return self.norm(1 / Fraction(a))

    def div(self, a: Raw, b: Raw) -> Raw:
        return self.mul(a, self.inv(b))

    def power(self, a: Raw, k: int) -> Raw:
        if self.p is not None:
            return pow(a, k, self.p)
        return self.norm(Fraction(a) ** k) if k >= 0 else self.inv(self.power(a, -k))

    def element(self, value: Any) -> "Coefficient":
        return Coefficient(self, self.reduce(value))

    def format(self, value: Raw) -> str:
        return str(value)


QQ = FieldSpec.rationals()


@dataclass(frozen=True)
class Coefficient:
    """A field element tagged with its field."""

    field: FieldSpec
    value: Raw

    def _other(self, other: Any) -> Raw:
        if isinstance(other, Coefficient):
            if other.field != self.field:
                raise MixedFields(f"{self.field} vs {other.field}")
            return other.value
        return self.field.reduce(other)

    def __add__(self, other: Any) -> "Coefficient":
        return Coefficient(self.field, self.field.add(self.value, self._other(other)))

    __radd__ = __add__

    def __sub__(self, other: Any) -> "Coefficient":
        return Coefficient(self.field, self.field.sub(self.value, self._other(other)))

    def __rsub__(self, other: Any) -> "Coefficient":
        return Coefficient(self.field, self.field.sub(self._other(other), self.value))

    def __mul__(self, other: Any) -> "Coefficient":
        return Coefficient(self.field, self.field.mul(self.value, self._other(other)))

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> "Coefficient":
        return Coefficient(self.field, self.field.div(self.value, self._other(other)))

    def __neg__(self) -> "Coefficient":
        return Coefficient(self.field, self.field.neg(self.value))

    def __bool__(self) -> bool:
        return bool(self.value)

    def inverse(self) -> "Coefficient":
        return Coefficient(self.field, self.field.inv(self.value))

    def is_zero(self) -> bool:
        return not self.value

    def __str__(self) -> str:
        return self.field.format(self.value)


# Functional aliases

def field_add(a: Coefficient, b: Coefficient) -> Coefficient:
    return a + b


def field_sub(a: Coefficient, b: Coefficient) -> Coefficient:
    return a - b


def field_mul(a: Coefficient, b: Coefficient) -> Coefficient:
    return a * b


def field_neg(a: Coefficient) -> Coefficient:
    return -a


def field_inv(a: Coefficient) -> Coefficient:
    return a.inverse()


def field_div(a: Coefficient, b: Coefficient) -> Coefficient:
    return a / b


def binomial_in_field(m: int, l: int, field: FieldSpec) -> Coefficient:
    """C(m, l) mapped into the field (0 when l is out of range)."""
    if l < 0 or l > m:
        return field.element(0)
    return field.element(math.comb(m, l))
