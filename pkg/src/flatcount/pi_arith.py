"""Exact numbers of the form sum(c_e * pi**e) with rational c_e.

Every volume and counting constant in this package lives in this ring, so
the arithmetic here is kept small, immutable and exact.
"""
from __future__ import annotations

import json
import math
from fractions import Fraction
from typing import Dict, Iterable, Mapping, Tuple, Union

import mpmath

Number = Union[int, Fraction]


class DomainError(ValueError):
    pass


def double_factorial(n: int) -> int:
    if n < -1:
        raise DomainError(f"double factorial undefined for {n}")
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def multinomial(n: int, parts: Iterable[int]) -> int:
    """n! / (prod(parts!) * (n - sum(parts))!)."""
    parts = list(parts)
    if any(p < 0 for p in parts):
        raise DomainError("negative part")
    rest = n - sum(parts)
    if n < 0 or rest < 0:
        raise DomainError(f"parts {parts} exceed {n}")
    out = 1
    left = n
    for p in parts:
        out *= math.comb(left, p)
        left -= p
    return out


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"not an exact rational: {x!r}")


class PiValue:
    """Laurent polynomial in pi with rational coefficients.

    Stored as a sorted tuple of (exponent, coefficient) pairs with no zero
    coefficients, so structural equality is value equality.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[int, Number] | None = None):
        clean: Dict[int, Fraction] = {}
        for e, c in (terms or {}).items():
            c = _frac(c)
            if c:
                clean[int(e)] = clean.get(int(e), Fraction(0)) + c
        self._terms: Tuple[Tuple[int, Fraction], ...] = tuple(
            sorted((e, c) for e, c in clean.items() if c)
        )

    @classmethod
    def rational(cls, c: Number) -> "PiValue":
        return cls({0: c})

    @classmethod
    def monomial(cls, c: Number, exponent: int) -> "PiValue":
        return cls({exponent: c})

    @property
    def terms(self) -> Dict[int, Fraction]:
        return dict(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_monomial(self) -> bool:
        return len(self._terms) == 1

    def as_monomial(self) -> Tuple[Fraction, int]:
        if not self.is_monomial():
            raise DomainError(f"{self} is not a monomial")
        e, c = self._terms[0]
        return c, e

    @staticmethod
    def _coerce(other) -> "PiValue":
        if isinstance(other, PiValue):
            return other
        return PiValue.rational(_frac(other))

    def __add__(self, other) -> "PiValue":
        other = self._coerce(other)
        acc = dict(self._terms)
        for e, c in other._terms:
            acc[e] = acc.get(e, Fraction(0)) + c
        return PiValue(acc)

    __radd__ = __add__

    def __neg__(self) -> "PiValue":
        return PiValue({e: -c for e, c in self._terms})

    def __sub__(self, other) -> "PiValue":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "PiValue":
        return self._coerce(other) - self

    def __mul__(self, other) -> "PiValue":
        other = self._coerce(other)
        acc: Dict[int, Fraction] = {}
        for e1, c1 in self._terms:
            for e2, c2 in other._terms:
                acc[e1 + e2] = acc.get(e1 + e2, Fraction(0)) + c1 * c2
        return PiValue(acc)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "PiValue":
        other = self._coerce(other)
        if not other.is_monomial():
            raise DomainError("division only by a nonzero monomial")
        c, e = other.as_monomial()
        return PiValue({e1 - e: c1 / c for e1, c1 in self._terms})

    def __pow__(self, n: int) -> "PiValue":
        if n < 0:
            return PiValue.rational(1) / (self ** -n)
        out = PiValue.rational(1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = PiValue.rational(other)
        if not isinstance(other, PiValue):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        return hash(self._terms)

    def __repr__(self) -> str:
        return f"PiValue({str(self)!r})"

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        pieces = []
        for e, c in sorted(self._terms, key=lambda t: -t[0]):
            pieces.append(_format_term(c, e))
        return " + ".join(pieces).replace("+ -", "- ")

    def to_json(self) -> dict:
        return {"terms": {str(e): f"{c.numerator}/{c.denominator}" for e, c in self._terms}}

    @classmethod
    def from_json(cls, obj) -> "PiValue":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls({int(e): Fraction(c) for e, c in obj["terms"].items()})

    def to_mpf(self, dps: int):
        with mpmath.workdps(dps):
            total = mpmath.mpf(0)
            for e, c in self._terms:
                total += mpmath.mpf(c.numerator) / c.denominator * mpmath.pi ** e
            return total


def _format_term(c: Fraction, e: int) -> str:
    if e == 0:
        return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
    power = "pi" if e == 1 else f"pi^{e}"
    if c == 1:
        return power
    if c == -1:
        return "-" + power
    if c.denominator == 1:
        return f"{c.numerator}*{power}"
    return f"{c.numerator}/{c.denominator} * {power}"


PI = PiValue.monomial(1, 1)
ONE = PiValue.rational(1)
ZERO = PiValue()


def to_decimal(x: PiValue, digits: int) -> str:
    """Round x to `digits` places after the decimal point."""
    if digits < 1:
        raise DomainError("digits must be positive")
    if x.is_zero():
        return "0." + "0" * digits
    # size the working precision by the magnitude so the guard is >= 10 digits
    rough = x.to_mpf(30)
    mag = max(0, int(mpmath.floor(mpmath.log10(abs(rough)))) + 1) if rough else 0
    dps = digits + mag + 20
    with mpmath.workdps(dps):
        scaled = mpmath.nint(x.to_mpf(dps) * mpmath.mpf(10) ** digits)
        n = int(scaled)
    sign = "-" if n < 0 else ""
    n = abs(n)
    whole, frac = divmod(n, 10 ** digits)
    return f"{sign}{whole}.{frac:0{digits}d}"


def rational_str(q: Number) -> str:
    q = _frac(q)
    return f"{q.numerator}/{q.denominator}"
