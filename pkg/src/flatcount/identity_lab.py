"""Brute-force and generating-function checks of the cylinder-count identity.

Three independent views are computed here:

* the binomial identity over subsets of a degree vector,
* the series solution z of 1 - z + sum s_i z^b_i = 0 against the explicit
  coefficients a/(a + b.k) * multinomial(a + b.k; k),
* the generating functions F and G, each in a direct summed form and in a
  closed form in z, together with F^2 = G.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterator, List, Sequence, Tuple

from .pi_arith import multinomial

Exponent = Tuple[int, ...]


class VerificationFailure(AssertionError):
    pass


class TruncatedSeries:
    """Multivariate power series kept modulo total degree max_degree + 1."""

    __slots__ = ("nvars", "max_degree", "coeffs")

    def __init__(self, nvars: int, max_degree: int, coeffs: Dict[Exponent, Fraction] | None = None):
        self.nvars = nvars
        self.max_degree = max_degree
        self.coeffs: Dict[Exponent, Fraction] = {}
        for k, c in (coeffs or {}).items():
            if len(k) != nvars:
                raise ValueError(f"exponent {k} has wrong length")
            if sum(k) <= max_degree and c:
                self.coeffs[tuple(k)] = Fraction(c)

    @classmethod
    def constant(cls, nvars: int, max_degree: int, c) -> "TruncatedSeries":
        return cls(nvars, max_degree, {(0,) * nvars: Fraction(c)})

    @classmethod
    def variable(cls, nvars: int, max_degree: int, i: int) -> "TruncatedSeries":
        k = [0] * nvars
        k[i] = 1
        return cls(nvars, max_degree, {tuple(k): Fraction(1)})

    def _like(self, coeffs) -> "TruncatedSeries":
        return TruncatedSeries(self.nvars, self.max_degree, coeffs)

    def __getitem__(self, k: Exponent) -> Fraction:
        return self.coeffs.get(tuple(k), Fraction(0))

    def __add__(self, other) -> "TruncatedSeries":
        if not isinstance(other, TruncatedSeries):
            other = TruncatedSeries.constant(self.nvars, self.max_degree, other)
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, Fraction(0)) + c
        return self._like(out)

    __radd__ = __add__

    def __neg__(self) -> "TruncatedSeries":
        return self._like({k: -c for k, c in self.coeffs.items()})

    def __sub__(self, other) -> "TruncatedSeries":
        if not isinstance(other, TruncatedSeries):
            other = TruncatedSeries.constant(self.nvars, self.max_degree, other)
        return self + (-other)

    def __rsub__(self, other) -> "TruncatedSeries":
        return (-self) + other

    def __mul__(self, other) -> "TruncatedSeries":
        if not isinstance(other, TruncatedSeries):
            c = Fraction(other)
            return self._like({k: c * v for k, v in self.coeffs.items()})
        out: Dict[Exponent, Fraction] = {}
        D = self.max_degree
        for k1, c1 in self.coeffs.items():
            d1 = sum(k1)
            for k2, c2 in other.coeffs.items():
                if d1 + sum(k2) > D:
                    continue
                k = tuple(a + b for a, b in zip(k1, k2))
                out[k] = out.get(k, Fraction(0)) + c1 * c2
        return self._like(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "TruncatedSeries":
        out = TruncatedSeries.constant(self.nvars, self.max_degree, 1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other) -> bool:
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return self.max_degree == other.max_degree and self.coeffs == other.coeffs

    def items(self) -> List[Tuple[Exponent, Fraction]]:
        return sorted(self.coeffs.items())

    def to_json(self) -> dict:
        return {
            "max_degree": self.max_degree,
            "coefficients": [[list(k), f"{c.numerator}/{c.denominator}"] for k, c in self.items()],
        }


def exponents(nvars: int, max_degree: int) -> Iterator[Exponent]:
    """All exponent vectors of total degree <= max_degree, lexicographic."""
    for k in itertools.product(range(max_degree + 1), repeat=nvars):
        if sum(k) <= max_degree:
            yield k


def _dot(a: Sequence[int], b: Sequence[int]) -> int:
    return sum(x * y for x, y in zip(a, b))


# -- subset-sum form of the identity ------------------------------------------

@dataclass
class Apr2012Report:
    d: Tuple[int, ...]
    lhs: Fraction
    rhs: Fraction

    @property
    def holds(self) -> bool:
        return self.lhs == self.rhs

    def to_json(self) -> dict:
        return {
            "identity": "apr2012",
            "input": list(self.d),
            "lhs": f"{self.lhs.numerator}/{self.lhs.denominator}",
            "rhs": f"{self.rhs.numerator}/{self.rhs.denominator}",
            "holds": self.holds,
        }


def verify_apr2012(d: Sequence[int]) -> Apr2012Report:
    d = tuple(int(x) for x in d)
    if not d or min(d) < 0:
        raise ValueError("degree vector must be nonempty with entries >= 0")
    lhs = (6 + sum(Fraction(x * (x + 1), x + 2) for x in d)) * (1 + sum(x + 1 for x in d))
    top = 4 + sum(d)
    weight = sum(x + 1 for x in d)
    rhs = Fraction(0)
    for mask in itertools.product((0, 1), repeat=len(d)):
        chosen = [x for x, bit in zip(d, mask) if bit]
        rhs += Fraction(math.comb(top, 2 + sum(chosen)), math.comb(weight, sum(x + 1 for x in chosen)))
    return Apr2012Report(d, lhs, rhs)


# -- Mohanty coefficients ----------------------------------------------------

def mohanty_coefficient(a: int, b: Sequence[int], k: Sequence[int]) -> Fraction:
    if len(b) != len(k):
        raise ValueError("b and k must have equal length")
    n = a + _dot(b, k)
    return Fraction(a, n) * multinomial(n, k)


def solve_mohanty_z(b: Sequence[int], max_degree: int) -> TruncatedSeries:
    """The series z = 1 + sum s_i z^b_i, by fixed-point iteration."""
    if max_degree < 1:
        raise ValueError("max_degree must be >= 1")
    m = len(b)
    one = TruncatedSeries.constant(m, max_degree, 1)
    s = [TruncatedSeries.variable(m, max_degree, i) for i in range(m)]
    z = one
    # each pass fixes the next total degree
    for _ in range(max_degree + 1):
        nxt = one
        for si, bi in zip(s, b):
            nxt = nxt + si * z ** bi
        z = nxt
    return z


def mohanty_residual(b: Sequence[int], z: TruncatedSeries) -> TruncatedSeries:
    out = 1 - z
    for i, bi in enumerate(b):
        out = out + TruncatedSeries.variable(z.nvars, z.max_degree, i) * z ** bi
    return out


@dataclass
class MohantyReport:
    b: Tuple[int, ...]
    powers: Tuple[int, ...]
    max_degree: int
    mismatches: List[Tuple[int, Exponent]]
    residual_zero: bool

    @property
    def holds(self) -> bool:
        return self.residual_zero and not self.mismatches

    def to_json(self) -> dict:
        return {
            "identity": "mohanty",
            "input": {"b": list(self.b), "a": list(self.powers)},
            "holds": self.holds,
            "max_degree": self.max_degree,
        }


def verify_mohanty(b: Sequence[int], max_degree: int = 6, powers: Sequence[int] = (1, 2, 3, 4)) -> MohantyReport:
    b = tuple(int(x) for x in b)
    if not b or min(b) < 1:
        raise ValueError("b must be nonempty with entries >= 1")
    z = solve_mohanty_z(b, max_degree)
    residual = mohanty_residual(b, z)
    bad = []
    for a in powers:
        za = z ** a
        for k in exponents(len(b), max_degree):
            if za[k] != mohanty_coefficient(a, b, k):
                bad.append((a, k))
    return MohantyReport(b, tuple(powers), max_degree, bad, residual.is_zero())


# -- generating functions F and G ----------------------------------------------

def series_F_direct(d: Sequence[int], max_degree: int) -> TruncatedSeries:
    b = [x + 1 for x in d]
    coeffs = {}
    for k in exponents(len(d), max_degree):
        bk = _dot(b, k)
        coeffs[k] = Fraction(multinomial(2 + bk, k), (1 + bk) * (2 + bk))
    return TruncatedSeries(len(d), max_degree, coeffs)


def series_G_direct(d: Sequence[int], max_degree: int) -> TruncatedSeries:
    b = [x + 1 for x in d]
    coeffs = {}
    for k in exponents(len(d), max_degree):
        bk = _dot(b, k)
        weight = 6 + sum(Fraction(x * (x + 1), x + 2) * ki for x, ki in zip(d, k))
        coeffs[k] = weight * Fraction(multinomial(4 + bk, k), (2 + bk) * (3 + bk) * (4 + bk))
    return TruncatedSeries(len(d), max_degree, coeffs)


def series_F_closed(d: Sequence[int], max_degree: int) -> TruncatedSeries:
    m = len(d)
    z = solve_mohanty_z([x + 1 for x in d], max_degree)
    out = z - Fraction(1, 2) * z ** 2
    for i, x in enumerate(d):
        out = out + TruncatedSeries.variable(m, max_degree, i) * z ** (x + 2) * Fraction(1, x + 2)
    return out


def series_G_closed(d: Sequence[int], max_degree: int) -> TruncatedSeries:
    m = len(d)
    z = solve_mohanty_z([x + 1 for x in d], max_degree)
    s = [TruncatedSeries.variable(m, max_degree, i) for i in range(m)]
    inner = TruncatedSeries(m, max_degree)
    for i, x in enumerate(d):
        inner = inner + s[i] * z ** (x + 4) * Fraction(x, x + 2)
        inner = inner - s[i] * z ** (x + 3) * Fraction(x - 2, x + 2)
        for j, y in enumerate(d):
            inner = inner - s[i] * s[j] * z ** (4 + x + y) * Fraction(x * (x + 4), (x + 2) * (4 + x + y))
    return Fraction(3, 4) * z ** 2 - Fraction(1, 2) * z ** 3 + Fraction(1, 2) * inner


def _validate_degrees(d: Sequence[int], max_degree: int) -> Tuple[int, ...]:
    d = tuple(int(x) for x in d)
    if not d or min(d) < 0:
        raise ValueError("degree vector must be nonempty with entries >= 0")
    if max_degree < 2:
        raise ValueError("max_degree must be >= 2")
    return d


def series_F(d: Sequence[int], max_degree: int) -> Tuple[TruncatedSeries, TruncatedSeries]:
    """Direct and closed forms of F; raises if they differ."""
    d = _validate_degrees(d, max_degree)
    direct, closed = series_F_direct(d, max_degree), series_F_closed(d, max_degree)
    if direct != closed:
        raise VerificationFailure(f"F forms disagree for d={d}")
    return direct, closed


def series_G(d: Sequence[int], max_degree: int) -> Tuple[TruncatedSeries, TruncatedSeries]:
    d = _validate_degrees(d, max_degree)
    direct, closed = series_G_direct(d, max_degree), series_G_closed(d, max_degree)
    if direct != closed:
        raise VerificationFailure(f"G forms disagree for d={d}")
    return direct, closed


@dataclass
class F2GReport:
    d: Tuple[int, ...]
    max_degree: int
    difference: TruncatedSeries

    @property
    def holds(self) -> bool:
        return self.difference.is_zero()

    def to_json(self) -> dict:
        return {"identity": "F2G", "input": list(self.d), "holds": self.holds, "max_degree": self.max_degree}


def verify_F2_equals_G(d: Sequence[int], max_degree: int = 6) -> F2GReport:
    d = _validate_degrees(d, max_degree)
    F, _ = series_F(d, max_degree)
    G, _ = series_G(d, max_degree)
    return F2GReport(d, max_degree, F * F - G)
