from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, strategies as st

from flatcount.pi_arith import (
    DomainError, PI, PiValue, double_factorial, multinomial, rational_str, to_decimal,
)


def test_double_factorial_small_values():
    assert double_factorial(-1) == 1
    assert double_factorial(0) == 1
    assert double_factorial(6) == 48
    assert double_factorial(7) == 105


def test_double_factorial_rejects_below_minus_one():
    with pytest.raises(DomainError):
        double_factorial(-2)


@given(st.integers(min_value=1, max_value=200))
def test_adjacent_double_factorials_multiply_to_factorial(n):
    import math
    assert double_factorial(n) * double_factorial(n - 1) == math.factorial(n)


def test_multinomial_examples():
    assert multinomial(4, [2]) == 6
    assert multinomial(7, []) == 1
    assert multinomial(5, [3, 1]) == 20


@given(st.lists(st.integers(min_value=0, max_value=6), max_size=4), st.integers(min_value=0, max_value=6))
def test_multinomial_matches_sequential_binomials(parts, slack):
    import math
    n = sum(parts) + slack
    expected, left = 1, n
    for p in parts:
        expected *= math.comb(left, p)
        left -= p
    assert multinomial(n, parts) == expected


def test_multinomial_rejects_oversized_parts():
    with pytest.raises(DomainError):
        multinomial(3, [2, 2])


def test_products_cancel_exponents():
    assert PiValue.monomial(2, 2) * PiValue.monomial(Fraction(1, 2), 2) == PiValue.monomial(1, 4)
    assert PiValue.monomial(1, -2) * PiValue.monomial(1, 2) == 1
    x = PiValue({3: 2, -1: Fraction(1, 7)})
    assert x + PiValue() == x


def test_division_only_by_monomials():
    with pytest.raises(DomainError):
        PI / (PI + 1)
    with pytest.raises(DomainError):
        PI / 0
    assert (PI ** 3) / PiValue.monomial(2, 1) == PiValue.monomial(Fraction(1, 2), 2)


def test_string_forms():
    assert str(PiValue.monomial(1, 4)) == "pi^4"
    assert str(PiValue.monomial(2, 2)) == "2*pi^2"
    assert str(PiValue.monomial(Fraction(5, 3), -2)) == "5/3 * pi^-2"
    assert str(PiValue()) == "0"
    assert rational_str(3) == "3/1"


def test_decimal_examples():
    assert to_decimal(PiValue.monomial(1, 4), 6) == "97.409091"
    assert to_decimal(PiValue(), 6) == "0.000000"
    assert to_decimal(PiValue.monomial(Fraction(1, 2), -2), 6) == "0.050661"
    assert to_decimal(PiValue.rational(Fraction(-1, 3)), 4) == "-0.3333"


pi_values = st.dictionaries(
    st.integers(min_value=-4, max_value=4),
    st.fractions(min_value=-50, max_value=50, max_denominator=12),
    max_size=3,
).map(PiValue)


@given(pi_values, pi_values, pi_values)
def test_ring_axioms(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == PiValue()


@given(st.fractions(max_denominator=50), st.fractions(max_denominator=50))
def test_rational_part_agrees_with_fractions(p, q):
    assert PiValue.rational(p) + PiValue.rational(q) == PiValue.rational(p + q)
    assert PiValue.rational(p) * PiValue.rational(q) == PiValue.rational(p * q)


@given(pi_values)
def test_json_round_trip(x):
    assert PiValue.from_json(x.to_json()) == x


@given(pi_values, st.integers(min_value=1, max_value=15))
def test_decimal_agrees_with_high_precision_float(x, digits):
    text = to_decimal(x, digits)
    with mpmath.workdps(60):
        ref = x.to_mpf(60)
        assert abs(mpmath.mpf(text) - ref) <= mpmath.mpf(10) ** (-digits) / 2 + mpmath.mpf(10) ** -40
