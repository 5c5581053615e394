from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from flatcount.pi_arith import PiValue
from flatcount.strata import (
    DisconnectedSignature, InvalidSignature, Signature, add_marked_point, dimension,
    disconnected_volume, enumerate_signatures, format_signature, parse_signature, v, volume,
)


def sig(text):
    return parse_signature(text)


def test_v_values():
    assert v(-1) == 1
    assert v(0) == 2
    assert v(2) == PiValue.monomial(Fraction(4, 3), 2)


def test_volume_examples():
    assert volume(sig("Q(1,-1^5)")) == PiValue.monomial(1, 4)
    assert volume(sig("Q(2,-1^6)")) == PiValue.monomial(Fraction(8, 3), 4)
    assert volume(sig("Q(-1^4)")) == PiValue.monomial(2, 2)


def test_dimension_examples():
    assert dimension(sig("Q(1,-1^5)")) == 4
    assert dimension(sig("Q(-1^4)")) == 2
    assert dimension(sig("Q(0,1,-1^5)")) == 5


def test_disconnected_examples():
    a, b = sig("Q(-1^4)"), sig("Q(1,-1^5)")
    assert disconnected_volume(DisconnectedSignature(a, a)) == PiValue.monomial(Fraction(1, 3), 4)
    assert disconnected_volume(DisconnectedSignature(a, b)) == PiValue.monomial(Fraction(1, 20), 6)


def test_enumeration_examples():
    assert [s.orders for s in enumerate_signatures(4, False)] == [(-1, -1, -1, -1)]
    assert [s.orders for s in enumerate_signatures(5, False)] == [(-1, -1, -1, -1)]
    assert [s.orders for s in enumerate_signatures(6, False)] == [(-1, -1, -1, -1), (1, -1, -1, -1, -1, -1)]


def test_enumeration_is_complete_against_brute_force():
    from itertools import combinations_with_replacement
    expected = set()
    for k in range(4, 9):
        for combo in combinations_with_replacement(range(-1, 5), k):
            if sum(combo) == -4 and 0 not in combo:
                expected.add(tuple(sorted(combo, reverse=True)))
    got = {s.canonical().orders for s in enumerate_signatures(8, False)}
    assert got == expected


@pytest.mark.parametrize("text, message", [
    ("Q(1,-1^4)", "signature sum is -3, expected -4"),
    ("Q(-2,-1^2)", "orders must be >= -1"),
])
def test_invalid_signatures(text, message):
    with pytest.raises(InvalidSignature, match=message.replace("(", r"\(").replace(")", r"\)")):
        parse_signature(text)


@pytest.mark.parametrize("text", ["Q(1,-1", "1,-1^5", "Q(a,-1^5)", "Q(-1^x)"])
def test_malformed_text(text):
    with pytest.raises(InvalidSignature):
        parse_signature(text)


@given(st.sampled_from(enumerate_signatures(9, True)))
def test_format_parse_round_trip(s):
    assert parse_signature(format_signature(s.orders)).canonical() == s.canonical()


@given(st.sampled_from(enumerate_signatures(8, False)), st.randoms(use_true_random=False))
def test_volume_ignores_label_order(s, rnd):
    orders = list(s.orders)
    rnd.shuffle(orders)
    assert volume(Signature(tuple(orders))) == volume(s)


@given(st.sampled_from(enumerate_signatures(8, True)))
def test_marked_point_doubles_volume_and_raises_dimension(s):
    marked = add_marked_point(s)
    assert volume(marked) == 2 * volume(s)
    assert dimension(marked) == dimension(s) + 1
