from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from flatcount import siegel_veech as sv
from flatcount.pi_arith import PiValue
from flatcount.strata import enumerate_signatures, parse_signature


def inv_pi2(c) -> PiValue:
    return PiValue.monomial(Fraction(c), -2)


def test_type1_examples():
    assert sv.c_type1(parse_signature("Q(1,-1^5)"), 0, 1, check=True) == inv_pi2(8)
    assert sv.c_type1(parse_signature("Q(1,-1^5)"), 1, 2) == inv_pi2(2)
    assert sv.c_type1(parse_signature("Q(2,2,-1^8)"), 0, 1, check=True) == PiValue.rational(Fraction(18, 5))


def test_type2_zero_split_into_two_poles():
    s = parse_signature("Q(2,-1^6)")
    cfg = sv.Configuration(sv.Kind.TYPE_II, s, (0, -1, -1), (1, 2, 3), (4, 5, 6))
    # the factorial weight counts only the singularities already on each side
    assert sv.c_type2(cfg, check=True) == PiValue.rational(Fraction(1, 32))


def test_type2_rejects_bad_split():
    s = parse_signature("Q(2,-1^6)")
    with pytest.raises(sv.ConfigurationError):
        sv.c_type2(sv.Configuration(sv.Kind.TYPE_II, s, (0, 0, -1), (1, 2, 3), (4, 5, 6)))


def test_pocket_examples():
    assert sv.c_pocket(parse_signature("Q(1,-1^5)"), 0, check=True) == inv_pi2(Fraction(1, 2))
    assert sv.c_pocket(parse_signature("Q(2,-1^6)"), 0, check=True) == inv_pi2(Fraction(1, 2))


WITH_ZEROS = [s for s in enumerate_signatures(9, False) if s.k >= 5]


@pytest.mark.parametrize("s", WITH_ZEROS)
def test_pocket_total_is_universal(s):
    assert sv.c_pocket_total(s) == inv_pi2(Fraction(1, 2))


def test_dumbbell_example():
    s = parse_signature("Q(1,1,-1^6)")
    cfgs = list(sv.dumbbell_configurations(s))
    assert len(cfgs) == 20
    assert all(sv.c_dumbbell(c, check=True) == inv_pi2(Fraction(1, 12)) for c in cfgs)


def test_area_constant_examples():
    assert sv.c_area(parse_signature("Q(1,-1^5)")) == inv_pi2(Fraction(5, 3))
    assert sv.c_area(parse_signature("Q(-1^4)")) == inv_pi2(Fraction(3, 2))
    assert sv.c_area(parse_signature("Q(1,1,-1^6)")) == inv_pi2(Fraction(11, 6))


def test_ratio_examples():
    assert sv.vorobets_ratio(parse_signature("Q(1,-1^5)")) == Fraction(1, 3)
    assert sv.vorobets_ratio(parse_signature("Q(-1^4)")) == 1
    assert sv.vorobets_ratio(parse_signature("Q(2,-1^6)")) == Fraction(1, 4)


def test_area_identity_examples():
    rep = sv.verify_carea_identity(parse_signature("Q(1,-1^5)"))
    assert (rep.pockets, rep.dumbbells, rep.holds) == (10, 0, True)
    assert rep.rhs == inv_pi2(Fraction(5, 3))
    rep = sv.verify_carea_identity(parse_signature("Q(1,1,-1^6)"))
    assert (rep.pockets, rep.dumbbells, rep.holds) == (30, 20, True)


@pytest.mark.parametrize("s", [s for s in WITH_ZEROS if s.k <= 8])
def test_area_identity_holds_up_to_eight_singularities(s):
    assert sv.verify_carea_identity(s).holds


def test_pillowcase_has_no_cylinder_configurations():
    s = parse_signature("Q(-1^4)")
    rep = sv.verify_carea_identity(s)
    assert not rep.holds and "no zero" in rep.diagnostic
    with pytest.raises(sv.ConfigurationError):
        sv.c_pocket_total(s)


def test_closed_and_ratio_forms_agree_everywhere():
    counts = sv.cross_check_all(8)
    assert counts["I"] > 0 and counts["II"] > 0 and counts["III"] > 0 and counts["IV"] > 0


def test_billiard_table_entries():
    # corner multiples k: angle k*pi/2
    cases = [
        ((4, 4) + (1,) * 8, 0, 1, PiValue.rational(Fraction(9, 10))),
        ((4, 3) + (1,) * 7, 0, 1, PiValue.rational(Fraction(45, 64))),
        ((4, 3) + (1,) * 7, 0, 2, PiValue.rational(Fraction(9, 32))),
        ((3, 3) + (1,) * 6, 0, 1, inv_pi2(Fraction(16, 3))),
        ((3, 3) + (1,) * 6, 0, 2, inv_pi2(2)),
        ((3, 3) + (1,) * 6, 2, 3, inv_pi2(Fraction(1, 2))),
    ]
    for family, i, j, expected in cases:
        assert sv.table_value(family, i, j) == expected, (family, i, j)


def test_billiard_constants_for_l_shape():
    family = (1, 1, 1, 1, 1, 3)
    assert sv.billiard_constant(family, "pair", 0, 5) == PiValue.monomial(2, -1)
    assert sv.billiard_constant(family, "pocket") == PiValue.monomial(Fraction(1, 2), -1)
    assert sv.billiard_constant(family, "area") == PiValue.monomial(Fraction(5, 6), -1)


families = st.integers(min_value=0, max_value=3).flatmap(
    lambda big: st.lists(st.integers(min_value=3, max_value=6), min_size=big, max_size=big)
).map(lambda big: tuple(big) + (1,) * (4 + sum(k - 2 for k in big)))


@given(families)
def test_area_constant_matches_corner_sum(family):
    expected = PiValue.monomial(Fraction(1, 16) * sum(Fraction(4, k) - k for k in family), -1)
    assert sv.billiard_constant(family, "area") == expected


def test_family_must_satisfy_angle_sum():
    with pytest.raises(Exception):
        sv.family_signature((1, 1, 1, 1, 1))
