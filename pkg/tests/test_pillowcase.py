import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from flatcount import pillowcase as pc
from flatcount.strata import parse_signature


def test_spec_examples():
    spec, sig = pc.validate_spec([], [1, 1, 1, 1], 1)
    assert sig == parse_signature("Q(-1^4)")
    spec, sig = pc.validate_spec([], [3, 1, 1, 1, 1, 1], 2)
    assert sig == parse_signature("Q(1,-1^5)")
    with pytest.raises(pc.SpecError, match="= 0"):
        pc.validate_spec([2], [1, 1], 3)


@pytest.mark.parametrize("eta, nu, d", [([1], [1, 1, 1, 1], 1), ([], [2, 1, 1], 1), ([], [1, 1, 1, 1], 0)])
def test_spec_rejections(eta, nu, d):
    with pytest.raises(pc.SpecError):
        pc.validate_spec(eta, nu, d)


def test_spec_that_does_not_fit_has_no_covers():
    spec, _ = pc.validate_spec([], [3, 1, 1, 1, 1, 1], 1)
    assert not pc.spec_fits(spec)
    assert pc.count_covers_backtracking(spec, False, True) == 0
    assert pc.count_covers_character(spec) == 0


def brute_tuple_count(classes, connected_only):
    """Tuples with the given cycle types and product 1, by full enumeration."""
    n = sum(classes[0])
    by_type = {}
    for p in itertools.permutations(range(n)):
        by_type.setdefault(pc.cycle_type(p), []).append(p)
    pools = [by_type.get(tuple(sorted(c, reverse=True)), []) for c in classes[:-1]]
    last = tuple(sorted(classes[-1], reverse=True))
    total = 0
    for perms in itertools.product(*pools):
        prod = tuple(range(n))
        for p in perms:
            prod = pc.compose(prod, p)
        closing = pc.inverse(prod)
        if pc.cycle_type(closing) != last:
            continue
        if connected_only and not pc.is_transitive(list(perms) + [closing], n):
            continue
        total += 1
    return total


partitions_of = {n: list(pc.partitions(n)) for n in range(1, 6)}


@given(st.integers(1, 4).flatmap(lambda n: st.lists(st.sampled_from(partitions_of[n]), min_size=2, max_size=4)),
       st.booleans())
def test_tuple_count_matches_full_enumeration(classes, connected_only):
    tc = pc.count_tuples(classes, connected_only)
    assert tc.labeled == brute_tuple_count(classes, connected_only)


@given(st.integers(1, 5).flatmap(lambda n: st.lists(st.sampled_from(partitions_of[n]), min_size=2, max_size=4)))
def test_character_formula_matches_backtracking(classes):
    tc = pc.count_tuples(classes, False, want_orbits=False)
    assert pc.frobenius_tuple_count(classes) == tc.labeled


@pytest.mark.parametrize("d", [1, 2, 3])
def test_covers_of_pillowcase_agree(d):
    spec, _ = pc.validate_spec([], [1, 1, 1, 1], d)
    assert pc.count_covers_backtracking(spec, False, True) == pc.count_covers_character(spec)


@pytest.mark.parametrize("d", [2, 3])
def test_covers_of_q1_agree(d):
    spec, _ = pc.validate_spec([], [3, 1, 1, 1, 1, 1], d)
    assert pc.count_covers_backtracking(spec, False, True) == pc.count_covers_character(spec)


def test_covers_of_q1_connected_counts():
    # with every singularity over one corner, degree 8 admits no cover at all
    spec2, _ = pc.validate_spec([], [3, 1, 1, 1, 1, 1], 2)
    spec3, _ = pc.validate_spec([], [3, 1, 1, 1, 1, 1], 3)
    assert pc.count_covers_backtracking(spec2, True, False) == 0
    assert pc.count_covers_backtracking(spec3, True, False) == 3


def test_trivial_branch_data_counts_once():
    for n in range(1, 6):
        ident = (1,) * n
        assert pc.frobenius_tuple_count([ident, ident]) == 1
        assert pc.count_tuples([ident, ident], False).labeled == 1


def test_square_tiled_pillowcase_counts():
    counts = pc.sq_count(parse_signature("Q(-1^4)"), 7)
    assert counts.orbits[0] == 1
    assert counts.orbits == [pc.torus_quotient_count(n) for n in range(1, 8)]


def test_trend_is_monotone_and_reproducible():
    sig = parse_signature("Q(1,-1^5)")
    a = pc.volume_trend(sig, 6)
    b = pc.volume_trend(sig, 6)
    assert a.rows == b.rows and a.monotone()
    assert a.dim == 4


def test_degree_cap():
    spec, _ = pc.validate_spec([], [1, 1, 1, 1], 4)
    with pytest.raises(pc.ResourceCapError):
        pc.count_covers_backtracking(spec, False, True, cap=12)
    with pytest.raises(pc.ResourceCapError):
        pc.sq_count(parse_signature("Q(-1^4)"), 20)


def test_stratum_round_trip():
    for text in ["Q(1,-1^5)", "Q(2,-1^6)", "Q(1,1,-1^6)", "Q(3,-1^7)"]:
        sig = parse_signature(text)
        assert pc.spec_for_stratum(sig, 3).stratum() == sig.canonical()


perm4 = st.permutations(range(4)).map(tuple)


@given(st.lists(perm4, min_size=1, max_size=3), perm4)
def test_relabeling_preserves_cycle_types_and_transitivity(perms, g):
    moved = [pc.conjugate(g, p) for p in perms]
    assert [pc.cycle_type(p) for p in moved] == [pc.cycle_type(p) for p in perms]
    assert pc.is_transitive(moved, 4) == pc.is_transitive(perms, 4)


@given(st.integers(1, 6))
def test_class_sizes(n):
    sizes = {mu: pc.class_size(mu) for mu in pc.partitions(n)}
    assert sum(sizes.values()) == math.factorial(n)
    for mu, size in sizes.items():
        if size < 1000:
            assert len(list(pc.class_elements(mu))) == size
