import json
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from flatcount import flat_sphere as fs
from flatcount.strata import parse_signature


def l_shape():
    return fs.validate([(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)])


# -- validation ---------------------------------------------------------------

def test_square_and_l_shape_families():
    sq = fs.rectangle(1, 1)
    assert sq.family() == (1, 1, 1, 1) and sq.area == 1
    L = l_shape()
    assert sorted(L.family()) == [1, 1, 1, 1, 1, 3] and L.area == 3


def test_doubles():
    assert fs.double(fs.rectangle(1, 1)) == parse_signature("Q(-1^4)")
    assert fs.double(l_shape()).canonical() == parse_signature("Q(1,-1^5)")


def test_wall_adds_full_turn_corner(tables):
    W = fs.load_polygon(tables / "lshape_wall.json")
    assert W.family().count(4) == 1
    assert W.area == 3
    assert fs.double(W).canonical() == parse_signature("Q(2,1,-1^7)")


def test_clockwise_input_and_collinear_vertices_are_normalized():
    cw = fs.validate([(0, 0), (0, 1), (1, 1), (1, 0)])
    assert cw.family() == (1, 1, 1, 1)
    extra = fs.validate([(0, 0), (Fraction(1, 2), 0), (1, 0), (1, 1), (0, 1)])
    assert extra.n == 4


@pytest.mark.parametrize("vertices", [
    [(0, 0), (1, 0), (1, 1)],                              # diagonal edge
    [(0, 0), (2, 0), (2, 2), (1, 2), (1, -1), (0, -1)],    # self-crossing
    [(0, 0), (1, 0), (0, 0), (0, 1)],                      # reversal
])
def test_invalid_polygons(vertices):
    with pytest.raises(fs.PolygonError):
        fs.validate(vertices)


def test_free_interior_slit_is_rejected():
    square = [(0, 0), (4, 0), (4, 4), (0, 4)]
    with pytest.raises(fs.PolygonError):
        fs.validate(square, [((1, 2), (3, 2))])


def test_json_round_trip(tables):
    W = fs.load_polygon(tables / "lshape_wall.json")
    data = json.loads(json.dumps(W.to_json()))
    again = fs.validate(data["vertices"], data["slits"])
    assert again.points == W.points and again.family() == W.family()


# -- enumeration against oracles -------------------------------------------------

def test_unit_square_diagonal_examples():
    sq = fs.rectangle(1, 1)
    near = [c for c in fs.enumerate_diagonals(sq, 0, 2) if not c.parallel_to_side]
    assert [(c.target, c.holonomy) for c in near] == [(2, (1, 1))]
    far = [c for c in fs.enumerate_diagonals(sq, 0, 10) if c.target == 2 and not c.parallel_to_side]
    assert sorted(c.holonomy for c in far) == [(1, 1), (1, 3), (3, 1)]


def test_no_loops_at_square_corners():
    sq = fs.rectangle(1, 1)
    for m in range(4):
        assert not [c for c in fs.enumerate_diagonals(sq, m, 200) if c.target == m and not c.parallel_to_side]


def oracle_matches(w, h, L_sq):
    poly = fs.rectangle(w, h)
    for source in range(4):
        got = sorted((c.target, c.holonomy[0], c.holonomy[1])
                     for c in fs.enumerate_diagonals(poly, source, L_sq) if not c.parallel_to_side)
        want = sorted(fs.rectangle_oracle(w, h, source, L_sq))
        if got != want:
            return False
    return True


def test_near_golden_rectangle_matches_oracle():
    assert oracle_matches(1, Fraction(355, 113), 10 ** 4)


@given(st.integers(1, 9), st.integers(1, 9), st.integers(1, 9), st.integers(1, 9))
def test_rectangles_match_oracle(p, q, r, s):
    w, h = Fraction(p, q), Fraction(r, s)
    assert oracle_matches(w, h, 60 * min(w, h) ** 2)


def test_counts_vanish_for_tiny_bound():
    counts = fs.count_by_pair(l_shape(), Fraction(1, 10 ** 6), include_axis_parallel=True)
    assert all(v == 0 for v in counts.values())


U_SHAPE = [(0, 0), (3, 0), (3, 2), (2, 2), (2, 1), (1, 1), (1, 2), (0, 2)]


@pytest.mark.parametrize("vertices", [
    [(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)],
    [(0, 0), (3, 0), (3, 1), (1, 1), (1, 2), (0, 2)],
    U_SHAPE,
])
def test_unfolding_matches_cell_walk(vertices):
    poly = fs.validate(vertices)
    for m in range(poly.n):
        if poly.corner_k[m] != 1:
            continue
        got = sorted((c.target, int(c.holonomy[0]), int(c.holonomy[1]))
                     for c in fs.enumerate_diagonals(poly, m, 150) if not c.parallel_to_side)
        assert got == fs.cell_walk_oracle(poly, m, 150)


def test_node_cap_is_enforced(monkeypatch):
    monkeypatch.setenv("FLATCOUNT_MAX_NODES", "50")
    with pytest.raises(fs.ResourceCapError):
        fs.enumerate_diagonals(l_shape(), 0, 10 ** 4)


def test_results_are_sorted_and_reproducible():
    a = fs.enumerate_diagonals(l_shape(), 0, 300)
    b = fs.enumerate_diagonals(l_shape(), 0, 300)
    assert a == b
    assert [c.sort_key() for c in a] == sorted(c.sort_key() for c in a)


def test_loops_count_one_half():
    W = fs.validate([(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)], [((Fraction(1, 2), 0), (Fraction(1, 2), Fraction(1, 2)))])
    tip = W.family().index(4)
    conns = fs.enumerate_diagonals(W, tip, 40)
    loops = [c for c in conns if c.target == tip and not c.parallel_to_side]
    counts = fs.counts_from_connections(conns, W.n, 40)
    assert loops and counts[tip] == Fraction(len(loops), 2)


# -- classification -------------------------------------------------------------

def test_square_diagonal_is_pocket_boundary():
    sq = fs.rectangle(1, 1)
    c = fs.enumerate_diagonals(sq, 0, 2)
    assert fs.classify([x for x in c if not x.parallel_to_side][0], sq).kind == "III-short"


def test_l_shape_right_angle_to_reflex_is_type_one():
    L = l_shape()
    reflex = L.family().index(3)
    for m in range(L.n):
        if m == reflex:
            continue
        for c in fs.enumerate_diagonals(L, m, 60):
            if c.target == reflex and not c.parallel_to_side:
                assert fs.classify(c, L).kind == "I"


def test_loop_sectors_at_wall_tip_fill_full_angle(tables):
    W = fs.load_polygon(tables / "lshape_wall.json")
    tip = W.family().index(4)
    kinds = set()
    for c in fs.enumerate_diagonals(W, tip, 60):
        if c.target != tip or c.parallel_to_side:
            continue
        cl = fs.classify(c, W)
        kinds.add(cl.kind)
        quarters = [Fraction(s.split("*")[0]) for s in cl.sectors]
        # the two sectors of a loop on the double add up to 4pi
        assert sum(quarters) == 8
    assert "II" in kinds


# -- bands ------------------------------------------------------------------------

def _edges(poly):
    s = poly.scale
    pts = [(Fraction(x, s), Fraction(y, s)) for x, y in poly.points]
    return pts, [(pts[i], pts[(i + 1) % len(pts)]) for i in range(len(pts))]


class Singular(Exception):
    pass


def billiard_flow(poly, p, d, budget):
    """Move from p with velocity d for time budget, reflecting at the walls.

    Raises Singular when the path runs into a corner.  Returns the end point and
    the velocity there.
    """
    pts, edges = _edges(poly)
    corners = set(pts)
    t_left = Fraction(budget)
    while True:
        best = None
        for a, b in edges:
            if a[0] == b[0]:
                if d[0] == 0:
                    continue
                tau = (a[0] - p[0]) / d[0]
                y = p[1] + tau * d[1]
                inside = min(a[1], b[1]) <= y <= max(a[1], b[1])
            else:
                if d[1] == 0:
                    continue
                tau = (a[1] - p[1]) / d[1]
                x = p[0] + tau * d[0]
                inside = min(a[0], b[0]) <= x <= max(a[0], b[0])
            if tau > 0 and inside and (best is None or tau < best[0]):
                best = (tau, a[0] == b[0])
        tau, vertical = best
        if tau >= t_left:
            return (p[0] + t_left * d[0], p[1] + t_left * d[1]), d
        p = (p[0] + tau * d[0], p[1] + tau * d[1])
        t_left -= tau
        if p in corners:
            raise Singular(p)
        d = (-d[0], d[1]) if vertical else (d[0], -d[1])


def band_trajectory(poly, conn, s):
    """Fold the point at offset s beside the diagonal into the table.

    Offsets are measured along the diagonal's holonomy rotated a quarter turn,
    in units of the holonomy's length.  Returns the folded point and velocity.
    """
    P = poly.corner_position(conn.source)
    h = conn.holonomy
    n = (-h[1], h[0])
    mu = Fraction(1, 997)
    start = (P[0] + mu * h[0], P[1] + mu * h[1])
    q, v = billiard_flow(poly, start, n, s)
    # the perpendicular leg was folded by the same reflections that act on h
    flip = (v[0] * n[0] > 0 or n[0] == 0, v[1] * n[1] > 0 or n[1] == 0)
    return q, (h[0] if flip[0] else -h[0], h[1] if flip[1] else -h[1])


def closes_after_two_lengths(poly, conn, s):
    q, d = band_trajectory(poly, conn, s)
    end, d_end = billiard_flow(poly, q, d, 2)
    return end == q and d_end == d


def band_cases():
    L = l_shape()
    irregular = fs.validate([(0, 0), (1, 0), (1, Fraction(41, 99)), (Fraction(70, 99), Fraction(41, 99)),
                             (Fraction(70, 99), Fraction(13, 10)), (0, Fraction(13, 10))])
    out = []
    for poly, bound in ((L, 60), (irregular, 30)):
        _, bands = fs.band_area_sum(poly, bound)
        out.extend((poly, b) for b in bands)
    return out


BANDS = band_cases()


def test_band_examples_exist():
    assert len(BANDS) >= 6


@pytest.mark.parametrize("case", range(len(BANDS)))
def test_band_width_matches_brute_force_billiard(case):
    poly, band = BANDS[case]
    conn = band.boundary[0]
    assert band.width_sq > 0
    # exact offset of the bounding corner, in units of the holonomy length
    s_max = band.area / (2 * conn.length_sq)
    for frac in (Fraction(1, 7), Fraction(1, 2), Fraction(6, 7)):
        assert closes_after_two_lengths(poly, conn, s_max * frac)
    with pytest.raises(Singular):
        q, d = band_trajectory(poly, conn, s_max)
        billiard_flow(poly, q, d, 2)


@given(st.data())
def test_band_interior_offsets_are_periodic(data):
    poly, band = data.draw(st.sampled_from(BANDS))
    conn = band.boundary[0]
    s_max = band.area / (2 * conn.length_sq)
    frac = data.draw(st.fractions(min_value=Fraction(1, 50), max_value=Fraction(49, 50), max_denominator=50))
    assert closes_after_two_lengths(poly, conn, s_max * frac)


def test_band_geometry_on_l_shape():
    L = l_shape()
    conn = next(c for c in fs.enumerate_diagonals(L, 0, 5) if c.holonomy == (1, 2))
    band = fs.trace_band(conn, L)
    assert band.circumference_sq == 20
    assert band.width_sq == Fraction(1, 5)
    assert band.area == 2 and band.area_weight == Fraction(2, 3)
    # the far side is the loop at the reflex corner with twice the holonomy
    assert len(band.boundary) == 2
    partner = band.boundary[1]
    assert partner.source == partner.target == L.family().index(3)
    assert (abs(partner.holonomy[0]), abs(partner.holonomy[1])) == (2, 4)


def test_band_needs_corner_to_corner_diagonal():
    L = l_shape()
    conn = next(c for c in fs.enumerate_diagonals(L, 0, 2) if c.holonomy == (1, 1))
    with pytest.raises(ValueError):
        fs.trace_band(conn, L)


def test_band_partner_search_bound():
    L = l_shape()
    conn = next(c for c in fs.enumerate_diagonals(L, 0, 5) if c.holonomy == (1, 2))
    with pytest.raises(fs.IncompleteBandError):
        fs.trace_band(conn, L, search_bound=5)


def test_square_bands_have_two_corner_sides():
    sq = fs.rectangle(1, 1)
    total, bands = fs.band_area_sum(sq, 8)
    assert bands and all(b.pole_pole_sides == 2 for b in bands)
    assert total == sum(b.area_weight / 2 for b in bands)


# -- reports ------------------------------------------------------------------------

def test_predictions_for_l_shape():
    from flatcount.pi_arith import PiValue
    L = l_shape()
    reflex = L.family().index(3)
    assert fs.predicted_coefficient(L, fs.Target("pair", 0, reflex)) == PiValue.monomial(2, -1)
    others = [m for m in range(L.n) if m != reflex]
    assert fs.predicted_coefficient(L, fs.Target("pair", others[0], others[1])) == PiValue.monomial(Fraction(1, 2), -1)
    assert fs.predicted_coefficient(L, fs.parse_target("area")) == PiValue.monomial(Fraction(5, 6), -1)


def test_report_rows_and_grid():
    L = l_shape()
    grid = fs.geometric_grid(400, 3)
    assert grid == [100, 200, 400]
    rows = fs.asymptotic_report(L, grid, [fs.Target("pair", 0, 3), fs.Target("area")])
    assert [r.L_sq for r in rows if r.target == "0-3"] == grid
    counts = [r.count for r in rows if r.target == "0-3"]
    assert counts == sorted(counts)
    assert len(rows[0].csv_fields()) == len(fs.CSV_HEADER)


def test_bad_target_text():
    with pytest.raises(fs.PolygonError):
        fs.parse_target("1-2")
