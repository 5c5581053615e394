"""Acceptance criteria and seeded property sweeps.

Every check returns a deterministic one-line result so that repeated runs,
and runs with different worker counts, produce identical output.
"""
from __future__ import annotations

import itertools
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from . import flat_sphere as fs
from . import identity_lab as il
from . import pillowcase as pc
from . import siegel_veech as sv
from .pi_arith import PI, PiValue, double_factorial, multinomial, to_decimal
from .strata import (Signature, add_marked_point, enumerate_signatures, format_signature,
                     parse_signature, volume)

L_SHAPE = [(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)]
TREND_TOLERANCE = Fraction(1, 5)


@dataclass
class Result:
    number: int
    title: str
    passed: bool
    detail: str

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"criterion {self.number} {status} {self.title}: {self.detail}"


# -- 1 ---------------------------------------------------------------------------

def criterion_1() -> Result:
    a = volume(parse_signature("Q(1,-1^5)"))
    b = volume(parse_signature("Q(2,-1^6)"))
    ok = a == PiValue.monomial(1, 4) and b == PiValue.monomial(Fraction(8, 3), 4)
    return Result(1, "volume exactness", ok, f"Q(1,-1^5) -> {a}; Q(2,-1^6) -> {b}")


# -- 2 ---------------------------------------------------------------------------

def criterion_2() -> Result:
    try:
        counts = sv.cross_check_all(8)
    except sv.FormMismatch as exc:
        return Result(2, "closed vs ratio forms", False, str(exc))
    detail = ", ".join(f"{k}={v}" for k, v in counts.items())
    return Result(2, "closed vs ratio forms", True, detail)


# -- 3 ---------------------------------------------------------------------------

def criterion_3() -> Result:
    bad = []
    checked = 0
    for sig in enumerate_signatures(8):
        if not 5 <= sig.k <= 8:
            continue
        rep = sv.verify_carea_identity(sig)
        checked += 1
        if not rep.holds:
            bad.append(str(sig))
    special = sv.verify_carea_identity(parse_signature("Q(1,-1^5)"))
    target = PiValue.monomial(Fraction(5, 3), -2)
    ok = not bad and special.lhs == target and special.rhs == target
    detail = f"{checked} strata, failures {bad or 'none'}; Q(1,-1^5) lhs={special.lhs} rhs={special.rhs}"
    return Result(3, "area identity", ok, detail)


# -- 4 ---------------------------------------------------------------------------

TABLE_CASES = [
    ((4, 4, 1, 1, 1, 1, 1, 1, 1, 1), 0, 1, PiValue.rational(Fraction(9, 10))),
    ((4, 3, 1, 1, 1, 1, 1, 1, 1), 0, 1, PiValue.rational(Fraction(45, 64))),
    ((4, 3, 1, 1, 1, 1, 1, 1, 1), 0, 2, PiValue.rational(Fraction(9, 32))),
    ((3, 3, 1, 1, 1, 1, 1, 1), 0, 1, PiValue.monomial(Fraction(16, 3), -2)),
    ((3, 3, 1, 1, 1, 1, 1, 1), 0, 2, PiValue.monomial(2, -2)),
    ((3, 3, 1, 1, 1, 1, 1, 1), 2, 3, PiValue.monomial(Fraction(1, 2), -2)),
]


def criterion_4() -> Result:
    got = []
    ok = True
    for fam, i, j, want in TABLE_CASES:
        val = sv.table_value(fam, i, j)
        # the billiard coefficient carries an extra pi
        coeff = sv.billiard_constant(fam, "pair", i, j)
        ok &= val == want and coeff == PI * want
        got.append(f"({fam[i]},{fam[j]})={val}")
    return Result(4, "billiard table", ok, "; ".join(got))


# -- 5 ---------------------------------------------------------------------------

def criterion_5(seed: int = 0) -> Result:
    rng = random.Random(seed)
    fails = []
    exhaustive = 0
    for m in range(1, 4):
        for d in itertools.product(range(5), repeat=m):
            exhaustive += 1
            if not il.verify_apr2012(d).holds:
                fails.append(("apr2012", d))
    for _ in range(200):
        d = tuple(rng.randint(0, 6) for _ in range(rng.randint(1, 6)))
        if not il.verify_apr2012(d).holds:
            fails.append(("apr2012", d))
    for _ in range(20):
        b = tuple(rng.randint(1, 3) for _ in range(rng.randint(1, 3)))
        if not il.verify_mohanty(b, 6).holds:
            fails.append(("mohanty", b))
    for _ in range(20):
        d = tuple(rng.randint(0, 4) for _ in range(rng.randint(1, 3)))
        try:
            rep = il.verify_F2_equals_G(d, 5)
        except il.VerificationFailure:
            fails.append(("F/G forms", d))
            continue
        if not rep.holds:
            fails.append(("F2G", d))
    detail = f"{exhaustive} exhaustive + 200 random subset sums, 20 Mohanty, 20 F^2=G; failures {fails or 'none'}"
    return Result(5, "identity lab", not fails, detail)


# -- 6 ---------------------------------------------------------------------------

def random_rectangles(seed: int, count: int) -> List[Tuple[Fraction, Fraction, int]]:
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        w = Fraction(rng.randint(1, 9), rng.randint(1, 9))
        h = Fraction(rng.randint(1, 9), rng.randint(1, 9))
        out.append((w, h, rng.randrange(4)))
    return out


def criterion_6(seed: int = 0, count: int = 50) -> Result:
    bad = []
    total = 0
    for w, h, src in random_rectangles(seed, count):
        L_sq = 10 ** 4 * min(w, h) ** 2
        got = sorted((c.target, c.holonomy[0], c.holonomy[1]) for c in fs.enumerate_diagonals(fs.rectangle(w, h), src, L_sq))
        want = sorted(fs.rectangle_oracle(w, h, src, L_sq))
        total += len(want)
        if got != want:
            bad.append(f"{w}x{h}@{src}")
    return Result(6, "rectangle oracle", not bad,
                  f"{count} rectangles, {total} diagonals; mismatches {bad or 'none'}")


# -- 7 ---------------------------------------------------------------------------

def l_shape_ratios(L_sq: Fraction, max_nodes: Optional[int] = None) -> Tuple[List[Tuple[int, Fraction, PiValue]], List[Tuple[int, int, Fraction, PiValue]]]:
    """Measured N/L^2 for each right-angle corner to the reflex corner, and for each pocket pair."""
    poly = fs.validate(L_SHAPE)
    right = [m for m in range(poly.n) if poly.corner_k[m] == 1]
    reflex = poly.corner_k.index(3)
    conns = {i: fs.enumerate_diagonals(poly, i, L_sq, max_nodes) for i in right}
    to_reflex = []
    pockets = []
    for i in right:
        counts = fs.counts_from_connections(conns[i], poly.n, L_sq)
        pred = fs.predicted_coefficient(poly, fs.Target("pair", i, reflex)) / poly.area
        to_reflex.append((i, counts[reflex] / L_sq, pred))
        for j in right:
            if j > i:
                pred = fs.predicted_coefficient(poly, fs.Target("pair", i, j)) / poly.area
                pockets.append((i, j, counts[j] / L_sq, pred))
    return to_reflex, pockets


def _within(measured: Fraction, predicted: PiValue, tol: Fraction) -> Tuple[bool, str]:
    ratio = PiValue.rational(measured) / predicted if predicted.is_monomial() else None
    # |measured/predicted - 1| <= tol, decided at 30 digits
    r = float(to_decimal(ratio, 30)) if ratio is not None else float("nan")
    return abs(r - 1) <= tol, f"{r:.4f}"


def criterion_7(max_nodes: Optional[int] = None) -> Result:
    poly = fs.validate(L_SHAPE)
    L_sq = 10 ** 4 * poly.area
    to_reflex, pockets = l_shape_ratios(L_sq, max_nodes)
    parts = []
    ok = True
    for i, meas, pred in to_reflex:
        good, r = _within(meas, pred, TREND_TOLERANCE)
        ok &= good
        parts.append(f"N[{i},reflex]/pred={r}")
    for i, j, meas, pred in pockets:
        good, r = _within(meas, pred, TREND_TOLERANCE)
        ok &= good
        parts.append(f"N[{i},{j}]/pred={r}")
    return Result(7, "L-shape trend at L^2=10^4*Area", ok, "; ".join(parts))


# -- 8 ---------------------------------------------------------------------------

def pillowcase_specs(max_degree: int = 12, max_k: int = 6) -> List[pc.CoverSpec]:
    specs = []
    for sig in enumerate_signatures(max_k):
        for d in range(1, max_degree // 4 + 1):
            spec = pc.spec_for_stratum(sig, d)
            if pc.spec_fits(spec):
                specs.append(spec)
    return specs


def criterion_8() -> Result:
    parts = []
    ok = True
    for spec in pillowcase_specs():
        bt = pc.count_covers_backtracking(spec, connected_only=False, weighted=True)
        ch = pc.count_covers_character(spec)
        ok &= bt == ch
        parts.append(f"{format_signature(spec.stratum().orders)} d={spec.d}: {bt} vs {ch}")
    for sig_text, N in (("Q(-1^4)", 8), ("Q(1,-1^5)", 8)):
        sig = parse_signature(sig_text)
        first = pc.volume_trend(sig, N)
        second = pc.volume_trend(sig, N)
        same = [(r.N, r.sq_weighted, r.sq_orbits) for r in first.rows] == \
               [(r.N, r.sq_weighted, r.sq_orbits) for r in second.rows]
        ok &= same and first.monotone()
        parts.append(f"trend {sig_text} N<={N} deterministic={same} monotone={first.monotone()}")
    return Result(8, "pillowcase oracle", ok, "; ".join(parts))


# -- property sweeps -------------------------------------------------------------

def _random_pivalue(rng: random.Random) -> PiValue:
    return PiValue({rng.randint(-3, 3): Fraction(rng.randint(-9, 9), rng.randint(1, 9)) for _ in range(rng.randint(0, 3))})


def prop_pi_ring(seed: int) -> str:
    rng = random.Random(seed)
    for _ in range(300):
        a, b, c = (_random_pivalue(rng) for _ in range(3))
        assert (a + b) + c == a + (b + c)
        assert (a * b) * c == a * (b * c)
        assert a * (b + c) == a * b + a * c
        assert a - a == PiValue()
        x, y = Fraction(rng.randint(-50, 50), rng.randint(1, 50)), Fraction(rng.randint(1, 50), rng.randint(1, 50))
        assert PiValue.rational(x) * PiValue.rational(y) == PiValue.rational(x * y)
        assert PiValue.rational(x) / PiValue.rational(y) == PiValue.rational(x / y)
        assert PiValue.from_json(a.to_json()) == a
    return "300 triples"


def prop_factorials(seed: int) -> str:
    for n in range(1, 60):
        assert double_factorial(n) * double_factorial(n - 1) == math.factorial(n)
    rng = random.Random(seed)
    for _ in range(200):
        parts = [rng.randint(0, 4) for _ in range(rng.randint(1, 4))]
        n = sum(parts) + rng.randint(0, 20 - sum(parts))
        want = math.factorial(n) // (math.factorial(n - sum(parts)) * math.prod(math.factorial(k) for k in parts))
        assert multinomial(n, parts) == want
    return "double factorial n<60, 200 multinomials"


def prop_strata(seed: int) -> str:
    rng = random.Random(seed)
    sigs = enumerate_signatures(9, allow_marked=True)
    for sig in sigs:
        assert sum(sig.orders) == -4
        assert parse_signature(str(sig)).canonical() == sig.canonical()
        assert volume(add_marked_point(sig)) == volume(sig) * 2
        shuffled = list(sig.orders)
        rng.shuffle(shuffled)
        assert volume(Signature(tuple(shuffled))) == volume(sig)
    assert len(set(sigs)) == len(sigs)
    return f"{len(sigs)} signatures"


def prop_identity(seed: int) -> str:
    n = 0
    for sig in enumerate_signatures(8):
        if sig.k >= 5:
            assert sv.verify_carea_identity(sig).holds, str(sig)
            n += 1
    return f"{n} strata"


def prop_identity_lab(seed: int) -> str:
    rng = random.Random(seed)
    for _ in range(50):
        d = tuple(rng.randint(0, 8) for _ in range(rng.randint(1, 5)))
        assert il.verify_apr2012(d).holds, d
    z = il.solve_mohanty_z((1,), 6)
    assert all(z[(k,)] == 1 for k in range(7))
    F, _ = il.series_F((0,), 4)
    G, _ = il.series_G((0,), 4)
    assert F[(0,)] == Fraction(1, 2) and G[(0,)] == Fraction(1, 4)
    return "50 subset sums, geometric series, constant terms"


def prop_billiard_rectangles(seed: int) -> str:
    n = 0
    for w, h, src in random_rectangles(seed + 1, 12):
        L_sq = 400 * min(w, h) ** 2
        got = sorted((c.target, c.holonomy[0], c.holonomy[1]) for c in fs.enumerate_diagonals(fs.rectangle(w, h), src, L_sq))
        assert got == sorted(fs.rectangle_oracle(w, h, src, L_sq)), (w, h, src)
        n += len(got)
    return f"12 rectangles, {n} diagonals"


def prop_billiard_l_shape(seed: int) -> str:
    poly = fs.validate(L_SHAPE)
    big = {i: fs.enumerate_diagonals(poly, i, 400) for i in range(poly.n)}
    for i in range(poly.n):
        small = fs.enumerate_diagonals(poly, i, 100)
        assert small == [c for c in big[i] if c.length_sq <= 100]
        assert all(c.length_sq <= 400 for c in big[i])
        if poly.corner_k[i] == 1:
            mine = sorted((c.target, int(c.holonomy[0]), int(c.holonomy[1])) for c in big[i] if not c.parallel_to_side)
            assert mine == fs.cell_walk_oracle(poly, i, 400), i
    table = fs.count_by_pair(poly, 400)
    for i in range(poly.n):
        for j in range(poly.n):
            assert table[(i, j)] == table[(j, i)]
    assert all(v == 0 for v in fs.count_by_pair(poly, Fraction(1, 100)).values())
    return "bound monotone, cell walk, reciprocity, tiny bound"


def prop_pillowcase_relabel(seed: int) -> str:
    rng = random.Random(seed)
    spec, _ = pc.validate_spec([], [1, 1, 1, 1], 1)
    classes = spec.classes()
    pools = [list(pc.class_elements(mu)) for mu in classes]
    n = spec.degree
    identity = tuple(range(n))
    tuples = set()
    for combo in itertools.product(*pools):
        acc = identity
        for p in combo:
            acc = pc.compose(acc, p)
        if acc == identity:
            tuples.add(combo)
    for _ in range(5):
        g = list(range(n))
        rng.shuffle(g)
        g = tuple(g)
        assert {tuple(pc.conjugate(g, p) for p in t) for t in tuples} == tuples

    def canon(t):
        return min(tuple(pc.conjugate(g, p) for p in t) for g in itertools.permutations(range(n)))
    orbits = {canon(t) for t in tuples if pc.is_transitive(t, n)}
    assert Fraction(len(orbits)) == pc.count_covers_backtracking(spec, True, False)
    return f"{len(tuples)} tuples, {len(orbits)} connected orbits"


def prop_pillowcase_gate(seed: int) -> str:
    rng = random.Random(seed)
    built = 0
    for sig in enumerate_signatures(10):
        for d in (1, 2, 3):
            spec = pc.spec_for_stratum(sig, d)
            assert spec.stratum() == sig.canonical() and sum(spec.stratum().orders) == -4
            built += 1
    accepted = 0
    for _ in range(300):
        eta = [rng.randint(2, 4) for _ in range(rng.randint(0, 2))]
        nu = [rng.choice([1, 1, 1, 3, 5]) for _ in range(rng.randint(0, 10))]
        try:
            _, sig = pc.validate_spec(eta, nu, rng.randint(1, 3))
        except pc.SpecError:
            continue
        accepted += 1
        assert sum(sig.orders) == -4
    counts = pc.sq_count(parse_signature("Q(-1^4)"), 6)
    assert counts.orbits == [pc.torus_quotient_count(n) for n in range(1, 7)]
    return f"{built} specs from strata, {accepted} random specs accepted; torus quotients d<=6"


PROPERTIES: List[Tuple[str, Callable[[int], str]]] = [
    ("pi_arith ring and rational oracle", prop_pi_ring),
    ("pi_arith factorials", prop_factorials),
    ("strata labels and marked points", prop_strata),
    ("siegel_veech area identity", prop_identity),
    ("identity_lab sweeps", prop_identity_lab),
    ("flat_sphere rectangle oracle", prop_billiard_rectangles),
    ("flat_sphere L-shape invariants", prop_billiard_l_shape),
    ("pillowcase relabeling", prop_pillowcase_relabel),
    ("pillowcase genus gate and torus oracle", prop_pillowcase_gate),
]


def _run_property(args: Tuple[int, int]) -> str:
    idx, seed = args
    name, fn = PROPERTIES[idx]
    try:
        return f"  PASS {name}: {fn(seed)}"
    except AssertionError as exc:
        return f"  FAIL {name}: {exc!r}"


def property_lines(seed: int = 0, workers: int = 1) -> List[str]:
    jobs = [(i, seed) for i in range(len(PROPERTIES))]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run_property, jobs))
    return [_run_property(j) for j in jobs]


def criterion_9(seed: int = 0) -> Result:
    first = property_lines(seed, 1)
    again = property_lines(seed, 1)
    parallel = property_lines(seed, 4)
    green = all(line.startswith("  PASS") for line in first)
    same = first == again == parallel
    failed = [line.strip() for line in first if not line.startswith("  PASS")]
    detail = f"{len(first)} sweeps green={green}; identical across runs and workers {{1,4}}={same}"
    if failed:
        detail += "; " + " | ".join(failed)
    return Result(9, "property suites", green and same, detail)


CRITERIA: Dict[int, Callable[[], Result]] = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
}


def run(numbers: Sequence[int] = tuple(CRITERIA)) -> List[Result]:
    return [CRITERIA[n]() for n in numbers]
