"""Pillowcase covers counted by permutation monodromy.

A cover of degree n branched over r points is a tuple of permutations
(g_1, ..., g_r) in S_n with prescribed cycle types and g_1 g_2 ... g_r = 1.
Counting such tuples is done two ways: by a search that fixes the first
permutation up to conjugacy, and by the Frobenius character sum with
characters from the Murnaghan-Nakayama rule.
"""
from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from .pi_arith import PiValue
from .strata import InvalidSignature, Signature, dimension, volume, volume_unlabeled

Perm = Tuple[int, ...]
Partition = Tuple[int, ...]

DEFAULT_DEGREE_CAP = 12


class ResourceCapError(RuntimeError):
    pass


class SpecError(ValueError):
    pass


# -- permutations --------------------------------------------------------------

def compose(p: Perm, q: Perm) -> Perm:
    """(p q)(i) = p(q(i))."""
    return tuple(p[i] for i in q)


def inverse(p: Perm) -> Perm:
    out = [0] * len(p)
    for i, j in enumerate(p):
        out[j] = i
    return tuple(out)


def cycle_type(p: Perm) -> Partition:
    seen = bytearray(len(p))
    lengths = []
    for start in range(len(p)):
        if seen[start]:
            continue
        n = 0
        i = start
        while not seen[i]:
            seen[i] = 1
            i = p[i]
            n += 1
        lengths.append(n)
    return tuple(sorted(lengths, reverse=True))


def class_size(mu: Partition) -> int:
    n = sum(mu)
    z = 1
    for part, mult in Counter(mu).items():
        z *= part ** mult * math.factorial(mult)
    return math.factorial(n) // z


def class_elements(mu: Partition) -> Iterator[Perm]:
    """Every permutation of cycle type mu, each exactly once."""
    n = sum(mu)
    perm = [-1] * n
    remaining = Counter(mu)

    def rec(unused: List[int]):
        if not unused:
            yield tuple(perm)
            return
        head, rest = unused[0], unused[1:]
        for length in sorted(remaining):
            if not remaining[length] or length - 1 > len(rest):
                continue
            remaining[length] -= 1
            for tail in itertools.permutations(rest, length - 1):
                cyc = (head,) + tail
                for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                    perm[a] = b
                left = [x for x in rest if x not in tail]
                yield from rec(left)
            remaining[length] += 1

    yield from rec(list(range(n)))


def class_representative(mu: Partition) -> Tuple[Perm, List[Tuple[int, ...]]]:
    """Canonical element with cycles on consecutive blocks, and those blocks."""
    perm = []
    blocks = []
    start = 0
    for length in sorted(mu, reverse=True):
        block = tuple(range(start, start + length))
        blocks.append(block)
        perm.extend(block[1:] + block[:1])
        start += length
    return tuple(perm), blocks


def centralizer_generators(mu: Partition) -> List[Perm]:
    rep, blocks = class_representative(mu)
    n = len(rep)
    gens = []
    for block in blocks:
        if len(block) > 1:
            g = list(range(n))
            for a, b in zip(block, block[1:] + block[:1]):
                g[a] = b
            gens.append(tuple(g))
    for b1, b2 in zip(blocks, blocks[1:]):
        if len(b1) == len(b2):
            g = list(range(n))
            for x, y in zip(b1, b2):
                g[x], g[y] = y, x
            gens.append(tuple(g))
    return gens


def conjugate(g: Perm, p: Perm) -> Perm:
    """g p g^-1."""
    out = [0] * len(p)
    for i, j in enumerate(p):
        out[g[i]] = g[j]
    return tuple(out)


def orbit_representatives(mu: Partition, gens: Sequence[Perm]) -> List[Tuple[Perm, int]]:
    """Orbits of conjugation by <gens> on the class mu, as (rep, size)."""
    elems = list(class_elements(mu))
    index = {p: i for i, p in enumerate(elems)}
    parent = list(range(len(elems)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, p in enumerate(elems):
        for g in gens:
            j = index[conjugate(g, p)]
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)
    sizes = Counter(find(i) for i in range(len(elems)))
    return [(elems[r], sizes[r]) for r in sorted(sizes)]


def is_transitive(perms: Sequence[Perm], n: int) -> bool:
    if n == 0:
        return True
    seen = {0}
    stack = [0]
    while stack:
        i = stack.pop()
        for p in perms:
            j = p[i]
            if j not in seen:
                seen.add(j)
                stack.append(j)
    return len(seen) == n


def _orbits(perms: Sequence[Perm], n: int) -> List[List[int]]:
    seen = [False] * n
    out = []
    for s in range(n):
        if seen[s]:
            continue
        comp = [s]
        seen[s] = True
        k = 0
        while k < len(comp):
            i = comp[k]
            k += 1
            for p in perms:
                j = p[i]
                if not seen[j]:
                    seen[j] = True
                    comp.append(j)
        out.append(sorted(comp))
    return out


def _encoding(perms: Sequence[Perm], comp: Sequence[int], start: int) -> Tuple[int, ...]:
    """Relabel a transitive component by breadth-first order from start."""
    label = {start: 0}
    order = [start]
    k = 0
    while k < len(order):
        i = order[k]
        k += 1
        for p in perms:
            j = p[i]
            if j not in label:
                label[j] = len(order)
                order.append(j)
    return tuple(label[p[i]] for p in perms for i in order)


def centralizer_order(perms: Sequence[Perm], n: int) -> int:
    """Order of the set of elements of S_n commuting with every perm."""
    classes: Dict[Tuple[int, ...], List[int]] = {}
    for comp in _orbits(perms, n):
        codes = [_encoding(perms, comp, s) for s in comp]
        best = min(codes)
        classes.setdefault(best, []).append(codes.count(best))
    total = 1
    for autos in classes.values():
        total *= math.factorial(len(autos))
        for a in autos:
            total *= a
    return total


# -- tuple counting ------------------------------------------------------------

@dataclass
class TupleCount:
    labeled: int            # number of tuples with product 1
    orbit_weight: Fraction  # sum of |centralizer| / n!, i.e. conjugacy orbits

    @property
    def orbits(self) -> Fraction:
        return self.orbit_weight


def count_tuples(classes: Sequence[Partition], connected_only: bool, want_orbits: bool = True) -> TupleCount:
    """Count (g_1..g_r), g_i of cycle type classes[i], with product identity."""
    classes = [tuple(sorted(c, reverse=True)) for c in classes]
    if not classes:
        raise SpecError("need at least one class")
    n = sum(classes[0])
    if any(sum(c) != n for c in classes):
        raise SpecError("all classes must partition the same degree")
    # the count is symmetric in the classes, so put the biggest class last
    # (it is the one solved for) and fix a representative of the next one
    order = sorted(range(len(classes)), key=lambda i: (class_size(classes[i]), i))
    solved = classes[order[-1]]
    free = [classes[i] for i in order[:-1]]
    if not free:
        ident = tuple(range(n))
        ok = cycle_type(ident) == solved and (not connected_only or is_transitive([ident], n))
        weight = Fraction(centralizer_order([ident], n), math.factorial(n)) if ok else Fraction(0)
        return TupleCount(int(ok), weight)

    fixed_class = free[-1]
    fixed, _ = class_representative(fixed_class)
    fixed_mult = class_size(fixed_class)
    rest = free[:-1]

    labeled = 0
    orbit_sum = Fraction(0)
    nfact = math.factorial(n)

    if rest:
        reduced_class = rest[-1]
        reduced = orbit_representatives(reduced_class, centralizer_generators(fixed_class))
        full = rest[:-1]
    else:
        reduced = [(None, 1)]
        full = []
    full_lists = [list(class_elements(c)) for c in full]

    for second, mult in reduced:
        head = [fixed] if second is None else [fixed, second]
        base = head[0] if second is None else compose(fixed, second)
        for tail in itertools.product(*full_lists):
            prod = base
            for t in tail:
                prod = compose(prod, t)
            if cycle_type(prod) != solved:
                continue
            perms = head + list(tail) + [inverse(prod)]
            if connected_only and not is_transitive(perms, n):
                continue
            labeled += mult
            if want_orbits:
                orbit_sum += Fraction(mult * centralizer_order(perms, n), nfact)
    return TupleCount(labeled * fixed_mult, orbit_sum * fixed_mult)


# -- characters ----------------------------------------------------------------

def partitions(n: int, cap: Optional[int] = None) -> Iterator[Partition]:
    cap = n if cap is None else cap
    if n == 0:
        yield ()
        return
    for first in range(min(n, cap), 0, -1):
        for rest in partitions(n - first, first):
            yield (first,) + rest


@lru_cache(maxsize=None)
def character(lam: Partition, mu: Partition) -> int:
    """chi_lam evaluated on the class mu, by removing rim hooks."""
    if not mu:
        return 1 if sum(lam) == 0 else 0
    r, rest = mu[0], mu[1:]
    m = len(lam)
    beta = [lam[i] + (m - 1 - i) for i in range(m)]
    present = set(beta)
    total = 0
    for b in beta:
        nb = b - r
        if nb < 0 or nb in present:
            continue
        sign = -1 if sum(1 for x in beta if nb < x < b) % 2 else 1
        new_beta = sorted([x for x in beta if x != b] + [nb], reverse=True)
        new_lam = tuple(x - (m - 1 - i) for i, x in enumerate(new_beta))
        new_lam = tuple(x for x in new_lam if x > 0)
        total += sign * character(new_lam, rest)
    return total


def frobenius_tuple_count(classes: Sequence[Partition]) -> Fraction:
    """Number of tuples with product 1 from the character sum."""
    classes = [tuple(sorted(c, reverse=True)) for c in classes]
    n = sum(classes[0])
    r = len(classes)
    prefactor = Fraction(math.prod(class_size(c) for c in classes), math.factorial(n))
    total = Fraction(0)
    for lam in partitions(n):
        dim = character(lam, (1,) * n)
        term = Fraction(math.prod(character(lam, c) for c in classes), dim ** (r - 2)) if r >= 2 else \
            Fraction(math.prod(character(lam, c) for c in classes) * dim ** (2 - r))
        total += term
    return prefactor * total


# -- pillowcase cover specs ----------------------------------------------------

@dataclass(frozen=True)
class CoverSpec:
    d: int
    eta: Partition
    nu: Partition

    @property
    def degree(self) -> int:
        return 4 * self.d

    def stratum(self) -> Signature:
        return Signature(tuple(sorted([x - 2 for x in self.nu] + [2 * e - 2 for e in self.eta], reverse=True)))

    def classes(self) -> List[Partition]:
        n = self.degree
        twos = (n - sum(self.nu)) // 2
        corner0 = tuple(sorted(self.nu + (2,) * twos, reverse=True))
        others = [(2,) * (n // 2)] * 3
        extra = [tuple([e] + [1] * (n - e)) for e in self.eta]
        return [corner0] + others + extra

    def to_json(self) -> dict:
        return {"eta": list(self.eta), "nu": list(self.nu), "d": self.d}


def validate_spec(eta: Sequence[int], nu: Sequence[int], d: int) -> Tuple[CoverSpec, Signature]:
    eta = tuple(sorted((int(x) for x in eta), reverse=True))
    nu = tuple(sorted((int(x) for x in nu), reverse=True))
    if d < 1:
        raise SpecError("d must be >= 1")
    if any(x < 2 for x in eta):
        raise SpecError("eta parts must be >= 2; parts equal to 1 are unramified")
    if any(x < 1 or x % 2 == 0 for x in nu) or sum(nu) % 2:
        raise SpecError("nu must partition an even number into odd parts")
    genus_term = Fraction(len(eta) + len(nu)) - sum(eta) - Fraction(sum(nu), 2)
    if genus_term != 2:
        raise SpecError(f"genus-zero condition fails: l(eta)+l(nu)-|eta|-|nu|/2 = {genus_term}")
    spec = CoverSpec(d, eta, nu)
    return spec, spec.stratum()


def spec_for_stratum(sig: Signature, d: int) -> CoverSpec:
    """The corner data (eta, nu) realizing a marked-point-free stratum."""
    if sig.has_marked_points():
        raise SpecError("marked points have no ramification profile")
    nu = [x + 2 for x in sig.orders if x % 2]
    eta = [x // 2 + 1 for x in sig.orders if x % 2 == 0]
    spec, _ = validate_spec(eta, nu, d)
    return spec


def spec_fits(spec: CoverSpec) -> bool:
    n = spec.degree
    return sum(spec.nu) <= n and all(e <= n for e in spec.eta)


def _check_cap(n: int, cap: Optional[int]):
    cap = DEFAULT_DEGREE_CAP if cap is None else cap
    if n > cap:
        raise ResourceCapError(f"degree {n} exceeds cap {cap}")


def count_covers_backtracking(spec: CoverSpec, connected_only: bool, weighted: bool,
                              cap: Optional[int] = None) -> Fraction:
    """Weighted (sum of 1/|Aut|) or orbit count of covers of the given type."""
    _check_cap(spec.degree, cap)
    if not spec_fits(spec):
        return Fraction(0)
    tc = count_tuples(spec.classes(), connected_only, want_orbits=not weighted)
    if weighted:
        return Fraction(tc.labeled, math.factorial(spec.degree))
    return tc.orbits


def count_covers_character(spec: CoverSpec, cap: Optional[int] = None) -> Fraction:
    """Weighted count of all (possibly disconnected) covers, via characters."""
    _check_cap(spec.degree, cap)
    if not spec_fits(spec):
        return Fraction(0)
    return frobenius_tuple_count(spec.classes()) / math.factorial(spec.degree)


# -- square-tiled surfaces -------------------------------------------------------

def _corner_assignments(orders: Sequence[int], n: int) -> Iterator[List[Partition]]:
    """Ways to put the singularities on the four corners of the pillow."""
    counts = sorted(Counter(orders).items())
    per_order = []
    for order, mult in counts:
        per_order.append([(order, split) for split in _compositions(mult, 4)])
    for choice in itertools.product(*per_order):
        corners: List[List[int]] = [[], [], [], []]
        for order, split in choice:
            for c in range(4):
                corners[c].extend([order + 2] * split[c])
        classes = []
        for cycles in corners:
            left = n - sum(cycles)
            if left < 0 or left % 2:
                break
            classes.append(tuple(sorted(cycles + [2] * (left // 2), reverse=True)))
        else:
            yield classes


def _compositions(total: int, parts: int) -> List[Tuple[int, ...]]:
    if parts == 1:
        return [(total,)]
    return [(first,) + rest for first in range(total + 1) for rest in _compositions(total - first, parts - 1)]


@dataclass
class SquareTiledCounts:
    signature: Signature
    degrees: List[int]
    weighted: List[Fraction] = field(default_factory=list)
    orbits: List[Fraction] = field(default_factory=list)

    def cumulative(self, which: str = "orbits") -> List[Fraction]:
        vals = self.orbits if which == "orbits" else self.weighted
        return list(itertools.accumulate(vals))


def sq_count(sig: Signature, N: int, cap: Optional[int] = None) -> SquareTiledCounts:
    """Connected pillowcase covers of degree 1..N with singularity data sig."""
    if sig.has_marked_points():
        raise InvalidSignature("marked points are regular points of a pillowcase cover")
    _check_cap(N, cap)
    out = SquareTiledCounts(sig, list(range(1, N + 1)))
    for n in out.degrees:
        w = Fraction(0)
        o = Fraction(0)
        for classes in _corner_assignments(sig.orders, n):
            tc = count_tuples(classes, connected_only=True)
            w += Fraction(tc.labeled, math.factorial(n))
            o += tc.orbits
        out.weighted.append(w)
        out.orbits.append(o)
    return out


def torus_quotient_count(n: int) -> int:
    """Covers of degree n in Q(-1^4), from index-n sublattices of Z^2.

    Each sublattice L gives the tori C/L -> C/Z^2; the pillowcase covers over
    it are the quotients by z -> c - z with c in Z^2 / (L + 2 Z^2).
    """
    total = 0
    for a in range(1, n + 1):
        if n % a:
            continue
        c = n // a
        for b in range(c):
            # L spanned by (a, 0) and (b, c), in Hermite normal form
            total += _index_of_sum_with_2z2(a, b, c)
    return total


def _index_of_sum_with_2z2(a: int, b: int, c: int) -> int:
    """|Z^2 / (L + 2Z^2)| for L = <(a, 0), (b, c)>."""
    vecs = [(a % 2, 0), (b % 2, c % 2)]
    span = {(0, 0)}
    for v in vecs:
        span |= {((x + v[0]) % 2, (y + v[1]) % 2) for x, y in span}
    return 4 // len(span)


@dataclass
class TrendRow:
    N: int
    sq_weighted: Fraction
    sq_orbits: Fraction
    ratio_weighted: Fraction
    ratio_orbits: Fraction


@dataclass
class TrendReport:
    signature: Signature
    dim: int
    target_labeled: PiValue
    target_unlabeled: PiValue
    rows: List[TrendRow]

    def monotone(self) -> bool:
        w = [r.sq_weighted for r in self.rows]
        o = [r.sq_orbits for r in self.rows]
        return all(x <= y for x, y in zip(w, w[1:])) and all(x <= y for x, y in zip(o, o[1:]))


def volume_trend(sig: Signature, N: int, cap: Optional[int] = None) -> TrendReport:
    """Rows (N, Sq_N, 2 dim Sq_N / N^dim) next to the exact volume."""
    counts = sq_count(sig, N, cap)
    dim = dimension(sig)
    rows = []
    for n, w, o in zip(counts.degrees, counts.cumulative("weighted"), counts.cumulative("orbits")):
        scale = Fraction(2 * dim, n ** dim)
        rows.append(TrendRow(n, w, o, scale * w, scale * o))
    return TrendReport(sig, dim, volume(sig), volume_unlabeled(sig), rows)


@dataclass
class CoverTrendRow:
    N: int
    connected_weighted: Fraction
    connected_orbits: Fraction
    ratio_weighted: Fraction
    ratio_orbits: Fraction


def cover_trend(eta: Sequence[int], nu: Sequence[int], N: int, cap: Optional[int] = None) -> Tuple[PiValue, List[CoverTrendRow]]:
    """Partial sums of connected covers of degree 4d, d <= N, normalized by N^(l-2).

    Returns the target Vol / (2 (l(eta) + l(nu) - 2)) with the rows.
    """
    rows = []
    acc_w = Fraction(0)
    acc_o = Fraction(0)
    spec = None
    for d in range(1, N + 1):
        spec, sig = validate_spec(eta, nu, d)
        acc_w += count_covers_backtracking(spec, True, True, cap)
        acc_o += count_covers_backtracking(spec, True, False, cap)
        power = len(spec.eta) + len(spec.nu) - 2
        rows.append(CoverTrendRow(d, acc_w, acc_o, acc_w / d ** power, acc_o / d ** power))
    spec, sig = validate_spec(eta, nu, 1)
    target = volume(sig) / (2 * (len(spec.eta) + len(spec.nu) - 2))
    return target, rows
