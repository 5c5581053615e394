"""Siegel-Veech constants of the four saddle connection configurations.

Each constant is available in two independent forms: a ratio of stratum
volumes and a closed expression in double factorials.  Callers pass
``check=True`` to have both computed and compared.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from .pi_arith import PiValue, double_factorial as dfact
from .strata import (
    DisconnectedSignature,
    InvalidSignature,
    Signature,
    dimension,
    disconnected_volume,
    enumerate_signatures,
    is_pillowcase,
    volume,
)

class ConfigurationError(ValueError):
    pass


class FormMismatch(AssertionError):
    pass


class DegenerateRatio(ValueError):
    """The volume-ratio form has no meaning for this configuration."""


class Kind(str, Enum):
    TYPE_I = "I"
    TYPE_II = "II"
    POCKET = "III"
    DUMBBELL = "IV"


@dataclass(frozen=True)
class Configuration:
    kind: Kind
    signature: Signature
    # TYPE_I: (i, j); TYPE_II: (i, d1, d2); POCKET: (i, p, q); DUMBBELL: (i, j)
    indices: Tuple[int, ...]
    # labels on side a (TYPE_II: besides the split; DUMBBELL: including i)
    side_a: Tuple[int, ...] = ()
    side_b: Tuple[int, ...] = ()

    def describe(self) -> dict:
        return {
            "kind": self.kind.value,
            "signature": str(self.signature),
            "indices": list(self.indices),
            "side_a": list(self.side_a),
            "side_b": list(self.side_b),
        }


def _check(closed: PiValue, ratio: PiValue, what: str) -> PiValue:
    if closed != ratio:
        raise FormMismatch(f"{what}: closed form {closed} != ratio form {ratio}")
    return closed


def _index(sig: Signature, i: int) -> int:
    if not 0 <= i < sig.k:
        raise ConfigurationError(f"index {i} out of range for {sig}")
    return sig.orders[i]


def _drop(orders: Sequence[int], labels: Sequence[int]) -> List[int]:
    gone = set(labels)
    return [d for n, d in enumerate(orders) if n not in gone]


# -- type I: saddle connection joining two distinct singularities -----------

def c_type1_closed(di: int, dj: int) -> PiValue:
    num = dfact(di + dj + 2) * dfact(di + 1) * dfact(dj + 1)
    den = dfact(di + dj + 1) * dfact(di) * dfact(dj)
    if di % 2 and dj % 2:
        return PiValue.monomial(Fraction(2 * num, den), -2)
    return PiValue.rational(Fraction(num, 2 * den))


def c_type1_ratio(sig: Signature, i: int, j: int) -> PiValue:
    di, dj = _index(sig, i), _index(sig, j)
    if di == -1 and dj == -1:
        raise DegenerateRatio("two poles cannot merge into a singularity of order -2")
    merged = Signature(tuple([di + dj] + _drop(sig.orders, (i, j))))
    return (di + dj + 2) * volume(merged) / volume(sig)


def c_type1(sig: Signature, i: int, j: int, check: bool = False) -> PiValue:
    if i == j:
        raise ConfigurationError("type I needs two distinct singularities")
    di, dj = _index(sig, i), _index(sig, j)
    closed = c_type1_closed(di, dj)
    if check:
        if di == -1 and dj == -1:
            # a pole-pole connection is half the waist of a pocket, so its
            # count is four times that of pockets on the same pair of poles;
            # marked points do not change the flat surface, so drop them first
            bare = Signature(tuple(d for d in sig.orders if d != 0))
            if is_pillowcase(bare):
                raise DegenerateRatio("no pocket cylinders on a pillowcase")
            _check(closed, 4 * c_pocket_total(bare), "type I pole pair vs pockets")
        else:
            _check(closed, c_type1_ratio(sig, i, j), "type I")
    return closed


# -- type II: loop at a zero splitting the sphere ----------------------------

def _type2_parts(cfg: Configuration) -> Tuple[int, int, int, List[int], List[int]]:
    sig = cfg.signature
    i, d1, d2 = cfg.indices
    di = _index(sig, i)
    if di < 2:
        raise ConfigurationError(f"type II needs a zero of order >= 2, got {di}")
    if d1 + d2 != di - 4 or min(d1, d2) < -1:
        raise ConfigurationError(f"invalid split ({d1},{d2}) of order {di}")
    rest = set(range(sig.k)) - {i}
    if set(cfg.side_a) | set(cfg.side_b) != rest or set(cfg.side_a) & set(cfg.side_b):
        raise ConfigurationError("sides must partition the other singularities")
    a = [d1] + [sig.orders[n] for n in cfg.side_a]
    b = [d2] + [sig.orders[n] for n in cfg.side_b]
    if sum(a) != -4 or sum(b) != -4:
        raise ConfigurationError("side signatures must sum to -4")
    return di, d1, d2, a, b


def c_type2_closed(cfg: Configuration) -> PiValue:
    di, d1, d2, a, b = _type2_parts(cfg)
    k1, k2, k = len(a) - 1, len(b) - 1, cfg.signature.k
    coeff = Fraction(dfact(d1 + 2) * dfact(d2 + 2) * dfact(di + 1),
                     8 * dfact(d1 + 1) * dfact(d2 + 1) * dfact(di))
    coeff *= Fraction(math.factorial(k1 - 2) * math.factorial(k2 - 2), math.factorial(k - 4))
    if d1 % 2 and d2 % 2:
        return PiValue.rational(coeff)
    return PiValue.monomial(4 * coeff, -2)


def c_type2_ratio(cfg: Configuration) -> PiValue:
    _, d1, d2, a, b = _type2_parts(cfg)
    sa, sb = Signature(tuple(a)), Signature(tuple(b))
    coeff = Fraction((d1 + 2) * (d2 + 2), 8)
    coeff *= Fraction(math.factorial(dimension(sa) - 1) * math.factorial(dimension(sb) - 1),
                      math.factorial(dimension(cfg.signature) - 2))
    return coeff * volume(sa) * volume(sb) / volume(cfg.signature)


def c_type2(cfg: Configuration, check: bool = False) -> PiValue:
    closed = c_type2_closed(cfg)
    if check:
        _check(closed, c_type2_ratio(cfg), "type II")
    return closed


# -- type III: pocket bounded by a pole pair and a loop at a zero ------------

def _pocket_checks(sig: Signature, i: int):
    di = _index(sig, i)
    if di < 1:
        raise ConfigurationError(f"pocket needs a zero of order >= 1, got {di}")
    if len(sig.poles()) < 2:
        raise ConfigurationError("pocket needs two simple poles")
    return di


def c_pocket_closed(sig: Signature, i: int) -> PiValue:
    di = _pocket_checks(sig, i)
    return PiValue.monomial(Fraction(di + 1, 2 * (sig.k - 4)), -2)


def c_pocket_ratio(sig: Signature, i: int, poles: Optional[Tuple[int, int]] = None) -> PiValue:
    di = _pocket_checks(sig, i)
    p, q = poles if poles is not None else sig.poles()[:2]
    if sig.orders[p] != -1 or sig.orders[q] != -1 or p == q:
        raise ConfigurationError("pocket boundary must be two distinct simple poles")
    shrunk = [d - 2 if n == i else d for n, d in enumerate(sig.orders) if n not in (p, q)]
    coeff = Fraction(di, 2 * (dimension(sig) - 2))
    return coeff * volume(Signature(tuple(shrunk))) / volume(sig)


def c_pocket(sig: Signature, i: int, check: bool = False) -> PiValue:
    closed = c_pocket_closed(sig, i)
    if check:
        _check(closed, c_pocket_ratio(sig, i), "pocket")
    return closed


def c_pocket_total(sig: Signature) -> PiValue:
    """Pocket constant for a fixed pole pair, summed over the zero at the base."""
    if sig.has_marked_points():
        raise ConfigurationError("pocket total is stated for strata without marked points")
    zeros = sig.zeros()
    if not zeros:
        raise ConfigurationError(f"{sig} has no zero of order >= 1")
    total = PiValue()
    for i in zeros:
        total = total + c_pocket_closed(sig, i)
    return total


# -- type IV: dumbbell, a cylinder between loops at two zeros ----------------

def _dumbbell_parts(cfg: Configuration) -> Tuple[int, int, List[int], List[int]]:
    sig = cfg.signature
    i, j = cfg.indices
    di, dj = _index(sig, i), _index(sig, j)
    if di < 1 or dj < 1:
        raise ConfigurationError("dumbbell boundary zeros need order >= 1")
    if i not in cfg.side_a or j not in cfg.side_b:
        raise ConfigurationError("zero i must lie on side a and zero j on side b")
    if set(cfg.side_a) | set(cfg.side_b) != set(range(sig.k)) or set(cfg.side_a) & set(cfg.side_b):
        raise ConfigurationError("sides must partition all singularities")
    a = [sig.orders[n] - 2 * (n == i) for n in cfg.side_a]
    b = [sig.orders[n] - 2 * (n == j) for n in cfg.side_b]
    if sum(a) != -4 or sum(b) != -4:
        raise ConfigurationError("contracted sides must sum to -4")
    return di, dj, a, b


def c_dumbbell_closed(cfg: Configuration) -> PiValue:
    di, dj, _, _ = _dumbbell_parts(cfg)
    k1, k2, k = len(cfg.side_a), len(cfg.side_b), cfg.signature.k
    coeff = Fraction((di + 1) * (dj + 1), 2)
    coeff *= Fraction(math.factorial(k1 - 3) * math.factorial(k2 - 3), math.factorial(k - 4))
    return PiValue.monomial(coeff, -2)


def c_dumbbell_ratio(cfg: Configuration) -> PiValue:
    di, dj, a, b = _dumbbell_parts(cfg)
    both = DisconnectedSignature(Signature(tuple(a)), Signature(tuple(b)))
    joint = dimension(both.part_a) + dimension(both.part_b)
    # the disconnected volume carries 1/2 * (da-1)!(db-1)!/(da+db-1)!;
    # the formula wants (da-1)!(db-1)!/(dim-2)! instead
    coeff = Fraction(di * dj, 4) * 2
    coeff *= Fraction(math.factorial(joint - 1), math.factorial(dimension(cfg.signature) - 2))
    return coeff * disconnected_volume(both) / volume(cfg.signature)


def c_dumbbell(cfg: Configuration, check: bool = False) -> PiValue:
    closed = c_dumbbell_closed(cfg)
    if check:
        _check(closed, c_dumbbell_ratio(cfg), "dumbbell")
    return closed


# -- configuration inventories -----------------------------------------------

def type1_configurations(sig: Signature) -> Iterator[Configuration]:
    for i, j in itertools.combinations(range(sig.k), 2):
        yield Configuration(Kind.TYPE_I, sig, (i, j))


def type2_configurations(sig: Signature) -> Iterator[Configuration]:
    for i, di in enumerate(sig.orders):
        if di < 2:
            continue
        others = [n for n in range(sig.k) if n != i]
        for d1 in range(-1, di - 4 + 2):
            d2 = di - 4 - d1
            if d2 < -1:
                continue
            for r in range(len(others) + 1):
                for side_a in itertools.combinations(others, r):
                    if d1 + sum(sig.orders[n] for n in side_a) != -4:
                        continue
                    side_b = tuple(n for n in others if n not in side_a)
                    yield Configuration(Kind.TYPE_II, sig, (i, d1, d2), side_a, side_b)


def pocket_configurations(sig: Signature) -> Iterator[Configuration]:
    poles = sig.poles()
    for i in sig.zeros():
        for p, q in itertools.combinations(poles, 2):
            yield Configuration(Kind.POCKET, sig, (i, p, q))


def dumbbell_configurations(sig: Signature) -> Iterator[Configuration]:
    """Unordered two-part partitions, each with a chosen zero on both sides."""
    labels = list(range(sig.k))
    for r in range(1, sig.k):
        for side_a in itertools.combinations(labels, r):
            # count each unordered partition once: side a holds label 0
            if 0 not in side_a:
                continue
            side_b = tuple(n for n in labels if n not in side_a)
            if sum(sig.orders[n] for n in side_a) != -2:
                continue
            for i in side_a:
                if sig.orders[i] < 1:
                    continue
                for j in side_b:
                    if sig.orders[j] >= 1:
                        yield Configuration(Kind.DUMBBELL, sig, (i, j), side_a, side_b)


def all_configurations(sig: Signature) -> Iterator[Configuration]:
    yield from type1_configurations(sig)
    if sig.has_marked_points():
        return
    yield from type2_configurations(sig)
    yield from pocket_configurations(sig)
    yield from dumbbell_configurations(sig)


def constant(cfg: Configuration, check: bool = False) -> PiValue:
    if cfg.kind is Kind.TYPE_I:
        return c_type1(cfg.signature, *cfg.indices, check=check)
    if cfg.kind is Kind.TYPE_II:
        return c_type2(cfg, check=check)
    if cfg.kind is Kind.POCKET:
        i, p, q = cfg.indices
        closed = c_pocket_closed(cfg.signature, i)
        if check:
            _check(closed, c_pocket_ratio(cfg.signature, i, (p, q)), "pocket")
        return closed
    return c_dumbbell(cfg, check=check)


def cross_check_all(max_k: int = 8) -> Dict[str, int]:
    """Compare ratio and closed forms over every configuration with k <= max_k.

    Returns the number of configurations checked per kind; raises on mismatch.
    """
    counts = {k.value: 0 for k in Kind}
    counts["skipped"] = 0
    for sig in enumerate_signatures(max_k, allow_marked=True):
        if is_pillowcase(sig):
            continue
        for cfg in all_configurations(sig):
            try:
                constant(cfg, check=True)
            except DegenerateRatio:
                counts["skipped"] += 1
                continue
            counts[cfg.kind.value] += 1
    return counts


# -- area constant and the identity tying it to cylinders --------------------

def c_area(sig: Signature) -> PiValue:
    if sig.has_marked_points():
        raise ConfigurationError("c_area is defined here for strata without marked points")
    total = sum((Fraction(d * (d + 4), d + 2) for d in sig.orders), Fraction(0))
    return PiValue.monomial(-total / 8, -2)


def vorobets_ratio(sig: Signature) -> Fraction:
    n = sig.k
    if n < 4:
        raise ConfigurationError("need at least four singularities")
    return Fraction(1, n - 3)


@dataclass
class IdentityReport:
    signature: Signature
    lhs: PiValue
    rhs: PiValue
    holds: bool
    pockets: int
    dumbbells: int
    diagnostic: str = ""

    def to_json(self) -> dict:
        out = {
            "signature": str(self.signature),
            "lhs": self.lhs.to_json(),
            "rhs": self.rhs.to_json(),
            "holds": self.holds,
            "pockets": self.pockets,
            "dumbbells": self.dumbbells,
        }
        if self.diagnostic:
            out["diagnostic"] = self.diagnostic
        return out


def verify_carea_identity(sig: Signature) -> IdentityReport:
    lhs = c_area(sig)
    pockets = list(pocket_configurations(sig))
    dumbbells = list(dumbbell_configurations(sig))
    if not pockets and not dumbbells:
        return IdentityReport(sig, lhs, PiValue(), False, 0, 0,
                              "no cylinder configurations: stratum has no zero of order >= 1")
    total = PiValue()
    for cfg in pockets:
        total = total + c_pocket_closed(sig, cfg.indices[0])
    for cfg in dumbbells:
        total = total + c_dumbbell_closed(cfg)
    rhs = total * Fraction(1, sig.k - 3)
    return IdentityReport(sig, lhs, rhs, lhs == rhs, len(pockets), len(dumbbells))


# -- right-angled billiards --------------------------------------------------

def family_signature(family: Sequence[int]) -> Signature:
    """Double of a right-angled table with corner angles k*pi/2."""
    if any(k < 1 for k in family):
        raise InvalidSignature("corner multiples must be positive")
    if sum(2 - k for k in family) != 4:
        raise InvalidSignature(f"corner data {tuple(family)} violates sum(2 - k) = 4")
    return Signature(tuple(k - 2 for k in family))


def table_value(family: Sequence[int], i: int, j: int) -> PiValue:
    """Type I constant of the doubled table divided by four."""
    sig = family_signature(family)
    return c_type1(sig, i, j) / 4


def billiard_constant(family: Sequence[int], config_class: str, i: int = 0, j: int = 1) -> PiValue:
    """Coefficient of L^2/Area in the table's counting asymptotics.

    config_class is one of ``pair`` (diagonals joining corners i and j),
    ``pocket`` (diagonals joining two fixed right-angle corners, routed
    through pocket cylinders), or ``area`` (bands weighted by area).
    """
    sig = family_signature(family)
    if config_class == "pair":
        return PiValue.monomial(1, 1) * c_type1(sig, i, j) / 4
    if config_class == "pocket":
        # diagonal is half the waist curve: lengths rescale by 2, counts by 4
        return PiValue.monomial(1, 1) * 4 * c_pocket_total(sig) / 4
    if config_class == "area":
        return PiValue.monomial(Fraction(1, 2), 1) * c_area(sig)
    raise ConfigurationError(f"unknown configuration class {config_class!r}")
