"""Genus-zero strata Q(d_1, ..., d_k): parsing, dimension and exact volume."""
from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, List, Tuple

from .pi_arith import DomainError, PiValue, double_factorial


class InvalidSignature(ValueError):
    pass


@dataclass(frozen=True)
class Signature:
    """Orders of the labeled singularities; label i is position i."""

    orders: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "orders", tuple(int(d) for d in self.orders))
        if any(d < -1 for d in self.orders):
            raise InvalidSignature(f"orders must be >= -1, got {self.orders}")
        total = sum(self.orders)
        if total != -4:
            raise InvalidSignature(f"signature sum is {total}, expected -4")

    def __len__(self) -> int:
        return len(self.orders)

    def __iter__(self):
        return iter(self.orders)

    def __getitem__(self, i: int) -> int:
        return self.orders[i]

    @property
    def k(self) -> int:
        return len(self.orders)

    def canonical(self) -> "Signature":
        return Signature(tuple(sorted(self.orders, reverse=True)))

    def has_marked_points(self) -> bool:
        return 0 in self.orders

    def poles(self) -> List[int]:
        return [i for i, d in enumerate(self.orders) if d == -1]

    def zeros(self) -> List[int]:
        return [i for i, d in enumerate(self.orders) if d >= 1]

    def __str__(self) -> str:
        return format_signature(self.orders)


def format_signature(orders: Iterable[int]) -> str:
    counts = Counter(orders)
    parts = []
    for d in sorted(counts, reverse=True):
        m = counts[d]
        parts.append(str(d) if m == 1 else f"{d}^{m}")
    return "Q(" + ",".join(parts) + ")"


_ENTRY = re.compile(r"^(-?\d+)(?:\^(\d+))?$")


def parse_signature(text: str) -> Signature:
    """Parse the whitespace-free form, e.g. ``Q(2,1,-1^7)``."""
    if not (text.startswith("Q(") and text.endswith(")")) or any(ch.isspace() for ch in text):
        raise InvalidSignature(f"cannot parse signature {text!r}")
    body = text[2:-1]
    if not body:
        raise InvalidSignature("empty signature")
    orders: List[int] = []
    for item in body.split(","):
        m = _ENTRY.match(item)
        if not m:
            raise InvalidSignature(f"bad entry {item!r} in {text!r}")
        mult = int(m.group(2)) if m.group(2) else 1
        if mult < 1:
            raise InvalidSignature(f"bad multiplicity in {item!r}")
        orders.extend([int(m.group(1))] * mult)
    return Signature(tuple(orders))


def v(n: int) -> PiValue:
    if n < -1:
        raise DomainError(f"v({n}) undefined")
    ratio = Fraction(double_factorial(n), double_factorial(n + 1))
    if n % 2:
        return PiValue.monomial(ratio, n + 1)
    return PiValue.monomial(2 * ratio, n)


def volume(sig: Signature) -> PiValue:
    """Volume of the stratum with labeled singularities."""
    out = PiValue.monomial(2, 2)
    for d in sig.orders:
        out = out * v(d)
    return out


def volume_unlabeled(sig: Signature) -> PiValue:
    """Volume when equal-order singularities are not distinguished."""
    denom = 1
    for m in Counter(sig.orders).values():
        denom *= math.factorial(m)
    return volume(sig) / denom


def dimension(sig: Signature) -> int:
    return len(sig.orders) - 2


def is_pillowcase(sig: Signature) -> bool:
    return sorted(sig.orders) == [-1, -1, -1, -1]


def add_marked_point(sig: Signature) -> Signature:
    return Signature(sig.orders + (0,))


@dataclass(frozen=True)
class DisconnectedSignature:
    part_a: Signature
    part_b: Signature

    def __str__(self) -> str:
        return f"{self.part_a}+{self.part_b}"


def disconnected_volume(d: DisconnectedSignature) -> PiValue:
    da, db = dimension(d.part_a), dimension(d.part_b)
    coeff = Fraction(math.factorial(da - 1) * math.factorial(db - 1), 2 * math.factorial(da + db - 1))
    return volume(d.part_a) * volume(d.part_b) * coeff


def enumerate_signatures(max_k: int, allow_marked: bool = False) -> List[Signature]:
    """All multisets of orders summing to -4 with at most max_k entries.

    Ordered lexicographically on the descending-sorted order tuples.
    """
    if max_k < 4:
        raise DomainError("max_k must be at least 4")
    return [Signature(t) for t in _enumerate(max_k, allow_marked)]


@lru_cache(maxsize=None)
def _enumerate(max_k: int, allow_marked: bool) -> Tuple[Tuple[int, ...], ...]:
    found = []
    # the positive orders sum to (number of poles) - 4
    for poles in range(4, max_k + 1):
        room = max_k - poles
        for zeros in _positive_partitions(poles - 4, room):
            marks = range(room - len(zeros) + 1) if allow_marked else (0,)
            for m in marks:
                found.append(zeros + (0,) * m + (-1,) * poles)
    return tuple(sorted(found))


def _positive_partitions(total: int, max_len: int) -> List[Tuple[int, ...]]:
    """Descending tuples of positive parts summing to total, length <= max_len."""
    out: List[Tuple[int, ...]] = []

    def rec(remaining: int, cap: int, prefix: Tuple[int, ...]):
        if remaining == 0:
            out.append(prefix)
            return
        if len(prefix) == max_len:
            return
        for part in range(min(cap, remaining), 0, -1):
            rec(remaining - part, part, prefix + (part,))

    rec(total, total, ())
    return out
