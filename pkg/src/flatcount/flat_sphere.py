"""Right-angled billiard tables and their generalized diagonals.

Trajectories are straightened by unfolding: each reflection in a side is
replaced by a reflected copy of the table.  For a rectilinear table every
copy is the image of the table under (x, y) -> (+-x + a, +-y + b), so with
the table rescaled to integer coordinates all geometry stays integral.

The search keeps, per unfolded copy, the open cone of directions (seen from
the source corner) whose rays reach that copy.  Corner images inside the
cone split it, rays that meet a corner stop there, and the rest of the cone
is handed to the neighbouring copies across the sides it exits through.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cmp_to_key
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .pi_arith import PiValue, rational_str, to_decimal
from .strata import Signature

Vec = Tuple[int, int]

DEFAULT_MAX_NODES = 10_000_000


class PolygonError(ValueError):
    pass


class ResourceCapError(RuntimeError):
    pass


class IncompleteBandError(RuntimeError):
    pass


def max_nodes_from_env() -> int:
    raw = os.environ.get("FLATCOUNT_MAX_NODES")
    return int(raw) if raw else DEFAULT_MAX_NODES


def _cross(a: Vec, b: Vec) -> int:
    return a[0] * b[1] - a[1] * b[0]


def _dot(a: Vec, b: Vec) -> int:
    return a[0] * b[0] + a[1] * b[1]


def _rot(a: Vec) -> Vec:
    return (-a[1], a[0])


def _sign(x) -> int:
    return (x > 0) - (x < 0)


def _unit(a: Vec) -> Vec:
    return (_sign(a[0]), _sign(a[1]))


def _same_dir(a: Vec, b: Vec) -> bool:
    return _cross(a, b) == 0 and _dot(a, b) > 0


def _parse_q(x) -> Fraction:
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise PolygonError(f"coordinate {x!r} is not an exact rational")


# -- polygons ------------------------------------------------------------------

@dataclass
class RectilinearPolygon:
    """Validated table.  Coordinates are stored scaled to integers."""

    vertices: List[Fraction]            # original rational vertices (pairs)
    slits: List[Tuple[Tuple[Fraction, Fraction], Tuple[Fraction, Fraction]]]
    scale: int
    points: List[Vec]                   # boundary cycle, counterclockwise, scaled
    corner_k: List[int]                 # interior angle of corner m is k * pi/2
    area: Fraction

    @property
    def n(self) -> int:
        return len(self.points)

    def family(self) -> Tuple[int, ...]:
        return tuple(self.corner_k)

    def corner_position(self, m: int) -> Tuple[Fraction, Fraction]:
        x, y = self.points[m]
        return (Fraction(x, self.scale), Fraction(y, self.scale))

    def edge_dir(self, m: int) -> Vec:
        a, b = self.points[m], self.points[(m + 1) % self.n]
        return _unit((b[0] - a[0], b[1] - a[1]))

    def wedge_contains(self, m: int, w: Vec) -> bool:
        """Is direction w (table frame) strictly inside the corner's angle?"""
        out_dir = self.edge_dir(m)
        a = out_dir
        for j in range(self.corner_k[m]):
            b = _rot(a)
            if _cross(a, w) > 0 and _cross(w, b) > 0:
                return True
            if j > 0 and _same_dir(a, w):
                return True
            a = b
        return False

    def to_json(self) -> dict:
        return {
            "vertices": [[_qstr(x), _qstr(y)] for x, y in self.vertices],
            "slits": [[[_qstr(p[0]), _qstr(p[1])], [_qstr(q[0]), _qstr(q[1])]] for p, q in self.slits],
        }


def _qstr(q: Fraction) -> str:
    return rational_str(q)


def _segments_cross(p1: Vec, p2: Vec, q1: Vec, q2: Vec) -> bool:
    """Closed axis-parallel segments share a point."""
    if p1[0] == p2[0] and q1[0] == q2[0]:
        if p1[0] != q1[0]:
            return False
        lo1, hi1 = sorted((p1[1], p2[1]))
        lo2, hi2 = sorted((q1[1], q2[1]))
        return max(lo1, lo2) <= min(hi1, hi2)
    if p1[1] == p2[1] and q1[1] == q2[1]:
        if p1[1] != q1[1]:
            return False
        lo1, hi1 = sorted((p1[0], p2[0]))
        lo2, hi2 = sorted((q1[0], q2[0]))
        return max(lo1, lo2) <= min(hi1, hi2)
    if p1[0] == p2[0]:
        p1, p2, q1, q2 = q1, q2, p1, p2
    # p horizontal, q vertical
    x = q1[0]
    y = p1[1]
    return min(p1[0], p2[0]) <= x <= max(p1[0], p2[0]) and min(q1[1], q2[1]) <= y <= max(q1[1], q2[1])


def validate(vertices: Sequence[Sequence], slits: Sequence[Sequence[Sequence]] = ()) -> RectilinearPolygon:
    """Check a rectilinear table and derive its corner angles and area."""
    verts = [(_parse_q(x), _parse_q(y)) for x, y in vertices]
    walls = [((_parse_q(p[0]), _parse_q(p[1])), (_parse_q(q[0]), _parse_q(q[1]))) for p, q in slits]
    if len(verts) < 4:
        raise PolygonError("need at least four vertices")
    denoms = [c.denominator for v in verts for c in v] + [c.denominator for w in walls for p in w for c in p]
    scale = 1
    for d in denoms:
        scale = scale * d // math.gcd(scale, d)
    pts = [(int(x * scale), int(y * scale)) for x, y in verts]

    # drop repeated points and straight-through vertices
    cleaned: List[Vec] = []
    for p in pts:
        if cleaned and cleaned[-1] == p:
            continue
        cleaned.append(p)
    if cleaned[0] == cleaned[-1]:
        cleaned.pop()
    changed = True
    while changed and len(cleaned) >= 3:
        changed = False
        for i in range(len(cleaned)):
            a, b, c = cleaned[i - 1], cleaned[i], cleaned[(i + 1) % len(cleaned)]
            u, w = (b[0] - a[0], b[1] - a[1]), (c[0] - b[0], c[1] - b[1])
            if u[0] and u[1] or w[0] and w[1]:
                raise PolygonError(f"edge at {b} is not axis-parallel")
            if _cross(u, w) == 0:
                if _dot(u, w) < 0:
                    raise PolygonError(f"boundary doubles back at {b}; use slits for walls")
                cleaned.pop(i)
                changed = True
                break
    if len(cleaned) < 4:
        raise PolygonError("degenerate polygon")
    area2 = sum(_cross(cleaned[i], cleaned[(i + 1) % len(cleaned)]) for i in range(len(cleaned)))
    if area2 == 0:
        raise PolygonError("zero area")
    if area2 < 0:
        cleaned.reverse()
        area2 = -area2
    n = len(cleaned)
    edges = [(cleaned[i], cleaned[(i + 1) % n]) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            if _segments_cross(*edges[i], *edges[j]):
                raise PolygonError("boundary self-intersects")

    cycle = list(cleaned)
    for wall in walls:
        cycle = _insert_wall(cycle, (tuple(int(c * scale) for c in wall[0]), tuple(int(c * scale) for c in wall[1])))

    ks = []
    m = len(cycle)
    for i in range(m):
        a, b, c = cycle[i - 1], cycle[i], cycle[(i + 1) % m]
        u = _unit((b[0] - a[0], b[1] - a[1]))
        w = _unit((c[0] - b[0], c[1] - b[1]))
        cr = _cross(u, w)
        if cr > 0:
            ks.append(1)
        elif cr < 0:
            ks.append(3)
        elif _dot(u, w) < 0:
            ks.append(4)
        else:
            raise PolygonError(f"straight vertex at {b}")
    if sum(2 - k for k in ks) != 4:
        raise PolygonError(f"corner angles {ks} violate sum(2 - k) = 4; is a slit detached from the boundary?")
    return RectilinearPolygon(verts, walls, scale, cycle, ks, Fraction(area2, 2 * scale * scale))


def _insert_wall(cycle: List[Vec], wall: Tuple[Vec, Vec]) -> List[Vec]:
    """Splice an axis-parallel wall attached to one boundary edge into the cycle."""
    p, q = wall
    if p == q or (p[0] != q[0] and p[1] != q[1]):
        raise PolygonError("slit must be a nondegenerate axis-parallel segment")
    n = len(cycle)
    for base, tip in ((p, q), (q, p)):
        for i in range(n):
            a, b = cycle[i], cycle[(i + 1) % n]
            on_edge = _segments_cross(a, b, base, base) and base != a and base != b
            if not on_edge:
                continue
            along = _unit((b[0] - a[0], b[1] - a[1]))
            inward = _rot(along)
            if _unit((tip[0] - base[0], tip[1] - base[1])) != inward:
                raise PolygonError("slit must point into the table, perpendicular to its edge")
            return cycle[: i + 1] + [base, tip, base] + cycle[i + 1:]
    raise PolygonError("slit must have exactly one endpoint in the interior of a boundary edge")


def load_polygon(path: str) -> RectilinearPolygon:
    with open(path) as fh:
        data = json.load(fh)
    return validate(data["vertices"], data.get("slits", []))


def double(poly: RectilinearPolygon) -> Signature:
    return Signature(tuple(k - 2 for k in poly.corner_k))


# -- unfolding -------------------------------------------------------------------

@dataclass(frozen=True)
class Isometry:
    """(x, y) -> (sx * x + ax, sy * y + ay)."""

    sx: int
    sy: int
    ax: int
    ay: int

    def __call__(self, p: Vec) -> Vec:
        return (self.sx * p[0] + self.ax, self.sy * p[1] + self.ay)

    def linear(self, v: Vec) -> Vec:
        return (self.sx * v[0], self.sy * v[1])

    def reflected_in(self, a: Vec, b: Vec) -> "Isometry":
        """self composed with the reflection in the line through table edge ab."""
        if a[0] == b[0]:
            c = a[0]
            return Isometry(-self.sx, self.sy, 2 * c * self.sx + self.ax, self.ay)
        c = a[1]
        return Isometry(self.sx, -self.sy, self.ax, 2 * c * self.sy + self.ay)


@dataclass(frozen=True)
class SaddleConnection:
    source: int
    target: int
    holonomy: Tuple[Fraction, Fraction]
    length_sq: Fraction
    chain: Tuple[int, ...]
    parallel_to_side: bool

    def sort_key(self):
        return (self.length_sq, self.holonomy[0], self.holonomy[1], self.target, self.chain)

    def to_json(self) -> dict:
        return {
            "source": self.source,
            "target": self.target,
            "holonomy": [_qstr(self.holonomy[0]), _qstr(self.holonomy[1])],
            "length_sq": _qstr(self.length_sq),
            "chain": list(self.chain),
            "parallel_to_side": self.parallel_to_side,
        }


def _tcmp(a: Tuple[int, int], b: Tuple[int, int]) -> int:
    return _sign(a[0] * b[1] - b[0] * a[1])


def _line_param(r: Vec, a: Vec, b: Vec) -> Optional[Tuple[int, int]]:
    """Parameter t where t*r meets the line of axis-parallel edge ab."""
    if a[0] == b[0]:
        if r[0] == 0:
            return None
        num, den = a[0], r[0]
    else:
        if r[1] == 0:
            return None
        num, den = a[1], r[1]
    if den < 0:
        num, den = -num, -den
    return (num, den)


@dataclass
class _Hit:
    kind: str          # "vertex" or "edge"
    index: int
    t: Tuple[int, int]


class Unfolder:
    """Depth-first unfolding from one source corner.

    Copies are carried as plain tuples (sx, sy, ax, ay) on the work stack;
    the Isometry class is the public face of the same map.
    """

    def __init__(self, poly: RectilinearPolygon, source: int, L_sq: Fraction, max_nodes: Optional[int] = None):
        if not 0 <= source < poly.n:
            raise PolygonError(f"no corner {source}")
        self.poly = poly
        self.source = source
        self.bound = Fraction(L_sq) * poly.scale * poly.scale
        self.max_nodes = max_nodes if max_nodes is not None else max_nodes_from_env()
        ox, oy = poly.points[source]
        self.base = [(x - ox, y - oy) for x, y in poly.points]
        n = poly.n
        # table-frame description of each edge: vertical?, line coordinate,
        # endpoint coordinates along the edge, direction along the edge
        self.shape = []
        for e in range(n):
            a, b = self.base[e], self.base[(e + 1) % n]
            if a[0] == b[0]:
                self.shape.append((True, a[0], a[1], b[1]))
            else:
                self.shape.append((False, a[1], a[0], b[0]))
        self.bound_n, self.bound_d = self.bound.numerator, self.bound.denominator
        self.nodes = 0
        self.raw: List[tuple] = []
        self._cache: Dict[tuple, tuple] = {}

    def _geometry(self, g):
        hit = self._cache.get(g)
        if hit is None:
            if len(self._cache) > 200_000:
                self._cache.clear()
            hit = self._cache[g] = (self._points(g), self._edge_table(g))
        return hit

    def _points(self, g) -> List[Vec]:
        sx, sy, ax, ay = g
        return [(sx * x + ax, sy * y + ay) for x, y in self.base]

    def _edge_table(self, g):
        """Per edge: (index, vertical, line coordinate, lo, hi, exit sign).

        A ray r leaves the copy through a vertical edge only if sign * r.x > 0
        and through a horizontal edge only if sign * r.y > 0.
        """
        sx, sy, ax, ay = g
        orient = sx * sy
        out = []
        for e, (vert, c, u, w) in enumerate(self.shape):
            if vert:
                u, w = sy * u + ay, sy * w + ay
                lo, hi = (u, w) if u < w else (w, u)
                out.append((e, True, sx * c + ax, lo, hi, orient * (w - u)))
            else:
                u, w = sx * u + ax, sx * w + ax
                lo, hi = (u, w) if u < w else (w, u)
                out.append((e, False, sy * c + ay, lo, hi, -orient * (w - u)))
        return out

    @staticmethod
    def _entry_t(r: Vec, table, entry: Optional[int]) -> Tuple[int, int]:
        if entry is None:
            return (0, 1)
        _, vert, c, _, _, _ = table[entry]
        den = r[0] if vert else r[1]
        if den == 0:
            raise AssertionError("ray parallel to its entry edge")
        return (c, den) if den > 0 else (-c, -den)

    def _first_event(self, r: Vec, pts, table, g, entry: Optional[int], vertices: bool = True) -> _Hit:
        rx, ry = r
        t0n, t0d = self._entry_t(r, table, entry)
        best_n = best_d = None
        best_e = -1
        for e, vert, c, lo, hi, sgn in table:
            if vert:
                if sgn * rx <= 0:
                    continue
                num, den, along = c, rx, ry
            else:
                if sgn * ry <= 0:
                    continue
                num, den, along = c, ry, rx
            if den < 0:
                num, den = -num, -den
            if num * t0d <= t0n * den:
                continue
            # crossing strictly inside the segment
            pos = num * along
            if not (lo * den < pos < hi * den):
                continue
            if best_n is None or num * best_d < best_n * den:
                best_n, best_d, best_e = num, den, e
        if vertices:
            vertex_hits: List[int] = []
            vt = None
            for m, p in enumerate(pts):
                if rx * p[1] != ry * p[0] or rx * p[0] + ry * p[1] <= 0:
                    continue
                t = (p[0], rx) if rx else (p[1], ry)
                if t[1] < 0:
                    t = (-t[0], -t[1])
                if t[0] * t0d <= t0n * t[1]:
                    continue
                if vt is None or t[0] * vt[1] < vt[0] * t[1]:
                    vt, vertex_hits = t, [m]
                elif t[0] * vt[1] == vt[0] * t[1]:
                    vertex_hits.append(m)
            if vt is not None and (best_n is None or vt[0] * best_d < best_n * vt[1]):
                back = (-rx * g[0], -ry * g[1])
                owners = [m for m in vertex_hits if self.poly.wedge_contains(m, back)]
                if len(owners) != 1:
                    raise AssertionError(f"ambiguous corner hit at {pts[vertex_hits[0]]}")
                return _Hit("vertex", owners[0], vt)
        if best_n is None:
            raise AssertionError("ray escaped the polygon")
        return _Hit("edge", best_e, (best_n, best_d))

    def _reflect(self, g, e: int):
        sx, sy, ax, ay = g
        vert, c, _, _ = self.shape[e]
        if vert:
            return (-sx, sy, 2 * c * sx + ax, ay)
        return (sx, -sy, ax, 2 * c * sy + ay)

    def _record(self, m: int, p: Vec, chain: Tuple[int, ...]):
        d2 = p[0] * p[0] + p[1] * p[1]
        if d2 * self.bound_d > self.bound_n:
            return
        self.raw.append((d2, p[0], p[1], m, chain))

    def _finish(self) -> List[SaddleConnection]:
        # integer keys sort in the same order as SaddleConnection.sort_key
        self.raw.sort()
        s = self.poly.scale
        s2 = s * s
        out = []
        for d2, x, y, m, chain in self.raw:
            out.append(SaddleConnection(self.source, m, (Fraction(x, s), Fraction(y, s)),
                                        Fraction(d2, s2), chain, x == 0 or y == 0))
        return out

    def _tick(self):
        self.nodes += 1
        if self.nodes > self.max_nodes:
            raise ResourceCapError(
                f"unfolding exceeded {self.max_nodes} nodes; raise FLATCOUNT_MAX_NODES or lower the bound")

    def run(self) -> List[SaddleConnection]:
        poly = self.poly
        s = self.source
        ident = (1, 1, 0, 0)
        stack = []
        a = poly.edge_dir(s)
        for j in range(poly.corner_k[s]):
            b = _rot(a)
            stack.append((ident, None, a, b, False, ()))
            if j > 0:
                stack.append((ident, None, a, a, True, ()))
            a = b
        while stack:
            g, entry, lo, hi, is_ray, chain = stack.pop()
            self._tick()
            if is_ray:
                self._ray_step(g, entry, lo, chain, stack)
            else:
                self._cone_step(g, entry, lo, hi, chain, stack)
        return self._finish()

    def _ray_step(self, g, entry, r, chain, stack):
        pts, table = self._geometry(g)
        hit = self._first_event(r, pts, table, g, entry)
        if hit.kind == "vertex":
            self._record(hit.index, pts[hit.index], chain)
            return
        t = hit.t
        # crossing point distance, compared as (t^2 |r|^2) <= bound
        if t[0] * t[0] * _dot(r, r) * self.bound_d > self.bound_n * t[1] * t[1]:
            return
        stack.append((self._reflect(g, hit.index), hit.index, r, r, True, chain + (hit.index,)))

    def _cone_step(self, g, entry, lo, hi, chain, stack):
        pts, table = self._geometry(g)
        lx, ly = lo
        hx, hy = hi
        breaks: List[Vec] = []
        for p in pts:
            if lx * p[1] - ly * p[0] > 0 and p[0] * hy - p[1] * hx > 0:
                breaks.append(p)
        if len(breaks) > 1:
            breaks.sort(key=cmp_to_key(lambda u, v: -_sign(_cross(u, v))))
            uniq = [breaks[0]]
            for p in breaks[1:]:
                if not _same_dir(uniq[-1], p):
                    uniq.append(p)
            breaks = uniq
        # walk the cone: open pieces separated by break directions
        bounds = [lo] + breaks + [hi]
        last = len(bounds) - 2
        items = []
        for idx in range(last + 1):
            u, w = bounds[idx], bounds[idx + 1]
            # scale the two sides to equal L1 length so the sum lies strictly between
            nu_ = abs(u[0]) + abs(u[1])
            nw = abs(w[0]) + abs(w[1])
            rep = (u[0] * nw + w[0] * nu_, u[1] * nw + w[1] * nu_)
            # no corner direction lies strictly inside a piece
            hit = self._first_event(rep, pts, table, g, entry, vertices=False)
            items.append(("edge", hit.index, u, w))
            if idx < last:
                bp = bounds[idx + 1]
                bhit = self._first_event(bp, pts, table, g, entry)
                if bhit.kind == "vertex":
                    self._record(bhit.index, pts[bhit.index], chain)
                    items.append(("stop", bhit.index, bp, bp))
                else:
                    items.append(("edge", bhit.index, bp, bp))
        # merge runs that leave through the same side
        groups = []
        for label, idx, u, w in items:
            if label == "stop":
                groups.append(None)
            elif groups and groups[-1] is not None and groups[-1][0] == idx:
                groups[-1][2] = w
            else:
                groups.append([idx, u, w])
        bn, bd = self.bound_n, self.bound_d
        for grp in groups:
            if grp is None:
                continue
            e, u, w = grp
            _, vert, c, elo, ehi, _ = table[e]
            near = 0 if elo <= 0 <= ehi else (elo if elo > 0 else ehi)
            if (c * c + near * near) * bd > bn:
                continue
            stack.append((self._reflect(g, e), e, u, w, False, chain + (e,)))


def enumerate_diagonals(poly: RectilinearPolygon, source: int, L_sq, max_nodes: Optional[int] = None) -> List[SaddleConnection]:
    """Generalized diagonals from a corner with length^2 <= L_sq."""
    L_sq = Fraction(L_sq)
    if L_sq <= 0:
        raise PolygonError("L_sq must be positive")
    return Unfolder(poly, source, L_sq, max_nodes).run()


# -- counting ---------------------------------------------------------------------

def count_by_pair(poly: RectilinearPolygon, L_sq, include_axis_parallel: bool = False,
                  sources: Optional[Iterable[int]] = None, max_nodes: Optional[int] = None) -> Dict[Tuple[int, int], Fraction]:
    """N[i, j]: diagonals from i to j of length^2 <= L_sq; loops counted once per trajectory."""
    table: Dict[Tuple[int, int], Fraction] = {}
    for i in (range(poly.n) if sources is None else sources):
        for j in range(poly.n):
            table[(i, j)] = Fraction(0)
        for sc in enumerate_diagonals(poly, i, L_sq, max_nodes):
            if sc.parallel_to_side and not include_axis_parallel:
                continue
            table[(i, sc.target)] += Fraction(1, 2) if sc.target == i else 1
    return table


def counts_from_connections(conns: Sequence[SaddleConnection], n: int, L_sq, include_axis_parallel: bool = False) -> Dict[int, Fraction]:
    out = {j: Fraction(0) for j in range(n)}
    for sc in conns:
        if sc.length_sq > L_sq or (sc.parallel_to_side and not include_axis_parallel):
            continue
        out[sc.target] += Fraction(1, 2) if sc.target == sc.source else 1
    return out


# -- closed-form oracle for rectangles -----------------------------------------------

def rectangle_oracle(width, height, source: int, L_sq) -> List[Tuple[int, Fraction, Fraction]]:
    """Diagonals of the rectangle [0,w]x[0,h] from a corner, via lattice images.

    Corners are numbered counterclockwise from (0, 0).  Unfolded corner images
    sit at (m w, n h); the one at (m, n) is reached first along its ray iff
    gcd(m, n) = 1, and it is the corner with parities (m mod 2, n mod 2) away
    from the source.
    """
    w, h, L_sq = Fraction(width), Fraction(height), Fraction(L_sq)
    corners = [(0, 0), (1, 0), (1, 1), (0, 1)]
    cx, cy = corners[source]
    sx, sy = (1 if cx == 0 else -1), (1 if cy == 0 else -1)
    out = []
    m = 1
    while (m * w) ** 2 + h * h <= L_sq:
        n = 1
        while (m * w) ** 2 + (n * h) ** 2 <= L_sq:
            if math.gcd(m, n) == 1:
                tx = cx if m % 2 == 0 else 1 - cx
                ty = cy if n % 2 == 0 else 1 - cy
                out.append((corners.index((tx, ty)), sx * m * w, sy * n * h))
            n += 1
        m += 1
    return sorted(out, key=lambda t: (t[1] ** 2 + t[2] ** 2, t[1], t[2], t[0]))


def rectangle(width, height) -> RectilinearPolygon:
    w, h = Fraction(width), Fraction(height)
    return validate([(0, 0), (w, 0), (w, h), (0, h)])


# -- classification -------------------------------------------------------------------

@dataclass(frozen=True)
class _Angle:
    """quarter * pi/2 + phi * theta, theta the angle of |holonomy| to the x-axis."""

    quarter: int
    phi: int

    def __sub__(self, o: "_Angle") -> "_Angle":
        return _Angle(self.quarter - o.quarter, self.phi - o.phi)

    def __neg__(self) -> "_Angle":
        return _Angle(-self.quarter, -self.phi)

    def compare(self, quarters: int, tan_theta: Fraction) -> int:
        """Sign of (self - quarters * pi/2)."""
        # in units of pi/4 the value is 2*quarter + phi*x, x = 4 theta / pi in
        # (0, 2); with |phi| <= 2 the only possible root inside is x = 1, which
        # is exactly tan(theta) = 1, so one sample point settles the sign
        if tan_theta == 1:
            x = Fraction(1)
        else:
            x = Fraction(1, 2) if tan_theta < 1 else Fraction(3, 2)
        return _sign(2 * self.quarter + self.phi * x - 2 * quarters)


def _direction_angle(w: Vec) -> _Angle:
    """Angle of (+-hx, +-hy), both nonzero, from the positive x-axis."""
    if w[0] > 0 and w[1] > 0:
        return _Angle(0, 1)
    if w[0] < 0 < w[1]:
        return _Angle(2, -1)
    if w[0] < 0 and w[1] < 0:
        return _Angle(2, 1)
    return _Angle(4, -1)


def _axis_quarter(v: Vec) -> int:
    return {(1, 0): 0, (0, 1): 1, (-1, 0): 2, (0, -1): 3}[v]


@dataclass
class Classification:
    kind: str                      # I, II, III-short, III-long/IV, axis, other
    source_k: int
    target_k: int
    sectors: Optional[Tuple[str, str]] = None

    def to_json(self) -> dict:
        out = {"kind": self.kind, "source_k": self.source_k, "target_k": self.target_k}
        if self.sectors:
            out["sectors"] = list(self.sectors)
        return out


def _final_isometry(poly: RectilinearPolygon, source: int, chain: Sequence[int]) -> Isometry:
    ox, oy = poly.points[source]
    base = [(x - ox, y - oy) for x, y in poly.points]
    g = Isometry(1, 1, 0, 0)
    for e in chain:
        g = g.reflected_in(base[e], base[(e + 1) % poly.n])
    return g


def _fmt_angle(a: _Angle) -> str:
    parts = []
    if a.quarter:
        parts.append(f"{a.quarter}*pi/2")
    if a.phi:
        parts.append(f"{a.phi:+d}*theta")
    return "".join(parts) or "0"


def _loop_sectors(conn: SaddleConnection, poly: RectilinearPolygon) -> Tuple[_Angle, _Angle, Fraction]:
    """Angles on the two sides of a loop, measured on the doubled surface."""
    s = poly.scale
    h = (int(conn.holonomy[0] * s), int(conn.holonomy[1] * s))
    tan_theta = Fraction(abs(h[1]), abs(h[0]))
    k = poly.corner_k[conn.source]
    start = _axis_quarter(poly.edge_dir(conn.source))
    total = 2 * k  # cone angle k*pi in quarters

    def position(w: Vec, mirrored: bool) -> _Angle:
        a = _direction_angle(w)
        rel = _Angle(a.quarter - start, a.phi)
        while rel.quarter < 0 or (rel.quarter == 0 and rel.phi < 0):
            rel = _Angle(rel.quarter + 4, rel.phi)
        while rel.quarter > 4 or (rel.quarter == 4 and rel.phi > 0):
            rel = _Angle(rel.quarter - 4, rel.phi)
        # the back side of the double is the mirror image
        return _Angle(total - rel.quarter, -rel.phi) if mirrored else rel

    g = _final_isometry(poly, conn.source, conn.chain)
    arrive = g.linear(h)
    p_out = position(h, False)
    p_in = position((-arrive[0], -arrive[1]), len(conn.chain) % 2 == 1)
    one = p_in - p_out
    if one.compare(0, tan_theta) < 0:
        one = -one
    other = _Angle(total - one.quarter, -one.phi)
    return one, other, tan_theta


def classify(conn: SaddleConnection, poly: RectilinearPolygon) -> Classification:
    """Configuration role of a generalized diagonal on the doubled surface."""
    ks, kt = poly.corner_k[conn.source], poly.corner_k[conn.target]
    if conn.parallel_to_side:
        return Classification("axis", ks, kt)
    if conn.source != conn.target:
        return Classification("I" if max(ks, kt) >= 3 else "III-short", ks, kt)
    one, other, tan_theta = _loop_sectors(conn, poly)
    c1, c2 = one.compare(2, tan_theta), other.compare(2, tan_theta)
    sectors = (_fmt_angle(one), _fmt_angle(other))
    if c1 > 0 and c2 > 0:
        kind = "II"
    elif c1 == 0 or c2 == 0:
        kind = "III-long/IV"
    else:
        kind = "other"
    return Classification(kind, ks, kt, sectors)


# -- bands -----------------------------------------------------------------------------

@dataclass
class Band:
    kind: str
    boundary: List[SaddleConnection]
    circumference_sq: Fraction
    width_sq: Fraction
    area: Fraction                      # width * circumference, exact
    area_weight: Fraction               # width * trajectory length / area(table)
    obstruction_corners: Tuple[int, ...] = ()
    multi_corner_boundary: bool = False
    pole_pole_sides: int = 1            # 2 when the far side is also a corner-to-corner diagonal

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "boundary": [c.to_json() for c in self.boundary],
            "circumference_sq": _qstr(self.circumference_sq),
            "width_sq": _qstr(self.width_sq),
            "area": _qstr(self.area),
            "area_weight": _qstr(self.area_weight),
            "obstruction_corners": list(self.obstruction_corners),
            "multi_corner_boundary": self.multi_corner_boundary,
            "pole_pole_sides": self.pole_pole_sides,
        }


class _Dual:
    """a + b*eps with eps a positive infinitesimal; exact rationals."""

    __slots__ = ("a", "b")

    def __init__(self, a, b=0):
        self.a = Fraction(a)
        self.b = Fraction(b)

    def __lt__(self, o: "_Dual") -> bool:
        return (self.a, self.b) < (o.a, o.b)

    def __le__(self, o: "_Dual") -> bool:
        return (self.a, self.b) <= (o.a, o.b)


def trace_band(conn: SaddleConnection, poly: RectilinearPolygon, search_bound=None) -> Band:
    """Band of closed trajectories next to a diagonal joining two right-angle corners.

    When a single corner bounds the far side, the loop there (holonomy twice
    that of the diagonal) is looked up and attached as the second boundary.
    """
    band = _band_geometry(conn, poly)
    if len(band.obstruction_corners) == 1:
        m = band.obstruction_corners[0]
        bound = Fraction(search_bound) if search_bound is not None else 4 * conn.length_sq
        partner = None
        for sc in enumerate_diagonals(poly, m, bound):
            if sc.target == m and abs(sc.holonomy[0]) == 2 * abs(conn.holonomy[0]) \
                    and abs(sc.holonomy[1]) == 2 * abs(conn.holonomy[1]):
                partner = sc
                break
        if partner is None:
            raise IncompleteBandError(f"no loop of holonomy 2*{conn.holonomy} at corner {m} within bound {bound}")
        band.boundary.append(partner)
    return band


def _band_geometry(conn: SaddleConnection, poly: RectilinearPolygon) -> Band:
    if classify(conn, poly).kind != "III-short":
        raise ValueError("trace_band needs a diagonal joining two right-angle corners")
    s = poly.scale
    h = (int(conn.holonomy[0] * s), int(conn.holonomy[1] * s))
    hh = _dot(h, h)
    nvec = _rot(h)
    ox, oy = poly.points[conn.source]
    base = [(x - ox, y - oy) for x, y in poly.points]
    nb = len(base)
    tedges = [(base[i], base[(i + 1) % nb]) for i in range(nb)]

    # start beside the source corner, on the side of n: that copy is the
    # reflection of the table in the wall the holonomy turns towards
    wall = (conn.source - 1) % nb
    g = Isometry(1, 1, 0, 0).reflected_in(*tedges[wall])
    t_cur = _Dual(0)
    copies = []   # (isometry, entry edge, exit edge)
    entry = None
    steps = 0
    limit = max_nodes_from_env()
    while True:
        steps += 1
        if steps > limit:
            raise ResourceCapError("band trace exceeded the node cap")
        pts = [g(p) for p in base]
        orient = g.sx * g.sy
        best = None
        for e in range(nb):
            a, b = pts[e], pts[(e + 1) % nb]
            d = (b[0] - a[0], b[1] - a[1])
            if orient * _cross(d, h) >= 0:
                continue
            # line point: t*h + eps*n
            if a[0] == b[0]:
                if h[0] == 0:
                    continue
                t = _Dual(Fraction(a[0], h[0]), Fraction(-nvec[0], h[0]))
                coord = _Dual(t.a * h[1], t.b * h[1] + nvec[1])
                lo, hi = sorted((a[1], b[1]))
            else:
                if h[1] == 0:
                    continue
                t = _Dual(Fraction(a[1], h[1]), Fraction(-nvec[1], h[1]))
                coord = _Dual(t.a * h[0], t.b * h[0] + nvec[0])
                lo, hi = sorted((a[0], b[0]))
            if not (t_cur < t):
                continue
            if not (_Dual(lo) < coord and coord < _Dual(hi)):
                continue
            if best is None or t < best[0]:
                best = (t, e)
        if best is None:
            raise AssertionError("band trace left the table")
        t_exit, e_exit = best
        copies.append((g, entry, e_exit))
        if _Dual(2) < t_exit:
            break
        g = g.reflected_in(*tedges[e_exit])
        entry = e_exit
        t_cur = t_exit
    first, last = copies[0][0], copies[-1][0]
    if (first.sx, first.sy) != (last.sx, last.sy) or (last.ax - first.ax, last.ay - first.ay) != (2 * h[0], 2 * h[1]):
        raise IncompleteBandError("trajectory beside the diagonal does not close after twice its length")

    best_s = None
    corners: List[int] = []
    for g, e_in, e_out in copies[1:]:
        pts = [g(p) for p in base]
        for m, v in enumerate(pts):
            s_v = Fraction(_cross(h, v), hh)
            if s_v <= 0:
                continue
            t_v = Fraction(_dot(v, h), hh)
            t_in = _param_on_line(pts, e_in, h, nvec, s_v)
            t_out = _param_on_line(pts, e_out, h, nvec, s_v)
            if not (t_in <= t_v <= t_out):
                continue
            if best_s is None or s_v < best_s:
                best_s, corners = s_v, [m]
            elif s_v == best_s and m not in corners:
                corners.append(m)
    if best_s is None:
        raise IncompleteBandError("no corner bounds the band")
    unscale = Fraction(1, s * s)
    length_sq = Fraction(hh) * unscale
    band = Band(
        kind="III",
        boundary=[conn],
        circumference_sq=4 * length_sq,
        width_sq=best_s * best_s * length_sq,
        area=2 * best_s * length_sq,
        area_weight=2 * best_s * length_sq / poly.area,
        obstruction_corners=tuple(sorted(corners)),
        multi_corner_boundary=len(corners) > 1,
        pole_pole_sides=2 if len(corners) == 2 and all(poly.corner_k[m] == 1 for m in corners) else 1,
    )
    return band


def _param_on_line(pts, e: int, h: Vec, nvec: Vec, s: Fraction) -> Fraction:
    a, b = pts[e], pts[(e + 1) % len(pts)]
    if a[0] == b[0]:
        return (a[0] - s * nvec[0]) / Fraction(h[0])
    return (a[1] - s * nvec[1]) / Fraction(h[1])


# -- reports ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Target:
    """What to count: diagonals between two corners, or bands weighted by area."""

    kind: str            # "pair" or "area"
    i: int = -1
    j: int = -1

    @property
    def label(self) -> str:
        return "area" if self.kind == "area" else f"{self.i}-{self.j}"


def parse_target(text: str) -> Target:
    if text == "area":
        return Target("area")
    try:
        i, j = (int(x) for x in text.split(","))
    except ValueError:
        raise PolygonError(f"target {text!r} is neither 'area' nor 'i,j'") from None
    return Target("pair", i, j)


def predicted_coefficient(poly: RectilinearPolygon, target: Target):
    """Predicted coefficient of L^2/Area, as an exact value in pi."""
    from .siegel_veech import billiard_constant

    fam = poly.family()
    if target.kind == "area":
        return billiard_constant(fam, "area")
    if target.i == target.j:
        raise PolygonError("no prediction for loops at a single corner")
    if fam[target.i] == 1 and fam[target.j] == 1:
        return billiard_constant(fam, "pocket")
    return billiard_constant(fam, "pair", target.i, target.j)


@dataclass
class ReportRow:
    L_sq: Fraction
    target: str
    count: Fraction
    count_over_L_sq: Fraction
    predicted_over_L_sq: object    # PiValue / area, or None

    def csv_fields(self, digits: int = 12) -> List[str]:
        pred = "" if self.predicted_over_L_sq is None else to_decimal(self.predicted_over_L_sq, digits)
        return [_qstr(self.L_sq), self.target, _qstr(self.count),
                to_decimal_fraction(self.count_over_L_sq, digits), pred]


CSV_HEADER = ["L_sq", "target", "count", "count_over_L_sq", "predicted_over_L_sq"]


def to_decimal_fraction(q: Fraction, digits: int) -> str:
    return to_decimal(PiValue.rational(q), digits)


def geometric_grid(L_sq_max, steps: int, ratio: int = 2) -> List[Fraction]:
    top = Fraction(L_sq_max)
    return sorted(top / ratio ** i for i in range(steps))


def asymptotic_report(poly: RectilinearPolygon, grid: Sequence, targets: Sequence[Target],
                      include_axis_parallel: bool = False, max_nodes: Optional[int] = None) -> List[ReportRow]:
    """Counts at each bound of the grid next to their predicted growth.

    One enumeration per source corner at the largest bound; smaller bounds
    are read off by filtering.  No convergence is asserted here.
    """
    grid = sorted(Fraction(x) for x in grid)
    top = grid[-1]
    by_source: Dict[int, List[SaddleConnection]] = {}
    bands: Optional[List[Band]] = None
    for t in targets:
        if t.kind == "pair" and t.i not in by_source:
            by_source[t.i] = enumerate_diagonals(poly, t.i, top, max_nodes)
        elif t.kind == "area" and bands is None:
            _, bands = band_area_sum(poly, top, max_nodes)
    rows = []
    for L_sq in grid:
        for t in targets:
            if t.kind == "area":
                c = sum((b.area_weight / b.pole_pole_sides for b in bands if b.circumference_sq <= L_sq), Fraction(0))
            else:
                c = counts_from_connections(by_source[t.i], poly.n, L_sq, include_axis_parallel)[t.j]
            try:
                pred = predicted_coefficient(poly, t) / poly.area
            except (PolygonError, ValueError):
                pred = None
            rows.append(ReportRow(L_sq, t.label, c, c / L_sq, pred))
    return rows


# -- independent oracle for tables made of unit squares ---------------------------------

def _unit_cells(poly: RectilinearPolygon) -> set:
    pts = poly.points
    xs, ys = [p[0] for p in pts], [p[1] for p in pts]
    cells = set()
    for cx in range(min(xs), max(xs)):
        for cy in range(min(ys), max(ys)):
            # crossing parity of a horizontal ray from the cell centre
            px2, py2 = 2 * cx + 1, 2 * cy + 1
            inside = False
            for i in range(len(pts)):
                (x1, y1), (x2, y2) = pts[i], pts[(i + 1) % len(pts)]
                if x1 == x2 and (2 * y1 > py2) != (2 * y2 > py2) and px2 < 2 * x1:
                    inside = not inside
            if inside:
                cells.add((cx, cy))
    return cells


def cell_walk_oracle(poly: RectilinearPolygon, source: int, L_sq) -> List[Tuple[int, int, int]]:
    """Non-axis diagonals from a right-angle corner of an integer table without slits.

    Independent of the unfolding: for each primitive slope the billiard path is
    followed cell by cell, reflecting at walls, and stops at the first lattice
    point where one or three of the four surrounding cells belong to the table.
    """
    if poly.scale != 1 or poly.slits:
        raise PolygonError("cell walk needs integer vertices and no slits")
    if poly.corner_k[source] != 1:
        raise PolygonError("cell walk starts from a right-angle corner")
    L_sq = Fraction(L_sq)
    cells = _unit_cells(poly)
    corner_at = {p: m for m, p in enumerate(poly.points)}
    sx0, sy0 = poly.points[source]
    (qx, qy), = [(dx, dy) for dx in (1, -1) for dy in (1, -1)
                 if (sx0 + (dx - 1) // 2, sy0 + (dy - 1) // 2) in cells]
    out = []
    top = math.isqrt(int(L_sq)) + 1
    for a in range(1, top + 1):
        for b in range(1, top + 1):
            if a * a + b * b > L_sq or math.gcd(a, b) != 1:
                continue
            cuts = sorted({Fraction(i, a) for i in range(1, a)} | {Fraction(j, b) for j in range(1, b)})
            x, y, sx, sy = sx0, sy0, qx, qy
            n = 0
            while True:
                n += 1
                if n * n * (a * a + b * b) > L_sq:
                    break
                px, py, t0 = Fraction(x), Fraction(y), Fraction(0)
                for t in cuts:
                    px += sx * a * (t - t0)
                    py += sy * b * (t - t0)
                    t0 = t
                    if px.denominator == 1 and (int(px) - (sx < 0), math.floor(py)) not in cells:
                        sx = -sx
                    if py.denominator == 1 and (math.floor(px), int(py) - (sy < 0)) not in cells:
                        sy = -sy
                x, y = int(px + sx * a * (1 - t0)), int(py + sy * b * (1 - t0))
                around = sum((x + i, y + j) in cells for i in (0, -1) for j in (0, -1))
                if around in (1, 3):
                    out.append((corner_at[(x, y)], n * qx * a, n * qy * b))
                    break
                if (x - (sx < 0), y - (sy < 0)) not in cells:
                    # flat wall through a lattice point: bounce off it
                    if (x - (sx > 0), y - (sy < 0)) in cells:
                        sx = -sx
                    else:
                        sy = -sy
    return sorted(out)


def band_area_sum(poly: RectilinearPolygon, L_sq, max_nodes: Optional[int] = None) -> Tuple[Fraction, List[Band]]:
    """Sum of area weights of bands with circumference^2 <= L_sq.

    Bands are found through the corner-to-corner diagonal on their boundary;
    a band with such a diagonal on both sides is split evenly between them.
    """
    L_sq = Fraction(L_sq)
    right = [m for m in range(poly.n) if poly.corner_k[m] == 1]
    total = Fraction(0)
    bands = []
    for i in right:
        for sc in enumerate_diagonals(poly, i, L_sq / 4, max_nodes):
            if sc.parallel_to_side or sc.target == i or poly.corner_k[sc.target] != 1:
                continue
            if sc.target < i:
                continue  # each diagonal once, from its lower-numbered end
            band = _band_geometry(sc, poly)
            bands.append(band)
            total += band.area_weight / band.pole_pole_sides
    return total, bands
