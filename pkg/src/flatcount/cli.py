"""Command-line entry point.

Exit codes: 0 success, 1 a verification did not hold, 2 bad input,
3 a resource cap was hit.  Output is assembled completely before anything
is printed, so a failing run never leaves partial tables behind.
Corner ids on the command line and in billiard output are 1-based.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from fractions import Fraction
from typing import List, Optional, Sequence

from . import acceptance
from . import flat_sphere as fs
from . import identity_lab as il
from . import pillowcase as pc
from . import siegel_veech as sv
from .pi_arith import DomainError, PiValue, rational_str, to_decimal
from .strata import InvalidSignature, parse_signature, volume, volume_unlabeled

DIGITS = 20

EXIT_OK, EXIT_FAILED, EXIT_INPUT, EXIT_CAP = 0, 1, 2, 3


class InputError(ValueError):
    pass


class Failed(Exception):
    """A check ran to completion and did not hold; carries the report."""

    def __init__(self, payload):
        super().__init__("verification failed")
        self.payload = payload


def _ints(text: str) -> List[int]:
    try:
        return [int(x) for x in text.split(",") if x != ""]
    except ValueError:
        raise InputError(f"expected comma-separated integers, got {text!r}") from None


def _pi_json(x: PiValue) -> dict:
    return {"exact": str(x), "terms": x.to_json()["terms"], "decimal": to_decimal(x, DIGITS)}


# -- output ------------------------------------------------------------------------

class Table:
    def __init__(self, header: Sequence[str], rows: Sequence[Sequence]):
        self.header = list(header)
        self.rows = [list(r) for r in rows]

    def as_json(self):
        return [dict(zip(self.header, r)) for r in self.rows]


def render(payload, fmt: str) -> str:
    if fmt == "csv":
        if not isinstance(payload, Table):
            payload = Table(["key", "value"], [[k, json.dumps(v) if isinstance(v, (dict, list)) else v]
                                               for k, v in payload.items()])
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(payload.header)
        w.writerows(payload.rows)
        return buf.getvalue()
    if isinstance(payload, Table):
        payload = payload.as_json()
    return json.dumps(payload, indent=2) + "\n"


# -- commands ------------------------------------------------------------------------

def cmd_volume(args):
    sig = parse_signature(args.signature)
    vol = volume_unlabeled(sig) if args.unlabeled else volume(sig)
    out = {"signature": str(sig), "labeled": not args.unlabeled}
    out.update(_pi_json(vol))
    return out


def cmd_sv(args):
    sig = parse_signature(args.signature)
    rows = []
    for cfg in sv.all_configurations(sig):
        status = "not checked"
        if args.check:
            try:
                value = sv.constant(cfg, check=True)
                status = "closed form equals ratio form"
            except sv.DegenerateRatio as exc:
                value = sv.constant(cfg)
                status = f"ratio form skipped: {exc}"
        else:
            value = sv.constant(cfg)
        rows.append([cfg.kind.value, " ".join(map(str, cfg.indices)), " ".join(map(str, cfg.side_a)),
                     " ".join(map(str, cfg.side_b)), str(value), to_decimal(value, DIGITS), status])
    return Table(["kind", "indices", "side_a", "side_b", "constant", "decimal", "check"], rows)


def cmd_carea(args):
    sig = parse_signature(args.signature)
    rep = sv.verify_carea_identity(sig)
    out = {"signature": str(sig), "c_area": str(rep.lhs), "decimal": to_decimal(rep.lhs, DIGITS),
           "identity": "holds" if rep.holds else "fails", "lhs": str(rep.lhs), "rhs": str(rep.rhs),
           "pockets": rep.pockets, "dumbbells": rep.dumbbells}
    if rep.diagnostic:
        out["diagnostic"] = rep.diagnostic
    if not rep.holds:
        raise Failed(out)
    return out


def _report(rep):
    out = rep.to_json()
    if not rep.holds:
        raise Failed(out)
    return out


def cmd_identity(args):
    return _report(il.verify_apr2012(_ints(args.d)))


def cmd_mohanty(args):
    return _report(il.verify_mohanty(_ints(args.b), args.D, _ints(args.a)))


def cmd_f2g(args):
    return _report(il.verify_F2_equals_G(_ints(args.d), args.D))


def _polygon(path: str) -> fs.RectilinearPolygon:
    try:
        return fs.load_polygon(path)
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        raise InputError(f"cannot read polygon {path}: {exc}") from None


def _corner(poly, one_based: int) -> int:
    if not 1 <= one_based <= poly.n:
        raise InputError(f"corner {one_based} out of range 1..{poly.n}")
    return one_based - 1


def _enumerate_job(job):
    path, source, L_sq = job
    return fs.enumerate_diagonals(fs.load_polygon(path), source, L_sq)


def _enumerate_sources(path: str, sources: List[int], L_sq: Fraction, workers: int):
    jobs = [(path, s, L_sq) for s in sources]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_enumerate_job, jobs))
    return [_enumerate_job(j) for j in jobs]


def cmd_billiard_count(args):
    poly = _polygon(args.polygon)
    L_sq = Fraction(args.Lsq)
    if L_sq <= 0:
        raise InputError("--Lsq must be positive")
    if args.pair:
        i, j = _ints(args.pair)
        pairs = [(_corner(poly, i), _corner(poly, j))]
        sources = [pairs[0][0]]
    else:
        sources = list(range(poly.n))
        pairs = [(i, j) for i in sources for j in range(poly.n)]
    found = dict(zip(sources, _enumerate_sources(args.polygon, sources, L_sq, args.workers)))
    if args.list:
        rows = []
        for i, j in pairs:
            for c in found[i]:
                if c.target != j or (c.parallel_to_side and not args.include_axis):
                    continue
                rows.append([i + 1, j + 1, rational_str(c.holonomy[0]), rational_str(c.holonomy[1]),
                             rational_str(c.length_sq), fs.classify(c, poly).kind,
                             " ".join(str(e + 1) for e in c.chain)])
        return Table(["source", "target", "dx", "dy", "length_sq", "kind", "edges_crossed"], rows)
    rows = []
    for i, j in pairs:
        n = fs.counts_from_connections(found[i], poly.n, L_sq, args.include_axis)[j]
        rows.append([i + 1, j + 1, poly.corner_k[i], poly.corner_k[j], rational_str(L_sq), rational_str(n)])
    return Table(["source", "target", "source_k", "target_k", "L_sq", "count"], rows)


def cmd_billiard_bands(args):
    poly = _polygon(args.polygon)
    total, bands = fs.band_area_sum(poly, Fraction(args.Lsq))
    rows = []
    for b in bands:
        c = b.boundary[0]
        rows.append([c.source + 1, c.target + 1, rational_str(c.holonomy[0]), rational_str(c.holonomy[1]),
                     rational_str(b.circumference_sq), rational_str(b.width_sq), rational_str(b.area_weight),
                     " ".join(str(m + 1) for m in b.obstruction_corners), b.pole_pole_sides])
    rows.append(["total", "", "", "", "", "", rational_str(total), "", ""])
    return Table(["source", "target", "dx", "dy", "circumference_sq", "width_sq", "area_weight",
                  "far_side_corners", "corner_diagonal_sides"], rows)


def cmd_billiard_report(args):
    poly = _polygon(args.polygon)
    targets = []
    for t in args.target or ["area"]:
        if t == "area":
            targets.append(fs.Target("area"))
        else:
            i, j = _ints(t)
            targets.append(fs.Target("pair", _corner(poly, i), _corner(poly, j)))
    grid = fs.geometric_grid(Fraction(args.Lsq_max), args.steps)
    rows = []
    for r in fs.asymptotic_report(poly, grid, targets, args.include_axis):
        f = r.csv_fields(12)
        if r.target != "area":
            a, b = r.target.split("-")
            f[1] = f"{int(a) + 1}-{int(b) + 1}"
        rows.append(f)
    return Table(fs.CSV_HEADER, rows)


def _spec(args) -> pc.CoverSpec:
    spec, _ = pc.validate_spec(_ints(args.eta), _ints(args.nu), args.d)
    return spec


def cmd_pillowcase_count(args):
    spec = _spec(args)
    cap = args.cap
    connected = pc.count_covers_backtracking(spec, True, False, cap)
    connected_w = pc.count_covers_backtracking(spec, True, True, cap)
    weighted = pc.count_covers_backtracking(spec, False, True, cap)
    character = pc.count_covers_character(spec, cap)
    out = {"eta": list(spec.eta), "nu": list(spec.nu), "d": spec.d,
           "stratum": str(spec.stratum()),
           "connected": rational_str(connected), "connected_weighted": rational_str(connected_w),
           "weighted": rational_str(weighted), "character": rational_str(character),
           "oracle_match": weighted == character}
    if weighted != character:
        raise Failed(out)
    return out


def cmd_pillowcase_trend(args):
    if args.signature:
        sig = parse_signature(args.signature)
        rep = pc.volume_trend(sig, args.N, args.cap)
        rows = [[r.N, rational_str(r.sq_weighted), rational_str(r.sq_orbits),
                 to_decimal(PiValue.rational(r.ratio_weighted), 12), to_decimal(PiValue.rational(r.ratio_orbits), 12),
                 to_decimal(rep.target_labeled, 12), to_decimal(rep.target_unlabeled, 12)] for r in rep.rows]
        return Table(["N", "sq_weighted", "sq_orbits", "ratio_weighted", "ratio_orbits",
                      "volume_labeled", "volume_unlabeled"], rows)
    if args.eta is None or args.nu is None:
        raise InputError("trend needs --signature or both --eta and --nu")
    target, rows = pc.cover_trend(_ints(args.eta), _ints(args.nu), args.N, args.cap)
    out = [[r.N, rational_str(r.connected_weighted), rational_str(r.connected_orbits),
            to_decimal(PiValue.rational(r.ratio_weighted), 12), to_decimal(PiValue.rational(r.ratio_orbits), 12),
            to_decimal(target, 12)] for r in rows]
    return Table(["N", "connected_weighted", "connected_orbits", "ratio_weighted", "ratio_orbits", "target"], out)


def cmd_verify_all(args):
    numbers = _ints(args.only) if args.only else list(acceptance.CRITERIA)
    for n in numbers:
        if n not in acceptance.CRITERIA:
            raise InputError(f"no criterion {n}")
    results = []
    for n in numbers:
        if n == 9:
            res = acceptance.criterion_9(args.seed)
            lines = acceptance.property_lines(args.seed, args.workers)
            res.detail += "\n" + "\n".join(lines)
        elif n in (5, 6):
            res = acceptance.CRITERIA[n](args.seed)
        else:
            res = acceptance.CRITERIA[n]()
        results.append(res)
    table = Table(["criterion", "status", "title", "detail"],
                  [[r.number, "PASS" if r.passed else "FAIL", r.title, r.detail] for r in results])
    if args.format == "csv":
        payload = table
    else:
        payload = "".join(r.line() + "\n" for r in results)
    if not all(r.passed for r in results):
        raise Failed(payload)
    return payload


# -- parser ----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument("--workers", type=int, default=1, help="process pool size; results are merged in input order")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized sweeps")
    common.add_argument("--timestamp", action="store_true", help="prefix output with a generation time line")

    p = argparse.ArgumentParser(prog="flatcount", description="Exact counting on genus-zero flat surfaces.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("volume", parents=[common], help="volume of a stratum")
    s.add_argument("signature")
    s.add_argument("--unlabeled", action="store_true")
    s.set_defaults(func=cmd_volume)

    s = sub.add_parser("sv", parents=[common], help="Siegel-Veech constants of every configuration")
    s.add_argument("signature")
    s.add_argument("--no-check", dest="check", action="store_false")
    s.set_defaults(func=cmd_sv)

    s = sub.add_parser("carea", parents=[common], help="area constant and its cylinder identity")
    s.add_argument("signature")
    s.set_defaults(func=cmd_carea)

    s = sub.add_parser("identity", parents=[common], help="subset-sum binomial identity")
    s.add_argument("--d", required=True, help="degree vector, e.g. 1,2")
    s.set_defaults(func=cmd_identity)

    s = sub.add_parser("mohanty", parents=[common], help="series coefficients of powers of z")
    s.add_argument("--b", required=True)
    s.add_argument("--a", default="1,2,3,4", help="powers of z to check")
    s.add_argument("--D", type=int, default=6, help="total degree")
    s.set_defaults(func=cmd_mohanty)

    s = sub.add_parser("f2g", parents=[common], help="F^2 = G as truncated series")
    s.add_argument("--d", required=True)
    s.add_argument("--D", type=int, default=5)
    s.set_defaults(func=cmd_f2g)

    b = sub.add_parser("billiard", help="right-angled billiard tables")
    bsub = b.add_subparsers(dest="billiard_command", required=True)
    s = bsub.add_parser("count", parents=[common], help="generalized diagonals per corner pair")
    s.add_argument("--polygon", required=True)
    s.add_argument("--Lsq", required=True)
    s.add_argument("--pair", help="source,target corner ids")
    s.add_argument("--include-axis", action="store_true")
    s.add_argument("--list", action="store_true", help="one row per diagonal")
    s.set_defaults(func=cmd_billiard_count, format_default="csv")
    s = bsub.add_parser("bands", parents=[common], help="bands of closed trajectories")
    s.add_argument("--polygon", required=True)
    s.add_argument("--Lsq", required=True, help="bound on circumference squared")
    s.set_defaults(func=cmd_billiard_bands, format_default="csv")
    s = bsub.add_parser("report", parents=[common], help="counts on a geometric grid with predictions")
    s.add_argument("--polygon", required=True)
    s.add_argument("--Lsq-max", dest="Lsq_max", required=True)
    s.add_argument("--steps", type=int, default=6)
    s.add_argument("--target", action="append", help="'i,j' or 'area'; repeatable")
    s.add_argument("--include-axis", action="store_true")
    s.set_defaults(func=cmd_billiard_report, format_default="csv")

    pcp = sub.add_parser("pillowcase", help="pillowcase covers")
    psub = pcp.add_subparsers(dest="pillowcase_command", required=True)
    s = psub.add_parser("count", parents=[common], help="covers of one ramification type")
    s.add_argument("--eta", default="")
    s.add_argument("--nu", required=True)
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--cap", type=int, default=pc.DEFAULT_DEGREE_CAP)
    s.set_defaults(func=cmd_pillowcase_count)
    s = psub.add_parser("trend", parents=[common], help="partial sums against the volume")
    s.add_argument("--signature")
    s.add_argument("--eta")
    s.add_argument("--nu")
    s.add_argument("--N", type=int, default=6)
    s.add_argument("--cap", type=int, default=pc.DEFAULT_DEGREE_CAP)
    s.set_defaults(func=cmd_pillowcase_trend, format_default="csv")

    s = sub.add_parser("verify-all", parents=[common], help="run the acceptance suite")
    s.add_argument("--only", help="comma-separated criterion numbers")
    s.set_defaults(func=cmd_verify_all)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    raw = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(raw)
    if "--format" not in raw and getattr(args, "format_default", None):
        args.format = args.format_default
    if args.workers < 1:
        print("--workers must be >= 1", file=sys.stderr)
        return EXIT_INPUT
    code = EXIT_OK
    try:
        payload = args.func(args)
    except Failed as exc:
        payload, code = exc.payload, EXIT_FAILED
    except (InvalidSignature, DomainError, fs.PolygonError, pc.SpecError, sv.ConfigurationError,
            InputError, ValueError) as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_INPUT
    except (fs.ResourceCapError, pc.ResourceCapError) as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CAP
    text = payload if isinstance(payload, str) else render(payload, args.format)
    if args.timestamp:
        text = f"# generated {datetime.now(timezone.utc).isoformat(timespec='seconds')}\n" + text
    sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
