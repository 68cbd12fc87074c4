"""``atlas`` command line tool: sample index fields and aspect maps to
CSV or PGM files (the output format follows the file extension)."""
from __future__ import annotations

import argparse
import math
import sys

from . import atlas
from . import fivebar as fb
from . import serial as sr
from .errors import MechhapError

_SERIAL_MODES = {p.value: p for p in sr.Posture}
_FIVEBAR_MODES = {w.value: w for w in fb.WorkingMode}


def _parse_bounds(text):
    parts = [float(v) for v in text.split(",")]
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("bounds must be XMIN,XMAX,YMIN,YMAX")
    return (parts[0], parts[1]), (parts[2], parts[3])


def _parse_grid(text):
    try:
        nx, ny = text.lower().split("x")
        return int(nx), int(ny)
    except ValueError as exc:
        raise argparse.ArgumentTypeError("grid must look like 400x400") from exc


def _parse_limits(text):
    # "lo:hi,lo:hi" with "-" for an unlimited joint, e.g. "-2.5:2.5,-"
    out = []
    for part in text.split(","):
        if part.strip() == "-":
            out.append(None)
        else:
            lo, hi = part.split(":")
            out.append((float(lo), float(hi)))
    if len(out) != 2:
        raise argparse.ArgumentTypeError("limits must give two joints")
    return tuple(out)


def _geometry(args):
    if args.mech == "serial":
        lengths = [float(v) for v in args.lengths.split(",")] if args.lengths else [1.0, 1.0]
        if len(lengths) != 2:
            raise SystemExit("serial geometry takes 2 lengths: L1,L2")
        return sr.SerialGeometry(*lengths, joint_limits=args.limits)
    lengths = (
        [float(v) for v in args.lengths.split(",")]
        if args.lengths
        else [2.0, 1.0, 1.0, math.sqrt(2.0), math.sqrt(2.0)]
    )
    if len(lengths) != 5:
        raise SystemExit("five-bar geometry takes 5 lengths: L0,L1,L2,L3,L4")
    return fb.FiveBarGeometry(*lengths)


def _field(args):
    geom = _geometry(args)
    kind = atlas.FieldKind(args.kind)
    if args.mech == "serial":
        if kind not in atlas.SERIAL_KINDS:
            raise SystemExit(f"kind {args.kind} is not a serial field")
        mode = _SERIAL_MODES[args.mode]
    else:
        if kind not in atlas.FIVEBAR_KINDS:
            raise SystemExit(f"kind {args.kind} is not a five-bar field")
        mode = _FIVEBAR_MODES[args.mode]
    bounds = args.bounds or atlas.default_bounds(geom)
    nx, ny = args.grid
    grid = atlas.GridSpec(bounds[0], bounds[1], nx, ny)
    return atlas.sample_index_field(geom, grid, kind, mode, margin=args.margin)


def _add_common(p):
    p.add_argument("--mech", required=True, choices=["serial", "fivebar"])
    p.add_argument(
        "--kind",
        required=True,
        choices=[k.value for k in atlas.FieldKind],
    )
    p.add_argument(
        "--mode",
        required=True,
        choices=sorted(_SERIAL_MODES) + sorted(_FIVEBAR_MODES),
    )
    p.add_argument("--grid", type=_parse_grid, default=(400, 400), metavar="NXxNY")
    p.add_argument(
        "--bounds",
        type=_parse_bounds,
        default=None,
        metavar="XMIN,XMAX,YMIN,YMAX",
        help="default: reachable set plus a 5%% border",
    )
    p.add_argument("--lengths", default=None, help="comma-separated link lengths")
    p.add_argument(
        "--limits",
        type=_parse_limits,
        default=None,
        help="serial joint limits 'lo:hi,lo:hi' ('-' = free joint)",
    )
    p.add_argument("--margin", type=float, default=atlas.DEFAULT_LIMIT_MARGIN)
    p.add_argument("--out", required=True, help="output file (.csv or .pgm)")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="atlas", description="Sample mechanism workspace index fields."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_sample = sub.add_parser("sample", help="write a normalized index field")
    _add_common(p_sample)
    p_aspects = sub.add_parser("aspects", help="write an aspect (region) map")
    _add_common(p_aspects)
    p_aspects.add_argument(
        "--threshold", type=float, default=atlas.DEFAULT_SINGULAR_THRESHOLD
    )
    args = parser.parse_args(argv)

    try:
        field = _field(args)
        if args.command == "sample":
            if args.out.endswith(".pgm"):
                atlas.write_field_pgm(field, args.out)
            else:
                atlas.write_field_csv(field, args.out)
        else:
            amap = atlas.compute_aspects(field, args.threshold)
            if args.out.endswith(".pgm"):
                atlas.write_aspects_pgm(amap, args.out)
            else:
                atlas.write_aspects_csv(amap, args.out)
            print(f"aspects: {amap.count}")
    except MechhapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
