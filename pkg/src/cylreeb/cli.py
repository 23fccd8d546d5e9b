"""cylreeb command line.

Exit codes: 0 pass, 1 failed check or sweep, 2 invalid input, 3 precision exhausted.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import numeric
from .arrangement import ArrangementError, arrangement_from_json, arrangement_to_json
from .digraph import DigraphError, graph_from_json, graph_to_json, to_dot
from .numeric import PrecisionExhausted
from .sweep import reeb
from .synthesis import BOUNDED, COMPLEMENT_ONLY, InvalidInstance, SynthesisFailed, TheoremInstance, synthesize
from .validate import ra_region, verify_target, verify_theorem

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_PRECISION = 0, 1, 2, 3


class InputError(Exception):
    pass


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _write(path, text: str):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)


def _load(path):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from None


def _ints(text):
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise InputError(f"expected comma-separated integers, got {text!r}") from None


def _rats(text):
    try:
        return tuple(Fraction(x) for x in text.split(","))
    except (ValueError, ZeroDivisionError):
        raise InputError(f"expected comma-separated rationals, got {text!r}") from None


def _instance(args) -> TheoremInstance:
    if getattr(args, "instance", None):
        return TheoremInstance.from_json(_load(args.instance))
    if args.theorem is None or args.children is None or args.levels is None:
        raise InputError("give --instance or --theorem, --children and --levels")
    specs = [_ints(args.children)]
    if args.theorem == 2:
        if args.children2 is None:
            raise InputError("theorem 2 needs --children2")
        specs.append(_ints(args.children2))
    radius = None if args.radius in (None, "auto") else Fraction(args.radius)
    return TheoremInstance(args.theorem, tuple(specs), _rats(args.levels), radius, args.mode)


def _arrangement(path):
    return arrangement_from_json(_load(path))


# ---------------------------------------------------------------------------
# subcommands


def cmd_synth(args) -> int:
    inst = _instance(args)
    try:
        syn = synthesize(inst, verify=not args.no_verify)
    except SynthesisFailed as exc:
        _write(Path(args.out) / "report.json", dumps({"error": str(exc), "detail": exc.report}))
        print(f"synthesis failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    out = Path(args.out)
    _write(out / "instance.json", dumps(inst.to_json()))
    _write(out / "arrangement.json", dumps(arrangement_to_json(syn.arrangement)))
    _write(out / "report.json", dumps(syn.report))
    print(f"{len(syn.arrangement.constraints)} circles in R^{syn.arrangement.ambient_dim}, R = {syn.layout.radius}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    arr = _arrangement(args.arrangement)
    try:
        g = reeb(arr, allow_unbounded=args.allow_unbounded)
    except ArrangementError as exc:  # empty, disconnected, non-generic
        print(f"sweep failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    _write(args.out, dumps(g.to_json()))
    if args.dot:
        _write(args.dot, to_dot(g.graph, g.kinds))
    if args.trace:
        _write(args.trace, g.trace_csv())
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.target:
        target, _ = graph_from_json(_load(args.target))
        if not args.arrangement:
            raise InputError("--target needs --arrangement")
        rep = verify_target(_arrangement(args.arrangement), target)
    else:
        inst = _instance(args)
        if args.resynth:
            try:
                arr = synthesize(inst, verify=False).arrangement
            except SynthesisFailed as exc:
                print(f"synthesis failed: {exc}", file=sys.stderr)
                return EXIT_FAIL
        elif args.arrangement:
            arr = _arrangement(args.arrangement)
        else:
            raise InputError("give --arrangement or --resynth")
        rep = verify_theorem(inst, arr)
    _write(args.out, dumps(rep.to_json()))
    return _report_exit(rep)


def cmd_check(args) -> int:
    rep = ra_region(_arrangement(args.arrangement))
    _write(args.out, dumps(rep.to_json()))
    return _report_exit(rep)


def cmd_target(args) -> int:
    inst = _instance(args)
    g = inst.target()
    _write(args.out, dumps(graph_to_json(g)))
    if args.dot:
        _write(args.dot, to_dot(g))
    return EXIT_OK


def cmd_export_dot(args) -> int:
    g, kinds = graph_from_json(_load(args.graph))
    _write(args.out, to_dot(g, kinds if all(kinds.values()) else None))
    return EXIT_OK


def _report_exit(rep) -> int:
    if not rep.overall:
        print(f"FAIL {rep.first_failure()}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# ---------------------------------------------------------------------------


def _instance_flags(p):
    p.add_argument("--instance", help="instance.json (overrides the flags below)")
    p.add_argument("--theorem", type=int, choices=(1, 2))
    p.add_argument("--children", help="children per depth, e.g. 2,3")
    p.add_argument("--children2", help="second tree (theorem 2)")
    p.add_argument("--levels", help="increasing rationals, e.g. 0,1,5/2")
    p.add_argument("--radius", default="auto", help="p/q or auto")
    p.add_argument("--mode", default=BOUNDED, choices=(BOUNDED, COMPLEMENT_ONLY))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cylreeb", description="Reeb digraphs of circle-cylinder regions")
    ap.add_argument("--max-precision", type=int, help="certified precision cap in bits (default 4096)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="build an arrangement for a theorem instance")
    _instance_flags(p)
    p.add_argument("-o", "--out", default=".", help="output directory")
    p.add_argument("--no-verify", action="store_true", help="skip post-verification")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("sweep", help="compute the Reeb digraph of an arrangement")
    p.add_argument("arrangement")
    p.add_argument("-o", "--out", default="-")
    p.add_argument("--dot")
    p.add_argument("--trace", help="per-gap component table (CSV)")
    p.add_argument("--allow-unbounded", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="check an arrangement against its theorem target")
    _instance_flags(p)
    p.add_argument("--arrangement")
    p.add_argument("--resynth", action="store_true", help="synthesize the arrangement first")
    p.add_argument("--target", help="graph.json to compare with instead of an instance")
    p.add_argument("-o", "--out", default="-")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("target", help="emit the target digraph of an instance")
    _instance_flags(p)
    p.add_argument("-o", "--out", default="-")
    p.add_argument("--dot")
    p.set_defaults(func=cmd_target)

    p = sub.add_parser("check", help="region validity checks only")
    p.add_argument("arrangement")
    p.add_argument("-o", "--out", default="-")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("export-dot", help="graph.json to DOT")
    p.add_argument("graph")
    p.add_argument("-o", "--out", default="-")
    p.set_defaults(func=cmd_export_dot)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with numeric.precision_cap(args.max_precision or numeric.max_precision()):
            return args.func(args)
    except PrecisionExhausted as exc:
        print(f"precision exhausted: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except (InputError, InvalidInstance, DigraphError, ArrangementError, ValueError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
