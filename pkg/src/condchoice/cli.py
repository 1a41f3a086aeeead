"""Command-line entry point: ``condchoice <subcommand> ...``.

Exit status: 0 success, 1 violation or counterexample, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .conditionals import parse_kb, serialize_kb, sorted_conditionals
from .engine import (
    ConViolation,
    ExhaustiveCapExceeded,
    RouteMismatch,
    derive,
    kb_universe,
    report_json,
    verify_correspondence,
)
from .formula import AtomSet, FormulaError
from .interpretation import MODES, characteristic_model, dump_model, model_from_json, satisfies
from .properties import PropertyUsageError, parse_properties
from .universe import (
    DEFAULT_CONSTRUCTORS,
    DEFAULT_DEPTH,
    MAX_UNIVERSE,
    OutsideUniverse,
    UniverseTooLarge,
    parse_constructors,
)

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _universe_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--atoms", help="comma-separated atom names (default: atoms of the KB)")
    p.add_argument("--depth", type=int, default=DEFAULT_DEPTH, help="constructor rounds (default %(default)s)")
    p.add_argument("--constructors", default=",".join(DEFAULT_CONSTRUCTORS),
                   help="subset of conjunction,disjunction,negation")
    p.add_argument("--max-universe", type=int, default=MAX_UNIVERSE)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="condchoice",
        description="Conditional reasoning with choice-function models.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("parse", help="echo a KB in canonical form", parents=[common])
    p.add_argument("kb")

    p = sub.add_parser("model", help="characteristic model of a KB as JSON", parents=[common])
    p.add_argument("kb")
    p.add_argument("--no-min", action="store_true",
                   help="keep every consequent (initial-model construction)")

    p = sub.add_parser("sat", help="check which KB conditionals a model satisfies", parents=[common])
    p.add_argument("kb")
    p.add_argument("--model", required=True, help="model JSON file")
    p.add_argument("--mode", choices=MODES, default="triangle")

    for name, help_ in (("close", "derive by closing the KB under rules"),
                        ("enforce", "derive by enforcing constraints on the KB model")):
        p = sub.add_parser(name, help=help_, parents=[common])
        p.add_argument("kb")
        p.add_argument("--rules", required=True, help="comma-separated property names")
        p.add_argument("--strict-con", action="store_true",
                       help="treat con violations as failures")
        _universe_flags(p)

    p = sub.add_parser("verify", help="check a rule/constraint correspondence", parents=[common])
    p.add_argument("--property", required=True, help="property name or 'all'")
    p.add_argument("--atoms", type=int, default=1)
    p.add_argument("--depth", type=int, default=0)
    p.add_argument("--constructors", default=",".join(DEFAULT_CONSTRUCTORS))
    p.add_argument("--exhaustive", action="store_true")
    p.add_argument("--cap", type=int, default=4, help="largest |universe|^2 for --exhaustive")
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    return parser


def _read_kb(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None
    try:
        return parse_kb(text)
    except FormulaError as e:
        raise UsageError(f"{path}: {e}") from None


def _atoms(override: str | None, collected: AtomSet) -> AtomSet:
    if not override:
        return collected
    atoms = AtomSet([a.strip() for a in override.split(",") if a.strip()])
    missing = [a for a in collected if a not in atoms]
    if missing:
        raise UsageError(f"KB mentions atoms not in --atoms: {', '.join(missing)}")
    return atoms


def _emit(out, text: str) -> None:
    out.write(text if text.endswith("\n") else text + "\n")


def cmd_parse(args, out) -> int:
    s, atoms = _read_kb(args.kb)
    if args.format == "json":
        _emit(out, json.dumps({"atoms": list(atoms), "conditionals": [str(c) for c in sorted_conditionals(s)]}, indent=2))
    else:
        out.write(serialize_kb(s))
    return EXIT_OK


def cmd_model(args, out) -> int:
    s, atoms = _read_kb(args.kb)
    out.write(dump_model(characteristic_model(s, atoms, use_min=not args.no_min), atoms))
    return EXIT_OK


def cmd_sat(args, out) -> int:
    s, atoms = _read_kb(args.kb)
    try:
        model, model_atoms = model_from_json(Path(args.model).read_text(encoding="utf-8"))
    except OSError as e:
        raise UsageError(f"cannot read {args.model}: {e.strerror}") from None
    except (ValueError, KeyError, TypeError) as e:
        raise UsageError(f"{args.model}: bad model file ({e})") from None
    atoms = _atoms(",".join(model_atoms), atoms) if len(model_atoms) else atoms
    rows = [(c, satisfies(model, c, atoms, args.mode)) for c in sorted_conditionals(s)]
    if args.format == "json":
        _emit(out, json.dumps({
            "mode": args.mode,
            "satisfied": [str(c) for c, ok in rows if ok],
            "unsatisfied": [str(c) for c, ok in rows if not ok],
        }, indent=2))
    else:
        for c, ok in rows:
            out.write(f"{'sat  ' if ok else 'UNSAT'} {c}\n")
    return EXIT_OK if all(ok for _, ok in rows) else EXIT_VIOLATION


def _derive(args, semantic: bool):
    s, atoms = _read_kb(args.kb)
    atoms = _atoms(args.atoms, atoms)
    props = parse_properties(args.rules)
    u = kb_universe(s, atoms, args.depth, parse_constructors(args.constructors), args.max_universe)
    return derive(s, props, universe=u, atoms=atoms, semantic=semantic,
                  cross_check=semantic, strict_con=args.strict_con)


def _print_derivation(res, out, fmt: str, with_model: bool) -> None:
    if fmt == "json":
        data = res.to_json()
        if not with_model:
            data.pop("model")
        _emit(out, json.dumps(data, indent=2))
        return
    out.write(serialize_kb(res.derived))
    for r in res.con_violations:
        out.write(f"# con violation: {r.describe()}\n")
    if with_model:
        out.write("# model\n")
        out.write(dump_model(res.interpretation, res.universe.atoms))


def cmd_close(args, out) -> int:
    try:
        res = _derive(args, semantic=False)
    except ConViolation as e:
        for r in e.reports:
            out.write(f"con violation: {r.describe()}\n")
        return EXIT_VIOLATION
    _print_derivation(res, out, args.format, with_model=False)
    return EXIT_OK


def cmd_enforce(args, out) -> int:
    try:
        res = _derive(args, semantic=True)
    except ConViolation as e:
        for r in e.reports:
            out.write(f"con violation: {r.describe()}\n")
        return EXIT_VIOLATION
    except RouteMismatch as e:
        out.write(f"{e}\n")
        return EXIT_VIOLATION
    _print_derivation(res, out, args.format, with_model=True)
    return EXIT_OK


def cmd_verify(args, out) -> int:
    props = parse_properties(args.property)
    if not props:
        raise UsageError("no property given")
    reports = []
    for p in props:
        reports.append(verify_correspondence(
            p, args.atoms, args.depth,
            mode="exhaustive" if args.exhaustive else "sampled",
            samples=args.samples, seed=args.seed,
            constructors=parse_constructors(args.constructors),
            exhaustive_cap=args.cap,
        ))
    if args.format == "json":
        out.write(report_json(reports))
    else:
        out.write("\n\n".join(r.table() for r in reports) + "\n")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_VIOLATION


COMMANDS = {
    "parse": cmd_parse, "model": cmd_model, "sat": cmd_sat,
    "close": cmd_close, "enforce": cmd_enforce, "verify": cmd_verify,
}


def run_cli(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    try:
        return COMMANDS[args.subcommand](args, out)
    except (UsageError, FormulaError, PropertyUsageError, UniverseTooLarge,
            OutsideUniverse, ExhaustiveCapExceeded) as e:
        err.write(f"condchoice: error: {e}\n")
        return EXIT_USAGE


def main() -> None:
    sys.exit(run_cli())


__all__ = ["run_cli", "main", "build_parser"]
