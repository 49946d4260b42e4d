"""Command-line front end.

Exit statuses: 0 ok, 1 usage or parse error, 2 I/O error, 10 monitor reset,
20 verification violation (a property failed or a scenario missed its
expected verdict).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .corpus import AsmError, StepBudgetExceeded, assemble, matrix, run_program, run_scenario
from .corpus import scenarios as load_scenarios
from .hwmod import MUTATION_NAMES, ConfigError, Mutation, UccConfig, require_valid
from .isa import IsaError
from .ltl import LtlError, Trace, TraceError, builtin_specs, check, format_catalog, parse_formula
from .ltl import select_specs
from .verify import BudgetExceeded, exhaustive_check, random_check

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_RESET, EXIT_VIOLATION = 0, 1, 2, 10, 20

DEFAULT_CONFIG = {"uccs": [{"min": "0xC100", "max": "0xC1FE"}]}


class _Fail(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise _Fail(EXIT_IO, f"cannot read {path}: {exc.strerror}") from None


def _read_bytes(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise _Fail(EXIT_IO, f"cannot read {path}: {exc.strerror}") from None


def _write(path: str, data: str | bytes) -> None:
    try:
        p = Path(path)
        p.write_bytes(data) if isinstance(data, bytes) else p.write_text(data)
    except OSError as exc:
        raise _Fail(EXIT_IO, f"cannot write {path}: {exc.strerror}") from None


def _json(path: str):
    try:
        return json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise _Fail(EXIT_USAGE, f"{path}: bad JSON: {exc.msg} (line {exc.lineno})") from None


def _labels_for(args) -> dict[str, int]:
    path = args.labels
    if path is None and getattr(args, "image", None):
        guess = Path(args.image + ".labels.json")
        path = str(guess) if guess.exists() else None
    if path is None:
        return {}
    return {k: int(v, 16) if isinstance(v, str) else int(v) for k, v in _json(path).items()}


def _config(args) -> UccConfig:
    data = _json(args.config) if args.config else DEFAULT_CONFIG
    try:
        return require_valid(UccConfig.from_dict(data, _labels_for(args)))
    except ConfigError as exc:
        raise _Fail(EXIT_USAGE, f"config-invalid: {exc}") from None


def _schedule(path: str | None) -> list[tuple[int, int]]:
    if not path:
        return []
    data = _json(path)
    try:
        return [(int(step), int(irq)) for step, irq in data]
    except (TypeError, ValueError):
        raise _Fail(EXIT_USAGE, f"{path}: schedule must be a list of [step, irq] pairs") from None


def _seed(text: str) -> int:
    try:
        return int(text, 16)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be hexadecimal, got {text!r}") from None


# ------------------------------------------------------------------ commands

def cmd_asm(args) -> int:
    try:
        program = assemble(_read_text(args.source))
    except AsmError as exc:
        print(f"{args.source}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out = args.output or str(Path(args.source).with_suffix(".bin"))
    _write(out, program.image)
    labels = {k: f"0x{v:04X}" for k, v in sorted(program.labels.items(), key=lambda kv: kv[1])}
    _write(args.labels or out + ".labels.json", json.dumps(labels, indent=2) + "\n")
    print(f"{out}: {len(program.image)} bytes, entry 0x{program.entry:04X}")
    return EXIT_OK


def cmd_run(args) -> int:
    config = _config(args)
    image = _read_bytes(args.image)
    try:
        outcome = run_program(image, config, _schedule(args.schedule), max_steps=args.max_steps,
                              mode=args.mode)
    except StepBudgetExceeded as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except IsaError as exc:
        print(f"machine fault: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.trace:
        _write(args.trace, outcome.trace.to_jsonl())
    if outcome.resets:
        for i in outcome.resets:
            print(f"step {i}: {outcome.verdicts[i]}")
        return EXIT_RESET
    print(f"completed in {len(outcome.snapshots)} steps")
    return EXIT_OK


def cmd_check(args) -> int:
    try:
        trace = Trace.from_jsonl(_read_text(args.trace_file))
    except TraceError as exc:
        print(f"{args.trace_file}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    selected = []
    if not args.formula or args.specs:
        try:
            selected = [(f"spec {s.id}", s.formula)
                        for s in select_specs(builtin_specs(trace.n_ucc), args.specs)]
        except KeyError as exc:
            print(f"unknown-spec-id: {exc.args[0]}", file=sys.stderr)
            return EXIT_USAGE
    for i, text in enumerate(args.formula or []):
        try:
            selected.append((f"formula{i}", parse_formula(text, trace.n_ucc)))
        except LtlError as exc:
            print(f"formula {i}: {exc}", file=sys.stderr)
            return EXIT_USAGE
    failed = 0
    for name, formula in selected:
        result = check(formula, trace)
        failed += not result.holds
        print(f"{name}: {result}")
    return EXIT_VIOLATION if failed else EXIT_OK


def cmd_verify(args) -> int:
    config = _config(args)
    mutations = Mutation.NONE
    by_name = {v: k for k, v in MUTATION_NAMES.items()}
    for name in args.mutant or []:
        mutations |= by_name[name]
    try:
        if args.random:
            report = random_check(config, None, args.random, args.length, args.seed,
                                  mutations=mutations)
        else:
            report = exhaustive_check(config, None, args.depth, mutations=mutations,
                                      max_traces=args.max_traces)
    except BudgetExceeded as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    if args.report:
        _write(args.report, report.to_json() + "\n")
    print(report.summary())
    for w in report.violations:
        print(f"  spec {w.spec} violated at step {w.step}")
    return EXIT_OK if report.ok else EXIT_VIOLATION


def cmd_scenarios(args) -> int:
    chosen = load_scenarios(args.filter)
    if not chosen:
        print(f"no scenario matches {args.filter!r}", file=sys.stderr)
        return EXIT_USAGE
    results = [run_scenario(s, mode=args.mode) for s in chosen]
    for r in results:
        row = r.row()
        mark = "PASS" if row["pass"] else "FAIL"
        print(f"{mark}  {row['name']:<24} expected {row['expected']:<28} got {row['actual']}")
    if args.report:
        _write(args.report, matrix(results) + "\n")
    return EXIT_OK if all(r.row()["pass"] for r in results) else EXIT_VIOLATION


def cmd_specs(args) -> int:
    sys.stdout.write(format_catalog(builtin_specs(args.n_ucc)))
    return EXIT_OK


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ucca-sim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("asm", help="assemble a source file into a program image")
    p.add_argument("source")
    p.add_argument("-o", "--output", help="image path (default: SOURCE with .bin suffix)")
    p.add_argument("--labels", help="label map path (default: IMAGE.labels.json)")
    p.set_defaults(func=cmd_asm)

    p = sub.add_parser("run", help="run an image with the monitor attached")
    p.add_argument("image")
    p.add_argument("--config", help="UCC configuration JSON")
    p.add_argument("--labels", help="label map for symbolic UCC bounds")
    p.add_argument("--schedule", help="interrupt schedule JSON: [[step, irq], ...]")
    p.add_argument("--max-steps", type=int, default=10_000)
    p.add_argument("--trace", help="write the monitored trace (JSON lines) here")
    p.add_argument("--mode", choices=("single-shot", "continuous"), default="single-shot")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("check", help="check a recorded trace against properties")
    p.add_argument("trace_file", metavar="trace")
    p.add_argument("--specs", help="comma-separated built-in ids, e.g. '1,6,12.1' (default all)")
    p.add_argument("--formula", action="append", help="additional formula text (repeatable)")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("verify", help="bounded verification campaign over the monitor FSMs")
    p.add_argument("--config", help="UCC configuration JSON")
    p.add_argument("--labels", help="label map for symbolic UCC bounds")
    p.add_argument("--depth", type=int, default=3, help="exhaustive trace length")
    p.add_argument("--random", type=int, default=0, metavar="N",
                   help="check N random traces instead of enumerating")
    p.add_argument("--length", type=int, default=20, help="random trace length")
    p.add_argument("--seed", type=_seed, default=0, help="hex seed for --random")
    p.add_argument("--max-traces", type=int, default=50_000_000)
    p.add_argument("--mutant", action="append", choices=sorted(MUTATION_NAMES.values()),
                   help="inject a monitor fault (repeatable)")
    p.add_argument("--report", help="write the JSON report here")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("scenarios", help="run the shipped scenario matrix")
    p.add_argument("--filter", default="*", help="shell-style name pattern")
    p.add_argument("--mode", choices=("single-shot", "continuous"), default="single-shot")
    p.add_argument("--report", help="write the pass/fail matrix (JSON) here")
    p.set_defaults(func=cmd_scenarios)

    p = sub.add_parser("specs", help="print the built-in property catalog")
    p.add_argument("--n-ucc", type=int, default=1)
    p.set_defaults(func=cmd_specs)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except _Fail as exc:
        print(str(exc), file=sys.stderr)
        return exc.status


if __name__ == "__main__":
    sys.exit(main())
