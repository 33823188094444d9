"""Command-line front end.

Exit codes: 0 ok, 1 semantic or validation failure, 2 parse error,
3 resource exhaustion (fuel or recursion depth).
"""

from __future__ import annotations

import argparse
import random
import sys
from typing import Optional, Sequence

from .difftest import (
    MAX_LEN,
    MAX_NODES,
    DiffReport,
    Runner,
    UnsupportedTarget,
    compile_machine,
    difftest,
    difftest_machine,
    semantics,
    words,
)
from .eal_compile import NotCopyless, NotValidBrtt
from .formats import FormatError, parse_input, parse_machine, parse_tree_literal, parse_word, show_tree, show_word
from .programs import Program, ProgramFormatError, check_program, dump_program, parse_program
from .reduction import DEFAULT_FUEL, FuelExhausted
from .stlc_compile import TypeMismatch
from .string_transducers import random_hdt0l, random_register_transducer
from .terms import TermSyntaxError

OK, FAILED, PARSE_ERROR, EXHAUSTED = 0, 1, 2, 3

# random machines used by `difftest --random`; fixed so runs are reproducible
RANDOM_BOUNDS = {"alphabet": ("a", "b"), "max_states": 3, "max_registers": 2, "work_size": 3}


class _Exit(Exception):
    def __init__(self, code: int, msg: str):
        super().__init__(msg)
        self.code = code


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise _Exit(PARSE_ERROR, f"cannot read {path}: {e.strerror}") from None


def _machine(args):
    return parse_machine(_read(args.machine), complete_delta=args.complete_delta)


def _show(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return show_word(value) or "ε"
    return show_tree(value)


def _program_input(text: str, p: Program):
    if p.input.kind == "tree":
        return parse_tree_literal(text)
    return parse_word(text, p.input.alphabet)


def cmd_run(args) -> int:
    m = _machine(args)
    x = parse_input(args.input, m)
    print(_show(semantics(m)(x)))
    return OK


def cmd_compile(args) -> int:
    m = _machine(args)
    text = dump_program(compile_machine(m, args.target))
    # what we write must load and check again
    rep = check_program(parse_program(text))
    if not rep:
        raise _Exit(FAILED, f"emitted program does not check:\n{rep}")
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return OK


def cmd_check(args) -> int:
    rep = check_program(parse_program(_read(args.program)))
    print(rep)
    return OK if rep else FAILED


def cmd_eval(args) -> int:
    p = parse_program(_read(args.program))
    print(_show(Runner(p, args.fuel)(_program_input(args.input, p))))
    return OK


def _print_report(rep: DiffReport, label: str = "") -> None:
    head = f"{label}: " if label else ""
    if rep.ok:
        print(f"{head}ok, {rep.checked} inputs, {rep.steps} contractions, {rep.depth_violations} depth violations")
        return
    if rep.error:
        print(f"{head}FAIL after {rep.checked} inputs: {rep.error}")
    if rep.counterexample is not None:
        print(f"{head}counterexample: {_show(rep.counterexample)}")
        if rep.error is None:
            print(f"  expected: {_show(rep.expected)}")
            print(f"  got:      {_show(rep.got)}")


def _exit_for(rep: DiffReport) -> int:
    if rep.ok:
        return OK
    return EXHAUSTED if rep.error and rep.error.startswith("fuel") else FAILED


def cmd_difftest(args) -> int:
    if args.max_len > MAX_LEN or args.max_nodes > MAX_NODES:
        raise _Exit(FAILED, f"ranges are bounded by length {MAX_LEN} and {MAX_NODES} nodes")
    if args.random:
        return _difftest_random(args)
    if not args.machine:
        raise _Exit(PARSE_ERROR, "difftest needs a machine file or --random")
    rep = difftest_machine(_machine(args), args.target, args.max_len, args.max_nodes, args.fuel)
    _print_report(rep)
    return _exit_for(rep)


def _difftest_random(args) -> int:
    rng = random.Random(args.seed)
    sigma = RANDOM_BOUNDS["alphabet"]
    for i in range(args.count):
        if args.random == "hdt0l":
            m = random_hdt0l(rng, sigma, sigma, RANDOM_BOUNDS["work_size"])
        else:
            m = random_register_transducer(rng, sigma, sigma, RANDOM_BOUNDS["max_states"],
                                           RANDOM_BOUNDS["max_registers"], copyless=args.random == "sst",
                                           name=f"random{i}")
        rep = difftest(compile_machine(m, args.target), semantics(m), words(sigma, args.max_len), args.fuel)
        _print_report(rep, f"random {args.random} #{i}")
        if not rep.ok:
            return _exit_for(rep)
    return OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="churchtrans", description="Transducers as Church-encoded λ-terms.")
    sub = ap.add_subparsers(dest="command", required=True)

    def machine_cmd(name: str, help: str, optional: bool = False):
        p = sub.add_parser(name, help=help)
        p.add_argument("machine", nargs="?" if optional else None, help="machine file")
        p.add_argument("--complete-delta", action="store_true",
                       help="fill missing transitions with self-loops and identity updates")
        return p

    p = machine_cmd("run", "run a machine on one input")
    p.add_argument("input", help="word or tree literal")
    p.set_defaults(func=cmd_run)

    p = machine_cmd("compile", "compile a machine to a program file")
    p.add_argument("--target", choices=("stlc", "eal"), default="stlc")
    p.add_argument("-o", "--output", help="write here instead of standard output")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("check", help="re-check a program file")
    p.add_argument("program")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("eval", help="apply a program file to one input")
    p.add_argument("program")
    p.add_argument("input")
    p.add_argument("--fuel", type=int, default=DEFAULT_FUEL)
    p.set_defaults(func=cmd_eval)

    p = machine_cmd("difftest", "compare a compiled machine with its semantics", optional=True)
    p.add_argument("--target", choices=("stlc", "eal"), default="stlc")
    p.add_argument("--max-len", type=int, default=6)
    p.add_argument("--max-nodes", type=int, default=9)
    p.add_argument("--fuel", type=int, default=DEFAULT_FUEL)
    p.add_argument("--random", choices=("sst", "register-transducer", "hdt0l"),
                   help="test freshly generated machines instead of a file")
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_difftest)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 20_000))
    try:
        return args.func(args)
    except _Exit as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code
    except (FormatError, ProgramFormatError, TermSyntaxError) as e:
        print(f"parse error: {e}", file=sys.stderr)
        return PARSE_ERROR
    except (NotCopyless, NotValidBrtt) as e:
        print(f"not compilable:\n{e.report}", file=sys.stderr)
        return FAILED
    except (FuelExhausted, RecursionError) as e:
        print(f"resource exhausted: {e}", file=sys.stderr)
        return EXHAUSTED
    except (UnsupportedTarget, TypeMismatch, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return FAILED


if __name__ == "__main__":
    sys.exit(main())
