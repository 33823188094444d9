"""Differential testing of compiled programs against direct semantics.

Inputs are enumerated in size order (then lexicographically), so the first
mismatch found is a smallest counterexample.  Every normalization runs
under a :class:`~churchtrans.reduction.DepthWatch`, which records whether
some contraction substituted a variable sitting at the wrong depth.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Iterator, Optional, Sequence, Union

from . import church_stlc, eal_core, reduction
from .eal_compile import EalProgram, compile_brtt, compile_sst, compose_eal_programs
from .formats import TreeMachine
from .reduction import DEFAULT_FUEL, DepthWatch
from .stlc_compile import (
    DFA,
    TypedProgram,
    compile_dfa,
    compile_hdt0l,
    compile_pipeline,
    compile_register_transducer,
    compile_rtt,
)
from .string_transducers import (
    HDT0LSystem,
    RegisterTransducer,
    run_hdt0l,
    run_pipeline,
    run_register_transducer,
)
from .terms import APP, BANG, from_nameless, to_nameless
from .tree_transducers import BinTree, run_rtt, trees_up_to_nodes

Machine = Union[RegisterTransducer, HDT0LSystem, list, TreeMachine, DFA]
Program = Union[TypedProgram, EalProgram]

MAX_LEN = 8
MAX_NODES = 15


class UnsupportedTarget(ValueError):
    """No construction compiles this kind of machine to the requested calculus."""


@dataclass
class DiffReport:
    ok: bool
    checked: int = 0
    counterexample: Any = None
    expected: Any = None
    got: Any = None
    steps: int = 0
    depth_violations: int = 0
    error: Optional[str] = None


def words(alphabet: Sequence[str], max_len: int) -> Iterator[tuple[str, ...]]:
    for n in range(max_len + 1):
        yield from itertools.product(alphabet, repeat=n)


def input_alphabet(m: Machine) -> tuple[str, ...]:
    if isinstance(m, TreeMachine):
        return m.rtt.input_alphabet
    if isinstance(m, list):
        return m[0].input_alphabet
    if isinstance(m, DFA):
        return m.alphabet
    return m.input_alphabet


def semantics(m: Machine) -> Callable:
    if isinstance(m, RegisterTransducer):
        return lambda w: run_register_transducer(m, w)
    if isinstance(m, HDT0LSystem):
        return lambda w: run_hdt0l(m, w)
    if isinstance(m, list):
        return lambda w: run_pipeline(m, w)
    if isinstance(m, TreeMachine):
        return lambda t: run_rtt(m.rtt, t)
    return m.accepts


def compile_machine(m: Machine, target: str) -> Program:
    """Raises ``NotCopyless``, ``NotValidBrtt`` or :class:`UnsupportedTarget`."""
    if target == "stlc":
        if isinstance(m, RegisterTransducer):
            return compile_register_transducer(m)
        if isinstance(m, HDT0LSystem):
            return compile_hdt0l(m)
        if isinstance(m, list):
            return compile_pipeline(m)
        if isinstance(m, TreeMachine):
            return compile_rtt(m.rtt)
        return compile_dfa(m)
    if target != "eal":
        raise UnsupportedTarget(f"unknown target {target!r}")
    if isinstance(m, RegisterTransducer):
        return compile_sst(m)
    if isinstance(m, list):
        prog = compile_sst(m[0])
        for nxt in m[1:]:
            prog = compose_eal_programs(prog, compile_sst(nxt))
        return prog
    if isinstance(m, TreeMachine):
        return compile_brtt(m.rtt, m.conflict)
    kind = "HDT0L systems" if isinstance(m, HDT0LSystem) else "automata"
    raise UnsupportedTarget(f"no elementary affine construction for {kind}")


class Runner:
    """Applies a program to encoded inputs; the program is converted once."""

    def __init__(self, prog: Program, fuel: int = DEFAULT_FUEL, watch: Optional[DepthWatch] = None):
        self.prog = prog
        self.fuel = fuel
        self.watch = watch
        self.term = to_nameless(prog.term)
        self.steps = 0

    def encode(self, x) -> tuple:
        p = self.prog
        if isinstance(p, EalProgram):
            n = to_nameless(p.encode(x))
            return (BANG, n) if p.promoted else n
        if p.input.kind == "tree":
            return to_nameless(church_stlc.encode_tree(x, p.input.alphabet))
        return to_nameless(church_stlc.encode_string(x, p.input.alphabet))

    def __call__(self, x):
        nf, used = reduction.normalize_normal_order((APP, self.term, self.encode(x)), self.fuel, self.watch)
        self.steps += used
        return self.decode(from_nameless(nf))

    def decode(self, t):
        p, fuel = self.prog, self.fuel
        if isinstance(p, EalProgram):
            return p.decode(t, fuel)
        if p.output.kind == "bool":
            return church_stlc.decode_bool(t, fuel)
        if p.output.kind == "tree":
            return church_stlc.decode_tree(t, p.output.alphabet, fuel)
        return church_stlc.decode_string(t, p.output.alphabet, fuel)


def difftest(prog: Program, oracle: Callable, inputs: Iterable, fuel: int = DEFAULT_FUEL) -> DiffReport:
    watch = DepthWatch()
    run = Runner(prog, fuel, watch)
    rep = DiffReport(ok=True)
    for x in inputs:
        try:
            got = run(x)
        except reduction.FuelExhausted as e:
            rep.ok, rep.counterexample, rep.error = False, x, f"fuel exhausted: {e}"
            break
        want = oracle(x)
        if isinstance(want, list):
            want = tuple(want)
        rep.checked += 1
        if got != want:
            rep.ok, rep.counterexample, rep.expected, rep.got = False, x, want, got
            break
    rep.steps = watch.steps
    rep.depth_violations = watch.violations
    if rep.ok and watch.violations:
        rep.ok = False
        rep.error = f"{watch.violations} contractions broke depth preservation"
    return rep


def machine_inputs(m: Machine, max_len: int = 6, max_nodes: int = 9) -> Iterator:
    if isinstance(m, TreeMachine):
        if max_nodes > MAX_NODES:
            raise ValueError(f"at most {MAX_NODES} nodes")
        return iter(trees_up_to_nodes(m.rtt.input_alphabet, max_nodes))
    if max_len > MAX_LEN:
        raise ValueError(f"words of length at most {MAX_LEN}")
    return words(input_alphabet(m), max_len)


def difftest_machine(m: Machine, target: str, max_len: int = 6, max_nodes: int = 9,
                     fuel: int = DEFAULT_FUEL) -> DiffReport:
    return difftest(compile_machine(m, target), semantics(m), machine_inputs(m, max_len, max_nodes), fuel)
