"""Compilers from machines to simply typed terms.

Every compiler returns a :class:`TypedProgram` whose binders all carry type
annotations, so :meth:`TypedProgram.check` never has to guess a type.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .church_stlc import (
    BOOL,
    FALSE,
    TRUE,
    bool_type,
    bt_type,
    encode_string,
    encode_tree,
    hbt_type,
    letter_names,
    str_type,
)
from .stlc_core import O, Arrow, SimpleType, arrows, check_type, power, show_type, type_substitute
from .string_transducers import HDT0LSystem, Morphism, RegisterTransducer, register_transducer_to_hdt0l
from .terms import Abs, App, Term, Var, apps
from .tree_transducers import (
    LEFT,
    RIGHT,
    RTT,
    ELeaf,
    ENode,
    EPlug,
    EVar,
    HBox,
    HNodeL,
    HNodeR,
    HPlug,
    HVar,
    Hole,
    Leaf,
    NodeL,
    OneHoleTree,
    UnboundVariable,
    is_hole_expr,
)


class TypeMismatch(TypeError):
    pass


@dataclass(frozen=True)
class Codec:
    """How to encode inputs or decode outputs: ``kind`` is string, tree or bool."""

    kind: str
    alphabet: tuple[str, ...] = ()

    def __str__(self) -> str:
        if self.kind == "bool":
            return "bool"
        return f"{self.kind} {' '.join(self.alphabet)}".rstrip()


@dataclass(frozen=True)
class TypedProgram:
    term: Term
    type: SimpleType
    input: Codec
    output: Codec

    def check(self) -> bool:
        return check_type({}, self.term, self.type)


def abs_(binders: Sequence[tuple[str, SimpleType]], body: Term) -> Term:
    for name, ty in reversed(list(binders)):
        body = Abs(name, body, ty)
    return body


def retype(t: Term, b: SimpleType, memo: Optional[dict] = None) -> Term:
    """Substitute ``o := b`` in every binder annotation."""
    memo = {} if memo is None else memo
    if isinstance(t, Var):
        return t
    if isinstance(t, App):
        return App(retype(t.fun, b, memo), retype(t.arg, b, memo))
    ann = type_substitute(t.annotation, b, memo) if t.annotation is not None else None
    return Abs(t.binder, retype(t.body, b, memo), ann)


ENDO = arrows(O, O)


# ---------------------------------------------------------------------------
# Strings


def _relative_word(w: Sequence[str], sigma: Sequence[str], fs: Sequence[str]) -> Term:
    """``\\x. f_{i1} (... (f_{in} x))``."""
    body: Term = Var("x")
    for c in reversed(w):
        body = App(Var(fs[sigma.index(c)]), body)
    return Abs("x", body, O)


def compile_morphism(phi: Morphism) -> TypedProgram:
    gamma, sigma = phi.source, phi.target
    fs = letter_names(len(sigma))
    images = [_relative_word(phi.images[c], sigma, fs) for c in gamma]
    body = apps(Var("s"), *images)
    term = Abs("s", abs_([(f, ENDO) for f in fs], body), str_type(len(gamma)))
    return TypedProgram(term, arrows(str_type(len(gamma)), str_type(len(sigma))),
                        Codec("string", gamma), Codec("string", sigma))


def compile_hdt0l(sys: HDT0LSystem) -> TypedProgram:
    work = str_type(len(sys.work_alphabet))
    zin = str_type(len(sys.input_alphabet), work)
    steps = [compile_morphism(sys.rules[c]).term for c in sys.input_alphabet]
    d = encode_string(sys.init, sys.work_alphabet, annotate=True)
    final = compile_morphism(sys.final).term
    term = Abs("z", App(final, apps(Var("z"), *steps, d)), zin)
    return TypedProgram(term, arrows(zin, str_type(len(sys.output_alphabet))),
                        Codec("string", sys.input_alphabet), Codec("string", sys.output_alphabet))


def compile_register_transducer(rt: RegisterTransducer) -> TypedProgram:
    """Any register transducer, copyless or not, through its HDT0L system."""
    return compile_hdt0l(register_transducer_to_hdt0l(rt))


def compile_pipeline(machines: Sequence[RegisterTransducer]) -> TypedProgram:
    if not machines:
        raise ValueError("empty pipeline")
    prog = compile_register_transducer(machines[0])
    for m in machines[1:]:
        prog = compose_programs(prog, compile_register_transducer(m))
    return prog


# ---------------------------------------------------------------------------
# Trees


def _tree_letters(n: int) -> list[tuple[str, SimpleType]]:
    return [(f, arrows(O, O, O)) for f in letter_names(n)] + [("x", O)]


def _leaf(n: int) -> Term:
    return abs_(_tree_letters(n), Var("x"))


def _node(i: int, n: int, left: Term, right: Term) -> Term:
    """``\\f. \\x. f_i (left f x) (right f x)``."""
    args = [Var(f) for f in letter_names(n)] + [Var("x")]
    return abs_(_tree_letters(n), apps(Var(f"f{i + 1}"), apps(left, *args), apps(right, *args)))


def compile_hole_tree(t: OneHoleTree, sigma: Sequence[str]) -> Term:
    n = len(sigma)
    bt = bt_type(n)
    if isinstance(t, Hole):
        return Abs("z", Var("z"), bt)
    inner = App(compile_hole_tree(t.hole, sigma), Var("z"))
    other = encode_tree(t.other, sigma, annotate=True)
    i = sigma.index(t.label)
    if isinstance(t, NodeL):
        return Abs("z", _node(i, n, inner, other), bt)
    return Abs("z", _node(i, n, other, inner), bt)


def _expr_body(e, names: Mapping, sigma: Sequence[str]) -> Term:
    n = len(sigma)
    if isinstance(e, ELeaf):
        return _leaf(n)
    if isinstance(e, (EVar, HVar)):
        if e.name not in names:
            raise UnboundVariable(str(e.name))
        return Var(names[e.name])
    if isinstance(e, ENode):
        return _node(sigma.index(e.label), n, _expr_body(e.left, names, sigma), _expr_body(e.right, names, sigma))
    if isinstance(e, EPlug):
        return App(_expr_body(e.outer, names, sigma), _expr_body(e.inner, names, sigma))
    bt = bt_type(n)
    if isinstance(e, HBox):
        return Abs("z", Var("z"), bt)
    if isinstance(e, HNodeL):
        hole = App(_expr_body(e.hole, names, sigma), Var("z"))
        return Abs("z", _node(sigma.index(e.label), n, hole, _expr_body(e.other, names, sigma)), bt)
    if isinstance(e, HNodeR):
        hole = App(_expr_body(e.hole, names, sigma), Var("z"))
        return Abs("z", _node(sigma.index(e.label), n, _expr_body(e.other, names, sigma), hole), bt)
    if isinstance(e, HPlug):
        inner = App(_expr_body(e.inner, names, sigma), Var("z"))
        return Abs("z", App(_expr_body(e.outer, names, sigma), inner), bt)
    raise TypeError(f"not an expression: {e!r}")


def var_name(v) -> str:
    """Identifier for a register variable, ``r_X`` or ``r_X_l`` / ``r_X_r``."""
    if isinstance(v, tuple):
        return f"r_{v[0]}_{'l' if v[1] == LEFT else 'r'}"
    return f"r_{v}"


def compile_expr(e, tree_vars: Sequence, hole_vars: Sequence, sigma: Sequence[str]) -> Term:
    """``\\v1 ... vn : BT. \\v'1 ... v'm : dBT. C(E)``."""
    n = len(sigma)
    names = {v: var_name(v) for v in list(tree_vars) + list(hole_vars)}
    body = _expr_body(e, names, sigma)
    binders = [(names[v], bt_type(n)) for v in tree_vars] + [(names[v], hbt_type(n)) for v in hole_vars]
    return abs_(binders, body)


def expr_type(e, n_tree: int, n_hole: int, n: int) -> SimpleType:
    result = hbt_type(n) if is_hole_expr(e) else bt_type(n)
    return arrows(*([bt_type(n)] * n_tree + [hbt_type(n)] * n_hole), result)


def sided(regs: Sequence[str]) -> list[tuple[str, str]]:
    """``R x {<, >}`` in the fixed order: all left copies, then all right copies."""
    return [(r, LEFT) for r in regs] + [(r, RIGHT) for r in regs]


def rtt_types(rtt: RTT) -> tuple[SimpleType, SimpleType]:
    """``(B, A)`` with ``B = BT^|R| -> dBT^|R'| -> BT`` and ``A = B^|Q| -> BT``."""
    n = len(rtt.output_alphabet)
    bt = bt_type(n)
    b = arrows(*([bt] * len(rtt.tree_registers) + [hbt_type(n)] * len(rtt.hole_registers)), bt)
    return b, power(b, len(rtt.states), bt)


def _conf(rtt: RTT, q: str, trees: Sequence[Term], holes: Sequence[Term]) -> Term:
    b, _ = rtt_types(rtt)
    ks = [f"k{j + 1}" for j in range(len(rtt.states))]
    body = apps(Var(ks[rtt.states.index(q)]), *trees, *holes)
    return abs_([(k, b) for k in ks], body)


def compile_rtt(rtt: RTT) -> TypedProgram:
    sigma = rtt.output_alphabet
    n = len(sigma)
    bt, hbt = bt_type(n), hbt_type(n)
    b, a = rtt_types(rtt)
    nq = len(rtt.states)
    ks = [f"k{j + 1}" for j in range(nq)]
    tv, hv = sided(rtt.tree_registers), sided(rtt.hole_registers)
    arg_vars = [Var(var_name(v)) for v in tv + hv]

    def side_binders(side: str) -> list[tuple[str, SimpleType]]:
        return [(var_name((r, side)), bt) for r in rtt.tree_registers] + [
            (var_name((r, side)), hbt) for r in rtt.hole_registers
        ]

    def m_term(label: str, ql: str, qr: str) -> Term:
        upd = rtt.delta[(ql, qr, label)]
        args = [apps(compile_expr(upd.trees[r], tv, hv, sigma), *arg_vars) for r in rtt.tree_registers]
        args += [apps(compile_expr(upd.holes[r], tv, hv, sigma), *arg_vars) for r in rtt.hole_registers]
        return abs_([(k, b) for k in ks], apps(Var(ks[rtt.states.index(upd.state)]), *args))

    def n_term(label: str) -> Term:
        kv = [Var(k) for k in ks]
        hs = []
        for ql in rtt.states:
            branches = [abs_(side_binders(RIGHT), apps(m_term(label, ql, qr), *kv)) for qr in rtt.states]
            hs.append(abs_(side_binders(LEFT), apps(Var("c_r"), *branches)))
        return abs_([("c_l", a), ("c_r", a)] + [(k, b) for k in ks], apps(Var("c_l"), *hs))

    leaf = encode_tree(Leaf(), sigma, annotate=True)
    init = _conf(rtt, rtt.initial, [leaf] * len(rtt.tree_registers),
                 [compile_hole_tree(Hole(), sigma)] * len(rtt.hole_registers))
    outs = [compile_expr(rtt.output[q], rtt.tree_registers, rtt.hole_registers, sigma) for q in rtt.states]
    zin = bt_type(len(rtt.input_alphabet), a)
    run = apps(Var("z"), *[n_term(g) for g in rtt.input_alphabet], init)
    term = Abs("z", apps(run, *outs), zin)
    return TypedProgram(term, arrows(zin, bt), Codec("tree", rtt.input_alphabet), Codec("tree", sigma))


# ---------------------------------------------------------------------------
# Automata and composition


@dataclass(frozen=True)
class DFA:
    name: str
    alphabet: tuple[str, ...]
    states: tuple[str, ...]
    initial: str
    delta: Mapping[tuple[str, str], str]
    accepting: frozenset

    def __post_init__(self):
        if self.initial not in self.states:
            raise ValueError(f"initial state {self.initial} not declared")
        for q in self.accepting:
            if q not in self.states:
                raise ValueError(f"accepting state {q} not declared")
        for q in self.states:
            for c in self.alphabet:
                if self.delta.get((q, c)) not in self.states:
                    raise ValueError(f"delta({q}, {c}) missing or undeclared")

    def accepts(self, w: Sequence[str]) -> bool:
        q = self.initial
        for c in w:
            q = self.delta[(q, c)]
        return q in self.accepting


def dfa_state_type(nq: int) -> SimpleType:
    """``(Bool^|Q| -> Bool) -> Bool``: a vector of one boolean per state."""
    return arrows(power(BOOL, nq, BOOL), BOOL)


def compile_dfa(dfa: DFA) -> TypedProgram:
    nq = len(dfa.states)
    vec = dfa_state_type(nq)
    sel = power(BOOL, nq, BOOL)
    vs = [f"v{j + 1}" for j in range(nq)]
    letters = []
    for c in dfa.alphabet:
        pulled = [Var(vs[dfa.states.index(dfa.delta[(q, c)])]) for q in dfa.states]
        inner = abs_([(v, BOOL) for v in vs], apps(Var("k"), *pulled))
        letters.append(abs_([("m", vec), ("k", sel)], App(Var("m"), inner)))
    accept = [_bool(q in dfa.accepting) for q in dfa.states]
    base = Abs("k", apps(Var("k"), *accept), sel)
    start = abs_([(v, BOOL) for v in vs], Var(vs[dfa.states.index(dfa.initial)]))
    zin = str_type(len(dfa.alphabet), vec)
    term = Abs("w", apps(Var("w"), *letters, base, start), zin)
    return TypedProgram(term, arrows(zin, BOOL), Codec("string", dfa.alphabet), Codec("bool"))


def _bool(b: bool) -> Term:
    return Abs("t", Abs("e", Var("t" if b else "e"), O), O)


def _base_of(ty: SimpleType, codec: Codec) -> SimpleType:
    """The ``A`` in an input type ``Str[A]`` or ``BT[A]``."""
    for _ in codec.alphabet:
        if not isinstance(ty, Arrow):
            raise TypeMismatch(f"{show_type(ty)} is not an encoding type")
        ty = ty.cod
    if not isinstance(ty, Arrow):
        raise TypeMismatch(f"{show_type(ty)} is not an encoding type")
    return ty.dom


def _compose(t: TypedProgram, u: TypedProgram) -> TypedProgram:
    if t.output != u.input:
        raise TypeMismatch(f"output {t.output} does not match input {u.input}")
    b = _base_of(u.type.dom, u.input)
    inner = retype(t.term, b)
    dom = type_substitute(t.type.dom, b)
    if type_substitute(t.type.cod, b) != u.type.dom:
        raise TypeMismatch(f"{show_type(t.type.cod)}[{show_type(b)}] is not {show_type(u.type.dom)}")
    term = Abs("w", App(u.term, App(inner, Var("w"))), dom)
    return TypedProgram(term, arrows(dom, u.type.cod), t.input, u.output)


def compose_preimage(t: TypedProgram, u: TypedProgram) -> TypedProgram:
    """``\\x. u (t x)``: decides the preimage of ``u``'s language under ``t``."""
    if u.output.kind != "bool":
        raise TypeMismatch("the second program must decide a language")
    return _compose(t, u)


def compose_programs(t: TypedProgram, u: TypedProgram) -> TypedProgram:
    """``\\x. u (t x)``: the function ``u . t``."""
    return _compose(t, u)
