"""Compilers from copyless machines to the elementary affine calculus.

Terms are assembled with :class:`~churchtrans.eal_derivation.Ann` ascriptions
at the places where a polymorphic type has to be known in advance (state
dispatchers, tensors, withs).  :func:`churchtrans.eal_derivation.elaborate`
turns the ascribed term into a full derivation, which every
:class:`EalProgram` carries and can re-check.

Naming conventions inside emitted terms: ``f1 .. fn`` are the output letters
(``\\!``-bound, so used freely under one ``!``), ``x`` is the leaf of a tree
or the base of a string, ``p_X`` the linear value of register ``X`` in the
string construction and ``r_X_l`` / ``r_X_r`` the left/right copies of a tree
register.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from . import reduction
from .church_stlc import letter_names
from .eal_core import (
    eal_decode_string,
    eal_decode_tree,
    eal_encode_string,
    eal_encode_tree,
    fin_encode,
    tensor_elim,
    tensor_intro,
    with_intro,
    with_project,
    with_tensor_distribute,
)
from .eal_core import check_linearity, check_stratification
from .eal_derivation import (
    Ann,
    Derivation,
    DerivationReport,
    EalTypeError,
    ascribed,
    check_derivation,
    elaborate,
    erase,
)
from .eal_types import (
    ALPHA,
    EalType,
    Lolli,
    OfCourse,
    bt_type,
    endo,
    fin_type,
    lolli_power,
    lollis,
    str_type,
    tensor_type,
    with_type,
)
from .reduction import DEFAULT_FUEL
from .report import ValidityReport
from .stlc_compile import Codec
from .string_transducers import RegisterTransducer, Word, check_copyless, delta_o
from .terms import APP, FREE, Abs, App, Bang, BangAbs, Term, Var, apps, lams, to_nameless
from .tree_transducers import (
    LEFT,
    RIGHT,
    RTT,
    ConflictRelation,
    ELeaf,
    ENode,
    EPlug,
    EVar,
    HBox,
    HNodeL,
    HNodeR,
    HPlug,
    HVar,
    check_brtt,
    expr_vars,
    nonconflicting_subsets,
)


class NotCopyless(ValueError):
    def __init__(self, report: ValidityReport):
        super().__init__(str(report))
        self.report = report


class NotValidBrtt(ValueError):
    def __init__(self, report: ValidityReport):
        super().__init__(str(report))
        self.report = report


class IndexMismatch(ValueError):
    pass


@dataclass
class EalProgram:
    term: Term
    type: EalType
    derivation: Derivation
    input: Codec
    output: Codec
    promoted: bool = False

    def check(self) -> ValidityReport:
        rep = ValidityReport()
        for sub in (check_linearity(self.term), check_stratification(self.term)):
            for msg in sub.problems:
                rep.fail(msg)
        d = check_derivation(self.derivation, self.term, self.type)
        if not d:
            rep.fail(str(d))
        return rep

    def apply(self, value: Term) -> Term:
        return App(self.term, Bang(value) if self.promoted else value)

    def encode(self, x) -> Term:
        if self.input.kind == "tree":
            return eal_encode_tree(x, self.input.alphabet)
        return eal_encode_string(x, self.input.alphabet)

    def decode(self, t: Term, fuel: int = DEFAULT_FUEL):
        if self.output.kind == "tree":
            return eal_decode_tree(t, self.output.alphabet, banged=self.promoted, fuel=fuel)
        return eal_decode_string(t, self.output.alphabet, banged=self.promoted, fuel=fuel)

    def run(self, x, fuel: int = DEFAULT_FUEL):
        return self.decode(self.apply(self.encode(x)), fuel)


def _program(t, ty: EalType, inp: Codec, out: Codec, promoted: bool = False) -> EalProgram:
    d = elaborate(t, ty)
    return EalProgram(d.term, ty, d, inp, out, promoted)


# ---------------------------------------------------------------------------
# Relative encodings


def register_var(r: str) -> str:
    return f"p_{r}"


def tilde_encode(w: Sequence[str], sigma: Sequence[str], registers: Sequence[str] = ()) -> Term:
    """``\\x. chi(c1) (... (chi(cn) x))``: letters become ``f_i``, registers ``p_r``."""
    fs = letter_names(len(sigma))
    body: Term = Var("x")
    for c in reversed(list(w)):
        if c in registers:
            body = App(Var(register_var(c)), body)
        else:
            body = App(Var(fs[list(sigma).index(c)]), body)
    return Abs("x", body)


def hat_encode(w: Sequence[str], sigma: Sequence[str], registers: Sequence[str]) -> Term:
    """``\\p_r1 ... \\p_rm. w~``."""
    return lams([register_var(r) for r in registers], tilde_encode(w, sigma, registers))


def hat_type(n_registers: int, a: EalType = ALPHA) -> EalType:
    return lolli_power(endo(a), n_registers, endo(a))


def sst_config_type(sst: RegisterTransducer, a: EalType = ALPHA) -> EalType:
    """``A = Fin(|Q|) -o (a -o a)^|R| -o a -o a``."""
    return Lolli(fin_type(len(sst.states)), hat_type(len(sst.registers), a))


def g_hat(g: Mapping[str, Sequence[str]], sst: RegisterTransducer) -> Term:
    """``\\y. y G^(q1) ... G^(qk)``: an output function as a value of type ``A``."""
    sigma, regs = sst.output_alphabet, sst.registers
    cases = [Ann(hat_encode(g[q], sigma, regs), hat_type(len(regs))) for q in sst.states]
    return Ann(Abs("y", apps(Var("y"), *cases)), sst_config_type(sst))


@dataclass
class RelativeTerm:
    """A term typed in ``. | . | f1 : a -o a, ... (, x : a)``."""

    term: object
    type: EalType
    theta: dict = field(default_factory=dict)

    def derive(self) -> Derivation:
        return elaborate(self.term, self.type, theta=self.theta)

    def check(self) -> DerivationReport:
        try:
            d = self.derive()
        except EalTypeError as e:
            return DerivationReport(False, (), str(e))
        return check_derivation(d, erase(self.term), self.type)


def letter_context(n: int, tree: bool = False, a: EalType = ALPHA) -> dict:
    if tree:
        ctx = {f: lollis(a, a, a) for f in letter_names(n)}
        ctx["x"] = a
        return ctx
    return {f: endo(a) for f in letter_names(n)}


def relative_hat(w: Sequence[str], sigma: Sequence[str], registers: Sequence[str]) -> RelativeTerm:
    return RelativeTerm(hat_encode(w, sigma, registers), hat_type(len(registers)), letter_context(len(sigma)))


# ---------------------------------------------------------------------------
# Streaming string transducers


def _state_index(sst: RegisterTransducer, q: str) -> int:
    return sst.states.index(q) + 1


def sst_step_term(sst: RegisterTransducer, c: str) -> Term:
    """``d_c : A -o A``, one backward step ``G -> delta^O(c, G)``.

    ``d_c = \\g. \\y. y T1 ... Tk g`` with
    ``Tq = \\g. \\p_r1 ... \\p_rm. g pi_q' s~(r1) ... s~(rm)`` for
    ``delta(q, c) = (q', s)``; the state dispatch threads ``g`` through so it
    is used once.
    """
    k, regs, sigma = len(sst.states), sst.registers, sst.output_alphabet
    a = sst_config_type(sst)
    branch_type = Lolli(a, hat_type(len(regs)))
    branches = []
    for q in sst.states:
        q2, upd = sst.delta[(q, c)]
        args = [tilde_encode(upd.get(r, (r,)), sigma, regs) for r in regs]
        body = apps(Var("g"), fin_encode(_state_index(sst, q2), k), *args)
        branches.append(Ann(Abs("g", lams([register_var(r) for r in regs], body)), branch_type))
    return Ann(Abs("g", Abs("y", apps(Var("y"), *branches, Var("g")))), Lolli(a, a))


def compile_sst(sst: RegisterTransducer) -> EalProgram:
    """``\\z. \\!f1 ... \\!fn. (\\!h. !u) (z !d1 ... !d|G|)`` at ``Str_G -o Str_S``."""
    rep = check_copyless(sst)
    if not rep:
        raise NotCopyless(rep)
    gamma, sigma, regs = sst.input_alphabet, sst.output_alphabet, sst.registers
    a = sst_config_type(sst)
    ds = [Bang(sst_step_term(sst, c)) for c in gamma]
    ident = [Abs("x", Var("x")) for _ in regs]
    u = apps(Var("h"), g_hat(sst.output, sst), fin_encode(_state_index(sst, sst.initial), len(sst.states)), *ident)
    run = App(BangAbs("h", Bang(u), OfCourse(Lolli(a, a))), apps(Var("z"), *ds))
    body = run
    for f in reversed(letter_names(len(sigma))):
        body = BangAbs(f, body)
    ty = Lolli(str_type(len(gamma)), str_type(len(sigma)))
    return _program(Abs("z", body), ty, Codec("string", gamma), Codec("string", sigma))


def sst_backward_term(sst: RegisterTransducer, w: Sequence[str]) -> Term:
    """``d_w1 (... (d_wn F^))``, open in the letter variables."""
    t = g_hat(sst.output, sst)
    for c in reversed(list(w)):
        t = App(sst_step_term(sst, c), t)
    return erase(t)


def decode_output_function(t: Term, sst: RegisterTransducer, fuel: int = DEFAULT_FUEL) -> dict[str, Word]:
    """Read a value of type ``A`` (open in ``f1 .. fn``) back as ``Q -> (S + R)*``."""
    sigma, regs, k = sst.output_alphabet, sst.registers, len(sst.states)
    fs = letter_names(len(sigma))
    symbol = {f: c for f, c in zip(fs, sigma)}
    symbol.update({f"%r{j}": r for j, r in enumerate(regs)})
    out = {}
    for i, q in enumerate(sst.states, 1):
        n = to_nameless(apps(t, fin_encode(i, k), *[Var(f"%r{j}") for j in range(len(regs))], Var("%x")))
        nf, _ = reduction.normalize_normal_order(n, fuel)
        word = []
        while nf != (FREE, "%x"):
            if nf[0] == APP and nf[1][0] == FREE and nf[1][1] in symbol:
                word.append(symbol[nf[1][1]])
                nf = nf[2]
            else:
                raise ValueError("not an output function")
        out[q] = tuple(word)
    return out


def promote_program(p: EalProgram) -> EalProgram:
    """``\\!s. !(t s)`` at ``!A -o !B``."""
    if p.promoted:
        return p
    if not isinstance(p.type, Lolli):
        raise ValueError("only functions can be promoted")
    ty = Lolli(OfCourse(p.type.dom), OfCourse(p.type.cod))
    t = BangAbs("s", Bang(App(ascribed(p.derivation), Var("s"))))
    return _program(t, ty, p.input, p.output, promoted=True)


def compose_eal_programs(p: EalProgram, q: EalProgram) -> EalProgram:
    """``\\z. q (p z)``: the function ``q . p``."""
    if p.output != q.input:
        raise IndexMismatch(f"output {p.output} does not match input {q.input}")
    if p.promoted != q.promoted:
        p, q = promote_program(p), promote_program(q)
    t = Abs("z", App(ascribed(q.derivation), App(ascribed(p.derivation), Var("z"))))
    return _program(t, Lolli(p.type.dom, q.type.cod), p.input, q.output, p.promoted)


def compile_cbs(f: EalProgram, family: Mapping[str, EalProgram]) -> EalProgram:
    """``\\!s. (\\!x. \\!y1 ... \\!ym. !s') (f !s) (g1 !s) ... (gm !s)`` with
    ``s' = \\!f1 ... \\!fn. x (y1 !f1 .. !fn) ... (ym !f1 .. !fn)``."""
    f = promote_program(f)
    index = f.output.alphabet
    if set(index) != set(family) or len(index) != len(family):
        raise IndexMismatch(f"family is indexed by {sorted(family)}, expected {list(index)}")
    gs = [promote_program(family[i]) for i in index]
    sigma = gs[0].output.alphabet if gs else ()
    for g in gs:
        if g.output.alphabet != sigma or g.input.alphabet != f.input.alphabet:
            raise IndexMismatch("family members must share input and output alphabets")
    fs = letter_names(len(sigma))
    ys = [f"y{j + 1}" for j in range(len(gs))]
    inner: Term = apps(Var("x"), *[apps(Var(y), *[Bang(Var(v)) for v in fs]) for y in ys])
    for v in reversed(fs):
        inner = BangAbs(v, inner)
    head = Bang(Ann(inner, str_type(len(sigma))))
    for y in reversed(ys):
        head = BangAbs(y, head, OfCourse(str_type(len(sigma))))
    head = BangAbs("x", head, OfCourse(str_type(len(index))))
    s = Bang(Var("s"))
    args = [App(ascribed(f.derivation), s)] + [App(ascribed(g.derivation), s) for g in gs]
    gamma = f.input.alphabet
    ty = Lolli(OfCourse(str_type(len(gamma))), OfCourse(str_type(len(sigma))))
    t = BangAbs("s", apps(head, *args))
    return _program(t, ty, Codec("string", gamma), Codec("string", sigma), promoted=True)


# ---------------------------------------------------------------------------
# Bottom-up register tree transducers


def tree_var(v) -> str:
    if isinstance(v, tuple):
        return f"r_{v[0]}_{'l' if v[1] == LEFT else 'r'}"
    return f"r_{v}"


def tilde_expr(e, sigma: Sequence[str]) -> Term:
    """Register expression as a term over ``f_i``, ``x`` and register variables."""
    fs = letter_names(len(sigma))
    if isinstance(e, ELeaf):
        return Var("x")
    if isinstance(e, (EVar, HVar)):
        return Var(tree_var(e.name))
    if isinstance(e, ENode):
        return apps(Var(fs[sigma.index(e.label)]), tilde_expr(e.left, sigma), tilde_expr(e.right, sigma))
    if isinstance(e, EPlug):
        return App(tilde_expr(e.outer, sigma), tilde_expr(e.inner, sigma))
    if isinstance(e, HBox):
        return Abs("y", Var("y"))
    if isinstance(e, HNodeL):
        hole = App(tilde_expr(e.hole, sigma), Var("y"))
        return Abs("y", apps(Var(fs[sigma.index(e.label)]), hole, tilde_expr(e.other, sigma)))
    if isinstance(e, HNodeR):
        hole = App(tilde_expr(e.hole, sigma), Var("y"))
        return Abs("y", apps(Var(fs[sigma.index(e.label)]), tilde_expr(e.other, sigma), hole))
    if isinstance(e, HPlug):
        return Abs("y", App(tilde_expr(e.outer, sigma), App(tilde_expr(e.inner, sigma), Var("y"))))
    raise TypeError(f"not an expression: {e!r}")


# the configuration type has one component per non-conflicting subset
MAX_BRTT_REGISTERS = 8


class _BrttLayout:
    """Types and subset bookkeeping shared by the pieces of the BRTT term."""

    def __init__(self, rtt: RTT, rel: ConflictRelation):
        self.rtt = rtt
        self.regs = rtt.registers
        self.subsets = [tuple(sorted(p, key=self.regs.index)) for p in nonconflicting_subsets(rel)]
        self.index = {frozenset(p): i for i, p in enumerate(self.subsets, 1)}
        self.k = len(rtt.states)
        self.m = len(self.subsets)
        self.parts = [self.part_type(p) for p in self.subsets]
        self.w = with_type(self.parts)
        self.conf = tensor_type([fin_type(self.k), self.w])

    def reg_type(self, r: str) -> EalType:
        return ALPHA if r in self.rtt.tree_registers else endo(ALPHA)

    def part_type(self, p: Sequence[str]) -> EalType:
        return tensor_type([self.reg_type(r) for r in p])

    def sources(self, exprs, side: str) -> tuple:
        used = set()
        for e in exprs:
            used |= {v[0] for v in expr_vars(e) if v[1] == side}
        return tuple(r for r in self.regs if r in used)


def _brtt_update(lay: _BrttLayout, upd, sigma: Sequence[str]) -> Term:
    """``\\wl. \\wr. <pi_q', <d wl wr, c_P1, ..., c_PM>>`` of type ``W -o W -o Conf``."""
    rtt, m = lay.rtt, lay.m
    exprs = {**upd.trees, **upd.holes}
    resource = apps(with_tensor_distribute(lay.parts, lay.parts), Var("wl"), Var("wr"))
    comps = []
    for p in lay.subsets:
        es = [exprs[y] for y in p]
        sl, sr = lay.sources(es, LEFT), lay.sources(es, RIGHT)
        j = (lay.index[frozenset(sl)] - 1) * m + lay.index[frozenset(sr)]
        body = tensor_intro([tilde_expr(e, sigma) for e in es], [lay.reg_type(y) for y in p])
        body = tensor_elim(Var("br"), [tree_var((r, RIGHT)) for r in sr], body)
        body = tensor_elim(Var("al"), [tree_var((r, LEFT)) for r in sl], body)
        body = tensor_elim(with_project(Var("d"), j, m * m), ["al", "br"], body)
        comps.append(Abs("d", body))
    wnew = with_intro(resource, comps, lay.parts)
    state = fin_encode(rtt.states.index(upd.state) + 1, lay.k)
    conf = tensor_intro([state, wnew], [fin_type(lay.k), lay.w])
    return Ann(lams(["wl", "wr"], conf), lollis(lay.w, lay.w, lay.conf))


def brtt_label_term(lay: _BrttLayout, label: str, sigma: Sequence[str]) -> Term:
    """``N_c : Conf -o Conf -o Conf``."""
    rtt, k = lay.rtt, lay.k
    step = lollis(lay.w, lay.w, lay.conf)
    rows = []
    for ql in rtt.states:
        cells = [_brtt_update(lay, rtt.delta[(ql, qr, label)], sigma) for qr in rtt.states]
        row = lams(["qr", "wl", "wr"], apps(Var("qr"), *cells, Var("wl"), Var("wr")))
        rows.append(Ann(row, Lolli(fin_type(k), step)))
    inner = App(Var("cr"), lams(["qr", "wr"], apps(Var("ql"), *rows, Var("qr"), Var("wl"), Var("wr"))))
    body = App(Var("cl"), lams(["ql", "wl"], inner))
    return Ann(lams(["cl", "cr"], body), lollis(lay.conf, lay.conf, lay.conf))


def brtt_leaf_term(lay: _BrttLayout) -> Term:
    """Initial configuration: every tree register is ``x``, every hole register empty."""
    rtt = lay.rtt
    comps = []
    for p in lay.subsets:
        vals = [Var("x") if r in rtt.tree_registers else Abs("y", Var("y")) for r in p]
        comps.append(Abs("d", tensor_intro(vals, [lay.reg_type(r) for r in p])))
    w = with_intro(Var("x"), comps, lay.parts)
    state = fin_encode(rtt.states.index(rtt.initial) + 1, lay.k)
    return tensor_intro([state, w], [fin_type(lay.k), lay.w])


def brtt_output_term(lay: _BrttLayout, sigma: Sequence[str]) -> Term:
    """``\\h. h (\\q. \\w. q O1 ... Ok w)`` of type ``Conf -o a``."""
    rtt = lay.rtt
    outs = []
    for q in rtt.states:
        e = rtt.output[q]
        p = tuple(r for r in lay.regs if r in expr_vars(e))
        body = tensor_elim(with_project(Var("w"), lay.index[frozenset(p)], lay.m), [tree_var(r) for r in p],
                           tilde_expr(e, sigma))
        outs.append(Ann(Abs("w", body), Lolli(lay.w, ALPHA)))
    return Ann(Abs("h", App(Var("h"), lams(["q", "w"], apps(Var("q"), *outs, Var("w"))))), Lolli(lay.conf, ALPHA))


def compile_brtt(rtt: RTT, rel: Optional[ConflictRelation] = None) -> EalProgram:
    """``\\z. \\!f1 ... \\!fn. \\!x. (\\!h. !(out h)) (z !N1 ... !N|G| !L)`` at ``BT_G -o BT_S``."""
    if rel is None:
        rel = ConflictRelation.identity(rtt.registers)
    rep = check_brtt(rtt, rel)
    if len(rtt.registers) > MAX_BRTT_REGISTERS:
        rep.fail(f"{len(rtt.registers)} registers, at most {MAX_BRTT_REGISTERS} are supported")
    if not rep:
        raise NotValidBrtt(rep)
    gamma, sigma = rtt.input_alphabet, rtt.output_alphabet
    lay = _BrttLayout(rtt, rel)
    ns = [Bang(brtt_label_term(lay, c, sigma)) for c in gamma]
    run = apps(Var("z"), *ns, Bang(brtt_leaf_term(lay)))
    out = BangAbs("h", Bang(App(brtt_output_term(lay, sigma), Var("h"))), OfCourse(lay.conf))
    body: Term = BangAbs("x", App(out, run))
    for f in reversed(letter_names(len(sigma))):
        body = BangAbs(f, body)
    ty = Lolli(bt_type(len(gamma)), bt_type(len(sigma)))
    return _program(Abs("z", body), ty, Codec("tree", gamma), Codec("tree", sigma))
