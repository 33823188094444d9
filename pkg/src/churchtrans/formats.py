"""Text formats for machines, trees and words.

Every machine file starts with a kind keyword and a name, followed by
keyword-introduced sections in any order.  ``#`` starts a comment.  The
printers here produce text that the parsers read back to an equal machine.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Sequence, Union

from .string_transducers import HDT0LSystem, IncompleteDelta, Morphism, RegisterTransducer
from .tree_transducers import (
    ELeaf,
    ENode,
    EPlug,
    EVar,
    HBox,
    HNodeL,
    HNodeR,
    HPlug,
    HVar,
    LEAF,
    LEFT,
    RIGHT,
    RTT,
    BinTree,
    ConflictRelation,
    Leaf,
    Node,
    Update,
    is_hole_expr,
)


class FormatError(ValueError):
    """Malformed machine, tree or word text."""


EMPTY_WORD = ("ε", "eps")

_TOKEN = re.compile(r"\s+|#[^\n]*|(?P<tok>\(\)|:=|->|[()\[\],;{}=~]|[^\s()\[\],;{}=~#]+)")


def _tokens(text: str) -> list[str]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise FormatError(f"unexpected character {text[pos]!r}")
        if m.group("tok"):
            out.append(m.group("tok"))
        pos = m.end()
    return out


class _Stream:
    def __init__(self, toks: list[str], keywords: frozenset[str]):
        self.toks = toks
        self.i = 0
        self.keywords = keywords

    def peek(self) -> Optional[str]:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def next(self) -> str:
        tok = self.peek()
        if tok is None:
            raise FormatError("unexpected end of file")
        self.i += 1
        return tok

    def expect(self, tok: str) -> None:
        got = self.next()
        if got != tok:
            raise FormatError(f"expected {tok!r}, got {got!r}")

    def names(self, stop: Sequence[str] = ()) -> list[str]:
        """Identifiers up to the next keyword, punctuation, or ``stop`` token."""
        out = []
        while True:
            tok = self.peek()
            if tok is None or tok in self.keywords or tok in stop or not _is_name(tok):
                return out
            out.append(self.next())


def _is_name(tok: str) -> bool:
    return tok not in ("()", ":=", "->", "(", ")", "[", "]", ",", ";", "{", "}", "=", "~")


def _word(toks: list[str]) -> tuple[str, ...]:
    return tuple(t for t in toks if t not in EMPTY_WORD)


def _show_word(w: Sequence[str]) -> str:
    return " ".join(w) if w else "ε"


def machine_kind(text: str) -> str:
    toks = _tokens(text)
    if not toks:
        raise FormatError("empty machine file")
    return toks[0]


def parse_machine(text: str, complete_delta: bool = False):
    kind = machine_kind(text)
    if kind == "register-transducer":
        return parse_register_transducer(text, complete_delta)
    if kind == "hdt0l":
        return parse_hdt0l(text)
    if kind in ("rtt", "brtt"):
        return parse_rtt(text)
    if kind == "dfa":
        return parse_dfa(text)
    if kind == "pipeline":
        return parse_pipeline(text, complete_delta)
    raise FormatError(f"unknown machine kind {kind!r}")


def _header(s: _Stream, kind: str) -> str:
    s.expect(kind)
    name = s.next()
    if not _is_name(name) or name in s.keywords:
        raise FormatError(f"bad machine name {name!r}")
    return name


def _alphabet(s: _Stream) -> tuple[str, ...]:
    """Declared symbols; ``_c`` is reserved for the underlined copy of a declared ``c``."""
    syms = tuple(s.names())
    for c in syms:
        if c.startswith("_") and (c[1:] not in syms or c[1:].startswith("_") or not c[1:]):
            raise FormatError(f"symbol {c!r}: a leading underscore marks an underlined declared letter")
    return syms


def _once(fields: dict, key: str, value) -> None:
    if key in fields:
        raise FormatError(f"{key} given twice")
    fields[key] = value


def _need(fields: dict, *keys: str) -> None:
    for k in keys:
        if k not in fields:
            raise FormatError(f"missing {k} section")


# ---------------------------------------------------------------------------
# Register transducers

_RT_KEYS = frozenset({"input", "output", "registers", "states", "initial", "delta", "out"})


def parse_register_transducer(text: str, complete_delta: bool = False) -> RegisterTransducer:
    s = _Stream(_tokens(text), _RT_KEYS)
    name = _header(s, "register-transducer")
    fields: dict = {}
    delta: dict = {}
    output: dict = {}
    while s.peek() is not None:
        kw = s.next()
        if kw in ("input", "output"):
            _once(fields, kw, _alphabet(s))
        elif kw in ("registers", "states"):
            _once(fields, kw, tuple(s.names()))
        elif kw == "initial":
            _once(fields, kw, s.next())
        elif kw == "delta":
            q, a = s.next(), s.next()
            s.expect("->")
            q2 = s.next()
            upd = _braced_updates(s)
            if (q, a) in delta:
                raise FormatError(f"delta({q}, {a}) given twice")
            delta[(q, a)] = (q2, {r: _word(w) for r, w in upd.items()})
        elif kw == "out":
            q = s.next()
            s.expect("=")
            if q in output:
                raise FormatError(f"output of {q} given twice")
            output[q] = _word(s.names())
        else:
            raise FormatError(f"unexpected {kw!r}")
    _need(fields, "input", "output", "registers", "states", "initial")
    regs = fields["registers"]
    for key, (_, upd) in delta.items():
        for r in regs:
            if r not in upd:
                if not complete_delta:
                    raise FormatError(f"delta({key[0]}, {key[1]}) does not update {r}")
                upd[r] = (r,)
    args = (name, fields["input"], fields["output"], regs, fields["states"], fields["initial"], delta, output)
    try:
        if complete_delta:
            return RegisterTransducer.completed(*args)
        return RegisterTransducer(*args)
    except IncompleteDelta as e:
        raise FormatError(f"{e} (use --complete-delta to fill with identity self-loops)") from None
    except ValueError as e:
        raise FormatError(str(e)) from None


def _braced_updates(s: _Stream) -> dict[str, list[str]]:
    s.expect("{")
    upd: dict[str, list[str]] = {}
    while True:
        if s.peek() == "}":
            s.next()
            return upd
        r = s.next()
        s.expect(":=")
        if r in upd:
            raise FormatError(f"register {r} updated twice")
        body = []
        while s.peek() not in (";", "}"):
            body.append(s.next())
        upd[r] = body
        if s.peek() == ";":
            s.next()


def dump_register_transducer(rt: RegisterTransducer) -> str:
    lines = [
        f"register-transducer {rt.name}",
        f"  input {' '.join(rt.input_alphabet)}",
        f"  output {' '.join(rt.output_alphabet)}",
        f"  registers {' '.join(rt.registers)}",
        f"  states {' '.join(rt.states)}",
        f"  initial {rt.initial}",
    ]
    for q in rt.states:
        for a in rt.input_alphabet:
            q2, upd = rt.delta[(q, a)]
            body = " ; ".join(f"{r} := {_show_word(upd[r])}" for r in rt.registers)
            lines.append(f"  delta {q} {a} -> {q2} {{ {body} }}")
    for q in rt.states:
        lines.append(f"  out {q} = {_show_word(rt.output[q])}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# HDT0L systems

_H_KEYS = frozenset({"input", "work", "output", "init", "rule", "final:", "final"})


def parse_hdt0l(text: str) -> HDT0LSystem:
    s = _Stream(_tokens(text), _H_KEYS)
    name = _header(s, "hdt0l")
    fields: dict = {}
    rules: dict = {}
    final = None
    while s.peek() is not None:
        kw = s.next()
        if kw in ("input", "work", "output"):
            _once(fields, kw, _alphabet(s))
        elif kw == "init":
            _once(fields, kw, _word(s.names()))
        elif kw == "rule":
            head = s.next()
            if not head.endswith(":"):
                raise FormatError(f"expected 'rule LETTER:', got {head!r}")
            c = head[:-1]
            if c in rules:
                raise FormatError(f"rule for {c} given twice")
            rules[c] = _image_list(s)
        elif kw in ("final:", "final"):
            if kw == "final" and s.peek() == ":":
                s.next()
            if final is not None:
                raise FormatError("final morphism given twice")
            final = _image_list(s)
        else:
            raise FormatError(f"unexpected {kw!r}")
    _need(fields, "input", "work", "output")
    if final is None:
        raise FormatError("missing final morphism")
    try:
        return HDT0LSystem.build(name, fields["input"], fields["work"], fields["output"],
                                 fields.get("init", ()), rules, final)
    except (ValueError, KeyError) as e:
        raise FormatError(str(e)) from None


def _image_list(s: _Stream) -> dict[str, tuple[str, ...]]:
    out = {}
    while True:
        x = s.next()
        s.expect("->")
        if x in out:
            raise FormatError(f"image of {x} given twice")
        out[x] = _word(s.names())
        if s.peek() != ",":
            return out
        s.next()


def dump_hdt0l(sys: HDT0LSystem) -> str:
    def images(m: Morphism) -> str:
        return ", ".join(f"{x} -> {_show_word(m.images[x])}" for x in m.source)

    lines = [
        f"hdt0l {sys.name}",
        f"  input {' '.join(sys.input_alphabet)}",
        f"  work {' '.join(sys.work_alphabet)}",
        f"  output {' '.join(sys.output_alphabet)}",
        f"  init {_show_word(sys.init)}",
    ]
    for c in sys.input_alphabet:
        lines.append(f"  rule {c}: {images(sys.rules[c])}")
    lines.append(f"  final: {images(sys.final)}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Tree transducers

_T_KEYS = frozenset(
    {"input", "output", "states", "initial", "tree-registers", "hole-registers", "conflict", "delta", "out"}
)


@dataclass(frozen=True)
class TreeMachine:
    """A parsed ``rtt``/``brtt`` file; ``conflict`` is ``None`` for plain RTTs."""

    rtt: RTT
    conflict: Optional[ConflictRelation]


def parse_rtt(text: str) -> TreeMachine:
    s = _Stream(_tokens(text), _T_KEYS)
    kind = s.peek()
    name = _header(s, kind)
    fields: dict = {}
    pairs = []
    raw_delta = []
    raw_out = []
    while s.peek() is not None:
        kw = s.next()
        if kw in ("input", "output"):
            _once(fields, kw, _alphabet(s))
        elif kw in ("states", "tree-registers", "hole-registers"):
            _once(fields, kw, tuple(s.names()))
        elif kw == "initial":
            _once(fields, kw, s.next())
        elif kw == "conflict":
            x = s.next()
            s.expect("~")
            pairs.append((x, s.next()))
        elif kw == "delta":
            ql, qr, a = s.next(), s.next(), s.next()
            s.expect("->")
            q = s.next()
            s.expect("{")
            upd = []
            while s.peek() != "}":
                r = s.next()
                s.expect(":=")
                upd.append((r, s.i))
                _skip_expr(s)
                if s.peek() == ";":
                    s.next()
            s.next()
            raw_delta.append(((ql, qr, a), q, upd))
        elif kw == "out":
            q = s.next()
            s.expect("=")
            raw_out.append((q, s.i))
            _skip_expr(s)
        else:
            raise FormatError(f"unexpected {kw!r}")
    _need(fields, "input", "output", "states", "initial")
    trees = fields.get("tree-registers", ())
    holes = fields.get("hole-registers", ())
    labels = set(fields["output"])

    def expr_at(pos: int, sided: bool):
        p = _ExprParser(s.toks, pos, labels, set(trees), set(holes), sided)
        return p.expr()

    delta = {}
    for key, q, upd in raw_delta:
        if key in delta:
            raise FormatError("delta({}, {}, {}) given twice".format(*key))
        tm, hm = {}, {}
        for r, pos in upd:
            e = expr_at(pos, True)
            if r in trees:
                if is_hole_expr(e):
                    raise FormatError(f"tree register {r} assigned a one-hole expression")
                tm[r] = e
            elif r in holes:
                if not is_hole_expr(e):
                    raise FormatError(f"hole register {r} assigned a tree expression")
                hm[r] = e
            else:
                raise FormatError(f"unknown register {r}")
        delta[key] = Update(q, tm, hm)
    output = {}
    for q, pos in raw_out:
        e = expr_at(pos, False)
        if is_hole_expr(e):
            raise FormatError(f"output of {q} must be a tree expression")
        output[q] = e
    try:
        rtt = RTT(name, fields["input"], fields["output"], fields["states"], fields["initial"],
                  trees, holes, output, delta)
        conflict = None
        if kind == "brtt" or pairs:
            conflict = ConflictRelation(trees + holes, frozenset(pairs))
    except ValueError as e:
        raise FormatError(str(e)) from None
    return TreeMachine(rtt, conflict)


def _skip_expr(s: _Stream) -> None:
    depth = 0
    while True:
        tok = s.peek()
        if tok is None:
            return
        if depth == 0 and (tok in (";", "}") or tok in s.keywords):
            return
        if tok in ("(", "["):
            depth += 1
        elif tok in (")", "]"):
            depth -= 1
        s.next()


class _ExprParser:
    """``E ::= () | box | VAR | label ( E , E ) | E [ E ]``."""

    def __init__(self, toks, pos, labels, trees, holes, sided):
        self.toks = toks
        self.i = pos
        self.labels = labels
        self.trees = trees
        self.holes = holes
        self.sided = sided

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def next(self):
        tok = self.peek()
        if tok is None:
            raise FormatError("unexpected end of expression")
        self.i += 1
        return tok

    def expect(self, tok):
        got = self.next()
        if got != tok:
            raise FormatError(f"expected {tok!r} in expression, got {got!r}")

    def expr(self):
        e = self.atom()
        while self.peek() == "[":
            self.next()
            inner = self.expr()
            self.expect("]")
            if not is_hole_expr(e):
                raise FormatError("only a one-hole expression can be filled with [ ]")
            e = HPlug(e, inner) if is_hole_expr(inner) else EPlug(e, inner)
        return e

    def atom(self):
        tok = self.next()
        if tok == "()":
            return ELeaf()
        if tok == "(":
            if self.peek() == ")":
                self.next()
                return ELeaf()
            e = self.expr()
            self.expect(")")
            return e
        if tok == "box":
            return HBox()
        if self.peek() == "(" and tok in self.labels:
            self.next()
            left = self.expr()
            self.expect(",")
            right = self.expr()
            self.expect(")")
            lh, rh = is_hole_expr(left), is_hole_expr(right)
            if lh and rh:
                raise FormatError(f"{tok}( , ) has a hole on both sides")
            if lh:
                return HNodeL(tok, left, right)
            if rh:
                return HNodeR(tok, left, right)
            return ENode(tok, left, right)
        return self.var(tok)

    def var(self, tok: str):
        if self.sided:
            if tok[-1:] not in (LEFT, RIGHT):
                raise FormatError(f"variable {tok} needs a side marker {LEFT} or {RIGHT}")
            name, v = tok[:-1], (tok[:-1], tok[-1])
        else:
            name, v = tok, tok
        if name in self.trees:
            return EVar(v)
        if name in self.holes:
            return HVar(v)
        raise FormatError(f"unknown register or label {tok!r}")


def show_expr(e) -> str:
    from .tree_transducers import show_var

    if isinstance(e, ELeaf):
        return "()"
    if isinstance(e, HBox):
        return "box"
    if isinstance(e, (EVar, HVar)):
        return show_var(e.name)
    if isinstance(e, ENode):
        return f"{e.label}({show_expr(e.left)}, {show_expr(e.right)})"
    if isinstance(e, HNodeL):
        return f"{e.label}({show_expr(e.hole)}, {show_expr(e.other)})"
    if isinstance(e, HNodeR):
        return f"{e.label}({show_expr(e.other)}, {show_expr(e.hole)})"
    return f"{show_expr(e.outer)}[{show_expr(e.inner)}]"


def dump_rtt(rtt: RTT, conflict: Optional[ConflictRelation] = None) -> str:
    kind = "brtt" if conflict is not None else "rtt"
    lines = [
        f"{kind} {rtt.name}",
        f"  input {' '.join(rtt.input_alphabet)}",
        f"  output {' '.join(rtt.output_alphabet)}",
        f"  states {' '.join(rtt.states)}",
        f"  initial {rtt.initial}",
        f"  tree-registers {' '.join(rtt.tree_registers)}",
        f"  hole-registers {' '.join(rtt.hole_registers)}",
    ]
    if conflict is not None:
        seen = set()
        for x, y in sorted(conflict.pairs):
            if (y, x) not in seen:
                seen.add((x, y))
                lines.append(f"  conflict {x} ~ {y}")
    for ql in rtt.states:
        for qr in rtt.states:
            for a in rtt.input_alphabet:
                upd = rtt.delta[(ql, qr, a)]
                parts = [f"{r} := {show_expr(upd.trees[r])}" for r in rtt.tree_registers]
                parts += [f"{r} := {show_expr(upd.holes[r])}" for r in rtt.hole_registers]
                lines.append(f"  delta {ql} {qr} {a} -> {upd.state} {{ {' ; '.join(parts)} }}")
    for q in rtt.states:
        lines.append(f"  out {q} = {show_expr(rtt.output[q])}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# DFAs

_D_KEYS = frozenset({"alphabet", "states", "initial", "accept", "delta"})


def parse_dfa(text: str):
    from .stlc_compile import DFA

    s = _Stream(_tokens(text), _D_KEYS)
    name = _header(s, "dfa")
    fields: dict = {}
    delta = {}
    while s.peek() is not None:
        kw = s.next()
        if kw == "alphabet":
            _once(fields, kw, _alphabet(s))
        elif kw in ("states", "accept"):
            _once(fields, kw, tuple(s.names()))
        elif kw == "initial":
            _once(fields, kw, s.next())
        elif kw == "delta":
            q, a = s.next(), s.next()
            s.expect("->")
            if (q, a) in delta:
                raise FormatError(f"delta({q}, {a}) given twice")
            delta[(q, a)] = s.next()
        else:
            raise FormatError(f"unexpected {kw!r}")
    _need(fields, "alphabet", "states", "initial")
    try:
        return DFA(name, fields["alphabet"], fields["states"], fields["initial"], delta,
                   frozenset(fields.get("accept", ())))
    except ValueError as e:
        raise FormatError(str(e)) from None


def dump_dfa(dfa) -> str:
    lines = [
        f"dfa {dfa.name}",
        f"  alphabet {' '.join(dfa.alphabet)}",
        f"  states {' '.join(dfa.states)}",
        f"  initial {dfa.initial}",
        f"  accept {' '.join(q for q in dfa.states if q in dfa.accepting)}",
    ]
    for q in dfa.states:
        for a in dfa.alphabet:
            lines.append(f"  delta {q} {a} -> {dfa.delta[(q, a)]}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Pipelines: a sequence of register transducers run one after the other


def parse_pipeline(text: str, complete_delta: bool = False) -> list[RegisterTransducer]:
    toks = _tokens(text)
    if len(toks) < 2 or toks[0] != "pipeline":
        raise FormatError("expected 'pipeline NAME'")
    text = re.sub(r"#[^\n]*", "", text)
    body = re.sub(r"^\s*pipeline\s+\S+", "", text, count=1)
    chunks = re.split(r"(?m)^\s*(?=register-transducer\b)", body)
    machines = [parse_register_transducer(c, complete_delta) for c in chunks if c.strip()]
    if not machines:
        raise FormatError("empty pipeline")
    for m1, m2 in zip(machines, machines[1:]):
        if set(m1.output_alphabet) - set(m2.input_alphabet):
            raise FormatError(f"{m1.name} outputs letters that {m2.name} does not read")
    return machines


def dump_pipeline(name: str, machines: Sequence[RegisterTransducer]) -> str:
    return f"pipeline {name}\n" + "".join(dump_register_transducer(m) for m in machines)


# ---------------------------------------------------------------------------
# Literals


def parse_tree_literal(text: str) -> BinTree:
    toks = _tokens(text)
    pos = 0

    def go() -> BinTree:
        nonlocal pos
        if pos >= len(toks):
            raise FormatError("unexpected end of tree")
        tok = toks[pos]
        pos += 1
        if tok == "()":
            return LEAF
        if tok == "(" and pos < len(toks) and toks[pos] == ")":
            pos += 1
            return LEAF
        if not _is_name(tok) or pos >= len(toks) or toks[pos] != "(":
            raise FormatError(f"bad tree at {tok!r}")
        pos += 1
        left = go()
        if pos >= len(toks) or toks[pos] != ",":
            raise FormatError("expected ',' in tree")
        pos += 1
        right = go()
        if pos >= len(toks) or toks[pos] != ")":
            raise FormatError("expected ')' in tree")
        pos += 1
        return Node(tok, left, right)

    t = go()
    if pos != len(toks):
        raise FormatError(f"trailing input in tree at {toks[pos]!r}")
    return t


def show_tree(t: BinTree) -> str:
    return str(t)


def parse_word(text: str, alphabet: Sequence[str]) -> tuple[str, ...]:
    """Split a word literal against an alphabet.

    Whitespace-separated symbols are read as given; otherwise the text is cut
    greedily into the longest matching symbols.
    """
    text = text.strip()
    if text in EMPTY_WORD or text == "":
        return ()
    if any(c.isspace() for c in text):
        w = tuple(text.split())
    else:
        syms = sorted(alphabet, key=len, reverse=True)
        w = []
        i = 0
        while i < len(text):
            for sym in syms:
                if sym and text.startswith(sym, i):
                    w.append(sym)
                    i += len(sym)
                    break
            else:
                raise FormatError(f"cannot read {text[i:]!r} with alphabet {list(alphabet)}")
        w = tuple(w)
    for c in w:
        if c not in alphabet:
            raise FormatError(f"{c!r} is not in {list(alphabet)}")
    return w


def show_word(w: Sequence[str]) -> str:
    if not w:
        return ""
    if all(len(c) == 1 for c in w):
        return "".join(w)
    return " ".join(w)


def parse_input(text: str, machine) -> Union[tuple, BinTree]:
    """Read an input literal for ``machine``: a tree for tree machines, a word otherwise."""
    if isinstance(machine, TreeMachine):
        return parse_tree_literal(text)
    if isinstance(machine, list):
        return parse_word(text, machine[0].input_alphabet)
    if isinstance(machine, (RegisterTransducer, HDT0LSystem)):
        return parse_word(text, machine.input_alphabet)
    return parse_word(text, machine.alphabet)
