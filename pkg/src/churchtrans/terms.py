"""Abstract syntax shared by the simply typed and the elementary affine calculi.

Terms are immutable trees with named binders.  Plain ``==`` is syntactic;
every semantic comparison goes through :func:`alpha_equal`, which works on
the nameless (de Bruijn) form produced by :func:`to_nameless`.

The simply typed calculus only uses :class:`Var`, :class:`Abs` and
:class:`App`; :class:`BangAbs` and :class:`Bang` belong to the elementary
affine calculus.
"""

from __future__ import annotations

import re
import sys
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Iterator, Optional, Union

sys.setrecursionlimit(max(sys.getrecursionlimit(), 100_000))


@dataclass(frozen=True, slots=True)
class Var:
    name: str


@dataclass(frozen=True, slots=True)
class Abs:
    binder: str
    body: "Term"
    annotation: Any = None


@dataclass(frozen=True, slots=True)
class App:
    fun: "Term"
    arg: "Term"


@dataclass(frozen=True, slots=True)
class BangAbs:
    binder: str
    body: "Term"
    annotation: Any = None


@dataclass(frozen=True, slots=True)
class Bang:
    body: "Term"


Term = Union[Var, Abs, App, BangAbs, Bang]


class TermSyntaxError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Builders


def lams(binders: Iterable[str], body: Term) -> Term:
    for name in reversed(list(binders)):
        body = Abs(name, body)
    return body


def apps(fun: Term, *args: Term) -> Term:
    for a in args:
        fun = App(fun, a)
    return fun


def spine(t: Term) -> tuple[Term, list[Term]]:
    """Split ``h a1 ... an`` into ``(h, [a1, ..., an])``."""
    args = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fun
    args.reverse()
    return t, args


# ---------------------------------------------------------------------------
# Variables


def free_vars(t: Term) -> frozenset[str]:
    out: set[str] = set()
    _free(t, frozenset(), out)
    return frozenset(out)


def _free(t: Term, bound: frozenset, out: set) -> None:
    while True:
        if isinstance(t, Var):
            if t.name not in bound:
                out.add(t.name)
            return
        if isinstance(t, App):
            _free(t.fun, bound, out)
            t = t.arg
        elif isinstance(t, (Abs, BangAbs)):
            bound = bound | {t.binder}
            t = t.body
        else:
            t = t.body


def all_names(t: Term) -> set[str]:
    out = set()
    for node in subterms(t):
        if isinstance(node, Var):
            out.add(node.name)
        elif isinstance(node, (Abs, BangAbs)):
            out.add(node.binder)
    return out


def subterms(t: Term) -> Iterator[Term]:
    stack = [t]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, App):
            stack.append(node.arg)
            stack.append(node.fun)
        elif isinstance(node, (Abs, BangAbs, Bang)):
            stack.append(node.body)


def size(t: Term) -> int:
    return sum(1 for _ in subterms(t))


def fresh_name(base: str, avoid: set[str] | frozenset[str]) -> str:
    name = base
    while name in avoid:
        name += "'"
    return name


# ---------------------------------------------------------------------------
# Nameless form
#
# Tuples tagged by small ints, shared by the reduction machines:
#   (VAR, index) | (FREE, name) | (LAM, body, hint) | (BLAM, body, hint)
#   | (APP, fun, arg) | (BANG, body)

VAR, FREE, LAM, BLAM, APP, BANG = range(6)


def to_nameless(t: Term) -> tuple:
    return _nl(t, {}, 0)


def _nl(t: Term, env: dict[str, int], depth: int) -> tuple:
    if isinstance(t, Var):
        lvl = env.get(t.name)
        if lvl is None:
            return (FREE, t.name)
        return (VAR, depth - lvl - 1)
    if isinstance(t, App):
        # left spines can be long; walk them iteratively
        fun, args = spine(t)
        out = _nl(fun, env, depth)
        for a in args:
            out = (APP, out, _nl(a, env, depth))
        return out
    if isinstance(t, (Abs, BangAbs)):
        saved = env.get(t.binder)
        env[t.binder] = depth
        body = _nl(t.body, env, depth + 1)
        if saved is None:
            del env[t.binder]
        else:
            env[t.binder] = saved
        return (LAM if isinstance(t, Abs) else BLAM, body, t.binder)
    return (BANG, _nl(t.body, env, depth))


def from_nameless(n: tuple, free: Iterable[str] = ()) -> Term:
    """Rebuild a named term, choosing binder names from the stored hints.

    Names are picked deterministically: the hint, primed until it clashes
    with neither a free variable nor an enclosing binder.
    """
    avoid = set(free) | _nameless_free(n)
    return _fnl(n, [], avoid)


def _nameless_free(n: tuple) -> set[str]:
    out = set()
    stack = [n]
    while stack:
        x = stack.pop()
        tag = x[0]
        if tag == FREE:
            out.add(x[1])
        elif tag == APP:
            stack.append(x[1])
            stack.append(x[2])
        elif tag in (LAM, BLAM, BANG):
            stack.append(x[1])
    return out


def _fnl(n: tuple, names: list[str], avoid: set[str]) -> Term:
    tag = n[0]
    if tag == VAR:
        return Var(names[len(names) - 1 - n[1]])
    if tag == FREE:
        return Var(n[1])
    if tag == APP:
        args = []
        while n[0] == APP:
            args.append(n[2])
            n = n[1]
        out = _fnl(n, names, avoid)
        for a in reversed(args):
            out = App(out, _fnl(a, names, avoid))
        return out
    if tag == BANG:
        return Bang(_fnl(n[1], names, avoid))
    name = fresh_name(n[2] or "x", avoid)
    avoid.add(name)
    names.append(name)
    body = _fnl(n[1], names, avoid)
    names.pop()
    avoid.discard(name)
    return Abs(name, body) if tag == LAM else BangAbs(name, body)


def strip_hints(n: tuple) -> tuple:
    """Nameless form without binder hints, suitable for equality tests."""
    tag = n[0]
    if tag in (VAR, FREE):
        return n
    if tag == APP:
        return (APP, strip_hints(n[1]), strip_hints(n[2]))
    if tag == BANG:
        return (BANG, strip_hints(n[1]))
    return (tag, strip_hints(n[1]))


def alpha_equal(t: Term, u: Term) -> bool:
    return strip_hints(to_nameless(t)) == strip_hints(to_nameless(u))


def rename_apart(t: Term, avoid: Iterable[str] = ()) -> Term:
    """α-rename so that every binder is distinct from every other name."""
    used = set(avoid) | free_vars(t)
    counter = [0]

    def pick(base: str) -> str:
        while True:
            counter[0] += 1
            cand = f"{base}_{counter[0]}"
            if cand not in used:
                used.add(cand)
                return cand

    def go(t: Term, env: dict[str, str]) -> Term:
        if isinstance(t, Var):
            return Var(env.get(t.name, t.name))
        if isinstance(t, App):
            return App(go(t.fun, env), go(t.arg, env))
        if isinstance(t, Bang):
            return Bang(go(t.body, env))
        new = pick(t.binder.split("_")[0] or "x")
        inner = dict(env)
        inner[t.binder] = new
        return type(t)(new, go(t.body, inner), t.annotation)

    return go(t, {})


# ---------------------------------------------------------------------------
# Printing


def show(t: Term, show_type: Callable[[Any], str] = str) -> str:
    """Render in the concrete syntax accepted by :func:`parse_term`."""
    return _show(t, show_type)


def _show(t: Term, st) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, (Abs, BangAbs)):
        head = "\\!" if isinstance(t, BangAbs) else "\\"
        ann = f" : {st(t.annotation)}" if t.annotation is not None else ""
        return f"{head}{t.binder}{ann}. {_show(t.body, st)}"
    if isinstance(t, Bang):
        return "!" + _atom(t.body, st)
    fun, args = spine(t)
    parts = [_atom(fun, st) if not isinstance(fun, Bang) else f"({_show(fun, st)})"]
    parts += [_atom(a, st) for a in args]
    return " ".join(parts)


def _atom(t: Term, st) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Bang):
        return "!" + _atom(t.body, st)
    return f"({_show(t, st)})"


# ---------------------------------------------------------------------------
# Parsing

_TOKEN = re.compile(
    r"\s+|#[^\n]*|(?P<tok>->|-o|\\!|λ!|[\\λ.():!]|'?[A-Za-z_][A-Za-z0-9_'<>]*|[^\s\\λ.():!]+)"
)


def tokenize(text: str) -> list[str]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise TermSyntaxError(f"unexpected character {text[pos]!r} at {pos}")
        if m.group("tok"):
            toks.append(m.group("tok"))
        pos = m.end()
    return toks


class TokenStream:
    def __init__(self, toks: list[str]):
        self.toks = toks
        self.i = 0

    def peek(self) -> Optional[str]:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def next(self) -> str:
        tok = self.peek()
        if tok is None:
            raise TermSyntaxError("unexpected end of input")
        self.i += 1
        return tok

    def expect(self, tok: str) -> None:
        got = self.next()
        if got != tok:
            raise TermSyntaxError(f"expected {tok!r}, got {got!r}")

    def at_end(self) -> bool:
        return self.i >= len(self.toks)


_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_'<>]*$")


def parse_term(
    text: str,
    parse_type: Optional[Callable[[TokenStream], Any]] = None,
    allow_bang: bool = True,
) -> Term:
    """Parse ``t ::= x | \\x[:T]. t | \\!x[:T]. t | t t | !t | (t)``.

    ``parse_type`` consumes an annotation from the token stream; without
    it annotations are rejected.
    """
    ts = TokenStream(tokenize(text))
    t = _parse_seq(ts, parse_type, allow_bang)
    if not ts.at_end():
        raise TermSyntaxError(f"trailing input at {ts.peek()!r}")
    return t


def _starts_atom(tok: Optional[str]) -> bool:
    return tok is not None and (tok in ("(", "!", "\\", "λ", "\\!", "λ!") or bool(_IDENT.match(tok)))


def _parse_seq(ts: TokenStream, pt, allow_bang: bool) -> Term:
    head = _parse_one(ts, pt, allow_bang)
    while _starts_atom(ts.peek()):
        tok = ts.peek()
        arg = _parse_one(ts, pt, allow_bang)
        head = App(head, arg)
        if tok in ("\\", "λ", "\\!", "λ!"):
            break
    return head


def _parse_one(ts: TokenStream, pt, allow_bang: bool) -> Term:
    tok = ts.next()
    if tok in ("\\", "λ", "\\!", "λ!"):
        bang = tok.endswith("!")
        if bang and not allow_bang:
            raise TermSyntaxError("λ! is not part of the simply typed calculus")
        name = ts.next()
        if not _IDENT.match(name):
            raise TermSyntaxError(f"bad binder {name!r}")
        ann = None
        if ts.peek() == ":":
            ts.next()
            if pt is None:
                raise TermSyntaxError("type annotations are not accepted here")
            ann = pt(ts)
        ts.expect(".")
        body = _parse_seq(ts, pt, allow_bang)
        return BangAbs(name, body, ann) if bang else Abs(name, body, ann)
    if tok == "(":
        t = _parse_seq(ts, pt, allow_bang)
        ts.expect(")")
        return t
    if tok == "!":
        if not allow_bang:
            raise TermSyntaxError("'!' is not part of the simply typed calculus")
        return Bang(_parse_one(ts, pt, allow_bang))
    if _IDENT.match(tok):
        return Var(tok)
    raise TermSyntaxError(f"unexpected token {tok!r}")
