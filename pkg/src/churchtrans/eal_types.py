"""Types of the elementary affine calculus.

::

    A ::= a | S              (linear)
    S ::= s -o t | forall a. S   (strictly linear)
    s, t ::= A | !s

Concrete syntax: type variables are ``'a`` (or bare identifiers), ``-o`` is
right-associative, ``!`` binds tighter than ``-o``, and ``forall 'a. T``
extends as far right as possible.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Union

from .terms import TermSyntaxError, TokenStream, tokenize


@dataclass(frozen=True, slots=True)
class TVar:
    name: str

    def __str__(self) -> str:
        return show_type(self)


@dataclass(frozen=True, slots=True)
class Lolli:
    dom: "EalType"
    cod: "EalType"

    def __str__(self) -> str:
        return show_type(self)


@dataclass(frozen=True, slots=True)
class Forall:
    var: str
    body: "EalType"

    def __post_init__(self):
        if not is_strictly_linear(self.body):
            raise TypeError(f"the body of forall {self.var} must be strictly linear, got {show_type(self.body)}")

    def __str__(self) -> str:
        return show_type(self)


@dataclass(frozen=True, slots=True)
class OfCourse:
    """``!s``."""

    body: "EalType"

    def __str__(self) -> str:
        return show_type(self)


EalType = Union[TVar, Lolli, Forall, OfCourse]


def is_strictly_linear(t: EalType) -> bool:
    return isinstance(t, (Lolli, Forall))


def is_linear(t: EalType) -> bool:
    return isinstance(t, TVar) or is_strictly_linear(t)


def lollis(*types: EalType) -> EalType:
    out = types[-1]
    for t in reversed(types[:-1]):
        out = Lolli(t, out)
    return out


def lolli_power(a: EalType, n: int, b: EalType) -> EalType:
    return lollis(*([a] * n), b)


# ---------------------------------------------------------------------------
# Variables and substitution


def free_type_vars(t: EalType) -> frozenset[str]:
    if isinstance(t, TVar):
        return frozenset([t.name])
    if isinstance(t, Lolli):
        return free_type_vars(t.dom) | free_type_vars(t.cod)
    if isinstance(t, OfCourse):
        return free_type_vars(t.body)
    return free_type_vars(t.body) - {t.var}


def all_type_vars(t: EalType) -> set[str]:
    if isinstance(t, TVar):
        return {t.name}
    if isinstance(t, Lolli):
        return all_type_vars(t.dom) | all_type_vars(t.cod)
    if isinstance(t, OfCourse):
        return all_type_vars(t.body)
    return all_type_vars(t.body) | {t.var}


def fresh_type_var(base: str, avoid: Iterable[str]) -> str:
    avoid = set(avoid)
    if base not in avoid:
        return base
    root = base.rstrip("0123456789")
    for i in itertools.count(1):
        cand = f"{root}{i}"
        if cand not in avoid:
            return cand
    raise AssertionError


def subst_type(t: EalType, var: str, a: EalType) -> EalType:
    """Capture-avoiding ``t{var := a}``."""
    if isinstance(t, TVar):
        return a if t.name == var else t
    if isinstance(t, Lolli):
        return Lolli(subst_type(t.dom, var, a), subst_type(t.cod, var, a))
    if isinstance(t, OfCourse):
        return OfCourse(subst_type(t.body, var, a))
    if t.var == var or var not in free_type_vars(t.body):
        return t
    fv = free_type_vars(a)
    if t.var in fv:
        new = fresh_type_var(t.var, fv | all_type_vars(t.body) | {var})
        return Forall(new, subst_type(subst_type(t.body, t.var, TVar(new)), var, a))
    return Forall(t.var, subst_type(t.body, var, a))


def _nameless(t: EalType, bound: tuple) -> tuple:
    if isinstance(t, TVar):
        for i, b in enumerate(bound):
            if b == t.name:
                return ("b", i)
        return ("f", t.name)
    if isinstance(t, Lolli):
        return ("-o", _nameless(t.dom, bound), _nameless(t.cod, bound))
    if isinstance(t, OfCourse):
        return ("!", _nameless(t.body, bound))
    return ("all", _nameless(t.body, (t.var,) + bound))


def type_key(t: EalType) -> tuple:
    """Hashable key identifying ``t`` up to renaming of bound variables."""
    return _nameless(t, ())


def types_equal(a: EalType, b: EalType) -> bool:
    return a == b or type_key(a) == type_key(b)


# ---------------------------------------------------------------------------
# Printing and parsing


def _var(name: str) -> str:
    return "'" + name


def show_type(t: EalType) -> str:
    if isinstance(t, TVar):
        return _var(t.name)
    if isinstance(t, OfCourse):
        return "!" + _show_atom(t.body)
    if isinstance(t, Forall):
        return f"forall {_var(t.var)}. {show_type(t.body)}"
    dom = show_type(t.dom)
    if isinstance(t.dom, (Lolli, Forall)):
        dom = f"({dom})"
    return f"{dom} -o {show_type(t.cod)}"


def _show_atom(t: EalType) -> str:
    if isinstance(t, (TVar, OfCourse)):
        return show_type(t)
    return f"({show_type(t)})"


def parse_type_stream(ts: TokenStream) -> EalType:
    if ts.peek() in ("forall", "∀"):
        ts.next()
        name = _var_name(ts.next())
        ts.expect(".")
        return Forall(name, parse_type_stream(ts))
    left = _parse_prefix(ts)
    if ts.peek() == "-o":
        ts.next()
        return Lolli(left, parse_type_stream(ts))
    return left


def _parse_prefix(ts: TokenStream) -> EalType:
    tok = ts.peek()
    if tok == "!":
        ts.next()
        return OfCourse(_parse_prefix(ts))
    if tok == "(":
        ts.next()
        t = parse_type_stream(ts)
        ts.expect(")")
        return t
    return TVar(_var_name(ts.next()))


def _var_name(tok: str) -> str:
    name = tok[1:] if tok.startswith("'") else tok
    if not name or not (name[0].isalpha() or name[0] == "_") or name in ("forall", "-o"):
        raise TermSyntaxError(f"bad type variable {tok!r}")
    return name


def parse_type(text: str) -> EalType:
    ts = TokenStream(tokenize(text))
    t = parse_type_stream(ts)
    if not ts.at_end():
        raise TermSyntaxError(f"trailing input in type at {ts.peek()!r}")
    return t


# ---------------------------------------------------------------------------
# Standard types


ALPHA = TVar("a")


def endo(a: EalType) -> EalType:
    return Lolli(a, a)


def fin_type(n: int, var: str = "b") -> EalType:
    """``Fin(n) = forall b. b^n -o b``."""
    return Forall(var, lolli_power(TVar(var), n, TVar(var)))


def str_type_at(n: int, a: EalType) -> EalType:
    """``Str_Sigma[a] = !(a -o a)^n -o !(a -o a)``."""
    return lolli_power(OfCourse(endo(a)), n, OfCourse(endo(a)))


def str_type(n: int) -> EalType:
    return Forall("a", str_type_at(n, ALPHA))


def bt_type_at(n: int, a: EalType) -> EalType:
    """``BT_Sigma[a] = !(a -o a -o a)^n -o !a -o !a``."""
    return lolli_power(OfCourse(lollis(a, a, a)), n, Lolli(OfCourse(a), OfCourse(a)))


def bt_type(n: int) -> EalType:
    return Forall("a", bt_type_at(n, ALPHA))


def _fresh_for(types: Iterable[EalType], base: str) -> str:
    used: set[str] = set()
    for t in types:
        used |= all_type_vars(t)
    return fresh_type_var(base, used)


def tensor_type(components: Iterable[EalType]) -> EalType:
    """``A1 (x) ... (x) Am = forall b. (A1 -o ... -o Am -o b) -o b``."""
    comps = list(components)
    b = _fresh_for(comps, "b")
    return Forall(b, Lolli(lollis(*comps, TVar(b)), TVar(b)))


def with_type(components: Iterable[EalType]) -> EalType:
    """``A1 & ... & Am = forall c. (forall b. b -o (b -o A1) -o ... -o (b -o Am) -o c) -o c``."""
    comps = list(components)
    c = _fresh_for(comps, "c")
    b = fresh_type_var("b", {c} | set().union(*[all_type_vars(t) for t in comps]))
    inner = Forall(b, lollis(TVar(b), *[Lolli(TVar(b), a) for a in comps], TVar(c)))
    return Forall(c, Lolli(inner, TVar(c)))
