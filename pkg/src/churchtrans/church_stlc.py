"""Church encodings in the simply typed calculus.

Decoders never look at the syntax of their argument directly: they apply it
to fresh free variables standing for the letter functions and the base value,
normalize, and read the result.  That makes η-short and non-normal inputs
decode exactly like their η-long normal forms.
"""

from __future__ import annotations

from typing import Iterable, Sequence, Union

from . import reduction
from .reduction import DEFAULT_FUEL
from .stlc_core import O, SimpleType, arrows, power
from .terms import APP, FREE, Abs, App, Term, Var, apps, lams, to_nameless
from .tree_transducers import (
    HOLE,
    LEAF,
    BinTree,
    Hole,
    Leaf,
    Node,
    NodeL,
    NodeR,
    OneHoleTree,
)

Alphabet = tuple[str, ...]
Word = tuple[str, ...]


class SymbolNotInAlphabet(ValueError):
    pass


class NotAStringEncoding(ValueError):
    pass


class NotABoolEncoding(ValueError):
    pass


class NotATreeEncoding(ValueError):
    pass


def alphabet(symbols: Union[str, Iterable[str]]) -> Alphabet:
    syms = tuple(symbols.split() if isinstance(symbols, str) and " " in symbols else symbols)
    if len(set(syms)) != len(syms):
        raise ValueError(f"repeated symbol in alphabet {syms}")
    return syms


def to_word(w: Union[str, Sequence[str]], sigma: Sequence[str] = ()) -> Word:
    """Read a word literal.

    A string is split on whitespace when it contains any, and into single
    characters otherwise.
    """
    if isinstance(w, str):
        w = w.split() if any(c.isspace() for c in w) else list(w)
    w = tuple(w)
    if sigma:
        for c in w:
            if c not in sigma:
                raise SymbolNotInAlphabet(f"{c!r} is not in {list(sigma)}")
    return w


# ---------------------------------------------------------------------------
# Types


def str_type(n: int, base: SimpleType = O) -> SimpleType:
    """``Str_Sigma[base]`` for an alphabet of size ``n``."""
    endo = arrows(base, base)
    return power(endo, n, endo)


def bt_type(n: int, base: SimpleType = O) -> SimpleType:
    return power(arrows(base, base, base), n, arrows(base, base))


def hbt_type(n: int, base: SimpleType = O) -> SimpleType:
    """``dBT = BT -> BT``."""
    bt = bt_type(n, base)
    return arrows(bt, bt)


def bool_type(base: SimpleType = O) -> SimpleType:
    return arrows(base, base, base)


NAT = str_type(1)
BOOL = bool_type()


def letter_names(n: int, prefix: str = "f") -> list[str]:
    return [f"{prefix}{i + 1}" for i in range(n)]


# ---------------------------------------------------------------------------
# Strings


def string_body(w: Word, sigma: Sequence[str], fs: Sequence[str], x: str = "x") -> Term:
    """``f_{i1} (... (f_{in} x))``, with letter variables named by ``fs``."""
    body: Term = Var(x)
    for c in reversed(w):
        try:
            i = sigma.index(c)
        except ValueError:
            raise SymbolNotInAlphabet(f"{c!r} is not in {list(sigma)}") from None
        body = App(Var(fs[i]), body)
    return body


def encode_string(w: Union[str, Sequence[str]], sigma: Sequence[str], annotate: bool = False) -> Term:
    w = to_word(w, sigma)
    fs = letter_names(len(sigma))
    body = string_body(w, sigma, fs)
    if not annotate:
        return lams(fs + ["x"], body)
    endo = arrows(O, O)
    out: Term = Abs("x", body, O)
    for f in reversed(fs):
        out = Abs(f, out, endo)
    return out


def _probe(t: Term, names: Sequence[str], fuel: int) -> tuple:
    n = to_nameless(apps(t, *[Var(v) for v in names]))
    nf, _ = reduction.normalize_normal_order(n, fuel)
    return nf


_F = "%f"
_X = "%x"


def decode_string(t: Term, sigma: Sequence[str], fuel: int = DEFAULT_FUEL) -> Word:
    fs = [f"{_F}{i}" for i in range(len(sigma))]
    nf = _probe(t, fs + [_X], fuel)
    index = {f: i for i, f in enumerate(fs)}
    out = []
    while True:
        if nf == (FREE, _X):
            return tuple(out)
        if nf[0] == APP and nf[1][0] == FREE and nf[1][1] in index:
            out.append(sigma[index[nf[1][1]]])
            nf = nf[2]
            continue
        raise NotAStringEncoding("normal form is not a letter spine ending in the base variable")


def concat_term(u: Term, v: Term, n: int) -> Term:
    """``\\f. \\x. u f (v f x)``."""
    fs = letter_names(n, "g")
    fv = [Var(f) for f in fs]
    return lams(fs + ["y"], apps(u, *fv, apps(v, *fv, Var("y"))))


# ---------------------------------------------------------------------------
# Booleans


TRUE = Abs("x", Abs("y", Var("x")))
FALSE = Abs("x", Abs("y", Var("y")))


def encode_bool(b: bool) -> Term:
    return TRUE if b else FALSE


def decode_bool(t: Term, fuel: int = DEFAULT_FUEL) -> bool:
    nf = _probe(t, ["%t", "%e"], fuel)
    if nf == (FREE, "%t"):
        return True
    if nf == (FREE, "%e"):
        return False
    raise NotABoolEncoding("normal form selects neither argument")


# ---------------------------------------------------------------------------
# Trees


def tree_body(t: BinTree, sigma: Sequence[str], fs: Sequence[str], x: str = "x") -> Term:
    def go(t: BinTree) -> Term:
        if isinstance(t, Leaf):
            return Var(x)
        try:
            i = sigma.index(t.label)
        except ValueError:
            raise SymbolNotInAlphabet(f"{t.label!r} is not in {list(sigma)}") from None
        return App(App(Var(fs[i]), go(t.left)), go(t.right))

    return go(t)


def encode_tree(t: BinTree, sigma: Sequence[str], annotate: bool = False) -> Term:
    fs = letter_names(len(sigma))
    body = tree_body(t, sigma, fs)
    if not annotate:
        return lams(fs + ["x"], body)
    out: Term = Abs("x", body, O)
    for f in reversed(fs):
        out = Abs(f, out, arrows(O, O, O))
    return out


def decode_tree(t: Term, sigma: Sequence[str], fuel: int = DEFAULT_FUEL) -> BinTree:
    fs = [f"{_F}{i}" for i in range(len(sigma))]
    nf = _probe(t, fs + [_X], fuel)
    index = {f: i for i, f in enumerate(fs)}

    def go(n: tuple) -> BinTree:
        if n == (FREE, _X):
            return LEAF
        if n[0] == APP and n[1][0] == APP and n[1][1][0] == FREE and n[1][1][1] in index:
            return Node(sigma[index[n[1][1][1]]], go(n[1][2]), go(n[2]))
        raise NotATreeEncoding("normal form is not built from node functions and the leaf variable")

    return go(nf)


def encode_hole_tree(t: OneHoleTree, sigma: Sequence[str]) -> Term:
    """``\\z. \\f. \\x. ...`` with the hole filled by ``z f x``."""
    fs = letter_names(len(sigma))
    fv = [Var(f) for f in fs]

    def go(t) -> Term:
        if isinstance(t, Hole):
            return apps(Var("z"), *fv, Var("x"))
        if isinstance(t, (NodeL, NodeR)):
            i = sigma.index(t.label)
            other = tree_body(t.other, sigma, fs)
            if isinstance(t, NodeL):
                return apps(Var(fs[i]), go(t.hole), other)
            return apps(Var(fs[i]), other, go(t.hole))
        raise TypeError(t)

    return Abs("z", lams(fs + ["x"], go(t)))


def decode_hole_tree(t: Term, sigma: Sequence[str], fuel: int = DEFAULT_FUEL) -> OneHoleTree:
    """Inverse of the hole encoding: probe with a marker tree for the hole."""
    marker = "%hole"
    fs = [f"{_F}{i}" for i in range(len(sigma))]
    # stands for the hole: swallows the letter and base arguments
    probe = lams([f"%p{i}" for i in range(len(sigma))] + ["%py"], Var(marker))
    n = to_nameless(apps(t, probe, *[Var(v) for v in fs + [_X]]))
    nf, _ = reduction.normalize_normal_order(n, fuel)
    index = {f: i for i, f in enumerate(fs)}

    def tree(n: tuple) -> BinTree:
        if n == (FREE, _X):
            return LEAF
        if n[0] == APP and n[1][0] == APP and n[1][1][0] == FREE and n[1][1][1] in index:
            return Node(sigma[index[n[1][1][1]]], tree(n[1][2]), tree(n[2]))
        raise NotATreeEncoding("not a tree")

    def has_marker(n: tuple) -> bool:
        if n == (FREE, marker):
            return True
        return n[0] == APP and (has_marker(n[1]) or has_marker(n[2]))

    def go(n: tuple) -> OneHoleTree:
        if n == (FREE, marker):
            return HOLE
        if n[0] == APP and n[1][0] == APP and n[1][1][0] == FREE and n[1][1][1] in index:
            label = sigma[index[n[1][1][1]]]
            left, right = n[1][2], n[2]
            if has_marker(left) and not has_marker(right):
                return NodeL(label, go(left), tree(right))
            if has_marker(right) and not has_marker(left):
                return NodeR(label, tree(left), go(right))
        raise NotATreeEncoding("not a one-hole tree")

    return go(nf)
