"""Simply typed λ-calculus: types, substitution, normalization, inference."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence, Union

from . import reduction
from .reduction import DEFAULT_FUEL, FuelExhausted
from .terms import (
    Abs,
    App,
    Bang,
    BangAbs,
    Term,
    TermSyntaxError,
    TokenStream,
    Var,
    free_vars,
    fresh_name,
    from_nameless,
    parse_term,
    show,
    strip_hints,
    to_nameless,
    tokenize,
)

__all__ = [
    "Base",
    "Arrow",
    "TypeVar",
    "SimpleType",
    "O",
    "arrows",
    "power",
    "show_type",
    "parse_type",
    "type_substitute",
    "parse",
    "pretty",
    "substitute",
    "beta_normalize",
    "beta_step",
    "alpha_eta_equal",
    "infer_type",
    "check_type",
    "ground",
    "NotTypable",
    "FuelExhausted",
]


# ---------------------------------------------------------------------------
# Types


@dataclass(frozen=True, slots=True)
class Base:
    def __str__(self) -> str:
        return "o"


@dataclass(frozen=True, slots=True)
class Arrow:
    dom: "SimpleType"
    cod: "SimpleType"

    def __str__(self) -> str:
        return show_type(self)


@dataclass(frozen=True, slots=True)
class TypeVar:
    """Only produced by inference (principal types); never by users."""

    name: str

    def __str__(self) -> str:
        return "'" + self.name


SimpleType = Union[Base, Arrow, TypeVar]
O = Base()


def arrows(*types: SimpleType) -> SimpleType:
    """``arrows(A, B, C)`` is ``A -> B -> C``."""
    out = types[-1]
    for t in reversed(types[:-1]):
        out = Arrow(t, out)
    return out


def power(a: SimpleType, n: int, b: SimpleType) -> SimpleType:
    """``A^n -> B``."""
    return arrows(*([a] * n), b)


def show_type(a: SimpleType, names: Optional[Mapping[int, str]] = None) -> str:
    """``names`` maps ``id`` of (shared) subtypes to abbreviations printed instead."""
    if names and id(a) in names:
        return names[id(a)]
    if isinstance(a, Arrow):
        dom = show_type(a.dom, names)
        if isinstance(a.dom, Arrow) and not (names and id(a.dom) in names):
            dom = f"({dom})"
        return f"{dom} -> {show_type(a.cod, names)}"
    return str(a)


def abbreviations(roots: Sequence[SimpleType], min_size: int = 8) -> tuple[list[tuple[str, SimpleType]], dict[int, str]]:
    """Names ``T1, T2, ...`` for the subtypes worth sharing.

    ``roots`` must already be hash-consed (see :class:`TypeInterner`) so that
    equal subtypes are the same object.  A subtype gets a name when it is
    referenced more than once and has at least ``min_size`` arrows.  The
    definitions come children first.
    """
    refs: dict[int, int] = {}
    arrows_in: dict[int, int] = {}
    order: list[SimpleType] = []

    def visit(a: SimpleType) -> None:
        refs[id(a)] = refs.get(id(a), 0) + 1
        if refs[id(a)] > 1 or not isinstance(a, Arrow):
            return
        visit(a.dom)
        visit(a.cod)
        arrows_in[id(a)] = 1 + arrows_in.get(id(a.dom), 0) + arrows_in.get(id(a.cod), 0)
        order.append(a)

    for r in roots:
        visit(r)
    names: dict[int, str] = {}
    defs = []
    for a in order:
        if refs[id(a)] > 1 and arrows_in[id(a)] >= min_size:
            body = show_type(a, names)
            names[id(a)] = f"T{len(defs) + 1}"
            defs.append((names[id(a)], body))
    return defs, names


def _parse_type_stream(ts: TokenStream, env: Optional[Mapping[str, SimpleType]] = None) -> SimpleType:
    left = _parse_type_atom(ts, env)
    if ts.peek() == "->":
        ts.next()
        return Arrow(left, _parse_type_stream(ts, env))
    return left


def _parse_type_atom(ts: TokenStream, env: Optional[Mapping[str, SimpleType]]) -> SimpleType:
    tok = ts.next()
    if tok == "o":
        return O
    if tok == "(":
        a = _parse_type_stream(ts, env)
        ts.expect(")")
        return a
    if tok.startswith("'") and len(tok) > 1:
        return TypeVar(tok[1:])
    if env is not None and tok in env:
        return env[tok]
    raise TermSyntaxError(f"bad simple type token {tok!r}")


def parse_type(text: str, env: Optional[Mapping[str, SimpleType]] = None) -> SimpleType:
    """``env`` resolves abbreviations; each use returns the same object."""
    ts = TokenStream(tokenize(text))
    a = _parse_type_stream(ts, env)
    if not ts.at_end():
        raise TermSyntaxError(f"trailing input in type at {ts.peek()!r}")
    return a


def type_substitute(a: SimpleType, b: SimpleType, memo: Optional[dict] = None) -> SimpleType:
    """``A[B]``: replace every occurrence of the base type by ``B``.

    Shared subterms of ``a`` stay shared in the result; pass the same
    ``memo`` to several calls with the same ``b`` to share across them.
    """
    if isinstance(a, Base):
        return b
    if not isinstance(a, Arrow):
        return a
    memo = {} if memo is None else memo
    hit = memo.get(id(a))
    if hit is None:
        hit = memo[id(a)] = (a, Arrow(type_substitute(a.dom, b, memo), type_substitute(a.cod, b, memo)))
    return hit[1]


def ground(a: SimpleType) -> SimpleType:
    """Instantiate every type variable at ``o``."""
    if isinstance(a, TypeVar):
        return O
    if isinstance(a, Arrow):
        return Arrow(ground(a.dom), ground(a.cod))
    return a


# ---------------------------------------------------------------------------
# Terms


def parse(text: str, env: Optional[Mapping[str, SimpleType]] = None) -> Term:
    return parse_term(text, lambda ts: _parse_type_stream(ts, env), allow_bang=False)


def pretty(t: Term, show_annotation=show_type) -> str:
    return show(t, show_annotation)


def _check_stlc(t: Term) -> None:
    if isinstance(t, (Bang, BangAbs)):
        raise TypeError("exponential constructs are not simply typed terms")


def substitute(t: Term, x: str, u: Term) -> Term:
    """Capture-avoiding ``t{x := u}``."""
    fv_u = free_vars(u)

    def go(t: Term) -> Term:
        if isinstance(t, Var):
            return u if t.name == x else t
        if isinstance(t, App):
            return App(go(t.fun), go(t.arg))
        _check_stlc(t)
        if t.binder == x:
            return t
        binder, body = t.binder, t.body
        if binder in fv_u and x in free_vars(body):
            new = fresh_name(binder, fv_u | free_vars(body) | {x})
            body = substitute(body, binder, Var(new))
            binder = new
        return Abs(binder, go(body), t.annotation)

    return go(t)


def beta_normalize(t: Term, fuel: int = DEFAULT_FUEL, strategy: str = "normal") -> Term:
    """β-normal form.

    ``strategy="normal"`` follows leftmost-outermost reduction;
    ``strategy="nbe"`` evaluates by value and reads back.  Both raise
    :class:`FuelExhausted` past ``fuel`` contractions.
    """
    n = to_nameless(t)
    if strategy == "normal":
        nf, _ = reduction.normalize_normal_order(n, fuel)
    elif strategy == "nbe":
        nf, _ = reduction.normalize_nbe(n, fuel)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    return from_nameless(nf)


def beta_step(t: Term) -> Optional[Term]:
    """One leftmost-outermost β-step, or ``None`` if ``t`` is normal."""
    r = reduction.step(to_nameless(t))
    return None if r is None else from_nameless(r[0])


def alpha_eta_equal(t: Term, u: Term) -> bool:
    """Equality of β-normal terms up to α-renaming and η."""
    a = strip_hints(reduction.eta_contract(to_nameless(t)))
    b = strip_hints(reduction.eta_contract(to_nameless(u)))
    return a == b


# ---------------------------------------------------------------------------
# Inference


class NotTypable(TypeError):
    pass


class _Unifier:
    def __init__(self):
        self.subst: dict[str, SimpleType] = {}
        self.counter = itertools.count()

    def fresh(self) -> TypeVar:
        return TypeVar(f"?{next(self.counter)}")

    def resolve(self, a: SimpleType) -> SimpleType:
        while isinstance(a, TypeVar) and a.name in self.subst:
            a = self.subst[a.name]
        return a

    def zonk(self, a: SimpleType) -> SimpleType:
        a = self.resolve(a)
        if isinstance(a, Arrow):
            return Arrow(self.zonk(a.dom), self.zonk(a.cod))
        return a

    def occurs(self, name: str, a: SimpleType) -> bool:
        # types share subterms heavily, so visit each node once
        stack, seen = [a], set()
        while stack:
            b = self.resolve(stack.pop())
            if id(b) in seen:
                continue
            seen.add(id(b))
            if isinstance(b, TypeVar):
                if b.name == name:
                    return True
            elif isinstance(b, Arrow):
                stack.append(b.dom)
                stack.append(b.cod)
        return False

    def unify(self, a: SimpleType, b: SimpleType) -> None:
        stack = [(a, b)]
        while stack:
            a, b = stack.pop()
            a, b = self.resolve(a), self.resolve(b)
            if a == b:
                continue
            if isinstance(a, TypeVar) and a.name.startswith("?"):
                self._bind(a, b)
            elif isinstance(b, TypeVar) and b.name.startswith("?"):
                self._bind(b, a)
            elif isinstance(a, Arrow) and isinstance(b, Arrow):
                stack.append((a.dom, b.dom))
                stack.append((a.cod, b.cod))
            else:
                raise NotTypable(f"cannot unify {show_type(self.zonk(a))} with {show_type(self.zonk(b))}")

    def _bind(self, v: TypeVar, a: SimpleType) -> None:
        if self.occurs(v.name, a):
            raise NotTypable(f"occurs check: {v} in {show_type(self.zonk(a))}")
        self.subst[v.name] = a


def _infer(u: _Unifier, ctx: dict[str, SimpleType], t: Term) -> SimpleType:
    if isinstance(t, Var):
        if t.name not in ctx:
            raise NotTypable(f"unbound variable {t.name}")
        return ctx[t.name]
    if isinstance(t, App):
        tf = _infer(u, ctx, t.fun)
        ta = _infer(u, ctx, t.arg)
        r = u.fresh()
        u.unify(tf, Arrow(ta, r))
        return r
    _check_stlc(t)
    dom = t.annotation if t.annotation is not None else u.fresh()
    saved = ctx.get(t.binder, _MISSING)
    ctx[t.binder] = dom
    try:
        cod = _infer(u, ctx, t.body)
    finally:
        if saved is _MISSING:
            del ctx[t.binder]
        else:
            ctx[t.binder] = saved
    return Arrow(dom, cod)


_MISSING = object()


def _canonical(a: SimpleType) -> SimpleType:
    names: dict[str, TypeVar] = {}
    letters = (chr(c) for c in itertools.chain(range(ord("a"), ord("z") + 1)))
    extra = itertools.count()

    def go(a):
        if isinstance(a, TypeVar):
            if a.name not in names:
                nxt = next(letters, None)
                names[a.name] = TypeVar(nxt if nxt else f"t{next(extra)}")
            return names[a.name]
        if isinstance(a, Arrow):
            return Arrow(go(a.dom), go(a.cod))
        return a

    return go(a)


def infer_type(ctx: Mapping[str, SimpleType], t: Term) -> SimpleType:
    """Principal type of ``t`` under ``ctx``; type variables print as ``'a``."""
    u = _Unifier()
    return _canonical(u.zonk(_infer(u, dict(ctx), t)))


class _Unannotated(Exception):
    pass


class TypeInterner:
    """Hash-consing, so that equal types become the same object."""

    def __init__(self):
        self.table: dict = {}
        self.memo: dict[int, tuple] = {}

    def __call__(self, a: SimpleType) -> SimpleType:
        hit = self.memo.get(id(a))
        if hit is not None:
            return hit[1]
        if isinstance(a, Arrow):
            out = self.arrow(self(a.dom), self(a.cod))
        else:
            out = self.table.setdefault(a, a)
        self.memo[id(a)] = (a, out)
        return out

    def arrow(self, dom: SimpleType, cod: SimpleType) -> SimpleType:
        return self.table.setdefault(("->", id(dom), id(cod)), Arrow(dom, cod))


def _synth(ic: TypeInterner, ctx: dict, t: Term) -> SimpleType:
    if isinstance(t, Var):
        if t.name not in ctx:
            raise NotTypable(f"unbound variable {t.name}")
        return ctx[t.name]
    if isinstance(t, App):
        f = _synth(ic, ctx, t.fun)
        if not isinstance(f, Arrow):
            raise NotTypable(f"{show_type(f)} is not a function type")
        if _synth(ic, ctx, t.arg) is not f.dom:
            raise NotTypable("argument type mismatch")
        return f.cod
    _check_stlc(t)
    if t.annotation is None:
        raise _Unannotated
    dom = ic(t.annotation)
    saved = ctx.get(t.binder, _MISSING)
    ctx[t.binder] = dom
    try:
        cod = _synth(ic, ctx, t.body)
    finally:
        if saved is _MISSING:
            del ctx[t.binder]
        else:
            ctx[t.binder] = saved
    return ic.arrow(dom, cod)


def check_type(ctx: Mapping[str, SimpleType], t: Term, a: SimpleType) -> bool:
    """Does ``t`` admit ``a``?  Strict: no η-coercion."""
    if not any(_has_meta(b) for b in ctx.values()):
        # fully annotated terms have exactly one type; no unification needed
        ic = TypeInterner()
        try:
            return _synth(ic, {x: ic(b) for x, b in ctx.items()}, t) is ic(a)
        except NotTypable:
            return False
        except _Unannotated:
            pass
    u = _Unifier()
    try:
        u.unify(_infer(u, dict(ctx), t), a)
    except NotTypable:
        return False
    return True


def _has_meta(a: SimpleType) -> bool:
    return isinstance(a, TypeVar) and a.name.startswith("?") or (
        isinstance(a, Arrow) and (_has_meta(a.dom) or _has_meta(a.cod)))
