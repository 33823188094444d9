"""Typing derivations for the elementary affine calculus.

Judgements have three zones, ``Gamma | Delta | Theta |- t : T``: ``Gamma``
holds affine variables of linear type, ``Delta`` holds variables bound by
``\\!`` (always of type ``!s``), and ``Theta`` holds the unboxed copies of
``Delta`` that are visible inside a promotion.

Rules, by the names used in derivation trees:

``ax-lin``   ``Gamma, x:A | Delta | Theta |- x : A``
``ax-temp``  ``Gamma | Delta | Theta, x:s |- x : s``
``lam``      from ``Gamma, x:A | Delta | Theta |- t : T`` derive ``\\x. t : A -o T``
``lam!``     from ``Gamma | Delta, x:!s | Theta |- t : T`` derive ``\\!x. t : !s -o T``
``app``      splits ``Gamma`` between function and argument, shares the rest
``forall-i`` generalizes a variable not free in any zone
``forall-e`` instantiates at a linear type
``prom``     from ``. | . | Theta0 |- t : s`` derive ``Gamma | !Theta0, Delta | Theta' |- !t : !s``

:func:`elaborate` builds derivations; :func:`check_derivation` re-checks
every node against the rules without trusting the elaborator.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Optional

from .eal_types import (
    EalType,
    Forall,
    Lolli,
    OfCourse,
    TVar,
    free_type_vars,
    fresh_type_var,
    is_linear,
    parse_type,
    show_type,
    subst_type,
    types_equal,
)
from .terms import Abs, App, Bang, BangAbs, Term, Var, free_vars, show

RULES = ("ax-lin", "ax-temp", "lam", "lam!", "app", "forall-i", "forall-e", "prom")


class EalTypeError(ValueError):
    """The term has no derivation (or the elaborator could not find one)."""


@dataclass(frozen=True, slots=True)
class Ann:
    """Elaboration-only ascription ``(t : T)``; erased from derivations."""

    term: object
    type: EalType


def erase(t) -> Term:
    if isinstance(t, Ann):
        return erase(t.term)
    if isinstance(t, Var):
        return t
    if isinstance(t, App):
        return App(erase(t.fun), erase(t.arg))
    if isinstance(t, Bang):
        return Bang(erase(t.body))
    return type(t)(t.binder, erase(t.body), t.annotation)


Zone = dict  # name -> EalType, treated as immutable once built


@dataclass(slots=True, eq=False)
class Derivation:
    rule: str
    gamma: Zone
    delta: Zone
    theta: Zone
    term: Term
    type: EalType
    premises: tuple = ()
    inst: Optional[EalType] = None  # the instantiating type of forall-e

    def size(self) -> int:
        n, stack = 0, [self]
        while stack:
            d = stack.pop()
            n += 1
            stack.extend(d.premises)
        return n

    def judgement(self) -> str:
        def zone(z):
            return ", ".join(f"{x}:{show_type(t)}" for x, t in z.items())

        return f"{zone(self.gamma)} | {zone(self.delta)} | {zone(self.theta)} |- {show(self.term, show_type)} : {show_type(self.type)}"


# ---------------------------------------------------------------------------
# Checking


@dataclass
class DerivationReport:
    ok: bool
    path: tuple = ()
    problem: str = ""

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        if self.ok:
            return "derivation ok"
        return f"bad node at {'/'.join(self.path) or 'root'}: {self.problem}"


class _Bad(Exception):
    pass


def _zone_eq(a: Zone, b: Zone) -> bool:
    if a is b:
        return True
    if a.keys() != b.keys():
        return False
    return all(types_equal(t, b[x]) for x, t in a.items())


def _ctx_ftv(d: Derivation) -> set[str]:
    out: set[str] = set()
    for z in (d.gamma, d.delta, d.theta):
        for t in z.values():
            out |= free_type_vars(t)
    return out


def _same_term(a: Term, b: Term) -> bool:
    return a is b or a == b


def _check_node(d: Derivation) -> None:
    def need(cond: bool, msg: str) -> None:
        if not cond:
            raise _Bad(msg)

    g, dl, th = d.gamma, d.delta, d.theta
    need(not (g.keys() & dl.keys() or g.keys() & th.keys() or dl.keys() & th.keys()), "zones overlap")
    for x, t in g.items():
        need(is_linear(t), f"{x} in the affine zone has non-linear type {show_type(t)}")
    for x, t in dl.items():
        need(isinstance(t, OfCourse), f"{x} in the ! zone has type {show_type(t)}")
    ps, t, ty = d.premises, d.term, d.type
    arity = {"ax-lin": 0, "ax-temp": 0, "app": 2}.get(d.rule, 1)
    need(d.rule in RULES, f"unknown rule {d.rule!r}")
    need(len(ps) == arity, f"{d.rule} takes {arity} premises, got {len(ps)}")
    r = d.rule
    if r in ("ax-lin", "ax-temp"):
        need(isinstance(t, Var), "axiom on a non-variable")
        z = g if r == "ax-lin" else th
        need(t.name in z, f"{t.name} is not in the {'affine' if r == 'ax-lin' else 'temporary'} zone")
        need(types_equal(z[t.name], ty), f"{t.name} has type {show_type(z[t.name])}, not {show_type(ty)}")
        return
    if r in ("lam", "lam!"):
        p = ps[0]
        need(isinstance(t, Abs if r == "lam" else BangAbs), f"{r} on the wrong kind of term")
        need(isinstance(ty, Lolli), f"{r} concludes a non-arrow type")
        x = t.binder
        need(x not in g and x not in dl and x not in th, f"binder {x} already in context")
        if t.annotation is not None:
            need(types_equal(t.annotation, ty.dom), f"annotation on {x} disagrees with the domain")
        need(_same_term(p.term, t.body), "premise is not about the body")
        need(types_equal(p.type, ty.cod), "premise type is not the codomain")
        need(_zone_eq(p.theta, th), "temporary zone changed")
        if r == "lam":
            need(is_linear(ty.dom), f"{x} bound by \\ must have linear type")
            need(_zone_eq(p.delta, dl), "! zone changed")
            need(p.gamma.keys() == g.keys() | {x}, "affine zone is not extended by the binder")
            need(types_equal(p.gamma[x], ty.dom), f"premise gives {x} the wrong type")
            need(all(types_equal(p.gamma[y], s) for y, s in g.items()), "affine zone changed")
        else:
            need(isinstance(ty.dom, OfCourse), f"{x} bound by \\! must have a ! type")
            need(_zone_eq(p.gamma, g), "affine zone changed")
            need(p.delta.keys() == dl.keys() | {x}, "! zone is not extended by the binder")
            need(types_equal(p.delta[x], ty.dom), f"premise gives {x} the wrong type")
            need(all(types_equal(p.delta[y], s) for y, s in dl.items()), "! zone changed")
        return
    if r == "app":
        pf, pa = ps
        need(isinstance(t, App), "app on a non-application")
        need(_same_term(pf.term, t.fun) and _same_term(pa.term, t.arg), "premises are not about the two halves")
        need(isinstance(pf.type, Lolli), "function premise is not an arrow")
        need(types_equal(pf.type.dom, pa.type), "argument type does not match the domain")
        need(types_equal(pf.type.cod, ty), "conclusion is not the codomain")
        for p in ps:
            need(_zone_eq(p.delta, dl) and _zone_eq(p.theta, th), "shared zones differ between premises")
        need(not (pf.gamma.keys() & pa.gamma.keys()), "affine variables used on both sides")
        need(pf.gamma.keys() | pa.gamma.keys() == g.keys(), "affine zone is not the union of the premises")
        for p in ps:
            need(all(types_equal(s, g[y]) for y, s in p.gamma.items()), "affine types differ")
        return
    p = ps[0]
    if r in ("forall-i", "forall-e"):
        need(_same_term(p.term, t), f"{r} changes the term")
        need(_zone_eq(p.gamma, g) and _zone_eq(p.delta, dl) and _zone_eq(p.theta, th), f"{r} changes the context")
        if r == "forall-i":
            need(isinstance(ty, Forall), "forall-i concludes a non-quantified type")
            need(types_equal(p.type, ty.body), "premise type is not the body")
            need(ty.var not in _ctx_ftv(d), f"{ty.var} is free in the context")
        else:
            need(isinstance(p.type, Forall), "forall-e on a non-quantified type")
            need(d.inst is not None and is_linear(d.inst), "forall-e must instantiate at a linear type")
            need(types_equal(subst_type(p.type.body, p.type.var, d.inst), ty), "instance does not match")
        return
    # prom
    need(isinstance(t, Bang), "prom on a non-! term")
    need(_same_term(p.term, t.body), "premise is not about the boxed term")
    need(not p.gamma and not p.delta, "promotion premise must have empty affine and ! zones")
    for x, s in p.theta.items():
        need(x in dl and types_equal(dl[x], OfCourse(s)), f"{x} is not available as !{show_type(s)}")
    need(isinstance(ty, OfCourse) and types_equal(ty.body, p.type), "conclusion is not ! of the premise")


def check_derivation(d: Derivation, term: Optional[Term] = None, type: Optional[EalType] = None) -> DerivationReport:
    """Check every node of ``d``; optionally also its subject and type."""
    if term is not None:
        from .terms import alpha_equal

        if not alpha_equal(d.term, term):
            return DerivationReport(False, (), "derivation is about a different term")
    if type is not None and not types_equal(d.type, type):
        return DerivationReport(False, (), f"derivation concludes {show_type(d.type)}, not {show_type(type)}")
    stack = [(d, ())]
    while stack:
        node, path = stack.pop()
        try:
            _check_node(node)
        except _Bad as e:
            return DerivationReport(False, path, str(e))
        for i, p in enumerate(node.premises):
            stack.append((p, path + (f"{i}:{p.rule}",)))
    return DerivationReport(True)


# ---------------------------------------------------------------------------
# Elaboration, phase 1: types with metavariables


_ids = itertools.count()


class _Meta:
    __slots__ = ("id", "linear", "ref")

    def __init__(self, linear: bool):
        self.id = next(_ids)
        self.linear = linear
        self.ref = None


def _walk(t):
    while isinstance(t, _Meta) and t.ref is not None:
        t = t.ref
    return t


def _zonk(t):
    t = _walk(t)
    if isinstance(t, _Meta):
        # never constrained: any type will do
        t.ref = TVar(f"u{t.id}")
        return t.ref
    if isinstance(t, TVar):
        return t
    if isinstance(t, Lolli):
        return Lolli(_zonk(t.dom), _zonk(t.cod))
    if isinstance(t, OfCourse):
        return OfCourse(_zonk(t.body))
    return Forall(t.var, _zonk(t.body))


def _resolved(t):
    """Resolve bound metas, leaving unbound ones in place."""
    t = _walk(t)
    if isinstance(t, (TVar, _Meta)):
        return t
    if isinstance(t, Lolli):
        return Lolli(_resolved(t.dom), _resolved(t.cod))
    if isinstance(t, OfCourse):
        return OfCourse(_resolved(t.body))
    return Forall(t.var, _resolved(t.body))


def _ftv(t) -> set[str]:
    t = _walk(t)
    if isinstance(t, _Meta):
        return set()
    if isinstance(t, TVar):
        return {t.name}
    if isinstance(t, Lolli):
        return _ftv(t.dom) | _ftv(t.cod)
    if isinstance(t, OfCourse):
        return _ftv(t.body)
    return _ftv(t.body) - {t.var}


def _allv(t) -> set[str]:
    t = _walk(t)
    if isinstance(t, _Meta):
        return set()
    if isinstance(t, TVar):
        return {t.name}
    if isinstance(t, Lolli):
        return _allv(t.dom) | _allv(t.cod)
    if isinstance(t, OfCourse):
        return _allv(t.body)
    return _allv(t.body) | {t.var}


def _subst(t, var: str, a):
    t = _walk(t)
    if isinstance(t, _Meta):
        return t
    if isinstance(t, TVar):
        return a if t.name == var else t
    if isinstance(t, Lolli):
        return Lolli(_subst(t.dom, var, a), _subst(t.cod, var, a))
    if isinstance(t, OfCourse):
        return OfCourse(_subst(t.body, var, a))
    if t.var == var:
        return t
    fa = _ftv(a)
    if t.var in fa:
        new = fresh_type_var(t.var, fa | _allv(t.body) | {var})
        return Forall(new, _subst(_subst(t.body, t.var, TVar(new)), var, a))
    return Forall(t.var, _subst(t.body, var, a))


def _occurs(m: _Meta, t) -> bool:
    t = _walk(t)
    if t is m:
        return True
    if isinstance(t, Lolli):
        return _occurs(m, t.dom) or _occurs(m, t.cod)
    if isinstance(t, (OfCourse, Forall)):
        return _occurs(m, t.body)
    return False


def _show(t) -> str:
    return show_type(_zonk_copy(t))


def _zonk_copy(t):
    t = _walk(t)
    if isinstance(t, _Meta):
        return TVar(f"?{t.id}")
    if isinstance(t, TVar):
        return t
    if isinstance(t, Lolli):
        return Lolli(_zonk_copy(t.dom), _zonk_copy(t.cod))
    if isinstance(t, OfCourse):
        return OfCourse(_zonk_copy(t.body))
    return Forall(t.var, _zonk_copy(t.body))


_rigid = itertools.count()


def _bind(m: _Meta, t) -> None:
    if _occurs(m, t):
        raise EalTypeError(f"cyclic type {_show(t)}")
    if m.linear:
        if isinstance(t, OfCourse):
            raise EalTypeError(f"a linear type is required, got {_show(t)}")
        if isinstance(t, _Meta) and not t.linear:
            t.ref = m
            return
    m.ref = t


def _unify(a, b) -> None:
    a, b = _walk(a), _walk(b)
    if a is b:
        return
    if isinstance(a, _Meta):
        return _bind(a, b)
    if isinstance(b, _Meta):
        return _bind(b, a)
    if isinstance(a, TVar) and isinstance(b, TVar) and a.name == b.name:
        return
    if isinstance(a, Lolli) and isinstance(b, Lolli):
        _unify(a.dom, b.dom)
        return _unify(a.cod, b.cod)
    if isinstance(a, OfCourse) and isinstance(b, OfCourse):
        return _unify(a.body, b.body)
    if isinstance(a, Forall) and isinstance(b, Forall):
        c = TVar(f"_r{next(_rigid)}")
        return _unify(_subst(a.body, a.var, c), _subst(b.body, b.var, c))
    raise EalTypeError(f"cannot match {_show(a)} with {_show(b)}")


class _N:
    """Phase-one node: a rule, its payload, and its (possibly meta) type."""

    __slots__ = ("rule", "name", "ann", "kids", "type", "inst", "term", "fv")

    def __init__(self, rule, type, kids=(), name=None, ann=None, inst=None):
        self.rule = rule
        self.type = type
        self.kids = kids
        self.name = name
        self.ann = ann
        self.inst = inst
        self.term = None
        self.fv = None


LIN, BANGZ, TEMP = "lin", "bang", "temp"


class _Elab:
    def __init__(self, taken: set[str]):
        self.taken = taken
        self.counters: dict[str, int] = {}

    def binder(self, x: str) -> str:
        new = x
        if new in self.taken:
            n = self.counters.get(x, 0)
            while new in self.taken:
                n += 1
                new = f"{x}_{n}"
            self.counters[x] = n
        self.taken.add(new)
        return new

    @staticmethod
    def boxed(env: dict) -> dict:
        return {x: (TEMP, t.body, n) for x, (z, t, n) in env.items() if z == BANGZ}

    def instantiate(self, n: _N, ty):
        ty = _walk(ty)
        while isinstance(ty, Forall):
            m = _Meta(linear=True)
            ty = _walk(_subst(ty.body, ty.var, m))
            n = _N("forall-e", ty, (n,), inst=m)
        return n, ty

    def synth(self, env: dict, t):
        if isinstance(t, Ann):
            return self.check(env, t.term, t.type), t.type
        if isinstance(t, Var):
            if t.name not in env:
                raise EalTypeError(f"unbound variable {t.name}")
            zone, ty, name = env[t.name]
            if zone == BANGZ:
                raise EalTypeError(f"{t.name} is bound by \\! and must be used under exactly one !")
            return _N("ax-lin" if zone == LIN else "ax-temp", ty, name=name), ty
        if isinstance(t, Abs):
            dom = t.annotation if t.annotation is not None else _Meta(linear=True)
            if t.annotation is not None and not is_linear(dom):
                raise EalTypeError(f"\\{t.binder} is annotated with non-linear {show_type(dom)}")
            name = self.binder(t.binder)
            kid, cod = self.synth({**env, t.binder: (LIN, dom, name)}, t.body)
            ty = Lolli(dom, cod)
            return _N("lam", ty, (kid,), name=name, ann=t.annotation), ty
        if isinstance(t, BangAbs):
            dom = t.annotation if t.annotation is not None else OfCourse(_Meta(linear=False))
            if not isinstance(dom, OfCourse):
                raise EalTypeError(f"\\!{t.binder} needs a ! type, got {show_type(dom)}")
            name = self.binder(t.binder)
            kid, cod = self.synth({**env, t.binder: (BANGZ, dom, name)}, t.body)
            ty = Lolli(dom, cod)
            return _N("lam!", ty, (kid,), name=name, ann=t.annotation), ty
        if isinstance(t, App):
            f, tf = self.synth(env, t.fun)
            f, tf = self.instantiate(f, tf)
            if isinstance(tf, _Meta):
                arrow = Lolli(_Meta(linear=False), _Meta(linear=False))
                _bind(tf, arrow)
                tf = arrow
            if not isinstance(tf, Lolli):
                raise EalTypeError(f"applying a term of type {_show(tf)}")
            a = self.check(env, t.arg, tf.dom)
            return _N("app", tf.cod, (f, a)), tf.cod
        if isinstance(t, Bang):
            kid, ty = self.synth(self.boxed(env), t.body)
            return _N("prom", OfCourse(ty), (kid,)), OfCourse(ty)
        raise TypeError(t)

    def check(self, env: dict, t, want) -> _N:
        want = _walk(want)
        if isinstance(t, Ann):
            return self.subsume(self.check(env, t.term, t.type), t.type, want)
        if isinstance(want, Forall):
            used = set()
            for _, ty, _ in env.values():
                used |= _ftv(ty)
            var = want.var if want.var not in used else fresh_type_var(want.var, used | _allv(want))
            body = _walk(_subst(want.body, want.var, TVar(var)))
            return _N("forall-i", Forall(var, body), (self.check(env, t, body),))
        if isinstance(t, (Abs, BangAbs)) and isinstance(want, Lolli):
            dom = _walk(want.dom)
            if t.annotation is not None:
                _unify(t.annotation, dom)
                dom = _walk(dom)
            if isinstance(t, Abs):
                if isinstance(dom, OfCourse):
                    raise EalTypeError(f"\\{t.binder} cannot bind a value of type {_show(dom)}")
                if isinstance(dom, _Meta) and not dom.linear:
                    m = _Meta(linear=True)
                    _bind(dom, m)
                    dom = m
                zone, rule = LIN, "lam"
            else:
                if isinstance(dom, _Meta):
                    box = OfCourse(_Meta(linear=False))
                    _bind(dom, box)
                    dom = box
                if not isinstance(dom, OfCourse):
                    raise EalTypeError(f"\\!{t.binder} cannot bind a value of type {_show(dom)}")
                zone, rule = BANGZ, "lam!"
            name = self.binder(t.binder)
            kid = self.check({**env, t.binder: (zone, dom, name)}, t.body, want.cod)
            return _N(rule, Lolli(dom, want.cod), (kid,), name=name, ann=t.annotation)
        if isinstance(t, Bang):
            if isinstance(want, _Meta):
                box = OfCourse(_Meta(linear=False))
                _bind(want, box)
                want = box
            if not isinstance(want, OfCourse):
                raise EalTypeError(f"a !-term cannot have type {_show(want)}")
            kid = self.check(self.boxed(env), t.body, want.body)
            return _N("prom", want, (kid,))
        n, ty = self.synth(env, t)
        return self.subsume(n, ty, want)

    def subsume(self, n: _N, have, want) -> _N:
        want = _walk(want)
        if isinstance(want, Forall):
            if not isinstance(_walk(have), Forall):
                raise EalTypeError(f"{_show(have)} is not as general as {_show(want)}")
        elif not isinstance(want, _Meta):
            n, have = self.instantiate(n, have)
        _unify(have, want)
        return n


# ---------------------------------------------------------------------------
# Elaboration, phase 2: terms, free variables and contexts


def _finish_terms(root: _N) -> None:
    """Zonk types, build subject terms and free-variable sets bottom-up."""
    order, stack = [], [root]
    while stack:
        n = stack.pop()
        order.append(n)
        stack.extend(n.kids)
    for n in reversed(order):
        n.type = _zonk(n.type)
        if n.inst is not None:
            n.inst = _zonk(n.inst)
        r = n.rule
        if r in ("ax-lin", "ax-temp"):
            n.term, n.fv = Var(n.name), frozenset([n.name])
        elif r in ("lam", "lam!"):
            k = n.kids[0]
            n.term = (Abs if r == "lam" else BangAbs)(n.name, k.term, n.ann)
            n.fv = k.fv - {n.name}
        elif r == "app":
            f, a = n.kids
            n.term, n.fv = App(f.term, a.term), f.fv | a.fv
        elif r == "prom":
            k = n.kids[0]
            n.term, n.fv = Bang(k.term), k.fv
        else:
            n.term, n.fv = n.kids[0].term, n.kids[0].fv


def _build(root: _N, gamma: Zone, delta: Zone, theta: Zone) -> Derivation:
    out: dict[int, Derivation] = {}
    # explicit stack: (node, gamma, delta, theta, expanded?)
    stack = [(root, gamma, delta, theta, False)]
    while stack:
        n, g, dl, th, done = stack.pop()
        if done:
            ps = tuple(out.pop(id(k)) for k in n.kids)
            out[id(n)] = Derivation(n.rule, g, dl, th, n.term, n.type, ps, n.inst)
            continue
        stack.append((n, g, dl, th, True))
        r = n.rule
        if r in ("ax-lin", "ax-temp"):
            continue
        if r == "lam":
            k = n.kids[0]
            stack.append((k, {**g, n.name: n.type.dom}, dl, th, False))
        elif r == "lam!":
            k = n.kids[0]
            stack.append((k, g, {**dl, n.name: n.type.dom}, th, False))
        elif r == "app":
            f, a = n.kids
            shared = f.fv & a.fv & g.keys()
            if shared:
                raise EalTypeError(f"affine variable {sorted(shared)[0]} is used more than once")
            ga = {x: s for x, s in g.items() if x in a.fv}
            gf = {x: s for x, s in g.items() if x not in ga}
            stack.append((a, ga, dl, th, False))
            stack.append((f, gf, dl, th, False))
        elif r == "prom":
            k = n.kids[0]
            inner = {x: s.body for x, s in dl.items() if x in k.fv}
            stack.append((k, {}, {}, inner, False))
        else:
            stack.append((n.kids[0], g, dl, th, False))
    return out[id(root)]


def elaborate(
    t,
    want: Optional[EalType] = None,
    gamma: Mapping[str, EalType] = (),
    delta: Mapping[str, EalType] = (),
    theta: Mapping[str, EalType] = (),
) -> Derivation:
    """Find a derivation for ``t`` (which may contain :class:`Ann` nodes).

    Binders that would shadow a context variable or another binder are
    renamed, so the subject of the result is α-equivalent to ``erase(t)``.
    Raises :class:`EalTypeError` when no derivation is found.
    """
    gamma, delta, theta = dict(gamma), dict(delta), dict(theta)
    for x, s in delta.items():
        if not isinstance(s, OfCourse):
            raise EalTypeError(f"{x} in the ! zone needs a ! type, got {show_type(s)}")
    env = {x: (LIN, s, x) for x, s in gamma.items()}
    env.update({x: (BANGZ, s, x) for x, s in delta.items()})
    env.update({x: (TEMP, s, x) for x, s in theta.items()})
    taken = set(env) | set(free_vars(erase(t)))
    el = _Elab(taken)
    if want is None:
        root, _ = el.synth(env, t)
    else:
        root = el.check(env, t, want)
    _finish_terms(root)
    return _build(root, gamma, delta, theta)


def ascribed(d: Derivation):
    """The subject of ``d`` with every subterm and binder ascribed its type.

    Elaborating the result against ``d.type`` reproduces a derivation of the
    same shape, which is how finished programs get embedded in larger ones.
    """

    def go(n: Derivation):
        ty = n.type
        while n.rule in ("forall-i", "forall-e"):
            n = n.premises[0]
        r = n.rule
        if r in ("ax-lin", "ax-temp"):
            t = n.term
        elif r in ("lam", "lam!"):
            t = (Abs if r == "lam" else BangAbs)(n.term.binder, go(n.premises[0]), n.type.dom)
        elif r == "app":
            t = App(go(n.premises[0]), go(n.premises[1]))
        else:
            t = Bang(go(n.premises[0]))
        return Ann(t, ty)

    return go(d)


def infer(t, **zones) -> EalType:
    return elaborate(t, **zones).type


# ---------------------------------------------------------------------------
# Text form: one node per line, indented by depth.
#
#   gamma x : T        (optional root context lines)
#   lam x : T
#     app : T
#       ax-lin f : T
#       forall-e [A] : T


def dump_derivation(d: Derivation) -> str:
    lines = []
    for zone, z in (("gamma", d.gamma), ("delta", d.delta), ("theta", d.theta)):
        for x, s in z.items():
            lines.append(f"{zone} {x} : {show_type(s)}")
    stack = [(d, 0)]
    while stack:
        n, depth = stack.pop()
        r = n.rule
        if r in ("ax-lin", "ax-temp"):
            info = f" {n.term.name}"
        elif r in ("lam", "lam!"):
            info = f" {n.term.binder}"
        elif r == "forall-e":
            info = f" [{show_type(n.inst)}]"
        else:
            info = ""
        lines.append(f"{'  ' * depth}{r}{info} : {show_type(n.type)}")
        for p in reversed(n.premises):
            stack.append((p, depth + 1))
    return "\n".join(lines) + "\n"


def parse_derivation(text: str) -> Derivation:
    """Inverse of :func:`dump_derivation`; contexts are rebuilt from the root."""
    zones: dict[str, dict] = {"gamma": {}, "delta": {}, "theta": {}}
    rows: list[tuple[int, _N]] = []
    for raw in text.splitlines():
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        depth = (len(raw) - len(raw.lstrip(" "))) // 2
        line = raw.strip()
        head, sep, ty = line.partition(" : ")
        if not sep:
            raise EalTypeError(f"derivation line without a type: {line!r}")
        words = head.split(None, 1)
        if words[0] in zones and not rows:
            zones[words[0]][words[1]] = parse_type(ty)
            continue
        rule, info = words[0], (words[1] if len(words) > 1 else "")
        if rule not in RULES:
            raise EalTypeError(f"unknown rule {rule!r}")
        node = _N(rule, parse_type(ty))
        if rule in ("ax-lin", "ax-temp", "lam", "lam!"):
            node.name = info
        elif rule == "forall-e":
            node.inst = parse_type(info.strip()[1:-1])
        rows.append((depth, node))
    if not rows:
        raise EalTypeError("empty derivation")
    kids: dict[int, list] = {}
    stack: list[tuple[int, _N]] = []
    for depth, node in rows:
        while stack and stack[-1][0] >= depth:
            stack.pop()
        if stack:
            kids.setdefault(id(stack[-1][1]), []).append(node)
        elif node is not rows[0][1]:
            raise EalTypeError("derivation has more than one root")
        stack.append((depth, node))
    for _, node in rows:
        node.kids = tuple(kids.get(id(node), ()))
    root = rows[0][1]
    try:
        _finish_terms(root)
        return _build(root, zones["gamma"], zones["delta"], zones["theta"])
    except (IndexError, AttributeError, ValueError) as e:
        if isinstance(e, EalTypeError):
            raise
        raise EalTypeError(f"malformed derivation: {e}") from None
