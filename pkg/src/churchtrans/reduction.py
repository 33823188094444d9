"""Reduction engines over nameless terms (see :mod:`churchtrans.terms`).

Three independent routes to the normal form:

* :func:`normalize_normal_order` -- strong call-by-name environment machine.
  It contracts exactly the leftmost-outermost redexes, with substitution
  delayed through closures; fuel counts contractions.
* :func:`normalize_nbe` -- normalization by evaluation with Python closures,
  call-by-value.  A different complete strategy, used as a cross-check.
* :func:`step` -- one leftmost-outermost contraction by explicit
  substitution; slow, but exposes every intermediate term for traces.

All three understand both the plain rule ``(\\x. t) u`` and the exponential
rule ``(\\!x. t) (!u)``.  A ``\\!`` applied to something that does not reduce
to ``!u`` is left in place.
"""

from __future__ import annotations

from typing import Optional

from .terms import APP, BANG, BLAM, FREE, LAM, VAR

LVL = 6
DEFAULT_FUEL = 10_000_000


class FuelExhausted(RuntimeError):
    """The reduction step budget ran out."""


class _Fuel:
    __slots__ = ("left", "used", "watch")

    def __init__(self, fuel: int, watch=None):
        if fuel <= 0:
            raise ValueError("fuel must be positive")
        self.left = fuel
        self.used = 0
        self.watch = watch

    def spend(self) -> None:
        self.left -= 1
        self.used += 1
        if self.left < 0:
            raise FuelExhausted(f"more than {self.used - 1} reduction steps")


# ---------------------------------------------------------------------------
# Normal order: environment machine


def _lookup(env, idx):
    while idx:
        env = env[1]
        idx -= 1
    return env[0]


def _whnf(term, env, stack, fuel: _Fuel):
    """Weak head normal form of a closure applied to ``stack``.

    ``stack`` is a list of closures, next argument last.  Returns one of
    ``("lam", term, env)``, ``("bang", term, env)`` (empty stack) or
    ``("neu", head, stack)``.
    """
    while True:
        tag = term[0]
        if tag == APP:
            stack.append((term[2], env))
            term = term[1]
        elif tag == VAR:
            term, env = _lookup(env, term[1])
        elif tag == LAM:
            if not stack:
                return ("lam", term, env)
            fuel.spend()
            if fuel.watch is not None:
                fuel.watch(term)
            env = (stack.pop(), env)
            term = term[1]
        elif tag == BLAM:
            if not stack:
                return ("lam", term, env)
            arg_term, arg_env = stack.pop()
            w = _whnf(arg_term, arg_env, [], fuel)
            if w[0] != "bang":
                return ("neu", ("stuck", term, env, w), stack)
            fuel.spend()
            if fuel.watch is not None:
                fuel.watch(term)
            env = ((w[1][1], w[2]), env)
            term = term[1]
        elif tag == BANG:
            if not stack:
                return ("bang", term, env)
            return ("neu", ("bang", term, env), stack)
        elif tag == FREE:
            return ("neu", ("free", term[1]), stack)
        else:  # LVL
            return ("neu", ("lvl", term[1]), stack)


def _readback(w, level: int, fuel: _Fuel) -> tuple:
    kind = w[0]
    if kind == "lam":
        lam, env = w[1], w[2]
        return (lam[0], _readback_under(lam, env, level, fuel), lam[2])
    if kind == "bang":
        term, env = w[1], w[2]
        return (BANG, _readback(_whnf(term[1], env, [], fuel), level, fuel))
    head, stack = w[1], w[2]
    hk = head[0]
    if hk == "lvl":
        out = (VAR, level - head[1] - 1)
    elif hk == "free":
        out = (FREE, head[1])
    elif hk == "stuck":
        lam, env, argw = head[1], head[2], head[3]
        out = (
            APP,
            (BLAM, _readback_under(lam, env, level, fuel), lam[2]),
            _readback(argw, level, fuel),
        )
    else:
        term, env = head[1], head[2]
        out = (BANG, _readback(_whnf(term[1], env, [], fuel), level, fuel))
    for term, env in reversed(stack):
        out = (APP, out, _readback(_whnf(term, env, [], fuel), level, fuel))
    return out


def _readback_under(lam, env, level, fuel):
    inner = (((LVL, level), None), env)
    return _readback(_whnf(lam[1], inner, [], fuel), level + 1, fuel)


def normalize_normal_order(n: tuple, fuel: int = DEFAULT_FUEL, watch=None) -> tuple[tuple, int]:
    """Return ``(normal_form, steps)``.

    ``watch``, if given, is called with every abstraction (``LAM`` or
    ``BLAM`` node) just before it is contracted.
    """
    f = _Fuel(fuel, watch)
    return _readback(_whnf(n, None, [], f), 0, f), f.used


class DepthWatch:
    """Counts contractions whose binder occurs at the wrong depth in its body.

    The machine never rewrites the body of an abstraction before contracting
    it (substitutions live in environments), so the occurrence depths of the
    bound variable are those of the syntactic body; they are cached by node
    identity.
    """

    def __init__(self):
        self.steps = 0
        self.violations = 0
        self._cache: dict[int, bool] = {}
        self._keep: list = []

    def __call__(self, lam: tuple) -> None:
        self.steps += 1
        ok = self._cache.get(id(lam))
        if ok is None:
            want = 0 if lam[0] == LAM else 1
            ok = all(d == want for d in occurrence_depths(lam[1]))
            self._cache[id(lam)] = ok
            self._keep.append(lam)
        if not ok:
            self.violations += 1


# ---------------------------------------------------------------------------
# Normalization by evaluation


class _Lam:
    __slots__ = ("fn", "hint", "bang")

    def __init__(self, fn, hint, bang):
        self.fn = fn
        self.hint = hint
        self.bang = bang


class _BangV:
    __slots__ = ("value",)

    def __init__(self, value):
        self.value = value


class _Neu:
    __slots__ = ("head", "args")

    def __init__(self, head, args=()):
        self.head = head
        self.args = args


def _eval(n, env, fuel: _Fuel):
    tag = n[0]
    if tag == VAR:
        return _lookup(env, n[1])
    if tag == APP:
        return _apply(_eval(n[1], env, fuel), _eval(n[2], env, fuel), fuel)
    if tag in (LAM, BLAM):
        body = n[1]
        return _Lam(lambda v: _eval(body, (v, env), fuel), n[2], tag == BLAM)
    if tag == BANG:
        return _BangV(_eval(n[1], env, fuel))
    return _Neu(("free", n[1]))


def _apply(f, a, fuel: _Fuel):
    if isinstance(f, _Lam):
        if not f.bang:
            fuel.spend()
            return f.fn(a)
        if isinstance(a, _BangV):
            fuel.spend()
            return f.fn(a.value)
        return _Neu(("stuck", f, a))
    if isinstance(f, _Neu):
        return _Neu(f.head, f.args + (a,))
    return _Neu(("bang", f), (a,))


def _rb(v, level: int, fuel: _Fuel) -> tuple:
    if isinstance(v, _Lam):
        body = _rb(v.fn(_Neu(("lvl", level))), level + 1, fuel)
        return (BLAM if v.bang else LAM, body, v.hint)
    if isinstance(v, _BangV):
        return (BANG, _rb(v.value, level, fuel))
    head = v.head
    if head[0] == "lvl":
        out = (VAR, level - head[1] - 1)
    elif head[0] == "free":
        out = (FREE, head[1])
    elif head[0] == "stuck":
        out = (APP, _rb(head[1], level, fuel), _rb(head[2], level, fuel))
    else:
        out = _rb(head[1], level, fuel)
    for a in v.args:
        out = (APP, out, _rb(a, level, fuel))
    return out


def normalize_nbe(n: tuple, fuel: int = DEFAULT_FUEL) -> tuple[tuple, int]:
    f = _Fuel(fuel)
    return _rb(_eval(n, None, f), 0, f), f.used


# ---------------------------------------------------------------------------
# Small-step reduction by substitution


def shift(n: tuple, d: int, cutoff: int = 0) -> tuple:
    tag = n[0]
    if tag == VAR:
        return (VAR, n[1] + d) if n[1] >= cutoff else n
    if tag == FREE:
        return n
    if tag == APP:
        return (APP, shift(n[1], d, cutoff), shift(n[2], d, cutoff))
    if tag == BANG:
        return (BANG, shift(n[1], d, cutoff))
    return (tag, shift(n[1], d, cutoff + 1), n[2])


def subst(n: tuple, idx: int, u: tuple) -> tuple:
    """Replace index ``idx`` by ``u`` (``u`` already shifted for the context)."""
    tag = n[0]
    if tag == VAR:
        return u if n[1] == idx else n
    if tag == FREE:
        return n
    if tag == APP:
        return (APP, subst(n[1], idx, u), subst(n[2], idx, u))
    if tag == BANG:
        return (BANG, subst(n[1], idx, u))
    return (tag, subst(n[1], idx + 1, shift(u, 1)), n[2])


def beta_contract(body: tuple, arg: tuple) -> tuple:
    return shift(subst(body, 0, shift(arg, 1)), -1)


def occurrence_depths(n: tuple, idx: int = 0, depth: int = 0) -> list[int]:
    """Bang-depths of the occurrences of index ``idx`` inside ``n``."""
    tag = n[0]
    if tag == VAR:
        return [depth] if n[1] == idx else []
    if tag == FREE:
        return []
    if tag == APP:
        return occurrence_depths(n[1], idx, depth) + occurrence_depths(n[2], idx, depth)
    if tag == BANG:
        return occurrence_depths(n[1], idx, depth + 1)
    return occurrence_depths(n[1], idx + 1, depth)


class Step:
    """Record of one contraction: which rule, where, and the binder depths."""

    __slots__ = ("rule", "depth", "binder_depths")

    def __init__(self, rule: str, depth: int, binder_depths: list[int]):
        self.rule = rule
        self.depth = depth
        self.binder_depths = binder_depths

    def preserves_depth(self) -> bool:
        want = 0 if self.rule == "lam" else 1
        return all(d == want for d in self.binder_depths)


def step(n: tuple, depth: int = 0) -> Optional[tuple[tuple, Step]]:
    """One leftmost-outermost contraction, or ``None`` for a normal form."""
    tag = n[0]
    if tag == APP:
        f, a = n[1], n[2]
        if f[0] == LAM:
            return beta_contract(f[1], a), Step("lam", depth, occurrence_depths(f[1]))
        if f[0] == BLAM:
            if a[0] == BANG:
                return beta_contract(f[1], a[1]), Step("bang", depth, occurrence_depths(f[1]))
            # the redex can only fire once the argument shows its !
            r = step(a, depth)
            if r is not None:
                return (APP, f, r[0]), r[1]
        r = step(f, depth)
        if r is not None:
            return (APP, r[0], a), r[1]
        r = step(a, depth)
        if r is not None:
            return (APP, f, r[0]), r[1]
        return None
    if tag in (LAM, BLAM):
        r = step(n[1], depth)
        return None if r is None else ((tag, r[0], n[2]), r[1])
    if tag == BANG:
        r = step(n[1], depth + 1)
        return None if r is None else ((BANG, r[0]), r[1])
    return None


def trace(n: tuple, fuel: int = DEFAULT_FUEL):
    """Yield ``(term, step)`` pairs until normal form; final step is ``None``."""
    f = _Fuel(fuel)
    while True:
        r = step(n)
        if r is None:
            yield n, None
            return
        f.spend()
        yield r[0], r[1]
        n = r[0]


# ---------------------------------------------------------------------------
# η


def free_in(n: tuple, idx: int) -> bool:
    tag = n[0]
    if tag == VAR:
        return n[1] == idx
    if tag == FREE:
        return False
    if tag == APP:
        return free_in(n[1], idx) or free_in(n[2], idx)
    if tag == BANG:
        return free_in(n[1], idx)
    return free_in(n[1], idx + 1)


def eta_contract(n: tuple) -> tuple:
    """Contract every ``\\x. M x`` with ``x`` not free in ``M`` (bottom-up)."""
    tag = n[0]
    if tag in (VAR, FREE):
        return n
    if tag == APP:
        return (APP, eta_contract(n[1]), eta_contract(n[2]))
    if tag == BANG:
        return (BANG, eta_contract(n[1]))
    body = eta_contract(n[1])
    if tag == LAM and body[0] == APP and body[2] == (VAR, 0) and not free_in(body[1], 0):
        return shift(body[1], -1)
    return (tag, body, n[2])
