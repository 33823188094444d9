"""Kernel of the elementary affine calculus.

Terms reuse :mod:`churchtrans.terms` (``BangAbs`` and ``Bang`` are the two
extra constructors); types live in :mod:`churchtrans.eal_types` and typing
derivations in :mod:`churchtrans.eal_derivation`.  This module adds
normalization under the two β rules, the syntactic linearity and
stratification checks, and the Church encodings used by the compilers.
"""

from __future__ import annotations

from typing import Iterable, Optional, Sequence, Union

from . import reduction
from .church_stlc import (
    NotAStringEncoding,
    NotATreeEncoding,
    SymbolNotInAlphabet,
    Word,
    letter_names,
    string_body,
    to_word,
    tree_body,
)
from .eal_derivation import (
    Ann,
    Derivation,
    DerivationReport,
    EalTypeError,
    check_derivation,
    dump_derivation,
    elaborate,
    erase,
    parse_derivation,
)
from .eal_types import (
    EalType,
    Forall,
    Lolli,
    OfCourse,
    TVar,
    bt_type,
    fin_type,
    parse_type,
    parse_type_stream,
    show_type,
    str_type,
    tensor_type,
    types_equal,
    with_type,
)
from .reduction import DEFAULT_FUEL, FuelExhausted
from .report import ValidityReport
from .terms import (
    APP,
    BANG,
    BLAM,
    FREE,
    LAM,
    VAR,
    Abs,
    App,
    Bang,
    BangAbs,
    Term,
    Var,
    alpha_equal,
    apps,
    free_vars,
    fresh_name,
    from_nameless,
    lams,
    parse_term,
    show,
    to_nameless,
)
from .tree_transducers import LEAF, BinTree, Leaf, Node


class IndexOutOfRange(ValueError):
    pass


class ArityMismatch(ValueError):
    pass


def parse(text: str) -> Term:
    return parse_term(text, parse_type_stream, allow_bang=True)


def pretty(t: Term) -> str:
    return show(t, show_type)


# ---------------------------------------------------------------------------
# Reduction


def eal_beta_normalize(t: Term, fuel: int = DEFAULT_FUEL) -> Term:
    """Normal-order normal form under ``(\\x.t) u`` and ``(\\!x.t) !u``.

    A ``\\!``-redex whose argument is not a ``!`` is stuck and stays in the
    result.
    """
    nf, _ = reduction.normalize_normal_order(to_nameless(t), fuel)
    return from_nameless(nf)


def eal_beta_step(t: Term) -> Optional[Term]:
    r = reduction.step(to_nameless(t))
    return None if r is None else from_nameless(r[0])


def depth_preserving_trace(t: Union[Term, tuple], fuel: int = DEFAULT_FUEL) -> tuple[tuple, int, list]:
    """Normalize step by step; return the normal form, the step count and the
    steps that moved some substituted occurrence to a different depth."""
    n = t if isinstance(t, tuple) else to_nameless(t)
    bad, steps = [], 0
    for n, st in reduction.trace(n, fuel):
        if st is None:
            break
        steps += 1
        if not st.preserves_depth():
            bad.append(st)
    return n, steps, bad


# ---------------------------------------------------------------------------
# Syntactic checks


def _binders(t: Term):
    """Yield ``(binder_node, occurrence depths relative to it)``."""
    stack = [t]
    while stack:
        s = stack.pop()
        if isinstance(s, (Abs, BangAbs)):
            yield s, _depths(s.body, s.binder)
            stack.append(s.body)
        elif isinstance(s, App):
            stack.append(s.fun)
            stack.append(s.arg)
        elif isinstance(s, Bang):
            stack.append(s.body)


def _depths(t: Term, x: str) -> list[int]:
    out, stack = [], [(t, 0)]
    while stack:
        s, d = stack.pop()
        if isinstance(s, Var):
            if s.name == x:
                out.append(d)
        elif isinstance(s, App):
            stack.append((s.fun, d))
            stack.append((s.arg, d))
        elif isinstance(s, Bang):
            stack.append((s.body, d + 1))
        elif s.binder != x:
            stack.append((s.body, d))
    return out


def check_linearity(t: Term) -> ValidityReport:
    """Every ``\\x`` binds a variable used at most once."""
    rep = ValidityReport()
    for b, depths in _binders(t):
        if isinstance(b, Abs) and len(depths) > 1:
            rep.fail(f"{b.binder} is bound by \\ and used {len(depths)} times")
    return rep


def check_stratification(t: Term) -> ValidityReport:
    """``\\x`` occurrences sit at depth 0 and ``\\!x`` occurrences at depth 1."""
    rep = ValidityReport()
    for b, depths in _binders(t):
        want = 0 if isinstance(b, Abs) else 1
        wrong = sorted(set(d for d in depths if d != want))
        if wrong:
            kind = "\\" if want == 0 else "\\!"
            rep.fail(f"{b.binder} is bound by {kind} but occurs at depth {wrong[0]}, expected {want}")
    return rep


# ---------------------------------------------------------------------------
# Strings and trees


def eal_encode_string(w: Union[str, Sequence[str]], sigma: Sequence[str]) -> Term:
    """``\\!f1 ... \\!fn. !(\\x. f_i1 (... (f_ik x)))``."""
    w = to_word(w, sigma)
    fs = letter_names(len(sigma))
    body = Bang(Abs("x", string_body(w, sigma, fs)))
    for f in reversed(fs):
        body = BangAbs(f, body)
    return body


_F = "%f"
_X = "%x"


def _unbang(nf: tuple, err) -> tuple:
    if nf[0] != BANG:
        raise err("normal form is not a !-term")
    return nf[1]


def _normal(n: tuple, fuel: int) -> tuple:
    return reduction.normalize_normal_order(n, fuel)[0]


def eal_decode_string(t: Term, sigma: Sequence[str], banged: bool = False, fuel: int = DEFAULT_FUEL) -> Word:
    """Decode ``t`` (or ``!t`` when ``banged``) as a string over ``sigma``."""
    n = to_nameless(t)
    if banged:
        n = _unbang(_normal(n, fuel), NotAStringEncoding)
    for i in range(len(sigma)):
        n = (APP, n, (BANG, (FREE, f"{_F}{i}")))
    inner = _unbang(_normal(n, fuel), NotAStringEncoding)
    nf = _normal((APP, inner, (FREE, _X)), fuel)
    out = []
    while nf != (FREE, _X):
        if nf[0] == APP and nf[1][0] == FREE and nf[1][1].startswith(_F):
            out.append(sigma[int(nf[1][1][len(_F):])])
            nf = nf[2]
        else:
            raise NotAStringEncoding("normal form is not a letter spine ending in the base variable")
    return tuple(out)


def eal_encode_tree(t: BinTree, sigma: Sequence[str]) -> Term:
    """``\\!f1 ... \\!fn. \\!x. !T`` with ``T`` built from the ``f_i`` and ``x``."""
    fs = letter_names(len(sigma))
    out: Term = BangAbs("x", Bang(tree_body(t, sigma, fs)))
    for f in reversed(fs):
        out = BangAbs(f, out)
    return out


def eal_decode_tree(t: Term, sigma: Sequence[str], banged: bool = False, fuel: int = DEFAULT_FUEL) -> BinTree:
    n = to_nameless(t)
    if banged:
        n = _unbang(_normal(n, fuel), NotATreeEncoding)
    for i in range(len(sigma)):
        n = (APP, n, (BANG, (FREE, f"{_F}{i}")))
    n = (APP, n, (BANG, (FREE, _X)))
    nf = _unbang(_normal(n, fuel), NotATreeEncoding)

    def go(n: tuple) -> BinTree:
        if n == (FREE, _X):
            return LEAF
        if n[0] == APP and n[1][0] == APP and n[1][1][0] == FREE and n[1][1][1].startswith(_F):
            return Node(sigma[int(n[1][1][1][len(_F):])], go(n[1][2]), go(n[2]))
        raise NotATreeEncoding("normal form is not built from node functions and the leaf variable")

    return go(nf)


# ---------------------------------------------------------------------------
# Finite sets, tensors and withs


def fin_encode(i: int, n: int) -> Term:
    """``\\x1 ... \\xn. xi`` (``i`` counts from 1)."""
    if not 1 <= i <= n:
        raise IndexOutOfRange(f"{i} is not in 1..{n}")
    xs = [f"x{j}" for j in range(1, n + 1)]
    return lams(xs, Var(xs[i - 1]))


def fin_decode(t: Term, n: int, fuel: int = DEFAULT_FUEL) -> int:
    probes = [(FREE, f"%i{j}") for j in range(1, n + 1)]
    nf = to_nameless(t)
    for p in probes:
        nf = (APP, nf, p)
    nf = _normal(nf, fuel)
    if nf in probes:
        return probes.index(nf) + 1
    raise ValueError("not an element of a finite set")


def _fresh(base: str, terms: Iterable) -> str:
    used: set[str] = set()
    for t in terms:
        used |= free_vars(erase(t))
    return fresh_name(base, used)


def tensor_intro(components: Sequence, types: Optional[Sequence[EalType]] = None):
    """``\\k. k t1 ... tm``, ascribed ``t1 (x) ... (x) tm`` when ``types`` is given."""
    if types is not None and len(types) != len(components):
        raise ArityMismatch(f"{len(components)} components but {len(types)} types")
    k = _fresh("k", components)
    t = Abs(k, apps(Var(k), *components))
    return t if types is None else Ann(t, tensor_type(types))


def tensor_elim(t, names: Sequence[str], body):
    """``t (\\x1 ... \\xm. body)``."""
    return App(t, lams(names, body))


def with_intro(resource, components: Sequence, types: Optional[Sequence[EalType]] = None):
    """``\\k. k r c1 ... cm`` where each ``ci`` consumes the shared resource ``r``."""
    if types is not None and len(types) != len(components):
        raise ArityMismatch(f"{len(components)} components but {len(types)} types")
    k = _fresh("k", [resource, *components])
    t = Abs(k, apps(Var(k), resource, *components))
    return t if types is None else Ann(t, with_type(types))


def with_project(t, i: int, m: int):
    """The ``i``-th of ``m`` components (from 1): ``t (\\r. \\c1 ... \\cm. ci r)``."""
    if not 1 <= i <= m:
        raise IndexOutOfRange(f"{i} is not in 1..{m}")
    cs = [f"c{j}" for j in range(1, m + 1)]
    return App(t, lams(["r", *cs], App(Var(cs[i - 1]), Var("r"))))


def with_tensor_distribute(left: Sequence[EalType], right: Sequence[EalType]):
    """Closed term of type ``(&A) -o (&B) -o &_(i,j) (Ai (x) Bj)``, pairs in row-major order."""
    m1, m2 = len(left), len(right)
    pair = tensor_intro([Var("p"), Var("q")], [with_type(left), with_type(right)])
    comps, types = [], []
    for i, a in enumerate(left, 1):
        for j, b in enumerate(right, 1):
            body = tensor_intro([with_project(Var("u"), i, m1), with_project(Var("v"), j, m2)], [a, b])
            comps.append(Abs("s", App(Var("s"), lams(["u", "v"], body))))
            types.append(tensor_type([a, b]))
    return Ann(lams(["p", "q"], with_intro(pair, comps, types)), Lolli(with_type(left), Lolli(with_type(right), with_type(types))))


def bang_promote(t: Term, name: str = "y") -> Term:
    """``\\!y. !(t y)`` for a closed ``t : A -o B``; has type ``!A -o !B``."""
    if free_vars(t):
        raise ValueError(f"only closed terms can be promoted, {sorted(free_vars(t))} are free")
    return BangAbs(name, Bang(App(t, Var(name))))


def promote_type(t: EalType) -> EalType:
    """``A -o B`` (possibly under quantifiers, which are instantiated away) to ``!A -o !B``."""
    if isinstance(t, Forall):
        raise ValueError("promote an instance, not a polymorphic type")
    return Lolli(OfCourse(t.dom), OfCourse(t.cod))


def string_encoding_type(n: int) -> EalType:
    return str_type(n)


def tree_encoding_type(n: int) -> EalType:
    return bt_type(n)
