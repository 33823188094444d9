import itertools
import random

import pytest
from hypothesis import assume, given, strategies as st

from churchtrans import eal_core as E
from churchtrans import eal_types as T
from churchtrans.church_stlc import NotAStringEncoding
from churchtrans.reduction import FuelExhausted
from churchtrans.eal_derivation import (
    Ann,
    Derivation,
    EalTypeError,
    check_derivation,
    dump_derivation,
    elaborate,
    erase,
    parse_derivation,
)
from churchtrans.terms import App, Bang, BangAbs, Abs, Var, alpha_equal, apps
from churchtrans.tree_transducers import trees_up_to_nodes
from conftest import random_eal_term

AB = ("a", "b")
A = T.TVar("a")


def all_words(sigma, max_len):
    for n in range(max_len + 1):
        yield from itertools.product(sigma, repeat=n)


def test_reduction_rules():
    assert E.eal_beta_normalize(E.parse(r"(\!x. !x) (!y)")) == E.parse("!y")
    assert E.eal_beta_normalize(E.parse(r"(\x. x) y")) == Var("y")


def test_stuck_bang_redex_stays():
    t = E.parse(r"(\!x. !x) y")
    assert E.eal_beta_normalize(t) == t


def test_linearity_examples():
    assert not E.check_linearity(E.parse(r"\x. f x x"))
    assert E.check_linearity(E.parse(r"\!x. f x x"))


def test_stratification_examples():
    assert not E.check_stratification(E.parse(r"\x. !x"))
    assert E.check_stratification(E.parse(r"\!x. !x"))
    rep = E.check_stratification(E.parse(r"\!x. x"))
    assert not rep and "depth 0, expected 1" in rep.problems[0]


def test_depth_ignores_outer_bangs():
    assert E.check_stratification(E.parse(r"!(\x. x)"))


def test_variable_axiom():
    d = Derivation("ax-lin", {"x": A}, {}, {}, Var("x"), A)
    assert check_derivation(d)


def bang_identity(sigma=A):
    body = Derivation("ax-temp", {}, {}, {"x": sigma}, Var("x"), sigma)
    boxed = Derivation("prom", {}, {"x": T.OfCourse(sigma)}, {}, Bang(Var("x")), T.OfCourse(sigma), (body,))
    term = BangAbs("x", Bang(Var("x")))
    return Derivation("lam!", {}, {}, {}, term, T.Lolli(T.OfCourse(sigma), T.OfCourse(sigma)), (boxed,))


def test_hand_built_bang_identity():
    d = bang_identity()
    assert check_derivation(d, E.parse(r"\!x. !x"))
    # and the elaborator finds one too
    assert check_derivation(elaborate(E.parse(r"\!x. !x"), d.type))


def test_forall_elim_at_bang_type_rejected():
    poly = T.parse_type("forall 'a. 'a -o 'a")
    ident = Abs("x", Var("x"))
    inner = Derivation("lam", {}, {}, {}, ident, T.Lolli(A, A),
                       (Derivation("ax-lin", {"x": A}, {}, {}, Var("x"), A),))
    gen = Derivation("forall-i", {}, {}, {}, ident, poly, (inner,))
    for inst, ok in [(T.parse_type("'b -o 'b"), True), (T.parse_type("!'b"), False)]:
        d = Derivation("forall-e", {}, {}, {}, ident, T.subst_type(poly.body, "a", inst), (gen,), inst)
        rep = check_derivation(d)
        assert bool(rep) == ok
        if not ok:
            assert "linear type" in str(rep)


def test_broken_derivations_report_path():
    d = bang_identity()
    bad = Derivation("lam!", {}, {}, {}, d.term, T.Lolli(T.OfCourse(A), A), d.premises)
    rep = check_derivation(bad)
    assert not rep and "codomain" in rep.problem
    # promotion with a linear variable left in the premise
    body = Derivation("ax-lin", {"x": A}, {}, {}, Var("x"), A)
    prom = Derivation("prom", {"x": A}, {}, {}, Bang(Var("x")), T.OfCourse(A), (body,))
    assert not check_derivation(prom)


def test_derivation_text_roundtrip():
    d = elaborate(E.eal_encode_string("ab", AB), T.str_type(2))
    back = parse_derivation(dump_derivation(d))
    assert check_derivation(back, d.term, d.type)
    assert dump_derivation(back) == dump_derivation(d)


def test_types_parse_and_print():
    for text in ["'a -o 'a", "!('a -o 'a) -o 'b", "forall 'a. !('a -o 'a) -o !('a -o 'a)"]:
        assert T.show_type(T.parse_type(text)) == text
    assert T.types_equal(T.parse_type("forall 'a. 'a -o 'a"), T.parse_type("forall 'b. 'b -o 'b"))


def test_linear_and_strict_classes():
    assert T.is_strictly_linear(T.parse_type("'a -o 'a"))
    assert T.is_linear(T.parse_type("forall 'a. 'a -o 'a"))
    assert not T.is_linear(T.parse_type("!'a"))


def test_string_encoding():
    assert alpha_equal(E.eal_encode_string("", AB), E.parse(r"\!f. \!g. !(\x. x)"))
    for w in all_words(AB, 6):
        t = E.eal_encode_string(w, AB)
        assert E.eal_decode_string(t, AB) == w
        assert E.check_linearity(t) and E.check_stratification(t)
    for w in ["", "b", "abba"]:
        assert check_derivation(elaborate(E.eal_encode_string(w, AB), T.str_type(2)))


def test_string_decode_rejects():
    with pytest.raises(NotAStringEncoding):
        E.eal_decode_string(E.parse(r"\!f. \x. x"), ("a",))


def test_tree_encoding():
    for t in trees_up_to_nodes(AB, 15):
        assert E.eal_decode_tree(E.eal_encode_tree(t, AB), AB) == t
    for t in trees_up_to_nodes(AB, 5):
        enc = E.eal_encode_tree(t, AB)
        assert E.check_linearity(enc) and E.check_stratification(enc)
        assert check_derivation(elaborate(enc, T.bt_type(2)))


def test_fin():
    assert alpha_equal(E.fin_encode(2, 3), E.parse(r"\x1. \x2. \x3. x2"))
    assert alpha_equal(E.fin_encode(1, 1), E.parse(r"\x. x"))
    for n in range(1, 5):
        for i in range(1, n + 1):
            assert E.fin_decode(E.fin_encode(i, n), n) == i
            got = E.eal_beta_normalize(apps(E.fin_encode(i, n), *[Var(f"v{j}") for j in range(1, n + 1)]))
            assert got == Var(f"v{i}")
            assert check_derivation(elaborate(E.fin_encode(i, n), T.fin_type(n)))
    with pytest.raises(E.IndexOutOfRange):
        E.fin_encode(0, 2)


def test_tensor_and_with():
    pair = E.tensor_intro([Var("a"), Var("b")])
    assert E.eal_beta_normalize(E.tensor_elim(pair, ["x", "y"], Var("x"))) == Var("a")
    w = E.with_intro(Var("r"), [Var("c1"), Var("c2"), Var("c3")])
    for i in (1, 2, 3):
        assert E.eal_beta_normalize(E.with_project(w, i, 3)) == App(Var(f"c{i}"), Var("r"))
    with pytest.raises(E.ArityMismatch):
        E.tensor_intro([Var("a")], [A, A])


def test_with_tensor_distribute():
    left = [T.parse_type("'a"), T.parse_type("'a -o 'a")]
    right = [T.parse_type("'a"), T.parse_type("'a -o 'a"), T.parse_type("'a")]
    dist = E.with_tensor_distribute(left, right)
    d = elaborate(dist)
    assert check_derivation(d)
    pairs = [T.tensor_type([a, b]) for a in left for b in right]
    assert T.types_equal(d.type, T.lollis(T.with_type(left), T.with_type(right), T.with_type(pairs)))
    # project every pair out of two concrete withs and read the tensor back
    lw = E.with_intro(Var("r"), [Abs("s", App(Var("L1"), Var("s"))), Abs("s", App(Var("L2"), Var("s")))])
    rw = E.with_intro(Var("t"), [Abs("s", App(Var(f"R{j}"), Var("s"))) for j in (1, 2, 3)])
    applied = apps(erase(dist), lw, rw)
    for i, j in itertools.product((1, 2), (1, 2, 3)):
        k = (i - 1) * 3 + j
        comp = E.with_project(applied, k, 6)
        nf = E.eal_beta_normalize(E.tensor_elim(comp, ["x", "y"], apps(Var("pair"), Var("x"), Var("y"))))
        assert nf == apps(Var("pair"), App(Var(f"L{i}"), Var("r")), App(Var(f"R{j}"), Var("t")))


def test_bang_promote():
    p = E.bang_promote(E.parse(r"\y. y"))
    assert E.eal_beta_normalize(App(p, Bang(Var("v")))) == Bang(Var("v"))
    assert E.check_stratification(p)
    with pytest.raises(ValueError):
        E.bang_promote(Var("free"))


def test_elaboration_failures():
    with pytest.raises(EalTypeError):
        elaborate(E.parse(r"\x. x x"))
    with pytest.raises(EalTypeError):
        elaborate(Ann(E.parse(r"\x. x"), T.parse_type("!'a -o 'a")))


def corpus(seed, n, need_redex=False):
    rng = random.Random(seed)
    out = []
    while len(out) < n:
        t = random_eal_term(rng, rng.randint(4, 14))
        if not (E.check_linearity(t) and E.check_stratification(t)):
            continue
        if need_redex and E.eal_beta_step(t) is None:
            continue
        out.append(t)
    return out


@given(st.integers(0, 2**32 - 1))
def test_checker_stability(seed):
    (t,) = corpus(seed, 1, need_redex=True)
    steps = 0
    while t is not None and steps < 50:
        assert E.check_linearity(t) and E.check_stratification(t)
        t, steps = E.eal_beta_step(t), steps + 1


@given(st.integers(0, 2**32 - 1))
def test_depth_preservation_on_random_terms(seed):
    (t,) = corpus(seed, 1, need_redex=True)
    try:
        _, _, bad = E.depth_preserving_trace(t, fuel=200)
    except FuelExhausted:
        return
    assert bad == []


@given(st.integers(0, 2**32 - 1))
def test_derivations_imply_syntactic_checks(seed):
    rng = random.Random(seed)
    t = random_eal_term(rng, rng.randint(3, 12))
    try:
        d = elaborate(t)
    except EalTypeError:
        assume(False)
    assert check_derivation(d)
    assert E.check_linearity(d.term) and E.check_stratification(d.term)
    assert alpha_equal(d.term, t)


def test_non_stratified_terms_have_no_derivation():
    for text in [r"\x. !x", r"\!x. x", r"\!f. !(f (f !f))"]:
        with pytest.raises(EalTypeError):
            elaborate(E.parse(text))
