import pytest
from hypothesis import given, strategies as st

from churchtrans import stlc_core as S
from churchtrans.church_stlc import NAT, encode_string, str_type
from churchtrans.terms import App, Var, alpha_equal, size
from conftest import lambda_terms, typable_corpus


def numeral(n):
    return encode_string(("s",) * n, ("s",))


PLUS = S.parse(r"\m. \n. \f. \x. m f (n f x)")
TIMES = S.parse(r"\m. \n. \f. m (n f)")


def value(t):
    """Read a Church numeral back by counting, an oracle independent of decode."""
    nf = S.beta_normalize(App(App(t, Var("S")), Var("Z")))
    k = 0
    while nf != Var("Z"):
        assert nf.fun == Var("S")
        nf, k = nf.arg, k + 1
    return k


@pytest.mark.parametrize("m,n", [(0, 0), (2, 3), (4, 1), (3, 3)])
def test_church_arithmetic(m, n):
    assert value(App(App(PLUS, numeral(m)), numeral(n))) == m + n
    assert value(App(App(TIMES, numeral(m)), numeral(n))) == m * n


def test_principal_types():
    assert S.show_type(S.infer_type({}, S.parse(r"\x. \y. x"))) == "'a -> 'b -> 'a"
    assert S.show_type(S.infer_type({}, S.parse(r"\f. \g. \x. f (g x)"))) == "('a -> 'b) -> ('c -> 'a) -> 'c -> 'b"


@pytest.mark.parametrize("text", [r"\x. x x", r"(\x. x x) (\x. x x)", r"\f. f (\x. f)"])
def test_untypable(text):
    with pytest.raises(S.NotTypable):
        S.infer_type({}, S.parse(text))


def test_open_term_uses_context():
    ctx = {"f": S.parse_type("o -> o")}
    assert S.infer_type(ctx, S.parse(r"\x. f (f x)")) == S.parse_type("o -> o")
    with pytest.raises(S.NotTypable):
        S.infer_type({}, S.parse(r"\x. f x"))


def test_identity_admits_nat():
    # admits, not principal: Nat is an instance of 'a -> 'a
    assert S.check_type({}, S.parse(r"\x. x"), NAT)


def test_check_is_strict_about_eta():
    t = S.parse(r"\x : o -> o. x")
    assert S.check_type({}, t, S.parse_type("(o -> o) -> o -> o"))
    assert not S.check_type({}, t, S.parse_type("o -> o"))


def test_annotation_errors():
    assert not S.check_type({}, S.parse(r"\x : o. x x"), S.parse_type("o -> o"))
    assert not S.check_type({}, S.parse(r"\x : o. \y : o -> o. x y"), S.parse_type("o -> (o -> o) -> o"))


@pytest.mark.parametrize("n", [0, 1, 4])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_fast_path_matches_unification(n, k):
    # fully annotated encodings take the synthesis path; the unannotated
    # versions go through unification; both must accept the same types.
    # One letter fewer is never an instance: the last binder would need o.
    w = ("a",) * n
    sigma = tuple("abc"[:k])
    good, bad = str_type(k), str_type(k - 1)
    annotated = encode_string(w, sigma, annotate=True)
    plain = encode_string(w, sigma)
    assert S.check_type({}, annotated, good) and S.check_type({}, plain, good)
    assert not S.check_type({}, annotated, bad) and not S.check_type({}, plain, bad)


def test_type_parser_roundtrip():
    for text in ["o", "o -> o", "(o -> o) -> o", "'a -> ('b -> 'a) -> 'b"]:
        assert S.show_type(S.parse_type(text)) == text


def test_type_abbreviations_parse():
    env = {"E": S.parse_type("o -> o")}
    assert S.parse_type("E -> E", env) == S.parse_type("(o -> o) -> o -> o")
    t = S.parse(r"\f : E. f", env)
    assert S.check_type({}, t, S.parse_type("E -> E", env))


def test_abbreviations_name_shared_subtypes():
    big = S.power(S.power(S.O, 4, S.O), 3, S.O)
    pair = S.Arrow(big, big)
    ic = S.TypeInterner()
    root = ic(pair)
    defs, names = S.abbreviations([root])
    assert len(defs) == 1
    name, body = defs[0]
    assert S.show_type(root, names) == f"{name} -> {name}"
    assert S.parse_type(f"{name} -> {name}", {name: S.parse_type(body)}) == pair


def test_type_substitute_preserves_sharing():
    a = S.power(S.O, 3, S.O)
    shared = S.Arrow(a, a)
    out = S.type_substitute(shared, S.parse_type("o -> o"))
    assert out.dom is out.cod


def test_fuel_exhaustion():
    omega_like = S.parse(r"(\x. x x x) (\x. x x x)")
    with pytest.raises(S.FuelExhausted):
        S.beta_normalize(omega_like, fuel=200)


def test_substitution_avoids_capture():
    t = S.substitute(S.parse(r"\y. x y"), "x", Var("y"))
    assert alpha_equal(t, S.parse(r"\z. y z"))


@pytest.mark.parametrize("t", typable_corpus(40, seed=3), ids=lambda t: str(size(t)))
def test_normal_order_and_nbe_agree(t):
    assert alpha_equal(S.beta_normalize(t), S.beta_normalize(t, strategy="nbe"))


def test_subject_reduction_corpus():
    for t in typable_corpus(100):
        a = S.infer_type({}, t)
        u = t
        while (u := S.beta_step(u)) is not None:
            assert S.check_type({}, u, a), S.pretty(u)


@given(lambda_terms(max_leaves=8))
def test_inference_agrees_with_checking(t):
    try:
        a = S.infer_type({}, t)
    except S.NotTypable:
        assert not S.check_type({}, t, S.parse_type("'a"))
        return
    assert S.check_type({}, t, a)
    assert S.check_type({}, t, S.ground(a))


@given(st.integers(0, 6))
def test_normal_forms_are_stable(n):
    t = S.beta_normalize(App(App(PLUS, numeral(n)), numeral(1)))
    assert S.beta_step(t) is None
    assert alpha_equal(S.beta_normalize(t), t)
