import itertools

import pytest
from hypothesis import given, strategies as st

from churchtrans import stlc_core as S
from churchtrans.church_stlc import (
    BOOL,
    NAT,
    NotABoolEncoding,
    NotAStringEncoding,
    NotATreeEncoding,
    SymbolNotInAlphabet,
    bt_type,
    concat_term,
    decode_bool,
    decode_hole_tree,
    decode_string,
    decode_tree,
    encode_bool,
    encode_hole_tree,
    encode_string,
    encode_tree,
    str_type,
)
from churchtrans.terms import alpha_equal
from churchtrans.tree_transducers import HOLE, LEAF, Node, NodeL, NodeR, trees_up_to_nodes

AB = ("a", "b")


def test_empty_word_shape():
    assert alpha_equal(encode_string("", AB), S.parse(r"\fa. \fb. \x. x"))


def test_word_shape():
    assert alpha_equal(encode_string("ab", AB), S.parse(r"\fa. \fb. \x. fa (fb x)"))


def test_unary_words_are_numerals():
    assert alpha_equal(encode_string("11", ("1",)), S.parse(r"\f. \x. f (f x)"))
    assert NAT == str_type(1)


def test_unknown_symbol():
    with pytest.raises(SymbolNotInAlphabet):
        encode_string("abc", AB)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_string_roundtrip_exhaustive(k):
    sigma = tuple("abc"[:k])
    for n in range(7):
        for w in itertools.product(sigma, repeat=n):
            assert decode_string(encode_string(w, sigma), sigma) == w


def test_eta_short_numeral_decodes():
    assert decode_string(S.parse(r"\f. f"), ("1",)) == ("1",)


def test_wrong_spine():
    with pytest.raises(NotAStringEncoding):
        decode_string(S.parse(r"\f. \x. x f"), ("1",))


def test_decoding_normalizes_first():
    # (\u. u) applied to "ba"
    t = S.parse(r"(\u. u) (\f. \g. \x. g (f x))")
    assert decode_string(t, AB) == ("b", "a")


def test_booleans():
    assert decode_bool(encode_bool(True)) is True
    assert decode_bool(encode_bool(False)) is False
    with pytest.raises(NotABoolEncoding):
        decode_bool(S.parse(r"\x. \y. x y"))
    assert S.check_type({}, S.parse(r"\x : o. \y : o. y"), BOOL)


def test_tree_shapes():
    assert alpha_equal(encode_tree(LEAF, AB), S.parse(r"\f. \g. \x. x"))
    assert alpha_equal(encode_tree(Node("a", LEAF, LEAF), ("a",)), S.parse(r"\f. \x. f x x"))


def test_tree_roundtrip_up_to_eleven_nodes():
    for t in trees_up_to_nodes(AB, 11):
        assert decode_tree(encode_tree(t, AB), AB) == t


def test_not_a_tree():
    with pytest.raises(NotATreeEncoding):
        decode_tree(S.parse(r"\f. \x. f x"), ("a",))


@pytest.mark.parametrize("t", list(trees_up_to_nodes(AB, 5)), ids=str)
def test_hole_tree_roundtrip(t):
    # put the hole at every leaf position
    def holes(t):
        if t == LEAF:
            yield HOLE
            return
        for h in holes(t.left):
            yield NodeL(t.label, h, t.right)
        for h in holes(t.right):
            yield NodeR(t.label, t.left, h)

    for h in holes(t):
        assert decode_hole_tree(encode_hole_tree(h, AB), AB) == h


@pytest.mark.parametrize("w", ["", "a", "ab", "bba"])
def test_encodings_typecheck(w):
    for base in [S.O, S.parse_type("o -> o"), BOOL]:
        assert S.check_type({}, encode_string(w, AB, annotate=True) if base == S.O else encode_string(w, AB),
                            S.type_substitute(str_type(2), base))


@pytest.mark.parametrize("t", list(trees_up_to_nodes(AB, 5)), ids=str)
def test_tree_encodings_typecheck(t):
    assert S.check_type({}, encode_tree(t, AB, annotate=True), bt_type(2))
    assert S.check_type({}, encode_tree(t, AB), S.type_substitute(bt_type(2), NAT))


words = st.lists(st.sampled_from(AB), max_size=6).map(tuple)


@given(words, words)
def test_concatenation_homomorphism(u, v):
    t = concat_term(encode_string(u, AB), encode_string(v, AB), 2)
    assert decode_string(t, AB) == u + v
