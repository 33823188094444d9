import itertools
import random

import pytest
from hypothesis import given, strategies as st

from churchtrans.string_transducers import (
    HDT0LSystem,
    IncompleteDelta,
    IndexOutOfFamily,
    Morphism,
    RegisterTransducer,
    apply_morphism,
    backward_output_function,
    backward_run,
    cbs,
    check_copyless,
    delta_o,
    doubling_hdt0l,
    random_hdt0l,
    random_register_transducer,
    register_transducer_to_hdt0l,
    reverse_sst,
    run_hdt0l,
    run_pipeline,
    run_register_transducer,
    squaring,
    squaring_pipeline,
    underline,
    wrev_hdt0l,
    xy_transducer,
)

AB = ("a", "b")
G4 = ("1", "2", "3", "4")


def all_words(sigma, max_len):
    for n in range(max_len + 1):
        yield from itertools.product(sigma, repeat=n)


def square_oracle(w):
    # block i is w with its i-th letter underlined
    out = []
    for i in range(len(w)):
        out += [("_" + c if j == i else c) for j, c in enumerate(w)]
    return tuple(out)


def one_register(update, out=("X",)):
    delta = {("q", c): ("q", {"X": tuple(update)}) for c in AB}
    return RegisterTransducer("m", AB, AB, ("X",), ("q",), "q", delta, {"q": tuple(out)})


def test_xy_on_ab():
    assert "".join(run_register_transducer(xy_transducer(), "ab")) == "abba"


def test_xy_exhaustive():
    for w in all_words(AB, 6):
        assert run_register_transducer(xy_transducer(), w) == w + w[::-1]


def test_empty_input_gives_erased_output():
    rt = one_register(("X", "a"), ("b", "X", "a"))
    assert run_register_transducer(rt, ()) == ("b", "a")


def test_doubling_register_stays_empty():
    rt = one_register(("X", "X"))
    assert run_register_transducer(rt, "abab") == ()


def test_copyless_checks():
    assert check_copyless(xy_transducer())
    rep = check_copyless(one_register(("X", "X")))
    assert not rep and "register X used 2 times" in rep.problems[0]
    rep = check_copyless(one_register(("X",), ("X", "X")))
    assert not rep and "output(q)" in rep.problems[0]


def test_partial_delta_rejected():
    with pytest.raises(IncompleteDelta):
        RegisterTransducer("m", AB, AB, ("X",), ("q",), "q", {("q", "a"): ("q", {"X": ("X",)})}, {"q": ("X",)})
    m = RegisterTransducer.completed("m", AB, AB, ("X",), ("q",), "q",
                                     {("q", "a"): ("q", {"X": ("X", "a")})}, {"q": ("X",)})
    assert run_register_transducer(m, "abab") == ("a", "a")


def test_registers_disjoint_from_letters():
    with pytest.raises(ValueError):
        RegisterTransducer("m", AB, AB, ("a",), ("q",), "q",
                           {("q", c): ("q", {"a": ("a",)}) for c in AB}, {"q": ("a",)})


def test_morphism_examples():
    phi = Morphism(AB, AB, {"a": ("a", "b"), "b": ()})
    assert apply_morphism(phi, "ba") == ("a", "b")
    assert apply_morphism(phi, "") == ()
    ident = Morphism.identity(AB)
    for w in all_words(AB, 4):
        assert ident(w) == w


@given(st.lists(st.sampled_from(AB), max_size=6), st.lists(st.sampled_from(AB), max_size=6))
def test_morphisms_are_monoid_maps(u, v):
    phi = Morphism(AB, ("a", "b"), {"a": ("b", "b"), "b": ("a",)})
    assert phi(u + v) == phi(u) + phi(v)


def test_doubling():
    d = doubling_hdt0l()
    assert "".join(run_hdt0l(d, "bb")) == "aaaa"
    assert run_hdt0l(d, ()) == ("a",)
    for w in all_words(AB, 4):
        assert len(run_hdt0l(d, w)) == 2 ** len(w)


def test_wrev_matches_xy():
    for w in all_words(AB, 5):
        assert run_hdt0l(wrev_hdt0l(), w) == w + w[::-1]


@given(st.integers(0, 10_000), st.lists(st.sampled_from(AB), max_size=4), st.lists(st.sampled_from(AB), max_size=4))
def test_hdt0l_runs_compose(seed, u, v):
    # running on u.v is running on v, then pushing the work word through u's morphisms
    sys = random_hdt0l(random.Random(seed), AB, AB, 3)
    d = sys.init
    for c in reversed(v):
        d = sys.rules[c](d)
    mid = HDT0LSystem(sys.name, sys.input_alphabet, sys.work_alphabet, sys.output_alphabet, d, sys.rules, sys.final)
    assert run_hdt0l(sys, u + v) == run_hdt0l(mid, u)


def test_squaring_worked_example():
    out = squaring(G4, "1234")
    assert out == ("_1", "2", "3", "4", "1", "_2", "3", "4", "1", "2", "_3", "4", "1", "2", "3", "_4")
    assert squaring(G4, ()) == ()


def test_squaring_oracle_and_length():
    for w in all_words(("1", "2"), 6):
        out = squaring(("1", "2"), w)
        assert out == square_oracle(w)
        assert len(out) == len(w) ** 2


def test_pipeline_intermediate_strings():
    steps = squaring_pipeline(G4)
    expected = [
        "_1 1 _2 1 2 _3 1 2 3 _4",
        "_4 3 2 1 _3 2 1 _2 1 _1",
        "_4 3 2 1 4 _3 2 1 4 3 _2 1 4 3 2 _1",
        "_1 2 3 4 1 _2 3 4 1 2 _3 4 1 2 3 _4",
    ]
    w = tuple("1234")
    for m, want in zip(steps, expected):
        w = run_register_transducer(m, w)
        assert " ".join(w) == want


def test_pipeline_shape():
    steps = squaring_pipeline(G4)
    assert [len(m.registers) for m in steps] == [2, 2, 2, 2]
    assert steps[1] == steps[3]
    assert not check_copyless(steps[0]) and check_copyless(steps[1])


def test_pipeline_agrees_with_squaring():
    steps = squaring_pipeline(("1", "2"))
    assert run_pipeline(steps, ()) == ()
    for w in all_words(("1", "2"), 5):
        assert run_pipeline(steps, w) == square_oracle(w)


def test_reverse_sst():
    for w in all_words(AB, 5):
        assert run_register_transducer(reverse_sst(AB), w) == w[::-1]


def test_cbs_examples():
    f = lambda w: ("i",) * len(w)
    assert "".join(cbs(f, {"i": lambda w: w}, "ab")) == "abab"
    for w in all_words(AB, 4):
        assert cbs(lambda w: (), {"i": lambda w: w}, w) == ()
    with pytest.raises(IndexOutOfFamily):
        cbs(lambda w: ("j",), {"i": lambda w: w}, "a")


def test_cbs_length_by_unfolding():
    f = lambda w: tuple("xy"[c == "b"] for c in w)
    family = {"x": lambda w: w + w, "y": lambda w: ("a",)}
    for w in all_words(AB, 4):
        out = cbs(f, family, w)
        assert len(out) == sum(len(family[i](w)) for i in f(w))


def test_delta_o_on_xy():
    m = xy_transducer()
    assert delta_o(m, "a", {"q": ("X", "Y")}) == {"q": ("X", "a", "a", "Y")}
    assert delta_o(m, "a", {"q": ()}) == {"q": ()}


def test_delta_o_register_free_is_reindexing():
    rng = random.Random(5)
    for _ in range(20):
        m = random_register_transducer(rng, max_states=3)
        g = {q: tuple(rng.choice(AB) for _ in range(rng.randint(0, 3))) for q in m.states}
        for c in AB:
            assert delta_o(m, c, g) == {q: g[m.delta[(q, c)][0]] for q in m.states}


def test_backward_run_on_xy():
    for w in all_words(AB, 6):
        assert backward_run(xy_transducer(), w) == run_register_transducer(xy_transducer(), w)
    assert backward_output_function(xy_transducer(), ()) == {"q": ("X", "Y")}


@pytest.mark.parametrize("copyless", [False, True])
def test_backward_run_random(copyless):
    rng = random.Random(11 + copyless)
    for _ in range(20):
        m = random_register_transducer(rng, max_states=3, max_registers=3, copyless=copyless)
        assert bool(check_copyless(m)) or not copyless
        for w in all_words(AB, 5):
            assert backward_run(m, w) == run_register_transducer(m, w)


def test_copyless_growth_is_linear():
    rng = random.Random(2)
    for _ in range(15):
        m = random_register_transducer(rng, copyless=True)
        c = max(len(u) for _, upd in m.delta.values() for u in upd.values())
        c = max(c, *(len(o) for o in m.output.values())) * max(1, len(m.registers))
        for w in all_words(AB, 8):
            assert len(run_register_transducer(m, w)) <= c * (len(w) + 1)


def test_register_transducer_to_hdt0l():
    rng = random.Random(3)
    machines = [xy_transducer(), *squaring_pipeline(("1", "2"))]
    machines += [random_register_transducer(rng, copyless=i % 2 == 0) for i in range(20)]
    for m in machines:
        h = register_transducer_to_hdt0l(m)
        assert len(h.work_alphabet) == len(m.states) * (len(m.output_alphabet) + len(m.registers))
        for w in all_words(m.input_alphabet, 4):
            assert run_hdt0l(h, w) == run_register_transducer(m, w)


def test_underline_naming():
    assert underline("a") == "_a"
