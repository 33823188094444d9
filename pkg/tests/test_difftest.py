import itertools

import pytest

from churchtrans.difftest import (
    MAX_LEN,
    MAX_NODES,
    UnsupportedTarget,
    compile_machine,
    difftest,
    difftest_machine,
    machine_inputs,
    semantics,
    words,
)
from churchtrans.stlc_compile import TypedProgram
from churchtrans.string_transducers import run_register_transducer
from churchtrans.tree_transducers import tree_size
from conftest import load

AB = ("a", "b")


def test_words_in_size_then_lexicographic_order():
    ws = list(words(AB, 2))
    assert ws == [(), ("a",), ("b",), ("a", "a"), ("a", "b"), ("b", "a"), ("b", "b")]
    assert len(list(words(("a", "b", "c"), 4))) == sum(3 ** n for n in range(5))


def test_machine_inputs_bounds():
    with pytest.raises(ValueError):
        list(machine_inputs(load("xy.sst"), max_len=MAX_LEN + 1))
    with pytest.raises(ValueError):
        list(machine_inputs(load("mirror.rtt"), max_nodes=MAX_NODES + 1))
    trees = list(machine_inputs(load("mirror.rtt"), max_nodes=9))
    assert len(trees) == 275
    sizes = [tree_size(t) for t in trees]
    assert sizes == sorted(sizes)


def test_correct_program_passes():
    rep = difftest_machine(load("xy.sst"), "stlc", max_len=5)
    assert rep.ok and rep.checked == 63 and rep.depth_violations == 0 and rep.steps > 0


def test_smallest_counterexample_reported():
    xy = load("xy.sst")
    wrong = compile_machine(load("reverse.sst"), "stlc")
    rep = difftest(wrong, semantics(xy), words(AB, 4))
    assert not rep.ok
    # xy and reverse agree on the empty word only
    assert rep.counterexample == ("a",)
    assert rep.expected == run_register_transducer(xy, ("a",))
    assert rep.got == ("a",)
    # the failing input is counted as checked
    assert rep.checked == 2


def test_fuel_exhaustion_is_reported():
    rep = difftest_machine(load("doubling.hdt0l"), "stlc", max_len=4, fuel=10)
    assert not rep.ok and rep.error.startswith("fuel")


def test_unsupported_targets():
    for name in ("doubling.hdt0l", "even-a.dfa"):
        with pytest.raises(UnsupportedTarget):
            compile_machine(load(name), "eal")
    with pytest.raises(UnsupportedTarget):
        compile_machine(load("xy.sst"), "lisp")


def test_eal_difftests_preserve_depth():
    for name, target in [("xy.sst", "eal"), ("reverse.sst", "eal"), ("identity.rtt", "eal")]:
        rep = difftest_machine(load(name), target, max_len=4, max_nodes=7)
        assert rep.ok and rep.depth_violations == 0, name


def test_tree_program_on_every_small_tree():
    p = compile_machine(load("mirror.rtt"), "stlc")
    assert isinstance(p, TypedProgram)
    rep = difftest(p, semantics(load("mirror.rtt")), machine_inputs(load("mirror.rtt"), max_nodes=7))
    assert rep.ok and rep.checked == len(list(itertools.islice(machine_inputs(load("mirror.rtt"), max_nodes=7), 10**6)))
