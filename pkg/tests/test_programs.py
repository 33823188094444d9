import pytest

from churchtrans import eal_core as E
from churchtrans import stlc_core as S
from churchtrans.difftest import Runner, compile_machine
from churchtrans.eal_compile import compile_sst, promote_program
from churchtrans.programs import ProgramFormatError, check_program, dump_program, parse_program
from churchtrans.stlc_compile import Codec, TypedProgram
from churchtrans.string_transducers import xy_transducer
from churchtrans.terms import alpha_equal
from conftest import load

ABBA = ("a", "b", "b", "a")


def roundtrip(p):
    q = parse_program(dump_program(p))
    assert type(q) is type(p)
    assert alpha_equal(q.term, p.term)
    assert q.input == p.input and q.output == p.output
    assert check_program(q)
    return q


def test_stlc_roundtrip():
    p = compile_machine(load("xy.sst"), "stlc")
    q = roundtrip(p)
    ic = S.TypeInterner()
    assert ic(q.type) is ic(p.type)
    assert Runner(q)(("a", "b")) == ABBA


def test_pipeline_file_uses_abbreviations():
    p = compile_machine(load("squaring.pipeline"), "stlc")
    text = dump_program(p)
    assert "\ntypes\n" in text
    q = roundtrip(p)
    assert Runner(q)(("1", "2")) == ("_1", "2", "1", "_2")


def test_eal_roundtrip():
    p = compile_sst(xy_transducer())
    q = roundtrip(p)
    assert not q.promoted
    assert q.run("ab") == ABBA


def test_promoted_eal_roundtrip():
    q = roundtrip(promote_program(compile_sst(xy_transducer())))
    assert q.promoted
    assert q.run("ab") == ABBA


def test_tree_program_roundtrip():
    q = roundtrip(compile_machine(load("mirror.rtt"), "eal"))
    assert q.input.kind == "tree"


def test_wrong_type_fails_check():
    ident = S.parse(r"\x:o. x")
    rep = check_program(TypedProgram(ident, S.parse_type("o -> o -> o"), Codec("bool"), Codec("bool")))
    assert not rep
    assert "the term does not have its claimed type" in str(rep)
    assert check_program(TypedProgram(ident, S.parse_type("o -> o"), Codec("bool"), Codec("bool")))


def test_eal_tampered_type_fails_check():
    text = dump_program(compile_sst(xy_transducer()))
    lines = text.splitlines()
    i = lines.index("type")
    lines[i + 1] = "  'a -o 'a"
    assert not check_program(parse_program("\n".join(lines) + "\n"))


def header(kind="stlc", inp="string a b", out="string a b"):
    return f"program {kind}\ninput {inp}\noutput {out}\n"


GOOD_BODY = "type\n  o -> o\nterm\n  \\x:o. x\n"


@pytest.mark.parametrize("text", [
    "input string a\noutput string a\n" + GOOD_BODY,
    header() + "term\n  \\x:o. x\n",
    header() + "type\n  o -> o\n",
    header(kind="lisp") + GOOD_BODY,
    header(inp="string") + GOOD_BODY,
    header(inp="bool a") + GOOD_BODY,
    header(inp="list a") + GOOD_BODY,
    header() + "promoted\n" + GOOD_BODY,
    header() + GOOD_BODY + "type\n  o\n",
    header() + "type\n  o -> \nterm\n  \\x:o. x\n",
    header() + "type\n  o -> o\nterm\n  \\x:o. (x\n",
    header(kind="eal") + "type\n  'a -o 'a\nterm\n  \\x. x\n",
    header() + "types\n  T1 o\n" + GOOD_BODY,
    header() + "  stray\n" + GOOD_BODY,
    header() + "input string a\n" + GOOD_BODY,
    header() + "frobnicate\n" + GOOD_BODY,
])
def test_malformed_programs(text):
    with pytest.raises(ProgramFormatError):
        parse_program(text)


def test_minimal_stlc_file_parses():
    p = parse_program(header() + GOOD_BODY)
    assert isinstance(p, TypedProgram) and check_program(p)


def test_abbreviations_section():
    text = header() + "types\n  T1 = o -> o\n  T2 = T1 -> T1\ntype\n  T2\nterm\n  \\f:T1. f\n"
    p = parse_program(text)
    assert p.type == S.parse_type("(o -> o) -> o -> o")
    assert check_program(p)


def test_derivation_must_derive_the_term():
    text = dump_program(compile_sst(xy_transducer()))
    lines = text.splitlines()
    i = lines.index("term")
    lines[i + 1] = "  " + E.pretty(E.parse(r"\x. x"))
    with pytest.raises(ProgramFormatError):
        parse_program("\n".join(lines) + "\n")
