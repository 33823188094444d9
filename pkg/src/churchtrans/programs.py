"""Program files: a compiled term with its claimed type and codecs.

::

    program stlc | eal
    input string a b        # or: tree a b, bool
    output string a b
    promoted                # eal only, when the program maps !Str to !Str
    types                   # stlc only, optional: T1 = <type>, one per line
      T1 = ...
    type
      <type>
    term
      <term>
    derivation              # eal only
      <indented rule tree>

Section bodies are indented by two spaces; blank lines are ignored.
"""

from __future__ import annotations

from typing import Union

from . import eal_core, eal_types, stlc_core
from .eal_compile import EalProgram
from .eal_derivation import EalTypeError, dump_derivation, parse_derivation
from .report import ValidityReport
from .stlc_compile import Codec, TypedProgram
from .terms import Abs, TermSyntaxError, alpha_equal, subterms

Program = Union[TypedProgram, EalProgram]

_SECTIONS = ("types", "type", "term", "derivation")


class ProgramFormatError(ValueError):
    pass


def calculus(p: Program) -> str:
    return "eal" if isinstance(p, EalProgram) else "stlc"


def _indent(text: str) -> list[str]:
    return ["  " + line for line in text.splitlines()]


def dump_program(p: Program) -> str:
    lines = [f"program {calculus(p)}", f"input {p.input}", f"output {p.output}"]
    if isinstance(p, EalProgram):
        if p.promoted:
            lines.append("promoted")
        lines += ["type", "  " + eal_types.show_type(p.type), "term", "  " + eal_core.pretty(p.term)]
        lines += ["derivation", *_indent(dump_derivation(p.derivation))]
    else:
        # nested encodings make types grow multiplicatively; name shared parts
        ic = stlc_core.TypeInterner()
        roots = [ic(p.type)] + [ic(t.annotation) for t in subterms(p.term)
                                if isinstance(t, Abs) and t.annotation is not None]
        defs, names = stlc_core.abbreviations(roots)
        if defs:
            lines += ["types", *[f"  {n} = {body}" for n, body in defs]]
        lines += ["type", "  " + stlc_core.show_type(roots[0], names),
                  "term", "  " + stlc_core.pretty(p.term, lambda a: stlc_core.show_type(ic(a), names))]
    return "\n".join(lines) + "\n"


def _codec(text: str) -> Codec:
    words = text.split()
    if not words or words[0] not in ("string", "tree", "bool"):
        raise ProgramFormatError(f"bad codec {text!r}")
    if words[0] == "bool":
        if len(words) > 1:
            raise ProgramFormatError("bool takes no alphabet")
        return Codec("bool")
    if len(words) == 1:
        raise ProgramFormatError(f"{words[0]} codec needs an alphabet")
    return Codec(words[0], tuple(words[1:]))


def parse_program(text: str) -> Program:
    header: dict[str, str] = {}
    sections: dict[str, list[str]] = {}
    current = None
    for raw in text.splitlines():
        if not raw.strip() or raw.lstrip().startswith("#") and not raw.startswith(" "):
            continue
        if raw.startswith(" "):
            if current is None:
                raise ProgramFormatError(f"indented line outside a section: {raw.strip()!r}")
            sections[current].append(raw[2:] if raw.startswith("  ") else raw.lstrip())
            continue
        key, _, rest = raw.strip().partition(" ")
        if key in _SECTIONS:
            if key in sections:
                raise ProgramFormatError(f"section {key} given twice")
            current = key
            sections[key] = []
        elif key in ("program", "input", "output", "promoted"):
            if key in header:
                raise ProgramFormatError(f"{key} given twice")
            header[key] = rest.strip()
            current = None
        else:
            raise ProgramFormatError(f"unexpected {key!r}")
    for key in ("program", "input", "output"):
        if key not in header:
            raise ProgramFormatError(f"missing {key} line")
    for key in ("type", "term"):
        if not "".join(sections.get(key, [])).strip():
            raise ProgramFormatError(f"missing {key} section")
    kind = header["program"]
    inp, out = _codec(header["input"]), _codec(header["output"])
    ty_text = "\n".join(sections["type"])
    term_text = "\n".join(sections["term"])
    try:
        if kind == "stlc":
            if "derivation" in sections or "promoted" in header:
                raise ProgramFormatError("stlc programs have no derivation and cannot be promoted")
            env = _abbreviations(sections.get("types", []))
            return TypedProgram(stlc_core.parse(term_text, env), stlc_core.parse_type(ty_text, env), inp, out)
        if kind != "eal":
            raise ProgramFormatError(f"unknown calculus {kind!r}")
        if "types" in sections:
            raise ProgramFormatError("type abbreviations are only used by stlc programs")
        if "derivation" not in sections:
            raise ProgramFormatError("eal programs need a derivation section")
        term = eal_core.parse(term_text)
        ty = eal_types.parse_type(ty_text)
        d = parse_derivation("\n".join(sections["derivation"]))
    except (TermSyntaxError, EalTypeError, TypeError) as e:
        raise ProgramFormatError(str(e)) from None
    if not alpha_equal(d.term, term):
        raise ProgramFormatError("the derivation does not derive the given term")
    return EalProgram(term, ty, d, inp, out, "promoted" in header)


def _abbreviations(lines: list[str]) -> dict:
    env: dict = {}
    for line in lines:
        if not line.strip():
            continue
        name, eq, body = line.partition("=")
        name = name.strip()
        if not eq or not name.isidentifier() or name == "o":
            raise ProgramFormatError(f"bad type abbreviation {line.strip()!r}")
        if name in env:
            raise ProgramFormatError(f"type {name} defined twice")
        env[name] = stlc_core.parse_type(body, env)
    return env


def check_program(p: Program) -> ValidityReport:
    """Type (and for EAλ, linearity, stratification and derivation) checks."""
    if isinstance(p, EalProgram):
        return p.check()
    rep = ValidityReport()
    if not p.check():
        rep.fail("the term does not have its claimed type")
    return rep
