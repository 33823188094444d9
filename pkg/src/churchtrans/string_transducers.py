"""Register transducers, HDT0L systems and the string operations built on them."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

from .report import ValidityReport

Word = tuple[str, ...]


class IndexOutOfFamily(KeyError):
    pass


class IncompleteDelta(ValueError):
    pass


# ---------------------------------------------------------------------------
# Morphisms


@dataclass(frozen=True)
class Morphism:
    source: tuple[str, ...]
    target: tuple[str, ...]
    images: Mapping[str, Word]

    def __post_init__(self):
        for c in self.source:
            if c not in self.images:
                raise ValueError(f"morphism undefined on {c!r}")
            for d in self.images[c]:
                if d not in self.target:
                    raise ValueError(f"image of {c!r} uses {d!r} outside the target alphabet")

    @classmethod
    def identity(cls, alphabet: Sequence[str]) -> "Morphism":
        return cls(tuple(alphabet), tuple(alphabet), {c: (c,) for c in alphabet})

    def __call__(self, w: Sequence[str]) -> Word:
        return apply_morphism(self, w)

    def then(self, other: "Morphism") -> "Morphism":
        """``other . self``."""
        return Morphism(self.source, other.target, {c: other(self.images[c]) for c in self.source})


def apply_morphism(phi: Morphism, w: Sequence[str]) -> Word:
    out: list[str] = []
    for c in w:
        if c not in phi.images:
            raise ValueError(f"{c!r} is not in the source alphabet")
        out.extend(phi.images[c])
    return tuple(out)


# ---------------------------------------------------------------------------
# Register transducers


@dataclass(frozen=True)
class RegisterTransducer:
    name: str
    input_alphabet: tuple[str, ...]
    output_alphabet: tuple[str, ...]
    registers: tuple[str, ...]
    states: tuple[str, ...]
    initial: str
    delta: Mapping[tuple[str, str], tuple[str, Mapping[str, Word]]]
    output: Mapping[str, Word]

    def __post_init__(self):
        regs = set(self.registers)
        if regs & (set(self.input_alphabet) | set(self.output_alphabet)):
            raise ValueError("registers must be disjoint from both alphabets")
        if self.initial not in self.states:
            raise ValueError(f"initial state {self.initial} not declared")
        symbols = regs | set(self.output_alphabet)
        for q in self.states:
            for a in self.input_alphabet:
                if (q, a) not in self.delta:
                    raise IncompleteDelta(f"delta undefined at ({q}, {a})")
                q2, upd = self.delta[(q, a)]
                if q2 not in self.states:
                    raise ValueError(f"delta({q}, {a}) targets unknown state {q2}")
                if set(upd) != regs:
                    raise ValueError(f"delta({q}, {a}) must update exactly the declared registers")
                for r, word in upd.items():
                    bad = [c for c in word if c not in symbols]
                    if bad:
                        raise ValueError(f"delta({q}, {a}): {r} := uses undeclared {bad[0]!r}")
            if q not in self.output:
                raise ValueError(f"no output for state {q}")
            bad = [c for c in self.output[q] if c not in symbols]
            if bad:
                raise ValueError(f"output of {q} uses undeclared {bad[0]!r}")

    @classmethod
    def completed(cls, name, input_alphabet, output_alphabet, registers, states, initial, delta, output):
        """Fill missing transitions with identity updates and self-loops."""
        full = dict(delta)
        for q in states:
            for a in input_alphabet:
                full.setdefault((q, a), (q, {r: (r,) for r in registers}))
        return cls(name, tuple(input_alphabet), tuple(output_alphabet), tuple(registers),
                   tuple(states), initial, full, output)


@dataclass(frozen=True)
class Configuration:
    state: str
    store: Mapping[str, Word]


def substitute_registers(word: Sequence[str], store: Mapping[str, Word]) -> Word:
    """``s*``: registers replaced by their values, letters kept."""
    out: list[str] = []
    for c in word:
        if c in store:
            out.extend(store[c])
        else:
            out.append(c)
    return tuple(out)


def initial_configuration(rt: RegisterTransducer) -> Configuration:
    return Configuration(rt.initial, {r: () for r in rt.registers})


def step(rt: RegisterTransducer, conf: Configuration, a: str) -> Configuration:
    q2, upd = rt.delta[(conf.state, a)]
    return Configuration(q2, {r: substitute_registers(upd[r], conf.store) for r in rt.registers})


def run_register_transducer(rt: RegisterTransducer, w: Sequence[str]) -> Word:
    conf = initial_configuration(rt)
    for a in w:
        if a not in rt.input_alphabet:
            raise ValueError(f"{a!r} is not in the input alphabet")
        conf = step(rt, conf, a)
    return substitute_registers(rt.output[conf.state], conf.store)


def check_copyless(rt: RegisterTransducer) -> ValidityReport:
    rep = ValidityReport()
    for (q, a), (_, upd) in rt.delta.items():
        counts: dict[str, int] = {}
        for r in rt.registers:
            for c in upd[r]:
                if c in upd:
                    counts[c] = counts.get(c, 0) + 1
        for r in rt.registers:
            if counts.get(r, 0) > 1:
                rep.fail(f"delta({q}, {a}): register {r} used {counts[r]} times")
    for q in rt.states:
        for r in rt.registers:
            n = rt.output[q].count(r)
            if n > 1:
                rep.fail(f"output({q}): register {r} used {n} times")
    return rep


# ---------------------------------------------------------------------------
# Backward semantics


OutputFunction = Mapping[str, Word]


def delta_o(rt: RegisterTransducer, a: str, g: OutputFunction) -> dict[str, Word]:
    out = {}
    for q in rt.states:
        q2, upd = rt.delta[(q, a)]
        out[q] = substitute_registers(g[q2], upd)
    return out


def erase_registers(rt: RegisterTransducer, word: Sequence[str]) -> Word:
    regs = set(rt.registers)
    return tuple(c for c in word if c not in regs)


def backward_output_function(rt: RegisterTransducer, w: Sequence[str]) -> dict[str, Word]:
    g = dict(rt.output)
    for a in reversed(w):
        g = delta_o(rt, a, g)
    return g


def backward_run(rt: RegisterTransducer, w: Sequence[str]) -> Word:
    return erase_registers(rt, backward_output_function(rt, w)[rt.initial])


# ---------------------------------------------------------------------------
# HDT0L systems


@dataclass(frozen=True)
class HDT0LSystem:
    name: str
    input_alphabet: tuple[str, ...]
    work_alphabet: tuple[str, ...]
    output_alphabet: tuple[str, ...]
    init: Word
    rules: Mapping[str, Morphism]
    final: Morphism

    def __post_init__(self):
        for c in self.input_alphabet:
            h = self.rules.get(c)
            if h is None:
                raise ValueError(f"no morphism for input letter {c!r}")
            if set(h.source) != set(self.work_alphabet) or set(h.target) - set(self.work_alphabet):
                raise ValueError(f"morphism for {c!r} must map the work alphabet to itself")
        if set(self.final.source) != set(self.work_alphabet):
            raise ValueError("final morphism must be defined on the work alphabet")
        for d in self.init:
            if d not in self.work_alphabet:
                raise ValueError(f"initial word uses {d!r} outside the work alphabet")

    @classmethod
    def build(cls, name, input_alphabet, work_alphabet, output_alphabet, init, rules, final):
        """Build from plain dicts of letter images."""
        work = tuple(work_alphabet)
        return cls(
            name,
            tuple(input_alphabet),
            work,
            tuple(output_alphabet),
            tuple(init),
            {c: Morphism(work, work, {k: tuple(v) for k, v in rules[c].items()}) for c in input_alphabet},
            Morphism(work, tuple(output_alphabet), {k: tuple(v) for k, v in final.items()}),
        )


def run_hdt0l(sys: HDT0LSystem, w: Sequence[str]) -> Word:
    d = sys.init
    for c in reversed(w):
        if c not in sys.rules:
            raise ValueError(f"{c!r} is not in the input alphabet")
        d = apply_morphism(sys.rules[c], d)
    return apply_morphism(sys.final, d)


def tagged(q: str, s: str) -> str:
    return f"{q}.{s}"


def register_transducer_to_hdt0l(rt: RegisterTransducer) -> HDT0LSystem:
    """An equivalent HDT0L system.

    A work word encodes an output function ``G``: the letters tagged ``q``,
    read left to right, spell ``G(q)``.  The morphism for ``c`` rewrites it
    into ``delta_o(c, G)`` by sending each letter tagged ``q'`` to every
    state ``q`` whose ``c``-transition goes to ``q'``.
    """
    symbols = rt.output_alphabet + rt.registers
    work = tuple(tagged(q, s) for q in rt.states for s in symbols)
    regs = set(rt.registers)

    def tag(q: str, word: Sequence[str]) -> Word:
        return tuple(tagged(q, s) for s in word)

    rules = {}
    for c in rt.input_alphabet:
        images = {}
        for q2 in rt.states:
            for s in symbols:
                img: list[str] = []
                for q in rt.states:
                    target, upd = rt.delta[(q, c)]
                    if target == q2:
                        img.extend(tag(q, upd[s] if s in regs else (s,)))
                images[tagged(q2, s)] = tuple(img)
        rules[c] = images
    init = tuple(x for q in rt.states for x in tag(q, rt.output[q]))
    final = {tagged(q, s): ((s,) if q == rt.initial and s not in regs else ()) for q in rt.states for s in symbols}
    return HDT0LSystem.build(rt.name, rt.input_alphabet, work, rt.output_alphabet, init, rules, final)


# ---------------------------------------------------------------------------
# Squaring


def underline(c: str) -> str:
    return "_" + c


def underlined_alphabet(gamma: Sequence[str]) -> tuple[str, ...]:
    for c in gamma:
        if c.startswith("_"):
            raise ValueError(f"symbol {c!r} may not start with an underscore")
    return tuple(gamma) + tuple(underline(c) for c in gamma)


def squaring(gamma: Sequence[str], w: Sequence[str]) -> Word:
    for c in w:
        if c not in gamma:
            raise ValueError(f"{c!r} is not in the alphabet")
    out: list[str] = []
    for i in range(len(w)):
        out.extend(w[:i])
        out.append(underline(w[i]))
        out.extend(w[i + 1:])
    return tuple(out)


def reverse_sst(alphabet: Sequence[str], name: str = "reverse") -> RegisterTransducer:
    """Two registers: ``X`` accumulates the input, ``Y`` its mirror image; output ``Y``."""
    sigma = tuple(alphabet)
    delta = {("q", c): ("q", {"X": ("X", c), "Y": (c, "Y")}) for c in sigma}
    return RegisterTransducer(name, sigma, sigma, ("X", "Y"), ("q",), "q", delta, {"q": ("Y",)})


def squaring_pipeline(gamma: Sequence[str]) -> list[RegisterTransducer]:
    gamma = tuple(gamma)
    both = underlined_alphabet(gamma)
    # 1: prefix copies, each followed by the next letter underlined
    d1 = {("q", c): ("q", {"O": ("O", "P", underline(c)), "P": ("P", c)}) for c in gamma}
    step1 = RegisterTransducer("prefixes", gamma, both, ("O", "P"), ("q",), "q", d1, {"q": ("O",)})
    # 3: after each underlined letter, replay the underlined letters seen so far
    d3 = {}
    for c in gamma:
        d3[("q", c)] = ("q", {"O": ("O", c), "H": ("H",)})
        d3[("q", underline(c))] = ("q", {"O": ("O", "H", underline(c)), "H": ("H", c)})
    step3 = RegisterTransducer("history", both, both, ("O", "H"), ("q",), "q", d3, {"q": ("O",)})
    return [step1, reverse_sst(both, "reverse"), step3, reverse_sst(both, "reverse")]


def run_pipeline(machines: Sequence[RegisterTransducer], w: Sequence[str]) -> Word:
    for m in machines:
        w = run_register_transducer(m, w)
    return tuple(w)


# ---------------------------------------------------------------------------
# Composition by substitutions


def cbs(
    f: Callable[[Word], Sequence[str]],
    family: Mapping[str, Callable[[Word], Sequence[str]]],
    w: Sequence[str],
) -> Word:
    w = tuple(w)
    out: list[str] = []
    for i in f(w):
        if i not in family:
            raise IndexOutOfFamily(f"{i!r} has no function in the family")
        out.extend(family[i](w))
    return tuple(out)


# ---------------------------------------------------------------------------
# Standard machines and random generators


def xy_transducer() -> RegisterTransducer:
    """``w -> w . reverse(w)`` over ``{a, b}``."""
    delta = {("q", c): ("q", {"X": ("X", c), "Y": (c, "Y")}) for c in "ab"}
    return RegisterTransducer("xy", ("a", "b"), ("a", "b"), ("X", "Y"), ("q",), "q", delta, {"q": ("X", "Y")})


def doubling_hdt0l(gamma: Sequence[str] = ("a", "b")) -> HDT0LSystem:
    return HDT0LSystem.build(
        "doubling", gamma, ("x",), ("a",), ("x",), {c: {"x": ("x", "x")} for c in gamma}, {"x": ("a",)}
    )


def wrev_hdt0l() -> HDT0LSystem:
    """``w . reverse(w)`` as a HDT0L system with markers ``X``, ``Y``."""
    work = ("X", "Y", "a", "b")
    rules = {c: {"X": ("X", c), "Y": (c, "Y"), "a": ("a",), "b": ("b",)} for c in "ab"}
    return HDT0LSystem.build("wrev", ("a", "b"), work, ("a", "b"), ("X", "Y"), rules,
                             {"X": (), "Y": (), "a": ("a",), "b": ("b",)})


def _random_word(rng: random.Random, letters: Sequence[str], max_len: int) -> list[str]:
    return [rng.choice(letters) for _ in range(rng.randint(0, max_len))]


def _interleave(rng: random.Random, regs: list[str], letters: Sequence[str], max_letters: int) -> Word:
    out = list(regs)
    for _ in range(rng.randint(0, max_letters)):
        out.insert(rng.randint(0, len(out)), rng.choice(letters))
    return tuple(out)


def random_register_transducer(
    rng: random.Random,
    input_alphabet: Sequence[str] = ("a", "b"),
    output_alphabet: Sequence[str] = ("a", "b"),
    max_states: int = 3,
    max_registers: int = 3,
    copyless: bool = False,
    max_letters: int = 2,
    name: str = "random",
) -> RegisterTransducer:
    nq = rng.randint(1, max_states)
    nr = rng.randint(1, max_registers)
    states = tuple(f"q{i}" for i in range(nq))
    regs = tuple(f"R{i}" for i in range(nr))
    delta = {}
    for q in states:
        for a in input_alphabet:
            upd: dict[str, list[str]] = {r: [] for r in regs}
            for r in regs:
                if copyless:
                    # each register feeds at most one target, or is dropped
                    if rng.random() < 0.85:
                        upd[rng.choice(regs)].append(r)
                else:
                    for _ in range(rng.choice([0, 1, 1, 2])):
                        upd[rng.choice(regs)].append(r)
            words = {}
            for r in regs:
                rng.shuffle(upd[r])
                words[r] = _interleave(rng, upd[r], output_alphabet, max_letters)
            delta[(q, a)] = (rng.choice(states), words)
    output = {}
    for q in states:
        used = [r for r in regs if rng.random() < 0.7]
        if not copyless:
            used += [r for r in regs if rng.random() < 0.2]
        rng.shuffle(used)
        output[q] = _interleave(rng, used, output_alphabet, max_letters)
    return RegisterTransducer(name, tuple(input_alphabet), tuple(output_alphabet), regs, states,
                              states[0], delta, output)


def random_morphism(rng: random.Random, source: Sequence[str], target: Sequence[str], max_len: int = 3) -> Morphism:
    return Morphism(tuple(source), tuple(target), {c: tuple(_random_word(rng, target, max_len)) for c in source})


def random_hdt0l(
    rng: random.Random,
    input_alphabet: Sequence[str] = ("a", "b"),
    output_alphabet: Sequence[str] = ("a", "b"),
    work_size: int = 2,
    max_len: int = 2,
) -> HDT0LSystem:
    work = tuple(f"d{i}" for i in range(work_size))
    rules = {c: random_morphism(rng, work, work, max_len) for c in input_alphabet}
    return HDT0LSystem(
        "random",
        tuple(input_alphabet),
        work,
        tuple(output_alphabet),
        tuple(_random_word(rng, work, max_len)),
        rules,
        random_morphism(rng, work, output_alphabet, max_len),
    )
