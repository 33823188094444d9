"""Binary trees, one-hole trees, tree expressions, RTT and BRTT semantics."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Iterator, Mapping, Sequence, Union

from .report import ValidityReport

# ---------------------------------------------------------------------------
# Trees


@dataclass(frozen=True, slots=True)
class Leaf:
    def __str__(self) -> str:
        return "()"


@dataclass(frozen=True, slots=True)
class Node:
    label: str
    left: "BinTree"
    right: "BinTree"

    def __str__(self) -> str:
        return f"{self.label}({self.left},{self.right})"


BinTree = Union[Leaf, Node]
LEAF = Leaf()


@dataclass(frozen=True, slots=True)
class Hole:
    def __str__(self) -> str:
        return "box"


@dataclass(frozen=True, slots=True)
class NodeL:
    """``a<T', U>``: the hole is in the left subtree."""

    label: str
    hole: "OneHoleTree"
    other: BinTree

    def __str__(self) -> str:
        return f"{self.label}({self.hole},{self.other})"


@dataclass(frozen=True, slots=True)
class NodeR:
    label: str
    other: BinTree
    hole: "OneHoleTree"

    def __str__(self) -> str:
        return f"{self.label}({self.other},{self.hole})"


OneHoleTree = Union[Hole, NodeL, NodeR]
HOLE = Hole()


def hole_subst(t: OneHoleTree, u: BinTree) -> BinTree:
    """``T'[U]``."""
    if isinstance(t, Hole):
        return u
    if isinstance(t, NodeL):
        return Node(t.label, hole_subst(t.hole, u), t.other)
    return Node(t.label, t.other, hole_subst(t.hole, u))


def hole_compose(t: OneHoleTree, u: OneHoleTree) -> OneHoleTree:
    """``T'[U']``, again a one-hole tree."""
    if isinstance(t, Hole):
        return u
    if isinstance(t, NodeL):
        return NodeL(t.label, hole_compose(t.hole, u), t.other)
    return NodeR(t.label, t.other, hole_compose(t.hole, u))


def tree_size(t: BinTree) -> int:
    """Number of nodes, leaves included."""
    if isinstance(t, Leaf):
        return 1
    return 1 + tree_size(t.left) + tree_size(t.right)


def internal_nodes(t: BinTree) -> int:
    return 0 if isinstance(t, Leaf) else 1 + internal_nodes(t.left) + internal_nodes(t.right)


def all_trees(alphabet: Sequence[str], max_internal: int) -> Iterator[BinTree]:
    """Every tree with at most ``max_internal`` labelled nodes, smallest first."""
    memo: dict[int, list[BinTree]] = {0: [LEAF]}

    def exactly(n: int) -> list[BinTree]:
        if n not in memo:
            out = []
            for k in range(n):
                for left in exactly(k):
                    for right in exactly(n - 1 - k):
                        for a in alphabet:
                            out.append(Node(a, left, right))
            memo[n] = out
        return memo[n]

    for n in range(max_internal + 1):
        yield from exactly(n)


def trees_up_to_nodes(alphabet: Sequence[str], max_nodes: int) -> Iterator[BinTree]:
    """Trees with at most ``max_nodes`` nodes counting leaves (2n+1 for n labels)."""
    return all_trees(alphabet, (max_nodes - 1) // 2)


def parse_tree(text: str) -> BinTree:
    """``T ::= () | label ( T , T )``."""
    from .formats import parse_tree_literal

    return parse_tree_literal(text)


# ---------------------------------------------------------------------------
# Expressions
#
# Variables are arbitrary hashables: register names in outputs, and
# ``(register, "<")`` / ``(register, ">")`` in transition updates.


@dataclass(frozen=True, slots=True)
class ELeaf:
    def __str__(self) -> str:
        return "()"


@dataclass(frozen=True, slots=True)
class EVar:
    name: Hashable

    def __str__(self) -> str:
        return show_var(self.name)


@dataclass(frozen=True, slots=True)
class ENode:
    label: str
    left: "TreeExpr"
    right: "TreeExpr"

    def __str__(self) -> str:
        return f"{self.label}({self.left}, {self.right})"


@dataclass(frozen=True, slots=True)
class EPlug:
    """``E'[E]``: a hole expression filled with a tree expression."""

    outer: "HoleExpr"
    inner: "TreeExpr"

    def __str__(self) -> str:
        return f"{self.outer}[{self.inner}]"


@dataclass(frozen=True, slots=True)
class HBox:
    def __str__(self) -> str:
        return "box"


@dataclass(frozen=True, slots=True)
class HVar:
    name: Hashable

    def __str__(self) -> str:
        return show_var(self.name)


@dataclass(frozen=True, slots=True)
class HNodeL:
    label: str
    hole: "HoleExpr"
    other: "TreeExpr"

    def __str__(self) -> str:
        return f"{self.label}({self.hole}, {self.other})"


@dataclass(frozen=True, slots=True)
class HNodeR:
    label: str
    other: "TreeExpr"
    hole: "HoleExpr"

    def __str__(self) -> str:
        return f"{self.label}({self.other}, {self.hole})"


@dataclass(frozen=True, slots=True)
class HPlug:
    """``E'[F']``: composition of hole expressions."""

    outer: "HoleExpr"
    inner: "HoleExpr"

    def __str__(self) -> str:
        return f"{self.outer}[{self.inner}]"


TreeExpr = Union[ELeaf, EVar, ENode, EPlug]
HoleExpr = Union[HBox, HVar, HNodeL, HNodeR, HPlug]
Expr = Union[TreeExpr, HoleExpr]

LEFT, RIGHT = "<", ">"


def show_var(v: Hashable) -> str:
    if isinstance(v, tuple):
        return f"{v[0]}{v[1]}"
    return str(v)


class UnboundVariable(KeyError):
    pass


def eval_expr(e: TreeExpr, rho: Mapping, rho_h: Mapping) -> BinTree:
    if isinstance(e, ELeaf):
        return LEAF
    if isinstance(e, EVar):
        if e.name not in rho:
            raise UnboundVariable(show_var(e.name))
        return rho[e.name]
    if isinstance(e, ENode):
        return Node(e.label, eval_expr(e.left, rho, rho_h), eval_expr(e.right, rho, rho_h))
    if isinstance(e, EPlug):
        return hole_subst(eval_hole_expr(e.outer, rho, rho_h), eval_expr(e.inner, rho, rho_h))
    raise TypeError(f"not a tree expression: {e!r}")


def eval_hole_expr(e: HoleExpr, rho: Mapping, rho_h: Mapping) -> OneHoleTree:
    if isinstance(e, HBox):
        return HOLE
    if isinstance(e, HVar):
        if e.name not in rho_h:
            raise UnboundVariable(show_var(e.name))
        return rho_h[e.name]
    if isinstance(e, HNodeL):
        return NodeL(e.label, eval_hole_expr(e.hole, rho, rho_h), eval_expr(e.other, rho, rho_h))
    if isinstance(e, HNodeR):
        return NodeR(e.label, eval_expr(e.other, rho, rho_h), eval_hole_expr(e.hole, rho, rho_h))
    if isinstance(e, HPlug):
        return hole_compose(eval_hole_expr(e.outer, rho, rho_h), eval_hole_expr(e.inner, rho, rho_h))
    raise TypeError(f"not a hole expression: {e!r}")


def is_hole_expr(e: Expr) -> bool:
    return isinstance(e, (HBox, HVar, HNodeL, HNodeR, HPlug))


def expr_var_occurrences(e: Expr) -> list:
    """Variables in ``e`` with multiplicity, left to right."""
    if isinstance(e, (EVar, HVar)):
        return [e.name]
    if isinstance(e, (ELeaf, HBox)):
        return []
    if isinstance(e, ENode):
        return expr_var_occurrences(e.left) + expr_var_occurrences(e.right)
    if isinstance(e, HNodeL):
        return expr_var_occurrences(e.hole) + expr_var_occurrences(e.other)
    if isinstance(e, HNodeR):
        return expr_var_occurrences(e.other) + expr_var_occurrences(e.hole)
    return expr_var_occurrences(e.outer) + expr_var_occurrences(e.inner)


def expr_vars(e: Expr) -> frozenset:
    return frozenset(expr_var_occurrences(e))


def is_linear_expr(e: Expr) -> bool:
    occ = expr_var_occurrences(e)
    return len(occ) == len(set(occ))


# ---------------------------------------------------------------------------
# Register tree transducers


@dataclass(frozen=True)
class Update:
    """Target of one transition: new state and register expressions."""

    state: str
    trees: Mapping[str, TreeExpr]
    holes: Mapping[str, HoleExpr]


@dataclass(frozen=True)
class RTT:
    name: str
    input_alphabet: tuple[str, ...]
    output_alphabet: tuple[str, ...]
    states: tuple[str, ...]
    initial: str
    tree_registers: tuple[str, ...]
    hole_registers: tuple[str, ...]
    output: Mapping[str, TreeExpr]
    delta: Mapping[tuple[str, str, str], Update]

    def __post_init__(self):
        if set(self.tree_registers) & set(self.hole_registers):
            raise ValueError("tree and hole registers must be disjoint")
        if self.initial not in self.states:
            raise ValueError(f"initial state {self.initial} not declared")
        for q in self.states:
            if q not in self.output:
                raise ValueError(f"no output expression for state {q}")
        for ql in self.states:
            for qr in self.states:
                for a in self.input_alphabet:
                    upd = self.delta.get((ql, qr, a))
                    if upd is None:
                        raise ValueError(f"delta undefined at ({ql}, {qr}, {a})")
                    if set(upd.trees) != set(self.tree_registers) or set(upd.holes) != set(
                        self.hole_registers
                    ):
                        raise ValueError(f"delta at ({ql}, {qr}, {a}) must update every register")

    @property
    def registers(self) -> tuple[str, ...]:
        return self.tree_registers + self.hole_registers

    def initial_config(self) -> "TreeConfig":
        return TreeConfig(
            self.initial,
            {r: LEAF for r in self.tree_registers},
            {r: HOLE for r in self.hole_registers},
        )


@dataclass(frozen=True)
class TreeConfig:
    state: str
    trees: Mapping[str, BinTree]
    holes: Mapping[str, OneHoleTree]


def rtt_step(rtt: RTT, label: str, left: TreeConfig, right: TreeConfig) -> TreeConfig:
    upd = rtt.delta[(left.state, right.state, label)]
    rho = {}
    rho_h = {}
    for side, conf in ((LEFT, left), (RIGHT, right)):
        for r, v in conf.trees.items():
            rho[(r, side)] = v
        for r, v in conf.holes.items():
            rho_h[(r, side)] = v
    return TreeConfig(
        upd.state,
        {r: eval_expr(e, rho, rho_h) for r, e in upd.trees.items()},
        {r: eval_hole_expr(e, rho, rho_h) for r, e in upd.holes.items()},
    )


def rtt_config(rtt: RTT, t: BinTree) -> TreeConfig:
    if isinstance(t, Leaf):
        return rtt.initial_config()
    if t.label not in rtt.input_alphabet:
        raise ValueError(f"label {t.label!r} not in the input alphabet")
    return rtt_step(rtt, t.label, rtt_config(rtt, t.left), rtt_config(rtt, t.right))


def run_rtt(rtt: RTT, t: BinTree) -> BinTree:
    conf = rtt_config(rtt, t)
    return eval_expr(rtt.output[conf.state], conf.trees, conf.holes)


# ---------------------------------------------------------------------------
# Conflict relations


MAX_CONFLICT_CARRIER = 16


@dataclass(frozen=True)
class ConflictRelation:
    """Reflexive, symmetric relation; only the non-diagonal pairs are stored."""

    carrier: tuple
    pairs: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        closed = set()
        for x, y in self.pairs:
            if x not in self.carrier or y not in self.carrier:
                raise ValueError(f"conflict pair ({x}, {y}) outside the carrier")
            if x != y:
                closed.add((x, y))
                closed.add((y, x))
        object.__setattr__(self, "pairs", frozenset(closed))

    @classmethod
    def identity(cls, carrier: Iterable) -> "ConflictRelation":
        return cls(tuple(carrier))

    def conflict(self, x, y) -> bool:
        return x == y or (x, y) in self.pairs

    def non_conflicting(self, subset: Iterable) -> bool:
        s = list(subset)
        return all(not self.conflict(x, y) for x, y in itertools.combinations(s, 2))

    def lifted(self) -> "LiftedConflict":
        return LiftedConflict(self)


@dataclass(frozen=True)
class LiftedConflict:
    """The relation on ``(R u R') x {<, >}``: never a conflict across sides."""

    base: ConflictRelation

    def conflict(self, x, y) -> bool:
        return x[1] == y[1] and self.base.conflict(x[0], y[0])

    def non_conflicting(self, subset: Iterable) -> bool:
        s = list(subset)
        return all(not self.conflict(x, y) for x, y in itertools.combinations(s, 2))


def nonconflicting_subsets(rel: ConflictRelation) -> list[frozenset]:
    """All non-conflicting subsets in a fixed order: by size, then carrier order."""
    n = len(rel.carrier)
    if n > MAX_CONFLICT_CARRIER:
        raise ValueError(
            f"{n} registers exceed the limit of {MAX_CONFLICT_CARRIER} for subset enumeration"
        )
    out = [frozenset()]
    # grow cliques of the complement graph, extending only with later elements
    frontier = [((), -1)]
    while frontier:
        nxt = []
        for members, last in frontier:
            for j in range(last + 1, n):
                y = rel.carrier[j]
                if all(not rel.conflict(x, y) for x in members):
                    grown = members + (y,)
                    out.append(frozenset(grown))
                    nxt.append((grown, j))
        frontier = nxt
    return out


def check_consistency(e: Expr, rel) -> bool:
    """Linear and with a non-conflicting variable set."""
    return is_linear_expr(e) and rel.non_conflicting(expr_vars(e))


def _update_map(upd: Update) -> dict:
    return {**upd.trees, **upd.holes}


def check_brtt(rtt: RTT, rel: ConflictRelation) -> ValidityReport:
    """BRTT condition in its non-conflicting-subset form.

    Every entry of delta is checked, reachable or not.
    """
    if set(rel.carrier) != set(rtt.registers):
        raise ValueError("conflict relation must be over all registers")
    rep = ValidityReport()
    for q in rtt.states:
        if not check_consistency(rtt.output[q], rel):
            rep.fail(f"output at {q} is not consistent with the conflict relation")
    lifted = rel.lifted()
    subsets = nonconflicting_subsets(rel)
    for key, upd in rtt.delta.items():
        where = "delta({}, {}, {})".format(*key)
        m = _update_map(upd)
        for r, e in m.items():
            if not is_linear_expr(e):
                rep.fail(f"{where}: update of {r} is not linear")
        for p in subsets:
            seen: set = set()
            for y in sorted(p, key=rtt.registers.index):
                vs = expr_vars(m[y])
                if vs & seen:
                    rep.fail(
                        f"{where}: registers of {{{', '.join(sorted(p))}}} share "
                        + ", ".join(sorted(show_var(v) for v in vs & seen))
                    )
                seen |= vs
            if not lifted.non_conflicting(seen):
                rep.fail(f"{where}: sources of {{{', '.join(sorted(p))}}} conflict")
    return rep


def check_brtt_original(rtt: RTT, rel: ConflictRelation) -> ValidityReport:
    """BRTT condition in the original two-clause form (pairs of registers)."""
    rep = ValidityReport()
    for q in rtt.states:
        if not check_consistency(rtt.output[q], rel):
            rep.fail(f"output at {q} is not consistent")
    regs = rtt.registers
    for key, upd in rtt.delta.items():
        where = "delta({}, {}, {})".format(*key)
        m = _update_map(upd)
        for r, e in m.items():
            if not check_consistency(e, rel.lifted()):
                rep.fail(f"{where}: update of {r} is not consistent")
        occurs = {y: expr_vars(m[y]) for y in regs}
        for x1, x2 in itertools.product(regs, repeat=2):
            if not rel.conflict(x1, x2):
                continue
            for z in (LEFT, RIGHT):
                for y1, y2 in itertools.product(regs, repeat=2):
                    if (x1, z) in occurs[y1] and (x2, z) in occurs[y2] and not rel.conflict(y1, y2):
                        rep.fail(f"{where}: {x1}{z} in {y1} and {x2}{z} in {y2} but {y1}, {y2} do not conflict")
    return rep
