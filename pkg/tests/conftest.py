import os
import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from churchtrans.formats import parse_machine

MACHINES = Path(__file__).resolve().parent.parent / "machines"

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# Church-encoded outputs are deep right spines; the reducers recurse on them
sys.setrecursionlimit(max(sys.getrecursionlimit(), 20_000))


# (number, passed, label) per acceptance criterion, shown in the summary
ACCEPTANCE: list = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n, ok, label in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {n:2d} {'PASS' if ok else 'FAIL'}: {label}")


def load(name: str):
    return parse_machine((MACHINES / name).read_text())


@pytest.fixture
def machines_dir() -> Path:
    return MACHINES


def lambda_terms(names=("x", "y", "z"), max_leaves=12):
    """Hypothesis strategy for untyped terms over a few names (possibly open)."""
    from hypothesis import strategies as st

    from churchtrans.terms import Abs, App, Var

    leaves = st.sampled_from(names).map(Var)
    return st.recursive(
        leaves,
        lambda sub: st.one_of(
            st.builds(Abs, st.sampled_from(names), sub),
            st.builds(App, sub, sub),
        ),
        max_leaves=max_leaves,
    )


def _random_term(rng, depth, scope):
    from churchtrans.terms import Abs, App, Var

    r = rng.random()
    if depth == 0 or (scope and r < 0.3):
        return Var(rng.choice(scope)) if scope else Abs("x", Var("x"))
    if r < 0.6:
        x = rng.choice("xyzuv")
        return Abs(x, _random_term(rng, depth - 1, scope + [x]))
    return App(_random_term(rng, depth - 1, scope), _random_term(rng, depth - 1, scope))


def typable_corpus(n=100, seed=0):
    """Closed, simply typable terms that are not already normal."""
    import random

    from churchtrans import stlc_core

    rng = random.Random(seed)
    out = []
    while len(out) < n:
        t = _random_term(rng, 6, [])
        if stlc_core.beta_step(t) is None:
            continue
        try:
            stlc_core.infer_type({}, t)
        except stlc_core.NotTypable:
            continue
        out.append(t)
    return out


def random_eal_term(rng, size, scope=(), depth=0):
    """Random EAλ term whose variables sit at their binder's depth (stratified
    by construction); linearity is left to chance."""
    from churchtrans.terms import Abs, App, Bang, BangAbs, Var

    cands = [x for x, kind, d in scope if (kind == "lin" and d == depth) or (kind == "bang" and d == depth - 1)]
    if size <= 1 or (cands and rng.random() < 0.25):
        if cands:
            return Var(rng.choice(cands))
        x = rng.choice("xyz")
        return Abs(x, Var(x))
    r = rng.random()
    x = rng.choice("xyzuv")
    inner = [s for s in scope if s[0] != x]
    if r < 0.3:
        return Abs(x, random_eal_term(rng, size - 1, inner + [(x, "lin", depth)], depth))
    if r < 0.45:
        return BangAbs(x, random_eal_term(rng, size - 1, inner + [(x, "bang", depth)], depth))
    if r < 0.6:
        return Bang(random_eal_term(rng, size - 1, list(scope), depth + 1))
    k = rng.randint(1, size - 1)
    return App(random_eal_term(rng, k, list(scope), depth), random_eal_term(rng, size - k, list(scope), depth))
