"""Hypothesis strategies for small formulas over a fixed one-sort signature."""
from __future__ import annotations

from hypothesis import strategies as st

from morita.dsl import parse_theory
from morita.syntax import (
    BOTTOM, TOP, And, App, Eq, Exists, Forall, Implies, Not, Or, Rel, Sequent, Var,
)

SIG_TEXT = """theory G fragment coherent
sorts S
fun f : S -> S
rel R : S
rel E : S, S
"""
SIG = parse_theory(SIG_TEXT).signature

NAMES = ("x", "y", "z")
VARS = [Var(n, "S") for n in NAMES]


def terms(depth: int = 1):
    base = st.sampled_from(VARS)
    if depth == 0:
        return base
    return st.one_of(base, terms(depth - 1).map(lambda t: App("f", (t,), "S")))


def atoms():
    t = terms(1)
    return st.one_of(
        st.just(TOP), st.just(BOTTOM),
        st.builds(Eq, t, t),
        t.map(lambda a: Rel("R", (a,))),
        st.tuples(t, t).map(lambda p: Rel("E", p)),
    )


def formulas(first_order: bool = False, max_leaves: int = 6):
    def extend(children):
        q = st.tuples(st.sampled_from(VARS), children)
        opts = [st.builds(And, children, children), st.builds(Or, children, children),
                q.map(lambda p: Exists(*p))]
        if first_order:
            opts += [children.map(Not), st.builds(Implies, children, children), q.map(lambda p: Forall(*p))]
        return st.one_of(*opts)
    return st.recursive(atoms(), extend, max_leaves=max_leaves)


def substitutions():
    return st.dictionaries(st.sampled_from(VARS), terms(1), max_size=3)


def sequents(first_order: bool = False):
    return st.builds(lambda a, c: Sequent(a, c, tuple(VARS)), formulas(first_order, 4), formulas(first_order, 4))
