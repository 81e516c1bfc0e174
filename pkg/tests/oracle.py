"""Brute-force semantics used as an independent oracle.

Nothing here imports the package's model search or evaluator: carriers,
function tables and relations are enumerated naively with itertools and
formulas are evaluated by a direct recursive interpreter.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from morita.syntax import (
    And, App, Bottom, Eq, Exists, Forall, Implies, Not, Or, Rel, Sequent, Signature, Top, Var,
)


@dataclass
class Interp:
    carriers: dict        # sort -> list of elements
    funs: dict            # name -> dict(args tuple -> value)
    rels: dict            # name -> set of tuples


def term_value(t, it: Interp, env: dict):
    if isinstance(t, Var):
        return env[t.name]
    return it.funs[t.fn][tuple(term_value(a, it, env) for a in t.args)]


def holds(f, it: Interp, env: dict) -> bool:
    if isinstance(f, Top):
        return True
    if isinstance(f, Bottom):
        return False
    if isinstance(f, Eq):
        return term_value(f.left, it, env) == term_value(f.right, it, env)
    if isinstance(f, Rel):
        return tuple(term_value(a, it, env) for a in f.args) in it.rels[f.name]
    if isinstance(f, And):
        return holds(f.left, it, env) and holds(f.right, it, env)
    if isinstance(f, Or):
        return holds(f.left, it, env) or holds(f.right, it, env)
    if isinstance(f, Implies):
        return (not holds(f.left, it, env)) or holds(f.right, it, env)
    if isinstance(f, Not):
        return not holds(f.body, it, env)
    if isinstance(f, Exists):
        return any(holds(f.body, it, {**env, f.var.name: d}) for d in it.carriers[f.var.sort])
    if isinstance(f, Forall):
        return all(holds(f.body, it, {**env, f.var.name: d}) for d in it.carriers[f.var.sort])
    raise TypeError(f)


def envs(it: Interp, context):
    context = list(context)
    for combo in itertools.product(*(it.carriers[v.sort] for v in context)):
        yield {v.name: d for v, d in zip(context, combo)}


def sequent_holds(s: Sequent, it: Interp) -> bool:
    return all(holds(s.consequent, it, e) for e in envs(it, s.context) if holds(s.antecedent, it, e))


def interpretations(sig: Signature, max_size: int):
    """Every labelled structure with all carriers of size <= max_size."""
    sorts = list(sig.sorts)
    funs = list(sig.functions.items())
    rels = list(sig.relations.items())
    for sizes in itertools.product(range(max_size + 1), repeat=len(sorts)):
        carriers = {s: list(range(n)) for s, n in zip(sorts, sizes)}
        fun_choices = []
        for name, (args, res) in funs:
            keys = list(itertools.product(*(carriers[a] for a in args)))
            fun_choices.append([(name, dict(zip(keys, vals)))
                                for vals in itertools.product(carriers[res], repeat=len(keys))])
        rel_choices = []
        for name, args in rels:
            keys = list(itertools.product(*(carriers[a] for a in args)))
            rel_choices.append([(name, {k for k, b in zip(keys, bits) if b})
                                for bits in itertools.product((0, 1), repeat=len(keys))])
        for fs in itertools.product(*fun_choices):
            for rs in itertools.product(*rel_choices):
                yield Interp(carriers, dict(fs), dict(rs))


def models(sig: Signature, axioms, max_size: int):
    axioms = list(axioms)
    for it in interpretations(sig, max_size):
        if all(sequent_holds(a, it) for a in axioms):
            yield it


def count_models(theory, max_size: int) -> int:
    return sum(1 for _ in models(theory.signature, theory.axioms, max_size))


def from_finite_model(m) -> Interp:
    """Read the package's model into the oracle's representation."""
    return Interp({s: list(c) for s, c in m.carriers.items()},
                  {f: dict(t) for f, t in m.functions.items()},
                  {r: set(t) for r, t in m.relations.items()})


def first_countermodel(theory, goal: Sequent, max_size: int):
    for it in models(theory.signature, theory.axioms, max_size):
        if not sequent_holds(goal, it):
            return it
    return None


def app(fn: str, *args, sort: str) -> App:
    return App(fn, tuple(args), sort)
