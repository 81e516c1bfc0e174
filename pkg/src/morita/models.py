"""Finite models: evaluation, enumeration and countermodel search."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Mapping

from .syntax import (
    And, Bottom, Eq, Exists, Formula, Implies, Not, Or, Rel, Sequent, Signature,
    Term, Theory, Top, Var, free_vars, symbols,
)


@dataclass
class FiniteModel:
    """Carriers are ``0..n-1`` per sort; tables are total once complete."""

    signature: Signature
    carriers: dict[str, tuple[int, ...]]
    functions: dict[str, dict[tuple, int]] = field(default_factory=dict)
    relations: dict[str, frozenset] = field(default_factory=dict)
    labels: dict[str, list] = field(default_factory=dict)

    def size(self, sort: str) -> int:
        return len(self.carriers[sort])

    def is_total(self) -> bool:
        for fn, (args, _res) in self.signature.functions.items():
            table = self.functions.get(fn, {})
            for combo in itertools.product(*(self.carriers[s] for s in args)):
                if combo not in table:
                    return False
        return True

    def key(self) -> tuple:
        """Hashable identity of the interpretation (labels ignored)."""
        return (tuple(sorted((s, len(c)) for s, c in self.carriers.items())),
                tuple(sorted((f, tuple(sorted(t.items()))) for f, t in self.functions.items())),
                tuple(sorted((r, tuple(sorted(t))) for r, t in self.relations.items())))

    def reduct(self, sig: Signature) -> "FiniteModel":
        return FiniteModel(sig, {s: self.carriers[s] for s in sig.sorts},
                           {f: self.functions.get(f, {}) for f in sig.functions},
                           {r: self.relations.get(r, frozenset()) for r in sig.relations})

    def to_json(self) -> dict:
        return {"carriers": {s: list(c) for s, c in self.carriers.items()},
                "functions": {f: [[list(k), v] for k, v in sorted(t.items())] for f, t in self.functions.items()},
                "relations": {r: sorted(list(k) for k in t) for r, t in self.relations.items()}}

    def describe(self) -> str:
        parts = [f"{s}={{{', '.join(map(str, c))}}}" for s, c in self.carriers.items()]
        for f, t in self.functions.items():
            if t:
                parts.append(f"{f}: " + ", ".join(f"{k}->{v}" for k, v in sorted(t.items())))
        for r, t in self.relations.items():
            parts.append(f"{r}={sorted(t)}")
        return "; ".join(parts)


def model_from_json(sig: Signature, d: dict) -> FiniteModel:
    return FiniteModel(sig, {s: tuple(c) for s, c in d["carriers"].items()},
                       {f: {tuple(k): v for k, v in rows} for f, rows in d["functions"].items()},
                       {r: frozenset(tuple(k) for k in rows) for r, rows in d["relations"].items()})


# ---------------------------------------------------------------- evaluation

Env = dict
_MISSING = object()


def compile_term(t: Term, model: FiniteModel) -> Callable[[Env], int]:
    if isinstance(t, Var):
        name = t.name
        return lambda env: env[name]
    table = model.functions[t.fn]
    parts = [compile_term(a, model) for a in t.args]
    if not parts:
        return lambda env: table[()]
    if len(parts) == 1:
        p0 = parts[0]
        return lambda env: table[(p0(env),)]
    return lambda env: table[tuple(p(env) for p in parts)]


def compile_formula(f: Formula, model: FiniteModel) -> Callable[[Env], bool]:
    if isinstance(f, Top):
        return lambda env: True
    if isinstance(f, Bottom):
        return lambda env: False
    if isinstance(f, Eq):
        a, b = compile_term(f.left, model), compile_term(f.right, model)
        return lambda env: a(env) == b(env)
    if isinstance(f, Rel):
        table = model.relations.get(f.name, frozenset())
        parts = [compile_term(a, model) for a in f.args]
        return lambda env: tuple(p(env) for p in parts) in table
    if isinstance(f, And):
        a, b = compile_formula(f.left, model), compile_formula(f.right, model)
        return lambda env: a(env) and b(env)
    if isinstance(f, Or):
        a, b = compile_formula(f.left, model), compile_formula(f.right, model)
        return lambda env: a(env) or b(env)
    if isinstance(f, Implies):
        a, b = compile_formula(f.left, model), compile_formula(f.right, model)
        return lambda env: (not a(env)) or b(env)
    if isinstance(f, Not):
        a = compile_formula(f.body, model)
        return lambda env: not a(env)
    body = compile_formula(f.body, model)
    name = f.var.name
    dom = model.carriers[f.var.sort]
    want = isinstance(f, Exists)

    def quant(env: Env) -> bool:
        old = env.get(name, _MISSING)
        result = not want
        for e in dom:
            env[name] = e
            if body(env) == want:
                result = want
                break
        if old is _MISSING:
            env.pop(name, None)
        else:
            env[name] = old
        return result

    return quant


def _normalize_assignment(formula: Formula, assignment: Mapping) -> dict:
    env = {}
    for k, v in assignment.items():
        env[k.name if isinstance(k, Var) else k] = v
    for v in free_vars(formula):
        if v.name not in env:
            raise ValueError(f"unassigned free variable {v.name}")
    return env


def eval_formula(model: FiniteModel, formula: Formula, assignment: Mapping | None = None) -> bool:
    env = _normalize_assignment(formula, assignment or {})
    return compile_formula(formula, model)(env)


def assignments(model: FiniteModel, context: Iterable[Var]) -> Iterator[dict]:
    ctx = list(context)
    for combo in itertools.product(*(model.carriers[v.sort] for v in ctx)):
        yield {v.name: e for v, e in zip(ctx, combo)}


def violation(model: FiniteModel, seq: Sequent) -> dict | None:
    """An assignment making the antecedent true and the consequent false."""
    ante, cons = compile_formula(seq.antecedent, model), compile_formula(seq.consequent, model)
    for env in assignments(model, seq.context):
        if ante(env) and not cons(env):
            return env
    return None


def satisfies(model: FiniteModel, seq: Sequent) -> bool:
    return violation(model, seq) is None


def is_model(model: FiniteModel, theory: Theory | Iterable[Sequent]) -> bool:
    axioms = theory.axioms if isinstance(theory, Theory) else theory
    return all(satisfies(model, ax) for ax in axioms)


# ----------------------------------------------- three-valued partial eval


def _pterm(t: Term, funs: dict) -> Callable[[Env], int | None]:
    if isinstance(t, Var):
        name = t.name
        return lambda env: env[name]
    table = funs[t.fn]
    parts = [_pterm(a, funs) for a in t.args]

    def app(env: Env):
        args = []
        for p in parts:
            v = p(env)
            if v is None:
                return None
            args.append(v)
        return table.get(tuple(args))

    return app


def _pformula(f: Formula, funs: dict, rels: dict, carriers: dict) -> Callable[[Env], bool | None]:
    """Kleene evaluation; relation tables map tuples to True/False."""
    if isinstance(f, Top):
        return lambda env: True
    if isinstance(f, Bottom):
        return lambda env: False
    if isinstance(f, Eq):
        a, b = _pterm(f.left, funs), _pterm(f.right, funs)

        def eq(env):
            x = a(env)
            if x is None:
                return None
            y = b(env)
            if y is None:
                return None
            return x == y

        return eq
    if isinstance(f, Rel):
        table = rels[f.name]
        parts = [_pterm(a, funs) for a in f.args]

        def rel(env):
            args = []
            for p in parts:
                v = p(env)
                if v is None:
                    return None
                args.append(v)
            return table.get(tuple(args))

        return rel
    if isinstance(f, Not):
        a = _pformula(f.body, funs, rels, carriers)

        def neg(env):
            v = a(env)
            return None if v is None else not v

        return neg
    if isinstance(f, (And, Or, Implies)):
        a = _pformula(f.left, funs, rels, carriers)
        b = _pformula(f.right, funs, rels, carriers)
        if isinstance(f, And):
            def both(env):
                x = a(env)
                if x is False:
                    return False
                y = b(env)
                if y is False:
                    return False
                return None if x is None or y is None else True
            return both
        if isinstance(f, Or):
            def either(env):
                x = a(env)
                if x is True:
                    return True
                y = b(env)
                if y is True:
                    return True
                return None if x is None or y is None else False
            return either

        def imp(env):
            x = a(env)
            if x is False:
                return True
            y = b(env)
            if y is True:
                return True
            return None if x is None or y is None else False
        return imp
    body = _pformula(f.body, funs, rels, carriers)
    name = f.var.name
    dom = carriers[f.var.sort]
    want = isinstance(f, Exists)

    def quant(env):
        old = env.get(name, _MISSING)
        unknown = False
        result = None
        for e in dom:
            env[name] = e
            v = body(env)
            if v is want:
                result = want
                break
            if v is None:
                unknown = True
        if old is _MISSING:
            env.pop(name, None)
        else:
            env[name] = old
        if result is not None:
            return result
        return None if unknown else (not want)

    return quant


# ------------------------------------------------------------- enumeration


def size_vectors(sorts: list[str], max_size: int, fixed: Mapping[str, int] | None = None) -> list[dict]:
    fixed = fixed or {}
    ranges = [[fixed[s]] if s in fixed else range(max_size + 1) for s in sorts]
    combos = [dict(zip(sorts, c)) for c in itertools.product(*ranges)]
    combos.sort(key=lambda d: (sum(d.values()), [d[s] for s in sorts]))
    return combos


class _Search:
    """Backtracking assignment of table cells with axiom-driven pruning."""

    def __init__(self, sig: Signature, axioms: list[Sequent], sizes: dict, symmetry: bool,
                 preset_funs: Mapping | None = None, preset_rels: Mapping | None = None):
        self.sig = sig
        self.sizes = sizes
        self.carriers = {s: tuple(range(n)) for s, n in sizes.items()}
        self.symmetry = symmetry and not preset_funs and not preset_rels
        self.funs: dict[str, dict] = {f: dict((preset_funs or {}).get(f, {})) for f in sig.functions}
        self.rels: dict[str, dict] = {}
        for r in sig.relations:
            if preset_rels and r in preset_rels:
                args = sig.relations[r]
                table = {c: (c in preset_rels[r]) for c in itertools.product(*(self.carriers[s] for s in args))}
                self.rels[r] = table
            else:
                self.rels[r] = {}
        self.cells = self._cells(preset_funs or {}, preset_rels or {})
        self.checks = []
        for ax in axioms:
            ante = _pformula(ax.antecedent, self.funs, self.rels, self.carriers)
            cons = _pformula(ax.consequent, self.funs, self.rels, self.carriers)
            names = [v.name for v in ax.context]
            envs = [dict(zip(names, combo))
                    for combo in itertools.product(*(self.carriers[v.sort] for v in ax.context))]
            sorts, fns, rls = symbols(ax.antecedent)
            s2, f2, r2 = symbols(ax.consequent)
            self.checks.append((ante, cons, envs, fns | f2, rls | r2))
        self.by_symbol: dict[str, list[int]] = {}
        for i, (_a, _c, _e, fns, rls) in enumerate(self.checks):
            for name in fns | rls:
                self.by_symbol.setdefault(name, []).append(i)
        self.static = [i for i, c in enumerate(self.checks) if not (c[3] | c[4])]

    def _cells(self, preset_funs: Mapping, preset_rels: Mapping) -> list[tuple]:
        order = {name: i for i, (_k, name) in enumerate(self.sig.order)}
        cells = []
        for f, (args, res) in self.sig.functions.items():
            if f in preset_funs:
                continue
            for combo in itertools.product(*(self.carriers[s] for s in args)):
                cells.append(("f", f, combo, res, args))
        for r, args in self.sig.relations.items():
            if r in preset_rels:
                continue
            for combo in itertools.product(*(self.carriers[s] for s in args)):
                cells.append(("r", r, combo, None, args))
        if self.symmetry:
            cells.sort(key=lambda c: (max(c[2], default=-1), order.get(c[1], 0), c[2]))
        else:
            cells.sort(key=lambda c: (order.get(c[1], 0), c[2]))
        return cells

    def violated(self, indices: Iterable[int]) -> bool:
        for i in indices:
            ante, cons, envs, _f, _r = self.checks[i]
            for env in envs:
                if cons(env) is False and ante(env) is True:
                    return True
        return False

    def run(self) -> Iterator[FiniteModel]:
        for f, (args, res) in self.sig.functions.items():
            if self.sizes[res] == 0 and all(self.sizes[s] > 0 for s in args):
                return
        if self.violated(self.static):
            return
        if self.cells and self.violated(range(len(self.checks))):
            return
        mx = {s: -1 for s in self.sizes}
        yield from self._assign(0, mx)

    def _assign(self, k: int, mx: dict) -> Iterator[FiniteModel]:
        if k == len(self.cells):
            if not self.violated(range(len(self.checks))):
                yield FiniteModel(self.sig, dict(self.carriers),
                                  {f: dict(t) for f, t in self.funs.items()},
                                  {r: frozenset(c for c, v in t.items() if v) for r, t in self.rels.items()})
            return
        kind, name, combo, res, arg_sorts = self.cells[k]
        affected = self.by_symbol.get(name, ())
        if self.symmetry:
            mx2 = dict(mx)
            for s, e in zip(arg_sorts, combo):
                if e > mx2[s]:
                    mx2[s] = e
        else:
            mx2 = mx
        if kind == "f":
            table = self.funs[name]
            limit = self.sizes[res]
            if self.symmetry:
                limit = min(limit, mx2[res] + 2)
            for v in range(limit):
                table[combo] = v
                if not self.violated(affected):
                    if self.symmetry and v > mx2[res]:
                        mx3 = dict(mx2)
                        mx3[res] = v
                    else:
                        mx3 = mx2
                    yield from self._assign(k + 1, mx3)
            del table[combo]
        else:
            table = self.rels[name]
            for v in (False, True):
                table[combo] = v
                if not self.violated(affected):
                    yield from self._assign(k + 1, mx2)
            del table[combo]


def iter_models(theory: Theory | tuple[Signature, Iterable[Sequent]], max_size: int, *,
                symmetry: bool = True, fixed_sizes: Mapping[str, int] | None = None,
                preset_functions: Mapping | None = None, preset_relations: Mapping | None = None
                ) -> Iterator[FiniteModel]:
    """All models with every carrier of size at most ``max_size``.

    With ``symmetry`` the least-number heuristic prunes isomorphic copies;
    without it every labelled model is produced exactly once.
    """
    if max_size < 0:
        raise ValueError("max_size must be non-negative")
    if isinstance(theory, Theory):
        sig, axioms = theory.signature, list(theory.axioms)
    else:
        sig, axioms = theory[0], list(theory[1])
    sorts = list(sig.sorts)
    for sizes in size_vectors(sorts, max_size, fixed_sizes):
        yield from _Search(sig, axioms, sizes, symmetry, preset_functions, preset_relations).run()


def count_models(theory, max_size: int, symmetry: bool = False) -> int:
    return sum(1 for _ in iter_models(theory, max_size, symmetry=symmetry))
