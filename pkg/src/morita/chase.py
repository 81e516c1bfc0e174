"""Forward-chaining prover for coherent sequents.

A goal ``phi |-_x psi`` is attacked by naming the context variables with
fresh constants, asserting ``phi`` and saturating with the theory's
axioms.  Disjunctive heads split the branch, existential heads introduce
witnesses, equalities are kept congruence-closed.  The goal is proved when
every branch either derives falsity or satisfies ``psi``.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .models import FiniteModel, compile_formula, iter_models, violation
from .outcome import DEFAULT_BUDGET, Budget, Outcome, ProofNode, Proved, Refuted, Unknown
from .syntax import (
    And, App, Bottom, Eq, Exists, Formula, Fragment, Or, Rel, Sequent, SortError, Term, Theory,
    Top, Var, check_sequent, is_coherent,
)


# ------------------------------------------------------------------- DNF

Disjunct = tuple  # (exvars: tuple[Var, ...], atoms: tuple[Formula, ...]) -- atoms are Eq/Rel/Bottom


class _Renamer:
    def __init__(self, prefix: str = "_e"):
        self.n = 0
        self.prefix = prefix

    def __call__(self, v: Var) -> Var:
        self.n += 1
        return Var(f"{self.prefix}{self.n}", v.sort)


def _rename_term(t: Term, env: dict) -> Term:
    if isinstance(t, Var):
        return env.get(t.name, t)
    return App(t.fn, tuple(_rename_term(a, env) for a in t.args), t.sort)


def dnf(f: Formula, fresh: _Renamer | None = None, env: dict | None = None) -> list[Disjunct]:
    """Disjunctive normal form of a coherent formula.

    Bound variables are renamed apart so disjuncts can be flattened
    without capture.  Disjuncts containing falsity are dropped.
    """
    fresh = fresh or _Renamer()
    env = env or {}
    out = _dnf(f, fresh, env)
    return [d for d in out if not any(isinstance(a, Bottom) for a in d[1])]


def _dnf(f: Formula, fresh: _Renamer, env: dict) -> list[Disjunct]:
    if isinstance(f, Top):
        return [((), ())]
    if isinstance(f, Bottom):
        return [((), (f,))]
    if isinstance(f, Eq):
        return [((), (Eq(_rename_term(f.left, env), _rename_term(f.right, env)),))]
    if isinstance(f, Rel):
        return [((), (Rel(f.name, tuple(_rename_term(a, env) for a in f.args)),))]
    if isinstance(f, Or):
        return _dnf(f.left, fresh, env) + _dnf(f.right, fresh, env)
    if isinstance(f, And):
        left = _dnf(f.left, fresh, env)
        right = _dnf(f.right, fresh, env)
        return [(a[0] + b[0], a[1] + b[1]) for a in left for b in right]
    if isinstance(f, Exists):
        nv = fresh(f.var)
        inner = _dnf(f.body, fresh, {**env, f.var.name: nv})
        return [((nv,) + d[0], d[1]) for d in inner]
    raise ValueError(f"not a coherent formula: {type(f).__name__}")


# ---------------------------------------------------------------- fact base


class FactBase:
    """Elements, function graph and relation facts, closed under congruence."""

    def __init__(self) -> None:
        self.parent: list[int] = []
        self.sort: list[str] = []
        self.depth: list[int] = []
        self.funs: dict[tuple, int] = {}
        self.rels: set[tuple] = set()
        self.by_sort: dict[str, list[int]] = {}
        self.fun_index: dict[str, dict[tuple, int]] = {}
        self.rel_index: dict[str, set[tuple]] = {}
        self.closed = False
        self.dirty = False

    def copy(self) -> "FactBase":
        fb = FactBase.__new__(FactBase)
        fb.parent = list(self.parent)
        fb.sort = list(self.sort)
        fb.depth = list(self.depth)
        fb.funs = dict(self.funs)
        fb.rels = set(self.rels)
        fb.by_sort = {k: list(v) for k, v in self.by_sort.items()}
        fb.fun_index = {k: dict(v) for k, v in self.fun_index.items()}
        fb.rel_index = {k: set(v) for k, v in self.rel_index.items()}
        fb.closed = self.closed
        fb.dirty = self.dirty
        return fb

    def find(self, a: int) -> int:
        parent = self.parent
        root = a
        while parent[root] != root:
            root = parent[root]
        while parent[a] != root:
            parent[a], a = root, parent[a]
        return root

    def new(self, sort: str, depth: int) -> int:
        e = len(self.parent)
        self.parent.append(e)
        self.sort.append(sort)
        self.depth.append(depth)
        self.by_sort.setdefault(sort, []).append(e)
        return e

    def union(self, a: int, b: int) -> bool:
        a, b = self.find(a), self.find(b)
        if a == b:
            return False
        if b < a:
            a, b = b, a
        self.parent[b] = a
        self.depth[a] = min(self.depth[a], self.depth[b])
        self.dirty = True
        return True

    def lookup(self, fn: str, args: tuple) -> int | None:
        r = self.funs.get((fn, tuple(self.find(x) for x in args)))
        return None if r is None else self.find(r)

    def intern(self, fn: str, args: tuple, sort: str) -> tuple[int, bool]:
        args = tuple(self.find(x) for x in args)
        r = self.funs.get((fn, args))
        if r is not None:
            return self.find(r), False
        depth = 1 + max((self.depth[a] for a in args), default=0)
        r = self.new(sort, depth)
        self.funs[(fn, args)] = r
        self.fun_index.setdefault(fn, {})[args] = r
        return r, True

    def add_rel(self, name: str, args: tuple) -> bool:
        args = tuple(self.find(x) for x in args)
        key = (name, args)
        if key in self.rels:
            return False
        self.rels.add(key)
        self.rel_index.setdefault(name, set()).add(args)
        return True

    def has_rel(self, name: str, args: tuple) -> bool:
        return (name, tuple(self.find(x) for x in args)) in self.rels

    def rebuild(self) -> None:
        if not self.dirty:
            return
        while self.dirty:
            self.dirty = False
            table: dict[tuple, int] = {}
            for (fn, args), r in self.funs.items():
                key = (fn, tuple(self.find(x) for x in args))
                r = self.find(r)
                old = table.get(key)
                if old is None:
                    table[key] = r
                elif self.find(old) != r:
                    self.union(old, r)
            self.funs = table
        find = self.find
        self.funs = {(fn, tuple(find(x) for x in args)): find(r) for (fn, args), r in self.funs.items()}
        self.rels = {(n, tuple(find(x) for x in args)) for n, args in self.rels}
        self.fun_index = {}
        for (fn, args), r in self.funs.items():
            self.fun_index.setdefault(fn, {})[args] = r
        self.rel_index = {}
        for n, args in self.rels:
            self.rel_index.setdefault(n, set()).add(args)
        self.by_sort = {}
        for e in range(len(self.parent)):
            if self.parent[e] == e:
                self.by_sort.setdefault(self.sort[e], []).append(e)

    def elements(self, sort: str) -> list[int]:
        return self.by_sort.get(sort, [])


# ------------------------------------------------------------------ queries


class Query:
    """A compiled conjunctive query over flattened atoms.

    Slots ``0..k-1`` hold the input variables; the remaining slots hold
    existential variables and intermediate term values.
    """

    def __init__(self, inputs: Sequence[Var], exvars: Sequence[Var], atoms: Sequence[Formula],
                 prebound: bool):
        self.input_vars = tuple(inputs)
        slot_of: dict[str, int] = {}
        sorts: list[str] = []
        for v in (*inputs, *exvars):
            slot_of[v.name] = len(sorts)
            sorts.append(v.sort)
        parent = list(range(len(sorts)))
        raw: list[tuple] = []
        memo: dict[Term, int] = {}

        def new_slot(sort: str) -> int:
            parent.append(len(parent))
            sorts.append(sort)
            return len(sorts) - 1

        def find(s: int) -> int:
            while parent[s] != s:
                s = parent[s]
            return s

        def flat(t: Term) -> int:
            if isinstance(t, Var):
                if t.name not in slot_of:
                    raise ValueError(f"variable {t.name} is not bound in the query")
                return slot_of[t.name]
            if t in memo:
                return memo[t]
            args = tuple(flat(a) for a in t.args)
            r = new_slot(t.sort)
            raw.append(("f", t.fn, args, r))
            memo[t] = r
            return r

        self.unsat = False
        for a in atoms:
            if isinstance(a, Bottom):
                self.unsat = True
            elif isinstance(a, Eq):
                x, y = find(flat(a.left)), find(flat(a.right))
                if x != y:
                    parent[max(x, y)] = min(x, y)
            elif isinstance(a, Rel):
                raw.append(("r", a.name, tuple(flat(t) for t in a.args)))
        rep = [find(s) for s in range(len(sorts))]
        used = sorted(set(rep))
        renum = {s: i for i, s in enumerate(used)}
        self.nslots = len(used)
        self.sorts = [sorts[s] for s in used]
        self.inputs = [renum[rep[i]] for i in range(len(inputs))]
        compiled = []
        for atom in raw:
            if atom[0] == "f":
                compiled.append(("f", atom[1], tuple(renum[rep[s]] for s in atom[2]), renum[rep[atom[3]]]))
            else:
                compiled.append(("r", atom[1], tuple(renum[rep[s]] for s in atom[2])))
        mentioned = set()
        for atom in compiled:
            mentioned.update(atom[2])
            if atom[0] == "f":
                mentioned.add(atom[3])
        bound0 = set(self.inputs) if prebound else set()
        for s in range(self.nslots):
            if s not in mentioned and s not in bound0:
                compiled.append(("d", self.sorts[s], (), s))
        self.atoms = self._order(compiled, bound0)

    @staticmethod
    def _order(atoms: list[tuple], bound: set[int]) -> list[tuple]:
        bound = set(bound)
        rest = list(atoms)
        out = []
        while rest:
            def score(a):
                if a[0] == "d":
                    return 0 if a[3] in bound else 6
                args_bound = sum(1 for s in a[2] if s in bound)
                if args_bound == len(a[2]):
                    return 0
                if args_bound:
                    return 2
                if a[0] == "f" and a[3] in bound:
                    return 3
                return 4
            best = min(range(len(rest)), key=lambda i: (score(rest[i]), i))
            a = rest.pop(best)
            out.append(a)
            bound.update(a[2])
            if a[0] in ("f", "d"):
                bound.add(a[3])
        return out

    def solutions(self, fb: FactBase, values: Sequence[int] | None = None) -> Iterator[list]:
        if self.unsat:
            return
        b: list = [None] * self.nslots
        if values is not None:
            for s, v in zip(self.inputs, values):
                v = fb.find(v)
                if b[s] is None:
                    b[s] = v
                elif b[s] != v:
                    return
        yield from self._solve(0, b, fb)

    def holds(self, fb: FactBase, values: Sequence[int]) -> bool:
        for _ in self.solutions(fb, values):
            return True
        return False

    def _solve(self, i: int, b: list, fb: FactBase) -> Iterator[list]:
        if i == len(self.atoms):
            yield b
            return
        atom = self.atoms[i]
        kind = atom[0]
        if kind == "d":
            s = atom[3]
            if b[s] is not None:
                yield from self._solve(i + 1, b, fb)
                return
            for e in fb.elements(atom[1]):
                b[s] = e
                yield from self._solve(i + 1, b, fb)
            b[s] = None
            return
        argslots = atom[2]
        if kind == "f":
            res = atom[3]
            args = [b[s] for s in argslots]
            if None not in args:
                r = fb.funs.get((atom[1], tuple(args)))
                if r is None:
                    return
                if b[res] is None:
                    b[res] = r
                    yield from self._solve(i + 1, b, fb)
                    b[res] = None
                elif b[res] == r:
                    yield from self._solve(i + 1, b, fb)
                return
            table = fb.fun_index.get(atom[1])
            if not table:
                return
            for targs, r in list(table.items()):
                if b[res] is not None and b[res] != r:
                    continue
                set_here = self._bind(b, argslots, targs)
                if set_here is None:
                    continue
                if b[res] is not None and b[res] != r:
                    # the result slot may coincide with an argument slot just bound
                    for s in set_here:
                        b[s] = None
                    continue
                res_set = b[res] is None
                if res_set:
                    b[res] = r
                yield from self._solve(i + 1, b, fb)
                if res_set:
                    b[res] = None
                for s in set_here:
                    b[s] = None
            return
        # relation
        args = [b[s] for s in argslots]
        if None not in args:
            if (atom[1], tuple(args)) in fb.rels:
                yield from self._solve(i + 1, b, fb)
            return
        table = fb.rel_index.get(atom[1])
        if not table:
            return
        for targs in list(table):
            set_here = self._bind(b, argslots, targs)
            if set_here is None:
                continue
            yield from self._solve(i + 1, b, fb)
            for s in set_here:
                b[s] = None

    @staticmethod
    def _bind(b: list, slots: tuple, values: tuple) -> list | None:
        set_here = []
        for s, v in zip(slots, values):
            cur = b[s]
            if cur is None:
                b[s] = v
                set_here.append(s)
            elif cur != v:
                for t in set_here:
                    b[t] = None
                return None
        return set_here


# -------------------------------------------------------------------- rules


@dataclass
class Rule:
    index: int
    name: str
    context: tuple
    bodies: list          # Query per antecedent disjunct
    heads: list           # Disjunct per consequent disjunct
    head_checks: list     # Query per head disjunct, inputs = context
    creates_terms: bool = False

    @property
    def kind(self) -> str:
        if len(self.heads) == 0:
            return "close"
        if len(self.heads) > 1:
            return "split"
        return "exists" if self.heads[0][0] else "horn"


def compile_rule(index: int, seq: Sequent) -> Rule:
    fresh = _Renamer("_b")
    bodies = [Query(seq.context, d[0], d[1], prebound=False) for d in dnf(seq.antecedent, fresh)]
    heads = dnf(seq.consequent, _Renamer("_h"))
    checks = [Query(seq.context, d[0], d[1], prebound=True) for d in heads]
    creates = any(isinstance(t, App) for _ex, atoms in heads for a in atoms for t in _atom_terms(a))
    return Rule(index, seq.name, tuple(seq.context), bodies, heads, checks, creates)


def _atom_terms(a: Formula) -> tuple:
    if isinstance(a, Eq):
        return (a.left, a.right)
    return a.args if isinstance(a, Rel) else ()


@functools.lru_cache(maxsize=64)
def compile_theory(theory: Theory) -> tuple[Rule, ...]:
    return tuple(compile_rule(i, ax) for i, ax in enumerate(theory.axioms))


# -------------------------------------------------------------------- chase


class BudgetExhausted(Exception):
    pass


class _Run:
    def __init__(self, theory: Theory, rules: Sequence[Rule], goal: Sequent, budget: Budget):
        self.theory = theory
        self.sig = theory.signature
        self.rules = rules
        self.goal = goal
        self.budget = budget
        self.steps = 0
        self.branches = 1
        self.incomplete = False
        self.open_model: Refuted | None = None
        self.assume = dnf(goal.antecedent, _Renamer("_a"))
        self.goal_heads = dnf(goal.consequent, _Renamer("_g"))
        self.goal_checks = [Query(goal.context, d[0], d[1], prebound=True) for d in self.goal_heads]
        self.constants: list[int] = []

    # ---- element construction

    def term(self, fb: FactBase, t: Term, env: dict, depth: int) -> int:
        if isinstance(t, Var):
            return env[t.name]
        args = tuple(self.term(fb, a, env, depth) for a in t.args)
        r, _ = fb.intern(t.fn, args, t.sort)
        return r

    def apply_head(self, fb: FactBase, head: Disjunct, env: dict, depth: int) -> None:
        exvars, atoms = head
        env = dict(env)
        for v in exvars:
            env[v.name] = fb.new(v.sort, depth)
        for a in atoms:
            if isinstance(a, Bottom):
                fb.closed = True
            elif isinstance(a, Eq):
                fb.union(self.term(fb, a.left, env, depth), self.term(fb, a.right, env, depth))
            elif isinstance(a, Rel):
                fb.add_rel(a.name, tuple(self.term(fb, t, env, depth) for t in a.args))
        fb.rebuild()

    def intern_ground(self, fb: FactBase, f_atoms: Iterable[Formula], env: dict) -> None:
        names = set(env)
        for a in f_atoms:
            terms = (a.left, a.right) if isinstance(a, Eq) else (a.args if isinstance(a, Rel) else ())
            for t in terms:
                self._intern_closed(fb, t, env, names)
        fb.rebuild()

    def _intern_closed(self, fb: FactBase, t: Term, env: dict, names: set) -> bool:
        if isinstance(t, Var):
            return t.name in names
        ok = all([self._intern_closed(fb, a, env, names) for a in t.args])
        if ok:
            self.term(fb, t, env, 0)
        return ok

    def tick(self) -> None:
        self.steps += 1
        if self.steps > self.budget.steps:
            raise BudgetExhausted("step budget exhausted")

    # ---- triggers

    def triggers(self, fb: FactBase, kinds: tuple[str, ...]) -> list[tuple]:
        found = []
        cap = self.budget.witness_depth
        horn_cap = self.budget.term_depth + 1     # horn rules that build new terms
        for rule in self.rules:
            if rule.kind not in kinds:
                continue
            seen = set()
            for bi, q in enumerate(rule.bodies):
                for sol in q.solutions(fb):
                    binding = tuple(sol[s] for s in q.inputs)
                    if binding in seen:
                        continue
                    seen.add(binding)
                    if any(chk.holds(fb, binding) for chk in rule.head_checks):
                        continue
                    if binding and (rule.kind in ("exists", "split") or rule.creates_terms) and \
                            max(fb.depth[e] for e in binding) >= (cap if rule.kind != "horn" else horn_cap):
                        self.incomplete = True
                        continue
                    found.append((rule, bi, binding))
        found.sort(key=lambda t: (t[0].index, -max(t[2], default=-1), t[2]))
        return found

    def still_active(self, fb: FactBase, trig: tuple) -> tuple | None:
        rule, bi, binding = trig
        binding = tuple(fb.find(e) for e in binding)
        if any(chk.holds(fb, binding) for chk in rule.head_checks):
            return None
        return (rule, bi, binding)

    def fire(self, fb: FactBase, node: ProofNode, trig: tuple, head_index: int) -> None:
        rule, bi, binding = trig
        self.tick()
        env = {v.name: e for v, e in zip(rule.context, binding)}
        depth = 1 + max((fb.depth[e] for e in binding), default=0)
        node.events.append(("fire", rule.index, bi, binding, head_index))
        self.apply_head(fb, rule.heads[head_index], env, depth)

    def goal_holds(self, fb: FactBase) -> bool:
        values = [fb.find(c) for c in self.constants]
        return any(q.holds(fb, values) for q in self.goal_checks)

    def totality(self, fb: FactBase, node: ProofNode) -> bool:
        limit = self.budget.term_depth
        added = False
        for fn, (args, res) in self.sig.functions.items():
            pools = [fb.elements(s) for s in args]
            for combo in itertools.product(*pools):
                if fb.lookup(fn, combo) is not None:
                    continue
                if combo and max(fb.depth[e] for e in combo) >= limit:
                    self.incomplete = True
                    continue
                self.tick()
                fb.intern(fn, combo, res)
                node.events.append(("total", fn, combo))
                added = True
        if added:
            fb.rebuild()
        return added

    # ---- search

    def branch(self, fb: FactBase, node: ProofNode) -> bool:
        while True:
            progress = True
            while progress and not fb.closed:
                progress = False
                for trig in self.triggers(fb, ("close", "horn")):
                    trig = self.still_active(fb, trig)
                    if trig is None:
                        continue
                    self.fire(fb, node, trig, 0) if trig[0].heads else self._close(fb, node, trig)
                    progress = True
                    if fb.closed:
                        break
                if not fb.closed and progress and self.goal_holds(fb):
                    node.closed_by = "goal"
                    return True
            if fb.closed:
                node.closed_by = "bottom"
                return True
            if self.goal_holds(fb):
                node.closed_by = "goal"
                return True
            if self.totality(fb, node):
                continue
            fired = False
            for trig in self.triggers(fb, ("exists",)):
                trig = self.still_active(fb, trig)
                if trig is None:
                    continue
                self.fire(fb, node, trig, 0)
                fired = True
                if fb.closed:
                    break
            if fired:
                continue
            splits = self.triggers(fb, ("split",))
            if not splits:
                self.try_model(fb)
                node.closed_by = "open"
                return False
            trig = splits[0]
            rule, bi, binding = trig
            self.branches += len(rule.heads) - 1
            if self.branches > self.budget.branches:
                raise BudgetExhausted("branch budget exhausted")
            node.split = ("split", rule.index, bi, binding)
            for hi in range(len(rule.heads)):
                child = ProofNode()
                node.children.append(child)
                if not self.branch_from(fb.copy(), child, trig, hi):
                    return False
            return True

    def branch_from(self, fb: FactBase, node: ProofNode, trig: tuple, head_index: int) -> bool:
        self.fire(fb, node, trig, head_index)
        return self.branch(fb, node)

    def _close(self, fb: FactBase, node: ProofNode, trig: tuple) -> None:
        rule, bi, binding = trig
        self.tick()
        node.events.append(("fire", rule.index, bi, binding, -1))
        fb.closed = True

    def run(self) -> Outcome:
        fb = FactBase()
        root = ProofNode()
        for v in self.goal.context:
            self.constants.append(fb.new(v.sort, 0))
        env = {v.name: c for v, c in zip(self.goal.context, self.constants)}
        try:
            self.intern_ground(fb, [a for d in self.goal_heads for a in d[1]], env)
            if not self.assume:
                root.closed_by = "bottom"
                return Proved(root, self.steps)
            if len(self.assume) == 1:
                root.events.append(("assume", 0))
                self.apply_head(fb, self.assume[0], env, 0)
                ok = self.branch(fb, root)
            else:
                self.branches += len(self.assume) - 1
                if self.branches > self.budget.branches:
                    raise BudgetExhausted("branch budget exhausted")
                root.split = ("assume",)
                ok = True
                for i, d in enumerate(self.assume):
                    child = ProofNode([("assume", i)])
                    root.children.append(child)
                    sub = fb.copy()
                    self.apply_head(sub, d, env, 0)
                    if not self.branch(sub, child):
                        ok = False
                        break
        except BudgetExhausted as e:
            return Unknown(str(e), self.steps)
        if ok:
            return Proved(root, self.steps)
        if self.open_model is not None:
            return self.open_model
        reason = "saturated without a finite countermodel" if self.incomplete else "saturated"
        return Unknown(reason, self.steps)

    def try_model(self, fb: FactBase) -> None:
        if self.open_model is not None:
            return
        model = fact_base_model(self.sig, fb)
        if model is None:
            return
        index = {e: i for s, elems in fb.by_sort.items() for i, e in enumerate(elems)}
        assignment = {v.name: index[fb.find(c)] for v, c in zip(self.goal.context, self.constants)}
        if verify_countermodel(self.theory, self.goal, model, assignment):
            self.open_model = Refuted(model, assignment, self.steps)


def fact_base_model(sig, fb: FactBase) -> FiniteModel | None:
    """Read a total finite model off a saturated branch, if there is one."""
    index: dict[int, int] = {}
    carriers = {}
    for s in sig.sorts:
        elems = fb.elements(s)
        for i, e in enumerate(elems):
            index[e] = i
        carriers[s] = tuple(range(len(elems)))
    functions = {}
    for fn, (args, _res) in sig.functions.items():
        table = {}
        for combo in itertools.product(*(fb.elements(s) for s in args)):
            r = fb.funs.get((fn, combo))
            if r is None:
                return None
            table[tuple(index[e] for e in combo)] = index[fb.find(r)]
        functions[fn] = table
    relations = {r: frozenset(tuple(index[e] for e in args) for args in fb.rel_index.get(r, ()))
                 for r in sig.relations}
    return FiniteModel(sig, carriers, functions, relations)


def verify_countermodel(theory: Theory, goal: Sequent, model: FiniteModel, assignment: dict) -> bool:
    """Re-evaluate: every axiom holds and the goal fails at ``assignment``."""
    for ax in theory.axioms:
        if violation(model, ax) is not None:
            return False
    env = dict(assignment)
    ante = compile_formula(goal.antecedent, model)
    cons = compile_formula(goal.consequent, model)
    return ante(env) and not cons(env)


# ----------------------------------------------------------------- front end


def _check_goal(theory: Theory, goal: Sequent) -> None:
    diags = check_sequent(theory.signature, goal, Fragment.FIRST_ORDER, "goal")
    if diags:
        raise SortError("; ".join(str(d) for d in diags))


FALLBACK_MAX_SORTS = 4


def derive(theory: Theory, goal: Sequent, budget: Budget | None = None) -> Outcome:
    """Decide ``theory |- goal`` at desk scale.

    First-order (non-coherent) inputs are never proved; they go straight
    to the finite countermodel search.
    """
    budget = budget or DEFAULT_BUDGET
    _check_goal(theory, goal)
    coherent = is_coherent(goal.antecedent) and is_coherent(goal.consequent) and all(
        is_coherent(ax.antecedent) and is_coherent(ax.consequent) for ax in theory.axioms)
    if not coherent:
        return find_countermodel(theory, goal, min(budget.model_size, 2))
    out = _Run(theory, compile_theory(theory), goal, budget).run()
    if isinstance(out, Unknown) and out.reason.startswith("saturated") \
            and len(theory.signature.sorts) <= FALLBACK_MAX_SORTS:
        # An open branch without a total finite model; small signatures get a direct search.
        found = find_countermodel(theory, goal, min(budget.model_size, 2))
        if isinstance(found, Refuted):
            return Refuted(found.model, found.assignment, out.steps)
    return out


def find_countermodel(theory: Theory, goal: Sequent, max_size: int = 3) -> Outcome:
    """Search models with carriers up to ``max_size`` violating the goal."""
    if max_size < 0:
        raise ValueError("max_size must be non-negative")
    _check_goal(theory, goal)
    for model in iter_models(theory, max_size):
        env = violation(model, goal)
        if env is not None and verify_countermodel(theory, goal, model, env):
            return Refuted(model, env)
    return Unknown(f"no countermodel with carriers up to {max_size}")


def replay(theory: Theory, goal: Sequent, proof: Proved, budget: Budget | None = None) -> bool:
    """Re-apply the recorded events and check every leaf closes."""
    run = _Run(theory, compile_theory(theory), goal, budget or Budget(steps=10 ** 9, branches=10 ** 9))
    fb = FactBase()
    for v in goal.context:
        run.constants.append(fb.new(v.sort, 0))
    env = {v.name: c for v, c in zip(goal.context, run.constants)}
    run.intern_ground(fb, [a for d in run.goal_heads for a in d[1]], env)
    if not run.assume:
        return True
    return _replay_node(run, fb, proof.trace, env)


def _replay_node(run: _Run, fb: FactBase, node: ProofNode, env: dict) -> bool:
    for event in node.events:
        kind = event[0]
        if kind == "assume":
            run.apply_head(fb, run.assume[event[1]], env, 0)
        elif kind == "total":
            _fn, combo = event[1], event[2]
            args, res = run.sig.functions[_fn]
            fb.intern(_fn, combo, res)
            fb.rebuild()
        else:
            _, ri, bi, binding, hi = event
            rule = run.rules[ri]
            body = rule.bodies[bi]
            if not body.holds(fb, binding):
                return False
            if hi < 0:
                fb.closed = True
            else:
                e2 = {v.name: fb.find(e) for v, e in zip(rule.context, binding)}
                depth = 1 + max((fb.depth[fb.find(e)] for e in binding), default=0)
                run.apply_head(fb, rule.heads[hi], e2, depth)
    if node.split is not None:
        return all(_replay_node(run, fb.copy(), c, env) for c in node.children)
    if node.closed_by == "bottom":
        return fb.closed
    if node.closed_by == "goal":
        return run.goal_holds(fb)
    return False


def prove_all(theory: Theory, goals: Iterable[Sequent], budget: Budget | None = None) -> list[Outcome]:
    return [derive(theory, g, budget) for g in goals]
