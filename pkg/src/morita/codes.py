"""Codes for variables of new sorts and recoding into the base signature.

A formula over an extended signature is rewritten as a disjunction of
``exists ys. (code(xs, ys) /\\ body(ys))`` where the code ties each new-sort
variable to base-sort carrier variables and the body only mentions base
symbols.  Each disjunct yields a provably functional relation, and together
they cover the original formula.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .chase import derive
from .extend import ExtensionKind, ExtensionSpec, MoritaChain, witness_maps
from .outcome import Budget, Outcome
from .syntax import (
    TOP, BOTTOM, And, App, Bottom, Eq, Exists, Forall, Formula, Or, Rel, Sequent, Signature, SortDescriptor,
    Term, Theory, Top, Var, canonicalize, conj, disj, free_vars, substitute, symbols,
    var_names, walk,
)


class RecodeError(ValueError):
    pass


# ------------------------------------------------------------------- codes


@dataclass(frozen=True)
class CodedVar:
    var: Var
    kind: str
    carriers: tuple           # base-sort variables
    atoms: tuple              # coding equations
    branch: int | None = None
    patch: Formula = TOP      # what the carriers must satisfy (subsort/empty)


@dataclass(frozen=True)
class Code:
    entries: tuple = ()

    @property
    def formula(self) -> Formula:
        return conj(*(a for e in self.entries for a in e.atoms))

    @property
    def carriers(self) -> tuple:
        return tuple(c for e in self.entries for c in e.carriers)

    @property
    def coded(self) -> tuple:
        return tuple(e.var for e in self.entries)

    @property
    def patches(self) -> list[Formula]:
        return [e.patch for e in self.entries if not isinstance(e.patch, Top)]

    def has_subsort(self) -> bool:
        return any(e.kind in ("subsort", "empty") for e in self.entries)

    def branches(self) -> dict[str, int]:
        return {e.var.name: e.branch for e in self.entries if e.branch is not None}


class _Names:
    """Hands out ``<prefix>N`` names avoiding a growing set."""

    def __init__(self, avoid: Iterable[str]):
        self.avoid = set(avoid)
        self.counters: dict[str, int] = {}

    def __call__(self, prefix: str, sort: str) -> Var:
        n = self.counters.get(prefix, 0)
        while True:
            n += 1
            name = f"{prefix}{n}"
            if name not in self.avoid:
                break
        self.counters[prefix] = n
        self.avoid.add(name)
        return Var(name, sort)


def _descriptor(sig: Signature, sort: str) -> SortDescriptor:
    d = sig.sorts.get(sort)
    if d is None:
        raise RecodeError(f"unknown sort {sort}")
    return d


def _code_var(sig: Signature, v: Var, branch: int | None, fresh: _Names,
              unit_maps: Mapping[str, tuple], empty_maps: Mapping[str, tuple]) -> CodedVar:
    d = _descriptor(sig, v.sort)
    if d.kind == "product":
        cs = tuple(fresh("y", s) for s in d.components)
        atoms = tuple(Eq(App(pi, (v,), s), c) for pi, s, c in zip(d.maps, d.components, cs))
        return CodedVar(v, "product", cs, atoms)
    if d.kind == "coproduct":
        if branch is None:
            raise RecodeError(f"no branch chosen for coproduct variable {v.name}")
        if not 1 <= branch <= len(d.components):
            raise RecodeError(f"branch {branch} out of range for {v.name}:{v.sort}")
        c = fresh("y", d.components[branch - 1])
        return CodedVar(v, "coproduct", (c,), (Eq(App(d.maps[branch - 1], (c,), v.sort), v),), branch)
    if d.kind == "subsort":
        c = fresh("y", d.components[0])
        patch = substitute(d.formula, {d.params[0]: c})
        return CodedVar(v, "subsort", (c,), (Eq(App(d.maps[0], (v,), d.components[0]), c),), None, patch)
    if d.kind == "quotient":
        c = fresh("y", d.components[0])
        return CodedVar(v, "quotient", (c,), (Eq(App(d.maps[0], (c,), v.sort), v),))
    if d.kind == "unit":
        return CodedVar(v, "unit", (), ())
    if d.kind == "empty":
        fn, witness = empty_maps[v.sort]
        c = fresh("y", witness)
        return CodedVar(v, "empty", (c,), (Eq(App(fn, (v,), witness), c),), None, BOTTOM)
    raise RecodeError(f"variable {v.name} has base sort {v.sort}")


def _map_table(sig: Signature, kind: str) -> dict[str, tuple]:
    """Per unit/empty sort, the map used in codes (to/from its witness sort)."""
    out = {}
    for name, d in sig.sorts.items():
        if d.kind != kind:
            continue
        witness = d.components[0]
        for fn, (args, res) in sig.functions.items():
            if kind == "empty" and args == (name,) and res == witness:
                out[name] = (fn, witness)
                break
            if kind == "unit" and args == (witness,) and res == name:
                out[name] = (fn, witness)
                break
    return out


def make_code(sig: Signature, variables: Sequence[Var], branches: Mapping[str, int] | None = None,
              avoid: Iterable[str] = ()) -> Code:
    """Code the given new-sort variables through fresh carriers ``y1, y2, ...``."""
    branches = branches or {}
    fresh = _Names(set(avoid) | {v.name for v in variables})
    unit_maps, empty_maps = _map_table(sig, "unit"), _map_table(sig, "empty")
    return Code(tuple(_code_var(sig, v, branches.get(v.name), fresh, unit_maps, empty_maps)
                      for v in variables))


def branch_choices(sig: Signature, variables: Sequence[Var]) -> list[dict[str, int]]:
    """Every branch assignment for the coproduct variables, in injection order."""
    cops = [v for v in variables if _descriptor(sig, v.sort).kind == "coproduct"]
    ranges = [range(1, len(_descriptor(sig, v.sort).components) + 1) for v in cops]
    return [dict(zip((v.name for v in cops), combo)) for combo in itertools.product(*ranges)]


def all_codes(sig: Signature, variables: Sequence[Var], avoid: Iterable[str] = ()) -> list[Code]:
    return [make_code(sig, variables, b, avoid) for b in branch_choices(sig, variables)]


def _primed(vs: Sequence[Var], avoid: set[str]) -> list[Var]:
    out = []
    for v in vs:
        name = v.name + "'"
        while name in avoid:
            name += "'"
        avoid.add(name)
        out.append(Var(name, v.sort))
    return out


def code_lemma_sequents(sig: Signature, code: Code) -> list[Sequent]:
    """Covering, surjectivity (when no subsort is coded) and functionality."""
    xs = list(code.coded)
    avoid = {v.name for v in xs} | {c.name for c in code.carriers}
    out = []
    codes = all_codes(sig, xs, avoid - {v.name for v in xs})
    cover = disj(*(_exists(k.carriers, k.formula) for k in codes))
    out.append(Sequent(TOP, cover, tuple(xs), "codes_cover"))
    if not code.has_subsort():
        out.append(Sequent(TOP, _exists(xs, code.formula), code.carriers, "codes_onto"))
    zs = _primed(xs, set(avoid))
    ren = dict(zip(xs, zs))
    other = substitute(code.formula, ren)
    out.append(Sequent(And(code.formula, other), conj(*(Eq(x, z) for x, z in zip(xs, zs))),
                       (*xs, *code.carriers, *zs), "codes_functional"))
    return out


def check_code_lemmas(code: Code, theory: Theory, budget: Budget | None = None) -> list[tuple[Sequent, Outcome]]:
    return [(s, derive(theory, s, budget)) for s in code_lemma_sequents(theory.signature, code)]


def _exists(vs: Iterable[Var], body: Formula) -> Formula:
    for v in reversed(list(vs)):
        body = Exists(v, body)
    return body


# ----------------------------------------------------------- simplification


def simplify(f: Formula) -> Formula:
    """Drop trivial units; never touches ``exists x. true`` (it asserts inhabitation)."""
    if isinstance(f, And):
        parts: list[Formula] = []
        for p in _flat_and(f):
            p = simplify(p)
            if isinstance(p, Bottom):
                return BOTTOM
            for q in _flat_and(p):
                if not isinstance(q, Top) and q not in parts:
                    parts.append(q)
        return conj(*parts)
    if isinstance(f, Or):
        a, b = simplify(f.left), simplify(f.right)
        if isinstance(a, Bottom):
            return b
        if isinstance(b, Bottom):
            return a
        return Or(a, b)
    if isinstance(f, Exists):
        body = simplify(f.body)
        return BOTTOM if isinstance(body, Bottom) else Exists(f.var, body)
    return f


def _flat_and(f: Formula) -> list[Formula]:
    if isinstance(f, And):
        return _flat_and(f.left) + _flat_and(f.right)
    return [f]


# --------------------------------------------------------------- recoding


@dataclass(frozen=True)
class _Prod:
    parts: tuple


@dataclass(frozen=True)
class _Cop:
    branch: int
    value: Term


_UNIT = ("unit",)


@dataclass
class _Alt:
    """One alternative for a term: branch requirements, witnesses, side formulas, value."""

    req: dict
    exvars: list
    side: list
    value: object


class Recoder:
    """Recode formulas of an extension into its base signature.

    ``base`` is the signature before the extension and ``specs`` are the
    extension steps whose sorts and symbols are all defined over ``base``.
    ``extended`` is the resulting signature.
    """

    def __init__(self, base: Signature, extended: Signature, specs: Sequence[ExtensionSpec] = ()):
        self.base = base
        self.sig = extended
        self.new_sorts = {s: d for s, d in extended.sorts.items() if s not in base.sorts}
        self.defined_funs = {s.name: s for s in specs if s.kind is ExtensionKind.FUNCTION}
        self.defined_rels = {s.name: s for s in specs if s.kind is ExtensionKind.RELATION}
        self.structural = {}
        for name, d in self.new_sorts.items():
            for i, fn in enumerate(d.maps):
                self.structural[fn] = (d, i)
        self.unit_maps = _map_table(extended, "unit")
        self.empty_maps = _map_table(extended, "empty")
        self.witness_fns = {}
        for spec in specs:
            if spec.kind in (ExtensionKind.UNIT, ExtensionKind.EMPTY):
                for fn, s in witness_maps(spec, base):
                    self.witness_fns[fn] = (spec.kind.value, spec.name, s)
        for fn in extended.functions:
            if fn not in base.functions and fn not in self.structural and fn not in self.defined_funs \
                    and fn not in self.witness_fns:
                raise RecodeError(f"function {fn} has no definition in this extension")
        for r in extended.relations:
            if r not in base.relations and r not in self.defined_rels:
                raise RecodeError(f"relation {r} has no definition in this extension")

    @classmethod
    def for_chain(cls, chain: MoritaChain, step: int = -1) -> "Recoder":
        stages = chain.stages()
        idx = step % len(chain.steps)
        spec, thy = chain.steps[idx]
        return cls(stages[idx].signature, thy.signature, [spec])

    def is_new(self, sort: str) -> bool:
        return sort in self.new_sorts

    # ---- terms

    def _fresh(self, prefix: str, sort: str) -> Var:
        return self.names(prefix, sort)

    def term(self, t: Term, env: dict) -> list[_Alt]:
        if isinstance(t, Var):
            val = env.get(t.name)
            if val is None:
                if self.is_new(t.sort):
                    raise RecodeError(f"variable {t.name} of new sort {t.sort} is not coded")
                return [_Alt({}, [], [], t)]
            if isinstance(val, dict):        # free coproduct variable: branch per code
                return [_Alt({t.name: k}, [], [], _Cop(k, c)) for k, c in val.items()]
            return [_Alt({}, [], [], val)]
        alts = [_Alt({}, [], [], [])]
        for a in t.args:
            nxt = []
            for acc in alts:
                for sub in self.term(a, env):
                    req = _merge(acc.req, sub.req)
                    if req is None:
                        continue
                    nxt.append(_Alt(req, acc.exvars + sub.exvars, acc.side + sub.side, acc.value + [sub.value]))
            alts = nxt
        return [self._apply(t, alt) for alt in alts]

    def _apply(self, t: App, alt: _Alt) -> _Alt:
        vals = alt.value
        fn = t.fn
        if fn in self.structural:
            d, i = self.structural[fn]
            if d.kind == "product":
                alt.value = vals[0].parts[i]
            elif d.kind == "coproduct":
                alt.value = _Cop(i + 1, vals[0])
            elif d.kind == "subsort":
                alt.side.append(substitute(d.formula, {d.params[0]: vals[0]}))
                alt.value = vals[0]
            else:                                   # quotient map: keep a representative
                alt.value = vals[0]
            return alt
        if fn in self.witness_fns:
            kind, _name, s = self.witness_fns[fn]
            if kind == "unit":
                alt.value = _UNIT
            else:
                w = self._fresh("w", s)
                alt.exvars.append(w)
                alt.side.append(BOTTOM)
                alt.value = w
            return alt
        if fn in self.defined_funs:
            spec = self.defined_funs[fn]
            w = self._fresh("w", t.sort)
            binding = dict(zip(spec.params[:-1], vals))
            binding[spec.params[-1]] = w
            alt.exvars.append(w)
            alt.side.append(substitute(spec.formula, binding))
            alt.value = w
            return alt
        alt.value = App(fn, tuple(vals), t.sort)
        return alt

    # ---- formulas

    def equal(self, sort: str, a, b) -> Formula:
        d = self.new_sorts.get(sort)
        if d is None:
            return Eq(a, b)
        if d.kind == "product":
            return conj(*(Eq(x, y) for x, y in zip(a.parts, b.parts)))
        if d.kind == "coproduct":
            return Eq(a.value, b.value) if a.branch == b.branch else BOTTOM
        if d.kind == "subsort":
            chi = lambda v: substitute(d.formula, {d.params[0]: v})
            return conj(Eq(a, b), chi(a), chi(b))
        if d.kind == "quotient":
            return substitute(d.formula, {d.params[0]: a, d.params[1]: b})
        if d.kind == "unit":
            return TOP
        return BOTTOM

    def atom(self, f: Formula, env: dict) -> list[tuple[dict, Formula]]:
        terms = (f.left, f.right) if isinstance(f, Eq) else f.args
        alts = [_Alt({}, [], [], [])]
        for t in terms:
            nxt = []
            for acc in alts:
                for sub in self.term(t, env):
                    req = _merge(acc.req, sub.req)
                    if req is not None:
                        nxt.append(_Alt(req, acc.exvars + sub.exvars, acc.side + sub.side, acc.value + [sub.value]))
            alts = nxt
        out = []
        for alt in alts:
            if isinstance(f, Eq):
                core = self.equal(f.left.sort, alt.value[0], alt.value[1])
            elif f.name in self.defined_rels:
                spec = self.defined_rels[f.name]
                core = substitute(spec.formula, dict(zip(spec.params, alt.value)))
            else:
                core = Rel(f.name, tuple(alt.value))
            out.append((alt.req, _exists(alt.exvars, conj(*alt.side, core))))
        return out

    def formula(self, f: Formula, env: dict) -> list[tuple[dict, Formula]]:
        if isinstance(f, (Top, Bottom)):
            return [({}, f)]
        if isinstance(f, (Eq, Rel)):
            return self.atom(f, env)
        if isinstance(f, Or):
            return self.formula(f.left, env) + self.formula(f.right, env)
        if isinstance(f, And):
            out = []
            for ra, a in self.formula(f.left, env):
                for rb, b in self.formula(f.right, env):
                    req = _merge(ra, rb)
                    if req is not None:
                        out.append((req, And(a, b)))
            return out
        if isinstance(f, Exists):
            return self.quantifier(f, env)
        raise RecodeError(f"cannot recode {type(f).__name__}: only coherent formulas are supported")

    def quantifier(self, f: Exists, env: dict) -> list[tuple[dict, Formula]]:
        v = f.var
        d = self.new_sorts.get(v.sort)
        inner = dict(env)
        if d is None:
            inner.pop(v.name, None)
            return [(r, Exists(v, b)) for r, b in self.formula(f.body, inner)]
        if d.kind == "product":
            cs = [self._fresh("u", s) for s in d.components]
            inner[v.name] = _Prod(tuple(cs))
            return [(r, _exists(cs, b)) for r, b in self.formula(f.body, inner)]
        if d.kind == "coproduct":
            out = []
            for k, s in enumerate(d.components, 1):
                c = self._fresh("u", s)
                inner = dict(env)
                inner[v.name] = _Cop(k, c)
                out += [(r, Exists(c, b)) for r, b in self.formula(f.body, inner)]
            return out
        if d.kind == "subsort":
            c = self._fresh("u", d.components[0])
            inner[v.name] = c
            chi = substitute(d.formula, {d.params[0]: c})
            return [(r, Exists(c, And(chi, b))) for r, b in self.formula(f.body, inner)]
        if d.kind == "quotient":
            c = self._fresh("u", d.components[0])
            inner[v.name] = c
            return [(r, Exists(c, b)) for r, b in self.formula(f.body, inner)]
        if d.kind == "unit":
            inner[v.name] = _UNIT
            return self.formula(f.body, inner)
        return [({}, BOTTOM)]

    # ---- entry points

    def recode(self, formula: Formula, context: Sequence[Var]) -> list["Disjunct"]:
        context = tuple(context)
        for v in free_vars(formula):
            if v not in context:
                raise RecodeError(f"free variable {v.name} is not in the context")
        sorts, funs, rels = symbols(formula)
        unknown = (sorts - set(self.sig.sorts)) | (funs - set(self.sig.functions)) | (rels - set(self.sig.relations))
        unknown |= {v.sort for v in context} - set(self.sig.sorts)
        if unknown:
            raise RecodeError(f"symbols outside the extension: {', '.join(sorted(unknown))}")
        avoid = var_names(formula) | {v.name for v in context}
        new_vars = [v for v in context if self.is_new(v.sort)]
        base_vars = [v for v in context if not self.is_new(v.sort)]
        choices = branch_choices(self.sig, new_vars)
        codes = [make_code(self.sig, new_vars, b, avoid) for b in choices]
        self.names = _Names(avoid | {c.name for code in codes for c in code.carriers})
        env: dict = {}
        cop_vals: dict[str, dict[int, Var]] = {}
        code0 = codes[0]
        for e in code0.entries:
            if e.kind == "product":
                env[e.var.name] = _Prod(e.carriers)
            elif e.kind == "coproduct":
                cop_vals[e.var.name] = {}
            elif e.kind == "unit":
                env[e.var.name] = _UNIT
            else:
                env[e.var.name] = e.carriers[0]
        for code in codes:
            for e in code.entries:
                if e.kind == "coproduct":
                    cop_vals[e.var.name][e.branch] = e.carriers[0]
        env.update(cop_vals)
        alts = self.formula(formula, env)
        # Without coproduct-sorted binders every alternative under one code
        # shares that code, so they collapse into a single disjunction.
        merge = not any(isinstance(g, (Exists, Forall)) and self.is_new(g.var.sort)
                        and _descriptor(self.sig, g.var.sort).kind == "coproduct" for g in walk(formula))
        out: list[Disjunct] = []
        seen = set()
        for code, choice in zip(codes, choices):
            bodies = [body for req, body in alts if all(choice.get(k) == v for k, v in req.items())]
            if merge and len(bodies) > 1:
                bodies = [disj(*dict.fromkeys(bodies))]
            for body in bodies:
                star = simplify(conj(body, *code.patches))
                d = Disjunct(code, star, tuple(base_vars))
                key = d.key()
                if key not in seen:
                    seen.add(key)
                    out.append(d)
        return out


def _merge(a: dict, b: dict) -> dict | None:
    out = dict(a)
    for k, v in b.items():
        if out.setdefault(k, v) != v:
            return None
    return out


@dataclass(frozen=True)
class Disjunct:
    """``exists carriers. (code /\\ body)`` with ``body`` over the base signature."""

    code: Code
    body: Formula
    base_vars: tuple = ()

    @property
    def formula(self) -> Formula:
        return conj(self.code.formula, self.body)

    def closed(self) -> Formula:
        return _exists(self.code.carriers, self.formula)

    def key(self) -> tuple:
        ctx = (*self.code.coded, *self.base_vars, *self.code.carriers)
        return (self.code.carriers, canonicalize(self.code.formula, ctx), canonicalize(self.body, ctx))


def recode_formula(formula: Formula, context: Sequence[Var], recoder: Recoder) -> list[Disjunct]:
    return recoder.recode(formula, context)


def recode_term(term: Term, result: Var, context: Sequence[Var], recoder: Recoder) -> list[Disjunct]:
    """Recode ``term = result``; the context must contain ``result``."""
    ctx = tuple(context)
    if result not in ctx:
        ctx = ctx + (result,)
    return recoder.recode(Eq(term, result), ctx)


def recombine(disjuncts: Sequence[Disjunct]) -> Formula:
    return disj(*(d.closed() for d in disjuncts))


def base_only(f: Formula, base: Signature) -> bool:
    sorts, funs, rels = symbols(f)
    return sorts <= set(base.sorts) and funs <= set(base.functions) and rels <= set(base.relations)


def equivalence_sequents(formula: Formula, context: Sequence[Var], disjuncts: Sequence[Disjunct]) -> list[Sequent]:
    rhs = recombine(disjuncts)
    return [Sequent(formula, rhs, tuple(context), "recode_l"), Sequent(rhs, formula, tuple(context), "recode_r")]


# ------------------------------------------------------------ cover family


@dataclass
class CoverMorphism:
    disjunct: Disjunct
    source: tuple             # context of the source object
    source_formula: Formula
    theta: Formula
    checks: list = field(default_factory=list)


@dataclass
class CoverReport:
    context: tuple
    formula: Formula
    morphisms: list
    cover_checks: list

    def all_checks(self) -> list[tuple[Sequent, Outcome]]:
        return [c for m in self.morphisms for c in m.checks] + list(self.cover_checks)

    @property
    def status(self) -> str:
        statuses = [o.status for _s, o in self.all_checks()]
        if "refuted" in statuses:
            return "refuted"
        if all(s == "proved" for s in statuses):
            return "proved"
        return "unknown"


def functional_sequents(src: Sequence[Var], src_formula: Formula, tgt: Sequence[Var], tgt_formula: Formula,
                        theta: Formula) -> list[Sequent]:
    """Relatedness, single-valuedness and totality of ``theta`` from src to tgt."""
    src, tgt = tuple(src), tuple(tgt)
    avoid = {v.name for v in src + tgt} | var_names(theta)
    tgt2 = _primed(tgt, avoid)
    theta2 = substitute(theta, dict(zip(tgt, tgt2)))
    return [
        Sequent(theta, And(src_formula, tgt_formula), src + tgt, "related"),
        Sequent(And(theta, theta2), conj(*(Eq(a, b) for a, b in zip(tgt, tgt2))), src + tgt + tuple(tgt2),
                "single_valued"),
        Sequent(src_formula, _exists(tgt, theta), src, "total"),
    ]


def cover_family(context: Sequence[Var], formula: Formula, theory: Theory, recoder: Recoder,
                 budget: Budget | None = None, verify: bool = True) -> CoverReport:
    context = tuple(context)
    disjuncts = recoder.recode(formula, context)
    morphisms = []
    covers = []
    for d in disjuncts:
        avoid = {v.name for v in context} | {c.name for c in d.code.carriers} | var_names(d.body)
        base_primed = _primed(list(d.base_vars), avoid)
        ren = dict(zip(d.base_vars, base_primed))
        src = (*base_primed, *d.code.carriers)
        src_formula = substitute(d.body, ren)
        body = [] if isinstance(src_formula, Top) else [src_formula]
        theta = conj(d.code.formula, *body, *(Eq(p, b) for p, b in zip(base_primed, d.base_vars)))
        m = CoverMorphism(d, src, src_formula, theta)
        if verify:
            m.checks = [(s, derive(theory, s, budget))
                        for s in functional_sequents(src, src_formula, context, formula, theta)]
        morphisms.append(m)
        covers.append(_exists(src, theta))
    union = disj(*covers)
    report = CoverReport(context, formula, morphisms, [])
    if verify:
        report.cover_checks = [(s, derive(theory, s, budget)) for s in (
            Sequent(union, formula, context, "cover_l"), Sequent(formula, union, context, "cover_r"))]
    return report


# ------------------------------------------------------------------ chains


def recode_chain(formula: Formula, context: Sequence[Var], chain: MoritaChain) -> list[tuple[Formula, Formula, tuple]]:
    """Recode stage by stage down to the chain's base.

    Returns ``(codes, body, carriers)`` triples: ``codes`` conjoins the
    codes of every stage, ``body`` is over the base signature and
    ``carriers`` lists all carrier variables to be bound.
    """
    work = [(TOP, formula, tuple(context), ())]
    for idx in range(len(chain.steps) - 1, -1, -1):
        rec = Recoder.for_chain(chain, idx)
        nxt = []
        for codes, body, ctx, carriers in work:
            for d in rec.recode(body, ctx):
                new_ctx = (*d.base_vars, *d.code.carriers)
                nxt.append((conj(codes, d.code.formula) if not isinstance(codes, Top) else d.code.formula,
                            d.body, new_ctx, carriers + d.code.carriers))
        work = nxt
    return [(simplify(c), b, car) for c, b, _ctx, car in work]
