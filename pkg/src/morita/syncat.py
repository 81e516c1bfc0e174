"""Finite fragments of the syntactic category of a coherent theory.

Objects are formulas in context up to renaming, morphisms are provably
functional relations up to provable equivalence.  On top of that the
module builds two bounded Morita extensions from a shared fragment: one
adding product sorts, subsorts and defined arrows to the theory itself
(``build_hat_fragment``), and one starting from the fragment's internal
theory and defining the base symbols back (``build_tilde_fragment``).
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

from .chase import derive
from .codes import Recoder, base_only, cover_family, functional_sequents
from .extend import ExtensionSpec, MoritaChain
from .models import iter_models, violation
from .outcome import Budget, Outcome
from .syntax import (
    TOP, And, App, Bottom, Eq, Exists, Formula, Fragment, Or, Rel, Sequent, Signature, Theory,
    Top, Var, canonicalize, check_wellformed, conj, disj, exists, free_vars, is_coherent, substitute,
)


class FragmentError(ValueError):
    pass


# ------------------------------------------------------------------ objects


@dataclass(frozen=True)
class SynObject:
    """``{x1..xn . phi}`` with positional variable names and canonical bound names."""

    context: tuple
    formula: Formula

    @classmethod
    def of(cls, context: Sequence[Var], formula: Formula = TOP) -> "SynObject":
        context = tuple(context)
        pos = tuple(Var(f"x{i}", v.sort) for i, v in enumerate(context, 1))
        renamed = substitute(formula, dict(zip(context, pos))) if context else formula
        return cls(pos, canonicalize(renamed, pos))

    @property
    def sorts(self) -> tuple[str, ...]:
        return tuple(v.sort for v in self.context)

    @property
    def is_top(self) -> bool:
        return isinstance(self.formula, Top)

    def target_vars(self) -> tuple:
        """The same context under the names used on the target side of an arrow."""
        return tuple(Var(f"y{i}", v.sort) for i, v in enumerate(self.context, 1))

    def as_target(self) -> Formula:
        return substitute(self.formula, dict(zip(self.context, self.target_vars()))) if self.context else self.formula

    def __str__(self) -> str:
        from .dsl import print_formula
        ctx = ", ".join(f"{v.name}:{v.sort}" for v in self.context)
        return "{" + ctx + " . " + print_formula(self.formula) + "}"


def _primed(vs: Sequence[Var], avoid: set[str], mark: str = "'") -> tuple:
    out = []
    for v in vs:
        name = v.name + mark
        while name in avoid:
            name += mark
        avoid.add(name)
        out.append(Var(name, v.sort))
    return tuple(out)


@dataclass
class SynMorphism:
    """``[theta]`` from source to target; ``theta`` is over source vars x.. and target vars y..."""

    source: SynObject
    target: SynObject
    theta: Formula
    certificate: list = field(default_factory=list)
    symbol: str = ""
    role: str = ""

    @property
    def context(self) -> tuple:
        return self.source.context + self.target.target_vars()

    @property
    def certified(self) -> bool:
        return len(self.certificate) == 3 and all(o.status == "proved" for _s, o in self.certificate)

    def sequents(self) -> list[Sequent]:
        return functional_sequents(self.source.context, self.source.formula, self.target.target_vars(),
                                   self.target.as_target(), self.theta)

    def __str__(self) -> str:
        from .dsl import print_formula
        label = f"{self.symbol} " if self.symbol else ""
        return f"{label}[{print_formula(self.theta)}] : {self.source} -> {self.target}"


def morphism(theory: Theory, source: SynObject, target: SynObject, theta: Formula,
             budget: Budget | None = None, symbol: str = "", role: str = "") -> SynMorphism:
    m = SynMorphism(source, target, theta, symbol=symbol, role=role)
    m.certificate = [(s, derive(theory, s, budget)) for s in m.sequents()]
    return m


def identity(theory: Theory, obj: SynObject, budget: Budget | None = None) -> SynMorphism:
    ys = obj.target_vars()
    return morphism(theory, obj, obj, conj(*_nontrivial(obj.formula), *(Eq(x, y) for x, y in zip(obj.context, ys))),
                    budget, role="identity")


def _nontrivial(f: Formula) -> list[Formula]:
    return [] if isinstance(f, Top) else [f]


def compose_theta(first: SynMorphism, second: SynMorphism) -> Formula:
    """``exists w (first(x, w) and second(w, y))``."""
    mid = first.target
    avoid = {v.name for v in first.context} | {v.name for v in second.context}
    ws = tuple(Var(f"w{i}", v.sort) for i, v in enumerate(mid.context, 1))
    ws = tuple(w if w.name not in avoid else _primed([w], avoid)[0] for w in ws)
    left = substitute(first.theta, dict(zip(mid.target_vars(), ws))) if ws else first.theta
    right = substitute(second.theta, dict(zip(mid.context, ws))) if ws else second.theta
    return exists(ws, And(left, right))


def compose(theory: Theory, first: SynMorphism, second: SynMorphism, budget: Budget | None = None) -> SynMorphism:
    if first.target != second.source:
        raise FragmentError("morphisms are not composable")
    return morphism(theory, first.source, second.target, compose_theta(first, second), budget, role="composite")


# ------------------------------------------------------ model prefiltering


@lru_cache(maxsize=32)
def _small_models(theory: Theory, bound: int) -> tuple:
    return tuple(iter_models(theory, bound))


def _refuted_small(theory: Theory, seqs: Iterable[Sequent], bound: int) -> bool:
    models = _small_models(theory, bound)
    return any(violation(m, s) is not None for s in seqs for m in models)


def _proved(theory: Theory, seq: Sequent, budget: Budget | None, bound: int) -> Outcome | None:
    """derive, after a cheap check that no small model refutes ``seq``."""
    if bound and _refuted_small(theory, [seq], bound):
        return None
    return derive(theory, seq, budget)


def equivalent(theory: Theory, a: SynMorphism, b: SynMorphism, budget: Budget | None = None,
               bound: int = 2) -> str:
    """'proved', 'refuted' or 'unknown' for ``a.theta -||- b.theta``."""
    ctx = a.context
    seqs = [Sequent(a.theta, b.theta, ctx), Sequent(b.theta, a.theta, ctx)]
    if bound and _refuted_small(theory, seqs, bound):
        return "refuted"
    statuses = [derive(theory, s, budget).status for s in seqs]
    if "refuted" in statuses:
        return "refuted"
    return "proved" if all(s == "proved" for s in statuses) else "unknown"


# --------------------------------------------------------------- hom search


def candidate_atoms(sig: Signature, source: SynObject, target: SynObject) -> list[Formula]:
    """Atoms over the joint context that mention a target variable.

    Atoms mentioning only source variables never matter: totality forces
    them to follow from the source formula.
    """
    xs, ys = source.context, target.target_vars()
    joint = xs + ys
    terms = list(joint)
    for fn, (args, res) in sig.functions.items():
        pools = [[v for v in joint if v.sort == a] for a in args]
        for combo in itertools.product(*pools):
            terms.append(App(fn, tuple(combo), res))
    targets = set(ys)

    def mentions(*ts) -> bool:
        return any(v in targets for t in ts for v in ([t] if isinstance(t, Var) else t.args))

    atoms = []
    for a, b in itertools.combinations(terms, 2):
        if _sort_of(a) == _sort_of(b) and mentions(a, b):
            atoms.append(Eq(a, b))
    for r, args in sig.relations.items():
        pools = [[v for v in joint if v.sort == a] for a in args]
        for combo in itertools.product(*pools):
            if mentions(*combo):
                atoms.append(Rel(r, tuple(combo)))
    return atoms


def _sort_of(t) -> str:
    return t.sort


@dataclass
class HomSearch:
    morphisms: list
    candidates: int = 0
    dropped_unknown: int = 0
    unresolved_pairs: list = field(default_factory=list)   # (i, j) with equivalence Unknown

    def __iter__(self):
        return iter(self.morphisms)

    def __len__(self) -> int:
        return len(self.morphisms)


def hom_search(theory: Theory, source: SynObject, target: SynObject, size_bound: int = 2,
               budget: Budget | None = None, model_bound: int = 2) -> HomSearch:
    """Provably functional conjunctions of at most ``size_bound`` atoms.

    Candidates are tried by increasing size in a fixed order and each new
    morphism is kept only if it is not provably equal to an earlier one, so
    raising the bound never loses a morphism.
    """
    atoms = candidate_atoms(theory.signature, source, target)
    base = _nontrivial(source.formula) + _nontrivial(target.as_target())
    result = HomSearch([])
    for k in range(size_bound + 1):
        for combo in itertools.combinations(atoms, k):
            theta = conj(*base, *combo)
            result.candidates += 1
            m = SynMorphism(source, target, theta)
            seqs = m.sequents()
            if model_bound and _refuted_small(theory, seqs, model_bound):
                continue
            m.certificate = [(s, derive(theory, s, budget)) for s in seqs]
            if not m.certified:
                if any(o.status == "unknown" for _s, o in m.certificate):
                    result.dropped_unknown += 1
                continue
            verdicts = [equivalent(theory, m, old, budget, model_bound) for old in result.morphisms]
            if "proved" in verdicts:
                continue
            idx = len(result.morphisms)
            result.unresolved_pairs += [(i, idx) for i, v in enumerate(verdicts) if v == "unknown"]
            m.role = "found"
            result.morphisms.append(m)
    return result


# -------------------------------------------------------- subobject lattice


@dataclass
class JoinCheck:
    left: int
    right: int
    formula: Formula
    upper: list           # outcomes of left |- join, right |- join
    least: list           # (k, outcome of join |- k) for pooled upper bounds k

    @property
    def ok(self) -> bool:
        return all(o.status == "proved" for o in self.upper) and all(o.status == "proved" for _k, o in self.least)


@dataclass
class SubobjectLattice:
    theory: Theory
    obj: SynObject
    elements: list        # formulas over obj.context, each conjoined with obj.formula
    order: dict           # (i, j) -> status of elements[i] |- elements[j]
    budget: Budget | None = None

    def leq(self, i: int, j: int) -> bool:
        return self.order[(i, j)] == "proved"

    def equivalent(self, i: int, j: int) -> bool:
        return self.leq(i, j) and self.leq(j, i)

    def covers(self) -> list[tuple[int, int]]:
        """Hasse edges (i below j) between provably distinct elements."""
        n = len(self.elements)
        below = [(i, j) for i in range(n) for j in range(n) if i != j and self.leq(i, j) and not self.leq(j, i)]
        return [(i, j) for i, j in below
                if not any((i, k) in below and (k, j) in below for k in range(n))]

    def _seq(self, a: Formula, b: Formula) -> Sequent:
        return Sequent(a, b, self.obj.context)

    def join(self, i: int, j: int) -> JoinCheck:
        f = Or(self.elements[i], self.elements[j])
        upper = [derive(self.theory, self._seq(self.elements[i], f), self.budget),
                 derive(self.theory, self._seq(self.elements[j], f), self.budget)]
        least = [(k, derive(self.theory, self._seq(f, e), self.budget))
                 for k, e in enumerate(self.elements) if self.leq(i, k) and self.leq(j, k)]
        return JoinCheck(i, j, f, upper, least)

    def meet(self, i: int, j: int) -> JoinCheck:
        f = And(self.elements[i], self.elements[j])
        lower = [derive(self.theory, self._seq(f, self.elements[i]), self.budget),
                 derive(self.theory, self._seq(f, self.elements[j]), self.budget)]
        greatest = [(k, derive(self.theory, self._seq(e, f), self.budget))
                    for k, e in enumerate(self.elements) if self.leq(k, i) and self.leq(k, j)]
        return JoinCheck(i, j, f, lower, greatest)

    def to_json(self) -> dict:
        from .dsl import print_formula
        return {"object": str(self.obj), "elements": [print_formula(e) for e in self.elements],
                "order": [[i, j] for (i, j), s in sorted(self.order.items()) if s == "proved" and i != j],
                "unknown": [[i, j] for (i, j), s in sorted(self.order.items()) if s == "unknown"]}


def _to_object_vars(obj: SynObject, formulas: Iterable[Formula], context: Sequence[Var] | None) -> list[Formula]:
    if context is None:
        return list(formulas)
    ren = dict(zip(tuple(context), obj.context))
    return [substitute(f, ren) for f in formulas]


def subobject_lattice(theory: Theory, obj: SynObject, pool: Iterable[Formula],
                      budget: Budget | None = None, context: Sequence[Var] | None = None) -> SubobjectLattice:
    """Pool formulas ordered by derivable implication.

    Formulas are over the object's positional variables, or over
    ``context`` when given (renamed position by position).
    """
    names = {v.name for v in obj.context}
    elements = []
    for f in _to_object_vars(obj, pool, context):
        extra = [v.name for v in free_vars(f) if v.name not in names]
        if extra:
            raise FragmentError(f"pool formula uses variables outside the object's context: {extra}")
        elements.append(conj(*_nontrivial(obj.formula), f) if not isinstance(f, Top) else obj.formula)
    order = {}
    for i, a in enumerate(elements):
        for j, b in enumerate(elements):
            order[(i, j)] = "proved" if i == j else derive(theory, Sequent(a, b, obj.context), budget).status
    return SubobjectLattice(theory, obj, elements, order, budget)


@dataclass
class ImageCheck:
    image: SynObject
    inside: Outcome            # exists x theta |- target formula
    factors: Outcome           # theta |- image(y)
    least: list                # (formula, outcome) for pooled subobjects the arrow factors through


def image(theory: Theory, m: SynMorphism, pool: Iterable[Formula] = (), budget: Budget | None = None,
          context: Sequence[Var] | None = None) -> ImageCheck:
    """``{y . exists x theta}`` with its checks against pooled subobjects of the target."""
    ys = m.target.target_vars()
    body = exists(m.source.context, m.theta)
    img = SynObject.of(ys, body)
    inside = derive(theory, Sequent(body, m.target.as_target(), ys), budget)
    factors = derive(theory, Sequent(m.theta, body, m.context), budget)
    least = []
    for chi in _to_object_vars(m.target, pool, context):
        chi_y = substitute(chi, dict(zip(m.target.context, ys)))
        if derive(theory, Sequent(m.theta, chi_y, m.context), budget).status == "proved":
            least.append((chi, derive(theory, Sequent(body, chi_y, ys), budget)))
    return ImageCheck(img, inside, factors, least)


# ------------------------------------------------------------ covers


@dataclass
class CoverHypothesisEntry:
    obj: SynObject
    report: object            # codes.CoverReport
    scan_ok: bool
    model_failures: int

    @property
    def status(self) -> str:
        if not self.scan_ok or self.model_failures:
            return "refuted"
        return self.report.status


@dataclass
class CoverHypothesisReport:
    entries: list

    @property
    def status(self) -> str:
        statuses = [e.status for e in self.entries]
        if "refuted" in statuses:
            return "refuted"
        return "proved" if all(s == "proved" for s in statuses) else "unknown"

    def to_json(self) -> dict:
        return {"status": self.status, "objects": [
            {"object": str(e.obj), "status": e.status, "morphisms": len(e.report.morphisms),
             "scan": e.scan_ok, "model_failures": e.model_failures} for e in self.entries]}


def check_cover_hypothesis(base: Theory, extended: Theory, chain: MoritaChain, objects: Iterable[SynObject],
                           budget: Budget | None = None, model_bound: int = 2) -> CoverHypothesisReport:
    """Cover every object over the extended signature by objects over the base.

    Recoding runs against the chain's last step; every cover domain must
    be written in the previous stage's signature.
    """
    recoder = Recoder.for_chain(chain)
    prev_sig = chain.stages()[-2].signature
    models = _small_models(extended, model_bound) if model_bound else ()
    entries = []
    for obj in objects:
        rep = cover_family(obj.context, obj.formula, extended, recoder, budget)
        scan = all(base_only(m.source_formula, prev_sig) for m in rep.morphisms)
        failures = sum(1 for _s, _o in rep.cover_checks for m in models if violation(m, _s) is not None)
        entries.append(CoverHypothesisEntry(obj, rep, scan, failures))
    return CoverHypothesisReport(entries)


# ---------------------------------------------------------------- fragments


@dataclass
class FragmentObject:
    obj: SynObject
    sort: str                  # the sort naming this object
    ambient: str               # product, base or unit sort of the context
    inclusion: str | None      # subsort map into the ambient sort, None when the formula is true


@dataclass
class InternalAxiom:
    sequent: Sequent
    certificate: list          # (Sequent over the base theory, Outcome)

    @property
    def status(self) -> str:
        statuses = [o.status for _s, o in self.certificate]
        if "refuted" in statuses:
            return "refuted"
        return "proved" if all(s == "proved" for s in statuses) else "unknown"


@dataclass
class SynFragment:
    theory: Theory
    objects: list               # FragmentObject
    morphisms: list             # SynMorphism with symbols
    products: dict              # shape -> (sort, projection names)
    unit: str
    empty: str
    witness_sorts: list         # sorts that get bang/zero maps
    roles: dict                 # (role, key) -> morphism symbol
    triangles: list             # (h, g, f) symbols with h = g . f
    dropped_unknown: int = 0

    def lookup(self, obj: SynObject) -> FragmentObject:
        for fo in self.objects:
            if fo.obj == obj:
                return fo
        raise KeyError(str(obj))

    def by_symbol(self, symbol: str) -> SynMorphism:
        for m in self.morphisms:
            if m.symbol == symbol:
                return m
        raise KeyError(symbol)

    def code(self, ambient: str, term, xs: Sequence[Var]) -> list[Formula]:
        """Conjuncts saying the ``ambient``-sorted ``term`` codes the tuple ``xs``."""
        if not xs:
            return []
        if len(xs) == 1:
            return [Eq(term, xs[0])]
        _sort, projs = self.products[tuple(v.sort for v in xs)]
        return [Eq(App(p, (term,), v.sort), v) for p, v in zip(projs, xs)]

    def adjacency(self) -> str:
        """Plain-text adjacency listing of the fragment."""
        lines = []
        for fo in self.objects:
            outs = [f"{m.symbol}->{self.lookup(m.target).sort}" for m in self.morphisms if m.source == fo.obj]
            lines.append(f"{fo.sort} {fo.obj}: " + (" ".join(outs) if outs else "-"))
        return "\n".join(lines)


def _shape_name(shape: Sequence[str]) -> str:
    return "P_" + "_".join(shape)


def build_fragment(theory: Theory, objects: Iterable[SynObject],
                   morphisms: Iterable[SynMorphism | tuple] = (), hom_size: int = 0,
                   compose_round: bool = True, budget: Budget | None = None, model_bound: int = 2,
                   unit: str = "One", empty: str = "Zero") -> SynFragment:
    """Objects, certified morphisms and triangles shared by both constructions.

    Besides the pooled objects the fragment always holds every base sort,
    the product of every context shape that occurs, the graph arrow of
    every base function and the subobject of every base relation.
    """
    sig = theory.signature
    pooled = []
    for o in objects:
        if not is_coherent(o.formula):
            raise FragmentError(f"object {o} is not coherent")
        pooled.append(o)
    base_objs = [SynObject.of([Var("x", s)]) for s in sig.sorts]
    rel_objs = []
    shapes: dict[tuple, None] = {}
    for r, args in sig.relations.items():
        xs = [Var(f"x{i}", a) for i, a in enumerate(args, 1)]
        rel_objs.append(SynObject.of(xs, Rel(r, tuple(xs))))
    for fn, (args, _res) in sig.functions.items():
        if len(args) >= 2:
            shapes[tuple(args)] = None
    for o in pooled + rel_objs:
        if len(o.context) >= 2:
            shapes[o.sorts] = None
    for m in morphisms:
        src, tgt = (m.source, m.target) if isinstance(m, SynMorphism) else m[:2]
        for o in (src, tgt):
            if len(o.context) >= 2:
                shapes[o.sorts] = None
            if o not in pooled:
                pooled.append(o)
    names = set(sig.names())
    products = {}
    for shape in shapes:
        name = _shape_name(shape)
        if name in names:
            raise FragmentError(f"name collision: {name}")
        products[shape] = (name, tuple(f"pi{i}_{name}" for i in range(1, len(shape) + 1)))
        names.add(name)
    prod_objs = [SynObject.of([Var(f"x{i}", s) for i, s in enumerate(shape, 1)]) for shape in shapes]

    frag = SynFragment(theory, [], [], products, unit, empty, [], {}, [])

    def ambient_of(o: SynObject) -> str:
        if not o.context:
            return unit
        if len(o.context) == 1:
            return o.sorts[0]
        return products[o.sorts][0]

    seen = set()
    sub_index = 0
    for o in base_objs + prod_objs + pooled + rel_objs:
        if o in seen:
            continue
        seen.add(o)
        if o.is_top:
            frag.objects.append(FragmentObject(o, ambient_of(o), ambient_of(o), None))
        else:
            sub_index += 1
            amb = ambient_of(o)
            name = f"Sub{sub_index}_{amb}"
            frag.objects.append(FragmentObject(o, name, amb, f"i_{name}"))
    one, zero = SynObject.of([]), SynObject.of([], Bottom())
    frag.witness_sorts = list(sig.sorts) + [p for p, _ in products.values()] + \
        [fo.sort for fo in frag.objects if fo.inclusion and fo.ambient != unit]
    frag.objects.append(FragmentObject(one, unit, unit, None))
    frag.objects.append(FragmentObject(zero, empty, empty, None))
    pooled_set = set(pooled)

    counter = itertools.count(1)

    def add(m: SynMorphism, role_key=None) -> SynMorphism:
        if not m.certified:
            status = "refuted" if any(o.status == "refuted" for _s, o in m.certificate) else "unknown"
            raise FragmentError(f"functionality of {m} is {status}")
        for old in frag.morphisms:
            if old.source == m.source and old.target == m.target and \
                    equivalent(theory, m, old, budget, model_bound) == "proved":
                if role_key:
                    frag.roles[role_key] = old.symbol
                return old
        if not m.symbol:
            m.symbol = f"m{next(counter)}"
        frag.morphisms.append(m)
        if role_key:
            frag.roles[role_key] = m.symbol
        return m

    for fo in frag.objects:
        if fo.obj in (one, zero):
            continue
        add(identity(theory, fo.obj, budget), ("identity", fo.sort))
    for fo in frag.objects:
        if fo.obj in (one, zero):
            continue
        add(morphism(theory, fo.obj, one, fo.obj.formula, budget, role="terminal"), ("terminal", fo.sort))
    for shape, (pname, _projs) in products.items():
        src = SynObject.of([Var(f"x{i}", s) for i, s in enumerate(shape, 1)])
        for i, s in enumerate(shape, 1):
            tgt = SynObject.of([Var("x", s)])
            theta = Eq(src.context[i - 1], tgt.target_vars()[0])
            add(morphism(theory, src, tgt, theta, budget, role="projection"), ("projection", pname, i))
    for shape, (pname, _projs) in products.items():
        for k in range(2, len(shape)):
            if shape[:k] in products:
                src = SynObject.of([Var(f"x{i}", s) for i, s in enumerate(shape, 1)])
                tgt = SynObject.of([Var(f"x{i}", s) for i, s in enumerate(shape[:k], 1)])
                theta = conj(*(Eq(a, b) for a, b in zip(src.context, tgt.target_vars())))
                small = products[shape[:k]][0]
                m = morphism(theory, src, tgt, theta, budget, symbol=f"proj_{pname}_{small}", role="compound")
                add(m, ("compound", pname, small))
    for fo in frag.objects:
        if fo.inclusion is None:
            continue
        o = fo.obj
        tgt = SynObject.of(o.context) if o.context else one
        theta = conj(o.formula, *(Eq(a, b) for a, b in zip(o.context, tgt.target_vars())))
        add(morphism(theory, o, tgt, theta, budget, role="inclusion"), ("inclusion", fo.sort))
    for fn, (args, res) in sig.functions.items():
        xs = [Var(f"x{i}", a) for i, a in enumerate(args, 1)]
        src = SynObject.of(xs)
        tgt = SynObject.of([Var("x", res)])
        theta = Eq(App(fn, src.context, res), tgt.target_vars()[0])
        add(morphism(theory, src, tgt, theta, budget, role="function"), ("function", fn))
    for m in morphisms:
        if not isinstance(m, SynMorphism):
            m = morphism(theory, m[0], m[1], m[2], budget)
        elif not m.certificate:
            m = morphism(theory, m.source, m.target, m.theta, budget, m.symbol)
        m.role = m.role or "pooled"
        add(m)
    if hom_size:
        for a, b in itertools.product(pooled, repeat=2):
            found = hom_search(theory, a, b, hom_size, budget, model_bound)
            frag.dropped_unknown += found.dropped_unknown
            for m in found:
                add(m)
    if compose_round:
        base_arrows = [m for m in frag.morphisms if m.role != "identity"]
        for f, g in itertools.product(base_arrows, repeat=2):
            if f.target != g.source:
                continue
            c = compose(theory, f, g, budget)
            h = add(c)
            frag.triangles.append((h.symbol, g.symbol, f.symbol))
    del pooled_set
    return frag


# ---------------------------------------------------------------- T-hat


@dataclass
class HatFragment:
    fragment: SynFragment
    chain: MoritaChain
    stage1: int                # number of chain steps adding product sorts

    @property
    def theory(self) -> Theory:
        return self.chain.final

    def stage_theories(self) -> list[Theory]:
        stages = self.chain.stages()
        return [stages[0], stages[self.stage1], stages[-1]]


def _objects_for(pool) -> list[SynObject]:
    out = []
    for item in pool:
        if isinstance(item, SynObject):
            out.append(item)
        else:
            ctx, f = item
            out.append(SynObject.of(ctx, f))
    return out


def _as_fragment(theory: Theory, pool, budget: Budget | None, **kw) -> SynFragment:
    if isinstance(pool, SynFragment):
        return pool
    return build_fragment(theory, _objects_for(pool), budget=budget, **kw)


def tilde_formula(frag: SynFragment, fo: FragmentObject, var: Var) -> Formula:
    """``exists xs (code(var, xs) and phi(xs))``; for one variable just ``phi(var)``."""
    o = fo.obj
    if not o.context:
        return o.formula
    if len(o.context) == 1:
        return substitute(o.formula, {o.context[0]: var})
    return exists(o.context, conj(*frag.code(fo.ambient, var, o.context), o.formula))


def tau_formula(frag: SynFragment, m: SynMorphism, s: Var, t: Var) -> Formula:
    a, b = frag.lookup(m.source), frag.lookup(m.target)
    si = App(a.inclusion, (s,), a.ambient) if a.inclusion else s
    ti = App(b.inclusion, (t,), b.ambient) if b.inclusion else t
    xs, ys = m.source.context, m.target.target_vars()
    return exists(xs + ys, conj(*frag.code(a.ambient, si, xs), *frag.code(b.ambient, ti, ys), m.theta))


def gamma_formula(frag: SynFragment, big: tuple, small: tuple, t: Var, s: Var) -> Formula:
    _bn, bprojs = frag.products[big]
    _sn, sprojs = frag.products[small]
    return conj(*(Eq(App(sp, (s,), srt), App(bp, (t,), srt)) for sp, bp, srt in zip(sprojs, bprojs, small)))


def hat_specs(frag: SynFragment) -> tuple[list[ExtensionSpec], list[ExtensionSpec]]:
    stage1 = [ExtensionSpec.product(name, shape, projs) for shape, (name, projs) in frag.products.items()]
    stage2 = []
    late = []
    for fo in frag.objects:
        if fo.inclusion is None:
            continue
        s = Var("s", fo.ambient)
        spec = ExtensionSpec.subsort(fo.sort, fo.ambient, s, tilde_formula(frag, fo, s), fo.inclusion)
        (late if fo.ambient == frag.unit else stage2).append(spec)
    stage2.append(ExtensionSpec.unit(frag.unit, frag.witness_sorts[0],
                                     [f"bang_{x}" for x in frag.witness_sorts]))
    stage2.append(ExtensionSpec.empty(frag.empty, frag.witness_sorts[0],
                                      [f"zero_{x}" for x in frag.witness_sorts + [frag.unit]]))
    stage2 += late
    for m in frag.morphisms:
        a, b = frag.lookup(m.source), frag.lookup(m.target)
        s, t = Var("s", a.sort), Var("t", b.sort)
        if m.role == "compound":
            t2, s2 = Var("t", a.sort), Var("s", b.sort)
            stage2.append(ExtensionSpec.function(m.symbol, [t2], s2,
                                                 gamma_formula(frag, m.source.sorts, m.target.sorts, t2, s2)))
        else:
            stage2.append(ExtensionSpec.function(m.symbol, [s], t, tau_formula(frag, m, s, t)))
    return stage1, stage2


def build_hat_fragment(theory: Theory, pool, budget: Budget | None = None, checked: bool = True,
                       **fragment_options) -> HatFragment:
    """Product sorts first, then subsorts, unit and empty sorts and defined arrows.

    ``pool`` is a ``SynFragment`` or a list of objects given either as
    ``SynObject`` or as ``(context, formula)`` pairs.
    """
    frag = _as_fragment(theory, pool, budget, **fragment_options)
    stage1, stage2 = hat_specs(frag)
    chain = MoritaChain(theory)
    for spec in stage1 + stage2:
        chain = chain.extend(spec, budget, checked)
    final = chain.final
    problems = check_wellformed(final)
    if problems:
        raise FragmentError(f"hat fragment is ill-formed: {problems[0]}")
    return HatFragment(frag, chain, len(stage1))


# -------------------------------------------------------------- T-tilde


@dataclass
class TildeFragment:
    fragment: SynFragment
    internal: Theory
    certificates: list          # InternalAxiom per internal axiom
    chain: MoritaChain

    @property
    def theory(self) -> Theory:
        return self.chain.final


def _object_var(fo: FragmentObject, name: str) -> Var:
    return Var(name, fo.sort)


def internal_axioms(frag: SynFragment, budget: Budget | None = None, model_bound: int = 2) -> list[InternalAxiom]:
    """Sequents of the canonical language that the fragment certifies."""
    theory = frag.theory
    out: list[InternalAxiom] = []
    sort_of = {fo.obj: fo for fo in frag.objects}

    def ap(m: SynMorphism, arg) -> App:
        return App(m.symbol, (arg,), sort_of[m.target].sort)

    for m in frag.morphisms:
        a = sort_of[m.source]
        if m.role == "identity":
            v = _object_var(a, "a")
            cert = Sequent(m.theta, conj(*_nontrivial(m.source.formula),
                                         *(Eq(x, y) for x, y in zip(m.source.context, m.target.target_vars()))),
                           m.context)
            out.append(InternalAxiom(Sequent(TOP, Eq(ap(m, v), v), (v,), f"id_{m.symbol}"),
                                     [(cert, derive(theory, cert, budget))]))
    by_symbol = {m.symbol: m for m in frag.morphisms}
    for h, g, f in frag.triangles:
        mh, mg, mf = by_symbol[h], by_symbol[g], by_symbol[f]
        v = _object_var(sort_of[mf.source], "a")
        theta = compose_theta(mf, mg)
        certs = [Sequent(mh.theta, theta, mh.context), Sequent(theta, mh.theta, mh.context)]
        out.append(InternalAxiom(Sequent(TOP, Eq(ap(mh, v), ap(mg, ap(mf, v))), (v,), f"tri_{h}_{g}_{f}"),
                                 [(c, derive(theory, c, budget)) for c in certs]))
    for m in frag.morphisms:
        if m.role == "identity" or not m.source.context:
            continue
        avoid = {v.name for v in m.context}
        xs2 = _primed(m.source.context, avoid)
        theta2 = substitute(m.theta, dict(zip(m.source.context, xs2)))
        cert = Sequent(And(m.theta, theta2), conj(*(Eq(a, b) for a, b in zip(m.source.context, xs2))),
                       m.context + xs2)
        outcome = _proved(theory, cert, budget, model_bound)
        if outcome is None or outcome.status != "proved":
            continue
        a = sort_of[m.source]
        u, w = _object_var(a, "a"), _object_var(a, "b")
        seq = Sequent(Eq(ap(m, u), ap(m, w)), Eq(u, w), (u, w), f"mono_{m.symbol}")
        out.append(InternalAxiom(seq, [(cert, outcome)]))
    x, x2 = Var("x", frag.unit), Var("x'", frag.unit)
    out.append(InternalAxiom(Sequent(TOP, Exists(x, Eq(x, x)), (), "terminal1"), []))
    out.append(InternalAxiom(Sequent(TOP, Eq(x, x2), (x, x2), "terminal2"), []))
    z = Var("x", frag.empty)
    out.append(InternalAxiom(Sequent(Eq(z, z), Bottom(), (z,), "initial"), []))
    for shape, (pname, _projs) in frag.products.items():
        projs = [by_symbol[frag.roles[("projection", pname, i)]] for i in range(1, len(shape) + 1)]
        comps = [Var(f"a{i}", s) for i, s in enumerate(shape, 1)]
        p, q = Var("p", pname), Var("q", pname)
        tuple_seq = Sequent(TOP, Exists(p, conj(*(Eq(ap(m, p), c) for m, c in zip(projs, comps)))),
                            tuple(comps), f"tuple_{pname}")
        uniq_seq = Sequent(conj(*(Eq(ap(m, p), ap(m, q)) for m in projs)), Eq(p, q), (p, q), f"unique_{pname}")
        xs = projs[0].source.context
        xs2 = _primed(xs, {v.name for v in xs} | {c.name for c in comps})
        cert_t = Sequent(TOP, exists(xs, conj(*(Eq(a, c) for a, c in zip(xs, comps)))), tuple(comps))
        cert_u = Sequent(conj(*(Eq(a, b) for a, b in zip(xs, xs2))), conj(*(Eq(a, b) for a, b in zip(xs, xs2))),
                         tuple(xs) + xs2)
        out.append(InternalAxiom(tuple_seq, [(cert_t, derive(theory, cert_t, budget))]))
        out.append(InternalAxiom(uniq_seq, [(cert_u, derive(theory, cert_u, budget))]))
    out += _cover_axioms(frag, budget, model_bound)
    return out


def _cover_axioms(frag: SynFragment, budget: Budget | None, model_bound: int) -> list[InternalAxiom]:
    """Images (single covering arrows) and sups (pairs of monos jointly covering)."""
    theory = frag.theory
    sort_of = {fo.obj: fo for fo in frag.objects}
    out = []
    arrows = [m for m in frag.morphisms if m.role != "identity" and m.source.context]

    def covering(ms: Sequence[SynMorphism]) -> Sequent:
        tgt = ms[0].target
        return Sequent(tgt.as_target(), disj(*(exists(m.source.context, m.theta) for m in ms)), tgt.target_vars())

    def emit(ms: Sequence[SynMorphism], outcome: Outcome, name: str) -> None:
        b = _object_var(sort_of[ms[0].target], "b")
        parts = []
        for k, m in enumerate(ms, 1):
            a = _object_var(sort_of[m.source], f"a{k}")
            parts.append(Exists(a, Eq(App(m.symbol, (a,), b.sort), b)))
        out.append(InternalAxiom(Sequent(TOP, disj(*parts), (b,), name), [(covering(ms), outcome)]))

    single = set()
    for m in arrows:
        o = _proved(theory, covering([m]), budget, model_bound)
        if o is not None and o.status == "proved":
            single.add(m.symbol)
            emit([m], o, f"cover_{m.symbol}")
    monos = [m for m in arrows if m.role == "inclusion" and m.symbol not in single]
    for m1, m2 in itertools.combinations(monos, 2):
        if m1.target != m2.target or m1.source == m2.source:
            continue
        o = _proved(theory, covering([m1, m2]), budget, model_bound)
        if o is not None and o.status == "proved":
            emit([m1, m2], o, f"cover_{m1.symbol}_{m2.symbol}")
    return out


def internal_theory(frag: SynFragment, axioms: Sequence[InternalAxiom], name: str | None = None) -> Theory:
    sig = Signature.build([fo.sort for fo in frag.objects])
    sort_of = {fo.obj: fo.sort for fo in frag.objects}
    for m in frag.morphisms:
        sig = sig.with_function(m.symbol, (sort_of[m.source],), sort_of[m.target])
    return Theory(name or f"{frag.theory.name}_C", sig, tuple(a.sequent for a in axioms), Fragment.COHERENT)


def tilde_specs(frag: SynFragment) -> list[ExtensionSpec]:
    """The defining sequents for projections, inclusions, bang and zero maps, base functions and relations."""
    sig = frag.theory.signature
    sort_of = {fo.obj: fo for fo in frag.objects}
    specs = []
    for shape, (pname, projs) in frag.products.items():
        for i, (pi, srt) in enumerate(zip(projs, shape), 1):
            m = frag.roles[("projection", pname, i)]
            s, x = Var("s", pname), Var("x", srt)
            specs.append(ExtensionSpec.function(pi, [s], x, Eq(App(m, (s,), srt), x)))
    for fo in frag.objects:
        if fo.inclusion is None:
            continue
        m = frag.roles[("inclusion", fo.sort)]
        s, x = Var("s", fo.sort), Var("x", fo.ambient)
        specs.append(ExtensionSpec.function(fo.inclusion, [s], x, Eq(App(m, (s,), fo.ambient), x)))
    for srt in frag.witness_sorts:
        s, x = Var("s", srt), Var("x", frag.unit)
        specs.append(ExtensionSpec.function(f"bang_{srt}", [s], x, And(Eq(s, s), Eq(x, x))))
    for srt in frag.witness_sorts + [frag.unit]:
        s, x = Var("s", frag.empty), Var("x", srt)
        specs.append(ExtensionSpec.function(f"zero_{srt}", [s], x, Bottom()))
    for fn, (args, res) in sig.functions.items():
        m = frag.roles[("function", fn)]
        xs = [Var(f"x{i}", a) for i, a in enumerate(args, 1)]
        src = sort_of[SynObject.of(xs)]
        s, t, y = Var("s", src.sort), Var("t", res), Var("y", res)
        body = exists([s, t], conj(*frag.code(src.ambient, s, xs), Eq(t, y), Eq(App(m, (s,), res), t)))
        specs.append(ExtensionSpec.function(fn, xs, y, body))
    for r, args in sig.relations.items():
        xs = [Var(f"x{i}", a) for i, a in enumerate(args, 1)]
        fo = sort_of[SynObject.of(xs, Rel(r, tuple(xs)))]
        rv, s = Var("r", fo.sort), Var("s", fo.ambient)
        body = exists([rv, s], conj(*frag.code(fo.ambient, s, xs), Eq(App(fo.inclusion, (rv,), fo.ambient), s)))
        specs.append(ExtensionSpec.relation(r, xs, body))
    return specs


def build_tilde_fragment(theory: Theory, pool, budget: Budget | None = None, checked: bool = True,
                         model_bound: int = 2, **fragment_options) -> TildeFragment:
    """Internal theory of the fragment, then the base symbols defined back over it."""
    frag = _as_fragment(theory, pool, budget, model_bound=model_bound, **fragment_options)
    axioms = internal_axioms(frag, budget, model_bound)
    bad = [a.sequent.name for a in axioms if a.status == "refuted"]
    if bad:
        raise FragmentError(f"internal axioms refuted over the base theory: {bad}")
    internal = internal_theory(frag, [a for a in axioms if a.status == "proved"])
    chain = MoritaChain(internal)
    for spec in tilde_specs(frag):
        chain = chain.extend(spec, budget, checked)
    problems = check_wellformed(chain.final)
    if problems:
        raise FragmentError(f"tilde fragment is ill-formed: {problems[0]}")
    return TildeFragment(frag, internal, axioms, chain)


# ------------------------------------------------------------- comparison


@dataclass
class EquivalenceSample:
    hat_in_tilde: list          # (Sequent, Outcome)
    tilde_in_hat: list

    def counts(self) -> dict:
        def tally(items):
            out = {"proved": 0, "refuted": 0, "unknown": 0}
            for _s, o in items:
                out[o.status] += 1
            return out
        return {"hat_in_tilde": tally(self.hat_in_tilde), "tilde_in_hat": tally(self.tilde_in_hat)}

    def mutually_proved(self) -> int:
        return min(self.counts()["hat_in_tilde"]["proved"], self.counts()["tilde_in_hat"]["proved"])

    def to_json(self) -> dict:
        return {"counts": self.counts(),
                "hat_in_tilde": [[s.name, o.status] for s, o in self.hat_in_tilde],
                "tilde_in_hat": [[s.name, o.status] for s, o in self.tilde_in_hat]}


def same_symbols(a: Theory, b: Theory) -> bool:
    sa, sb = a.signature, b.signature
    return set(sa.sorts) == set(sb.sorts) and dict(sa.functions) == dict(sb.functions) \
        and dict(sa.relations) == dict(sb.relations)


def compare_fragments(hat: HatFragment, tilde: TildeFragment, sample: int | None = 10, seed: int | None = None,
                      budget: Budget | None = None) -> EquivalenceSample:
    """Derive sampled axioms of each fragment theory in the other.

    ``sample=None`` uses every axiom.  Without a seed the sample is evenly
    spaced through each axiom list; with one it is drawn at random.
    """
    left, right = hat.theory, tilde.theory
    if not same_symbols(left, right):
        raise FragmentError("hat and tilde fragments are not over the same symbols")
    rng = random.Random(seed) if seed is not None else None

    def pick(axioms):
        axioms = list(axioms)
        if sample is None or sample >= len(axioms):
            return axioms
        if rng is None:                       # evenly spaced, no randomness
            step = len(axioms) / sample
            return [axioms[int(i * step)] for i in range(sample)]
        return rng.sample(axioms, sample)

    return EquivalenceSample([(ax, derive(right, ax, budget)) for ax in pick(left.axioms)],
                             [(ax, derive(left, ax, budget)) for ax in pick(right.axioms)])
