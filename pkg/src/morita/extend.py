"""Morita extensions: new sorts and defined symbols with their schemas."""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .chase import derive
from .models import FiniteModel, compile_formula, iter_models, violation
from .outcome import Budget, Outcome
from .syntax import (
    TOP, BOTTOM, And, App, Bottom, Eq, Exists, Formula, Fragment, Implies, Not, Or, Rel,
    Sequent, Signature, SortDescriptor, Term, Theory, Top, Var, biconditional, check_wellformed,
    conj, disj, free_vars, min_fragment, substitute,
)


class ExtensionKind(enum.Enum):
    PRODUCT = "product"
    COPRODUCT = "coproduct"
    SUBSORT = "subsort"
    QUOTIENT = "quotient"
    UNIT = "unit"
    EMPTY = "empty"
    FUNCTION = "function"
    RELATION = "relation"


SORT_KINDS = {ExtensionKind.PRODUCT, ExtensionKind.COPRODUCT, ExtensionKind.SUBSORT,
              ExtensionKind.QUOTIENT, ExtensionKind.UNIT, ExtensionKind.EMPTY}


@dataclass(frozen=True)
class ExtensionSpec:
    """One definitional step.

    ``components`` are the factor sorts (product, coproduct), the ambient
    sort (subsort, quotient) or the witness sort (unit, empty).  ``maps``
    are the structural function names; for unit and empty sorts they name
    the maps to or from every base sort and may be left empty to get the
    default ``bang_<S>`` / ``zero_<S>`` names.  ``params`` are the free
    variables of ``formula``; for a defined function the last parameter is
    the result.
    """

    kind: ExtensionKind
    name: str
    components: tuple = ()
    maps: tuple = ()
    params: tuple = ()
    formula: Formula | None = None

    @classmethod
    def product(cls, name: str, components: Iterable[str], maps: Iterable[str] = ()) -> "ExtensionSpec":
        components = tuple(components)
        if not components:
            raise ValueError("a product needs at least one component")
        maps = tuple(maps) or tuple(f"pi{i}_{name}" for i in range(1, len(components) + 1))
        if len(maps) != len(components):
            raise ValueError("one projection per component is required")
        return cls(ExtensionKind.PRODUCT, name, components, maps)

    @classmethod
    def coproduct(cls, name: str, components: Iterable[str], maps: Iterable[str] = ()) -> "ExtensionSpec":
        components = tuple(components)
        if not components:
            raise ValueError("a coproduct needs at least one component")
        maps = tuple(maps) or tuple(f"rho{i}_{name}" for i in range(1, len(components) + 1))
        if len(maps) != len(components):
            raise ValueError("one injection per component is required")
        return cls(ExtensionKind.COPRODUCT, name, components, maps)

    @classmethod
    def subsort(cls, name: str, ambient: str, var: Var, formula: Formula, injection: str = "") -> "ExtensionSpec":
        if var.sort != ambient:
            raise ValueError(f"defining variable {var.name} must have sort {ambient}")
        extra = [v.name for v in free_vars(formula) if v != var]
        if extra:
            raise ValueError(f"defining formula has extra free variables {extra}")
        return cls(ExtensionKind.SUBSORT, name, (ambient,), (injection or f"i_{name}",), (var,), formula)

    @classmethod
    def quotient(cls, name: str, ambient: str, params: Sequence[Var], formula: Formula,
                 surjection: str = "") -> "ExtensionSpec":
        params = tuple(params)
        if len(params) != 2 or any(v.sort != ambient for v in params) or params[0].name == params[1].name:
            raise ValueError(f"a quotient needs two distinct parameters of sort {ambient}")
        extra = [v.name for v in free_vars(formula) if v not in params]
        if extra:
            raise ValueError(f"defining formula has extra free variables {extra}")
        return cls(ExtensionKind.QUOTIENT, name, (ambient,), (surjection or f"eps_{name}",), params, formula)

    @classmethod
    def unit(cls, name: str, witness: str, maps: Iterable[str] = ()) -> "ExtensionSpec":
        return cls(ExtensionKind.UNIT, name, (witness,), tuple(maps))

    @classmethod
    def empty(cls, name: str, witness: str, maps: Iterable[str] = ()) -> "ExtensionSpec":
        return cls(ExtensionKind.EMPTY, name, (witness,), tuple(maps))

    @classmethod
    def function(cls, name: str, args: Sequence[Var], result: Var, formula: Formula) -> "ExtensionSpec":
        params = tuple(args) + (result,)
        _check_params(params, formula)
        return cls(ExtensionKind.FUNCTION, name, (), (), params, formula)

    @classmethod
    def relation(cls, name: str, params: Sequence[Var], formula: Formula) -> "ExtensionSpec":
        params = tuple(params)
        _check_params(params, formula)
        return cls(ExtensionKind.RELATION, name, (), (), params, formula)

    @property
    def is_sort(self) -> bool:
        return self.kind in SORT_KINDS

    def __str__(self) -> str:
        from .dsl import print_extension
        return print_extension("_", self).split(" with ", 1)[1]


def _check_params(params: tuple, formula: Formula) -> None:
    names = [v.name for v in params]
    if len(set(names)) != len(names):
        raise ValueError("parameters must be distinct")
    extra = [v.name for v in free_vars(formula) if v not in params]
    if extra:
        raise ValueError(f"defining formula has extra free variables {extra}")


# ---------------------------------------------------------- signature side


def witness_maps(spec: ExtensionSpec, sig: Signature) -> list[tuple[str, str]]:
    """(map name, base sort) pairs for the maps of a unit or empty sort."""
    sorts = list(sig.sorts)
    prefix = "bang" if spec.kind is ExtensionKind.UNIT else "zero"
    names = list(spec.maps) or [f"{prefix}_{s}" for s in sorts]
    if len(names) != len(sorts):
        raise ValueError(f"{spec.kind.value} sort {spec.name} needs one map per base sort ({len(sorts)})")
    return list(zip(names, sorts))


def new_symbols(spec: ExtensionSpec, sig: Signature) -> list[str]:
    if spec.kind in (ExtensionKind.UNIT, ExtensionKind.EMPTY):
        return [spec.name] + [m for m, _ in witness_maps(spec, sig)]
    return [spec.name, *spec.maps]


def extend_signature(sig: Signature, spec: ExtensionSpec) -> Signature:
    clash = [n for n in new_symbols(spec, sig) if n in sig.names()]
    if clash:
        raise ValueError(f"name collision: {', '.join(clash)} already declared")
    for c in spec.components:
        if c not in sig.sorts:
            raise ValueError(f"unknown sort {c}")
    k = spec.kind
    if k is ExtensionKind.PRODUCT:
        return sig.with_sort(SortDescriptor.product(spec.name, spec.components, spec.maps))
    if k is ExtensionKind.COPRODUCT:
        return sig.with_sort(SortDescriptor.coproduct(spec.name, spec.components, spec.maps))
    if k is ExtensionKind.SUBSORT:
        return sig.with_sort(SortDescriptor.subsort(spec.name, spec.components[0], spec.params[0],
                                                    spec.formula, spec.maps[0]))
    if k is ExtensionKind.QUOTIENT:
        return sig.with_sort(SortDescriptor.quotient(spec.name, spec.components[0], spec.params,
                                                     spec.formula, spec.maps[0]))
    if k is ExtensionKind.UNIT:
        maps = witness_maps(spec, sig)
        out = sig.with_sort(SortDescriptor.unit(spec.name, spec.components[0]))
        for m, s in maps:
            out = out.with_function(m, (s,), spec.name)
        return out
    if k is ExtensionKind.EMPTY:
        maps = witness_maps(spec, sig)
        out = sig.with_sort(SortDescriptor.empty(spec.name, spec.components[0]))
        for m, s in maps:
            out = out.with_function(m, (spec.name,), s)
        return out
    if k is ExtensionKind.FUNCTION:
        return sig.with_function(spec.name, tuple(v.sort for v in spec.params[:-1]), spec.params[-1].sort)
    return sig.with_relation(spec.name, tuple(v.sort for v in spec.params))


# ----------------------------------------------------------------- schemas


def generate_schema(spec: ExtensionSpec, base: Theory | Signature) -> list[Sequent]:
    """The defining sequents of ``spec``, named ``<kind><n>_<name>``."""
    sig = base.signature if isinstance(base, Theory) else base
    new_sig = extend_signature(sig, spec)
    k, name = spec.kind, spec.name
    if k is ExtensionKind.PRODUCT:
        xs = [Var(f"x{i}", s) for i, s in enumerate(spec.components, 1)]
        p, q = Var("p", name), Var("q", name)

        def coded(v: Var) -> Formula:
            return conj(*(Eq(App(pi, (v,), s), x) for pi, s, x in zip(spec.maps, spec.components, xs)))

        return [
            Sequent(TOP, Exists(p, coded(p)), tuple(xs), f"prod1_{name}"),
            Sequent(And(coded(p), coded(q)), Eq(p, q), (*xs, p, q), f"prod2_{name}"),
        ]
    if k is ExtensionKind.COPRODUCT:
        x = Var("x", name)
        xs = [Var(f"x{i}", s) for i, s in enumerate(spec.components, 1)]
        inj = [App(r, (xi,), name) for r, xi in zip(spec.maps, xs)]
        out = [Sequent(TOP, disj(*(Exists(xi, Eq(t, x)) for xi, t in zip(xs, inj))), (x,), f"cop1_{name}")]
        for i, (r, xi) in enumerate(zip(spec.maps, xs), 1):
            xi2 = Var(f"x{i}'", xi.sort)
            out.append(Sequent(And(Eq(App(r, (xi,), name), x), Eq(App(r, (xi2,), name), x)), Eq(xi, xi2),
                               (xi, xi2, x), f"cop2_{i}_{name}"))
        for i, j in itertools.combinations(range(len(xs)), 2):
            out.append(Sequent(And(Eq(inj[i], x), Eq(inj[j], x)), BOTTOM, (xs[i], xs[j], x),
                               f"cop3_{i + 1}_{j + 1}_{name}"))
        return out
    if k is ExtensionKind.SUBSORT:
        amb, inc = spec.components[0], spec.maps[0]
        x, y = Var("x", amb), Var("y", name)
        phi = substitute(spec.formula, {spec.params[0]: x})
        sx, sy = Var("x", name), Var("y", name)
        return [
            *biconditional(phi, Exists(y, Eq(App(inc, (y,), amb), x)), (x,), f"sub1_{name}"),
            Sequent(Eq(App(inc, (sx,), amb), App(inc, (sy,), amb)), Eq(sx, sy), (sx, sy), f"sub2_{name}"),
        ]
    if k is ExtensionKind.QUOTIENT:
        amb, eps = spec.components[0], spec.maps[0]
        x, y = Var("x", amb), Var("y", amb)
        phi = substitute(spec.formula, {spec.params[0]: x, spec.params[1]: y})
        qx = Var("x", name)
        return [
            *biconditional(Eq(App(eps, (x,), name), App(eps, (y,), name)), phi, (x, y), f"quot1_{name}"),
            Sequent(TOP, Exists(y, Eq(App(eps, (y,), name), qx)), (qx,), f"quot2_{name}"),
        ]
    if k is ExtensionKind.UNIT:
        x, x2 = Var("x", name), Var("x'", name)
        out = [Sequent(TOP, Exists(x, Eq(x, x)), (), f"unit1_{name}"),
               Sequent(TOP, Eq(x, x2), (x, x2), f"unit2_{name}")]
        for m, s in witness_maps(spec, sig):
            a, b = Var("x", s), Var("y", name)
            out += biconditional(Eq(App(m, (a,), name), b), And(Eq(a, a), Eq(b, b)), (a, b), f"def_{m}")
        return out
    if k is ExtensionKind.EMPTY:
        x = Var("x", name)
        out = [Sequent(Eq(x, x), BOTTOM, (x,), f"empty1_{name}")]
        for m, s in witness_maps(spec, sig):
            a, b = Var("x", name), Var("y", s)
            out += biconditional(Eq(App(m, (a,), s), b), BOTTOM, (a, b), f"def_{m}")
        return out
    if k is ExtensionKind.FUNCTION:
        args, res = spec.params[:-1], spec.params[-1]
        _, result_sort = new_sig.functions[name]
        return biconditional(Eq(App(name, tuple(args), result_sort), res), spec.formula, spec.params, f"def_{name}")
    return biconditional(Rel(name, tuple(spec.params)), spec.formula, spec.params, f"def_{name}")


# ------------------------------------------------------------ admissibility


def inhabited(sort: str) -> Sequent:
    return Sequent(TOP, Exists(Var("x", sort), TOP), (), f"inhabited_{sort}")


def side_conditions(spec: ExtensionSpec, base: Theory) -> list[Sequent]:
    """The sequents the base theory must prove before ``spec`` applies."""
    k = spec.kind
    if k in (ExtensionKind.PRODUCT, ExtensionKind.COPRODUCT, ExtensionKind.SUBSORT,
             ExtensionKind.QUOTIENT, ExtensionKind.UNIT):
        out = [inhabited(s) for s in dict.fromkeys(spec.components)]
    else:
        out = []
    if k is ExtensionKind.QUOTIENT:
        amb = spec.components[0]
        x, y, z = Var("x", amb), Var("y", amb), Var("z", amb)
        phi = lambda a, b: substitute(spec.formula, {spec.params[0]: a, spec.params[1]: b})
        out += [Sequent(TOP, phi(x, x), (x,), "reflexive"),
                Sequent(phi(x, y), phi(y, x), (x, y), "symmetric"),
                Sequent(And(phi(x, y), phi(y, z)), phi(x, z), (x, y, z), "transitive")]
    if k is ExtensionKind.FUNCTION:
        args, res = spec.params[:-1], spec.params[-1]
        avoid = {v.name for v in spec.params}
        res2 = Var(_fresh(res.name, avoid), res.sort)
        out += [Sequent(TOP, Exists(res, spec.formula), tuple(args), "exists"),
                Sequent(And(spec.formula, substitute(spec.formula, {res: res2})), Eq(res, res2),
                        (*args, res, res2), "unique")]
    return out


def _fresh(base: str, avoid: set[str]) -> str:
    name = base + "'"
    while name in avoid:
        name += "'"
    return name


@dataclass
class Admissibility:
    conditions: list[tuple[Sequent, Outcome]]

    @property
    def status(self) -> str:
        if all(o.status == "proved" for _s, o in self.conditions):
            return "admissible"
        if any(o.status == "refuted" for _s, o in self.conditions):
            return "refuted"
        return "unknown"

    @property
    def admissible(self) -> bool:
        return self.status == "admissible"

    def to_json(self) -> dict:
        from .dsl import print_sequent
        return {"status": self.status,
                "conditions": [{"sequent": print_sequent(s), "name": s.name, **o.to_json()}
                               for s, o in self.conditions]}


def check_admissibility(spec: ExtensionSpec, base: Theory, budget: Budget | None = None) -> Admissibility:
    return Admissibility([(s, derive(base, s, budget)) for s in side_conditions(spec, base)])


class ExtensionError(ValueError):
    pass


def check_fragment(spec: ExtensionSpec, base: Theory) -> None:
    frag = base.fragment
    if spec.kind in (ExtensionKind.COPRODUCT, ExtensionKind.EMPTY) and frag < Fragment.COHERENT:
        raise ExtensionError(f"fragment violation: {spec.kind.value} sorts need a coherent theory, "
                             f"{base.name} is {frag.keyword}")
    if spec.kind is ExtensionKind.QUOTIENT and frag < Fragment.REGULAR:
        raise ExtensionError(f"fragment violation: quotient sorts need a regular theory, "
                             f"{base.name} is {frag.keyword}")
    if spec.formula is not None and min_fragment(spec.formula) > frag:
        raise ExtensionError(f"fragment violation: defining formula of {spec.name} is outside "
                             f"the {frag.keyword} fragment")


def apply_extension_unchecked(base: Theory, spec: ExtensionSpec) -> Theory:
    """Add the symbols and schemas without consulting the prover."""
    check_fragment(spec, base)
    sig = extend_signature(base.signature, spec)
    axioms = generate_schema(spec, base.signature)
    out = Theory(base.name, sig, base.axioms + tuple(axioms), base.fragment)
    diags = check_wellformed(out)
    if diags:
        raise ExtensionError("; ".join(str(d) for d in diags))
    return out


def apply_extension(base: Theory, spec: ExtensionSpec, budget: Budget | None = None) -> Theory:
    check_fragment(spec, base)
    report = check_admissibility(spec, base, budget)
    if not report.admissible:
        failed = [s.name for s, o in report.conditions if o.status != "proved"]
        raise ExtensionError(f"admissibility {report.status} for {spec.name}: {', '.join(failed)}")
    return apply_extension_unchecked(base, spec)


# ------------------------------------------------------------------ chains


@dataclass
class MoritaChain:
    """A base theory followed by extension steps and their results."""

    base: Theory
    steps: list[tuple[ExtensionSpec, Theory]] = field(default_factory=list)

    @property
    def final(self) -> Theory:
        return self.steps[-1][1] if self.steps else self.base

    def stages(self) -> list[Theory]:
        return [self.base] + [t for _s, t in self.steps]

    def extend(self, spec: ExtensionSpec, budget: Budget | None = None, checked: bool = True) -> "MoritaChain":
        apply = apply_extension if checked else (lambda t, s, b=None: apply_extension_unchecked(t, s))
        return MoritaChain(self.base, self.steps + [(spec, apply(self.final, spec, budget))])

    def specs(self) -> list[ExtensionSpec]:
        return [s for s, _t in self.steps]

    def validate(self) -> list[str]:
        """Structural problems: stages must grow by exactly their schemas."""
        problems = []
        prev = self.base
        for i, (spec, thy) in enumerate(self.steps, 1):
            try:
                expect = apply_extension_unchecked(prev, spec)
            except ValueError as e:
                problems.append(f"step {i}: {e}")
                prev = thy
                continue
            if expect.signature.order != thy.signature.order or expect.axioms != thy.axioms:
                problems.append(f"step {i}: stage does not match base plus generated schemas")
            prev = thy
        return problems

    def to_json(self) -> dict:
        from .dsl import print_extension, theory_to_json
        return {"format": "thy.json", "base": theory_to_json(self.base),
                "steps": [{"extension": print_extension(self.base.name, s), "theory": theory_to_json(t)}
                          for s, t in self.steps]}


def build_chain(base: Theory, specs: Iterable[ExtensionSpec], budget: Budget | None = None,
                checked: bool = True) -> MoritaChain:
    chain = MoritaChain(base)
    for spec in specs:
        chain = chain.extend(spec, budget, checked)
    return chain


# ------------------------------------------------------- canonical expansion


def expand_model(model: FiniteModel, spec: ExtensionSpec, new_sig: Signature) -> FiniteModel | None:
    """Interpret the new symbols canonically; None if a defined function fails."""
    carriers = dict(model.carriers)
    funs = {f: dict(t) for f, t in model.functions.items()}
    rels = dict(model.relations)
    k, name = spec.kind, spec.name
    if k is ExtensionKind.PRODUCT:
        tuples = list(itertools.product(*(model.carriers[c] for c in spec.components)))
        carriers[name] = tuple(range(len(tuples)))
        for j, pi in enumerate(spec.maps):
            funs[pi] = {(i,): t[j] for i, t in enumerate(tuples)}
    elif k is ExtensionKind.COPRODUCT:
        tags = [(j, a) for j, c in enumerate(spec.components) for a in model.carriers[c]]
        carriers[name] = tuple(range(len(tags)))
        for j, rho in enumerate(spec.maps):
            funs[rho] = {(a,): i for i, (jj, a) in enumerate(tags) if jj == j}
    elif k is ExtensionKind.SUBSORT:
        test = compile_formula(spec.formula, model)
        v = spec.params[0].name
        members = [a for a in model.carriers[spec.components[0]] if test({v: a})]
        carriers[name] = tuple(range(len(members)))
        funs[spec.maps[0]] = {(i,): a for i, a in enumerate(members)}
    elif k is ExtensionKind.QUOTIENT:
        test = compile_formula(spec.formula, model)
        u, w = spec.params[0].name, spec.params[1].name
        classes: list[int] = []
        eps = {}
        for a in model.carriers[spec.components[0]]:
            for ci, rep in enumerate(classes):
                if test({u: rep, w: a}):
                    eps[(a,)] = ci
                    break
            else:
                eps[(a,)] = len(classes)
                classes.append(a)
        carriers[name] = tuple(range(len(classes)))
        funs[spec.maps[0]] = eps
    elif k is ExtensionKind.UNIT:
        carriers[name] = (0,)
        for m, s in witness_maps(spec, model.signature):
            funs[m] = {(a,): 0 for a in model.carriers[s]}
    elif k is ExtensionKind.EMPTY:
        carriers[name] = ()
        for m, _s in witness_maps(spec, model.signature):
            funs[m] = {}
    elif k is ExtensionKind.FUNCTION:
        test = compile_formula(spec.formula, model)
        args, res = spec.params[:-1], spec.params[-1]
        table = {}
        for combo in itertools.product(*(model.carriers[v.sort] for v in args)):
            env = {v.name: a for v, a in zip(args, combo)}
            hits = [b for b in model.carriers[res.sort] if test({**env, res.name: b})]
            if len(hits) != 1:
                return None
            table[combo] = hits[0]
        funs[name] = table
    else:
        test = compile_formula(spec.formula, model)
        rels[name] = frozenset(
            combo for combo in itertools.product(*(model.carriers[v.sort] for v in spec.params))
            if test({v.name: a for v, a in zip(spec.params, combo)}))
    return FiniteModel(new_sig, carriers, funs, rels)


def expand_along(model: FiniteModel, chain: MoritaChain) -> FiniteModel | None:
    for spec, thy in chain.steps:
        model = expand_model(model, spec, thy.signature)
        if model is None:
            return None
    return model


@dataclass
class ConservativityReport:
    syntactic: list[tuple[Sequent, str, str]]
    models_checked: int
    expansion_failures: list[str]

    @property
    def ok(self) -> bool:
        return not self.expansion_failures and all(
            not (ext == "proved" and b != "proved") for _s, ext, b in self.syntactic)

    def to_json(self) -> dict:
        from .dsl import print_sequent
        return {"status": "pass" if self.ok else "fail", "models_checked": self.models_checked,
                "expansion_failures": self.expansion_failures,
                "syntactic": [{"sequent": print_sequent(s), "extended": e, "base": b}
                              for s, e, b in self.syntactic]}


def check_conservativity(base: Theory, extended: Theory, chain: MoritaChain,
                         samples: Iterable[Sequent] = (), bound: int = 2,
                         budget: Budget | None = None) -> ConservativityReport:
    """Spot-check conservativity syntactically and semantically.

    Sampled base sequents proved in the extension must also be proved in
    the base; every base model up to ``bound`` must expand canonically to
    a model of every stage of the chain.
    """
    if chain.base.signature.order != base.signature.order or chain.base.axioms != base.axioms:
        raise ValueError("chain does not start at the base theory")
    if chain.final.signature.order != extended.signature.order or chain.final.axioms != extended.axioms:
        raise ValueError("chain does not end at the extended theory")
    syntactic = []
    for s in samples:
        ext = derive(extended, s, budget).status
        b = derive(base, s, budget).status if ext == "proved" else "-"
        syntactic.append((s, ext, b))
    failures = []
    count = 0
    for m in iter_models(base, bound):
        count += 1
        cur = m
        for i, (spec, thy) in enumerate(chain.steps, 1):
            cur = expand_model(cur, spec, thy.signature)
            if cur is None:
                failures.append(f"model {count}: step {i} ({spec.name}) has no canonical expansion")
                break
            bad = [ax.name for ax in thy.axioms if violation(cur, ax) is not None]
            if bad:
                failures.append(f"model {count}: step {i} ({spec.name}) violates {', '.join(bad)}")
                break
    return ConservativityReport(syntactic, count, failures)


# ----------------------------------------------------------------- renaming


def rename_term(t: Term, m: Mapping[str, str]) -> Term:
    if isinstance(t, Var):
        return Var(t.name, m.get(t.sort, t.sort))
    return App(m.get(t.fn, t.fn), tuple(rename_term(a, m) for a in t.args), m.get(t.sort, t.sort))


def rename_formula(f: Formula, m: Mapping[str, str]) -> Formula:
    if isinstance(f, (Top, Bottom)):
        return f
    if isinstance(f, Eq):
        return Eq(rename_term(f.left, m), rename_term(f.right, m))
    if isinstance(f, Rel):
        return Rel(m.get(f.name, f.name), tuple(rename_term(a, m) for a in f.args))
    if isinstance(f, (And, Or, Implies)):
        return type(f)(rename_formula(f.left, m), rename_formula(f.right, m))
    if isinstance(f, Not):
        return Not(rename_formula(f.body, m))
    return type(f)(rename_term(f.var, m), rename_formula(f.body, m))


def rename_sequent(s: Sequent, m: Mapping[str, str]) -> Sequent:
    return Sequent(rename_formula(s.antecedent, m), rename_formula(s.consequent, m),
                   tuple(rename_term(v, m) for v in s.context), s.name)


def rename_signature(sig: Signature, m: Mapping[str, str]) -> Signature:
    out = Signature()
    for kind, name in sig.order:
        if kind == "sort":
            d = sig.sorts[name]
            out = out.with_sort(SortDescriptor(
                m.get(d.name, d.name), d.kind, tuple(m.get(c, c) for c in d.components),
                tuple(m.get(f, f) for f in d.maps), tuple(rename_term(v, m) for v in d.params),
                None if d.formula is None else rename_formula(d.formula, m)))
        elif kind == "fun":
            args, res = sig.functions[name]
            out = out.with_function(m.get(name, name), tuple(m.get(a, a) for a in args), m.get(res, res))
        else:
            out = out.with_relation(m.get(name, name), tuple(m.get(a, a) for a in sig.relations[name]))
    return out


def rename_symbols(theory: Theory, m: Mapping[str, str]) -> Theory:
    return Theory(theory.name, rename_signature(theory.signature, m),
                  tuple(rename_sequent(s, m) for s in theory.axioms), theory.fragment)


def rename_disjoint(theory: Theory, other: Theory) -> tuple[Theory, dict[str, str]]:
    """Prime every symbol of ``theory`` that clashes with ``other``."""
    taken = other.signature.names() | theory.signature.names()
    mapping = {}
    for name in sorted(theory.signature.names() & other.signature.names()):
        new = name + "'"
        while new in taken:
            new += "'"
        taken.add(new)
        mapping[name] = new
    if not mapping:
        return theory, {}
    return rename_symbols(theory, mapping), mapping


def invert(mapping: Mapping[str, str]) -> dict[str, str]:
    return {v: k for k, v in mapping.items()}


# ------------------------------------------------------------------ spans


@dataclass
class SpanReport:
    left_in_right: list[tuple[Sequent, str]]
    right_in_left: list[tuple[Sequent, str]]
    signature_match: bool

    @property
    def status(self) -> str:
        statuses = [o for _s, o in self.left_in_right + self.right_in_left]
        if not self.signature_match or "refuted" in statuses:
            return "refuted"
        return "proved" if all(o == "proved" for o in statuses) else "unknown"


def mutually_derivable(left: Theory, right: Theory, budget: Budget | None = None) -> SpanReport:
    """Compare two theories over the same symbols by deriving each axiom list in the other."""
    same = (set(left.signature.sorts) == set(right.signature.sorts)
            and dict(left.signature.functions) == dict(right.signature.functions)
            and dict(left.signature.relations) == dict(right.signature.relations))
    if not same:
        return SpanReport([], [], False)
    l2r = [(ax, derive(right, ax, budget).status) for ax in left.axioms]
    r2l = [(ax, derive(left, ax, budget).status) for ax in right.axioms]
    return SpanReport(l2r, r2l, True)


def verify_span(left: MoritaChain, right: MoritaChain, budget: Budget | None = None) -> SpanReport:
    """Both chains must end in logically equivalent theories."""
    return mutually_derivable(left.final, right.final, budget)
