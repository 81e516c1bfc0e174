"""Sorted terms, formulas, sequents, signatures and theories.

Variables are scoped by name: a binder for ``x`` shadows every occurrence
named ``x`` in its body.  Each occurrence still carries its sort so that
printing and type checking never need an environment.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Mapping, Union


class SortError(ValueError):
    """Raised when an operation would produce an ill-sorted expression."""


class Fragment(enum.IntEnum):
    CARTESIAN = 0
    REGULAR = 1
    COHERENT = 2
    FIRST_ORDER = 3

    @property
    def keyword(self) -> str:
        return self.name.lower().replace("_", "-")

    @classmethod
    def parse(cls, text: str) -> "Fragment":
        key = text.strip().lower().replace("_", "-")
        for frag in cls:
            if frag.keyword == key:
                return frag
        raise ValueError(f"unknown fragment {text!r}")


# ---------------------------------------------------------------- terms


@dataclass(frozen=True)
class Var:
    name: str
    sort: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class App:
    fn: str
    args: tuple
    sort: str

    def __str__(self) -> str:
        return f"{self.fn}({', '.join(map(str, self.args))})"


Term = Union[Var, App]


def term_sort(t: Term) -> str:
    return t.sort


def term_vars(t: Term) -> list[Var]:
    out: list[Var] = []
    _term_vars(t, out)
    return out


def _term_vars(t: Term, out: list[Var]) -> None:
    if isinstance(t, Var):
        if t not in out:
            out.append(t)
    else:
        for a in t.args:
            _term_vars(a, out)


def subterms(t: Term) -> Iterator[Term]:
    yield t
    if isinstance(t, App):
        for a in t.args:
            yield from subterms(a)


# ------------------------------------------------------------- formulas


class Formula:
    __slots__ = ()


@dataclass(frozen=True)
class Top(Formula):
    pass


@dataclass(frozen=True)
class Bottom(Formula):
    pass


@dataclass(frozen=True)
class Eq(Formula):
    left: Term
    right: Term


@dataclass(frozen=True)
class Rel(Formula):
    name: str
    args: tuple = ()


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: Var
    body: Formula


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: Var
    body: Formula


TOP = Top()
BOTTOM = Bottom()

ATOMS = (Top, Bottom, Eq, Rel)
BINARY = (And, Or, Implies)
QUANTIFIERS = (Exists, Forall)


def conj(*parts: Formula) -> Formula:
    """Right-nested conjunction; the empty conjunction is true."""
    items = [p for p in parts]
    if not items:
        return TOP
    out = items[-1]
    for p in reversed(items[:-1]):
        out = And(p, out)
    return out


def disj(*parts: Formula) -> Formula:
    items = [p for p in parts]
    if not items:
        return BOTTOM
    out = items[-1]
    for p in reversed(items[:-1]):
        out = Or(p, out)
    return out


def exists(variables: Iterable[Var], body: Formula) -> Formula:
    for v in reversed(list(variables)):
        body = Exists(v, body)
    return body


def forall(variables: Iterable[Var], body: Formula) -> Formula:
    for v in reversed(list(variables)):
        body = Forall(v, body)
    return body


def eqs(left: Iterable[Term], right: Iterable[Term]) -> Formula:
    return conj(*(Eq(a, b) for a, b in zip(left, right)))


def conjuncts(f: Formula) -> list[Formula]:
    out = []
    while isinstance(f, And):
        out.append(f.left)
        f = f.right
    out.append(f)
    return out


def disjuncts(f: Formula) -> list[Formula]:
    out = []
    while isinstance(f, Or):
        out.append(f.left)
        f = f.right
    out.append(f)
    return out


def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, BINARY):
        return (f.left, f.right)
    if isinstance(f, (Exists, Forall, Not)):
        return (f.body,)
    return ()


def formula_terms(f: Formula) -> Iterator[Term]:
    """Top-level terms of the atoms of ``f`` (not descending into terms)."""
    if isinstance(f, Eq):
        yield f.left
        yield f.right
    elif isinstance(f, Rel):
        yield from f.args
    else:
        for c in children(f):
            yield from formula_terms(c)


def free_vars(f: Formula) -> tuple[Var, ...]:
    """Free variables in order of first occurrence."""
    out: list[Var] = []
    seen: set[str] = set()
    _free(f, frozenset(), out, seen)
    return tuple(out)


def _free(f: Formula, bound: frozenset, out: list, seen: set) -> None:
    if isinstance(f, (Eq, Rel)):
        for t in formula_terms(f):
            for v in term_vars(t):
                if v.name not in bound and v.name not in seen:
                    seen.add(v.name)
                    out.append(v)
    elif isinstance(f, (Exists, Forall)):
        _free(f.body, bound | {f.var.name}, out, seen)
    else:
        for c in children(f):
            _free(c, bound, out, seen)


def var_names(f: Formula) -> set[str]:
    """Every variable name occurring in ``f``, free or bound."""
    names: set[str] = set()
    for node in walk(f):
        if isinstance(node, (Exists, Forall)):
            names.add(node.var.name)
    for t in formula_terms(f):
        names.update(v.name for v in term_vars(t))
    return names


def walk(f: Formula) -> Iterator[Formula]:
    yield f
    for c in children(f):
        yield from walk(c)


def size(f: Formula) -> int:
    """Number of connectives, quantifiers and atoms."""
    return sum(1 for _ in walk(f))


def symbols(f: Formula) -> tuple[set[str], set[str], set[str]]:
    """(sorts, functions, relations) mentioned anywhere in ``f``."""
    sorts: set[str] = set()
    funs: set[str] = set()
    rels: set[str] = set()
    for node in walk(f):
        if isinstance(node, (Exists, Forall)):
            sorts.add(node.var.sort)
        if isinstance(node, Rel):
            rels.add(node.name)
    for t in formula_terms(f):
        for s in subterms(t):
            sorts.add(s.sort)
            if isinstance(s, App):
                funs.add(s.fn)
    return sorts, funs, rels


def min_fragment(f: Formula) -> Fragment:
    frag = Fragment.CARTESIAN
    for node in walk(f):
        if isinstance(node, (Not, Implies, Forall)):
            return Fragment.FIRST_ORDER
        if isinstance(node, (Or, Bottom)):
            frag = max(frag, Fragment.COHERENT)
        elif isinstance(node, Exists):
            frag = max(frag, Fragment.REGULAR)
    return frag


def is_coherent(f: Formula) -> bool:
    return min_fragment(f) <= Fragment.COHERENT


# ----------------------------------------------------------- substitution


class FreshNames:
    """Generator of reserved ``_vN`` names avoiding a given set."""

    def __init__(self, avoid: Iterable[str] = (), prefix: str = "_v"):
        self.avoid = set(avoid)
        self.prefix = prefix
        self.counter = 0

    def __call__(self) -> str:
        while True:
            name = f"{self.prefix}{self.counter}"
            self.counter += 1
            if name not in self.avoid:
                self.avoid.add(name)
                return name


def fresh_name(base: str, avoid: set[str]) -> str:
    """``base`` itself if unused, else ``base`` with primes appended."""
    name = base
    while name in avoid:
        name += "'"
    avoid.add(name)
    return name


def subst_term(t: Term, binding: Mapping[str, Term]) -> Term:
    if isinstance(t, Var):
        return binding.get(t.name, t)
    return App(t.fn, tuple(subst_term(a, binding) for a in t.args), t.sort)


def _check_binding(binding: Mapping[Var, Term]) -> dict[str, Term]:
    out: dict[str, Term] = {}
    for v, t in binding.items():
        if v.sort != t.sort:
            raise SortError(f"cannot substitute {t} : {t.sort} for {v.name} : {v.sort}")
        if t != v:
            out[v.name] = t
    return out


def substitute(formula: Formula, binding: Mapping[Var, Term]) -> Formula:
    """Capture-avoiding simultaneous substitution."""
    named = _check_binding(binding)
    if not named:
        return formula
    avoid = var_names(formula)
    for t in named.values():
        avoid.update(v.name for v in term_vars(t))
    return _subst(formula, named, FreshNames(avoid))


def _subst(f: Formula, b: dict[str, Term], fresh: FreshNames) -> Formula:
    if isinstance(f, (Top, Bottom)):
        return f
    if isinstance(f, Eq):
        return Eq(subst_term(f.left, b), subst_term(f.right, b))
    if isinstance(f, Rel):
        return Rel(f.name, tuple(subst_term(a, b) for a in f.args))
    if isinstance(f, Not):
        return Not(_subst(f.body, b, fresh))
    if isinstance(f, BINARY):
        return type(f)(_subst(f.left, b, fresh), _subst(f.right, b, fresh))
    # quantifier
    v = f.var
    inner = {k: t for k, t in b.items() if k != v.name}
    if not inner:
        return f
    live = {v2.name for v2 in free_vars(f.body)}
    inner = {k: t for k, t in inner.items() if k in live}
    if not inner:
        return f
    clash = any(v.name in {u.name for u in term_vars(t)} for t in inner.values())
    if clash:
        nv = Var(fresh(), v.sort)
        inner[v.name] = nv
        return type(f)(nv, _subst(f.body, inner, fresh))
    return type(f)(v, _subst(f.body, inner, fresh))


def rename_vars(f: Formula, mapping: Mapping[Var, Var]) -> Formula:
    return substitute(f, dict(mapping))


# ------------------------------------------------------- canonicalization


def canonicalize(formula: Formula, context: Iterable[Var]) -> Formula:
    """Rename bound variables to ``_vN`` in binding order.

    Two formulas canonicalize identically iff they are alpha-equivalent
    relative to ``context``.
    """
    ctx = tuple(context)
    names = {v.name: v for v in ctx}
    for v in free_vars(formula):
        w = names.get(v.name)
        if w is None:
            raise ValueError(f"free variable {v.name} is not in the context")
        if w.sort != v.sort:
            raise SortError(f"variable {v.name} used at sort {v.sort}, context says {w.sort}")
    fresh = FreshNames(names)
    return _canon(formula, {}, fresh)


def _canon(f: Formula, b: dict[str, Term], fresh: FreshNames) -> Formula:
    if isinstance(f, (Top, Bottom)):
        return f
    if isinstance(f, Eq):
        return Eq(subst_term(f.left, b), subst_term(f.right, b))
    if isinstance(f, Rel):
        return Rel(f.name, tuple(subst_term(a, b) for a in f.args))
    if isinstance(f, Not):
        return Not(_canon(f.body, b, fresh))
    if isinstance(f, BINARY):
        return type(f)(_canon(f.left, b, fresh), _canon(f.right, b, fresh))
    nv = Var(fresh(), f.var.sort)
    return type(f)(nv, _canon(f.body, {**b, f.var.name: nv}, fresh))


def alpha_equal(f: Formula, g: Formula, context: Iterable[Var]) -> bool:
    ctx = tuple(context)
    return canonicalize(f, ctx) == canonicalize(g, ctx)


# ---------------------------------------------------------------- sequents


Context = tuple  # tuple[Var, ...]


@dataclass(frozen=True)
class Sequent:
    antecedent: Formula
    consequent: Formula
    context: tuple = ()
    name: str = field(default="", compare=False)

    def named(self, name: str) -> "Sequent":
        return replace(self, name=name)


def sequent(antecedent: Formula, consequent: Formula, context: Iterable[Var] = (), name: str = "") -> Sequent:
    return Sequent(antecedent, consequent, tuple(context), name)


def biconditional(left: Formula, right: Formula, context: Iterable[Var], name: str = "") -> list[Sequent]:
    ctx = tuple(context)
    return [Sequent(left, right, ctx, f"{name}_l" if name else ""),
            Sequent(right, left, ctx, f"{name}_r" if name else "")]


def context_of(*formulas: Formula) -> tuple[Var, ...]:
    out: list[Var] = []
    seen: set[str] = set()
    for f in formulas:
        for v in free_vars(f):
            if v.name not in seen:
                seen.add(v.name)
                out.append(v)
    return tuple(out)


# -------------------------------------------------------------- signatures


SORT_KINDS = ("base", "product", "coproduct", "subsort", "quotient", "unit", "empty")


@dataclass(frozen=True)
class SortDescriptor:
    """A sort together with how it was built.

    ``components`` holds the factors of a product or coproduct, the ambient
    sort of a subsort or quotient, or the witness sort of a unit or empty
    sort.  ``maps`` are the structural function names (projections,
    injections, the inclusion or the quotient map).  ``params`` are the
    variables of the defining ``formula``.
    """

    name: str
    kind: str = "base"
    components: tuple = ()
    maps: tuple = ()
    params: tuple = ()
    formula: Formula | None = None

    @classmethod
    def base(cls, name: str) -> "SortDescriptor":
        return cls(name)

    @classmethod
    def product(cls, name: str, components: Iterable[str], projections: Iterable[str]) -> "SortDescriptor":
        return cls(name, "product", tuple(components), tuple(projections))

    @classmethod
    def coproduct(cls, name: str, components: Iterable[str], injections: Iterable[str]) -> "SortDescriptor":
        return cls(name, "coproduct", tuple(components), tuple(injections))

    @classmethod
    def subsort(cls, name: str, ambient: str, var: Var, formula: Formula, injection: str) -> "SortDescriptor":
        return cls(name, "subsort", (ambient,), (injection,), (var,), formula)

    @classmethod
    def quotient(cls, name: str, ambient: str, params: tuple[Var, Var], formula: Formula,
                 surjection: str) -> "SortDescriptor":
        return cls(name, "quotient", (ambient,), (surjection,), tuple(params), formula)

    @classmethod
    def unit(cls, name: str, witness: str) -> "SortDescriptor":
        return cls(name, "unit", (witness,))

    @classmethod
    def empty(cls, name: str, witness: str) -> "SortDescriptor":
        return cls(name, "empty", (witness,))

    @property
    def derived(self) -> bool:
        return self.kind != "base"

    def structural_arities(self) -> list[tuple[str, tuple[str, ...], str]]:
        if self.kind == "product":
            return [(p, (self.name,), c) for p, c in zip(self.maps, self.components)]
        if self.kind == "coproduct":
            return [(r, (c,), self.name) for r, c in zip(self.maps, self.components)]
        if self.kind == "subsort":
            return [(self.maps[0], (self.name,), self.components[0])]
        if self.kind == "quotient":
            return [(self.maps[0], (self.components[0],), self.name)]
        return []


@dataclass(frozen=True)
class Signature:
    sorts: Mapping[str, SortDescriptor] = field(default_factory=dict)
    functions: Mapping[str, tuple] = field(default_factory=dict)
    relations: Mapping[str, tuple] = field(default_factory=dict)
    order: tuple = ()

    def __hash__(self) -> int:
        return hash(self.order)

    # construction -- every method returns a new signature

    def with_sort(self, desc: SortDescriptor | str) -> "Signature":
        if isinstance(desc, str):
            desc = SortDescriptor.base(desc)
        if desc.name in self.sorts:
            raise ValueError(f"sort {desc.name} already declared")
        sorts = dict(self.sorts)
        sorts[desc.name] = desc
        funs = dict(self.functions)
        for fn, args, res in desc.structural_arities():
            if fn in funs:
                raise ValueError(f"function {fn} already declared")
            funs[fn] = (args, res)
        return Signature(sorts, funs, dict(self.relations), self.order + (("sort", desc.name),))

    def with_function(self, name: str, args: Iterable[str], result: str) -> "Signature":
        if name in self.functions:
            raise ValueError(f"function {name} already declared")
        funs = dict(self.functions)
        funs[name] = (tuple(args), result)
        return Signature(dict(self.sorts), funs, dict(self.relations), self.order + (("fun", name),))

    def with_relation(self, name: str, args: Iterable[str]) -> "Signature":
        if name in self.relations:
            raise ValueError(f"relation {name} already declared")
        rels = dict(self.relations)
        rels[name] = tuple(args)
        return Signature(dict(self.sorts), dict(self.functions), rels, self.order + (("rel", name),))

    @classmethod
    def build(cls, sorts: Iterable[SortDescriptor | str] = (), functions: Mapping[str, tuple] | None = None,
              relations: Mapping[str, Iterable[str]] | None = None) -> "Signature":
        sig = cls()
        for s in sorts:
            sig = sig.with_sort(s)
        for name, (args, res) in (functions or {}).items():
            sig = sig.with_function(name, args, res)
        for name, args in (relations or {}).items():
            sig = sig.with_relation(name, args)
        return sig

    # queries

    def structural_functions(self) -> dict[str, str]:
        """Map from structural function name to the derived sort owning it."""
        out = {}
        for desc in self.sorts.values():
            for fn in desc.maps:
                out[fn] = desc.name
        return out

    def names(self) -> set[str]:
        return set(self.sorts) | set(self.functions) | set(self.relations)

    def contains(self, other: "Signature") -> bool:
        return (all(self.sorts.get(k) == v for k, v in other.sorts.items())
                and all(self.functions.get(k) == v for k, v in other.functions.items())
                and all(self.relations.get(k) == v for k, v in other.relations.items()))

    def app(self, fn: str, *args: Term) -> App:
        """Build a well-sorted application, checking the arity."""
        if fn not in self.functions:
            raise SortError(f"unknown function {fn}")
        arg_sorts, res = self.functions[fn]
        if tuple(a.sort for a in args) != tuple(arg_sorts):
            raise SortError(f"{fn} expects {arg_sorts}, got {[a.sort for a in args]}")
        return App(fn, tuple(args), res)

    def rel(self, name: str, *args: Term) -> Rel:
        if name not in self.relations:
            raise SortError(f"unknown relation {name}")
        if tuple(a.sort for a in args) != tuple(self.relations[name]):
            raise SortError(f"{name} expects {self.relations[name]}, got {[a.sort for a in args]}")
        return Rel(name, tuple(args))


@dataclass(frozen=True)
class Theory:
    name: str
    signature: Signature
    axioms: tuple = ()
    fragment: Fragment = Fragment.COHERENT

    def __hash__(self) -> int:
        return hash((self.name, self.signature, self.axioms, self.fragment))

    def with_axioms(self, extra: Iterable[Sequent]) -> "Theory":
        return replace(self, axioms=self.axioms + tuple(extra))

    def renamed(self, name: str) -> "Theory":
        return replace(self, name=name)


# --------------------------------------------------------- well-formedness


@dataclass(frozen=True)
class Diagnostic:
    location: str
    message: str

    def __str__(self) -> str:
        return f"{self.location}: {self.message}" if self.location else self.message


def check_term(sig: Signature, t: Term, scope: Mapping[str, str], where: str, out: list[Diagnostic]) -> None:
    if isinstance(t, Var):
        if t.sort not in sig.sorts:
            out.append(Diagnostic(where, f"unknown sort {t.sort} for variable {t.name}"))
        if t.name not in scope:
            out.append(Diagnostic(where, f"variable {t.name} not in context"))
        elif scope[t.name] != t.sort:
            out.append(Diagnostic(where, f"variable {t.name} used at sort {t.sort} but declared {scope[t.name]}"))
        return
    if t.fn not in sig.functions:
        out.append(Diagnostic(where, f"unknown function {t.fn}"))
        for a in t.args:
            check_term(sig, a, scope, where, out)
        return
    arg_sorts, res = sig.functions[t.fn]
    if len(arg_sorts) != len(t.args):
        out.append(Diagnostic(where, f"{t.fn} expects {len(arg_sorts)} arguments, got {len(t.args)}"))
    else:
        for a, s in zip(t.args, arg_sorts):
            if a.sort != s:
                out.append(Diagnostic(where, f"argument of {t.fn} has sort {a.sort}, expected {s}"))
    if t.sort != res:
        out.append(Diagnostic(where, f"{t.fn} returns {res}, annotated {t.sort}"))
    for a in t.args:
        check_term(sig, a, scope, where, out)


def check_formula(sig: Signature, f: Formula, scope: Mapping[str, str], fragment: Fragment, where: str,
                  out: list[Diagnostic]) -> None:
    if isinstance(f, Top):
        return
    if isinstance(f, Bottom):
        if fragment < Fragment.COHERENT:
            out.append(Diagnostic(where, "constructor outside fragment: false"))
        return
    if isinstance(f, Eq):
        if f.left.sort != f.right.sort:
            out.append(Diagnostic(where, f"sort mismatch in equality ({f.left.sort} vs {f.right.sort})"))
        check_term(sig, f.left, scope, where, out)
        check_term(sig, f.right, scope, where, out)
        return
    if isinstance(f, Rel):
        if f.name not in sig.relations:
            out.append(Diagnostic(where, f"unknown relation {f.name}"))
        else:
            arity = sig.relations[f.name]
            if len(arity) != len(f.args):
                out.append(Diagnostic(where, f"{f.name} expects {len(arity)} arguments, got {len(f.args)}"))
            else:
                for a, s in zip(f.args, arity):
                    if a.sort != s:
                        out.append(Diagnostic(where, f"argument of {f.name} has sort {a.sort}, expected {s}"))
        for a in f.args:
            check_term(sig, a, scope, where, out)
        return
    if isinstance(f, (Not, Implies, Forall)) and fragment < Fragment.FIRST_ORDER:
        label = {Not: "not", Implies: "->", Forall: "forall"}[type(f)]
        out.append(Diagnostic(where, f"constructor outside fragment: {label}"))
    if isinstance(f, Or) and fragment < Fragment.COHERENT:
        out.append(Diagnostic(where, "constructor outside fragment: \\/"))
    if isinstance(f, (Exists, Forall)):
        if f.var.sort not in sig.sorts:
            out.append(Diagnostic(where, f"unknown sort {f.var.sort}"))
        check_formula(sig, f.body, {**scope, f.var.name: f.var.sort}, fragment, where, out)
        return
    for c in children(f):
        check_formula(sig, c, scope, fragment, where, out)


def check_context(sig: Signature, ctx: Iterable[Var], where: str, out: list[Diagnostic]) -> dict[str, str]:
    scope: dict[str, str] = {}
    for v in ctx:
        if v.name in scope:
            out.append(Diagnostic(where, f"duplicate variable {v.name} in context"))
        if v.sort not in sig.sorts:
            out.append(Diagnostic(where, f"unknown sort {v.sort}"))
        scope[v.name] = v.sort
    return scope


def check_sequent(sig: Signature, s: Sequent, fragment: Fragment, where: str = "") -> list[Diagnostic]:
    out: list[Diagnostic] = []
    scope = check_context(sig, s.context, where, out)
    check_formula(sig, s.antecedent, scope, fragment, where, out)
    check_formula(sig, s.consequent, scope, fragment, where, out)
    return out


def check_signature(sig: Signature) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    declared: set[str] = set()
    for kind, name in sig.order:
        if kind != "sort":
            continue
        desc = sig.sorts[name]
        where = f"sort {name}"
        if desc.kind not in SORT_KINDS:
            out.append(Diagnostic(where, f"unknown provenance {desc.kind}"))
        for c in desc.components:
            if c not in declared:
                out.append(Diagnostic(where, f"provenance refers to undeclared sort {c}"))
        if desc.kind in ("product", "coproduct"):
            if not desc.components:
                out.append(Diagnostic(where, "empty component list"))
            if len(desc.maps) != len(desc.components):
                out.append(Diagnostic(where, "one structural map per component required"))
        if desc.kind in ("subsort", "quotient"):
            want = 1 if desc.kind == "subsort" else 2
            ambient = desc.components[0] if desc.components else None
            if len(desc.params) != want or any(p.sort != ambient for p in desc.params):
                out.append(Diagnostic(where, f"defining formula needs exactly {want} variable(s) of sort {ambient}"))
            if desc.formula is None:
                out.append(Diagnostic(where, "missing defining formula"))
            else:
                scope = check_context(sig, desc.params, where, out)
                check_formula(sig, desc.formula, scope, Fragment.FIRST_ORDER, where, out)
        declared.add(name)
    for name, (args, res) in sig.functions.items():
        for s in (*args, res):
            if s not in sig.sorts:
                out.append(Diagnostic(f"function {name}", f"unknown sort {s}"))
    for name, args in sig.relations.items():
        for s in args:
            if s not in sig.sorts:
                out.append(Diagnostic(f"relation {name}", f"unknown sort {s}"))
    clash = set(sig.sorts) & (set(sig.functions) | set(sig.relations)) | (set(sig.functions) & set(sig.relations))
    for name in sorted(clash):
        out.append(Diagnostic(name, "name declared in more than one namespace"))
    return out


def check_wellformed(theory: Theory) -> list[Diagnostic]:
    out = check_signature(theory.signature)
    for desc in theory.signature.sorts.values():
        if desc.formula is not None and min_fragment(desc.formula) > theory.fragment:
            out.append(Diagnostic(f"sort {desc.name}", "constructor outside fragment in defining formula"))
        if desc.kind in ("coproduct", "empty") and theory.fragment < Fragment.COHERENT:
            out.append(Diagnostic(f"sort {desc.name}", f"{desc.kind} sorts are outside the {theory.fragment.keyword} fragment"))
        if desc.kind == "quotient" and theory.fragment < Fragment.REGULAR:
            out.append(Diagnostic(f"sort {desc.name}", "quotient sorts are outside the cartesian fragment"))
    for i, ax in enumerate(theory.axioms):
        where = f"axiom {ax.name or i}"
        out.extend(check_sequent(theory.signature, ax, theory.fragment, where))
    return out


def fresh_vars(sorts: Iterable[str], prefix: str, avoid: set[str]) -> list[Var]:
    out = []
    for i, s in enumerate(sorts, 1):
        out.append(Var(fresh_name(f"{prefix}{i}", avoid), s))
    return out


def pairwise(items: Iterable) -> Iterator[tuple]:
    return itertools.combinations(items, 2)
