"""Morleyization: a coherent stand-in for a classical first-order theory.

Every pooled formula ``phi`` gets a relation ``C_k`` meaning "phi holds"
and ``D_k`` meaning "phi fails".  Coherent schemas pin both down from the
immediate subformulas, so in any model they are forced to be the truth
set of ``phi`` and its complement.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable

from .extend import ExtensionKind, ExtensionSpec, apply_extension_unchecked
from .models import FiniteModel, compile_formula, iter_models, violation
from .syntax import (
    TOP, And, Bottom, Eq, Exists, Forall, Formula, Fragment, Implies, Not, Or, Rel, Sequent, Signature,
    Theory, Top, Var, biconditional, canonicalize, children, free_vars, min_fragment,
    substitute,
)


@dataclass(frozen=True)
class PoolEntry:
    index: int
    formula: Formula          # representative with free variables x1..xn
    context: tuple            # its canonical context
    c_name: str
    d_name: str


class MorleyPool:
    """Subformula-closed set of formulas keyed by canonical form.

    Alpha-variants and formulas differing only in the names of their free
    variables (in first-occurrence order) share one entry.
    """

    def __init__(self, prefix_c: str = "C_", prefix_d: str = "D_"):
        self.entries: list[PoolEntry] = []
        self.by_key: dict[Formula, PoolEntry] = {}
        self.prefix_c = prefix_c
        self.prefix_d = prefix_d

    @staticmethod
    def key(f: Formula) -> tuple[Formula, tuple]:
        ctx = free_vars(f)
        pos = tuple(Var(f"x{i}", v.sort) for i, v in enumerate(ctx, 1))
        renamed = substitute(f, dict(zip(ctx, pos))) if ctx else f
        return canonicalize(renamed, pos), pos

    def add(self, f: Formula) -> PoolEntry:
        for c in children(f):
            self.add(c)
        k, ctx = self.key(f)
        entry = self.by_key.get(k)
        if entry is None:
            n = len(self.entries) + 1
            entry = PoolEntry(n, k, ctx, f"{self.prefix_c}{n}", f"{self.prefix_d}{n}")
            self.entries.append(entry)
            self.by_key[k] = entry
        return entry

    def add_all(self, formulas: Iterable[Formula]) -> "MorleyPool":
        for f in formulas:
            self.add(f)
        return self

    def lookup(self, f: Formula) -> PoolEntry:
        entry = self.by_key.get(self.key(f)[0])
        if entry is None:
            raise KeyError("formula is not in the pool")
        return entry

    def __contains__(self, f: Formula) -> bool:
        return self.key(f)[0] in self.by_key

    def __len__(self) -> int:
        return len(self.entries)

    def c_atom(self, f: Formula) -> Rel:
        return Rel(self.lookup(f).c_name, free_vars(f))

    def d_atom(self, f: Formula) -> Rel:
        return Rel(self.lookup(f).d_name, free_vars(f))

    def is_closed(self) -> bool:
        return all(c in self for e in self.entries for c in children(e.formula))

    @classmethod
    def for_theory(cls, theory: Theory, extra: Iterable[Formula] = ()) -> "MorleyPool":
        pool = cls()
        for ax in theory.axioms:
            pool.add(ax.antecedent)
            pool.add(ax.consequent)
        return pool.add_all(extra)


def morley_signature(sig: Signature, pool: MorleyPool) -> Signature:
    out = sig
    for e in pool.entries:
        sorts = tuple(v.sort for v in e.context)
        if e.c_name in sig.names() or e.d_name in sig.names():
            raise ValueError(f"pool symbol {e.c_name}/{e.d_name} clashes with the signature")
        out = out.with_relation(e.c_name, sorts).with_relation(e.d_name, sorts)
    return out


def structural_schemas(pool: MorleyPool) -> list[Sequent]:
    """Defining pairs linking each pooled formula to its immediate subformulas."""
    out = []
    for e in pool.entries:
        f, ctx = e.formula, e.context
        c, d = Rel(e.c_name, ctx), Rel(e.d_name, ctx)
        C, D = pool.c_atom, pool.d_atom
        tag = f"m{e.index}"
        if isinstance(f, (Top, Bottom, Eq, Rel)):
            out += biconditional(c, f, ctx, f"{tag}_c")
        elif isinstance(f, And):
            out += biconditional(c, And(C(f.left), C(f.right)), ctx, f"{tag}_c")
            out += biconditional(d, Or(D(f.left), D(f.right)), ctx, f"{tag}_d")
        elif isinstance(f, Or):
            out += biconditional(c, Or(C(f.left), C(f.right)), ctx, f"{tag}_c")
            out += biconditional(d, And(D(f.left), D(f.right)), ctx, f"{tag}_d")
        elif isinstance(f, Not):
            out += biconditional(c, D(f.body), ctx, f"{tag}_c")
            out += biconditional(d, C(f.body), ctx, f"{tag}_d")
        elif isinstance(f, Implies):
            out += biconditional(c, Or(D(f.left), C(f.right)), ctx, f"{tag}_c")
            out += biconditional(d, And(C(f.left), D(f.right)), ctx, f"{tag}_d")
        elif isinstance(f, Exists):
            out += biconditional(c, Exists(f.var, C(f.body)), ctx, f"{tag}_c")
        elif isinstance(f, Forall):
            out += biconditional(d, Exists(f.var, D(f.body)), ctx, f"{tag}_d")
    return out


def totality_schemas(pool: MorleyPool) -> list[Sequent]:
    out = []
    for e in pool.entries:
        c, d = Rel(e.c_name, e.context), Rel(e.d_name, e.context)
        out.append(Sequent(TOP, Or(c, d), e.context, f"m{e.index}_total"))
        out.append(Sequent(And(c, d), Bottom(), e.context, f"m{e.index}_disjoint"))
    return out


def translate_axiom(ax: Sequent, pool: MorleyPool) -> Sequent:
    return Sequent(pool.c_atom(ax.antecedent), pool.c_atom(ax.consequent), ax.context, ax.name)


def morleyize(theory: Theory, pool: MorleyPool | None = None) -> Theory:
    """The coherent theory over the C/D signature."""
    pool = pool if pool is not None else MorleyPool.for_theory(theory)
    if not pool.is_closed():
        raise ValueError("pool is not closed under subformulas")
    for ax in theory.axioms:
        if ax.antecedent not in pool or ax.consequent not in pool:
            raise ValueError(f"axiom {ax.name or '?'} is not covered by the pool")
    sig = morley_signature(theory.signature, pool)
    axioms = structural_schemas(pool) + totality_schemas(pool) + [translate_axiom(a, pool) for a in theory.axioms]
    return Theory(theory.name + "_m", sig, tuple(axioms), Fragment.COHERENT)


# --------------------------------------------------------------- semantics


def forced_expansion(model: FiniteModel, pool: MorleyPool, sig: Signature) -> FiniteModel:
    """Interpret every C as its formula's truth set and D as the complement."""
    rels = dict(model.relations)
    for e in pool.entries:
        test = compile_formula(e.formula, model)
        names = [v.name for v in e.context]
        truth = set()
        every = list(itertools.product(*(model.carriers[v.sort] for v in e.context)))
        for combo in every:
            if test(dict(zip(names, combo))):
                truth.add(combo)
        rels[e.c_name] = frozenset(truth)
        rels[e.d_name] = frozenset(c for c in every if c not in truth)
    return FiniteModel(sig, dict(model.carriers), {f: dict(t) for f, t in model.functions.items()}, rels)


@dataclass
class CorrespondenceReport:
    base_models: int
    morley_models: int
    expansion_failures: int
    unforced: int

    @property
    def ok(self) -> bool:
        return self.base_models == self.morley_models and not self.expansion_failures and not self.unforced

    def to_json(self) -> dict:
        return {"status": "pass" if self.ok else "fail", "base_models": self.base_models,
                "morley_models": self.morley_models, "expansion_failures": self.expansion_failures,
                "unforced": self.unforced}


def model_correspondence(theory: Theory, morleyized: Theory, pool: MorleyPool, bound: int) -> CorrespondenceReport:
    """Count labelled models on both sides and check the forced expansion."""
    if bound < 0:
        raise ValueError("bound must be non-negative")
    base_count = failures = 0
    for m in iter_models(theory, bound, symmetry=False):
        base_count += 1
        exp = forced_expansion(m, pool, morleyized.signature)
        if any(violation(exp, ax) is not None for ax in morleyized.axioms):
            failures += 1
    m_count = unforced = 0
    for m in iter_models(morleyized, bound, symmetry=False):
        m_count += 1
        red = m.reduct(theory.signature)
        forced = forced_expansion(red, pool, morleyized.signature)
        if forced.key() != m.key() or any(violation(red, ax) is not None for ax in theory.axioms):
            unforced += 1
    return CorrespondenceReport(base_count, m_count, failures, unforced)


def definitional_witness(theory: Theory, pool: MorleyPool) -> Theory:
    """``theory`` plus explicit definitions of every C as phi and D as not phi."""
    out = theory.renamed(theory.name + "_1")
    out = Theory(out.name, out.signature, out.axioms, Fragment.FIRST_ORDER)
    for e in pool.entries:
        out = apply_extension_unchecked(out, ExtensionSpec.relation(e.c_name, e.context, e.formula))
        out = apply_extension_unchecked(out, ExtensionSpec.relation(e.d_name, e.context, Not(e.formula)))
    return out


@dataclass
class WitnessReport:
    witness_models: int
    morley_models: int
    only_witness: int
    only_morley: int

    @property
    def agree(self) -> bool:
        return self.only_witness == 0 and self.only_morley == 0

    def to_json(self) -> dict:
        return {"status": "pass" if self.agree else "fail", "witness_models": self.witness_models,
                "morley_models": self.morley_models, "only_witness": self.only_witness,
                "only_morley": self.only_morley}


def _model_keys(theory: Theory, bound: int) -> set:
    return {m.key() for m in iter_models(theory, bound, symmetry=False)}


def build_fomor_witness(theory: Theory, pool: MorleyPool | None = None, bound: int = 2
                        ) -> tuple[Theory, WitnessReport]:
    """The definitional extension and a model-level comparison with the Morleyization."""
    pool = pool if pool is not None else MorleyPool.for_theory(theory)
    witness = definitional_witness(theory, pool)
    morley = morleyize(theory, pool)
    left, right = _model_keys(witness, bound), _model_keys(morley, bound)
    return witness, WitnessReport(len(left), len(right), len(left - right), len(right - left))


# -------------------------------------------------------------- extensions


def morleyize_extension(spec: ExtensionSpec, pool: MorleyPool) -> ExtensionSpec:
    """Replace the defining formula by its C atom."""
    if spec.formula is None:
        return spec
    if spec.formula not in pool:
        raise ValueError(f"defining formula of {spec.name} is not in the pool")
    atom = pool.c_atom(spec.formula)
    k = spec.kind
    if k is ExtensionKind.SUBSORT:
        return ExtensionSpec.subsort(spec.name, spec.components[0], spec.params[0], atom, spec.maps[0])
    if k is ExtensionKind.QUOTIENT:
        return ExtensionSpec.quotient(spec.name, spec.components[0], spec.params, atom, spec.maps[0])
    if k is ExtensionKind.FUNCTION:
        return ExtensionSpec.function(spec.name, spec.params[:-1], spec.params[-1], atom)
    return ExtensionSpec.relation(spec.name, spec.params, atom)


def is_coherent_theory(theory: Theory) -> bool:
    return all(min_fragment(ax.antecedent) <= Fragment.COHERENT and min_fragment(ax.consequent) <= Fragment.COHERENT
               for ax in theory.axioms)
