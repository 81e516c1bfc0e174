"""Text and JSON formats for theories, sequents and extension specs.

Grammar sketch::

    theory T
    fragment coherent
    sorts A, B
    derived AxB = product(A, B) with pi1, pi2
    fun f : A, B -> A
    rel R : A
    axiom a1: R(x) |- (x:A, y:B) exists z:A. f(z, y) = x

Formulas are parsed to a raw tree first and typed once the sequent's
context is known.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Any, Iterable, Mapping

from .syntax import (
    App, And, Bottom, Diagnostic, Eq, Exists, Forall, Formula, Fragment, Implies, Not, Or, Rel,
    Sequent, Signature, SortDescriptor, Term, Theory, Top, Var, check_wellformed, disjuncts,
    conjuncts,
)


class ParseError(ValueError):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("; ".join(str(d) for d in diagnostics))


KEYWORDS = {"theory", "fragment", "sorts", "derived", "fun", "rel", "axiom", "true", "false", "not",
            "exists", "forall", "extend"}

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<frag>first-order)
  | (?P<op>\|-|/\\|\\/|->|[(),:.=])
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str  # ident, op, kw, eof
    text: str
    line: int
    col: int

    @property
    def pos(self) -> str:
        return f"{self.line}:{self.col}"


def tokenize(text: str) -> list[Token]:
    out: list[Token] = []
    i, line, col = 0, 1, 1
    while i < len(text):
        m = _TOKEN.match(text, i)
        if m is None:
            raise ParseError([Diagnostic(f"{line}:{col}", f"unexpected character {text[i]!r}")])
        chunk = m.group(0)
        kind = m.lastgroup
        if kind == "frag":
            out.append(Token("ident", chunk, line, col))
        elif kind == "ident":
            out.append(Token("kw" if chunk in KEYWORDS else "ident", chunk, line, col))
        elif kind == "op":
            out.append(Token("op", chunk, line, col))
        nl = chunk.count("\n")
        if nl:
            line += nl
            col = len(chunk) - chunk.rfind("\n")
        else:
            col += len(chunk)
        i = m.end()
    out.append(Token("eof", "", line, col))
    return out


# ------------------------------------------------------------- raw parsing
#
# raw terms:    ("id", name, tok) | ("app", name, [args], tok)
# raw formulas: ("true", tok) | ("false", tok) | ("eq", t, s, tok) | ("atom", rawterm, tok)
#               ("and"|"or"|"imp", a, b, tok) | ("not", a, tok)
#               ("exists"|"forall", name, sort, body, tok)


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        return ParseError([Diagnostic(tok.pos, msg)])

    def at(self, text: str) -> bool:
        # "with" and "as" are contextual words, lexed as identifiers
        kinds = ("ident",) if text in ("with", "as") else ("op", "kw")
        return self.tok.kind in kinds and self.tok.text == text

    def accept(self, text: str) -> Token | None:
        if self.at(text):
            t = self.tok
            self.i += 1
            return t
        return None

    def expect(self, text: str) -> Token:
        t = self.accept(text)
        if t is None:
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return t

    def ident(self, what: str = "identifier") -> Token:
        if self.tok.kind != "ident":
            found = self.tok.text or "end of input"
            raise self.error(f"expected {what}, found {found!r}")
        t = self.tok
        self.i += 1
        return t

    def ident_list(self) -> list[Token]:
        items = [self.ident()]
        while self.accept(","):
            items.append(self.ident())
        return items

    # formulas

    def formula(self):
        left = self.disjunction()
        tok = self.accept("->")
        if tok:
            return ("imp", left, self.formula(), tok)
        return left

    def disjunction(self):
        left = self.conjunction()
        tok = self.accept("\\/")
        if tok:
            return ("or", left, self.disjunction(), tok)
        return left

    def conjunction(self):
        left = self.unary()
        tok = self.accept("/\\")
        if tok:
            return ("and", left, self.conjunction(), tok)
        return left

    def unary(self):
        tok = self.tok
        if self.accept("true"):
            return ("true", tok)
        if self.accept("false"):
            return ("false", tok)
        if self.accept("not"):
            return ("not", self.unary(), tok)
        if self.at("exists") or self.at("forall"):
            self.i += 1
            name = self.ident("variable").text
            self.expect(":")
            sort = self.ident("sort").text
            self.expect(".")
            return (tok.text, name, sort, self.unary(), tok)
        if self.accept("("):
            inner = self.formula()
            self.expect(")")
            return inner
        if tok.kind == "ident":
            t = self.term()
            eq = self.accept("=")
            if eq:
                return ("eq", t, self.term(), eq)
            return ("atom", t, tok)
        raise self.error(f"expected a formula, found {tok.text or 'end of input'!r}")

    def term(self):
        tok = self.ident("term")
        if self.accept("("):
            args = []
            if not self.accept(")"):
                args.append(self.term())
                while self.accept(","):
                    args.append(self.term())
                self.expect(")")
            return ("app", tok.text, args, tok)
        return ("id", tok.text, tok)

    def context(self) -> list[tuple[Token, Token]]:
        self.expect("(")
        out = []
        if not self.accept(")"):
            while True:
                name = self.ident("variable")
                self.expect(":")
                sort = self.ident("sort")
                out.append((name, sort))
                if self.accept(")"):
                    break
                self.expect(",")
        return out

    def sequent(self):
        ante = self.formula()
        self.expect("|-")
        ctx = self.context()
        cons = self.formula()
        return ante, ctx, cons

    def formula_in_context(self):
        ctx = self.context()
        return ctx, self.formula()


# --------------------------------------------------------------- elaboration


class _Elaborator:
    def __init__(self, sig: Signature, fragment: Fragment = Fragment.FIRST_ORDER):
        self.sig = sig
        self.fragment = fragment

    def context(self, raw_ctx) -> tuple[Var, ...]:
        out = []
        seen = set()
        for name, sort in raw_ctx:
            if sort.text not in self.sig.sorts:
                raise ParseError([Diagnostic(sort.pos, f"unknown sort {sort.text}")])
            if name.text in seen:
                raise ParseError([Diagnostic(name.pos, f"duplicate variable {name.text} in context")])
            seen.add(name.text)
            out.append(Var(name.text, sort.text))
        return tuple(out)

    def term(self, raw, scope: Mapping[str, str]) -> Term:
        if raw[0] == "id":
            name, tok = raw[1], raw[2]
            if name in scope:
                return Var(name, scope[name])
            if name in self.sig.functions and not self.sig.functions[name][0]:
                return App(name, (), self.sig.functions[name][1])
            raise ParseError([Diagnostic(tok.pos, f"unknown variable {name}")])
        _, name, rargs, tok = raw
        if name not in self.sig.functions:
            raise ParseError([Diagnostic(tok.pos, f"unknown function {name}")])
        arg_sorts, res = self.sig.functions[name]
        args = tuple(self.term(a, scope) for a in rargs)
        if len(args) != len(arg_sorts):
            raise ParseError([Diagnostic(tok.pos, f"{name} expects {len(arg_sorts)} arguments, got {len(args)}")])
        for a, s in zip(args, arg_sorts):
            if a.sort != s:
                raise ParseError([Diagnostic(tok.pos, f"argument of {name} has sort {a.sort}, expected {s}")])
        return App(name, args, res)

    def gate(self, tok: Token, fragment: Fragment, label: str) -> None:
        if self.fragment < fragment:
            raise ParseError([Diagnostic(tok.pos, f"fragment violation: {label} is outside the "
                                                   f"{self.fragment.keyword} fragment")])

    def formula(self, raw, scope: Mapping[str, str]) -> Formula:
        kind = raw[0]
        if kind == "true":
            return Top()
        if kind == "false":
            self.gate(raw[1], Fragment.COHERENT, "false")
            return Bottom()
        if kind == "eq":
            left, right = self.term(raw[1], scope), self.term(raw[2], scope)
            if left.sort != right.sort:
                raise ParseError([Diagnostic(raw[3].pos, f"sort mismatch in equality ({left.sort} vs {right.sort})")])
            return Eq(left, right)
        if kind == "atom":
            t = raw[1]
            name = t[1]
            if name not in self.sig.relations:
                raise ParseError([Diagnostic(raw[2].pos, f"unknown relation {name}")])
            rargs = t[2] if t[0] == "app" else []
            args = tuple(self.term(a, scope) for a in rargs)
            arity = self.sig.relations[name]
            if tuple(a.sort for a in args) != tuple(arity):
                raise ParseError([Diagnostic(raw[2].pos, f"{name} expects arguments of sorts {list(arity)}")])
            return Rel(name, args)
        if kind in ("and", "or", "imp"):
            if kind == "or":
                self.gate(raw[3], Fragment.COHERENT, "\\/")
            if kind == "imp":
                self.gate(raw[3], Fragment.FIRST_ORDER, "->")
            cls = {"and": And, "or": Or, "imp": Implies}[kind]
            return cls(self.formula(raw[1], scope), self.formula(raw[2], scope))
        if kind == "not":
            self.gate(raw[2], Fragment.FIRST_ORDER, "not")
            return Not(self.formula(raw[1], scope))
        if kind in ("exists", "forall"):
            _, name, sort, body, tok = raw
            if kind == "forall":
                self.gate(tok, Fragment.FIRST_ORDER, "forall")
            if sort not in self.sig.sorts:
                raise ParseError([Diagnostic(tok.pos, f"unknown sort {sort}")])
            v = Var(name, sort)
            inner = self.formula(body, {**scope, name: sort})
            return Exists(v, inner) if kind == "exists" else Forall(v, inner)
        raise AssertionError(kind)

    def sequent(self, raw, name: str = "") -> Sequent:
        ante, raw_ctx, cons = raw
        ctx = self.context(raw_ctx)
        scope = {v.name: v.sort for v in ctx}
        return Sequent(self.formula(ante, scope), self.formula(cons, scope), ctx, name)

    def formula_in_context(self, raw) -> tuple[tuple[Var, ...], Formula]:
        raw_ctx, body = raw
        ctx = self.context(raw_ctx)
        return ctx, self.formula(body, {v.name: v.sort for v in ctx})


# --------------------------------------------------------------- theories


def parse_theory(text: str) -> Theory:
    p = _Parser(text)
    p.expect("theory")
    name = p.ident("theory name").text
    fragment = Fragment.COHERENT
    if p.accept("fragment"):
        tok = p.ident("fragment name")
        try:
            fragment = Fragment.parse(tok.text)
        except ValueError:
            raise p.error(f"unknown fragment {tok.text!r}", tok)
    sig = Signature()
    axioms: list[Sequent] = []
    errors: list[Diagnostic] = []
    while p.tok.kind != "eof":
        tok = p.tok
        if p.accept("sorts"):
            sig = _declare_sorts(p, sig)
        elif p.accept("derived"):
            sig = _parse_derived(p, sig, fragment)
        elif p.accept("fun"):
            fname = p.ident("function name")
            p.expect(":")
            args = [] if p.at("->") else [t.text for t in p.ident_list()]
            p.expect("->")
            res = p.ident("sort").text
            for s in (*args, res):
                if s not in sig.sorts:
                    raise ParseError([Diagnostic(fname.pos, f"unknown sort {s}")])
            sig = _declare(sig.with_function, fname, args, res)
        elif p.accept("rel"):
            rname = p.ident("relation name")
            args = [t.text for t in p.ident_list()] if p.accept(":") else []
            for s in args:
                if s not in sig.sorts:
                    raise ParseError([Diagnostic(rname.pos, f"unknown sort {s}")])
            sig = _declare(sig.with_relation, rname, args)
        elif p.accept("axiom"):
            label = p.ident("axiom name")
            p.expect(":")
            raw = p.sequent()
            try:
                axioms.append(_Elaborator(sig, fragment).sequent(raw, label.text))
            except ParseError as e:
                errors.extend(e.diagnostics)
        else:
            raise p.error(f"expected a declaration, found {tok.text!r}")
    if errors:
        raise ParseError(errors)
    theory = Theory(name, sig, tuple(axioms), fragment)
    problems = check_wellformed(theory)
    if problems:
        raise ParseError(problems)
    return theory


def _declare(method, tok: Token, *args):
    try:
        return method(tok.text, *args)
    except ValueError as e:
        raise ParseError([Diagnostic(tok.pos, str(e))])


def _declare_sorts(p: _Parser, sig: Signature) -> Signature:
    while True:
        tok = p.ident("sort name")
        sig = _declare(sig.with_sort, tok)
        if not p.accept(",") and p.tok.kind != "ident":
            return sig


def _parse_ctor(p: _Parser, sig: Signature, fragment: Fragment):
    """Parses ``kind(args)``; returns (kind, components, params, formula, tok)."""
    tok = p.ident("sort constructor")
    kind = tok.text
    p.expect("(")
    if kind in ("product", "coproduct"):
        comps = [t.text for t in p.ident_list()]
        p.expect(")")
        return kind, comps, (), None, tok
    if kind in ("subsort", "quotient"):
        ambient = p.ident("sort").text
        p.expect(",")
        raw = p.formula_in_context()
        p.expect(")")
        params, formula = _Elaborator(sig, fragment).formula_in_context(raw)
        return kind, [ambient], params, formula, tok
    if kind in ("unit", "empty"):
        witness = p.ident("sort").text
        p.expect(")")
        return kind, [witness], (), None, tok
    if kind in ("function", "relation"):
        raw = p.formula_in_context()
        p.expect(")")
        params, formula = _Elaborator(sig, fragment).formula_in_context(raw)
        return kind, [], params, formula, tok
    raise p.error(f"unknown sort constructor {kind!r}", tok)


def _parse_derived(p: _Parser, sig: Signature, fragment: Fragment) -> Signature:
    name = p.ident("sort name")
    p.expect("=")
    kind, comps, params, formula, tok = _parse_ctor(p, sig, fragment)
    for c in comps:
        if c not in sig.sorts:
            raise ParseError([Diagnostic(tok.pos, f"unknown sort {c}")])
    maps: list[str] = []
    if kind in ("product", "coproduct", "subsort", "quotient"):
        p.expect("with")
        maps = [t.text for t in p.ident_list()]
    if kind == "product":
        desc = SortDescriptor.product(name.text, comps, maps)
    elif kind == "coproduct":
        desc = SortDescriptor.coproduct(name.text, comps, maps)
    elif kind == "subsort":
        if len(params) != 1 or len(maps) != 1:
            raise ParseError([Diagnostic(tok.pos, "subsort needs one variable and one injection name")])
        desc = SortDescriptor.subsort(name.text, comps[0], params[0], formula, maps[0])
    elif kind == "quotient":
        if len(params) != 2 or len(maps) != 1:
            raise ParseError([Diagnostic(tok.pos, "quotient needs two variables and one map name")])
        desc = SortDescriptor.quotient(name.text, comps[0], tuple(params), formula, maps[0])
    elif kind == "unit":
        desc = SortDescriptor.unit(name.text, comps[0])
    elif kind == "empty":
        desc = SortDescriptor.empty(name.text, comps[0])
    else:
        raise ParseError([Diagnostic(tok.pos, f"{kind} is not a sort constructor")])
    if kind in ("product", "coproduct") and len(maps) != len(comps):
        raise ParseError([Diagnostic(tok.pos, "one map name per component required")])
    try:
        return sig.with_sort(desc)
    except ValueError as e:
        raise ParseError([Diagnostic(name.pos, str(e))])


def parse_sequent(text: str, sig: Signature, fragment: Fragment = Fragment.FIRST_ORDER) -> Sequent:
    p = _Parser(text)
    raw = p.sequent()
    if p.tok.kind != "eof":
        raise p.error(f"trailing input {p.tok.text!r}")
    return _Elaborator(sig, fragment).sequent(raw)


def parse_formula(text: str, sig: Signature, fragment: Fragment = Fragment.FIRST_ORDER
                  ) -> tuple[tuple[Var, ...], Formula]:
    """Parse ``(x:A, y:B) phi`` into a context and a formula."""
    p = _Parser(text)
    raw = p.formula_in_context()
    if p.tok.kind != "eof":
        raise p.error(f"trailing input {p.tok.text!r}")
    return _Elaborator(sig, fragment).formula_in_context(raw)


def parse_term(text: str, sig: Signature, context: Iterable[Var]) -> Term:
    p = _Parser(text)
    raw = p.term()
    if p.tok.kind != "eof":
        raise p.error(f"trailing input {p.tok.text!r}")
    return _Elaborator(sig).term(raw, {v.name: v.sort for v in context})


def parse_formula_lines(text: str, sig: Signature) -> list[tuple[tuple[Var, ...], Formula]]:
    """One ``(ctx) formula`` per non-blank, non-comment line."""
    out = []
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            out.append(parse_formula(line, sig))
    return out


# ---------------------------------------------------------------- printing


def print_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    return f"{t.fn}({', '.join(print_term(a) for a in t.args)})"


_IMP, _OR, _AND, _UNARY = 0, 1, 2, 3


def print_formula(f: Formula, level: int = _IMP) -> str:
    if isinstance(f, Top):
        return "true"
    if isinstance(f, Bottom):
        return "false"
    if isinstance(f, Eq):
        return f"{print_term(f.left)} = {print_term(f.right)}"
    if isinstance(f, Rel):
        return f"{f.name}({', '.join(print_term(a) for a in f.args)})"
    if isinstance(f, Not):
        return f"not {print_formula(f.body, _UNARY)}"
    if isinstance(f, (Exists, Forall)):
        word = "exists" if isinstance(f, Exists) else "forall"
        return f"{word} {f.var.name}:{f.var.sort}. {print_formula(f.body, _UNARY)}"
    if isinstance(f, And):
        text = " /\\ ".join(print_formula(c, _UNARY) for c in conjuncts(f))
        mine = _AND
    elif isinstance(f, Or):
        text = " \\/ ".join(print_formula(c, _AND) for c in disjuncts(f))
        mine = _OR
    else:
        text = f"{print_formula(f.left, _OR)} -> {print_formula(f.right, _IMP)}"
        mine = _IMP
    return f"({text})" if level > mine else text


def print_context(ctx: Iterable[Var]) -> str:
    return "(" + ", ".join(f"{v.name}:{v.sort}" for v in ctx) + ")"


def print_sequent(s: Sequent) -> str:
    return f"{print_formula(s.antecedent)} |- {print_context(s.context)} {print_formula(s.consequent)}"


def print_formula_in_context(ctx: Iterable[Var], f: Formula) -> str:
    return f"{print_context(ctx)} {print_formula(f)}"


def print_sort_decl(desc: SortDescriptor) -> str:
    if desc.kind in ("product", "coproduct"):
        return (f"derived {desc.name} = {desc.kind}({', '.join(desc.components)}) "
                f"with {', '.join(desc.maps)}")
    if desc.kind in ("subsort", "quotient"):
        return (f"derived {desc.name} = {desc.kind}({desc.components[0]}, "
                f"{print_formula_in_context(desc.params, desc.formula)}) with {desc.maps[0]}")
    return f"derived {desc.name} = {desc.kind}({desc.components[0]})"


def print_theory(theory: Theory) -> str:
    sig = theory.signature
    lines = [f"theory {theory.name}", f"fragment {theory.fragment.keyword}"]
    structural = sig.structural_functions()
    pending_sorts: list[str] = []

    def flush() -> None:
        if pending_sorts:
            lines.append("sorts " + ", ".join(pending_sorts))
            pending_sorts.clear()

    for kind, name in sig.order:
        if kind == "sort":
            desc = sig.sorts[name]
            if desc.kind == "base":
                pending_sorts.append(name)
                continue
            flush()
            lines.append(print_sort_decl(desc))
        elif kind == "fun":
            if name in structural:
                continue
            flush()
            args, res = sig.functions[name]
            lines.append(f"fun {name} : {', '.join(args)}{' ' if args else ''}-> {res}")
        else:
            flush()
            args = sig.relations[name]
            lines.append(f"rel {name} : {', '.join(args)}" if args else f"rel {name}")
    flush()
    for i, ax in enumerate(theory.axioms):
        lines.append(f"axiom {ax.name or f'ax{i + 1}'}: {print_sequent(ax)}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------- extension specs


def parse_extensions(text: str, theories: Mapping[str, Theory]) -> list[tuple[str, Any]]:
    """Parse ``extend T with ...`` statements.

    Formulas are elaborated against the named theory's signature as grown
    by the earlier statements for that theory, so later steps may mention
    symbols introduced by earlier ones.
    """
    from .extend import ExtensionSpec, apply_extension_unchecked

    p = _Parser(text)
    out: list[tuple[str, ExtensionSpec]] = []
    current = dict(theories)
    while p.tok.kind != "eof":
        p.expect("extend")
        tname = p.ident("theory name")
        if tname.text not in current:
            raise ParseError([Diagnostic(tname.pos, f"unknown theory {tname.text}")])
        base = current[tname.text]
        p.expect("with")
        kind, comps, params, formula, tok = _parse_ctor(p, base.signature, base.fragment)
        for c in comps:
            if c not in base.signature.sorts:
                raise ParseError([Diagnostic(tok.pos, f"unknown sort {c}")])
        p.expect("as")
        name = p.ident("new name")
        maps: list[str] = []
        if p.accept("("):
            maps = [t.text for t in p.ident_list()]
            p.expect(")")
        try:
            if kind == "product":
                spec = ExtensionSpec.product(name.text, comps, maps)
            elif kind == "coproduct":
                spec = ExtensionSpec.coproduct(name.text, comps, maps)
            elif kind == "subsort":
                spec = ExtensionSpec.subsort(name.text, comps[0], params[0], formula, maps[0])
            elif kind == "quotient":
                spec = ExtensionSpec.quotient(name.text, comps[0], tuple(params), formula, maps[0])
            elif kind == "unit":
                spec = ExtensionSpec.unit(name.text, comps[0], maps)
            elif kind == "empty":
                spec = ExtensionSpec.empty(name.text, comps[0], maps)
            elif kind == "function":
                spec = ExtensionSpec.function(name.text, params[:-1], params[-1], formula)
            else:
                spec = ExtensionSpec.relation(name.text, params, formula)
        except (IndexError, ValueError) as e:
            raise ParseError([Diagnostic(tok.pos, f"malformed {kind} extension: {e}")])
        out.append((tname.text, spec))
        try:
            current[tname.text] = apply_extension_unchecked(base, spec)
        except ValueError as e:
            raise ParseError([Diagnostic(name.pos, str(e))])
    return out


def print_extension(theory_name: str, spec) -> str:
    kind = spec.kind.value
    if kind in ("product", "coproduct"):
        inner = ", ".join(spec.components)
        return f"extend {theory_name} with {kind}({inner}) as {spec.name}({', '.join(spec.maps)})"
    if kind in ("subsort", "quotient"):
        inner = f"{spec.components[0]}, {print_formula_in_context(spec.params, spec.formula)}"
        return f"extend {theory_name} with {kind}({inner}) as {spec.name}({spec.maps[0]})"
    if kind in ("unit", "empty"):
        tail = f"({', '.join(spec.maps)})" if spec.maps else ""
        return f"extend {theory_name} with {kind}({spec.components[0]}) as {spec.name}{tail}"
    return f"extend {theory_name} with {kind}({print_formula_in_context(spec.params, spec.formula)}) as {spec.name}"


# -------------------------------------------------------------------- JSON

FORMAT = "thy.json"


def term_to_json(t: Term) -> dict:
    if isinstance(t, Var):
        return {"var": t.name, "sort": t.sort}
    return {"fn": t.fn, "args": [term_to_json(a) for a in t.args], "sort": t.sort}


def term_from_json(d: dict) -> Term:
    if "var" in d:
        return Var(d["var"], d["sort"])
    return App(d["fn"], tuple(term_from_json(a) for a in d["args"]), d["sort"])


_OPS = {Top: "true", Bottom: "false", Eq: "eq", Rel: "rel", And: "and", Or: "or", Exists: "exists",
        Not: "not", Implies: "implies", Forall: "forall"}


def formula_to_json(f: Formula) -> dict:
    op = _OPS[type(f)]
    if isinstance(f, (Top, Bottom)):
        return {"op": op}
    if isinstance(f, Eq):
        return {"op": op, "args": [term_to_json(f.left), term_to_json(f.right)]}
    if isinstance(f, Rel):
        return {"op": op, "name": f.name, "args": [term_to_json(a) for a in f.args]}
    if isinstance(f, (Exists, Forall)):
        return {"op": op, "var": f.var.name, "sort": f.var.sort, "body": formula_to_json(f.body)}
    if isinstance(f, Not):
        return {"op": op, "body": formula_to_json(f.body)}
    return {"op": op, "args": [formula_to_json(f.left), formula_to_json(f.right)]}


def formula_from_json(d: dict) -> Formula:
    op = d["op"]
    if op == "true":
        return Top()
    if op == "false":
        return Bottom()
    if op == "eq":
        return Eq(term_from_json(d["args"][0]), term_from_json(d["args"][1]))
    if op == "rel":
        return Rel(d["name"], tuple(term_from_json(a) for a in d["args"]))
    if op in ("exists", "forall"):
        cls = Exists if op == "exists" else Forall
        return cls(Var(d["var"], d["sort"]), formula_from_json(d["body"]))
    if op == "not":
        return Not(formula_from_json(d["body"]))
    cls = {"and": And, "or": Or, "implies": Implies}[op]
    return cls(formula_from_json(d["args"][0]), formula_from_json(d["args"][1]))


def context_to_json(ctx: Iterable[Var]) -> list:
    return [{"var": v.name, "sort": v.sort} for v in ctx]


def context_from_json(items: list) -> tuple[Var, ...]:
    return tuple(Var(d["var"], d["sort"]) for d in items)


def sequent_to_json(s: Sequent) -> dict:
    return {"name": s.name, "context": context_to_json(s.context),
            "antecedent": formula_to_json(s.antecedent), "consequent": formula_to_json(s.consequent)}


def sequent_from_json(d: dict) -> Sequent:
    return Sequent(formula_from_json(d["antecedent"]), formula_from_json(d["consequent"]),
                   context_from_json(d["context"]), d.get("name", ""))


def signature_to_json(sig: Signature) -> dict:
    decls = []
    for kind, name in sig.order:
        if kind == "sort":
            desc = sig.sorts[name]
            entry: dict[str, Any] = {"decl": "sort", "name": name, "kind": desc.kind}
            if desc.components:
                entry["components"] = list(desc.components)
            if desc.maps:
                entry["maps"] = list(desc.maps)
            if desc.formula is not None:
                entry["params"] = context_to_json(desc.params)
                entry["formula"] = formula_to_json(desc.formula)
            decls.append(entry)
        elif kind == "fun":
            args, res = sig.functions[name]
            decls.append({"decl": "fun", "name": name, "args": list(args), "result": res})
        else:
            decls.append({"decl": "rel", "name": name, "args": list(sig.relations[name])})
    return {"declarations": decls}


def signature_from_json(d: dict) -> Signature:
    sig = Signature()
    for e in d["declarations"]:
        if e["decl"] == "sort":
            formula = formula_from_json(e["formula"]) if "formula" in e else None
            desc = SortDescriptor(e["name"], e["kind"], tuple(e.get("components", ())),
                                  tuple(e.get("maps", ())), context_from_json(e.get("params", [])), formula)
            sig = sig.with_sort(desc)
        elif e["decl"] == "fun":
            if e["name"] not in sig.functions:
                sig = sig.with_function(e["name"], e["args"], e["result"])
        else:
            sig = sig.with_relation(e["name"], e["args"])
    return sig


def theory_to_json(theory: Theory) -> dict:
    return {"format": FORMAT, "kind": "theory", "name": theory.name, "fragment": theory.fragment.keyword,
            "signature": signature_to_json(theory.signature),
            "axioms": [sequent_to_json(a) for a in theory.axioms]}


def theory_from_json(d: dict) -> Theory:
    return Theory(d["name"], signature_from_json(d["signature"]),
                  tuple(sequent_from_json(a) for a in d["axioms"]), Fragment.parse(d["fragment"]))


def dumps(obj: dict) -> str:
    return json.dumps(obj, sort_keys=False, ensure_ascii=False)
