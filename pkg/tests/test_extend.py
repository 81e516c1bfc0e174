import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from morita.dsl import parse_formula, parse_sequent, parse_theory, print_sequent, print_theory
from morita.extend import (
    ExtensionError, ExtensionSpec, MoritaChain, apply_extension, apply_extension_unchecked, build_chain,
    check_admissibility, check_conservativity, expand_model, generate_schema, invert, mutually_derivable,
    rename_disjoint, rename_symbols, verify_span,
)
from morita.models import FiniteModel, is_model, iter_models
from morita.syntax import (
    BOTTOM, TOP, Fragment, Rel, Var, check_wellformed, free_vars, min_fragment, substitute,
)

from strategies import SIG_TEXT, formulas

BASE = parse_theory("""theory B fragment coherent
sorts A, B
rel R : A
axiom inhA: true |- () exists x:A. true
axiom inhB: true |- () exists y:B. true
""")
a, a2 = Var("x", "A"), Var("y", "A")


def printed(spec, base=BASE):
    return [print_sequent(s) for s in generate_schema(spec, base)]


def test_product_schema_shape():
    assert printed(ExtensionSpec.product("P", ["A", "B"], ["p1", "p2"])) == [
        "true |- (x1:A, x2:B) exists p:P. (p1(p) = x1 /\\ p2(p) = x2)",
        "(p1(p) = x1 /\\ p2(p) = x2) /\\ p1(q) = x1 /\\ p2(q) = x2 |- (x1:A, x2:B, p:P, q:P) p = q",
    ]


def test_empty_subsort_schema_shape():
    assert printed(ExtensionSpec.subsort("Z", "A", a, BOTTOM, "i")) == [
        "false |- (x:A) exists y:Z. i(y) = x",
        "exists y:Z. i(y) = x |- (x:A) false",
        "i(x) = i(y) |- (x:Z, y:Z) x = y",
    ]


def test_unary_coproduct_has_no_disjointness():
    names = [s.name for s in generate_schema(ExtensionSpec.coproduct("C", ["A"], ["c"]), BASE)]
    assert names == ["cop1_C", "cop2_1_C"]
    assert printed(ExtensionSpec.coproduct("C", ["A"], ["c"]))[0] == "true |- (x:C) exists x1:A. c(x1) = x"


def test_total_quotient_is_admissible():
    total = parse_formula("(x:A, y:A) x = x /\\ y = y", BASE.signature)[1]
    spec = ExtensionSpec.quotient("Q", "A", (a, a2), total, "q")
    adm = check_admissibility(spec, BASE)
    assert adm.admissible
    assert {s.name for s, _o in adm.conditions} >= {"reflexive", "symmetric", "transitive"}


def test_product_over_uninhabited_sort_is_blocked():
    bare = parse_theory("theory N\nsorts A, B\naxiom inhA: true |- () exists x:A. true\n")
    spec = ExtensionSpec.product("P", ["A", "B"], ["p1", "p2"])
    assert not check_admissibility(spec, bare).admissible
    with pytest.raises(ExtensionError):
        apply_extension(bare, spec)


def test_defined_function_from_functional_relation():
    thy = parse_theory("""theory F
sorts S
rel G : S, S
axiom tot: true |- (x:S) exists y:S. G(x, y)
axiom uniq: G(x, y) /\\ G(x, z) |- (x:S, y:S, z:S) y = z
""")
    x, y = Var("x", "S"), Var("y", "S")
    spec = ExtensionSpec.function("g", (x,), y, Rel("G", (x, y)))
    adm = check_admissibility(spec, thy)
    assert adm.admissible
    assert all(o.steps < 100 for _s, o in adm.conditions)


def test_product_application_counts():
    out = apply_extension(BASE, ExtensionSpec.product("P", ["A", "B"], ["p1", "p2"]))
    assert len(out.signature.sorts) == 3
    assert len(out.signature.functions) == 2
    assert len(out.axioms) == len(BASE.axioms) + 2


def test_coproduct_rejected_in_cartesian_theory():
    cart = parse_theory("theory C fragment cartesian\nsorts A\naxiom inh: true |- () exists x:A. true\n")
    with pytest.raises(ExtensionError):
        apply_extension(cart, ExtensionSpec.coproduct("C", ["A", "A"], ["l", "r"]))


def test_unit_empty_subsort_chain():
    chain = build_chain(BASE, [ExtensionSpec.unit("One", "A"), ExtensionSpec.empty("Zero", "A"),
                               ExtensionSpec.subsort("All", "A", a, TOP, "i")])
    assert len(chain.steps) == 3
    assert all(check_wellformed(t) == [] for t in chain.stages())
    assert chain.validate() == []


def test_product_expansion_has_four_elements():
    one = parse_theory("theory O\nsorts A\naxiom inh: true |- () exists x:A. true\n")
    spec = ExtensionSpec.product("AA", ["A", "A"], ["l", "r"])
    ext = apply_extension(one, spec)
    m = FiniteModel(one.signature, {"A": (0, 1)})
    big = expand_model(m, spec, ext.signature)
    assert len(big.carriers["AA"]) == 4
    assert is_model(big, ext)


def test_empty_subsort_expansion():
    spec = ExtensionSpec.subsort("Z", "A", a, BOTTOM, "i")
    ext = apply_extension_unchecked(BASE, spec)
    m = next(iter_models(BASE, 2))
    big = expand_model(m, spec, ext.signature)
    assert big.carriers["Z"] == ()
    assert is_model(big, ext)


def test_total_quotient_expansion_is_a_point():
    spec = ExtensionSpec.quotient("Q", "A", (a, a2), TOP, "q")
    ext = apply_extension_unchecked(BASE, spec)
    m = FiniteModel(BASE.signature, {"A": (0, 1, 2), "B": (0,)}, {}, {"R": frozenset()})
    big = expand_model(m, spec, ext.signature)
    assert len(big.carriers["Q"]) == 1
    assert is_model(big, ext)


def test_renaming_primes_shared_symbols_and_inverts():
    other = parse_theory("theory O\nsorts A, C\n")
    renamed, mapping = rename_disjoint(BASE, other)
    assert mapping == {"A": "A'"}
    assert "A'" in renamed.signature.sorts and "A" not in renamed.signature.sorts
    assert "A'" in print_theory(renamed)
    assert rename_symbols(renamed, invert(mapping)) == BASE


def test_disjoint_renaming_is_identity():
    other = parse_theory("theory O\nsorts C\n")
    assert rename_disjoint(BASE, other) == (BASE, {})


def test_extension_is_deterministic():
    spec = ExtensionSpec.coproduct("C", ["A", "B", "A"], ["c1", "c2", "c3"])
    assert print_theory(apply_extension_unchecked(BASE, spec)) == print_theory(apply_extension_unchecked(BASE, spec))


def test_span_verdicts():
    left = build_chain(BASE, [ExtensionSpec.product("P", ["A", "B"], ["p1", "p2"])])
    right = build_chain(BASE, [ExtensionSpec.product("P", ["A", "B"], ["p1", "p2"]),
                               ExtensionSpec.relation("D", (a,), Rel("R", (a,)))])
    assert verify_span(left, left).status == "proved"
    assert mutually_derivable(left.final, right.final).status == "refuted"


def test_conservativity_report_for_coproduct():
    chain = build_chain(BASE, [ExtensionSpec.coproduct("C", ["A", "B"], ["c1", "c2"])])
    samples = [parse_sequent("R(x) |- (x:A) false", BASE.signature),
               parse_sequent("true |- () exists x:A. R(x) \\/ true", BASE.signature)]
    rep = check_conservativity(BASE, chain.final, chain, samples, bound=2)
    assert [(e, b) for _s, e, b in rep.syntactic] == [("refuted", "-"), ("proved", "proved")]
    assert rep.ok and rep.models_checked > 0


TOY = parse_theory(SIG_TEXT + "axiom inh: true |- () exists x:S. true\n")
S = Var("x", "S")


def _closed_in(f, var):
    extra = [v for v in free_vars(f) if v != var]
    return substitute(f, {v: var for v in extra})


@settings(max_examples=60, deadline=None)
@given(formulas(first_order=False, max_leaves=4), st.sampled_from(["subsort", "relation"]))
def test_extensions_stay_in_fragment(f, kind):
    body = _closed_in(f, S)
    spec = (ExtensionSpec.subsort("Sub", "S", S, body, "i") if kind == "subsort"
            else ExtensionSpec.relation("Def", (S,), body))
    out = apply_extension_unchecked(TOY, spec)
    assert check_wellformed(out) == []
    assert all(max(min_fragment(ax.antecedent), min_fragment(ax.consequent)) <= Fragment.COHERENT
               for ax in out.axioms)


@settings(max_examples=30, deadline=None)
@given(formulas(first_order=False, max_leaves=4))
def test_relation_expansion_satisfies_schema(f):
    body = _closed_in(f, S)
    spec = ExtensionSpec.relation("Def", (S,), body)
    ext = apply_extension_unchecked(TOY, spec)
    chain = MoritaChain(TOY, [(spec, ext)])
    assert check_conservativity(TOY, ext, chain, bound=2).ok
