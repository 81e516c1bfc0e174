from hypothesis import given, settings
from hypothesis import strategies as st

from morita.dsl import parse_theory
from morita.extend import ExtensionSpec, apply_extension_unchecked
from morita.morley import morleyize
from morita.syntax import (
    BOTTOM, TOP, And, App, Eq, Exists, Forall, Fragment, Rel, Sequent, Signature, Theory, Var,
    canonicalize, check_wellformed, conj, free_vars, min_fragment, substitute,
)

from strategies import VARS, formulas, substitutions

x, y, z = (Var(n, "S") for n in "xyz")


def test_equality_sort_mismatch_is_reported():
    sig = Signature.build(["A", "B"])
    a, b = Var("x", "A"), Var("y", "B")
    thy = Theory("T", sig, (Sequent(TOP, Eq(a, b), (a, b), "bad"),))
    messages = [d.message for d in check_wellformed(thy)]
    assert any("sort mismatch in equality" in m for m in messages)


def test_empty_theory_is_wellformed():
    assert check_wellformed(Theory("E", Signature())) == []


def test_forall_outside_coherent_fragment():
    sig = Signature.build(["S"])
    thy = Theory("T", sig, (Sequent(TOP, Forall(x, Eq(x, x)), (), "a"),), Fragment.COHERENT)
    assert any("constructor outside fragment" in d.message for d in check_wellformed(thy))


def test_substitution_avoids_capture():
    out = substitute(Exists(y, Eq(x, y)), {x: y})
    assert isinstance(out, Exists)
    assert out.var.name != "y"
    assert out.body == Eq(y, out.var)


def test_substitution_into_relation():
    fz = App("f", (z,), "S")
    assert substitute(Rel("R", (x,)), {x: fz}) == Rel("R", (fz,))


def test_empty_substitution_is_identity():
    f = Exists(y, And(Rel("R", (x,)), Eq(x, y)))
    assert substitute(f, {}) is f


def test_alpha_variants_share_canonical_form():
    assert canonicalize(Exists(y, Eq(x, y)), [x]) == canonicalize(Exists(z, Eq(x, z)), [x])


def test_equality_is_not_symmetrized():
    assert canonicalize(Eq(x, y), [x, y]) != canonicalize(Eq(y, x), [x, y])


def test_min_fragment_levels():
    assert min_fragment(conj(Eq(x, x), Exists(y, Eq(x, y)))) == Fragment.REGULAR
    assert min_fragment(BOTTOM) == Fragment.COHERENT
    assert min_fragment(Forall(x, TOP)) == Fragment.FIRST_ORDER


def _compose(sigma: dict, tau: dict) -> dict:
    """The substitution doing ``sigma`` then ``tau``."""
    out = {v: substitute(Eq(t, t), tau).left for v, t in sigma.items()}
    for v, t in tau.items():
        out.setdefault(v, t)
    return out


@settings(max_examples=150, deadline=None)
@given(formulas(first_order=True), substitutions(), substitutions())
def test_substitution_composes(f, sigma, tau):
    left = substitute(substitute(f, sigma), tau)
    right = substitute(f, _compose(sigma, tau))
    assert canonicalize(left, VARS) == canonicalize(right, VARS)


@settings(max_examples=150, deadline=None)
@given(formulas(first_order=True))
def test_canonicalize_is_idempotent(f):
    once = canonicalize(f, VARS)
    assert canonicalize(once, VARS) == once


@settings(max_examples=150, deadline=None)
@given(formulas(first_order=True), st.permutations(VARS))
def test_canonicalize_commutes_with_injective_renaming(f, perm):
    ren = dict(zip(VARS, perm))
    renamed = substitute(f, ren)
    assert canonicalize(renamed, perm) == substitute(canonicalize(f, VARS), ren)
    assert {v.name for v in free_vars(renamed)} <= {v.name for v in VARS}


BASE = parse_theory("""theory B fragment coherent
sorts A, B
rel R : A
axiom inhA: true |- () exists x:A. true
axiom inhB: true |- () exists y:B. true
""")


def test_extended_theories_are_wellformed():
    a = Var("x", "A")
    specs = [ExtensionSpec.product("P", ["A", "B"], ["p1", "p2"]),
             ExtensionSpec.coproduct("C", ["A", "B"], ["c1", "c2"]),
             ExtensionSpec.subsort("SR", "A", a, Rel("R", (a,)), "i"),
             ExtensionSpec.quotient("Q", "A", (a, Var("y", "A")), TOP, "q"),
             ExtensionSpec.unit("One", "A"), ExtensionSpec.empty("Zero", "A")]
    thy = BASE
    for spec in specs:
        thy = apply_extension_unchecked(thy, spec)
        assert check_wellformed(thy) == []


def test_morleyized_theory_is_wellformed():
    fo = parse_theory("""theory F fragment first-order
sorts S
rel R : S
axiom a: true |- (x:S) forall y:S. (R(y) -> R(x))
""")
    assert check_wellformed(morleyize(fo)) == []

