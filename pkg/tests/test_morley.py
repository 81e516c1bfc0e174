import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from morita.dsl import parse_formula, parse_theory, print_sequent
from morita.extend import ExtensionSpec, check_admissibility, generate_schema
from morita.models import eval_formula, iter_models
from morita.morley import (
    MorleyPool, build_fomor_witness, forced_expansion, is_coherent_theory, model_correspondence, morleyize,
    morleyize_extension, structural_schemas, totality_schemas,
)
from morita.syntax import (
    TOP, And, Exists, Forall, Fragment, Implies, Not, Or, Rel, Sequent, Theory, Var, check_wellformed, min_fragment,
)

import oracle

x, y = Var("x", "S"), Var("y", "S")
P = lambda v: Rel("P", (v,))  # noqa: E731

FO = [parse_theory(t) for t in (
    """theory Sym fragment first-order
sorts S
rel R : S, S
axiom a: true |- (x:S) forall y:S. (R(x, y) -> R(y, x))
""",
    """theory Neg fragment first-order
sorts S
rel P : S
axiom a: true |- (x:S) not P(x) \\/ exists y:S. P(y)
""",
    """theory Contra fragment first-order
sorts S
rel P : S
rel Q : S
axiom a: P(x) -> Q(x) |- (x:S) not Q(x) -> not P(x)
axiom b: true |- () exists x:S. true
""",
)]


def test_universal_gets_only_a_d_pair():
    pool = MorleyPool().add_all([Forall(y, P(y))])
    f = pool.lookup(Forall(y, P(y)))
    mine = [s for s in structural_schemas(pool) if s.name.startswith(f"m{f.index}_")]
    assert [s.name for s in mine] == [f"m{f.index}_d_l", f"m{f.index}_d_r"]
    left, right = mine
    assert left.antecedent == Rel(f.d_name, ()) and right.consequent == Rel(f.d_name, ())
    body = left.consequent
    assert isinstance(body, Exists) and body.body == Rel(pool.lookup(P(y)).d_name, (body.var,))


def test_every_entry_gets_totality_and_disjointness():
    pool = MorleyPool.for_theory(FO[2])
    names = {s.name for s in totality_schemas(pool)}
    for e in pool.entries:
        assert {f"m{e.index}_total", f"m{e.index}_disjoint"} <= names


def test_atomic_entry_is_equivalent_to_its_atom():
    pool = MorleyPool().add_all([P(x)])
    e = pool.lookup(P(x))
    assert [print_sequent(s) for s in structural_schemas(pool)] == [
        f"{e.c_name}(x1) |- (x1:S) P(x1)", f"P(x1) |- (x1:S) {e.c_name}(x1)"]


def test_pool_identifies_alpha_variants_and_renamings():
    pool = MorleyPool().add_all([Exists(y, P(y)), Exists(x, P(x))])
    assert len(pool) == 2
    pool.add(P(y))
    assert len(pool) == 2


def test_pool_closure_is_idempotent():
    pool = MorleyPool.for_theory(FO[0])
    before = [e.formula for e in pool.entries]
    pool.add_all(before)
    assert [e.formula for e in pool.entries] == before and pool.is_closed()


def test_open_pool_is_rejected():
    pool = MorleyPool.for_theory(FO[1])
    dropped = pool.lookup(P(x))
    pool.entries.remove(dropped)
    del pool.by_key[dropped.formula]
    assert not pool.is_closed()
    with pytest.raises(ValueError):
        morleyize(FO[1], pool)


def test_single_point_model_of_a_universal_axiom():
    thy = parse_theory("theory U fragment coherent\nsorts S\nrel R : S\naxiom a: true |- (x:S) R(x)\n")
    pool = MorleyPool.for_theory(thy)
    rep = model_correspondence(thy, morleyize(thy, pool), pool, 1)
    # Size 0 and size 1 each contribute exactly one model.
    assert (rep.base_models, rep.morley_models) == (2, 2) and rep.ok
    _w, wit = build_fomor_witness(thy, pool, 1)
    assert wit.agree


def test_empty_theory_at_bound_zero():
    thy = parse_theory("theory E\nsorts S\n")
    pool = MorleyPool.for_theory(thy)
    rep = model_correspondence(thy, morleyize(thy, pool), pool, 0)
    assert (rep.base_models, rep.morley_models) == (1, 1)


def test_inhabited_theory_counts_agree():
    thy = parse_theory("theory I\nsorts S\nrel P : S\naxiom inh: true |- () exists x:S. true\n")
    pool = MorleyPool.for_theory(thy, [Not(P(x))])
    rep = model_correspondence(thy, morleyize(thy, pool), pool, 2)
    assert rep.ok and rep.base_models == oracle.count_models(thy, 2)


@pytest.mark.parametrize("thy", FO, ids=lambda t: t.name)
def test_first_order_theories(thy):
    pool = MorleyPool.for_theory(thy)
    m = morleyize(thy, pool)
    assert is_coherent_theory(m) and check_wellformed(m) == []
    assert model_correspondence(thy, m, pool, 2).ok
    assert build_fomor_witness(thy, pool, 2)[1].agree


def test_tautology_holds_in_every_morleyized_model():
    thy = FO[1]
    taut = Or(P(x), Not(P(x)))
    pool = MorleyPool.for_theory(thy, [taut])
    m = morleyize(thy, pool)
    for model in iter_models(m, 2, symmetry=False):
        for v in model.carriers["S"]:
            assert eval_formula(model, pool.c_atom(taut), {"x": v})


def test_subsort_over_universal_formula():
    thy = parse_theory("""theory F fragment first-order
sorts S
rel P : S
axiom inh: true |- () exists x:S. true
""")
    phi = Implies(P(x), Forall(y, P(y)))
    spec = ExtensionSpec.subsort("Sub", "S", x, phi, "i")
    pool = MorleyPool.for_theory(thy, [phi])
    mspec = morleyize_extension(spec, pool)
    assert mspec.formula == Rel(pool.lookup(phi).c_name, (x,))
    tm = morleyize(thy, pool)
    assert check_admissibility(mspec, tm).admissible
    assert print_sequent(generate_schema(mspec, tm)[-1]) == print_sequent(generate_schema(spec, thy)[-1])


def test_quotient_by_first_order_equivalence():
    thy = parse_theory("""theory F fragment first-order
sorts S
rel P : S
axiom inh: true |- () exists x:S. true
""")
    ctx, phi = parse_formula("(x:S, y:S) (P(x) -> P(y)) /\\ (P(y) -> P(x))", thy.signature)
    spec = ExtensionSpec.quotient("Q", "S", ctx, phi, "q")
    pool = MorleyPool.for_theory(thy, [phi])
    adm = check_admissibility(morleyize_extension(spec, pool), morleyize(thy, pool))
    assert adm.admissible
    assert {s.name for s, _o in adm.conditions} >= {"reflexive", "symmetric", "transitive"}


def test_extension_without_formula_is_unchanged():
    spec = ExtensionSpec.unit("One", "S")
    assert morleyize_extension(spec, MorleyPool()) is spec


# ----------------------------------------------------------- properties

SMALL = parse_theory("theory G fragment first-order\nsorts S\nrel P : S\nrel E : S, S\n")


def small_formulas():
    leaf = st.sampled_from([P(x), P(y), Rel("E", (x, y)), Rel("E", (y, x)), TOP])
    qv = st.sampled_from([x, y])

    def grow(kids):
        return st.one_of(
            st.builds(And, kids, kids), st.builds(Or, kids, kids),
            st.builds(Not, kids), st.builds(Implies, kids, kids),
            st.builds(Exists, qv, kids), st.builds(Forall, qv, kids))
    return st.recursive(leaf, grow, max_leaves=3)


def theory_of(pairs):
    axioms = tuple(Sequent(a, c, (x, y), f"a{i}") for i, (a, c) in enumerate(pairs))
    return Theory("G", SMALL.signature, axioms, Fragment.FIRST_ORDER)


@settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.lists(st.tuples(small_formulas(), small_formulas()), min_size=1, max_size=2))
def test_output_is_coherent_and_wellformed(pairs):
    m = morleyize(theory_of(pairs))
    assert is_coherent_theory(m) and check_wellformed(m) == []
    assert all(max(min_fragment(a.antecedent), min_fragment(a.consequent)) <= Fragment.COHERENT for a in m.axioms)


@settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.tuples(small_formulas(), small_formulas()))
def test_morleyized_models_are_forced_and_match(pair):
    thy = theory_of([pair])
    pool = MorleyPool.for_theory(thy)
    m = morleyize(thy, pool)
    rep = model_correspondence(thy, m, pool, 1)
    assert rep.ok
    # Every C relation of a Morleyized model is the oracle's truth set of its formula.
    for model in iter_models(m, 1, symmetry=False):
        it = oracle.from_finite_model(model.reduct(thy.signature))
        for e in pool.entries:
            for env in oracle.envs(it, e.context):
                combo = tuple(env[v.name] for v in e.context)
                assert (combo in model.relations[e.c_name]) == oracle.holds(e.formula, it, env)


@settings(max_examples=25, deadline=None)
@given(small_formulas())
def test_forced_expansion_agrees_with_oracle(f):
    pool = MorleyPool().add_all([f])
    sig = morleyize(Theory("G", SMALL.signature), pool).signature
    for model in iter_models(SMALL, 2, symmetry=False):
        exp = forced_expansion(model, pool, sig)
        it = oracle.from_finite_model(model)
        e = pool.lookup(f)
        for env in oracle.envs(it, e.context):
            combo = tuple(env[v.name] for v in e.context)
            assert (combo in exp.relations[e.c_name]) == oracle.holds(e.formula, it, env)
            assert (combo in exp.relations[e.d_name]) != (combo in exp.relations[e.c_name])
