"""End-to-end acceptance checks, one test per criterion.

Each test prints a single PASS/FAIL line; the lines are repeated in the
terminal summary of the pytest run.
"""
import functools
import itertools
import random
import time

from morita.chase import derive
from morita.codes import Recoder, all_codes, base_only, check_code_lemmas, equivalence_sequents, recombine
from morita.dsl import parse_theory, print_sequent
from morita.extend import (
    ExtensionSpec, MoritaChain, apply_extension, check_admissibility, expand_model, generate_schema,
)
from morita.models import eval_formula, is_model, iter_models
from morita.morley import (
    MorleyPool, build_fomor_witness, is_coherent_theory, model_correspondence, morleyize, morleyize_extension,
)
from morita.outcome import Budget, Proved, Refuted
from morita.syncat import SynObject, build_fragment, build_hat_fragment, build_tilde_fragment, \
    check_cover_hypothesis, compare_fragments
from morita.syntax import (
    BOTTOM, TOP, And, App, Eq, Exists, Forall, Implies, Or, Rel, Sequent, Var, check_wellformed,
)

import oracle
from acceptance_log import report

# ------------------------------------------------------------ criterion 1

SCHEMA_BASE = parse_theory("""theory B fragment coherent
sorts A, B
rel R : A
axiom inhA: true |- () exists x:A. true
axiom inhB: true |- () exists y:B. true
""")
_x, _y = Var("x", "A"), Var("y", "A")

GOLDEN = {
    ExtensionSpec.product("P", ["A", "B"], ["pa", "pb"]): [
        "true |- (x1:A, x2:B) exists p:P. (pa(p) = x1 /\\ pb(p) = x2)",
        "(pa(p) = x1 /\\ pb(p) = x2) /\\ pa(q) = x1 /\\ pb(q) = x2 |- (x1:A, x2:B, p:P, q:P) p = q",
    ],
    ExtensionSpec.coproduct("C", ["A", "B"], ["ca", "cb"]): [
        "true |- (x:C) exists x1:A. ca(x1) = x \\/ exists x2:B. cb(x2) = x",
        "ca(x1) = x /\\ ca(x1') = x |- (x1:A, x1':A, x:C) x1 = x1'",
        "cb(x2) = x /\\ cb(x2') = x |- (x2:B, x2':B, x:C) x2 = x2'",
        "ca(x1) = x /\\ cb(x2) = x |- (x1:A, x2:B, x:C) false",
    ],
    ExtensionSpec.subsort("SR", "A", _x, Rel("R", (_x,)), "i"): [
        "R(x) |- (x:A) exists y:SR. i(y) = x",
        "exists y:SR. i(y) = x |- (x:A) R(x)",
        "i(x) = i(y) |- (x:SR, y:SR) x = y",
    ],
    ExtensionSpec.subsort("S0", "A", _x, BOTTOM, "j"): [
        "false |- (x:A) exists y:S0. j(y) = x",
        "exists y:S0. j(y) = x |- (x:A) false",
        "j(x) = j(y) |- (x:S0, y:S0) x = y",
    ],
    ExtensionSpec.quotient("Q", "A", (_x, _y), And(Eq(_x, _x), Eq(_y, _y)), "q"): [
        "q(x) = q(y) |- (x:A, y:A) x = x /\\ y = y",
        "x = x /\\ y = y |- (x:A, y:A) q(x) = q(y)",
        "true |- (x:Q) exists y:A. q(y) = x",
    ],
    ExtensionSpec.unit("One", "A"): [
        "true |- () exists x:One. x = x",
        "true |- (x:One, x':One) x = x'",
        "bang_A(x) = y |- (x:A, y:One) x = x /\\ y = y",
        "x = x /\\ y = y |- (x:A, y:One) bang_A(x) = y",
        "bang_B(x) = y |- (x:B, y:One) x = x /\\ y = y",
        "x = x /\\ y = y |- (x:B, y:One) bang_B(x) = y",
    ],
    ExtensionSpec.empty("Zero", "A"): [
        "x = x |- (x:Zero) false",
        "zero_A(x) = y |- (x:Zero, y:A) false",
        "false |- (x:Zero, y:A) zero_A(x) = y",
        "zero_B(x) = y |- (x:Zero, y:B) false",
        "false |- (x:Zero, y:B) zero_B(x) = y",
    ],
}


def test_criterion_1_schema_goldens():
    t0 = time.perf_counter()
    mismatches = [spec.name for spec, want in GOLDEN.items()
                  if [print_sequent(s) for s in generate_schema(spec, SCHEMA_BASE)] != want]
    dt = time.perf_counter() - t0
    ok = not mismatches and dt < 1
    report(1, "schema goldens", ok, f"{len(GOLDEN)} kinds, mismatches={mismatches}", dt)
    assert ok


# ---------------------------------------------------------- criteria 2-4

TOY2 = parse_theory("""theory T fragment coherent
sorts A, B
rel R : A, B
rel P : A
axiom inhA: true |- () exists x:A. true
axiom inhB: true |- () exists x:B. true
""")
a, a2 = Var("a", "A"), Var("a'", "A")
b = Var("b", "B")

SPECS = {
    "product": ExtensionSpec.product("AxB", ["A", "B"], ["pi1", "pi2"]),
    "coproduct": ExtensionSpec.coproduct("ApB", ["A", "B"], ["rho1", "rho2"]),
    "subsort": ExtensionSpec.subsort("SA", "A", a, Rel("P", (a,)), "i"),
    "empty_subsort": ExtensionSpec.subsort("Z", "A", a, BOTTOM, "iz"),
    "quotient": ExtensionSpec.quotient("Q", "A", (a, a2), TOP, "eps"),
    "unit": ExtensionSpec.unit("One", "A"),
    "empty": ExtensionSpec.empty("Zero", "A"),
}


@functools.lru_cache(maxsize=None)
def step(kind):
    spec = SPECS[kind]
    ext = apply_extension(TOY2, spec)
    return spec, ext, MoritaChain(TOY2, [(spec, ext)]), Recoder(TOY2.signature, ext.signature, [spec])


def test_criterion_2_code_lemmas():
    t0 = time.perf_counter()
    bad, checked, skipped_ok = [], 0, True
    for kind in SPECS:
        spec, ext, _c, _r = step(kind)
        for code in all_codes(ext.signature, [Var("z", spec.name)]):
            results = check_code_lemmas(code, ext)
            names = [s.name for s, _o in results]
            if kind in ("subsort", "empty_subsort") and "codes_onto" in names:
                skipped_ok = False
            checked += len(results)
            bad += [(kind, s.name, o.status) for s, o in results if o.status != "proved"]
    dt = time.perf_counter() - t0
    ok = not bad and skipped_ok and dt < 30
    report(2, "code lemmas", ok, f"{checked} sequents proved, failures={bad}", dt)
    assert ok


def _fn(name, arg, sort):
    return App(name, (arg,), sort)


def recoding_cases():
    """(kind, formula, context) covering every recoding case."""
    z, w = Var("z", "AxB"), Var("w", "AxB")
    u, v = Var("u", "ApB"), Var("v", "ApB")
    s, t = Var("s", "SA"), Var("t", "SA")
    q, r = Var("q", "Q"), Var("r", "Q")
    e, e2 = Var("e", "Z"), Var("e'", "Z")
    P = Rel("P", (a,))
    return [
        ("product", Rel("R", (a, b)), (a, b)),
        ("product", Eq(z, w), (z, w)),
        ("product", Eq(_fn("pi1", z, "A"), a), (z, a)),
        ("product", Rel("R", (_fn("pi1", z, "A"), _fn("pi2", z, "B"))), (z,)),
        ("product", And(Eq(_fn("pi1", z, "A"), a), P), (z, a)),
        ("product", Exists(a, And(Eq(_fn("pi1", z, "A"), a), P)), (z,)),
        ("product", Exists(z, Eq(_fn("pi2", z, "B"), b)), (b,)),
        ("coproduct", Eq(u, v), (u, v)),
        ("coproduct", Eq(_fn("rho1", a, "ApB"), u), (a, u)),
        ("coproduct", Or(Eq(u, v), Eq(_fn("rho2", b, "ApB"), u)), (u, v, b)),
        ("coproduct", Exists(u, Eq(_fn("rho1", a, "ApB"), u)), (a,)),
        ("coproduct", Exists(a, Eq(_fn("rho1", a, "ApB"), u)), (u,)),
        ("subsort", Eq(s, t), (s, t)),
        ("subsort", Eq(_fn("i", s, "A"), a), (s, a)),
        ("subsort", Rel("R", (_fn("i", s, "A"), b)), (s, b)),
        ("subsort", Exists(s, Eq(_fn("i", s, "A"), a)), (a,)),
        ("subsort", Or(Eq(s, t), Rel("P", (_fn("i", t, "A"),))), (s, t)),
        ("quotient", Eq(q, r), (q, r)),
        ("quotient", Eq(_fn("eps", a, "Q"), q), (a, q)),
        ("quotient", Exists(q, Eq(_fn("eps", a, "Q"), q)), (a,)),
        ("quotient", And(Eq(_fn("eps", a, "Q"), q), P), (a, q)),
        ("empty_subsort", Eq(e, e2), (e, e2)),
        ("empty_subsort", Exists(e, Eq(_fn("iz", e, "A"), a)), (a,)),
        ("empty_subsort", Or(P, Exists(e, Eq(e, e))), (a,)),
    ]


@functools.lru_cache(maxsize=None)
def small_models(kind):
    return list(iter_models(step(kind)[1], 2, symmetry=False))


def _envs(model, ctx):
    for combo in itertools.product(*(model.carriers[v.sort] for v in ctx)):
        yield dict(zip((v.name for v in ctx), combo))


def test_criterion_3_recoding_equivalence():
    t0 = time.perf_counter()
    cases = recoding_cases()
    failures = []
    for kind, f, ctx in cases:
        _spec, ext, _c, rec = step(kind)
        ds = rec.recode(f, ctx)
        if not all(base_only(d.body, TOY2.signature) for d in ds):
            failures.append((kind, str(f), "scan"))
        for seq in equivalence_sequents(f, ctx, ds):
            if derive(ext, seq).status != "proved":
                failures.append((kind, str(f), seq.name or "derive"))
        rhs = recombine(ds)
        for m in small_models(kind):
            if any(eval_formula(m, f, env) != eval_formula(m, rhs, env) for env in _envs(m, ctx)):
                failures.append((kind, str(f), "models"))
                break
    dt = time.perf_counter() - t0
    ok = len(cases) >= 20 and not failures and dt < 300
    report(3, "recoding equivalence", ok, f"{len(cases)} formulas, failures={failures}", dt)
    assert ok


def cover_objects(kind):
    """Objects over (z:new, a:A) whose formula has at most three nodes."""
    spec, ext, _c, _r = step(kind)
    z, w = Var("z", spec.name), Var("w", spec.name)
    atoms = [Eq(z, z), Rel("P", (a,))]
    for fn, (args, res) in ext.signature.functions.items():
        if fn in TOY2.signature.functions or len(args) != 1:
            continue
        if args[0] == spec.name and res == "A":
            atoms.append(Eq(_fn(fn, z, res), a))
        elif args[0] == "A" and res == spec.name:
            atoms.append(Eq(_fn(fn, a, res), z))
        elif args[0] == spec.name:
            atoms.append(Exists(w, Eq(_fn(fn, z, res), _fn(fn, w, res))))
    size1 = [TOP, BOTTOM] + atoms
    size2 = [Exists(b, Rel("R", (a, b)))] + [Exists(w, f) for f in atoms if w not in _vars(f)] + \
        [Exists(z, f) for f in atoms if a in _vars(f) and z in _vars(f)]
    size3 = [op(f, g) for f, g in itertools.combinations(atoms, 2) for op in (And, Or)]
    ctx = (z, a)
    objs = {SynObject.of(ctx, f) for f in size1 + size2 + size3}
    return sorted(objs, key=str)


def _vars(f):
    from morita.syntax import free_vars
    return set(free_vars(f))


def test_criterion_4_cover_hypothesis():
    t0 = time.perf_counter()
    total, failures = 0, []
    for kind in SPECS:
        _spec, ext, chain, _r = step(kind)
        objs = cover_objects(kind)
        total += len(objs)
        rep = check_cover_hypothesis(TOY2, ext, chain, objs)
        for entry in rep.entries:
            funct = all(len(m.checks) == 3 and all(o.status == "proved" for _s, o in m.checks)
                        for m in entry.report.morphisms)
            if entry.status != "proved" or not funct:
                failures.append((kind, str(entry.obj)))
    dt = time.perf_counter() - t0
    ok = not failures and dt < 300
    report(4, "cover hypothesis", ok, f"{total} objects, failures={failures[:5]}", dt)
    assert ok


# ------------------------------------------------------------ criterion 5

CONS_BASE = parse_theory("""theory C fragment coherent
sorts A, B
rel R : A, B
axiom inhA: true |- () exists x:A. true
axiom inhB: true |- () exists y:B. true
""")


def conservativity_specs():
    x, y = Var("x", "A"), Var("y", "B")
    x1, x2 = Var("x1", "A"), Var("x2", "A")
    has_r = Exists(y, Rel("R", (x, y)))
    related = lambda u, v: Exists(y, And(Rel("R", (u, y)), Rel("R", (v, y))))  # noqa: E731
    return [
        ExtensionSpec.product("AxB", ["A", "B"], ["p1", "p2"]),
        ExtensionSpec.coproduct("ApB", ["A", "B"], ["c1", "c2"]),
        ExtensionSpec.subsort("Dom", "A", x, has_r, "i"),
        ExtensionSpec.subsort("None", "A", x, BOTTOM, "j"),
        ExtensionSpec.quotient("Pt", "A", (x1, x2), And(Eq(x1, x1), Eq(x2, x2)), "q"),
        ExtensionSpec.quotient("Eq", "A", (x1, x2), Eq(x1, x2), "e"),
        ExtensionSpec.unit("One", "A"),
        ExtensionSpec.empty("Zero", "A"),
        ExtensionSpec.relation("Rel2", (x1, x2), Or(Eq(x1, x2), related(x1, x2))),
        ExtensionSpec.function("ident", (x1,), x2, Eq(x1, x2)),
    ]


def test_criterion_5_conservativity():
    t0 = time.perf_counter()
    failures, models, kinds = [], 0, set()
    base_models = list(iter_models(CONS_BASE, 3, symmetry=False))
    for spec in conservativity_specs():
        kinds.add(spec.kind.name)
        ext = apply_extension(CONS_BASE, spec)
        schema = generate_schema(spec, CONS_BASE)
        for m in base_models:
            models += 1
            big = expand_model(m, spec, ext.signature)
            if big is None or not is_model(big, ext) or not is_model(big, schema):
                failures.append((spec.name, m.key()))
    dt = time.perf_counter() - t0
    ok = not failures and dt < 120
    report(5, "conservativity", ok, f"{len(kinds)} kinds, {len(base_models)} base models, "
           f"{models} expansions, failures={len(failures)}", dt)
    assert ok


# ------------------------------------------------------------ criterion 6

FIRST_ORDER = [
    """theory WithForall fragment first-order
sorts S
rel R : S, S
axiom a: true |- (x:S) forall y:S. (R(x, y) -> R(y, x))
""",
    """theory WithNot fragment first-order
sorts S
rel P : S
axiom a: true |- (x:S) not P(x) \\/ exists y:S. P(y)
""",
    """theory WithImplies fragment first-order
sorts S
rel P : S
rel Q : S
axiom a: P(x) -> Q(x) |- (x:S) not Q(x) -> not P(x)
axiom b: true |- () exists x:S. true
""",
]


def test_criterion_6_morleyization():
    t0 = time.perf_counter()
    details = []
    ok = True
    for text in FIRST_ORDER:
        thy = parse_theory(text)
        pool = MorleyPool.for_theory(thy)
        m = morleyize(thy, pool)
        gate = is_coherent_theory(m) and check_wellformed(m) == []
        corr = model_correspondence(thy, m, pool, 2)
        _w, wit = build_fomor_witness(thy, pool, 2)
        ok &= gate and corr.ok and wit.agree
        details.append(f"{thy.name}:{corr.base_models}/{corr.morley_models}")
    thy = parse_theory("""theory Sub fragment first-order
sorts S
rel P : S
axiom inh: true |- () exists x:S. true
""")
    x, y = Var("x", "S"), Var("y", "S")
    phi = Implies(Rel("P", (x,)), Forall(y, Rel("P", (y,))))
    pool = MorleyPool.for_theory(thy, [phi])
    spec = morleyize_extension(ExtensionSpec.subsort("Sub", "S", x, phi, "i"), pool)
    tm = morleyize(thy, pool)
    adm = check_admissibility(spec, tm)
    ext_ok = adm.admissible and is_coherent_theory(apply_extension(tm, spec))
    ok &= ext_ok
    dt = time.perf_counter() - t0
    ok &= dt < 300
    report(6, "Morleyization", ok, f"models {' '.join(details)}, subsort extension admissible={ext_ok}", dt)
    assert ok


# ------------------------------------------------------------ criterion 7

FRAGMENT_THEORY = parse_theory("""theory Toy fragment coherent
sorts S
fun f : S -> S
rel R : S
axiom inh: true |- () exists x:S. true
axiom pres: R(x) |- (x:S) R(f(x))
""")


def test_criterion_7_hat_and_tilde():
    t0 = time.perf_counter()
    x, y = Var("x", "S"), Var("y", "S")
    R = lambda t: Rel("R", (t,))  # noqa: E731
    f = lambda t: App("f", (t,), "S")  # noqa: E731
    pool = [SynObject.of([x]), SynObject.of([x], R(x)), SynObject.of([x], Eq(f(x), x)),
            SynObject.of([x, y], Eq(f(x), y)), SynObject.of([x], R(f(x)))]
    frag = build_fragment(FRAGMENT_THEORY, pool)
    hat = build_hat_fragment(FRAGMENT_THEORY, frag)
    tilde = build_tilde_fragment(FRAGMENT_THEORY, frag)
    cmp = compare_fragments(hat, tilde, sample=12, budget=Budget(steps=3000))
    counts = cmp.counts()
    refuted = counts["hat_in_tilde"]["refuted"] + counts["tilde_in_hat"]["refuted"]
    dt = time.perf_counter() - t0
    ok = cmp.mutually_proved() >= 10 and refuted == 0 and dt < 600
    report(7, "hat/tilde fragments", ok, f"{len(hat.theory.axioms)}/{len(tilde.theory.axioms)} axioms, "
           f"mutually proved {cmp.mutually_proved()} of 12, counts={counts}", dt)
    assert ok


# ------------------------------------------------------------ criterion 8

MIX = parse_theory("""theory G fragment coherent
sorts S
fun f : S -> S
rel R : S
rel E : S, S
axiom sym: E(x, y) |- (x:S, y:S) E(y, x)
axiom ser: R(x) |- (x:S) exists y:S. E(x, y)
axiom split: E(x, x) |- (x:S) R(x) \\/ R(f(x))
axiom clash: R(f(x)) /\\ R(x) |- (x:S) false
""")
VX, VY, VZ = Var("x", "S"), Var("y", "S"), Var("z", "S")


def random_term(rng, names, depth=2):
    t = rng.choice(names)
    for _ in range(rng.randint(0, depth)):
        t = App("f", (t,), "S")
    return t


def random_formula(rng, names, size):
    if size <= 1:
        pick = rng.random()
        if pick < 0.1:
            return rng.choice([TOP, BOTTOM])
        if pick < 0.4:
            return Rel("R", (random_term(rng, names),))
        if pick < 0.75:
            return Rel("E", (random_term(rng, names), random_term(rng, names)))
        return Eq(random_term(rng, names), random_term(rng, names))
    kind = rng.choice(["and", "or", "exists"])
    if kind == "exists":
        v = Var(f"w{size}", "S")
        return Exists(v, random_formula(rng, names + [v], size - 1))
    left = rng.randint(1, size - 1)
    op = And if kind == "and" else Or
    return op(random_formula(rng, names, left), random_formula(rng, names, size - left))


def random_sequent(rng):
    ctx = [VX, VY, VZ]
    return Sequent(random_formula(rng, ctx, rng.randint(1, 3)), random_formula(rng, ctx, rng.randint(1, 3)),
                   tuple(ctx))


def test_criterion_8_prover_integrity():
    t0 = time.perf_counter()
    rng = random.Random(20240601)
    models = list(oracle.models(MIX.signature, MIX.axioms, 2))
    tally = {"proved": 0, "refuted": 0, "unknown": 0}
    bad = []
    for i in range(100):
        g = random_sequent(rng)
        out = derive(MIX, g, Budget(steps=2000, branches=48))
        tally[out.status] += 1
        if isinstance(out, Proved):
            if not all(oracle.sequent_holds(g, it) for it in models):
                bad.append((i, "proved but a small countermodel exists"))
        elif isinstance(out, Refuted):
            it = oracle.from_finite_model(out.model)
            genuine = (all(oracle.sequent_holds(ax, it) for ax in MIX.axioms)
                       and oracle.holds(g.antecedent, it, out.assignment)
                       and not oracle.holds(g.consequent, it, out.assignment))
            if not genuine:
                bad.append((i, "countermodel does not re-evaluate"))
    dt = time.perf_counter() - t0
    ok = not bad and dt < 300
    report(8, "prover integrity", ok, f"100 sequents {tally}, violations={bad}", dt)
    assert ok
