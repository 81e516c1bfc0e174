"""Command-line entry point.

Every subcommand streams one record per check.  With ``--json`` records are
JSON lines tagged with the ``thy.json`` format; otherwise they are short
text lines.  The last record is a summary whose exit code follows from the
statuses of the records before it.
"""
from __future__ import annotations

import argparse
import os
import sys
from typing import Any, Sequence, TextIO

from .chase import derive, find_countermodel
from .codes import Recoder, base_only, cover_family, equivalence_sequents
from .dsl import (
    FORMAT, ParseError, dumps, parse_extensions, parse_formula, parse_formula_lines, parse_sequent, parse_theory,
    print_extension, print_formula, print_formula_in_context, print_sequent, print_theory, theory_to_json,
)
from .extend import (
    ExtensionError, MoritaChain, apply_extension_unchecked, check_admissibility, check_conservativity, check_fragment,
    mutually_derivable,
)
from .models import iter_models
from .morley import MorleyPool, build_fomor_witness, model_correspondence, morleyize
from .outcome import Budget
from .syncat import (
    FragmentError, SynObject, build_fragment, build_hat_fragment, build_tilde_fragment, check_cover_hypothesis,
    compare_fragments, hom_search, subobject_lattice,
)
from .syntax import Fragment, Theory, check_wellformed, min_fragment

EXIT_OK, EXIT_FAIL, EXIT_UNKNOWN, EXIT_USAGE = 0, 1, 2, 3

_PASS = {"proved", "pass", "admissible", "ok"}
_FAIL = {"refuted", "fail"}


def exit_code(statuses: Sequence[str]) -> int:
    """Refutation wins over Unknown, which wins over success."""
    if any(s in _FAIL for s in statuses):
        return EXIT_FAIL
    if any(s not in _PASS for s in statuses):
        return EXIT_UNKNOWN
    return EXIT_OK


class UsageError(Exception):
    pass


class Reporter:
    """Single writer for all records of one invocation."""

    def __init__(self, json_mode: bool, stream: TextIO | None = None):
        self.json_mode = json_mode
        self.stream = stream or sys.stdout
        self.statuses: list[str] = []

    def record(self, kind: str, status: str | None, /, text: str = "", **data: Any) -> None:
        data.pop("status", None)
        if status is not None:
            self.statuses.append(status)
        if self.json_mode:
            rec = {"format": FORMAT, "kind": kind}
            if status is not None:
                rec["status"] = status
            rec.update(data)
            self.stream.write(dumps(rec) + "\n")
        else:
            self.stream.write((f"{status:<10} {kind:<14} {text}" if status else text) + "\n")
        self.stream.flush()

    def finish(self) -> int:
        code = exit_code(self.statuses)
        counts = {s: self.statuses.count(s) for s in sorted(set(self.statuses))}
        if self.json_mode:
            self.stream.write(dumps({"format": FORMAT, "kind": "summary", "exit": code, "counts": counts}) + "\n")
        else:
            self.stream.write(f"# exit {code} " + " ".join(f"{k}={v}" for k, v in counts.items()) + "\n")
        self.stream.flush()
        return code


# ----------------------------------------------------------------- inputs


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def load_theory(path: str) -> Theory:
    return parse_theory(_read(path))


def load_chain(theory: Theory, path: str | None, budget: Budget | None = None,
               rep: Reporter | None = None, checked: bool = True) -> MoritaChain:
    """Apply every extension statement in ``path``, reporting admissibility."""
    chain = MoritaChain(theory)
    if path is None:
        return chain
    for tname, spec in parse_extensions(_read(path), {theory.name: theory}):
        if tname != theory.name:
            raise UsageError(f"extension targets unknown theory {tname}")
        chain = _extend_step(chain, spec, budget, rep, checked)
    return chain


def _extend_step(chain: MoritaChain, spec, budget, rep: Reporter | None, checked: bool) -> MoritaChain:
    line = print_extension(chain.base.name, spec)
    try:
        check_fragment(spec, chain.final)
    except ValueError as e:
        raise UsageError(str(e))
    if checked:
        adm = check_admissibility(spec, chain.final, budget)
        if rep is not None:
            rep.record("admissibility", adm.status, line, extension=line, **adm.to_json())
    return MoritaChain(chain.base, chain.steps + [(spec, apply_extension_unchecked(chain.final, spec))])


def make_budget(args) -> Budget:
    try:
        return Budget(steps=args.budget_steps, branches=args.budget_branches, model_size=args.model_size)
    except ValueError as e:
        raise UsageError(str(e))


def _seed() -> int | None:
    raw = os.environ.get("MORITA_SEED")
    if raw in (None, ""):
        return None
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"MORITA_SEED must be an integer, got {raw!r}")


def _object(text: str, theory: Theory) -> SynObject:
    ctx, f = parse_formula(text, theory.signature, theory.fragment)
    return SynObject.of(ctx, f)


def _pool(path: str | None, theory: Theory) -> list:
    if path is None:
        return []
    return parse_formula_lines(_read(path), theory.signature)


def _outcome_text(o) -> str:
    if o.status == "refuted":
        return f"countermodel {o.model.describe()} at {o.assignment}"
    if o.status == "unknown":
        return o.reason
    return f"{o.steps} steps"


# ---------------------------------------------------------------- commands


def cmd_check(args, rep: Reporter) -> None:
    for path in args.theories:
        thy = load_theory(path)
        problems = check_wellformed(thy)
        used = max((max(min_fragment(a.antecedent), min_fragment(a.consequent)) for a in thy.axioms),
                   default=Fragment.CARTESIAN)
        rep.record("theory", "fail" if problems else "pass",
                   f"{thy.name}: declared {thy.fragment.keyword}, uses {used.keyword}, "
                   f"{len(thy.signature.sorts)} sorts, {len(thy.axioms)} axioms",
                   name=thy.name, declared=thy.fragment.keyword, used=used.keyword,
                   diagnostics=[str(d) for d in problems])
        for d in problems:
            rep.record("diagnostic", None, f"  {d}")


def cmd_prove(args, rep: Reporter) -> None:
    thy = load_theory(args.theory)
    budget = make_budget(args)
    texts = list(args.goal or [])
    if args.goals:
        texts += [ln.strip() for ln in _read(args.goals).splitlines() if ln.strip() and not ln.strip().startswith("#")]
    if not texts:
        raise UsageError("no goals given (use --goal or --goals)")
    for text in texts:
        goal = parse_sequent(text, thy.signature)
        out = derive(thy, goal, budget)
        data = out.to_json()
        if not args.trace:
            data.pop("trace", None)
        status = data.pop("status")
        rep.record("goal", status, f"{print_sequent(goal)}  [{_outcome_text(out)}]",
                   sequent=print_sequent(goal), **data)


def cmd_models(args, rep: Reporter) -> None:
    thy = load_theory(args.theory)
    budget = make_budget(args)
    if args.goal:
        goal = parse_sequent(args.goal, thy.signature)
        out = find_countermodel(thy, goal, budget.model_size)
        # A countermodel refutes the goal; finding none is inconclusive.
        rep.record("countermodel", out.status, f"{print_sequent(goal)}  [{_outcome_text(out)}]",
                   sequent=print_sequent(goal), **{k: v for k, v in out.to_json().items() if k != "status"})
        return
    count = 0
    for m in iter_models(thy, budget.model_size):
        count += 1
        if count <= args.limit:
            rep.record("model", None, f"model {count}: {m.describe()}", index=count, model=m.to_json())
    rep.record("enumeration", "pass", f"{count} models up to isomorphism with carriers <= {budget.model_size}",
               models=count, bound=budget.model_size)


def cmd_extend(args, rep: Reporter) -> None:
    thy = load_theory(args.theory)
    budget = make_budget(args)
    chain = load_chain(thy, args.extensions, budget, rep, checked=not args.unchecked)
    if args.conservativity:
        rep_c = check_conservativity(thy, chain.final, chain, bound=min(budget.model_size, 3), budget=budget)
        rep.record("conservativity", "pass" if rep_c.ok else "fail",
                   f"{rep_c.models_checked} base models expanded", **rep_c.to_json())
    rep.record("theory", None, print_theory(chain.final).rstrip(), theory=theory_to_json(chain.final))


def cmd_recode(args, rep: Reporter) -> None:
    thy = load_theory(args.theory)
    budget = make_budget(args)
    chain = load_chain(thy, args.extensions, budget, rep, checked=args.verify)
    if not chain.steps:
        raise UsageError("recode needs at least one extension step")
    final = chain.final
    items = [parse_formula(t, final.signature) for t in (args.formula or [])] + _pool(args.pool, final)
    if not items:
        raise UsageError("no formulas given (use --formula or --pool)")
    recoder = Recoder.for_chain(chain)
    prev = chain.stages()[-2].signature
    for ctx, f in items:
        head = print_formula_in_context(ctx, f)
        disjuncts = recoder.recode(f, ctx)
        lines = [print_formula(d.closed()) for d in disjuncts]
        data: dict[str, Any] = {"formula": head, "disjuncts": lines}
        if not args.verify:
            rep.record("recode", None, head + "\n" + "\n".join(f"  | {ln}" for ln in lines), **data)
            continue
        checks = [(s, derive(final, s, budget)) for s in equivalence_sequents(f, ctx, disjuncts)]
        scan = all(base_only(d.body, prev) for d in disjuncts)
        cover = cover_family(ctx, f, final, recoder, budget)
        statuses = [o.status for _s, o in checks] + [cover.status] + ([] if scan else ["fail"])
        status = "refuted" if ("refuted" in statuses or "fail" in statuses) else (
            "proved" if all(s == "proved" for s in statuses) else "unknown")
        data.update(equivalence=[o.status for _s, o in checks], scan=scan, cover=cover.status)
        rep.record("recode", status, head + "\n" + "\n".join(f"  | {ln}" for ln in lines), **data)


def cmd_morleyize(args, rep: Reporter) -> None:
    thy = load_theory(args.theory)
    budget = make_budget(args)
    extra = [f for _ctx, f in _pool(args.pool, thy)]
    pool = MorleyPool.for_theory(thy, extra)
    out = morleyize(thy, pool)
    rep.record("theory", None, print_theory(out).rstrip(), theory=theory_to_json(out), pool=len(pool))
    if args.verify:
        bound = min(budget.model_size, 2)
        corr = model_correspondence(thy, out, pool, bound)
        rep.record("correspondence", "pass" if corr.ok else "fail",
                   f"{corr.base_models} base models, {corr.morley_models} coherent models at carriers <= {bound}",
                   **{k: v for k, v in corr.to_json().items() if k != "status"})
        _w, wit = build_fomor_witness(thy, pool, bound)
        rep.record("witness", "pass" if wit.agree else "fail",
                   f"{wit.witness_models} witness models, {wit.morley_models} coherent models",
                   **{k: v for k, v in wit.to_json().items() if k != "status"})


def cmd_syncat(args, rep: Reporter) -> None:
    thy = load_theory(args.theory)
    budget = make_budget(args)
    action = args.action
    if action == "homs":
        src, tgt = _object(args.source, thy), _object(args.target, thy)
        found = hom_search(thy, src, tgt, args.size, budget)
        for m in found:
            rep.record("morphism", "proved", f"{src} -> {tgt}: {print_formula(m.theta)}",
                       theta=print_formula(m.theta))
        rep.record("search", "pass", f"{len(found)} morphisms from {found.candidates} candidates, "
                   f"{found.dropped_unknown} undecided", morphisms=len(found), candidates=found.candidates,
                   dropped_unknown=found.dropped_unknown)
        return
    if action == "subobjects":
        obj = _object(args.object, thy)
        ctx = parse_formula(args.object, thy.signature, thy.fragment)[0]
        pool = [f for _c, f in parse_formula_lines(_read(args.pool), thy.signature)] if args.pool else []
        lat = subobject_lattice(thy, obj, pool, budget, context=ctx)
        for i, e in enumerate(lat.elements):
            rep.record("element", None, f"[{i}] {print_formula(e)}", index=i, formula=print_formula(e))
        for i, j in lat.covers():
            rep.record("order", None, f"[{i}] <= [{j}]", below=i, above=j)
        n = len(lat.elements)
        for i in range(n):
            for j in range(i + 1, n):
                jc = lat.join(i, j)
                statuses = [o.status for o in jc.upper] + [o.status for _k, o in jc.least]
                status = "refuted" if "refuted" in statuses else ("proved" if jc.ok else "unknown")
                rep.record("join", status, f"[{i}] v [{j}]", left=i, right=j)
        return
    if action == "covers":
        if not args.extensions:
            raise UsageError("covers needs an extension file")
        chain = load_chain(thy, args.extensions, budget, rep)
        if not chain.steps:
            raise UsageError("covers needs at least one extension step")
        objs = [SynObject.of(c, f) for c, f in _pool(args.pool, chain.final)]
        if not objs:
            raise UsageError("covers needs objects (use --pool)")
        report = check_cover_hypothesis(thy, chain.final, chain, objs, budget, min(budget.model_size, 2))
        for e in report.entries:
            rep.record("cover", e.status, f"{e.obj}: {len(e.report.morphisms)} covering morphisms",
                       object=str(e.obj), morphisms=len(e.report.morphisms), scan=e.scan_ok,
                       model_failures=e.model_failures)
        return
    pool = _pool(args.pool, thy)
    objects = [SynObject.of(c, f) for c, f in pool]
    frag = build_fragment(thy, objects, hom_size=args.hom_size, budget=budget)
    if action == "objects":
        for fo in frag.objects:
            rep.record("object", None, f"{fo.sort}: {fo.obj}", sort=fo.sort, object=str(fo.obj),
                       ambient=fo.ambient, inclusion=fo.inclusion)
        for m in frag.morphisms:
            rep.record("arrow", None, f"{m.symbol}: {frag.lookup(m.source).sort} -> {frag.lookup(m.target).sort}"
                       f" [{m.role}] {print_formula(m.theta)}", symbol=m.symbol, role=m.role,
                       source=frag.lookup(m.source).sort, target=frag.lookup(m.target).sort,
                       theta=print_formula(m.theta))
        rep.record("adjacency", None, frag.adjacency(), adjacency=frag.adjacency().splitlines())
        rep.record("fragment", "pass", f"{len(frag.objects)} objects, {len(frag.morphisms)} morphisms",
                   objects=len(frag.objects), morphisms=len(frag.morphisms), dropped_unknown=frag.dropped_unknown)
        return
    hat = build_hat_fragment(thy, frag, budget, checked=not args.unchecked)
    if action == "hat":
        rep.record("theory", None, print_theory(hat.theory).rstrip(), theory=theory_to_json(hat.theory))
        rep.record("hat", "pass", f"{len(hat.theory.axioms)} axioms over {len(hat.theory.signature.sorts)} sorts")
        return
    tilde = build_tilde_fragment(thy, frag, budget, checked=not args.unchecked)
    rep.record("theory", None, print_theory(tilde.theory).rstrip(), theory=theory_to_json(tilde.theory))
    for ax in tilde.certificates:
        rep.record("internal", ax.status, print_sequent(ax.sequent), name=ax.sequent.name)
    if args.compare:
        sample = compare_fragments(hat, tilde, args.compare, _seed(), budget)
        for label, items in (("hat_in_tilde", sample.hat_in_tilde), ("tilde_in_hat", sample.tilde_in_hat)):
            for s, o in items:
                rep.record(label, o.status, f"{s.name}: {print_sequent(s)}", name=s.name)


def cmd_equiv_suite(args, rep: Reporter) -> None:
    left, right = load_theory(args.left), load_theory(args.right)
    budget = make_budget(args)
    chains = []
    for thy, ext in ((left, args.left_ext), (right, args.right_ext)):
        problems = check_wellformed(thy)
        rep.record("wellformed", "fail" if problems else "pass", thy.name, diagnostics=[str(d) for d in problems])
        chain = load_chain(thy, ext, budget, rep)
        for p in chain.validate():
            rep.record("chain", "fail", p)
        cons = check_conservativity(thy, chain.final, chain, bound=min(budget.model_size, 2), budget=budget)
        rep.record("conservativity", "pass" if cons.ok else "fail",
                   f"{thy.name}: {cons.models_checked} base models expanded", **cons.to_json())
        chains.append(chain)
    span = mutually_derivable(chains[0].final, chains[1].final, budget)
    if not span.signature_match:
        rep.record("span", "fail", "chain ends are not over the same symbols")
    for label, items in (("left_in_right", span.left_in_right), ("right_in_left", span.right_in_left)):
        for s, status in items:
            rep.record(label, status, f"{s.name}: {print_sequent(s)}", name=s.name)


# ------------------------------------------------------------------ parser


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--budget-steps", type=int, default=10_000, metavar="N")
    common.add_argument("--budget-branches", type=int, default=64, metavar="N")
    common.add_argument("--model-size", type=int, default=3, metavar="N")
    common.add_argument("--json", action="store_true", help="emit JSON lines")

    parser = _Parser(prog="morita", description="Morita extensions, recoding and Morleyization for coherent theories.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("check", parents=[common], help="well-formedness and fragment of theory files")
    p.add_argument("theories", nargs="+")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("prove", parents=[common], help="derive sequents from a theory")
    p.add_argument("theory")
    p.add_argument("--goal", action="append", help="sequent such as 'R(x) |- (x:S) R(x)'")
    p.add_argument("--goals", metavar="FILE", help="one sequent per line")
    p.add_argument("--trace", action="store_true", help="include proof traces in JSON output")
    p.set_defaults(func=cmd_prove)

    p = sub.add_parser("models", parents=[common], help="enumerate models or search a countermodel")
    p.add_argument("theory")
    p.add_argument("--goal")
    p.add_argument("--limit", type=int, default=20, help="models to print")
    p.set_defaults(func=cmd_models)

    p = sub.add_parser("extend", parents=[common], help="apply extension statements")
    p.add_argument("theory")
    p.add_argument("extensions")
    p.add_argument("--unchecked", action="store_true", help="skip admissibility checks")
    p.add_argument("--conservativity", action="store_true", help="expand base models along the chain")
    p.set_defaults(func=cmd_extend)

    p = sub.add_parser("recode", parents=[common], help="recode formulas down one extension step")
    p.add_argument("theory")
    p.add_argument("extensions")
    p.add_argument("--formula", action="append", help="formula in context over the extended signature")
    p.add_argument("--pool", metavar="FILE", help="one formula in context per line")
    p.add_argument("--verify", action="store_true", help="prove equivalence and covers")
    p.set_defaults(func=cmd_recode)

    p = sub.add_parser("morleyize", parents=[common], help="coherent theory of a first-order theory")
    p.add_argument("theory")
    p.add_argument("--pool", metavar="FILE", help="extra formulas to name")
    p.add_argument("--verify", action="store_true", help="compare finite models")
    p.set_defaults(func=cmd_morleyize)

    p = sub.add_parser("syncat", help="syntactic category fragments")
    acts = p.add_subparsers(dest="action", required=True, parser_class=_Parser)
    for name, help_ in (("objects", "objects, morphisms and adjacency listing"),
                        ("hat", "theory with sorts for the pooled objects"),
                        ("tilde", "internal theory of the fragment")):
        a = acts.add_parser(name, parents=[common], help=help_)
        a.add_argument("theory")
        a.add_argument("--pool", metavar="FILE", required=True)
        a.add_argument("--hom-size", type=int, default=0, help="search extra morphisms up to this many atoms")
        if name != "objects":
            a.add_argument("--unchecked", action="store_true")
        if name == "tilde":
            a.add_argument("--compare", type=int, default=0, metavar="N",
                           help="derive N sampled axioms of each side in the other")
    a = acts.add_parser("homs", parents=[common], help="search functional relations")
    a.add_argument("theory")
    a.add_argument("--source", required=True)
    a.add_argument("--target", required=True)
    a.add_argument("--size", type=int, default=2)
    a = acts.add_parser("subobjects", parents=[common], help="order pooled subobjects")
    a.add_argument("theory")
    a.add_argument("--object", required=True)
    a.add_argument("--pool", metavar="FILE")
    a = acts.add_parser("covers", parents=[common], help="cover objects over an extension")
    a.add_argument("theory")
    a.add_argument("extensions")
    a.add_argument("--pool", metavar="FILE", required=True)
    p.set_defaults(func=cmd_syncat)

    p = sub.add_parser("equiv-suite", parents=[common], help="verify a span of two extension chains")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--left-ext", metavar="FILE")
    p.add_argument("--right-ext", metavar="FILE")
    p.set_defaults(func=cmd_equiv_suite)
    return parser


def main(argv: Sequence[str] | None = None, stream: TextIO | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:      # usage errors and --help
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    rep = Reporter(args.json, stream)
    try:
        try:
            args.func(args, rep)
        except (ExtensionError, FragmentError) as e:
            # A construction that was refused is a failed check, not a usage error.
            rep.record("error", "fail", str(e), error=str(e))
        return rep.finish()
    except BrokenPipeError:
        # The reader went away (e.g. piped into head); keep the verdict so far.
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return exit_code(rep.statuses)
    except (ParseError, UsageError, OSError, ValueError) as e:
        print(f"morita: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
