import io
import json

import pytest

from morita.cli import EXIT_FAIL, EXIT_OK, EXIT_UNKNOWN, EXIT_USAGE, exit_code, main

AB = """theory AB fragment coherent
sorts A, B
rel P : A
axiom inh: true |- () exists x:A. true
axiom inh2: true |- () exists y:B. true
"""
TOY = """theory T fragment coherent
sorts S
fun f : S -> S
rel R : S
axiom inh: true |- () exists x:S. true
axiom pres: R(x) |- (x:S) R(f(x))
"""
FO = """theory F fragment first-order
sorts S
rel P : S
axiom a: true |- (x:S) not P(x) \\/ exists y:S. P(y)
"""
TOY_POOL = "(x:S) true\n(x:S) R(x)\n(x:S) f(x) = x\n(x:S, y:S) f(x) = y\n(x:S) R(f(x))\n"


@pytest.fixture
def files(tmp_path):
    def write(name, text):
        p = tmp_path / name
        p.write_text(text)
        return str(p)
    return {
        "ab": write("ab.thy", AB),
        "ab_ext": write("ab.ext", "extend AB with product(A, B) as Z(p1, p2)\n"),
        "zpool": write("zpool.txt", "(z:Z) true\n"),
        "toy": write("toy.thy", TOY),
        "toy_pool": write("pool.txt", TOY_POOL),
        "fo": write("fo.thy", FO),
        "bad": write("bad.thy", "theory X\nsorts A\naxiom a: true |- (x:B) x = x\n"),
    }


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), stream=out)
    return code, out.getvalue()


def run_json(*argv):
    code, text = run(*argv, "--json")
    records = [json.loads(line) for line in text.splitlines() if line.strip()]
    return code, records


def recomputed(records):
    return exit_code([r["status"] for r in records if "status" in r])


def test_reflexivity_goal_exits_zero(files):
    code, _ = run("prove", files["ab"], "--goal", "true |- (x:A) x = x")
    assert code == EXIT_OK


def test_recode_verify_on_product_object(files):
    code, records = run_json("recode", files["ab"], files["ab_ext"], "--pool", files["zpool"], "--verify")
    assert code == EXIT_OK
    assert recomputed(records) == code


def test_tiny_budget_exits_two(files):
    code, _ = run("prove", files["toy"], "--goal", "R(x) |- (x:S) R(f(f(f(x))))", "--budget-steps", "1")
    assert code == EXIT_UNKNOWN


def test_refutation_exits_one(files):
    code, records = run_json("prove", files["ab"], "--goal", "true |- (x:A) P(x)")
    assert code == EXIT_FAIL
    assert records[0]["status"] == "refuted"


@pytest.mark.parametrize("argv", [
    ["prove"],
    ["frobnicate"],
    ["prove", "{ab}", "--goal", "true |- (x:Nope) x = x"],
    ["check", "{bad}"],
    ["prove", "{ab}", "--goal", "true |- (x:A) x = x", "--budget-steps", "0"],
    ["check", "/nonexistent/file.thy"],
])
def test_usage_and_parse_errors_exit_three(files, argv, capsys):
    argv = [a.format(**files) for a in argv]
    assert run(*argv)[0] == EXIT_USAGE


@pytest.mark.parametrize("argv", [
    ["check", "{ab}", "{toy}", "{fo}"],
    ["prove", "{toy}", "--goal", "R(x) |- (x:S) R(f(x))", "--goal", "true |- (x:S) R(x)"],
    ["models", "{toy}", "--limit", "3", "--model-size", "2"],
    ["models", "{toy}", "--goal", "true |- (x:S) R(x)", "--model-size", "2"],
    ["extend", "{ab}", "{ab_ext}"],
    ["extend", "{ab}", "{ab_ext}", "--conservativity", "--model-size", "2"],
    ["recode", "{ab}", "{ab_ext}", "--formula", "(z:Z, w:Z) z = w"],
    ["morleyize", "{fo}", "--verify"],
    ["syncat", "objects", "{toy}", "--pool", "{toy_pool}"],
    ["syncat", "homs", "{toy}", "--source", "(x:S) R(x)", "--target", "(x:S) true", "--size", "1"],
    ["syncat", "subobjects", "{toy}", "--object", "(x:S) true", "--pool", "{toy_pool}"],
    ["syncat", "covers", "{ab}", "{ab_ext}", "--pool", "{zpool}"],
    ["equiv-suite", "{ab}", "{ab}", "--left-ext", "{ab_ext}", "--right-ext", "{ab_ext}"],
])
def test_json_report_is_consistent(files, argv):
    argv = [a.format(**files) for a in argv]
    code, records = run_json(*argv)
    assert records and all(r["format"] == "thy.json" for r in records)
    summary = records[-1]
    assert summary["kind"] == "summary" and summary["exit"] == code
    assert recomputed(records[:-1]) == code
    assert code in (EXIT_OK, EXIT_FAIL, EXIT_UNKNOWN)


def test_countermodel_goal_in_models_command(files):
    code, records = run_json("models", files["toy"], "--goal", "true |- (x:S) R(x)", "--model-size", "2")
    assert code == EXIT_FAIL
    assert records[0]["status"] == "refuted"


def test_morleyize_text_output_parses(files):
    from morita.dsl import parse_theory
    code, text = run("morleyize", files["fo"])
    assert code == EXIT_OK
    body = "\n".join(line for line in text.splitlines() if not line.startswith("#"))
    thy = parse_theory(body)
    assert thy.fragment.name == "COHERENT"


def test_exit_code_precedence():
    assert exit_code([]) == EXIT_OK
    assert exit_code(["proved", "pass", "admissible", "ok"]) == EXIT_OK
    assert exit_code(["proved", "unknown"]) == EXIT_UNKNOWN
    assert exit_code(["unknown", "refuted"]) == EXIT_FAIL
    assert exit_code(["fail"]) == EXIT_FAIL
