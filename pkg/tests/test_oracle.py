from dataclasses import replace

import pytest
from hypothesis import given, strategies as st

from conftest import corpus_text
from essence_refine.checker import load
from essence_refine.errors import DecodeError, EvalError, TooLarge
from essence_refine.oracle import (FuncV, MatrixV, check_equivalence, check_model, decode_solution,
                                   domain_count, domain_values, enumerate_abstract_solutions,
                                   eval_expr, holds, int_div, int_mod, solve_refined_model)
from essence_refine.parser import parse_domain, parse_expr
from essence_refine.printer import print_expr
from essence_refine.pipeline import RefineConfig, refine_text


def test_int_div_truncates_toward_zero():
    assert int_div(7, 2) == 3
    assert int_div(-7, 2) == -3
    assert int_div(7, -2) == -3
    assert int_mod(-7, 2) == -1
    with pytest.raises(EvalError):
        int_div(1, 0)


@given(st.integers(-50, 50), st.integers(-50, 50).filter(lambda b: b != 0))
def test_div_mod_identity(a, b):
    assert int_div(a, b) * b + int_mod(a, b) == a
    assert abs(int_mod(a, b)) < abs(b)


def test_eval_basic():
    env = {"s": frozenset({1, 3}), "f": FuncV({1: 2})}
    assert eval_expr(parse_expr("card(s) + 1"), env) == 3
    assert eval_expr(parse_expr("3 elem s /\\ not(2 elem s)"), env) is True
    assert eval_expr(parse_expr("sum i : s . i"), env) == 4
    assert eval_expr(parse_expr("f(1)"), env) == 2
    with pytest.raises(EvalError):
        eval_expr(parse_expr("f(2)"), env)


def test_undefined_constraint_is_excluded_or_raised():
    env = {"f": FuncV({1: 2})}
    e = parse_expr("f(2) = 1")
    assert holds(e, env) is False
    with pytest.raises(EvalError):
        holds(e, env, undef="error")


@pytest.mark.parametrize("text, n", [
    ("int(1..4)", 4),
    ("bool", 2),
    ("set (maxsize 2) of int(1..3)", 7),
    ("set (size 2) of int(1..4)", 6),
    ("function (total) int(1..2) -> int(1..3)", 9),
    ("function int(1..2) -> int(1..3)", 16),
    ("tuple (int(1..2), bool)", 4),
    ("relation of (int(1..2) * int(1..2))", 16),
])
def test_domain_counts(text, n):
    t = parse_domain(text)
    assert domain_count(t) == n
    assert len(domain_values(t)) == n


def test_knapsack_reference():
    src, params = corpus_text("knapsack")
    spec, _ = load(src, params)
    ref = enumerate_abstract_solutions(spec)
    assert ref.optimum == 5
    assert ref.solutions


def test_too_large():
    spec, _ = load("find x : set of int(1..30)")
    with pytest.raises(TooLarge):
        enumerate_abstract_solutions(spec)


def test_solve_and_decode():
    src = "find x : set (maxsize 2) of int(1..3)\nsuch that 1 elem x"
    spec, models, _ = refine_text(src, config=RefineConfig(all_reps=True))
    ref = enumerate_abstract_solutions(spec)
    assert len(ref.solutions) == 3
    for m in models:
        flat = solve_refined_model(m)
        decoded = {decode_solution(s, m) for s in flat.solutions}
        assert decoded == ref.solutions


def test_decode_rejects_repeated_elements():
    src = "find x : set (size 2) of int(1..3)"
    spec, models, _ = refine_text(src, config=RefineConfig(all_reps=True))
    m = next(m for m in models if "ExplicitFixed" in m.rep_summary)
    name = next(d.name for d in m.spec.decls if d.name.startswith("x_"))
    with pytest.raises(DecodeError):
        decode_solution({name: MatrixV([2, 2], 1)}.items(), m)


def test_check_passes_on_refined_models():
    src, params = corpus_text("knapsack")
    spec, models, _ = refine_text(src, params)
    report = check_equivalence(spec, models)
    assert report.ok
    for c in report.checks:
        assert c.abstract_optimum == c.model_optimum == 5
    assert all("PASS" in line for line in report.lines())


def test_check_finds_a_witness_in_a_broken_model():
    src = "find x : set (maxsize 2) of int(1..3)\nsuch that 1 elem x"
    spec, models, _ = refine_text(src, config=RefineConfig(all_reps=True))
    m = next(m for m in models if "Occurrence" in m.rep_summary)
    ref = enumerate_abstract_solutions(spec)
    k = m.origins.index("structural")  # the cardinality bound
    cons = m.spec.constraints[:k] + m.spec.constraints[k + 1:]
    broken = replace(m, spec=replace(m.spec, constraints=cons))
    result = check_model(broken, ref)
    assert not result.passed
    assert result.witness is not None
    assert result.witness[0] == "spurious"
    assert "FAIL" in result.line()


def test_check_reports_duplicate_encodings():
    src = "find x : set (maxsize 2) of int(1..3)\nsuch that 1 elem x"
    spec, models, _ = refine_text(src, config=RefineConfig(all_reps=True))
    m = next(m for m in models if "ExplicitFlags" in m.rep_summary)
    # drop the constraint that fixes the value under a false flag: one set, two encodings
    k = next(k for k, c in enumerate(m.spec.constraints)
             if "= false) =>" in print_expr(c))
    cons = m.spec.constraints[:k] + m.spec.constraints[k + 1:]
    result = check_model(replace(m, spec=replace(m.spec, constraints=cons)),
                         enumerate_abstract_solutions(spec))
    assert not result.passed
    assert not result.injective
    assert result.witness[0] == "duplicated"


def test_check_reports_undecodable_solutions():
    src = "find x : set (maxsize 2) of int(1..3)\nsuch that 1 elem x"
    spec, models, _ = refine_text(src, config=RefineConfig(all_reps=True))
    m = next(m for m in models if "ExplicitFlags" in m.rep_summary)
    # without the ordering constraint a flagged value may repeat
    k = next(k for k, c in enumerate(m.spec.constraints) if " < " in print_expr(c))
    cons = m.spec.constraints[:k] + m.spec.constraints[k + 1:]
    result = check_model(replace(m, spec=replace(m.spec, constraints=cons)),
                         enumerate_abstract_solutions(spec))
    assert not result.passed
    assert result.witness[0] == "undecodable"
    assert "x_exf_0=" in result.line() and "repeated" in result.line()
