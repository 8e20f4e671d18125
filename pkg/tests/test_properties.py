import math

from hypothesis import given, settings, strategies as st

from essence_refine.ast import (NameSupply, Ref, RepTag, Spec, conjoin, split_conjunction,
                                structural_eq, substitute)
from essence_refine.engine import CombinedRules, RewriteRule
from essence_refine.oracle import solve_refined_model
from essence_refine.parser import parse_domain, parse_expr
from essence_refine.printer import print_expr
from essence_refine.representation import leaf_decls, structural
from essence_refine.rules import ALL_RULES

NAMES = ["a", "b", "c"]


def _int_terms(leaf):
    return st.recursive(
        leaf,
        lambda t: st.one_of(
            st.tuples(t, st.sampled_from(["+", "-", "*"]), t).map(lambda x: f"({x[0]} {x[1]} {x[2]})"),
            t.map(lambda x: f"abs({x})"),
        ),
        max_leaves=6,
    )


INT = _int_terms(st.one_of(st.integers(0, 9).map(str), st.sampled_from(NAMES)))


def _bool_terms():
    atom = st.tuples(INT, st.sampled_from(["=", "!=", "<", "<=", ">", ">="]), INT).map(
        lambda x: f"({x[0]} {x[1]} {x[2]})")
    return st.recursive(
        st.one_of(atom, st.sampled_from(["true", "false"])),
        lambda t: st.one_of(
            st.tuples(t, st.sampled_from(["/\\", "\\/", "=>", "<=>"]), t).map(
                lambda x: f"({x[0]} {x[1]} {x[2]})"),
            t.map(lambda x: f"not({x})"),
            st.tuples(st.sampled_from(["forall", "exists"]), st.sampled_from(["i", "j"]), t).map(
                lambda x: f"({x[0]} {x[1]} : int(1..3) . {x[2]})"),
        ),
        max_leaves=8,
    )


BOOL = _bool_terms()


@given(BOOL)
def test_print_parse_round_trip(text):
    e = parse_expr(text)
    printed = print_expr(e)
    again = parse_expr(printed)
    assert structural_eq(e, again)
    assert print_expr(again) == printed


@given(BOOL)
def test_structural_eq_is_reflexive_and_symmetric(text):
    e = parse_expr(text)
    f = parse_expr(print_expr(e))
    assert structural_eq(e, e)
    assert structural_eq(e, f) == structural_eq(f, e)


@given(BOOL, st.sampled_from(NAMES))
def test_substitute_there_and_back(text, name):
    e = parse_expr(text)
    there = substitute(e, name, Ref("zz"))
    back = substitute(there, "zz", Ref(name))
    assert structural_eq(back, e)


@given(BOOL)
def test_split_is_idempotent(text):
    parts = split_conjunction(parse_expr(text))
    assert split_conjunction(conjoin(parts)) == parts
    for p in parts:
        assert split_conjunction(p) == [p]


@given(BOOL)
def test_combined_rules_are_total(text):
    e = parse_expr(text)
    combined = CombinedRules(ALL_RULES)
    out = combined(e)
    assert out
    never = CombinedRules([RewriteRule("never", lambda n, c: None)])
    assert never(e) == [e]


def count(text, tag):
    t = parse_domain(text)
    spec = Spec(tuple(leaf_decls("x", t, tag)), None, tuple(structural("x", t, tag, (), NameSupply())))
    return len(solve_refined_model(spec).solutions)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 4), st.data())
def test_structural_counts_for_sets(n, data):
    k = data.draw(st.integers(0, n))
    exact = f"set (size {k}) of int(1..{n})"
    bounded = f"set (maxsize {k}) of int(1..{n})"
    below = sum(math.comb(n, j) for j in range(k + 1))
    assert count(exact, RepTag("Occurrence")) == math.comb(n, k)
    assert count(exact, RepTag("ExplicitFixed", (None,))) == math.comb(n, k)
    assert count(bounded, RepTag("Occurrence")) == below
    if k > 0:
        assert count(bounded, RepTag("ExplicitFlags", (None,))) == below


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3))
def test_structural_counts_for_functions(a, b):
    total = f"function (total) int(1..{a}) -> int(1..{b})"
    partial = f"function int(1..{a}) -> int(1..{b})"
    assert count(total, RepTag("Func1D", (None,))) == b ** a
    assert count(total, RepTag("Func2D")) == b ** a
    assert count(partial, RepTag("Func2D")) == (b + 1) ** a
