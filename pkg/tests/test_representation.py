import math

import pytest

from essence_refine.ast import NameSupply, RepTag, Spec
from essence_refine.checker import load
from essence_refine.errors import NoRepresentation
from essence_refine.oracle import solve_refined_model
from essence_refine.parser import parse_domain
from essence_refine.printer import print_expr
from essence_refine.representation import (add_channelling, candidate_reps,
                                           enumerate_representations, leaf_decls, structural)

from conftest import represented


def kinds(text, all_reps=False):
    return [str(t) for t in candidate_reps(parse_domain(text), all_reps)]


def test_candidates_exact_set():
    assert kinds("set (size 2) of int(1..3)") == ["Occurrence", "ExplicitFixed[-]"]
    assert kinds("set (size 2) of int(1..3)", all_reps=True) == [
        "Occurrence", "ExplicitFixed[-]", "ExplicitFlags[-]"]


def test_candidates_maxsize_and_unbounded():
    assert kinds("set (maxsize 2) of int(1..3)") == ["Occurrence", "ExplicitFlags[-]"]
    assert kinds("set of int(1..3)") == ["Occurrence"]


def test_candidates_functions():
    assert kinds("function (total) int(1..3) -> int(1..2)") == ["Func1D[-]", "Func2D"]
    assert kinds("function (partial) int(1..3) -> int(1..2)") == ["Func2D"]


def test_candidates_nested_set():
    got = kinds("set (size 2) of set (maxsize 2) of int(1..2)")
    assert got == ["ExplicitFixed[Occurrence]", "ExplicitFixed[ExplicitFlags[-]]"]


def test_candidates_relation_and_tuple():
    assert kinds("relation of (int(1..2) * int(1..2))") == ["RelSetOfTuples[ExplicitFlags[Tuple[-,-]]]"]
    assert kinds("tuple (int(1..2), set of int(1..2))") == ["Tuple[-,Occurrence]"]


def test_mset_has_no_representation():
    with pytest.raises(NoRepresentation):
        candidate_reps(parse_domain("mset (size 2) of int(1..3)"))


def test_enumerate_counts_by_mode():
    spec, _ = load("find x : set (maxsize 2) of int(1..3)\nsuch that 1 elem x, 2 elem x")
    assert len(enumerate_representations(spec, "single")) == 2
    assert len(enumerate_representations(spec, "per-constraint")) == 4


def test_enumerate_without_abstract_variables():
    spec, _ = load("find x : int(1..3)\nsuch that x > 1")
    out = enumerate_representations(spec)
    assert len(out) == 1 and not out[0].assignment.slots


def test_enumerate_order_is_declaration_then_tag():
    spec, _ = load("find a : set (size 1) of int(1..2)\nfind b : set (maxsize 1) of int(1..2)")
    got = [rs.assignment.summary() for rs in enumerate_representations(spec)]
    assert got == ["a#Occurrence b#Occurrence", "a#Occurrence b#ExplicitFlags[-]",
                   "a#ExplicitFixed[-] b#Occurrence", "a#ExplicitFixed[-] b#ExplicitFlags[-]"]


def test_enumerate_count_is_product_of_slots():
    spec, _ = load("find a : set (size 1) of int(1..2)\n"
                   "find f : function (total) int(1..2) -> int(1..2)\n"
                   "such that f(1) elem a, f(2) = 1")
    assert len(enumerate_representations(spec, "per-constraint")) == 2 * 2 * 2


def test_leaf_decls_names():
    t = parse_domain("set (maxsize 2) of int(1..3)")
    names = [d.name for d in leaf_decls("x", t, RepTag("ExplicitFlags", (None,)))]
    assert names == ["x_exf_0", "x_exf_1"]
    rel = parse_domain("relation of (int(1..2) * int(1..2))")
    names = [d.name for d in leaf_decls("r", rel, candidate_reps(rel)[0])]
    assert names == ["r_rel_exf_0_0", "r_rel_exf_0_1", "r_rel_exf_1"]


def test_single_tag_gets_no_channelling():
    rs = represented("find x : set (maxsize 2) of int(1..3)\nsuch that 1 elem x")
    assert add_channelling(rs, NameSupply()).spec.constraints == rs.spec.constraints


def test_occurrence_explicit_channelling():
    rs = represented("find x : set (size 2) of int(1..3)\nsuch that 1 elem x, 2 elem x",
                     "x#Occurrence|ExplicitFixed[-]", mode="per-constraint")
    out = add_channelling(rs, NameSupply())
    extra = out.spec.constraints[len(rs.spec.constraints):]
    assert len(extra) == 1
    assert print_expr(extra[0]) == (
        "forall q_1 : int(1..3) . x_occ[q_1] <=> (exists q_2 : int(1..2) . x_exp[q_2] = q_1)")


def test_function_channelling_is_biconditional():
    rs = represented("find f : function (total) int(1..2) -> int(1..2)\nsuch that f(1) = 1, f(2) = 1",
                     "f#Func1D[-]|Func2D", mode="per-constraint")
    out = add_channelling(rs, NameSupply())
    (link,) = out.spec.constraints[len(rs.spec.constraints):]
    assert print_expr(link) == ("forall q_1 : int(1..2) . forall q_2 : int(1..2) . "
                                "f_f2d[q_1, q_2] <=> (f_f1d[q_1] = q_2)")


def count(text, tag, name="x"):
    t = parse_domain(text)
    decls = leaf_decls(name, t, tag)
    cons = structural(name, t, tag, (), NameSupply())
    return len(solve_refined_model(Spec(tuple(decls), None, tuple(cons))).solutions), cons


def test_structural_explicit_fixed_orders_cells():
    n, cons = count("set (size 2) of int(1..3)", RepTag("ExplicitFixed", (None,)))
    assert n == math.comb(3, 2)
    assert [print_expr(c) for c in cons] == ["forall q_1 : int(1..1) . x_exp[q_1] < x_exp[q_1 + 1]"]


def test_structural_func2d_row_sums():
    n, cons = count("function (total) int(1..2) -> int(1..2)", RepTag("Func2D"))
    assert n == 4
    assert [print_expr(c) for c in cons] == [
        "forall q_1 : int(1..2) . (sum q_2 : int(1..2) . x_f2d[q_1, q_2]) = 1"]


def test_structural_unbounded_occurrence_is_empty():
    n, cons = count("set of int(1..3)", RepTag("Occurrence"))
    assert cons == [] and n == 8


@pytest.mark.parametrize("text, tag, expected", [
    ("set (maxsize 2) of int(1..4)", RepTag("ExplicitFlags", (None,)), 1 + 4 + 6),
    ("set (maxsize 2) of int(1..4)", RepTag("Occurrence"), 1 + 4 + 6),
    ("function (partial, injective) int(1..3) -> int(1..2)", RepTag("Func2D"), 1 + 6 + 6),
    ("function (total, surjective) int(1..3) -> int(1..2)", RepTag("Func2D"), 6),
    ("function (total, injective) int(1..3) -> int(1..3)", RepTag("Func1D", (None,)), 6),
])
def test_structural_counts_with_attributes(text, tag, expected):
    assert count(text, tag)[0] == expected
