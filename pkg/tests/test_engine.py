import pytest

from essence_refine.ast import (BOOL, INT, BinOp, Bubble, BubblePart, Decl, IntLit, Ref, binop, lit,
                                structural_eq)
from essence_refine.engine import (CombinedRules, RewriteRule, combine_rules, finalize_bubbles,
                                   lift_indexed, normal_forms, rewrite_step)
from essence_refine.errors import DanglingBubble, ResourceLimit
from essence_refine.parser import parse_expr
from essence_refine.rules import ALL_RULES, REFINEMENT_RULES
from essence_refine.emit import flatness_problems

from conftest import context, plain, represented

A, B, C, D = (Ref(n) for n in "ABCD")


def toy(src, dst, name):
    return RewriteRule(name, lambda node, ctx: [dst] if node == src else None)


TOY = [toy(A, B, "rule1"), toy(A, C, "rule2"), toy(B, D, "rule3")]


def test_combined_rules_union_and_identity():
    f = combine_rules(TOY)
    assert f(A) == [B, C]
    assert f(C) == [C]
    assert f(D) == [D]


def test_empty_rule_list_is_identity():
    assert CombinedRules([])(A) == [A]


def test_normal_forms_of_toy_system():
    nfs = normal_forms(A, TOY)
    assert {nf.expr for nf in nfs} == {C, D}
    assert all(not rewrite_step(nf.expr, TOY) for nf in nfs)
    traces = {nf.expr: nf.trace for nf in nfs}
    assert traces[D] == ("rule1", "rule3")


def test_normal_form_input_is_its_own_normal_form():
    nfs = normal_forms(D, TOY)
    assert [nf.expr for nf in nfs] == [D]


def test_rewrite_step_subseteq():
    rs = represented("find a, b : set of int(1..3)\nsuch that a subseteq b")
    (c,) = rs.spec.constraints
    succ = rewrite_step(c, ALL_RULES, context(rs.spec))
    assert len(succ) == 1
    assert succ[0][1] == "set_subseteq"
    assert structural_eq(plain(succ[0][0]), parse_expr("forall i : a . i elem b"))


def test_rewrite_step_on_flat_term_is_empty():
    rs = represented("find x : int(1..3)\nsuch that x = 3")
    assert rewrite_step(rs.spec.constraints[0], ALL_RULES, context(rs.spec)) == []


def test_set_equality_has_one_successor():
    rs = represented("find a, b : set of int(1..3)\nsuch that a = b")
    succ = rewrite_step(rs.spec.constraints[0], ALL_RULES, context(rs.spec))
    assert len(succ) == 1
    assert structural_eq(plain(succ[0][0]), parse_expr("a subseteq b /\\ b subseteq a"))


def test_set_equality_normal_forms_are_flat():
    rs = represented("find a, b : set of int(1..3)\nsuch that a = b")
    nfs = normal_forms(rs.spec.constraints[0], ALL_RULES, context(rs.spec))
    assert nfs
    assert all(not flatness_problems(nf.expr) for nf in nfs)


def test_normal_forms_are_deterministic():
    rs = represented("find a : set (maxsize 2) of int(1..3)\nfind b : set (maxsize 2) of int(1..3)\n"
                     "such that exists i : a intersect b . i > 1",
                     "a#ExplicitFlags[-] b#ExplicitFlags[-]")
    c = rs.spec.constraints[0]
    one = [nf.expr for nf in normal_forms(c, ALL_RULES, context(rs.spec))]
    two = [nf.expr for nf in normal_forms(c, ALL_RULES, context(rs.spec))]
    assert len(one) == 2 and one == two


def test_step_limit_raises_with_trace():
    loop = [RewriteRule("flip", lambda n, ctx: [IntLit(n.v + 1)] if isinstance(n, IntLit) else None)]
    with pytest.raises(ResourceLimit) as info:
        normal_forms(IntLit(0), loop, max_steps=50)
    assert info.value.trace and set(info.value.trace) == {"flip"}


def test_model_limit_raises():
    fan = [RewriteRule("fan", lambda n, ctx: [Ref(f"{n.name}{k}") for k in "xyz"]
                       if isinstance(n, Ref) and len(n.name) < 3 else None)]
    with pytest.raises(ResourceLimit):
        normal_forms(Ref("a"), fan, max_models=5)


def test_lift_indexed():
    rs = represented("find x : matrix indexed by [int(1..2)] of set of int(1..3)\n"
                     "such that forall i : int(1..2) . 1 elem x[i]")
    elem = rs.spec.constraints[0].body
    ref, trail = lift_indexed(elem.rhs)
    assert ref.name == "x" and len(trail) == 1 and trail[0].name == "i"
    assert lift_indexed(Ref("x")) == (Ref("x"), ())
    assert lift_indexed(parse_expr("s1 union s2")) is None


def bubble(value, helper, aux=()):
    return Bubble(value, (BubblePart(helper, tuple(aux)),), typ=value.typ)


def test_finalize_bubbles_conjoins():
    x = Ref("x", typ=BOOL)
    h1, h2 = Ref("bs", typ=BOOL), Ref("bt", typ=BOOL)
    aux = Decl("aux", "m", INT)
    b = Bubble(x, (BubblePart(h1, (aux,)), BubblePart(h2)), typ=BOOL)
    out, decls = finalize_bubbles(b)
    assert out == binop("and", binop("and", x, h1), h2)
    assert decls == [aux]


def test_finalize_bubble_free_is_unchanged():
    e = parse_expr("x = 1 /\\ y")
    assert finalize_bubbles(e) == (e, [])


def test_finalize_rejects_int_bubble():
    e = BinOp("+", bubble(lit(3), Ref("h", typ=BOOL)), lit(1), typ=INT)
    with pytest.raises(DanglingBubble):
        finalize_bubbles(e)


def test_refinement_rules_have_unique_names():
    names = [r.name for r in ALL_RULES]
    assert len(names) == len(set(names))
    assert not any(r.priority for r in REFINEMENT_RULES)
