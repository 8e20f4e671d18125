from essence_refine.ast import (IntRange, NameSupply, Ref, conjoin, free_vars, has_reference_to,
                                split_conjunction, structural_eq, substitute)
from essence_refine.checker import load
from essence_refine.oracle import enumerate_abstract_solutions
from essence_refine.parser import parse_expr
from essence_refine.printer import print_expr


def E(text):
    return parse_expr(text)


def test_substitute_replaces_free_occurrence():
    out = substitute(E("i elem b"), "i", E("m[j]"))
    assert structural_eq(out, E("m[j] elem b"))


def test_substitute_without_occurrence_is_identity():
    assert substitute(E("5 = 5"), "i", E("x")) == E("5 = 5")


def test_substitute_leaves_shadowed_binder_alone():
    e = E("forall i : int(1..3) . i > 0")
    assert substitute(e, "i", E("7")) == e


def test_substitute_freshens_capturing_binder():
    out = substitute(E("forall i : int(1..3) . i > j"), "j", E("i + 1"))
    assert out.binder != "i"
    assert "i" in free_vars(out)
    assert structural_eq(out, E("forall k : int(1..3) . k > i + 1"))


def test_substitute_capture_keeps_solutions():
    # wrapping both versions in the same context gives the same solution set
    before = "find i : int(1..3)\nsuch that forall k : int(1..3) . k > i + 1 \\/ k <= i + 1"
    after = "find i : int(1..3)\nsuch that " + print_expr(
        substitute(E("forall i : int(1..3) . i > j \\/ i <= j"), "j", E("i + 1")))
    a = enumerate_abstract_solutions(load(before)[0]).solutions
    b = enumerate_abstract_solutions(load(after)[0]).solutions
    assert a == b and len(a) == 3


def test_split_conjunction():
    assert split_conjunction(E("a /\\ (b /\\ c)")) == [E("a"), E("b"), E("c")]
    assert split_conjunction(E("a \\/ b")) == [E("a \\/ b")]
    parts = split_conjunction(E("(x = 1 /\\ y = 2) /\\ z = 3"))
    assert [print_expr(p) for p in parts] == ["x = 1", "y = 2", "z = 3"]


def test_split_join_keeps_solutions():
    text = "(x = 1 /\\ y = 2) /\\ z <= 2"
    decls = "find x, y, z : int(1..3)\nsuch that "
    joined = print_expr(conjoin(split_conjunction(E(text))))
    a = enumerate_abstract_solutions(load(decls + text)[0]).solutions
    b = enumerate_abstract_solutions(load(decls + joined)[0]).solutions
    assert a == b and len(a) == 2


def test_has_reference_to():
    assert has_reference_to("i", E("m[i] > 0"))
    assert not has_reference_to("i", E("bubble_t"))
    assert not has_reference_to("i", E("forall i : int(1..2) . i > 0"))


def test_structural_eq_alpha():
    assert structural_eq(E("forall i : a . i elem b"), E("forall j : a . j elem b"))
    assert not structural_eq(E("a subseteq b"), E("b subseteq a"))


def test_structural_eq_ignores_aux_numbering():
    a = E("aux_1 = sum q : int(1..2) . q")
    b = E("aux_7 = sum r : int(1..2) . r")
    assert structural_eq(a, b)
    assert not structural_eq(a, E("x = sum q : int(1..2) . q"))


def test_name_supply_skips_taken_names():
    s = NameSupply({"q_1", "q_2"})
    assert s.fresh("q") == "q_3"
    assert s.fresh("q") == "q_4"
    assert s.fresh("aux") == "aux_1"


def test_int_range_values():
    assert list(IntRange(2, 4).values()) == [2, 3, 4]
    assert Ref("x") == Ref("x")
