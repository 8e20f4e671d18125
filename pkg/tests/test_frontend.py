import pytest

from essence_refine.ast import BoolT, FunctionT, IntRange, SetT, walk
from essence_refine.checker import load
from essence_refine.errors import LexError, ParseError, TypeCheckError, ValidationError
from essence_refine.lexer import tokenize
from essence_refine.oracle import enumerate_abstract_solutions
from essence_refine.parser import parse_spec
from essence_refine.printer import print_spec

from conftest import corpus_names, corpus_text


def texts(source):
    return [t.text for t in tokenize(source) if t.kind != "eof"]


def test_tokenize_find_decl():
    assert texts("find x : set of item") == ["find", "x", ":", "set", "of", "item"]


def test_tokenize_empty_and_comment():
    assert texts("") == []
    assert texts("$ nothing here\n") == []


def test_tokenize_rejects_unknown_character():
    with pytest.raises(LexError) as info:
        tokenize("x #= y")
    assert info.value.pos == (1, 3)


def test_token_positions_are_monotone():
    source, _ = corpus_text("knapsack")
    pos = [t.pos for t in tokenize(source)]
    assert pos == sorted(pos)
    assert all(line >= 1 and col >= 1 for line, col in pos)


def test_parse_knapsack():
    source, _ = corpus_text("knapsack")
    spec = parse_spec(tokenize(source))
    kinds = [d.kind for d in spec.decls]
    assert kinds.count("given") == 4
    assert kinds.count("letting") == 1
    assert kinds.count("find") == 1
    assert spec.objective.direction == "maximising"
    assert len(spec.constraints) == 1


def test_parse_minimal_and_truncated():
    spec = parse_spec(tokenize("find x : int(1..3)"))
    assert len(spec.decls) == 1 and spec.objective is None and not spec.constraints
    with pytest.raises(ParseError) as info:
        parse_spec(tokenize("find x : int(1..3)\nsuch that x = "))
    assert "expression" in str(info.value)


def test_precedence():
    spec = parse_spec("find a, b, c : bool\nsuch that a \\/ b /\\ c => a <=> b")
    c = spec.constraints[0]
    assert c.op == "iff"
    assert c.lhs.op == "implies"
    assert c.lhs.lhs.op == "or" and c.lhs.lhs.rhs.op == "and"


def test_quantifier_body_extends_right():
    spec = parse_spec("find x : int(1..3)\nsuch that forall i : int(1..2) . i < x /\\ x < 3")
    q = spec.constraints[0]
    assert q.body.op == "and"


def test_elem_quantifier_is_normalised():
    spec = parse_spec("find x : set of int(1..3)\nmaximising sum i elem x . i")
    assert spec.objective.expr.over.expr.name == "x"


def test_both_total_and_partial_rejected():
    with pytest.raises(ValidationError) as info:
        load("find f : function (total) (partial) int(1..2) -> int(1..2)")
    assert "total and partial" in str(info.value)


def test_unsatisfiable_size_is_a_warning():
    spec, warnings = load("find x : set (size 4) of int(1..3)")
    assert warnings and "size" in str(warnings[0])
    assert enumerate_abstract_solutions(spec).solutions == set()


def test_function_domain_must_be_int_range():
    with pytest.raises(ValidationError) as info:
        load("find g : function (partial) set (maxsize 2) of int(1..2) -> int(1..2)")
    assert "unsupported function domain" in str(info.value)


def test_undefined_name_has_position():
    with pytest.raises(ValidationError) as info:
        load("find x : int(1..3)\nsuch that y = 1")
    assert info.value.pos == (2, 11)


def test_typecheck_knapsack_application_is_int():
    source, params = corpus_text("knapsack")
    spec, _ = load(source, params)
    apps = [n for c in spec.constraints for n in walk(c) if type(n).__name__ == "FuncApp"]
    assert apps and all(isinstance(a.typ, IntRange) for a in apps)


def test_typecheck_elem_and_errors():
    spec, _ = load("find x : set of int(1..3)\nsuch that 3 elem x")
    assert isinstance(spec.constraints[0].typ, BoolT)
    with pytest.raises(TypeCheckError):
        load("find x : set of int(1..3)\nsuch that x subseteq 5")
    with pytest.raises(TypeCheckError):
        load("find x : int(1..3)\nsuch that x + 1")


def test_typecheck_is_stable():
    from essence_refine.checker import typecheck
    source, params = corpus_text("bubbles_max")
    spec, _ = load(source, params)
    again = typecheck(spec)
    assert again == spec
    assert [n.typ for c in again.constraints for n in walk(c)] == \
        [n.typ for c in spec.constraints for n in walk(c)]


def test_params_instantiate_givens():
    source, params = corpus_text("knapsack")
    spec, _ = load(source, params)
    assert not [d for d in spec.decls if d.kind == "given"]
    x = [d for d in spec.decls if d.name == "x"][0]
    assert isinstance(x.domain, SetT) and x.domain.elem == IntRange(1, 3)
    vol = [d for d in spec.decls if d.name == "volume"][0]
    assert isinstance(vol.domain, FunctionT) and vol.domain.to == IntRange(1, 4)


def test_missing_param_is_reported():
    source, _ = corpus_text("knapsack")
    with pytest.raises(ValidationError):
        load(source)


@pytest.mark.parametrize("name", corpus_names())
def test_corpus_round_trip(name):
    source, _ = corpus_text(name)
    spec = parse_spec(source)
    assert parse_spec(print_spec(spec)) == spec
