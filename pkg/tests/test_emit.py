import os
import re

from conftest import corpus_text, plain
from essence_refine.ast import Bubble, structural_eq, walk
from essence_refine.emit import (fix_names, flatness_problems, model_filename, model_problems,
                                 print_model, spec_hash, write_models)
from essence_refine.checker import load
from essence_refine.parser import parse_expr, parse_spec
from essence_refine.pipeline import RefineConfig, refine_text


def models_of(name, config=None):
    src, params = corpus_text(name)
    return refine_text(src, params, config)[1]


def test_flatness_accepts_flat_expressions():
    spec, _ = load("find x : matrix indexed by [int(1..3)] of int(1..3)\nfind y : int(1..5)\n"
                   "such that forall i : int(1..3) . x[i] + 1 <= y")
    assert flatness_problems(spec.constraints[0]) == []


def test_flatness_reports_abstract_operators():
    problems = flatness_problems(parse_expr("a union b"))
    assert problems == ["operator union"]


def test_refined_models_are_flat():
    for m in models_of("bubbles_max"):
        assert model_problems(m.spec) == []
        for c in m.spec.constraints:
            assert not any(isinstance(n, Bubble) for n in walk(c))


def test_fix_names_is_idempotent():
    for m in models_of("bubbles_max"):
        again = fix_names(m)
        assert print_model(again) == print_model(m)


def test_fix_names_numbers_binders_in_order():
    for m in models_of("bubbles_max"):
        binders = [int(k) for k in re.findall(r"(?:forall|exists|sum) q_(\d+) :", print_model(m))]
        assert binders == list(range(1, len(binders) + 1))


def test_print_parse_round_trip():
    for m in models_of("bubbles_max"):
        text = print_model(m)
        back = parse_spec(text)
        assert [d.name for d in back.decls] == [d.name for d in m.spec.decls]
        assert len(back.constraints) == len(m.spec.constraints)
        for a, b in zip(back.constraints, m.spec.constraints):
            assert structural_eq(plain(a), plain(b))


def test_header_lines():
    m = models_of("set_exact")[0]
    lines = print_model(m).splitlines()
    assert lines[0].startswith("$ source: ")
    assert lines[1] == f"$ rep: {m.rep_summary}"
    assert lines[2].startswith("$ rules:")


def test_model_without_constraints():
    src = "find x : set (size 3) of int(1..3)"
    spec, models, _ = refine_text(src)
    text = print_model(models[0])
    back = parse_spec(text)
    assert back.decls
    assert "such that" not in text or back.constraints


def test_occurrence_declaration():
    m = models_of("set_unbounded")[0]
    text = print_model(m)
    assert "matrix indexed by [int(" in text and "] of bool" in text


def test_write_models(tmp_path):
    models = models_of("set_maxsize", RefineConfig(all_reps=True))
    paths = write_models(models, str(tmp_path), "source abc", trace=True)
    assert [os.path.basename(p) for p in paths] == [model_filename(k)
                                                     for k in range(1, len(models) + 1)]
    assert model_filename(3) == "model_0003.eprime"
    manifest = (tmp_path / "manifest.txt").read_text().splitlines()
    assert manifest[0] == "source abc"
    assert manifest[1] == f"models: {len(models)}"
    assert len(manifest) == 2 + len(models)
    assert manifest[2].startswith("model_0001.eprime\t")


def test_spec_hash_is_stable():
    assert spec_hash("abc") == spec_hash("abc")
    assert spec_hash("abc") != spec_hash("abd")
    assert len(spec_hash("x")) == 12
