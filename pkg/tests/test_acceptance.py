"""The nine acceptance criteria, each timed against its budget.

Every test records one PASS/FAIL line, printed in the terminal summary.
"""

import math
import time
from contextlib import contextmanager
from dataclasses import replace

import conftest
from conftest import context, corpus_names, corpus_text, plain, represented
from essence_refine.ast import (BinOp, Bubble, NameSupply, Ref, RepTag, Spec,
                                map_bottom_up, conjoin, split_conjunction, structural_eq, walk)
from essence_refine.checker import load
from essence_refine.emit import model_problems, print_model, write_models
from essence_refine.engine import (CombinedRules, RewriteRule, RuleContext, finalize_bubbles,
                                   normal_forms, rewrite_step)
from essence_refine.oracle import (check_equivalence, check_model, constant_env,
                                   enumerate_abstract_solutions, freeze, solve_refined_model)
from essence_refine.parser import parse_domain, parse_expr, parse_spec
from essence_refine.pipeline import RefineConfig, refine_text
from essence_refine.representation import leaf_decls, structural, taken_names
from essence_refine.rules import ALL_RULES, BUBBLE_RULES, LOOP_INVARIANT, RULES_BY_NAME


@contextmanager
def criterion(n, title, limit):
    start = time.perf_counter()
    status = "FAIL"
    try:
        yield
        elapsed = time.perf_counter() - start
        assert elapsed < limit, f"took {elapsed:.2f}s, budget {limit}s"
        status = "PASS"
    finally:
        elapsed = time.perf_counter() - start
        conftest.ACCEPTANCE.append(
            (n, f"criterion {n}: {status}  {title}  ({elapsed:.2f}s, budget {limit}s)"))


def _assoc(e):
    """Re-associate every conjunction chain so grouping of ``/\\`` does not matter."""
    return map_bottom_up(e, lambda n: conjoin(split_conjunction(n))
                         if isinstance(n, BinOp) and n.op == "and" else n)


def _same(actual, expected, aux):
    return structural_eq(_assoc(plain(actual)), _assoc(expected), aux_names=aux)


# --------------------------------------------------------------------------


def test_criterion_1_subseteq_first_rewrite():
    with criterion(1, "subseteq under occurrence rewrites to a quantified membership", 1):
        rs = represented("find a, b : set of int(1..3)\nsuch that a subseteq b",
                         "a#Occurrence b#Occurrence")
        succ = rewrite_step(rs.spec.constraints[0], ALL_RULES, context(rs.spec))
        assert succ, "no rule applies"
        first, name = succ[0]
        assert name == "set_subseteq"
        assert structural_eq(plain(first), parse_expr("forall i : a . i elem b"))


def test_criterion_2_bubbles_and_hoisting():
    with criterion(2, "max/bubble worked example, before and after hoisting", 5):
        src, params = corpus_text("bubbles_max")
        spec, _ = load(src, params)
        ctx = RuleContext({d.name: d for d in spec.decls}, NameSupply(taken_names(spec)),
                          options={"consts": constant_env(spec), "close_bubbles": False})
        rules = [RULES_BY_NAME["set_min_max"]] + BUBBLE_RULES
        nfs = normal_forms(spec.constraints[0], rules, ctx)
        assert len(nfs) == 1
        pre, aux = finalize_bubbles(nfs[0].expr)
        names = {d.name for d in aux} | {"max_s", "max_t"}
        # k is instantiated to 1; max uses `<=` (see the notes on the max direction)
        bubble_s = "((max_s elem s) /\\ (forall i : s . i <= max_s))"
        bubble_t = "((max_t elem t) /\\ (forall i : t . i <= max_t))"
        body = "((max_s - max_t = 1) => (1 elem s))"
        want_pre = parse_expr(f"forall s : A . ({body} /\\ {bubble_s} /\\ {bubble_t})")
        want_post = parse_expr(f"{bubble_t} /\\ (forall s : A . ({body} /\\ {bubble_s}))")
        assert _same(pre, want_pre, names)
        post = normal_forms(pre, [LOOP_INVARIANT])
        assert len(post) == 1
        assert _same(post[0].expr, want_post, names)


def test_criterion_3_rule_combination():
    with criterion(3, "combined rules and normal forms on toy rules", 1):
        A, B, C, D = (Ref(x) for x in "ABCD")

        def arrow(src, dst):
            return RewriteRule(f"{src.name}->{dst.name}", lambda n, c: [dst] if n == src else None)

        rules = CombinedRules([arrow(A, B), arrow(A, C), arrow(B, D)])
        assert set(rules(A)) == {B, C}
        assert rules(C) == [C]
        assert rules(D) == [D]
        assert {nf.expr for nf in normal_forms(A, rules)} == {C, D}


def test_criterion_4_knapsack():
    with criterion(4, "knapsack: every model has optimum 5 at x = {3}", 10):
        src, params = corpus_text("knapsack")
        spec, models, _ = refine_text(src, params)
        ref = enumerate_abstract_solutions(spec)
        assert ref.optimum == 5
        assert ref.solutions == {freeze({"x": frozenset({3})})}
        assert models
        report = check_equivalence(spec, models)
        assert report.ok, "\n".join(report.lines())
        assert all(c.model_optimum == 5 for c in report.checks)


def test_criterion_5_corpus_equivalence():
    with criterion(5, "solution sets of every corpus model equal brute force", 120):
        names = corpus_names()
        assert len(names) >= 12
        failures = []
        for name in names:
            src, params = corpus_text(name)
            spec, models, _ = refine_text(src, params)
            assert models, name
            ref = enumerate_abstract_solutions(spec)
            for k, m in enumerate(models, 1):
                chk = check_model(m, ref, k)
                if not chk.passed:
                    failures.append(f"{name}: {chk.line()}")
        assert not failures, "\n".join(failures)


def test_criterion_6_representation_counts():
    with criterion(6, "one maxsize-2 set: 2 single-rep models, 4 per-constraint", 10):
        src, _ = corpus_text("rep_count")
        spec, single, _ = refine_text(src)
        assert sorted(m.rep_summary for m in single) == ["x#ExplicitFlags[-]", "x#Occurrence"]
        assert len(spec.constraints) == 2
        _, per, _ = refine_text(src, config=RefineConfig(mode="per-constraint"))
        assert len(per) == 4
        mixed = [m for m in per if "|" in m.rep_summary]
        assert len(mixed) == 2
        for m in per:
            assert ("channel" in m.origins) == (m in mixed)
        assert check_equivalence(spec, single + per).ok


def _count(text, tag):
    t = parse_domain(text)
    spec = Spec(tuple(leaf_decls("x", t, tag)), None,
                tuple(structural("x", t, tag, (), NameSupply())))
    return len(solve_refined_model(spec).solutions)


def test_criterion_7_structural_counts():
    with criterion(7, "structurally valid assignments match object counts", 30):
        occ, fixed, flags = (RepTag("Occurrence"), RepTag("ExplicitFixed", (None,)),
                             RepTag("ExplicitFlags", (None,)))
        f1d, f2d = RepTag("Func1D", (None,)), RepTag("Func2D")
        for n in range(1, 5):
            assert _count(f"set of int(1..{n})", occ) == 2 ** n
            for k in range(0, n + 1):
                exact = f"set (size {k}) of int(1..{n})"
                assert _count(exact, occ) == math.comb(n, k)
                assert _count(exact, fixed) == math.comb(n, k)
                upto = sum(math.comb(n, j) for j in range(k + 1))
                bounded = f"set (maxsize {k}) of int(1..{n})"
                assert _count(bounded, occ) == upto
                if k:
                    assert _count(bounded, flags) == upto
        for a in range(1, 5):
            for b in range(1, 5):
                total = f"function (total) int(1..{a}) -> int(1..{b})"
                assert _count(total, f1d) == b ** a
                assert _count(total, f2d) == b ** a
                assert _count(f"function int(1..{a}) -> int(1..{b})", f2d) == (b + 1) ** a


def test_criterion_8_flat_and_deterministic(tmp_path):
    with criterion(8, "models are flat, bubble-free, round-trip and are reproducible", 30):
        for name in corpus_names():
            src, params = corpus_text(name)
            runs = []
            for r in range(2):
                _, models, _ = refine_text(src, params)
                out = tmp_path / f"{name}_{r}"
                write_models(models, str(out), "source test")
                runs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
                if r:
                    continue
                for m in models:
                    assert model_problems(m.spec) == [], name
                    assert not any(isinstance(n, Bubble) for c in m.spec.constraints
                                   for n in walk(c)), name
                    back = parse_spec(print_model(m))
                    assert [d.name for d in back.decls] == [d.name for d in m.spec.decls]
                    assert len(back.constraints) == len(m.spec.constraints)
                    assert all(structural_eq(plain(a), plain(b))
                               for a, b in zip(back.constraints, m.spec.constraints)), name
            assert runs[0] == runs[1], name


def test_criterion_9_fault_injection():
    with criterion(9, "dropping any channel or structural constraint is caught", 10):
        src, _ = corpus_text("dual")
        spec, models, _ = refine_text(src, config=RefineConfig(mode="per-constraint"))
        ref = enumerate_abstract_solutions(spec)
        dual = [m for m in models if "|" in m.rep_summary]
        assert dual
        tried = 0
        survivors = []
        for m in dual:
            assert check_model(m, ref).passed
            for k, origin in enumerate(m.origins):
                if origin == "user":
                    continue
                tried += 1
                cons = m.spec.constraints[:k] + m.spec.constraints[k + 1:]
                chk = check_model(replace(m, spec=replace(m.spec, constraints=cons)), ref)
                if chk.passed or chk.witness is None:
                    survivors.append(f"{m.rep_summary} #{k} {origin}")
        assert tried > 0
        assert not survivors, "\n".join(survivors)
