"""Step through the rewrites of a constraint that uses max() inside a quantifier.

Shows every intermediate term: max() introduces an auxiliary with helper
constraints (a bubble), bubbles float upward, turn into conjunctions, and
the helper that does not mention the quantified set is hoisted out.

Run from the repository root:  python demos/bubbles.py
"""

from essence_refine.ast import NameSupply
from essence_refine.checker import load
from essence_refine.engine import RuleContext, finalize_bubbles, rewrite_step
from essence_refine.oracle import constant_env
from essence_refine.printer import print_domain, print_expr
from essence_refine.representation import taken_names
from essence_refine.rules import BUBBLE_RULES, LOOP_INVARIANT, RULES_BY_NAME

SPEC = """\
given lb, ub, n, m, k : int
find t : set (size n) of int(lb..ub)
find A : set (size n) of set (size m) of int(lb..ub)
such that
forall s : A . (max(s) - max(t) = k) => (k elem s)
"""

PARAMS = "letting lb be 1\nletting ub be 3\nletting n be 2\nletting m be 2\nletting k be 1\n"


def main():
    spec, _ = load(SPEC, PARAMS)
    ctx = RuleContext({d.name: d for d in spec.decls}, NameSupply(taken_names(spec)),
                      options={"consts": constant_env(spec), "close_bubbles": False})
    rules = [RULES_BY_NAME["set_min_max"]] + BUBBLE_RULES

    e = spec.constraints[0]
    print("start:       ", print_expr(e))
    while True:
        succ = rewrite_step(e, rules, ctx)
        if not succ:
            break
        e, name = succ[0]  # this rule set is confluent here: one successor per step
        print(f"{name + ':':13}", print_expr(e))

    e, aux = finalize_bubbles(e)
    print("\n@ as /\\:     ", print_expr(e))
    print("auxiliaries: ", ", ".join(f"{d.name} : {print_domain(d.domain)}" for d in aux))

    while True:
        succ = rewrite_step(e, [LOOP_INVARIANT])
        if not succ:
            break
        e, _ = succ[0]
    print("\nhoisted:     ", print_expr(e))


if __name__ == "__main__":
    main()
