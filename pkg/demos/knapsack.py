"""Refine the knapsack specification, print every model and certify it.

Run from the repository root:  python demos/knapsack.py
"""

from essence_refine.emit import print_model
from essence_refine.oracle import check_equivalence, enumerate_abstract_solutions, show_solution
from essence_refine.pipeline import refine_text

SPEC = """\
given item_count : int(1..)
letting items be domain int(1..item_count)
given capacity : int(1..)
given volume, value : function (total) items -> int(1..)
find x : set of items
maximising sum i : x . value(i)
such that (sum i : x . volume(i)) <= capacity
"""

PARAMS = """\
letting item_count be 3
letting capacity be 4
letting volume be function(1 --> 2, 2 --> 3, 3 --> 4)
letting value be function(1 --> 3, 2 --> 4, 3 --> 5)
"""


def main():
    spec, models, warnings = refine_text(SPEC, PARAMS)
    for w in warnings:
        print("warning:", w)

    # brute force over all subsets of the three items
    ref = enumerate_abstract_solutions(spec)
    best = ", ".join(show_solution(s) for s in ref.solutions)
    print(f"abstract optimum {ref.optimum} at {best}\n")

    for k, m in enumerate(models, 1):
        print(f"--- model {k} ---")
        print(print_model(m))

    report = check_equivalence(spec, models)
    print("\n".join(report.lines()))
    print("all equivalent" if report.ok else "MISMATCH")


if __name__ == "__main__":
    main()
