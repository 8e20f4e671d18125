"""Non-deterministic rewriting: rule combination, traversal and normal forms."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from .ast import (BoolT, Bubble, Expr, MatrixIndex, NameSupply, Ref, canonical, children,
                  conjoin, with_children)
from .errors import DanglingBubble, ResourceLimit

MAX_STEPS = 100_000
MAX_MODELS = 64


@dataclass
class RuleContext:
    """What a rule may look at besides the matched node.

    ``parents`` runs from the root down to the matched node's parent.  Only
    ``supply`` is mutable (fresh names).
    """

    decls: dict = field(default_factory=dict)
    supply: NameSupply = field(default_factory=NameSupply)
    parents: tuple = ()
    options: dict = field(default_factory=dict)

    def at(self, parents: tuple) -> "RuleContext":
        return RuleContext(self.decls, self.supply, parents, self.options)

    @property
    def parent(self) -> Optional[Expr]:
        return self.parents[-1] if self.parents else None


@dataclass(frozen=True)
class RewriteRule:
    """``match(node, ctx)`` returns replacement alternatives, or None/[] for no match.

    ``priority`` rules (the bubble passes) pre-empt ordinary rules at a node.
    """

    name: str
    match: Callable
    priority: bool = False

    def __call__(self, node, ctx) -> list:
        out = self.match(node, ctx)
        return list(out) if out else []


class CombinedRules:
    """Union of a rule list, total on every node (identity when nothing matches)."""

    def __init__(self, rules):
        self.rules = list(rules)

    def matches(self, node: Expr, ctx: RuleContext) -> list:
        """(rule name, replacement) for every matching rule; priority rules first."""
        for group in (True, False):
            found = []
            for r in self.rules:
                if r.priority != group:
                    continue
                for alt in r(node, ctx):
                    if all(alt != f for _, f in found):
                        found.append((r.name, alt))
            if found:
                return found
        return []

    def __call__(self, node: Expr, ctx: RuleContext = None) -> list:
        ctx = ctx or RuleContext()
        found = self.matches(node, ctx)
        return [e for _, e in found] if found else [node]


def combine_rules(rules) -> CombinedRules:
    return rules if isinstance(rules, CombinedRules) else CombinedRules(rules)


def _replace_at(root: Expr, path: tuple, new: Expr) -> Expr:
    if not path:
        return new
    kids = children(root)
    kids[path[0]] = _replace_at(kids[path[0]], path[1:], new)
    return with_children(root, kids)


def _first_redex(node: Expr, rules: CombinedRules, ctx: RuleContext, parents: tuple,
                 path: tuple):
    for k, c in enumerate(children(node)):
        hit = _first_redex(c, rules, ctx, parents + (node,), path + (k,))
        if hit is not None:
            return hit
    found = rules.matches(node, ctx.at(parents))
    if found:
        return path, found
    return None


def rewrite_step(root: Expr, rules, ctx: RuleContext = None) -> list:
    """One-step successors at the leftmost-innermost redex: [(new root, rule name)]."""
    rules = combine_rules(rules)
    ctx = ctx or RuleContext()
    hit = _first_redex(root, rules, ctx, (), ())
    if hit is None:
        return []
    path, found = hit
    return [(_replace_at(root, path, alt), name) for name, alt in found]


@dataclass
class NormalForm:
    expr: Expr
    trace: tuple  # rule names along the path
    steps: int = 0


def normal_forms(root: Expr, rules, ctx: RuleContext = None, max_steps: int = MAX_STEPS,
                 max_models: int = MAX_MODELS) -> list:
    """Every normal form reachable from ``root``, deduplicated up to alpha-equivalence.

    Depth-first over alternatives, so the output order is deterministic.
    """
    rules = combine_rules(rules)
    ctx = ctx or RuleContext()
    stack = [(root, ())]
    seen = set()
    out, keys = [], set()
    steps = 0
    longest: tuple = ()
    while stack:
        e, trace = stack.pop()
        key = canonical(e)
        if key in seen:
            continue
        seen.add(key)
        succ = rewrite_step(e, rules, ctx)
        if not succ:
            if key not in keys:
                keys.add(key)
                out.append(NormalForm(e, trace, len(trace)))
                if len(out) > max_models:
                    raise ResourceLimit(f"more than {max_models} normal forms", trace)
            continue
        steps += len(succ)
        if len(trace) + 1 > len(longest):
            longest = trace + (succ[0][1],)
        if steps > max_steps:
            raise ResourceLimit(f"more than {max_steps} rewrite steps", longest)
        for new, name in reversed(succ):
            stack.append((new, trace + (name,)))
    return out


def lift_indexed(node: Expr):
    """View ``x`` or ``x[i,..]`` as an atom: (base reference, index trail).

    The base reference carries the representation of the cells.  Anything
    else (e.g. ``s1 union s2``) returns None.
    """
    if isinstance(node, Ref):
        return node, ()
    if isinstance(node, MatrixIndex) and isinstance(node.base, Ref):
        return node.base, tuple(node.indices)
    return None


def finalize_bubbles(root: Expr):
    """Turn every ``v @ h`` (v bool) into ``v /\\ h``; returns (expr, aux decls)."""
    aux = []

    def go(e: Expr, pos_bool: bool) -> Expr:
        if isinstance(e, Bubble):
            if not isinstance(e.typ, BoolT) and not isinstance(e.value.typ, BoolT):
                raise DanglingBubble("bubble left at a non-boolean position")
            for d in e.aux_decls:
                aux.append(d)
            value = go(e.value, True)
            return conjoin([value] + [go(p.helper, True) for p in e.parts])
        kids = children(e)
        if not kids:
            return e
        new = [go(c, False) for c in kids]
        if all(a is b for a, b in zip(new, kids)):
            return e
        return with_children(e, new)

    return go(root, True), aux
