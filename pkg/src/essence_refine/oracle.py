"""Brute-force reference semantics for specifications and refined models.

Abstract values are plain hashable Python objects:

* ``int`` / ``bool``
* ``frozenset`` for sets and relations (relations hold tuples)
* ``tuple`` for tuples
* :class:`FuncV` for function graphs
* :class:`MatrixV` for matrices

Undefined operations raise :class:`~essence_refine.errors.EvalError`.  The
error is absorbed as ``false`` by the innermost enclosing ``forall``/``exists``
body, or by the top of a constraint; that is the same place a refined model's
helper constraints end up, so both sides agree on partial operations.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from .ast import (BinOp, BoolLit, BoolT, Bubble, Expr, FuncApp, FuncInvApp, FuncLit,
                  FunctionT, IntLit, IntRange, MatrixIndex, MatrixLit, MatrixT, MSetT,
                  OverCollection, Quant, Ref, RelationT, RelProj, SetLit, SetT, Spec,
                  TupleIndex, TupleLit, TupleT, Underscore, UnOp, Exact, MaxSize)
from .errors import DecodeError, EvalError, TooLarge

CANDIDATE_CAP = 10 ** 7


def int_div(a: int, b: int) -> int:
    """Integer division truncating toward zero."""
    if b == 0:
        raise EvalError("division by zero")
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def int_mod(a: int, b: int) -> int:
    """Remainder with the sign of the dividend (pairs with :func:`int_div`)."""
    if b == 0:
        raise EvalError("modulo by zero")
    return a - b * int_div(a, b)


class FuncV(frozenset):
    """Function graph: a frozenset of ``(argument, image)`` pairs."""

    def __new__(cls, mapping=()):
        items = mapping.items() if isinstance(mapping, dict) else mapping
        return super().__new__(cls, items)

    def as_dict(self) -> dict:
        return dict(self)

    def __repr__(self) -> str:
        inner = ", ".join(f"{a!r} --> {b!r}" for a, b in sorted(self, key=repr))
        return f"function({inner})"


class MatrixV(tuple):
    """Matrix value: cells in index order; ``lo`` is the first index."""

    def __new__(cls, items, lo: int = 1):
        obj = super().__new__(cls, items)
        obj.lo = lo
        return obj

    def __getnewargs__(self):
        return (tuple(self), self.lo)

    def cell(self, i: int):
        k = i - self.lo
        if not 0 <= k < len(self):
            raise EvalError(f"matrix index {i} out of bounds")
        return self[k]

    def flat(self):
        for x in self:
            if isinstance(x, MatrixV):
                yield from x.flat()
            else:
                yield x


def _order_key(v):
    if isinstance(v, (frozenset, FuncV)):
        return (3, sorted(_order_key(x) for x in v))
    if isinstance(v, tuple):
        return (2, tuple(_order_key(x) for x in v))
    if isinstance(v, bool):
        return (0, int(v))
    return (1, v)


# --------------------------------------------------------------------------
# evaluation


def eval_expr(e: Expr, env: dict):
    """Evaluate ``e`` with free names bound in ``env``."""
    if isinstance(e, IntLit):
        return e.v
    if isinstance(e, BoolLit):
        return e.v
    if isinstance(e, Ref):
        try:
            return env[e.name]
        except KeyError:
            raise EvalError(f"unbound name '{e.name}'") from None
    if isinstance(e, UnOp):
        return _eval_unop(e.op, eval_expr(e.arg, env))
    if isinstance(e, BinOp):
        return _eval_binop(e.op, eval_expr(e.lhs, env), eval_expr(e.rhs, env))
    if isinstance(e, Quant):
        return _eval_quant(e, env)
    if isinstance(e, MatrixIndex):
        v = eval_expr(e.base, env)
        for i in e.indices:
            if not isinstance(v, MatrixV):
                raise EvalError("too many indices")
            v = v.cell(eval_expr(i, env))
        return v
    if isinstance(e, TupleIndex):
        return eval_expr(e.base, env)[e.index]
    if isinstance(e, FuncApp):
        f = eval_expr(e.func, env)
        x = eval_expr(e.arg, env)
        for a, b in f:
            if a == x:
                return b
        raise EvalError(f"function undefined at {x!r}")
    if isinstance(e, FuncInvApp):
        f = eval_expr(e.func, env)
        x = eval_expr(e.arg, env)
        return frozenset(a for a, b in f if b == x)
    if isinstance(e, RelProj):
        rel = eval_expr(e.rel, env)
        args = [None if isinstance(a, Underscore) else eval_expr(a, env) for a in e.args]
        free = [k for k, a in enumerate(args) if a is None]
        if not free:
            return tuple(args) in rel
        hits = [t for t in rel if all(a is None or a == t[k] for k, a in enumerate(args))]
        if len(free) == 1:
            return frozenset(t[free[0]] for t in hits)
        return frozenset(tuple(t[k] for k in free) for t in hits)
    if isinstance(e, TupleLit):
        return tuple(eval_expr(x, env) for x in e.items)
    if isinstance(e, SetLit):
        return frozenset(eval_expr(x, env) for x in e.items)
    if isinstance(e, FuncLit):
        return FuncV({eval_expr(a, env): eval_expr(b, env) for a, b in e.pairs})
    if isinstance(e, MatrixLit):
        return MatrixV([eval_expr(x, env) for x in e.items], e.index.lo)
    if isinstance(e, Bubble):
        raise EvalError("bubble reached the evaluator")
    raise EvalError(f"cannot evaluate {type(e).__name__}")


def _eval_unop(op: str, v):
    if op == "not":
        return not v
    if op == "negate":
        return -v
    if op == "abs":
        return abs(v)
    if op == "card":
        return len(v)
    if op in ("min", "max"):
        if not v:
            raise EvalError(f"{op} of an empty set")
        return min(v) if op == "min" else max(v)
    if op == "defined":
        return frozenset(a for a, _ in v)
    if op == "range":
        return frozenset(b for _, b in v)
    if op == "alldiff":
        cells = list(v.flat()) if isinstance(v, MatrixV) else list(v)
        return len(set(cells)) == len(cells)
    raise EvalError(f"unknown operator {op}")


def _eval_binop(op: str, a, b):
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        return int_div(a, b)
    if op == "%":
        return int_mod(a, b)
    if op == "=":
        return a == b
    if op == "!=":
        return a != b
    if op == "<":
        return a < b
    if op == ">":
        return a > b
    if op == "<=":
        return a <= b
    if op == ">=":
        return a >= b
    if op == "and":
        return a and b
    if op == "or":
        return a or b
    if op == "implies":
        return (not a) or b
    if op == "iff":
        return a == b
    if op == "elem":
        return a in b
    if op == "union":
        return a | b
    if op == "intersect":
        return a & b
    if op == "subset":
        return a < b
    if op == "subseteq":
        return a <= b
    if op == "supset":
        return a > b
    if op == "supseteq":
        return a >= b
    raise EvalError(f"unknown operator {op}")


def _eval_quant(q: Quant, env: dict):
    if isinstance(q.over, OverCollection):
        values = sorted(eval_expr(q.over.expr, env), key=_order_key)
    else:
        values = domain_values(q.over.domain)
    if q.kind == "sum":
        return sum(eval_expr(q.body, {**env, q.binder: v}) for v in values)
    want = q.kind == "exists"
    for v in values:
        try:
            r = eval_expr(q.body, {**env, q.binder: v})
        except EvalError:
            r = False
        if bool(r) == want:
            return want
    return not want


def holds(c: Expr, env: dict, undef: str = "exclude") -> bool:
    """Truth of a top-level constraint; errors count as false under ``exclude``."""
    try:
        return bool(eval_expr(c, env))
    except EvalError:
        if undef == "error":
            raise
        return False


# --------------------------------------------------------------------------
# domains


def domain_values(t) -> list:
    """All values of a finite domain in a deterministic order."""
    if isinstance(t, IntRange):
        return list(t.values())
    if isinstance(t, BoolT):
        return [False, True]
    if isinstance(t, SetT):
        elems = domain_values(t.elem)
        if isinstance(t.attr, Exact):
            sizes = [t.attr.n]
        elif isinstance(t.attr, MaxSize):
            sizes = range(0, t.attr.n + 1)
        else:
            sizes = range(0, len(elems) + 1)
        return [frozenset(c) for k in sizes for c in itertools.combinations(elems, k)]
    if isinstance(t, TupleT):
        return list(itertools.product(*(domain_values(c) for c in t.components)))
    if isinstance(t, RelationT):
        tuples = list(itertools.product(*(domain_values(c) for c in t.components)))
        return [frozenset(c) for k in range(len(tuples) + 1)
                for c in itertools.combinations(tuples, k)]
    if isinstance(t, FunctionT):
        frm, to = domain_values(t.frm), domain_values(t.to)
        choices = to if t.attrs.total else [None] + to
        out = []
        for images in itertools.product(choices, repeat=len(frm)):
            graph = {a: b for a, b in zip(frm, images) if b is not None}
            vals = list(graph.values())
            if t.attrs.injective and len(set(vals)) != len(vals):
                continue
            if t.attrs.surjective and set(vals) != set(to):
                continue
            out.append(FuncV(graph))
        return out
    if isinstance(t, MatrixT):
        return _matrix_values(t.indices, t.elem)
    if isinstance(t, MSetT):
        raise EvalError("multisets are not supported by the oracle")
    raise EvalError(f"domain {t} is not finite")


def _matrix_values(indices, elem) -> list:
    first, rest = indices[0], indices[1:]
    cell = _matrix_values(rest, elem) if rest else domain_values(elem)
    n = len(first.values())
    return [MatrixV(c, first.lo) for c in itertools.product(cell, repeat=n)]


def domain_count(t) -> int:
    """Number of candidate values (an upper bound when attributes filter)."""
    if isinstance(t, IntRange):
        return len(t.values())
    if isinstance(t, BoolT):
        return 2
    if isinstance(t, SetT):
        n = domain_count(t.elem)
        if isinstance(t.attr, Exact):
            return math.comb(n, t.attr.n)
        if isinstance(t.attr, MaxSize):
            return sum(math.comb(n, k) for k in range(t.attr.n + 1))
        return 2 ** n
    if isinstance(t, TupleT):
        return math.prod(domain_count(c) for c in t.components)
    if isinstance(t, RelationT):
        return 2 ** math.prod(domain_count(c) for c in t.components)
    if isinstance(t, FunctionT):
        k = domain_count(t.to) + (0 if t.attrs.total else 1)
        return k ** domain_count(t.frm)
    if isinstance(t, MatrixT):
        cells = math.prod(len(i.values()) for i in t.indices)
        return domain_count(t.elem) ** cells
    raise EvalError(f"domain {t} is not finite")


# --------------------------------------------------------------------------
# abstract enumeration


def freeze(solution: dict) -> tuple:
    return tuple(sorted(solution.items()))


@dataclass
class SolutionSet:
    """All solutions (or all optimal solutions) of a specification or model."""

    solutions: set = field(default_factory=set)
    optimum: object = None
    raw_count: int = 0  # solutions before decoding/projection


def constant_env(spec: Spec) -> dict:
    env = {}
    for d in spec.decls:
        if d.kind == "letting" and d.value is not None:
            env[d.name] = eval_expr(d.value, env)
    return env


def enumerate_abstract_solutions(spec: Spec, undef: str = "exclude",
                                 cap: int = CANDIDATE_CAP) -> SolutionSet:
    """Every assignment of the find variables satisfying all constraints."""
    finds = [d for d in spec.decls if d.kind == "find"]
    total = math.prod(domain_count(d.domain) for d in finds) if finds else 1
    if total > cap:
        raise TooLarge(f"{total} candidate assignments exceed the cap of {cap}")
    base = constant_env(spec)
    names = [d.name for d in finds]
    pools = [domain_values(d.domain) for d in finds]
    result = SolutionSet()
    best = None
    for combo in itertools.product(*pools):
        env = {**base, **dict(zip(names, combo))}
        if not all(holds(c, env, undef) for c in spec.constraints):
            continue
        sol = freeze(dict(zip(names, combo)))
        if spec.objective is None:
            result.solutions.add(sol)
            continue
        try:
            val = eval_expr(spec.objective.expr, env)
        except EvalError:
            if undef == "error":
                raise
            continue
        better = (best is None or (val > best if spec.objective.direction == "maximising"
                                   else val < best))
        if better:
            best = val
            result.solutions = {sol}
        elif val == best:
            result.solutions.add(sol)
    result.optimum = best
    result.raw_count = len(result.solutions)
    return result


# --------------------------------------------------------------------------
# flat models: a small backtracking solver
#
# Every cell of every find/aux matrix is one variable.  Top-level ``forall``
# and ``/\`` are unrolled into ground constraints; each is compiled to a
# closure over the assignment array and checked as soon as its last cell is
# assigned.

SEARCH_CAP = 5 * 10 ** 7


class _Const:
    __slots__ = ("v",)

    def __init__(self, v):
        self.v = v


class _Fn:
    __slots__ = ("fn", "deps")

    def __init__(self, fn, deps):
        self.fn = fn
        self.deps = frozenset(deps)


def _raise(msg):
    def fn(a):
        raise EvalError(msg)
    return fn


def _run(node):
    """The closure of a compiled node."""
    if isinstance(node, _Const):
        v = node.v
        return lambda a: v
    return node.fn


class _Compiler:
    def __init__(self, spec: Spec):
        self.consts = constant_env(spec)
        self.cells: list = []  # (name, idx)
        self.domains: list = []
        self.ids: dict = {}
        self.shapes: dict = {}  # matrix name -> index ranges
        pending = []
        for d in spec.decls:
            if d.kind not in ("find", "aux"):
                continue
            t = d.domain
            dims = t.indices if isinstance(t, MatrixT) else ()
            elem = t.elem if isinstance(t, MatrixT) else t
            self.shapes[d.name] = dims
            vals = domain_values(elem)
            for idx in itertools.product(*(r.values() for r in dims)):
                pending.append((idx, len(pending), d.name, vals))
        # interleave matrices by index so related cells are assigned close together
        for idx, _, name, vals in sorted(pending, key=lambda p: (p[0], p[1])):
            self.ids[(name, idx)] = len(self.cells)
            self.cells.append((name, idx))
            self.domains.append(vals)

    def ground(self, e: Expr, env: dict) -> list:
        """Split a constraint into compiled ground pieces."""
        if isinstance(e, BinOp) and e.op == "and":
            return self.ground(e.lhs, env) + self.ground(e.rhs, env)
        if isinstance(e, Quant) and e.kind == "forall" and not isinstance(e.over, OverCollection):
            out = []
            for v in domain_values(e.over.domain):
                pieces = self.ground(e.body, {**env, e.binder: v})
                # an undefined instance is false, not an error
                out += [self._absorb(p) for p in pieces]
            return out
        return [self.compile(e, env)]

    @staticmethod
    def _absorb(node):
        if isinstance(node, _Const):
            return node
        fn = node.fn

        def safe(a):
            try:
                return fn(a)
            except EvalError:
                return False
        return _Fn(safe, node.deps)

    def compile(self, e: Expr, env: dict):
        if isinstance(e, (IntLit, BoolLit)):
            return _Const(e.v)
        if isinstance(e, Ref):
            if e.name in env:
                return _Const(env[e.name])
            if e.name in self.consts:
                return _Const(self.consts[e.name])
            k = self.ids.get((e.name, ()))
            if k is None:
                return _Fn(_raise(f"unknown name '{e.name}'"), ())
            return _Fn(lambda a: a[k], (k,))
        if isinstance(e, MatrixIndex):
            return self._index(e, env)
        if isinstance(e, UnOp):
            if e.op == "alldiff":
                return self._alldiff(e.arg, env)
            arg = self.compile(e.arg, env)
            op = e.op
            if isinstance(arg, _Const):
                return _Const(_eval_unop(op, arg.v))
            f = arg.fn
            return _Fn(lambda a: _eval_unop(op, f(a)), arg.deps)
        if isinstance(e, BinOp):
            lhs, rhs = self.compile(e.lhs, env), self.compile(e.rhs, env)
            op = e.op
            if isinstance(lhs, _Const) and isinstance(rhs, _Const):
                try:
                    return _Const(_eval_binop(op, lhs.v, rhs.v))
                except EvalError as exc:
                    return _Fn(_raise(str(exc)), ())
            f, g = _run(lhs), _run(rhs)
            deps = _deps(lhs) | _deps(rhs)
            return _Fn(lambda a: _eval_binop(op, f(a), g(a)), deps)
        if isinstance(e, Quant) and not isinstance(e.over, OverCollection):
            parts = [self.compile(e.body, {**env, e.binder: v})
                     for v in domain_values(e.over.domain)]
            return self._quant(e.kind, parts)
        raise EvalError(f"not a flat expression: {type(e).__name__}")

    def _quant(self, kind, parts):
        if kind == "sum":
            if all(isinstance(p, _Const) for p in parts):
                return _Const(sum(p.v for p in parts))
            fns = [_run(p) for p in parts]
            return _Fn(lambda a: sum(f(a) for f in fns), _union(parts))
        want = kind == "exists"
        fns = [_run(p) for p in parts]

        def fn(a):
            for f in fns:
                try:
                    r = f(a)
                except EvalError:
                    r = False
                if bool(r) == want:
                    return want
            return not want
        if all(isinstance(p, _Const) for p in parts):
            return _Const(fn(None))
        return _Fn(fn, _union(parts))

    def _index(self, e: MatrixIndex, env):
        if not isinstance(e.base, Ref):
            raise EvalError("indexing a non-variable")
        idx = [self.compile(i, env) for i in e.indices]
        name = e.base.name
        if name in self.consts:
            m = self.consts[name]
            if all(isinstance(i, _Const) for i in idx):
                try:
                    v = m
                    for i in idx:
                        v = v.cell(i.v)
                    return _Const(v)
                except EvalError as exc:
                    return _Fn(_raise(str(exc)), ())
            fns = [_run(i) for i in idx]

            def cfn(a):
                v = m
                for f in fns:
                    v = v.cell(f(a))
                return v
            return _Fn(cfn, _union(idx))
        if name not in self.shapes:
            return _Fn(_raise(f"unknown matrix '{name}'"), ())
        ids = self.ids
        if all(isinstance(i, _Const) for i in idx):
            k = ids.get((name, tuple(i.v for i in idx)))
            if k is None:
                return _Fn(_raise(f"index out of bounds in '{name}'"), ())
            return _Fn(lambda a: a[k], (k,))
        fns = [_run(i) for i in idx]
        deps = {k for (n, _), k in ids.items() if n == name} | _union(idx)

        def vfn(a):
            k = ids.get((name, tuple(f(a) for f in fns)))
            if k is None:
                raise EvalError(f"index out of bounds in '{name}'")
            return a[k]
        return _Fn(vfn, deps)

    def _alldiff(self, arg, env):
        if isinstance(arg, Ref) and arg.name in self.shapes:
            ks = [k for (n, _), k in self.ids.items() if n == arg.name]
            return _Fn(lambda a: len({a[k] for k in ks}) == len(ks), ks)
        node = self.compile(arg, env)
        if isinstance(node, _Const):
            vals = list(node.v.flat())
            return _Const(len(set(vals)) == len(vals))
        raise EvalError("alldiff needs a matrix")


def _deps(node) -> frozenset:
    return node.deps if isinstance(node, _Fn) else frozenset()


def _union(nodes) -> set:
    out = set()
    for n in nodes:
        out |= _deps(n)
    return out


def _matrix_value(comp: _Compiler, name: str, a: list):
    dims = comp.shapes[name]
    if not dims:
        return a[comp.ids[(name, ())]]

    def build(prefix, rest):
        r = rest[0]
        if len(rest) == 1:
            return MatrixV([a[comp.ids[(name, prefix + (i,))]] for i in r.values()], r.lo)
        return MatrixV([build(prefix + (i,), rest[1:]) for i in r.values()], r.lo)
    return build((), dims)


def solve_refined_model(model, undef: str = "exclude", cap: int = SEARCH_CAP) -> SolutionSet:
    """All solutions (all optimal ones when there is an objective) of a flat model.

    ``model`` is a :class:`~essence_refine.emit.FlatModel` or a flat Spec.

    Solutions are frozen ``name -> value`` maps over every find and aux
    variable; matrices are :class:`MatrixV`.
    """
    spec = model if isinstance(model, Spec) else model.spec
    comp = _Compiler(spec)
    n = len(comp.cells)
    checks: list = [[] for _ in range(n)]
    for c in spec.constraints:
        for piece in comp.ground(c, {}):
            if undef == "exclude":
                piece = comp._absorb(piece)
            if isinstance(piece, _Const) or not piece.deps:
                try:
                    ok = _run(piece)(None)
                except EvalError:
                    if undef == "error":
                        raise
                    ok = False
                if not ok:
                    return SolutionSet()
                continue
            checks[max(piece.deps)].append(piece.fn)
    obj = comp.compile(spec.objective.expr, {}) if spec.objective is not None else None
    names = list(comp.shapes)
    result = SolutionSet()
    best = [None]
    a: list = [None] * n
    nodes = [0]

    def record():
        sol = freeze({nm: _matrix_value(comp, nm, a) for nm in names})
        if obj is None:
            result.solutions.add(sol)
            return
        try:
            val = _run(obj)(a)
        except EvalError:
            if undef == "error":
                raise
            return
        maxi = spec.objective.direction == "maximising"
        if best[0] is None or (val > best[0] if maxi else val < best[0]):
            best[0] = val
            result.solutions = {sol}
        elif val == best[0]:
            result.solutions.add(sol)

    def search(k):
        if k == n:
            record()
            return
        for v in comp.domains[k]:
            nodes[0] += 1
            if nodes[0] > cap:
                raise TooLarge(f"flat search exceeded {cap} nodes")
            a[k] = v
            if all(f(a) for f in checks[k]):
                search(k + 1)
        a[k] = None

    search(0)
    result.optimum = best[0]
    result.raw_count = len(result.solutions)
    return result


# --------------------------------------------------------------------------
# decoding flat solutions back to abstract values


def _get(flat: dict, name: str, idx: tuple):
    v = flat[name]
    for i in idx:
        v = v.cell(i)
    return v


def decode_value(flat: dict, name: str, t, rep, idx: tuple = ()):
    """Rebuild the abstract value stored under base ``name`` with tag ``rep``."""
    from .representation import explicit_bound, relation_as_set

    if rep is None:
        return _get(flat, name, idx)
    k = rep.kind
    if k == "Occurrence":
        return frozenset(v for v in t.elem.values() if _get(flat, name + "_occ", idx + (v,)))
    if k == "ExplicitFixed":
        n = explicit_bound(t)
        vals = [decode_value(flat, name + "_exp", t.elem, rep.children[0], idx + (j,))
                for j in range(1, n + 1)]
        if len(set(vals)) != n:
            raise DecodeError(f"repeated element in '{name}'")
        return frozenset(vals)
    if k == "ExplicitFlags":
        n = explicit_bound(t)
        vals = [decode_value(flat, name + "_exf_0", t.elem, rep.children[0], idx + (j,))
                for j in range(1, n + 1)
                if _get(flat, name + "_exf_1", idx + (j,))]
        if len(set(vals)) != len(vals):
            raise DecodeError(f"repeated element in '{name}'")
        if isinstance(t.attr, Exact) and len(vals) != t.attr.n:
            raise DecodeError(f"wrong cardinality in '{name}'")
        return frozenset(vals)
    if k == "Func1D":
        return FuncV({i: decode_value(flat, name + "_f1d", t.to, rep.children[0], idx + (i,))
                      for i in t.frm.values()})
    if k == "Func2D":
        graph = {}
        for i in t.frm.values():
            js = [j for j in t.to.values() if _get(flat, name + "_f2d", idx + (i, j))]
            if len(js) > 1 or (t.attrs.total and not js):
                raise DecodeError(f"row {i} of '{name}' is not a function row")
            if js:
                graph[i] = js[0]
        return FuncV(graph)
    if k == "RelSetOfTuples":
        return decode_value(flat, name + "_rel", relation_as_set(t), rep.children[0], idx)
    if k == "Tuple":
        return tuple(decode_value(flat, f"{name}_{j}", c, r, idx)
                     for j, (c, r) in enumerate(zip(t.components, rep.children)))
    raise DecodeError(f"unknown representation {rep}")


def decode_solution(flat_solution, model) -> tuple:
    """Abstract solution (frozen) encoded by one flat solution of ``model``."""
    from .representation import cell_type, matrix_dims

    flat = dict(flat_solution)
    out = {}
    for d in model.source.decls:
        if d.kind != "find":
            continue
        if not _is_abstract_domain(d.domain):
            out[d.name] = flat[d.name]
            continue
        tag = model.assignment.tags(d.name)[0]
        t, dims = cell_type(d.domain), matrix_dims(d.domain)

        def build(prefix, rest):
            if not rest:
                return decode_value(flat, d.name, t, tag, prefix)
            r = rest[0]
            return MatrixV([build(prefix + (i,), rest[1:]) for i in r.values()], r.lo)
        out[d.name] = build((), dims)
    return freeze(out)


def _is_abstract_domain(t) -> bool:
    from .ast import is_abstract
    return is_abstract(t)


# --------------------------------------------------------------------------
# equivalence checking


@dataclass
class ModelCheck:
    index: int
    rep: str
    passed: bool
    abstract_count: int
    model_count: int  # distinct decoded solutions
    raw_count: int  # flat solutions
    abstract_optimum: object = None
    model_optimum: object = None
    witness: object = None  # (direction, solution)
    injective: bool = True
    message: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        rel = "=" if self.abstract_count == self.model_count else "!="
        text = (f"model {self.index} [{self.rep}]: {status} "
                f"{self.abstract_count} {rel} {self.model_count} (raw {self.raw_count})")
        if self.abstract_optimum is not None or self.model_optimum is not None:
            text += f" optimum={self.abstract_optimum}/{self.model_optimum}"
        if not self.injective:
            text += " non-injective"
        if self.witness is not None:
            direction, sol = self.witness
            text += f" {direction}: {show_solution(sol)}"
        if self.message:
            text += f" ({self.message})"
        return text


@dataclass
class Report:
    checks: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self) -> list:
        return [c.line() for c in self.checks]


def show_solution(sol) -> str:
    return "{" + ", ".join(f"{k}={_show_value(v)}" for k, v in sol) + "}"


def _show_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, FuncV):
        return "function(" + ", ".join(f"{_show_value(a)} --> {_show_value(b)}"
                                       for a, b in sorted(v, key=_order_key)) + ")"
    if isinstance(v, MatrixV):
        return "[" + ", ".join(_show_value(x) for x in v) + "]"
    if isinstance(v, frozenset):
        return "{" + ", ".join(_show_value(x) for x in sorted(v, key=_order_key)) + "}"
    if isinstance(v, tuple):
        return "(" + ", ".join(_show_value(x) for x in v) + ")"
    return str(v)


def _canonical_tag(rep) -> bool:
    """True when every abstract value has exactly one flat encoding under ``rep``."""
    if rep is None:
        return True
    if rep.kind == "Tuple":
        return all(_canonical_tag(c) for c in rep.children)
    if rep.kind in ("ExplicitFixed", "ExplicitFlags"):
        # ordering of non-flat elements is only pairwise-distinct, so permutations repeat
        return rep.children[0] is None or (rep.children[0].kind == "Tuple" and all(
            c is None for c in rep.children[0].children))
    return all(_canonical_tag(c) for c in rep.children)


def model_is_canonical(model) -> bool:
    return all(_canonical_tag(t) for v, _ in model.assignment.slots
               for t in model.assignment.tags(v))


def check_model(model, reference: SolutionSet, index: int = 1,
                undef: str = "exclude", cap: int = SEARCH_CAP) -> ModelCheck:
    """Compare one flat model's decoded solutions with the abstract ones."""
    flat = solve_refined_model(model, undef, cap)
    decoded, bad = {}, []  # abstract solution -> number of flat encodings
    for s in flat.solutions:
        try:
            d = decode_solution(s, model)
        except DecodeError as exc:
            bad.append((show_solution(s), s, str(exc)))
            continue
        decoded[d] = decoded.get(d, 0) + 1
    rep = model.rep_summary
    injective = sum(decoded.values()) == len(decoded)
    chk = ModelCheck(index, rep, True, len(reference.solutions), len(decoded), flat.raw_count,
                     reference.optimum, flat.optimum, injective=injective)
    spurious = sorted(decoded.keys() - reference.solutions, key=_order_key)
    missing = sorted(reference.solutions - decoded.keys(), key=_order_key)
    if bad:
        # the flat assignment itself is the witness: it encodes no abstract object
        _, sol, why = min(bad)
        chk.passed, chk.witness = False, ("undecodable", sol)
        chk.message = why
    elif reference.optimum != flat.optimum:
        chk.passed, chk.message = False, "optimum differs"
    if chk.witness is not None:
        pass
    elif spurious:
        chk.passed, chk.witness = False, ("spurious", spurious[0])
    elif missing:
        chk.passed, chk.witness = False, ("missing", missing[0])
    if chk.passed and not injective and model_is_canonical(model):
        dup = sorted((d for d, k in decoded.items() if k > 1), key=_order_key)
        chk.passed, chk.witness = False, ("duplicated", dup[0])
        chk.message = f"{decoded[dup[0]]} flat encodings"
    return chk


def check_equivalence(spec: Spec, models: list, undef: str = "exclude",
                      cap: int = CANDIDATE_CAP) -> Report:
    """Check every model against brute-force enumeration of ``spec``."""
    reference = enumerate_abstract_solutions(spec, undef, cap)
    return Report([check_model(m, reference, k, undef) for k, m in enumerate(models, 1)])
