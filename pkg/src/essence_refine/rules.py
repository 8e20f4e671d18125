"""The rewrite-rule database.

Rule names are stable identifiers: they appear in ``--trace`` output and in
the ``$ rules:`` header of emitted models.  Rules whose name starts with
``inv_`` have no printed counterpart in the rule listings they accompany;
each one is covered by an oracle equivalence test like the others.
"""

from __future__ import annotations

from dataclasses import replace

from .ast import (BOOL, INT, BinOp, BoolLit, BoolT, Bubble, BubblePart, Decl, Exact, Expr, FuncApp,
                  FunctionT, IntLit, IntRange, MatrixIndex, MatrixT, OverCollection,
                  OverDomain, Quant, Ref, RelationT, RelProj, RepTag, SetLit, SetT, TupleIndex,
                  TupleLit, TupleT, Unbounded, Underscore, UnOp, add_all, binop, conjoin, disjoin,
                  free_vars, index, is_abstract, lit, quant, split_conjunction, substitute,
                  tuple_index, unop, walk)
from .engine import RewriteRule, lift_indexed
from .errors import EvalError, RefinementError
from .oracle import FuncV, eval_expr
from .representation import (explicit_bound, flags_view, matrix_dims, relation_as_set,
                             rep_ref)


# --------------------------------------------------------------------------
# helpers


def _set_atom(e: Expr):
    """(base ref, trail) when ``e`` is an atomic or indexed set expression."""
    if not isinstance(e.typ, SetT):
        return None
    return lift_indexed(e)


def _operand_ok(e: Expr) -> bool:
    return lift_indexed(e) is not None or isinstance(e, SetLit)


def _binder(ctx, q: Quant, avoid: Expr) -> str:
    return q.binder if q.binder not in free_vars(avoid) else ctx.supply.fresh("q")


def _bubble(value: Expr, helper: Expr, aux=(), total=False) -> Bubble:
    return Bubble(value, (BubblePart(helper, tuple(aux), total),), typ=value.typ)


def _is_true(e: Expr) -> Expr:
    return binop("=", e, lit(True))


def _guarded(kind: str, guard: Expr, body: Expr, flag_sum=False) -> Expr:
    if kind == "forall":
        return binop("implies", guard, body)
    if kind == "exists":
        return binop("and", guard, body)
    return binop("*", guard, body)


def _occ(ref: Ref, trail: tuple, t: SetT, v: Expr) -> Expr:
    dims = matrix_dims(ref.typ)
    return index(rep_ref(ref.name, "_occ", dims + (t.elem,), BOOL), trail + (v,))


def _exp(ref: Ref, trail: tuple, t: SetT, j: Expr) -> Expr:
    dims = matrix_dims(ref.typ)
    r = IntRange(1, explicit_bound(t))
    return index(rep_ref(ref.name, "_exp", dims + (r,), t.elem, ref.rep.children[0]),
                 trail + (j,))


def _flag_cell(ref: Ref, trail: tuple, t: SetT, j: Expr) -> Expr:
    dims = matrix_dims(ref.typ)
    return index(flags_view(ref.name, dims, t, ref.rep.children[0]), trail + (j,))


def _int_range(t):
    return isinstance(t, IntRange) and t.bounded


def _const_literal(v, typ) -> Expr:
    if isinstance(v, bool):
        return BoolLit(v, typ=BOOL)
    if isinstance(v, int):
        return IntLit(v, typ=IntRange(v, v))
    if isinstance(v, tuple):
        items = tuple(_const_literal(x, c) for x, c in zip(v, typ.components))
        return TupleLit(items, typ=typ)
    if isinstance(v, frozenset):
        elem = typ.elem if isinstance(typ, SetT) else INT
        items = tuple(_const_literal(x, elem) for x in sorted(v, key=_key))
        return SetLit(items, typ=SetT(Unbounded(), elem))
    raise TypeError(v)


def _key(v):
    return (1, tuple(_key(x) for x in v)) if isinstance(v, tuple) else (0, v)


def _literal_items(s: SetLit):
    """Distinct constant items of a set literal, or None if any item is not constant."""
    out = []
    for x in s.items:
        if not _is_constant_literal(x):
            return None
        if x not in out:
            out.append(x)
    return out


def _is_constant_literal(x) -> bool:
    if isinstance(x, (IntLit, BoolLit)):
        return True
    return isinstance(x, TupleLit) and all(_is_constant_literal(i) for i in x.items)


def _sets(node: BinOp) -> bool:
    return isinstance(node.lhs.typ, SetT) and isinstance(node.rhs.typ, SetT)


# --------------------------------------------------------------------------
# set comparisons


def rule_set_subseteq(node, ctx):
    """``a subseteq b`` ~> ``forall i : a . i elem b``."""
    if not (isinstance(node, BinOp) and node.op == "subseteq" and _sets(node)):
        return None
    a, b = node.lhs, node.rhs
    if not (_operand_ok(a) and _operand_ok(b)):
        return None
    i = ctx.supply.fresh("q")
    elem = a.typ.elem
    return [quant("forall", i, OverCollection(a), binop("elem", Ref(i, typ=elem), b))]


def rule_set_eq(node, ctx):
    """``a = b`` ~> ``a subseteq b /\\ b subseteq a``."""
    if not (isinstance(node, BinOp) and node.op == "=" and _sets(node)):
        return None
    if not (_operand_ok(node.lhs) and _operand_ok(node.rhs)):
        return None
    return [binop("and", binop("subseteq", node.lhs, node.rhs),
                  binop("subseteq", node.rhs, node.lhs))]


def rule_set_ops(node, ctx):
    """``!=``, ``supset``, ``supseteq`` and ``subset`` in terms of ``=``/``subseteq``."""
    if not (isinstance(node, BinOp) and _sets(node)):
        return None
    a, b = node.lhs, node.rhs
    if not (_operand_ok(a) and _operand_ok(b)):
        return None
    if node.op == "!=":
        return [unop("not", binop("=", a, b))]
    if node.op == "supset":
        return [binop("subset", b, a)]
    if node.op == "supseteq":
        return [binop("subseteq", b, a)]
    if node.op == "subset":
        return [binop("and", binop("subseteq", a, b), binop("!=", a, b))]
    return None


def _occ_elem_applies(node) -> bool:
    e, s = node.lhs, node.rhs
    lifted = _set_atom(s)
    if lifted is None or lifted[0].rep is None or lifted[0].rep.kind != "Occurrence":
        return False
    et, dom = e.typ, s.typ.elem
    return _int_range(et) and _int_range(dom) and dom.lo <= et.lo and et.hi <= dom.hi


def rule_set_elem(node, ctx):
    """``e elem s`` ~> ``exists i : s . i = e`` (unless occurrence membership applies)."""
    if not (isinstance(node, BinOp) and node.op == "elem" and isinstance(node.rhs.typ, SetT)):
        return None
    if _set_atom(node.rhs) is None or _occ_elem_applies(node):
        return None
    i = ctx.supply.fresh("q")
    return [quant("exists", i, OverCollection(node.rhs),
                  binop("=", Ref(i, typ=node.rhs.typ.elem), node.lhs))]


def rule_inv_occ_elem(node, ctx):
    """``e elem s`` with s in occurrence form and e within its domain ~> ``s_occ[e] = true``."""
    if not (isinstance(node, BinOp) and node.op == "elem" and isinstance(node.rhs.typ, SetT)):
        return None
    if not _occ_elem_applies(node):
        return None
    ref, trail = lift_indexed(node.rhs)
    return [_is_true(_occ(ref, trail, node.rhs.typ, node.lhs))]


def rule_inv_elem_compound(node, ctx):
    """Membership in a union, intersection or set literal."""
    if not (isinstance(node, BinOp) and node.op == "elem"):
        return None
    e, s = node.lhs, node.rhs
    if isinstance(s, BinOp) and s.op == "union":
        return [binop("or", binop("elem", e, s.lhs), binop("elem", e, s.rhs))]
    if isinstance(s, BinOp) and s.op == "intersect":
        return [binop("and", binop("elem", e, s.lhs), binop("elem", e, s.rhs))]
    if isinstance(s, SetLit):
        items = _literal_items(s)
        if items is None:
            return None
        return [disjoin([binop("=", e, x) for x in items])]
    return None


# --------------------------------------------------------------------------
# quantification


def _over_set_op(node):
    if not (isinstance(node, Quant) and isinstance(node.over, OverCollection)):
        return None
    s = node.over.expr
    if not (isinstance(s, BinOp) and s.op in ("union", "intersect")):
        return None
    if node.binder in free_vars(s.lhs) | free_vars(s.rhs):
        return None
    return s


def rule_set_quan(node, ctx):
    """Distribute ``forall``/``exists`` over a union or an intersection."""
    s = _over_set_op(node)
    if s is None or node.kind not in ("forall", "exists"):
        return None
    a, b = s.lhs, s.rhs
    i, k = node.binder, node.body
    over = lambda c: OverCollection(c)
    if s.op == "union":
        join = "and" if node.kind == "forall" else "or"
        return [binop(join, replace(node, over=over(a)), replace(node, over=over(b)))]
    ref = Ref(i, typ=a.typ.elem)
    out = []
    for x, y in ((a, b), (b, a)):
        if i in free_vars(y):
            continue
        body = _guarded(node.kind, binop("elem", ref, y), k)
        out.append(replace(node, over=over(x), body=body))
    return out


def rule_inv_sum_set_ops(node, ctx):
    """``sum`` over a union or intersection, without counting anything twice.

    ``sum i : a union b . k`` ~> ``(sum i : a . k) + (sum i : b . not(i elem a) * k)``;
    ``sum i : a intersect b . k`` ~> ``sum i : a . (i elem b) * k``.
    """
    s = _over_set_op(node)
    if s is None or node.kind != "sum":
        return None
    a, b = s.lhs, s.rhs
    ref = Ref(node.binder, typ=a.typ.elem)
    if s.op == "union":
        masked = binop("*", unop("not", binop("elem", ref, a)), node.body)
        return [binop("+", replace(node, over=OverCollection(a)),
                      replace(node, over=OverCollection(b), body=masked))]
    return [replace(node, over=OverCollection(a),
                    body=binop("*", binop("elem", ref, b), node.body))]


def rule_refine_set_quan(node, ctx):
    """Quantification over a represented set becomes quantification over its matrix."""
    if not (isinstance(node, Quant) and isinstance(node.over, OverCollection)):
        return None
    s = node.over.expr
    lifted = _set_atom(s)
    if lifted is None or lifted[0].rep is None:
        return None
    ref, trail = lifted
    t, kind, k = s.typ, node.kind, node.body
    rep = ref.rep
    b = _binder(ctx, node, s)
    if b != node.binder:
        k = substitute(k, node.binder, Ref(b, typ=t.elem))
    if rep.kind == "Occurrence":
        if not _int_range(t.elem):
            return None
        i = Ref(b, typ=t.elem)
        body = _guarded(kind, _is_true(_occ(ref, trail, t, i)), k)
        return [quant(kind, b, OverDomain(t.elem), body)]
    r = IntRange(1, explicit_bound(t))
    j = Ref(b, typ=r)
    if rep.kind == "ExplicitFixed":
        body = substitute(k, b, _exp(ref, trail, t, j))
        return [quant(kind, b, OverDomain(r), body)]
    if rep.kind == "ExplicitFlags":
        cell = _flag_cell(ref, trail, t, j)
        value, flag = tuple_index(cell, 0), tuple_index(cell, 1)
        inner = substitute(k, b, value)
        guard = flag if kind == "sum" else _is_true(flag)
        return [quant(kind, b, OverDomain(r), _guarded(kind, guard, inner))]
    return None


def rule_inv_setlit_quan(node, ctx):
    """Unroll quantification over a constant set literal."""
    if not (isinstance(node, Quant) and isinstance(node.over, OverCollection)
            and isinstance(node.over.expr, SetLit)):
        return None
    items = _literal_items(node.over.expr)
    if items is None:
        return None
    bodies = [substitute(node.body, node.binder, x) for x in items]
    if node.kind == "forall":
        return [conjoin(bodies)]
    if node.kind == "exists":
        return [disjoin(bodies)]
    return [add_all(bodies)]


# --------------------------------------------------------------------------
# set operators


def rule_set_min_max(node, ctx):
    """``max(s)`` ~> ``aux @ ((aux elem s) /\\ (forall i : s . i <= aux))``; min symmetric."""
    if not (isinstance(node, UnOp) and node.op in ("min", "max")):
        return None
    s = node.arg
    if _set_atom(s) is None or not _int_range(s.typ.elem):
        return None
    aux = ctx.supply.fresh("aux")
    v = Ref(aux, typ=s.typ.elem)
    i = ctx.supply.fresh("q")
    op = "<=" if node.op == "max" else ">="
    helper = binop("and", binop("elem", v, s),
                   quant("forall", i, OverCollection(s), binop(op, Ref(i, typ=s.typ.elem), v)))
    attr = s.typ.attr
    nonempty = isinstance(attr, Exact) and isinstance(attr.n, int) and attr.n >= 1
    return [_bubble(v, helper, [Decl("aux", aux, s.typ.elem)], nonempty)]


def rule_set_card(node, ctx):
    """``card(s)``: the size for exact sets, otherwise a counted auxiliary."""
    if not (isinstance(node, UnOp) and node.op == "card"):
        return None
    s = node.arg
    if isinstance(s, SetLit):
        items = _literal_items(s)
        return None if items is None else [lit(len(items))]
    lifted = _set_atom(s)
    if lifted is None:
        return None
    t = s.typ

    if isinstance(t.attr, Exact):
        return [lit(t.attr.n)]
    ref, trail = lifted
    rep = ref.rep
    if rep is None or rep.kind not in ("Occurrence", "ExplicitFlags"):
        return None
    bound = explicit_bound(t)
    aux = ctx.supply.fresh("aux")
    v = Ref(aux, typ=IntRange(0, bound))
    i = ctx.supply.fresh("q")
    if rep.kind == "Occurrence":
        total = quant("sum", i, OverDomain(t.elem), _occ(ref, trail, t, Ref(i, typ=t.elem)))
    else:
        r = IntRange(1, bound)
        total = quant("sum", i, OverDomain(r),
                      tuple_index(_flag_cell(ref, trail, t, Ref(i, typ=r)), 1))
    return [_bubble(v, binop("=", v, total), [Decl("aux", aux, IntRange(0, bound))], True)]


def rule_not(node, ctx):
    """``not(a)`` ~> ``a = false``."""
    if isinstance(node, UnOp) and node.op == "not":
        return [binop("=", node.arg, lit(False))]
    return None


def rule_complex_alldiff(node, ctx):
    """``alldiff(m)`` over non-int/bool cells ~> clique of ``!=``."""
    if not (isinstance(node, UnOp) and node.op == "alldiff"):
        return None
    m = node.arg
    t = m.typ
    if not isinstance(t, MatrixT) or isinstance(t.elem, (IntRange, BoolT)) or len(t.indices) != 1:
        return None
    r = t.indices[0]
    i, j = ctx.supply.fresh("q"), ctx.supply.fresh("q")
    ri, rj = Ref(i, typ=r), Ref(j, typ=r)
    body = binop("implies", binop("<", ri, rj), binop("!=", index(m, [ri]), index(m, [rj])))
    return [quant("forall", i, OverDomain(r), quant("forall", j, OverDomain(r), body))]


# --------------------------------------------------------------------------
# functions


def _func_atom(e: Expr):
    if not isinstance(e.typ, FunctionT):
        return None
    lifted = lift_indexed(e)
    if lifted is None or lifted[0].rep is None:
        return None
    return lifted


def _f2d(ref, trail, t, i, j) -> Expr:
    dims = matrix_dims(ref.typ)
    return index(rep_ref(ref.name, "_f2d", dims + (t.frm, t.to), BOOL), trail + (i, j))


def rule_func_app(node, ctx):
    """``f(i)`` ~> ``m[i]`` (1-D) or ``sum j . j * m[i,j]`` (2-D)."""
    if not isinstance(node, FuncApp):
        return None
    lifted = _func_atom(node.func)
    if lifted is None:
        return None
    ref, trail = lifted
    t = node.func.typ
    if ref.rep.kind == "Func1D":
        dims = matrix_dims(ref.typ)
        m = rep_ref(ref.name, "_f1d", dims + (t.frm,), t.to, ref.rep.children[0])
        return [index(m, trail + (node.arg,))]
    if ref.rep.kind == "Func2D":
        j = ctx.supply.fresh("q")
        jr = Ref(j, typ=t.to)
        value = quant("sum", j, OverDomain(t.to),
                      binop("*", jr, _f2d(ref, trail, t, node.arg, jr)))
        if t.attrs.total:
            return [value]
        j2 = ctx.supply.fresh("q")
        defined = binop("=", quant("sum", j2, OverDomain(t.to),
                                   _f2d(ref, trail, t, node.arg, Ref(j2, typ=t.to))), lit(1))
        return [_bubble(value, defined)]
    return None


def rule_func_defined(node, ctx):
    """``defined(f)``: the domain for total f, else an exactly-characterised auxiliary."""
    if not (isinstance(node, UnOp) and node.op == "defined"):
        return None
    t = node.arg.typ
    if not isinstance(t, FunctionT) or not _int_range(t.frm):
        return None
    if t.attrs.total:
        return [_const_literal(frozenset(t.frm.values()), SetT(Unbounded(), t.frm))]
    lifted = _func_atom(node.arg)
    if lifted is None or lifted[0].rep.kind != "Func2D":
        return None
    ref, trail = lifted
    aux, i, j = ctx.supply.fresh("aux"), ctx.supply.fresh("q"), ctx.supply.fresh("q")
    st = SetT(Unbounded(), t.frm)
    k = Ref(aux, RepTag("Occurrence"), typ=st)
    ir, jr = Ref(i, typ=t.frm), Ref(j, typ=t.to)
    used = binop(">", quant("sum", j, OverDomain(t.to), _f2d(ref, trail, t, ir, jr)), lit(0))
    helper = quant("forall", i, OverDomain(t.frm), binop("iff", used, binop("elem", ir, k)))
    return [_bubble(k, helper, [Decl("aux", aux, st, RepTag("Occurrence"))], True)]


def rule_func_range(node, ctx):
    """``range(f)``: the codomain for surjective f, else an exactly-characterised auxiliary."""
    if not (isinstance(node, UnOp) and node.op == "range"):
        return None
    t = node.arg.typ
    if not isinstance(t, FunctionT) or not _int_range(t.to):
        return None
    if t.attrs.surjective:
        return [_const_literal(frozenset(t.to.values()), SetT(Unbounded(), t.to))]
    lifted = _func_atom(node.arg)
    if lifted is None:
        return None
    ref, trail = lifted
    aux, i, j = ctx.supply.fresh("aux"), ctx.supply.fresh("q"), ctx.supply.fresh("q")
    st = SetT(Unbounded(), t.to)
    k = Ref(aux, RepTag("Occurrence"), typ=st)
    vr, ir = Ref(j, typ=t.to), Ref(i, typ=t.frm)
    if ref.rep.kind == "Func2D":
        hit = binop(">", quant("sum", i, OverDomain(t.frm), _f2d(ref, trail, t, ir, vr)), lit(0))
    elif ref.rep.kind == "Func1D" and ref.rep.children[0] is None:
        hit = quant("exists", i, OverDomain(t.frm),
                    binop("=", FuncApp(node.arg, ir, typ=t.to), vr))
    else:
        return None
    helper = quant("forall", j, OverDomain(t.to), binop("iff", hit, binop("elem", vr, k)))
    return [_bubble(k, helper, [Decl("aux", aux, st, RepTag("Occurrence"))], True)]


def rule_inv_func_eq(node, ctx):
    """Equality of total functions ~> pointwise equality; ``!=`` ~> ``not(=)``."""
    if not (isinstance(node, BinOp) and node.op in ("=", "!=")):
        return None
    a, b = node.lhs, node.rhs
    if not (isinstance(a.typ, FunctionT) and isinstance(b.typ, FunctionT)):
        return None
    if node.op == "!=":
        return [unop("not", binop("=", a, b))]
    if not (a.typ.attrs.total and b.typ.attrs.total and _int_range(a.typ.frm)):
        return None
    if lift_indexed(a) is None or lift_indexed(b) is None:
        return None
    i = ctx.supply.fresh("q")
    ir = Ref(i, typ=a.typ.frm)
    body = binop("=", FuncApp(a, ir, typ=a.typ.to), FuncApp(b, ir, typ=b.typ.to))
    return [quant("forall", i, OverDomain(a.typ.frm), body)]


def rule_inv_given_func_app(node, ctx):
    """Application of a constant function becomes a lookup in a constant matrix."""
    if not (isinstance(node, FuncApp) and isinstance(node.func, Ref)):
        return None
    consts = ctx.options.get("consts", {})
    f = consts.get(node.func.name)
    t = node.func.typ
    if not isinstance(f, FuncV) or not isinstance(t, FunctionT) or not _int_range(t.frm):
        return None
    m = Ref(node.func.name, typ=MatrixT((t.frm,), t.to))
    value = index(m, [node.arg])
    keys = sorted(a for a, _ in f)
    if keys == list(t.frm.values()):
        return [value]
    defined = binop("elem", node.arg, _const_literal(frozenset(keys), SetT(Unbounded(), t.frm)))
    return [_bubble(value, defined)]


# --------------------------------------------------------------------------
# matrices and tuples


def rule_matrix_of_tuples(node, ctx):
    """``m[i]<j>`` ~> ``m<j>[i]``: a matrix of tuples viewed as a tuple of matrices."""
    if not (isinstance(node, TupleIndex) and isinstance(node.base, MatrixIndex)):
        return None
    base = node.base
    if not isinstance(base.base, Ref):
        return None
    m = base.base
    mt = m.typ
    if not (isinstance(mt, MatrixT) and isinstance(mt.elem, TupleT)
            and len(base.indices) == len(mt.indices)):
        return None
    tt = TupleT(tuple(MatrixT(mt.indices, c) for c in mt.elem.components))
    tup = Ref(m.name, m.rep, typ=tt)
    col = tuple_index(tup, node.index)
    return [MatrixIndex(col, base.indices, typ=node.typ)]


def rule_tuple_out(node, ctx):
    """``t<j>`` on a represented tuple variable ~> its component variable ``t_j``."""
    if not (isinstance(node, TupleIndex) and isinstance(node.base, Ref)):
        return None
    t = node.base
    if t.rep is None or t.rep.kind != "Tuple":
        return None
    comps = t.typ.components
    if not 0 <= node.index < len(comps):
        raise RefinementError(f"tuple index {node.index} out of bounds for {t.name}")
    return [Ref(f"{t.name}_{node.index}", t.rep.children[node.index], typ=comps[node.index])]


def rule_inv_tuple_lit_index(node, ctx):
    """``(a, b)<0>`` ~> ``a``."""
    if isinstance(node, TupleIndex) and isinstance(node.base, TupleLit):
        return [node.base.items[node.index]]
    return None


def rule_tuple_eq(node, ctx):
    """Tuple equality ~> component-wise equality (the index range is static, so unrolled)."""
    if not (isinstance(node, BinOp) and node.op in ("=", "!=")):
        return None
    a, b = node.lhs, node.rhs
    if not (isinstance(a.typ, TupleT) and isinstance(b.typ, TupleT)):
        return None
    if node.op == "!=":
        return [unop("not", binop("=", a, b))]
    n = len(a.typ.components)
    return [conjoin([binop("=", _component(a, i), _component(b, i)) for i in range(n)])]


def _component(e: Expr, i: int) -> Expr:
    if isinstance(e, TupleLit):
        return e.items[i]
    return tuple_index(e, i)


def rule_inv_tuple_lex(node, ctx):
    """Strict lexicographic ``<`` on tuples."""
    if not (isinstance(node, BinOp) and node.op == "<"):
        return None
    a, b = node.lhs, node.rhs
    if not (isinstance(a.typ, TupleT) and isinstance(b.typ, TupleT)):
        return None
    n = len(a.typ.components)
    out = None
    for i in reversed(range(n)):
        less = binop("<", _component(a, i), _component(b, i))
        if out is None:
            out = less
        else:
            out = binop("or", less, binop("and", binop("=", _component(a, i), _component(b, i)),
                                              out))
    return [out]


# --------------------------------------------------------------------------
# relations


def _rel_atom(e: Expr):
    if not isinstance(e.typ, RelationT):
        return None
    lifted = lift_indexed(e)
    if lifted is None or lifted[0].rep is None or lifted[0].rep.kind != "RelSetOfTuples":
        return None
    return lifted


def _rel_set(rel: Expr) -> Expr:
    ref, trail = lift_indexed(rel)
    st = relation_as_set(rel.typ)
    dims = matrix_dims(ref.typ)
    return index(rep_ref(ref.name, "_rel", dims, st, ref.rep.children[0]), trail)


def rule_rel_elem(node, ctx):
    """``r<a,b>`` ~> ``(a,b) elem s`` with s the relation's set of tuples."""
    if not isinstance(node, RelProj) or any(isinstance(a, Underscore) for a in node.args):
        return None
    if _rel_atom(node.rel) is None:
        return None
    tup = TupleLit(node.args, typ=TupleT(tuple(a.typ for a in node.args)))
    return [binop("elem", tup, _rel_set(node.rel))]


def rule_rel_projection(node, ctx):
    """``r<1,_>`` ~> an auxiliary set holding exactly the unspecified components."""
    if not isinstance(node, RelProj):
        return None
    free = [k for k, a in enumerate(node.args) if isinstance(a, Underscore)]
    if not free:
        return None
    if len(free) == len(node.args):
        return [node.rel]
    if len(free) != 1 or _rel_atom(node.rel) is None:
        return None
    u = free[0]
    comps = node.rel.typ.components
    s = _rel_set(node.rel)
    tt = TupleT(comps)
    aux = ctx.supply.fresh("aux")
    st = SetT(Unbounded(), comps[u])
    k = Ref(aux, RepTag("Occurrence"), typ=st)

    def match(t):
        return conjoin([binop("=", tuple_index(t, p), a)
                        for p, a in enumerate(node.args) if p != u])

    t1, t2, v = ctx.supply.fresh("q"), ctx.supply.fresh("q"), ctx.supply.fresh("q")
    r1, r2, rv = Ref(t1, typ=tt), Ref(t2, typ=tt), Ref(v, typ=comps[u])
    sound = quant("forall", t1, OverCollection(s),
                  binop("implies", match(r1), binop("elem", tuple_index(r1, u), k)))
    complete = quant("forall", v, OverCollection(k), quant(
        "exists", t2, OverCollection(s),
        binop("and", match(r2), binop("=", tuple_index(r2, u), rv))))
    return [_bubble(k, binop("and", sound, complete),
                    [Decl("aux", aux, st, RepTag("Occurrence"))], True)]


def rule_inv_rel_as_set(node, ctx):
    """A relation used as a collection is its set of tuples."""
    if _rel_atom(node) is None:
        return None
    parent = ctx.parent
    if isinstance(parent, RelProj) and parent.rel is node:
        return None
    if isinstance(parent, MatrixIndex) and parent.base is node:
        return None
    return [_rel_set(node)]


# --------------------------------------------------------------------------
# constants


def rule_inv_const_fold(node, ctx):
    """Evaluate closed expressions over constants (e.g. ``defined(volume)``)."""
    consts = ctx.options.get("consts")
    if consts is None or isinstance(node, (IntLit, BoolLit, Ref, Bubble)):
        return None
    if not isinstance(node.typ, (IntRange, BoolT, SetT)):
        return None
    if isinstance(node, SetLit) and _literal_items(node) is not None:
        return None
    if any(isinstance(n, Bubble) for n in walk(node)):
        return None
    if not free_vars(node) <= set(consts):
        return None
    try:
        v = eval_expr(node, consts)
    except (EvalError, TypeError, KeyError):
        return None
    if isinstance(v, frozenset) and not isinstance(node.typ, SetT):
        return None
    return [_const_literal(v, node.typ)]


# --------------------------------------------------------------------------
# bubbles


def rule_bubble_up(node, ctx):
    """Move bubbles on children one level up (not across quantifiers)."""
    if isinstance(node, (Quant, Bubble)):
        return None
    from .ast import children, with_children
    kids = children(node)
    if not any(isinstance(c, Bubble) for c in kids):
        return None
    parts = []
    values = []
    for c in kids:
        if isinstance(c, Bubble):
            parts.extend(c.parts)
            values.append(c.value)
        else:
            values.append(c)
    inner = with_children(node, values)
    return [Bubble(inner, tuple(parts), typ=node.typ)]


def rule_bubble_merge(node, ctx):
    """Flatten a bubble nested in a bubble's value or helper."""
    if not isinstance(node, Bubble):
        return None
    if isinstance(node.value, Bubble):
        v = node.value
        return [Bubble(v.value, v.parts + node.parts, typ=node.typ)]
    for k, p in enumerate(node.parts):
        if isinstance(p.helper, Bubble):
            h = p.helper
            parts = (node.parts[:k] + (replace(p, helper=h.value),) + node.parts[k + 1:]
                     + h.parts)
            return [Bubble(node.value, parts, typ=node.typ)]
    return None


def rule_bubble_quant(node, ctx):
    """Resolve a bubble at a quantifier.

    A bubble on the collection moves above the quantifier.  On the body,
    helpers that are always satisfiable and independent of the binder move
    above it; the rest stay inside as a local ``exists`` over their
    auxiliaries, so that an undefined value only falsifies its own instance.
    """
    if not isinstance(node, Quant):
        return None
    if isinstance(node.over, OverCollection) and isinstance(node.over.expr, Bubble):
        b = node.over.expr
        return [Bubble(replace(node, over=OverCollection(b.value)), b.parts, typ=node.typ)]
    if not isinstance(node.body, Bubble) or not ctx.options.get("close_bubbles", True):
        return None
    body = node.body
    hoist, keep = [], []
    for p in body.parts:
        independent = node.binder not in free_vars(p.helper)
        if independent and (p.total or node.kind == "sum"):
            hoist.append(p)
        else:
            keep.append(p)
    inner = body.value
    if keep:
        if node.kind == "sum":
            raise RefinementError("helper constraint depends on a summation binder")
        inner = conjoin([inner] + [p.helper for p in keep])
        for d in reversed([d for p in keep for d in p.aux]):
            if not (_int_range(d.domain) or isinstance(d.domain, BoolT)):
                raise RefinementError(
                    f"auxiliary '{d.name}' of a non-integer type depends on a quantified variable")
            inner = quant("exists", d.name, OverDomain(d.domain), inner)
    q = replace(node, body=inner)
    return [Bubble(q, tuple(hoist), typ=node.typ) if hoist else q]


# --------------------------------------------------------------------------
# loop invariants


def _nonempty(q: Quant) -> bool:

    if isinstance(q.over, OverDomain):
        d = q.over.domain
        return isinstance(d, BoolT) or (_int_range(d) and d.lo <= d.hi)
    t = q.over.expr.typ
    return isinstance(t, SetT) and isinstance(t.attr, Exact) and isinstance(t.attr.n, int) \
        and t.attr.n >= 1


def rule_loop_invariant(node, ctx):
    """``forall i : s . k`` ~> ``invariants /\\ forall i : s . variants``."""
    if not (isinstance(node, Quant) and node.kind == "forall") or not _nonempty(node):
        return None
    ks = split_conjunction(node.body)
    variants = [c for c in ks if node.binder in free_vars(c)]
    invariants = [c for c in ks if node.binder not in free_vars(c)]
    if not invariants:
        return None
    if not variants:
        return [conjoin(invariants)]
    return [binop("and", conjoin(invariants), replace(node, body=conjoin(variants)))]


# --------------------------------------------------------------------------
# registry


def _r(name, fn, priority=False):
    return RewriteRule(name, fn, priority)


BUBBLE_RULES = [
    _r("bubble_merge", rule_bubble_merge, True),
    _r("bubble_up", rule_bubble_up, True),
    _r("bubble_quant", rule_bubble_quant, True),
]

REFINEMENT_RULES = [
    _r("inv_const_fold", rule_inv_const_fold),
    _r("set_subseteq", rule_set_subseteq),
    _r("set_eq", rule_set_eq),
    _r("set_ops", rule_set_ops),
    _r("set_elem", rule_set_elem),
    _r("inv_occ_elem", rule_inv_occ_elem),
    _r("inv_elem_compound", rule_inv_elem_compound),
    _r("set_quan", rule_set_quan),
    _r("inv_sum_set_ops", rule_inv_sum_set_ops),
    _r("refine_set_quan", rule_refine_set_quan),
    _r("inv_setlit_quan", rule_inv_setlit_quan),
    _r("set_min_max", rule_set_min_max),
    _r("set_card", rule_set_card),
    _r("not", rule_not),
    _r("complex_alldiff", rule_complex_alldiff),
    _r("func_app", rule_func_app),
    _r("func_defined", rule_func_defined),
    _r("func_range", rule_func_range),
    _r("inv_func_eq", rule_inv_func_eq),
    _r("inv_given_func_app", rule_inv_given_func_app),
    _r("matrix_of_tuples", rule_matrix_of_tuples),
    _r("tuple_out", rule_tuple_out),
    _r("inv_tuple_lit_index", rule_inv_tuple_lit_index),
    _r("tuple_eq", rule_tuple_eq),
    _r("inv_tuple_lex", rule_inv_tuple_lex),
    _r("rel_elem", rule_rel_elem),
    _r("rel_projection", rule_rel_projection),
    _r("inv_rel_as_set", rule_inv_rel_as_set),
]

LOOP_INVARIANT = _r("loop_invariant", rule_loop_invariant)

ALL_RULES = BUBBLE_RULES + REFINEMENT_RULES

RULES_BY_NAME = {r.name: r for r in ALL_RULES + [LOOP_INVARIANT]}


def rules_named(*names) -> list:
    return [RULES_BY_NAME[n] for n in names]
