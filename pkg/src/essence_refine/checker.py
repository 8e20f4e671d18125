"""Parameter instantiation, declaration validation and type checking."""

from __future__ import annotations

from dataclasses import replace

from .ast import (BOOL, INT, BinOp, BoolLit, BoolT, Bubble, Decl, DomainRef, Exact, Expr,
                  FuncApp, FuncAttrs, FuncInvApp, FuncLit, FunctionT, IntLit, IntRange,
                  MatrixIndex, MatrixLit, MatrixT, MaxSize, MSetT, Objective, OverCollection,
                  OverDomain, Quant, Ref, RelationT, RelProj, SetLit, SetT, Spec, TupleIndex,
                  TupleLit, TupleT, Unbounded, Underscore, UnOp, children, domain_size,
                  element_type, same_kind, with_children)
from .errors import Diagnostic, TypeCheckError, ValidationError
from .lexer import tokenize
from .parser import parse_spec


# --------------------------------------------------------------------------
# constants


def const_value(e: Expr, env: dict):
    """Evaluate a closed constant expression to a Python value.

    Ints and bools map to themselves, sets to frozensets, tuples to tuples,
    function literals to dicts.
    """
    if isinstance(e, IntLit):
        return e.v
    if isinstance(e, BoolLit):
        return e.v
    if isinstance(e, Ref):
        if e.name not in env:
            raise ValidationError(f"'{e.name}' is not a known constant", e.pos)
        return env[e.name]
    if isinstance(e, UnOp) and e.op == "negate":
        return -const_value(e.arg, env)
    if isinstance(e, BinOp) and e.op in ("+", "-", "*", "/", "%"):
        from .oracle import int_div, int_mod
        a, b = const_value(e.lhs, env), const_value(e.rhs, env)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        return int_div(a, b) if e.op == "/" else int_mod(a, b)
    if isinstance(e, SetLit):
        return frozenset(const_value(x, env) for x in e.items)
    if isinstance(e, TupleLit):
        return tuple(const_value(x, env) for x in e.items)
    if isinstance(e, FuncLit):
        return {const_value(a, env): const_value(b, env) for a, b in e.pairs}
    if isinstance(e, MatrixLit):
        return ConstMatrix(tuple(const_value(x, env) for x in e.items), e.index)
    raise ValidationError("expected a constant expression", getattr(e, "pos", None))


class ConstMatrix(tuple):
    """Constant one-dimensional matrix value with its index range."""

    def __new__(cls, items, index):
        obj = super().__new__(cls, items)
        obj.index = index
        return obj


def value_to_expr(v) -> Expr:
    if isinstance(v, ConstMatrix):
        return MatrixLit(tuple(value_to_expr(x) for x in v), v.index)
    if isinstance(v, bool):
        return BoolLit(v)
    if isinstance(v, int):
        return IntLit(v)
    if isinstance(v, frozenset):
        return SetLit(tuple(value_to_expr(x) for x in sorted(v, key=_sort_key)))
    if isinstance(v, tuple):
        return TupleLit(tuple(value_to_expr(x) for x in v))
    if isinstance(v, dict):
        return FuncLit(tuple((value_to_expr(a), value_to_expr(b))
                             for a, b in sorted(v.items(), key=lambda kv: _sort_key(kv[0]))))
    raise TypeError(v)


def _sort_key(v):
    if isinstance(v, frozenset):
        return (2, sorted(map(_sort_key, v)))
    if isinstance(v, tuple):
        return (1, [_sort_key(x) for x in v])
    return (0, v)


# --------------------------------------------------------------------------
# instantiation


def parse_params(text: str) -> dict:
    """Read a parameter file of ``letting name be <literal>`` statements."""
    spec = parse_spec(tokenize(text))
    out = {}
    for d in spec.decls:
        if d.kind != "letting" or d.is_domain:
            raise ValidationError("parameter files may only contain 'letting name be value'",
                                  d.pos)
        out[d.name] = const_value(d.value, out)
    if spec.constraints or spec.objective:
        raise ValidationError("parameter files may not contain constraints")
    return out


def instantiate(spec: Spec, params: dict = None) -> Spec:
    """Substitute parameter values and lettings; resolve domain aliases.

    Given functions become ``letting`` declarations holding a function literal;
    scalar and set constants are inlined as literals.
    """
    params = dict(params or {})
    consts: dict = {}
    domains: dict = {}
    decls = []
    for d in spec.decls:
        if d.kind == "letting" and d.is_domain:
            domains[d.name] = resolve_domain(d.domain, consts, domains)
            continue
        if d.kind == "letting":
            consts[d.name] = const_value(_inline(d.value, consts, domains), consts)
            v = consts[d.name]
            if isinstance(v, (dict, ConstMatrix)):
                decls.append(replace(d, domain=_value_type(v), value=value_to_expr(v)))
            continue
        if d.kind == "given":
            if d.name not in params:
                raise ValidationError(f"no value given for parameter '{d.name}'", d.pos)
            v = params[d.name]
            dom = resolve_domain(d.domain, consts, domains)
            consts[d.name] = v
            if isinstance(v, dict):
                dom = _close_function_domain(dom, v)
                decls.append(Decl("letting", d.name, dom, value=value_to_expr(v), pos=d.pos))
            continue
        decls.append(replace(d, domain=resolve_domain(d.domain, consts, domains)))
    for name in params:
        if name not in consts:
            raise ValidationError(f"parameter '{name}' has no matching 'given' declaration")
    fn_names = {d.name for d in decls if d.kind == "letting"}
    scalars = {k: v for k, v in consts.items() if k not in fn_names}
    obj = spec.objective
    if obj is not None:
        obj = Objective(obj.direction, _inline(obj.expr, scalars, domains))
    cons = tuple(_inline(c, scalars, domains) for c in spec.constraints)
    return Spec(tuple(decls), obj, cons)


def _value_type(v):
    if isinstance(v, ConstMatrix):
        return MatrixT((v.index,), _value_type_of(list(v)))
    if isinstance(v, dict):
        keys, vals = list(v), list(v.values())
        return FunctionT(FuncAttrs(total=True), _value_type_of(keys), _value_type_of(vals))
    return None


def _value_type_of(values):
    if values and all(isinstance(x, bool) for x in values):
        return BOOL
    if values and all(isinstance(x, int) for x in values):
        return IntRange(min(values), max(values))
    return INT


def _close_function_domain(dom, v: dict):
    if not isinstance(dom, FunctionT):
        return dom
    frm, to = dom.frm, dom.to
    vals = [x for x in v.values() if isinstance(x, int) and not isinstance(x, bool)]
    if isinstance(to, IntRange) and not to.bounded and vals:
        lo = to.lo if isinstance(to.lo, int) else min(vals)
        hi = to.hi if isinstance(to.hi, int) else max(vals)
        to = IntRange(lo, hi)
    return replace(dom, frm=frm, to=to)


def resolve_domain(t, consts: dict, domains: dict):
    if isinstance(t, DomainRef):
        if t.name not in domains:
            raise ValidationError(f"unknown domain '{t.name}'")
        return domains[t.name]
    if isinstance(t, IntRange):
        def b(x):
            return x if x is None or isinstance(x, int) else const_value(x, consts)
        return IntRange(b(t.lo), b(t.hi))
    if isinstance(t, (SetT, MSetT)):
        attr = t.attr
        if isinstance(attr, (Exact, MaxSize)) and not isinstance(attr.n, int):
            attr = type(attr)(const_value(attr.n, consts))
        return type(t)(attr, resolve_domain(t.elem, consts, domains))
    if isinstance(t, FunctionT):
        return FunctionT(t.attrs, resolve_domain(t.frm, consts, domains),
                         resolve_domain(t.to, consts, domains))
    if isinstance(t, (RelationT, TupleT)):
        return type(t)(tuple(resolve_domain(c, consts, domains) for c in t.components))
    if isinstance(t, MatrixT):
        return MatrixT(tuple(resolve_domain(c, consts, domains) for c in t.indices),
                       resolve_domain(t.elem, consts, domains))
    return t


def _inline(e: Expr, consts: dict, domains: dict, bound=frozenset()) -> Expr:
    if isinstance(e, Ref) and e.name not in bound and e.name in consts:
        v = consts[e.name]
        if isinstance(v, (dict, ConstMatrix)):
            return e
        out = value_to_expr(v)
        return replace(out, pos=e.pos)
    if isinstance(e, Quant):
        over = e.over
        if isinstance(over, OverDomain):
            over = OverDomain(resolve_domain(over.domain, consts, domains))
        else:
            x = over.expr
            if isinstance(x, Ref) and x.name in domains and x.name not in bound:
                over = OverDomain(domains[x.name])
            else:
                over = OverCollection(_inline(x, consts, domains, bound))
        return replace(e, over=over, body=_inline(e.body, consts, domains, bound | {e.binder}))
    kids = children(e)
    if not kids:
        return e
    return with_children(e, [_inline(c, consts, domains, bound) for c in kids])


# --------------------------------------------------------------------------
# validation


def validate_spec(spec: Spec) -> list:
    """Check names, declaration attributes and sizes.

    Returns the list of diagnostics; raises :class:`ValidationError` if any of
    them is an error.
    """
    diags = []
    known = set()
    for d in spec.decls:
        if d.name in known:
            diags.append(Diagnostic("error", f"'{d.name}' declared twice", d.pos, "validate"))
        known.add(d.name)
        if d.domain is not None:
            _check_domain(d.domain, d, diags)

    def check_refs(e: Expr, scope: frozenset):
        if isinstance(e, Ref) and e.name not in scope and e.name not in known:
            diags.append(Diagnostic("error", f"undefined identifier '{e.name}'", e.pos,
                                    "validate"))
        if isinstance(e, Quant):
            if isinstance(e.over, OverCollection):
                check_refs(e.over.expr, scope)
            if e.binder in scope or e.binder in known:
                diags.append(Diagnostic("warning", f"quantified variable '{e.binder}' shadows "
                                        "an outer name", e.pos, "validate"))
            check_refs(e.body, scope | {e.binder})
            return
        for c in children(e):
            check_refs(c, scope)

    exprs = list(spec.constraints)
    if spec.objective is not None:
        exprs.append(spec.objective.expr)
    for e in exprs:
        check_refs(e, frozenset())
    errors = [d for d in diags if d.severity == "error"]
    if errors:
        raise ValidationError(errors[0].message, errors[0].pos, diagnostics=diags)
    return diags


def _check_domain(t, decl: Decl, diags: list, top: bool = True):
    if isinstance(t, IntRange):
        if isinstance(t.lo, int) and isinstance(t.hi, int) and t.lo > t.hi:
            diags.append(Diagnostic("error", f"empty integer range in '{decl.name}'",
                                    decl.pos, "validate"))
        return
    if isinstance(t, (SetT, MSetT)):
        attr = t.attr
        if isinstance(attr, (Exact, MaxSize)) and isinstance(attr.n, int):
            if attr.n < 1:
                diags.append(Diagnostic("error", f"size attribute of '{decl.name}' must be "
                                        "positive", decl.pos, "validate"))
            elif isinstance(t, SetT) and isinstance(attr, Exact):
                try:
                    cap = domain_size(t.elem)
                except (ValueError, TypeError):
                    cap = None
                if cap is not None and attr.n > cap:
                    diags.append(Diagnostic("warning", f"set '{decl.name}' of size {attr.n} "
                                            f"over {cap} values is unsatisfiable", decl.pos,
                                            "validate"))
        _check_domain(t.elem, decl, diags, False)
        return
    if isinstance(t, FunctionT):
        words = t.attrs.declared
        if "total" in words and "partial" in words:
            diags.append(Diagnostic("error", f"function '{decl.name}' cannot be declared both "
                                    "total and partial", decl.pos, "validate"))
        if decl.kind == "find" and not isinstance(t.frm, IntRange):
            diags.append(Diagnostic("error", f"unsupported function domain in '{decl.name}': "
                                    "functions must map from an integer range", decl.pos,
                                    "validate"))
        _check_domain(t.frm, decl, diags, False)
        _check_domain(t.to, decl, diags, False)
        return
    if isinstance(t, (RelationT, TupleT)):
        for c in t.components:
            _check_domain(c, decl, diags, False)
        return
    if isinstance(t, MatrixT):
        for c in t.indices:
            if not isinstance(c, IntRange):
                diags.append(Diagnostic("error", "matrices must be indexed by integer ranges",
                                        decl.pos, "validate"))
        _check_domain(t.elem, decl, diags, False)


# --------------------------------------------------------------------------
# type checking


def _err(msg: str, e: Expr):
    raise TypeCheckError(msg, getattr(e, "pos", None))


def _show(t) -> str:
    from .printer import print_domain
    return print_domain(t)


def typecheck(spec: Spec) -> Spec:
    """Annotate every expression with its type and check operator typing."""
    env = {d.name: d.domain for d in spec.decls}
    cons = []
    for c in spec.constraints:
        tc = type_expr(c, env)
        if not isinstance(tc.typ, BoolT):
            _err(f"constraint must be bool, found {_show(tc.typ)}", c)
        cons.append(tc)
    obj = spec.objective
    if obj is not None:
        te = type_expr(obj.expr, env)
        if not isinstance(te.typ, IntRange):
            _err(f"objective must be int, found {_show(te.typ)}", obj.expr)
        obj = Objective(obj.direction, te)
    decls = []
    for d in spec.decls:
        if d.value is not None:
            d = replace(d, value=type_expr(d.value, env))
        decls.append(d)
    return Spec(tuple(decls), obj, tuple(cons))


def type_expr(e: Expr, env: dict) -> Expr:
    """Return ``e`` with ``typ`` filled on every node (raises on type errors)."""
    if isinstance(e, IntLit):
        return replace(e, typ=IntRange(e.v, e.v))
    if isinstance(e, BoolLit):
        return replace(e, typ=BOOL)
    if isinstance(e, Underscore):
        return e
    if isinstance(e, Ref):
        if e.name not in env:
            _err(f"undefined identifier '{e.name}'", e)
        return replace(e, typ=env[e.name] if e.typ is None else e.typ)
    if isinstance(e, Bubble):
        inner = dict(env)
        for d in e.aux_decls:
            inner[d.name] = d.domain
        value = type_expr(e.value, inner)
        parts = tuple(replace(p, helper=type_expr(p.helper, inner)) for p in e.parts)
        return replace(e, value=value, parts=parts, typ=value.typ)
    if isinstance(e, Quant):
        if isinstance(e.over, OverDomain):
            over = e.over
            bt = over.domain
        else:
            coll = type_expr(e.over.expr, env)
            bt = element_type(coll.typ)
            if bt is None:
                _err(f"cannot quantify over {_show(coll.typ)}", e)
            over = OverCollection(coll)
        body = type_expr(e.body, {**env, e.binder: bt})
        if e.kind == "sum":
            if not isinstance(body.typ, (IntRange, BoolT)):
                _err(f"sum body must be int, found {_show(body.typ)}", e.body)
            typ = INT
        else:
            if not isinstance(body.typ, BoolT):
                _err(f"{e.kind} body must be bool, found {_show(body.typ)}", e.body)
            typ = BOOL
        return replace(e, over=over, body=body, typ=typ)
    if isinstance(e, TupleIndex):
        base = type_expr(e.base, env)
        if isinstance(base.typ, RelationT):
            return type_expr(RelProj(e.base, (IntLit(e.index, pos=e.pos),), pos=e.pos), env)
        if not isinstance(base.typ, TupleT):
            _err(f"tuple index applied to {_show(base.typ)}", e)
        if not 0 <= e.index < len(base.typ.components):
            _err(f"tuple index {e.index} out of bounds for a {len(base.typ.components)}-tuple", e)
        return replace(e, base=base, typ=base.typ.components[e.index])
    if isinstance(e, RelProj):
        rel = type_expr(e.rel, env)
        if isinstance(rel.typ, TupleT) and len(e.args) == 1 and isinstance(e.args[0], IntLit):
            return type_expr(TupleIndex(e.rel, e.args[0].v, pos=e.pos), env)
        if not isinstance(rel.typ, RelationT):
            _err(f"relation projection applied to {_show(rel.typ)}", e)
        comps = rel.typ.components
        if len(comps) != len(e.args):
            _err(f"relation of arity {len(comps)} applied to {len(e.args)} arguments", e)
        args, free = [], []
        for a, c in zip(e.args, comps):
            if isinstance(a, Underscore):
                args.append(a)
                free.append(c)
                continue
            ta = type_expr(a, env)
            if not same_kind(ta.typ, c):
                _err(f"expected {_show(c)}, found {_show(ta.typ)}", a)
            args.append(ta)
        if not free:
            typ = BOOL
        elif len(free) == 1:
            typ = SetT(Unbounded(), free[0])  # unary projection is used as a set
        else:
            typ = RelationT(tuple(free))
        return replace(e, rel=rel, args=tuple(args), typ=typ)
    kids = [type_expr(c, env) for c in children(e)]
    e = with_children(e, kids)
    return replace(e, typ=_node_type(e, env))


_ARITH = ("+", "-", "*", "/", "%")
_ORDER = ("<", ">", "<=", ">=")
_LOGIC = ("and", "or", "implies", "iff")
_SETCMP = ("subset", "subseteq", "supset", "supseteq")


def _node_type(e: Expr, env: dict):
    if isinstance(e, UnOp):
        t = e.arg.typ
        if e.op in ("abs", "negate"):
            _need_int(t, e)
            return INT
        if e.op == "not":
            _need_bool(t, e)
            return BOOL
        if e.op == "card":
            if not isinstance(t, (SetT, MSetT, RelationT, FunctionT)):
                _err(f"card needs a collection, found {_show(t)}", e)
            return INT
        if e.op in ("min", "max"):
            if not isinstance(t, SetT) or not isinstance(t.elem, IntRange):
                _err(f"{e.op} needs a set of int, found {_show(t)}", e)
            return t.elem
        if e.op == "defined":
            if not isinstance(t, FunctionT):
                _err(f"defined needs a function, found {_show(t)}", e)
            return SetT(Unbounded(), t.frm)
        if e.op == "range":
            if not isinstance(t, FunctionT):
                _err(f"range needs a function, found {_show(t)}", e)
            return SetT(Unbounded(), t.to)
        if e.op == "alldiff":
            if not isinstance(t, MatrixT):
                _err(f"alldiff needs a matrix, found {_show(t)}", e)
            return BOOL
    if isinstance(e, BinOp):
        a, b = e.lhs.typ, e.rhs.typ
        if e.op in _ARITH:
            _need_int(a, e.lhs)
            _need_int(b, e.rhs)
            return INT
        if e.op in ("=", "!="):
            if not same_kind(a, b):
                _err(f"cannot compare {_show(a)} with {_show(b)}", e)
            return BOOL
        if e.op in _ORDER:
            if not (same_kind(a, b) and isinstance(a, (IntRange, TupleT, BoolT))):
                _err(f"cannot order {_show(a)} and {_show(b)}", e)
            return BOOL
        if e.op in _LOGIC:
            _need_bool(a, e.lhs)
            _need_bool(b, e.rhs)
            return BOOL
        if e.op == "elem":
            et = element_type(b)
            if et is None or not same_kind(a, et):
                _err(f"'elem' needs an element of the container type, found {_show(a)} "
                     f"elem {_show(b)}", e)
            return BOOL
        if e.op in ("union", "intersect") or e.op in _SETCMP:
            if not (isinstance(a, SetT) and isinstance(b, SetT) and same_kind(a, b)):
                _err(f"'{e.op}' needs two sets of the same type, found {_show(a)} and "
                     f"{_show(b)}", e)
            return BOOL if e.op in _SETCMP else SetT(Unbounded(), a.elem)
    if isinstance(e, MatrixIndex):
        t = e.base.typ
        if not isinstance(t, MatrixT) or len(e.indices) > len(t.indices):
            _err(f"cannot index {_show(t)}", e)
        for i in e.indices:
            _need_int(i.typ, i)
        rest = t.indices[len(e.indices):]
        return MatrixT(rest, t.elem) if rest else t.elem
    if isinstance(e, FuncApp):
        t = e.func.typ
        if not isinstance(t, FunctionT):
            _err(f"'{getattr(e.func, 'name', '?')}' is not a function", e)
        if not same_kind(e.arg.typ, t.frm):
            _err(f"function argument must be {_show(t.frm)}, found {_show(e.arg.typ)}", e)
        return t.to
    if isinstance(e, FuncInvApp):
        t = e.func.typ
        if not isinstance(t, FunctionT) or not same_kind(e.arg.typ, t.to):
            _err("bad inverse application", e)
        return SetT(Unbounded(), t.frm)
    if isinstance(e, TupleLit):
        return TupleT(tuple(x.typ for x in e.items))
    if isinstance(e, SetLit):
        if not e.items:
            return SetT(Exact(0), IntRange())
        et = e.items[0].typ
        for x in e.items[1:]:
            if not same_kind(x.typ, et):
                _err("set literal elements must share a type", e)
            et = _join(et, x.typ)
        return SetT(Unbounded(), et)
    if isinstance(e, FuncLit):
        frm = _join_all([a.typ for a, _ in e.pairs])
        to = _join_all([b.typ for _, b in e.pairs])
        return FunctionT(FuncAttrs(total=True), frm, to)
    if isinstance(e, MatrixLit):
        return MatrixT((e.index,), _join_all([x.typ for x in e.items]))
    _err(f"cannot type {type(e).__name__}", e)


def _join(a, b):
    if isinstance(a, IntRange) and isinstance(b, IntRange) and a.bounded and b.bounded:
        return IntRange(min(a.lo, b.lo), max(a.hi, b.hi))
    if isinstance(a, IntRange):
        return INT
    return a


def _join_all(ts):
    out = ts[0] if ts else INT
    for t in ts[1:]:
        out = _join(out, t)
    return out


def _need_int(t, e):
    # booleans count as 0/1 in arithmetic, as in `sum j . j * m[i,j]`
    if not isinstance(t, (IntRange, BoolT)):
        _err(f"expected int, found {_show(t)}", e)


def _need_bool(t, e):
    if not isinstance(t, BoolT):
        _err(f"expected bool, found {_show(t)}", e)


def load(source: str, params: str = None):
    """Parse, instantiate, validate and type check. Returns (spec, warnings)."""
    spec = parse_spec(tokenize(source))
    pvals = parse_params(params) if params else {}
    raw_names = _validate_raw_names(spec)
    inst = instantiate(spec, pvals)
    warnings = raw_names + validate_spec(inst)
    return typecheck(inst), warnings


def _validate_raw_names(spec: Spec) -> list:
    """Name resolution on the uninstantiated text so positions refer to the source."""
    known = {d.name for d in spec.decls}
    tmp = Spec(tuple(Decl("find", n, None) for n in known), spec.objective, spec.constraints)
    diags = validate_spec(tmp)
    return [d for d in diags if d.severity == "warning"]
