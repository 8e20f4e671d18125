"""Specification, type and expression data model plus term utilities."""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field, fields, replace
from typing import Iterator, Optional, Union


# --------------------------------------------------------------------------
# types


@dataclass(frozen=True)
class IntRange:
    """Integer domain ``int(lo..hi)``.

    Bounds are ints once parameters are instantiated; before that they may be
    expressions.  ``None`` means open (``int`` or ``int(1..)``).
    """

    lo: object = None
    hi: object = None

    @property
    def bounded(self) -> bool:
        return isinstance(self.lo, int) and isinstance(self.hi, int)

    def values(self) -> range:
        if not self.bounded:
            raise ValueError(f"unbounded integer domain {self}")
        return range(self.lo, self.hi + 1)


@dataclass(frozen=True)
class BoolT:
    pass


@dataclass(frozen=True)
class Exact:
    n: object


@dataclass(frozen=True)
class MaxSize:
    n: object


@dataclass(frozen=True)
class Unbounded:
    pass


SizeAttr = Union[Exact, MaxSize, Unbounded]


@dataclass(frozen=True)
class FuncAttrs:
    total: bool = False
    injective: bool = False
    surjective: bool = False
    # raw attribute words as written; only used by validation
    declared: tuple = field(default=(), compare=False)

    @property
    def partial(self) -> bool:
        return not self.total


@dataclass(frozen=True)
class SetT:
    attr: SizeAttr
    elem: "TypeExpr"


@dataclass(frozen=True)
class MSetT:
    attr: SizeAttr
    elem: "TypeExpr"


@dataclass(frozen=True)
class FunctionT:
    attrs: FuncAttrs
    frm: "TypeExpr"
    to: "TypeExpr"


@dataclass(frozen=True)
class RelationT:
    components: tuple


@dataclass(frozen=True)
class TupleT:
    components: tuple


@dataclass(frozen=True)
class MatrixT:
    indices: tuple
    elem: "TypeExpr"


@dataclass(frozen=True)
class DomainRef:
    """Unresolved reference to a ``letting N be domain D`` alias."""

    name: str


TypeExpr = Union[IntRange, BoolT, SetT, MSetT, FunctionT, RelationT, TupleT, MatrixT, DomainRef]

INT = IntRange()
BOOL = BoolT()

ABSTRACT_TYPES = (SetT, MSetT, FunctionT, RelationT, TupleT)


def is_abstract(t: TypeExpr) -> bool:
    """True if a value of type ``t`` is not a plain int/bool (matrix cells count)."""
    if isinstance(t, MatrixT):
        return is_abstract(t.elem)
    return isinstance(t, ABSTRACT_TYPES)


def same_kind(a: TypeExpr, b: TypeExpr) -> bool:
    """Type compatibility ignoring integer bounds and size attributes."""
    if isinstance(a, IntRange) and isinstance(b, IntRange):
        return True
    if type(a) is not type(b):
        return False
    if isinstance(a, BoolT):
        return True
    if isinstance(a, (SetT, MSetT)):
        return same_kind(a.elem, b.elem)
    if isinstance(a, FunctionT):
        return same_kind(a.frm, b.frm) and same_kind(a.to, b.to)
    if isinstance(a, (RelationT, TupleT)):
        return len(a.components) == len(b.components) and all(
            same_kind(x, y) for x, y in zip(a.components, b.components))
    if isinstance(a, MatrixT):
        return len(a.indices) == len(b.indices) and same_kind(a.elem, b.elem)
    return a == b


def domain_size(t: TypeExpr) -> int:
    """Number of values of a finite atomic/tuple domain."""
    if isinstance(t, IntRange):
        return len(t.values())
    if isinstance(t, BoolT):
        return 2
    if isinstance(t, TupleT):
        n = 1
        for c in t.components:
            n *= domain_size(c)
        return n
    raise ValueError(f"no finite size for {t}")


def size_bound(t: SetT) -> int:
    """Upper bound on the cardinality of a set domain."""
    if isinstance(t.attr, (Exact, MaxSize)):
        return t.attr.n
    return domain_size(t.elem)


# --------------------------------------------------------------------------
# representation tags


@dataclass(frozen=True)
class RepTag:
    """Representation choice for one abstract value.

    ``kind`` is one of the tags in ``REP_KINDS`` or ``"Tuple"``.  ``children``
    hold the representations of nested slots (element, codomain or tuple
    components); ``None`` marks a slot of plain int/bool type.
    """

    kind: str
    children: tuple = ()

    def __str__(self) -> str:
        if not self.children:
            return self.kind
        inner = ",".join("-" if c is None else str(c) for c in self.children)
        return f"{self.kind}[{inner}]"


REP_KINDS = ("Occurrence", "ExplicitFixed", "ExplicitFlags", "Func1D", "Func2D", "RelSetOfTuples")


# --------------------------------------------------------------------------
# expressions


def _meta():
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Expr:
    def with_type(self, typ):
        return replace(self, typ=typ)


@dataclass(frozen=True)
class IntLit(Expr):
    v: int
    typ: object = _meta()
    pos: object = _meta()


@dataclass(frozen=True)
class BoolLit(Expr):
    v: bool
    typ: object = _meta()
    pos: object = _meta()


@dataclass(frozen=True)
class Ref(Expr):
    name: str
    rep: Optional[RepTag] = None
    typ: object = _meta()
    pos: object = _meta()


@dataclass(frozen=True)
class Underscore(Expr):
    typ: object = _meta()
    pos: object = _meta()


UNOPS = ("abs", "not", "negate", "card", "min", "max", "defined", "range", "alldiff")


@dataclass(frozen=True)
class UnOp(Expr):
    op: str
    arg: Expr
    typ: object = _meta()
    pos: object = _meta()


BINOPS = ("+", "-", "*", "/", "%", "=", "!=", "<", ">", "<=", ">=", "and", "or",
          "implies", "iff", "elem", "union", "intersect", "subset", "subseteq",
          "supset", "supseteq")


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    lhs: Expr
    rhs: Expr
    typ: object = _meta()
    pos: object = _meta()


@dataclass(frozen=True)
class OverDomain:
    domain: TypeExpr


@dataclass(frozen=True)
class OverCollection:
    expr: Expr


QuantDomain = Union[OverDomain, OverCollection]


@dataclass(frozen=True)
class Quant(Expr):
    kind: str
    binder: str
    over: QuantDomain
    body: Expr
    typ: object = _meta()
    pos: object = _meta()


@dataclass(frozen=True)
class MatrixIndex(Expr):
    base: Expr
    indices: tuple
    typ: object = _meta()
    pos: object = _meta()


@dataclass(frozen=True)
class TupleIndex(Expr):
    base: Expr
    index: int
    typ: object = _meta()
    pos: object = _meta()


@dataclass(frozen=True)
class FuncApp(Expr):
    func: Expr
    arg: Expr
    typ: object = _meta()
    pos: object = _meta()


@dataclass(frozen=True)
class FuncInvApp(Expr):
    func: Expr
    arg: Expr
    typ: object = _meta()
    pos: object = _meta()


@dataclass(frozen=True)
class RelProj(Expr):
    rel: Expr
    args: tuple
    typ: object = _meta()
    pos: object = _meta()


@dataclass(frozen=True)
class TupleLit(Expr):
    items: tuple
    typ: object = _meta()
    pos: object = _meta()


@dataclass(frozen=True)
class SetLit(Expr):
    items: tuple
    typ: object = _meta()
    pos: object = _meta()


@dataclass(frozen=True)
class FuncLit(Expr):
    """Constant function ``function(a --> b, ...)``; ``pairs`` is a tuple of (Expr, Expr)."""

    pairs: tuple
    typ: object = _meta()
    pos: object = _meta()


@dataclass(frozen=True)
class MatrixLit(Expr):
    """Constant one-dimensional matrix ``[e1, e2, ...; int(lo..hi)]``."""

    items: tuple
    index: IntRange
    typ: object = _meta()
    pos: object = _meta()


@dataclass(frozen=True)
class BubblePart:
    """One set of helper constraints attached by a bubble.

    ``total`` marks helpers that are satisfiable for every value of the
    surrounding variables (e.g. a cardinality definition), which makes them
    safe to move across quantifiers.
    """

    helper: Expr
    aux: tuple = ()
    total: bool = False


@dataclass(frozen=True)
class Bubble(Expr):
    value: Expr
    parts: tuple
    typ: object = _meta()
    pos: object = _meta()

    @property
    def helpers(self) -> Expr:
        return conjoin([p.helper for p in self.parts])

    @property
    def aux_decls(self) -> tuple:
        return tuple(d for p in self.parts for d in p.aux)


# --------------------------------------------------------------------------
# declarations


DECL_KINDS = ("given", "letting", "find", "aux", "quantvar")


@dataclass(frozen=True)
class Decl:
    kind: str
    name: str
    domain: Optional[TypeExpr]
    rep: Optional[RepTag] = None
    value: Optional[Expr] = None
    is_domain: bool = False
    pos: object = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Objective:
    direction: str  # "maximising" | "minimising"
    expr: Expr


@dataclass(frozen=True)
class Spec:
    decls: tuple = ()
    objective: Optional[Objective] = None
    constraints: tuple = ()

    def decl(self, name: str) -> Optional[Decl]:
        for d in self.decls:
            if d.name == name:
                return d
        return None

    def finds(self) -> list:
        return [d for d in self.decls if d.kind in ("find", "aux")]


# --------------------------------------------------------------------------
# generic traversal


_CHILD_FIELDS = {
    UnOp: ("arg",),
    BinOp: ("lhs", "rhs"),
    MatrixIndex: ("base", "indices"),
    TupleIndex: ("base",),
    FuncApp: ("func", "arg"),
    FuncInvApp: ("func", "arg"),
    RelProj: ("rel", "args"),
    TupleLit: ("items",),
    SetLit: ("items",),
    MatrixLit: ("items",),
}


def children(e: Expr) -> list:
    """Direct sub-expressions in left-to-right order."""
    if isinstance(e, Quant):
        kids = [e.over.expr] if isinstance(e.over, OverCollection) else []
        return kids + [e.body]
    if isinstance(e, Bubble):
        return [e.value] + [p.helper for p in e.parts]
    if isinstance(e, FuncLit):
        return [x for pair in e.pairs for x in pair]
    names = _CHILD_FIELDS.get(type(e), ())
    out = []
    for n in names:
        v = getattr(e, n)
        if isinstance(v, tuple):
            out.extend(v)
        else:
            out.append(v)
    return out


def with_children(e: Expr, kids: list) -> Expr:
    """Rebuild ``e`` with replaced direct sub-expressions (same arity as ``children``)."""
    kids = list(kids)
    if isinstance(e, Quant):
        if isinstance(e.over, OverCollection):
            return replace(e, over=OverCollection(kids[0]), body=kids[1])
        return replace(e, body=kids[0])
    if isinstance(e, Bubble):
        parts = tuple(replace(p, helper=h) for p, h in zip(e.parts, kids[1:]))
        return replace(e, value=kids[0], parts=parts)
    if isinstance(e, FuncLit):
        return replace(e, pairs=tuple(zip(kids[0::2], kids[1::2])))
    names = _CHILD_FIELDS.get(type(e), ())
    if not names:
        return e
    updates = {}
    for n in names:
        v = getattr(e, n)
        if isinstance(v, tuple):
            updates[n] = tuple(kids[:len(v)])
            kids = kids[len(v):]
        else:
            updates[n] = kids.pop(0)
    return replace(e, **updates)


def walk(e: Expr) -> Iterator[Expr]:
    """Pre-order iteration over all nodes."""
    yield e
    for c in children(e):
        yield from walk(c)


def map_bottom_up(e: Expr, fn) -> Expr:
    kids = children(e)
    if kids:
        new = [map_bottom_up(c, fn) for c in kids]
        if any(a is not b for a, b in zip(new, kids)):
            e = with_children(e, new)
    return fn(e)


# --------------------------------------------------------------------------
# names and substitution


def free_vars(e: Expr) -> set:
    """Names referenced free in ``e`` (declared variables and enclosing binders)."""
    if isinstance(e, Ref):
        return {e.name}
    if isinstance(e, Quant):
        out = free_vars(e.body) - {e.binder}
        if isinstance(e.over, OverCollection):
            out |= free_vars(e.over.expr)
        return out
    out = set()
    for c in children(e):
        out |= free_vars(c)
    if isinstance(e, Bubble):
        out -= {d.name for d in e.aux_decls}
    return out


def has_reference_to(binder: str, e: Expr) -> bool:
    return binder in free_vars(e)


def all_names(e: Expr) -> set:
    out = set()
    for n in walk(e):
        if isinstance(n, Ref):
            out.add(n.name)
        elif isinstance(n, Quant):
            out.add(n.binder)
    return out


def fresh_name(base: str, taken: set) -> str:
    root = base.rstrip("'")
    for k in itertools.count(0):
        cand = root + "'" * k
        if cand not in taken:
            return cand
    raise AssertionError


def substitute(body: Expr, binder: str, replacement: Expr) -> Expr:
    """Capture-avoiding replacement of free ``binder`` occurrences."""
    repl_free = free_vars(replacement)

    def go(e: Expr) -> Expr:
        if isinstance(e, Ref):
            return replacement if e.name == binder else e
        if isinstance(e, Quant):
            over = e.over
            if isinstance(over, OverCollection):
                over = OverCollection(go(over.expr))
            if e.binder == binder:
                return replace(e, over=over)
            if binder not in free_vars(e.body):
                return replace(e, over=over)
            b, body = e.binder, e.body
            if b in repl_free:
                taken = repl_free | all_names(body) | {binder}
                nb = fresh_name(b, taken)
                body = substitute(body, b, Ref(nb, typ=_binder_type(e)))
                b = nb
            return replace(e, binder=b, over=over, body=go(body))
        kids = children(e)
        if not kids:
            return e
        return with_children(e, [go(c) for c in kids])

    return go(body)


def _binder_type(q: Quant):
    if isinstance(q.over, OverDomain):
        return q.over.domain
    t = q.over.expr.typ
    return element_type(t) if t is not None else None


def element_type(t: TypeExpr) -> Optional[TypeExpr]:
    """Element type of a collection type (set, mset, relation as tuples)."""
    if isinstance(t, (SetT, MSetT)):
        return t.elem
    if isinstance(t, RelationT):
        return TupleT(t.components)
    return None


class NameSupply:
    """Deterministic fresh names ``<prefix>_<k>`` avoiding a set of taken names."""

    def __init__(self, taken=()):
        self.taken = set(taken)
        self.counters: dict = {}

    def fresh(self, prefix: str) -> str:
        k = self.counters.get(prefix, 0)
        while True:
            k += 1
            name = f"{prefix}_{k}"
            if name not in self.taken:
                break
        self.counters[prefix] = k
        self.taken.add(name)
        return name


def rename_free(e: Expr, mapping: dict) -> Expr:
    for old, new in mapping.items():
        e = substitute(e, old, new)
    return e


# --------------------------------------------------------------------------
# conjunctions


def split_conjunction(e: Expr) -> list:
    if isinstance(e, BinOp) and e.op == "and":
        return split_conjunction(e.lhs) + split_conjunction(e.rhs)
    return [e]


def conjoin(items) -> Expr:
    """Left-associated conjunction; ``true`` for an empty list."""
    items = list(items)
    if not items:
        return BoolLit(True, typ=BOOL)
    out = items[0]
    for x in items[1:]:
        out = BinOp("and", out, x, typ=BOOL)
    return out


def disjoin(items) -> Expr:
    items = list(items)
    if not items:
        return BoolLit(False, typ=BOOL)
    out = items[0]
    for x in items[1:]:
        out = BinOp("or", out, x, typ=BOOL)
    return out


def add_all(items) -> Expr:
    items = list(items)
    if not items:
        return IntLit(0, typ=INT)
    out = items[0]
    for x in items[1:]:
        out = BinOp("+", out, x, typ=INT)
    return out


# --------------------------------------------------------------------------
# alpha-equivalence


AUX_NAME = re.compile(r"^aux_\d+$")


def canonical(e: Expr, aux_names=None) -> Expr:
    """Rename binders to ``_b<k>`` (pre-order) and auxiliaries to ``_a<k>``."""
    counter = itertools.count()
    aux_map: dict = {}

    def is_aux(n: str) -> bool:
        return bool(AUX_NAME.match(n)) or (aux_names is not None and n in aux_names)

    def go(e: Expr, env: dict) -> Expr:
        if isinstance(e, Ref):
            if e.name in env:
                return Ref(env[e.name], e.rep)
            if is_aux(e.name):
                if e.name not in aux_map:
                    aux_map[e.name] = f"_a{len(aux_map)}"
                return Ref(aux_map[e.name], e.rep)
            return Ref(e.name, e.rep)
        if isinstance(e, Quant):
            over = e.over
            if isinstance(over, OverCollection):
                over = OverCollection(go(over.expr, env))
            nb = f"_b{next(counter)}"
            return Quant(e.kind, nb, over, go(e.body, {**env, e.binder: nb}))
        if isinstance(e, Bubble):
            for d in e.aux_decls:
                if d.name not in aux_map:
                    aux_map[d.name] = f"_a{len(aux_map)}"
            value = go(e.value, env)
            parts = tuple(BubblePart(go(p.helper, env), tuple(
                replace(d, name=aux_map[d.name]) for d in p.aux), p.total) for p in e.parts)
            return Bubble(value, parts)
        kids = children(e)
        if not kids:
            return e
        return with_children(e, [go(c, env) for c in kids])

    return go(e, {})


def structural_eq(a: Expr, b: Expr, aux_names=None) -> bool:
    """Alpha-equivalence: equal up to binder renaming and auxiliary renaming."""
    return canonical(a, aux_names) == canonical(b, aux_names)


# --------------------------------------------------------------------------
# small constructors used by the rules and phases


def lit(v) -> Expr:
    if isinstance(v, bool):
        return BoolLit(v, typ=BOOL)
    return IntLit(v, typ=IntRange(v, v))


def binop(op: str, a: Expr, b: Expr) -> Expr:
    if op in ("+", "-", "*", "/", "%"):
        typ = INT
    elif op in ("union", "intersect"):
        typ = a.typ
    else:
        typ = BOOL
    return BinOp(op, a, b, typ=typ)


def unop(op: str, a: Expr) -> Expr:
    typ = BOOL if op == "not" else INT
    return UnOp(op, a, typ=typ)


def quant(kind: str, binder: str, over, body: Expr) -> Expr:
    if not isinstance(over, (OverDomain, OverCollection)):
        over = OverCollection(over) if isinstance(over, Expr) else OverDomain(over)
    return Quant(kind, binder, over, body, typ=INT if kind == "sum" else BOOL)


def index(base: Expr, idx) -> Expr:
    idx = tuple(idx)
    if not idx:
        return base
    t = base.typ
    if isinstance(t, MatrixT):
        rest = t.indices[len(idx):]
        typ = MatrixT(rest, t.elem) if rest else t.elem
    else:
        typ = None
    if isinstance(base, MatrixIndex):
        return MatrixIndex(base.base, base.indices + idx, typ=typ)
    return MatrixIndex(base, idx, typ=typ)


def tuple_index(base: Expr, i: int) -> Expr:
    t = base.typ
    typ = t.components[i] if isinstance(t, TupleT) else None
    return TupleIndex(base, i, typ=typ)


def matrix_of(dims, elem: TypeExpr) -> TypeExpr:
    dims = tuple(dims)
    if not dims:
        return elem
    if isinstance(elem, MatrixT):
        return MatrixT(dims + elem.indices, elem.elem)
    return MatrixT(dims, elem)
