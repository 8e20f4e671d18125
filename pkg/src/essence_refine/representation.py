"""Representation choice, channelling and structural constraints.

Every abstract find variable gets one or more :class:`RepTag` trees.  A tag
determines the flat matrices that encode the variable; their names derive
from the variable name by suffixes (``x_occ``, ``x_exp``, ``x_exf_0``,
``x_exf_1``, ``x_f1d``, ``x_f2d``, ``x_rel_...``, tuple components ``x_0``).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

from .ast import (BOOL, BoolT, Decl, Exact, Expr, FunctionT, IntRange, MatrixT, MaxSize,
                  NameSupply, OverDomain, Quant, Ref, RelationT, RepTag, SetT, Spec, TupleLit,
                  TupleT, Unbounded, all_names, binop, children, index, is_abstract, lit,
                  matrix_of, quant, walk, with_children)
from .errors import NoRepresentation
from .oracle import domain_count

SUFFIX = {
    "Occurrence": "_occ",
    "ExplicitFixed": "_exp",
    "ExplicitFlags": "_exf",
    "Func1D": "_f1d",
    "Func2D": "_f2d",
    "RelSetOfTuples": "_rel",
}

GLOBAL = "global"
OBJECTIVE = "objective"


def cell_type(t):
    """Strip a matrix wrapper: the type the representation encodes."""
    return t.elem if isinstance(t, MatrixT) else t


def matrix_dims(t) -> tuple:
    return t.indices if isinstance(t, MatrixT) else ()


def explicit_bound(t: SetT) -> int:
    """Number of slots an explicit representation of ``t`` needs."""
    if isinstance(t.attr, (Exact, MaxSize)):
        return t.attr.n
    return domain_count(t.elem)


def relation_as_set(t: RelationT) -> SetT:
    return SetT(Unbounded(), TupleT(t.components))


# --------------------------------------------------------------------------
# candidates


def candidate_reps(t, all_reps: bool = False) -> list:
    """Admissible representation trees for a value of type ``t``, in tag order."""
    t = cell_type(t)
    if isinstance(t, (IntRange, BoolT)):
        return [None]
    if isinstance(t, SetT):
        out = []
        elem_int = isinstance(t.elem, IntRange)
        if elem_int:
            out.append(RepTag("Occurrence"))
        inner = candidate_reps(t.elem, all_reps)
        exact = isinstance(t.attr, Exact)
        if exact:
            out += [RepTag("ExplicitFixed", (c,)) for c in inner]
        flags_ok = isinstance(t.attr, MaxSize) or (exact and all_reps) or (
            not exact and not elem_int)
        if flags_ok:
            out += [RepTag("ExplicitFlags", (c,)) for c in inner]
        if not out:
            raise NoRepresentation(f"no representation for {_show(t)}")
        return out
    if isinstance(t, FunctionT):
        if not isinstance(t.frm, IntRange):
            raise NoRepresentation(f"unsupported function domain in {_show(t)}")
        out = []
        flat_to = isinstance(t.to, (IntRange, BoolT))
        if t.attrs.total and (flat_to or not t.attrs.surjective):
            out += [RepTag("Func1D", (c,)) for c in candidate_reps(t.to, all_reps)]
        if isinstance(t.to, IntRange):
            out.append(RepTag("Func2D"))
        if not out:
            raise NoRepresentation(f"no representation for {_show(t)}")
        return out
    if isinstance(t, RelationT):
        if not all(isinstance(c, (IntRange, BoolT)) for c in t.components):
            raise NoRepresentation(f"relations need int/bool components: {_show(t)}")
        return [RepTag("RelSetOfTuples", (c,))
                for c in candidate_reps(relation_as_set(t), all_reps)]
    if isinstance(t, TupleT):
        per = [candidate_reps(c, all_reps) for c in t.components]
        return [RepTag("Tuple", combo) for combo in itertools.product(*per)]
    raise NoRepresentation(f"no representation for {_show(t)}")


def _show(t) -> str:
    from .printer import print_domain
    return print_domain(t)


# --------------------------------------------------------------------------
# flat encodings


def leaf_decls(name: str, t, rep, dims: tuple = ()) -> list:
    """Flat find declarations encoding ``name`` (a matrix over ``dims`` of ``t``)."""
    if rep is None:
        return [Decl("find", name, matrix_of(dims, t))]
    k = rep.kind
    if k == "Occurrence":
        return [Decl("find", name + "_occ", matrix_of(dims + (t.elem,), BOOL))]
    if k == "ExplicitFixed":
        n = explicit_bound(t)
        return leaf_decls(name + "_exp", t.elem, rep.children[0], dims + (IntRange(1, n),))
    if k == "ExplicitFlags":
        n = explicit_bound(t)
        d = dims + (IntRange(1, n),)
        return (leaf_decls(name + "_exf_0", t.elem, rep.children[0], d)
                + [Decl("find", name + "_exf_1", matrix_of(d, BOOL))])
    if k == "Func1D":
        return leaf_decls(name + "_f1d", t.to, rep.children[0], dims + (t.frm,))
    if k == "Func2D":
        return [Decl("find", name + "_f2d", matrix_of(dims + (t.frm, t.to), BOOL))]
    if k == "RelSetOfTuples":
        return leaf_decls(name + "_rel", relation_as_set(t), rep.children[0], dims)
    if k == "Tuple":
        out = []
        for j, (c, r) in enumerate(zip(t.components, rep.children)):
            out += leaf_decls(f"{name}_{j}", c, r, dims)
        return out
    raise NoRepresentation(f"unknown representation {rep}")


def rep_ref(name: str, suffix: str, dims: tuple, cell, rep=None) -> Ref:
    """Reference to a representation matrix ``name+suffix`` over ``dims``."""
    return Ref(name + suffix, rep, typ=matrix_of(dims, cell))


def flags_view(name: str, dims: tuple, t: SetT, inner) -> Ref:
    """The explicit-with-flags matrix as a matrix of (value, flag) tuples."""
    n = explicit_bound(t)
    return Ref(name + "_exf", RepTag("Tuple", (inner, None)),
               typ=matrix_of(dims + (IntRange(1, n),), TupleT((t.elem, BOOL))))


# --------------------------------------------------------------------------
# assignments


@dataclass
class RepAssignment:
    """Representation per (variable, slot); a slot is a constraint index,
    ``"objective"`` or ``"global"`` (variables no constraint mentions)."""

    slots: dict = field(default_factory=dict)

    def tags(self, var: str) -> list:
        out = []
        for (v, _), t in self.slots.items():
            if v == var and t not in out:
                out.append(t)
        return out

    def bases(self, var: str) -> list:
        """(tag, base name) pairs; a tag whose kind repeats gets its own base."""
        out, kinds = [], set()
        for k, t in enumerate(self.tags(var)):
            base = var if t.kind not in kinds else f"{var}_v{k + 1}"
            kinds.add(t.kind)
            out.append((t, base))
        return out

    def summary(self) -> str:
        vars_ = []
        for v, _ in self.slots:
            if v not in vars_:
                vars_.append(v)
        return " ".join(f"{v}#{'|'.join(str(t) for t in self.tags(v))}" for v in vars_)


@dataclass
class RepSpec:
    """A specification whose abstract references carry representation tags."""

    spec: Spec
    assignment: RepAssignment
    source: Spec


def abstract_finds(spec: Spec) -> list:
    return [d for d in spec.decls if d.kind == "find" and is_abstract(d.domain)]


def _mentions(e: Expr, name: str) -> bool:
    return any(isinstance(n, Ref) and n.name == name for n in walk(e))


def enumerate_representations(spec: Spec, mode: str = "single",
                              all_reps: bool = False) -> list:
    """All representation assignments, in declaration then tag order.

    ``mode`` is ``"single"`` (one representation per variable) or
    ``"per-constraint"`` (independent choice in every constraint that
    mentions the variable).
    """
    axes = []  # list of (var, [slots], candidates)
    for d in abstract_finds(spec):
        cands = candidate_reps(d.domain, all_reps)
        if mode == "single":
            axes.append((d.name, [GLOBAL], cands))
            continue
        slots = [i for i, c in enumerate(spec.constraints) if _mentions(c, d.name)]
        if spec.objective is not None and _mentions(spec.objective.expr, d.name):
            slots.append(OBJECTIVE)
        if not slots:
            slots = [GLOBAL]
        for s in slots:
            axes.append((d.name, [s], cands))
    out = []
    for combo in itertools.product(*(a[2] for a in axes)):
        asg = RepAssignment()
        for (var, slots, _), tag in zip(axes, combo):
            for s in slots:
                asg.slots[(var, s)] = tag
        out.append(RepSpec(apply_assignment(spec, asg), asg, spec))
    return out


def apply_assignment(spec: Spec, asg: RepAssignment) -> Spec:
    """Annotate references to abstract variables with their tag and base name."""
    def tag_for(var, slot):
        t = asg.slots.get((var, slot), asg.slots.get((var, GLOBAL)))
        return t

    def annotate(e: Expr, slot) -> Expr:
        mapping = {}
        for var in {v for v, _ in asg.slots}:
            t = tag_for(var, slot)
            if t is None:
                continue
            base = dict(asg.bases(var))[t]
            mapping[var] = (t, base)
        return _annotate(e, mapping)

    cons = tuple(annotate(c, i) for i, c in enumerate(spec.constraints))
    obj = spec.objective
    if obj is not None:
        obj = replace(obj, expr=annotate(obj.expr, OBJECTIVE))
    decls = tuple(replace(d, rep=asg.tags(d.name)[0]) if asg.tags(d.name) else d
                  for d in spec.decls)
    return Spec(decls, obj, cons)


def _annotate(e: Expr, mapping: dict) -> Expr:
    if isinstance(e, Ref) and e.name in mapping:
        tag, base = mapping[e.name]
        return Ref(base, tag, typ=e.typ, pos=e.pos)
    if isinstance(e, Quant) and e.binder in mapping:
        inner = {k: v for k, v in mapping.items() if k != e.binder}
        over = e.over
        if not isinstance(over, OverDomain):
            over = type(over)(_annotate(over.expr, mapping))
        return replace(e, over=over, body=_annotate(e.body, inner))
    kids = children(e)
    if not kids:
        return e
    return with_children(e, [_annotate(c, mapping) for c in kids])


# --------------------------------------------------------------------------
# channelling and structural constraints


def _within(dims: tuple, supply: NameSupply, build) -> list:
    """Call ``build(trail)`` with fresh binders for ``dims``; wrap results in forall."""
    binders = [supply.fresh("q") for _ in dims]
    trail = tuple(Ref(b, typ=d) for b, d in zip(binders, dims))
    out = []
    for c in build(trail):
        for b, d in reversed(list(zip(binders, dims))):
            c = quant("forall", b, OverDomain(d), c)
        out.append(c)
    return out


def _forall(supply, dom, fn):
    b = supply.fresh("q")
    return quant("forall", b, OverDomain(dom), fn(Ref(b, typ=dom)))


def _exists(supply, dom, fn):
    b = supply.fresh("q")
    return quant("exists", b, OverDomain(dom), fn(Ref(b, typ=dom)))


def _sum(supply, dom, fn):
    b = supply.fresh("q")
    return quant("sum", b, OverDomain(dom), fn(Ref(b, typ=dom)))


def _plus1(e):
    return binop("+", e, lit(1))


def add_channelling(rs: RepSpec, supply: NameSupply) -> RepSpec:
    """Link consecutive distinct representations of each variable."""
    extra = []
    for d in abstract_finds(rs.spec):
        pairs = rs.assignment.bases(d.name)
        for (t1, b1), (t2, b2) in zip(pairs, pairs[1:]):
            extra += channel(d.domain, t1, b1, t2, b2, supply)
    if not extra:
        return rs
    spec = replace(rs.spec, constraints=rs.spec.constraints + tuple(extra))
    return replace(rs, spec=spec)


def channel(domain, t1: RepTag, b1: str, t2: RepTag, b2: str, supply: NameSupply) -> list:
    dims, t = matrix_dims(domain), cell_type(domain)
    kinds = {t1.kind: b1, t2.kind: b2}

    def build(trail):
        def at(name, suffix, extra_dims, cell, idx):
            return index(rep_ref(name, suffix, dims + extra_dims, cell), trail + tuple(idx))

        if isinstance(t, SetT) and isinstance(t.elem, IntRange) and "Occurrence" in kinds:
            other = t2 if t1.kind == "Occurrence" else t1
            ob = kinds[other.kind]
            occ = lambda v: at(kinds["Occurrence"], "_occ", (t.elem,), BOOL, [v])
            n = explicit_bound(t)
            r = IntRange(1, n)
            if other.kind == "ExplicitFixed":
                def member(v):
                    return _exists(supply, r, lambda j: binop(
                        "=", at(ob, "_exp", (r,), t.elem, [j]), v))
            else:
                def member(v):
                    return _exists(supply, r, lambda j: binop("and", at(
                        ob, "_exf_1", (r,), BOOL, [j]), binop(
                        "=", at(ob, "_exf_0", (r,), t.elem, [j]), v)))
            return [_forall(supply, t.elem, lambda v: binop("iff", occ(v), member(v)))]
        if (isinstance(t, SetT) and isinstance(t.elem, IntRange)
                and set(kinds) == {"ExplicitFixed", "ExplicitFlags"}):
            n1, n2 = t.attr.n, explicit_bound(t)
            r1, r2 = IntRange(1, n1), IntRange(1, n2)
            be, bf = kinds["ExplicitFixed"], kinds["ExplicitFlags"]
            cover = _forall(supply, r1, lambda j: _exists(supply, r2, lambda j2: binop(
                "and", at(bf, "_exf_1", (r2,), BOOL, [j2]),
                binop("=", at(bf, "_exf_0", (r2,), t.elem, [j2]),
                      at(be, "_exp", (r1,), t.elem, [j])))))
            # the flags side carries its own size constraint
            return [cover]
        if isinstance(t, FunctionT) and set(kinds) == {"Func1D", "Func2D"} \
                and isinstance(t.to, IntRange):
            f1, f2 = kinds["Func1D"], kinds["Func2D"]
            return [_forall(supply, t.frm, lambda i: _forall(supply, t.to, lambda j: binop(
                "iff", at(f2, "_f2d", (t.frm, t.to), BOOL, [i, j]),
                binop("=", at(f1, "_f1d", (t.frm,), t.to, [i]), j))))]
        a = index(Ref(b1, t1, typ=domain), trail)
        b = index(Ref(b2, t2, typ=domain), trail)
        return [binop("=", a, b)]

    return _within(dims, supply, build)


# Matrices that a channelling constraint fixes cell by cell from another
# representation; their own structural constraints would be redundant.
DETERMINED_BY_CHANNEL = ("Occurrence", "Func2D")


def add_structural_constraints(rs: RepSpec, supply: NameSupply) -> RepSpec:
    """Constraints making every representation encode exactly one valid object."""
    extra = []
    for d in abstract_finds(rs.spec):
        pairs = rs.assignment.bases(d.name)
        for tag, base in pairs:
            if len(pairs) > 1 and tag.kind in DETERMINED_BY_CHANNEL:
                continue
            extra += structural(base, cell_type(d.domain), tag, matrix_dims(d.domain), supply)
    if not extra:
        return rs
    spec = replace(rs.spec, constraints=rs.spec.constraints + tuple(extra))
    return replace(rs, spec=spec)


def _flat(t) -> bool:
    """int/bool, or a tuple of such (ordered lexicographically)."""
    if isinstance(t, (IntRange, BoolT)):
        return True
    return isinstance(t, TupleT) and all(_flat(c) for c in t.components)


def _minimum(t) -> Expr:
    if isinstance(t, IntRange):
        return lit(t.lo)
    if isinstance(t, BoolT):
        return lit(False)
    items = tuple(_minimum(c) for c in t.components)
    return TupleLit(items, typ=TupleT(tuple(x.typ for x in items)))


def structural(name: str, t, rep, dims: tuple, supply: NameSupply) -> list:
    """Structural constraints for ``name`` (matrix over ``dims`` of ``t``) under ``rep``."""
    if rep is None:
        return []
    k = rep.kind
    out = []
    if k == "Occurrence":
        if isinstance(t.attr, (Exact, MaxSize)):
            op = "=" if isinstance(t.attr, Exact) else "<="

            def build(trail):
                occ = rep_ref(name, "_occ", dims + (t.elem,), BOOL)
                total = _sum(supply, t.elem, lambda v: index(occ, trail + (v,)))
                return [binop(op, total, lit(t.attr.n))]
            out += _within(dims, supply, build)
        return out
    if k in ("ExplicitFixed", "ExplicitFlags"):
        n = explicit_bound(t)
        r = IntRange(1, n)
        inner = rep.children[0]
        vname = name + ("_exp" if k == "ExplicitFixed" else "_exf_0")
        vals = rep_ref(vname, "", dims + (r,), t.elem, inner)
        flags = rep_ref(name, "_exf_1", dims + (r,), BOOL)

        def build(trail):
            val = lambda j: index(vals, trail + (j,))
            flag = lambda j: index(flags, trail + (j,))
            cs = []
            pairs = IntRange(1, n - 1)
            if k == "ExplicitFlags":
                if n >= 2:
                    cs.append(_forall(supply, pairs, lambda j: binop(
                        "implies", flag(_plus1(j)), flag(j))))
                if isinstance(t.attr, Exact):
                    # otherwise the number of slots is already the bound
                    cs.append(binop("=", _sum(supply, r, flag), lit(t.attr.n)))
            if _flat(t.elem):
                if n >= 2:
                    if k == "ExplicitFixed":
                        cs.append(_forall(supply, pairs, lambda j: binop(
                            "<", val(j), val(_plus1(j)))))
                    else:
                        cs.append(_forall(supply, pairs, lambda j: binop(
                            "implies", flag(_plus1(j)), binop("<", val(j), val(_plus1(j))))))
                if k == "ExplicitFlags":
                    cs.append(_forall(supply, r, lambda j: binop(
                        "implies", binop("=", flag(j), lit(False)),
                        binop("=", val(j), _minimum(t.elem)))))
            elif n >= 2:
                def distinct(j1, j2):
                    body = binop("!=", val(j1), val(j2))
                    if k == "ExplicitFlags":
                        body = binop("implies", flag(j2), body)
                    return binop("implies", binop("<", j1, j2), body)
                cs.append(_forall(supply, r, lambda j1: _forall(
                    supply, r, lambda j2: distinct(j1, j2))))
            return cs
        out += _within(dims, supply, build)
        out += structural(vname, t.elem, inner, dims + (r,), supply)
        return out
    if k == "Func1D":
        f = rep_ref(name, "_f1d", dims + (t.frm,), t.to, rep.children[0])

        def build(trail):
            app = lambda i: index(f, trail + (i,))
            cs = []
            if t.attrs.injective:
                cs.append(_forall(supply, t.frm, lambda i1: _forall(supply, t.frm, lambda i2: (
                    binop("implies", binop("<", i1, i2), binop("!=", app(i1), app(i2)))))))
            if t.attrs.surjective:
                cs.append(_forall(supply, t.to, lambda v: _exists(
                    supply, t.frm, lambda i: binop("=", app(i), v))))
            return cs
        out += _within(dims, supply, build)
        out += structural(name + "_f1d", t.to, rep.children[0], dims + (t.frm,), supply)
        return out
    if k == "Func2D":
        m = rep_ref(name, "_f2d", dims + (t.frm, t.to), BOOL)

        def build(trail):
            cell = lambda i, j: index(m, trail + (i, j))
            cs = [_forall(supply, t.frm, lambda i: binop(
                "=" if t.attrs.total else "<=",
                _sum(supply, t.to, lambda j: cell(i, j)), lit(1)))]
            if t.attrs.injective:
                cs.append(_forall(supply, t.to, lambda j: binop(
                    "<=", _sum(supply, t.frm, lambda i: cell(i, j)), lit(1))))
            if t.attrs.surjective:
                cs.append(_forall(supply, t.to, lambda j: binop(
                    ">=", _sum(supply, t.frm, lambda i: cell(i, j)), lit(1))))
            return cs
        return _within(dims, supply, build)
    if k == "RelSetOfTuples":
        return structural(name + "_rel", relation_as_set(t), rep.children[0], dims, supply)
    if k == "Tuple":
        for j, (c, r) in enumerate(zip(t.components, rep.children)):
            out += structural(f"{name}_{j}", c, r, dims, supply)
        return out
    raise NoRepresentation(f"unknown representation {rep}")


def taken_names(spec: Spec) -> set:
    names = {d.name for d in spec.decls}
    for c in spec.constraints:
        names |= all_names(c)
    if spec.objective is not None:
        names |= all_names(spec.objective.expr)
    return names
