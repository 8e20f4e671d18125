"""Flat models: flatness checks, name fixing and textual output."""

from __future__ import annotations

import hashlib
import itertools
import os
from dataclasses import dataclass, replace

from .ast import (BinOp, BoolLit, BoolT, Bubble, Expr, IntLit, IntRange, MatrixIndex, MatrixT,
                  OverDomain, Quant, Ref, Spec, UnOp, children, with_children)
from .printer import print_decl, print_expr

FLAT_BINOPS = ("+", "-", "*", "/", "%", "=", "!=", "<", ">", "<=", ">=", "and", "or",
               "implies", "iff")


@dataclass
class FlatModel:
    """A refined model plus where it came from."""

    spec: Spec
    assignment: object = None  # RepAssignment
    source: Spec = None  # instantiated abstract specification
    trace: tuple = ()
    steps: int = 0
    source_hash: str = ""
    aux: tuple = ()  # names of auxiliary variables
    origins: tuple = ()  # per constraint: "user", "channel" or "structural"

    @property
    def rep_summary(self) -> str:
        return self.assignment.summary() if self.assignment is not None else ""


def spec_hash(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()[:12]


# --------------------------------------------------------------------------
# flatness


def _flat_type(t) -> bool:
    if isinstance(t, MatrixT):
        return _flat_type(t.elem)
    return isinstance(t, (IntRange, BoolT))


def flatness_problems(e: Expr, allow_bubbles: bool = False) -> list:
    """Reasons why ``e`` is not in the flat int/bool subset (empty when flat)."""
    out = []

    def go(n):
        if isinstance(n, (IntLit, BoolLit)):
            return
        if isinstance(n, Ref):
            if n.typ is not None and not _flat_type(n.typ):
                out.append(f"abstract reference '{n.name}'")
            return
        if isinstance(n, Bubble):
            if not allow_bubbles:
                out.append("bubble")
        elif isinstance(n, UnOp):
            if n.op not in ("abs", "not", "negate", "alldiff"):
                out.append(f"operator {n.op}")
        elif isinstance(n, BinOp):
            if n.op not in FLAT_BINOPS:
                out.append(f"operator {n.op}")
            elif not (_flat_type(n.lhs.typ) and _flat_type(n.rhs.typ)):
                out.append(f"'{n.op}' on non-flat operands")
        elif isinstance(n, Quant):
            if not isinstance(n.over, OverDomain) or not _flat_type(n.over.domain):
                out.append("quantification over a collection")
        elif isinstance(n, MatrixIndex):
            if not isinstance(n.base, Ref):
                out.append("indexing a non-variable")
        else:
            out.append(type(n).__name__)
        for c in children(n):
            go(c)

    go(e)
    return out


def model_problems(spec: Spec) -> list:
    out = []
    for d in spec.decls:
        if d.kind != "letting" and not _flat_type(d.domain):
            out.append(f"abstract declaration '{d.name}'")
    for c in spec.constraints:
        out += flatness_problems(c)
    if spec.objective is not None:
        out += flatness_problems(spec.objective.expr)
    return out


# --------------------------------------------------------------------------
# phase 8


def fix_names(m: FlatModel) -> FlatModel:
    """Rename auxiliaries to ``aux_1..`` (first occurrence) and binders to ``q_1..`` (DFS).

    ``m.aux`` lists the auxiliary roots; the flat leaves of an abstract
    auxiliary ``a`` are named ``a_occ`` etc. and follow their root.
    """
    spec = m.spec
    roots = list(m.aux)

    def root_of(name):
        for r in roots:
            if name == r or name.startswith(r + "_"):
                return r
        return None

    order: list = []

    def note(e):
        if isinstance(e, Ref):
            r = root_of(e.name)
            if r is not None and r not in order:
                order.append(r)
        for c in children(e):
            note(c)

    for e in ([spec.objective.expr] if spec.objective else []) + list(spec.constraints):
        note(e)
    order += [r for r in roots if r not in order]
    amap = {r: f"aux_{k}" for k, r in enumerate(order, 1)}

    def rename_aux(name):
        r = root_of(name)
        return amap[r] + name[len(r):] if r is not None else name

    counter = itertools.count(1)

    def go(e, env):
        if isinstance(e, Ref):
            if e.name in env:
                return replace(e, name=env[e.name])
            new = rename_aux(e.name)
            return e if new == e.name else replace(e, name=new)
        if isinstance(e, Quant):
            nb = f"q_{next(counter)}"
            return replace(e, binder=nb, body=go(e.body, {**env, e.binder: nb}))
        kids = children(e)
        if not kids:
            return e
        return with_children(e, [go(c, env) for c in kids])

    # the objective is printed first, so its binders are numbered first
    obj = spec.objective
    if obj is not None:
        obj = replace(obj, expr=go(obj.expr, {}))
    cons = tuple(go(c, {}) for c in spec.constraints)
    decls = tuple(replace(d, name=rename_aux(d.name)) if d.kind == "aux" else d
                  for d in spec.decls)
    return replace(m, spec=Spec(decls, obj, cons), aux=tuple(amap[r] for r in order))


# --------------------------------------------------------------------------
# output


def print_model(m: FlatModel) -> str:
    lines = []
    if m.source_hash:
        lines.append(f"$ source: {m.source_hash}")
    if m.assignment is not None:
        lines.append(f"$ rep: {m.rep_summary}")
    lines.append("$ rules: " + " ".join(_rule_counts(m.trace)))
    spec = m.spec
    lines += [print_decl(d) for d in spec.decls]
    if spec.objective is not None:
        lines.append(f"{spec.objective.direction} {print_expr(spec.objective.expr)}")
    if spec.constraints:
        lines.append("such that")
        lines.append(",\n".join(f"    {print_expr(c)}" for c in spec.constraints))
    return "\n".join(lines) + "\n"


def _rule_counts(trace) -> list:
    counts: dict = {}
    for r in trace:
        counts[r] = counts.get(r, 0) + 1
    return [f"{r}x{n}" if n > 1 else r for r, n in counts.items()]


def model_filename(k: int) -> str:
    return f"model_{k:04d}.eprime"


def write_models(models: list, out_dir: str, header: str, trace: bool = False) -> list:
    """Write ``model_0001.eprime``... plus ``manifest.txt``; returns the file paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    manifest = [header, f"models: {len(models)}"]
    for k, m in enumerate(models, 1):
        name = model_filename(k)
        path = os.path.join(out_dir, name)
        with open(path, "w") as fh:
            fh.write(print_model(m))
        paths.append(path)
        line = f"{name}\t{m.rep_summary or '-'}\tsteps={m.steps}"
        if trace:
            line += "\t" + " ".join(m.trace)
        manifest.append(line)
    with open(os.path.join(out_dir, "manifest.txt"), "w") as fh:
        fh.write("\n".join(manifest) + "\n")
    return paths
