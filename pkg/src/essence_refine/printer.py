"""Concrete-syntax printing of domains, expressions and specifications.

The output re-parses with :mod:`essence_refine.parser`; binary operators are
parenthesised whenever they appear as operands so no precedence table is needed
to read a printed model back.
"""

from __future__ import annotations

from .ast import (BinOp, BoolLit, BoolT, Bubble, DomainRef, Exact, FuncApp, FuncInvApp,
                  FuncLit, FunctionT, IntLit, IntRange, MatrixIndex, MatrixLit, MatrixT,
                  MaxSize, MSetT, OverCollection, Quant, Ref, RelationT, RelProj, SetLit,
                  SetT, Spec, TupleIndex, TupleLit, TupleT, Underscore, UnOp)

_OPS = {"and": "/\\", "or": "\\/", "implies": "=>", "iff": "<=>"}


def print_domain(t) -> str:
    if t is None:
        return "?"
    if isinstance(t, IntRange):
        if t.lo is None and t.hi is None:
            return "int"
        lo = "" if t.lo is None else _bound(t.lo)
        hi = "" if t.hi is None else _bound(t.hi)
        return f"int({lo}..{hi})"
    if isinstance(t, BoolT):
        return "bool"
    if isinstance(t, (SetT, MSetT)):
        kw = "set" if isinstance(t, SetT) else "mset"
        attr = ""
        if isinstance(t.attr, Exact):
            attr = f" (size {_bound(t.attr.n)})"
        elif isinstance(t.attr, MaxSize):
            attr = f" (maxsize {_bound(t.attr.n)})"
        return f"{kw}{attr} of {print_domain(t.elem)}"
    if isinstance(t, FunctionT):
        words = ["total" if t.attrs.total else "partial"]
        if t.attrs.injective:
            words.append("injective")
        if t.attrs.surjective:
            words.append("surjective")
        return f"function ({', '.join(words)}) {print_domain(t.frm)} -> {print_domain(t.to)}"
    if isinstance(t, RelationT):
        return "relation of (" + " * ".join(print_domain(c) for c in t.components) + ")"
    if isinstance(t, TupleT):
        return "tuple (" + ", ".join(print_domain(c) for c in t.components) + ")"
    if isinstance(t, MatrixT):
        idx = ", ".join(print_domain(c) for c in t.indices)
        return f"matrix indexed by [{idx}] of {print_domain(t.elem)}"
    if isinstance(t, DomainRef):
        return t.name
    return str(t)


def _bound(x) -> str:
    return str(x) if isinstance(x, int) else print_expr(x)


def _operand(e) -> str:
    s = print_expr(e)
    if isinstance(e, (BinOp, Quant, Bubble)) or (isinstance(e, IntLit) and e.v < 0) or (
            isinstance(e, UnOp) and e.op == "not"):
        return f"({s})"
    return s


def _postfix_base(e) -> str:
    s = print_expr(e)
    if isinstance(e, (Ref, MatrixIndex, TupleIndex, FuncApp)):
        return s
    return f"({s})"


def print_expr(e) -> str:
    if isinstance(e, IntLit):
        return str(e.v)
    if isinstance(e, BoolLit):
        return "true" if e.v else "false"
    if isinstance(e, Ref):
        return e.name
    if isinstance(e, Underscore):
        return "_"
    if isinstance(e, UnOp):
        if e.op == "negate":
            return f"-({print_expr(e.arg)})"
        return f"{e.op}({print_expr(e.arg)})"
    if isinstance(e, BinOp):
        return f"{_operand(e.lhs)} {_OPS.get(e.op, e.op)} {_operand(e.rhs)}"
    if isinstance(e, Quant):
        if isinstance(e.over, OverCollection):
            over = _operand(e.over.expr)
        else:
            over = print_domain(e.over.domain)
        return f"{e.kind} {e.binder} : {over} . {print_expr(e.body)}"
    if isinstance(e, MatrixIndex):
        return f"{_postfix_base(e.base)}[{', '.join(print_expr(i) for i in e.indices)}]"
    if isinstance(e, TupleIndex):
        return f"{_postfix_base(e.base)}<{e.index}>"
    if isinstance(e, FuncApp):
        arg = e.arg
        inner = (", ".join(print_expr(x) for x in arg.items) if isinstance(arg, TupleLit)
                 else print_expr(arg))
        return f"{_postfix_base(e.func)}({inner})"
    if isinstance(e, FuncInvApp):
        return f"inverse({print_expr(e.func)}, {print_expr(e.arg)})"
    if isinstance(e, RelProj):
        return f"{_postfix_base(e.rel)}<{', '.join(print_expr(a) for a in e.args)}>"
    if isinstance(e, TupleLit):
        return "(" + ", ".join(print_expr(x) for x in e.items) + ")"
    if isinstance(e, SetLit):
        return "{" + ", ".join(print_expr(x) for x in e.items) + "}"
    if isinstance(e, FuncLit):
        return "function(" + ", ".join(f"{print_expr(a)} --> {print_expr(b)}"
                                       for a, b in e.pairs) + ")"
    if isinstance(e, MatrixLit):
        return ("[" + ", ".join(print_expr(x) for x in e.items) + "; "
                + print_domain(e.index) + "]")
    if isinstance(e, Bubble):
        return f"{{{print_expr(e.value)} @ {_operand(e.helpers)}}}"
    raise TypeError(f"cannot print {e!r}")


def print_decl(d) -> str:
    if d.kind == "letting":
        if d.is_domain:
            return f"letting {d.name} be domain {print_domain(d.domain)}"
        return f"letting {d.name} be {print_expr(d.value)}"
    kw = "given" if d.kind == "given" else "find"
    return f"{kw} {d.name} : {print_domain(d.domain)}"


def print_spec(spec: Spec) -> str:
    lines = [print_decl(d) for d in spec.decls]
    if spec.objective is not None:
        lines.append(f"{spec.objective.direction} {print_expr(spec.objective.expr)}")
    if spec.constraints:
        lines.append("such that")
        body = [f"    {print_expr(c)}" for c in spec.constraints]
        lines.append(",\n".join(body))
    return "\n".join(lines) + "\n"
