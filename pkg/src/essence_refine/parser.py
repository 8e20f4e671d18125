"""Recursive-descent parser producing an untyped :class:`~essence_refine.ast.Spec`."""

from __future__ import annotations

from .ast import (BOOL, BinOp, BoolLit, Decl, DomainRef, Exact, FuncApp, FuncAttrs,
                  FuncInvApp, FuncLit, FunctionT, IntLit, IntRange, MatrixIndex, MatrixLit,
                  MatrixT, MaxSize, MSetT, Objective, OverCollection, OverDomain, Quant, Ref,
                  RelationT, RelProj, SetLit, SetT, Spec, TupleIndex, TupleLit, TupleT,
                  Unbounded, Underscore, UnOp)
from .errors import ParseError
from .lexer import Token, tokenize

_CMP_OPS = {"=": "=", "!=": "!=", "<": "<", ">": ">", "<=": "<=", ">=": ">=",
            "elem": "elem", "subset": "subset", "subseteq": "subseteq",
            "supset": "supset", "supseteq": "supseteq"}
_BUILTINS = {"card", "min", "max", "defined", "range", "alldiff", "abs"}
_DOMAIN_START = {"int", "bool", "set", "mset", "function", "relation", "tuple", "matrix"}
_FUNC_ATTRS = {"total", "partial", "injective", "surjective", "bijective"}


class Parser:
    def __init__(self, tokens: list):
        self.toks = list(tokens)
        last = self.toks[-1] if self.toks else None
        eof_pos = (last.line, last.col + len(last.text)) if last else (1, 1)
        self.toks.append(Token("eof", "<end of input>", *eof_pos))
        self.i = 0

    # -- token helpers -----------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, *texts) -> bool:
        t = self.tok
        return t.kind in ("keyword", "op") and t.text in texts

    def accept(self, *texts):
        if self.at(*texts):
            t = self.tok
            self.i += 1
            return t
        return None

    def expect(self, *texts) -> Token:
        t = self.accept(*texts)
        if t is None:
            self.fail(texts)
        return t

    def ident(self) -> Token:
        if self.tok.kind != "ident":
            self.fail(("identifier",))
        t = self.tok
        self.i += 1
        return t

    def fail(self, expected):
        t = self.tok
        exp = ", ".join(repr(e) for e in expected)
        raise ParseError(f"expected one of {exp} but found {t.text!r}", t.pos)

    # -- statements --------------------------------------------------------

    def spec(self) -> Spec:
        decls, constraints, objective = [], [], None
        while self.tok.kind != "eof":
            t = self.tok
            if self.accept("given"):
                names = self.names()
                self.expect(":")
                dom = self.domain()
                decls += [Decl("given", n.text, dom, pos=n.pos) for n in names]
            elif self.accept("find"):
                names = self.names()
                self.expect(":")
                dom = self.domain()
                decls += [Decl("find", n.text, dom, pos=n.pos) for n in names]
            elif self.accept("letting"):
                name = self.ident()
                self.expect("be")
                if self.accept("domain"):
                    decls.append(Decl("letting", name.text, self.domain(), is_domain=True,
                                      pos=name.pos))
                else:
                    decls.append(Decl("letting", name.text, None, value=self.expr(),
                                      pos=name.pos))
            elif self.at("maximising", "minimising"):
                if objective is not None:
                    raise ParseError("more than one objective", t.pos)
                self.i += 1
                objective = Objective(t.text, self.expr())
            elif self.accept("such"):
                self.expect("that")
                constraints.append(self.expr())
                while self.accept(","):
                    constraints.append(self.expr())
            else:
                self.fail(("given", "letting", "find", "such", "maximising", "minimising"))
        return Spec(tuple(decls), objective, tuple(constraints))

    def names(self) -> list:
        out = [self.ident()]
        while self.accept(","):
            out.append(self.ident())
        return out

    # -- domains -----------------------------------------------------------

    def domain(self):
        t = self.tok
        if self.accept("int"):
            if not self.accept("("):
                return IntRange()
            lo = None if self.at("..") else self.expr()
            self.expect("..")
            hi = None if self.at(")") else self.expr()
            self.expect(")")
            return IntRange(_const(lo), _const(hi))
        if self.accept("bool"):
            return BOOL
        if self.at("set", "mset"):
            self.i += 1
            attr = self.size_attrs()
            self.accept("of")
            elem = self.domain()
            return SetT(attr, elem) if t.text == "set" else MSetT(attr, elem)
        if self.accept("function"):
            words = []
            while self.at("("):
                self.i += 1
                while True:
                    w = self.tok
                    if w.text not in _FUNC_ATTRS:
                        self.fail(sorted(_FUNC_ATTRS))
                    self.i += 1
                    words.append(w.text)
                    if not self.accept(","):
                        break
                self.expect(")")
            frm = self.domain()
            self.expect("->")
            to = self.domain()
            total = "total" in words or "bijective" in words
            attrs = FuncAttrs(total=total,
                              injective="injective" in words or "bijective" in words,
                              surjective="surjective" in words or "bijective" in words,
                              declared=tuple(words))
            return FunctionT(attrs, frm, to)
        if self.accept("relation"):
            self.expect("of")
            self.expect("(")
            comps = [self.domain()]
            while self.accept("*"):
                comps.append(self.domain())
            self.expect(")")
            return RelationT(tuple(comps))
        if self.accept("tuple"):
            self.expect("(")
            comps = [self.domain()]
            while self.accept(","):
                comps.append(self.domain())
            self.expect(")")
            return TupleT(tuple(comps))
        if self.accept("matrix"):
            self.expect("indexed")
            self.expect("by")
            self.expect("[")
            idx = [self.domain()]
            while self.accept(","):
                idx.append(self.domain())
            self.expect("]")
            self.expect("of")
            return MatrixT(tuple(idx), self.domain())
        if t.kind == "ident":
            self.i += 1
            return DomainRef(t.text)
        self.fail(sorted(_DOMAIN_START))

    def size_attrs(self):
        attr = Unbounded()
        while self.at("(") and self.peek().text in ("size", "maxsize"):
            self.i += 1
            while True:
                w = self.expect("size", "maxsize")
                n = _const(self.expr())
                attr = Exact(n) if w.text == "size" else MaxSize(n)
                if not self.accept(","):
                    break
            self.expect(")")
        return attr

    # -- expressions -------------------------------------------------------

    def expr(self):
        lhs = self.implies()
        while self.at("<=>", "<->"):
            t = self.tok
            self.i += 1
            lhs = BinOp("iff", lhs, self.implies(), pos=t.pos)
        return lhs

    def implies(self):
        lhs = self.disj()
        if self.at("=>"):
            t = self.tok
            self.i += 1
            return BinOp("implies", lhs, self.implies(), pos=t.pos)
        return lhs

    def disj(self):
        lhs = self.conj()
        while self.at("\\/"):
            t = self.tok
            self.i += 1
            lhs = BinOp("or", lhs, self.conj(), pos=t.pos)
        return lhs

    def conj(self):
        lhs = self.negation()
        while self.at("/\\"):
            t = self.tok
            self.i += 1
            lhs = BinOp("and", lhs, self.negation(), pos=t.pos)
        return lhs

    def negation(self):
        t = self.tok
        if self.accept("not"):
            return UnOp("not", self.negation(), pos=t.pos)
        return self.comparison()

    def comparison(self):
        lhs = self.setop()
        if self.tok.kind in ("op", "keyword") and self.tok.text in _CMP_OPS:
            t = self.tok
            self.i += 1
            return BinOp(_CMP_OPS[t.text], lhs, self.setop(), pos=t.pos)
        return lhs

    def setop(self):
        lhs = self.additive()
        while self.at("union", "intersect"):
            t = self.tok
            self.i += 1
            lhs = BinOp(t.text, lhs, self.additive(), pos=t.pos)
        return lhs

    def additive(self):
        lhs = self.multiplicative()
        while self.at("+", "-"):
            t = self.tok
            self.i += 1
            lhs = BinOp(t.text, lhs, self.multiplicative(), pos=t.pos)
        return lhs

    def multiplicative(self):
        lhs = self.unary()
        while self.at("*", "/", "%"):
            t = self.tok
            self.i += 1
            lhs = BinOp(t.text, lhs, self.unary(), pos=t.pos)
        return lhs

    def unary(self):
        t = self.tok
        if self.accept("-"):
            arg = self.unary()
            if isinstance(arg, IntLit):
                return IntLit(-arg.v, pos=t.pos)
            return UnOp("negate", arg, pos=t.pos)
        return self.postfix()

    def postfix(self):
        e = self.primary()
        while True:
            t = self.tok
            if self.accept("["):
                idx = [self.expr()]
                while self.accept(","):
                    idx.append(self.expr())
                self.expect("]")
                if isinstance(e, MatrixIndex):
                    e = MatrixIndex(e.base, e.indices + tuple(idx), pos=e.pos)
                else:
                    e = MatrixIndex(e, tuple(idx), pos=t.pos)
            elif self.at("<"):
                angle = self.try_angle()
                if angle is None:
                    return e
                if len(angle) == 1 and isinstance(angle[0], IntLit):
                    e = TupleIndex(e, angle[0].v, pos=t.pos)
                else:
                    e = RelProj(e, tuple(angle), pos=t.pos)
            else:
                return e

    def try_angle(self):
        """Speculatively parse ``< a, b, _ >``; restore and return None on failure."""
        start = self.i
        try:
            self.expect("<")
            args = [self.angle_arg()]
            while self.accept(","):
                args.append(self.angle_arg())
            self.expect(">")
            return args
        except ParseError:
            self.i = start
            return None

    def angle_arg(self):
        t = self.tok
        if self.accept("_"):
            return Underscore(pos=t.pos)
        return self.additive()

    def primary(self):
        t = self.tok
        if t.kind == "int":
            self.i += 1
            return IntLit(int(t.text), pos=t.pos)
        if self.accept("true"):
            return BoolLit(True, pos=t.pos)
        if self.accept("false"):
            return BoolLit(False, pos=t.pos)
        if self.at("forall", "exists", "sum"):
            return self.quantifier()
        if t.kind == "keyword" and t.text in _BUILTINS:
            self.i += 1
            self.expect("(")
            arg = self.expr()
            self.expect(")")
            return UnOp(t.text, arg, pos=t.pos)
        if self.at("function"):
            self.i += 1
            self.expect("(")
            pairs = []
            if not self.at(")"):
                while True:
                    a = self.expr()
                    self.expect("-->")
                    pairs.append((a, self.expr()))
                    if not self.accept(","):
                        break
            self.expect(")")
            return FuncLit(tuple(pairs), pos=t.pos)
        if t.kind == "ident":
            self.i += 1
            if t.text == "inverse" and self.at("("):
                self.i += 1
                f = self.expr()
                self.expect(",")
                x = self.expr()
                self.expect(")")
                return FuncInvApp(f, x, pos=t.pos)
            ref = Ref(t.text, pos=t.pos)
            if self.accept("("):
                arg = self.expr()
                if self.at(","):
                    rest = [arg]
                    while self.accept(","):
                        rest.append(self.expr())
                    arg = TupleLit(tuple(rest), pos=arg.pos)
                self.expect(")")
                return FuncApp(ref, arg, pos=t.pos)
            return ref
        if self.accept("("):
            e = self.expr()
            if self.accept(","):
                items = [e] + self.expr_list()
                self.expect(")")
                return TupleLit(tuple(items), pos=t.pos)
            self.expect(")")
            return e
        if self.accept("{"):
            items = [] if self.at("}") else self.expr_list()
            self.expect("}")
            return SetLit(tuple(items), pos=t.pos)
        if self.accept("["):
            items = self.expr_list()
            self.expect(";")
            dom = self.domain()
            self.expect("]")
            return MatrixLit(tuple(items), dom, pos=t.pos)
        self.fail(("expression",))

    def expr_list(self) -> list:
        out = [self.expr()]
        while self.accept(","):
            out.append(self.expr())
        return out

    def quantifier(self):
        t = self.tok
        self.i += 1
        binders = self.names()
        if self.accept("elem"):
            over = OverCollection(self.setop())
        else:
            self.expect(":")
            if self.tok.text in _DOMAIN_START and self.tok.kind == "keyword":
                over = OverDomain(self.domain())
            else:
                over = OverCollection(self.setop())
        self.expect(".")
        body = self.expr()
        for b in reversed(binders):
            body = Quant(t.text, b.text, over, body, pos=b.pos)
        return body


def _const(e):
    """Fold integer-literal bounds to plain ints; keep other expressions."""
    if e is None:
        return None
    if isinstance(e, IntLit):
        return e.v
    return e


def parse_spec(tokens_or_text) -> Spec:
    tokens = tokenize(tokens_or_text) if isinstance(tokens_or_text, str) else tokens_or_text
    return Parser(tokens).spec()


def parse_expr(text: str):
    p = Parser(tokenize(text))
    e = p.expr()
    if p.tok.kind != "eof":
        p.fail(("end of input",))
    return e


def parse_domain(text: str):
    p = Parser(tokenize(text))
    d = p.domain()
    if p.tok.kind != "eof":
        p.fail(("end of input",))
    return d
