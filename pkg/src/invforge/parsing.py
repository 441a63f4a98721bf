"""Text front end: declarations of forms, operators, symbols, maps and connections.

Grammar (one declaration per line, ``#`` starts a comment)::

    document = { [ decl ] [ comment ] newline } ;
    decl     = "set" name "=" ( int | name )
             | kind name ":" int "=" body ;
    kind     = "form" | "op" | "symbol" | "map" | "auto" | "conn" | "line" ;
    body     = expr                                  (form, op, symbol)
             | "[" exprs "]" ";" "[" exprs "]"       (map: forward ; inverse)
             | name "," expr                         (auto: map name, fiber factor)
             | "{" [ entry { ";" entry } ] "}"       (conn: Christoffel symbols)
             | "[" exprs "]"                         (line: connection form) ;
    entry    = int "," int "," int ":" expr ;        (i, j, k) with nabla_i d_j = sum Gamma_ij^k d_k
    exprs    = expr { "," expr } ;
    expr     = term { ( "+" | "-" ) term } ;
    term     = factor { ( "*" | "/" ) factor } ;
    factor   = ( "+" | "-" ) factor | power ;
    power    = atom [ "^" int ] ;
    atom     = int | var | "d" "[" int { "," int } "]" | "(" expr ")" ;

Variables are x1..xn (x, y, z are accepted as aliases of x1, x2, x3; for
n = 1 the canonical name is x).  ``d[a]`` is the formal derivative symbol
d^a; coefficients always sit to the left, so ``x*d[1]`` is x d/dx.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .algebra import RatFunc, Ring, format_poly
from .connections import AffineConnection, LineConnection
from .diffop import DiffOperator, format_operator
from .jets import CONTRAVARIANT, HomogeneousForm, SymTensor, coordinate_ring
from .operators import AutomorphismWitness, DiffeoWithInverse


class ParseError(ValueError):
    def __init__(self, message, line=None, col=None):
        loc = f"line {line}, column {col}: " if line is not None else ""
        super().__init__(loc + message)
        self.line = line
        self.col = col


class DimensionError(ParseError):
    pass


class UnresolvedNameError(ParseError):
    pass


KINDS = ("form", "op", "symbol", "map", "auto", "conn", "line")
ALIASES = {"x": 0, "y": 1, "z": 2}

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\S))")


@dataclass
class Token:
    kind: str      # int, name, op, end
    text: str
    col: int


def tokenize(text: str, line: int):
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            break
        if m.group(1) is not None:
            out.append(Token("int", m.group(1), m.start(1) + 1))
        elif m.group(2) is not None:
            out.append(Token("name", m.group(2), m.start(2) + 1))
        elif m.group(3) is not None:
            ch = m.group(3)
            if ch not in "+-*/^()[]{},;:=":
                raise ParseError(f"unexpected character {ch!r}", line, m.start(3) + 1)
            out.append(Token("op", ch, m.start(3) + 1))
        pos = m.end()
    out.append(Token("end", "", len(text) + 1))
    return out


class OpPoly:
    """Element of Q(x)[d]: multi-index -> RatFunc."""

    def __init__(self, terms, ring, n):
        self.ring, self.n = ring, n
        self.terms = {a: c for a, c in terms.items() if not c.is_zero()}

    @classmethod
    def scalar(cls, f, ring, n):
        return cls({(0,) * n: f}, ring, n)

    def is_scalar(self):
        return all(sum(a) == 0 for a in self.terms)

    def scalar_value(self):
        return self.terms.get((0,) * self.n, RatFunc.const(self.ring, 0))

    def __add__(self, o):
        out = dict(self.terms)
        for a, c in o.terms.items():
            out[a] = out[a] + c if a in out else c
        return OpPoly(out, self.ring, self.n)

    def __neg__(self):
        return OpPoly({a: -c for a, c in self.terms.items()}, self.ring, self.n)

    def __mul__(self, o):
        out = {}
        for a, c in self.terms.items():
            for b, e in o.terms.items():
                k = tuple(x + y for x, y in zip(a, b))
                t = c * e
                out[k] = out[k] + t if k in out else t
        return OpPoly(out, self.ring, self.n)


class _Parser:
    def __init__(self, tokens, line, ring, n):
        self.toks = tokens
        self.i = 0
        self.line = line
        self.ring = ring
        self.n = n

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        return ParseError(msg, self.line, tok.col)

    def expect(self, text):
        t = self.take()
        if t.text != text or t.kind == "end":
            raise ParseError(f"expected {text!r}, found {t.text or 'end of line'!r}", self.line, t.col)
        return t

    def expect_int(self):
        t = self.take()
        if t.kind != "int":
            raise ParseError(f"expected an integer, found {t.text or 'end of line'!r}", self.line, t.col)
        return int(t.text)

    def at(self, text):
        t = self.peek()
        return t.kind == "op" and t.text == text

    def done(self):
        if self.peek().kind != "end":
            raise self.error(f"unexpected {self.peek().text!r}")

    # expressions
    def expr(self):
        v = self.term()
        while self.at("+") or self.at("-"):
            op = self.take().text
            w = self.term()
            v = v + w if op == "+" else v + (-w)
        return v

    def term(self):
        v = self.factor()
        while self.at("*") or self.at("/"):
            tok = self.take()
            w = self.factor()
            if tok.text == "*":
                v = v * w
            else:
                if not w.is_scalar():
                    raise ParseError("cannot divide by a derivative symbol", self.line, tok.col)
                d = w.scalar_value()
                if d.is_zero():
                    raise ParseError("division by zero", self.line, tok.col)
                v = v * OpPoly.scalar(d.inverse(), self.ring, self.n)
        return v

    def factor(self):
        if self.at("-"):
            self.take()
            return -self.factor()
        if self.at("+"):
            self.take()
            return self.factor()
        return self.power()

    def power(self):
        base = self.atom()
        if self.at("^"):
            tok = self.take()
            e = self.expect_int()
            out = OpPoly.scalar(RatFunc.const(self.ring, 1), self.ring, self.n)
            for _ in range(e):
                out = out * base
            if self.at("^"):
                raise ParseError("chained powers need parentheses", self.line, self.peek().col)
            return out
        return base

    def atom(self):
        t = self.take()
        if t.kind == "int":
            return OpPoly.scalar(RatFunc.const(self.ring, int(t.text)), self.ring, self.n)
        if t.kind == "name":
            if t.text == "d" and self.at("["):
                self.take()
                idx = [self.expect_int()]
                while self.at(","):
                    self.take()
                    idx.append(self.expect_int())
                self.expect("]")
                if len(idx) != self.n:
                    raise DimensionError(f"d[...] needs {self.n} entries, got {len(idx)}", self.line, t.col)
                return OpPoly({tuple(idx): RatFunc.const(self.ring, 1)}, self.ring, self.n)
            return OpPoly.scalar(self.variable(t), self.ring, self.n)
        if t.kind == "op" and t.text == "(":
            v = self.expr()
            self.expect(")")
            return v
        raise ParseError(f"unexpected {t.text or 'end of line'!r}", self.line, t.col)

    def variable(self, t):
        m = re.fullmatch(r"x(\d+)", t.text)
        if m:
            i = int(m.group(1)) - 1
        elif t.text in ALIASES:
            i = ALIASES[t.text]
        else:
            raise UnresolvedNameError(f"unknown variable {t.text!r}", self.line, t.col)
        if not 0 <= i < self.n:
            raise DimensionError(f"variable {t.text} does not exist in dimension {self.n}", self.line, t.col)
        return RatFunc(self.ring.var(self.ring.coords[i]))

    def scalar_expr(self):
        tok = self.peek()
        v = self.expr()
        if not v.is_scalar():
            raise ParseError("expected a function, found a derivative symbol", self.line, tok.col)
        return v.scalar_value()

    def scalar_list(self):
        self.expect("[")
        out = [self.scalar_expr()]
        while self.at(","):
            self.take()
            out.append(self.scalar_expr())
        self.expect("]")
        return out


@dataclass
class Decl:
    kind: str
    name: str
    n: int
    value: object
    line: int


@dataclass
class InputDocument:
    decls: dict = field(default_factory=dict)
    settings: dict = field(default_factory=dict)

    def get(self, name, kinds=None):
        if name not in self.decls:
            raise UnresolvedNameError(f"unresolved name {name!r}")
        d = self.decls[name]
        if kinds and d.kind not in kinds:
            raise UnresolvedNameError(f"{name!r} is a {d.kind}, expected {' or '.join(kinds)}")
        return d

    def __str__(self):
        return format_document(self)


def _value_token(tokens, line):
    t = tokens[0]
    if t.kind == "op" and t.text == "-" and len(tokens) > 1 and tokens[1].kind == "int":
        return -int(tokens[1].text), 2
    if t.kind == "int":
        return int(t.text), 1
    if t.kind == "name":
        return t.text, 1
    raise ParseError("expected a setting value", line, t.col)


def parse(text: str) -> InputDocument:
    doc = InputDocument()
    for ln, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        if not body.strip():
            continue
        toks = tokenize(body.rstrip(), ln)
        head = toks[0]
        if head.kind != "name":
            raise ParseError("expected a declaration keyword", ln, head.col)
        if head.text == "set":
            if toks[1].kind != "name":
                raise ParseError("expected a setting name", ln, toks[1].col)
            if toks[2].text != "=":
                raise ParseError("expected '='", ln, toks[2].col)
            val, used = _value_token(toks[3:], ln)
            if toks[3 + used].kind != "end":
                raise ParseError("trailing input after setting", ln, toks[3 + used].col)
            doc.settings[toks[1].text] = val
            continue
        if head.text not in KINDS:
            raise ParseError(f"unknown declaration {head.text!r}", ln, head.col)
        p = _Parser(toks, ln, None, 0)
        p.take()
        name_tok = p.take()
        if name_tok.kind != "name":
            raise ParseError("expected a name", ln, name_tok.col)
        if name_tok.text in doc.decls:
            raise ParseError(f"duplicate name {name_tok.text!r}", ln, name_tok.col)
        p.expect(":")
        dim_tok = p.peek()
        n = p.expect_int()
        if n < 1:
            raise DimensionError("dimension must be positive", ln, dim_tok.col)
        p.expect("=")
        p.ring, p.n = coordinate_ring(n), n
        value = _parse_body(head.text, p, doc, n, ln)
        p.done()
        doc.decls[name_tok.text] = Decl(head.text, name_tok.text, n, value, ln)
    return doc


def _parse_body(kind, p: _Parser, doc, n, ln):
    ring = p.ring
    if kind in ("form", "op", "symbol"):
        start = p.peek()
        v = p.expr()
        if kind == "form":
            if not v.is_scalar():
                raise ParseError("a form cannot contain derivative symbols", ln, start.col)
            f = v.scalar_value()
            if not f.is_polynomial():
                raise ParseError("a form must be a polynomial", ln, start.col)
            try:
                return HomogeneousForm(f.num * (1 / f.den.constant_value()), n=n)
            except ValueError as e:
                raise ParseError(str(e), ln, start.col) from None
        if kind == "op":
            if not v.terms:
                raise ParseError("the zero operator is not allowed", ln, start.col)
            return DiffOperator(v.terms, ring, n)
        degs = {sum(a) for a in v.terms}
        if len(degs) != 1:
            raise ParseError("a symbol must be homogeneous in d[...]", ln, start.col)
        return SymTensor(n, degs.pop(), CONTRAVARIANT, v.terms, ring)
    if kind == "map":
        fwd = p.scalar_list()
        p.expect(";")
        inv = p.scalar_list()
        if len(fwd) != n or len(inv) != n:
            raise DimensionError(f"a map in dimension {n} needs {n} components on each side", ln, 1)
        try:
            return DiffeoWithInverse(fwd, inv, ring)
        except ValueError as e:
            raise ParseError(str(e), ln, 1) from None
    if kind == "auto":
        t = p.take()
        if t.kind != "name":
            raise ParseError("expected a map name", ln, t.col)
        if t.text not in doc.decls or doc.decls[t.text].kind != "map":
            raise UnresolvedNameError(f"unresolved map {t.text!r}", ln, t.col)
        base = doc.decls[t.text]
        if base.n != n:
            raise DimensionError("automorphism and map dimensions differ", ln, t.col)
        p.expect(",")
        f = p.scalar_expr()
        if f.is_zero():
            raise ParseError("fiber factor must be nonzero", ln, t.col)
        return (t.text, AutomorphismWitness(base.value, f))
    if kind == "conn":
        p.expect("{")
        entries = {}
        if not p.at("}"):
            while True:
                tok = p.peek()
                idx = [p.expect_int()]
                for _ in range(2):
                    p.expect(",")
                    idx.append(p.expect_int())
                if not all(1 <= i <= n for i in idx):
                    raise DimensionError(f"index out of range 1..{n}", ln, tok.col)
                p.expect(":")
                key = tuple(i - 1 for i in idx)
                if key in entries:
                    raise ParseError("repeated Christoffel index", ln, tok.col)
                entries[key] = p.scalar_expr()
                if p.at(";"):
                    p.take()
                    continue
                break
        p.expect("}")
        return AffineConnection.from_dict(entries, ring, n)
    if kind == "line":
        vals = p.scalar_list()
        if len(vals) != n:
            raise DimensionError(f"a connection form in dimension {n} needs {n} components", ln, 1)
        return LineConnection(vals, ring)
    raise ParseError(f"unknown declaration {kind!r}", ln, 1)


# canonical printing ---------------------------------------------------------------

def format_symbol(s: SymTensor) -> str:
    return format_operator(DiffOperator(s.comps, s.ring, s.n))


def format_decl(d: Decl) -> str:
    head = f"{d.kind} {d.name} : {d.n} = "
    v = d.value
    if d.kind == "form":
        return head + format_poly(v.poly)
    if d.kind == "op":
        return head + format_operator(v)
    if d.kind == "symbol":
        return head + format_symbol(v)
    if d.kind == "map":
        return head + "[" + ", ".join(map(str, v.forward)) + "] ; [" + ", ".join(map(str, v.inverse)) + "]"
    if d.kind == "auto":
        return head + f"{v[0]}, {v[1].factor}"
    if d.kind == "conn":
        items = [f"{i + 1},{j + 1},{k + 1}: {c}" for (i, j, k), c in v.items() if not c.is_zero()]
        return head + "{" + "; ".join(items) + "}"
    if d.kind == "line":
        return head + "[" + ", ".join(map(str, v.theta)) + "]"
    raise ValueError(d.kind)


def format_document(doc: InputDocument) -> str:
    lines = [f"set {k} = {v}" for k, v in doc.settings.items()]
    lines += [format_decl(d) for d in doc.decls.values()]
    return "\n".join(lines) + "\n"
