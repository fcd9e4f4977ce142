"""Readers for hierarchy documents and the concrete term syntax.

Hierarchy documents are line oriented::

    type e Entity            # base type with its top sort
    sort Human : e
    edge Man <= Human
    edge Woman <= !Man
    disjoint Animate Inanimate complementary
    const j : Man
    const like : Friendly & Emotional & (Human -> Real -> t)

Terms use ``f(a, b)`` or ``((f a) b)`` for application, ``\\Z:Sort. body``
for abstraction and ``name_colour`` / ``name_~colour`` for coloured symbols.
Colours written with an uppercase initial are colour variables.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .sorts import (Arrow, ArrowType, Atom, BaseType, Neg, SimpleType, Sort,
                    SortError, SortHierarchy)
from .terms import (NOT, Abs, BVar, Color, Const, IllTyped, Term, Var, app,
                    type_of)


class ParseError(Exception):
    def __init__(self, message: str, line: int = 0, col: int = 0, source: str = ""):
        self.line, self.col, self.source = line, col, source
        where = f"{source}:" if source else ""
        if line:
            where += f"{line}:{col}: "
        super().__init__(where + message)


_TOKEN = re.compile(r"""\s*(?:
    (?P<id>[A-Za-z][A-Za-z0-9']*) |
    (?P<num>\d+) |
    (?P<op>->|<=|==|=p|=s|[\\():.,_~!&=])
)""", re.X)


@dataclass
class Token:
    kind: str
    text: str
    col: int


def tokenize(text: str, line: int = 0, source: str = "") -> list[Token]:
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            col = pos + len(text[pos:]) - len(text[pos:].lstrip()) + 1
            raise ParseError(f"unexpected character {text[col - 1]!r}", line, col, source)
        kind = m.lastgroup
        out.append(Token(kind, m.group(kind), m.start(kind) + 1))
        pos = m.end()
    return out


class Cursor:
    def __init__(self, tokens, line=0, source=""):
        self.toks, self.i, self.line, self.source = tokens, 0, line, source

    def peek(self, k=0) -> Optional[Token]:
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else None

    def at(self, text) -> bool:
        t = self.peek()
        return t is not None and t.text == text

    def next(self) -> Token:
        t = self.peek()
        if t is None:
            self.error("unexpected end of line")
        self.i += 1
        return t

    def expect(self, text) -> Token:
        t = self.peek()
        if t is None or t.text != text:
            self.error(f"expected {text!r}, found {t.text if t else 'end of line'!r}")
        return self.next()

    def ident(self) -> Token:
        t = self.peek()
        if t is None or t.kind != "id":
            self.error(f"expected a name, found {t.text if t else 'end of line'!r}")
        return self.next()

    def done(self) -> bool:
        return self.i >= len(self.toks)

    def end(self):
        if not self.done():
            self.error(f"unexpected {self.peek().text!r}")

    def error(self, msg):
        t = self.peek()
        col = t.col if t else (self.toks[-1].col + len(self.toks[-1].text) if self.toks else 1)
        raise ParseError(msg, self.line, col, self.source)


def _lines(text: str):
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0]
        if line.strip():
            yield n, line


# ----------------------------------------------------------- types and sorts

def parse_type(cur: Cursor, types: set[str]) -> SimpleType:
    if cur.at("("):
        cur.next()
        ty = parse_type(cur, types)
        cur.expect(")")
    else:
        tok = cur.ident()
        if tok.text not in types:
            cur.i -= 1
            cur.error(f"unknown type {tok.text!r}")
        ty = BaseType(tok.text)
    if cur.at("->"):
        cur.next()
        return ArrowType(ty, parse_type(cur, types))
    return ty


def parse_sort(cur: Cursor, atoms) -> Sort:
    if cur.at("("):
        cur.next()
        s = parse_sort(cur, atoms)
        cur.expect(")")
    elif cur.at("!"):
        cur.next()
        tok = cur.ident()
        _known(cur, tok, atoms)
        s = Neg(tok.text)
    else:
        tok = cur.ident()
        _known(cur, tok, atoms)
        s = Atom(tok.text)
    if cur.at("->"):
        cur.next()
        return Arrow(s, parse_sort(cur, atoms))
    return s


def _known(cur, tok, atoms):
    if tok.text not in atoms:
        cur.i -= 1
        cur.error(f"unknown sort {tok.text!r}")


def parse_sort_list(cur: Cursor, atoms) -> tuple[Sort, ...]:
    sorts = [parse_sort(cur, atoms)]
    while cur.at("&"):
        cur.next()
        sorts.append(parse_sort(cur, atoms))
    return tuple(sorts)


def sort_from_string(h: SortHierarchy, text: str) -> Sort:
    cur = Cursor(tokenize(text))
    s = parse_sort(cur, h.atoms)
    cur.end()
    return s


# ------------------------------------------------------------------ hierarchy

def load_hierarchy(source: str, name: str = "") -> SortHierarchy:
    """Parse and validate a hierarchy document given as text."""
    tops: dict[str, str] = {}
    atoms: dict[str, SimpleType] = {}
    edges, disjoint = [], []
    constants: dict[str, tuple] = {}
    for n, line in _lines(source):
        cur = Cursor(tokenize(line, n, name), n, name)
        word = cur.ident().text
        if word == "type":
            tname = cur.ident().text
            top = cur.ident().text if not cur.done() else tname
            if tname in tops:
                cur.error(f"duplicate type {tname!r}")
            if top in atoms:
                cur.error(f"duplicate atom {top!r}")
            tops[tname] = top
            atoms[top] = BaseType(tname)
        elif word == "sort":
            tok = cur.ident()
            if tok.text in atoms:
                cur.i -= 1
                cur.error(f"duplicate atom {tok.text!r}")
            cur.expect(":")
            atoms[tok.text] = parse_type(cur, set(tops))
        elif word == "edge":
            lo = parse_sort(cur, atoms)
            if isinstance(lo, Arrow):
                cur.error("edge source must be an atom or negated atom")
            cur.expect("<=")
            edges.append((lo, parse_sort(cur, atoms)))
        elif word == "disjoint":
            a, b = cur.ident(), cur.ident()
            for tok in (a, b):
                if tok.text not in atoms:
                    raise ParseError(f"unknown atom {tok.text!r}", n, tok.col, name)
            comp = False
            if not cur.done():
                flag = cur.ident()
                if flag.text != "complementary":
                    raise ParseError(f"unknown flag {flag.text!r}", n, flag.col, name)
                comp = True
            disjoint.append((a.text, b.text, comp))
        elif word == "const":
            tok = cur.ident()
            if tok.text in constants:
                cur.i -= 1
                cur.error(f"duplicate constant {tok.text!r}")
            cur.expect(":")
            constants[tok.text] = parse_sort_list(cur, atoms)
        else:
            raise ParseError(f"unknown directive {word!r}", n, 1, name)
        cur.end()
    try:
        return SortHierarchy(tops, atoms, edges, disjoint, constants)
    except SortError as e:
        raise ParseError(str(e), 0, 0, name) from e


def load_hierarchy_file(path) -> SortHierarchy:
    path = Path(path)
    return load_hierarchy(path.read_text(encoding="utf-8"), str(path))


# ------------------------------------------------------------------ signature

@dataclass
class Signature:
    """Constants (with least sorts) and free variables available to terms."""
    hierarchy: SortHierarchy
    constants: dict[str, tuple] = field(default_factory=dict)
    variables: dict[str, Sort] = field(default_factory=dict)

    def __post_init__(self):
        for c, sorts in self.hierarchy.constants.items():
            self.constants.setdefault(c, sorts)

    def const(self, name: str, color: Optional[Color] = None) -> Const:
        sorts = self.constants[name]
        return Const(name, self.hierarchy.type_of(sorts[0]), sorts, color)

    def var(self, name: str, color: Optional[Color] = None) -> Var:
        s = self.variables[name]
        return Var(name, self.hierarchy.type_of(s), s, color)

    def negation(self) -> Const:
        h = self.hierarchy
        if "t" not in h.tops:
            raise KeyError(NOT)
        t = BaseType("t")
        top = h.top(t)
        return Const(NOT, ArrowType(t, t), (Arrow(top, top),))


def parse_color(cur: Cursor) -> Color:
    neg = False
    if cur.at("~"):
        cur.next()
        neg = True
    tok = cur.ident()
    return Color(tok.text, var=tok.text[0].isupper(), neg=neg)


class TermParser:
    def __init__(self, sig: Signature, cur: Cursor):
        self.sig, self.cur = sig, cur
        self.scope: list[str] = []
        self.sorts: list[Sort] = []

    def term(self) -> Term:
        if self.cur.at("\\"):
            return self.abstraction()
        return self.application()

    def abstraction(self) -> Term:
        cur = self.cur
        cur.expect("\\")
        name = cur.ident().text
        cur.expect(":")
        sort = parse_sort(cur, self.sig.hierarchy.atoms)
        cur.expect(".")
        self.scope.append(name)
        self.sorts.append(sort)
        try:
            body = self.term()
        finally:
            self.scope.pop()
            self.sorts.pop()
        return Abs(self.sig.hierarchy.type_of(sort), sort, body, name)

    def application(self) -> Term:
        t = self.primary()
        while self.cur.at("("):
            self.cur.next()
            args = [self.term()]
            while self.cur.at(","):
                self.cur.next()
                args.append(self.term())
            self.cur.expect(")")
            t = app(t, *args)
        return t

    def primary(self) -> Term:
        cur = self.cur
        if cur.at("("):
            cur.next()
            items = [self.term()]
            while not cur.at(")"):
                if cur.done():
                    cur.error("unclosed parenthesis")
                items.append(self.term())
            cur.next()
            return app(*items)
        return self.symbol()

    def symbol(self) -> Term:
        cur = self.cur
        tok = cur.ident()
        color = None
        if cur.at("_"):
            cur.next()
            color = parse_color(cur)
        name = tok.text
        if name in self.scope:
            if color is not None:
                raise ParseError(f"bound variable {name} cannot be coloured",
                                 cur.line, tok.col, cur.source)
            return BVar(self.scope[::-1].index(name))
        if name in self.sig.variables:
            return self.sig.var(name, color)
        if name in self.sig.constants:
            return self.sig.const(name, color)
        if name == NOT:
            try:
                return self.sig.negation()
            except KeyError:
                pass
        raise ParseError(f"unknown symbol {name!r}", cur.line, tok.col, cur.source)


def parse_term_tokens(sig: Signature, cur: Cursor) -> Term:
    start = cur.peek()
    t = TermParser(sig, cur).term()
    try:
        type_of(t)
    except IllTyped as e:
        raise ParseError(str(e), cur.line, start.col if start else 1, cur.source) from e
    return t


def parse_term(sig: Signature, text: str, line: int = 0, source: str = "") -> Term:
    cur = Cursor(tokenize(text, line, source), line, source)
    t = parse_term_tokens(sig, cur)
    cur.end()
    return t
