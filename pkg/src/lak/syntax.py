"""Textual syntax for terms.

::

    \\x. t            abstraction
    (t) u            application (juxtaposition, left associative)
    !t   $t          boxes
    let u be !x in t     let u be $x in t
    t * u            tensor (desugared)
    let u be x * y in t  tensor elimination (desugared)
    #1/2  #0  star  dup  lift  op0  rho1   constants
    @cons            inert symbol (readback only)
"""

from __future__ import annotations

import re

from .structure import format_element, parse_literal
from .terms import (
    Abs,
    App,
    Bang,
    Box,
    Const,
    Let,
    LetBang,
    LetPara,
    Para,
    Term,
    Var,
    apps,
    fresh,
    freshen,
    lams,
)

KEYWORDS = {"let", "be", "in", "star", "dup", "lift"}


class ParseError(ValueError):
    pass


def show_const(c: Const) -> str:
    if c.kind == "k":
        return "#" + format_element(c.arg)
    if c.kind in ("op", "rho"):
        return f"{c.kind}{c.arg}"
    if c.kind == "sym":
        return "@" + str(c.arg)
    return c.kind


def show(t: Term, prec: int = 0) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Const):
        return show_const(t)
    if isinstance(t, Abs):
        s = f"\\{t.var}. {show(t.body)}"
        return f"({s})" if prec > 0 else s
    if isinstance(t, Let):
        s = f"let {show(t.scrut)} be {t.box.symbol}{t.var} in {show(t.body)}"
        return f"({s})" if prec > 0 else s
    if isinstance(t, App):
        s = f"{show(t.fun, 1)} {show(t.arg, 2)}"
        return f"({s})" if prec > 1 else s
    if isinstance(t, Box):
        return t.symbol + show(t.body, 2)
    raise TypeError(t)


def mk_tensor(ts) -> Term:
    y = fresh("y")
    return Abs(y, apps(Var(y), *ts))


def mk_let_tensor(u: Term, names, body: Term) -> Term:
    return App(u, lams(names, body))


_TOKEN = re.compile(
    r"\s*(?:(?P<num>#(?:-?\d+(?:/\d+)?|_))|(?P<sym>@[A-Za-z_][\w']*)"
    r"|(?P<id>[A-Za-z_][\w']*)|(?P<punct>[\\.()!$*]))"
)


def tokenize(text: str) -> list[str]:
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected input at {pos}: {text[pos:pos + 20]!r}")
        out.append(m.group(m.lastgroup))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text: str, carrier: str):
        self.toks = tokenize(text)
        self.i = 0
        self.carrier = carrier

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, expect=None):
        tok = self.peek()
        if tok is None or (expect is not None and tok != expect):
            raise ParseError(f"expected {expect or 'token'}, got {tok!r}")
        self.i += 1
        return tok

    def ident(self):
        tok = self.take()
        if (not re.fullmatch(r"[A-Za-z_][\w']*", tok) or tok in KEYWORDS
                or re.fullmatch(r"(op|rho)\d+", tok)):
            raise ParseError(f"expected identifier, got {tok!r}")
        return tok

    def term(self):
        tok = self.peek()
        if tok == "\\":
            self.take()
            x = self.ident()
            self.take(".")
            return Abs(x, self.term())
        if tok == "let":
            self.take()
            scrut = self.term()
            self.take("be")
            if self.peek() in ("!", "$"):
                box = self.take()
                x = self.ident()
                self.take("in")
                cls = LetBang if box == "!" else LetPara
                return cls(scrut, x, self.term())
            names = [self.ident()]
            while self.peek() == "*":
                self.take()
                names.append(self.ident())
            if len(names) < 2:
                raise ParseError(f"expected '!', '$' or a tensor pattern after 'be', got {names[0]!r}")
            self.take("in")
            return mk_let_tensor(scrut, names, self.term())
        return self.tensor()

    def tensor(self):
        parts = [self.app()]
        while self.peek() == "*":
            self.take()
            parts.append(self.app())
        return parts[0] if len(parts) == 1 else mk_tensor(parts)

    def app(self):
        t = self.prefix()
        while self.peek() not in (None, ")", "*", "be", "in"):
            if self.peek() in ("\\", "let"):
                t = App(t, self.term())
                break
            t = App(t, self.prefix())
        return t

    def prefix(self):
        tok = self.peek()
        if tok == "!":
            self.take()
            return Bang(self.prefix())
        if tok == "$":
            self.take()
            return Para(self.prefix())
        return self.atom()

    def atom(self):
        tok = self.take()
        if tok == "(":
            t = self.term()
            self.take(")")
            return t
        if tok.startswith("#"):
            return Const("k", parse_literal(tok[1:], self.carrier))
        if tok.startswith("@"):
            return Const("sym", tok[1:])
        if tok in ("star", "dup", "lift"):
            return Const(tok)
        m = re.fullmatch(r"(op|rho)(\d+)", tok)
        if m:
            return Const(m.group(1), int(m.group(2)))
        if tok in KEYWORDS or not re.fullmatch(r"[A-Za-z_][\w']*", tok):
            raise ParseError(f"unexpected token {tok!r}")
        return Var(tok)


def parse_term(text: str, carrier: str = "rationals") -> Term:
    p = _Parser(text, carrier)
    t = p.term()
    if p.peek() is not None:
        raise ParseError(f"trailing input at token {p.peek()!r}")
    return freshen(t)
