"""Light affine formulas, their definitional aliases and erasure."""

from __future__ import annotations

import itertools
import re
from typing import Callable

_tv = itertools.count()


def fresh_tvar(base: str = "a") -> str:
    stem = re.sub(r"_\d+$", "", base) or "a"
    return f"{stem}_{next(_tv)}"


class Formula:
    __slots__ = ("_exp", "_ftv")

    def expand(self) -> "Formula":
        """Unfold every alias; the result only uses core connectives."""
        try:
            return self._exp
        except AttributeError:
            self._exp = self._expand()
            return self._exp

    def _expand(self):
        return self

    def unfold(self) -> "Formula":
        """Unfold aliases at the head only."""
        f = self
        while isinstance(f, Alias):
            f = f.definition()
        return f

    @property
    def ftv(self) -> frozenset:
        try:
            return self._ftv
        except AttributeError:
            self._ftv = _ftv(self.expand())
            return self._ftv

    def __eq__(self, other):
        return isinstance(other, Formula) and alpha_eq(self, other)

    def __hash__(self):
        return hash(_shape(self.expand()))

    def __str__(self):
        return show_formula(self)

    def __repr__(self):
        return f"<{show_formula(self)}>"


class TVar(Formula):
    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name


class Kappa(Formula):
    __slots__ = ()


class Lolli(Formula):
    __slots__ = ("a", "b")

    def __init__(self, a: Formula, b: Formula):
        self.a, self.b = a, b

    def _expand(self):
        return Lolli(self.a.expand(), self.b.expand())


class Modal(Formula):
    __slots__ = ("a",)
    symbol = "?"

    def __init__(self, a: Formula):
        self.a = a

    def _expand(self):
        return type(self)(self.a.expand())


class Bang(Modal):
    __slots__ = ()
    symbol = "!"


class Para(Modal):
    __slots__ = ()
    symbol = "$"


class Forall(Formula):
    __slots__ = ("var", "body")

    def __init__(self, var: str, body: Formula):
        self.var, self.body = var, body

    def _expand(self):
        return Forall(self.var, self.body.expand())


class Alias(Formula):
    __slots__ = ()

    def definition(self) -> Formula:
        raise NotImplementedError

    def _expand(self):
        return self.definition().expand()


class BoolT(Alias):
    __slots__ = ()

    def definition(self):
        a = fresh_tvar()
        return Forall(a, lollis([TVar(a), TVar(a)], TVar(a)))


class NatT(Alias):
    __slots__ = ()

    def definition(self):
        a = fresh_tvar()
        endo = Lolli(TVar(a), TVar(a))
        return Forall(a, Lolli(Bang(endo), Para(endo)))


class ListT(Alias):
    __slots__ = ("elem",)

    def __init__(self, elem: Formula):
        self.elem = elem

    def definition(self):
        a = fresh_tvar()
        return Forall(a, Lolli(Bang(lollis([self.elem, TVar(a)], TVar(a))),
                               Para(Lolli(TVar(a), TVar(a)))))


class TensorT(Alias):
    """Flat n-ary tensor ``forall a. (A1 -o ... -o An -o a) -o a``."""

    __slots__ = ("parts",)

    def __init__(self, parts):
        self.parts = tuple(parts)

    def definition(self):
        a = fresh_tvar()
        return Forall(a, Lolli(lollis(self.parts, TVar(a)), TVar(a)))


class Named(Alias):
    """A schematic alias registered under a name, e.g. ``Q<5>`` or ``C<5,2>``."""

    __slots__ = ("name", "args")
    registry: dict[str, Callable] = {}

    def __init__(self, name: str, args: tuple):
        self.name, self.args = name, tuple(args)

    def definition(self):
        return Named.registry[self.name](*self.args)


def register_alias(name: str):
    def deco(fn):
        Named.registry[name] = fn
        return fn

    return deco


KAPPA = Kappa()
BOOL = BoolT()
NAT = NatT()


def lollis(args, result: Formula) -> Formula:
    for a in reversed(list(args)):
        result = Lolli(a, result)
    return result


def paras(n: int, f: Formula) -> Formula:
    for _ in range(n):
        f = Para(f)
    return f


def kappas(n: int) -> list:
    return [KAPPA] * n


def _ftv(f) -> frozenset:
    if isinstance(f, TVar):
        return frozenset((f.name,))
    if isinstance(f, Kappa):
        return frozenset()
    if isinstance(f, Lolli):
        return _ftv(f.a) | _ftv(f.b)
    if isinstance(f, Modal):
        return _ftv(f.a)
    if isinstance(f, Forall):
        return _ftv(f.body) - {f.var}
    raise TypeError(f)


def _shape(f):
    # hash key invariant under renaming of bound variables
    if isinstance(f, TVar):
        return "v"
    if isinstance(f, Kappa):
        return "k"
    if isinstance(f, Lolli):
        return ("-o", _shape(f.a), _shape(f.b))
    if isinstance(f, Modal):
        return (f.symbol, _shape(f.a))
    if isinstance(f, Forall):
        return ("A", _shape(f.body))
    raise TypeError(f)


def alpha_eq(a: Formula, b: Formula) -> bool:
    if a is b:
        return True
    return _alpha(a.expand(), b.expand(), {}, {}, 0)


def _alpha(a, b, ea, eb, lvl):
    if type(a) is not type(b):
        return False
    if isinstance(a, TVar):
        ia, ib = ea.get(a.name), eb.get(b.name)
        if ia is None and ib is None:
            return a.name == b.name
        return ia == ib
    if isinstance(a, Kappa):
        return True
    if isinstance(a, Lolli):
        return _alpha(a.a, b.a, ea, eb, lvl) and _alpha(a.b, b.b, ea, eb, lvl)
    if isinstance(a, Modal):
        return _alpha(a.a, b.a, ea, eb, lvl)
    if isinstance(a, Forall):
        return _alpha(a.body, b.body, {**ea, a.var: lvl}, {**eb, b.var: lvl}, lvl + 1)
    raise TypeError(a)


def subst_type(f: Formula, var: str, by: Formula) -> Formula:
    """Capture-avoiding ``f[by/var]`` (computed on the expanded form)."""
    return _tsubst(f.expand(), var, by.expand(), by.ftv)


def _tsubst(f, var, by, byftv):
    if isinstance(f, TVar):
        return by if f.name == var else f
    if isinstance(f, Kappa):
        return f
    if var not in _ftv(f):
        return f
    if isinstance(f, Lolli):
        return Lolli(_tsubst(f.a, var, by, byftv), _tsubst(f.b, var, by, byftv))
    if isinstance(f, Modal):
        return type(f)(_tsubst(f.a, var, by, byftv))
    if isinstance(f, Forall):
        if f.var == var:
            return f
        v, body = f.var, f.body
        if v in byftv:
            nv = fresh_tvar(v)
            body = _tsubst(body, v, TVar(nv), frozenset((nv,)))
            v = nv
        return Forall(v, _tsubst(body, var, by, byftv))
    raise TypeError(f)


def erase_formula(f: Formula) -> Formula:
    """Forget exponentials: ``(!A)- = ($A)- = A-``; arrows stay (printed ``->``)."""
    f = f.expand()
    if isinstance(f, (TVar, Kappa)):
        return f
    if isinstance(f, Lolli):
        return Arrow(erase_formula(f.a), erase_formula(f.b))
    if isinstance(f, Modal):
        return erase_formula(f.a)
    if isinstance(f, Forall):
        return Forall(f.var, erase_formula(f.body))
    raise TypeError(f)


class Arrow(Lolli):
    """Intuitionistic arrow of the erased (system F) types."""

    __slots__ = ()

    def _expand(self):
        return Arrow(self.a.expand(), self.b.expand())


# ---------------------------------------------------------------------------
# text syntax


def show_formula(f: Formula, prec: int = 0) -> str:
    if isinstance(f, TVar):
        return f.name
    if isinstance(f, Kappa):
        return "K"
    if isinstance(f, BoolT):
        return "Bool"
    if isinstance(f, NatT):
        return "N"
    if isinstance(f, ListT):
        return f"List({show_formula(f.elem)})"
    if isinstance(f, Named):
        return f"{f.name}<{','.join(_show_arg(a) for a in f.args)}>"
    if isinstance(f, TensorT):
        s = " * ".join(show_formula(p, 2) for p in f.parts)
        return f"({s})" if prec > 1 else s
    if isinstance(f, Lolli):
        arrow = "->" if isinstance(f, Arrow) else "-o"
        s = f"{show_formula(f.a, 1)} {arrow} {show_formula(f.b, 0)}"
        return f"({s})" if prec > 0 else s
    if isinstance(f, Modal):
        return f.symbol + show_formula(f.a, 3)
    if isinstance(f, Forall):
        folded = fold_alias(f)
        if folded is not None:
            return show_formula(folded, prec)
        s = f"forall {f.var}. {show_formula(f.body)}"
        return f"({s})" if prec > 0 else s
    raise TypeError(f)


def _is_var(f, name) -> bool:
    return isinstance(f, TVar) and f.name == name


def _is_endo(f, name) -> bool:
    return isinstance(f, Lolli) and _is_var(f.a, name) and _is_var(f.b, name)


def fold_alias(f: Forall) -> Formula | None:
    """Recognize an expanded Bool, N, List(A) or tensor for display."""
    a, body = f.var, f.body
    if not isinstance(body, Lolli) or type(body) is not Lolli:
        return None
    if _is_var(body.a, a) and _is_endo(body.b, a):
        return BOOL
    if isinstance(body.a, Bang) and isinstance(body.b, Para) and _is_endo(body.b.a, a):
        inner = body.a.a
        if _is_endo(inner, a):
            return NAT
        if isinstance(inner, Lolli) and _is_endo(inner.b, a) and a not in inner.a.ftv:
            return ListT(inner.a)
    if _is_var(body.b, a):
        parts, g = [], body.a
        while isinstance(g, Lolli) and type(g) is Lolli:
            parts.append(g.a)
            g = g.b
        if _is_var(g, a) and len(parts) >= 2 and all(a not in x.ftv for x in parts):
            return TensorT(parts)
    return None


def _show_arg(a) -> str:
    return show_formula(a) if isinstance(a, Formula) else str(a)


_FTOK = re.compile(r"\s*(-o|->|[A-Za-z_][\w']*|\d+|[().!$*<>,])")


class FormulaParseError(ValueError):
    pass


def parse_formula(text: str) -> Formula:
    toks, pos = [], 0
    text = text.strip()
    while pos < len(text):
        m = _FTOK.match(text, pos)
        if not m:
            raise FormulaParseError(f"bad formula syntax at {text[pos:pos + 20]!r}")
        toks.append(m.group(1))
        pos = m.end()
    i = 0

    def peek():
        return toks[i] if i < len(toks) else None

    def take(expect=None):
        nonlocal i
        tok = peek()
        if tok is None or (expect and tok != expect):
            raise FormulaParseError(f"expected {expect or 'token'}, got {tok!r}")
        i += 1
        return tok

    def formula():
        if peek() == "forall":
            take()
            v = take()
            take(".")
            return Forall(v, formula())
        left = tensor()
        if peek() in ("-o", "->"):
            arrow = Arrow if take() == "->" else Lolli
            return arrow(left, formula())
        return left

    def tensor():
        parts = [prefix()]
        while peek() == "*":
            take()
            parts.append(prefix())
        return parts[0] if len(parts) == 1 else TensorT(parts)

    def prefix():
        if peek() == "!":
            take()
            return Bang(prefix())
        if peek() == "$":
            take()
            return Para(prefix())
        return atom()

    def atom():
        tok = take()
        if tok == "(":
            f = formula()
            take(")")
            return f
        if tok == "K":
            return KAPPA
        if tok == "Bool":
            return BOOL
        if tok == "N":
            return NAT
        if tok == "List":
            take("(")
            f = formula()
            take(")")
            return ListT(f)
        if peek() == "<" and tok in Named.registry:
            take("<")
            args = []
            while peek() != ">":
                args.append(int(take()) if peek().isdigit() else formula())
                if peek() == ",":
                    take()
            take(">")
            return Named(tok, tuple(args))
        if not re.fullmatch(r"[A-Za-z_][\w']*", tok):
            raise FormulaParseError(f"unexpected {tok!r}")
        return TVar(tok)

    f = formula()
    if peek() is not None:
        raise FormulaParseError(f"trailing input {peek()!r}")
    return f
