"""Church-style encodings of booleans, numerals and lists, and their readback."""

from __future__ import annotations

from .syntax import mk_let_tensor, mk_tensor
from .terms import (
    Abs,
    App,
    Bang,
    Const,
    LetBang,
    LetPara,
    Para,
    Term,
    Var,
    apps,
    erase,
    fresh,
    k,
    lams,
    spine,
    sym,
)

__all__ = [
    "mk_true", "mk_false", "mk_bool", "mk_nat", "mk_klist", "mk_if", "mk_fold",
    "mk_tensor", "mk_let_tensor", "decode_bool", "decode_nat", "decode_klist",
    "DecodeError",
]


class DecodeError(ValueError):
    pass


def mk_true() -> Term:
    x, y = fresh("x"), fresh("y")
    return Abs(x, Abs(y, Var(x)))


def mk_false() -> Term:
    x, y = fresh("x"), fresh("y")
    return Abs(x, Abs(y, Var(y)))


def mk_bool(b: bool) -> Term:
    return mk_true() if b else mk_false()


def _iterate(f: str, heads, base: Term) -> Term:
    for h in reversed(heads):
        base = App(h(Var(f)), base)
    return base


def mk_nat(n: int) -> Term:
    """``\\f. let f be !g in $(\\x. g (... (g x)))`` with n applications."""
    if n < 0:
        raise ValueError("numerals are non-negative")
    f, g, x = fresh("f"), fresh("g"), fresh("x")
    body = Var(x)
    for _ in range(n):
        body = App(Var(g), body)
    return Abs(f, LetBang(Var(f), g, Para(Abs(x, body))))


def mk_klist(values) -> Term:
    """``\\f. let f be !g in $(\\x. g #k1 (g #k2 (... x)))``."""
    f, g, x = fresh("f"), fresh("g"), fresh("x")
    body = Var(x)
    for v in reversed(list(values)):
        body = apps(Var(g), k(v), body)
    return Abs(f, LetBang(Var(f), g, Para(Abs(x, body))))


def mk_bang(t: Term) -> Term:
    return Bang(t)


def mk_if(b: Term, u1: Term, u2: Term, shared=()) -> Term:
    """``(((b) \\xs. u1) \\xs. u2) xs``: the branches share the variables xs."""
    xs = list(shared)
    return apps(App(App(b, lams(xs, u1)), lams(xs, u2)), *map(Var, xs))


def mk_fold(f: Term, base: Term) -> Term:
    """``\\l. let (l) f be $h in let base be $b in $((h) b)``.

    With ``f : !(K -o B -o B)`` and ``base : $B`` this has type ``List(K) -o $B``.
    """
    l, h, b = fresh("l"), fresh("h"), fresh("b")
    return Abs(l, LetPara(App(Var(l), f), h, LetPara(base, b, Para(App(Var(h), Var(b))))))


# ---------------------------------------------------------------------------
# readback: erase boxes, apply to inert symbols and normalize


def _normal(t: Term, structure, *args, fuel=None) -> Term:
    from .reduction import normalize_untyped

    return normalize_untyped(apps(erase(t), *args), structure, fuel=fuel)


def decode_bool(t: Term, structure=None, fuel=None) -> bool:
    nf = _normal(t, structure, sym("T"), sym("F"), fuel=fuel)
    if isinstance(nf, Const) and nf.kind == "sym" and nf.arg in ("T", "F"):
        return nf.arg == "T"
    raise DecodeError(f"not a boolean: {nf}")


def decode_nat(t: Term, structure=None, fuel=None) -> int:
    nf = _normal(t, structure, sym("S"), sym("Z"), fuel=fuel)
    n = 0
    while isinstance(nf, App) and isinstance(nf.fun, Const) and nf.fun.arg == "S":
        n += 1
        nf = nf.arg
    if isinstance(nf, Const) and nf.kind == "sym" and nf.arg == "Z":
        return n
    raise DecodeError(f"not a numeral: {nf}")


def decode_klist(t: Term, structure=None, fuel=None) -> list:
    nf = _normal(t, structure, sym("cons"), sym("nil"), fuel=fuel)
    out = []
    while True:
        head, args = spine(nf)
        if isinstance(head, Const) and head.kind == "sym":
            if head.arg == "nil" and not args:
                return out
            if head.arg == "cons" and len(args) == 2:
                elem = args[0]
                if not (isinstance(elem, Const) and elem.is_value):
                    raise DecodeError(f"list element is not a literal: {elem}")
                out.append(elem.element)
                nf = args[1]
                continue
        raise DecodeError(f"not a list: {nf}")
