"""Abstract syntax of the light affine calculus with structure constants.

Terms are immutable.  Every node caches its free variables, its measure,
its node count and the maximal box nesting below it, so that reduction can
keep the measure of a whole term up to date in constant time per step.
"""

from __future__ import annotations

import itertools
import re
import sys
import threading
from functools import wraps

from .structure import BLANK, format_element

sys.setrecursionlimit(200_000)

_STACK_SIZE = 512 * 1024 * 1024
_local = threading.local()


def big_stack(fn):
    """Run ``fn`` on a thread with a large C stack (terms can nest deeply)."""

    @wraps(fn)
    def wrapper(*args, **kwargs):
        if getattr(_local, "inside", False):
            return fn(*args, **kwargs)
        box = {}

        def target():
            _local.inside = True
            try:
                box["value"] = fn(*args, **kwargs)
            except BaseException as exc:  # re-raised on the calling thread
                box["error"] = exc

        old = threading.stack_size()
        threading.stack_size(_STACK_SIZE)
        try:
            worker = threading.Thread(target=target)
            worker.start()
        finally:
            threading.stack_size(old)
        worker.join()
        if "error" in box:
            raise box["error"]
        return box["value"]

    return wrapper


_counter = itertools.count()
_SUFFIX = re.compile(r"_\d+$")


def fresh(base: str = "x") -> str:
    return f"{_SUFFIX.sub('', base) or 'x'}_{next(_counter)}"


WEIGHTS = {"k": 1, "star": 1, "op": 2, "rho": 4, "dup": 5, "lift": 2, "sym": 1}


class Term:
    __slots__ = ("fv", "measure", "size", "maxdepth")

    def children(self) -> tuple:
        return ()

    def __repr__(self) -> str:
        from .syntax import show

        return f"<{type(self).__name__} {show(self)}>"

    def __str__(self) -> str:
        from .syntax import show

        return show(self)


class Var(Term):
    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name
        self.fv = frozenset((name,))
        self.measure = self.size = 1
        self.maxdepth = 0


class Const(Term):
    """A constant: ``k`` (carrier literal), ``star``, ``dup``, ``op``, ``rho``, ``lift``.

    ``sym`` constants are inert constructor symbols used only for readback.
    """

    __slots__ = ("kind", "arg")
    _empty = frozenset()

    def __init__(self, kind: str, arg=None):
        if kind not in WEIGHTS:
            raise ValueError(f"unknown constant kind {kind!r}")
        if kind == "k" and arg is BLANK:
            kind, arg = "star", None
        self.kind = kind
        self.arg = arg
        self.fv = Const._empty
        self.measure = WEIGHTS[kind]
        self.size = 1
        self.maxdepth = 0

    @property
    def is_value(self) -> bool:
        return self.kind in ("k", "star")

    @property
    def element(self):
        if self.kind == "star":
            return BLANK
        if self.kind == "k":
            return self.arg
        raise ValueError(f"{self.kind} is not a carrier literal")

    def key(self):
        return (self.kind, self.arg)


class Abs(Term):
    __slots__ = ("var", "body")

    def __init__(self, var: str, body: Term):
        self.var, self.body = var, body
        self.fv = body.fv - {var}
        self.measure = body.measure + 1
        self.size = body.size + 1
        self.maxdepth = body.maxdepth

    def children(self):
        return (self.body,)


class App(Term):
    __slots__ = ("fun", "arg")

    def __init__(self, fun: Term, arg: Term):
        self.fun, self.arg = fun, arg
        self.fv = fun.fv | arg.fv
        self.measure = fun.measure + arg.measure + 1
        self.size = fun.size + arg.size + 1
        self.maxdepth = max(fun.maxdepth, arg.maxdepth)

    def children(self):
        return (self.fun, self.arg)


class Box(Term):
    __slots__ = ("body",)
    symbol = "?"

    def __init__(self, body: Term):
        self.body = body
        self.fv = body.fv
        self.measure = body.measure + 1
        self.size = body.size + 1
        self.maxdepth = body.maxdepth + 1

    def children(self):
        return (self.body,)


class Bang(Box):
    __slots__ = ()
    symbol = "!"


class Para(Box):
    __slots__ = ()
    symbol = "$"


class Let(Term):
    __slots__ = ("scrut", "var", "body")
    box: type = Box

    def __init__(self, scrut: Term, var: str, body: Term):
        self.scrut, self.var, self.body = scrut, var, body
        self.fv = scrut.fv | (body.fv - {var})
        self.measure = scrut.measure + body.measure + 1
        self.size = scrut.size + body.size + 1
        self.maxdepth = max(scrut.maxdepth, body.maxdepth)

    def children(self):
        return (self.scrut, self.body)


class LetBang(Let):
    __slots__ = ()
    box = Bang


class LetPara(Let):
    __slots__ = ()
    box = Para


def lams(names, body: Term) -> Term:
    for n in reversed(list(names)):
        body = Abs(n, body)
    return body


def apps(fun: Term, *args: Term) -> Term:
    for a in args:
        fun = App(fun, a)
    return fun


def spine(t: Term) -> tuple[Term, list[Term]]:
    args = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fun
    args.reverse()
    return t, args


def rebuild(t: Term, kids) -> Term:
    """Return ``t`` with its children replaced (identity if unchanged)."""
    old = t.children()
    if all(a is b for a, b in zip(old, kids)):
        return t
    if isinstance(t, Abs):
        return Abs(t.var, kids[0])
    if isinstance(t, App):
        return App(kids[0], kids[1])
    if isinstance(t, Box):
        return type(t)(kids[0])
    if isinstance(t, Let):
        return type(t)(kids[0], t.var, kids[1])
    raise TypeError(t)


def binder(t: Term):
    """Name bound by ``t`` and the index of the child it scopes over."""
    if isinstance(t, Abs):
        return t.var, 0
    if isinstance(t, Let):
        return t.var, 1
    return None, None


# ---------------------------------------------------------------------------
# substitution


def rename_free(t: Term, old: str, new: str) -> Term:
    return substitute(t, old, Var(new))


def substitute(t: Term, x: str, u: Term) -> Term:
    """Capture-avoiding ``t[u/x]``."""
    return subst_many(t, {x: u})


def subst_many(t: Term, sigma: dict) -> Term:
    sigma = {k: v for k, v in sigma.items() if k in t.fv}
    if not sigma:
        return t
    ufv = frozenset().union(*(v.fv for v in sigma.values()))
    return _subst(t, sigma, ufv)


def _subst(t, sigma, ufv):
    if not (t.fv & sigma.keys()):
        return t
    if isinstance(t, Var):
        return sigma[t.name]
    if isinstance(t, App):
        return App(_subst(t.fun, sigma, ufv), _subst(t.arg, sigma, ufv))
    if isinstance(t, Box):
        return type(t)(_subst(t.body, sigma, ufv))
    if isinstance(t, Abs):
        var, body = _enter(t.var, t.body, sigma, ufv)
        inner = {k: v for k, v in sigma.items() if k != t.var}
        return Abs(var, _subst(body, inner, ufv) if inner else body)
    if isinstance(t, Let):
        scrut = _subst(t.scrut, sigma, ufv)
        var, body = _enter(t.var, t.body, sigma, ufv)
        inner = {k: v for k, v in sigma.items() if k != t.var}
        return type(t)(scrut, var, _subst(body, inner, ufv) if inner else body)
    raise TypeError(t)


def _enter(var, body, sigma, ufv):
    if var in ufv and (body.fv & sigma.keys()) - {var}:
        new = fresh(var)
        return new, _subst(body, {var: Var(new)}, frozenset((new,)))
    return var, body


def occurrences(t: Term, x: str) -> int:
    if x not in t.fv:
        return 0
    if isinstance(t, Var):
        return 1
    if isinstance(t, Let):
        n = occurrences(t.scrut, x)
        return n + (occurrences(t.body, x) if t.var != x else 0)
    if isinstance(t, Abs):
        return occurrences(t.body, x) if t.var != x else 0
    return sum(occurrences(c, x) for c in t.children())


# ---------------------------------------------------------------------------
# alpha equivalence and canonical naming


def alpha_eq(a: Term, b: Term) -> bool:
    return _alpha(a, b, {}, {}, 0)


def _alpha(a, b, ea, eb, lvl):
    if a is b and not ea and not eb:
        return True
    if type(a) is not type(b) or a.size != b.size:
        return False
    if isinstance(a, Var):
        ia, ib = ea.get(a.name), eb.get(b.name)
        if ia is None and ib is None:
            return a.name == b.name
        return ia == ib
    if isinstance(a, Const):
        return a.key() == b.key()
    if isinstance(a, App):
        return _alpha(a.fun, b.fun, ea, eb, lvl) and _alpha(a.arg, b.arg, ea, eb, lvl)
    if isinstance(a, Box):
        return _alpha(a.body, b.body, ea, eb, lvl)
    if isinstance(a, Let) and not _alpha(a.scrut, b.scrut, ea, eb, lvl):
        return False
    ea2 = dict(ea)
    eb2 = dict(eb)
    ea2[a.var] = lvl
    eb2[b.var] = lvl
    return _alpha(a.body, b.body, ea2, eb2, lvl + 1)


def canonical(t: Term, prefix: str = "v") -> Term:
    """Rename bound variables to ``v0, v1, ...`` in binding (pre)order."""
    counter = itertools.count()

    def go(t, env):
        if isinstance(t, Var):
            return Var(env.get(t.name, t.name))
        if isinstance(t, Const):
            return t
        if isinstance(t, App):
            return App(go(t.fun, env), go(t.arg, env))
        if isinstance(t, Box):
            return type(t)(go(t.body, env))
        if isinstance(t, Abs):
            n = f"{prefix}{next(counter)}"
            return Abs(n, go(t.body, {**env, t.var: n}))
        if isinstance(t, Let):
            scrut = go(t.scrut, env)
            n = f"{prefix}{next(counter)}"
            return type(t)(scrut, n, go(t.body, {**env, t.var: n}))
        raise TypeError(t)

    return go(t, {})


def freshen(t: Term) -> Term:
    """Give every binder of ``t`` a globally fresh name."""

    def go(t, env):
        if isinstance(t, Var):
            return Var(env.get(t.name, t.name))
        if isinstance(t, Const):
            return t
        if isinstance(t, App):
            return App(go(t.fun, env), go(t.arg, env))
        if isinstance(t, Box):
            return type(t)(go(t.body, env))
        if isinstance(t, Abs):
            n = fresh(t.var)
            return Abs(n, go(t.body, {**env, t.var: n}))
        if isinstance(t, Let):
            n = fresh(t.var)
            return type(t)(go(t.scrut, env), n, go(t.body, {**env, t.var: n}))
        raise TypeError(t)

    return go(t, {})


# ---------------------------------------------------------------------------
# positions, depth, measure


def subterm(t: Term, path) -> Term:
    for i in path:
        t = t.children()[i]
    return t


def replace_at(t: Term, path, new: Term) -> Term:
    if not path:
        return new
    kids = list(t.children())
    kids[path[0]] = replace_at(kids[path[0]], path[1:], new)
    return rebuild(t, kids)


def depth(t: Term) -> int:
    return t.maxdepth


def depth_of(t: Term, path) -> int:
    d = 0
    for i in path:
        if isinstance(t, Box):
            d += 1
        t = t.children()[i]
    return d


def measure(t: Term) -> int:
    return t.measure


def size(t: Term) -> int:
    return t.size


def positions(t: Term, path=()):
    yield path, t
    for i, c in enumerate(t.children()):
        yield from positions(c, path + (i,))


def constants(t: Term):
    return [s for _, s in positions(t) if isinstance(s, Const)]


# ---------------------------------------------------------------------------
# erasure and well-formedness


def erase(t: Term) -> Term:
    """Forget boxes: ``(!t)- = ($t)- = t-`` and ``(let u be !x in t)- = t-[u-/x]``."""
    if isinstance(t, (Var, Const)):
        return t
    if isinstance(t, Abs):
        return Abs(t.var, erase(t.body))
    if isinstance(t, App):
        return App(erase(t.fun), erase(t.arg))
    if isinstance(t, Box):
        return erase(t.body)
    if isinstance(t, Let):
        return substitute(erase(t.body), t.var, erase(t.scrut))
    raise TypeError(t)


def is_untyped(t: Term) -> bool:
    return not any(isinstance(s, (Box, Let)) for _, s in positions(t))


def well_formed(t: Term, structure=None) -> list[str]:
    """Syntactic conditions a typable term satisfies; returns the violations."""
    problems = []
    for path, s in positions(t):
        where = "/".join(map(str, path)) or "root"
        if isinstance(s, Bang):
            n = sum(occurrences(s.body, x) for x in s.body.fv)
            if n > 1:
                problems.append(f"{where}: !-box with {n} free variable occurrences")
        elif isinstance(s, (Abs, LetPara)):
            kind = "lambda" if isinstance(s, Abs) else "let-$"
            n = occurrences(s.body, s.var)
            if n > 1:
                problems.append(f"{where}: {kind}-bound {s.var} occurs {n} times")
        elif isinstance(s, Const) and structure is not None:
            if s.kind == "op" and not 0 <= s.arg < len(structure.operations):
                problems.append(f"{where}: op{s.arg} out of range")
            if s.kind == "rho" and not 0 <= s.arg < len(structure.relations):
                problems.append(f"{where}: rho{s.arg} out of range")
    return problems


def k(value) -> Const:
    return Const("k", value)


STAR = Const("star")
DUP = Const("dup")
LIFT = Const("lift")


def op(i: int) -> Const:
    return Const("op", i)


def rho(i: int) -> Const:
    return Const("rho", i)


def sym(name: str) -> Const:
    return Const("sym", name)


def show_element(c: Const) -> str:
    return format_element(c.element)
