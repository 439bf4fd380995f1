"""Annotated terms and their elaboration into typing derivations.

Library terms are written as small annotated trees (binders carry their
types, polymorphism is explicit).  :func:`elaborate` turns such a tree into
a :class:`~lak.derivation.Derivation` using only the primitive sequent
rules; the derivation is then validated independently by
:func:`~lak.derivation.check_derivation`.
"""

from __future__ import annotations

from . import formulas as F
from .derivation import Derivation, Entry, Judgment, _axiom_rule, constant_type
from .formulas import Formula, fresh_tvar, subst_type
from .syntax import mk_tensor
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
    big_stack,
    fresh,
    lams,
    subst_many,
    substitute,
)


class ElabError(TypeError):
    pass


class TT:
    __slots__ = ("fv",)

    def kids(self) -> tuple:
        return ()

    def bound(self, i: int) -> frozenset:
        return frozenset()

    def with_kids(self, kids) -> "TT":
        return self

    def _init_fv(self):
        fv = set()
        for i, c in enumerate(self.kids()):
            fv |= c.fv - self.bound(i)
        self.fv = frozenset(fv)


class V(TT):
    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name
        self.fv = frozenset((name,))


class Cst(TT):
    __slots__ = ("const",)

    def __init__(self, const: Const):
        self.const = const
        self.fv = frozenset()


class Use(TT):
    """An already elaborated derivation used as a leaf."""

    __slots__ = ("deriv", "source")

    def __init__(self, deriv: Derivation, source: "TT | None" = None):
        self.deriv = deriv
        self.source = source  # the tree ``deriv`` was elaborated from, when known
        self.fv = frozenset(deriv.conclusion.context)


class Lam(TT):
    __slots__ = ("name", "ty", "body")

    def __init__(self, name, ty, body):
        self.name, self.ty, self.body = name, ty, body
        self._init_fv()

    def kids(self):
        return (self.body,)

    def bound(self, i):
        return frozenset((self.name,))

    def with_kids(self, kids):
        return Lam(self.name, self.ty, kids[0])


class Ap(TT):
    __slots__ = ("fun", "arg")

    def __init__(self, fun, arg):
        self.fun, self.arg = fun, arg
        self._init_fv()

    def kids(self):
        return (self.fun, self.arg)

    def with_kids(self, kids):
        return Ap(*kids)


class BangI(TT):
    __slots__ = ("body",)

    def __init__(self, body):
        self.body = body
        self._init_fv()

    def kids(self):
        return (self.body,)

    def with_kids(self, kids):
        return type(self)(kids[0])


class ParaI(BangI):
    __slots__ = ()


class LetB(TT):
    __slots__ = ("scrut", "name", "body")

    def __init__(self, scrut, name, body):
        self.scrut, self.name, self.body = scrut, name, body
        self._init_fv()

    def kids(self):
        return (self.scrut, self.body)

    def bound(self, i):
        return frozenset((self.name,)) if i == 1 else frozenset()

    def with_kids(self, kids):
        return type(self)(kids[0], self.name, kids[1])


class LetP(LetB):
    __slots__ = ()


class Inst(TT):
    __slots__ = ("t", "ty")

    def __init__(self, t, ty):
        self.t, self.ty = t, ty
        self._init_fv()

    def kids(self):
        return (self.t,)

    def with_kids(self, kids):
        return Inst(kids[0], self.ty)


class Gen(TT):
    """Universal introduction over ``var``; ``display`` is an equal formula
    (usually an alias) used as the conclusion formula."""

    __slots__ = ("var", "t", "display")

    def __init__(self, var, t, display=None):
        self.var, self.t, self.display = var, t, display
        self._init_fv()

    def kids(self):
        return (self.t,)

    def with_kids(self, kids):
        return Gen(self.var, kids[0], self.display)


class Tensor(TT):
    __slots__ = ("parts",)

    def __init__(self, parts):
        self.parts = tuple(parts)
        self._init_fv()

    def kids(self):
        return self.parts

    def with_kids(self, kids):
        return Tensor(kids)


class LetT(TT):
    __slots__ = ("scrut", "names", "body")

    def __init__(self, scrut, names, body):
        self.scrut, self.names, self.body = scrut, tuple(names), body
        self._init_fv()

    def kids(self):
        return (self.scrut, self.body)

    def bound(self, i):
        return frozenset(self.names) if i == 1 else frozenset()

    def with_kids(self, kids):
        return LetT(kids[0], self.names, kids[1])


class If(TT):
    """``(((b) \\xs. u1) \\xs. u2) args``: both branches abstract ``names``."""

    __slots__ = ("cond", "names", "then", "other", "args")

    def __init__(self, cond, names, then, other, args):
        self.cond, self.names, self.then, self.other = cond, tuple(names), then, other
        self.args = tuple(args)
        self._init_fv()

    def kids(self):
        return (self.cond, self.then, self.other) + self.args

    def bound(self, i):
        return frozenset(self.names) if i in (1, 2) else frozenset()

    def with_kids(self, kids):
        return If(kids[0], self.names, kids[1], kids[2], kids[3:])


# ---------------------------------------------------------------------------
# small constructors


def ap(f: TT, *args: TT) -> TT:
    for a in args:
        f = Ap(f, a)
    return f


def lam(binders, body: TT) -> TT:
    for name, ty in reversed(list(binders)):
        body = Lam(name, ty, body)
    return body


def mk_if(cond: TT, then: TT, other: TT, shared=()) -> TT:
    """Conditional whose branches share the plain variables ``shared``."""
    return If(cond, shared, then, other, [V(x) for x in shared])


# ---------------------------------------------------------------------------
# renaming


def _map_free(tt: TT, leaf, bound=frozenset()) -> TT:
    """Rebuild ``tt`` applying ``leaf`` to free variable occurrences."""
    if isinstance(tt, V):
        return tt if tt.name in bound else leaf(tt.name)
    if isinstance(tt, Use):
        return tt
    kids = tt.kids()
    if not kids:
        return tt
    new = [_map_free(c, leaf, bound | tt.bound(i)) for i, c in enumerate(kids)]
    if all(a is b for a, b in zip(kids, new)):
        return tt
    return tt.with_kids(new)


def tt_rename(tt: TT, old: str, new: str) -> TT:
    if old not in tt.fv:
        return tt
    if _uses(tt, old):
        raise ElabError(f"cannot rename {old} inside an elaborated leaf")
    return _map_free(tt, lambda x: V(new) if x == old else V(x))


def split_occurrences(tt: TT, x: str):
    """Rename each free occurrence of ``x`` to its own fresh name."""
    names = []

    def leaf(y):
        if y != x:
            return V(y)
        n = fresh(x)
        names.append(n)
        return V(n)

    if _uses(tt, x):
        raise ElabError(f"cannot split {x} inside an elaborated leaf")
    return _map_free(tt, leaf), names


def _uses(tt: TT, x: str, bound=frozenset()) -> bool:
    if x in bound or x not in tt.fv:
        return False
    if isinstance(tt, Use):
        return True
    return any(_uses(c, x, bound | tt.bound(i)) for i, c in enumerate(tt.kids()))


def occurrence_count(tt: TT, x: str) -> int:
    if x not in tt.fv:
        return 0
    if isinstance(tt, V):
        return 1
    if isinstance(tt, Use):
        return 1
    return sum(occurrence_count(c, x) for i, c in enumerate(tt.kids()) if x not in tt.bound(i))


def to_term(tt: TT) -> Term:
    """The plain term an annotated tree denotes."""
    if isinstance(tt, V):
        return Var(tt.name)
    if isinstance(tt, Cst):
        return tt.const
    if isinstance(tt, Use):
        return tt.deriv.conclusion.term
    if isinstance(tt, Lam):
        return Abs(tt.name, to_term(tt.body))
    if isinstance(tt, Ap):
        return App(to_term(tt.fun), to_term(tt.arg))
    if isinstance(tt, ParaI):
        return Para(to_term(tt.body))
    if isinstance(tt, BangI):
        return Bang(to_term(tt.body))
    if isinstance(tt, LetP):
        return LetPara(to_term(tt.scrut), tt.name, to_term(tt.body))
    if isinstance(tt, LetB):
        return LetBang(to_term(tt.scrut), tt.name, to_term(tt.body))
    if isinstance(tt, (Inst, Gen)):
        return to_term(tt.t)
    if isinstance(tt, Tensor):
        return mk_tensor([to_term(p) for p in tt.parts])
    if isinstance(tt, LetT):
        return App(to_term(tt.scrut), lams(tt.names, to_term(tt.body)))
    if isinstance(tt, If):
        head = apps(to_term(tt.cond), lams(tt.names, to_term(tt.then)), lams(tt.names, to_term(tt.other)))
        return apps(head, *(to_term(a) for a in tt.args))
    raise TypeError(tt)


# ---------------------------------------------------------------------------
# elaboration


def _node(rule, prem, ctx, term, formula, **params) -> Derivation:
    return Derivation(rule, tuple(prem), Judgment(ctx, term, formula), params)


def _tensor_parts(f: Formula, n: int):
    q = f.unfold()
    if not isinstance(q, F.Forall):
        raise ElabError(f"expected a tensor, got {f}")
    k = q.body.unfold() if isinstance(q.body, F.Alias) else q.body
    if not isinstance(k, F.Lolli):
        raise ElabError(f"expected a tensor, got {f}")
    parts, cur = [], k.a
    for _ in range(n):
        cur = cur.unfold()
        if not isinstance(cur, F.Lolli):
            raise ElabError(f"tensor {f} has fewer than {n} components")
        parts.append(cur.a)
        cur = cur.b
    return parts


class Elaborator:
    def __init__(self, p: int):
        self.p = p

    # -- types without derivations (needed to annotate desugarings)

    def synth(self, tt: TT, env: dict) -> Formula:
        if isinstance(tt, V):
            if tt.name not in env:
                raise ElabError(f"unbound variable {tt.name}")
            return env[tt.name].formula
        if isinstance(tt, Cst):
            return constant_type(tt.const, self.p)
        if isinstance(tt, Use):
            return tt.deriv.conclusion.formula
        if isinstance(tt, Lam):
            return F.Lolli(tt.ty, self.synth(tt.body, {**env, tt.name: Entry(tt.ty)}))
        if isinstance(tt, Ap):
            f = self.synth(tt.fun, env).unfold()
            if not isinstance(f, F.Lolli):
                raise ElabError(f"applying a non-function of type {f}")
            return f.b
        if isinstance(tt, ParaI):
            return F.Para(self.synth(tt.body, env))
        if isinstance(tt, BangI):
            return F.Bang(self.synth(tt.body, env))
        if isinstance(tt, LetB):
            m = self.synth(tt.scrut, env).unfold()
            want = F.Para if isinstance(tt, LetP) else F.Bang
            if not isinstance(m, want):
                raise ElabError(f"let expects a {want.symbol}-formula, got {m}")
            return self.synth(tt.body, {**env, tt.name: Entry(m.a)})
        if isinstance(tt, Inst):
            q = self.synth(tt.t, env).unfold()
            if not isinstance(q, F.Forall):
                raise ElabError(f"instantiating a non-universal formula {q}")
            return subst_type(q.body, q.var, tt.ty)
        if isinstance(tt, Gen):
            return tt.display or F.Forall(tt.var, self.synth(tt.t, env))
        if isinstance(tt, Tensor):
            return F.TensorT([self.synth(p, env) for p in tt.parts])
        if isinstance(tt, LetT):
            parts = _tensor_parts(self.synth(tt.scrut, env), len(tt.names))
            return self.synth(tt.body, {**env, **{x: Entry(a) for x, a in zip(tt.names, parts)}})
        if isinstance(tt, If):
            inner = {**env, **{x: Entry(self.synth(a, env)) for x, a in zip(tt.names, tt.args)}}
            return self.synth(tt.then, inner)
        raise TypeError(tt)

    # -- derivations

    def elab(self, tt: TT, env: dict) -> Derivation:
        return getattr(self, "_" + type(tt).__name__)(tt, env)

    def _V(self, tt, env):
        x = tt.name
        if x not in env:
            raise ElabError(f"unbound variable {x}")
        e = env[x]
        if e.discharge:
            raise ElabError(f"{x} is {e.discharge}-discharged and used outside a box")
        return _node("Id", (), {x: e}, Var(x), e.formula, x=x)

    def _Cst(self, tt, env):
        c = tt.const
        if c.kind == "sym":
            raise ElabError("readback symbols have no type")
        return _node(_axiom_rule(c), (), {}, c, constant_type(c, self.p))

    def _Use(self, tt, env):
        return tt.deriv

    def _weaken(self, d: Derivation, extra: dict) -> Derivation:
        c = d.conclusion
        return _node("Weak", (d,), {**c.context, **extra}, c.term, c.formula)

    def _share(self, left: TT, right: TT, env: dict, bound=frozenset()):
        """Rename variables of ``right`` that also occur in ``left``."""
        shared = left.fv & (right.fv - bound)
        pairs = []
        if shared:
            env = dict(env)
        for z in sorted(shared):
            e = env.get(z)
            if e is None:
                raise ElabError(f"unbound variable {z}")
            if e.discharge != "!":
                raise ElabError(f"{z} is used more than once but is not !-discharged")
            z2 = fresh(z)
            right = tt_rename(right, z, z2)
            env[z2] = e
            pairs.append((z, z2))
        return right, env, pairs

    def _contract(self, d: Derivation, pairs) -> Derivation:
        for z, z2 in pairs:
            c = d.conclusion
            ctx = {v: e for v, e in c.context.items() if v != z2}
            term = subst_many(c.term, {z2: Var(z)})
            d = _node("Cntr", (d,), ctx, term, c.formula, x=z, y=z2, z=z)
        return d

    def _Lam(self, tt, env):
        x, A = tt.name, tt.ty
        d = self.elab(tt.body, {**env, x: Entry(A)})
        c = d.conclusion
        if x not in c.context:
            d = self._weaken(d, {x: Entry(A)})
            c = d.conclusion
        ctx = {v: e for v, e in c.context.items() if v != x}
        return _node("-or", (d,), ctx, Abs(x, c.term), F.Lolli(A, c.formula), x=x)

    def _Ap(self, tt, env):
        arg, env2, pairs = self._share(tt.fun, tt.arg, env)
        df = self.elab(tt.fun, env2)
        da = self.elab(arg, env2)
        f = df.conclusion.formula.unfold()
        if not isinstance(f, F.Lolli):
            raise ElabError(f"applying a term of type {df.conclusion.formula}")
        if not da.conclusion.formula == f.a:
            raise ElabError(f"argument of type {da.conclusion.formula}, expected {f.a}")
        d = self._apply(df, da, f.b)
        return self._contract(d, pairs)

    def _apply(self, df, da, result):
        x, y = fresh("x"), fresh("y")
        idd = _node("Id", (), {x: Entry(result)}, Var(x), result, x=x)
        ca = da.conclusion
        lo = _node("-ol", (da, idd), {**ca.context, y: Entry(df.conclusion.formula)},
                   App(Var(y), ca.term), result, x=x, y=y)
        cf = df.conclusion
        return _node("Cut", (df, lo), {**cf.context, **ca.context},
                     substitute(lo.conclusion.term, y, cf.term), result, x=y)

    def _LetB(self, tt, env):
        box = "$" if isinstance(tt, LetP) else "!"
        modal = F.Para if box == "$" else F.Bang
        body, env2, pairs = self._share(tt.scrut, tt.body, env, frozenset((tt.name,)))
        ds = self.elab(tt.scrut, env2)
        m = ds.conclusion.formula.unfold()
        if not isinstance(m, modal):
            raise ElabError(f"let expects a {box}-formula, got {ds.conclusion.formula}")
        x = tt.name
        db = self.elab(body, {**env2, x: Entry(m.a, box)})
        cb = db.conclusion
        if x not in cb.context:
            db = self._weaken(db, {x: Entry(m.a, box)})
            cb = db.conclusion
        y = fresh("y")
        let = LetPara if box == "$" else LetBang
        ctx = {v: e for v, e in cb.context.items() if v != x}
        ctx[y] = Entry(ds.conclusion.formula)
        nl = _node(box + "l", (db,), ctx, let(Var(y), x, cb.term), cb.formula, x=x, y=y)
        cs = ds.conclusion
        ctx = {v: e for v, e in nl.conclusion.context.items() if v != y}
        d = _node("Cut", (ds, nl), {**cs.context, **ctx},
                  substitute(nl.conclusion.term, y, cs.term), cb.formula, x=y)
        return self._contract(d, pairs)

    _LetP = _LetB

    def _BangI(self, tt, env):
        inner = {}
        total = 0
        for v in tt.body.fv:
            e = env.get(v)
            if e is None:
                raise ElabError(f"unbound variable {v}")
            if e.discharge != "!":
                raise ElabError(f"{v} enters a !-box without being !-discharged")
            inner[v] = Entry(e.formula)
            total += occurrence_count(tt.body, v)
        if total > 1:
            raise ElabError("a !-box may have at most one free variable occurrence")
        d = self.elab(tt.body, inner)
        c = d.conclusion
        ctx = {v: Entry(e.formula, "!") for v, e in c.context.items()}
        return _node("!r", (d,), ctx, Bang(c.term), F.Bang(c.formula))

    def _ParaI(self, tt, env):
        body = tt.body
        inner, outer, splits = {}, {}, []
        for v in sorted(body.fv):
            e = env.get(v)
            if e is None:
                raise ElabError(f"unbound variable {v}")
            if e.discharge not in ("!", "$"):
                raise ElabError(f"{v} enters a $-box undischarged")
            n = occurrence_count(body, v)
            if e.discharge == "$" and n > 1:
                raise ElabError(f"$-discharged {v} occurs {n} times")
            if n > 1:
                body, names = split_occurrences(body, v)
                splits.append((v, names))
            else:
                names = [v]
            for nm in names:
                inner[nm] = Entry(e.formula)
                outer[nm] = Entry(e.formula, e.discharge)
        d = self.elab(body, inner)
        c = d.conclusion
        ctx = {v: outer[v] for v in c.context}
        d = _node("$r", (d,), ctx, Para(c.term), F.Para(c.formula))
        for v, names in splits:
            cur = names[0]
            for i, nxt in enumerate(names[1:]):
                target = v if i == len(names) - 2 else fresh(v)
                c = d.conclusion
                ctx = {w: e for w, e in c.context.items() if w not in (cur, nxt)}
                ctx[target] = c.context[cur]
                term = subst_many(c.term, {cur: Var(target), nxt: Var(target)})
                d = _node("Cntr", (d,), ctx, term, c.formula, x=cur, y=nxt, z=target)
                cur = target
        return d

    def _Inst(self, tt, env):
        dt = self.elab(tt.t, env)
        ct = dt.conclusion
        q = ct.formula.unfold()
        if not isinstance(q, F.Forall):
            raise ElabError(f"instantiating non-universal {ct.formula}")
        inst = subst_type(q.body, q.var, tt.ty)
        x = fresh("x")
        idd = _node("Id", (), {x: Entry(inst)}, Var(x), inst, x=x)
        al = _node("Al", (idd,), {x: Entry(ct.formula)}, Var(x), inst, x=x, witness=tt.ty)
        return _node("Cut", (dt, al), dict(ct.context), ct.term, inst, x=x)

    def _Gen(self, tt, env):
        dt = self.elab(tt.t, env)
        c = dt.conclusion
        for v, e in c.context.items():
            if tt.var in e.formula.ftv:
                raise ElabError(f"type variable {tt.var} is free in hypothesis {v}")
        formula = tt.display or F.Forall(tt.var, c.formula)
        return _node("Ar", (dt,), dict(c.context), c.term, formula, var=tt.var)

    def _Tensor(self, tt, env):
        types = [self.synth(p, env) for p in tt.parts]
        g, y = fresh_tvar("g"), fresh("y")
        body = Lam(y, F.lollis(types, F.TVar(g)), ap(V(y), *tt.parts))
        return self.elab(Gen(g, body, F.TensorT(types)), env)

    def _LetT(self, tt, env):
        parts = _tensor_parts(self.synth(tt.scrut, env), len(tt.names))
        inner = {**env, **{x: Entry(a) for x, a in zip(tt.names, parts)}}
        result = self.synth(tt.body, inner)
        fn = lam(zip(tt.names, parts), tt.body)
        return self.elab(Ap(Inst(tt.scrut, result), fn), env)

    def _If(self, tt, env):
        types = [self.synth(a, env) for a in tt.args]
        inner = {**env, **{x: Entry(a) for x, a in zip(tt.names, types)}}
        result = self.synth(tt.then, inner)
        branches = [lam(zip(tt.names, types), b) for b in (tt.then, tt.other)]
        head = Inst(tt.cond, F.lollis(types, result))
        return self.elab(ap(head, *branches, *tt.args), env)


@big_stack
def elaborate(tt: TT, p: int, env: dict | None = None) -> Derivation:
    """Derivation of ``tt`` under ``env`` (closed by default)."""
    return Elaborator(p).elab(tt, dict(env or {}))
