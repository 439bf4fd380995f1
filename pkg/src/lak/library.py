"""Typed combinators on numerals, lists and machine configurations.

Every combinator is written as an annotated tree and elaborated once into a
derivation; larger combinators embed the smaller ones through
:class:`~lak.elaborate.Use` leaves so that each sub-derivation is built a
single time.
"""

from __future__ import annotations

from functools import cached_property

from . import formulas as F
from .derivation import Derivation
from .elaborate import (
    Ap,
    BangI,
    Cst,
    Gen,
    Inst,
    Lam,
    LetB,
    LetP,
    LetT,
    ParaI,
    Tensor,
    Use,
    V,
    ap,
    elaborate,
    lam,
    mk_if,
)
from .formulas import BOOL, KAPPA as K, NAT, Formula, ListT, Named, TensorT, TVar, fresh_tvar, register_alias
from .terms import DUP, LIFT, STAR, fresh, op, rho

LIST = ListT(K)


def _endo_k(a: Formula) -> Formula:
    return F.lollis([K, a], a)


# ---------------------------------------------------------------------------
# machine-encoding aliases


@register_alias("Q")
def _state_type(n):
    g, d = fresh_tvar("g"), fresh_tvar("d")
    G, D = TVar(g), TVar(d)
    return F.Forall(g, F.Forall(d, F.lollis([F.Lolli(G, D)] * n + [G], D)))


def _conf_type(n, parts):
    a = fresh_tvar("a")
    A = TVar(a)
    return F.Forall(a, F.lollis([F.Bang(_endo_k(A)), F.Para(A), F.Para(A)], F.Para(TensorT(parts(A)))))


@register_alias("C")
def _config(n):
    return _conf_type(n, lambda A: [A, A, Named("Q", (n,))])


@register_alias("CW")
def _windowed(n, p):
    return _conf_type(n, lambda A: [A] + [K] * (2 * p) + [K, A, Named("Q", (n,))])


@register_alias("W")
def _payload(p, a):
    return TensorT([a] + [K] * (2 * p) + [K, a])


@register_alias("Acc")
def _accumulator(p, b):
    return TensorT([BOOL] + [K] * p + [b])


def Q(n):
    return Named("Q", (n,))


def C(n):
    return Named("C", (n,))


def CW(n, p):
    return Named("CW", (n, p))


def W(p, a):
    return Named("W", (p, a))


def Acc(p, b):
    return Named("Acc", (p, b))


def names(stem: str, count: int) -> list[str]:
    return [fresh(stem) for _ in range(count)]


class Library:
    """Combinators over a structure of uniform arity ``p``."""

    def __init__(self, p: int):
        self.p = p
        self._cache: dict = {}

    def derive(self, key, build) -> Derivation:
        return self._entry(key, build)[0]

    def _entry(self, key, build):
        if key not in self._cache:
            tt = build()
            self._cache[key] = (elaborate(tt, self.p), tt)
        return self._cache[key]

    def use(self, key, build) -> Use:
        return Use(*self._entry(key, build))

    # -- booleans and numerals

    def boolean(self, value: bool) -> Use:
        def build():
            a = fresh_tvar()
            A = TVar(a)
            x, y = fresh("x"), fresh("y")
            return Gen(a, lam([(x, A), (y, A)], V(x if value else y)), BOOL)

        return self.use(("bool", value), build)

    def nat(self, n: int) -> Use:
        def build():
            a = fresh_tvar()
            A = TVar(a)
            f, g, x = fresh("f"), fresh("g"), fresh("x")
            body = V(x)
            for _ in range(n):
                body = Ap(V(g), body)
            return Gen(a, Lam(f, F.Bang(F.Lolli(A, A)), LetB(V(f), g, ParaI(Lam(x, A, body)))), NAT)

        return self.use(("nat", n), build)

    def _nat_iter(self, body):
        """``Lam n:N. Gen a. Lam f:!(a -o a). let f be !g in body(n, g, a)``."""
        a = fresh_tvar()
        A = TVar(a)
        f, g = fresh("f"), fresh("g")
        return Gen(a, Lam(f, F.Bang(F.Lolli(A, A)), LetB(V(f), g, body(g, A))), NAT)

    @property
    def succ(self) -> Use:
        def build():
            n, h, x = fresh("n"), fresh("h"), fresh("x")
            return Lam(n, NAT, self._nat_iter(lambda g, A: LetP(
                Ap(Inst(V(n), A), BangI(V(g))), h,
                ParaI(Lam(x, A, Ap(V(g), Ap(V(h), V(x))))))))

        return self.use("succ", build)

    @property
    def add(self) -> Use:
        def build():
            n, m, h1, h2, x = fresh("n"), fresh("m"), fresh("h"), fresh("h"), fresh("x")
            return lam([(n, NAT), (m, NAT)], self._nat_iter(lambda g, A: LetP(
                Ap(Inst(V(n), A), BangI(V(g))), h1, LetP(
                    Ap(Inst(V(m), A), BangI(V(g))), h2,
                    ParaI(Lam(x, A, Ap(V(h1), Ap(V(h2), V(x)))))))))

        return self.use("add", build)

    @property
    def mul(self) -> Use:
        """``N -o !N -o $N``: iterate ``add m`` n times from zero."""

        def build():
            n, m, m1, h = fresh("n"), fresh("m"), fresh("m"), fresh("h")
            return lam([(n, NAT), (m, F.Bang(NAT))], LetB(V(m), m1, LetP(
                Ap(Inst(V(n), NAT), BangI(Ap(self.add, V(m1)))), h,
                ParaI(Ap(V(h), self.nat(0))))))

        return self.use("mul", build)

    def _iterate_nat(self, key, result: Formula, step, base):
        """``Lam n:N. let n_result (!step) be $h in $((h) base)``."""

        def build():
            n, h = fresh("n"), fresh("h")
            return Lam(n, NAT, LetP(Ap(Inst(V(n), result), BangI(step())), h,
                                    ParaI(Ap(V(h), base()))))

        return self.use(key, build)

    @property
    def coe_nat(self) -> Use:
        """``N -o $N``."""
        return self._iterate_nat("coeN", NAT, lambda: self.succ, lambda: self.nat(0))

    @property
    def bang_nat(self) -> Use:
        """``N -o $!N``."""

        def step():
            b, b1 = fresh("b"), fresh("b")
            return Lam(b, F.Bang(NAT), LetB(V(b), b1, BangI(Ap(self.succ, V(b1)))))

        return self._iterate_nat("bangN", F.Bang(NAT), step, lambda: BangI(self.nat(0)))

    def dup_nat(self, r: int) -> Use:
        """``N -o $(N * ... * N)`` with r copies."""
        T = TensorT([NAT] * r)

        def step():
            t, xs = fresh("t"), names("c", r)
            return Lam(t, T, LetT(V(t), xs, Tensor([Ap(self.succ, V(x)) for x in xs])))

        return self._iterate_nat(("dupN", r), T, step, lambda: Tensor([self.nat(0)] * r))

    # -- lists

    def _list_iter(self, body):
        a = fresh_tvar()
        A = TVar(a)
        f, g = fresh("f"), fresh("g")
        return Gen(a, Lam(f, F.Bang(_endo_k(A)), LetB(V(f), g, body(g, A))), LIST)

    @property
    def nil(self) -> Use:
        def build():
            x = fresh("x")
            return self._list_iter(lambda g, A: ParaI(Lam(x, A, V(x))))

        return self.use("nil", build)

    @property
    def cons(self) -> Use:
        """``$K -o List(K) -o List(K)``."""

        def build():
            k, k1, l, h, x = fresh("k"), fresh("k"), fresh("l"), fresh("h"), fresh("x")
            return lam([(k, F.Para(K)), (l, LIST)], self._list_iter(lambda g, A: LetP(
                V(k), k1, LetP(Ap(Inst(V(l), A), BangI(V(g))), h,
                               ParaI(Lam(x, A, ap(V(g), V(k1), Ap(V(h), V(x)))))))))

        return self.use("cons", build)

    def fold_tt(self, B: Formula):
        """``!(K -o B -o B) -o $B -o List(K) -o $B``."""
        f, b, b1, l, h = fresh("f"), fresh("b"), fresh("b"), fresh("l"), fresh("h")
        return lam([(f, F.Bang(_endo_k(B))), (b, F.Para(B)), (l, LIST)], LetP(
            Ap(Inst(V(l), B), V(f)), h, LetP(V(b), b1, ParaI(Ap(V(h), V(b1))))))

    @property
    def fold(self) -> Use:
        return self.use("fold", lambda: self.fold_tt(TVar("B")))

    def _iterate_list(self, key, result: Formula, step, base):
        def build():
            l, h = fresh("l"), fresh("h")
            return Lam(l, LIST, LetP(Ap(Inst(V(l), result), BangI(step())), h,
                                     ParaI(Ap(V(h), base()))))

        return self.use(key, build)

    @property
    def length(self) -> Use:
        """``List(K) -o $N``."""
        return self._iterate_list("length", NAT, lambda: Lam(fresh("k"), K, self.succ),
                                  lambda: self.nat(0))

    @property
    def coerce_list(self) -> Use:
        """``List(K) -o $List(K)``: rebuild the list one level down."""

        def step():
            k = fresh("k")
            return Lam(k, K, Ap(self.cons, Ap(Cst(LIFT), V(k))))

        return self._iterate_list("coerceList", LIST, step, lambda: self.nil)

    @property
    def ilength(self) -> Use:
        """``List(K) -o $(List(K) * N)``: the list rebuilt together with its length."""
        T = TensorT([LIST, NAT])

        def step():
            k, t, l1, n1 = fresh("k"), fresh("t"), fresh("l"), fresh("n")
            return lam([(k, K), (t, T)], LetT(V(t), [l1, n1], Tensor([
                ap(self.cons, Ap(Cst(LIFT), V(k)), V(l1)), Ap(self.succ, V(n1))])))

        return self._iterate_list("Ilength", T, step, lambda: Tensor([self.nil, self.nat(0)]))
