"""Compile a polynomially clocked machine into a term ``List(K) -o $^d List(K)``.

The compiled term rebuilds the input together with its length, computes
the clock P(length), iterates one-step transition ``c2c`` that many times
from the initial configuration and reads the positive half-tape back.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import formulas as F
from .derivation import Derivation, check_derivation
from .elaborate import (
    Ap,
    BangI,
    Cst,
    ElabError,
    Gen,
    Inst,
    Lam,
    LetB,
    LetP,
    LetT,
    ParaI,
    Tensor,
    V,
    ap,
    lam,
    mk_if,
    to_term,
)
from .formulas import BOOL, KAPPA as K, NAT, TensorT, TVar, fresh_tvar
from .library import LIST, Acc, C, CW, Library, Q, W, _endo_k, names
from .machine import Machine, validate_machine
from .structure import BLANK
from .terms import DUP, STAR, Term, fresh, op, positions, rho, well_formed


class CompilationError(RuntimeError):
    pass


@dataclass
class CompiledMachine:
    term: Term
    state_terms: dict
    action_terms: dict
    c2cw: Term
    c2c: Term
    tP: Term
    k: int
    d: int
    derivation: Derivation
    parts: dict = field(default_factory=dict)  # name -> Derivation of each closed piece

    @property
    def formula(self):
        return self.derivation.conclusion.formula


def expected_formula(d: int):
    return F.Lolli(LIST, F.paras(d, LIST))


class MachineCompiler:
    def __init__(self, m: Machine, lib: Library | None = None):
        problems = validate_machine(m)
        if problems:
            raise CompilationError("; ".join(problems))
        self.m = m
        self.p = m.p
        self.n = len(m.state_ids)
        self.lib = lib or Library(self.p)

    # -- states and configurations

    def state(self, q: str):
        i, n = self.m.index(q), self.n

        def build():
            g, d = fresh_tvar("g"), fresh_tvar("d")
            G, D = TVar(g), TVar(d)
            xs, v = names("s", n), fresh("v")
            body = lam([(x, F.Lolli(G, D)) for x in xs] + [(v, G)], Ap(V(xs[i]), V(v)))
            return Gen(g, Gen(d, body), Q(n))

        return self.lib.use(("state", n, i), build)

    def _config_abs(self, display, body):
        """``Lam c. Gen a. Lam g x x'. body(c, a, g, x, x')``."""
        a = fresh_tvar("a")
        A = TVar(a)
        g, x, x2 = fresh("g"), fresh("x"), fresh("x")
        inner = lam([(g, F.Bang(_endo_k(A))), (x, F.Para(A)), (x2, F.Para(A))], body(A, g, x, x2))
        return Gen(a, inner, display)

    def step_tt(self, A, g1):
        """The iterated step computing windows: ``!(K -o Acc(a) -o Acc(a))``."""
        p, lib = self.p, self.lib
        acc = Acc(p, A)
        kk, a, b, l, c, d, z = (fresh(s) for s in ("k", "a", "b", "l", "c", "d", "z"))
        ks = names("w", p)
        cond = mk_if(V(b), Ap(V(g1), V(d)), Lam(z, A, V(z)), shared=[g1, d])
        window = [V(kk), V(c)] + [V(x) for x in ks[1:p - 1]]
        body = LetT(V(a), [b] + ks + [l], LetT(Ap(Cst(DUP), V(ks[0])), [c, d], Tensor(
            [lib.boolean(True)] + window[:p] + [Ap(cond, V(l))])))
        return BangI(lam([(kk, K), (a, acc)], body))

    def base_tt(self, y):
        return ParaI(Tensor([self.lib.boolean(False)] + [Cst(STAR)] * self.p + [V(y)]))

    @property
    def c2cw(self):
        n, p = self.n, self.p

        def build():
            c = fresh("c")

            def body(A, g, x, x2):
                g1, y, y2, r = fresh("g"), fresh("y"), fresh("y"), fresh("r")
                a1, a2, q, b1, b2, l1, l2, h, s = (fresh(t) for t in
                                                   ("a", "a", "q", "b", "b", "l", "l", "h", "s"))
                k1, k2 = names("u", p), names("v", p)
                it = ap(Inst(V(c), Acc(p, A)), self.step_tt(A, g1), self.base_tt(y), self.base_tt(y2))
                out = Tensor([V(l1)] + [V(t) for t in k1] + [V(h)] + [V(t) for t in k2[1:]]
                             + [V(s), V(l2), V(q)])
                inner = LetT(V(r), [a1, a2, q], LetT(V(a1), [b1] + k1 + [l1], LetT(
                    V(a2), [b2] + k2 + [l2], LetT(Ap(Cst(DUP), V(k2[0])), [h, s], out))))
                return LetB(V(g), g1, LetP(V(x), y, LetP(V(x2), y2, LetP(it, r, ParaI(inner)))))

            return Lam(c, C(n), self._config_abs(CW(n, p), body))

        return self.lib.use(("c2cw", n, p), build)

    # -- actions

    def action_tt(self, q: str, A, g1):
        """``W(a) -o (a * a * Q)``: the transition of state q on a windowed payload."""
        m, p = self.m, self.p
        w, l1, l2, s = fresh("w"), fresh("l"), fresh("l"), fresh("s")
        k1, k2 = names("u", p), names("v", p)
        push = lambda k, l: ap(V(g1), k, l)
        left_back = push(V(k1[0]), V(l1))
        spec = m.spec(q)
        if spec is None:
            out = [left_back, push(V(k2[0]), V(l2)), self.state(q)]
        elif spec.kind == "computation":
            value = ap(Cst(op(spec.op)), *map(V, k2))
            out = [left_back, push(value, V(l2)), self.state(spec.next)]
        elif spec.kind == "branch":
            test = ap(Cst(rho(spec.rel)), *map(V, k2))
            nxt = ap(Inst(test, Q(self.n)), self.state(spec.next_true), self.state(spec.next_false))
            out = [left_back, push(V(s), V(l2)), nxt]
        elif spec.direction == "left":
            out = [V(l1), push(V(k1[0]), push(V(k2[0]), V(l2))), self.state(spec.next)]
        else:
            out = [push(V(k2[0]), left_back), V(l2), self.state(spec.next)]
        return Lam(w, W(p, A), LetT(V(w), [l1] + k1 + k2 + [s, l2], Tensor(out)))

    def next_conf_tt(self, A, g1):
        """``Lam q:Q. (q) t_0 ... t_{n-1}`` at payload type W(a)."""
        q = fresh("q")
        result = TensorT([A, A, Q(self.n)])
        actions = [self.action_tt(s, A, g1) for s in self.m.state_ids]
        return Lam(q, Q(self.n), ap(Inst(Inst(V(q), W(self.p, A)), result), *actions))

    @property
    def c2c(self):
        n, p = self.n, self.p

        def build():
            c = fresh("c")

            def body(A, g, x, x2):
                g1, w, q, s, l1, l2 = (fresh(t) for t in ("g", "w", "q", "s", "l", "l"))
                k1, k2 = names("u", p), names("v", p)
                cw = ap(Inst(Ap(self.c2cw, V(c)), A), BangI(V(g1)), V(x), V(x2))
                fields = [l1] + k1 + k2 + [s, l2]
                inner = LetT(V(w), fields + [q], Ap(Ap(self.next_conf_tt(A, g1), V(q)),
                                                    Tensor([V(t) for t in fields])))
                return LetB(V(g), g1, LetP(cw, w, ParaI(inner)))

            return Lam(c, C(n), self._config_abs(C(n), body))

        return self.lib.use(("c2c", self.m), build)

    # -- plumbing

    @property
    def init(self):
        def build():
            l = fresh("l")

            def body(A, g, x, x2):
                g1, y, y2, h = fresh("g"), fresh("y"), fresh("y"), fresh("h")
                conf = Tensor([V(y), Ap(V(h), V(y2)), self.state(self.m.initial)])
                return LetB(V(g), g1, LetP(V(x), y, LetP(V(x2), y2, LetP(
                    Ap(Inst(V(l), A), BangI(V(g1))), h, ParaI(conf)))))

            return Lam(l, LIST, self._config_abs(C(self.n), body))

        return self.lib.use(("init", self.n, self.m.index(self.m.initial)), build)

    @property
    def extract(self):
        n = self.n

        def build():
            c, f, g, w, a, b, q = (fresh(t) for t in ("c", "f", "g", "w", "a", "b", "q"))
            k, r, z = fresh("k"), fresh("r"), fresh("z")
            al = fresh_tvar("a")
            A = TVar(al)
            E = F.Lolli(A, A)
            step = BangI(lam([(k, K), (r, E), (z, A)], ap(V(g), V(k), Ap(V(r), V(z)))))

            def ident():
                zz = fresh("z")
                return ParaI(Lam(zz, A, V(zz)))

            it = ap(Inst(V(c), E), step, ident(), ident())
            body = LetB(V(f), g, LetP(it, w, ParaI(LetT(V(w), [a, b, q], V(b)))))
            return Lam(c, C(n), Gen(al, Lam(f, F.Bang(_endo_k(A)), body), LIST))

        return self.lib.use(("extract", n), build)

    def tp(self, coeffs):
        return build_tP(self.lib, coeffs)

    def compile(self, coeffs=None) -> CompiledMachine:
        coeffs = list(self.m.polynomial if coeffs is None else coeffs)
        lib = self.lib
        tp, k = self.tp(coeffs)
        l, z, l1, n1 = fresh("l"), fresh("z"), fresh("l"), fresh("n")

        def levels(num, num_type, lst):
            # num : num_type (N under some paragraphs), lst : List(K), both plain
            if isinstance(num_type, F.Para):
                m1, l2 = fresh("m"), fresh("l")
                return LetP(num, m1, LetP(Ap(lib.coerce_list, lst), l2,
                                          ParaI(levels(V(m1), num_type.a, V(l2)))))
            h, l2 = fresh("h"), fresh("l")
            run = Ap(self.extract, Ap(V(h), Ap(self.init, V(l2))))
            return LetP(Ap(Inst(num, C(self.n)), BangI(self.c2c)), h,
                        LetP(Ap(lib.coerce_list, lst), l2, ParaI(run)))

        body = LetT(V(z), [l1, n1], levels(Ap(tp, V(n1)), F.paras(k, NAT), V(l1)))
        u = Lam(l, LIST, LetP(Ap(lib.ilength, V(l)), z, ParaI(body)))
        try:
            deriv = lib.derive(("compiled", self.m, tuple(coeffs)), lambda: u)
        except ElabError as exc:
            raise CompilationError(f"compiled term does not type: {exc}") from exc
        d = k + 2
        if not deriv.conclusion.formula == expected_formula(d):
            raise CompilationError(f"unexpected type {deriv.conclusion.formula}")
        term = deriv.conclusion.term
        problems = well_formed(term, self.m.structure)
        if problems or term.fv:
            raise CompilationError("compiled term is not closed and well formed: " + "; ".join(problems))
        A = TVar(fresh_tvar("a"))
        g1 = fresh("g")
        return CompiledMachine(
            term=term,
            state_terms={q: self.state(q).deriv.conclusion.term for q in self.m.state_ids},
            action_terms={q: to_term(self.action_tt(q, A, g1)) for q in self.m.state_ids},
            c2cw=self.c2cw.deriv.conclusion.term,
            c2c=self.c2c.deriv.conclusion.term,
            tP=tp.deriv.conclusion.term,
            k=k,
            d=d,
            derivation=deriv,
            parts={
                "c2cw": self.c2cw.deriv, "c2c": self.c2c.deriv, "tP": tp.deriv,
                "init": self.init.deriv, "extract": self.extract.deriv,
                "Ilength": lib.ilength.deriv, "length": lib.length.deriv,
            },
        )


# ---------------------------------------------------------------------------
# polynomial clocks


def build_tP(lib: Library, coeffs):
    """``(t_P, k)`` with ``t_P : N -o $^k N`` computing ``P(n) = sum c_i n^i``.

    The argument is copied once per factor needed, each monomial is
    multiplied out one factor every two levels (``bangN`` then ``mul``),
    coefficients of non-linear monomials cost one more ``mul``, and the
    finished monomials are carried down with ``coeN`` and summed.
    """
    coeffs = list(coeffs)
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    if any(c < 0 for c in coeffs):
        raise CompilationError("polynomial coefficients must be non-negative")
    key = ("tP", tuple(coeffs))
    n = fresh("n")
    if len(coeffs) == 1 or all(c == 0 for c in coeffs[1:]):
        return lib.use(key, lambda: Lam(n, NAT, lib.nat(coeffs[0]))), 0
    if coeffs == [0, 1]:
        return lib.use(key, lambda: Lam(n, NAT, V(n))), 0

    items = []  # [factor count, coefficient]
    for i, c in enumerate(coeffs):
        if i == 0 or c == 0:
            continue
        if i == 1:
            items += [[1, 1] for _ in range(c)]
        else:
            items.append([i, c])
    length = lambda it: 2 * (it[0] - 1) + (1 if it[1] > 1 else 0)
    transitions = max(length(it) for it in items)
    copies = sum(it[0] for it in items)

    def build():
        xs = names("x", copies)
        states, pos = [], 0
        for f, c in items:
            states.append({"acc": xs[pos], "pend": xs[pos + 1: pos + f], "bang": None, "coef": c})
            pos += f

        def level(remaining):
            if remaining == 0:
                total = [V(s["acc"]) for s in states]
                if coeffs[0]:
                    total.append(lib.nat(coeffs[0]))
                expr = total[-1]
                for t in reversed(total[:-1]):
                    expr = ap(lib.add, t, expr)
                return expr
            binds = []
            for s in states:
                new = fresh("x")
                if s["bang"] is not None:
                    binds.append((ap(lib.mul, V(s["acc"]), V(s["bang"])), new))
                    s["bang"] = None
                elif s["pend"]:
                    f = s["pend"].pop(0)
                    b = fresh("b")
                    binds.append((Ap(lib.bang_nat, V(f)), b))
                    binds.append((Ap(lib.coe_nat, V(s["acc"])), new))
                    s["bang"] = b
                elif s["coef"] > 1:
                    binds.append((ap(lib.mul, V(s["acc"]), BangI(lib.nat(s["coef"]))), new))
                    s["coef"] = 1
                else:
                    binds.append((Ap(lib.coe_nat, V(s["acc"])), new))
                s["acc"] = new
                carried = []
                for f in s["pend"]:
                    nf = fresh("x")
                    binds.append((Ap(lib.coe_nat, V(f)), nf))
                    carried.append(nf)
                s["pend"] = carried
            body = ParaI(level(remaining - 1))
            for expr, name in reversed(binds):
                body = LetP(expr, name, body)
            return body

        if copies == 1:
            first = LetP(Ap(lib.coe_nat, V(n)), xs[0], ParaI(level(transitions)))
        else:
            t = fresh("t")
            first = LetP(Ap(lib.dup_nat(copies), V(n)), t, ParaI(LetT(V(t), xs, level(transitions))))
        return Lam(n, NAT, first)

    return lib.use(key, build), transitions + 1


def compile_machine(m: Machine, coeffs=None, lib: Library | None = None) -> CompiledMachine:
    cm = MachineCompiler(m, lib).compile(coeffs)
    try:
        check_derivation(cm.derivation, m.p)
    except Exception as exc:
        raise CompilationError(f"derivation rejected: {exc}") from exc
    return cm


def encode_state(m: Machine, q: str, lib: Library | None = None) -> Term:
    return MachineCompiler(m, lib).state(q).deriv.conclusion.term


def compile_action(m: Machine, q: str) -> Term:
    """The action of q as an open term (free iterator variable ``g``)."""
    return to_term(MachineCompiler(m).action_tt(q, TVar(fresh_tvar("a")), "g"))


def build_c2cw(m: Machine, lib: Library | None = None) -> Term:
    return MachineCompiler(m, lib).c2cw.deriv.conclusion.term


def build_c2c(m: Machine, lib: Library | None = None) -> Term:
    return MachineCompiler(m, lib).c2c.deriv.conclusion.term


def build_next_conf(m: Machine) -> Term:
    return to_term(MachineCompiler(m).next_conf_tt(TVar(fresh_tvar("a")), "g"))


def build_data_plumbing(m: Machine, lib: Library | None = None) -> dict:
    mc = MachineCompiler(m, lib)
    return {
        "length": mc.lib.length.deriv.conclusion.term,
        "init": mc.init.deriv.conclusion.term,
        "extract": mc.extract.deriv.conclusion.term,
        "Ilength": mc.lib.ilength.deriv.conclusion.term,
    }


def run_compiled(term: Term, w, structure, fuel=None):
    """Apply a compiled term to the list ``w`` under standard reduction.

    Returns the decoded output without trailing blanks and the trace.
    """
    from .encodings import decode_klist, mk_klist
    from .reduction import normalize_standard
    from .terms import App

    nf, trace = normalize_standard(App(term, mk_klist(w)), structure, fuel=fuel)
    out = decode_klist(nf, structure)
    while out and out[-1] is BLANK:
        out.pop()
    return out, trace


def dup_sites(t: Term) -> list[tuple]:
    return [path for path, s in positions(t) if getattr(s, "kind", None) == "dup"]


def library_derivations(m: Machine | None = None) -> dict[str, Derivation]:
    """Closed derivations of the combinators the compiler relies on.

    Machine-specific entries (``c2cw``, ``c2c``, ``init``, ``extract``) are
    built for ``m``, by default the GF(2) all-ones recognizer.
    """
    if m is None:
        from .zoo import all_ones

        m = all_ones()
    mc = MachineCompiler(m)
    lib = mc.lib
    out = {
        "true": lib.boolean(True).deriv,
        "false": lib.boolean(False).deriv,
        "fold": lib.fold.deriv,
        "succ": lib.succ.deriv,
        "add": lib.add.deriv,
        "mul": lib.mul.deriv,
        "length": lib.length.deriv,
        "Ilength": lib.ilength.deriv,
        "coerceList": lib.coerce_list.deriv,
        "c2cw": mc.c2cw.deriv,
        "c2c": mc.c2c.deriv,
        "init": mc.init.deriv,
        "extract": mc.extract.deriv,
        "tP[n]": build_tP(lib, [0, 1])[0].deriv,
        "tP[2n+2]": build_tP(lib, [2, 2])[0].deriv,
        "tP[n^2]": build_tP(lib, [0, 0, 1])[0].deriv,
    }
    for n in (0, 1, 2, 3):
        out[f"nat[{n}]"] = lib.nat(n).deriv
    return out
