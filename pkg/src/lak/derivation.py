"""Explicit typing derivations and a rule-by-rule checker.

A derivation node records its rule, its premises, its conclusion and a few
rule parameters (the variables a rule acts on, the witness of a
universal instantiation).  :func:`check_derivation` recomputes every
conclusion from the premises and refuses the first node that does not
instantiate its rule schema.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from . import formulas as F
from .formulas import Formula, parse_formula, show_formula
from .syntax import parse_term, show
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
    alpha_eq,
    apps,
    big_stack,
    lams,
    spine,
    subst_many,
    substitute,
)


@dataclass(frozen=True)
class Entry:
    formula: Formula
    discharge: str | None = None  # None, "!" or "$"

    def __str__(self):
        f = show_formula(self.formula)
        return f"[{f}]{self.discharge}" if self.discharge else f


@dataclass(frozen=True)
class Judgment:
    context: dict
    term: Term
    formula: Formula

    def __str__(self):
        ctx = "; ".join(f"{x} : {e}" for x, e in sorted(self.context.items()))
        return f"{ctx} |- {show(self.term)} : {show_formula(self.formula)}"


@dataclass(frozen=True)
class Derivation:
    rule: str
    premises: tuple
    conclusion: Judgment
    params: dict = field(default_factory=dict)

    def nodes(self):
        stack = [self]
        while stack:
            d = stack.pop()
            yield d
            stack.extend(d.premises)

    def count(self) -> int:
        return sum(1 for _ in self.nodes())


class RuleMismatch(Exception):
    def __init__(self, node: Derivation, reason: str):
        self.node = node
        self.reason = reason
        super().__init__(f"{node.rule}: {reason}\n  at {node.conclusion}")


class SideConditionViolated(RuleMismatch):
    pass


AXIOMS = ("kappa", "star", "dup", "op", "rho", "lift")
RULES = (
    "Id", "Cut", "Weak", "Cntr", "-ol", "-or", "Al", "Ar",
    "!l", "!r", "$l", "$r", "*l", "*r", "ite",
) + AXIOMS


def constant_type(c: Const, p: int) -> Formula:
    K = F.KAPPA
    if c.kind in ("k", "star"):
        return K
    if c.kind == "dup":
        return F.Lolli(K, F.TensorT([K, K]))
    if c.kind == "op":
        return F.lollis(F.kappas(p), K)
    if c.kind == "rho":
        return F.lollis(F.kappas(p), F.BOOL)
    if c.kind == "lift":
        return F.Lolli(K, F.Para(K))
    raise ValueError(f"constant {c.kind} has no type")


def _axiom_rule(c: Const) -> str:
    return "kappa" if c.kind == "k" else c.kind


# ---------------------------------------------------------------------------
# checking


def _same_entries(a: dict, b: dict) -> bool:
    if a.keys() != b.keys():
        return False
    return all(a[x].discharge == b[x].discharge and a[x].formula == b[x].formula for x in a)


def _disjoint_union(node, *ctxs) -> dict:
    out = {}
    for c in ctxs:
        for x, e in c.items():
            if x in out:
                raise RuleMismatch(node, f"contexts share variable {x}")
            out[x] = e
    return out


def _expect(node, ok: bool, reason: str, side: bool = False):
    if not ok:
        raise (SideConditionViolated if side else RuleMismatch)(node, reason)


def _plain(node, ctx, x) -> Entry:
    _expect(node, x in ctx, f"variable {x} missing from premise context")
    e = ctx[x]
    _expect(node, e.discharge is None, f"{x} must be undischarged", side=True)
    return e


@big_stack
def check_derivation(d: Derivation, p: int) -> Judgment:
    """Validate ``d`` bottom-up and return its conclusion.

    ``p`` is the uniform arity of the active structure (operation types).
    """
    done = set()
    # explicit post-order walk: derivations of compiled machines are deep
    stack = [(d, False)]
    while stack:
        node, expanded = stack.pop()
        if id(node) in done:
            continue
        if not expanded:
            stack.append((node, True))
            stack.extend((q, False) for q in node.premises)
            continue
        _check_node(node, p)
        done.add(id(node))
    return d.conclusion


def _check_node(node: Derivation, p: int):
    rule, prem, c = node.rule, node.premises, node.conclusion
    P = node.params
    _expect(node, rule in RULES, f"unknown rule {rule!r}")
    ctx, t, A = c.context, c.term, c.formula

    def arity(n):
        _expect(node, len(prem) == n, f"expects {n} premises, has {len(prem)}")

    if rule in AXIOMS:
        arity(0)
        _expect(node, isinstance(t, Const) and _axiom_rule(t) == rule, "axiom term mismatch")
        _expect(node, not ctx, "axioms have an empty context")
        if t.kind in ("op", "rho"):
            _expect(node, isinstance(t.arg, int) and t.arg >= 0, "bad constant index")
        _expect(node, A == constant_type(t, p), f"axiom type must be {constant_type(t, p)}")
        return

    if rule == "Id":
        arity(0)
        x = P.get("x")
        _expect(node, isinstance(t, Var) and t.name == x, "Id term must be the variable")
        _expect(node, set(ctx) == {x}, "Id context is exactly x")
        _expect(node, ctx[x].discharge is None, "Id variable is undischarged", side=True)
        _expect(node, ctx[x].formula == A, "Id formula mismatch")
        return

    if rule == "Weak":
        arity(1)
        q = prem[0].conclusion
        _expect(node, set(q.context) <= set(ctx), "Weak may only add hypotheses")
        _expect(node, all(ctx[x] == q.context[x] or _same_entries({x: ctx[x]}, {x: q.context[x]})
                          for x in q.context), "Weak changed an existing hypothesis")
        _expect(node, alpha_eq(t, q.term) and A == q.formula, "Weak changed the judgment")
        return

    if rule == "Cntr":
        arity(1)
        q = prem[0].conclusion
        x, y, z = P["x"], P["y"], P["z"]
        _expect(node, x != y and x in q.context and y in q.context, "Cntr needs two premise hypotheses")
        ex, ey = q.context[x], q.context[y]
        _expect(node, ex.discharge == "!" and ey.discharge == "!",
                "Cntr is only allowed on !-discharged hypotheses", side=True)
        _expect(node, ex.formula == ey.formula, "contracted hypotheses differ")
        rest = {v: e for v, e in q.context.items() if v not in (x, y)}
        _expect(node, z not in rest, f"{z} clashes with the context")
        _expect(node, _same_entries(ctx, {**rest, z: ex}), "Cntr context mismatch")
        _expect(node, alpha_eq(t, subst_many(q.term, {x: Var(z), y: Var(z)})), "Cntr term mismatch")
        _expect(node, A == q.formula, "Cntr formula mismatch")
        return

    if rule == "Cut":
        arity(2)
        left, right = prem[0].conclusion, prem[1].conclusion
        x = P["x"]
        ex = _plain(node, right.context, x)
        _expect(node, ex.formula == left.formula, "cut formula mismatch")
        g2 = {v: e for v, e in right.context.items() if v != x}
        _expect(node, _same_entries(ctx, _disjoint_union(node, left.context, g2)), "Cut context mismatch")
        _expect(node, alpha_eq(t, substitute(right.term, x, left.term)), "Cut term mismatch")
        _expect(node, A == right.formula, "Cut formula mismatch")
        return

    if rule == "-ol":
        arity(2)
        left, right = prem[0].conclusion, prem[1].conclusion
        x, y = P["x"], P["y"]
        ex = _plain(node, right.context, x)
        g2 = {v: e for v, e in right.context.items() if v != x}
        base = _disjoint_union(node, left.context, g2)
        _expect(node, y not in base, f"{y} must be fresh")
        arrow = F.Lolli(left.formula, ex.formula)
        _expect(node, _same_entries(ctx, {**base, y: Entry(arrow)}), "-ol context mismatch")
        _expect(node, alpha_eq(t, substitute(right.term, x, App(Var(y), left.term))), "-ol term mismatch")
        _expect(node, A == right.formula, "-ol formula mismatch")
        return

    if rule == "-or":
        arity(1)
        q = prem[0].conclusion
        x = P["x"]
        ex = _plain(node, q.context, x)
        rest = {v: e for v, e in q.context.items() if v != x}
        _expect(node, _same_entries(ctx, rest), "-or context mismatch")
        _expect(node, alpha_eq(t, Abs(x, q.term)), "-or term mismatch")
        _expect(node, A == F.Lolli(ex.formula, q.formula), "-or formula mismatch")
        return

    if rule == "Al":
        arity(1)
        q = prem[0].conclusion
        x = P["x"]
        witness = P["witness"]
        _plain(node, q.context, x)
        _expect(node, x in ctx and ctx[x].discharge is None, "Al acts on an undischarged hypothesis")
        quant = ctx[x].formula.unfold()
        _expect(node, isinstance(quant, F.Forall), "Al hypothesis must be universal")
        inst = F.subst_type(quant.body, quant.var, witness)
        _expect(node, q.context[x].formula == inst, "Al instance mismatch")
        rest_c = {v: e for v, e in ctx.items() if v != x}
        rest_q = {v: e for v, e in q.context.items() if v != x}
        _expect(node, _same_entries(rest_c, rest_q), "Al context mismatch")
        _expect(node, alpha_eq(t, q.term) and A == q.formula, "Al judgment mismatch")
        return

    if rule == "Ar":
        arity(1)
        q = prem[0].conclusion
        a = P["var"]
        _expect(node, _same_entries(ctx, q.context), "Ar context mismatch")
        _expect(node, alpha_eq(t, q.term), "Ar term mismatch")
        _expect(node, A == F.Forall(a, q.formula), "Ar formula mismatch")
        for v, e in ctx.items():
            _expect(node, a not in e.formula.ftv, f"type variable {a} free in hypothesis {v}", side=True)
        return

    if rule in ("!l", "$l"):
        arity(1)
        q = prem[0].conclusion
        x, y = P["x"], P["y"]
        box, Modal, Let = ("!", F.Bang, LetBang) if rule == "!l" else ("$", F.Para, LetPara)
        _expect(node, x in q.context, f"{x} missing from premise")
        ex = q.context[x]
        _expect(node, ex.discharge == box, f"{x} must be {box}-discharged in the premise", side=True)
        rest = {v: e for v, e in q.context.items() if v != x}
        _expect(node, y not in rest, f"{y} must be fresh")
        _expect(node, _same_entries(ctx, {**rest, y: Entry(Modal(ex.formula))}), f"{rule} context mismatch")
        _expect(node, alpha_eq(t, Let(Var(y), x, q.term)), f"{rule} term mismatch")
        _expect(node, A == q.formula, f"{rule} formula mismatch")
        return

    if rule == "!r":
        arity(1)
        q = prem[0].conclusion
        _expect(node, len(q.context) <= 1, "!r premise has at most one hypothesis", side=True)
        for x, e in q.context.items():
            _expect(node, e.discharge is None, "!r premise hypothesis must be undischarged", side=True)
        want = {x: Entry(e.formula, "!") for x, e in q.context.items()}
        _expect(node, _same_entries(ctx, want), "!r context mismatch")
        _expect(node, alpha_eq(t, Bang(q.term)), "!r term mismatch")
        _expect(node, A == F.Bang(q.formula), "!r formula mismatch")
        return

    if rule == "$r":
        arity(1)
        q = prem[0].conclusion
        _expect(node, ctx.keys() == q.context.keys(), "$r context mismatch")
        for x, e in q.context.items():
            _expect(node, e.discharge is None, "$r premise hypotheses must be undischarged", side=True)
            _expect(node, ctx[x].discharge in ("!", "$"), "$r discharges every hypothesis", side=True)
            _expect(node, ctx[x].formula == e.formula, "$r changed a hypothesis formula")
        _expect(node, alpha_eq(t, Para(q.term)), "$r term mismatch")
        _expect(node, A == F.Para(q.formula), "$r formula mismatch")
        return

    if rule == "*r":
        parts = [q.conclusion for q in prem]
        _expect(node, len(parts) >= 2, "*r needs at least two premises")
        _expect(node, _same_entries(ctx, _disjoint_union(node, *(q.context for q in parts))),
                "*r context mismatch")
        ok = isinstance(t, Abs)
        if ok:
            head, args = spine(t.body)
            ok = (isinstance(head, Var) and head.name == t.var and len(args) == len(parts)
                  and all(t.var not in a.fv and alpha_eq(a, q.term) for a, q in zip(args, parts)))
        _expect(node, ok, "*r term mismatch")
        _expect(node, A == F.TensorT([q.formula for q in parts]), "*r formula mismatch")
        return

    if rule == "*l":
        arity(1)
        q = prem[0].conclusion
        z, names = P["z"], list(P["names"])
        entries = [_plain(node, q.context, x) for x in names]
        rest = {v: e for v, e in q.context.items() if v not in names}
        _expect(node, z not in rest, f"{z} must be fresh")
        tensor = F.TensorT([e.formula for e in entries])
        _expect(node, _same_entries(ctx, {**rest, z: Entry(tensor)}), "*l context mismatch")
        _expect(node, alpha_eq(t, App(Var(z), lams(names, q.term))), "*l term mismatch")
        _expect(node, A == q.formula, "*l formula mismatch")
        return

    if rule == "ite":
        arity(3)
        b, u1, u2 = (q.conclusion for q in prem)
        names = list(P.get("names", ()))
        _expect(node, not b.context, "the boolean of ite is closed")
        _expect(node, b.formula == F.BOOL, "ite condition must be Bool")
        _expect(node, _same_entries(u1.context, u2.context), "ite branches need the same context")
        _expect(node, set(names) == set(u1.context), "ite abstracts exactly the branch context")
        for x in names:
            _plain(node, u1.context, x)
        _expect(node, u1.formula == u2.formula == A, "ite formula mismatch")
        _expect(node, _same_entries(ctx, u1.context), "ite context mismatch")
        want = apps(App(App(b.term, lams(names, u1.term)), lams(names, u2.term)), *map(Var, names))
        _expect(node, alpha_eq(t, want), "ite term mismatch")
        return

    raise RuleMismatch(node, "unhandled rule")


# ---------------------------------------------------------------------------
# text format: one node per line, ``(rule "params" "context" "term" "formula"``
# followed by the premises and a closing parenthesis.


def _ctx_text(ctx: dict) -> str:
    return "; ".join(f"{x} : {e}" for x, e in sorted(ctx.items()))


def _params_json(params: dict) -> str:
    out = {}
    for k, v in params.items():
        out[k] = show_formula(v) if isinstance(v, Formula) else v
    return json.dumps(out, sort_keys=True)


def dump_derivation(d: Derivation, header: str = "") -> str:
    lines = [f"; {header}"] if header else []

    def emit(node, indent):
        q = node.conclusion
        fields = [_params_json(node.params), _ctx_text(q.context), show(q.term), show_formula(q.formula)]
        head = " " * indent + f"({node.rule} " + " ".join(json.dumps(s) for s in fields)
        if not node.premises:
            lines.append(head + ")")
            return
        lines.append(head)
        for prem in node.premises:
            emit(prem, indent + 1)
        lines[-1] += ")"

    big_stack(emit)(d, 0)
    return "\n".join(lines) + "\n"


_SEXP = re.compile(r'\s*(\(|\)|"(?:[^"\\]|\\.)*"|[^\s()"]+)')


class DerivationSyntaxError(ValueError):
    pass


def _parse_entry(text: str) -> tuple[str, Entry]:
    name, _, rest = text.partition(" : ")
    rest = rest.strip()
    m = re.fullmatch(r"\[(.*)\]([!$])", rest)
    if m:
        return name.strip(), Entry(parse_formula(m.group(1)), m.group(2))
    return name.strip(), Entry(parse_formula(rest))


def load_derivation(text: str, carrier: str = "rationals") -> Derivation:
    body = "\n".join(line for line in text.splitlines() if not line.lstrip().startswith(";"))
    toks = _SEXP.findall(body)
    pos = 0

    def node():
        nonlocal pos
        if toks[pos] != "(":
            raise DerivationSyntaxError(f"expected '(' got {toks[pos]!r}")
        rule = toks[pos + 1]
        params_s, ctx_s, term_s, form_s = (json.loads(s) for s in toks[pos + 2: pos + 6])
        pos += 6
        prem = []
        while toks[pos] != ")":
            prem.append(node())
        pos += 1
        params = json.loads(params_s)
        if "witness" in params:
            params["witness"] = parse_formula(params["witness"])
        ctx = dict(_parse_entry(e) for e in ctx_s.split("; ") if e.strip())
        term = parse_term(term_s, carrier)
        return Derivation(rule, tuple(prem), Judgment(ctx, term, parse_formula(form_s)), params)

    try:
        return big_stack(node)()
    except (IndexError, json.JSONDecodeError) as exc:
        raise DerivationSyntaxError(str(exc)) from exc
