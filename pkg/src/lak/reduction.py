"""Reduction rules, the stratified standard strategy and measure bounds.

Redexes are located by paths (child indices, see :meth:`Term.children`).
Search is leftmost-outermost; subterms already found to be free of
redexes are remembered so that each step only re-inspects the spine that
changed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .encodings import mk_bool
from .structure import apply_op, apply_rel
from .syntax import mk_tensor
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
    big_stack,
    fresh,
    rebuild,
    rename_free,
    replace_at,
    spine,
    subterm,
    substitute,
    depth_of,
)

KINDS = ("Beta", "BangLet", "ParaLet", "Com2", "Com1", "Dup", "Op", "Rho", "Lift")
NON_BANG = frozenset(KINDS) - {"BangLet"}
COM = frozenset({"Com2", "Com1"})


class InvalidRedex(ValueError):
    pass


class FuelExhausted(RuntimeError):
    def __init__(self, trace, message="fuel exhausted"):
        self.trace = trace
        super().__init__(f"{message} after {len(trace.steps) if trace else '?'} steps")


@dataclass(frozen=True)
class Redex:
    path: tuple
    kind: str
    depth: int


@dataclass
class Round:
    depth: int
    phase: str  # "non-bang" or "bang"
    start: int  # index of first step
    end: int  # one past the last step
    measure_start: int
    measure_end: int


@dataclass
class ReductionTrace:
    initial: Term
    steps: list = field(default_factory=list)  # (Redex, measure_after)
    rounds: list = field(default_factory=list)

    @property
    def initial_measure(self) -> int:
        return self.initial.measure

    @property
    def final_measure(self) -> int:
        return self.steps[-1][1] if self.steps else self.initial.measure

    def count(self, kind: str) -> int:
        return sum(1 for r, _ in self.steps if r.kind == kind)

    def records(self):
        for i, (r, m) in enumerate(self.steps):
            yield {"step": i, "depth": r.depth, "rule": r.kind, "measure_after": m}


def step_bound(t: Term) -> int:
    """``<t> ^ (2 ^ (d + 1))`` for the depth d of ``t``."""
    return t.measure ** (2 ** (t.maxdepth + 1))


# ---------------------------------------------------------------------------
# redexes


def _is_value(t: Term) -> bool:
    return isinstance(t, Const) and t.is_value


def redex_kind(t: Term, structure=None) -> str | None:
    """Kind of the redex rooted at ``t``, if any."""
    if isinstance(t, App):
        f = t.fun
        if isinstance(f, Abs):
            return "Beta"
        if isinstance(f, Let):
            return "Com2"
        if isinstance(f, Const):
            if f.kind == "dup" and _is_value(t.arg):
                return "Dup"
            if f.kind == "lift" and _is_value(t.arg):
                return "Lift"
        if structure is not None and _is_value(t.arg):
            head, args = spine(t)
            if (isinstance(head, Const) and head.kind in ("op", "rho")
                    and len(args) == structure.p and all(map(_is_value, args))):
                return "Op" if head.kind == "op" else "Rho"
        return None
    if isinstance(t, Let):
        s = t.scrut
        if isinstance(s, Let):
            return "Com1"
        if isinstance(t, LetBang) and isinstance(s, Bang):
            return "BangLet"
        if isinstance(t, LetPara) and isinstance(s, Para):
            return "ParaLet"
    return None


def contract(t: Term, kind: str, structure=None, erased: bool = False) -> Term:
    """Contract the redex ``t``; with ``erased`` the Lift rule drops the box."""
    if redex_kind(t, structure) != kind:
        raise InvalidRedex(f"not a {kind} redex: {t}")
    if kind == "Beta":
        return substitute(t.fun.body, t.fun.var, t.arg)
    if kind in ("BangLet", "ParaLet"):
        return substitute(t.body, t.var, t.scrut.body)
    if kind == "Com2":
        inner, v = t.fun, t.arg
        var, body = inner.var, inner.body
        if var in v.fv:
            nv = fresh(var)
            body, var = rename_free(body, var, nv), nv
        return type(inner)(inner.scrut, var, App(body, v))
    if kind == "Com1":
        inner = t.scrut
        var, body = inner.var, inner.body
        if var in t.body.fv - {t.var}:
            nv = fresh(var)
            body, var = rename_free(body, var, nv), nv
        return type(inner)(inner.scrut, var, type(t)(body, t.var, t.body))
    if kind == "Dup":
        return mk_tensor([t.arg, t.arg])
    if kind == "Lift":
        return t.arg if erased else Para(t.arg)
    head, args = spine(t)
    values = [a.element for a in args]
    if kind == "Op":
        return Const("k", apply_op(structure, head.arg, values))
    return mk_bool(apply_rel(structure, head.arg, values))


def find_redexes(t: Term, structure=None, kinds=None) -> list[Redex]:
    """Every redex of ``t`` in leftmost-outermost (preorder) order."""
    out = []

    def go(s, path, d):
        kind = redex_kind(s, structure)
        if kind and (kinds is None or kind in kinds):
            out.append(Redex(tuple(path), kind, d))
        inc = 1 if isinstance(s, Box) else 0
        for i, c in enumerate(s.children()):
            path.append(i)
            go(c, path, d + inc)
            path.pop()

    big_stack(go)(t, [], 0)
    return out


def step(t: Term, r: Redex, structure=None) -> Term:
    try:
        s = subterm(t, r.path)
    except (IndexError, AttributeError):
        raise InvalidRedex(f"no subterm at {r.path}") from None
    if depth_of(t, r.path) != r.depth:
        raise InvalidRedex(f"redex depth {r.depth} does not match its position")
    return replace_at(t, r.path, contract(s, r.kind, structure))


# ---------------------------------------------------------------------------
# leftmost-outermost search restricted to one depth and a set of kinds


class _Searcher:
    def __init__(self, structure, kinds, depth):
        self.structure = structure
        self.kinds = kinds
        self.depth = depth  # None: every depth
        self.clean = {}  # (id, depth) -> node known to contain no wanted redex

    def find(self, t: Term):
        path = []
        return (path[::-1], self._kind) if self._go(t, 0, path) else None

    def _go(self, s, d, path) -> bool:
        j = self.depth
        if j is not None and (d > j or d + s.maxdepth < j):
            return False
        key = (id(s), d)
        if key in self.clean:
            return False
        if j is None or d == j:
            kind = redex_kind(s, self.structure)
            if kind is not None and kind in self.kinds:
                self._kind = kind
                return True
        inc = 1 if isinstance(s, Box) else 0
        for i, c in enumerate(s.children()):
            if self._go(c, d + inc, path):
                path.append(i)
                return True
        self.clean[key] = s
        return False


class _Run:
    def __init__(self, t, structure, fuel, record, erased=False):
        self.t = t
        self.erased = erased
        self.structure = structure
        self.fuel = fuel
        self.record = record
        self.trace = ReductionTrace(t)
        self.measure = t.measure
        self.nsteps = 0

    def exhaust(self, kinds, depth):
        searcher = _Searcher(self.structure, kinds, depth)
        while True:
            hit = searcher.find(self.t)
            if hit is None:
                return
            path, kind = hit
            if self.fuel is not None and self.nsteps >= self.fuel:
                raise FuelExhausted(self.trace)
            old = subterm(self.t, path)
            new = contract(old, kind, self.structure, self.erased)
            self.t = replace_at(self.t, path, new)
            self.measure += new.measure - old.measure
            self.nsteps += 1
            if self.record:
                d = depth if depth is not None else depth_of(self.t, path)
                self.trace.steps.append((Redex(tuple(path), kind, d), self.measure))


@big_stack
def normalize_standard(t: Term, structure=None, fuel=None, record=True):
    """Stratified standard reduction; returns ``(normal form, trace)``.

    For each depth j in turn, all non-(!) redexes at depth j are reduced,
    then all (!) redexes at depth j; the pair is repeated until depth j is
    free of redexes.  ``fuel`` defaults to :func:`step_bound`.
    """
    run = _Run(t, structure, step_bound(t) if fuel is None else fuel, record)
    j = 0
    while j <= run.t.maxdepth:
        while True:
            progressed = False
            for phase, kinds in (("non-bang", NON_BANG), ("bang", frozenset({"BangLet"}))):
                start, m0 = len(run.trace.steps), run.measure
                n0 = run.nsteps
                run.exhaust(kinds, j)
                if run.nsteps > n0:
                    progressed = True
                run.trace.rounds.append(Round(j, phase, start, len(run.trace.steps), m0, run.measure))
            if not progressed or not find_redexes_at(run.t, structure, j):
                break
        j += 1
    return run.t, run.trace


def find_redexes_at(t: Term, structure, depth: int) -> bool:
    return _Searcher(structure, frozenset(KINDS), depth).find(t) is not None


UNTYPED = frozenset({"Beta", "Dup", "Op", "Rho", "Lift"})


@big_stack
def normalize_untyped(t: Term, structure=None, fuel=None) -> Term:
    """Leftmost-outermost normalization with beta and the constant rules."""
    run = _Run(t, structure, fuel, record=False, erased=True)
    run.exhaust(UNTYPED, None)
    return run.t


@big_stack
def reduce_untyped(t: Term, structure=None, fuel=None):
    """Like :func:`normalize_untyped` but returns ``(normal form, trace)``."""
    run = _Run(t, structure, fuel, record=True, erased=True)
    run.exhaust(UNTYPED, None)
    return run.t, run.trace


@big_stack
def normalize_innermost(t: Term, structure=None, fuel=None) -> Term:
    """Naive leftmost-innermost normalization with every rule."""
    budget = [fuel]

    def spend():
        if budget[0] is not None:
            if budget[0] <= 0:
                raise FuelExhausted(None)
            budget[0] -= 1

    def norm(s):
        kids = [norm(c) for c in s.children()]
        s = rebuild(s, kids)
        kind = redex_kind(s, structure)
        if kind is None:
            return s
        spend()
        return norm(contract(s, kind, structure))

    return norm(t)


# ---------------------------------------------------------------------------
# bounds


@dataclass
class BoundReport:
    steps: int
    bound: int
    violations: list
    endpoint_ok: bool

    @property
    def ok(self) -> bool:
        return not self.violations


def check_bounds(trace: ReductionTrace) -> BoundReport:
    """Check the step bound, the measure lemma and per-round squaring."""
    t0 = trace.initial
    bound = step_bound(t0)
    problems = []
    if len(trace.steps) > bound:
        problems.append(f"{len(trace.steps)} steps exceed the bound {bound}")
    before = t0.measure
    for i, (r, after) in enumerate(trace.steps):
        if r.kind in COM and after != before:
            problems.append(f"step {i} ({r.kind}) changed the measure {before} -> {after}")
        elif r.kind not in COM and r.kind != "BangLet" and not after < before:
            problems.append(f"step {i} ({r.kind}) did not decrease the measure {before} -> {after}")
        before = after
    rounds = trace.rounds
    for a, b in zip(rounds[::2], rounds[1::2]):
        if b.measure_end > a.measure_start ** 2:
            problems.append(
                f"depth {a.depth}: measure {b.measure_end} exceeds {a.measure_start}^2")
    endpoint_ok = trace.final_measure <= t0.measure ** 2
    return BoundReport(len(trace.steps), bound, problems, endpoint_ok)
