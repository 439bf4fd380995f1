"""BSS machines over a uniform structure and their simulator.

The head reads a window of the first ``p`` cells of the positive tape
(padded with blanks), computations overwrite the head cell, branches leave
the tape untouched and shifts move one cell between the two half-tapes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

from .structure import (
    BLANK,
    Structure,
    StructureError,
    apply_op,
    apply_rel,
    format_element,
    parse_literal,
    structure_by_name,
)


class MachineError(ValueError):
    pass


class BlankInInput(MachineError):
    pass


@dataclass(frozen=True)
class StateSpec:
    id: str
    kind: str  # "computation", "branch" or "shift"
    op: int | None = None
    rel: int | None = None
    next: str | None = None
    next_true: str | None = None
    next_false: str | None = None
    direction: str | None = None  # "left" or "right"

    def successors(self) -> list[str]:
        if self.kind == "branch":
            return [self.next_true, self.next_false]
        return [self.next]


@dataclass(frozen=True)
class Machine:
    structure: Structure
    states: tuple[StateSpec, ...]
    initial: str
    accept: str
    reject: str
    polynomial: tuple[int, ...] = (0, 1)
    name: str = "machine"
    constants: tuple = ()

    @property
    def p(self) -> int:
        return self.structure.p

    @property
    def state_ids(self) -> list[str]:
        """Q' in a fixed order: declared states, then accept, then reject."""
        return [s.id for s in self.states] + [self.accept, self.reject]

    def index(self, q: str) -> int:
        return self.state_ids.index(q)

    def spec(self, q: str) -> StateSpec | None:
        for s in self.states:
            if s.id == q:
                return s
        return None

    def is_final(self, q: str) -> bool:
        return q in (self.accept, self.reject)

    def bound(self, n: int) -> int:
        return poly_eval(self.polynomial, n)


def poly_eval(coeffs: Sequence[int], n: int) -> int:
    return sum(c * n ** i for i, c in enumerate(coeffs))


def validate_machine(m: Machine) -> list[str]:
    """Structural problems of ``m`` (empty when the machine is valid)."""
    problems = []
    ids = [s.id for s in m.states]
    if len(set(ids)) != len(ids):
        problems.append("duplicate state ids")
    if m.accept == m.reject:
        problems.append("accept and reject states coincide")
    for final in (m.accept, m.reject):
        if final in ids:
            problems.append(f"final state {final} must not have a specification")
    known = set(ids) | {m.accept, m.reject}
    if m.initial not in ids:
        problems.append(f"initial state {m.initial} is not a declared state")
    if not m.structure.uniform:
        problems.append("structure is not uniform")
    for s in m.states:
        if s.kind not in ("computation", "branch", "shift"):
            problems.append(f"{s.id}: unknown kind {s.kind!r}")
            continue
        for nxt in s.successors():
            if nxt not in known:
                problems.append(f"{s.id}: successor {nxt!r} is undefined")
        if s.kind == "computation" and not (s.op is not None and 0 <= s.op < len(m.structure.operations)):
            problems.append(f"{s.id}: operation index {s.op} out of range")
        if s.kind == "branch" and not (s.rel is not None and 0 <= s.rel < len(m.structure.relations)):
            problems.append(f"{s.id}: relation index {s.rel} out of range")
        if s.kind == "shift" and s.direction not in ("left", "right"):
            problems.append(f"{s.id}: shift direction must be left or right")
    if any(c < 0 or int(c) != c for c in m.polynomial):
        problems.append("polynomial coefficients must be non-negative integers")
    return problems


# ---------------------------------------------------------------------------
# configurations


def _trim(cells) -> tuple:
    cells = list(cells)
    while cells and cells[-1] is BLANK:
        cells.pop()
    return tuple(cells)


@dataclass(frozen=True)
class Configuration:
    neg: tuple
    pos: tuple
    state: str

    def __post_init__(self):
        object.__setattr__(self, "neg", _trim(self.neg))
        object.__setattr__(self, "pos", _trim(self.pos))

    def window(self, p: int) -> list:
        cells = list(self.pos[:p])
        return cells + [BLANK] * (p - len(cells))

    def __str__(self):
        show = lambda cs: "[" + ", ".join(map(format_element, cs)) + "]"
        return f"<{show(self.neg)}, {show(self.pos)}, {self.state}>"


@dataclass(frozen=True)
class Halted:
    config: Configuration


def initial_config(m: Machine, w: Sequence) -> Configuration:
    w = tuple(w)
    if not w:
        raise BlankInInput("empty input is not allowed")
    if any(a is BLANK for a in w):
        raise BlankInInput("inputs may not contain blank cells")
    return Configuration((), w, m.initial)


def step_machine(m: Machine, c: Configuration):
    if m.is_final(c.state):
        return Halted(c)
    s = m.spec(c.state)
    if s is None:
        raise MachineError(f"undefined state {c.state}")
    if s.kind == "computation":
        value = apply_op(m.structure, s.op, c.window(m.p))
        rest = c.pos[1:]
        return Configuration(c.neg, (value,) + rest, s.next)
    if s.kind == "branch":
        taken = apply_rel(m.structure, s.rel, c.window(m.p))
        return Configuration(c.neg, c.pos, s.next_true if taken else s.next_false)
    if s.direction == "left":
        head = c.neg[0] if c.neg else BLANK
        return Configuration(c.neg[1:], (head,) + c.pos, s.next)
    head = c.pos[0] if c.pos else BLANK
    return Configuration((head,) + c.neg, c.pos[1:], s.next)


@dataclass(frozen=True)
class Accepted:
    output: tuple
    steps: int
    config: Configuration


@dataclass(frozen=True)
class Rejected:
    output: tuple
    steps: int
    config: Configuration


@dataclass(frozen=True)
class Timeout:
    steps: int
    config: Configuration


class MachineFault(MachineError):
    def __init__(self, step: int, cause: Exception):
        self.step = step
        self.cause = cause
        super().__init__(f"step {step}: {cause}")


def run(m: Machine, w: Sequence, max_steps: int = 10_000):
    c = initial_config(m, w)
    for i in range(max_steps + 1):
        if c.state == m.accept:
            return Accepted(c.pos, i, c)
        if c.state == m.reject:
            return Rejected(c.pos, i, c)
        if i == max_steps:
            break
        try:
            c = step_machine(m, c)
        except StructureError as exc:
            raise MachineFault(i, exc) from exc
    return Timeout(max_steps, c)


def trace(m: Machine, c: Configuration, steps: int) -> list[Configuration]:
    """``c`` followed by up to ``steps`` successors (stops at final states)."""
    out = [c]
    for _ in range(steps):
        nxt = step_machine(m, out[-1])
        if isinstance(nxt, Halted):
            out.append(nxt.config)
        else:
            out.append(nxt)
    return out


@dataclass
class BoundCheck:
    rows: list = field(default_factory=list)  # (input, steps or None, bound, ok)

    @property
    def ok(self) -> bool:
        return all(r[3] for r in self.rows)


def step_count_bound_check(m: Machine, coeffs: Sequence[int], inputs) -> BoundCheck:
    report = BoundCheck()
    for w in inputs:
        bound = poly_eval(coeffs, len(w))
        out = run(m, w, max_steps=bound)
        halted = not isinstance(out, Timeout)
        report.rows.append((tuple(w), out.steps if halted else None, bound, halted))
    return report


# ---------------------------------------------------------------------------
# file format


def _index(name_or_index, table, what):
    if isinstance(name_or_index, int):
        return name_or_index
    for i, o in enumerate(table):
        if o.name == name_or_index:
            return i
    raise MachineError(f"unknown {what} {name_or_index!r}")


def machine_from_dict(data: dict) -> Machine:
    constants = tuple(parse_literal(str(c)) for c in data.get("constants", ()))
    s = structure_by_name(data["structure"], constants)
    states = []
    for st in data["states"]:
        kind = st["kind"]
        states.append(StateSpec(
            id=st["id"], kind=kind,
            op=_index(st["op"], s.operations, "operation") if kind == "computation" else None,
            rel=_index(st["rel"], s.relations, "relation") if kind == "branch" else None,
            next=st.get("next"), next_true=st.get("next_true"), next_false=st.get("next_false"),
            direction=st.get("direction"),
        ))
    return Machine(s, tuple(states), data["initial"], data["accept"], data["reject"],
                   tuple(data.get("polynomial", (0, 1))), data.get("name", "machine"), constants)


def machine_to_dict(m: Machine) -> dict:
    states = []
    for s in m.states:
        d = {"id": s.id, "kind": s.kind}
        if s.kind == "computation":
            d.update(op=m.structure.operations[s.op].name, next=s.next)
        elif s.kind == "branch":
            d.update(rel=m.structure.relations[s.rel].name, next_true=s.next_true, next_false=s.next_false)
        else:
            d.update(direction=s.direction, next=s.next)
        states.append(d)
    return {
        "name": m.name,
        "structure": m.structure.name,
        "constants": [format_element(c) for c in m.constants],
        "states": states,
        "initial": m.initial,
        "accept": m.accept,
        "reject": m.reject,
        "polynomial": list(m.polynomial),
    }


def load_machine(path) -> Machine:
    with open(path) as fh:
        return machine_from_dict(json.load(fh))


def dump_machine(m: Machine, path) -> None:
    with open(path, "w") as fh:
        json.dump(machine_to_dict(m), fh, indent=2)
        fh.write("\n")


def parse_input(text: str, structure: Structure) -> list:
    """Comma or space separated literals, e.g. ``1,0,1`` or ``1/2 3``."""
    parts = [t for t in text.replace(",", " ").split() if t]
    return [parse_literal(t, structure.carrier) for t in parts]
