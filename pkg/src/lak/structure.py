"""Algebraic structures over which terms and machines compute.

Carrier elements are plain Python values: ``Fraction`` for the rationals,
``int`` (0 or 1) for GF(2).  The blank cell is the singleton :data:`BLANK`.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Sequence


class _Blank:
    __slots__ = ()

    def __repr__(self) -> str:
        return "BLANK"

    def __reduce__(self):
        return "BLANK"


BLANK = _Blank()


class StructureError(Exception):
    pass


class BlankArgument(StructureError):
    """A blank cell reached a used argument position of an operation."""


class IndexOutOfRange(StructureError):
    pass


@dataclass(frozen=True)
class Operation:
    name: str
    arity: int
    fn: Callable = field(compare=False)
    # positions actually read; equals arity until the structure is uniformized
    used: int = -1
    blank_ok: bool = False

    def __post_init__(self):
        if self.used < 0:
            object.__setattr__(self, "used", self.arity)


# relations share the shape of operations, the evaluator returns a bool
Relation = Operation


@dataclass(frozen=True)
class Structure:
    name: str
    carrier: str
    operations: tuple[Operation, ...]
    relations: tuple[Relation, ...]

    @property
    def p(self) -> int:
        arities = [o.arity for o in self.operations] + [r.arity for r in self.relations]
        return max([1] + arities)

    @property
    def uniform(self) -> bool:
        p = self.p
        return all(o.arity == p for o in self.operations + self.relations)

    def op_index(self, name: str) -> int:
        for i, o in enumerate(self.operations):
            if o.name == name:
                return i
        raise IndexOutOfRange(f"no operation named {name!r} in {self.name}")

    def rel_index(self, name: str) -> int:
        for i, r in enumerate(self.relations):
            if r.name == name:
                return i
        raise IndexOutOfRange(f"no relation named {name!r} in {self.name}")

    def parse_element(self, text: str):
        return parse_literal(text, self.carrier)


def uniformize(s: Structure) -> Structure:
    """Lift every operation and relation of ``s`` to the maximal arity p."""
    p = s.p
    return replace(
        s,
        operations=tuple(replace(o, arity=p) for o in s.operations),
        relations=tuple(replace(r, arity=p) for r in s.relations),
    )


def _evaluate(kind: str, table: Sequence[Operation], i: int, args: Sequence):
    if not 0 <= i < len(table):
        raise IndexOutOfRange(f"{kind} index {i} out of range (have {len(table)})")
    o = table[i]
    if len(args) != o.arity:
        raise StructureError(f"{kind} {o.name} expects {o.arity} arguments, got {len(args)}")
    used = list(args[: o.used])
    if not o.blank_ok and any(a is BLANK for a in used):
        raise BlankArgument(f"{kind} {o.name} applied to a blank in a used position: {used}")
    return o.fn(*used)


def apply_op(s: Structure, i: int, args: Sequence):
    return _evaluate("operation", s.operations, i, args)


def apply_rel(s: Structure, i: int, args: Sequence) -> bool:
    return bool(_evaluate("relation", s.relations, i, args))


def _equal(a, b) -> bool:
    if a is BLANK or b is BLANK:
        return a is b
    return a == b


def _const(c):
    return lambda: c


def builtin_gf2() -> Structure:
    """({0,1}, or, and, 0, 1, =) lifted to arity 2, plus a blank test."""
    ops = (
        Operation("or", 2, lambda a, b: a | b),
        Operation("and", 2, lambda a, b: a & b),
        Operation("zero", 0, _const(0)),
        Operation("one", 0, _const(1)),
    )
    rels = (
        Relation("=", 2, _equal, blank_ok=True),
        Relation("isblank", 1, lambda a: a is BLANK, blank_ok=True),
    )
    return uniformize(Structure("gf2", "gf2", ops, rels))


def builtin_rationals(constants: Sequence = ()) -> Structure:
    """(Q, +, -, *, neg, constants, =, <=) lifted to arity 2, plus a blank test.

    The constants 0 and 1 are always present; ``constants`` adds more.
    """
    consts = [Fraction(0), Fraction(1)]
    for c in constants:
        c = Fraction(c)
        if c not in consts:
            consts.append(c)
    ops = [
        Operation("+", 2, lambda a, b: a + b),
        Operation("-", 2, lambda a, b: a - b),
        Operation("*", 2, lambda a, b: a * b),
        Operation("neg", 1, lambda a: -a),
    ]
    ops += [Operation(f"c{format_element(c)}", 0, _const(c)) for c in consts]
    rels = (
        Relation("=", 2, _equal, blank_ok=True),
        Relation("<=", 2, lambda a, b: a <= b),
        Relation("isblank", 1, lambda a: a is BLANK, blank_ok=True),
    )
    return uniformize(Structure("rationals", "rationals", tuple(ops), rels))


def structure_by_name(name: str, constants: Sequence = ()) -> Structure:
    if name == "gf2":
        if constants:
            raise StructureError("gf2 takes no extra constants")
        return builtin_gf2()
    if name == "rationals":
        return builtin_rationals(constants)
    raise StructureError(f"unknown structure {name!r}")


def parse_literal(text: str, carrier: str = "rationals"):
    text = text.strip()
    if text == "_":
        return BLANK
    if carrier == "gf2":
        if text not in ("0", "1"):
            raise ValueError(f"not a GF(2) element: {text!r}")
        return int(text)
    num, _, den = text.partition("/")
    try:
        return Fraction(int(num), int(den) if den else 1)
    except ValueError:
        raise ValueError(f"not a rational literal: {text!r}") from None


def format_element(k) -> str:
    if k is BLANK:
        return "_"
    if isinstance(k, Fraction) and k.denominator != 1:
        return f"{k.numerator}/{k.denominator}"
    return str(int(k))
