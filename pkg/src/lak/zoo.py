"""Hand-built reference machines."""

from __future__ import annotations

from .machine import Machine, StateSpec
from .structure import builtin_gf2, builtin_rationals


def _comp(i, op, nxt):
    return StateSpec(i, "computation", op=op, next=nxt)


def _branch(i, rel, yes, no):
    return StateSpec(i, "branch", rel=rel, next_true=yes, next_false=no)


def _shift(i, direction, nxt):
    return StateSpec(i, "shift", direction=direction, next=nxt)


def all_ones() -> Machine:
    """Recognizes 1*; leaves ``[1]`` on the tape when accepting and a leading 0 when rejecting.

    A 1 is written just left of the input and each cell is compared with
    its right neighbour; the first mismatch is either the end of the input
    (accept) or a 0 (reject).
    """
    s = builtin_gf2()
    eq, blank = s.rel_index("="), s.rel_index("isblank")
    zero, one = s.op_index("zero"), s.op_index("one")
    states = (
        _shift("start", "left", "mark"),
        _comp("mark", one, "cmp"),
        _branch("cmp", eq, "next", "leave"),
        _shift("next", "right", "cmp"),
        _shift("leave", "right", "end"),
        _branch("end", blank, "yes", "no"),
        _comp("yes", one, "acc"),
        _comp("no", zero, "rej"),
    )
    return Machine(s, states, "start", "acc", "rej", (6, 2), "all-ones")


def parity() -> Machine:
    """Overwrites each cell with the parity of the prefix ending there; outputs ``[parity]``."""
    s = builtin_gf2()
    eq, blank = s.rel_index("="), s.rel_index("isblank")
    zero, one = s.op_index("zero"), s.op_index("one")
    states = (
        _shift("P0", "right", "P1"),
        _branch("P1", blank, "Pend", "P2"),
        _shift("P2", "left", "P3"),
        _branch("P3", eq, "P4", "P5"),
        _shift("P4", "right", "W0"),
        _shift("P5", "right", "W1"),
        _comp("W0", zero, "P0"),
        _comp("W1", one, "P0"),
        _shift("Pend", "left", "acc"),
    )
    return Machine(s, states, "P0", "acc", "rej", (0, 6), "parity")


def running_sum() -> Machine:
    """Replaces ``[a1, ..., an]`` by its suffix sums ``[a1 + ... + an, ..., an]``."""
    s = builtin_rationals()
    plus, blank = s.op_index("+"), s.rel_index("isblank")
    states = (
        _branch("R0", blank, "B0", "R1"),
        _shift("R1", "right", "R0"),
        _shift("B0", "left", "L"),
        _shift("L", "left", "C"),
        _branch("C", blank, "D", "A"),
        _comp("A", plus, "L"),
        _shift("D", "right", "acc"),
    )
    return Machine(s, states, "R0", "acc", "rej", (2, 5), "running-sum")


def shift_accept(structure=None) -> Machine:
    """One shift to the right, then accept."""
    s = structure or builtin_gf2()
    return Machine(s, (_shift("q0", "right", "acc"),), "q0", "acc", "rej", (1,), "shift-accept")


def identity(structure=None) -> Machine:
    """Accepts at once through a branch whose outcomes coincide."""
    s = structure or builtin_gf2()
    return Machine(s, (_branch("q0", s.rel_index("isblank"), "acc", "acc"),), "q0", "acc", "rej",
                   (1,), "identity")


REFERENCE = {"all-ones": all_ones, "parity": parity, "running-sum": running_sum}
