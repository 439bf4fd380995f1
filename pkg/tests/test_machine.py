import json
from fractions import Fraction as Fr
from itertools import product

import pytest
from hypothesis import given, strategies as st

from lak.machine import (
    Accepted,
    BlankInInput,
    Configuration,
    Halted,
    Machine,
    MachineFault,
    Rejected,
    StateSpec,
    Timeout,
    dump_machine,
    initial_config,
    load_machine,
    machine_from_dict,
    machine_to_dict,
    parse_input,
    run,
    step_count_bound_check,
    step_machine,
    validate_machine,
)
from lak.structure import BLANK, builtin_gf2, builtin_rationals
from lak.zoo import REFERENCE, all_ones, parity, running_sum, shift_accept

G, Q = builtin_gf2(), builtin_rationals()
cells = st.one_of(st.sampled_from([0, 1]), st.just(BLANK))
tapes = st.lists(cells, max_size=6)


def one_state(structure, spec):
    return Machine(structure, (spec,), "q", "acc", "rej")


def test_initial_configuration():
    m = all_ones()
    assert initial_config(m, [1, 0, 1]) == Configuration((), (1, 0, 1), m.initial)
    assert initial_config(running_sum(), [Fr(1, 2)]).pos == (Fr(1, 2),)
    with pytest.raises(BlankInInput):
        initial_config(m, [])
    with pytest.raises(BlankInInput):
        initial_config(m, [1, BLANK])


def test_computation_writes_the_head():
    m = one_state(G, StateSpec("q", "computation", op=G.op_index("and"), next="acc"))
    assert step_machine(m, Configuration((), (1, 1), "q")) == Configuration((), (1, 1), "acc")
    assert step_machine(m, Configuration((), (1, 0), "q")) == Configuration((), (0, 0), "acc")


def test_shift_round_trip():
    right = one_state(G, StateSpec("q", "shift", direction="right", next="acc"))
    left = one_state(G, StateSpec("q", "shift", direction="left", next="acc"))
    c = step_machine(right, Configuration((), (1, 0), "q"))
    assert (c.neg, c.pos) == ((1,), (0,))
    back = step_machine(left, Configuration(c.neg, c.pos, "q"))
    assert (back.neg, back.pos) == ((), (1, 0))


def test_branch_on_equality_over_rationals():
    m = one_state(Q, StateSpec("q", "branch", rel=Q.rel_index("="), next_true="acc", next_false="rej"))
    c = step_machine(m, Configuration((), (Fr(2, 4), Fr(1, 2), Fr(7)), "q"))
    assert c.state == "acc" and c.pos == (Fr(1, 2), Fr(1, 2), Fr(7))


def test_final_states_halt():
    m = shift_accept()
    c = Configuration((), (1,), "acc")
    assert step_machine(m, c) == Halted(c)


def test_shift_accept_run():
    out = run(shift_accept(), [1])
    assert isinstance(out, Accepted) and out.output == () and out.steps == 1


def test_all_ones_recognizer():
    m = all_ones()
    yes, no = run(m, [1, 1, 1]), run(m, [1, 0, 1])
    assert isinstance(yes, Accepted) and yes.output == (1,)
    assert isinstance(no, Rejected) and no.output[0] == 0


def test_zero_steps_times_out():
    assert isinstance(run(all_ones(), [1], max_steps=0), Timeout)


def test_blank_in_a_used_position_faults_with_the_step():
    m = Machine(Q, (StateSpec("a", "shift", direction="right", next="b"),
                    StateSpec("b", "computation", op=Q.op_index("+"), next="acc")), "a", "acc", "rej")
    with pytest.raises(MachineFault) as info:
        run(m, [Fr(1)])
    assert info.value.step == 1


def test_validation_reports_problems():
    bad = Machine(G, (StateSpec("q", "shift", direction="right", next="nowhere"),), "q", "acc", "rej")
    assert any("nowhere" in p for p in validate_machine(bad))
    for make in REFERENCE.values():
        assert validate_machine(make()) == []


def test_declared_bounds_hold_on_all_short_inputs():
    for make in (all_ones, parity):
        m = make()
        inputs = [list(w) for n in range(1, 6) for w in product((0, 1), repeat=n)]
        report = step_count_bound_check(m, m.polynomial, inputs)
        assert report.ok
    # the all-ones bound is attained by the input 1^n
    assert run(all_ones(), [1] * 5).steps == all_ones().bound(5)
    # parity always takes 6n - 3 steps
    assert {run(parity(), list(w)).steps for w in product((0, 1), repeat=4)} == {21}


def test_all_ones_needs_a_linear_bound_with_offset():
    m = all_ones()
    inputs = [list(w) for n in range(1, 6) for w in product((0, 1), repeat=n)]
    assert step_count_bound_check(m, (6, 2), inputs).ok
    assert not step_count_bound_check(m, (2, 2), inputs).ok
    assert not step_count_bound_check(m, (1,), inputs).ok


def test_reference_outputs():
    assert run(parity(), [1, 0, 1, 1]).output == (1,)
    assert run(running_sum(), [Fr(1, 2), Fr(1, 3)]).output == (Fr(5, 6), Fr(1, 3))


def test_machine_file_round_trip(tmp_path):
    for make in REFERENCE.values():
        m = make()
        path = tmp_path / f"{m.name}.json"
        dump_machine(m, path)
        assert load_machine(path) == m
        data = json.loads(path.read_text())
        assert set(data) >= {"structure", "states", "initial", "accept", "reject", "polynomial"}


def test_machine_file_accepts_indices_and_constants():
    m = machine_from_dict({
        "structure": "rationals", "constants": ["1/2"],
        "states": [{"id": "q", "kind": "computation", "op": 4, "next": "acc"}],
        "initial": "q", "accept": "acc", "reject": "rej", "polynomial": [1],
    })
    assert m.structure.operations[4].name == "c0"
    assert machine_to_dict(m)["states"][0]["op"] == "c0"


def test_parse_input():
    assert parse_input("1/2, -3 0", Q) == [Fr(1, 2), Fr(-3), Fr(0)]
    assert parse_input("1 0 1", G) == [1, 0, 1]


@given(tapes, tapes)
def test_blank_trimming_is_canonical(neg, pos):
    c = Configuration(tuple(neg), tuple(pos), "q")
    assert Configuration(tuple(neg) + (BLANK, BLANK), tuple(pos) + (BLANK,), "q") == c
    assert not c.neg or c.neg[-1] is not BLANK


@given(tapes, tapes)
def test_shift_left_then_right_is_identity(neg, pos):
    left = one_state(G, StateSpec("q", "shift", direction="left", next="q"))
    right = one_state(G, StateSpec("q", "shift", direction="right", next="q"))
    c = Configuration(tuple(neg), tuple(pos), "q")
    if c.neg:
        assert step_machine(right, step_machine(left, c)) == c
    if c.pos:
        assert step_machine(left, step_machine(right, c)) == c


@given(st.lists(st.sampled_from([0, 1]), min_size=1, max_size=8))
def test_runs_are_deterministic(w):
    for make in (all_ones, parity):
        assert run(make(), w) == run(make(), w)
