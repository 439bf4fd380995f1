from fractions import Fraction as Fr
from itertools import product

import pytest
from hypothesis import given, strategies as st

from lak.structure import (
    BLANK,
    BlankArgument,
    IndexOutOfRange,
    Operation,
    Structure,
    apply_op,
    apply_rel,
    builtin_gf2,
    builtin_rationals,
    format_element,
    parse_literal,
    structure_by_name,
    uniformize,
)

rationals = st.fractions(max_denominator=50).filter(lambda q: abs(q) < 1000)


def test_gf2_is_uniform_with_arity_two():
    s = builtin_gf2()
    assert s.p == 2 and s.uniform


def test_gf2_constants_ignore_their_arguments():
    s = builtin_gf2()
    for a, b in product((0, 1, BLANK), repeat=2):
        assert apply_op(s, s.op_index("zero"), [a, b]) == 0
        assert apply_op(s, s.op_index("one"), [a, b]) == 1


def test_single_unary_op_stays_unary():
    s = Structure("neg", "rationals", (Operation("neg", 1, lambda a: -a),), ())
    u = uniformize(s)
    assert u.p == 1
    assert apply_op(u, 0, [Fr(2)]) == Fr(-2)


def test_negation_padded_to_arity_two_ignores_second_argument():
    s = builtin_rationals()
    neg = s.op_index("neg")
    for n, d, m in product(range(-3, 4), range(1, 4), range(-3, 4)):
        assert apply_op(s, neg, [Fr(n, d), Fr(m)]) == -Fr(n, d)
    assert apply_op(s, neg, [Fr(3, 4), BLANK]) == Fr(-3, 4)


def test_uniformized_gf2_agrees_with_the_original_operations():
    raw = {"or": lambda a, b: a | b, "and": lambda a, b: a & b, "zero": lambda: 0, "one": lambda: 1}
    s = builtin_gf2()
    for name, fn in raw.items():
        i = s.op_index(name)
        k = fn.__code__.co_argcount
        for args in product((0, 1), repeat=2):
            assert apply_op(s, i, list(args)) == fn(*args[:k])


def test_basic_evaluations():
    g, q = builtin_gf2(), builtin_rationals()
    assert apply_op(g, g.op_index("and"), [1, 0]) == 0
    assert apply_op(g, g.op_index("or"), [0, 0]) == 0
    assert apply_op(q, q.op_index("+"), [Fr(1, 2), Fr(1, 3)]) == Fr(5, 6)
    assert apply_rel(g, g.rel_index("="), [1, 1]) is True
    assert apply_rel(q, q.rel_index("<="), [Fr(1, 3), Fr(1, 2)]) is True
    assert apply_rel(q, q.rel_index("="), [Fr(2, 4), Fr(1, 2)]) is True


def test_equality_is_relation_zero():
    assert builtin_rationals().relations[0].name == "="
    assert builtin_gf2().relations[0].name == "="


def test_blank_in_a_used_position_is_trapped():
    q = builtin_rationals()
    with pytest.raises(BlankArgument):
        apply_op(q, q.op_index("+"), [BLANK, Fr(1)])
    with pytest.raises(BlankArgument):
        apply_rel(q, q.rel_index("<="), [Fr(1), BLANK])


def test_blank_tests_accept_blanks():
    q = builtin_rationals()
    eq, isb = q.rel_index("="), q.rel_index("isblank")
    assert apply_rel(q, eq, [BLANK, BLANK])
    assert not apply_rel(q, eq, [BLANK, Fr(0)])
    assert apply_rel(q, isb, [BLANK, Fr(0)])
    assert not apply_rel(q, isb, [Fr(0), BLANK])


def test_bad_index():
    with pytest.raises(IndexOutOfRange):
        apply_op(builtin_gf2(), 17, [0, 0])
    with pytest.raises(IndexOutOfRange):
        apply_rel(builtin_gf2(), -1, [0, 0])


def test_extra_constants_and_lookup_by_name():
    q = structure_by_name("rationals", [Fr(1, 2)])
    assert apply_op(q, q.op_index("c1/2"), [BLANK, BLANK]) == Fr(1, 2)
    with pytest.raises(Exception):
        structure_by_name("reals")


@pytest.mark.parametrize("text,value", [("1/2", Fr(1, 2)), ("-3", Fr(-3)), ("2/4", Fr(1, 2)), ("-1/3", Fr(-1, 3))])
def test_rational_literals(text, value):
    assert parse_literal(text) == value


def test_blank_literal_round_trip():
    assert parse_literal("_") is BLANK
    assert format_element(BLANK) == "_"


@given(rationals)
def test_literal_round_trip(q):
    assert parse_literal(format_element(q)) == q


@given(rationals, rationals)
def test_rational_arithmetic_is_exact(a, b):
    s = builtin_rationals()
    plus, minus = s.op_index("+"), s.op_index("-")
    assert apply_op(s, minus, [apply_op(s, plus, [a, b]), b]) == a


@given(rationals, rationals, rationals)
def test_equality_is_an_equivalence(a, b, c):
    s = builtin_rationals()
    eq = lambda x, y: apply_rel(s, 0, [x, y])
    assert eq(a, a)
    assert eq(a, b) == eq(b, a)
    if eq(a, b) and eq(b, c):
        assert eq(a, c)


@given(rationals)
def test_rationals_are_in_lowest_terms(q):
    from math import gcd

    assert q.denominator > 0 and gcd(q.numerator, q.denominator) == 1
