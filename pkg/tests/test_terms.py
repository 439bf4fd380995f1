from fractions import Fraction as Fr

import pytest
from hypothesis import given, strategies as st

from lak.encodings import (
    DecodeError,
    decode_bool,
    decode_klist,
    decode_nat,
    mk_bool,
    mk_fold,
    mk_klist,
    mk_let_tensor,
    mk_nat,
    mk_tensor,
)
from lak.reduction import normalize_untyped
from lak.structure import builtin_rationals
from lak.syntax import ParseError, parse_term, show
from lak.terms import (
    DUP,
    Abs,
    App,
    Bang,
    Const,
    LetBang,
    Para,
    Var,
    alpha_eq,
    apps,
    depth,
    depth_of,
    erase,
    is_untyped,
    k,
    measure,
    op,
    positions,
    size,
    substitute,
    sym,
    well_formed,
)
from strategies import pseudo_terms

Q = builtin_rationals()


# -- substitution


def test_substitute_under_binder():
    assert alpha_eq(substitute(Abs("y", Var("x")), "x", k(Fr(1))), Abs("y", k(Fr(1))))


def test_substitute_by_box():
    assert alpha_eq(substitute(Var("x"), "x", Bang(Var("y"))), Bang(Var("y")))


def test_substitution_avoids_capture():
    t = substitute(Abs("u", App(Var("u"), Var("x"))), "x", Var("u"))
    assert isinstance(t, Abs) and t.var != "u"
    assert alpha_eq(t, Abs("w", App(Var("w"), Var("u"))))
    assert t.fv == {"u"}


@given(pseudo_terms, pseudo_terms)
def test_substitution_free_variables(t, u):
    s = substitute(t, "x", u)
    expected = (t.fv - {"x"}) | (u.fv if "x" in t.fv else set())
    assert s.fv == expected


@given(pseudo_terms)
def test_substitution_of_a_fresh_variable_is_identity(t):
    assert alpha_eq(substitute(t, "absent", k(Fr(3))), t)


# -- erasure


def test_erase_boxes():
    assert alpha_eq(erase(Bang(Abs("x", Var("x")))), Abs("x", Var("x")))


def test_erase_let():
    t = parse_term("let !y be !x in (x) x")
    assert alpha_eq(erase(t), App(Var("y"), Var("y")))


def test_erase_constant():
    assert erase(DUP) is DUP or alpha_eq(erase(DUP), DUP)


@given(pseudo_terms)
def test_erasure_is_untyped_and_idempotent(t):
    e = erase(t)
    assert is_untyped(e)
    assert alpha_eq(erase(e), e)


# -- depth, measure and size


def test_depths():
    assert depth(Abs("x", Var("x"))) == 0
    t = Bang(Para(Var("x")))
    assert depth(t) == 2
    assert depth_of(t, (0, 0)) == 2


@given(pseudo_terms)
def test_positions_inside_a_bang_are_deeper(t):
    b = Bang(t)
    for path, _ in positions(t):
        assert depth_of(b, (0,) + tuple(path)) >= 1


def test_measure_table():
    assert measure(DUP) == 5
    assert measure(Abs("x", Var("x"))) == 2
    assert measure(App(DUP, k(Fr(1)))) == 7
    assert size(App(DUP, k(Fr(1)))) == 3
    assert measure(op(0)) == 2
    assert measure(parse_term("rho0")) == 4
    assert measure(parse_term("let y be !x in x")) == 3


@given(pseudo_terms)
def test_size_is_positive_and_below_measure(t):
    assert 0 < size(t) <= measure(t)


# -- well-formedness


def test_well_formed_examples():
    assert well_formed(parse_term("!(\\x. (y) x)")) == []
    assert well_formed(parse_term("!((y) z)"))
    assert well_formed(parse_term("\\x. (x) x"))
    assert well_formed(parse_term("let y be !x in (x) x")) == []


@given(pseudo_terms)
def test_substituting_closed_terms_keeps_well_formedness(t):
    if well_formed(t):
        return
    closed = Abs("v", Var("v"))
    for x in list(t.fv):
        assert well_formed(substitute(t, x, closed)) == []


# -- syntax


@given(pseudo_terms)
def test_show_parse_round_trip(t):
    assert alpha_eq(parse_term(show(t)), t)


def test_parse_errors():
    for bad in ["(x", "\\. x", "let x be y in z", "#"]:
        with pytest.raises(ParseError):
            parse_term(bad)


# -- encodings


def test_zero_erases_to_identity_iterator():
    assert alpha_eq(erase(mk_nat(0)), parse_term("\\f. \\x. x"))


def test_true_selects_first_argument():
    a, b = sym("a"), sym("b")
    assert normalize_untyped(apps(erase(mk_bool(True)), a, b)) == a
    assert normalize_untyped(apps(erase(mk_bool(False)), a, b)) == b


def test_tensor_let_reduces_to_substitution():
    t = mk_let_tensor(mk_tensor([sym("u"), sym("v")]), ["x", "y"], App(Var("x"), Var("y")))
    assert alpha_eq(normalize_untyped(t), App(sym("u"), sym("v")))


def test_fold_sums_a_list():
    plus = Abs("a", Abs("b", apps(op(Q.op_index("+")), Var("a"), Var("b"))))
    t = App(mk_fold(Bang(plus), Para(k(Fr(10)))), mk_klist([Fr(1, 2), Fr(3)]))
    nf = normalize_untyped(erase(t), Q)
    assert isinstance(nf, Const) and nf.element == Fr(27, 2)


def test_decoders_on_examples():
    assert decode_klist(erase(mk_klist([Fr(1, 2), Fr(3)]))) == [Fr(1, 2), Fr(3)]
    assert decode_nat(erase(mk_nat(5))) == 5
    with pytest.raises(DecodeError):
        decode_bool(mk_nat(2))


@given(st.booleans())
def test_bool_round_trip(b):
    assert decode_bool(mk_bool(b)) is b


@given(st.integers(0, 32))
def test_nat_round_trip(n):
    assert decode_nat(mk_nat(n)) == n


@given(st.lists(st.fractions(max_denominator=20), max_size=16))
def test_list_round_trip(values):
    assert decode_klist(mk_klist(values)) == values


def test_builders_produce_fresh_binders():
    a, b = mk_nat(2), mk_nat(2)
    assert alpha_eq(a, b) and a.var != b.var
