import pytest
from hypothesis import given, settings, strategies as st

from corpus import Gen as CorpusGen, S, corpus
from lak import formulas as F
from lak.compiler import library_derivations
from lak.derivation import (
    Derivation,
    Entry,
    Judgment,
    RuleMismatch,
    SideConditionViolated,
    check_derivation,
    constant_type,
    dump_derivation,
    load_derivation,
)
from lak.elaborate import elaborate, to_term
from lak.formulas import BOOL, KAPPA, NAT, erase_formula, parse_formula, show_formula
from lak.reduction import find_redexes, normalize_standard, step
from lak.terms import DUP, Abs, App, Bang, Var, alpha_eq, well_formed
from strategies import formulas
from tt_reduce import Stepper, inline

A = F.TVar("a")


def idd(x, f):
    return Derivation("Id", (), Judgment({x: Entry(f)}, Var(x), f), {"x": x})


def test_identity_axiom_is_accepted():
    j = check_derivation(idd("x", A), 2)
    assert j.formula == A


def test_contraction_needs_a_bang_discharged_hypothesis():
    # x : A, y : A |- (x) y : B  contracted without discharge
    prem = Derivation("-ol", (idd("y", A), idd("w", F.TVar("b"))),
                      Judgment({"y": Entry(A), "x": Entry(F.Lolli(A, F.TVar("b")))},
                               App(Var("x"), Var("y")), F.TVar("b")), {"x": "w", "y": "x"})
    check_derivation(prem, 2)
    bad = Derivation("Cntr", (prem,), Judgment({"z": Entry(A)}, App(Var("z"), Var("z")), F.TVar("b")),
                     {"x": "x", "y": "y", "z": "z"})
    with pytest.raises(RuleMismatch) as info:
        check_derivation(bad, 2)
    assert info.value.node is bad
    assert isinstance(info.value, SideConditionViolated)


def test_dup_axiom():
    d = Derivation("dup", (), Judgment({}, DUP, F.Lolli(KAPPA, F.TensorT([KAPPA, KAPPA]))))
    assert check_derivation(d, 2).formula == parse_formula("K -o K * K")
    assert constant_type(DUP, 2) == parse_formula("K -o K * K")


def test_bang_right_boxes_a_closed_term():
    inner = Derivation("-or", (idd("x", A),), Judgment({}, Abs("x", Var("x")), F.Lolli(A, A)), {"x": "x"})
    ok = Derivation("!r", (inner,), Judgment({}, Bang(Abs("x", Var("x"))), F.Bang(F.Lolli(A, A))))
    assert check_derivation(ok, 2).formula == parse_formula("!(a -o a)")


def test_bang_right_rejects_two_hypotheses():
    f = F.Lolli(A, A)
    app = Derivation("-ol", (idd("y", A), idd("w", A)),
                     Judgment({"y": Entry(A), "x": Entry(f)}, App(Var("x"), Var("y")), A), {"x": "w", "y": "x"})
    bad = Derivation("!r", (app,), Judgment({"y": Entry(A, "!"), "x": Entry(f, "!")},
                                            Bang(App(Var("x"), Var("y"))), F.Bang(A)))
    with pytest.raises(SideConditionViolated):
        check_derivation(bad, 2)


def test_universal_right_side_condition():
    d = Derivation("Ar", (idd("x", A),), Judgment({"x": Entry(A)}, Var("x"), F.Forall("a", A)), {"var": "a"})
    with pytest.raises(SideConditionViolated):
        check_derivation(d, 2)


def test_erase_formula_examples():
    assert erase_formula(F.Bang(A)) == erase_formula(A) == A
    assert erase_formula(NAT) == parse_formula("forall a. (a -> a) -> a -> a")
    assert erase_formula(KAPPA) == KAPPA


# -- library


@pytest.fixture(scope="module")
def library():
    return library_derivations()


def test_library_entries_check(library):
    for name, d in library.items():
        j = check_derivation(d, 2)
        assert not j.context, name
        assert well_formed(j.term) == [], name


def test_library_conclusions(library):
    want = {
        "true": "Bool",
        "false": "Bool",
        "fold": "!(K -o B -o B) -o $B -o List(K) -o $B",
        "c2c": "C<10> -o C<10>",
        "c2cw": "C<10> -o CW<10,2>",
        "add": "N -o N -o N",
        "mul": "N -o !N -o $N",
        "length": "List(K) -o $N",
        "Ilength": "List(K) -o $(List(K) * N)",
        "tP[n]": "N -o N",
        "tP[2n+2]": "N -o $N",
        "tP[n^2]": "N -o $$$N",
    }
    for name, text in want.items():
        assert library[name].conclusion.formula == parse_formula(text), name


def test_derivation_text_round_trip(library):
    for name in ("fold", "c2c", "tP[n^2]"):
        d = library[name]
        back = load_derivation(dump_derivation(d, name), "gf2")
        assert back.count() == d.count()
        assert check_derivation(back, 2).formula == d.conclusion.formula


def test_corrupted_derivation_is_rejected(library):
    text = dump_derivation(library["add"]).replace("N -o N -o N", "N -o N", 1)
    with pytest.raises(RuleMismatch):
        check_derivation(load_derivation(text, "gf2"), 2)


# -- formulas


@given(formulas)
def test_formula_show_parse_round_trip(f):
    assert parse_formula(show_formula(f)) == f


@given(formulas)
def test_alias_expansion_removes_aliases(f):
    e = f.expand()
    stack = [e]
    while stack:
        g = stack.pop()
        assert not isinstance(g, F.Alias)
        stack.extend(getattr(g, n) for n in ("a", "b", "body") if hasattr(g, n))
    assert e.expand() == e


# -- corpus derivations and subject reduction


def test_generated_corpus_derivations_check():
    for e, d in corpus(120, seed=7):
        j = check_derivation(d, S.p)
        assert well_formed(j.term, S) == []


def _follows(redex, reduct, rules):
    t = to_term(redex)
    for kind in rules:
        found = find_redexes(t, S, frozenset({kind}))
        if not found:
            return False
        t = step(t, found[0], S)
    return alpha_eq(t, to_term(reduct))


@settings(max_examples=15)
@given(st.integers(0, 10_000))
def test_subject_reduction(seed):
    g = CorpusGen(seed)
    e = g.entry(g.rng.randint(1, 4))
    tt = inline(e.tt)
    formula = elaborate(tt, S.p).conclusion.formula
    stepper = Stepper(S, g.lib)
    while (r := stepper.step(tt)) is not None:
        tt, redex, reduct, rules = r
        d = elaborate(tt, S.p)
        check_derivation(d, S.p)
        assert d.conclusion.formula == formula
        assert _follows(redex, reduct, rules)
    nf, _ = normalize_standard(to_term(inline(e.tt)), S)
    assert alpha_eq(to_term(tt), nf)
