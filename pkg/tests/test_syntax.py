import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ccspdl.errors import DefinitionError, DialectError, ParseError
from ccspdl.gen import random_formula, random_process
from ccspdl.syntax import (END, TAU, Action, And, Atom, Box, Choice, Diamond,
                           End, Neg, Or, Par, Prefix, PrefixConst, Prop,
                           Restrict, free_names, parse_environment,
                           parse_formula, parse_process, show_formula,
                           show_process)

a, b, c = Action.inp("a"), Action.inp("b"), Action.inp("c")


def test_parse_sccs_choice():
    assert parse_process("a.b + c", "sccs") == Choice(Prefix(a, Atom(b)), Atom(c))


def test_parse_xccs_restriction():
    P = parse_process("(a.END | b.END)\\{a}", "xccs")
    assert P == Restrict(Par(Prefix(a, End()), Prefix(b, End())), frozenset({"a"}))


def test_prefix_chain_ends_in_constant(vending):
    P = parse_process("1e.little.~collect.A", "ccs", vending)
    assert P == Prefix(Action.inp("1e"), Prefix(Action.inp("little"),
                                                 PrefixConst(Action.out("collect"), "A")))


def test_actions():
    assert Action.inp("a").complement() == Action.out("a")
    assert TAU.complement() == TAU
    assert str(Action.out("x")) == "~x"
    assert not END.is_visible


def test_recursive_classification():
    env = parse_environment("def A = a.A + tau")
    cls = env.classification()["A"]
    assert cls.kind == "recursive"
    assert cls.loops == ((a,),)
    assert cls.tail == Atom(TAU)


def test_nonrecursive_classification():
    env = parse_environment("def A = b.c")
    assert env.classification()["A"].kind == "nonrecursive"


def test_self_replication_rejected():
    with pytest.raises(DefinitionError):
        parse_environment("def Q = b\ndef A = ((tau.A) + tau) | Q")


def test_mutual_recursion_rejected():
    with pytest.raises(DefinitionError):
        parse_environment("def A = a.B + tau\ndef B = b.A")


def test_undefined_constant():
    with pytest.raises((DefinitionError, ParseError)):
        parse_environment("def A = a.B")


def test_free_names():
    assert free_names(parse_process("a.~b.END")) == {"a", "b"}
    assert free_names(parse_process("tau.END")) == set()


def test_vending_names(vending):
    V = parse_process("V", "ccs", vending)
    assert free_names(V) == {"1e", "2e", "little", "big", "collect"}


def test_printer():
    assert show_process(Choice(Atom(a), Atom(b))) == "a + b"
    assert show_formula(Diamond(Prefix(a, Atom(b)), Prop("p"))) == "<a.b>p"
    r = Restrict(Par(Prefix(a, End()), Prefix(b, End())), frozenset({"a"}))
    assert show_process(r) == "(a.END | b.END)\\{a}"


def test_formula_syntax():
    f = parse_formula("<a | ~a>p | q", "ccs")
    assert f == Or(Diamond(Par(Atom(a), Atom(Action.out("a"))), Prop("p")), Prop("q"))
    assert parse_formula("[a.END]p & !q") == And(Box(Prefix(a, End()), Prop("p")), Neg(Prop("q")))
    assert parse_formula("<a>p") == Diamond(a, Prop("p"))


def test_parse_errors_carry_position():
    with pytest.raises(ParseError) as e:
        parse_process("a.(b + ", "sccs")
    assert e.value.pos is not None


def test_dialect_errors():
    with pytest.raises((DialectError, ParseError)):
        parse_process("a.END ; b.END", "ccs")
    with pytest.raises((DialectError, ParseError)):
        parse_process("a.b", "xccs")
    with pytest.raises((DialectError, ParseError)):
        parse_process("a.END*", "sccs")


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10 ** 9), st.sampled_from(["sccs", "ccs", "xccs"]))
def test_process_round_trip(seed, dialect):
    P = random_process(random.Random(seed), dialect, depth=4)
    assert parse_process(show_process(P), dialect) == P


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10 ** 9), st.sampled_from(["sccs", "ccs", "xccs"]))
def test_formula_round_trip(seed, dialect):
    f = random_formula(random.Random(seed), dialect, depth=3)
    assert parse_formula(show_formula(f), dialect) == f
