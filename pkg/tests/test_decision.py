import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ccspdl import runs as R
from ccspdl.decision import (atoms_bruteforce, fl_closure, sat, sat_bruteforce,
                             search_small_models, truth_lemma_mismatches,
                             valid)
from ccspdl.errors import BudgetExceeded
from ccspdl.gen import random_formula
from ccspdl.kripke import check, path_relation
from ccspdl.rewrite import knot_decompose
from ccspdl.syntax import (And, Neg, Prop, parse_environment, parse_formula,
                           parse_process)

from .suites import axiom_instances, sat_suite, unsat_suite

p, q = Prop("p"), Prop("q")


def ccs(t, env=None):
    return parse_formula(t, "ccs", env)


def test_closure_of_prefix_program():
    C = fl_closure(ccs("<a.b>p"))
    for t in ["<a.b>p", "<a><b>p", "<b>p", "p"]:
        assert ccs(t) in C.index


def test_closure_of_conjunction():
    C = fl_closure(And(p, q))
    assert set(C.members) == {And(p, q), p, q}


def test_closure_of_choice_program():
    C = fl_closure(ccs("<a.b + c>p"))
    i, pos = C.lit(ccs("<a.b>p | <c>p"))
    assert C.members[i] in C.index
    assert "choice" in C.provenance[C.members[i]]


def test_closure_budget():
    with pytest.raises(BudgetExceeded):
        fl_closure(parse_formula("<(a.END | b.END) | c.END>p"), budget=5)


def test_knot_route_is_used():
    env = parse_environment("def A = a.A + b")
    C = fl_closure(ccs("<A>p", env), env)
    A = parse_process("A", "ccs", env)
    assert C.routes[A] == "knot"


def test_failed_identity_falls_back():
    env = parse_environment("def A = a.b.A + a")
    C = fl_closure(ccs("<A>p", env), env)
    assert C.routes[parse_process("A", "ccs", env)] == "regular"
    assert valid(ccs("<A>p <-> <a>p | <a.b><A>p", env), env)


def test_sat_examples():
    assert not sat(And(p, Neg(p)))
    res = sat(ccs("<a | ~a>p"))
    assert res and check(res.model, res.world, ccs("<a | ~a>p"))
    assert not sat(parse_formula("!(<END>p <-> p)"))
    assert not sat(parse_formula("!(<(a.END)*>p <-> p | <a.END><(a.END)*>p)"))


def test_valid_examples():
    assert valid(ccs("<a.b + c>p <-> <a.b>p | <c>p"))
    assert not valid(parse_formula("<a>p"))
    assert valid(parse_formula("p & [(a.b.END)*](p -> [a.b.END]p) -> [(a.b.END)*]p"))


def test_countermodel_is_real():
    res = sat(Neg(parse_formula("<a>p -> [a]p")))
    assert res
    assert not check(res.model, res.world, parse_formula("<a>p -> [a]p"))


def test_bruteforce_atoms():
    assert sorted(sorted(map(str, A)) for A in atoms_bruteforce(p)) == [[], ["p"]]
    atoms = atoms_bruteforce(And(p, q))
    # every truth assignment to p and q is coherent; one of them contains p & q
    assert len(atoms) == 4
    assert sum(And(p, q) in A for A in atoms) == 1
    with pytest.raises(BudgetExceeded):
        atoms_bruteforce(parse_formula("<(a.END | b.END) ; (a.END)*>p & [b](q -> p)"), closure_limit=4)


@pytest.mark.parametrize("case", sat_suite(), ids=lambda c: c[0])
def test_truth_lemma(case):
    text, f, env = case
    res = sat(f, env)
    assert res
    assert truth_lemma_mismatches(res, env) == []
    assert truth_lemma_mismatches(res, env, full=True) == []


@pytest.mark.parametrize("case", unsat_suite(), ids=lambda c: c[0])
def test_unsat_confirmed_by_search(case):
    text, f, env = case
    assert not sat(f, env)
    assert search_small_models(f, env) is None


@pytest.mark.parametrize("case", axiom_instances(), ids=lambda c: c[0])
def test_axioms_valid(case):
    name, f, env, dialect = case
    assert valid(f, env, dialect=dialect)


def test_knot_paths_factor_through_loops():
    env = parse_environment("def A = a.A + b.c")
    P = parse_process("A", "ccs", env)
    res = sat(ccs("<A>p & !<b.c>p", env), env)
    d = knot_decompose(P, env)
    M = res.model
    direct = path_relation(M, R.runs_of(P, env))
    factored = path_relation(M, d.decomposition_runs(env))
    assert direct <= factored


@settings(max_examples=120, deadline=None)
@given(st.integers(0, 10 ** 9), st.sampled_from(["ccs", "xccs"]))
def test_agrees_with_bruteforce(seed, dialect):
    rng = random.Random(seed)
    f = random_formula(rng, dialect, depth=2, props=("p",), program_depth=1, names=("a",))
    try:
        expected = sat_bruteforce(f, closure_limit=14)
    except BudgetExceeded:
        return
    assert bool(sat(f)) == expected


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_small_model_search_is_consistent(seed):
    rng = random.Random(seed)
    f = random_formula(rng, "xccs", depth=3, props=("p",), program_depth=2, names=("a",))
    try:
        found = search_small_models(f, max_worlds=2, max_bits=16)
    except BudgetExceeded:
        return
    res = sat(f)
    if found is not None:
        M, w = found
        assert check(M, w, f)
        assert res
