"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run on its own with ``pytest tests/test_acceptance.py -v -s`` or
``python -m tests.test_acceptance``.
"""

import random
import time
from collections import deque

import pytest

from ccspdl import runs as R
from ccspdl.decision import (atoms_bruteforce, eliminate_explicit, fl_closure,
                             sat, search_small_models, truth_lemma_mismatches,
                             valid)
from ccspdl.equivalence import bisimilar
from ccspdl.errors import BudgetExceeded
from ccspdl.gen import random_automaton, random_formula, random_process
from ccspdl.kripke import check, random_model, valid_in_model
from ccspdl.lts import TICK, step
from ccspdl.rewrite import eliminate_parallel, expand, knot_decompose
from ccspdl.syntax import (END, TAU, Action, Choice, End, Neg, Par, Prefix,
                           Restrict, Seq, Star, Zero, has_par)

from .oracles import DONE, gfp_bisimilar, interleavings, oracle_step
from .rules import GENERATORS
from .suites import KNOTS, axiom_instances, knot, sat_suite, unsat_suite

TIME_LIMIT = 60.0
DIALECTS = ("sccs", "ccs", "xccs")


@pytest.fixture
def report(capsys):
    start = time.perf_counter()

    def emit(number, title, ok, detail=""):
        elapsed = time.perf_counter() - start
        ok = ok and elapsed <= TIME_LIMIT
        with capsys.disabled():
            print("\n[%s] criterion %2d  %-38s %6.1fs  %s"
                  % ("PASS" if ok else "FAIL", number, title, elapsed, detail))
        assert ok, detail

    return emit


def _tick_as_done(steps):
    return {(a, DONE if s is TICK else s) for a, s in steps}


def _states(P, limit):
    seen, todo = {P}, deque([P])
    while todo and len(seen) < limit:
        s = todo.popleft()
        for _, t in step(s):
            if t is not TICK and t not in seen:
                seen.add(t)
                todo.append(t)
    return seen


def test_c01_operational_semantics(report):
    rng = random.Random(101)
    checked, bad = 0, []
    for dialect in DIALECTS:
        for _ in range(500):
            P = random_process(rng, dialect, depth=rng.randint(1, 5))
            for s in _states(P, 40):
                checked += 1
                if _tick_as_done(step(s)) != oracle_step(s):
                    bad.append(s)
    report(1, "step = rule-by-rule oracle", not bad,
           "%d terms x 3 dialects, %d states, %d mismatches" % (500, checked, len(bad)))


def _words(A, k):
    return set(R.enumerate_words(A, k))


def _run_laws(P):
    """Check the run-set equation for the top operator of P; None if no law applies."""
    rs = R.runs_of
    if isinstance(P, Prefix):
        return R.equiv(rs(P), R.compose(R.from_words([[P.action]], P.action == END), rs(P.body)))
    if isinstance(P, Choice):
        return R.equiv(rs(P), R.union(rs(P.left), rs(P.right)))
    if isinstance(P, Seq):
        return R.equiv(rs(P), R.compose(rs(P.left), rs(P.right)))
    if isinstance(P, Star):
        return R.equiv(rs(P), R.observable(R.star(rs(P.body))))
    return None


def test_c02_run_algebra(report):
    rng = random.Random(202)
    bad, laws = [], 0
    x = Action.inp("a")
    base = [(R.is_empty(R.runs_of(Zero()))),
            R.equiv(R.runs_of(End()), R.from_words([[END]], True))]
    for a in (x, Action.out("b"), TAU):
        base.append(R.equiv(R.runs_of(Prefix(a, End())), R.from_words([[a, END]], True)))
    for dialect in DIALECTS:
        for _ in range(500):
            P = random_process(rng, dialect, depth=3)
            Q = random_process(rng, dialect, depth=3)
            terms = [Prefix(x, P), Choice(P, Q)]
            if dialect == "xccs":
                terms += [Seq(P, Q), Star(P)]
            for T in terms + [P]:
                ok = _run_laws(T)
                if ok is not None:
                    laws += 1
                    if not ok:
                        bad.append(T)
            # restriction preserves run equality (the choice P + P is run-equal to P)
            L = frozenset(["a"])
            if not R.equiv(R.runs_of(Restrict(P, L)), R.runs_of(Restrict(Choice(P, P), L))):
                bad.append(P)
    # parallel composition as interleavings, by bounded brute force
    pairs = 0
    for i in range(120):
        dialect = ("sccs", "xccs")[i % 2]
        P = random_process(rng, dialect, 2, par=False, restrict=False)
        Q = random_process(rng, dialect, 2, par=False, restrict=False)
        expected = set()
        for u in _words(R.runs_of(P), 6):
            for v in _words(R.runs_of(Q), 6):
                expected |= {w for w in interleavings(u, v) if len(w) <= 6}
        pairs += 1
        if _words(R.runs_of(Par(P, Q)), 6) != expected:
            bad.append(Par(P, Q))
    ok = all(base) and not bad
    report(2, "run-set equations", ok,
           "%d operator laws, %d parallel pairs, %d failures" % (laws, pairs, len(bad)))


def _depth3_corpus(rng, dialect, n):
    out = set()
    while len(out) < n:
        out.add(random_process(rng, dialect, depth=rng.randint(0, 3), names=("a",)))
    return sorted(out, key=repr)


def test_c03_bisimulation_bridge(report):
    rng = random.Random(303)
    bad, bisim_pairs = [], 0
    for i in range(240):
        dialect = DIALECTS[i % 3]
        P = random_process(rng, dialect, 3, names=("a", "b"))
        variants = [Choice(P, P), Par(P, End()) if dialect == "xccs" else Choice(P, P),
                    random_process(rng, dialect, 3, names=("a", "b"))]
        if isinstance(P, Par):
            variants.append(Par(P.right, P.left))
        for Q in variants:
            if bisimilar(P, Q):
                bisim_pairs += 1
                if not R.equiv(R.runs_of(P), R.runs_of(Q)):
                    bad.append((P, Q))
    compared = 0
    for dialect in ("sccs", "xccs"):
        corpus = _depth3_corpus(rng, dialect, 45)
        for i, P in enumerate(corpus):
            for Q in corpus[i:]:
                compared += 1
                if bool(bisimilar(P, Q)) != gfp_bisimilar(P, Q):
                    bad.append((P, Q))
    report(3, "bisimilar => equal runs; vs fixpoint", not bad,
           "%d bisimilar pairs, %d corpus pairs, %d failures" % (bisim_pairs, compared, len(bad)))


def test_c04_expansion_law(report):
    rng = random.Random(404)
    bad, n = [], 0
    for dialect, nested in (("sccs", True), ("xccs", False)):
        for _ in range(220):
            P = Par(random_process(rng, dialect, 3, par=nested, restrict=False),
                    random_process(rng, dialect, 3, par=nested, restrict=False))
            n += 1
            if not bisimilar(P, expand(P)):
                bad.append(P)
    report(4, "P ~ expand(P)", not bad, "%d instances, %d failures" % (n, len(bad)))


def test_c05_arden(report):
    rng = random.Random(505)
    bad = []
    labels = ("a", "b", "tau")
    for i in range(250):
        A = R.drop_empty(random_automaton(rng, rng.randint(1, 4), labels))
        B = random_automaton(rng, rng.randint(1, 4), labels)
        X = R.arden(A, B)
        if not R.equiv(X, R.union(R.compose(A, X), B)):
            bad.append(i)
    report(5, "arden solves X = A.X + B", not bad, "250 equations, %d failures" % len(bad))


def test_c06_parallel_elimination(report):
    rng = random.Random(606)
    bad = []
    for _ in range(120):
        P = Par(random_process(rng, "xccs", 3, restrict=False),
                random_process(rng, "xccs", 3, restrict=False))
        Q = eliminate_parallel(P)
        if has_par(Q) or not R.equiv(R.runs_of(P), R.runs_of(Q)):
            bad.append(P)
    report(6, "'|' eliminated, runs unchanged", not bad, "120 parallels, %d failures" % len(bad))


def test_c07_knot_decomposition(report):
    bad = []
    for i in range(len(KNOTS)):
        P, env = knot(i)
        d = knot_decompose(P, env)
        if not d.identity_holds(env):
            bad.append(KNOTS[i])
    report(7, "runs = PLo* . runs(T_P)", not bad and len(KNOTS) >= 20,
           "%d knots (vending machine included), %d failures" % (len(KNOTS), len(bad)))


def test_c08_restriction_congruence(report):
    rng = random.Random(808)
    bad, n = [], 0
    for rule in range(1, 13):
        for _ in range(25):
            lhs, rhs = GENERATORS[rule](rng)
            n += 1
            if rhs is None or not bisimilar(lhs, rhs):
                bad.append((rule, lhs))
    report(8, "12 rules preserve bisimilarity", not bad, "%d instances, %d failures" % (n, len(bad)))


def test_c09_axiom_validity(report):
    rng = random.Random(909)
    cases = axiom_instances()
    names = sorted({c[0] for c in cases})
    bad = []
    labels = [Action.inp(n) for n in "abc"] + [Action.out(n) for n in "abc"] + [TAU]
    for name, f, env, dialect in cases:
        if not valid(f, env, dialect=dialect):
            bad.append((name, "valid"))
        for _ in range(200):
            M = random_model(rng.randint(1, 6), labels, ["p", "q", "r"], rng,
                             density=rng.choice([0.15, 0.3, 0.5]), dialect=dialect)
            if not valid_in_model(M, f, env):
                bad.append((name, "model"))
                break
    report(9, "axiom instances valid", not bad,
           "%d instances of %s; 200 models each; %d failures"
           % (len(cases), ",".join(names), len(bad)))


def _closure_small(f, env, limit=16):
    try:
        return len(fl_closure(f, env, budget=limit)) <= limit
    except BudgetExceeded:
        return False


def test_c10_decision_cross_check(report):
    rng = random.Random(1010)
    bad = []
    unsat_cases = unsat_suite()
    for text, f, env in unsat_cases:
        if sat(f, env) or search_small_models(f, env, max_worlds=3) is not None:
            bad.append(("unsat", text))
    pool = [(t, f, e) for t, f, e in unsat_cases + sat_suite()]
    pool += [("axiom-negation", Neg(f), e) for _, f, e, _ in axiom_instances()]
    drawn = 0
    while drawn < 200:
        f = random_formula(rng, ("ccs", "xccs")[drawn % 2], depth=3, props=("p", "q"),
                           program_depth=2, names=("a", "b"))
        try:
            sat(f)
        except BudgetExceeded:
            continue                  # beyond desk-scale budgets; draw again
        pool.append(("random", f, None))
        drawn += 1
    sat_models = compared = 0
    for text, f, env in pool:
        res = sat(f, env)
        if res:
            sat_models += 1
            if not check(res.model, res.world, f, env):
                bad.append(("model", text))
        if _closure_small(f, env):
            compared += 1
            C = fl_closure(f, env)
            alive = eliminate_explicit(C, atoms_bruteforce(C))
            i, pos = C.lit(f)
            brute = any((C.members[i] in A) == pos for A in alive)
            if brute != bool(res):
                bad.append(("bruteforce", text))
    report(10, "SAT models, UNSAT search, brute force", not bad,
           "%d unsat confirmed, %d SAT models checked, %d brute-force comparisons, %d failures"
           % (len(unsat_cases), sat_models, compared, len(bad)))


def test_c11_truth_lemma(report):
    rng = random.Random(1111)
    cases = list(sat_suite())
    while len(cases) < 60:
        f = random_formula(rng, "xccs", depth=3, props=("p", "q"), program_depth=2)
        if sat(f):
            cases.append(("random", f, None))
    bad, pairs = [], 0
    for text, f, env in cases:
        res = sat(f, env)
        for full in (False, True):
            try:
                mism = truth_lemma_mismatches(res, env, full=full)
            except BudgetExceeded:
                continue
            pairs += len(res.closure) * (len(res.decider.full_model()[1]) if full else len(res.atoms))
            if mism:
                bad.append((text, mism[:3]))
    report(11, "membership = truth on extracted models", not bad,
           "%d formulas, %d (atom, member) pairs, %d failures" % (len(cases), pairs, len(bad)))


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q", "-s"]))
