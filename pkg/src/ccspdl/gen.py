"""Random processes, formulas and automata for property tests and the CLI."""

import random

from .runs import RunAutomaton
from .syntax import (TAU, Action, And, Atom, Choice, Diamond, End, Neg, Par,
                     Prefix, PrefixConst, Prop, Restrict, Seq, Star, Top, Zero)


def random_action(rng, names=("a", "b"), tau=True):
    pool = [Action.inp(n) for n in names] + [Action.out(n) for n in names]
    if tau:
        pool.append(TAU)
    return rng.choice(pool)


def random_process(rng, dialect="xccs", depth=3, names=("a", "b"), env=None,
                   par=True, restrict=True, tau=True):
    """A random term of the given dialect with nesting depth at most `depth`."""
    consts = sorted(env.defs) if env is not None and dialect == "ccs" else []

    def leaf():
        if dialect == "xccs":
            return rng.choice([End(), End(), Zero(), Prefix(random_action(rng, names, tau), End())])
        if consts and rng.random() < 0.3:
            return PrefixConst(random_action(rng, names, tau), rng.choice(consts))
        return Atom(random_action(rng, names, tau))

    def go(d):
        if d <= 0 or rng.random() < 0.25:
            return leaf()
        ops = ["prefix", "prefix", "choice"]
        if par:
            ops.append("par")
        if dialect == "xccs":
            ops += ["seq", "star"]
        if restrict and dialect != "sccs":
            ops.append("restrict")
        op = rng.choice(ops)
        if op == "prefix":
            return Prefix(random_action(rng, names, tau), go(d - 1))
        if op == "choice":
            return Choice(go(d - 1), go(d - 1))
        if op == "par":
            return Par(go(d - 1), go(d - 1))
        if op == "seq":
            return Seq(go(d - 1), go(d - 1))
        if op == "star":
            return Star(go(d - 1))
        return Restrict(go(d - 1), frozenset(rng.sample(list(names), rng.randint(1, len(names)))))

    return go(depth)


def random_formula(rng, dialect="xccs", depth=2, props=("p", "q"), program_depth=2,
                   names=("a", "b"), env=None):
    def go(d):
        r = rng.random()
        if d <= 0 or r < 0.2:
            return Prop(rng.choice(props)) if rng.random() < 0.9 else Top()
        if r < 0.4:
            return Neg(go(d - 1))
        if r < 0.6:
            return And(go(d - 1), go(d - 1))
        if dialect == "xccs" and rng.random() < 0.3:
            return Diamond(random_action(rng, names), go(d - 1))
        P = random_process(rng, dialect, program_depth, names, env, restrict=False)
        return Diamond(P, go(d - 1))

    return go(depth)


def random_automaton(rng, n_states=3, alphabet=("a", "b"), density=0.35, final_p=0.4):
    acts = [Action.inp(x) if isinstance(x, str) else x for x in alphabet]
    edges = [(s, a, d) for s in range(n_states) for a in acts for d in range(n_states)
             if rng.random() < density]
    finals = [q for q in range(n_states) if rng.random() < final_p]
    return RunAutomaton(n_states, 0, finals, edges)


def rng_from_seed(seed):
    return random.Random(seed)
