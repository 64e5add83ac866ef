"""Term rewriting: expansion of parallel compositions, restriction
congruence, elimination of parallel composition, and knot decomposition."""

import logging
from dataclasses import dataclass, field

from . import runs as R
from .errors import InternalError, PreconditionError
from .lts import END, TAU, TICK, build_lts, is_knot, par, sorted_steps
from .runs import RunAutomaton, is_xccs_term, runs_of
from .syntax import (Action, Atom, Choice, End, Par, Prefix, PrefixConst,
                     Restrict, Seq, Star, Zero, choice_of, free_names,
                     has_par, has_restrict, prefix_chain, subterms)

log = logging.getLogger(__name__)


# ------------------------------------------------------------- expansion

def _prefixed(a, succ):
    return Atom(a) if succ is TICK else Prefix(a, succ)


def expand(P, env=None):
    """Sum of left moves, right moves, communications and (xccs) END."""
    if not isinstance(P, Par):
        raise PreconditionError("expand needs a parallel composition, got %s" % P)
    if has_restrict(P):
        raise PreconditionError("expand needs an unrestricted process")
    xccs = is_xccs_term(P)
    if xccs and (has_par(P.left) or has_par(P.right)):
        raise PreconditionError("xccs expansion needs operands without '|'")
    left = sorted_steps(P.left, env)
    right = sorted_steps(P.right, env)
    items = []
    for a, p1 in left:
        if a != END:
            items.append(_prefixed(a, par(p1, P.right)))
    for b, q1 in right:
        if b != END:
            items.append(_prefixed(b, par(P.left, q1)))
    for a, p1 in left:
        if not a.is_visible:
            continue
        for b, q1 in right:
            if b == a.complement():
                items.append(_prefixed(TAU, par(p1, q1)))
    if (END, TICK) in left and (END, TICK) in right:
        items.append(End())
    if not items:
        if xccs:
            return Zero()
        raise PreconditionError("no transitions to expand")
    return choice_of(items)


# ---------------------------------------------------- restriction congruence

def _hits(a, names):
    return a.is_visible and a.name in names


def fresh_name(base, used):
    i = 1
    while "%s%d" % (base, i) in used:
        i += 1
    return "%s%d" % (base, i)


def rename(P, mapping):
    """Substitute names in actions, respecting inner restrictions."""
    if not mapping:
        return P

    def act(a):
        return Action(a.kind, mapping[a.name]) if a.is_visible and a.name in mapping else a

    if isinstance(P, Prefix):
        return Prefix(act(P.action), rename(P.body, mapping))
    if isinstance(P, Atom):
        return Atom(act(P.action))
    if isinstance(P, PrefixConst):
        return PrefixConst(act(P.action), P.const)
    if isinstance(P, (Seq, Choice, Par)):
        return type(P)(rename(P.left, mapping), rename(P.right, mapping))
    if isinstance(P, Star):
        return Star(rename(P.body, mapping))
    if isinstance(P, Restrict):
        inner = {k: v for k, v in mapping.items() if k not in P.names}
        return Restrict(rename(P.body, inner), P.names)
    return P


def alpha_convert(P, old, new=None, used=None):
    """Rule 2: rename a restricted name of the outermost restriction."""
    if not isinstance(P, Restrict) or old not in P.names:
        return None
    if new is None:
        used = set(used or ()) | free_names(P) | set(P.names)
        new = fresh_name(old, used)
    body = rename(P.body, {old: new})
    return Restrict(body, (P.names - {old}) | {new})


def rule3(P):
    if isinstance(P, Restrict) and isinstance(P.body, Zero):
        return Zero()


def rule4(P):
    if isinstance(P, Restrict) and isinstance(P.body, End):
        return End()


def rule5(P):
    if isinstance(P, Restrict) and isinstance(P.body, Prefix) and not _hits(P.body.action, P.names):
        return Prefix(P.body.action, Restrict(P.body.body, P.names))


def rule6(P):
    if isinstance(P, Restrict) and isinstance(P.body, Prefix) and _hits(P.body.action, P.names):
        return Zero()


def rule7(P):
    if isinstance(P, Restrict) and isinstance(P.body, Seq):
        return Seq(Restrict(P.body.left, P.names), Restrict(P.body.right, P.names))


def rule8(P):
    if isinstance(P, Restrict) and isinstance(P.body, Choice):
        return Choice(Restrict(P.body.left, P.names), Restrict(P.body.right, P.names))


def rule9(P):
    if isinstance(P, Par) and isinstance(P.right, Restrict):
        L = P.right.names
        if not free_names(P.left) & L:
            return Restrict(Par(P.left, P.right.body), L)


def rule9_mirror(P):
    if isinstance(P, Par) and isinstance(P.left, Restrict):
        L = P.left.names
        if not free_names(P.right) & L:
            return Restrict(Par(P.left.body, P.right), L)


def rule10(P):
    if isinstance(P, Restrict) and isinstance(P.body, Star):
        return Star(Restrict(P.body.body, P.names))


def rule11(P):
    if isinstance(P, Restrict) and isinstance(P.body, Restrict):
        return Restrict(P.body.body, P.body.names | P.names)


def rule12(P):
    if isinstance(P, Restrict) and not free_names(P.body) & P.names:
        return P.body


RULES = {
    2: lambda P: alpha_convert(P, min(P.names)) if isinstance(P, Restrict) and P.names else None,
    3: rule3, 4: rule4, 5: rule5, 6: rule6, 7: rule7, 8: rule8,
    9: rule9, 10: rule10, 11: rule11, 12: rule12,
}


def rewrite_at(P, path, rule):
    """Rule 1: apply `rule` to the sub-term at `path` (a sequence of 0/1 child indices)."""
    if not path:
        return rule(P)
    k, rest = path[0], path[1:]
    if isinstance(P, (Seq, Choice, Par)):
        kids = [P.left, P.right]
        new = rewrite_at(kids[k], rest, rule)
        if new is None:
            return None
        kids[k] = new
        return type(P)(*kids)
    if isinstance(P, (Prefix, Star, Restrict)) and k == 0:
        new = rewrite_at(P.body, rest, rule)
        if new is None:
            return None
        if isinstance(P, Prefix):
            return Prefix(P.action, new)
        if isinstance(P, Star):
            return Star(new)
        return Restrict(new, P.names)
    return None


def _push(Q, L):
    """Push a restriction through a term with no '|' and no restriction."""
    if not L:
        return Q
    if isinstance(Q, (Zero, End)):
        return Q                                           # rules 3, 4
    if isinstance(Q, Prefix):
        if _hits(Q.action, L):
            return Zero()                                  # rule 6
        return Prefix(Q.action, _push(Q.body, L))          # rule 5
    if isinstance(Q, Seq):
        return Seq(_push(Q.left, L), _push(Q.right, L))    # rule 7
    if isinstance(Q, Choice):
        return mk_choice(_push(Q.left, L), _push(Q.right, L))  # rule 8, then 0 + P = P
    if isinstance(Q, Star):
        return Star(_push(Q.body, L))                      # rule 10
    raise PreconditionError("cannot push a restriction into %s" % Q)


def _unrestrict(P):
    """Remove every restriction from a term without '|'."""
    if isinstance(P, Restrict):
        return _push(_unrestrict(P.body), P.names)         # rule 11 via nesting
    if isinstance(P, Prefix):
        return Prefix(P.action, _unrestrict(P.body))
    if isinstance(P, (Seq, Choice)):
        return type(P)(_unrestrict(P.left), _unrestrict(P.right))
    if isinstance(P, Star):
        return Star(_unrestrict(P.body))
    return P


class _External:
    def __init__(self, P):
        self.used = set(free_names(P))
        for t in subterms(P):
            if isinstance(t, Restrict):
                self.used |= t.names

    def apart(self, Q, L, avoid):
        """Alpha-convert the names of L that clash with `avoid`."""
        mapping = {}
        for a in sorted(L & avoid):
            b = fresh_name(a, self.used)
            self.used.add(b)
            mapping[a] = b
        if not mapping:
            return Q, L
        return rename(Q, mapping), frozenset(mapping.get(a, a) for a in L)

    def ext(self, P):
        """(Q, L) with Q unrestricted and P r-congruent to Q\\L."""
        if not has_par(P):
            return _unrestrict(P), frozenset()
        if isinstance(P, Prefix):
            Q, L = self.ext(P.body)
            if P.action.is_visible:
                Q, L = self.apart(Q, L, {P.action.name})
            return Prefix(P.action, Q), L                  # rule 5 backwards
        if isinstance(P, (Seq, Choice, Par)):
            Q1, L1 = self.ext(P.left)
            Q2, L2 = self.ext(P.right)
            Q1, L1 = self.apart(Q1, L1, free_names(Q2) | L2)
            Q2, L2 = self.apart(Q2, L2, free_names(Q1) | L1)
            return type(P)(Q1, Q2), L1 | L2                # rules 7, 8, 9, 11, 12
        if isinstance(P, Star):
            Q, L = self.ext(P.body)
            return Star(Q), L                              # rule 10 backwards
        if isinstance(P, Restrict):
            Q, L = self.ext(P.body)
            return Q, L | P.names                          # rule 11
        raise PreconditionError("unexpected term %s" % P)


def r_normalize(P):
    """An r-congruent term: unrestricted if P has no '|', else Q\\L with Q unrestricted."""
    Q, L = _External(P).ext(P)
    L = frozenset(L & free_names(Q))                       # rule 12 on unused names
    if not L:
        return Q
    return Restrict(Q, L)


# ------------------------------------------------------ parallel elimination

def mk_seq(a, b):
    if a is None or b is None:
        return None
    if isinstance(a, Zero) or isinstance(b, Zero):
        return Zero()
    if isinstance(a, End):
        return b
    if isinstance(b, End):
        return a
    if isinstance(a, Prefix):
        return Prefix(a.action, mk_seq(a.body, b))
    return Seq(a, b)


def mk_choice(a, b):
    if a is None or isinstance(a, Zero):
        return b
    if b is None or isinstance(b, Zero):
        return a
    return Choice(a, b)


def _solve_pair(P, env):
    """Equation system over the reachable pairs of P = X|Y, solved bottom-up."""
    states = [P]
    index = {P: 0}
    coef, const = [], []
    i = 0
    while i < len(states):
        row, b = {}, None
        for s in _summand_list(expand(states[i], env)):
            if isinstance(s, End):
                b = mk_choice(b, End())
                continue
            target = s.body
            if target not in index:
                index[target] = len(states)
                states.append(target)
            j = index[target]
            row[j] = mk_choice(row.get(j), Prefix(s.action, End()))
        coef.append(row)
        const.append(b)
        i += 1
    log.debug("parallel elimination: %d equations", len(states))
    for k in reversed(range(len(states))):
        if k in coef[k]:
            loop = Star(coef[k].pop(k))                    # Arden: X = A;X + B  ->  A*;B
            coef[k] = {j: mk_seq(loop, c) for j, c in coef[k].items()}
            const[k] = mk_seq(loop, const[k])
        for i in range(k):
            c = coef[i].pop(k, None)
            if c is None:
                continue
            for j, d in coef[k].items():
                coef[i][j] = mk_choice(coef[i].get(j), mk_seq(c, d))
            if const[k] is not None:
                const[i] = mk_choice(const[i], mk_seq(c, const[k]))
    return const[0] if const[0] is not None else Zero()


def _summand_list(S):
    if isinstance(S, Choice):
        return _summand_list(S.left) + _summand_list(S.right)
    if isinstance(S, Zero):
        return []
    return [S]


def _elim(P, env):
    if not has_par(P):
        return P
    if isinstance(P, Par):
        return _solve_pair(Par(_elim(P.left, env), _elim(P.right, env)), env)
    if isinstance(P, Prefix):
        return Prefix(P.action, _elim(P.body, env))
    if isinstance(P, Seq):
        return mk_seq(_elim(P.left, env), _elim(P.right, env))
    if isinstance(P, Choice):
        return mk_choice(_elim(P.left, env), _elim(P.right, env))
    if isinstance(P, Star):
        return Star(_elim(P.body, env))
    raise PreconditionError("unexpected term %s" % P)


def eliminate_parallel(P, env=None):
    """A term without '|' with the same runs as the unrestricted xccs term P."""
    if has_restrict(P):
        raise PreconditionError("eliminate_parallel needs an unrestricted process")
    if not is_xccs_term(P):
        raise PreconditionError("eliminate_parallel works on xccs terms")
    out = _elim(P, env)
    if not R.equiv(runs_of(P, env), runs_of(out, env)):
        raise InternalError("parallel elimination changed the run language of %s" % P)
    return out


def sequentialize(P, env=None):
    """Normalize restrictions, eliminate '|', then drop the outer restriction."""
    Q = r_normalize(P)
    if isinstance(Q, Restrict):
        body = eliminate_parallel(Q.body, env)
        out = _push(body, Q.names)
    else:
        out = eliminate_parallel(Q, env)
    if not R.equiv(runs_of(P, env), runs_of(out, env)):
        raise InternalError("sequentialization changed the run language of %s" % P)
    return out


# -------------------------------------------------------- knot decomposition

@dataclass
class KnotDecomposition:
    process: object
    loops: RunAutomaton
    proper_loops: RunAutomaton
    breakers: RunAutomaton
    proper_breakers: RunAutomaton
    minimal_proper_breakers: RunAutomaton
    tail: list = field(default_factory=list)   # (prefix language, continuation or TICK)
    alphabet: frozenset = frozenset()

    def tail_runs(self, env=None):
        out = R.empty()
        for lang, cont in self.tail:
            part = lang if cont is TICK else R.compose(lang, runs_of(cont, env))
            out = R.union(out, part)
        return out

    def decomposition_runs(self, env=None):
        return R.compose(R.star(self.proper_loops), self.tail_runs(env))

    def identity_holds(self, env=None):
        return R.equiv(runs_of(self.process, env), self.decomposition_runs(env))

    def looping_part(self):
        """L_P as a sum of prefix chains (needs finitely many proper loops)."""
        words = _finite_words(self.proper_loops, "proper loops")
        return choice_of(prefix_chain(w, None) for w in words) if words else None

    def tail_part(self):
        """T_P as a sum of a.P' terms (needs finitely many minimal proper breakers)."""
        items = []
        for lang, cont in self.tail:
            for w in _finite_words(lang, "minimal proper breakers"):
                items.append(prefix_chain(w, None if cont is TICK else cont))
        return choice_of(items) if items else None


def _finite_words(A, what):
    if not R.is_finite(A):
        raise PreconditionError("the set of %s is infinite; no finite sum exists" % what)
    words = R.words_of(A)
    return sorted(words, key=lambda w: [a.sort_key() for a in w])


def _sigma_plus(alphabet):
    alphabet = list(alphabet)
    edges = [(0, a, 1) for a in alphabet] + [(1, a, 1) for a in alphabet]
    return RunAutomaton(2, 0, [1], edges)


def knot_decompose(P, env=None):
    if not is_knot(P, env):
        raise PreconditionError("%s is not a knot process" % P)
    lts = build_lts(P, env)
    sigma = frozenset(lts.labels())
    loops = R.drop_empty(R.trim(RunAutomaton(len(lts.states), 0, [0], lts.edges)))
    proper = R.difference(loops, R.concat(loops, loops), sigma)
    t = R.trim(loops)
    strict_prefix = RunAutomaton(t.n, t.initial, [q for q in range(t.n) if t.out[q]], t.edges)
    breakers = R.complement(strict_prefix, sigma)
    pbr = R.difference(breakers, R.trim(R.concat(loops, breakers)), sigma)
    mpbr = R.difference(pbr, R.trim(R.concat(pbr, _sigma_plus(sigma))), sigma)
    tail = []
    for s, state in enumerate(lts.states):
        reach = R.trim(RunAutomaton(len(lts.states), 0, [s], lts.edges))
        lang = R.intersect(mpbr, reach)
        if not R.is_empty(lang):
            tail.append((lang, state))
    return KnotDecomposition(P, loops, proper, breakers, pbr, mpbr, tail, sigma)


def build_LP_prime(d, env):
    """L_P' = sum of w.Z + sum of w over proper loops w, with Z = L_P'.

    Returns (term, constant name, extended environment)."""
    words = _finite_words(d.proper_loops, "proper loops")
    if not words:
        raise PreconditionError("no proper loops")
    env2 = env.copy()
    z = env2.fresh_constant("Z")
    body = choice_of([prefix_chain(w, z) for w in words] + [prefix_chain(w, None) for w in words])
    env2.define(z, body)
    env2.classification()
    return body, z, env2
