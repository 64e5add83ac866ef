"""Satisfiability and validity with finite-model extraction.

The closure of a formula is built from its subformulas plus one unfolding
per composite diamond.  Atoms are the coherent truth assignments over the
closure; they are determined by the values of the propositions and of the
basic (single-action) diamonds, so they are enumerated as bit vectors.
Atoms are then eliminated while some diamond lacks a witness, and a model is
read off the survivors.
"""

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np

from . import runs as R
from .errors import BudgetExceeded, InternalError, PreconditionError
from .kripke import AutDiamond, KripkeModel, check, sat_set
from .lts import END, TICK, sorted_steps
from .rewrite import knot_decompose
from .runs import is_xccs_term, runs_of
from .syntax import (Action, And, Atom, Choice, Diamond, Neg, Par, Prefix,
                     PrefixConst, Prop, Restrict, Top, disjunction,
                     formula_subterms, show_formula, show_process)

log = logging.getLogger(__name__)

DEFAULT_CLOSURE_BUDGET = 64
MAX_BASES = 22


def formula_dialect(f):
    for g in formula_subterms(f):
        if isinstance(g, Diamond):
            if isinstance(g.program, Action) or is_xccs_term(g.program):
                return "xccs"
    return "ccs"


# ---------------------------------------------------------------- closure

@dataclass
class Closure:
    seed: object
    xccs: bool
    members: list = field(default_factory=list)      # positive formulas, in discovery order
    index: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)
    kind: list = field(default_factory=list)         # top, prop, neg, and, base, derived
    defn: dict = field(default_factory=dict)         # derived member -> literal it unfolds to
    base_action: dict = field(default_factory=dict)  # base member -> action
    programs: dict = field(default_factory=dict)     # composite member -> (automaton, state, body)
    routes: dict = field(default_factory=dict)       # program -> how its diamonds were unfolded

    def __len__(self):
        return len(self.members)

    def lit(self, f):
        """(member index, polarity) of a literal."""
        if isinstance(f, Neg):
            return self.index[f.body], False
        return self.index[f], True

    def show(self):
        lines = []
        for i, g in enumerate(self.members):
            lines.append("%3d  %-40s  %s" % (i, show_formula(g), self.provenance[g]))
        return "\n".join(lines)


class _ClosureBuilder:
    def __init__(self, seed, env, xccs, budget):
        self.env = env
        self.budget = budget
        self.C = Closure(seed, xccs)
        self.dfas = {}
        self.knots = {}
        self.queue = []

    def dfa(self, P):
        A = self.dfas.get(P)
        if A is None:
            A = R.minimize(runs_of(P, self.env))
            self.dfas[P] = A
        return A

    def add(self, f, why):
        g = f.body if isinstance(f, Neg) else f
        if g in self.C.index:
            return
        if len(self.C.members) >= self.budget:
            raise BudgetExceeded("closure exceeds %d members (seed %s)"
                                 % (self.budget, show_formula(self.C.seed)))
        self.C.index[g] = len(self.C.members)
        self.C.members.append(g)
        self.C.provenance[g] = why
        self.C.kind.append(None)
        self.queue.append(g)

    def derive(self, g, f, why):
        self.C.kind[self.C.index[g]] = "derived"
        self.C.defn[self.C.index[g]] = f
        self.add(f, why)

    def base(self, g, action):
        i = self.C.index[g]
        self.C.kind[i] = "base"
        self.C.base_action[i] = action
        self.add(g.body, "subformula of %s" % show_formula(g))

    def composite(self, g, aut, state):
        self.C.programs[self.C.index[g]] = (aut, state, g.body)
        self.add(g.body, "subformula of %s" % show_formula(g))

    def run(self):
        self.add(self.C.seed, "seed")
        while self.queue:
            g = self.queue.pop(0)
            self.process(g)
        return self.C

    def process(self, g):
        C = self.C
        i = C.index[g]
        if isinstance(g, Top):
            C.kind[i] = "top"
        elif isinstance(g, Neg):
            C.kind[i] = "neg"
            self.add(g.body, "subformula of %s" % show_formula(g))
        elif isinstance(g, Prop):
            C.kind[i] = "prop"
        elif isinstance(g, And):
            C.kind[i] = "and"
            self.add(g.left, "subformula of %s" % show_formula(g))
            self.add(g.right, "subformula of %s" % show_formula(g))
        elif isinstance(g, AutDiamond):
            self.composite(g, g.aut, g.state)
            self.derive(g, self.automaton_unfolding(g.source, g.aut, g.state, g.body),
                        "automaton clause of %s" % g)
        elif isinstance(g, Diamond):
            P = g.program
            if isinstance(P, Action):
                if P == END:
                    self.derive(g, g.body, "END clause of %s" % show_formula(g))
                else:
                    self.base(g, P)
            elif isinstance(P, Atom):
                self.base(g, P.action)
            elif self.C.xccs:
                A = self.dfa(P)
                self.composite(g, A, A.initial)
                self.C.routes[P] = "regular"
                self.derive(g, AutDiamond.of(P, A, A.initial, g.body),
                            "regular clause of %s" % show_formula(g))
            else:
                self.composite(g, self.dfa(P), self.dfa(P).initial)
                f, why = self.ccs_unfolding(P, g.body)
                self.derive(g, f, "%s clause of %s" % (why, show_formula(g)))
        else:
            raise TypeError("not a formula: %r" % (g,))

    def basic(self, a, body):
        return Diamond(a, body) if self.C.xccs else Diamond(Atom(a), body)

    def automaton_unfolding(self, source, A, q, body):
        items = []
        for a, d in A.out[q]:
            if a == END:
                items.append(body)
                continue
            if d in A.finals:
                items.append(self.basic(a, body))
            if A.out[d]:
                items.append(self.basic(a, AutDiamond.of(source, A, d, body)))
        return disjunction(items)

    def ccs_unfolding(self, P, phi):
        env = self.env
        if isinstance(P, Prefix):
            return Diamond(Atom(P.action), Diamond(P.body, phi)), "prefix"
        if isinstance(P, PrefixConst):
            return Diamond(Atom(P.action), Diamond(env.body(P.const), phi)), "constant"
        if isinstance(P, Par):
            items = []
            for a, succ in sorted_steps(P, env):
                items.append(Diamond(Atom(a), phi if succ is TICK else Diamond(succ, phi)))
            return disjunction(items), "parallel"
        knot = env is not None and bool(env.defs) and P in env.recursive_bodies()
        if knot:
            parts = self.knot_parts(P)
            if parts is not None:
                loop, tail = parts
                items = [] if tail is None else [Diamond(tail, phi)]
                items.append(Diamond(loop, Diamond(P, phi)))
                self.C.routes[P] = "knot"
                return disjunction(items), "knot"
        elif isinstance(P, Choice):
            return disjunction([Diamond(P.left, phi), Diamond(P.right, phi)]), "choice"
        A = self.dfa(P)
        self.C.routes[P] = "regular"
        return AutDiamond.of(P, A, A.initial, phi), "regular"

    def knot_parts(self, P):
        if P in self.knots:
            return self.knots[P]
        out = None
        try:
            d = knot_decompose(P, self.env)
            if d.identity_holds(self.env):
                out = (d.looping_part(), d.tail_part())
            else:
                log.info("knot identity fails for %s; using the regular route", show_process(P))
        except PreconditionError as e:
            log.info("no finite knot clause for %s (%s); using the regular route",
                     show_process(P), e)
        self.knots[P] = out
        return out


def fl_closure(phi, env=None, budget=DEFAULT_CLOSURE_BUDGET, dialect=None):
    xccs = (dialect or formula_dialect(phi)) == "xccs"
    return _ClosureBuilder(phi, env, xccs, budget).run()


# ------------------------------------------------------------------ atoms

class _Signatures:
    """For one action x: the basic x-diamonds, D_x(A) and sig_x(B) as bit masks."""

    def __init__(self, k, D, sig):
        self.k = k
        self.D = D
        self.sig = sig

    def pre(self, S):
        """Atoms A with some B in S such that S_x(A, B)."""
        if self.k == 0:
            return np.full(S.shape, bool(S.any()))
        up = np.zeros(1 << self.k, dtype=bool)
        up[self.sig[S]] = True
        for i in range(self.k):
            v = up.reshape(-1, 2, 1 << i)
            v[:, 1, :] |= v[:, 0, :]
        return up[self.D]

    def edge(self, a, b):
        return (int(self.sig[b]) & ~int(self.D[a])) == 0


@dataclass
class SatResult:
    satisfiable: bool
    closure: Closure
    model: KripkeModel = None
    world: int = None
    atoms: list = None           # atom index of each model world

    def __bool__(self):
        return self.satisfiable


class Decider:
    """Vectorized atom enumeration and elimination for one closure."""

    def __init__(self, closure, env=None):
        C = self.C = closure
        self.env = env
        self.bases = [i for i, k in enumerate(C.kind) if k in ("prop", "base")]
        m = len(self.bases)
        if m > MAX_BASES:
            raise BudgetExceeded("closure has %d independent members (limit %d, closure size %d)"
                                 % (m, MAX_BASES, len(C)))
        self.N = 1 << m
        idx = np.arange(self.N, dtype=np.int64)
        self.vals = [None] * len(C)
        for j, i in enumerate(self.bases):
            self.vals[i] = ((idx >> j) & 1).astype(bool)
        for i in range(len(C)):
            self.value(i)
        self.actions = sorted({a for a in C.base_action.values()}
                              | {a for A, _, _ in C.programs.values() for a in A.alphabet()
                                 if a != END},
                              key=lambda a: a.sort_key())
        self.sigs = {a: self._signature(a) for a in self.actions}
        self.alive = self._eliminate()

    def value(self, i):
        v = self.vals[i]
        if v is not None:
            return v
        kind = self.C.kind[i]
        g = self.C.members[i]
        if kind == "top":
            v = np.ones(self.N, dtype=bool)
        elif kind == "neg":
            v = ~self.lit(g.body)
        elif kind == "and":
            v = self.lit(g.left) & self.lit(g.right)
        elif kind == "derived":
            v = self.lit(self.C.defn[i])
        else:
            raise InternalError("unclassified closure member %s" % show_formula(g))
        self.vals[i] = v
        return v

    def lit(self, f):
        i, pos = self.C.lit(f)
        v = self.value(i)
        return v if pos else ~v

    def _signature(self, a):
        ds = [i for i, b in self.C.base_action.items() if b == a]
        D = np.zeros(self.N, dtype=np.int64)
        sig = np.zeros(self.N, dtype=np.int64)
        for j, i in enumerate(ds):
            D |= self.vals[i].astype(np.int64) << j
            sig |= self.lit(self.C.members[i].body).astype(np.int64) << j
        return _Signatures(len(ds), D, sig)

    def pre(self, a, S):
        if a == END:
            return S
        return self.sigs[a].pre(S)

    def reach(self, A, target, alive):
        """Per automaton state q: atoms with a (possibly empty) q-path to target, and ranks."""
        W = [np.zeros(self.N, dtype=bool) for _ in range(A.n)]
        rank = [np.full(self.N, -1, dtype=np.int64) for _ in range(A.n)]
        for q in A.finals:
            W[q] = target & alive
            rank[q][W[q]] = 0
        level = 0
        while True:
            level += 1
            new = [w.copy() for w in W]
            for s, a, d in A.edges:
                new[s] |= self.pre(a, W[d]) & alive
            changed = False
            for q in range(A.n):
                fresh = new[q] & ~W[q]
                if fresh.any():
                    rank[q][fresh] = level
                    changed = True
            W = new
            if not changed:
                return W, rank

    def fulfilled(self, A, q, W, alive):
        out = np.zeros(self.N, dtype=bool)
        for a, d in A.out[q]:
            out |= self.pre(a, W[d])
        return out & alive

    def _eliminate(self):
        C = self.C
        alive = np.ones(self.N, dtype=bool)
        rounds = 0
        while True:
            rounds += 1
            ok = alive.copy()
            for i, a in C.base_action.items():
                wit = self.pre(a, alive & self.lit(C.members[i].body))
                ok &= ~self.vals[i] | wit
            cache = {}
            for i, (A, q, body) in C.programs.items():
                key = (id(A), body)
                if key not in cache:
                    cache[key] = self.reach(A, self.lit(body), alive)[0]
                ok &= ~self.vals[i] | self.fulfilled(A, q, cache[key], alive)
            if (ok == alive).all():
                log.debug("elimination stable after %d rounds, %d atoms survive",
                          rounds, int(alive.sum()))
                return alive
            alive = ok

    def atom(self, n):
        """Positive closure members of atom n."""
        return frozenset(g for i, g in enumerate(self.C.members) if self.vals[i][n])

    def surviving(self):
        return {self.atom(int(n)) for n in np.flatnonzero(self.alive)}

    # ---------------------------------------------------- model extraction

    def extract(self, start):
        C = self.C
        alive = self.alive
        chosen = [start]
        where = {start: 0}
        reach_cache = {}

        def add(n):
            if n not in where:
                where[n] = len(chosen)
                chosen.append(n)

        def pick(cands):
            hits = np.flatnonzero(cands)
            for n in hits:
                if int(n) in where:
                    return int(n)
            return int(hits[0])

        def succ_mask(a, n):
            if a == END:
                m = np.zeros(self.N, dtype=bool)
                m[n] = True
                return m
            s = self.sigs[a]
            return ((s.sig & ~s.D[n]) == 0) & alive

        k = 0
        while k < len(chosen):
            n = chosen[k]
            k += 1
            for i, a in C.base_action.items():
                if self.vals[i][n]:
                    add(pick(succ_mask(a, n) & self.lit(C.members[i].body)))
            for i, (A, q, body) in C.programs.items():
                if not self.vals[i][n]:
                    continue
                key = (id(A), body)
                if key not in reach_cache:
                    reach_cache[key] = self.reach(A, self.lit(body), alive)
                W, rank = reach_cache[key]
                cur_q, cur_n, first = q, n, True
                while first or rank[cur_q][cur_n] > 0:
                    best = None
                    for a, d in A.out[cur_q]:
                        m = succ_mask(a, cur_n) & (rank[d] >= 0)
                        if not first:
                            m &= rank[d] < rank[cur_q][cur_n]
                        if m.any():
                            r = rank[d][m].min()
                            if best is None or r < best[0]:
                                best = (r, a, d, pick(m & (rank[d] == r)))
                    if best is None:
                        raise InternalError("lost witness path for %s" % show_formula(C.members[i]))
                    _, a, cur_q, cur_n = best
                    add(cur_n)
                    first = False
        return self.model_on(chosen), chosen

    def full_model(self, limit=2048):
        """The model whose worlds are all surviving atoms."""
        chosen = [int(n) for n in np.flatnonzero(self.alive)]
        if len(chosen) > limit:
            raise BudgetExceeded("%d surviving atoms (limit %d)" % (len(chosen), limit))
        return self.model_on(chosen), chosen

    def model_on(self, chosen):
        C = self.C
        rels = {}
        for a in self.actions:
            s = self.sigs[a]
            rels[a] = [(x, y) for x, nx in enumerate(chosen) for y, ny in enumerate(chosen)
                       if s.edge(nx, ny)]
        val = {}
        for i, g in enumerate(C.members):
            if C.kind[i] == "prop":
                val[g.name] = [x for x, nx in enumerate(chosen) if self.vals[i][nx]]
        return KripkeModel(["A%d" % n for n in chosen], rels, val, "xccs" if C.xccs else "ccs")


def sat(phi, env=None, budget=DEFAULT_CLOSURE_BUDGET, dialect=None):
    C = fl_closure(phi, env, budget, dialect)
    D = Decider(C, env)
    top = D.lit(phi) & D.alive
    if not top.any():
        return SatResult(False, C)
    start = int(np.flatnonzero(top)[0])
    M, chosen = D.extract(start)
    if not check(M, 0, phi, env):
        raise InternalError("extracted model does not satisfy %s" % show_formula(phi))
    res = SatResult(True, C, M, 0, chosen)
    res.decider = D
    return res


def valid(phi, env=None, budget=DEFAULT_CLOSURE_BUDGET, dialect=None):
    return not sat(Neg(phi), env, budget, dialect)


def truth_lemma_mismatches(res, env=None, full=False):
    """(world, member) pairs where model-checked truth differs from atom membership.

    With full=True the check runs on the model of all surviving atoms instead of
    the extracted one."""
    D = res.decider
    M, atoms = D.full_model() if full else (res.model, res.atoms)
    bad = []
    for i, g in enumerate(res.closure.members):
        holds = sat_set(M, g, env)
        for w, n in enumerate(atoms):
            if (w in holds) != bool(D.vals[i][n]):
                bad.append((M.worlds[w], g))
    return bad


# ------------------------------------------------- brute-force cross-route

def atoms_bruteforce(phi, env=None, closure_limit=16, dialect=None):
    """All subsets of the closure that are locally coherent."""
    C = phi if isinstance(phi, Closure) else fl_closure(phi, env, dialect=dialect)
    n = len(C)
    if n > closure_limit:
        raise BudgetExceeded("closure has %d members, limit %d" % (n, closure_limit))
    out = []
    for bits in itertools.product((False, True), repeat=n):
        def holds(f):
            i, pos = C.lit(f)
            return bits[i] == pos
        good = True
        for i, g in enumerate(C.members):
            kind = C.kind[i]
            if kind == "top":
                good = bits[i]
            elif kind == "neg":
                good = bits[i] != holds(g.body)
            elif kind == "and":
                good = bits[i] == (holds(g.left) and holds(g.right))
            elif kind == "derived":
                good = bits[i] == holds(C.defn[i])
            if not good:
                break
        if good:
            out.append(frozenset(g for i, g in enumerate(C.members) if bits[i]))
    return out


def eliminate_explicit(C, atoms):
    """Plain set-based elimination over an explicit atom list."""
    atoms = list(atoms)

    def holds(f, A):
        return (f.body not in A) if isinstance(f, Neg) else (f in A)

    bases = dict(C.base_action)
    actions = set(bases.values())
    # for atom A and action a: the a-diamonds A asserts, and the a-bodies A satisfies
    claims = {(a, A): frozenset(i for i, b in bases.items() if b == a and C.members[i] in A)
              for a in actions for A in atoms}
    bodies = {(a, B): frozenset(i for i, b in bases.items() if b == a and holds(C.members[i].body, B))
              for a in actions for B in atoms}

    def successors(alive):
        cache = {}

        def step(a, A, pool):
            if a == END:
                return [A] if A in pool else []
            key = (a, A)
            if key not in cache:
                cache[key] = [B for B in pool if bodies.get((a, B), frozenset())
                              <= claims.get((a, A), frozenset())]
            return cache[key]
        return step

    alive = set(atoms)
    while True:
        step = successors(alive)
        keep = set()
        for A in alive:
            ok = True
            for i, a in bases.items():
                g = C.members[i]
                if g in A and not any(holds(g.body, B) for B in step(a, A, alive)):
                    ok = False
                    break
            if ok:
                for i, (aut, q, body) in C.programs.items():
                    g = C.members[i]
                    if g in A and not _explicit_path(aut, q, body, A, alive, step, holds):
                        ok = False
                        break
            if ok:
                keep.add(A)
        if keep == alive:
            return alive
        alive = keep


def _explicit_path(aut, q, body, A, pool, step, holds):
    seen = set()
    todo = [(d, B) for a, d in aut.out[q] for B in step(a, A, pool)]
    while todo:
        s, B = todo.pop()
        if (s, B) in seen:
            continue
        seen.add((s, B))
        if s in aut.finals and holds(body, B):
            return True
        todo.extend((d, B2) for a, d in aut.out[s] for B2 in step(a, B, pool))
    return False


def sat_bruteforce(phi, env=None, closure_limit=16, dialect=None):
    C = fl_closure(phi, env, dialect=dialect)
    alive = eliminate_explicit(C, atoms_bruteforce(C, closure_limit=closure_limit))
    return any(phi in A if not isinstance(phi, Neg) else phi.body not in A for A in alive)


# ------------------------------------------------- exhaustive small models

def formula_alphabet(phi, env=None):
    labels = set()
    for g in formula_subterms(phi):
        if isinstance(g, Diamond):
            if isinstance(g.program, Action):
                labels.add(g.program)
            else:
                labels |= runs_of(g.program, env).alphabet()
    labels.discard(END)
    return sorted(labels, key=lambda a: a.sort_key())


def search_small_models(phi, env=None, max_worlds=3, max_bits=24, chunk=1 << 18):
    """Exhaustively look for a model with at most max_worlds worlds satisfying phi.

    Models are numbered; each code packs one successor mask per (label, world)
    and one world mask per proposition.  Returns (KripkeModel, world) or None."""
    labels = formula_alphabet(phi, env)
    props = sorted({g.name for g in formula_subterms(phi) if isinstance(g, Prop)})
    auts = {}
    for g in formula_subterms(phi):
        if isinstance(g, Diamond) and not isinstance(g.program, Action) and g.program not in auts:
            auts[g.program] = R.minimize(runs_of(g.program, env))
    dialect = formula_dialect(phi)
    for n in range(1, max_worlds + 1):
        nbits = len(labels) * n * n + len(props) * n
        if nbits > max_bits:
            raise BudgetExceeded("%d-world search needs 2^%d models" % (n, nbits))
        full = (1 << n) - 1
        total = 1 << nbits
        for lo in range(0, total, chunk):
            codes = np.arange(lo, min(total, lo + chunk), dtype=np.int64)
            rel, off = {}, 0
            for a in labels:
                rel[a] = [((codes >> (off + x * n)) & full).astype(np.uint8) for x in range(n)]
                off += n * n
            val = {}
            for p in props:
                val[p] = ((codes >> off) & full).astype(np.uint8)
                off += n
            masks = _vec_eval(phi, rel, val, auts, len(codes), n)
            hit = np.flatnonzero(masks)
            if len(hit):
                r = int(hit[0])
                return (_decode_model(int(codes[r]), n, labels, props, dialect),
                        _lowest_world(masks[r]))
    return None


def _lowest_world(mask):
    mask = int(mask)
    return (mask & -mask).bit_length() - 1


def _decode_model(code, n, labels, props, dialect):
    rels, off = {}, 0
    for a in labels:
        rels[a] = [(x, y) for x in range(n) for y in range(n) if code >> (off + x * n + y) & 1]
        off += n * n
    val = {}
    for p in props:
        val[p] = [w for w in range(n) if code >> (off + w) & 1]
        off += n
    return KripkeModel(n, rels, val, dialect)


def _vec_eval(f, rel, val, auts, B, n):
    """World masks (one uint8 per model) of the worlds satisfying f."""
    full = np.uint8((1 << n) - 1)
    none = np.zeros(B, dtype=np.uint8)

    def pre(a, S):
        if a == END:
            return S
        Rx = rel.get(a)
        if Rx is None:
            return none
        out = none.copy()
        for x in range(n):
            out |= ((Rx[x] & S) != 0).astype(np.uint8) << np.uint8(x)
        return out

    memo = {}

    def ev(g):
        if g in memo:
            return memo[g]
        if isinstance(g, Top):
            v = np.full(B, full, dtype=np.uint8)
        elif isinstance(g, Prop):
            v = val.get(g.name, none)
        elif isinstance(g, Neg):
            v = ~ev(g.body) & full
        elif isinstance(g, And):
            v = ev(g.left) & ev(g.right)
        elif isinstance(g, Diamond) and isinstance(g.program, Action):
            v = pre(g.program, ev(g.body))
        elif isinstance(g, Diamond):
            A = auts[g.program]
            target = ev(g.body)
            W = [target.copy() if q in A.finals else none.copy() for q in range(A.n)]
            while True:
                changed = False
                for s, a, d in A.edges:
                    add = pre(a, W[d]) & ~W[s]
                    if add.any():
                        W[s] |= add
                        changed = True
                if not changed:
                    break
            v = none.copy()
            for a, d in A.out[A.initial]:
                v |= pre(a, W[d])
        else:
            raise TypeError("not a formula: %r" % (g,))
        memo[g] = v
        return v

    return ev(f)
