"""Kripke models and the satisfaction relation."""

import json
import random
from dataclasses import dataclass, field

from .errors import DialectError, PreconditionError
from .runs import RunAutomaton, runs_of
from .syntax import (END, TAU, Action, And, Diamond, Formula, Neg, Prop, Top,
                     check_formula_dialect, parse_action, show_formula,
                     show_process)


@dataclass(frozen=True, eq=True)
class AutDiamond(Formula):
    """<A from state q> body, for a run automaton A; used by the decision procedure.

    Two nodes are equal only if they refer to the very same automaton object."""
    source: object
    aut: RunAutomaton = field(compare=False, hash=False)
    state: int = 0
    body: Formula = None
    aut_id: int = 0

    @staticmethod
    def of(source, aut, state, body):
        return AutDiamond(source, aut, state, body, id(aut))

    def __str__(self):
        src = self.source if isinstance(self.source, str) else show_process(self.source)
        return "<%s@%d>%s" % (src, self.state, show_formula(self.body, 4))

    __repr__ = __str__


class KripkeModel:
    """Worlds 0..n-1 (with display names), one relation per action, a valuation."""

    def __init__(self, worlds, relations=None, valuation=None, dialect="xccs",
                 tau_invisible=False):
        if isinstance(worlds, int):
            worlds = ["w%d" % i for i in range(worlds)]
        self.worlds = list(worlds)
        n = len(self.worlds)
        if n == 0:
            raise PreconditionError("a model needs at least one world")
        self.dialect = dialect
        self.tau_invisible = tau_invisible
        ident = frozenset((w, w) for w in range(n))
        self.relations = {}
        for a, pairs in (relations or {}).items():
            a = parse_action(a) if isinstance(a, str) else a
            pairs = frozenset((int(x), int(y)) for x, y in pairs)
            for x, y in pairs:
                if not (0 <= x < n and 0 <= y < n):
                    raise PreconditionError("relation %s mentions world outside 0..%d" % (a, n - 1))
            if a == END:
                if pairs != ident:
                    raise PreconditionError("the END relation must be the identity")
                continue
            if a == TAU and tau_invisible:
                continue
            self.relations[a] = pairs
        self.valuation = {}
        for p, ws in (valuation or {}).items():
            ws = frozenset(int(w) for w in ws)
            if any(not 0 <= w < n for w in ws):
                raise PreconditionError("valuation of %s mentions an unknown world" % p)
            self.valuation[p] = ws
        self._ident = ident
        self._pred = {}

    def __len__(self):
        return len(self.worlds)

    def rel(self, a):
        if a == END or (a == TAU and self.tau_invisible):
            return self._ident
        return self.relations.get(a, frozenset())

    def pred(self, a):
        """Map world -> list of predecessors under R_a."""
        p = self._pred.get(a)
        if p is None:
            p = {}
            for x, y in self.rel(a):
                p.setdefault(y, []).append(x)
            self._pred[a] = p
        return p

    def world(self, w):
        if isinstance(w, int):
            if not 0 <= w < len(self.worlds):
                raise PreconditionError("no world %d" % w)
            return w
        if w in self.worlds:
            return self.worlds.index(w)
        if str(w).isdigit():
            return self.world(int(w))
        raise PreconditionError("no world named %s" % w)

    def to_dict(self):
        rels = {str(a): sorted([list(p) for p in pairs])
                for a, pairs in sorted(self.relations.items(), key=lambda kv: kv[0].sort_key())}
        return {"worlds": list(self.worlds), "relations": rels,
                "valuation": {p: sorted(ws) for p, ws in sorted(self.valuation.items())}}

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    @staticmethod
    def from_json(text, dialect="xccs", tau_invisible=False):
        d = json.loads(text) if isinstance(text, str) else text
        return KripkeModel(d["worlds"], d.get("relations", {}), d.get("valuation", {}),
                           dialect, tau_invisible)

    def __repr__(self):
        return "<KripkeModel %d worlds, %d relations>" % (len(self.worlds), len(self.relations))


def eval_diamond(M, A, target):
    """Worlds with a path of length >= 1 to `target` whose labels spell a word of A."""
    target = set(target)
    good = set()
    todo = []
    for f in A.finals:
        for t in target:
            good.add((f, t))
            todo.append((f, t))
    back = [[] for _ in range(A.n)]
    for s, a, d in A.edges:
        back[d].append((s, a))
    while todo:
        q, w = todo.pop()
        for s, a in back[q]:
            for v in M.pred(a).get(w, ()):
                if (s, v) not in good:
                    good.add((s, v))
                    todo.append((s, v))
    out = set()
    for a, d in A.out[A.initial]:
        pred = M.pred(a)
        for q, w in good:
            if q == d:
                out.update(pred.get(w, ()))
    return frozenset(out)


class _Checker:
    def __init__(self, M, env):
        self.M = M
        self.env = env
        self.memo = {}
        self.auts = {}

    def automaton(self, program):
        A = self.auts.get(program)
        if A is None:
            A = runs_of(program, self.env)
            self.auts[program] = A
        return A

    def sat(self, f):
        hit = self.memo.get(f)
        if hit is not None:
            return hit
        M = self.M
        if isinstance(f, Prop):
            out = M.valuation.get(f.name, frozenset())
        elif isinstance(f, Top):
            out = frozenset(range(len(M)))
        elif isinstance(f, Neg):
            out = frozenset(range(len(M))) - self.sat(f.body)
        elif isinstance(f, And):
            out = self.sat(f.left) & self.sat(f.right)
        elif isinstance(f, Diamond) and isinstance(f.program, Action):
            body = self.sat(f.body)
            out = frozenset(x for x, y in M.rel(f.program) if y in body)
        elif isinstance(f, Diamond):
            out = eval_diamond(M, self.automaton(f.program), self.sat(f.body))
        elif isinstance(f, AutDiamond):
            out = eval_diamond(M, f.aut.with_initial(f.state), self.sat(f.body))
        else:
            raise TypeError("not a formula: %r" % (f,))
        self.memo[f] = out
        return out


def _check_dialect(M, f):
    try:
        check_formula_dialect(f, M.dialect)
    except DialectError as e:
        raise DialectError("formula does not fit a %s model: %s" % (M.dialect, e)) from None


def sat_set(M, f, env=None):
    _check_dialect(M, f)
    return _Checker(M, env).sat(f)


def check(M, w, f, env=None):
    return M.world(w) in sat_set(M, f, env)


def valid_in_model(M, f, env=None):
    return len(sat_set(M, f, env)) == len(M)


def path_relation(M, A):
    """Pairs (v, w) joined by a path of length >= 1 spelling a word of A."""
    out = set()
    for w in range(len(M)):
        for v in eval_diamond(M, A, {w}):
            out.add((v, w))
    return out


def random_model(n_worlds, actions, props=(), rng=None, density=0.3, dialect="xccs",
                 tau_invisible=False):
    rng = rng if rng is not None else random.Random()
    n = n_worlds
    rels = {}
    for a in actions:
        a = parse_action(a) if isinstance(a, str) else a
        if a == END:
            continue
        rels[a] = [(x, y) for x in range(n) for y in range(n) if rng.random() < density]
    val = {p: [w for w in range(n) if rng.random() < 0.5] for p in props}
    return KripkeModel(n, rels, val, dialect, tau_invisible)
