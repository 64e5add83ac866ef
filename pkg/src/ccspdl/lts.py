"""Single-step transitions and reachable state spaces."""

import json
import logging
from collections import deque

from .errors import BudgetExceeded
from .syntax import (END, TAU, Atom, Choice, End, Par, Prefix, PrefixConst,
                     Restrict, Seq, Star, Zero, show_process)

log = logging.getLogger(__name__)

DEFAULT_BUDGET = 100000


class Tick:
    """The successful-termination marker."""
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "TICK"

    def __str__(self):
        return "√"

    def __reduce__(self):
        return (Tick, ())


TICK = Tick()


def par(p, q):
    """Parallel composition with the conventions P|tick = P and tick|tick = tick."""
    if p is TICK:
        return q
    if q is TICK:
        return p
    return Par(p, q)


def restrict(p, names):
    return TICK if p is TICK else Restrict(p, names)


def step(P, env=None, cache=None):
    """All (action, successor) pairs derivable for P; successors may be TICK."""
    if cache is not None:
        hit = cache.get(P)
        if hit is not None:
            return hit
    out = _step(P, env, cache)
    if cache is not None:
        cache[P] = out
    return out


def _step(P, env, cache):
    if isinstance(P, Atom):
        return frozenset([(P.action, TICK)])
    if isinstance(P, Prefix):
        return frozenset([(P.action, P.body)])
    if isinstance(P, PrefixConst):
        return frozenset([(P.action, env.body(P.const))])
    if isinstance(P, Zero):
        return frozenset()
    if isinstance(P, End):
        return frozenset([(END, TICK)])
    if isinstance(P, Choice):
        return step(P.left, env, cache) | step(P.right, env, cache)
    if isinstance(P, Seq):
        out = set()
        right = None
        for a, p1 in step(P.left, env, cache):
            if a == END:
                if right is None:
                    right = step(P.right, env, cache)
                out.update(right)
            else:
                out.add((a, Seq(p1, P.right)))
        return frozenset(out)
    if isinstance(P, Par):
        left = step(P.left, env, cache)
        right = step(P.right, env, cache)
        out = set()
        for a, p1 in left:
            if a != END:
                out.add((a, par(p1, P.right)))
        for b, q1 in right:
            if b != END:
                out.add((b, par(P.left, q1)))
        for a, p1 in left:
            if not a.is_visible:
                continue
            for b, q1 in right:
                if b == a.complement():
                    out.add((TAU, par(p1, q1)))
        if (END, TICK) in left and (END, TICK) in right:
            out.add((END, TICK))
        return frozenset(out)
    if isinstance(P, Star):
        out = {(END, TICK)}
        for a, p1 in step(P.body, env, cache):
            if a != END:
                out.add((a, Seq(p1, P)))
        return frozenset(out)
    if isinstance(P, Restrict):
        out = set()
        for a, p1 in step(P.body, env, cache):
            if a.is_visible and a.name in P.names:
                continue
            out.add((a, restrict(p1, P.names)))
        return frozenset(out)
    raise TypeError("not a process term: %r" % (P,))


def _succ_key(pair):
    a, s = pair
    return (a.sort_key(), "" if s is TICK else show_process(s))


def sorted_steps(P, env=None, cache=None):
    return sorted(step(P, env, cache), key=_succ_key)


class Lts:
    """Reachable transition system; state 0 is the root, TICK may be a state."""

    def __init__(self, states, edges):
        self.states = states
        self.index = {s: i for i, s in enumerate(states)}
        self.edges = edges
        self.out = [[] for _ in states]
        for src, a, dst in edges:
            self.out[src].append((a, dst))

    root = 0

    @property
    def tick(self):
        return self.index.get(TICK)

    def __len__(self):
        return len(self.states)

    def labels(self):
        return {a for _, a, _ in self.edges}

    def state_name(self, i):
        s = self.states[i]
        return str(s) if s is TICK else show_process(s)

    def to_json(self):
        return json.dumps({
            "root": 0,
            "states": [{"id": i, "term": self.state_name(i), "tick": s is TICK}
                       for i, s in enumerate(self.states)],
            "edges": [[s, str(a), d] for s, a, d in self.edges],
        }, indent=2)

    def to_dot(self):
        lines = ["digraph lts {", "  rankdir=LR;"]
        for i, s in enumerate(self.states):
            shape = "doublecircle" if s is TICK else "ellipse"
            lines.append('  s%d [label=%s, shape=%s];' % (i, json.dumps(self.state_name(i)), shape))
        for s, a, d in self.edges:
            lines.append('  s%d -> s%d [label=%s];' % (s, d, json.dumps(str(a))))
        lines.append("}")
        return "\n".join(lines)

    def __str__(self):
        out = []
        for i in range(len(self.states)):
            out.append("%d: %s" % (i, self.state_name(i)))
            for a, d in self.out[i]:
                out.append("    --%s--> %d" % (a, d))
        return "\n".join(out)


def build_lts(P, env=None, state_budget=DEFAULT_BUDGET):
    """Breadth-first exploration from P; state ids follow discovery order."""
    cache = {}
    states = [P]
    index = {P: 0}
    edges = []
    queue = deque([0])
    while queue:
        i = queue.popleft()
        s = states[i]
        if s is TICK:
            continue
        for a, t in sorted_steps(s, env, cache):
            j = index.get(t)
            if j is None:
                if len(states) >= state_budget:
                    raise BudgetExceeded("more than %d reachable states from %s"
                                         % (state_budget, show_process(P)))
                j = len(states)
                states.append(t)
                index[t] = j
                queue.append(j)
            edges.append((i, a, j))
    log.debug("built lts with %d states, %d edges", len(states), len(edges))
    return Lts(states, edges)


def is_knot(P, env=None):
    if env is None or not env.defs:
        return False
    return _is_knot(P, env.recursive_bodies())


def _is_knot(P, bodies):
    if P in bodies:
        return True
    if isinstance(P, Par):
        return _is_knot(P.left, bodies) or _is_knot(P.right, bodies)
    return False
