"""Strong bisimilarity by partition refinement."""

from dataclasses import dataclass, field

from .lts import DEFAULT_BUDGET, TICK, build_lts


@dataclass
class BisimResult:
    bisimilar: bool
    relation: set = field(default_factory=set)   # pairs (state of P, state of Q)
    trace: tuple = ()                            # actions leading to the difference
    reason: str = ""

    def __bool__(self):
        return self.bisimilar


class _Joint:
    """Process states of two LTSs side by side; tick is not a state."""

    def __init__(self, l1, l2):
        self.ltss = (l1, l2)
        self.ids = []
        self.local = {}
        for k, l in enumerate((l1, l2)):
            for i, s in enumerate(l.states):
                if s is not TICK:
                    self.local[(k, i)] = len(self.ids)
                    self.ids.append((k, i))
        n = len(self.ids)
        self.succ = [[] for _ in range(n)]
        self.tag = [frozenset()] * n
        for g, (k, i) in enumerate(self.ids):
            l = self.ltss[k]
            done = set()
            for a, d in l.out[i]:
                if l.states[d] is TICK:
                    done.add(a)
                else:
                    self.succ[g].append((a, self.local[(k, d)]))
            self.tag[g] = frozenset(done)


def _refine(J):
    """Return the list of partitions, coarsest first; the last is stable."""
    tags = {}
    block = [tags.setdefault(t, len(tags)) for t in J.tag]
    history = [block]
    while True:
        sig = {}
        new = []
        for g in range(len(J.ids)):
            key = (block[g], frozenset((a, block[d]) for a, d in J.succ[g]))
            new.append(sig.setdefault(key, len(sig)))
        if len(sig) == len(set(block)):
            return history
        block = new
        history.append(block)


def _explain(J, history, g, h):
    """A trace from the pair (g, h) to the first observable difference."""
    trace = []
    while True:
        if J.tag[g] != J.tag[h]:
            diff = sorted(J.tag[g] ^ J.tag[h], key=lambda a: a.sort_key())
            return tuple(trace), "one side can finish with %s and the other cannot" % diff[0]
        k = next(k for k in range(len(history)) if history[k][g] != history[k][h])
        prev = history[k - 1]
        found = None
        for x, y in ((g, h), (h, g)):
            for a, d in J.succ[x]:
                matches = [e for b, e in J.succ[y] if b == a]
                if all(prev[e] != prev[d] for e in matches):
                    found = (a, d, matches, x == g)
                    break
            if found:
                break
        a, d, matches, left = found
        trace.append(a)
        if not matches:
            side = "first" if left else "second"
            return tuple(trace), "only the %s process can do %s" % (side, a)
        e = matches[0]
        g, h = (d, e) if left else (e, d)


def bisimilar(P, Q, env=None, state_budget=DEFAULT_BUDGET):
    l1 = build_lts(P, env, state_budget)
    l2 = build_lts(Q, env, state_budget)
    return bisimilar_lts(l1, l2)


def bisimilar_lts(l1, l2):
    J = _Joint(l1, l2)
    history = _refine(J)
    block = history[-1]
    g, h = J.local[(0, 0)], J.local[(1, 0)]
    if block[g] == block[h]:
        rel = set()
        by_block = {}
        for x, (k, i) in enumerate(J.ids):
            by_block.setdefault(block[x], ([], []))[k].append(i)
        for left, right in by_block.values():
            rel.update((i, j) for i in left for j in right)
        return BisimResult(True, rel)
    trace, reason = _explain(J, history, g, h)
    return BisimResult(False, set(), trace, reason)


def is_bisimulation(rel, l1, l2):
    """Re-check the three transfer clauses for a relation between two LTSs."""
    def moves(l, i):
        return [(a, d) for a, d in l.out[i] if l.states[d] is not TICK]

    def ends(l, i):
        return {a for a, d in l.out[i] if l.states[d] is TICK}

    for i, j in rel:
        if ends(l1, i) != ends(l2, j):
            return False
        for a, d in moves(l1, i):
            if not any(b == a and (d, e) in rel for b, e in moves(l2, j)):
                return False
        for b, e in moves(l2, j):
            if not any(a == b and (d, e) in rel for a, d in moves(l1, i)):
                return False
    return True
