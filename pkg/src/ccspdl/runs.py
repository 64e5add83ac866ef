"""Finite-run languages as automata, and the language algebra over them.

Composition strips a trailing END from the left word before concatenating
(identity when no END is present).  Star keeps the empty word, as the
algebra needs it; `observable` maps it back to a run (END in xccs, dropped
otherwise) before a language is read as the runs of a program.
"""

import json
from collections import deque

from .errors import InternalError, PreconditionError
from .lts import DEFAULT_BUDGET, TICK, build_lts
from .syntax import END, End, Seq, Star, Zero, parse_action, subterms


def _label_key(a):
    return a.sort_key()


class RunAutomaton:
    """Nondeterministic automaton over actions, no epsilon moves."""

    def __init__(self, n, initial, finals, edges, xccs=False):
        self.n = n
        self.initial = initial
        self.finals = frozenset(finals)
        self.edges = tuple(sorted(set(edges), key=lambda e: (e[0], _label_key(e[1]), e[2])))
        self.xccs = xccs
        self.out = [[] for _ in range(n)]
        for s, a, d in self.edges:
            self.out[s].append((a, d))

    def alphabet(self):
        return {a for _, a, _ in self.edges}

    def with_initial(self, q):
        return RunAutomaton(self.n, q, self.finals, self.edges, self.xccs)

    def is_deterministic(self):
        for row in self.out:
            labels = [a for a, _ in row]
            if len(labels) != len(set(labels)):
                return False
        return True

    def __repr__(self):
        return "<RunAutomaton %d states, %d edges>" % (self.n, len(self.edges))

    def to_json(self):
        return json.dumps({"states": self.n, "initial": self.initial,
                           "finals": sorted(self.finals), "xccs": self.xccs,
                           "edges": [[s, str(a), d] for s, a, d in self.edges]})

    @staticmethod
    def from_json(text):
        d = json.loads(text) if isinstance(text, str) else text
        return RunAutomaton(d["states"], d["initial"], d["finals"],
                            [(s, parse_action(a), t) for s, a, t in d["edges"]],
                            d.get("xccs", False))

    def to_dot(self):
        lines = ["digraph runs {", "  rankdir=LR;", "  init [shape=point];",
                 "  init -> q%d;" % self.initial]
        for q in range(self.n):
            shape = "doublecircle" if q in self.finals else "circle"
            lines.append("  q%d [shape=%s];" % (q, shape))
        for s, a, d in self.edges:
            lines.append('  q%d -> q%d [label="%s"];' % (s, d, a))
        lines.append("}")
        return "\n".join(lines)


# ------------------------------------------------------------ constructors

def empty(xccs=False):
    return RunAutomaton(1, 0, (), (), xccs)


def epsilon(xccs=False):
    return RunAutomaton(1, 0, (0,), (), xccs)


def from_words(words, xccs=False):
    """Automaton accepting exactly the given words (strings are parsed as actions)."""
    edges, finals = [], set()
    trie = {(): 0}
    for w in words:
        w = tuple(parse_action(a) if isinstance(a, str) else a for a in w)
        for i in range(len(w)):
            key = w[:i + 1]
            if key not in trie:
                trie[key] = len(trie)
                edges.append((trie[w[:i]], w[i], trie[key]))
        finals.add(trie[w])
    return RunAutomaton(len(trie), 0, finals, edges, xccs)


def is_xccs_term(P):
    return any(isinstance(t, (Zero, End, Seq, Star)) for t in subterms(P))


def runs_of(P, env=None, state_budget=DEFAULT_BUDGET, lts=None):
    """R_f(P): words w with P =w=> tick, read off the reachable LTS."""
    if lts is None:
        lts = build_lts(P, env, state_budget)
    tick = lts.tick
    finals = () if tick is None else (tick,)
    return RunAutomaton(len(lts.states), 0, finals, lts.edges, is_xccs_term(P))


# -------------------------------------------------------------- structure

def _reachable(n, starts, succ):
    seen = set(starts)
    todo = list(starts)
    while todo:
        q = todo.pop()
        for r in succ[q]:
            if r not in seen:
                seen.add(r)
                todo.append(r)
    return seen


def trim(A):
    """Drop states that are unreachable or cannot reach a final state."""
    fwd = [[d for _, d in row] for row in A.out]
    bwd = [[] for _ in range(A.n)]
    for s, _, d in A.edges:
        bwd[d].append(s)
    live = _reachable(A.n, [A.initial], fwd) & _reachable(A.n, A.finals, bwd)
    if A.initial not in live:
        return empty(A.xccs)
    order = sorted(live)
    order.remove(A.initial)
    order.insert(0, A.initial)
    ren = {q: i for i, q in enumerate(order)}
    return RunAutomaton(len(order), 0, [ren[q] for q in A.finals if q in ren],
                        [(ren[s], a, ren[d]) for s, a, d in A.edges if s in ren and d in ren],
                        A.xccs)


def _offset(A, k):
    return [(s + k, a, d + k) for s, a, d in A.edges]


def union(A, B):
    x = A.xccs or B.xccs
    oa, ob = 1, 1 + A.n
    edges = _offset(A, oa) + _offset(B, ob)
    edges += [(0, a, d + oa) for a, d in A.out[A.initial]]
    edges += [(0, a, d + ob) for a, d in B.out[B.initial]]
    finals = [f + oa for f in A.finals] + [f + ob for f in B.finals]
    if A.initial in A.finals or B.initial in B.finals:
        finals.append(0)
    return normalize(RunAutomaton(1 + A.n + B.n, 0, finals, edges, x))


def concat(A, B):
    """Plain concatenation, no END stripping."""
    x = A.xccs or B.xccs
    ob = A.n
    binit = B.initial + ob
    edges = list(A.edges) + _offset(B, ob)
    for s, a, d in A.edges:
        if d in A.finals:
            edges.append((s, a, binit))
    finals = [f + ob for f in B.finals]
    if B.initial in B.finals:
        finals += list(A.finals)
    if A.initial in A.finals:
        edges += [(A.initial, a, d + ob) for a, d in B.out[B.initial]]
    return RunAutomaton(A.n + B.n, A.initial, finals, edges, x)


def natural(A):
    """Language {w : w in L or w.END in L}; strips one trailing END."""
    finals = set(A.finals)
    for s, a, d in A.edges:
        if a == END and d in A.finals:
            finals.add(s)
    return RunAutomaton(A.n, A.initial, finals, A.edges, A.xccs)


def compose(A, B):
    """{nat(a).b : a in L(A), b in L(B)}."""
    return normalize(concat(natural(A), B))


def _plus_loop(A):
    """Kleene star of A without any END handling."""
    edges = _offset(A, 1)
    edges += [(0, a, d + 1) for a, d in A.out[A.initial]]
    for s, a, d in A.edges:
        if d in A.finals:
            edges.append((s + 1, a, 0))
            if s == A.initial:
                edges.append((0, a, 0))
    finals = [0] + [f + 1 for f in A.finals]
    return RunAutomaton(A.n + 1, 0, finals, edges, A.xccs)


def star(A):
    """Union of the n-fold compositions of A, n >= 0 (accepts the empty word)."""
    if END in A.alphabet():
        body = concat(_plus_loop(natural(A)), A)
        return union(epsilon(A.xccs), body)
    return normalize(_plus_loop(A))


def normalize(A):
    """Keep only words in which END can occur solely as the last symbol, then trim."""
    if END not in A.alphabet():
        return trim(A)
    # product with "END not yet seen" / "END seen"
    idx = {}
    edges = []
    finals = []

    def sid(q, flag):
        key = (q, flag)
        if key not in idx:
            idx[key] = len(idx)
            if q in A.finals:
                finals.append(idx[key])
        return idx[key]

    start = sid(A.initial, 0)
    todo = [(A.initial, 0)]
    seen = {(A.initial, 0)}
    while todo:
        q, flag = todo.pop()
        if flag:
            continue
        for a, d in A.out[q]:
            nxt = (d, 1 if a == END else 0)
            edges.append((sid(q, flag), a, sid(*nxt)))
            if nxt not in seen:
                seen.add(nxt)
                todo.append(nxt)
    return trim(RunAutomaton(len(idx), start, finals, edges, A.xccs))


def accepts_empty(A):
    return A.initial in A.finals


def observable(A):
    """Re-impose that the empty word is not a run."""
    if not accepts_empty(A):
        return A
    if A.xccs:
        return union(drop_empty(A), from_words([[END]], True))
    return drop_empty(A)


def drop_empty(A):
    if not accepts_empty(A):
        return A
    edges = _offset(A, 1) + [(0, a, d + 1) for a, d in A.out[A.initial]]
    return trim(RunAutomaton(A.n + 1, 0, [f + 1 for f in A.finals], edges, A.xccs))


def intersect(A, B):
    idx = {(A.initial, B.initial): 0}
    edges, finals = [], []
    todo = [(A.initial, B.initial)]
    while todo:
        p, q = todo.pop()
        i = idx[(p, q)]
        if p in A.finals and q in B.finals:
            finals.append(i)
        bq = {}
        for b, d in B.out[q]:
            bq.setdefault(b, []).append(d)
        for a, d in A.out[p]:
            for e in bq.get(a, ()):
                key = (d, e)
                if key not in idx:
                    idx[key] = len(idx)
                    todo.append(key)
                edges.append((i, a, idx[key]))
    return trim(RunAutomaton(len(idx), 0, finals, edges, A.xccs or B.xccs))


def determinize(A):
    start = frozenset([A.initial])
    idx = {start: 0}
    edges, finals = [], []
    todo = [start]
    while todo:
        S = todo.pop()
        i = idx[S]
        if S & A.finals:
            finals.append(i)
        moves = {}
        for q in S:
            for a, d in A.out[q]:
                moves.setdefault(a, set()).add(d)
        for a, T in moves.items():
            T = frozenset(T)
            if T not in idx:
                idx[T] = len(idx)
                todo.append(T)
            edges.append((i, a, idx[T]))
    return RunAutomaton(len(idx), 0, finals, edges, A.xccs)


def complete(D, alphabet):
    """Total DFA over `alphabet` (adds a sink when needed)."""
    alphabet = set(alphabet) | D.alphabet()
    sink = D.n
    edges = list(D.edges)
    used = False
    for q in range(D.n):
        have = {a for a, _ in D.out[q]}
        for a in alphabet - have:
            edges.append((q, a, sink))
            used = True
    if not used:
        return D
    edges += [(sink, a, sink) for a in alphabet]
    return RunAutomaton(D.n + 1, D.initial, D.finals, edges, D.xccs)


def complement(A, alphabet=()):
    alphabet = set(alphabet) | A.alphabet()
    D = complete(determinize(A), alphabet)
    return trim(RunAutomaton(D.n, D.initial, set(range(D.n)) - D.finals, D.edges, A.xccs))


def difference(A, B, alphabet=()):
    alphabet = set(alphabet) | A.alphabet() | B.alphabet()
    return intersect(A, complement(B, alphabet))


def minimize(A):
    """Minimal trimmed DFA, states numbered canonically by BFS."""
    D = trim(determinize(trim(A)))
    if not D.finals:
        return empty(A.xccs)
    labels = sorted(D.alphabet(), key=_label_key)
    delta = [dict(row) for row in D.out]
    block = [1 if q in D.finals else 0 for q in range(D.n)]
    nblocks = len(set(block))
    while True:
        sig = {}
        new = []
        for q in range(D.n):
            key = (block[q],) + tuple(block[delta[q][a]] if a in delta[q] else -1 for a in labels)
            new.append(sig.setdefault(key, len(sig)))
        if len(sig) == nblocks:
            break
        block, nblocks = new, len(sig)
    # canonical numbering
    order = {block[D.initial]: 0}
    queue = deque([D.initial])
    rep = {block[D.initial]: D.initial}
    while queue:
        q = queue.popleft()
        for a in labels:
            if a in delta[q]:
                b = block[delta[q][a]]
                if b not in order:
                    order[b] = len(order)
                    rep[b] = delta[q][a]
                    queue.append(delta[q][a])
    edges = set()
    for b, q in rep.items():
        for a in labels:
            if a in delta[q]:
                edges.add((order[b], a, order[block[delta[q][a]]]))
    finals = {order[block[q]] for q in D.finals}
    return RunAutomaton(len(order), 0, finals, edges, A.xccs)


def canonical(A):
    M = minimize(A)
    if not M.finals:
        return ("empty",)
    return (M.n, tuple(sorted(M.finals)), tuple((s, str(a), d) for s, a, d in M.edges))


def equiv(A, B):
    return canonical(A) == canonical(B)


def is_empty(A):
    return not trim(A).finals


def is_finite(A):
    """True iff L(A) is a finite set of words."""
    T = trim(A)
    color = [0] * T.n
    for root in range(T.n):
        if color[root]:
            continue
        stack = [(root, iter(T.out[root]))]
        color[root] = 1
        while stack:
            q, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                color[q] = 2
                stack.pop()
                continue
            d = nxt[1]
            if color[d] == 1:
                return False
            if color[d] == 0:
                color[d] = 1
                stack.append((d, iter(T.out[d])))
    return True


def member(word, A):
    word = [parse_action(a) if isinstance(a, str) else a for a in word]
    cur = {A.initial}
    for a in word:
        cur = {d for q in cur for b, d in A.out[q] if b == a}
        if not cur:
            return False
    return bool(cur & A.finals)


def enumerate_words(A, max_len):
    """Accepted words of length <= max_len, shortest first, then lexicographic."""
    D = trim(determinize(trim(A)))
    if not D.finals:
        return []
    out = []
    level = [((), D.initial)]
    for k in range(max_len + 1):
        level.sort(key=lambda x: [_label_key(a) for a in x[0]])
        out.extend(w for w, q in level if q in D.finals)
        if k == max_len:
            break
        level = [(w + (a,), d) for w, q in level for a, d in D.out[q]]
        if not level:
            break
    return out


def words_of(A, max_len=None):
    """All words of a finite language (or up to max_len)."""
    if max_len is None:
        if not is_finite(A):
            raise PreconditionError("language is infinite")
        max_len = trim(A).n
    return enumerate_words(A, max_len)


def arden(A, B):
    """Unique solution X of X = A.X + B, namely A*.B, self-checked."""
    if accepts_empty(A):
        raise PreconditionError("Arden's rule needs the empty word outside L(A)")
    if member([END], A):
        raise PreconditionError("Arden's rule needs END outside L(A)")
    X = compose(star(A), B)
    if not equiv(X, union(compose(A, X), B)):
        raise InternalError("arden solution failed its fixed-point check")
    return X


def show_word(w):
    return ".".join(str(a) for a in w) if w else "ε"
