"""Actions, process terms, constant environments and formulas.

Three process dialects share one term representation:

    sccs  atoms, prefix, choice, parallel
    ccs   sccs plus prefixing into a constant (a.A) and restriction
    xccs  0, END, prefix, ;, +, |, *, restriction (no atoms)

Concrete syntax: ``~a`` is an output, ``tau`` the silent action, ``END``
(or ``end``) explicit termination, ``0`` deadlock, ``P*`` iteration and
``P\\{a,b}`` restriction.  Names start with a lowercase letter or a digit
(``1e`` is a name), constants with an uppercase letter.  Prefix binds
tightest, then ``;``, then ``|``, then ``+``.
"""

import re
from dataclasses import dataclass

from .errors import DefinitionError, DialectError, ParseError

DIALECTS = ("sccs", "ccs", "xccs")

_KIND_ORDER = {"in": 0, "out": 1, "tau": 2, "end": 3}


@dataclass(frozen=True)
class Action:
    kind: str
    name: str = ""

    @staticmethod
    def inp(name):
        return Action("in", name)

    @staticmethod
    def out(name):
        return Action("out", name)

    def complement(self):
        if self.kind == "in":
            return Action("out", self.name)
        if self.kind == "out":
            return Action("in", self.name)
        return self

    @property
    def is_visible(self):
        return self.kind in ("in", "out")

    def sort_key(self):
        return (self.name, _KIND_ORDER[self.kind])

    def __str__(self):
        if self.kind == "in":
            return self.name
        if self.kind == "out":
            return "~" + self.name
        return "tau" if self.kind == "tau" else "END"

    def __repr__(self):
        return "Action(%s)" % self


TAU = Action("tau")
END = Action("end")


def parse_action(text):
    text = text.strip()
    if text == "tau":
        return TAU
    if text in ("END", "end"):
        return END
    if text.startswith("~"):
        return Action.out(text[1:].strip())
    return Action.inp(text)


# ---------------------------------------------------------------- terms

class Term:
    __slots__ = ()

    def __str__(self):
        return show_process(self)


@dataclass(frozen=True, repr=False)
class Atom(Term):
    action: Action


@dataclass(frozen=True, repr=False)
class Zero(Term):
    pass


@dataclass(frozen=True, repr=False)
class End(Term):
    pass


@dataclass(frozen=True, repr=False)
class Prefix(Term):
    action: Action
    body: Term


@dataclass(frozen=True, repr=False)
class PrefixConst(Term):
    action: Action
    const: str


@dataclass(frozen=True, repr=False)
class Seq(Term):
    left: Term
    right: Term


@dataclass(frozen=True, repr=False)
class Choice(Term):
    left: Term
    right: Term


@dataclass(frozen=True, repr=False)
class Par(Term):
    left: Term
    right: Term


@dataclass(frozen=True, repr=False)
class Star(Term):
    body: Term


@dataclass(frozen=True, repr=False)
class Restrict(Term):
    body: Term
    names: frozenset


for _cls in (Atom, Zero, End, Prefix, PrefixConst, Seq, Choice, Par, Star, Restrict):
    _cls.__repr__ = lambda self: "<%s %s>" % (type(self).__name__, show_process(self))

_ALLOWED = {
    "sccs": (Atom, Prefix, Choice, Par),
    "ccs": (Atom, Prefix, PrefixConst, Choice, Par, Restrict),
    "xccs": (Zero, End, Prefix, Seq, Choice, Par, Star, Restrict),
}


def subterms(P):
    """Yield P and all its sub-terms, pre-order."""
    stack = [P]
    while stack:
        t = stack.pop()
        yield t
        if isinstance(t, (Seq, Choice, Par)):
            stack.append(t.right)
            stack.append(t.left)
        elif isinstance(t, (Prefix, Star, Restrict)):
            stack.append(t.body)


def actions_of(P):
    out = set()
    for t in subterms(P):
        if isinstance(t, (Atom, Prefix, PrefixConst)):
            out.add(t.action)
    return out


def check_dialect(P, dialect):
    """Raise DialectError unless every sub-term is legal in `dialect`."""
    if dialect not in _ALLOWED:
        raise DialectError("unknown dialect %r" % dialect)
    allowed = _ALLOWED[dialect]
    for t in subterms(P):
        if not isinstance(t, allowed):
            raise DialectError("%s is not allowed in %s: %s"
                               % (type(t).__name__, dialect, show_process(t)))
        if isinstance(t, (Atom, Prefix, PrefixConst)) and t.action.kind == "end":
            raise DialectError("END cannot be used as a prefix action")
        if isinstance(t, Restrict):
            for n in t.names:
                if not _is_name(n):
                    raise DialectError("restriction set may only hold names: %r" % n)


def free_names(P, scoped=False):
    """Names occurring in input or output actions of P.

    With scoped=True, names bound by an enclosing restriction are dropped.
    """
    if not scoped:
        return {a.name for a in actions_of(P) if a.is_visible}

    def go(t):
        if isinstance(t, (Atom, PrefixConst)):
            return {t.action.name} if t.action.is_visible else set()
        if isinstance(t, Prefix):
            s = go(t.body)
            if t.action.is_visible:
                s.add(t.action.name)
            return s
        if isinstance(t, (Seq, Choice, Par)):
            return go(t.left) | go(t.right)
        if isinstance(t, Star):
            return go(t.body)
        if isinstance(t, Restrict):
            return go(t.body) - t.names
        return set()
    return go(P)


def constants_of(P):
    return {t.const for t in subterms(P) if isinstance(t, PrefixConst)}


def has_par(P):
    return any(isinstance(t, Par) for t in subterms(P))


def has_restrict(P):
    return any(isinstance(t, Restrict) for t in subterms(P))


def choice_of(terms):
    """Left-nested sum of a non-empty list of terms."""
    terms = list(terms)
    out = terms[0]
    for t in terms[1:]:
        out = Choice(out, t)
    return out


def summands(P):
    if isinstance(P, Choice):
        return summands(P.left) + summands(P.right)
    return [P]


def prefix_chain(word, tail):
    """word = a1..an; tail is a Term, a constant name, or None (ends in an atom)."""
    word = list(word)
    if tail is None:
        out = Atom(word[-1])
        word = word[:-1]
    elif isinstance(tail, str):
        out = PrefixConst(word[-1], tail)
        word = word[:-1]
    else:
        out = tail
    for a in reversed(word):
        out = Prefix(a, out)
    return out


# ---------------------------------------------------------- environments

@dataclass(frozen=True)
class Classification:
    kind: str                 # "nonrecursive" or "recursive"
    loops: tuple = ()         # action sequences of the a1..an.A summands
    tail: object = None       # Term or None


class Environment:
    """Defining equations A = P_A for constants."""

    def __init__(self, defs=None):
        self.defs = dict(defs or {})
        self._classes = None

    def __contains__(self, name):
        return name in self.defs

    def body(self, name):
        try:
            return self.defs[name]
        except KeyError:
            raise DefinitionError("unknown constant %s" % name) from None

    def define(self, name, body):
        self.defs[name] = body
        self._classes = None

    def copy(self):
        return Environment(self.defs)

    def cons(self, P):
        """Cons(P): constants reachable from P through defining equations."""
        seen = set()
        todo = list(constants_of(P))
        while todo:
            c = todo.pop()
            if c in seen:
                continue
            seen.add(c)
            todo.extend(constants_of(self.body(c)))
        return seen

    def classification(self):
        if self._classes is None:
            self._classes = validate_environment(self)
        return self._classes

    def recursive_bodies(self):
        cls = self.classification()
        return {self.defs[c] for c, k in cls.items() if k.kind == "recursive"}

    def fresh_constant(self, base="Z"):
        i = 0
        while "%s%d" % (base, i) in self.defs:
            i += 1
        return "%s%d" % (base, i)

    def __str__(self):
        return "\n".join("def %s = %s" % (k, show_process(v)) for k, v in self.defs.items())


def _loop_word(t, const):
    """If t is a1. ... .an.const return (a1..an), else None."""
    word = []
    while isinstance(t, Prefix):
        word.append(t.action)
        t = t.body
    if isinstance(t, PrefixConst) and t.const == const:
        word.append(t.action)
        return tuple(word)
    return None


def validate_environment(env):
    """Classify every equation as non-recursive or recursive.

    Recursive equations must have the shape a1.A + ... + an.A + T with A not
    in Cons(T).  Anything else that reaches its own constant (mutual
    recursion, self-replication) is rejected.
    """
    out = {}
    for name, body in env.defs.items():
        for c in constants_of(body):
            if c not in env.defs:
                raise DefinitionError("constant %s used in %s is undefined" % (c, name))
    for name, body in env.defs.items():
        if name not in env.cons(body):
            out[name] = Classification("nonrecursive")
            continue
        loops, rest = [], []
        for s in summands(body):
            w = _loop_word(s, name)
            if w is None:
                rest.append(s)
            else:
                loops.append(w)
        tail = choice_of(rest) if rest else None
        if not loops or (tail is not None and name in env.cons(tail)):
            raise DefinitionError(
                "equation for %s is neither non-recursive nor of the form "
                "a1.%s + ... + an.%s + T with %s not reachable from T"
                % (name, name, name, name))
        out[name] = Classification("recursive", tuple(loops), tail)
    return out


# --------------------------------------------------------------- formulas

class Formula:
    __slots__ = ()

    def __str__(self):
        return show_formula(self)


@dataclass(frozen=True, repr=False)
class Prop(Formula):
    name: str


@dataclass(frozen=True, repr=False)
class Top(Formula):
    pass


@dataclass(frozen=True, repr=False)
class Neg(Formula):
    body: Formula


@dataclass(frozen=True, repr=False)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, repr=False)
class Diamond(Formula):
    program: object      # Term, or Action for a single-action modality
    body: Formula


for _cls in (Prop, Top, Neg, And, Diamond):
    _cls.__repr__ = lambda self: "<%s %s>" % (type(self).__name__, show_formula(self))

TRUE = Top()
FALSE = Neg(TRUE)


def Or(a, b):
    return Neg(And(Neg(a), Neg(b)))


def Implies(a, b):
    return Neg(And(a, Neg(b)))


def Iff(a, b):
    return And(Implies(a, b), Implies(b, a))


def Box(program, body):
    return Neg(Diamond(program, Neg(body)))


def disjunction(items):
    items = list(items)
    if not items:
        return FALSE
    out = items[0]
    for f in items[1:]:
        out = Or(out, f)
    return out


def conjunction(items):
    items = list(items)
    if not items:
        return TRUE
    out = items[0]
    for f in items[1:]:
        out = And(out, f)
    return out


def bar(f):
    return f.body if isinstance(f, Neg) else Neg(f)


def formula_subterms(f):
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        if isinstance(g, Neg):
            stack.append(g.body)
        elif isinstance(g, And):
            stack.append(g.right)
            stack.append(g.left)
        elif isinstance(g, Diamond):
            stack.append(g.body)


def programs_of(f):
    return [g.program for g in formula_subterms(f) if isinstance(g, Diamond)]


def props_of(f):
    return {g.name for g in formula_subterms(f) if isinstance(g, Prop)}


def check_formula_dialect(f, dialect):
    for p in programs_of(f):
        if isinstance(p, Action):
            if dialect != "xccs":
                raise DialectError("single-action modalities are XCCS only")
        else:
            check_dialect(p, dialect)


# ---------------------------------------------------------------- printer

def _wrap(s, cond):
    return "(" + s + ")" if cond else s


def show_process(t, ctx=0):
    if isinstance(t, Choice):
        return _wrap(show_process(t.left, 0) + " + " + show_process(t.right, 1), ctx > 0)
    if isinstance(t, Par):
        return _wrap(show_process(t.left, 1) + " | " + show_process(t.right, 2), ctx > 1)
    if isinstance(t, Seq):
        return _wrap(show_process(t.left, 2) + "; " + show_process(t.right, 3), ctx > 2)
    if isinstance(t, Prefix):
        return _wrap(str(t.action) + "." + show_process(t.body, 3), ctx > 3)
    if isinstance(t, PrefixConst):
        return _wrap(str(t.action) + "." + t.const, ctx > 3)
    if isinstance(t, Star):
        return show_process(t.body, 4) + "*"
    if isinstance(t, Restrict):
        return show_process(t.body, 4) + "\\{" + ",".join(sorted(t.names)) + "}"
    if isinstance(t, Atom):
        return str(t.action)
    if isinstance(t, Zero):
        return "0"
    if isinstance(t, End):
        return "END"
    if isinstance(t, Action):
        return str(t)
    return str(t)


def _is_or(f):
    return (isinstance(f, Neg) and isinstance(f.body, And)
            and isinstance(f.body.left, Neg) and isinstance(f.body.right, Neg))


def _is_implies(f):
    return (isinstance(f, Neg) and isinstance(f.body, And)
            and isinstance(f.body.right, Neg))


def _is_iff(f):
    if not (isinstance(f, And) and _is_implies(f.left) and _is_implies(f.right)):
        return False
    if _is_or(f.left) or _is_or(f.right):
        return False
    a, b = f.left.body.left, f.left.body.right.body
    c, d = f.right.body.left, f.right.body.right.body
    return a == d and b == c


# precedence: iff 0, implies 1, or 2, and 3, unary 4
def show_formula(f, ctx=0):
    if _is_iff(f):
        a, b = f.left.body.left, f.left.body.right.body
        return _wrap(show_formula(a, 1) + " <-> " + show_formula(b, 1), ctx > 0)
    if isinstance(f, Neg):
        g = f.body
        if isinstance(g, Top):
            return "false"
        if _is_or(f):
            return _wrap(show_formula(g.left.body, 2) + " | " + show_formula(g.right.body, 3),
                         ctx > 2)
        if _is_implies(f):
            return _wrap(show_formula(g.left, 2) + " -> " + show_formula(g.right.body, 1),
                         ctx > 1)
        if isinstance(g, Diamond) and isinstance(g.body, Neg):
            return "[" + show_process(g.program) + "]" + show_formula(g.body.body, 4)
        return "!" + show_formula(g, 4)
    if isinstance(f, And):
        return _wrap(show_formula(f.left, 3) + " & " + show_formula(f.right, 4), ctx > 3)
    if isinstance(f, Diamond):
        return "<" + show_process(f.program) + ">" + show_formula(f.body, 4)
    if isinstance(f, Prop):
        return f.name
    if isinstance(f, Top):
        return "true"
    return str(f)


def pretty_print(x):
    if isinstance(x, Formula):
        return show_formula(x)
    if isinstance(x, Environment):
        return str(x)
    return show_process(x)


# ----------------------------------------------------------------- parser

_TOKEN = re.compile(r"\s*(?:(<->|->|[~.;+|*\\{},()<>\[\]!&=])|([A-Za-z0-9_]+))")
_KEYWORDS = {"tau", "END", "end", "0", "true", "false", "def"}


def _is_name(s):
    return bool(re.fullmatch(r"[a-z0-9][A-Za-z0-9_]*", s)) and s not in _KEYWORDS


def _is_const(s):
    return bool(re.fullmatch(r"[A-Z][A-Za-z0-9_]*", s)) and s != "END"


def _tokenize(text):
    toks = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError("unexpected character %r" % text[pos], pos, text)
        start = m.start(1) if m.group(1) else m.start(2)
        toks.append((m.group(1) or m.group(2), start))
        pos = m.end()
    toks.append(("<eof>", n))
    return toks


class _Parser:
    def __init__(self, text, dialect, env, resolve=None):
        if dialect not in DIALECTS:
            raise DialectError("unknown dialect %r" % dialect)
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.dialect = dialect
        self.env = env
        self.resolve = resolve

    # token helpers
    def peek(self, k=0):
        return self.toks[min(self.i + k, len(self.toks) - 1)][0]

    def pos(self):
        return self.toks[self.i][1]

    def next(self):
        tok = self.toks[self.i][0]
        self.i += 1
        return tok

    def expect(self, tok):
        if self.peek() != tok:
            self.error("expected %r, found %r" % (tok, self.peek()))
        return self.next()

    def error(self, msg):
        raise ParseError(msg, self.pos(), self.text)

    def at_action(self):
        t = self.peek()
        return t == "~" or t == "tau" or _is_name(t)

    def action(self):
        t = self.next()
        if t == "~":
            n = self.next()
            if not _is_name(n):
                self.i -= 1
                self.error("expected a name after '~'")
            return Action.out(n)
        if t == "tau":
            return TAU
        if _is_name(t):
            return Action.inp(t)
        self.i -= 1
        self.error("expected an action, found %r" % t)

    # processes
    def process(self):
        left = self.par()
        while self.peek() == "+":
            self.next()
            left = Choice(left, self.par())
        return left

    def par(self):
        left = self.seq()
        while self.peek() == "|":
            self.next()
            left = Par(left, self.seq())
        return left

    def seq(self):
        left = self.prefix()
        while self.peek() == ";":
            if self.dialect != "xccs":
                self.error("';' is only available in xccs")
            self.next()
            left = Seq(left, self.prefix())
        return left

    def prefix(self):
        if self.at_action() and self.peek(1 if self.peek() != "~" else 2) == ".":
            a = self.action()
            self.next()
            if _is_const(self.peek()) and self.peek(1) not in ("*", "\\"):
                name = self.next()
                if self.dialect != "ccs":
                    self.i -= 1
                    self.error("constants are only available in ccs")
                self.lookup(name)
                return PrefixConst(a, name)
            return Prefix(a, self.prefix())
        return self.postfix()

    def postfix(self):
        t = self.primary()
        while self.peek() in ("*", "\\"):
            if self.next() == "*":
                t = Star(t)
            else:
                self.expect("{")
                names = []
                if self.peek() != "}":
                    names.append(self.name())
                    while self.peek() == ",":
                        self.next()
                        names.append(self.name())
                self.expect("}")
                t = Restrict(t, frozenset(names))
        return t

    def name(self):
        t = self.next()
        if not _is_name(t):
            self.i -= 1
            self.error("expected a name, found %r" % t)
        return t

    def primary(self):
        t = self.peek()
        if t == "(":
            self.next()
            p = self.process()
            self.expect(")")
            return p
        if t == "0":
            self.next()
            return Zero()
        if t in ("END", "end"):
            self.next()
            return End()
        if _is_const(t):
            if self.dialect != "ccs":
                self.error("constants are only available in ccs")
            self.next()
            return self.lookup(t, bare=True)
        if self.at_action():
            return Atom(self.action())
        self.error("unexpected %r" % t)

    def lookup(self, name, bare=False):
        if self.resolve is not None:
            body = self.resolve(name, bare)
        elif self.env is not None and name in self.env:
            body = self.env.body(name)
        else:
            self.i -= 1
            self.error("unknown constant %s" % name)
        return body

    # formulas
    def formula(self):
        left = self.implication()
        if self.peek() == "<->":
            self.next()
            right = self.implication()
            return Iff(left, right)
        return left

    def implication(self):
        left = self.disj()
        if self.peek() == "->":
            self.next()
            return Implies(left, self.implication())
        return left

    def disj(self):
        left = self.conj()
        while self.peek() == "|":
            self.next()
            left = Or(left, self.conj())
        return left

    def conj(self):
        left = self.unary()
        while self.peek() == "&":
            self.next()
            left = And(left, self.unary())
        return left

    def modality(self, close):
        # <a> in xccs is a single-action modality rather than a process
        if self.dialect == "xccs" and self.at_action():
            k = 2 if self.peek() == "~" else 1
            if self.peek(k) == close:
                a = self.action()
                self.next()
                return a
        p = self.process()
        self.expect(close)
        return p

    def unary(self):
        t = self.peek()
        if t == "!":
            self.next()
            return Neg(self.unary())
        if t == "<":
            self.next()
            prog = self.modality(">")
            return Diamond(prog, self.unary())
        if t == "[":
            self.next()
            prog = self.modality("]")
            return Box(prog, self.unary())
        if t == "(":
            self.next()
            f = self.formula()
            self.expect(")")
            return f
        if t == "true":
            self.next()
            return TRUE
        if t == "false":
            self.next()
            return FALSE
        if re.fullmatch(r"[a-z][A-Za-z0-9_]*", t) and t not in _KEYWORDS:
            self.next()
            return Prop(t)
        self.error("unexpected %r in formula" % t)

    def done(self):
        if self.peek() != "<eof>":
            self.error("unexpected %r" % self.peek())


def parse_process(text, dialect="xccs", env=None):
    p = _Parser(text, dialect, env)
    t = p.process()
    p.done()
    check_dialect(t, dialect)
    return t


def parse_formula(text, dialect="xccs", env=None):
    p = _Parser(text, dialect, env)
    f = p.formula()
    p.done()
    check_formula_dialect(f, dialect)
    return f


def parse_environment(text, dialect="ccs", validate=True):
    """Parse lines of the form ``def A = P`` ('#' starts a comment)."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        m = re.fullmatch(r"def\s+([A-Za-z0-9_]+)\s*=\s*(.+)", line)
        if not m or not _is_const(m.group(1)):
            raise ParseError("line %d: expected 'def A = P'" % lineno)
        if m.group(1) in raw:
            raise DefinitionError("constant %s defined twice" % m.group(1))
        raw[m.group(1)] = m.group(2)
    env = Environment()
    busy = set()

    def resolve(name, bare):
        if name not in raw:
            raise DefinitionError("unknown constant %s" % name)
        if not bare:
            return None
        if name in env.defs:
            return env.defs[name]
        if name in busy:
            raise DefinitionError("constant %s is defined through itself without a prefix" % name)
        busy.add(name)
        build(name)
        busy.discard(name)
        return env.defs[name]

    def build(name):
        p = _Parser(raw[name], dialect, None, resolve)
        t = p.process()
        p.done()
        check_dialect(t, dialect)
        env.defs[name] = t

    for name in raw:
        if name not in env.defs:
            busy.add(name)
            build(name)
            busy.discard(name)
    env.defs = {k: env.defs[k] for k in raw}
    if validate:
        env.classification()
    return env
