"""Command-line entry point.

Exit status: 0 on success, 1 on a negative verdict (not bisimilar, UNSAT,
not valid, formula false), 2 on usage, parse or other errors.
"""

import argparse
import json
import logging
import os
import sys

from . import decision, kripke, rewrite
from . import runs as R
from .equivalence import bisimilar
from .errors import CcsPdlError
from .gen import rng_from_seed
from .lts import DEFAULT_BUDGET, build_lts
from .syntax import (Neg, Prop, formula_subterms, parse_action,
                     parse_environment, parse_formula, parse_process,
                     show_formula, show_process)


def _text(arg):
    """Inline text, or the contents of a file if the argument names one."""
    if os.path.isfile(arg):
        with open(arg) as fh:
            return fh.read().strip()
    return arg


def _default_budget():
    try:
        return int(os.environ.get("CCSPDL_BUDGET", DEFAULT_BUDGET))
    except ValueError:
        return DEFAULT_BUDGET


class _Ctx:
    def __init__(self, args):
        self.args = args
        self.dialect = args.dialect
        self.env = None
        if args.env:
            with open(args.env) as fh:
                self.env = parse_environment(fh.read(), dialect=self.dialect)

    def process(self, arg):
        return parse_process(_text(arg), self.dialect, self.env)

    def formula(self, arg):
        return parse_formula(_text(arg), self.dialect, self.env)

    def emit(self, text=None, doc=None, dot=None):
        fmt = self.args.format
        if fmt == "json" and doc is not None:
            print(json.dumps(doc, indent=2))
        elif fmt == "dot" and dot is not None:
            print(dot)
        else:
            print(text)


def cmd_parse(c):
    a = c.args
    if a.formula:
        f = c.formula(a.input)
        c.emit(show_formula(f), {"kind": "formula", "text": show_formula(f)})
    else:
        P = c.process(a.input)
        c.emit(show_process(P), {"kind": "process", "text": show_process(P)})
    return 0


def cmd_lts(c):
    l = build_lts(c.process(c.args.process), c.env, c.args.budget)
    c.emit(str(l), json.loads(l.to_json()), l.to_dot())
    return 0


def cmd_runs(c):
    P = c.process(c.args.process)
    A = R.minimize(R.runs_of(P, c.env, c.args.budget))
    words = [R.show_word(w) for w in R.enumerate_words(A, c.args.max_len)]
    finite = R.is_finite(A)
    lines = ["runs (%s, up to length %d):" % ("finite" if finite else "infinite", c.args.max_len)]
    lines += ["  " + w for w in words]
    c.emit("\n".join(lines), json.loads(A.to_json()), A.to_dot())
    return 0


def cmd_bisim(c):
    P, Q = c.process(c.args.left), c.process(c.args.right)
    res = bisimilar(P, Q, c.env, c.args.budget)
    if res:
        c.emit("bisimilar", {"bisimilar": True})
        return 0
    trace = " ".join(str(a) for a in res.trace) or "(start)"
    c.emit("not bisimilar\n  after: %s\n  %s" % (trace, res.reason),
           {"bisimilar": False, "trace": [str(a) for a in res.trace], "reason": res.reason})
    return 1


def _term_result(c, name, Q):
    c.emit(show_process(Q), {name: show_process(Q)})
    return 0


def cmd_expand(c):
    return _term_result(c, "expansion", rewrite.expand(c.process(c.args.process), c.env))


def cmd_normalize(c):
    return _term_result(c, "normal_form", rewrite.r_normalize(c.process(c.args.process)))


def cmd_seq(c):
    return _term_result(c, "sequential", rewrite.sequentialize(c.process(c.args.process), c.env))


def cmd_knot(c):
    P = c.process(c.args.process)
    d = rewrite.knot_decompose(P, c.env)
    n = c.args.max_len

    def words(A):
        return [R.show_word(w) for w in R.enumerate_words(A, n)]

    doc = {"process": show_process(P),
           "proper_loops": words(d.proper_loops),
           "proper_loops_finite": R.is_finite(d.proper_loops),
           "minimal_proper_breakers": words(d.minimal_proper_breakers),
           "tail": [{"prefixes": words(lang), "continuation": str(cont) if cont is rewrite.TICK
                     else show_process(cont)} for lang, cont in d.tail],
           "identity_holds": d.identity_holds(c.env)}
    for key, part in (("looping_part", d.looping_part), ("tail_part", d.tail_part)):
        try:
            t = part()
            doc[key] = show_process(t) if t is not None else None
        except CcsPdlError as e:
            doc[key] = None
            doc[key + "_error"] = str(e)
    lines = ["knot %s" % doc["process"],
             "  proper loops: %s" % ", ".join(doc["proper_loops"]),
             "  minimal proper breakers: %s" % ", ".join(doc["minimal_proper_breakers"])]
    for t in doc["tail"]:
        lines.append("  tail: %s then %s" % (", ".join(t["prefixes"]), t["continuation"]))
    lines.append("  L_P = %s" % doc["looping_part"])
    lines.append("  T_P = %s" % doc["tail_part"])
    lines.append("  runs(P) = PLo* . runs(T_P): %s" % doc["identity_holds"])
    c.emit("\n".join(lines), doc)
    return 0


def cmd_mc(c):
    a = c.args
    f = c.formula(a.formula)
    if a.model.startswith("random:"):
        rng = rng_from_seed(a.seed)
        acts = decision.formula_alphabet(f, c.env) or [parse_action("a")]
        props = sorted(g.name for g in _props(f))
        M = kripke.random_model(int(a.model[7:]), acts, props, rng, dialect=c.dialect,
                                tau_invisible=a.tau_invisible)
    else:
        with open(a.model) as fh:
            M = kripke.KripkeModel.from_json(fh.read(), c.dialect, a.tau_invisible)
    if a.at is None:
        ok = kripke.valid_in_model(M, f, c.env)
        holds = sorted(kripke.sat_set(M, f, c.env))
        c.emit("true" if ok else "false",
               {"valid_in_model": ok, "worlds": [M.worlds[w] for w in holds],
                "model": M.to_dict()})
    else:
        ok = kripke.check(M, a.at, f, c.env)
        c.emit("true" if ok else "false", {"holds": ok, "world": a.at, "model": M.to_dict()})
    return 0 if ok else 1


def _props(f):
    return {g for g in formula_subterms(f) if isinstance(g, Prop)}


def cmd_sat(c):
    f = c.formula(c.args.formula)
    res = decision.sat(f, c.env, c.args.closure_budget, c.dialect)
    if not res:
        c.emit("UNSAT", {"satisfiable": False, "closure_size": len(res.closure)})
        return 1
    doc = {"satisfiable": True, "world": res.model.worlds[res.world], "model": res.model.to_dict()}
    c.emit("SAT at %s\n%s" % (res.model.worlds[res.world], res.model.to_json()), doc)
    return 0


def cmd_valid(c):
    f = c.formula(c.args.formula)
    res = decision.sat(Neg(f), c.env, c.args.closure_budget, c.dialect)
    if not res:
        c.emit("valid", {"valid": True})
        return 0
    doc = {"valid": False, "countermodel": res.model.to_dict(),
           "world": res.model.worlds[res.world]}
    c.emit("not valid; fails at %s of\n%s" % (res.model.worlds[res.world], res.model.to_json()),
           doc)
    return 1


def cmd_closure(c):
    f = c.formula(c.args.formula)
    C = decision.fl_closure(f, c.env, c.args.closure_budget, c.dialect)
    doc = {"size": len(C),
           "members": [{"formula": show_formula(g), "provenance": C.provenance[g]}
                       for g in C.members]}
    c.emit(C.show(), doc)
    return 0


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dialect", choices=("sccs", "ccs", "xccs"), default="xccs")
    common.add_argument("--env", metavar="FILE", help="constant definitions, one 'def A = P' per line")
    common.add_argument("--format", choices=("text", "json", "dot"), default="text")
    common.add_argument("--budget", type=int, default=_default_budget(),
                        help="state budget for transition systems (env CCSPDL_BUDGET)")
    common.add_argument("--closure-budget", type=int, default=decision.DEFAULT_CLOSURE_BUDGET)
    common.add_argument("--tau-invisible", action="store_true",
                        help="interpret tau as the identity relation in models")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="ccspdl", parents=[common],
                                description="Process terms, run languages and dynamic logic over CCS.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        s = sub.add_parser(name, parents=[common], help=help_)
        s.set_defaults(fn=fn)
        return s

    s = add("parse", cmd_parse, "parse and pretty-print a process or formula")
    s.add_argument("input")
    s.add_argument("--formula", action="store_true", help="parse a formula instead of a process")
    add("lts", cmd_lts, "reachable transition system").add_argument("process")
    s = add("runs", cmd_runs, "finite runs as a minimal automaton")
    s.add_argument("process")
    s.add_argument("--max-len", type=int, default=6)
    s = add("bisim", cmd_bisim, "strong bisimilarity")
    s.add_argument("left")
    s.add_argument("right")
    add("expand", cmd_expand, "expansion of a parallel composition").add_argument("process")
    add("normalize", cmd_normalize, "restriction normal form").add_argument("process")
    add("seq", cmd_seq, "eliminate parallel composition").add_argument("process")
    s = add("knot", cmd_knot, "loop/tail decomposition of a recursive process")
    s.add_argument("process")
    s.add_argument("--max-len", type=int, default=6)
    s = add("mc", cmd_mc, "model checking; unknown propositions are false")
    s.add_argument("model", help="model JSON file, or random:N for a random N-world model (see --seed)")
    s.add_argument("formula")
    s.add_argument("--at", help="world name or index (default: all worlds)")
    add("sat", cmd_sat, "satisfiability with model extraction").add_argument("formula")
    add("valid", cmd_valid, "validity").add_argument("formula")
    add("closure", cmd_closure, "closure members with provenance").add_argument("formula")
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        return args.fn(_Ctx(args))
    except CcsPdlError as e:
        print("error [%s]: %s" % (e.module, e), file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError, KeyError) as e:
        print("error [cli]: %s" % e, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
