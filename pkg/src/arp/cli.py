"""Command-line front end: ``arp solve|derive|check|explain``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .pcalc import Abducible, Equation, derive, render
from .problemfile import load_problem_file, parse_equation
from .reconstruct import Problem, Solution, check_certificate, solve
from .sorts import SortError
from .syntax import (ParseError, Signature, load_hierarchy_file, parse_term,
                     sort_from_string)
from .terms import (Color, IllSorted, IllTyped, apply, color_str, erase_colors,
                    show)

log = logging.getLogger("arp")


class InputError(Exception):
    pass


# ----------------------------------------------------------------- reports

def _color_json(c):
    return None if c is None else color_str(c)[1:]


def _color_from(text):
    if text is None:
        return None
    neg = text.startswith("~")
    name = text.lstrip("~")
    return Color(name, var=name[0].isupper(), neg=neg)


def abducible_json(a: Abducible) -> dict:
    out = {"kind": a.kind, "left": show(a.left), "right": show(a.right),
           "common": str(a.common), "distinguishing": list(a.distinguishing),
           "cost": a.cost}
    if a.binding:
        out["binding"] = [a.binding[0], show(a.binding[1])]
    return out


def solution_json(rank: int, s: Solution) -> dict:
    subst = [{"var": n, "color": _color_json(c), "term": show(t)}
             for (n, c), t in sorted(s.terms.items(), key=lambda kv: (kv[0][0], str(kv[0][1])))]
    return {
        "rank": rank,
        "cost": s.cost,
        "substitution": subst,
        "colors": {n: _color_json(c) for n, c in sorted(s.colors.items())},
        "abducibles": [abducible_json(a) for a in s.abducibles],
        "readings": [show(r, colors=False) for r in s.readings],
        "residual": [str(e) for e in s.residual],
        "aux": {n: str(srt) for n, srt in sorted(s.aux.items())},
    }


def _extended(problem: Problem, aux: dict) -> Signature:
    h = problem.hierarchy
    variables = dict(problem.signature.variables)
    for n, text in aux.items():
        variables[n] = sort_from_string(h, text)
    return Signature(h, dict(problem.signature.constants), variables)


def solution_from_json(problem: Problem, d: dict) -> Solution:
    """Rebuild a Solution from its report entry, re-parsing every term."""
    h = problem.hierarchy
    sig = _extended(problem, d.get("aux", {}))
    terms = {(e["var"], _color_from(e["color"])): parse_term(sig, e["term"])
             for e in d["substitution"]}
    colors = {n: _color_from(c) for n, c in d.get("colors", {}).items()}
    abds = []
    for a in d.get("abducibles", []):
        binding = None
        if "binding" in a:
            binding = (a["binding"][0], parse_term(sig, a["binding"][1]))
        abds.append(Abducible(a["kind"], parse_term(sig, a["left"]), parse_term(sig, a["right"]),
                              sort_from_string(h, a["common"]), tuple(a["distinguishing"]),
                              a["cost"], binding))
    residual = []
    for text in d.get("residual", []):
        residual.append(parse_equation(sig, text))
    return Solution(terms, colors, tuple(abds), d["cost"], [], tuple(residual),
                    (), {n: sort_from_string(h, s) for n, s in d.get("aux", {}).items()})


def solve_report(problem: Problem, result) -> dict:
    return {
        "problem": problem.name,
        "mode": "solve",
        "solutions": [solution_json(i, s) for i, s in enumerate(result.solutions, 1)],
        "summary": {"explored": result.explored, "pruned": result.pruned,
                    "failed": result.failed, "exhausted": result.exhausted,
                    "seconds": round(result.seconds, 6)},
    }


def derive_report(problem: Problem, derivations) -> dict:
    h = problem.hierarchy
    return {
        "problem": problem.name,
        "mode": "derive",
        "derivations": [{"rank": i, "cost": d.cost,
                         "abducibles": [abducible_json(a) for a in d.abducibles()],
                         "tree": render(d, h).splitlines()}
                        for i, d in enumerate(derivations, 1)],
    }


# ----------------------------------------------------------------- printing

def _print_solution(rank: int, s: Solution, h, out):
    print(f"solution {rank}  cost {s.cost:g}", file=out)
    for (n, c), t in sorted(s.terms.items(), key=lambda kv: (kv[0][0], str(kv[0][1]))):
        print(f"  {n}{color_str(c)} := {show(t)}", file=out)
    for n, c in sorted(s.colors.items()):
        print(f"  {n} := {c}", file=out)
    for a in s.abducibles:
        print(f"  abducible {a}  (cost {a.cost})", file=out)
        for line in a.box(h):
            print(f"    | {line}", file=out)
    for r in s.readings:
        print(f"  reading {show(r, colors=False)}", file=out)
    for e in s.residual:
        print(f"  residual {e}", file=out)


def _print_summary(result, out):
    state = "bound exhausted" if result.exhausted else "complete"
    print(f"{len(result.solutions)} solution(s); {result.explored} states explored, "
          f"{result.pruned} pruned, {result.failed} failed; search {state}; "
          f"{result.seconds:.3f}s", file=out)


# ----------------------------------------------------------------- commands

def _problem(args) -> Problem:
    p = load_problem_file(args.file)
    opts = p.options
    if args.threshold is not None:
        opts = replace(opts, cost_threshold=args.threshold)
    if args.max_solutions is not None:
        opts = replace(opts, max_solutions=args.max_solutions)
    if args.max_depth is not None:
        opts = replace(opts, max_depth=args.max_depth)
    if args.no_copying_constraint:
        opts = replace(opts, copying_constraint=False)
    return replace(p, options=opts)


def _derivations(p: Problem):
    if len(p.equations) != 1:
        raise InputError("derive expects exactly one equation")
    return derive(p.hierarchy, p.equations[0], p.options.cost_threshold)[:p.options.max_solutions]


def cmd_solve(args, out) -> int:
    p = _problem(args)
    if args.command == "derive" or p.mode == "derive":
        ds = _derivations(p)
        if args.json:
            print(json.dumps(derive_report(p, ds), indent=2), file=out)
        else:
            for i, d in enumerate(ds, 1):
                print(f"derivation {i}  cost {d.cost:g}", file=out)
                print(render(d, p.hierarchy, 1), file=out)
        return 0 if ds else 1
    trace = (lambda line: print(f"trace {line}", file=sys.stderr)) if args.trace else None
    result = solve(p, trace)
    if args.json:
        print(json.dumps(solve_report(p, result), indent=2), file=out)
    else:
        for i, s in enumerate(result.solutions, 1):
            _print_solution(i, s, p.hierarchy, out)
        _print_summary(result, out)
    return 0 if result.solutions else 1


def cmd_check(args, out) -> int:
    path = Path(args.file)
    if path.suffix == ".srt":
        h = load_hierarchy_file(path)
        st = h.stats()
        print("OK " + ", ".join(f"{k} {v}" for k, v in st.items()), file=out)
        return 0
    p = _problem(args)
    if not args.report:
        print(f"OK {len(p.equations)} equation(s), "
              f"{len(p.signature.variables)} variable(s)", file=out)
        return 0
    report = json.loads(Path(args.report).read_text(encoding="utf-8"))
    ok = True
    for entry in report.get("solutions", []):
        sol = solution_from_json(p, entry)
        good, diag = check_certificate(p, sol)
        ok &= good
        print(f"solution {entry['rank']}: {'OK' if good else 'INVALID'}", file=out)
        for line in diag:
            print(f"  {line}", file=out)
    return 0 if ok else 1


def cmd_explain(args, out) -> int:
    p = _problem(args)
    h = p.hierarchy
    if p.mode == "derive":
        ds = _derivations(p)
        if not 1 <= args.index <= len(ds):
            raise InputError(f"derivation index {args.index} out of range 1..{len(ds)}")
        print(render(ds[args.index - 1], h), file=out)
        return 0
    result = solve(p)
    if not 1 <= args.index <= len(result.solutions):
        raise InputError(f"solution index {args.index} out of range 1..{len(result.solutions)}")
    s = result.solutions[args.index - 1]
    _print_solution(args.index, s, h, out)
    print("trace:", file=out)
    for line in s.trace:
        print(f"  {line}", file=out)
    sub = s.substitution()
    want = {a.key() for a in s.abducibles}
    for eq in p.equations:
        inst = Equation(apply(sub, eq.lhs), apply(sub, eq.rhs), eq.rel)
        ds = derive(h, inst, max(s.cost, 0))
        match = [d for d in ds if {a.key() for a in d.abducibles()
                                    if erase_colors(a.left) != erase_colors(a.right)} <= want]
        print("derivation:", file=out)
        print(render((match or ds)[0], h, 1) if ds else f"  {inst}", file=out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="arp", description="Abductive reconstruction of parallelism.")
    ap.add_argument("--version", action="version", version=f"arp {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("file")
        p.add_argument("--threshold", type=float)
        p.add_argument("--max-solutions", type=int)
        p.add_argument("--max-depth", type=int)
        p.add_argument("--no-copying-constraint", action="store_true")
        p.add_argument("--trace", action="store_true", help="print rule applications to stderr")
        p.add_argument("--json", action="store_true")

    for name in ("solve", "derive"):
        common(sub.add_parser(name))
    chk = sub.add_parser("check", help="validate a hierarchy, a problem, or a JSON report")
    common(chk)
    chk.add_argument("--report", help="JSON report whose solutions are re-verified")
    exp = sub.add_parser("explain")
    common(exp)
    exp.add_argument("index", type=int, nargs="?", default=1)
    return ap


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    handlers = {"solve": cmd_solve, "derive": cmd_solve, "check": cmd_check,
                "explain": cmd_explain}
    try:
        return handlers[args.command](args, out)
    except (ParseError, InputError, SortError, IllSorted, IllTyped, OSError,
            json.JSONDecodeError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
