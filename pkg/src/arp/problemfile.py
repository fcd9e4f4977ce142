"""Reader for ``.arp`` problem files.

A problem file has five sections, each introduced by a header line::

    hierarchy: parallelism.srt
    signature:
      var R : Woman -> t
    equations:
      l(j_A, g_~A) =p R_~pe(m_pe)
    readings:
      R(m)
    options:
      threshold = 10

The hierarchy is either a path (resolved next to the problem file, then in
the bundled data directory) or given inline as the body of the section.
"""
from __future__ import annotations

from dataclasses import replace
from importlib import resources
from pathlib import Path

from .pcalc import Equation, Relation
from .reconstruct import Options, Problem
from .sorts import SortHierarchy
from .syntax import (Cursor, ParseError, Signature, load_hierarchy,
                     parse_sort, parse_sort_list, parse_term_tokens, tokenize)
from .terms import type_of

SECTIONS = ("hierarchy", "signature", "equations", "readings", "options")
_RELATIONS = {r.value: r for r in Relation}
_BOOL = {"on": True, "true": True, "yes": True, "off": False, "false": False, "no": False}


def data_path(name: str) -> Path:
    return Path(str(resources.files("arp") / "data" / name))


def _split(text: str, source: str):
    sections: dict[str, list] = {}
    current = None
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        head = line.strip().split(":", 1)[0]
        if not raw[:1].isspace() and head in SECTIONS and ":" in line:
            if head in sections:
                raise ParseError(f"duplicate section {head!r}", n, 1, source)
            current = head
            sections[head] = []
            rest = line.split(":", 1)[1].strip()
            if rest:
                sections[head].append((n, rest, line.index(rest) + 1))
            continue
        if current is None:
            raise ParseError("text outside of a section", n, 1, source)
        stripped = line.lstrip()
        sections[current].append((n, stripped, len(line) - len(stripped) + 1))
    return sections


def _hierarchy(lines, base: Path | None, source: str) -> SortHierarchy:
    if not lines:
        raise ParseError("missing hierarchy", 0, 0, source)
    if len(lines) == 1 and lines[0][1].endswith(".srt"):
        n, ref, col = lines[0]
        for cand in ([base / ref] if base else []) + [Path(ref), data_path(ref)]:
            if cand.is_file():
                return load_hierarchy(cand.read_text(encoding="utf-8"), str(cand))
        raise ParseError(f"hierarchy file {ref!r} not found", n, col, source)
    last = lines[-1][0]
    padded = [""] * last
    for n, text, _ in lines:
        padded[n - 1] = text
    return load_hierarchy("\n".join(padded), source)


def _cursor(n, text, col, source) -> Cursor:
    toks = tokenize(text, n, source)
    for t in toks:
        t.col += col - 1
    return Cursor(toks, n, source)


def _signature(h: SortHierarchy, lines, source: str) -> Signature:
    sig = Signature(h)
    for n, text, col in lines:
        cur = _cursor(n, text, col, source)
        kind = cur.ident().text
        name = cur.ident()
        if name.text in sig.variables or (kind == "var" and name.text in sig.constants):
            cur.i -= 1
            cur.error(f"{name.text!r} is already declared")
        cur.expect(":")
        if kind == "var":
            sig.variables[name.text] = parse_sort(cur, h.atoms)
        elif kind == "const":
            sig.constants[name.text] = parse_sort_list(cur, h.atoms)
        else:
            cur.i -= 2
            cur.error(f"expected 'var' or 'const', found {kind!r}")
        cur.end()
    return sig


def parse_equation(sig: Signature, text: str, line: int = 0, col: int = 1,
                   source: str = "") -> Equation:
    cur = _cursor(line, text, col, source)
    lhs = parse_term_tokens(sig, cur)
    tok = cur.peek()
    if tok is None or tok.text not in _RELATIONS:
        cur.error("expected '=p', '=s' or '=='")
    cur.next()
    rhs = parse_term_tokens(sig, cur)
    cur.end()
    if type_of(lhs) != type_of(rhs):
        raise ParseError("the two sides have different types", line, tok.col, source)
    return Equation(lhs, rhs, _RELATIONS[tok.text])


def _options(lines, source: str) -> tuple[Options, str]:
    opts, mode = Options(), "solve"
    for n, text, col in lines:
        if "=" not in text:
            raise ParseError("expected 'key = value'", n, col, source)
        key, value = (s.strip() for s in text.split("=", 1))
        try:
            if key == "threshold":
                opts = replace(opts, cost_threshold=float(value))
            elif key == "max_solutions":
                opts = replace(opts, max_solutions=int(value))
            elif key == "max_depth":
                opts = replace(opts, max_depth=int(value))
            elif key == "copying_constraint":
                opts = replace(opts, copying_constraint=_BOOL[value.lower()])
            elif key == "primary_color":
                opts = replace(opts, primary_color=value)
            elif key == "mode":
                if value not in ("solve", "derive"):
                    raise ValueError(value)
                mode = value
            else:
                raise ParseError(f"unknown option {key!r}", n, col, source)
        except (ValueError, KeyError):
            raise ParseError(f"bad value {value!r} for option {key!r}", n, col, source)
    return opts, mode


def load_problem(text: str, source: str = "", base: Path | None = None) -> Problem:
    sections = _split(text, source)
    h = _hierarchy(sections.get("hierarchy", []), base, source)
    sig = _signature(h, sections.get("signature", []), source)
    eqs = [parse_equation(sig, t, n, c, source) for n, t, c in sections.get("equations", [])]
    if not eqs:
        raise ParseError("no equations", 0, 0, source)
    readings = []
    for n, t, c in sections.get("readings", []):
        cur = _cursor(n, t, c, source)
        readings.append(parse_term_tokens(sig, cur))
        cur.end()
    opts, mode = _options(sections.get("options", []), source)
    name = Path(source).stem if source else ""
    problem = Problem(sig, eqs, readings, opts, name, mode)
    try:
        problem.validate()
    except Exception as e:
        raise ParseError(str(e), 0, 0, source) from e
    return problem


def load_problem_file(path) -> Problem:
    path = Path(path)
    return load_problem(path.read_text(encoding="utf-8"), str(path), path.parent)
