"""Abductive reconstruction of parallelism.

Sorted, coloured higher-order pre-unification over equations that may be
strict (``==``), similarities (``=s``) or c-parallelisms (``=p``). Rigid
pairs are decomposed with the rules of :mod:`arp.pcalc`, atomic pairs are
justified by abducibles, and flexible heads are instantiated with general
bindings. States are explored best-first by accumulated abducible cost.
"""
from __future__ import annotations

import heapq
import itertools
import logging
import math
import time
from dataclasses import dataclass, field, replace
from typing import Optional, Union

from .pcalc import (JUST_C, JUST_S, Abducible, Equation, Relation, decompose_abs,
                    decompose_app, derive, is_atomic, justify, negation_toggle,
                    replay, verify_abducible)
from .sorts import Arrow, SortError, SortHierarchy, arrow_parts, arrow_sort
from .syntax import Signature
from .terms import (Abs, BVar, Color, Const, IllFormedSubstitution, IllSorted,
                    Substitution, Term, Var, app, apply, beta_normal, color_str,
                    erase_colors, has_fresh, head_args, infer_sorts,
                    is_monochrome, minimal_sorts, normalize, recolor, show,
                    symbols, type_of, var_names, _arrow_views)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Options:
    copying_constraint: bool = True
    cost_threshold: float = 10
    max_solutions: int = 5
    max_depth: int = 12
    primary_color: str = "pe"
    max_states: int = 200_000


@dataclass
class Problem:
    signature: Signature
    equations: list[Equation]
    readings: list[Term] = field(default_factory=list)
    options: Options = field(default_factory=Options)
    name: str = ""
    mode: str = "solve"

    @property
    def hierarchy(self) -> SortHierarchy:
        return self.signature.hierarchy

    def validate(self):
        h = self.hierarchy
        for eq in self.equations:
            tl, tr = type_of(eq.lhs), type_of(eq.rhs)
            if tl != tr:
                raise ValueError(f"type mismatch in {eq}: {tl} vs {tr}")
            if self.mode == "solve":
                for side in (eq.lhs, eq.rhs):
                    infer_sorts(h, side)


@dataclass(frozen=True)
class ColorEq:
    a: Optional[Color]
    b: Optional[Color]

    def __str__(self):
        return f"{self.a} = {self.b}"


@dataclass(frozen=True)
class GeneralBinding:
    var: Var
    kind: str           # imitation | projection | similar-imitation | contrastive-imitation
    head: str
    term: Term
    fresh_vars: tuple = ()


@dataclass(frozen=True)
class UnifState:
    unsolved: tuple = ()
    terms: tuple = ()           # ((name, colour), term) pairs
    colors: tuple = ()          # (colour variable, colour) pairs
    abducibles: tuple = ()
    flexflex: tuple = ()
    registry: tuple = ()        # fresh constants from abstraction decomposition
    cost: float = 0
    depth: int = 0
    counter: int = 0
    trace: tuple = ()
    aux: tuple = ()             # (name, sort) of variables introduced by bindings

    def substitution(self) -> Substitution:
        return Substitution(dict(self.terms), dict(self.colors))


@dataclass
class Solution:
    terms: dict
    colors: dict
    abducibles: tuple
    cost: float
    readings: list = field(default_factory=list)
    residual: tuple = ()
    trace: tuple = ()
    aux: dict = field(default_factory=dict)

    def substitution(self) -> Substitution:
        return Substitution(self.terms, self.colors)

    def serialized(self) -> str:
        parts = [f"{n}{color_str(c)} := {show(t)}" for (n, c), t in
                 sorted(self.terms.items(), key=lambda kv: (kv[0][0], str(kv[0][1])))]
        parts += [f"{n} := {c}" for n, c in sorted(self.colors.items())]
        return "; ".join(parts)

    def erased_key(self):
        terms = sorted({(n, show(erase_colors(t))) for (n, _), t in self.terms.items()})
        abds = sorted(a.key() for a in self.abducibles)
        return (tuple(terms), tuple(abds))


@dataclass
class SolveResult:
    solutions: list
    explored: int = 0
    pruned: int = 0
    failed: int = 0
    exhausted: bool = False
    seconds: float = 0.0
    log: list = field(default_factory=list)


# ------------------------------------------------------------------ utilities

def _is_flex(t: Term) -> bool:
    return isinstance(head_args(t)[0], Var)


def _key_sort(item):
    (name, c), _ = item
    return (name, str(c))


def _sub_of(terms: dict, colors: dict) -> Substitution:
    return Substitution(terms, colors)


def _apply_eq(sub: Substitution, e):
    if isinstance(e, ColorEq):
        return ColorEq(sub.color(e.a), sub.color(e.b))
    return Equation(apply(sub, e.lhs, eta=False), apply(sub, e.rhs, eta=False), e.rel)


def _apply_abd(sub: Substitution, a: Abducible) -> Abducible:
    return replace(a, left=apply(sub, a.left, eta=False), right=apply(sub, a.right, eta=False))


def _with(st: UnifState, note: str, **changes) -> UnifState:
    return replace(st, trace=st.trace + (note,), **changes)


def _note(rule: str, eq, branches: int, cost) -> str:
    return f"{rule} | {eq} | {branches} | {cost:g}"


def _rebuild(st: UnifState, terms: dict, colors: dict, unsolved, note: str,
             **changes) -> Optional[UnifState]:
    """Install new bindings, applying them to every pending equation."""
    try:
        sub = _sub_of(terms, colors)
        terms = {k: apply(sub, t, eta=False) for k, t in terms.items()}
        sub = _sub_of(terms, colors)
    except IllFormedSubstitution as e:
        log.debug("dead: %s", e)
        return None
    if any(has_fresh(t) for t in terms.values()):
        return None
    unsolved = tuple(_apply_eq(sub, e) for e in unsolved)
    flexflex = tuple(_apply_eq(sub, e) for e in st.flexflex)
    abds = tuple(_apply_abd(sub, a) for a in st.abducibles)
    return _with(st, note, unsolved=unsolved + flexflex, flexflex=(),
                 terms=tuple(sorted(terms.items(), key=_key_sort)),
                 colors=tuple(sorted(colors.items())), abducibles=abds, **changes)


# --------------------------------------------------------------- elimination

def eliminate_color_var(st: UnifState, index: int) -> Optional[UnifState]:
    """Solve the colour equation at ``index``; None when the colours clash."""
    ceq = st.unsolved[index]
    rest = st.unsolved[:index] + st.unsolved[index + 1:]
    a, b = ceq.a, ceq.b
    note = _note("color", ceq, 1, st.cost)
    if a is None or b is None or a == b:
        return _with(st, note, unsolved=rest)
    if a.var:
        var, val = a, b
    elif b.var:
        var, val = b, a
    else:
        return None
    if val.var and val.name == var.name:
        return None            # A = ~A
    value = val.negate() if var.neg else val
    colors = dict(st.colors)
    colors[var.name] = value
    probe = Substitution({}, colors)
    colors = {n: probe.color(c) for n, c in colors.items()}
    probe = Substitution({}, colors)
    terms: dict = {}
    extra = []
    for (name, c), t in st.terms:
        key = (name, probe.color(c))
        if key in terms and terms[key] != t:
            extra.append(Equation(terms[key], t, Relation.EQ))
        terms.setdefault(key, t)
    return _rebuild(st, terms, colors, rest + tuple(extra), note)


def _colors_of(st: UnifState, name: str, unsolved) -> set:
    found = set()
    for e in tuple(unsolved) + st.flexflex:
        if isinstance(e, Equation):
            for side in (e.lhs, e.rhs):
                found |= {s.color for s in symbols(side) if isinstance(s, Var) and s.name == name}
    for _, t in st.terms:
        found |= {s.color for s in symbols(t) if isinstance(s, Var) and s.name == name}
    return found


def eliminate_term_var(h: SortHierarchy, st: UnifState, var: Var, value: Term,
                       unsolved=None, note: str = "", **changes) -> Optional[UnifState]:
    """Bind ``var`` to ``value`` together with all its colour variants.

    Every other colour ``c`` under which the variable occurs gets the
    ``c``-coloured variant of ``value``, so all variants share one erasure.
    """
    unsolved = st.unsolved if unsolved is None else unsolved
    value = beta_normal(value)
    if value == var:
        return _with(st, note, unsolved=unsolved, **changes)
    if var.name in var_names(value) or has_fresh(value):
        return None
    try:
        if not any(h.is_subsort(s, var.sort) for s in infer_sorts(h, value)):
            return None
    except (IllSorted, SortError):
        return None
    terms = dict(st.terms)
    if (var.name, var.color) in terms:
        return None
    terms[(var.name, var.color)] = value
    for c in _colors_of(st, var.name, unsolved) - {var.color}:
        terms[(var.name, c)] = recolor(value, c)
    note = note or _note("eliminate", f"{show(var)} = {show(value)}", 1, st.cost)
    return _rebuild(st, terms, dict(st.colors), unsolved, note, **changes)


# ------------------------------------------------------------- decomposition

def decompose_step(h: SortHierarchy, st: UnifState, index: int,
                   opts: Options) -> list[UnifState]:
    """Successors of a rigid/rigid equation; an empty list is a dead branch."""
    eq = st.unsolved[index]
    before, after = st.unsolved[:index], st.unsolved[index + 1:]
    l, r = eq.lhs, eq.rhs

    def put(*new, rule, **changes):
        return _with(st, _note(rule, eq, 1, changes.get("cost", st.cost)),
                     unsolved=before + tuple(new) + after, **changes)

    if isinstance(l, Abs) or isinstance(r, Abs):
        name = f"c'{st.counter + 1}"
        opened = decompose_abs(eq, name)
        return [put(opened, rule="abs", counter=st.counter + 1,
                    registry=st.registry + (name,))]

    toggled = negation_toggle(eq)
    if toggled is not None:
        return [put(toggled, rule="neg")]

    hl, al = head_args(l)
    hr, ar = head_args(r)
    if eq.rel is Relation.EQ:
        if not (isinstance(hl, Const) and isinstance(hr, Const)):
            return []
        if (hl.name, hl.fresh, hl.type) != (hr.name, hr.fresh, hr.type) or len(al) != len(ar):
            return []
        new = [ColorEq(hl.color, hr.color)] if hl.color and hr.color else []
        new += [Equation(x, y, Relation.EQ) for x, y in zip(al, ar)]
        return [put(*new, rule="decompose")]

    if not al and not ar:
        if not (isinstance(hl, Const) and isinstance(hr, Const)):
            return []
        colors = [ColorEq(hl.color, hr.color)] if hl.color and hr.color else []
        if (hl.name, hl.fresh) == (hr.name, hr.fresh):
            if eq.rel is Relation.CPAR:
                return []
            return [put(*colors, rule="color")]
        abds = sorted(justify(h, eq), key=lambda a: (a.cost, str(a.common)))
        if not abds:
            return []
        a = abds[0]
        cost = st.cost + a.cost
        if cost > opts.cost_threshold:
            return []
        return [put(*colors, rule=a.kind, cost=cost, abducibles=st.abducibles + (a,))]

    branches = decompose_app(eq)
    if not branches:
        return []
    name = "cpar-app" if eq.rel is Relation.CPAR else "sim-app"
    out = []
    for k, (e1, e2) in enumerate(branches, 1):
        rule = f"{name}-{k}" if len(branches) > 1 else name
        out.append(_with(st, _note(rule, eq, len(branches), st.cost),
                         unsolved=before + (e1, e2) + after))
    return out


# ---------------------------------------------------------- general bindings

def _views_with_arity(h: SortHierarchy, sorts, m: int) -> list:
    """Arrow sorts (from ``sorts`` or their supersorts) split after ``m`` domains."""
    if m == 0:
        return [([], s) for s in sorts]
    views = set()
    for s in sorts:
        for a in _arrow_views(h, s):
            doms, res = arrow_parts(a)
            if len(doms) >= m:
                views.add(a)
    best = minimal_sorts(h, views) if views else ()
    out = []
    for a in sorted(best, key=str):
        doms, res = arrow_parts(a)
        out.append((doms[:m], arrow_sort(*doms[m:], res) if len(doms) > m else res))
    return out


def _arity_for(ty, target) -> Optional[int]:
    m = 0
    while ty != target:
        if not hasattr(ty, "dom"):
            return None
        ty = ty.cod
        m += 1
    return m


def _related(h: SortHierarchy, a: Const, b: Const, rel: Relation) -> bool:
    try:
        return bool(justify(h, Equation(a, b, rel)))
    except (IllSorted, SortError):
        return False


def general_bindings(h: SortHierarchy, sig: Signature, st: UnifState, eq: Equation,
                     opts: Options) -> tuple[list[GeneralBinding], int]:
    """Candidate bindings for the flexible head of a flex/rigid equation."""
    flex, rigid = (eq.lhs, eq.rhs) if _is_flex(eq.lhs) else (eq.rhs, eq.lhs)
    x, sargs = head_args(flex)
    h_rigid, _ = head_args(rigid)
    n = len(sargs)
    doms, res = arrow_parts(x.sort)
    if len(doms) < n:
        return [], st.counter
    betas = doms[:n]
    alpha = arrow_sort(*doms[n:], res) if len(doms) > n else res
    target_type = type_of(flex)
    c = x.color
    counter = st.counter

    heads: list[tuple[str, Term, list]] = []      # (kind, head term, sort views)
    if isinstance(h_rigid, Const) and not h_rigid.fresh:
        heads.append(("imitation", h_rigid, list(h_rigid.sorts)))
    for i, beta in enumerate(betas):
        heads.append(("projection", BVar(n - 1 - i), [beta]))
    if eq.rel is not Relation.EQ and isinstance(h_rigid, Const) and not h_rigid.fresh:
        primary = Color(opts.primary_color)
        if not opts.copying_constraint or h_rigid.color == primary:
            # an applied head under =p may be merely similar: an argument can carry the contrast
            applied = _arity_for(h_rigid.type, target_type) not in (None, 0)
            for name in sorted(sig.constants):
                if name == h_rigid.name:
                    continue
                k = sig.const(name)
                if k.type != h_rigid.type:
                    continue
                if _related(h, h_rigid, k, eq.rel):
                    kind = "contrastive-imitation" if eq.rel is Relation.CPAR else "similar-imitation"
                elif eq.rel is Relation.CPAR and applied and _related(h, h_rigid, k, Relation.SIM):
                    kind = "similar-imitation"
                else:
                    continue
                heads.append((kind, k, list(k.sorts)))

    out = []
    for kind, head, sorts in heads:
        if isinstance(head, BVar):
            hty = h.type_of(sorts[0])
        else:
            hty = head.type
        m = _arity_for(hty, target_type)
        if m is None:
            continue
        for gammas, result in _views_with_arity(h, sorts, m):
            try:
                if not h.is_subsort(result, alpha):
                    continue
            except SortError:
                continue
            if isinstance(head, Const):
                if c is not None and not c.var:
                    hc = c
                elif kind == "imitation":
                    hc = head.color
                elif c is not None:
                    counter += 1
                    hc = Color(f"C'{counter}", var=True)
                else:
                    hc = None
                head_term = replace(head, color=hc)
            else:
                head_term = head
            fresh = []
            args = []
            for g in gammas:
                counter += 1
                if c is None:
                    ec = None
                elif not c.var:
                    ec = c
                else:
                    counter += 1
                    ec = Color(f"C'{counter}", var=True)
                hs = arrow_sort(*betas, g) if betas else g
                H = Var(f"H'{counter}", h.type_of(hs), hs, ec)
                fresh.append(H)
                args.append(app(H, *(BVar(n - 1 - i) for i in range(n))))
            body = app(head_term, *args)
            for beta in reversed(betas):
                body = Abs(h.type_of(beta), beta, body, "Z")
            hname = head.name if isinstance(head, Const) else f"z{n - head.index}"
            out.append(GeneralBinding(x, kind, hname, body, tuple(fresh)))
    return out, counter


# -------------------------------------------------------------------- search

def _select(st: UnifState):
    eqs = st.unsolved
    for i, e in enumerate(eqs):
        if isinstance(e, ColorEq):
            return "color", i
    for i, e in enumerate(eqs):
        if e.lhs == e.rhs and e.rel is not Relation.CPAR:
            return "trivial", i
    for i, e in enumerate(eqs):
        if not _is_flex(e.lhs) and not _is_flex(e.rhs):
            return "rigid", i
    for i, e in enumerate(eqs):
        if e.rel is Relation.EQ and (isinstance(e.lhs, Var) or isinstance(e.rhs, Var)):
            return "eliminate", i
    for i, e in enumerate(eqs):
        if _is_flex(e.lhs) != _is_flex(e.rhs):
            return "flex-rigid", i
    return "flex-flex", None


def expand(problem: Problem, st: UnifState) -> Union[list[UnifState], str]:
    """Successor states of ``st``; the string ``"depth"`` when the bound is hit."""
    h, opts = problem.hierarchy, problem.options
    what, i = _select(st)
    if what == "color":
        nxt = eliminate_color_var(st, i)
        return [nxt] if nxt else []
    if what == "trivial":
        eq = st.unsolved[i]
        return [_with(st, _note("delete", eq, 1, st.cost),
                      unsolved=st.unsolved[:i] + st.unsolved[i + 1:])]
    if what == "rigid":
        return decompose_step(h, st, i, opts)
    if what == "eliminate":
        eq = st.unsolved[i]
        var, val = (eq.lhs, eq.rhs) if isinstance(eq.lhs, Var) else (eq.rhs, eq.lhs)
        rest = st.unsolved[:i] + st.unsolved[i + 1:]
        nxt = eliminate_term_var(h, st, var, val, rest,
                                 _note("eliminate", eq, 1, st.cost))
        return [nxt] if nxt else []
    if what == "flex-rigid":
        if st.depth >= opts.max_depth:
            return "depth"
        eq = st.unsolved[i]
        bindings, counter = general_bindings(h, problem.signature, st, eq, opts)
        out = []
        for b in bindings:
            note = _note(b.kind, eq, len(bindings), st.cost) + f" | {show(b.var)} := {show(b.term)}"
            aux = st.aux + tuple((v.name, v.sort) for v in b.fresh_vars)
            nxt = eliminate_term_var(h, st, b.var, b.term, None, note,
                                     depth=st.depth + 1, counter=counter, aux=aux)
            if nxt is not None:
                out.append(nxt)
        return out
    # only flex/flex pairs are left: keep them as constraints
    return [_with(st, _note("flex-flex", ", ".join(map(str, st.unsolved)), 1, st.cost),
                  unsolved=(), flexflex=st.unsolved)]


def _solution(problem: Problem, st: UnifState) -> Solution:
    sub = st.substitution()
    wanted = set(problem.signature.variables)
    terms = {k: normalize(t) for k, t in st.terms if k[0] in wanted}
    problem_colors = set()
    for eq in problem.equations:
        for side in (eq.lhs, eq.rhs):
            for s in symbols(side):
                if s.color is not None and s.color.var:
                    problem_colors.add(s.color.name)
    colors = {n: sub.color(Color(n, var=True)) for n in sorted(problem_colors)
              if sub.color(Color(n, var=True)) != Color(n, var=True)}
    erased = sub.erase()
    readings = [normalize(apply(erased, erase_colors(r))) for r in problem.readings]
    residual_vars = set()
    for t in terms.values():
        residual_vars |= var_names(t)
    aux = {n: s for n, s in st.aux if n in residual_vars}
    return Solution(terms, colors, st.abducibles, st.cost, readings,
                    st.flexflex, st.trace, aux)


def initial_state(problem: Problem) -> UnifState:
    eqs = tuple(Equation(beta_normal(e.lhs), beta_normal(e.rhs), e.rel)
                for e in problem.equations)
    return UnifState(unsolved=eqs)


def solve(problem: Problem, trace=None) -> SolveResult:
    """Best-first search for solutions, cheapest first.

    ``trace`` may be a callable receiving one line per rule application.
    """
    opts = problem.options
    start = time.perf_counter()
    result = SolveResult([])
    seq = itertools.count()
    heap = [(0, next(seq), initial_state(problem))]
    seen_keys = set()
    found: list[Solution] = []
    while heap:
        cost, _, st = heapq.heappop(heap)
        if len(found) >= opts.max_solutions and cost > found[-1].cost:
            break
        if result.explored >= opts.max_states:
            result.exhausted = True
            break
        result.explored += 1
        if not st.unsolved:
            sol = _solution(problem, st)
            key = sol.erased_key()
            if key not in seen_keys:
                seen_keys.add(key)
                found.append(sol)
            continue
        succ = expand(problem, st)
        if succ == "depth":
            result.exhausted = True
            result.pruned += 1
            continue
        if trace is not None and succ:
            for s in succ:
                trace(s.trace[-1])
        if not succ:
            result.failed += 1
        for s in succ:
            if s.cost > opts.cost_threshold:
                result.pruned += 1
                continue
            heapq.heappush(heap, (s.cost, next(seq), s))
    found.sort(key=lambda s: (s.cost, s.serialized()))
    result.solutions = found[:opts.max_solutions]
    result.seconds = time.perf_counter() - start
    return result


# -------------------------------------------------------------- certificates

def _compatible(a: Optional[Color], b: Optional[Color]) -> bool:
    return a is None or b is None or a == b


def _colored_equal(l: Term, r: Term) -> bool:
    if type(l) is not type(r):
        return False
    if isinstance(l, (Const, Var)):
        return replace(l, color=None) == replace(r, color=None) and _compatible(l.color, r.color)
    if isinstance(l, BVar):
        return l == r
    if isinstance(l, Abs):
        return l.type == r.type and _colored_equal(l.body, r.body)
    return _colored_equal(l.fun, r.fun) and _colored_equal(l.arg, r.arg)


def _leaf_colors_ok(d) -> bool:
    for leaf in d.leaves():
        eq = leaf.equation
        if is_atomic(eq.lhs) and is_atomic(eq.rhs):
            if not _compatible(eq.lhs.color, eq.rhs.color):
                return False
        elif leaf.rule == "refl" and not _colored_equal(eq.lhs, eq.rhs):
            return False
    return True


def _nontrivial_keys(abds) -> frozenset:
    return frozenset(a.key() for a in abds
                     if erase_colors(a.left) != erase_colors(a.right))


def check_certificate(problem: Problem, sol: Solution) -> tuple[bool, list[str]]:
    """Independently re-verify a solution; returns (ok, diagnoses)."""
    h = problem.hierarchy
    diag: list[str] = []
    try:
        sub = Substitution(sol.terms, sol.colors)
    except IllFormedSubstitution as e:
        return False, [f"ill-formed substitution: {e}"]
    for (name, c), t in sol.terms.items():
        if has_fresh(t):
            diag.append(f"binding of {name} contains a fresh constant")
        if c is not None and not c.var and not is_monochrome(t, c):
            diag.append(f"binding of {name}{color_str(c)} is not {c}-monochrome")
        var = problem.signature.variables.get(name)
        if var is not None:
            try:
                if not any(h.is_subsort(s, var) for s in infer_sorts(h, t)):
                    diag.append(f"binding of {name} does not have sort {var}")
            except (IllSorted, SortError) as e:
                diag.append(f"binding of {name} is ill-sorted: {e}")
    for a in sol.abducibles:
        if not verify_abducible(h, a):
            diag.append(f"abducible {a} fails its sort witness")
    if sum(a.cost for a in sol.abducibles) != sol.cost:
        diag.append("cost is not the sum of abducible costs")

    residual = set()
    for e in sol.residual:
        if isinstance(e, Equation):
            residual |= var_names(e.lhs) | var_names(e.rhs)
    options = []
    for eq in problem.equations:
        l, r = apply(sub, eq.lhs, eta=False), apply(sub, eq.rhs, eta=False)
        if var_names(l) | var_names(r):
            if eq.rel is Relation.EQ and _colored_equal(l, r):
                options.append([frozenset()])
                continue
            if (var_names(l) | var_names(r)) <= residual | set(sol.aux):
                options.append([frozenset()])
                continue
            diag.append(f"unbound variables remain in {eq}")
            continue
        if eq.rel is Relation.EQ:
            if not _colored_equal(beta_normal(l), beta_normal(r)):
                diag.append(f"{eq} does not hold: {show(l)} vs {show(r)}")
            options.append([frozenset()])
            continue
        found = []
        for d in derive(h, Equation(l, r, eq.rel), sol.cost):
            if _leaf_colors_ok(d) and replay(h, d):
                found.append(_nontrivial_keys(d.abducibles()))
        if not found:
            diag.append(f"no colour-consistent derivation of {show(l)} {eq.rel} {show(r)}")
        options.append(found)
    if not diag:
        want = _nontrivial_keys(sol.abducibles)
        if not any(frozenset().union(*combo) == want for combo in itertools.product(*options)):
            diag.append("abducibles do not match any derivation of the instantiated equations")
    return not diag, diag
