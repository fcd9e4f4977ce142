"""Abductive calculus for similarity and contrastive parallelism.

Given two terms, :func:`derive` enumerates every way of explaining why they
are similar (``=s``) or c-parallel (``=p``) by decomposing them in parallel
and justifying the atomic leaves with sort-based abducibles. Colours are
ignored here; the unifier in :mod:`arp.reconstruct` handles them.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .sorts import Neg, Atom, Sort, SortError, SortHierarchy
from .terms import (NOT, Abs, App, Const, IllSorted, IllTyped, Term, Var,
                    erase_colors, has_sort, head_args, infer_sorts, instantiate,
                    show, symbols, type_of)


class Relation(Enum):
    EQ = "=="
    SIM = "=s"
    CPAR = "=p"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class Equation:
    lhs: Term
    rhs: Term
    rel: Relation

    def __str__(self):
        return f"{show(self.lhs)} {self.rel} {show(self.rhs)}"

    def flipped(self) -> "Equation":
        return Equation(self.rhs, self.lhs, self.rel)


JUST_S = "just-s"
JUST_C = "just-c"


@dataclass(frozen=True)
class Abducible:
    """An assumed similarity or contrast between two atoms, with its witness."""
    kind: str
    left: Term
    right: Term
    common: Sort
    distinguishing: tuple = ()
    cost: int = 0
    binding: Optional[tuple] = None     # (variable name, term) when a variable was bound

    @property
    def relation(self) -> Relation:
        return Relation.CPAR if self.kind == JUST_C else Relation.SIM

    def key(self) -> tuple:
        """Colour-blind identity, independent of orientation."""
        pair = sorted([show(self.left, colors=False), show(self.right, colors=False)])
        return (self.kind, *pair)

    def __str__(self):
        l, r = show(self.left, colors=False), show(self.right, colors=False)
        return f"{l} {self.relation} {r}"

    def box(self, h: SortHierarchy | None = None) -> list[str]:
        l, r = show(self.left, colors=False), show(self.right, colors=False)
        lines = [f"{l},{r} : {self.common}"]
        for delta in self.distinguishing:
            if h is not None and _holds(h, self.right, Atom(delta)):
                lines.append(f"{r} : {delta}; {l} : !{delta}")
            else:
                lines.append(f"{l} : {delta}; {r} : !{delta}")
        if self.binding:
            lines.append(f"{self.binding[0]} := {show(self.binding[1], colors=False)}")
        return lines


def _holds(h, t, s):
    try:
        return h.entails(infer_sorts(h, t), s)
    except (IllSorted, SortError):
        return False


@dataclass(frozen=True)
class Derivation:
    equation: Equation
    rule: str
    children: tuple = ()
    abducible: Optional[Abducible] = None
    bindings: tuple = ()

    @property
    def cost(self) -> int:
        return sum(a.cost for a in self.abducibles())

    def abducibles(self) -> list[Abducible]:
        if self.abducible is not None:
            return [self.abducible]
        return [a for c in self.children for a in c.abducibles()]

    def leaves(self) -> list["Derivation"]:
        if not self.children:
            return [self]
        return [x for c in self.children for x in c.leaves()]

    def sort_key(self):
        n_sim = sum(1 for a in self.abducibles()
                    if a.kind == JUST_S and erase_colors(a.left) != erase_colors(a.right))
        return (self.cost, n_sim, render(self))


# ------------------------------------------------------------------ the rules

def is_atomic(t: Term) -> bool:
    return isinstance(t, (Const, Var))


def is_flex(t: Term) -> bool:
    return isinstance(head_args(t)[0], Var)


def _negated(t: Term) -> Optional[Term]:
    head, args = head_args(t)
    if isinstance(head, Const) and head.name == NOT and len(args) == 1:
        return args[0]
    return None


def decompose_app(eq: Equation) -> Optional[list[tuple[Equation, Equation]]]:
    """Split ``A B ~ C D`` into alternative pairs of component equations.

    For ``=p`` these are the three disjuncts of the application rule, in order.
    ``=s`` and ``==`` relate the components by the same relation.
    Returns None when the rule does not apply.
    """
    l, r = eq.lhs, eq.rhs
    if not (isinstance(l, App) and isinstance(r, App)):
        return None
    try:
        if type_of(l.fun) != type_of(r.fun):
            return None
    except IllTyped:
        return None
    P, S = Relation.CPAR, Relation.SIM
    if eq.rel is P:
        return [(Equation(l.fun, r.fun, P), Equation(l.arg, r.arg, S)),
                (Equation(l.fun, r.fun, S), Equation(l.arg, r.arg, P)),
                (Equation(l.fun, r.fun, P), Equation(l.arg, r.arg, P))]
    return [(Equation(l.fun, r.fun, eq.rel), Equation(l.arg, r.arg, eq.rel))]


def fresh_constant(binder: Abs, name: str) -> Const:
    return Const(name, binder.type, (binder.sort,), None, fresh=True)


def decompose_abs(eq: Equation, name: str = "c'") -> Optional[Equation]:
    """Open binders with a fresh constant: ``\\x.A ~ \\y.B`` becomes ``A[c] ~ B[c]``."""
    l, r = eq.lhs, eq.rhs
    if isinstance(l, Abs) and isinstance(r, Abs):
        c = fresh_constant(l, name)
        return Equation(instantiate(l.body, c), instantiate(r.body, c), eq.rel)
    if isinstance(l, Abs):
        c = fresh_constant(l, name)
        return Equation(instantiate(l.body, c), App(r, c), eq.rel)
    if isinstance(r, Abs):
        c = fresh_constant(r, name)
        return Equation(App(l, c), instantiate(r.body, c), eq.rel)
    return None


def negation_toggle(eq: Equation) -> Optional[Equation]:
    """Strip one negation and swap ``=s`` and ``=p``; two negations cancel."""
    if eq.rel is Relation.EQ:
        return None
    nl, nr = _negated(eq.lhs), _negated(eq.rhs)
    swap = {Relation.SIM: Relation.CPAR, Relation.CPAR: Relation.SIM}
    if nl is not None and nr is not None:
        return Equation(nl, nr, eq.rel)
    if nr is not None:
        return Equation(eq.lhs, nr, swap[eq.rel])
    if nl is not None:
        return Equation(nl, eq.rhs, swap[eq.rel])
    return None


def _sorts(h, t):
    return infer_sorts(h, t)


def witness_cost(h: SortHierarchy, S1, S2, common: Sort) -> int:
    return int(min(h.edge_distance(a, common) for a in S1) +
               min(h.edge_distance(b, common) for b in S2))


def justify(h: SortHierarchy, eq: Equation) -> list[Abducible]:
    """Abducibles licensing an atomic ``=s`` or ``=p`` equation.

    A free variable facing a constant may be bound to it (similarity only),
    the binding is recorded on the abducible.
    """
    l, r = eq.lhs, eq.rhs
    if eq.rel is Relation.EQ or not (is_atomic(l) and is_atomic(r)):
        return []
    same = erase_colors(l) == erase_colors(r)
    if isinstance(l, Var) or isinstance(r, Var):
        if eq.rel is Relation.CPAR:
            return []
        if same:
            return [Abducible(JUST_S, l, r, l.sort, (), 0)]
        if isinstance(l, Var) and isinstance(r, Var):
            return []
        var, other = (l, r) if isinstance(l, Var) else (r, l)
        if not has_sort(h, other, var.sort):
            return []
        S1, S2 = _sorts(h, l), _sorts(h, r)
        out = []
        for common in sorted(h.common_sorts(S1, S2), key=str):
            if h.is_top(common):
                continue
            out.append(Abducible(JUST_S, l, r, common, (), witness_cost(h, S1, S2, common),
                                 (var.name, erase_colors(other))))
        return out
    S1, S2 = _sorts(h, l), _sorts(h, r)
    commons = sorted((c for c in h.common_sorts(S1, S2) if not h.is_top(c)), key=str)
    if eq.rel is Relation.SIM:
        if same:
            return [Abducible(JUST_S, l, r, c, (), 0) for c in commons[:1] or
                    sorted(S1, key=str)[:1]]
        return [Abducible(JUST_S, l, r, c, (), witness_cost(h, S1, S2, c)) for c in commons]
    if same:
        return []
    dist = tuple(sorted(h.distinguishing_sorts(S1, S2)))
    if not dist:
        return []
    return [Abducible(JUST_C, l, r, c, dist, witness_cost(h, S1, S2, c)) for c in commons]


# ------------------------------------------------------------------ derivation

def _merge(*binding_sets) -> Optional[tuple]:
    out: dict = {}
    for bs in binding_sets:
        for name, term in bs:
            if name in out and out[name] != term:
                return None
            out[name] = term
    return tuple(sorted(out.items(), key=lambda kv: kv[0]))


def derive(h: SortHierarchy, eq: Equation, threshold: float = 10) -> list[Derivation]:
    """All derivations of ``eq`` with total cost within ``threshold``, cheapest first."""
    counter = itertools.count(1)
    results = _derive(h, eq, threshold, counter)
    results = [d for d in results if d.cost <= threshold]
    return sorted(set(results), key=Derivation.sort_key)


def _derive(h, eq: Equation, threshold, counter) -> list[Derivation]:
    l, r = eq.lhs, eq.rhs
    for side in (l, r):
        if not is_atomic(side) and is_flex(side):
            raise ValueError(f"flexible term {show(side)} needs the unifier, not derive")

    if eq.rel is Relation.EQ:
        if erase_colors(l) == erase_colors(r):
            return [Derivation(eq, "refl")]
        if is_atomic(l) and is_atomic(r):
            if isinstance(l, Var) and has_sort(h, r, l.sort):
                return [Derivation(eq, "bind", bindings=((l.name, erase_colors(r)),))]
            if isinstance(r, Var) and has_sort(h, l, r.sort):
                return [Derivation(eq, "bind", bindings=((r.name, erase_colors(l)),))]
            return []

    toggled = negation_toggle(eq)
    if toggled is not None:
        return [Derivation(eq, "neg", (d,), bindings=d.bindings)
                for d in _derive(h, toggled, threshold, counter)]

    opened = decompose_abs(eq, f"c'{next(counter)}")
    if opened is not None:
        return [Derivation(eq, "abs", (d,), bindings=d.bindings)
                for d in _derive(h, opened, threshold, counter)]

    if is_atomic(l) and is_atomic(r):
        out = []
        for a in justify(h, eq):
            out.append(Derivation(eq, a.kind, abducible=a,
                                  bindings=(a.binding,) if a.binding else ()))
        return out

    branches = decompose_app(eq)
    if not branches:
        return []
    names = {Relation.CPAR: "cpar-app", Relation.SIM: "sim-app", Relation.EQ: "eq-app"}
    out = []
    for k, (e1, e2) in enumerate(branches, 1):
        left = _derive(h, e1, threshold, counter)
        if not left:
            continue
        right = _derive(h, e2, threshold, counter)
        for d1, d2 in itertools.product(left, right):
            if d1.cost + d2.cost > threshold:
                continue
            merged = _merge(d1.bindings, d2.bindings)
            if merged is None:
                continue
            rule = names[eq.rel] + (f"-{k}" if len(branches) > 1 else "")
            out.append(Derivation(eq, rule, (d1, d2), bindings=merged))
    return out


# --------------------------------------------------------------- verification

def verify_abducible(h: SortHierarchy, a: Abducible) -> bool:
    """Check the witness sorts of ``a`` against the hierarchy."""
    try:
        S1, S2 = infer_sorts(h, a.left), infer_sorts(h, a.right)
        if h.type_of(a.common) != h.type_of(next(iter(S1))):
            return False
        if not (h.entails(S1, a.common) and h.entails(S2, a.common)):
            return False
        same = erase_colors(a.left) == erase_colors(a.right)
        if h.is_top(a.common) and not same:
            return False
        for delta in a.distinguishing:
            pos, neg = Atom(delta), Neg(delta)
            if not ((h.entails(S1, pos) and h.entails(S2, neg)) or
                    (h.entails(S2, pos) and h.entails(S1, neg))):
                return False
        if a.kind == JUST_C and not a.distinguishing:
            return False
        expected = 0 if same else witness_cost(h, S1, S2, a.common)
        if a.cost != expected:
            return False
        if a.binding is not None:
            name, term = a.binding
            var = a.left if isinstance(a.left, Var) else a.right
            if var.name != name or not has_sort(h, term, var.sort):
                return False
        return True
    except (IllSorted, SortError, StopIteration):
        return False


def replay(h: SortHierarchy, d: Derivation) -> bool:
    """Re-check every rule application of ``d`` from its root equation down."""
    eq = d.equation
    if d.rule == "refl":
        return not d.children and erase_colors(eq.lhs) == erase_colors(eq.rhs)
    if d.rule == "bind":
        if d.children or len(d.bindings) != 1:
            return False
        name, term = d.bindings[0]
        var, other = (eq.lhs, eq.rhs) if isinstance(eq.lhs, Var) else (eq.rhs, eq.lhs)
        return isinstance(var, Var) and var.name == name and \
            erase_colors(other) == term and has_sort(h, other, var.sort)
    if d.rule in (JUST_S, JUST_C):
        a = d.abducible
        return a is not None and a.kind == d.rule and a.relation is eq.rel and \
            {a.left, a.right} == {eq.lhs, eq.rhs} and verify_abducible(h, a)
    if d.rule == "neg":
        return len(d.children) == 1 and negation_toggle(eq) == d.children[0].equation \
            and replay(h, d.children[0])
    if d.rule == "abs":
        if len(d.children) != 1:
            return False
        child = d.children[0].equation
        fresh = _fresh_in(child.lhs) + _fresh_in(child.rhs)
        if not fresh:
            return False
        return decompose_abs(eq, fresh[0].name) == child and replay(h, d.children[0])
    if "-app" in d.rule:
        branches = decompose_app(eq)
        if not branches or len(d.children) != 2:
            return False
        k = int(d.rule.rsplit("-", 1)[1]) if d.rule.startswith("cpar") else 1
        e1, e2 = branches[k - 1]
        return (d.children[0].equation, d.children[1].equation) == (e1, e2) and \
            all(replay(h, c) for c in d.children) and \
            _merge(d.children[0].bindings, d.children[1].bindings) == d.bindings
    return False


def _fresh_in(t):
    return [s for s in symbols(t) if isinstance(s, Const) and s.fresh]


# ------------------------------------------------------------------ rendering

def render(d: Derivation, h: SortHierarchy | None = None, indent: int = 0) -> str:
    """Tree-shaped trace: one equation per node, abducible boxes as leaves."""
    pad = "  " * indent
    lines = [f"{pad}{_eq_str(d.equation)}    [{d.rule}]"]
    if d.abducible is not None:
        box = " ; ".join(d.abducible.box(h))
        lines.append(f"{pad}  [ {box} ]  cost {d.abducible.cost}")
    for name, term in d.bindings if d.rule == "bind" else ():
        lines.append(f"{pad}  [ {name} := {show(term, colors=False)} ]")
    for c in d.children:
        lines.append(render(c, h, indent + 1))
    return "\n".join(lines)


def _eq_str(eq: Equation) -> str:
    return f"{show(eq.lhs, colors=False)} {eq.rel} {show(eq.rhs, colors=False)}"
