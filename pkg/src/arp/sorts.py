"""Sort hierarchies over simple types.

Sorts refine simple types. A hierarchy holds the atoms declared for each
type, the subsort edges between them, disjointness declarations and the
least sorts of the signature's constants. Negated atoms, intersections and
functional (arrow) sorts are derived forms.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Union


class SortError(Exception):
    """Raised for malformed hierarchies and ill-typed sort queries."""


# ---------------------------------------------------------------- simple types

@dataclass(frozen=True)
class BaseType:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class ArrowType:
    dom: "SimpleType"
    cod: "SimpleType"

    def __str__(self):
        d = f"({self.dom})" if isinstance(self.dom, ArrowType) else str(self.dom)
        return f"{d} -> {self.cod}"


SimpleType = Union[BaseType, ArrowType]


def arrow_type(*types: SimpleType) -> SimpleType:
    """Right-associated arrow type ``t1 -> t2 -> ... -> tn``."""
    result = types[-1]
    for t in reversed(types[:-1]):
        result = ArrowType(t, result)
    return result


# ---------------------------------------------------------------------- sorts

@dataclass(frozen=True)
class Atom:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Neg:
    name: str

    def __str__(self):
        return "!" + self.name


@dataclass(frozen=True)
class Inter:
    members: frozenset

    def __post_init__(self):
        if len(self.members) < 2:
            raise SortError("an intersection needs at least two members")
        for m in self.members:
            if not isinstance(m, (Atom, Neg)):
                raise SortError(f"intersection member {m} is not an atom or negated atom")
        names = [m.name for m in self.members]
        if len(set(names)) != len(names):
            raise SortError(f"intersection {self} contains a sort and its complement")

    def __str__(self):
        return " & ".join(sorted(map(str, self.members)))


@dataclass(frozen=True)
class Arrow:
    dom: "Sort"
    cod: "Sort"

    def __str__(self):
        d = f"({self.dom})" if isinstance(self.dom, Arrow) else str(self.dom)
        return f"{d} -> {self.cod}"


@dataclass(frozen=True)
class Top:
    """The implicit greatest sort of a simple type."""
    type: SimpleType

    def __str__(self):
        return f"T[{self.type}]"


Sort = Union[Atom, Neg, Inter, Arrow, Top]


def arrow_sort(*sorts: Sort) -> Sort:
    result = sorts[-1]
    for s in reversed(sorts[:-1]):
        result = Arrow(s, result)
    return result


def negate(s: Sort) -> Sort:
    if isinstance(s, Atom):
        return Neg(s.name)
    if isinstance(s, Neg):
        return Atom(s.name)
    raise SortError(f"only atoms can be negated, not {s}")


def arrow_parts(s: Sort) -> tuple[list[Sort], Sort]:
    doms = []
    while isinstance(s, Arrow):
        doms.append(s.dom)
        s = s.cod
    return doms, s


# ----------------------------------------------------------------- hierarchy

class SortHierarchy:
    """An immutable, validated sort hierarchy.

    ``tops`` maps each base type name to the name of its top atom (the type
    name itself when the document gives none). ``edges`` lists declared
    ``lower <= upper`` links where ``lower`` is an atom or negated atom and
    ``upper`` is an atom, negated atom or arrow sort.
    """

    def __init__(self, tops: dict[str, str], atoms: dict[str, SimpleType],
                 edges: Iterable[tuple[Sort, Sort]] = (),
                 disjoint: Iterable[tuple[str, str, bool]] = (),
                 constants: dict[str, tuple[Sort, ...]] | None = None):
        self.tops = dict(tops)
        self.atoms = dict(atoms)
        for ty, top in self.tops.items():
            self.atoms.setdefault(top, BaseType(ty))
        self.edges = tuple(edges)
        self.disjoint = tuple(disjoint)
        self.constants = dict(constants or {})
        self._validate_references()
        self._check_acyclic()
        self._build_graphs()
        self._check_consistency()

    # -- construction helpers

    def _validate_references(self):
        for lo, hi in self.edges:
            if not isinstance(lo, (Atom, Neg)):
                raise SortError(f"edge source must be an atom or negated atom, got {lo}")
            self.type_of(lo)
            self.type_of(hi)
            if self.type_of(lo) != self.type_of(hi):
                raise SortError(f"edge {lo} <= {hi} relates sorts of different types")
        for a, b, _ in self.disjoint:
            for n in (a, b):
                if n not in self.atoms:
                    raise SortError(f"unknown atom {n!r} in disjointness declaration")
            if self.atoms[a] != self.atoms[b]:
                raise SortError(f"disjoint atoms {a} and {b} have different types")
        for c, sorts in self.constants.items():
            if not sorts:
                raise SortError(f"constant {c!r} has no sorts")
            types = {self.type_of(s) for s in sorts}
            if len(types) != 1:
                raise SortError(f"constant {c!r} has sorts of different types")
            names = [s.name for s in sorts if isinstance(s, (Atom, Neg))]
            if len(set(names)) != len(names):
                raise SortError(f"constant {c!r} is declared with an empty sort")

    def _check_acyclic(self):
        graph: dict[str, list[str]] = {}
        for lo, hi in self.edges:
            if isinstance(lo, Atom) and isinstance(hi, Atom):
                graph.setdefault(lo.name, []).append(hi.name)
        state: dict[str, int] = {}

        def visit(n, path):
            state[n] = 1
            for m in graph.get(n, ()):
                if state.get(m) == 1:
                    raise SortError("cycle in subsort edges: " + " <= ".join(path + [n, m]))
                if m not in state:
                    visit(m, path + [n])
            state[n] = 2

        for n in sorted(graph):
            if n not in state:
                visit(n, [])

    def _build_graphs(self):
        # _metric: declared links (plus complements and implicit top links),
        # used for distances.  _logic: additionally the negation consequences
        # of disjointness and contraposition, used for subsumption.
        metric: dict[Sort, set[Sort]] = {}
        logic: dict[Sort, set[Sort]] = {}

        def link(g, lo, hi):
            g.setdefault(lo, set()).add(hi)

        for lo, hi in self.edges:
            link(metric, lo, hi)
            link(logic, lo, hi)
            if isinstance(lo, Atom) and isinstance(hi, Atom):
                link(logic, Neg(hi.name), Neg(lo.name))
            if isinstance(lo, Atom) and isinstance(hi, Neg):
                link(logic, Atom(hi.name), Neg(lo.name))
        for a, b, complementary in self.disjoint:
            link(logic, Atom(a), Neg(b))
            link(logic, Atom(b), Neg(a))
            if complementary:
                for g in (metric, logic):
                    link(g, Neg(a), Atom(b))
                    link(g, Neg(b), Atom(a))

        nodes: set[Sort] = set()
        for name in self.atoms:
            nodes.add(Atom(name))
            nodes.add(Neg(name))
        for g in (metric, logic):
            for lo, his in g.items():
                nodes.add(lo)
                nodes.update(his)
        top_names = set(self.tops.values())
        for n in nodes:
            if isinstance(n, Atom) and n.name in top_names:
                continue
            top = self.top(self.type_of(n))
            has_positive_up = any(not isinstance(h, Neg) for h in metric.get(n, ()))
            if not has_positive_up:
                link(metric, n, top)
            link(logic, n, top)

        self._metric = {k: frozenset(v) for k, v in metric.items()}
        self._logic = {k: frozenset(v) for k, v in logic.items()}
        self._closure: dict[Sort, frozenset] = {}
        self._dist: dict[Sort, dict[Sort, int]] = {}
        for n in nodes:
            self._closure[n] = frozenset(self._reach(self._logic, n))
            self._dist[n] = self._bfs(self._metric, n)

    @staticmethod
    def _reach(graph, start):
        seen = {start}
        todo = [start]
        while todo:
            n = todo.pop()
            for m in graph.get(n, ()):
                if m not in seen:
                    seen.add(m)
                    todo.append(m)
        return seen

    @staticmethod
    def _bfs(graph, start):
        dist = {start: 0}
        queue = deque([start])
        while queue:
            n = queue.popleft()
            for m in graph.get(n, ()):
                if m not in dist:
                    dist[m] = dist[n] + 1
                    queue.append(m)
        return dist

    def _check_consistency(self):
        for name in sorted(self.atoms):
            up = self._closure[Atom(name)]
            for s in up:
                if isinstance(s, Atom) and Neg(s.name) in up:
                    raise SortError(
                        f"atom {name} lies below both {s.name} and !{s.name} "
                        "(disjointness contradiction)")
        for c, sorts in self.constants.items():
            up = set()
            for s in sorts:
                up |= self.closure(s)
            for s in up:
                if isinstance(s, Atom) and Neg(s.name) in up:
                    raise SortError(f"constant {c!r} has an empty sort (both {s} and !{s})")

    # -- basic accessors

    def top(self, ty: SimpleType) -> Sort:
        if isinstance(ty, BaseType) and ty.name in self.tops:
            return Atom(self.tops[ty.name])
        return Top(ty)

    def is_top(self, s: Sort) -> bool:
        return s == self.top(self.type_of(s))

    def type_of(self, s: Sort) -> SimpleType:
        if isinstance(s, (Atom, Neg)):
            if s.name not in self.atoms:
                raise SortError(f"unknown atom {s.name!r}")
            return self.atoms[s.name]
        if isinstance(s, Inter):
            types = {self.type_of(m) for m in s.members}
            if len(types) != 1:
                raise SortError(f"intersection {s} mixes types")
            return types.pop()
        if isinstance(s, Arrow):
            return ArrowType(self.type_of(s.dom), self.type_of(s.cod))
        if isinstance(s, Top):
            return s.type
        raise SortError(f"not a sort: {s!r}")

    def atoms_of_type(self, ty: SimpleType) -> list[str]:
        return sorted(n for n, t in self.atoms.items() if t == ty)

    def closure(self, s: Sort) -> frozenset:
        """Sorts reachable upwards from ``s`` through declared and derived links."""
        s = self._canon(s)
        if s in self._closure:
            return self._closure[s]
        if isinstance(s, Inter):
            out = set()
            for m in s.members:
                out |= self.closure(m)
            return frozenset(out | {s})
        return frozenset({s, self.top(self.type_of(s))})

    def _canon(self, s):
        if isinstance(s, Top):
            return self.top(s.type)
        if isinstance(s, Arrow):
            return Arrow(self._canon(s.dom), self._canon(s.cod))
        return s

    # -- queries

    def is_subsort(self, s: Sort, t: Sort) -> bool:
        if self.type_of(s) != self.type_of(t):
            raise SortError(f"cannot compare {s} and {t}: type mismatch")
        return self._leq(self._canon(s), self._canon(t))

    def _leq(self, s, t) -> bool:
        if s == t or self.is_top(t):
            return True
        if isinstance(t, Inter):
            return all(self._leq(s, m) for m in t.members)
        if isinstance(s, Inter):
            return any(self._leq(m, t) for m in s.members)
        if isinstance(s, Arrow):
            if isinstance(t, Arrow):
                return self._leq(t.dom, s.dom) and self._leq(s.cod, t.cod)
            return False
        # s is an atom, negated atom or top
        up = self.closure(s)
        if t in up:
            return True
        if isinstance(t, Arrow):
            return any(isinstance(u, Arrow) and self._leq(u, t) for u in up)
        return False

    def sorts_of_constant(self, name: str) -> tuple[Sort, ...]:
        try:
            return self.constants[name]
        except KeyError:
            raise SortError(f"undeclared constant {name!r}") from None

    def _same_type(self, *groups):
        types = {self.type_of(s) for g in groups for s in g}
        if len(types) > 1:
            raise SortError("sort sets of different types: " + ", ".join(sorted(map(str, types))))
        return types.pop() if types else None

    def _common_candidates(self, S1, S2):
        pool = set()
        for s in list(S1) + list(S2):
            pool |= self.closure(s)
        common = set()
        for c in pool:
            if isinstance(c, Neg):
                continue
            if any(self._leq(a, c) for a in S1) and any(self._leq(b, c) for b in S2):
                common.add(c)
        return common

    def common_sorts(self, S1: Iterable[Sort], S2: Iterable[Sort]) -> set[Sort]:
        """Most specific positive sorts lying above a member of each set."""
        S1 = [self._canon(s) for s in S1]
        S2 = [self._canon(s) for s in S2]
        self._same_type(S1, S2)
        common = self._common_candidates(S1, S2)
        return {c for c in common
                if not any(d != c and self._leq(d, c) and not self._leq(c, d) for d in common)}

    def entails(self, S: Iterable[Sort], t: Sort) -> bool:
        return any(self._leq(self._canon(s), self._canon(t)) for s in S)

    def distinguishing_sorts(self, S1: Iterable[Sort], S2: Iterable[Sort]) -> set[str]:
        """Atoms held by one side whose complement is held by the other."""
        S1, S2 = list(S1), list(S2)
        ty = self._same_type(S1, S2)
        if ty is None:
            return set()
        top = self.top(ty)
        out = set()
        for name in self.atoms_of_type(ty):
            if Atom(name) == top:
                continue
            pos, neg = Atom(name), Neg(name)
            if (self.entails(S1, pos) and self.entails(S2, neg)) or \
                    (self.entails(S2, pos) and self.entails(S1, neg)):
                out.add(name)
        return out

    def edge_distance(self, s: Sort, target: Sort) -> float:
        """Number of subsort links crossed going up from ``s`` to ``target``."""
        s, target = self._canon(s), self._canon(target)
        if s == target:
            return 0
        if s in self._dist and target in self._dist[s]:
            return self._dist[s][target]
        if not self._leq(s, target):
            return math.inf
        best = math.inf
        # sorts outside the declared graph (inferred arrows, intersections)
        hops = self._dist.get(s, {})
        for u, d in hops.items():
            if isinstance(u, Arrow) and self._leq(u, target):
                best = min(best, d + 1)
        if isinstance(s, Inter):
            best = min(best, min(self.edge_distance(m, target) for m in s.members))
        return best if best < math.inf else 1

    def distance(self, S1: Iterable[Sort], S2: Iterable[Sort]) -> float:
        """Conceptual distance: the shortest up-path pair meeting at a common sort."""
        S1 = [self._canon(s) for s in S1]
        S2 = [self._canon(s) for s in S2]
        self._same_type(S1, S2)
        best = math.inf
        for c in self._common_candidates(S1, S2):
            d = min(self.edge_distance(a, c) for a in S1) + \
                min(self.edge_distance(b, c) for b in S2)
            best = min(best, d)
        return best

    def stats(self) -> dict[str, int]:
        return {"types": len(self.tops), "atoms": len(self.atoms),
                "edges": len(self.edges), "disjoint": len(self.disjoint),
                "constants": len(self.constants)}
