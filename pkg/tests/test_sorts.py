import itertools
import math

import pytest
from hypothesis import given, settings, strategies as st

from arp.sorts import (Arrow, ArrowType, Atom, BaseType, Inter, Neg, SortError,
                       SortHierarchy, Top, arrow_parts, arrow_sort, negate)
from arp.syntax import ParseError, load_hierarchy

E = BaseType("e")


# -- the bundled hierarchy

def test_fixture_loads(h):
    assert h.stats()["atoms"] == 19
    assert h.is_subsort(Atom("Man"), Atom("Human"))
    assert h.is_subsort(Atom("Man"), Atom("Real"))
    assert not h.is_subsort(Atom("Human"), Atom("Man"))


def test_negated_edge_and_disjointness(h):
    assert h.is_subsort(Atom("Woman"), Neg("Man"))
    assert h.is_subsort(Atom("Man"), Neg("Woman"))      # contraposition
    assert h.is_subsort(Atom("Game"), Neg("Animate"))
    assert h.is_subsort(Neg("Animate"), Atom("Inanimate"))
    assert h.is_subsort(Atom("Woman"), Neg("Male"))


def test_common_sorts(h):
    assert h.common_sorts([Atom("Man")], [Atom("Woman")]) == {Atom("Human")}
    assert h.common_sorts([Atom("Woman")], [Atom("Game")]) == {Atom("Real")}
    assert h.common_sorts([Atom("Man")], [Atom("Dog"), Atom("Male")]) == {Atom("Male")}


def test_distinguishing(h):
    d = h.distinguishing_sorts([Atom("Man")], [Atom("Woman")])
    assert "Man" in d
    assert h.distinguishing_sorts([Atom("Man")], [Atom("Man")]) == set()


def test_plausibility_distances(h):
    C = h.constants
    assert h.distance(C["m"], C["j"]) == 2
    assert h.distance(C["m"], C["j"]) < h.distance(C["m"], C["g"])
    # jon/peter, jon/spot, jon/pi: increasingly implausible
    d = [h.distance(C["jon"], C[x]) for x in ("peter", "spot", "pi")]
    assert d == sorted(d) and len(set(d)) == 3


def test_type_mismatch_raises(h):
    with pytest.raises(SortError):
        h.is_subsort(Atom("Man"), Atom("Social"))


def test_functional_sorts(h, srt):
    assert h.is_subsort(Atom("Social"), srt("Human -> Human -> t"))
    like = h.constants["l"]
    assert h.entails(like, srt("Human -> Real -> t"))
    assert h.entails(like, srt("Man -> Human -> t"))     # contravariant domain


def test_arrow_helpers():
    a = arrow_sort(Atom("A"), Atom("B"), Atom("C"))
    assert arrow_parts(a) == ([Atom("A"), Atom("B")], Atom("C"))
    assert str(a) == "A -> B -> C"
    assert negate(negate(Atom("A"))) == Atom("A")
    with pytest.raises(SortError):
        negate(a)


def test_intersection_validation():
    with pytest.raises(SortError):
        Inter(frozenset({Atom("A")}))
    with pytest.raises(SortError):
        Inter(frozenset({Atom("A"), Neg("A")}))


@pytest.mark.parametrize("doc, msg", [
    ("type e E\nsort A : e\nsort B : e\nedge A <= B\nedge B <= A", "cycle"),
    ("type e E\nsort A : e\nsort B : e\nsort C : e\nedge C <= A\nedge C <= B\ndisjoint A B", "contradiction"),
    ("type e E\nedge A <= E", "unknown sort"),
    ("type e E\ntype t\nsort A : e\nedge A <= t", "different types"),
    ("type e E\nsort A : e\nconst a : A & !A", "empty sort"),
    ("type e E\nfoo bar", "unknown directive"),
])
def test_bad_hierarchies(doc, msg):
    with pytest.raises(ParseError, match=msg):
        load_hierarchy(doc)


def test_parse_error_position():
    with pytest.raises(ParseError) as exc:
        load_hierarchy("type e E\nsort A : e\nedge A <= Nope", "h.srt")
    assert (exc.value.line, exc.value.col) == (3, 11)


# -- random hierarchies against a closure oracle

@st.composite
def dags(draw, max_atoms=7):
    n = draw(st.integers(2, max_atoms))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=len(pairs))) if pairs else []
    return n, sorted(chosen)


def build(n, edges):
    atoms = {f"A{i}": E for i in range(n)}
    return SortHierarchy({"e": "Top"}, atoms, [(Atom(f"A{i}"), Atom(f"A{j}")) for i, j in edges])


def oracle_reach(n, edges):
    top = n
    R = [[i == j for j in range(n + 1)] for i in range(n + 1)]
    for i in range(n):
        R[i][top] = True
    for i, j in edges:
        R[i][j] = True
    for k, i, j in itertools.product(range(n + 1), repeat=3):
        if R[i][k] and R[k][j]:
            R[i][j] = True
    return R


def oracle_dist(n, edges):
    top = n
    D = [[0 if i == j else math.inf for j in range(n + 1)] for i in range(n + 1)]
    ups = {i for i, _ in edges}
    for i, j in edges:
        D[i][j] = 1
    for i in range(n):
        if i not in ups:
            D[i][top] = 1
    for k, i, j in itertools.product(range(n + 1), repeat=3):
        D[i][j] = min(D[i][j], D[i][k] + D[k][j])
    return D


def name(n, i):
    return Atom("Top") if i == n else Atom(f"A{i}")


@settings(max_examples=60, deadline=None)
@given(dags())
def test_subsort_matches_closure_oracle(dag):
    n, edges = dag
    h = build(n, edges)
    R = oracle_reach(n, edges)
    for i, j in itertools.product(range(n + 1), repeat=2):
        assert h.is_subsort(name(n, i), name(n, j)) == R[i][j]


@settings(max_examples=60, deadline=None)
@given(dags())
def test_distance_matches_shortest_path_oracle(dag):
    n, edges = dag
    h = build(n, edges)
    D = oracle_dist(n, edges)
    for i, j in itertools.product(range(n), repeat=2):
        want = min(D[i][c] + D[j][c] for c in range(n + 1))
        assert h.distance([name(n, i)], [name(n, j)]) == want


@settings(max_examples=40, deadline=None)
@given(dags())
def test_partial_order_laws(dag):
    n, edges = dag
    h = build(n, edges)
    sorts = [Atom(a) for a in h.atoms] + [Neg(a) for a in h.atoms if a != "Top"]
    for a in sorts:
        assert h.is_subsort(a, a)
    for a, b in itertools.product(sorts, repeat=2):
        if a != b and h.is_subsort(a, b):
            assert not h.is_subsort(b, a)
    for a, b, c in itertools.product(sorts, repeat=3):
        if h.is_subsort(a, b) and h.is_subsort(b, c):
            assert h.is_subsort(a, c)


@settings(max_examples=40, deadline=None)
@given(dags())
def test_distance_symmetry_and_identity(dag):
    n, edges = dag
    h = build(n, edges)
    for i, j in itertools.product(range(n), repeat=2):
        a, b = [name(n, i)], [name(n, j)]
        assert h.distance(a, b) == h.distance(b, a)
        assert (h.distance(a, b) == 0) == (i == j)


def test_fixture_partial_order_laws(h):
    sorts = [Atom(a) for a in h.atoms if h.atoms[a] == E] + \
            [Neg(a) for a in h.atoms if h.atoms[a] == E and a != "Entity"]
    for a, b, c in itertools.product(sorts, repeat=3):
        if h.is_subsort(a, b) and h.is_subsort(b, c):
            assert h.is_subsort(a, c)
    # antisymmetric up to the equivalences declared by complementary pairs
    comp = {frozenset({Atom(x), Neg(y)}) for x, y, c in h.disjoint if c} | \
           {frozenset({Atom(y), Neg(x)}) for x, y, c in h.disjoint if c}
    for a, b in itertools.product(sorts, repeat=2):
        if a != b and h.is_subsort(a, b) and h.is_subsort(b, a):
            assert frozenset({a, b}) in comp, (a, b)


@settings(max_examples=50, deadline=None)
@given(st.data())
def test_arrow_monotonicity(h, data):
    ents = sorted(a for a, t in h.atoms.items() if t == E)
    a1, a2, b1, b2 = (Atom(data.draw(st.sampled_from(ents))) for _ in range(4))
    if h.is_subsort(a2, a1) and h.is_subsort(b1, b2):
        assert h.is_subsort(Arrow(a1, b1), Arrow(a2, b2))
    if h.is_subsort(Arrow(a1, b1), Arrow(a2, b2)):
        assert h.is_subsort(a2, a1) and h.is_subsort(b1, b2)


def test_top_of_arrow_type(h):
    ty = ArrowType(E, E)
    assert h.is_top(Top(ty))
    assert h.is_subsort(Arrow(Atom("Man"), Atom("Human")), Top(ty))
