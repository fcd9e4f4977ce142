"""Random small parallelism problems over restricted signatures."""
from hypothesis import assume, strategies as st

from arp.pcalc import Equation, Relation
from arp.reconstruct import Options, Problem
from arp.sorts import Arrow, Atom, SortHierarchy
from arp.syntax import Signature, parse_term
from arp.terms import IllSorted, infer_sorts

RELATIONS = ["l", "d", "s", "o"]
ENTITIES = ["j", "m", "p", "g", "spot", "pi"]
ARG_SORTS = ["Human", "Woman", "Man", "Real"]


def restrict(h, names) -> SortHierarchy:
    consts = {n: h.constants[n] for n in names}
    return SortHierarchy(h.tops, h.atoms, h.edges, h.disjoint, consts)


def well_sorted(h, t) -> bool:
    try:
        infer_sorts(h, t)
        return True
    except IllSorted:
        return False


@st.composite
def gapping_problems(draw, h, rel=None, copying=None):
    """``p(u_A, w_~A) ~ R_~pe(v_pe)`` with at most six signature constants."""
    rels = draw(st.lists(st.sampled_from(RELATIONS), min_size=1, max_size=2, unique=True))
    ents = draw(st.lists(st.sampled_from(ENTITIES), min_size=2, max_size=6 - len(rels), unique=True))
    p = rels[0]
    u, w, v = (draw(st.sampled_from(ents)) for _ in range(3))
    rel = rel or draw(st.sampled_from([Relation.CPAR, Relation.SIM]))
    copying = draw(st.booleans()) if copying is None else copying
    arg = draw(st.sampled_from(ARG_SORTS))
    hr = restrict(h, rels + ents)
    sig = Signature(hr, variables={"R": Arrow(Atom(arg), Atom("t"))})
    lhs = parse_term(sig, f"{p}({u}_A, {w}_~A)")
    rhs = parse_term(sig, f"R_~pe({v}_pe)")
    assume(well_sorted(hr, lhs) and well_sorted(hr, rhs))
    opts = Options(copying_constraint=copying, cost_threshold=8, max_solutions=50)
    return Problem(sig, [Equation(lhs, rhs, rel)], [parse_term(sig, f"R({v})")], opts)


@st.composite
def vpe_problems(draw, h):
    """``p(u_pe, w) == R_~pe(u_pe)``: the source contains its own parallel element."""
    rels = draw(st.lists(st.sampled_from(RELATIONS), min_size=1, max_size=2, unique=True))
    ents = draw(st.lists(st.sampled_from(ENTITIES), min_size=2, max_size=6 - len(rels), unique=True))
    p = rels[0]
    u, w = (draw(st.sampled_from(ents)) for _ in range(2))
    arg = draw(st.sampled_from(ARG_SORTS))
    hr = restrict(h, rels + ents)
    sig = Signature(hr, variables={"R": Arrow(Atom(arg), Atom("t"))})
    lhs = parse_term(sig, f"{p}({u}_pe, {w})")
    rhs = parse_term(sig, f"R_~pe({u}_pe)")
    assume(well_sorted(hr, lhs) and well_sorted(hr, rhs))
    return Problem(sig, [Equation(lhs, rhs, Relation.EQ)], [], Options(max_solutions=50))


def any_problem(h):
    return st.one_of(gapping_problems(h), vpe_problems(h))
