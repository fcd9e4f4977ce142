"""Sorted, coloured simply-typed lambda terms.

Bound variables are de Bruijn indices (``BVar``); binder names are kept only
as display hints, so alpha-equivalent terms compare equal. Constants and free
variables carry an optional colour. ``None`` means uncoloured: such a symbol
takes no part in colour equations or monochromaticity checks.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterator, Optional, Union

from .sorts import (Arrow, ArrowType, BaseType, Inter, Sort, SortError,
                    SortHierarchy, SimpleType, Top)

NOT = "not"


class IllSorted(Exception):
    pass


class IllTyped(Exception):
    pass


class IllFormedSubstitution(Exception):
    pass


# --------------------------------------------------------------------- colours

@dataclass(frozen=True, order=True)
class Color:
    """A colour constant or colour variable, possibly negated.

    Negation is a flag, so double negation disappears by construction.
    """
    name: str
    var: bool = False
    neg: bool = False

    def negate(self) -> "Color":
        return replace(self, neg=not self.neg)

    def __str__(self):
        return ("~" if self.neg else "") + self.name


def color_str(c: Optional[Color]) -> str:
    return "" if c is None else f"_{c}"


# ----------------------------------------------------------------------- terms

@dataclass(frozen=True)
class Const:
    name: str
    type: SimpleType
    sorts: tuple = field(default=(), compare=False)
    color: Optional[Color] = None
    fresh: bool = False


@dataclass(frozen=True)
class Var:
    name: str
    type: SimpleType
    sort: Sort = field(compare=False)
    color: Optional[Color] = None


@dataclass(frozen=True)
class BVar:
    index: int


@dataclass(frozen=True)
class Abs:
    type: SimpleType
    sort: Sort
    body: "Term"
    hint: str = field(default="Z", compare=False)


@dataclass(frozen=True)
class App:
    fun: "Term"
    arg: "Term"


Term = Union[Const, Var, BVar, Abs, App]
Symbol = Union[Const, Var]


def app(f: Term, *args: Term) -> Term:
    for a in args:
        f = App(f, a)
    return f


def head_args(t: Term) -> tuple[Term, list[Term]]:
    args = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fun
    return t, args[::-1]


def lam(hint: str, ty: SimpleType, sort: Sort, body: Term) -> Abs:
    return Abs(ty, sort, body, hint)


# ------------------------------------------------------------ de Bruijn basics

def shift(t: Term, d: int, cutoff: int = 0) -> Term:
    if isinstance(t, BVar):
        return BVar(t.index + d) if t.index >= cutoff else t
    if isinstance(t, Abs):
        return replace(t, body=shift(t.body, d, cutoff + 1))
    if isinstance(t, App):
        return App(shift(t.fun, d, cutoff), shift(t.arg, d, cutoff))
    return t


def instantiate(body: Term, arg: Term, depth: int = 0) -> Term:
    """Replace bound index ``depth`` in ``body`` by ``arg`` (one binder removed)."""
    if isinstance(body, BVar):
        if body.index == depth:
            return shift(arg, depth)
        if body.index > depth:
            return BVar(body.index - 1)
        return body
    if isinstance(body, Abs):
        return replace(body, body=instantiate(body.body, arg, depth + 1))
    if isinstance(body, App):
        return App(instantiate(body.fun, arg, depth), instantiate(body.arg, arg, depth))
    return body


def is_closed(t: Term, depth: int = 0) -> bool:
    if isinstance(t, BVar):
        return t.index < depth
    if isinstance(t, Abs):
        return is_closed(t.body, depth + 1)
    if isinstance(t, App):
        return is_closed(t.fun, depth) and is_closed(t.arg, depth)
    return True


# ---------------------------------------------------------------------- typing

def type_of(t: Term, ctx: tuple = ()) -> SimpleType:
    """Simple type of ``t``; ``ctx`` lists binder types, innermost last."""
    if isinstance(t, (Const, Var)):
        return t.type
    if isinstance(t, BVar):
        if t.index >= len(ctx):
            raise IllTyped(f"loose bound variable {t.index}")
        return ctx[-1 - t.index]
    if isinstance(t, Abs):
        return ArrowType(t.type, type_of(t.body, ctx + (t.type,)))
    fty = type_of(t.fun, ctx)
    aty = type_of(t.arg, ctx)
    if not isinstance(fty, ArrowType) or fty.dom != aty:
        raise IllTyped(f"cannot apply {show(t.fun)} : {fty} to {show(t.arg)} : {aty}")
    return fty.cod


# --------------------------------------------------------------- normalisation

def beta_normal(t: Term, fuel: int = 100_000) -> Term:
    budget = [fuel]

    def go(t):
        budget[0] -= 1
        if budget[0] < 0:
            raise RuntimeError("normalisation fuel exhausted (ill-typed term?)")
        if isinstance(t, Abs):
            return replace(t, body=go(t.body))
        head, args = head_args(t)
        if isinstance(head, Abs) and args:
            return go(app(instantiate(head.body, args[0]), *args[1:]))
        return app(head, *(go(a) for a in args))

    return go(t)


def _domain_sort(head: Term, n_applied: int, sctx: tuple) -> Optional[Sort]:
    if isinstance(head, Var):
        s = head.sort
    elif isinstance(head, BVar):
        s = sctx[-1 - head.index]
    elif isinstance(head, Const):
        s = next((x for x in head.sorts if isinstance(x, Arrow)), None)
    else:
        s = None
    for _ in range(n_applied):
        if not isinstance(s, Arrow):
            return None
        s = s.cod
    return s.dom if isinstance(s, Arrow) else None


def eta_long(t: Term, ctx: tuple = (), sctx: tuple = ()) -> Term:
    """Eta-expand a beta-normal term so every atom is applied to all its arguments."""
    if isinstance(t, Abs):
        return replace(t, body=eta_long(t.body, ctx + (t.type,), sctx + (t.sort,)))
    head, args = head_args(t)
    args = [eta_long(a, ctx, sctx) for a in args]
    ty = type_of(t, ctx)
    if isinstance(ty, ArrowType):
        dom_sort = _domain_sort(head, len(args), sctx) or Top(ty.dom)
        body = App(shift(app(head, *args), 1), BVar(0))
        return Abs(ty.dom, dom_sort,
                   eta_long(body, ctx + (ty.dom,), sctx + (dom_sort,)), "Z")
    return app(head, *args)


def canonical_hints(t: Term, depth: int = 0) -> Term:
    if isinstance(t, Abs):
        hint = "Z" if depth == 0 else f"Z{depth}"
        return Abs(t.type, t.sort, canonical_hints(t.body, depth + 1), hint)
    if isinstance(t, App):
        return App(canonical_hints(t.fun, depth), canonical_hints(t.arg, depth))
    return t


def normalize(t: Term) -> Term:
    """Beta-normal, eta-long form with canonical binder names."""
    return canonical_hints(eta_long(beta_normal(t)))


# ---------------------------------------------------------------------- colours

def symbols(t: Term) -> Iterator[Symbol]:
    if isinstance(t, (Const, Var)):
        yield t
    elif isinstance(t, Abs):
        yield from symbols(t.body)
    elif isinstance(t, App):
        yield from symbols(t.fun)
        yield from symbols(t.arg)


def map_symbols(t: Term, fn) -> Term:
    if isinstance(t, (Const, Var)):
        return fn(t)
    if isinstance(t, Abs):
        return replace(t, body=map_symbols(t.body, fn))
    if isinstance(t, App):
        return App(map_symbols(t.fun, fn), map_symbols(t.arg, fn))
    return t


def erase_colors(t: Term) -> Term:
    return map_symbols(t, lambda s: replace(s, color=None))


def recolor(t: Term, c: Optional[Color]) -> Term:
    """Variant of ``t`` with every coloured symbol carrying ``c``."""
    return map_symbols(t, lambda s: s if s.color is None else replace(s, color=c))


def is_monochrome(t: Term, c: Color) -> bool:
    return all(s.color is None or s.color == c for s in symbols(t))


def free_vars(t: Term) -> set[tuple[str, Optional[Color]]]:
    return {(s.name, s.color) for s in symbols(t) if isinstance(s, Var)}


def var_names(t: Term) -> set[str]:
    return {s.name for s in symbols(t) if isinstance(s, Var)}


def has_fresh(t: Term) -> bool:
    return any(isinstance(s, Const) and s.fresh for s in symbols(t))


# ----------------------------------------------------------------- substitution

Key = tuple  # (variable name, colour or None)


class Substitution:
    """Term bindings keyed by coloured variable plus colour-variable bindings.

    Construction enforces that a variable of colour constant ``c`` is bound to
    a ``c``-monochrome term and that all colour variants of one variable have
    the same colour erasure.
    """

    def __init__(self, terms: dict | None = None, colors: dict | None = None):
        self.terms: dict[Key, Term] = dict(terms or {})
        self.colors: dict[str, Color] = dict(colors or {})
        self._check()

    def _check(self):
        erasures: dict[str, Term] = {}
        for (name, c), term in self.terms.items():
            if not is_closed(term):
                raise IllFormedSubstitution(f"binding of {name} is not closed")
            if c is not None and not c.var and not is_monochrome(term, c):
                raise IllFormedSubstitution(
                    f"{name}{color_str(c)} bound to non-{c}-monochrome term {show(term)}")
            er = erase_colors(term)
            if name in erasures and erasures[name] != er:
                raise IllFormedSubstitution(
                    f"colour variants of {name} disagree: {show(erasures[name])} vs {show(er)}")
            erasures[name] = er
        for name, c in self.colors.items():
            if c.var and c.name == name:
                raise IllFormedSubstitution(f"colour variable {name} bound to itself")

    def color(self, c: Optional[Color]) -> Optional[Color]:
        for _ in range(64):
            if c is None or not c.var or c.name not in self.colors:
                return c
            r = self.colors[c.name]
            c = r.negate() if c.neg else r
        raise IllFormedSubstitution("cyclic colour bindings")

    def __eq__(self, other):
        return isinstance(other, Substitution) and \
            self.terms == other.terms and self.colors == other.colors

    def __hash__(self):
        return hash((frozenset(self.terms.items()), frozenset(self.colors.items())))

    def __repr__(self):
        parts = [f"{n}{color_str(c)} := {show(t)}" for (n, c), t in sorted(
            self.terms.items(), key=lambda kv: (kv[0][0], str(kv[0][1])))]
        parts += [f"{n} := {c}" for n, c in sorted(self.colors.items())]
        return "{" + ", ".join(parts) + "}"

    def erase(self) -> "Substitution":
        return Substitution({(n, None): erase_colors(t) for (n, _), t in self.terms.items()})


def apply_once(s: Substitution, t: Term) -> Term:
    def fn(sym):
        c = s.color(sym.color)
        if isinstance(sym, Var):
            key = (sym.name, c)
            if key in s.terms:
                return s.terms[key]
        return sym if c == sym.color else replace(sym, color=c)
    return map_symbols(t, fn)


def apply(s: Substitution, t: Term, eta: bool = True) -> Term:
    """Apply ``s`` (terms and colours) to ``t`` and normalise."""
    for _ in range(64):
        nxt = beta_normal(apply_once(s, t))
        if nxt == t:
            break
        t = nxt
    return normalize(t) if eta else t


# -------------------------------------------------------------------- sorting

def _arrow_views(h: SortHierarchy, s: Sort) -> list[Arrow]:
    if isinstance(s, Arrow):
        return [s]
    if isinstance(s, Top) and isinstance(s.type, ArrowType):
        return [Arrow(h.top(s.type.dom), h.top(s.type.cod))]
    if isinstance(s, Inter):
        return [a for m in s.members for a in _arrow_views(h, m)]
    return [u for u in h.closure(s) if isinstance(u, Arrow)]


def minimal_sorts(h: SortHierarchy, S) -> frozenset:
    S = set(S)
    return frozenset(s for s in S if not any(
        u != s and h.is_subsort(u, s) and not h.is_subsort(s, u) for u in S))


def infer_sorts(h: SortHierarchy, t: Term, ctx: tuple = ()) -> frozenset:
    """Least derivable sorts of ``t``; ``ctx`` holds binder sorts, innermost last."""
    if isinstance(t, Const):
        if not t.sorts:
            raise IllSorted(f"constant {t.name} has no sorts")
        return frozenset(t.sorts)
    if isinstance(t, Var):
        return frozenset({t.sort})
    if isinstance(t, BVar):
        return frozenset({ctx[-1 - t.index]})
    if isinstance(t, Abs):
        return frozenset(Arrow(t.sort, s) for s in infer_sorts(h, t.body, ctx + (t.sort,)))
    F = infer_sorts(h, t.fun, ctx)
    A = infer_sorts(h, t.arg, ctx)
    results = set()
    for f in F:
        for arr in _arrow_views(h, f):
            try:
                if any(h.is_subsort(a, arr.dom) for a in A):
                    results.add(arr.cod)
            except SortError:
                continue
    if not results:
        raise IllSorted(f"no functional sort of {show(t.fun)} accepts {show(t.arg)}")
    return minimal_sorts(h, results)


def has_sort(h: SortHierarchy, t: Term, s: Sort, ctx: tuple = ()) -> bool:
    try:
        return any(h.is_subsort(x, s) for x in infer_sorts(h, t, ctx))
    except (IllSorted, SortError):
        return False


# -------------------------------------------------------------------- display

def show(t: Term, names: tuple = (), colors: bool = True) -> str:
    if isinstance(t, (Const, Var)):
        return t.name + (color_str(t.color) if colors else "")
    if isinstance(t, BVar):
        return names[-1 - t.index] if t.index < len(names) else f"#{t.index}"
    if isinstance(t, Abs):
        name = t.hint
        while name in names:
            name += "'"
        s = _show_sort(t.sort)
        return f"\\{name}:{s}. {show(t.body, names + (name,), colors)}"
    head, args = head_args(t)
    if isinstance(head, Abs):
        return "(" + " ".join([f"({show(head, names, colors)})"] +
                              [_atomic(a, names, colors) for a in args]) + ")"
    return show(head, names, colors) + "(" + ", ".join(show(a, names, colors) for a in args) + ")"


def _atomic(t, names, colors):
    s = show(t, names, colors)
    return f"({s})" if isinstance(t, Abs) else s


def _show_sort(s: Sort) -> str:
    return f"({s})" if isinstance(s, Arrow) else str(s)
