"""Intersection-type webs: relational points, subtyping, membership oracles.

The web of a simple type collects its *points*: ``*`` for the base type, and
``[p1,...,pn] -o p`` for arrows, with a finite multiset on the left.  Points
are the currency of the relational model; the subtyping preorder (covariant
on results, contravariant with the ∀∃ multiset rule on arguments) is the
currency of the qualitative one, whose interpretation is the down-closure of
the relational one.

Membership is decided by derivation search:

* ``rel_member`` — exact resource accounting, contexts are multisets split
  among subderivations, no weakening.  Syntax-directed on beta-normal
  eta-long terms; a beta-redex needs its cut multiset guessed, which is
  bounded by a fuse.
* ``scott_member`` — subsumption at axioms and shared contexts.  Exact on
  normal forms; for other terms it falls back to searching a relational
  witness above the query, and reports ``UNKNOWN`` when the fuse runs out.

The module also carries the small preorder toolkit (down-closed subsets,
down-closed relations, the linear trace) used to check the qualitative
model's function/trace round-trip.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, FrozenSet, Iterable, Mapping, Optional, Tuple

from .lambda_frontend import (
    App, Arrow, Base, Lam, SimpleType, Term, Var, typecheck,
)

__all__ = [
    "Point", "Star", "ArrowPoint", "STAR", "PreorderedWeb", "UNKNOWN",
    "point_size", "refines", "parse_point", "point_to_str",
    "point_to_json", "point_from_json",
    "subtype_leq", "multiset_leq", "enumerate_web", "web_preorder",
    "rel_member", "scott_member",
    "down_sets", "principal", "down_closed_sets",
    "is_down_closed_relation", "all_down_closed_relations",
    "identity_relation", "compose_relations", "fun_of_relation",
    "trace_of_function",
]


# ------------------------------------------------------------------- points

class Point:
    __slots__ = ()


@dataclass(frozen=True)
class Star(Point):
    __slots__ = ()

    def __repr__(self):
        return "*"


@dataclass(frozen=True)
class ArrowPoint(Point):
    args: Tuple[Point, ...]
    result: Point
    __slots__ = ("args", "result")

    def __post_init__(self):
        object.__setattr__(self, "args",
                           tuple(sorted(self.args, key=_point_key)))

    def __repr__(self):
        return point_to_str(self)


STAR = Star()


def point_size(p: Point) -> int:
    """Number of * leaves."""
    if isinstance(p, Star):
        return 1
    return point_size(p.result) + sum(point_size(a) for a in p.args)


def _point_key(p: Point):
    return (point_size(p), point_to_str(p))


def point_to_str(p: Point) -> str:
    if isinstance(p, Star):
        return "*"
    args = ",".join(point_to_str(a) for a in p.args)
    return f"[{args}]-o{point_to_str(p.result)}"


def refines(p: Point, ty: SimpleType) -> bool:
    """Does the point follow the structure of the simple type?"""
    if isinstance(p, Star):
        return isinstance(ty, Base)
    if not isinstance(ty, Arrow):
        return False
    return (all(refines(a, ty.domain) for a in p.args)
            and refines(p.result, ty.codomain))


def parse_point(src: str) -> Point:
    pos = 0

    def skip_ws():
        nonlocal pos
        while pos < len(src) and src[pos].isspace():
            pos += 1

    def parse() -> Point:
        nonlocal pos
        skip_ws()
        if pos < len(src) and src[pos] == "*":
            pos += 1
            return STAR
        if pos < len(src) and src[pos] == "(":
            pos += 1
            inner = parse()
            skip_ws()
            if pos >= len(src) or src[pos] != ")":
                raise ValueError(f"expected ')' at {pos} in {src!r}")
            pos += 1
            return inner
        if pos < len(src) and src[pos] == "[":
            pos += 1
            args = []
            skip_ws()
            if pos < len(src) and src[pos] == "]":
                pos += 1
            else:
                while True:
                    args.append(parse())
                    skip_ws()
                    if pos < len(src) and src[pos] == ",":
                        pos += 1
                        continue
                    if pos < len(src) and src[pos] == "]":
                        pos += 1
                        break
                    raise ValueError(f"expected ',' or ']' at {pos} in {src!r}")
            skip_ws()
            if src[pos:pos + 2] != "-o":
                raise ValueError(f"expected '-o' at {pos} in {src!r}")
            pos += 2
            return ArrowPoint(tuple(args), parse())
        raise ValueError(f"cannot read a point at {pos} in {src!r}")

    out = parse()
    skip_ws()
    if pos != len(src):
        raise ValueError(f"trailing input at {pos} in {src!r}")
    return out


def point_to_json(p: Point):
    if isinstance(p, Star):
        return "*"
    return {"args": [point_to_json(a) for a in p.args],
            "result": point_to_json(p.result)}


def point_from_json(obj) -> Point:
    if obj == "*":
        return STAR
    return ArrowPoint(tuple(point_from_json(a) for a in obj["args"]),
                      point_from_json(obj["result"]))


# ----------------------------------------------------------------- subtyping

def subtype_leq(a: Point, b: Point) -> bool:
    """Structural subtyping: covariant result, contravariant arguments."""
    if isinstance(a, Star) and isinstance(b, Star):
        return True
    if isinstance(a, ArrowPoint) and isinstance(b, ArrowPoint):
        return (multiset_leq(b.args, a.args)
                and subtype_leq(a.result, b.result))
    raise ValueError(f"points of different shapes: {a!r} vs {b!r}")


def multiset_leq(ma: Iterable[Point], mb: Iterable[Point]) -> bool:
    """[a_1..a_n] <= [b_1..b_m] iff every a_i lies below some b_j."""
    mb = tuple(mb)
    return all(any(subtype_leq(a, b) for b in mb) for a in ma)


# ------------------------------------------------------------------- webs

@lru_cache(maxsize=None)
def _web(ty: SimpleType, max_size: int) -> Tuple[Point, ...]:
    if max_size <= 0:
        return ()
    if isinstance(ty, Base):
        return (STAR,)
    out = []
    for res in _web(ty.codomain, max_size):
        room = max_size - point_size(res)
        for args in _multisets(ty.domain, room):
            out.append(ArrowPoint(args, res))
    return tuple(sorted(set(out), key=_point_key))


def _multisets(ty: SimpleType, room: int) -> Tuple[Tuple[Point, ...], ...]:
    """All canonical multisets over web(ty) with total size <= room."""
    elems = _web(ty, room)
    out = [()]
    def extend(prefix, start, left):
        for i in range(start, len(elems)):
            s = point_size(elems[i])
            if s > left:
                continue
            nxt = prefix + (elems[i],)
            out.append(nxt)
            extend(nxt, i, left - s)
    extend((), 0, room)
    return tuple(tuple(sorted(m, key=_point_key)) for m in out)


def enumerate_web(ty: SimpleType, max_size: int) -> FrozenSet[Point]:
    """All points refining ``ty`` with at most ``max_size`` * leaves."""
    return frozenset(_web(ty, max_size))


# ------------------------------------------------------------ rel membership

class RefinementError(ValueError):
    pass


def _freeze_ctx(ctx) -> Tuple:
    items = []
    for name in sorted(ctx):
        pts = tuple(sorted(ctx[name], key=_point_key))
        if pts:
            items.append((name, pts))
    return tuple(items)


def _ctx_remove(ctx: Tuple, name: str, pt: Point) -> Tuple:
    out = []
    for n, pts in ctx:
        if n == name:
            lst = list(pts)
            lst.remove(pt)
            if lst:
                out.append((n, tuple(lst)))
        else:
            out.append((n, pts))
    return tuple(out)


def _rename_apart(t: Term, used: set, types: Dict[str, SimpleType]) -> Term:
    """Give every binder a globally fresh name and record binder types."""
    if isinstance(t, Var):
        return t
    if isinstance(t, Lam):
        name = t.binder
        k = 0
        while name in used:
            name = f"{t.binder}#{k}"
            k += 1
        used.add(name)
        types[name] = t.annotation
        body = t.body
        if name != t.binder:
            body = _substitute_var(body, t.binder, name)
        return Lam(name, t.annotation, _rename_apart(body, used, types))
    return App(_rename_apart(t.fun, used, types),
               _rename_apart(t.arg, used, types))


def _substitute_var(t: Term, old: str, new: str) -> Term:
    if isinstance(t, Var):
        return Var(new) if t.name == old else t
    if isinstance(t, Lam):
        if t.binder == old:
            return t
        return Lam(t.binder, t.annotation, _substitute_var(t.body, old, new))
    return App(_substitute_var(t.fun, old, new),
               _substitute_var(t.arg, old, new))


def _spine(t: Term):
    args = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fun
    args.reverse()
    return t, args


def _peel(p: Point, k: int):
    """Split an arrow point into k argument multisets and the tail."""
    args = []
    for _ in range(k):
        if not isinstance(p, ArrowPoint):
            return None
        args.append(p.args)
        p = p.result
    return args, p


class _RelSearch:
    """Exact derivation search with multiset contexts.

    Contexts are consumed exactly: the axiom requires a singleton context,
    an application splits the context among the function and one
    subderivation per argument-point.  The cut multiset of a beta-redex is
    guessed from the web bounded by ``redex_fuse``.
    """

    def __init__(self, types: Dict[str, SimpleType], redex_fuse: int):
        self.types = types
        self.redex_fuse = redex_fuse
        self.memo: Dict[Tuple, bool] = {}
        self.fv: Dict[Term, FrozenSet[str]] = {}

    def free_vars(self, t: Term) -> FrozenSet[str]:
        got = self.fv.get(t)
        if got is None:
            if isinstance(t, Var):
                got = frozenset((t.name,))
            elif isinstance(t, Lam):
                got = self.free_vars(t.body) - {t.binder}
            else:
                got = self.free_vars(t.fun) | self.free_vars(t.arg)
            self.fv[t] = got
        return got

    def derive(self, ctx: Tuple, t: Term, p: Point) -> bool:
        key = (ctx, t, p)
        got = self.memo.get(key)
        if got is not None:
            return got
        self.memo[key] = False  # cycle guard; search is finite anyway
        got = self._derive(ctx, t, p)
        self.memo[key] = got
        return got

    def _derive(self, ctx: Tuple, t: Term, p: Point) -> bool:
        if isinstance(t, Var):
            return ctx == ((t.name, (p,)),)
        if isinstance(t, Lam):
            if not isinstance(p, ArrowPoint):
                return False
            inner = dict(ctx)
            assert t.binder not in inner
            if p.args:
                inner[t.binder] = p.args
            return self.derive(_freeze_ctx(inner), t.body, p.result)
        head, args = _spine(t)
        if isinstance(head, Var):
            y = head.name
            available = dict(ctx).get(y, ())
            for gamma in sorted(set(available), key=_point_key):
                peeled = _peel(gamma, len(args))
                if peeled is None:
                    continue
                arg_multisets, tail = peeled
                if tail != p:
                    continue
                obligations = [(args[i], a)
                               for i, m in enumerate(arg_multisets)
                               for a in m]
                rest = _ctx_remove(ctx, y, gamma)
                if self.split(rest, tuple(obligations)):
                    return True
            return False
        # beta-redex at the head: guess the cut multiset
        assert isinstance(head, Lam)
        fun, arg = t.fun, t.arg
        arg_ty = typecheck(self.types, arg)
        for cut in _multisets(arg_ty, self.redex_fuse):
            obligations = [(arg, a) for a in cut]
            # distribute ctx between the function part and the arguments
            target = ArrowPoint(cut, p)
            for fun_ctx, rest in self._bipartitions(ctx, fun):
                if self.derive(fun_ctx, fun, target) \
                        and self.split(rest, tuple(obligations)):
                    return True
        return False

    def _bipartitions(self, ctx: Tuple, left_term: Term):
        """All ways to carve out a sub-context for ``left_term``."""
        fv = self.free_vars(left_term)
        names = [(n, pts) for n, pts in ctx]
        choices = []
        for n, pts in names:
            if n in fv:
                subsets = []
                for k in range(len(pts) + 1):
                    subsets.extend(set(itertools.combinations(pts, k)))
                choices.append([(n, tuple(s)) for s in set(subsets)])
            else:
                choices.append([(n, ())])
        for combo in itertools.product(*choices):
            left, right = {}, {}
            for (n, pts), (_, taken) in zip(names, combo):
                taken_list = list(taken)
                remaining = list(pts)
                for x in taken_list:
                    remaining.remove(x)
                if taken_list:
                    left[n] = tuple(taken_list)
                if remaining:
                    right[n] = tuple(remaining)
            yield _freeze_ctx(left), _freeze_ctx(right)

    def split(self, ctx: Tuple, obligations: Tuple) -> bool:
        """Can the context be split so every (term, point) pair derives?"""
        if not obligations:
            return ctx == ()
        if not ctx:
            # all remaining obligations must derive from nothing
            return all(self.derive((), tm, pt) for tm, pt in obligations)
        key = ("split", ctx, obligations)
        got = self.memo.get(key)
        if got is not None:
            return got
        self.memo[key] = False
        # assign the first context element to one of the obligations that
        # can actually use it
        (name, pts) = ctx[0]
        pt0 = pts[0]
        rest_ctx = _ctx_remove(ctx, name, pt0)
        result = False
        for i, (tm, target) in enumerate(obligations):
            if name not in self.free_vars(tm):
                continue
            # try giving pt0 (plus later elements, found recursively) to i
            if self._assign(rest_ctx, obligations, i, {name: [pt0]}):
                result = True
                break
        self.memo[key] = result
        return result

    def _assign(self, ctx: Tuple, obligations: Tuple, i: int,
                taken: Dict[str, list]) -> bool:
        """Obligation i has provisionally taken ``taken``; finish by choosing
        the rest of its share from ctx, then recurse on the others."""
        tm, target = obligations[i]
        fv = self.free_vars(tm)
        usable = [(n, pt) for (n, pts) in ctx for pt in pts if n in fv]
        others = obligations[:i] + obligations[i + 1:]
        seen = set()
        for extra in self._subsets(usable):
            share = {n: list(v) for n, v in taken.items()}
            rest = ctx
            for n, pt in extra:
                share.setdefault(n, []).append(pt)
                rest = _ctx_remove(rest, n, pt)
            share_key = _freeze_ctx(share)
            if share_key in seen:
                continue
            seen.add(share_key)
            if self.derive(share_key, tm, target) and self.split(rest, others):
                return True
        return False

    @staticmethod
    def _subsets(items):
        for k in range(len(items) + 1):
            yield from itertools.combinations(items, k)


def rel_member(ctx: Mapping[str, Iterable[Point]], t: Term, p: Point,
               redex_fuse: int = 6) -> bool:
    """Derivability with exact resources: does the point belong to the
    relational interpretation of the term?"""
    types: Dict[str, SimpleType] = {}
    used = set(ctx)
    t2 = _rename_apart(t, used, types)
    search = _RelSearch(types={**_free_types_from(ctx), **types},
                        redex_fuse=redex_fuse)
    frozen = _freeze_ctx({n: tuple(v) for n, v in ctx.items()})
    return search.derive(frozen, t2, p)


def _free_types_from(ctx) -> Dict[str, SimpleType]:
    # free variables' simple types are reconstructed from their points'
    # shapes; a point determines the type skeleton it refines
    out = {}
    for name, pts in ctx.items():
        for p in pts:
            out[name] = _shape_of(p)
            break
    return out


def _shape_of(p: Point) -> SimpleType:
    if isinstance(p, Star):
        return Base()
    dom = _shape_of(p.args[0]) if p.args else Base()
    return Arrow(dom, _shape_of(p.result))


# ---------------------------------------------------------- scott membership

class _Unknown:
    """Distinct truth value for fuse exhaustion."""

    def __bool__(self):
        raise TypeError("unknown result used as a boolean")

    def __repr__(self):
        return "UNKNOWN"


UNKNOWN = _Unknown()


def _is_normal(t: Term) -> bool:
    if isinstance(t, Var):
        return True
    if isinstance(t, Lam):
        return _is_normal(t.body)
    head, args = _spine(t)
    return isinstance(head, Var) and all(_is_normal(a) for a in args)


def _scott_derive(ctx: Tuple, t: Term, p: Point, memo: Dict) -> bool:
    """Shared-context system with subsumption at axioms: exact for the
    qualitative interpretation on beta-normal terms."""
    key = (ctx, t, p)
    got = memo.get(key)
    if got is not None:
        return got
    memo[key] = False
    result = False
    if isinstance(t, Var):
        available = dict(ctx).get(t.name, ())
        result = any(subtype_leq(p, gamma) for gamma in available)
    elif isinstance(t, Lam):
        if isinstance(p, ArrowPoint):
            inner = dict(ctx)
            inner[t.binder] = tuple(sorted(set(p.args), key=_point_key))
            if not inner[t.binder]:
                del inner[t.binder]
            result = _scott_derive(
                tuple(sorted(inner.items())), t.body, p.result, memo)
    else:
        head, args = _spine(t)
        assert isinstance(head, Var), "scott derivation needs a normal form"
        available = dict(ctx).get(head.name, ())
        for gamma in available:
            peeled = _peel(gamma, len(args))
            if peeled is None:
                continue
            arg_multisets, tail = peeled
            if not subtype_leq(tail, p):
                continue
            if all(_scott_derive(ctx, args[i], a, memo)
                   for i, m in enumerate(arg_multisets) for a in m):
                result = True
                break
    memo[key] = result
    return result


def scott_member(ctx: Mapping[str, Iterable[Point]], t: Term, p: Point,
                 fuse: Optional[int] = None):
    """Down-closure membership: True, False, or UNKNOWN on fuse exhaustion.

    On beta-normal terms the shared-context derivation system decides
    exactly.  Otherwise we search for a relational witness above the query,
    capped at ``fuse`` (default four times the query size).
    """
    types: Dict[str, SimpleType] = {}
    used = set(ctx)
    t2 = _rename_apart(t, used, types)
    if _is_normal(t2):
        frozen = tuple(sorted(
            (n, tuple(sorted(set(v), key=_point_key))) for n, v in ctx.items()
            if tuple(v)))
        return _scott_derive(frozen, t2, p, {})
    cap = fuse if fuse is not None else 4 * max(point_size(p), 1)
    ty = typecheck({**_free_types_from(ctx), **types}, t2) if ctx else \
        typecheck(types, t2)
    for q in sorted(enumerate_web(ty, cap), key=_point_key):
        if subtype_leq(p, q) and rel_member(ctx, t, q):
            return True
    return UNKNOWN


# ------------------------------------------------------- preorder toolkit

class PreorderedWeb:
    """A finite carrier with a preorder decision procedure."""

    __slots__ = ("carrier", "leq")

    def __init__(self, carrier: Iterable, leq: Optional[Callable] = None):
        self.carrier = frozenset(carrier)
        self.leq = leq if leq is not None else (lambda a, b: a == b)

    def __eq__(self, other):
        if not isinstance(other, PreorderedWeb):
            return NotImplemented
        if self.carrier != other.carrier:
            return False
        return all(self.leq(a, b) == other.leq(a, b)
                   for a in self.carrier for b in self.carrier)

    def __hash__(self):
        return hash(self.carrier)

    def __repr__(self):
        return f"PreorderedWeb({len(self.carrier)} elements)"


def web_preorder(ty: SimpleType, max_size: int) -> PreorderedWeb:
    return PreorderedWeb(enumerate_web(ty, max_size), subtype_leq)


def down_sets(web: PreorderedWeb, generators: Iterable) -> FrozenSet:
    """Down-closure of the generators within the carrier."""
    gens = tuple(generators)
    return frozenset(a for a in web.carrier
                     if any(web.leq(a, g) for g in gens))


def principal(web: PreorderedWeb, a) -> FrozenSet:
    return down_sets(web, (a,))


def down_closed_sets(web: PreorderedWeb) -> FrozenSet[FrozenSet]:
    """All down-closed subsets of a small carrier (unions of principals)."""
    out = {frozenset()}
    frontier = [frozenset()]
    principals = [principal(web, a) for a in web.carrier]
    while frontier:
        nxt = []
        for s in frontier:
            for p in principals:
                u = s | p
                if u not in out:
                    out.add(u)
                    nxt.append(u)
        frontier = nxt
    return frozenset(out)


def is_down_closed_relation(src: PreorderedWeb, dst: PreorderedWeb,
                            rel: FrozenSet[Tuple]) -> bool:
    """Down-closed as a subset of src^op x dst: the source may grow, the
    destination may shrink."""
    for (a, b) in rel:
        for a2 in src.carrier:
            if not src.leq(a, a2):
                continue
            for b2 in dst.carrier:
                if dst.leq(b2, b) and (a2, b2) not in rel:
                    return False
    return True


def all_down_closed_relations(src: PreorderedWeb, dst: PreorderedWeb
                              ) -> FrozenSet[FrozenSet[Tuple]]:
    """Every down-closed relation, as unions of principal blocks."""
    blocks = []
    for a in src.carrier:
        for b in dst.carrier:
            blocks.append(frozenset(
                (a2, b2) for a2 in src.carrier for b2 in dst.carrier
                if src.leq(a, a2) and dst.leq(b2, b)))
    out = {frozenset()}
    frontier = [frozenset()]
    while frontier:
        nxt = []
        for s in frontier:
            for blk in blocks:
                u = s | blk
                if u not in out:
                    out.add(u)
                    nxt.append(u)
        frontier = nxt
    return frozenset(out)


def identity_relation(web: PreorderedWeb) -> FrozenSet[Tuple]:
    return frozenset((a, a2) for a in web.carrier for a2 in web.carrier
                     if web.leq(a2, a))


def compose_relations(first: FrozenSet[Tuple], second: FrozenSet[Tuple]
                      ) -> FrozenSet[Tuple]:
    by_mid = {}
    for (b, c) in second:
        by_mid.setdefault(b, set()).add(c)
    return frozenset((a, c) for (a, b) in first for c in by_mid.get(b, ()))


def fun_of_relation(rel: FrozenSet[Tuple]) -> Callable[[FrozenSet], FrozenSet]:
    """The monotone map on down-closed sets induced by a relation."""
    def apply(x: FrozenSet) -> FrozenSet:
        return frozenset(b for (a, b) in rel if a in x)
    return apply


def trace_of_function(src: PreorderedWeb, f: Callable[[FrozenSet], FrozenSet]
                      ) -> FrozenSet[Tuple]:
    """Graph of the function on principal down-sets."""
    return frozenset((a, b) for a in src.carrier
                     for b in f(principal(src, a)))
