"""Budgeted deterministic strategies over mixed boards.

A strategy is a finite event forest whose events *display* to tagged
addresses of a stage ``A |- B``.  The forest is a bounded window onto an
unbounded strategy: negative (Opponent) branching is materialized up to
the budget width, while positive behaviour is exact.  Every strategy
also carries a *view* — a lazy description of the unbounded strategy —
which composition queries to materialize exactly the events an
interaction demands, at whatever copy indices it demands them.

Copy indices at replication points follow one coding discipline
throughout: a replicated product stores component ``k`` at copy indices
``pair_code(k-1, slot)``, and promotion re-indexes slots by the thread
that owns them.  The codings are injective with disjoint ranges, so
distinct uses never collide; they are what the diagonal pairing
:func:`cantor_pair` is for.

Composition is schedule-free: each event determines the interaction it
needs (its causal histories in both strategies, closed under
synchronization on shared addresses), and it survives into the
composite exactly when that requirement is conflict-free and acyclic.
"""

from __future__ import annotations

import itertools
import json
from collections import Counter
from dataclasses import dataclass
from typing import (Callable, Dict, FrozenSet, Iterable, Iterator, List,
                    Mapping, Optional, Sequence, Set, Tuple)

from .boards import (Budget, HomBoard, MixedBoard, MoveAddress, bang,
                     context_board, hom, interpret_type, lollipop, tensor,
                     with_)
from .boards import _Bang, _Lolli, _Tensor, _With  # shape inspection
from .event_core import EventForest, Position, Symmetry, canonical_position
from .lambda_frontend import (App, Arrow, Lam, SimpleType, Term, Var,
                              typecheck)

__all__ = [
    "Strategy", "MatchingPair", "CheckResult", "InteractionIndex",
    "cantor_pair", "cantor_unpair", "index_universe",
    "materialized_addresses",
    "copycat", "dereliction", "evaluation", "variable",
    "seely", "seely_inv", "context_merge",
    "tensor_strat", "pair", "curry", "uncurry", "promote",
    "unwrap_singleton_context",
    "secured", "pair_secured", "compose", "interpret_term",
    "check_dsinn", "plus_covered_positions", "reached_positions",
    "positively_isomorphic", "strategy_to_dot", "plus_covered_json",
]


# ------------------------------------------------------------ index plumbing

def cantor_pair(i: int, j: int) -> int:
    """The diagonal bijection N x N -> N."""
    s = i + j
    return s * (s + 1) // 2 + j


def cantor_unpair(n: int) -> Tuple[int, int]:
    """Inverse of :func:`cantor_pair`."""
    w = int(((8 * n + 1) ** 0.5 - 1) // 2)
    while w * (w + 1) // 2 > n:
        w -= 1
    while (w + 1) * (w + 2) // 2 <= n:
        w += 1
    j = n - w * (w + 1) // 2
    return w - j, j


def index_universe(width: int, nesting: int = 0) -> Tuple[int, ...]:
    """Copy indices reachable from ``range(width)`` by ``nesting`` rounds
    of the pairing codes used at replication points."""
    u: Set[int] = set(range(width))
    for _ in range(nesting):
        u |= {cantor_pair(i, j) for i in range(width) for j in u}
        u |= {cantor_pair(j, i) for i in range(width) for j in u}
    return tuple(sorted(u))


def materialized_addresses(board: MixedBoard, universe: Sequence[int],
                           depth: int) -> List[MoveAddress]:
    """All addresses of ``board`` of depth at most ``depth`` whose copy
    indices at duplication points lie in ``universe``."""
    arena = board.arena
    out: List[MoveAddress] = []

    def rec(prefix: Optional[MoveAddress], move: str, d: int) -> None:
        indices: Sequence[int] = universe if arena.ind[move] == "nat" else (0,)
        for i in indices:
            a = (MoveAddress(((move, i),)) if prefix is None
                 else prefix.child(move, i))
            out.append(a)
            if d < depth:
                for c in arena.children(move):
                    rec(a, c, d + 1)

    for r in arena.roots:
        rec(None, r, 1)
    return out


def _arena_height(board: MixedBoard) -> int:
    arena = board.arena
    depth: Dict[str, int] = {}

    def d(m: str) -> int:
        if m not in depth:
            p = arena.parent.get(m)
            depth[m] = 1 if p is None else 1 + d(p)
        return depth[m]

    return max((d(m) for m in arena.moves), default=0)


def _fit(budget: Budget, *boards: MixedBoard) -> Budget:
    """A budget whose depth is large enough to cover the given boards."""
    need = max((_arena_height(b) for b in boards), default=0)
    if budget.depth >= need:
        return budget
    return Budget(depth=need, width=budget.width,
                  max_events=budget.max_events)


# ------------------------------------------------------------------ strategy

TaggedAddress = Tuple[str, MoveAddress]


class Strategy:
    """An event forest displayed to tagged addresses of a hom stage.

    ``display`` maps every event to ``("L", a)`` or ``("R", a)``; forest
    polarities must agree with the stage polarity of the displayed
    address (left-side polarities are flipped).  ``view`` exposes the
    strategy beyond the materialized window; composition uses it, tests
    and exports read the window.  Strategies built by :func:`compose`
    carry an :class:`InteractionIndex` in ``interactions``.
    """

    __slots__ = ("board", "forest", "display", "budget", "universe", "name",
                 "interactions", "_view")

    def __init__(self, board: HomBoard, forest: EventForest,
                 display: Mapping[object, TaggedAddress], budget: Budget,
                 universe: Optional[Sequence[int]] = None,
                 name: str = "strategy",
                 interactions: Optional["InteractionIndex"] = None,
                 view: Optional["_View"] = None):
        self.board = board
        self.forest = forest
        self.display: Dict[object, TaggedAddress] = dict(display)
        self.budget = budget
        self.universe: Tuple[int, ...] = (
            tuple(universe) if universe is not None
            else tuple(range(budget.width)))
        self.name = name
        self.interactions = interactions
        self._view = view
        self._validate()

    @property
    def view(self) -> "_View":
        if self._view is None:
            self._view = _MatView(self)
        return self._view

    def _validate(self) -> None:
        if self.forest.events != frozenset(self.display):
            raise ValueError("display map must cover exactly the events")
        for e, tagged in self.display.items():
            self.board.validate_address(tagged)
            if self.forest.polarity[e] != self.board.polarity_of(tagged):
                raise ValueError(
                    f"event {e!r} has polarity {self.forest.polarity[e]} "
                    f"but displays to {tagged!r} of polarity "
                    f"{self.board.polarity_of(tagged)}")

    def __repr__(self) -> str:
        return (f"Strategy({self.name}: {len(self.forest.events)} events "
                f"on {self.board!r})")

    # -- configurations ----------------------------------------------------

    def _enabled(self, x: FrozenSet) -> Iterator:
        shown = [self.display[e] for e in x]
        taken = set(shown)
        for e in self.forest.events:
            if e in x:
                continue
            p = self.forest.parent.get(e)
            if p is not None and p not in x:
                continue
            d = self.display[e]
            if d in taken:
                continue
            if any(self.forest.in_conflict(e, f) for f in x):
                continue
            if any(self.board.addresses_conflict(d, s) for s in shown):
                continue
            yield e

    def extensions(self, x: FrozenSet) -> Iterator:
        """Events extending a configuration by one."""
        yield from self._enabled(x)

    def configurations(self, max_events: Optional[int] = None
                       ) -> Iterator[FrozenSet]:
        """All configurations of the window (down-closed, compatible,
        displaying to a valid stage configuration), smallest first."""
        seen = {frozenset()}
        frontier: List[FrozenSet] = [frozenset()]
        yield frozenset()
        while frontier:
            nxt = []
            for x in frontier:
                if max_events is not None and len(x) >= max_events:
                    continue
                for e in self._enabled(x):
                    y = x | {e}
                    if y in seen:
                        continue
                    seen.add(y)
                    nxt.append(y)
                    yield y
            frontier = nxt

    def is_plus_covered(self, x: Iterable) -> bool:
        return _forest_plus_covered(self.forest, frozenset(x))

    def plus_covered_configurations(self, max_events: Optional[int] = None
                                    ) -> Iterator[FrozenSet]:
        for x in self.configurations(max_events):
            if self.is_plus_covered(x):
                yield x

    # -- display -----------------------------------------------------------

    def display_config(self, x: Iterable):
        """The pair of board configurations a configuration displays to."""
        left, right = [], []
        for e in x:
            side, a = self.display[e]
            (left if side == "L" else right).append(a)
        return (self.board.left.configuration(left),
                self.board.right.configuration(right))

    def payoff_of(self, x: Iterable) -> int:
        left, right = [], []
        for e in x:
            side, a = self.display[e]
            (left if side == "L" else right).append(a)
        return self.board.payoff(left, right)


def _forest_plus_covered(forest: EventForest, x: FrozenSet) -> bool:
    for e in x:
        if (forest.polarity[e] == "-"
                and not any(c in x for c in forest.children(e))):
            return False
    return True


def _renamed(s: Strategy, name: str) -> Strategy:
    return Strategy(s.board, s.forest, s.display, s.budget, s.universe,
                    name, s.interactions, s._view)


# ------------------------------------------------------------------- views
#
# A view answers questions about the unbounded strategy behind a window:
# which events display to a given tagged address, what an event's parent
# and address are, whether two events conflict, and which positive events
# answer a given one.  Event identities agree with the window where the
# two overlap.

class _View:
    stage: HomBoard

    def events_at(self, tagged: TaggedAddress) -> Tuple:
        raise NotImplementedError

    def describe(self, ev) -> Tuple[TaggedAddress, Optional[object]]:
        """(displayed address, parent event or None)."""
        raise NotImplementedError

    def responses(self, ev) -> Tuple:
        """Positive events caused directly by ``ev``."""
        raise NotImplementedError

    def in_conflict(self, a, b) -> bool:
        raise NotImplementedError


class _MatView(_View):
    """View of a strategy that is exactly its window."""

    def __init__(self, s: Strategy):
        self.stage = s.board
        self._s = s
        self._at: Dict[TaggedAddress, List] = {}
        for e, d in s.display.items():
            self._at.setdefault(d, []).append(e)

    def events_at(self, tagged: TaggedAddress) -> Tuple:
        return tuple(self._at.get(tagged, ()))

    def describe(self, ev):
        s = self._s
        return (s.display[ev], s.forest.parent.get(ev))

    def responses(self, ev) -> Tuple:
        f = self._s.forest
        return tuple(c for c in f.children(ev) if f.polarity[c] == "+")

    def in_conflict(self, a, b) -> bool:
        return self._s.forest.in_conflict(a, b)


class _RelayView(_View):
    """Copycat-like behaviour: every negative address is received, and a
    twin on the other side echoes it wherever the address map is
    defined.  Event ids are the tagged addresses themselves, matching
    the materialized windows of the relay constructors.

    ``fwd`` maps right addresses to left addresses, ``inv`` left to
    right; both may be partial (returning None).
    """

    def __init__(self, stage: HomBoard,
                 fwd: Callable[[MoveAddress], Optional[MoveAddress]],
                 inv: Callable[[MoveAddress], Optional[MoveAddress]]):
        self.stage = stage
        self._fwd = fwd
        self._inv = inv

    def _twin(self, ev: TaggedAddress) -> Optional[TaggedAddress]:
        side, a = ev
        if side == "R":
            la = self._fwd(a)
            return None if la is None else ("L", la)
        ra = self._inv(a)
        return None if ra is None else ("R", ra)

    def _exists(self, ev: TaggedAddress) -> bool:
        try:
            self.stage.validate_address(ev)
        except ValueError:
            return False
        if self.stage.polarity_of(ev) == "+":
            # a positive event is the echo of its twin
            tw = self._twin(ev)
            return tw is not None and self._exists(tw)
        # a negative event is receptive, but only below a played parent
        side, a = ev
        if a.parent is None:
            return True
        return self._exists((side, a.parent))

    def events_at(self, tagged: TaggedAddress) -> Tuple:
        return (tagged,) if self._exists(tagged) else ()

    def describe(self, ev):
        side, a = ev
        if self.stage.polarity_of(ev) == "+":
            return (ev, self._twin(ev))
        parent = None if a.parent is None else (side, a.parent)
        return (ev, parent)

    def responses(self, ev) -> Tuple:
        if self.stage.polarity_of(ev) != "-":
            return ()
        tw = self._twin(ev)
        return (tw,) if tw is not None else ()

    def in_conflict(self, a, b) -> bool:
        if a == b:
            return False
        def base(ev):
            side, addr = ev
            return addr if side == "R" else self._inv(addr)
        ba, bb = base(a), base(b)
        if ba is None or bb is None:
            return False
        return ba != bb and self.stage.right.addresses_conflict(ba, bb)


class _ReAddrView(_View):
    """A strategy transported along a stage re-addressing."""

    def __init__(self, stage: HomBoard, inner: _View,
                 out_map: Callable[[TaggedAddress], TaggedAddress],
                 in_map: Callable[[TaggedAddress], Optional[TaggedAddress]]):
        self.stage = stage
        self._inner = inner
        self._out = out_map
        self._in = in_map

    def events_at(self, tagged: TaggedAddress) -> Tuple:
        t = self._in(tagged)
        return () if t is None else self._inner.events_at(t)

    def describe(self, ev):
        tagged, parent = self._inner.describe(ev)
        return (self._out(tagged), parent)

    def responses(self, ev) -> Tuple:
        return self._inner.responses(ev)

    def in_conflict(self, a, b) -> bool:
        return self._inner.in_conflict(a, b)


class _UnionView(_View):
    """Two strategies side by side, with tagged event ids."""

    def __init__(self, stage: HomBoard, views: Tuple[_View, _View],
                 route: Callable[[TaggedAddress],
                                 Iterable[Tuple[int, TaggedAddress]]],
                 out_maps: Tuple[Callable[[TaggedAddress], TaggedAddress],
                                 Callable[[TaggedAddress], TaggedAddress]],
                 cross_conflict: bool):
        self.stage = stage
        self._views = views
        self._route = route
        self._outs = out_maps
        self._cross = cross_conflict
        self._tags = ("1", "2")

    def events_at(self, tagged: TaggedAddress) -> Tuple:
        out = []
        for k, inner_tagged in self._route(tagged):
            for e in self._views[k].events_at(inner_tagged):
                out.append((self._tags[k], e))
        return tuple(out)

    def _split(self, ev):
        tag, e = ev
        k = self._tags.index(tag)
        return k, e

    def describe(self, ev):
        k, e = self._split(ev)
        tagged, parent = self._views[k].describe(e)
        return (self._outs[k](tagged),
                None if parent is None else (self._tags[k], parent))

    def responses(self, ev) -> Tuple:
        k, e = self._split(ev)
        return tuple((self._tags[k], c) for c in self._views[k].responses(e))

    def in_conflict(self, a, b) -> bool:
        ka, ea = self._split(a)
        kb, eb = self._split(b)
        if ka != kb:
            return self._cross
        return self._views[ka].in_conflict(ea, eb)


class _PromoteView(_View):
    """Replication of ``base : !X |- T`` into ``!X |- !T``: thread ``i``
    owns right copy ``i`` and re-indexes the context slots it uses by
    ``i``.  Over a product context the slot inside a component's code is
    re-indexed, keeping the component.  Event ids are
    ``(thread, base event)``."""

    def __init__(self, stage: HomBoard, base: _View, left_with: bool):
        self.stage = stage
        self._base = base
        self._lw = left_with

    def _retag_left(self, i: int, addr: MoveAddress) -> MoveAddress:
        (m0, j0), *rest = addr.path
        if self._lw:
            a, b = cantor_unpair(j0)
            return MoveAddress(((m0, cantor_pair(a, cantor_pair(i, b))),
                                *rest))
        return MoveAddress(((m0, cantor_pair(i, j0)), *rest))

    def _retag_right(self, i: int, addr: MoveAddress) -> MoveAddress:
        (m0, _j0), *rest = addr.path
        return MoveAddress(((m0, i), *rest))

    def _decode_left(self, addr: MoveAddress
                     ) -> Optional[Tuple[int, MoveAddress]]:
        (m0, c), *rest = addr.path
        if self._lw:
            a, slot = cantor_unpair(c)
            i, b = cantor_unpair(slot)
            return i, MoveAddress(((m0, cantor_pair(a, b)), *rest))
        i, j0 = cantor_unpair(c)
        return i, MoveAddress(((m0, j0), *rest))

    def _decode_right(self, addr: MoveAddress
                      ) -> Optional[Tuple[int, MoveAddress]]:
        (m0, c), *rest = addr.path
        return c, MoveAddress(((m0, 0), *rest))

    def events_at(self, tagged: TaggedAddress) -> Tuple:
        side, addr = tagged
        dec = (self._decode_left(addr) if side == "L"
               else self._decode_right(addr))
        if dec is None:
            return ()
        i, base_addr = dec
        return tuple((i, e) for e in self._base.events_at((side, base_addr)))

    def describe(self, ev):
        i, e = ev
        (side, addr), parent = self._base.describe(e)
        na = (self._retag_left(i, addr) if side == "L"
              else self._retag_right(i, addr))
        return ((side, na), None if parent is None else (i, parent))

    def responses(self, ev) -> Tuple:
        i, e = ev
        return tuple((i, c) for c in self._base.responses(e))

    def in_conflict(self, a, b) -> bool:
        ia, ea = a
        ib, eb = b
        return ia == ib and self._base.in_conflict(ea, eb)


# -------------------------------------------------------- window generation

def _window_from_view(stage: HomBoard, view: _View, budget: Budget
                      ) -> Tuple[List, Dict, Dict, Dict, List]:
    """Materialize the width-bounded window of a view: all negative
    branches with copy indices below the budget width, plus every
    positive answer the strategy gives within them.  Returns events,
    display, polarity, parent and conflict generator pairs."""
    width = budget.width
    events: List = []
    display: Dict[object, TaggedAddress] = {}
    parent: Dict[object, object] = {}
    seen: Set = set()
    queue: List = []

    def board_of(side: str) -> MixedBoard:
        return stage.left if side == "L" else stage.right

    def add_event(ev) -> None:
        if ev in seen:
            return
        seen.add(ev)
        tagged, par = view.describe(ev)
        if par is not None and par not in seen:
            add_event(par)
        events.append(ev)
        display[ev] = tagged
        if par is not None:
            parent[ev] = par
        queue.append(ev)

    def try_addr(tagged: TaggedAddress) -> None:
        for ev in view.events_at(tagged):
            add_event(ev)

    for side in ("L", "R"):
        arena = board_of(side).arena
        for r in arena.roots:
            idxs = range(width) if arena.ind[r] == "nat" else (0,)
            for i in idxs:
                t = (side, MoveAddress(((r, i),)))
                if stage.polarity_of(t) == "-":
                    try_addr(t)

    while queue:
        ev = queue.pop()
        for c in view.responses(ev):
            add_event(c)
        side, addr = display[ev]
        arena = board_of(side).arena
        for m in arena.children(addr.move):
            idxs = range(width) if arena.ind[m] == "nat" else (0,)
            for i in idxs:
                t = (side, addr.child(m, i))
                if stage.polarity_of(t) == "-":
                    try_addr(t)

    gens: List = []
    for a, b in itertools.combinations(events, 2):
        if not view.in_conflict(a, b):
            continue
        pa, pb = parent.get(a), parent.get(b)
        if (pa is None or not view.in_conflict(pa, b)) \
                and (pb is None or not view.in_conflict(a, pb)):
            gens.append((a, b))
    return events, display, {e: stage.polarity_of(d)
                             for e, d in display.items()}, parent, gens


def _strategy_from_view(stage: HomBoard, view: _View, budget: Budget,
                        name: str,
                        universe: Optional[Sequence[int]] = None,
                        interactions: Optional["InteractionIndex"] = None
                        ) -> Strategy:
    events, display, pol, parent, gens = _window_from_view(
        stage, view, budget)
    label = {e: d[1].move for e, d in display.items()}
    index = {e: d[1].copy_index for e, d in display.items()}
    forest = EventForest(events, parent, pol, gens, label, index)
    return Strategy(stage, forest, display, budget, universe, name,
                    interactions, view)


# ------------------------------------------------------- relay constructors

def _relay(stage: HomBoard,
           fwd: Callable[[MoveAddress], Optional[MoveAddress]],
           inv: Callable[[MoveAddress], Optional[MoveAddress]],
           budget: Budget, name: str,
           universe: Optional[Sequence[int]] = None) -> Strategy:
    view = _RelayView(stage, fwd, inv)
    budget = _fit(budget, stage.left, stage.right)
    return _strategy_from_view(stage, view, budget, name, universe)


def _ident(a: MoveAddress) -> MoveAddress:
    return a


def copycat(board: MixedBoard, budget: Budget,
            universe: Optional[Sequence[int]] = None,
            name: Optional[str] = None) -> Strategy:
    """The identity strategy on a negative board: every move of one side
    is echoed on the other at the same copy index."""
    if not board.is_negative:
        raise ValueError("copycat requires a negative board")
    return _relay(hom(board, board), _ident, _ident, budget,
                  name or "cc", universe)


def dereliction(board: MixedBoard, budget: Budget,
                universe: Optional[Sequence[int]] = None,
                name: Optional[str] = None) -> Strategy:
    """Relay from a replicated strict board to a single use, opening
    copy index 0 on the replicated side."""
    stage = hom(bang(board), board)

    def inv(a: MoveAddress) -> Optional[MoveAddress]:
        return a if a.path[0][1] == 0 else None

    return _relay(stage, _ident, inv, budget, name or "der", universe)


def _first_index_map(addr: MoveAddress, move_map: Callable[[str], str],
                     idx: Callable[[int], Optional[int]]
                     ) -> Optional[MoveAddress]:
    (m0, i0), *rest = addr.path
    ni = idx(i0)
    if ni is None:
        return None
    return MoveAddress(((move_map(m0), ni),
                        *((move_map(m), i) for m, i in rest)))


def variable(ctx_types: Sequence[SimpleType], i: int, budget: Budget,
             universe: Optional[Sequence[int]] = None,
             name: Optional[str] = None) -> Strategy:
    """The strategy of the ``i``-th context entry (0-based): a relay
    between that component of the replicated context, at slot 0, and the
    result board."""
    gamma = context_board(ctx_types)
    result = interpret_type(ctx_types[i])
    stage = hom(bang(gamma), result)
    pfx = f"&{i + 1}."
    code = cantor_pair(i, 0)

    def fwd(a: MoveAddress) -> MoveAddress:
        first = a.path[0]
        return MoveAddress(((pfx + first[0], code),
                            *((pfx + m, ix) for m, ix in a.path[1:])))

    def inv(a: MoveAddress) -> Optional[MoveAddress]:
        (m0, i0), *rest = a.path
        if not m0.startswith(pfx) or i0 != code:
            return None
        if any(not m.startswith(pfx) for m, _ in rest):
            return None
        return MoveAddress(((m0[len(pfx):], 0),
                            *((m[len(pfx):], ix) for m, ix in rest)))

    return _relay(stage, fwd, inv, budget, name or f"var{i}", universe)


def seely(x: MixedBoard, y: MixedBoard, budget: Budget,
          universe: Optional[Sequence[int]] = None,
          name: Optional[str] = None) -> Strategy:
    """``!X (x) !Y |- !(X & Y)``: merge two replicated strict boards
    into a replicated product, component ``k`` at codes ``(k-1, slot)``."""
    stage = hom(tensor(bang(x), bang(y)), bang(with_([x, y])))

    def fwd(a: MoveAddress) -> Optional[MoveAddress]:
        (m0, c), *rest = a.path
        comp, slot = cantor_unpair(c)
        k = 1 if m0.startswith("&1.") else 2
        if comp != k - 1:
            return None
        return MoveAddress(((f"{k}." + m0[3:], slot),
                            *((f"{k}." + m[3:], ix) for m, ix in rest)))

    def inv(a: MoveAddress) -> MoveAddress:
        (m0, b), *rest = a.path
        k = 1 if m0.startswith("1.") else 2
        return MoveAddress(((f"&{k}." + m0[2:], cantor_pair(k - 1, b)),
                            *((f"&{k}." + m[2:], ix) for m, ix in rest)))

    return _relay(stage, fwd, inv, budget, name or "seely", universe)


def seely_inv(x: MixedBoard, y: MixedBoard, budget: Budget,
              universe: Optional[Sequence[int]] = None,
              name: Optional[str] = None) -> Strategy:
    """``!(X & Y) |- !X (x) !Y``: inverse relabelling of :func:`seely`."""
    stage = hom(bang(with_([x, y])), tensor(bang(x), bang(y)))

    def fwd(a: MoveAddress) -> MoveAddress:
        (m0, b), *rest = a.path
        k = 1 if m0.startswith("1.") else 2
        return MoveAddress(((f"&{k}." + m0[2:], cantor_pair(k - 1, b)),
                            *((f"&{k}." + m[2:], ix) for m, ix in rest)))

    def inv(a: MoveAddress) -> Optional[MoveAddress]:
        (m0, c), *rest = a.path
        comp, slot = cantor_unpair(c)
        k = 1 if m0.startswith("&1.") else 2
        if comp != k - 1:
            return None
        return MoveAddress(((f"{k}." + m0[3:], slot),
                            *((f"{k}." + m[3:], ix) for m, ix in rest)))

    return _relay(stage, fwd, inv, budget, name or "seely_inv", universe)


def context_merge(gamma_boards: Sequence[MixedBoard], extra: MixedBoard,
                  budget: Budget, universe: Optional[Sequence[int]] = None,
                  name: Optional[str] = None) -> Strategy:
    """``!Gamma (x) !A |- !(Gamma, A)``: glue one extra component onto a
    replicated context.  Components keep their codes; the new last
    component decodes to the extra board's plain copies."""
    n = len(gamma_boards)
    left = tensor(bang(with_(gamma_boards)), bang(extra))
    right = bang(with_(list(gamma_boards) + [extra]))
    last = f"&{n + 1}."

    def fwd(a: MoveAddress) -> Optional[MoveAddress]:
        (m0, c), *rest = a.path
        comp, slot = cantor_unpair(c)
        if m0.startswith(last):
            if comp != n:
                return None
            return MoveAddress((("2." + m0[len(last):], slot),
                                *(("2." + m[len(last):], ix)
                                  for m, ix in rest)))
        k = int(m0[1:m0.index(".")])
        if comp != k - 1:
            return None
        return MoveAddress((("1." + m0, c),
                            *(("1." + m, ix) for m, ix in rest)))

    def inv(a: MoveAddress) -> Optional[MoveAddress]:
        (m0, c), *rest = a.path
        if m0.startswith("2."):
            return MoveAddress(((last + m0[2:], cantor_pair(n, c)),
                                *((last + m[2:], ix) for m, ix in rest)))
        k = int(m0[3:m0.index(".", 3)])
        comp, _slot = cantor_unpair(c)
        if comp != k - 1:
            return None
        return MoveAddress(((m0[2:], c),
                            *((m[2:], ix) for m, ix in rest)))

    return _relay(hom(left, right), fwd, inv, budget,
                  name or "ctx_merge", universe)


# -------------------------------------------------------------- re-addressing

def _strip(addr: MoveAddress, pfx: str) -> MoveAddress:
    return MoveAddress(tuple((m[len(pfx):], i) for m, i in addr.path))


def _prefix(addr: MoveAddress, pfx: str) -> MoveAddress:
    return MoveAddress(tuple((pfx + m, i) for m, i in addr.path))


def _map_display(s: Strategy, stage: HomBoard,
                 out_map: Callable[[TaggedAddress], TaggedAddress],
                 in_map: Callable[[TaggedAddress], Optional[TaggedAddress]],
                 name: str) -> Strategy:
    """Transport a strategy along a stage re-addressing that preserves
    polarities and the causal tree of addresses."""
    display = {e: out_map(t) for e, t in s.display.items()}
    pol = {e: stage.polarity_of(t) for e, t in display.items()}
    label = {e: t[1].move for e, t in display.items()}
    index = {e: t[1].copy_index for e, t in display.items()}
    gens = tuple(tuple(p) for p in s.forest.conflict_generators)
    forest = EventForest(s.forest.events, s.forest.parent, pol, gens,
                         label, index)
    view = _ReAddrView(stage, s.view, out_map, in_map)
    return Strategy(stage, forest, display, s.budget, s.universe, name,
                    s.interactions, view)


def curry(s: Strategy, name: Optional[str] = None) -> Strategy:
    """Reshape ``G (x) A |- B`` into ``G |- A -o B``.

    Pure re-addressing: events, causality and conflicts are untouched.
    Requires a well-opened codomain so the linear arrow does not
    distribute; argument moves are grafted under the output root.
    """
    shape = s.board.left.shape
    if not isinstance(shape, _Tensor):
        raise ValueError("curry requires a tensor on the context side")
    if not s.board.right.is_well_opened:
        raise ValueError("curry requires a well-opened codomain")
    g = MixedBoard(shape.left)
    a = MixedBoard(shape.right)
    arrow = lollipop(a, s.board.right)
    stage = hom(g, arrow)
    out_root = arrow.arena.roots[0]

    def out_map(t: TaggedAddress) -> TaggedAddress:
        side, addr = t
        if side == "R":
            return ("R", _prefix(addr, "out."))
        if addr.path[0][0].startswith("1."):
            return ("L", _strip(addr, "1."))
        grafted = ((out_root, 0),) + tuple(
            ("arg." + m, i) for m, i in _strip(addr, "2.").path)
        return ("R", MoveAddress(grafted))

    def in_map(t: TaggedAddress) -> Optional[TaggedAddress]:
        side, addr = t
        if side == "L":
            return ("L", _prefix(addr, "1."))
        if len(addr.path) > 1 and addr.path[1][0].startswith("arg."):
            tail = tuple((m[4:], i) for m, i in addr.path[1:])
            return ("L", _prefix(MoveAddress(tail), "2."))
        return ("R", _strip(addr, "out."))

    return _map_display(s, stage, out_map, in_map,
                        name or f"curry({s.name})")


def uncurry(s: Strategy, name: Optional[str] = None) -> Strategy:
    """Inverse of :func:`curry`: reshape ``G |- A -o B`` into
    ``G (x) A |- B``."""
    shape = s.board.right.shape
    if not isinstance(shape, _Lolli):
        raise ValueError("uncurry requires a linear arrow on the right")
    a = MixedBoard(shape.arg)
    b = MixedBoard(shape.out)
    stage = hom(tensor(s.board.left, a), b)
    out_root = s.board.right.arena.roots[0]

    def out_map(t: TaggedAddress) -> TaggedAddress:
        side, addr = t
        if side == "L":
            return ("L", _prefix(addr, "1."))
        if len(addr.path) > 1 and addr.path[1][0].startswith("arg."):
            tail = tuple((m[4:], i) for m, i in addr.path[1:])
            return ("L", _prefix(MoveAddress(tail), "2."))
        return ("R", _strip(addr, "out."))

    def in_map(t: TaggedAddress) -> Optional[TaggedAddress]:
        side, addr = t
        if side == "R":
            return ("R", _prefix(addr, "out."))
        if addr.path[0][0].startswith("1."):
            return ("L", _strip(addr, "1."))
        grafted = ((out_root, 0),) + tuple(
            ("arg." + m, i) for m, i in _strip(addr, "2.").path)
        return ("R", MoveAddress(grafted))

    return _map_display(s, stage, out_map, in_map,
                        name or f"uncurry({s.name})")


def evaluation(s_board: MixedBoard, t_board: MixedBoard, budget: Budget,
               universe: Optional[Sequence[int]] = None,
               name: Optional[str] = None) -> Strategy:
    """``(!S -o T) (x) !S |- T``: the application morphism, as the
    uncurried identity on the function board."""
    fb = lollipop(bang(s_board), t_board)
    cc = copycat(fb, budget, universe, name="cc(fun)")
    return uncurry(cc, name or "eval")


def unwrap_singleton_context(s: Strategy, name: Optional[str] = None
                             ) -> Strategy:
    """Delete a redundant one-component product on the context side:
    ``!(&[X]) |- B`` becomes ``!X |- B``.  Copy codes ``(0, slot)`` of
    the product become plain slots."""
    shape = s.board.left.shape
    if not (isinstance(shape, _Bang) and isinstance(shape.inner, _With)
            and len(shape.inner.components) == 1):
        raise ValueError("context is not a one-component product")
    inner = MixedBoard(shape.inner.components[0])
    stage = hom(bang(inner), s.board.right)

    def out_map(t: TaggedAddress) -> TaggedAddress:
        side, addr = t
        if side != "L":
            return t
        (m0, c), *rest = addr.path
        _comp, slot = cantor_unpair(c)
        return ("L", MoveAddress(((m0[3:], slot),
                                  *((m[3:], i) for m, i in rest))))

    def in_map(t: TaggedAddress) -> Optional[TaggedAddress]:
        side, addr = t
        if side != "L":
            return t
        (m0, b), *rest = addr.path
        return ("L", MoveAddress((("&1." + m0, cantor_pair(0, b)),
                                  *(("&1." + m, i) for m, i in rest))))

    return _map_display(s, stage, out_map, in_map,
                        name or f"unwrap({s.name})")


# ------------------------------------------------------- parallel assemblies

def _union_strategy(s: Strategy, t: Strategy, stage: HomBoard,
                    out_maps, route, cross_conflict: bool,
                    name: str) -> Strategy:
    view = _UnionView(stage, (s.view, t.view), route, out_maps,
                      cross_conflict)
    universe = tuple(sorted(set(s.universe) | set(t.universe)))
    return _strategy_from_view(stage, view, s.budget, name, universe)


def tensor_strat(s: Strategy, t: Strategy, name: Optional[str] = None
                 ) -> Strategy:
    """Side-by-side parallel composition on the tensor of the stages."""
    stage = hom(tensor(s.board.left, t.board.left),
                tensor(s.board.right, t.board.right))

    def out_map(k: int):
        def f(tagged: TaggedAddress) -> TaggedAddress:
            side, addr = tagged
            return (side, _prefix(addr, f"{k + 1}."))
        return f

    def route(tagged: TaggedAddress):
        side, addr = tagged
        m0 = addr.path[0][0]
        k = 0 if m0.startswith("1.") else 1
        pfx = f"{k + 1}."
        if any(not m.startswith(pfx) for m, _ in addr.path):
            return ()
        return ((k, (side, _strip(addr, pfx))),)

    return _union_strategy(s, t, stage, (out_map(0), out_map(1)), route,
                           False, name or f"({s.name})x({t.name})")


def pair(s: Strategy, t: Strategy, name: Optional[str] = None) -> Strategy:
    """Pairing over a shared context: ``G |- A`` and ``G |- B`` combine
    into ``G |- A & B`` whose nonempty configurations pick a side.
    Component ``k``'s root keeps the coding ``(k-1, 0)``."""
    if s.board.left != t.board.left:
        raise ValueError("pairing requires a common context board")
    stage = hom(s.board.left, with_([s.board.right, t.board.right]))

    def out_map(k: int):
        def f(tagged: TaggedAddress) -> TaggedAddress:
            side, addr = tagged
            if side == "L":
                return tagged
            return ("R", _prefix(addr, f"&{k + 1}."))
        return f

    def route(tagged: TaggedAddress):
        side, addr = tagged
        if side == "L":
            return ((0, tagged), (1, tagged))
        m0 = addr.path[0][0]
        k = 0 if m0.startswith("&1.") else 1
        pfx = f"&{k + 1}."
        if any(not m.startswith(pfx) for m, _ in addr.path):
            return ()
        return ((k, ("R", _strip(addr, pfx))),)

    return _union_strategy(s, t, stage, (out_map(0), out_map(1)), route,
                           True, name or f"<{s.name},{t.name}>")


def promote(s: Strategy, threads: Optional[Sequence[int]] = None,
            name: Optional[str] = None) -> Strategy:
    """``!S |- T`` becomes ``!S |- !T``: one replicated thread per
    codomain copy, each re-indexing the context slots it uses by its own
    thread index.  ``threads`` only widens the materialized window; the
    view serves every thread."""
    shape = s.board.left.shape
    replicable = isinstance(shape, _Bang) or (
        isinstance(shape, _With) and not shape.components)
    if not replicable:
        raise ValueError("promotion requires a replicated context")
    stage = hom(s.board.left, bang(s.board.right))
    left_with = isinstance(shape, _Bang) and isinstance(shape.inner, _With)
    view = _PromoteView(stage, s.view, left_with)
    strat = _strategy_from_view(stage, view, s.budget,
                                name or f"({s.name})!", s.universe)
    if threads:
        extra = [i for i in threads if i >= s.budget.width]
        if extra:
            strat = _widen_promote(strat, view, extra)
    return strat


def _widen_promote(strat: Strategy, view: _PromoteView,
                   threads: Sequence[int]) -> Strategy:
    """Add the windows of extra threads to a promoted strategy."""
    events = list(strat.forest.events)
    display = dict(strat.display)
    parent = dict(strat.forest.parent)
    for i in threads:
        for ev in list(events):
            thread, base = ev
            if thread != 0:
                continue
            nv = (i, base)
            if nv in display:
                continue
            events.append(nv)
            tagged, par = view.describe(nv)
            display[nv] = tagged
            if par is not None:
                parent[nv] = par
    pol = {e: strat.board.polarity_of(d) for e, d in display.items()}
    gens = []
    for a, b in itertools.combinations(events, 2):
        if not view.in_conflict(a, b):
            continue
        pa, pb = parent.get(a), parent.get(b)
        if (pa is None or not view.in_conflict(pa, b)) \
                and (pb is None or not view.in_conflict(a, pb)):
            gens.append((a, b))
    label = {e: d[1].move for e, d in display.items()}
    index = {e: d[1].copy_index for e, d in display.items()}
    forest = EventForest(events, parent, pol, gens, label, index)
    return Strategy(strat.board, forest, display, strat.budget,
                    strat.universe, strat.name, None, view)


# ------------------------------------------------------------- synchronizing

@dataclass(frozen=True)
class MatchingPair:
    """Configurations of two composable strategies agreeing on the shared
    board: the synchronizing pairs, the deadlock verdict, and (when
    compatible) a linearization of the joint causality."""
    x_sigma: FrozenSet
    x_tau: FrozenSet
    sync: Tuple[Tuple[object, object], ...]
    causally_compatible: bool
    order: Optional[Tuple] = None


def _interaction_order(x_sigma: Iterable, sync, x_tau: Iterable,
                       sigma_leq: Callable[[object, object], bool],
                       tau_leq: Callable[[object, object], bool]
                       ) -> Optional[Tuple]:
    """Topological order of the synchronized causality, or None on a
    causal cycle (deadlock)."""
    pairs = sync.pairs if isinstance(sync, Symmetry) else tuple(sync)
    to_sigma = {t: s for (s, t) in pairs}
    xs = list(x_sigma)
    xt = list(x_tau)

    def node(side: str, e) -> Tuple[str, object]:
        if side == "t" and e in to_sigma:
            return ("s", to_sigma[e])
        return (side, e)

    graph: Dict[Tuple[str, object], Set[Tuple[str, object]]] = {}
    for e in xs:
        graph[("s", e)] = set()
    for e in xt:
        graph.setdefault(node("t", e), set())
    for a, b in itertools.permutations(xs, 2):
        if sigma_leq(a, b):
            graph[("s", b)].add(("s", a))
    for a, b in itertools.permutations(xt, 2):
        if tau_leq(a, b):
            graph[node("t", b)].add(node("t", a))
    order: List[Tuple[str, object]] = []
    marked: Set[Tuple[str, object]] = set()
    pending = dict(graph)
    while pending:
        ready = [n for n, deps in pending.items() if deps <= marked]
        if not ready:
            return None
        for n in sorted(ready, key=repr):
            order.append(n)
            marked.add(n)
            del pending[n]
    return tuple(order)


def secured(x_sigma: Iterable, sync, x_tau: Iterable,
            sigma_leq: Callable[[object, object], bool],
            tau_leq: Callable[[object, object], bool]) -> bool:
    """Whether the synchronization of two configurations is free of
    causal deadlock: the union of the two causal orders, identified
    along the synchronizing pairs, must be acyclic."""
    return _interaction_order(x_sigma, sync, x_tau, sigma_leq,
                              tau_leq) is not None


def _sync_pairs(s: Strategy, sx: FrozenSet, t: Strategy, tx: FrozenSet
                ) -> Optional[Tuple[Tuple[object, object], ...]]:
    """Match shared-board events of two configurations by displayed
    address; None if the projections differ."""
    right = {}
    for e in sx:
        side, a = s.display[e]
        if side == "R":
            right[a] = e
    left = {}
    for f in tx:
        side, a = t.display[f]
        if side == "L":
            left[a] = f
    if set(right) != set(left):
        return None
    return tuple(sorted(((right[a], left[a]) for a in right),
                        key=lambda p: repr(p)))


def pair_secured(s: Strategy, x_sigma: FrozenSet,
                 t: Strategy, x_tau: FrozenSet) -> Optional[MatchingPair]:
    """Form the matching pair of two configurations (None if their
    shared-board projections differ) and run the deadlock check."""
    sync = _sync_pairs(s, x_sigma, t, x_tau)
    if sync is None:
        return None
    order = _interaction_order(x_sigma, sync, x_tau,
                               s.forest.leq, t.forest.leq)
    return MatchingPair(x_sigma, x_tau, sync, order is not None, order)


# ----------------------------------------------------------------- compose

@dataclass(frozen=True)
class InteractionIndex:
    """Back-references from a composite strategy to its interaction.

    ``closure`` maps every composite event to the pair of component-event
    sets it requires: its causal history inside each composed strategy,
    with synchronized events included on both sides.
    """
    sigma: Strategy
    tau: Strategy
    closure: Mapping[Tuple[str, object], Tuple[FrozenSet, FrozenSet]]

    def state_of(self, events: Iterable) -> MatchingPair:
        """The matching pair of component configurations witnessing a
        configuration of the composite (window events only).

        Moves received by an inert event (no answer) are not recorded in
        closures; this re-adds a compatible receiver for each, so the two
        configurations project to the same shared-board configuration.
        """
        sv, tv = self.sigma.view, self.tau.view
        sx: Set = set()
        tx: Set = set()
        for ev in events:
            a, b = self.closure[ev]
            sx |= a
            tx |= b

        def shown(view: _View, xs: Set, want: str) -> Dict[MoveAddress, object]:
            out = {}
            for e in xs:
                (tag, addr), _ = view.describe(e)
                if tag == want:
                    out[addr] = e
            return out

        def adopt(view: _View, xs: Set, tag: str, addr: MoveAddress) -> None:
            for cand in view.events_at((tag, addr)):
                chain = []
                c = cand
                while c is not None and c not in xs:
                    chain.append(c)
                    c = view.describe(c)[1]
                if all(not view.in_conflict(m, x)
                       for m in chain for x in xs):
                    xs.update(chain)
                    return

        for _ in range(2):
            sr = shown(sv, sx, "R")
            tl = shown(tv, tx, "L")
            for addr in set(sr) - set(tl):
                adopt(tv, tx, "L", addr)
            for addr in set(tl) - set(sr):
                adopt(sv, sx, "R", addr)

        sr = shown(sv, sx, "R")
        tl = shown(tv, tx, "L")
        assert set(sr) == set(tl), "shared projections must agree"
        sync = tuple(sorted(((sr[a], tl[a]) for a in sr),
                            key=lambda p: repr(p)))

        def view_leq(view: _View):
            def leq(a, b) -> bool:
                c = b
                while c is not None:
                    if c == a:
                        return True
                    c = view.describe(c)[1]
                return False
            return leq

        order = _interaction_order(sx, sync, tx, view_leq(sv), view_leq(tv))
        return MatchingPair(frozenset(sx), frozenset(tx), sync,
                            order is not None, order)


class _Composition(_View):
    """The live interaction of two views over a shared board.

    Every component event has a fixed *requirement*: its causal
    histories on both sides, closed under synchronization by displayed
    address.  The requirement is independent of any schedule, so it is
    memoized per event; an event whose requirement hits a conflict, an
    address clash, or a causal cycle (deadlock) never occurs and is
    dropped.  Composite events are the surviving visible ones, ordered
    by inclusion of the visible parts of their requirements.
    """

    def __init__(self, sv: _View, tv: _View, shared_left: MixedBoard,
                 sigma_name: str, tau_name: str, width: int):
        self.stage = hom(sv.stage.left, tv.stage.right)
        self._sv = sv
        self._tv = tv
        self._shared = shared_left
        self._sname = sigma_name
        self._tname = tau_name
        self._width = width
        self._memo: Dict[Tuple[str, object], Tuple] = {}
        self._grey: Set[Tuple[str, object]] = set()
        self._desc: Dict[Tuple[str, object],
                         Tuple[TaggedAddress, Optional[object]]] = {}
        self._nodes: Dict[Tuple[str, object],
                          Tuple[FrozenSet, FrozenSet]] = {}
        self._parent: Dict[Tuple[str, object],
                           Optional[Tuple[str, object]]] = {}
        self._vc: Dict[Tuple[str, object], FrozenSet] = {}
        self._incompat: Dict[Tuple, bool] = {}

    # -- component plumbing ------------------------------------------------

    def _describe(self, side: str, e):
        key = (side, e)
        got = self._desc.get(key)
        if got is None:
            view = self._sv if side == "s" else self._tv
            got = view.describe(e)
            self._desc[key] = got
        return got

    def _partners(self, side: str, e) -> Tuple:
        """Events matching a shared-board event on the other side."""
        (tag, addr), _ = self._describe(side, e)
        if side == "s":
            return self._tv.events_at(("L", addr))
        return self._sv.events_at(("R", addr))

    # -- requirements ------------------------------------------------------

    def _requirement(self, side: str, e) -> Tuple:
        """("ok", sx, tx) or ("dead", reason) for one component event.

        A hidden event and its synchronizing partner form one node of
        the interaction, keyed by the event on the first strategy, so
        the mutual dependence of the two halves is not mistaken for a
        deadlock; genuine causal cycles through distinct nodes are.
        """
        (tag, addr), _ = self._describe(side, e)
        hidden = (side == "s" and tag == "R") or (side == "t" and tag == "L")
        if not hidden:
            return self._resolve((side, e), ((side, e),))
        chosen = self._choose_partner(side, e, tag, addr)
        if chosen == "unmatched":
            return ("dead", "unmatched")
        if chosen is None:
            return self._resolve((side, e), ((side, e),))
        halves = (("s", e), ("t", chosen)) if side == "s" \
            else (("s", chosen), ("t", e))
        return self._resolve(("p", halves[0][1]), halves)

    def _choose_partner(self, side: str, e, tag: str, addr: MoveAddress):
        view = self._sv if side == "s" else self._tv
        other_view = self._tv if side == "s" else self._sv
        pol = view.stage.polarity_of((tag, addr))
        found = self._partners(side, e)
        if pol == "+":
            if not found:
                raise ValueError(
                    f"budget too small: no materialized partner for "
                    f"{addr!r} on the shared board (while composing "
                    f"{self._sname!r} with {self._tname!r})")
            if len(found) == 1:
                return found[0]
            # several receptive events can receive this move; the one
            # that answers it is the synchronization that matters, and
            # inert receivers constrain nothing
            live = [c for c in found if other_view.responses(c)]
            if len(live) > 1:
                raise ValueError(
                    f"ambiguous synchronization: several answers to "
                    f"{addr!r} on the shared board")
            return live[0] if live else None
        if not found:
            return "unmatched"
        if len(found) > 1:
            raise ValueError(
                f"ambiguous synchronization: several events play "
                f"{addr!r} on the shared board")
        return found[0]

    def _resolve(self, key: Tuple, halves: Tuple) -> Tuple:
        got = self._memo.get(key)
        if got is not None:
            return got
        if key in self._grey:
            return ("dead", "cycle")
        self._grey.add(key)
        result = self._node_requirement(halves)
        self._grey.discard(key)
        self._memo[key] = result
        return result

    def _node_requirement(self, halves: Tuple) -> Tuple:
        sx: Set = set()
        tx: Set = set()
        for side, e in halves:
            (sx if side == "s" else tx).add(e)
        for side, e in halves:
            _, parent = self._describe(side, e)
            if parent is None:
                continue
            sub = self._requirement(side, parent)
            if sub[0] == "dead":
                return sub
            sx |= sub[1]
            tx |= sub[2]
        why = self._invalid(sx, tx)
        if why is not None:
            return ("dead", why)
        return ("ok", frozenset(sx), frozenset(tx))

    def _invalid(self, sx: Iterable, tx: Iterable) -> Optional[str]:
        for side, view, xs in (("s", self._sv, sx), ("t", self._tv, tx)):
            members = list(xs)
            shown = [self._describe(side, e)[0] for e in members]
            for i, e1 in enumerate(members):
                for j in range(i + 1, len(members)):
                    if view.in_conflict(e1, members[j]):
                        return "conflict"
                    if shown[i] == shown[j]:
                        return "collision"
                    if view.stage.addresses_conflict(shown[i], shown[j]):
                        return "conflict"
        return None

    # -- composite events --------------------------------------------------

    def _visible_part(self, sx: FrozenSet, tx: FrozenSet) -> FrozenSet:
        out = set()
        for e in sx:
            if self._describe("s", e)[0][0] == "L":
                out.add(("l", e))
        for f in tx:
            if self._describe("t", f)[0][0] == "R":
                out.add(("r", f))
        return frozenset(out)

    def _admit(self, tag: str, e) -> Optional[Tuple[str, object]]:
        """Record the composite event for a visible component event whose
        requirement is satisfiable; returns the node or None."""
        node = (tag, e)
        if node in self._nodes:
            return node
        side = "s" if tag == "l" else "t"
        got = self._requirement(side, e)
        if got[0] == "dead":
            return None
        sx, tx = got[1], got[2]
        self._nodes[node] = (sx, tx)
        self._vc[node] = self._visible_part(sx, tx)
        # every visible event in the requirement is itself composite
        for peer in self._vc[node]:
            if peer != node and peer not in self._nodes:
                peer_side = "s" if peer[0] == "l" else "t"
                peer_got = self._requirement(peer_side, peer[1])
                assert peer_got[0] == "ok"
                self._nodes[peer] = (peer_got[1], peer_got[2])
                self._vc[peer] = self._visible_part(peer_got[1],
                                                    peer_got[2])
        self._chain(node)
        return node

    def _chain(self, node: Tuple[str, object]) -> None:
        if node in self._parent:
            return
        chain = sorted(self._vc[node], key=lambda v: len(self._vc[v]))
        for k, v in enumerate(chain, start=1):
            if self._vc[v] != frozenset(chain[:k]):
                raise ValueError(
                    "composite is not forest-shaped within the "
                    f"materialized budget (at {node!r})")
        for k, v in enumerate(chain):
            if v not in self._parent:
                self._parent[v] = chain[k - 1] if k > 0 else None

    # -- view protocol -----------------------------------------------------

    def events_at(self, tagged: TaggedAddress) -> Tuple:
        side, addr = tagged
        out = []
        if side == "L":
            for e in self._sv.events_at(tagged):
                node = self._admit("l", e)
                if node is not None:
                    out.append(node)
        else:
            for f in self._tv.events_at(tagged):
                node = self._admit("r", f)
                if node is not None:
                    out.append(node)
        return tuple(out)

    def describe(self, ev):
        tag, e = ev
        self._admit(tag, e)
        side = "s" if tag == "l" else "t"
        (inner_tag, addr), _ = self._describe(side, e)
        tagged = ("L", addr) if tag == "l" else ("R", addr)
        return (tagged, self._parent.get(ev))

    def responses(self, ev) -> Tuple:
        """Visible positive continuations of a composite event, found by
        chasing answers through the hidden zone: a positive answer on the
        shared board continues from its synchronizing partner."""
        tag, e = ev
        out = []
        seen: Set = set()
        stack: List[Tuple[str, object]] = [("s" if tag == "l" else "t", e)]
        while stack:
            side, cur = stack.pop()
            if (side, cur) in seen:
                continue
            seen.add((side, cur))
            view = self._sv if side == "s" else self._tv
            for c in view.responses(cur):
                (ctag, addr), _ = self._describe(side, c)
                visible = (side == "s" and ctag == "L") \
                    or (side == "t" and ctag == "R")
                if visible:
                    node = self._admit("l" if side == "s" else "r", c)
                    if node is not None:
                        out.append(node)
                    continue
                if self._requirement(side, c)[0] == "dead":
                    continue
                partner = self._choose_partner(side, c, ctag, addr)
                if partner is None or partner == "unmatched":
                    continue
                stack.append(("t" if side == "s" else "s", partner))
        return tuple(out)

    def in_conflict(self, a, b) -> bool:
        if a == b:
            return False
        if a in self._vc[b] or b in self._vc[a]:
            return False
        key = (a, b) if repr(a) < repr(b) else (b, a)
        got = self._incompat.get(key)
        if got is None:
            sa, ta = self._nodes[a]
            sb, tb = self._nodes[b]
            got = self._invalid(sa | sb, ta | tb) is not None
            self._incompat[key] = got
        return got


def compose(s: Strategy, t: Strategy, budget: Optional[Budget] = None,
            name: Optional[str] = None) -> Strategy:
    """Composition of ``s : A |- B`` with ``t : B |- C``.

    Events of the two strategies synchronize on the shared board by
    displayed address; each event determines, schedule-free, the
    interaction it requires, and survives into the composite exactly
    when that requirement is conflict-free and acyclic.  A causal cycle
    through the shared board is a deadlock and silently removes the
    events involved, as is a shared move the other strategy never
    answers.  The materialized window explores Opponent moves up to the
    budget width; the view behind it serves any demand.

    Raises if the shared boards differ, if one side has two events on a
    single shared address (not supported), or if a *positive* shared
    move has no partner at all (budget too small).
    """
    if s.board.right != t.board.left:
        raise ValueError(
            f"shared board mismatch: {s.board.right!r} vs {t.board.left!r}")
    budget = budget or s.budget
    live = _Composition(s.view, t.view, s.board.right, s.name, t.name,
                        budget.width)
    universe = tuple(sorted(set(s.universe) | set(t.universe)))
    strat = _strategy_from_view(live.stage, live, budget,
                                name or f"({t.name} . {s.name})", universe)
    closure = {ev: live._nodes[ev] for ev in strat.forest.events}
    strat.interactions = InteractionIndex(s, t, closure)
    return strat


# ------------------------------------------------------------ interpretation

def interpret_term(ctx: Sequence[Tuple[str, SimpleType]], term: Term,
                   budget: Optional[Budget] = None,
                   name: Optional[str] = None) -> Strategy:
    """Interpretation of a typed term as a strategy on ``!Gamma |- A``.

    Variables become relays out of their context component, abstractions
    curry after merging the binder into the context, and applications
    pair the function with its argument, promote, split the product and
    evaluate.
    """
    budget = budget or Budget(depth=4, width=2)
    strat = _interp(list(ctx), term, budget)
    return strat if name is None else _renamed(strat, name)


def _interp(ctx: List[Tuple[str, SimpleType]], t: Term,
            budget: Budget) -> Strategy:
    types = [ty for (_, ty) in ctx]
    if isinstance(t, Var):
        for i in range(len(ctx) - 1, -1, -1):
            if ctx[i][0] == t.name:
                return variable(types, i, budget, name=f"[{t.name}]")
        raise ValueError(f"unbound variable {t.name!r}")
    if isinstance(t, Lam):
        inner = _interp(ctx + [(t.binder, t.annotation)], t.body, budget)
        gamma_boards = [interpret_type(ty) for ty in types]
        extra = interpret_type(t.annotation)
        merge = context_merge(gamma_boards, extra, budget)
        body = compose(merge, inner)
        return curry(body, name=f"lam({t.binder})")
    assert isinstance(t, App)
    fun_ty = typecheck(dict(ctx), t.fun)
    assert isinstance(fun_ty, Arrow)
    s_board = interpret_type(fun_ty.domain)
    t_board = interpret_type(fun_ty.codomain)
    f_board = lollipop(bang(s_board), t_board)
    m = _interp(ctx, t.fun, budget)
    n = _interp(ctx, t.arg, budget)
    paired = promote(pair(m, n))
    split = seely_inv(f_board, s_board, budget)
    open_fun = tensor_strat(
        dereliction(f_board, budget),
        copycat(bang(s_board), budget))
    ev = evaluation(s_board, t_board, budget)
    out = compose(compose(compose(paired, split), open_fun), ev)
    return _renamed(out, "app")


# ------------------------------------------------------------------- checks

@dataclass(frozen=True)
class CheckResult:
    ok: bool
    detail: str
    counterexample: Optional[object] = None

    def __bool__(self) -> bool:
        return self.ok


def _check_receptive(s: Strategy, width: int) -> CheckResult:
    f = s.forest
    by_display: Dict[TaggedAddress, List] = {}
    for e, d in s.display.items():
        by_display.setdefault(d, []).append(e)
    # initial negative moves must be available from the empty configuration
    arena = s.board.right.arena
    for r in arena.roots:
        if arena.polarity[r] != "-":
            continue
        idxs = range(width) if arena.ind[r] == "nat" else (0,)
        for i in idxs:
            d = ("R", MoveAddress(((r, i),)))
            if not any(e not in f.parent for e in by_display.get(d, ())):
                return CheckResult(False, "missing initial receptive event",
                                   d)
    # below every event, the enabled negative continuations must exist
    for e in f.events:
        side, a = s.display[e]
        board = s.board.left if side == "L" else s.board.right
        arena = board.arena
        branch = f.down_closure(e)
        same_side = [s.display[b][1] for b in branch
                     if s.display[b][0] == side]
        for m in arena.children(a.move):
            bpol = arena.polarity[m]
            hompol = ("+" if bpol == "-" else "-") if side == "L" else bpol
            if hompol != "-":
                continue
            idxs = range(width) if arena.ind[m] == "nat" else (0,)
            for i in idxs:
                b = a.child(m, i)
                if any(c == b or board.addresses_conflict(b, c)
                       for c in same_side):
                    continue
                if not any(f.leq(e, e2)
                           for e2 in by_display.get((side, b), ())):
                    return CheckResult(
                        False, "missing receptive continuation",
                        (e, (side, b)))
    return CheckResult(True,
                       f"receptive for copy indices below {width}", None)


def _config_isos(s1: Strategy, x: FrozenSet, s2: Strategy, y: FrozenSet
                 ) -> List[Tuple[Tuple[object, object], ...]]:
    """All structure-preserving bijections between two configurations:
    forest isomorphisms matching side, move and polarity."""
    if len(x) != len(y):
        return []
    kids1 = {e: [c for c in s1.forest.children(e) if c in x] for e in x}
    kids2 = {f: [c for c in s2.forest.children(f) if c in y] for f in y}
    roots1 = [e for e in x if s1.forest.parent.get(e) not in x]
    roots2 = [f for f in y if s2.forest.parent.get(f) not in y]

    def key1(e):
        side, a = s1.display[e]
        return (side, a.move, s1.forest.polarity[e])

    def key2(f):
        side, a = s2.display[f]
        return (side, a.move, s2.forest.polarity[f])

    def match_sets(es, fs) -> List[Tuple]:
        if len(es) != len(fs):
            return []
        if not es:
            return [()]
        ges: Dict = {}
        gfs: Dict = {}
        for e in es:
            ges.setdefault(key1(e), []).append(e)
        for f in fs:
            gfs.setdefault(key2(f), []).append(f)
        if set(ges) != set(gfs):
            return []
        options_per_key = []
        for k in sorted(ges, key=repr):
            es_k, fs_k = ges[k], gfs[k]
            if len(es_k) != len(fs_k):
                return []
            opts_k: List[Tuple] = []
            for perm in itertools.permutations(fs_k):
                per_pair = []
                dead = False
                for e, f in zip(es_k, perm):
                    subs = match_sets(kids1[e], kids2[f])
                    if not subs:
                        dead = True
                        break
                    per_pair.append([((e, f),) + sub for sub in subs])
                if dead:
                    continue
                for combo in itertools.product(*per_pair):
                    opts_k.append(tuple(itertools.chain.from_iterable(combo)))
            if not opts_k:
                return []
            options_per_key.append(opts_k)
        out = []
        for combo in itertools.product(*options_per_key):
            out.append(tuple(itertools.chain.from_iterable(combo)))
        return out

    return match_sets(roots1, roots2)


def _display_positive(s1: Strategy, theta: Iterable[Tuple[object, object]],
                      s2: Strategy) -> bool:
    """A bijection displays to a positive symmetry when the copy indices
    of negative events are untouched."""
    for e, f in theta:
        side, a = s1.display[e]
        _, b = s2.display[f]
        if s1.board.polarity_of((side, a)) == "-" \
                and a.copy_index != b.copy_index:
            return False
    return True


def _check_thin(s: Strategy, cap_events: int, cap_configs: int
                ) -> CheckResult:
    configs: List[FrozenSet] = []
    for x in s.configurations(cap_events):
        configs.append(x)
        if len(configs) >= cap_configs:
            break
    groups: Dict[Tuple, List[FrozenSet]] = {}
    for x in configs:
        key = (len(x), _config_canonical(s, x))
        groups.setdefault(key, []).append(x)
    for group in groups.values():
        for x in group:
            for y in group:
                for theta in _config_isos(s, x, s, y):
                    if all(e == f for e, f in theta):
                        continue
                    if _display_positive(s, theta, s):
                        return CheckResult(
                            False,
                            "non-identity symmetry with positive display",
                            (x, y, theta))
    return CheckResult(
        True,
        f"no positive-display symmetry among {len(configs)} configurations "
        f"of at most {cap_events} events", None)


def check_dsinn(s: Strategy, max_config_events: Optional[int] = None,
                thin_config_cap: int = 400) -> Dict[str, CheckResult]:
    """Per-condition report on a strategy, within the materialized budget:
    negative, forestial, deterministic, courteous, receptive, winning and
    thin, each with a counterexample when violated."""
    report: Dict[str, CheckResult] = {}
    f = s.forest

    bad_roots = [r for r in f.roots if f.polarity[r] == "+"]
    report["negative"] = CheckResult(
        not bad_roots,
        "all minimal events are negative" if not bad_roots
        else "positive minimal event",
        bad_roots[0] if bad_roots else None)

    report["forestial"] = CheckResult(
        True, "causality is forest-shaped by construction", None)

    det_cex = None
    for e in f.events:
        if f.polarity[e] == "-":
            pos = [c for c in f.children(e) if f.polarity[c] == "+"]
            if len(pos) > 1:
                det_cex = (e, tuple(pos))
                break
    report["deterministic"] = CheckResult(
        det_cex is None,
        "at most one positive continuation after each negative event"
        if det_cex is None else "several positive continuations",
        det_cex)

    court_cex = None
    for c, p in f.parent.items():
        if f.polarity[p] == "-" and f.polarity[c] == "+":
            continue
        sp, ap = s.display[p]
        sc, ac = s.display[c]
        if sp != sc or ac.parent != ap:
            court_cex = (p, c)
            break
    report["courteous"] = CheckResult(
        court_cex is None,
        "immediate causality beyond -/+ pairs follows the board"
        if court_cex is None else "non-board causal link",
        court_cex)

    report["receptive"] = _check_receptive(s, s.budget.width)

    win_cex = None
    checked = 0
    for x in s.plus_covered_configurations(max_config_events):
        if s.payoff_of(x) < 0:
            win_cex = x
            break
        checked += 1
    report["winning"] = CheckResult(
        win_cex is None,
        f"payoff >= 0 on {checked} +-covered configurations",
        win_cex)

    report["thin"] = _check_thin(s, max_config_events or 6, thin_config_cap)
    return report


# ---------------------------------------------------------------- positions

def _config_canonical(s: Strategy, x: FrozenSet):
    """Canonical (index-erased) form of a configuration, keeping the
    side of each event visible in its label."""
    f = s.forest
    events = frozenset(x)
    parent = {e: f.parent[e] for e in events
              if f.parent.get(e) in events}
    pol = {e: f.polarity[e] for e in events}
    label = {e: (s.display[e][0], s.display[e][1].move) for e in events}
    index = {e: s.display[e][1].copy_index for e in events}
    small = EventForest(events, parent, pol, (), label, index)
    return canonical_position(small.configuration(events))


def plus_covered_positions(s: Strategy,
                           max_events: Optional[int] = None) -> Counter:
    """Exact multiset of displayed positions of the +-covered
    configurations of the window (no pruning; use for small budgets)."""
    out: Counter = Counter()
    for x in s.plus_covered_configurations(max_events):
        left, right = s.display_config(x)
        out[(left.position(), right.position())] += 1
    return out


def reached_positions(s: Strategy, max_events: Optional[int] = None
                      ) -> FrozenSet[Tuple[Position, Position]]:
    """Set of displayed positions of +-covered configurations.

    Explores one representative per symmetry class of configurations:
    sound for the uniform strategies built here, whose behaviour is
    invariant under reindexing.
    """
    out: Set[Tuple[Position, Position]] = set()
    seen: Set[object] = set()
    frontier: List[FrozenSet] = [frozenset()]
    seen.add(_config_canonical(s, frozenset()))
    while frontier:
        nxt: List[FrozenSet] = []
        for x in frontier:
            if s.is_plus_covered(x):
                left, right = s.display_config(x)
                out.add((left.position(), right.position()))
            if max_events is not None and len(x) >= max_events:
                continue
            for e in s._enabled(x):
                y = x | {e}
                key = _config_canonical(s, y)
                if key in seen:
                    continue
                seen.add(key)
                nxt.append(y)
        frontier = nxt
    return frozenset(out)


def positively_isomorphic(s1: Strategy, s2: Strategy,
                          max_events: Optional[int] = None,
                          strict: bool = False) -> bool:
    """Equality of the +-covered behaviour of two windows on the same
    stage, up to reindexing.

    The default check compares the multisets of displayed positions.
    With ``strict`` it additionally matches the configurations pairwise
    along bijections whose display only reindexes positive moves.
    """
    if s1.board != s2.board:
        return False
    if plus_covered_positions(s1, max_events) \
            != plus_covered_positions(s2, max_events):
        return False
    if not strict:
        return True
    xs = list(s1.plus_covered_configurations(max_events))
    ys = list(s2.plus_covered_configurations(max_events))
    if len(xs) != len(ys):
        return False

    def edge(x, y):
        return any(_display_positive(s1, th, s2)
                   for th in _config_isos(s1, x, s2, y))

    def match(rem_x, rem_y):
        if not rem_x:
            return True
        x = rem_x[0]
        for k, y in enumerate(rem_y):
            if edge(x, y) and match(rem_x[1:], rem_y[:k] + rem_y[k + 1:]):
                return True
        return False

    return match(xs, ys)


# -------------------------------------------------------------- interfaces

def strategy_to_dot(s: Strategy, name: str = "strategy") -> str:
    """Graphviz rendering: solid arrows for the strategy's own causality,
    dotted arrows for the board causality between displayed addresses."""
    events = sorted(s.forest.events, key=repr)
    ids = {e: i for i, e in enumerate(events)}
    lines = [f"digraph {name} {{"]
    for e in events:
        side, a = s.display[e]
        pol = s.forest.polarity[e]
        lines.append(f'  n{ids[e]} [label="{side}:{a!r} ({pol})"];')
    for c, p in sorted(s.forest.parent.items(), key=lambda kv: repr(kv)):
        lines.append(f"  n{ids[p]} -> n{ids[c]};")
    by_display: Dict[TaggedAddress, List] = {}
    for e, d in s.display.items():
        by_display.setdefault(d, []).append(e)
    for e in events:
        side, a = s.display[e]
        if a.parent is None:
            continue
        for e2 in by_display.get((side, a.parent), ()):
            if s.forest.parent.get(e) == e2:
                continue
            lines.append(f"  n{ids[e2]} -> n{ids[e]} [style=dotted];")
    lines.append("}")
    return "\n".join(lines)


def plus_covered_json(s: Strategy, max_events: Optional[int] = None) -> dict:
    """JSON value listing the +-covered configurations of the window by
    displayed address."""
    configs = []
    for x in s.plus_covered_configurations(max_events):
        entry = sorted(
            ({"side": side, "path": [[m, i] for m, i in a.path]}
             for side, a in (s.display[e] for e in x)),
            key=lambda d: (d["side"], d["path"]))
        configs.append(entry)
    configs.sort(key=lambda c: (len(c), json.dumps(c, sort_keys=True)))
    return {"name": s.name, "events": len(s.forest.events),
            "plus_covered": configs}
