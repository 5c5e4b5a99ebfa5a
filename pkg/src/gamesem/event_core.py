"""Finite polarized event forests, configurations, and symmetries.

An event forest is the skeleton shared by game boards and strategies: a
finite set of events, each with at most one causal parent (so causality is
forestial), a polarity (``-`` for the environment, ``+`` for the program),
and optionally a label and a copy index.  Conflict is stored only at its
minimal generating pairs and propagated downward on demand: whenever two
events conflict, so do all events above them.

Configurations are the finite down-closed conflict-free subsets.  Two
configurations are symmetric when some order-isomorphism between them
preserves labels and polarities — copy indices are exactly what symmetry is
allowed to forget.  The canonical form of the symmetry class of a
configuration (its *position*) is an index-erased tree whose children are
grouped as multisets; equality of canonical forms coincides with the
existence of a symmetry.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Hashable, Iterable, Mapping, Optional, Tuple

__all__ = [
    "EventForest", "Configuration", "Symmetry", "Position",
    "enabled_extensions", "symmetry_between", "canonical_position",
    "forest_to_dot",
]

EventId = Hashable
Polarity = str  # "-" or "+"


# ------------------------------------------------------------------ forest #

class EventForest:
    """A finite event forest with polarities, optional labels and indices.

    Parameters
    ----------
    events:
        iterable of event ids (any hashable, typically ints).
    parent:
        partial map event -> event; events absent from it are roots.
    polarity:
        total map event -> "-" / "+".
    conflicts:
        iterable of unordered pairs, the *generating* conflicts; the full
        conflict relation is their downward propagation.  A generating pair
        must relate incomparable distinct events.
    label, index:
        optional decorations; symmetries must preserve labels but are free
        to change indices.
    """

    __slots__ = ("events", "parent", "polarity", "label", "index",
                 "_conflict_gens", "_children", "_roots")

    def __init__(self,
                 events: Iterable[EventId],
                 parent: Mapping[EventId, EventId],
                 polarity: Mapping[EventId, Polarity],
                 conflicts: Iterable[Tuple[EventId, EventId]] = (),
                 label: Optional[Mapping[EventId, Hashable]] = None,
                 index: Optional[Mapping[EventId, int]] = None):
        self.events: FrozenSet[EventId] = frozenset(events)
        self.parent: Dict[EventId, EventId] = dict(parent)
        self.polarity: Dict[EventId, Polarity] = dict(polarity)
        self.label: Dict[EventId, Hashable] = dict(label or {})
        self.index: Dict[EventId, int] = dict(index or {})
        self._conflict_gens = frozenset(frozenset(p) for p in conflicts)
        self._children: Dict[EventId, list] = {e: [] for e in self.events}
        for child, par in self.parent.items():
            self._children[par].append(child)
        self._roots = tuple(e for e in self.events if e not in self.parent)
        self._validate()

    # -- validation --------------------------------------------------------

    def _validate(self) -> None:
        for e, p in self.parent.items():
            if e not in self.events or p not in self.events:
                raise ValueError(f"parent map mentions unknown event: {e}->{p}")
        for e in self.events:
            if self.polarity.get(e) not in ("-", "+"):
                raise ValueError(f"event {e!r} lacks a polarity")
        # acyclicity (also guarantees finite causal histories)
        for e in self.events:
            seen = set()
            cur = e
            while cur in self.parent:
                if cur in seen:
                    raise ValueError(f"causal cycle through {e!r}")
                seen.add(cur)
                cur = self.parent[cur]
        for pair in self._conflict_gens:
            if len(pair) != 2:
                raise ValueError(f"conflict pair must be irreflexive: {set(pair)}")
            a, b = tuple(pair)
            if a not in self.events or b not in self.events:
                raise ValueError(f"conflict mentions unknown event: {set(pair)}")
            if self.leq(a, b) or self.leq(b, a):
                raise ValueError(
                    f"generating conflict relates comparable events: {a!r}, {b!r}")

    # -- causality ---------------------------------------------------------

    def children(self, e: EventId) -> Tuple[EventId, ...]:
        return tuple(self._children[e])

    @property
    def roots(self) -> Tuple[EventId, ...]:
        return self._roots

    def down_closure(self, e: EventId) -> FrozenSet[EventId]:
        """The causal history [e]: all events below and including e."""
        out = [e]
        while out[-1] in self.parent:
            out.append(self.parent[out[-1]])
        return frozenset(out)

    def leq(self, a: EventId, b: EventId) -> bool:
        return a in self.down_closure(b)

    def depth(self, e: EventId) -> int:
        return len(self.down_closure(e)) - 1

    # -- conflict ----------------------------------------------------------

    @property
    def conflict_generators(self) -> FrozenSet[FrozenSet[EventId]]:
        return self._conflict_gens

    def in_conflict(self, a: EventId, b: EventId) -> bool:
        """Full conflict: some generating pair sits below (a, b)."""
        da, db = self.down_closure(a), self.down_closure(b)
        for pair in self._conflict_gens:
            m1, m2 = tuple(pair)
            if (m1 in da and m2 in db) or (m2 in da and m1 in db):
                return True
        return False

    def conflict_pairs_closed(self) -> FrozenSet[FrozenSet[EventId]]:
        """The fully propagated conflict relation (small forests only)."""
        evs = sorted(self.events, key=str)
        out = set()
        for i, a in enumerate(evs):
            for b in evs[i + 1:]:
                if self.in_conflict(a, b):
                    out.add(frozenset((a, b)))
        return frozenset(out)

    # -- configurations ----------------------------------------------------

    def is_configuration(self, subset: Iterable[EventId]) -> bool:
        s = frozenset(subset)
        if not s <= self.events:
            return False
        for e in s:
            if e in self.parent and self.parent[e] not in s:
                return False
        lst = sorted(s, key=str)
        for i, a in enumerate(lst):
            for b in lst[i + 1:]:
                if self.in_conflict(a, b):
                    return False
        return True

    def configuration(self, subset: Iterable[EventId]) -> "Configuration":
        s = frozenset(subset)
        if not self.is_configuration(s):
            raise ValueError(f"not a configuration: {sorted(s, key=str)}")
        return Configuration(self, s)

    def empty_configuration(self) -> "Configuration":
        return Configuration(self, frozenset())

    def all_configurations(self, max_events: Optional[int] = None):
        """Breadth-first enumeration of all configurations (small forests)."""
        seen = {frozenset()}
        frontier = [frozenset()]
        yield Configuration(self, frozenset())
        while frontier:
            nxt = []
            for s in frontier:
                if max_events is not None and len(s) >= max_events:
                    continue
                for e in enabled_extensions(self, Configuration(self, s)):
                    s2 = s | {e}
                    if s2 not in seen:
                        seen.add(s2)
                        nxt.append(s2)
                        yield Configuration(self, s2)
            frontier = nxt


@dataclass(frozen=True)
class Configuration:
    """A finite down-closed conflict-free subset of an event forest."""
    forest: EventForest = field(compare=False)
    events: FrozenSet[EventId] = frozenset()

    def __post_init__(self):
        # cheap sanity: full validation happens in EventForest.configuration
        if not self.events <= self.forest.events:
            raise ValueError("configuration mentions events outside its forest")

    def __len__(self) -> int:
        return len(self.events)

    def __contains__(self, e: EventId) -> bool:
        return e in self.events

    def __eq__(self, other) -> bool:
        return (isinstance(other, Configuration)
                and self.forest is other.forest
                and self.events == other.events)

    def __hash__(self) -> int:
        return hash((id(self.forest), self.events))

    def roots(self) -> Tuple[EventId, ...]:
        return tuple(e for e in self.events
                     if e not in self.forest.parent)

    def children_in(self, e: EventId) -> Tuple[EventId, ...]:
        return tuple(c for c in self.forest.children(e) if c in self.events)

    def extend(self, e: EventId) -> "Configuration":
        return self.forest.configuration(self.events | {e})


# ----------------------------------------------------------------- enabled #

def enabled_extensions(f: EventForest, x: Configuration) -> FrozenSet[EventId]:
    """All events e outside x such that x ∪ {e} is again a configuration."""
    if x.forest is not f:
        raise ValueError("configuration does not belong to this forest")
    if not f.is_configuration(x.events):
        raise ValueError("not a configuration")
    out = set()
    for e in f.events:
        if e in x.events:
            continue
        if e in f.parent and f.parent[e] not in x.events:
            continue
        if any(f.in_conflict(e, y) for y in x.events):
            continue
        out.add(e)
    return frozenset(out)


# ---------------------------------------------------------------- symmetry #

@dataclass(frozen=True)
class Symmetry:
    """An order-isomorphism between two configurations preserving polarity
    and labels (copy indices may differ)."""
    pairs: Tuple[Tuple[EventId, EventId], ...]

    @property
    def mapping(self) -> Dict[EventId, EventId]:
        return {a: b for a, b in self.pairs}

    @property
    def inverse_mapping(self) -> Dict[EventId, EventId]:
        return {b: a for a, b in self.pairs}

    def inverse(self) -> "Symmetry":
        return Symmetry(tuple(sorted(((b, a) for a, b in self.pairs),
                                     key=lambda p: (str(p[0]), str(p[1])))))

    def __len__(self) -> int:
        return len(self.pairs)


def _node_code(x: Configuration, e: EventId) -> str:
    f = x.forest
    lbl = f.label.get(e)
    pol = f.polarity[e]
    inner = "".join(sorted(_node_code(x, c) for c in x.children_in(e)))
    return f"({lbl}|{pol}{inner})"


def _sorted_children(x: Configuration, e: Optional[EventId]):
    kids = x.roots() if e is None else x.children_in(e)
    f = x.forest
    return sorted(kids, key=lambda c: (_node_code(x, c),
                                       f.index.get(c, -1), str(c)))


def symmetry_between(x: Configuration, y: Configuration) -> Optional[Symmetry]:
    """A canonical symmetry witness between x and y, or None.

    Children with equal canonical codes are interchangeable; the witness
    pairs them in a fixed order (code, then index, then id), so the result
    is deterministic across runs.
    """
    pairs = []

    def match(e_x: Optional[EventId], e_y: Optional[EventId]) -> bool:
        xs = _sorted_children(x, e_x)
        ys = _sorted_children(y, e_y)
        if len(xs) != len(ys):
            return False
        for a, b in zip(xs, ys):
            if _node_code(x, a) != _node_code(y, b):
                return False
            pairs.append((a, b))
            if not match(a, b):
                return False
        return True

    if not match(None, None):
        return None
    return Symmetry(tuple(sorted(pairs, key=lambda p: (str(p[0]), str(p[1])))))


# ---------------------------------------------------------------- position #

@dataclass(frozen=True)
class Position:
    """The symmetry class of a configuration, as a canonical forest.

    ``forest`` is a tuple of nodes sorted by code; each node is
    ``(label, polarity, children)`` with ``children`` again such a tuple.
    Copy indices do not appear: positions are what configurations look like
    after forgetting how copies were numbered.
    """
    forest: Tuple = ()

    def __len__(self) -> int:
        def count(nodes) -> int:
            return sum(1 + count(n[2]) for n in nodes)
        return count(self.forest)

    def render(self) -> str:
        def go(nodes, depth):
            lines = []
            for lbl, pol, kids in nodes:
                lines.append("  " * depth + f"{lbl}{pol}")
                lines.extend(go(kids, depth + 1))
            return lines
        return "\n".join(go(self.forest, 0)) if self.forest else "(empty)"


def _canonical_node(x: Configuration, e: EventId) -> Tuple:
    f = x.forest
    kids = tuple(_canonical_node(x, c) for c in _sorted_children(x, e))
    return (f.label.get(e), f.polarity[e], kids)


def canonical_position(x: Configuration) -> Position:
    """Index-erased canonical tree; equal on x, y iff they are symmetric."""
    nodes = tuple(_canonical_node(x, r) for r in _sorted_children(x, None))
    return Position(nodes)


# --------------------------------------------------------------------- DOT #

def forest_to_dot(f: EventForest, name: str = "forest") -> str:
    """Graphviz rendering: solid arrows for immediate causality, node
    labels "lbl,index,polarity", dashed edges for generating conflicts."""
    ids = {e: i for i, e in enumerate(sorted(f.events, key=str))}
    lines = [f"digraph {name} {{"]
    for e in sorted(f.events, key=str):
        lbl = f.label.get(e, e)
        idx = f.index.get(e, 0)
        lines.append(f'  n{ids[e]} [label="{lbl},{idx},{f.polarity[e]}"];')
    for child, par in sorted(f.parent.items(), key=lambda kv: str(kv)):
        lines.append(f"  n{ids[par]} -> n{ids[child]};")
    for pair in sorted(f.conflict_generators, key=lambda p: sorted(map(str, p))):
        a, b = sorted(pair, key=str)
        lines.append(f"  n{ids[a]} -> n{ids[b]} [style=dashed, dir=none];")
    lines.append("}")
    return "\n".join(lines)
