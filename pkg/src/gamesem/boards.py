"""Game boards: arenas, copy indices, payoff, and the type constructors.

A board is kept *intensional*: we store the arena (a finite move forest with
polarities and an index domain per move), the constructor tree it came from,
and evaluate payoff / conflict / configurations on demand.  Configurations
are finite sets of *addresses*; an address is the path of (move, copy index)
pairs leading to an occurrence of a move.  Exponentials make the set of
configurations infinite, hence the explicit enumeration budget.

Move ids are deterministic strings built from the constructor tree
("arg.out.qu" and the like), so two boards built the same way are equal and
their configurations can be compared directly.

Payoff is a value in {-1, 0, +1}: -1 means the program abandoned the play,
+1 the environment did, and 0 marks the complete ("stopping")
configurations, which are the ones both collapses keep.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, FrozenSet, Iterable, Iterator, Optional, Tuple

from .event_core import Configuration, EventForest, Position, Symmetry
from .event_core import canonical_position as _forest_canonical_position
from .lambda_frontend import Arrow, Base, SimpleType

__all__ = [
    "Arena", "MoveAddress", "MixedBoard", "HomBoard", "BoardConfig", "Budget",
    "atom", "top", "dual", "tensor", "with_", "lollipop", "bang", "hom",
    "interpret_type", "context_board", "payoff_of", "enumerate_configurations",
    "tensor_payoff", "par_payoff", "symmetry_sides", "factor_symmetry",
    "board_to_json", "arena_to_dot",
]

Payoff = int  # one of -1, 0, +1


# ------------------------------------------------------------ payoff tables

def tensor_payoff(a: Payoff, b: Payoff) -> Payoff:
    """Both sides must consent: -1 dominates, then +1."""
    if a == -1 or b == -1:
        return -1
    if a == +1 or b == +1:
        return +1
    return 0


def par_payoff(a: Payoff, b: Payoff) -> Payoff:
    """Dual table: +1 dominates, then -1."""
    if a == +1 or b == +1:
        return +1
    if a == -1 or b == -1:
        return -1
    return 0


# ------------------------------------------------------------------- shapes

@dataclass(frozen=True)
class _Atom:
    pass


@dataclass(frozen=True)
class _Dual:
    inner: object


@dataclass(frozen=True)
class _Tensor:
    left: object
    right: object


@dataclass(frozen=True)
class _With:
    components: Tuple[object, ...]


@dataclass(frozen=True)
class _Bang:
    inner: object


@dataclass(frozen=True)
class _Lolli:
    arg: object
    out: object


# -------------------------------------------------------------------- arena

class Arena:
    """Finite move forest with polarities, index domains and local conflict.

    ``ind``: "nat" if the move admits arbitrary copy indices (it is a
    duplication point introduced by a bang), "singleton" if only the
    distinguished index 0 is allowed.  ``conflicts`` are the generating
    pairs of sibling moves belonging to different with-components.
    """

    __slots__ = ("moves", "parent", "polarity", "ind", "conflicts", "_children")

    def __init__(self, moves, parent, polarity, ind, conflicts=()):
        self.moves: Tuple[str, ...] = tuple(sorted(moves))
        self.parent: Dict[str, str] = dict(parent)
        self.polarity: Dict[str, str] = dict(polarity)
        self.ind: Dict[str, str] = dict(ind)
        self.conflicts: FrozenSet[FrozenSet[str]] = frozenset(
            frozenset(p) for p in conflicts)
        self._children: Dict[str, Tuple[str, ...]] = {}
        kids: Dict[str, list] = {m: [] for m in self.moves}
        for child, par in self.parent.items():
            kids[par].append(child)
        for m in self.moves:
            self._children[m] = tuple(sorted(kids[m]))

    @property
    def roots(self) -> Tuple[str, ...]:
        return tuple(m for m in self.moves if m not in self.parent)

    def children(self, m: str) -> Tuple[str, ...]:
        return self._children[m]

    def move_conflict(self, m1: str, m2: str) -> bool:
        return frozenset((m1, m2)) in self.conflicts

    def _key(self):
        return (self.moves,
                tuple(sorted(self.parent.items())),
                tuple(sorted(self.polarity.items())),
                tuple(sorted(self.ind.items())),
                tuple(sorted(tuple(sorted(p)) for p in self.conflicts)))

    def __eq__(self, other):
        return isinstance(other, Arena) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())


def _prefixed(arena: Arena, pfx: str) -> Arena:
    return Arena(
        (pfx + m for m in arena.moves),
        {pfx + c: pfx + p for c, p in arena.parent.items()},
        {pfx + m: pol for m, pol in arena.polarity.items()},
        {pfx + m: d for m, d in arena.ind.items()},
        ((pfx + a, pfx + b) for pair in arena.conflicts for a, b in [tuple(pair)]),
    )


def _flipped(arena: Arena) -> Arena:
    flip = {"-": "+", "+": "-"}
    return Arena(arena.moves, arena.parent,
                 {m: flip[p] for m, p in arena.polarity.items()},
                 arena.ind,
                 (tuple(pair) for pair in arena.conflicts))


@lru_cache(maxsize=None)
def _arena_of(shape) -> Arena:
    if isinstance(shape, _Atom):
        return Arena(["qu"], {}, {"qu": "-"}, {"qu": "singleton"})
    if isinstance(shape, _Dual):
        return _flipped(_arena_of(shape.inner))
    if isinstance(shape, _Tensor):
        a = _prefixed(_arena_of(shape.left), "1.")
        b = _prefixed(_arena_of(shape.right), "2.")
        return Arena(a.moves + b.moves, {**a.parent, **b.parent},
                     {**a.polarity, **b.polarity}, {**a.ind, **b.ind},
                     [tuple(p) for p in a.conflicts | b.conflicts])
    if isinstance(shape, _With):
        parts = [_prefixed(_arena_of(c), f"&{k}.")
                 for k, c in enumerate(shape.components, start=1)]
        moves, parent, pol, ind = [], {}, {}, {}
        conflicts = []
        for p in parts:
            moves.extend(p.moves)
            parent.update(p.parent)
            pol.update(p.polarity)
            ind.update(p.ind)
            conflicts.extend(tuple(q) for q in p.conflicts)
        # choosing a component excludes the others
        for i, p in enumerate(parts):
            for q in parts[i + 1:]:
                for r1 in p.roots:
                    for r2 in q.roots:
                        conflicts.append((r1, r2))
        return Arena(moves, parent, pol, ind, conflicts)
    if isinstance(shape, _Bang):
        inner = _arena_of(shape.inner)
        ind = dict(inner.ind)
        for r in inner.roots:
            ind[r] = "nat"
        return Arena(inner.moves, inner.parent, inner.polarity, ind,
                     (tuple(p) for p in inner.conflicts))
    if isinstance(shape, _Lolli):
        arg = _prefixed(_flipped(_arena_of(shape.arg)), "arg.")
        out = _prefixed(_arena_of(shape.out), "out.")
        out_roots = out.roots
        if len(out_roots) != 1:
            raise ValueError("linear arrow requires a single-rooted codomain")
        root = out_roots[0]
        parent = {**arg.parent, **out.parent}
        for r in arg.roots:
            parent[r] = root
        return Arena(arg.moves + out.moves, parent,
                     {**arg.polarity, **out.polarity},
                     {**arg.ind, **out.ind},
                     [tuple(p) for p in arg.conflicts | out.conflicts])
    raise TypeError(f"unknown shape {shape!r}")


# ---------------------------------------------------------------- addresses

@dataclass(frozen=True)
class MoveAddress:
    """Path of (move, copy index) pairs from an arena root to an occurrence."""
    path: Tuple[Tuple[str, int], ...]

    @property
    def move(self) -> str:
        return self.path[-1][0]

    @property
    def copy_index(self) -> int:
        return self.path[-1][1]

    @property
    def parent(self) -> Optional["MoveAddress"]:
        return MoveAddress(self.path[:-1]) if len(self.path) > 1 else None

    def child(self, move: str, index: int) -> "MoveAddress":
        return MoveAddress(self.path + ((move, index),))

    def depth(self) -> int:
        return len(self.path)

    def __repr__(self) -> str:
        return "/".join(f"{m}[{i}]" for m, i in self.path)


def _addr(*pairs) -> MoveAddress:
    return MoveAddress(tuple(pairs))


# ------------------------------------------------------------------- boards

@dataclass(frozen=True)
class Budget:
    """Enumeration budget: maximum address depth, maximum copy index per
    duplication point (width), and maximum number of events."""
    depth: int = 3
    width: int = 2
    max_events: Optional[int] = None

    def admits_more(self, n_events: int) -> bool:
        return self.max_events is None or n_events < self.max_events


class MixedBoard:
    """A game board built from atoms by dual, tensor, with, bang and the
    linear arrow; negative unless dualized, with payoff evaluated through
    the constructor tree."""

    __slots__ = ("shape",)

    def __init__(self, shape):
        self.shape = shape

    # -- identity ----------------------------------------------------------

    def __eq__(self, other):
        return isinstance(other, MixedBoard) and self.shape == other.shape

    def __hash__(self):
        return hash(self.shape)

    def __repr__(self):
        return f"MixedBoard({_shape_str(self.shape)})"

    # -- derived data ------------------------------------------------------

    @property
    def arena(self) -> Arena:
        return _arena_of(self.shape)

    @property
    def is_negative(self) -> bool:
        return all(self.arena.polarity[r] == "-" for r in self.arena.roots)

    @property
    def is_strict(self) -> bool:
        return _is_strict(self.shape)

    @property
    def is_well_opened(self) -> bool:
        return self.is_strict and len(self.arena.roots) == 1

    # -- addresses ---------------------------------------------------------

    def validate_address(self, a: MoveAddress) -> None:
        arena = self.arena
        prev = None
        for move, index in a.path:
            if move not in arena.polarity:
                raise ValueError(f"unknown move {move!r} in {a!r}")
            par = arena.parent.get(move)
            if prev is None:
                if par is not None:
                    raise ValueError(f"address {a!r} does not start at a root")
            elif par != prev:
                raise ValueError(f"address {a!r} breaks arena causality")
            if arena.ind[move] == "singleton" and index != 0:
                raise ValueError(
                    f"move {move!r} admits only the distinguished index")
            if index < 0:
                raise ValueError("copy indices are non-negative")
            prev = move

    def polarity_of(self, a: MoveAddress) -> str:
        return self.arena.polarity[a.move]

    def addresses_conflict(self, a: MoveAddress, b: MoveAddress) -> bool:
        """Conflict: diverge, at the same copy index, between moves of
        different components of a with."""
        for (m1, i1), (m2, i2) in zip(a.path, b.path):
            if (m1, i1) != (m2, i2):
                return i1 == i2 and self.arena.move_conflict(m1, m2)
        return False  # one is a prefix of the other

    # -- configurations ----------------------------------------------------

    def configuration(self, addresses: Iterable[MoveAddress]) -> "BoardConfig":
        return BoardConfig(self, frozenset(addresses))

    def empty_configuration(self) -> "BoardConfig":
        return BoardConfig(self, frozenset())

    def extensions(self, config: "BoardConfig", budget: Budget
                   ) -> Iterator[MoveAddress]:
        """Addresses that extend ``config`` within ``budget``."""
        arena = self.arena
        if not budget.admits_more(len(config.addresses)):
            return
        candidates = []
        for r in arena.roots:
            width = budget.width if arena.ind[r] == "nat" else 1
            for i in range(width):
                candidates.append(_addr((r, i)))
        for a in config.addresses:
            if a.depth() >= budget.depth:
                continue
            for child in arena.children(a.move):
                width = budget.width if arena.ind[child] == "nat" else 1
                for i in range(width):
                    candidates.append(a.child(child, i))
        for c in candidates:
            if c.depth() > budget.depth:
                continue
            if c in config.addresses:
                continue
            if any(self.addresses_conflict(c, b) for b in config.addresses):
                continue
            yield c

    # -- payoff ------------------------------------------------------------

    def payoff(self, config: "BoardConfig") -> Payoff:
        return _payoff(self.shape, frozenset(a.path for a in config.addresses))


@dataclass(frozen=True)
class BoardConfig:
    """A finite down-closed conflict-free set of addresses of a board."""
    board: MixedBoard
    addresses: FrozenSet[MoveAddress]

    def __post_init__(self):
        for a in self.addresses:
            self.board.validate_address(a)
            p = a.parent
            if p is not None and p not in self.addresses:
                raise ValueError(f"configuration not down-closed at {a!r}")
        lst = sorted(self.addresses, key=lambda x: x.path)
        for i, a in enumerate(lst):
            for b in lst[i + 1:]:
                if self.board.addresses_conflict(a, b):
                    raise ValueError(f"conflicting addresses {a!r}, {b!r}")

    def __len__(self):
        return len(self.addresses)

    def __contains__(self, a: MoveAddress) -> bool:
        return a in self.addresses

    def to_forest(self) -> Configuration:
        """View as an event forest configuration (labels = arena moves,
        indices = copy indices), for symmetry and canonicalization."""
        events = self.addresses
        parent = {a: a.parent for a in events if a.parent is not None}
        pol = {a: self.board.polarity_of(a) for a in events}
        label = {a: a.move for a in events}
        index = {a: a.copy_index for a in events}
        forest = EventForest(events, parent, pol, label=label, index=index)
        return forest.configuration(events)

    def position(self) -> Position:
        return _forest_canonical_position(self.to_forest())


# ----------------------------------------------------------- payoff engine

def _split_prefix(paths, pfx):
    """Paths whose entries all start with ``pfx``, with it stripped."""
    n = len(pfx)
    return frozenset(tuple((m[n:], i) for m, i in p) for p in paths
                     if p[0][0].startswith(pfx))


def _payoff(shape, paths: FrozenSet[Tuple]) -> Payoff:
    if isinstance(shape, _Atom):
        return +1 if not paths else 0
    if isinstance(shape, _Dual):
        return -_payoff(shape.inner, paths)
    if isinstance(shape, _Tensor):
        return tensor_payoff(_payoff(shape.left, _split_prefix(paths, "1.")),
                             _payoff(shape.right, _split_prefix(paths, "2.")))
    if isinstance(shape, _With):
        if not paths:
            return +1
        for k, comp in enumerate(shape.components, start=1):
            part = _split_prefix(paths, f"&{k}.")
            if part:
                return _payoff(comp, part)
        raise ValueError("with-configuration fits no component")
    if isinstance(shape, _Bang):
        if not paths:
            return 0
        out: Payoff = 0
        first = True
        for i in sorted({p[0][1] for p in paths}):
            copy = frozenset(((p[0][0], 0),) + p[1:] for p in paths
                             if p[0][1] == i)
            k = _payoff(shape.inner, copy)
            out = k if first else tensor_payoff(out, k)
            first = False
        return out
    if isinstance(shape, _Lolli):
        out_paths = frozenset(p for p in paths
                              if all(m.startswith("out.") for m, _ in p))
        arg_paths = frozenset(p[1:] for p in paths
                              if len(p) > 1 and p[1][0].startswith("arg."))
        arg_paths = frozenset(tuple((m[4:], i) for m, i in p)
                              for p in arg_paths)
        out_paths = frozenset(tuple((m[4:], i) for m, i in p)
                              for p in out_paths)
        return par_payoff(-_payoff(shape.arg, arg_paths),
                          _payoff(shape.out, out_paths))
    raise TypeError(f"unknown shape {shape!r}")


def _is_strict(shape) -> bool:
    if isinstance(shape, _Atom):
        return True
    if isinstance(shape, _With):
        return all(_is_strict(c) for c in shape.components)
    if isinstance(shape, _Lolli):
        return _is_strict(shape.out)
    return False


def _shape_str(shape) -> str:
    if isinstance(shape, _Atom):
        return "o"
    if isinstance(shape, _Dual):
        return f"{_shape_str(shape.inner)}^"
    if isinstance(shape, _Tensor):
        return f"({_shape_str(shape.left)} * {_shape_str(shape.right)})"
    if isinstance(shape, _With):
        if not shape.components:
            return "T"
        return "(" + " & ".join(_shape_str(c) for c in shape.components) + ")"
    if isinstance(shape, _Bang):
        return f"!{_shape_str(shape.inner)}"
    if isinstance(shape, _Lolli):
        return f"({_shape_str(shape.arg)} -o {_shape_str(shape.out)})"
    return repr(shape)


# ------------------------------------------------------------- constructors

def atom() -> MixedBoard:
    """The one-question strict board."""
    return MixedBoard(_Atom())


def top() -> MixedBoard:
    """The empty board (the with of no components)."""
    return MixedBoard(_With(()))


def dual(b: MixedBoard) -> MixedBoard:
    if isinstance(b.shape, _Dual):
        return MixedBoard(b.shape.inner)
    return MixedBoard(_Dual(b.shape))


def tensor(left: MixedBoard, right: MixedBoard) -> MixedBoard:
    return MixedBoard(_Tensor(left.shape, right.shape))


def with_(components: Iterable[MixedBoard]) -> MixedBoard:
    comps = tuple(components)
    for c in comps:
        if not c.is_strict:
            raise ValueError("with requires strict components")
    return MixedBoard(_With(tuple(c.shape for c in comps)))


def bang(inner: MixedBoard) -> MixedBoard:
    if not inner.is_strict:
        raise ValueError("bang requires a strict board")
    return MixedBoard(_Bang(inner.shape))


def lollipop(arg: MixedBoard, out: MixedBoard) -> MixedBoard:
    if isinstance(out.shape, _With):
        # distribute over the components of a strict codomain
        if not out.is_strict:
            raise ValueError("linear arrow requires a strict codomain")
        return with_([lollipop(arg, MixedBoard(c))
                      for c in out.shape.components])
    if not out.is_well_opened:
        raise ValueError("linear arrow requires a strict codomain")
    return MixedBoard(_Lolli(arg.shape, out.shape))


def interpret_type(ty: SimpleType) -> MixedBoard:
    """The board of a simple type: atoms to the one-question board, arrows
    to a bang on the left of a linear arrow."""
    if isinstance(ty, Base):
        return atom()
    assert isinstance(ty, Arrow)
    return lollipop(bang(interpret_type(ty.domain)),
                    interpret_type(ty.codomain))


def context_board(types: Iterable[SimpleType]) -> MixedBoard:
    """The with of the interpretations of the context entries."""
    return with_([interpret_type(t) for t in types])


# ------------------------------------------------------------------- hom

class HomBoard:
    """The stage A |- B on which strategies play: left board dualized, par
    payoff.  Not itself a mixed board (its polarity flips on the left);
    addresses are tagged with their side."""

    __slots__ = ("left", "right")

    def __init__(self, left: MixedBoard, right: MixedBoard):
        self.left = left
        self.right = right

    def __eq__(self, other):
        return (isinstance(other, HomBoard)
                and self.left == other.left and self.right == other.right)

    def __hash__(self):
        return hash((self.left, self.right))

    def __repr__(self):
        return f"HomBoard({self.left!r} |- {self.right!r})"

    def polarity_of(self, tagged) -> str:
        side, addr = tagged
        if side == "L":
            return "+" if self.left.polarity_of(addr) == "-" else "-"
        return self.right.polarity_of(addr)

    def validate_address(self, tagged) -> None:
        side, addr = tagged
        if side == "L":
            self.left.validate_address(addr)
        elif side == "R":
            self.right.validate_address(addr)
        else:
            raise ValueError(f"bad side tag {side!r}")

    def addresses_conflict(self, t1, t2) -> bool:
        if t1[0] != t2[0]:
            return False
        board = self.left if t1[0] == "L" else self.right
        return board.addresses_conflict(t1[1], t2[1])

    def parent_of(self, tagged):
        side, addr = tagged
        p = addr.parent
        return (side, p) if p is not None else None

    def payoff(self, left_addrs, right_addrs) -> Payoff:
        kl = self.left.payoff(self.left.configuration(left_addrs))
        kr = self.right.payoff(self.right.configuration(right_addrs))
        return par_payoff(-kl, kr)


def hom(left: MixedBoard, right: MixedBoard) -> HomBoard:
    return HomBoard(left, right)


# -------------------------------------------------------------- enumeration

def enumerate_configurations(board: MixedBoard, budget: Budget
                             ) -> Iterator[BoardConfig]:
    """Breadth-first enumeration of configurations within budget: depth,
    copy-index width at duplication points, and total event count.

    Everything yielded is a configuration of the unbounded board; the
    enumeration is complete only relative to the budget.
    """
    seen = {frozenset()}
    frontier = [board.empty_configuration()]
    yield frontier[0]
    while frontier:
        nxt = []
        for cfg in frontier:
            for ext in board.extensions(cfg, budget):
                new = cfg.addresses | {ext}
                if new in seen:
                    continue
                seen.add(new)
                c2 = BoardConfig(board, new)
                nxt.append(c2)
                yield c2
        frontier = nxt


def payoff_of(board: MixedBoard, config: BoardConfig) -> Payoff:
    return board.payoff(config)


# ---------------------------------------------------- symmetries on boards

def symmetry_sides(board: MixedBoard, sym: Symmetry) -> FrozenSet[str]:
    """Which polarity classes a symmetry belongs to.

    "+" requires copy indices of negative moves to be fixed (the program
    may only reindex its own moves), "-" dually.  The identity is both.
    """
    out = set()
    neg_ok = all(a.copy_index == b.copy_index
                 for a, b in sym.pairs if board.polarity_of(a) == "-")
    pos_ok = all(a.copy_index == b.copy_index
                 for a, b in sym.pairs if board.polarity_of(a) == "+")
    if neg_ok:
        out.add("+")
    if pos_ok:
        out.add("-")
    return frozenset(out)


def factor_symmetry(board: MixedBoard, sym: Symmetry
                    ) -> Tuple[Symmetry, BoardConfig, Symmetry]:
    """Factor a symmetry as negative-then-positive through a middle
    configuration: negative moves take their target index, positive moves
    keep their source index."""
    mapping = sym.mapping
    mid_of: Dict[MoveAddress, MoveAddress] = {}

    def mid_addr(a: MoveAddress) -> MoveAddress:
        if a in mid_of:
            return mid_of[a]
        b = mapping[a]
        if board.polarity_of(a) == "-":
            entry = (a.move, b.copy_index)
        else:
            entry = (a.move, a.copy_index)
        p = a.parent
        m = MoveAddress((entry,)) if p is None else mid_addr(p).child(*entry)
        mid_of[a] = m
        return m

    for a in mapping:
        mid_addr(a)
    mid = board.configuration(mid_of.values())
    neg = Symmetry(tuple(sorted(((a, mid_of[a]) for a in mapping),
                                key=lambda p: (p[0].path, p[1].path))))
    pos = Symmetry(tuple(sorted(((mid_of[a], mapping[a]) for a in mapping),
                                key=lambda p: (p[0].path, p[1].path))))
    return neg, mid, pos


# -------------------------------------------------------------- interfaces

def board_to_json(board: MixedBoard) -> dict:
    arena = board.arena
    return {
        "shape": _shape_str(board.shape),
        "strict": board.is_strict,
        "arena": {
            "moves": list(arena.moves),
            "parent": dict(sorted(arena.parent.items())),
            "polarity": dict(sorted(arena.polarity.items())),
            "ind": dict(sorted(arena.ind.items())),
            "conflicts": sorted(sorted(p) for p in arena.conflicts),
        },
    }


def arena_to_dot(board: MixedBoard, name: str = "arena") -> str:
    """Graphviz rendering of the arena; causality drawn dotted."""
    arena = board.arena
    ids = {m: i for i, m in enumerate(arena.moves)}
    lines = [f"digraph {name} {{"]
    for m in arena.moves:
        dom = "N" if arena.ind[m] == "nat" else "*"
        lines.append(
            f'  n{ids[m]} [label="{m} ({arena.polarity[m]}, {dom})"];')
    for child, par in sorted(arena.parent.items()):
        lines.append(f"  n{ids[par]} -> n{ids[child]} [style=dotted];")
    for pair in sorted(tuple(sorted(p)) for p in arena.conflicts):
        lines.append(
            f"  n{ids[pair[0]]} -> n{ids[pair[1]]} [style=dashed, dir=none];")
    lines.append("}")
    return "\n".join(lines)


def board_to_json_str(board: MixedBoard) -> str:
    return json.dumps(board_to_json(board), indent=2, sort_keys=True)
