"""Structural maps between board configurations and what they induce.

A structural map is a label-preserving forest morphism between two
configurations of one mixed board; depending on which copy indices it
preserves and which extensions it lifts, it is positive (contracts and
weakens only Player moves) or negative (only Opponent moves).  Chaining
positive maps covariantly and negative maps contravariantly yields a
relation between configurations; every such relation factors uniquely
through an apex configuration as one negative map followed by one
positive map, and :func:`factorize` computes that witness.  Existence of
such a relation is the qualitative preorder on configurations, decided
compositionally by :func:`config_preorder`.

The second half of the module synchronizes two strategies *through* such
a relation on their shared board: :func:`solve_cartesian_problem` grows
the unique pair of expanded configurations whose middle projections are
linked by the relation, with :func:`interaction_bound` as a termination
fuse and pointer structures (:class:`PointerStructure`) measuring the
interactions it produces.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import (Dict, FrozenSet, Iterable, List, Mapping, Optional,
                    Set, Tuple)

from .boards import BoardConfig, MixedBoard, MoveAddress
from .boards import _Atom, _Bang, _Dual, _Lolli, _Tensor, _With
from .strategies import Strategy

__all__ = [
    "StructuralMap", "CartesianMorphism", "PointerStructure",
    "classify_structural", "structural_map_to_json",
    "factorize", "compose_cartesian",
    "cartesian_between", "preorder_witness", "config_preorder",
    "pview", "oview",
    "chain_length_bound", "interaction_bound",
    "CartesianProblem", "CartesianSolution",
    "measure_problem", "solve_cartesian_problem", "validate_solution",
    "interaction_tree", "extract_pointer_structures",
    "problem_to_dot",
]

Path = Tuple[Tuple[str, int], ...]
Pair = Tuple[MoveAddress, MoveAddress]


# ---------------------------------------------------------- structural maps

_CORE = ("min-preserving", "causality-preserving", "label-preserving")


def _core_failures(board: MixedBoard, source: BoardConfig,
                   target: BoardConfig,
                   assignment: Mapping[MoveAddress, MoveAddress]
                   ) -> List[str]:
    bad: List[str] = []
    for a, b in assignment.items():
        if len(a.path) == 1 and len(b.path) != 1:
            bad.append("min-preserving")
        if a.parent is not None:
            if b.parent is None or assignment[a.parent] != b.parent:
                bad.append("causality-preserving")
        if a.move != b.move:
            bad.append("label-preserving")
    return sorted(set(bad))


@dataclass(frozen=True)
class StructuralMap:
    """A label-preserving forest morphism between two configurations of
    one mixed board.

    ``assignment`` must be total on ``source`` and send roots to roots,
    parents to parents and every address to one with the same arena
    move; copy indices may change freely.  Polarity conditions are
    queried through :meth:`classes` and :func:`classify_structural`.
    """

    board: MixedBoard
    source: BoardConfig
    target: BoardConfig
    assignment: Mapping[MoveAddress, MoveAddress]

    def __post_init__(self):
        amap = dict(self.assignment)
        object.__setattr__(self, "assignment", amap)
        if set(amap) != set(self.source.addresses):
            raise ValueError("assignment is not a function on the source")
        for a, b in amap.items():
            if b not in self.target.addresses:
                raise ValueError(f"image {b!r} lies outside the target")
        bad = _core_failures(self.board, self.source, self.target, amap)
        if bad:
            raise ValueError("not a structural map: " + ", ".join(bad))

    def __call__(self, a: MoveAddress) -> MoveAddress:
        return self.assignment[a]

    def __len__(self) -> int:
        return len(self.assignment)

    @property
    def pairs(self) -> FrozenSet[Pair]:
        return frozenset(self.assignment.items())

    # -- polarity conditions ----------------------------------------------

    def preserves_indices(self, polarity: str) -> bool:
        """Copy indices of moves of the given polarity are unchanged."""
        return all(a.copy_index == b.copy_index
                   for a, b in self.assignment.items()
                   if self.board.polarity_of(a) == polarity)

    def lifts_negative_extensions(self) -> bool:
        """Every negative child of an image, and every negative root of
        the target, has a pre-image under the right source address."""
        hit_roots = {b for a, b in self.assignment.items()
                     if b.parent is None}
        for b in self.target.addresses:
            if b.parent is None and self.board.polarity_of(b) == "-" \
                    and b not in hit_roots:
                return False
        return self._lifts_children("+", "-")

    def lifts_positive_extensions(self) -> bool:
        """Every positive child of an image has a pre-image under the
        right source address."""
        return self._lifts_children("-", "+")

    def _lifts_children(self, at: str, child_pol: str) -> bool:
        kids: Dict[MoveAddress, List[MoveAddress]] = {}
        for b in self.target.addresses:
            if b.parent is not None \
                    and self.board.polarity_of(b) == child_pol:
                kids.setdefault(b.parent, []).append(b)
        for a, b in self.assignment.items():
            if self.board.polarity_of(a) != at:
                continue
            images = {self.assignment[c] for c in self.source.addresses
                      if c.parent == a}
            for need in kids.get(b, ()):
                if need not in images:
                    return False
        return True

    def classes(self) -> FrozenSet[str]:
        """All polarity classes the map belongs to.  The identity map is
        both positive and negative."""
        out = set()
        minus_pres = self.preserves_indices("-")
        plus_pres = self.preserves_indices("+")
        if minus_pres:
            out.add("partial-positive")
            if self.lifts_negative_extensions():
                out.add("positive")
        if plus_pres:
            out.add("partial-negative")
            if self.lifts_positive_extensions():
                out.add("negative")
        return frozenset(out)

    def is_positive(self) -> bool:
        return "positive" in self.classes()

    def is_negative(self) -> bool:
        return "negative" in self.classes()

    @staticmethod
    def identity(config: BoardConfig) -> "StructuralMap":
        return StructuralMap(config.board, config, config,
                             {a: a for a in config.addresses})


_CLASS_ORDER = ("positive", "negative", "partial-positive",
                "partial-negative")


def classify_structural(f, source: Optional[BoardConfig] = None,
                        target: Optional[BoardConfig] = None,
                        assignment: Optional[Mapping[MoveAddress,
                                                     MoveAddress]] = None
                        ) -> str:
    """The strongest polarity class of a candidate structural map.

    Accepts either a :class:`StructuralMap` or the raw data
    ``(board, source, target, assignment)``.  Returns one of
    ``positive``, ``negative``, ``partial-positive``,
    ``partial-negative`` or ``none`` — the last both for maps that
    satisfy no polarity condition and for maps that fail a core
    condition (root, parent or move not preserved).  When a map is both
    positive and negative, the classes are tried in that precedence
    order and ``positive`` wins.  Raises if ``assignment`` is not a
    total function from the source into the target.
    """
    if isinstance(f, StructuralMap):
        sm = f
    else:
        amap = dict(assignment)
        if set(amap) != set(source.addresses):
            raise ValueError("assignment is not a function on the source")
        for b in amap.values():
            if b not in target.addresses:
                raise ValueError(f"image {b!r} lies outside the target")
        if _core_failures(f, source, target, amap):
            return "none"
        sm = StructuralMap(f, source, target, amap)
    got = sm.classes()
    for name in _CLASS_ORDER:
        if name in got:
            return name
    return "none"


def structural_map_to_json(sm: StructuralMap) -> dict:
    """Pair-list serialization of a structural map."""
    pairs = sorted(([list(p) for p in a.path], [list(p) for p in b.path])
                   for a, b in sm.assignment.items())
    return {
        "events": len(sm.source.addresses),
        "classes": sorted(sm.classes()),
        "pairs": [list(p) for p in pairs],
    }


# ------------------------------------------------------ cartesian morphisms

@dataclass(frozen=True)
class CartesianMorphism:
    """A relation between two configurations obtained by chaining
    positive maps covariantly and negative maps contravariantly,
    normalized to its unique two-map factorization.

    ``relation`` always equals ``pos_map`` composed after the transpose
    of ``neg_map``; arbitrary-length chains are collapsed to this form
    on construction (see :func:`factorize`).
    """

    board: MixedBoard
    source: BoardConfig
    target: BoardConfig
    relation: FrozenSet[Pair]
    apex: BoardConfig
    neg_map: StructuralMap
    pos_map: StructuralMap

    def __len__(self) -> int:
        return len(self.relation)

    def pairs_with_target(self, b: MoveAddress) -> Tuple[MoveAddress, ...]:
        return tuple(sorted((a for a, t in self.relation if t == b),
                            key=lambda m: m.path))

    def pairs_with_source(self, a: MoveAddress) -> Tuple[MoveAddress, ...]:
        return tuple(sorted((t for s, t in self.relation if s == a),
                            key=lambda m: m.path))

    @staticmethod
    def identity(config: BoardConfig) -> "CartesianMorphism":
        ident = StructuralMap.identity(config)
        return CartesianMorphism(config.board, config, config,
                                 frozenset((a, a) for a in config.addresses),
                                 config, ident, ident)

    @staticmethod
    def from_relation(source: BoardConfig, target: BoardConfig,
                      relation: Iterable[Pair]) -> "CartesianMorphism":
        return factorize(source, target, relation)


def compose_cartesian(outer: CartesianMorphism,
                      inner: CartesianMorphism) -> CartesianMorphism:
    """Relational composition ``outer`` after ``inner``, re-factorized."""
    if inner.target.addresses != outer.source.addresses \
            or inner.board != outer.board:
        raise ValueError("morphisms do not compose")
    mid: Dict[MoveAddress, List[MoveAddress]] = {}
    for b, c in outer.relation:
        mid.setdefault(b, []).append(c)
    rel = {(a, c) for a, b in inner.relation for c in mid.get(b, ())}
    return factorize(inner.source, outer.target, rel)


def factorize(source: BoardConfig, target: BoardConfig,
              relation: Iterable[Pair],
              rng=None) -> CartesianMorphism:
    """Factor a relation through its apex: one negative map to the
    source followed (transposed) by one positive map to the target.

    The apex is grown by saturation: target-side negative extensions
    are lifted index-preservingly and looked up in the relation on the
    source side, source-side positive extensions dually.  Every step is
    forced, so the result does not depend on the order (``rng`` only
    shuffles the worklist to exercise that).  Raises ``ValueError``
    when the relation is not such a composite and the saturation cannot
    reproduce it.
    """
    board = source.board
    if target.board != board:
        raise ValueError("configurations live on different boards")
    rel = frozenset(relation)
    for a, b in rel:
        if a not in source.addresses or b not in target.addresses:
            raise ValueError("relation strays outside its configurations")

    src_kids: Dict[Optional[MoveAddress], List[MoveAddress]] = {}
    for a in source.addresses:
        src_kids.setdefault(a.parent, []).append(a)
    tgt_kids: Dict[Optional[MoveAddress], List[MoveAddress]] = {}
    for b in target.addresses:
        tgt_kids.setdefault(b.parent, []).append(b)

    neg: Dict[MoveAddress, MoveAddress] = {}
    pos: Dict[MoveAddress, MoveAddress] = {}
    apex: Set[MoveAddress] = set()

    def unique_partner(options: List[MoveAddress], what: str) -> MoveAddress:
        if len(options) != 1:
            raise ValueError(
                f"relation is not cartesian: {what} has "
                f"{len(options)} witnesses, expected one")
        return options[0]

    def add(addr: MoveAddress, to_src: MoveAddress,
            to_tgt: MoveAddress) -> None:
        if addr in apex:
            if neg[addr] != to_src or pos[addr] != to_tgt:
                raise ValueError(
                    "relation is not cartesian: apex address "
                    f"{addr!r} is claimed twice with different images")
            return
        apex.add(addr)
        neg[addr] = to_src
        pos[addr] = to_tgt
        work.append(addr)

    work: List[MoveAddress] = []
    for b in tgt_kids.get(None, ()):
        if board.polarity_of(b) != "-":
            continue
        opts = [a for a in src_kids.get(None, ()) if (a, b) in rel]
        a = unique_partner(opts, f"target root {b!r}")
        add(MoveAddress(((b.move, b.copy_index),)), a, b)
    for a in src_kids.get(None, ()):
        if board.polarity_of(a) != "+":
            continue
        opts = [b for b in tgt_kids.get(None, ()) if (a, b) in rel]
        b = unique_partner(opts, f"source root {a!r}")
        add(MoveAddress(((a.move, a.copy_index),)), a, b)

    while work:
        if rng is None:
            work.sort(key=lambda m: (len(m.path), m.path))
        else:
            rng.shuffle(work)
        y = work.pop(0)
        # negative children present on the target side
        for b in tgt_kids.get(pos[y], ()):
            if board.polarity_of(b) != "-":
                continue
            opts = [a for a in src_kids.get(neg[y], ()) if (a, b) in rel]
            a = unique_partner(opts, f"negative extension {b!r}")
            add(y.child(b.move, b.copy_index), a, b)
        # positive children present on the source side
        for a in src_kids.get(neg[y], ()):
            if board.polarity_of(a) != "+":
                continue
            opts = [b for b in tgt_kids.get(pos[y], ()) if (a, b) in rel]
            b = unique_partner(opts, f"positive extension {a!r}")
            add(y.child(a.move, a.copy_index), a, b)

    try:
        apex_cfg = board.configuration(apex)
    except ValueError as exc:
        raise ValueError(f"relation is not cartesian: {exc}") from exc

    neg_map = StructuralMap(board, apex_cfg, source, neg)
    pos_map = StructuralMap(board, apex_cfg, target, pos)
    if not neg_map.is_negative():
        raise ValueError("relation is not cartesian: the map to the "
                         "source is not negative")
    if not pos_map.is_positive():
        raise ValueError("relation is not cartesian: the map to the "
                         "target is not positive")
    produced = frozenset((neg[y], pos[y]) for y in apex)
    if produced != rel:
        raise ValueError("relation is not cartesian: saturation "
                         "reproduces a different relation")
    return CartesianMorphism(board, source, target, rel, apex_cfg,
                             neg_map, pos_map)


# ------------------------------------------------- the preorder, decided

def _strip_all(paths: FrozenSet[Path], pfx: str) -> FrozenSet[Path]:
    n = len(pfx)
    return frozenset(tuple((m[n:], i) for m, i in p) for p in paths
                     if p and p[0][0].startswith(pfx))


def _prefix_all(path: Path, pfx: str) -> Path:
    return tuple((pfx + m, i) for m, i in path)


def _rel_between(shape, src: FrozenSet[Path], dst: FrozenSet[Path],
                 flipped: bool = False
                 ) -> Optional[FrozenSet[Tuple[Path, Path]]]:
    """A relation witnessing that ``dst`` sits below ``src``, built by
    recursion on the board constructors; None when there is none.

    ``flipped`` tracks the surrounding polarity: un-flipped sub-boards
    open on Opponent questions, which the source may leave unreplicated,
    while flipped sub-boards open on Player questions, which may go
    unanswered only on the target side (weakening).
    """
    if not dst:
        # nothing demanded here: dangling source questions are dropped
        # replicas when Opponent speaks first, a totality failure when
        # the source itself opened the sub-board
        return None if flipped and src else frozenset()
    if isinstance(shape, _Atom):
        if flipped:
            return frozenset((p, p) for p in src) if src <= dst else None
        return frozenset((p, p) for p in dst) if dst <= src else None
    if isinstance(shape, _Dual):
        return _rel_between(shape.inner, src, dst, not flipped)
    if isinstance(shape, _Tensor):
        out: Set[Tuple[Path, Path]] = set()
        for pfx, comp in (("1.", shape.left), ("2.", shape.right)):
            r = _rel_between(comp, _strip_all(src, pfx),
                             _strip_all(dst, pfx), flipped)
            if r is None:
                return None
            out |= {(_prefix_all(a, pfx), _prefix_all(b, pfx))
                    for a, b in r}
        return frozenset(out)
    if isinstance(shape, _With):
        parts = []
        for k, comp in enumerate(shape.components, start=1):
            pfx = f"&{k}."
            parts.append((pfx, comp, _strip_all(src, pfx),
                          _strip_all(dst, pfx)))
        pfx, comp, s, d = next(p for p in parts if p[3])  # dst fits one
        if any(p[2] for p in parts if p[0] != pfx):
            return None  # sides inhabit different components
        r = _rel_between(comp, s, d, flipped)
        if r is None:
            return None
        return frozenset((_prefix_all(a, pfx), _prefix_all(b, pfx))
                         for a, b in r)
    if isinstance(shape, _Bang):
        def copies(paths: FrozenSet[Path]) -> Dict[int, FrozenSet[Path]]:
            by: Dict[int, Set[Path]] = {}
            for p in paths:
                by.setdefault(p[0][1], set()).add(
                    ((p[0][0], 0),) + p[1:])
            return {i: frozenset(v) for i, v in by.items()}

        def reindex(path: Path, i: int) -> Path:
            return ((path[0][0], i),) + path[1:]

        src_copies, dst_copies = copies(src), copies(dst)
        # each copy of the demanding side finds one on the other;
        # surplus on the answering side is dropped or weakened away
        if flipped:
            need, pool = src_copies, dst_copies
        else:
            need, pool = dst_copies, src_copies
        out = set()
        for i, one in sorted(need.items()):
            for j in sorted(pool):
                r = (_rel_between(shape.inner, one, pool[j], flipped)
                     if flipped else
                     _rel_between(shape.inner, pool[j], one, flipped))
                if r is not None:
                    out |= {((reindex(a, i), reindex(b, j))
                             if flipped else
                             (reindex(a, j), reindex(b, i)))
                            for a, b in r}
                    break
            else:
                return None
        return frozenset(out)
    if isinstance(shape, _Lolli):
        if not src:
            # the target opened the board: a dead source cannot answer
            # an Opponent root, but an unanswered Player root is fine
            return frozenset() if flipped else None
        root = next(p for p in dst if len(p) == 1)

        def split(paths: FrozenSet[Path]) -> Tuple[FrozenSet[Path],
                                                   FrozenSet[Path]]:
            outs = frozenset(p for p in paths
                             if all(m.startswith("out.") for m, _ in p))
            args = frozenset(p[1:] for p in paths
                             if len(p) > 1 and p[1][0].startswith("arg."))
            return (_strip_all(outs, "out."), _strip_all(args, "arg."))

        src_out, src_arg = split(src)
        dst_out, dst_arg = split(dst)
        r_out = _rel_between(shape.out, src_out, dst_out, flipped)
        if r_out is None:
            return None
        r_arg = _rel_between(shape.arg, src_arg, dst_arg, not flipped)
        if r_arg is None:
            return None
        out = {(_prefix_all(a, "out."), _prefix_all(b, "out."))
               for a, b in r_out}
        out |= {(root + _prefix_all(a, "arg."),
                 root + _prefix_all(b, "arg.")) for a, b in r_arg}
        return frozenset(out)
    raise TypeError(f"unknown shape {shape!r}")


def cartesian_between(source: BoardConfig, target: BoardConfig
                      ) -> Optional[CartesianMorphism]:
    """A cartesian morphism from ``source`` to ``target``, or None.

    Existence means the target is qualitatively below the source:
    the source answers every Opponent demand of the target, spending
    at most as many Player resources.
    """
    board = source.board
    if target.board != board:
        raise ValueError("configurations live on different boards")
    rel = _rel_between(board.shape,
                       frozenset(a.path for a in source.addresses),
                       frozenset(b.path for b in target.addresses))
    if rel is None:
        return None
    pairs = [(MoveAddress(a), MoveAddress(b)) for a, b in rel]
    return factorize(source, target, pairs)


def preorder_witness(x: BoardConfig, y: BoardConfig
                     ) -> Optional[CartesianMorphism]:
    """The morphism witnessing ``x`` below ``y`` (from y to x), if any."""
    return cartesian_between(y, x)


def config_preorder(x: BoardConfig, y: BoardConfig) -> bool:
    """Whether ``x`` is qualitatively below ``y``: some cartesian
    morphism runs from ``y`` to ``x``.  Reflexive, transitive, and
    invariant under reindexing either side by a symmetry."""
    return preorder_witness(x, y) is not None


# -------------------------------------------------------- pointer structures

@dataclass(frozen=True)
class PointerStructure:
    """An alternating justified sequence, reduced to its pointers.

    ``pointer[i-1]`` is where position ``i`` points; pointers decrease
    and swap parity, position 0 has none.  Even positions play the role
    of the environment, odd ones of the program.
    """

    length: int
    pointer: Tuple[int, ...]

    def __post_init__(self):
        ptr = tuple(self.pointer)
        object.__setattr__(self, "pointer", ptr)
        if self.length < 0 or len(ptr) != max(0, self.length - 1):
            raise ValueError("pointer function must cover 1..n-1")
        for i, j in enumerate(ptr, start=1):
            if not 0 <= j < i:
                raise ValueError(f"pointer at {i} is not contractive")
            if (i % 2 == 0) == (j % 2 == 0):
                raise ValueError(f"pointer at {i} is not alternating")

    def phi(self, i: int) -> int:
        if not 1 <= i < self.length:
            raise IndexError(f"no pointer at {i}")
        return self.pointer[i - 1]

    def _check(self, i: int) -> None:
        if not 0 <= i < self.length:
            raise IndexError(f"index {i} out of range")

    def pview(self, i: int) -> FrozenSet[int]:
        self._check(i)
        if i == 0:
            return frozenset({0})
        if i % 2 == 1:
            return frozenset({i}) | self.pview(i - 1)
        return frozenset({i}) | self.pview(self.phi(i))

    def oview(self, i: int) -> FrozenSet[int]:
        self._check(i)
        if i == 0:
            return frozenset({0})
        if i % 2 == 1:
            return frozenset({i}) | self.oview(self.phi(i))
        return frozenset({i}) | self.oview(i - 1)

    def visible(self) -> bool:
        """Each pointer stays inside the relevant view."""
        for i in range(1, self.length):
            view = self.pview(i) if i % 2 == 1 else self.oview(i)
            if self.phi(i) not in view:
                return False
        return True

    def depth_of(self, i: int) -> int:
        self._check(i)
        k = 0
        while i != 0:
            i = self.phi(i)
            k += 1
        return k

    def depth(self) -> int:
        return max((self.depth_of(i) for i in range(self.length)),
                   default=0)

    def p_size(self) -> int:
        m = max((len(self.pview(i)) for i in range(self.length)), default=0)
        return (m + 1) // 2

    def o_size(self) -> int:
        m = max((len(self.oview(i)) for i in range(self.length)), default=1)
        return max(0, (m - 1 + 1) // 2)


def pview(ps: PointerStructure, i: int) -> FrozenSet[int]:
    """The part of the sequence the program sees at position ``i``."""
    return ps.pview(i)


def oview(ps: PointerStructure, i: int) -> FrozenSet[int]:
    """The part of the sequence the environment sees at position ``i``."""
    return ps.oview(i)


# ------------------------------------------------------------------- bounds

_FUSE_CEILING = 10 ** 18


def _tower(levels: int, n: int, cap: int) -> int:
    for _ in range(levels):
        if n > 64:
            raise OverflowError("exceeds fuse ceiling")
        n = 2 ** n
        if n > cap:
            raise OverflowError("exceeds fuse ceiling")
    return n


def chain_length_bound(n: int, p: int, d: int) -> int:
    """Largest possible causal chain of a solution interaction, by the
    depth of the problem: 1, 2 and 2n for shallow problems, a tower of
    exponentials beyond."""
    if n < 1 or p < 1 or d < 0:
        raise ValueError("sizes must be >= 1 and depth >= 0")
    if d == 0:
        return 1
    if d == 1:
        return 2
    if d == 2:
        return 2 * n
    base = n + 1 if p == 1 else (p ** (n + 1) - 1) // (p - 1)
    if base > _FUSE_CEILING:
        raise OverflowError("exceeds fuse ceiling")
    return _tower(d - 3, base - 1, _FUSE_CEILING)


def interaction_bound(n: int, p: int, d: int, b: int) -> int:
    """Upper bound on the event count of a solution interaction.

    ``n`` and ``p`` bound the causal chains seen by each strategy,
    ``d`` the nesting depth of the problem, ``b >= 2`` its branching
    degree.  Depth 0 and 1 admit no branching, so the chain bound is
    the answer; deeper problems pay ``b`` per chain position.  Raises
    ``OverflowError`` ("exceeds fuse ceiling") when the value is too
    large to be a usable fuse.
    """
    if b < 2:
        raise ValueError("branching degree must be >= 2")
    length = chain_length_bound(n, p, d)
    if d <= 1:
        return length
    if length * b.bit_length() > 200:
        raise OverflowError("exceeds fuse ceiling")
    value = b ** length
    if value > _FUSE_CEILING:
        raise OverflowError("exceeds fuse ceiling")
    return value


# ------------------------------------------------------- matching problems

@dataclass(frozen=True)
class CartesianProblem:
    """Two strategy configurations linked by a cartesian morphism on
    the board they share."""

    sigma: Strategy
    x_sigma: FrozenSet
    chi: CartesianMorphism
    tau: Strategy
    x_tau: FrozenSet

    def __post_init__(self):
        object.__setattr__(self, "x_sigma", frozenset(self.x_sigma))
        object.__setattr__(self, "x_tau", frozenset(self.x_tau))
        if self.sigma.board.right != self.tau.board.left:
            raise ValueError("strategies do not share a board")
        _, s_b = self.sigma.display_config(self.x_sigma)
        t_b, _ = self.tau.display_config(self.x_tau)
        if self.chi.source.addresses != s_b.addresses:
            raise ValueError("morphism source is not the first "
                             "configuration's shared-board display")
        if self.chi.target.addresses != t_b.addresses:
            raise ValueError("morphism target is not the second "
                             "configuration's shared-board display")


@dataclass(frozen=True)
class CartesianSolution:
    """The expansions solving a problem, with their maps back onto it.

    ``chi_sigma`` and ``chi_tau`` send each event of the expanded
    configurations to the input event it duplicates; ``sync`` pairs the
    shared-board events of the two sides by displayed address.
    """

    problem: CartesianProblem
    y_sigma: FrozenSet
    chi_sigma: Mapping[object, object]
    y_tau: FrozenSet
    chi_tau: Mapping[object, object]
    sync: Tuple[Tuple[object, object], ...]
    measurements: Tuple[int, int, int, int]
    fuse: int

    @property
    def interaction_size(self) -> int:
        return len(self.y_sigma) + len(self.y_tau) - len(self.sync)


def _display_gcc(cfg: BoardConfig) -> int:
    return max((len(a.path) for a in cfg.addresses), default=0)


def _forest_gcc(strat: Strategy, events: FrozenSet) -> int:
    view = strat.view
    best = 0
    for e in events:
        k, cur = 0, e
        while cur is not None:
            k += 1
            cur = view.describe(cur)[1]
        best = max(best, k)
    return best


def _forest_branching(strat: Strategy, events: FrozenSet) -> int:
    view = strat.view
    kids: Dict[Optional[object], int] = {}
    for e in events:
        kids[view.describe(e)[1]] = kids.get(view.describe(e)[1], 0) + 1
    return max(kids.values(), default=0)


def measure_problem(problem: CartesianProblem) -> Tuple[int, int, int, int]:
    """The four fuse parameters of a problem, measured on displayed
    configurations for depth and on the strategy forests for chain
    sizes and branching.

    Every measure is strict ("chains shorter than"), so the returned
    parameters always leave one unit of slack; empty components are
    vacuous rather than length zero.
    """
    xs_a, xs_b = problem.sigma.display_config(problem.x_sigma)
    xt_b, xt_c = problem.tau.display_config(problem.x_tau)
    gcc_a, gcc_c = _display_gcc(xs_a), _display_gcc(xt_c)
    gcc_b = max(_display_gcc(xs_b), _display_gcc(xt_b))
    gcc_s = _forest_gcc(problem.sigma, problem.x_sigma)
    gcc_t = _forest_gcc(problem.tau, problem.x_tau)
    n = max(gcc_a, gcc_t) // 2 + 1
    p = max(gcc_s, gcc_c) // 2 + 1
    d = max(0, gcc_c - 1, gcc_b,
            gcc_a + 1 if gcc_a else 0)
    b = max(2, 1 + max(_forest_branching(problem.sigma, problem.x_sigma),
                       _forest_branching(problem.tau, problem.x_tau)))
    return n, p, d, b


class _Workspace:
    """Mutable saturation state of one solve."""

    def __init__(self, problem: CartesianProblem):
        self.problem = problem
        self.sv = problem.sigma.view
        self.tv = problem.tau.view
        self.y_sigma: Set = set()
        self.y_tau: Set = set()
        self.chi_sigma: Dict = {}
        self.chi_tau: Dict = {}
        self.sync: List[Tuple[object, object]] = []
        # x-side children and display lookups
        self.x_kids = {
            "s": self._kids(problem.sigma, problem.x_sigma),
            "t": self._kids(problem.tau, problem.x_tau),
        }
        self.x_at = {
            "s": {problem.sigma.display[e]: e for e in problem.x_sigma},
            "t": {problem.tau.display[e]: e for e in problem.x_tau},
        }
        self.rel = problem.chi.relation
        self.work: List[Tuple[str, object, object]] = []

    @staticmethod
    def _kids(strat: Strategy, events: FrozenSet) -> Dict:
        out: Dict[object, List] = {e: [] for e in events}
        for e in events:
            p = strat.forest.parent.get(e)
            if p is not None:
                out[p].append(e)
        return out

    # -- helpers -----------------------------------------------------------

    def _strat(self, side: str) -> Strategy:
        return self.problem.sigma if side == "s" else self.problem.tau

    def _view(self, side: str):
        return self.sv if side == "s" else self.tv

    def _y(self, side: str) -> Set:
        return self.y_sigma if side == "s" else self.y_tau

    def _chi(self, side: str) -> Dict:
        return self.chi_sigma if side == "s" else self.chi_tau

    def _admit(self, side: str, event, image) -> bool:
        """Record one event of an expansion; False if already known."""
        y = self._y(side)
        if event in y:
            if self._chi(side)[event] != image:
                raise RuntimeError("solver inconsistency: one event "
                                   "received two images")
            return False
        for other in y:
            if self._view(side).in_conflict(event, other):
                raise RuntimeError("solver inconsistency: expansion "
                                   "would conflict with itself")
        y.add(event)
        self._chi(side)[event] = image
        for k in self.x_kids[side].get(image, ()):
            self.work.append((side, event, k))
        return True

    def _event_at(self, side: str, tagged, parent) -> object:
        """The unique view event at an address under a given parent."""
        cands = [e for e in self._view(side).events_at(tagged)
                 if self._view(side).describe(e)[1] == parent]
        if len(cands) != 1:
            raise RuntimeError(
                f"solver stuck: {len(cands)} events at {tagged!r}; "
                "the strategy window may be too narrow")
        return cands[0]

    def _response_matching(self, side: str, s, image_child) -> object:
        """The response of ``s`` replaying a positive move of the
        image, identified by side and arena move."""
        want = self._strat(side).display[image_child]
        cands = [u for u in self._view(side).responses(s)
                 if self._view(side).describe(u)[0][0] == want[0]
                 and self._view(side).describe(u)[0][1].move == want[1].move]
        if len(cands) != 1:
            raise RuntimeError(
                f"solver stuck: {len(cands)} replies matching "
                f"{want!r}; the strategy window may be too narrow")
        return cands[0]

    # -- the four extension rules ------------------------------------------

    def seed(self) -> None:
        """Adopt the opening of the second configuration: its board
        roots on the outer side, at their own copy indices."""
        for e in self.problem.x_tau:
            tagged = self.problem.tau.display[e]
            if tagged[0] != "R" or tagged[1].parent is not None:
                continue
            u = self._event_at("t", tagged, None)
            self._admit("t", u, e)

    def _chi_lookup(self, here_side: str, parent_image_addr,
                    other_addr, minimal: bool):
        """The unique relation partner forced by a middle extension."""
        if here_side == "s":
            opts = [a for a, b in self.rel if b == other_addr
                    and (a.parent is None if minimal
                         else a.parent == parent_image_addr)]
        else:
            opts = [b for a, b in self.rel if a == other_addr
                    and (b.parent is None if minimal
                         else b.parent == parent_image_addr)]
        if len(opts) != 1:
            raise RuntimeError(
                "solver stuck: the middle relation offers "
                f"{len(opts)} partners for {other_addr!r}")
        return opts[0]

    def _cross_receive(self, from_side: str, u, image_child) -> None:
        """A shared-board move just played on one side is received on
        the other, with its image forced through the relation."""
        here = "t" if from_side == "s" else "s"
        (_, addr), _ = self._view(from_side).describe(u)
        want_tag = "L" if here == "t" else "R"
        other_image_addr = self._strat(from_side).display[image_child][1]
        if addr.parent is None:
            parent = None
            e_addr = self._chi_lookup(here, None, other_image_addr, True)
        else:
            try:
                parent = next(
                    e for e in self._y(here)
                    if self._view(here).describe(e)[0]
                    == (want_tag, addr.parent))
            except StopIteration:
                raise RuntimeError(
                    f"solver stuck: nothing on the receiving side "
                    f"displays {addr.parent!r}") from None
            c_addr = self._strat(here).display[
                self._chi(here)[parent]][1]
            e_addr = self._chi_lookup(here, c_addr, other_image_addr, False)
        v = self._event_at(here, (want_tag, addr), parent)
        k = self.x_at[here][("L" if here == "t" else "R", e_addr)]
        self._admit(here, v, k)
        self.sync.append((v, u) if from_side == "t" else (u, v))

    def step(self, side: str, s, k) -> None:
        """Process one obligation: event ``s`` must account for the
        child ``k`` of its image."""
        strat = self._strat(side)
        pol = strat.forest.polarity[k]
        tagged = strat.display[k]
        outer = "L" if side == "s" else "R"
        if pol == "+":
            u = self._response_matching(side, s, k)
            self._admit(side, u, k)
            (tag, _), _ = self._view(side).describe(u)
            if tag != outer:
                self._cross_receive(side, u, k)
        elif tagged[0] == outer:
            # receptive duplication on the private side, index preserved
            if tagged[1].parent is None:
                fresh = tagged[1]
            else:
                (_, s_addr), _ = self._view(side).describe(s)
                fresh = s_addr.child(tagged[1].move, tagged[1].copy_index)
            u = self._event_at(side, (outer, fresh), s)
            self._admit(side, u, k)
        # negative shared-board children arrive from the other side

    def run(self, fuse: int, rng=None) -> None:
        self.seed()
        steps = 0
        while self.work:
            if rng is None:
                self.work.sort(key=self._priority)
                side, s, k = self.work.pop(0)
            else:
                side, s, k = self.work.pop(
                    rng.randrange(len(self.work)))
            self.step(side, s, k)
            steps += 1
            if len(self.y_sigma) + len(self.y_tau) - len(self.sync) > fuse:
                raise RuntimeError(
                    "fuse exceeded: the solution outgrew its bound, "
                    "which indicates a bug or a mismeasured problem")

    def _priority(self, item):
        side, s, k = item
        depth = self._strat(side).forest.depth(k)
        neg_first = 0 if self._strat(side).forest.polarity[k] == "-" else 1
        return (depth, neg_first, side, repr(k), repr(s))


def solve_cartesian_problem(sigma: Strategy, x_sigma: Iterable,
                            chi: CartesianMorphism,
                            tau: Strategy, x_tau: Iterable,
                            rng=None,
                            fuse: Optional[int] = None
                            ) -> CartesianSolution:
    """Grow the unique pair of expanded configurations matching along
    ``chi``.

    Saturation is seeded by the outer opening of the second strategy
    and extended only by forced moves: replayed Player responses,
    receptions of shared-board moves (their input images looked up
    through the relation), and index-preserving duplications on the
    private sides.  The result therefore does not depend on the
    processing order; ``rng`` shuffles it to let tests confirm that.
    The fuse defaults to :func:`interaction_bound` on the measured
    problem and trips with ``RuntimeError``.
    """
    problem = CartesianProblem(sigma, frozenset(x_sigma), chi,
                               tau, frozenset(x_tau))
    measured = measure_problem(problem)
    if fuse is None:
        try:
            fuse = interaction_bound(*measured)
        except OverflowError:
            fuse = _FUSE_CEILING
    ws = _Workspace(problem)
    ws.run(fuse, rng)
    return CartesianSolution(
        problem,
        frozenset(ws.y_sigma), dict(ws.chi_sigma),
        frozenset(ws.y_tau), dict(ws.chi_tau),
        tuple(sorted(ws.sync, key=repr)),
        measured, fuse)


# ----------------------------------------------------- solution validation

def _side_assignment(strat: Strategy, view, y: FrozenSet,
                     chi: Mapping, x: FrozenSet,
                     board: MixedBoard, want_tag: str
                     ) -> Tuple[BoardConfig, BoardConfig,
                                Dict[MoveAddress, MoveAddress]]:
    src, amap = [], {}
    for e in y:
        (tag, addr), _ = view.describe(e)
        if tag != want_tag:
            continue
        img = strat.display[chi[e]][1]
        src.append(addr)
        amap[addr] = img
    dst = [strat.display[e][1] for e in x
           if strat.display[e][0] == want_tag]
    return (board.configuration(src), board.configuration(dst), amap)


def _strategy_map_ok(strat: Strategy, view, y: FrozenSet,
                     chi: Mapping, x: FrozenSet) -> bool:
    """The expansion map is a total structural map on the strategy."""
    if set(chi) != set(y) or not set(chi.values()) <= set(x):
        return False
    x_kids: Dict[object, List] = {}
    for e in x:
        p = strat.forest.parent.get(e)
        if p is not None:
            x_kids.setdefault(p, []).append(e)
    for e in y:
        (tag, addr), parent = view.describe(e)
        img = chi[e]
        img_parent = strat.forest.parent.get(img)
        if parent is None:
            if img_parent is not None:
                return False
        else:
            if parent not in y or chi[parent] != img_parent:
                return False
        itag, iaddr = strat.display[img]
        if itag != tag or iaddr.move != addr.move:
            return False
        # totality: every positive child of the image is replayed
        for t in x_kids.get(img, ()):
            if strat.forest.polarity[t] != "+":
                continue
            lifts = [u for u in y
                     if view.describe(u)[1] == e and chi[u] == t]
            if len(lifts) != 1:
                return False
    return True


def validate_solution(sol: CartesianSolution) -> Dict[str, bool]:
    """Check the defining conditions of a solution, by name.

    ``matching`` is the shared-board agreement of the two expansions;
    the two ``expansion`` entries are the strategy-level structural
    maps; the display entries are the polarized outer conditions; and
    ``middle-span`` confines the shared displays to the relation.
    """
    pb = sol.problem
    sv, tv = pb.sigma.view, pb.tau.view
    out: Dict[str, bool] = {}

    s_shared = {sv.describe(e)[0][1] for e in sol.y_sigma
                if sv.describe(e)[0][0] == "R"}
    t_shared = {tv.describe(e)[0][1] for e in sol.y_tau
                if tv.describe(e)[0][0] == "L"}
    out["matching"] = s_shared == t_shared

    out["sigma-expansion"] = _strategy_map_ok(
        pb.sigma, sv, sol.y_sigma, sol.chi_sigma, pb.x_sigma)
    out["tau-expansion"] = _strategy_map_ok(
        pb.tau, tv, sol.y_tau, sol.chi_tau, pb.x_tau)

    try:
        src, dst, amap = _side_assignment(
            pb.sigma, sv, sol.y_sigma, sol.chi_sigma, pb.x_sigma,
            pb.sigma.board.left, "L")
        sm = StructuralMap(pb.sigma.board.left, src, dst, amap)
        out["left-display-negative"] = sm.is_negative()
    except ValueError:
        out["left-display-negative"] = False
    try:
        src, dst, amap = _side_assignment(
            pb.tau, tv, sol.y_tau, sol.chi_tau, pb.x_tau,
            pb.tau.board.right, "R")
        sm = StructuralMap(pb.tau.board.right, src, dst, amap)
        out["right-display-positive"] = sm.is_positive()
    except ValueError:
        out["right-display-positive"] = False

    ok = True
    for se, te in sol.sync:
        a = pb.sigma.display[sol.chi_sigma[se]][1]
        b = pb.tau.display[sol.chi_tau[te]][1]
        if (a, b) not in pb.chi.relation:
            ok = False
    out["middle-span"] = ok and len(sol.sync) == len(
        {sv.describe(e)[0][1] for e in sol.y_sigma
         if sv.describe(e)[0][0] == "R"})
    return out


# --------------------------------------------- interaction trees and views

def interaction_tree(sol: CartesianSolution):
    """The glued causal forest of a solution.

    Returns ``(nodes, parent, info)``: node keys, the forest parent of
    each node, and per-node ``(component, sigma_event, tau_event)``
    where the component is "A", "B" or "C" and absent halves are None.
    """
    pb = sol.problem
    sv, tv = pb.sigma.view, pb.tau.view
    to_sigma = {t: s for s, t in sol.sync}
    to_tau = {s: t for s, t in sol.sync}

    def node_of(side: str, e):
        if side == "t" and e in to_sigma:
            return ("s", to_sigma[e])
        return (side, e)

    nodes: List = []
    info: Dict = {}
    for e in sorted(sol.y_sigma, key=repr):
        key = ("s", e)
        nodes.append(key)
        comp = "B" if sv.describe(e)[0][0] == "R" else "A"
        info[key] = (comp, e, to_tau.get(e))
    for e in sorted(sol.y_tau, key=repr):
        if e in to_sigma:
            continue
        key = ("t", e)
        nodes.append(key)
        comp = "C" if tv.describe(e)[0][0] == "R" else "B"
        info[key] = (comp, None, e)

    def half_parents(key) -> List:
        _, se, te = info[key]
        out = []
        if se is not None:
            p = sv.describe(se)[1]
            if p is not None:
                out.append(node_of("s", p))
        if te is not None:
            p = tv.describe(te)[1]
            if p is not None:
                out.append(node_of("t", p))
        return [k for k in out if k != key]

    ancestors: Dict = {}

    def anc(key) -> Set:
        if key not in ancestors:
            got: Set = set()
            for p in half_parents(key):
                got.add(p)
                got |= anc(p)
            ancestors[key] = got
        return ancestors[key]

    parent: Dict = {}
    for key in nodes:
        cands = half_parents(key)
        if not cands:
            parent[key] = None
        elif len(set(cands)) == 1:
            parent[key] = cands[0]
        else:
            a, b = cands[0], cands[1]
            parent[key] = a if b in anc(a) else b
    return nodes, parent, info


def _chains(nodes, parent) -> List[Tuple]:
    kids: Dict = {n: [] for n in nodes}
    for n in nodes:
        if parent[n] is not None:
            kids[parent[n]].append(n)
    out: List[Tuple] = []

    def walk(n, acc):
        acc = acc + [n]
        if not kids[n]:
            out.append(tuple(acc))
        for c in sorted(kids[n], key=repr):
            walk(c, acc)

    for n in sorted(nodes, key=repr):
        if parent[n] is None:
            walk(n, [])
    return out


def extract_pointer_structures(sol: CartesianSolution
                               ) -> List[Tuple[Tuple, PointerStructure]]:
    """One pointer structure per maximal causal chain of the solution
    interaction.

    A position points to the one displaying its board predecessor; an
    opening of the private left board points to the chain position of
    its strategy-minimal ancestor; shared-board openings point to the
    start.
    """
    pb = sol.problem
    sv = pb.sigma.view
    nodes, parent, info = interaction_tree(sol)
    out = []
    for chain in _chains(nodes, parent):
        index = {key: i for i, key in enumerate(chain)}
        pointers: List[int] = []
        for i, key in enumerate(chain):
            if i == 0:
                continue
            comp, se, te = info[key]
            addr = (sv.describe(se)[0][1] if se is not None
                    else pb.tau.view.describe(te)[0][1])
            if addr.parent is not None:
                j = next(jj for jj, k2 in enumerate(chain[:i])
                         if _node_addr(pb, info[k2]) == addr.parent
                         and info[k2][0] == _board_of(comp))
                pointers.append(j)
            elif comp == "A":
                cur = se
                while sv.describe(cur)[1] is not None:
                    cur = sv.describe(cur)[1]
                pointers.append(index[("s", cur)])
            else:
                pointers.append(0)
        out.append((chain, PointerStructure(len(chain), tuple(pointers))))
    return out


def _board_of(comp: str) -> str:
    return comp


def _node_addr(pb: CartesianProblem, rec) -> MoveAddress:
    comp, se, te = rec
    if se is not None:
        return pb.sigma.view.describe(se)[0][1]
    return pb.tau.view.describe(te)[0][1]


# ------------------------------------------------------------------ export

def _dot_forest(lines: List[str], prefix: str, events, describe,
                label_extra=None) -> Dict[object, str]:
    ids = {}
    for i, e in enumerate(sorted(events, key=repr)):
        ids[e] = f"{prefix}{i}"
        (tag, addr), parent = describe(e)
        extra = f" {label_extra(e)}" if label_extra else ""
        lines.append(f'  {ids[e]} [label="{tag}:{addr!r}{extra}"];')
    for e in events:
        _, parent = describe(e)
        if parent is not None and parent in ids:
            lines.append(f"  {ids[parent]} -> {ids[e]};")
    return ids


def problem_to_dot(problem: CartesianProblem,
                   solution: Optional[CartesianSolution] = None,
                   name: str = "problem") -> str:
    """Graphviz rendering: the problem on top, and when provided, the
    expanded solution below it."""
    pb = problem
    lines = [f"digraph {name} {{", "  rankdir=TB;"]
    lines.append("  subgraph cluster_problem {")
    lines.append('    label="problem";')
    s_ids = _dot_forest(lines, "ps", pb.x_sigma,
                        lambda e: (pb.sigma.display[e],
                                   pb.sigma.forest.parent.get(e)))
    t_ids = _dot_forest(lines, "pt", pb.x_tau,
                        lambda e: (pb.tau.display[e],
                                   pb.tau.forest.parent.get(e)))
    by_addr_s = {pb.sigma.display[e][1]: e for e in pb.x_sigma
                 if pb.sigma.display[e][0] == "R"}
    by_addr_t = {pb.tau.display[e][1]: e for e in pb.x_tau
                 if pb.tau.display[e][0] == "L"}
    for a, b in sorted(pb.chi.relation, key=repr):
        if a in by_addr_s and b in by_addr_t:
            lines.append(f"  {s_ids[by_addr_s[a]]} -> "
                         f"{t_ids[by_addr_t[b]]} "
                         "[style=dashed, dir=none, constraint=false];")
    lines.append("  }")
    if solution is not None:
        lines.append("  subgraph cluster_solution {")
        lines.append('    label="solution";')
        sv, tv = pb.sigma.view, pb.tau.view
        ys_ids = _dot_forest(lines, "ss", solution.y_sigma,
                             lambda e: sv.describe(e))
        yt_ids = _dot_forest(lines, "st", solution.y_tau,
                             lambda e: tv.describe(e))
        for se, te in solution.sync:
            lines.append(f"  {ys_ids[se]} -> {yt_ids[te]} "
                         "[style=dotted, dir=none, constraint=false];")
        lines.append("  }")
    lines.append("}")
    return "\n".join(lines)
