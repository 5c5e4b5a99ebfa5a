import itertools
from collections import Counter

import pytest

from gamesem.boards import (
    BoardConfig, Budget, MoveAddress, arena_to_dot, atom, bang, board_to_json,
    context_board, dual, enumerate_configurations, factor_symmetry, hom,
    interpret_type, lollipop, par_payoff, payoff_of, symmetry_sides,
    tensor, tensor_payoff, top, with_,
)
from gamesem.event_core import Symmetry, symmetry_between
from gamesem.lambda_frontend import Arrow, O, parse_type

OO = Arrow(O, O)
CHURCH_TY = Arrow(OO, OO)


def addr(*pairs):
    return MoveAddress(tuple(pairs))


def configs_of(board, budget):
    return list(enumerate_configurations(board, budget))


# ------------------------------------------------------------------ oracles

def oracle_all_symmetries(x: BoardConfig, y: BoardConfig):
    """Every label- and polarity-preserving order-iso between two board
    configurations, by brute force over bijections."""
    xs = sorted(x.addresses, key=lambda a: a.path)
    ys = sorted(y.addresses, key=lambda a: a.path)
    if len(xs) != len(ys):
        return
    bx, by = x.board, y.board
    for perm in itertools.permutations(ys):
        bij = dict(zip(xs, perm))
        ok = True
        for a, b in bij.items():
            if a.move != b.move or bx.polarity_of(a) != by.polarity_of(b):
                ok = False
                break
            pa, pb = a.parent, b.parent
            if (pa is None) != (pb is None):
                ok = False
                break
            if pa is not None and bij[pa] != pb:
                ok = False
                break
        if ok:
            yield Symmetry(tuple(sorted(bij.items(),
                                        key=lambda p: (p[0].path, p[1].path))))


# ------------------------------------------------------------ payoff tables

def test_payoff_table_values():
    assert tensor_payoff(-1, 0) == -1
    assert par_payoff(+1, -1) == +1
    # full tables
    T = {(-1, -1): -1, (-1, 0): -1, (-1, 1): -1,
         (0, -1): -1, (0, 0): 0, (0, 1): 1,
         (1, -1): -1, (1, 0): 1, (1, 1): 1}
    P = {(-1, -1): -1, (-1, 0): -1, (-1, 1): 1,
         (0, -1): -1, (0, 0): 0, (0, 1): 1,
         (1, -1): 1, (1, 0): 1, (1, 1): 1}
    for (a, b), v in T.items():
        assert tensor_payoff(a, b) == v
    for (a, b), v in P.items():
        assert par_payoff(a, b) == v
        # de Morgan duality
        assert par_payoff(a, b) == -tensor_payoff(-a, -b)


# ------------------------------------------------------------- interpret_type

def test_interpret_base():
    b = interpret_type(O)
    assert b.arena.moves == ("qu",)
    assert b.arena.polarity["qu"] == "-"
    assert b.arena.ind["qu"] == "singleton"
    assert b.is_strict and b.is_well_opened
    assert payoff_of(b, b.empty_configuration()) == +1
    assert payoff_of(b, b.configuration([addr(("qu", 0))])) == 0


def test_interpret_arrow_arena():
    b = interpret_type(OO)
    a = b.arena
    assert len(a.moves) == 2
    (root,) = a.roots
    assert a.polarity[root] == "-"
    assert a.ind[root] == "singleton"
    (child,) = a.children(root)
    assert a.polarity[child] == "+"
    assert a.ind[child] == "nat"


def test_interpret_church_type_arena_shape():
    # root with two children, one grandchild under the argument-side child
    b = interpret_type(CHURCH_TY)
    a = b.arena
    assert len(a.moves) == 4
    (root,) = a.roots
    kids = a.children(root)
    assert len(kids) == 2
    assert {a.polarity[k] for k in kids} == {"+"}
    grandkids = [g for k in kids for g in a.children(k)]
    assert len(grandkids) == 1
    assert a.polarity[grandkids[0]] == "-"
    assert a.ind[root] == "singleton"
    assert all(a.ind[m] == "nat" for m in a.moves if m != root)


def test_interpret_deterministic():
    assert interpret_type(CHURCH_TY) == interpret_type(parse_type("(o->o)->o->o"))
    assert interpret_type(OO) == lollipop(bang(atom()), atom())


# ----------------------------------------------------------------- payoff_of

def test_bang_empty_payoff():
    assert payoff_of(bang(atom()), bang(atom()).empty_configuration()) == 0


def test_arrow_output_only_is_complete():
    # opening the output and never touching the argument is a complete play:
    # the argument side is an exponential whose empty family has payoff 0
    b = interpret_type(OO)
    (root,) = b.arena.roots
    x = b.configuration([addr((root, 0))])
    assert payoff_of(b, x) == 0
    assert payoff_of(b, b.empty_configuration()) == +1


def test_arrow_stopping_configurations_at_budget():
    b = interpret_type(OO)
    (root,) = b.arena.roots
    (child,) = b.arena.children(root)
    got = {c.addresses for c in configs_of(b, Budget(depth=2, width=1))}
    assert got == {
        frozenset(),
        frozenset({addr((root, 0))}),
        frozenset({addr((root, 0)), addr((root, 0)).child(child, 0)}),
    }
    stopping = {c.addresses for c in configs_of(b, Budget(depth=2, width=1))
                if payoff_of(b, c) == 0}
    assert stopping == {
        frozenset({addr((root, 0))}),
        frozenset({addr((root, 0)), addr((root, 0)).child(child, 0)}),
    }


def test_dual_negates_payoff():
    b = interpret_type(OO)
    d = dual(b)
    for c in configs_of(b, Budget(depth=2, width=2)):
        dc = d.configuration(c.addresses)
        assert payoff_of(d, dc) == -payoff_of(b, c)
    assert dual(d) == b


# ---------------------------------------------------------------------- with

def test_with_configurations_split():
    b = with_([atom(), atom()])
    cs = configs_of(b, Budget(depth=1, width=1))
    assert len(cs) == 3  # empty, left question, right question
    for c in cs:
        if c.addresses:
            comps = {a.move.split(".")[0] for a in c.addresses}
            assert len(comps) == 1
    assert payoff_of(b, b.empty_configuration()) == +1


def test_with_conflict_under_bang_is_per_copy():
    b = bang(with_([atom(), atom()]))
    cs = configs_of(b, Budget(depth=1, width=2))
    # within one copy index, only one component
    for c in cs:
        per_copy = {}
        for a in c.addresses:
            per_copy.setdefault(a.copy_index, set()).add(a.move.split(".")[0])
        for comps in per_copy.values():
            assert len(comps) == 1
    # but different copies may pick different components
    mixed = frozenset({addr(("&1.qu", 0)), addr(("&2.qu", 1))})
    assert any(c.addresses == mixed for c in cs)
    same_index_mixed = {addr(("&1.qu", 0)), addr(("&2.qu", 0))}
    with pytest.raises(ValueError):
        b.configuration(same_index_mixed)


def test_empty_context_boards():
    t = top()
    assert t.arena.moves == ()
    assert t.is_strict
    assert payoff_of(t, t.empty_configuration()) == +1
    bt = bang(t)
    assert payoff_of(bt, bt.empty_configuration()) == 0
    assert context_board([]) == t


# ---------------------------------------------------------------------- bang

def test_bang_configurations_are_indexed_families():
    b = bang(atom())
    cs = configs_of(b, Budget(depth=1, width=3))
    got = {c.addresses for c in cs}
    subsets = itertools.chain.from_iterable(
        itertools.combinations(range(3), k) for k in range(4))
    expected = {frozenset(addr(("qu", i)) for i in s) for s in subsets}
    assert got == expected
    # every family of complete configurations is complete; empty family too
    for c in cs:
        assert payoff_of(b, c) == 0


def test_stopping_tensor_bijection():
    a, b = interpret_type(OO), atom()
    tb = tensor(a, b)
    budget = Budget(depth=2, width=1)
    stop_a = [c for c in configs_of(a, budget) if payoff_of(a, c) == 0]
    stop_b = [c for c in configs_of(b, budget) if payoff_of(b, c) == 0]
    stop_t = [c for c in configs_of(tb, budget) if payoff_of(tb, c) == 0]
    assert len(stop_t) == len(stop_a) * len(stop_b)
    # and the decomposition by side is exactly the product
    def sides(c):
        left = frozenset(x for x in c.addresses if x.move.startswith("1."))
        right = frozenset(x for x in c.addresses if x.move.startswith("2."))
        return left, right
    assert len({sides(c) for c in stop_t}) == len(stop_t)


def test_stopping_bang_multiset_bijection():
    # complete configurations of !S up to symmetry correspond to finite
    # multisets of nonempty complete configurations of S up to symmetry
    s = interpret_type(OO)
    bs = bang(s)
    budget = Budget(depth=2, width=2)
    stop_s = [c for c in configs_of(s, budget)
              if payoff_of(s, c) == 0 and c.addresses]
    s_positions = {c.position() for c in stop_s}
    multisets = set()
    reps = sorted(s_positions, key=str)
    for k in range(3):
        for combo in itertools.combinations_with_replacement(reps, k):
            multisets.add(tuple(sorted(map(str, Counter(map(str, combo)).items()))))
    stop_bs = [c for c in configs_of(bs, budget) if payoff_of(bs, c) == 0]
    bs_positions = {}
    for c in stop_bs:
        per_copy = {}
        for a in c.addresses:
            per_copy.setdefault(a.path[0][1], set()).add(a)
        if any(len(v) > 2 for v in per_copy.values()):
            continue  # would exceed the per-copy budget used for S
        bs_positions[c.position()] = [
            BoardConfig(bs, frozenset(v)).position() for v in per_copy.values()]
    got = {tuple(sorted(map(str, Counter(map(str, v)).items())))
           for v in bs_positions.values()}
    # copies of size <= 2 with at most 2 copies, matching the multisets above
    assert got <= multisets
    assert len(bs_positions) == len(got)


# ---------------------------------------------------------------- budget

def test_budget_monotone():
    b = interpret_type(CHURCH_TY)
    small = {c.addresses for c in configs_of(b, Budget(depth=2, width=1))}
    large = {c.addresses for c in configs_of(b, Budget(depth=3, width=2))}
    assert small <= large


def test_budget_max_events():
    b = bang(atom())
    cs = configs_of(b, Budget(depth=1, width=5, max_events=2))
    assert max(len(c) for c in cs) == 2


# ------------------------------------------------------------- symmetries

def _budget_configs(board, budget):
    return [c for c in enumerate_configurations(board, budget)]


def test_symmetric_configurations_have_equal_payoff():
    board = interpret_type(OO)
    cs = _budget_configs(board, Budget(depth=2, width=2))
    for x in cs:
        for y in cs:
            if x.position() == y.position():
                assert payoff_of(board, x) == payoff_of(board, y)


def test_positive_and_negative_symmetries_meet_in_identities():
    board = interpret_type(CHURCH_TY)
    cs = _budget_configs(board, Budget(depth=3, width=2, max_events=4))
    for x in cs:
        for y in cs:
            for sym in oracle_all_symmetries(x, y):
                sides = symmetry_sides(board, sym)
                if sides >= {"+", "-"}:
                    assert all(a == b for a, b in sym.pairs)


def test_symmetry_factors_negative_then_positive_uniquely():
    board = interpret_type(OO)
    budget = Budget(depth=2, width=2)
    cs = _budget_configs(board, budget)
    all_cfg = {c.addresses: c for c in cs}
    for x in cs:
        for y in cs:
            for sym in oracle_all_symmetries(x, y):
                neg, mid, pos = factor_symmetry(board, sym)
                assert symmetry_sides(board, neg) >= {"-"}
                assert symmetry_sides(board, pos) >= {"+"}
                # composition recovers sym
                comp = {a: pos.mapping[m] for a, m in neg.mapping.items()}
                assert comp == sym.mapping
                # uniqueness: no other middle works
                count = 0
                for z in all_cfg.values():
                    for t1 in oracle_all_symmetries(x, z):
                        if "-" not in symmetry_sides(board, t1):
                            continue
                        for t2 in oracle_all_symmetries(z, y):
                            if "+" not in symmetry_sides(board, t2):
                                continue
                            if {a: t2.mapping[m]
                                    for a, m in t1.mapping.items()} == sym.mapping:
                                count += 1
                assert count == 1


def test_symmetry_between_on_board_configs():
    b = bang(atom())
    x = b.configuration([addr(("qu", 0)), addr(("qu", 1))])
    y = b.configuration([addr(("qu", 2)), addr(("qu", 5))])
    w = symmetry_between(x.to_forest(), y.to_forest())
    assert w is not None
    assert x.position() == y.position()


# ------------------------------------------------------------------ hom

def test_hom_polarity_flips_left():
    h = hom(interpret_type(O), interpret_type(O))
    assert h.polarity_of(("L", addr(("qu", 0)))) == "+"
    assert h.polarity_of(("R", addr(("qu", 0)))) == "-"
    assert h.payoff([], []) == par_payoff(-1, +1)  # == +1


# ------------------------------------------------------------- interfaces

def test_board_json_and_dot():
    b = interpret_type(OO)
    js = board_to_json(b)
    assert js["strict"] is True
    assert set(js["arena"]["moves"]) == set(b.arena.moves)
    dot = arena_to_dot(b)
    assert "style=dotted" in dot and "digraph" in dot
