import random

import pytest
from hypothesis import given, settings, strategies as st

from gamesem.boards import (
    Budget, MoveAddress, atom, bang, dual, enumerate_configurations,
    interpret_type, with_,
)
from gamesem.cartesian import (
    CartesianMorphism, CartesianProblem, PointerStructure, StructuralMap,
    cartesian_between, chain_length_bound, classify_structural,
    compose_cartesian, config_preorder, extract_pointer_structures,
    factorize, interaction_bound, interaction_tree, measure_problem, oview,
    preorder_witness, problem_to_dot, pview, solve_cartesian_problem,
    structural_map_to_json, validate_solution,
)
from gamesem.lambda_frontend import O, church, parse, parse_type
from gamesem.strategies import (
    copycat, interpret_term, promote, unwrap_singleton_context,
)

B = Budget(depth=4, width=2)
OO = parse_type("o->o")
CHURCH_TY = parse_type("(o->o)->o->o")
CH_BOARD = interpret_type(CHURCH_TY)
OO_BOARD = interpret_type(OO)

ROOT = ("out.out.qu", 0)
AO = "arg.out.qu"
OA = "out.arg.qu"
AA = "arg.arg.qu"


def A(*pairs):
    return MoveAddress(tuple(pairs))


def cfg(board, *paths):
    return board.configuration([A(*p) for p in paths])


# A pair of configurations of the doubled-function board with a map that
# contracts both calls, moves copy indices on both polarities, and
# leaves one target call unanswered: structurally fine, in no polarity
# class.
def contracting_map():
    src = cfg(CH_BOARD,
              (ROOT,),
              (ROOT, (AO, 0)), (ROOT, (AO, 0), (AA, 12)),
              (ROOT, (AO, 4)), (ROOT, (AO, 4), (AA, 4)),
              (ROOT, (AO, 4), (AA, 2)),
              (ROOT, (OA, 2)), (ROOT, (OA, 6)))
    tgt = cfg(CH_BOARD,
              (ROOT,),
              (ROOT, (AO, 5)), (ROOT, (AO, 5), (AA, 2)),
              (ROOT, (OA, 2)), (ROOT, (OA, 6)), (ROOT, (OA, 7)))
    amap = {}
    for a in src.addresses:
        path = []
        for move, idx in a.path:
            if move == AO:
                path.append((move, 5))
            elif move == AA:
                path.append((move, 2))
            else:
                path.append((move, idx))
        amap[a] = A(*path)
    return src, tgt, amap


# ------------------------------------------------------- structural maps

def test_identity_map_is_in_every_polarity_class():
    x = cfg(CH_BOARD, (ROOT,), (ROOT, (AO, 3)), (ROOT, (AO, 3), (AA, 1)))
    sm = StructuralMap.identity(x)
    assert sm.classes() == frozenset({
        "positive", "negative", "partial-positive", "partial-negative"})
    assert classify_structural(sm) == "positive"


def test_contracting_index_moving_map_is_structural_but_classless():
    src, tgt, amap = contracting_map()
    sm = StructuralMap(CH_BOARD, src, tgt, amap)  # core conditions hold
    assert sm.classes() == frozenset()
    assert classify_structural(sm) == "none"
    # the negative side still lifts: contraction only merges calls
    assert sm.lifts_negative_extensions()
    assert not sm.preserves_indices("-")
    assert not sm.preserves_indices("+")
    # one target call has no pre-image, so positive lifting fails
    assert not sm.lifts_positive_extensions()


def test_root_reindexing_on_replicated_atom_is_negative():
    board = bang(atom())
    src = cfg(board, (("qu", 0),), (("qu", 3),))
    tgt = cfg(board, (("qu", 1),), (("qu", 5),))
    amap = {A(("qu", 0)): A(("qu", 1)), A(("qu", 3)): A(("qu", 5))}
    assert classify_structural(board, src, tgt, amap) == "negative"


def test_core_violation_classifies_as_none_and_constructor_rejects():
    board = OO_BOARD
    src = cfg(board, (("out.qu", 0),), (("out.qu", 0), ("arg.qu", 0)))
    tgt = cfg(board, (("out.qu", 0),), (("out.qu", 0), ("arg.qu", 0)))
    flat = {A(("out.qu", 0)): A(("out.qu", 0)),
            A(("out.qu", 0), ("arg.qu", 0)): A(("out.qu", 0))}
    assert classify_structural(board, src, tgt, flat) == "none"
    with pytest.raises(ValueError, match="structural"):
        StructuralMap(board, src, tgt, flat)


def test_partial_assignment_is_rejected():
    board = bang(atom())
    src = cfg(board, (("qu", 0),), (("qu", 1),))
    tgt = src
    with pytest.raises(ValueError, match="function"):
        classify_structural(board, src, tgt, {A(("qu", 0)): A(("qu", 0))})


def test_structural_map_json_lists_pairs():
    x = cfg(bang(atom()), (("qu", 0),), (("qu", 2),))
    got = structural_map_to_json(StructuralMap.identity(x))
    assert got["events"] == 2
    assert "positive" in got["classes"]
    assert [[["qu", 0]], [["qu", 0]]] in got["pairs"]
    assert len(got["pairs"]) == 2


# ------------------------------------------------------------ factorize

def test_identity_relation_factors_through_itself():
    x = cfg(CH_BOARD, (ROOT,), (ROOT, (AO, 1)), (ROOT, (AO, 1), (AA, 0)))
    m = factorize(x, x, [(a, a) for a in x.addresses])
    assert m.apex.addresses == x.addresses
    assert m.neg_map.assignment == {a: a for a in x.addresses}
    assert m.pos_map.assignment == {a: a for a in x.addresses}
    assert CartesianMorphism.identity(x).relation == m.relation


def fig_contraction_relation():
    """A call-contracting, argument-splitting relation with one
    weakened target call, and its recorded factorization."""
    x = cfg(CH_BOARD,
            (ROOT,),
            (ROOT, (AO, 0)), (ROOT, (AO, 0), (AA, 12)),
            (ROOT, (AO, 4)), (ROOT, (AO, 4), (AA, 4)),
            (ROOT, (AO, 4), (AA, 2)),
            (ROOT, (OA, 2)))
    z = cfg(CH_BOARD,
            (ROOT,),
            (ROOT, (AO, 0)), (ROOT, (AO, 0), (AA, 12)),
            (ROOT, (AO, 0), (AA, 2)),
            (ROOT, (OA, 2)), (ROOT, (OA, 6)))
    rel = {
        (A(ROOT), A(ROOT)),
        (A(ROOT, (AO, 0)), A(ROOT, (AO, 0))),
        (A(ROOT, (AO, 4)), A(ROOT, (AO, 0))),
        (A(ROOT, (AO, 0), (AA, 12)), A(ROOT, (AO, 0), (AA, 12))),
        (A(ROOT, (AO, 0), (AA, 12)), A(ROOT, (AO, 0), (AA, 2))),
        (A(ROOT, (AO, 4), (AA, 4)), A(ROOT, (AO, 0), (AA, 12))),
        (A(ROOT, (AO, 4), (AA, 2)), A(ROOT, (AO, 0), (AA, 2))),
        (A(ROOT, (OA, 2)), A(ROOT, (OA, 2))),
    }
    apex = cfg(CH_BOARD,
               (ROOT,),
               (ROOT, (AO, 0)), (ROOT, (AO, 0), (AA, 12)),
               (ROOT, (AO, 0), (AA, 2)),
               (ROOT, (AO, 4)), (ROOT, (AO, 4), (AA, 12)),
               (ROOT, (AO, 4), (AA, 2)),
               (ROOT, (OA, 2)))
    neg = {
        A(ROOT): A(ROOT),
        A(ROOT, (AO, 0)): A(ROOT, (AO, 0)),
        A(ROOT, (AO, 0), (AA, 12)): A(ROOT, (AO, 0), (AA, 12)),
        A(ROOT, (AO, 0), (AA, 2)): A(ROOT, (AO, 0), (AA, 12)),
        A(ROOT, (AO, 4)): A(ROOT, (AO, 4)),
        A(ROOT, (AO, 4), (AA, 12)): A(ROOT, (AO, 4), (AA, 4)),
        A(ROOT, (AO, 4), (AA, 2)): A(ROOT, (AO, 4), (AA, 2)),
        A(ROOT, (OA, 2)): A(ROOT, (OA, 2)),
    }
    pos = {
        A(ROOT): A(ROOT),
        A(ROOT, (AO, 0)): A(ROOT, (AO, 0)),
        A(ROOT, (AO, 0), (AA, 12)): A(ROOT, (AO, 0), (AA, 12)),
        A(ROOT, (AO, 0), (AA, 2)): A(ROOT, (AO, 0), (AA, 2)),
        A(ROOT, (AO, 4)): A(ROOT, (AO, 0)),
        A(ROOT, (AO, 4), (AA, 12)): A(ROOT, (AO, 0), (AA, 12)),
        A(ROOT, (AO, 4), (AA, 2)): A(ROOT, (AO, 0), (AA, 2)),
        A(ROOT, (OA, 2)): A(ROOT, (OA, 2)),
    }
    return x, z, rel, apex, neg, pos


def test_contraction_weakening_relation_factors_to_recorded_apex():
    x, z, rel, apex, neg, pos = fig_contraction_relation()
    m = factorize(x, z, rel)
    assert m.apex.addresses == apex.addresses
    assert m.neg_map.assignment == neg
    assert m.pos_map.assignment == pos
    assert m.neg_map.is_negative() and m.pos_map.is_positive()


def test_factorization_does_not_depend_on_saturation_order():
    x, z, rel, apex, _, _ = fig_contraction_relation()
    for seed in range(8):
        m = factorize(x, z, rel, rng=random.Random(seed))
        assert m.apex.addresses == apex.addresses
        assert m.relation == frozenset(rel)


def test_double_root_sharing_is_not_cartesian():
    board = bang(atom())
    x = cfg(board, (("qu", 0),), (("qu", 1),))
    z = cfg(board, (("qu", 0),))
    rel = {(A(("qu", 0)), A(("qu", 0))), (A(("qu", 1)), A(("qu", 0)))}
    with pytest.raises(ValueError, match="not cartesian"):
        factorize(x, z, rel)
    # dropping one pair leaves an honest weakening
    m = factorize(x, z, [(A(("qu", 0)), A(("qu", 0)))])
    assert len(m.apex) == 1


def test_relation_with_unpaired_target_root_is_rejected():
    board = bang(atom())
    x = cfg(board, (("qu", 0),))
    z = cfg(board, (("qu", 0),), (("qu", 1),))
    with pytest.raises(ValueError, match="not cartesian"):
        factorize(x, z, [(A(("qu", 0)), A(("qu", 0)))])


# --- random polarized chains, checked against relational composition ----

def _children_index(config):
    kids = {}
    for a in config.addresses:
        kids.setdefault(a.parent, []).append(a)
    return kids


def random_positive_map(rng, x):
    """A positive map out of ``x``: contracts same-move sibling calls,
    re-indexes them, and may weaken in extra unanswered calls."""
    board = x.board
    kids = _children_index(x)
    amap = {}
    tgt = set()

    def walk(a, img):
        amap[a] = img
        tgt.add(img)
        here = kids.get(a, [])
        neg = [c for c in here if board.polarity_of(c) == "-"]
        pos = [c for c in here if board.polarity_of(c) == "+"]
        for c in neg:
            walk(c, img.child(c.move, c.copy_index))
        by_move = {}
        for c in pos:
            by_move.setdefault(c.move, []).append(c)
        for move, group in by_move.items():
            if board.arena.ind[move] == "singleton":
                cut, indices = 1, [0]
            else:
                rng.shuffle(group)
                cut = rng.randint(1, len(group))
                indices = rng.sample(range(20), cut)
            buckets = [group[i::cut] for i in range(cut)]
            for bucket, idx in zip(buckets, indices):
                img_child = img.child(move, idx)
                for c in bucket:
                    walk(c, img_child)

    roots = kids.get(None, [])
    for r in roots:
        walk(r, A((r.move, r.copy_index)))
    # weaken: duplicate one positive target address at a fresh index
    extras = [b for b in tgt if b.parent is not None
              and board.polarity_of(b) == "+"
              and board.arena.ind[b.move] == "nat"]
    if extras and rng.random() < 0.5:
        b = rng.choice(sorted(extras, key=lambda m: m.path))
        tgt.add(b.parent.child(b.move, 77))
    return StructuralMap(board, x, board.configuration(tgt), amap)


def random_negative_map_to(rng, t):
    """A negative map into ``t``: its source replicates or drops the
    demands of ``t``, copying the answers under each replica."""
    board = t.board
    kids = _children_index(t)
    amap = {}
    src = set()
    used = {}

    def clone_positive(c, img_parent_src):
        a = img_parent_src.child(c.move, c.copy_index)
        src.add(a)
        amap[a] = c
        for g in kids.get(c, []):
            replicate_negative(g, a)

    def replicate_negative(b, parent_src):
        n_copies = rng.choice((0, 1, 1, 1, 2))
        taken = used.setdefault((parent_src, b.move), set())
        if board.arena.ind[b.move] == "singleton":
            free = [i for i in (0,) if i not in taken]
        else:
            free = [i for i in range(20) if i not in taken]
        indices = rng.sample(free, min(n_copies, len(free)))
        taken.update(indices)
        for idx in indices:
            a = (A((b.move, idx)) if parent_src is None
                 else parent_src.child(b.move, idx))
            src.add(a)
            amap[a] = b
            for c in kids.get(b, []):
                clone_positive(c, a)

    for r in kids.get(None, []):
        replicate_negative(r, None)
    return StructuralMap(board, board.configuration(src), t, amap)


def random_relation_chain(rng, x0):
    """Compose up to four random polarized maps, positives forward and
    negatives backward, into one relation out of ``x0``."""
    rel = {(a, a) for a in x0.addresses}
    cur = x0
    for _ in range(rng.randint(1, 4)):
        if rng.random() < 0.5:
            f = random_positive_map(rng, cur)
            rel = {(a, f(c)) for a, c in rel}
            cur = f.target
        else:
            g = random_negative_map_to(rng, cur)
            rel = {(a, s) for s in g.source.addresses
                   for a, c in rel if g(s) == c}
            cur = g.source
    return frozenset(rel), cur


def _chain_pool():
    boards = [bang(atom()), OO_BOARD, bang(OO_BOARD)]
    pool = []
    for b in boards:
        for x in enumerate_configurations(b, Budget(depth=3, width=2)):
            if 0 < len(x) <= 8:
                pool.append(x)
    return pool


def test_random_polarized_chains_factor_back_to_their_relation():
    pool = _chain_pool()
    rng = random.Random(20260825)
    done = 0
    while done < 60:
        x0 = rng.choice(pool)
        rel, cur = random_relation_chain(rng, x0)
        m = factorize(x0, cur, rel)
        assert m.relation == rel
        again = factorize(x0, cur, rel, rng=random.Random(done))
        assert again.apex.addresses == m.apex.addresses
        assert again.neg_map.assignment == m.neg_map.assignment
        assert again.pos_map.assignment == m.pos_map.assignment
        done += 1


def test_composition_of_morphisms_matches_relation_composition():
    rng = random.Random(7)
    x = cfg(bang(OO_BOARD),
            (("out.qu", 0),), (("out.qu", 0), ("arg.qu", 0)),
            (("out.qu", 1),))
    rel1, mid = random_relation_chain(rng, x)
    m1 = factorize(x, mid, rel1)
    rel2, end = random_relation_chain(rng, mid)
    m2 = factorize(mid, end, rel2)
    both = compose_cartesian(m2, m1)
    expect = {(a, c) for a, b in rel1 for b2, c in rel2 if b == b2}
    assert both.relation == frozenset(expect)


# ------------------------------------------- lifting along a morphism

def _lifting_holds(m):
    rel = m.relation
    board = m.board
    tgt_kids = _children_index(m.target)
    src_kids = _children_index(m.source)
    for b in tgt_kids.get(None, []):
        if board.polarity_of(b) == "-":
            hits = [a for a in src_kids.get(None, [])
                    if (a, b) in rel]
            if len(hits) != 1:
                return False
    for (a, b) in rel:
        for b2 in tgt_kids.get(b, []):
            if board.polarity_of(b2) == "-":
                hits = [a2 for a2 in src_kids.get(a, []) if (a2, b2) in rel]
                if len(hits) != 1:
                    return False
        for a2 in src_kids.get(a, []):
            if board.polarity_of(a2) == "+":
                hits = [b2 for b2 in tgt_kids.get(b, []) if (a2, b2) in rel]
                if len(hits) != 1:
                    return False
    return True


def test_every_morphism_lifts_extensions_uniquely():
    for board in (bang(atom()), OO_BOARD):
        configs = [x for x in enumerate_configurations(
            board, Budget(depth=2, width=2)) if len(x) <= 5]
        for xa in configs:
            for xb in configs:
                m = cartesian_between(xa, xb)
                if m is not None:
                    assert _lifting_holds(m), (xa, xb)


# ------------------------------------------------------------- preorder

def test_preorder_is_reflexive_and_bottomed():
    for board in (bang(atom()), OO_BOARD, bang(OO_BOARD)):
        empty = board.empty_configuration()
        for x in enumerate_configurations(board, Budget(depth=2, width=2)):
            assert config_preorder(x, x)
            assert config_preorder(empty, x)


def test_asking_more_sits_below_asking_less():
    full = cfg(OO_BOARD, (("out.qu", 0),), (("out.qu", 0), ("arg.qu", 0)))
    lazy = cfg(OO_BOARD, (("out.qu", 0),))
    assert config_preorder(full, lazy)
    assert not config_preorder(lazy, full)
    w = preorder_witness(full, lazy)
    assert w is not None and w.source.addresses == lazy.addresses


def test_replicated_preorder_needs_a_partner_per_copy():
    board = bang(OO_BOARD)
    full0 = cfg(board, (("out.qu", 0),), (("out.qu", 0), ("arg.qu", 0)))
    lazy0 = cfg(board, (("out.qu", 0),))
    two = cfg(board, (("out.qu", 0),), (("out.qu", 0), ("arg.qu", 0)),
              (("out.qu", 1),))
    assert config_preorder(full0, lazy0)
    assert not config_preorder(lazy0, full0)
    assert config_preorder(two, lazy0)  # both copies find the lazy one
    assert config_preorder(full0, two)  # the lazy copy serves
    assert not config_preorder(lazy0, board.empty_configuration())


def test_dualizing_flips_the_preorder():
    board = dual(OO_BOARD)
    full = cfg(board, (("out.qu", 0),), (("out.qu", 0), ("arg.qu", 0)))
    lazy = cfg(board, (("out.qu", 0),))
    assert config_preorder(lazy, full)
    assert not config_preorder(full, lazy)


def test_preorder_is_transitive_on_enumerated_configurations():
    board = bang(OO_BOARD)
    configs = [x for x in enumerate_configurations(
        board, Budget(depth=2, width=2)) if len(x) <= 4]
    below = {}
    for x in configs:
        for y in configs:
            below[(id(x), id(y))] = config_preorder(x, y)
    for x in configs:
        for y in configs:
            if not below[(id(x), id(y))]:
                continue
            for z in configs:
                if below[(id(y), id(z))]:
                    assert below[(id(x), id(z))]


@given(st.permutations(range(3)), st.permutations(range(3)))
@settings(max_examples=25, deadline=None)
def test_preorder_ignores_copy_reindexing(p1, p2):
    board = bang(OO_BOARD)

    def build(perm, copies):
        paths = []
        for i, deep in copies:
            paths.append((("out.qu", perm[i]),))
            if deep:
                paths.append((("out.qu", perm[i]), ("arg.qu", 0)))
        return cfg(board, *paths)

    x = build(p1, [(0, True), (1, False)])
    y = build(p2, [(0, False)])
    assert config_preorder(x, y) == config_preorder(
        build(range(3), [(0, True), (1, False)]),
        build(range(3), [(0, False)]))
    assert config_preorder(x, x)


# ----------------------------------------------------- pointer structures

def test_base_views_are_singletons():
    ps = PointerStructure(3, (0, 1))
    assert pview(ps, 0) == frozenset({0})
    assert oview(ps, 0) == frozenset({0})


def test_fully_sequential_pointers_see_everything():
    n = 7
    ps = PointerStructure(n, tuple(i - 1 for i in range(1, n)))
    for i in range(n):
        assert pview(ps, i) == frozenset(range(i + 1))
        assert oview(ps, i) == frozenset(range(i + 1))
    assert ps.visible()
    assert ps.depth() == n - 1


def test_skipping_pointer_escapes_the_environment_view():
    ps = PointerStructure(5, (0, 1, 0, 1))
    assert pview(ps, 4) == frozenset({0, 1, 4})
    assert oview(ps, 4) == frozenset({0, 3, 4})
    assert not ps.visible()


def test_pointer_sizes_count_view_rounds():
    ps = PointerStructure(5, (0, 1, 2, 3))
    assert ps.p_size() == 3  # widest program view has five positions
    assert ps.o_size() == 2
    assert PointerStructure(0, ()).p_size() == 0


def test_malformed_pointers_are_rejected():
    with pytest.raises(ValueError, match="contractive"):
        PointerStructure(3, (0, 2))
    with pytest.raises(ValueError, match="alternating"):
        PointerStructure(3, (0, 0))
    with pytest.raises(IndexError):
        PointerStructure(3, (0, 1)).pview(3)


# --------------------------------------------------------------- bounds

def test_shallow_interaction_bounds_are_exact():
    for n, p, b in ((1, 1, 2), (3, 2, 5)):
        assert chain_length_bound(n, p, 0) == 1
        assert interaction_bound(n, p, 0, b) == 1
        assert chain_length_bound(n, p, 1) == 2
        assert interaction_bound(n, p, 1, b) == 2
    assert chain_length_bound(2, 9, 2) == 4
    assert chain_length_bound(5, 1, 2) == 10


def test_first_tower_level_matches_the_geometric_sum():
    # (2^3 - 1)/(2 - 1) - 1 = 6 chain positions, paid in branching
    assert chain_length_bound(2, 2, 3) == 6
    for b in (2, 3, 5):
        assert interaction_bound(2, 2, 3, b) == b ** 6
    # a single-size environment degenerates to n
    assert chain_length_bound(3, 1, 3) == 3


def test_oversized_bounds_blow_the_fuse():
    with pytest.raises(OverflowError, match="exceeds fuse ceiling"):
        interaction_bound(2, 2, 4, 2)
    with pytest.raises(OverflowError, match="exceeds fuse ceiling"):
        chain_length_bound(30, 30, 5)
    with pytest.raises(ValueError):
        interaction_bound(0, 1, 0, 2)
    with pytest.raises(ValueError):
        interaction_bound(1, 1, 0, 1)


# --------------------------------------------------------------- solver

def typical_configuration(strat):
    """The window configuration asking every demand once, at copy
    index 0, with every answer the strategy then gives."""
    x = set()
    frontier = [e for e in strat.forest.roots
                if strat.display[e][1].copy_index == 0]
    while frontier:
        e = frontier.pop()
        if e in x:
            continue
        x.add(e)
        for c in strat.forest.children(e):
            if strat.forest.polarity[c] == "+":
                frontier.append(c)
            elif strat.display[c][1].copy_index == 0:
                frontier.append(c)
    return frozenset(x)


@pytest.fixture(scope="module")
def copycat_problem():
    cc = copycat(OO_BOARD, B)
    x = typical_configuration(cc)
    x_b = cc.display_config(x)[1]
    chi = CartesianMorphism.identity(x_b)
    return cc, x, chi


def test_identity_problem_solves_to_itself(copycat_problem):
    cc, x, chi = copycat_problem
    sol = solve_cartesian_problem(cc, x, chi, cc, x)
    assert sol.y_sigma == x
    assert sol.y_tau == x
    assert sol.chi_sigma == {e: e for e in x}
    assert len(sol.sync) == 2
    assert sol.interaction_size == 6
    assert all(validate_solution(sol).values())


def test_identity_problem_measurements(copycat_problem):
    cc, x, chi = copycat_problem
    pb = CartesianProblem(cc, x, chi, cc, x)
    assert measure_problem(pb) == (3, 3, 3, 2)


def test_identity_problem_interaction_is_one_chain(copycat_problem):
    cc, x, chi = copycat_problem
    sol = solve_cartesian_problem(cc, x, chi, cc, x)
    nodes, parent, info = interaction_tree(sol)
    assert len(nodes) == sol.interaction_size
    chains = extract_pointer_structures(sol)
    assert len(chains) == 1
    chain, ps = chains[0]
    assert ps.length == 6
    assert ps.pointer == (0, 1, 2, 1, 0)
    assert ps.visible()


def church_tau(m):
    body = "x"
    for _ in range(m):
        body = f"g ({body})"
    term = parse(f"\\x:o->o. {body}", context=["g"])
    return unwrap_singleton_context(
        interpret_term([("g", CHURCH_TY)], term, B))


def all_atom_pairs(src_cfg, tgt_cfg):
    return [(a, b) for a in src_cfg.addresses for b in tgt_cfg.addresses
            if a.move == b.move]


@pytest.fixture(scope="module")
def church_squared():
    sigma = promote(interpret_term([], church(2), B))
    tau = church_tau(2)
    x_sigma = typical_configuration(sigma)
    x_tau = typical_configuration(tau)
    chi = factorize(sigma.display_config(x_sigma)[1],
                    tau.display_config(x_tau)[0],
                    all_atom_pairs(sigma.display_config(x_sigma)[1],
                                   tau.display_config(x_tau)[0]))
    return sigma, x_sigma, chi, tau, x_tau


def test_church_iteration_duplicates_all_calls(church_squared):
    sigma, x_sigma, chi, tau, x_tau = church_squared
    sol = solve_cartesian_problem(sigma, x_sigma, chi, tau, x_tau)
    f_calls = [e for e in sol.y_tau
               if tau.view.describe(e)[0][0] == "R"
               and tau.view.describe(e)[0][1].move == AO]
    assert len(f_calls) == 4  # two iterations of two calls
    assert all(validate_solution(sol).values())
    assert sol.interaction_size <= sol.fuse


def test_church_solution_ignores_worklist_order(church_squared):
    sigma, x_sigma, chi, tau, x_tau = church_squared
    base = solve_cartesian_problem(sigma, x_sigma, chi, tau, x_tau)
    for seed in range(3):
        got = solve_cartesian_problem(sigma, x_sigma, chi, tau, x_tau,
                                      rng=random.Random(seed))
        assert got.y_sigma == base.y_sigma
        assert got.y_tau == base.y_tau
        assert got.chi_sigma == base.chi_sigma
        assert got.chi_tau == base.chi_tau
        assert frozenset(got.sync) == frozenset(base.sync)


def test_church_views_fit_the_measured_sides(church_squared):
    sigma, x_sigma, chi, tau, x_tau = church_squared
    sol = solve_cartesian_problem(sigma, x_sigma, chi, tau, x_tau)
    n, p, _, _ = measure_problem(sol.problem)
    structures = extract_pointer_structures(sol)
    assert structures
    for chain, ps in structures:
        assert ps.length == len(chain)
        assert ps.visible()
        # each view replays one side's causal chain, so its round count
        # stays within the measured chain sizes
        assert ps.p_size() <= max(n, p)
        assert ps.o_size() <= max(n, p)


def test_empty_demand_has_the_empty_solution(church_squared):
    sigma, x_sigma, chi, tau, x_tau = church_squared
    empty_chi = factorize(
        sigma.display_config(x_sigma)[1],
        tau.board.left.empty_configuration(), [])
    sol = solve_cartesian_problem(sigma, x_sigma, empty_chi,
                                  tau, frozenset())
    assert sol.y_sigma == frozenset() and sol.y_tau == frozenset()
    assert sol.interaction_size == 0


def test_problem_rejects_mismatched_morphism(copycat_problem):
    cc, x, chi = copycat_problem
    wrong = CartesianMorphism.identity(
        cc.board.right.empty_configuration())
    with pytest.raises(ValueError, match="display"):
        CartesianProblem(cc, x, wrong, cc, x)


def test_problem_dot_shows_both_layers(copycat_problem):
    cc, x, chi = copycat_problem
    pb = CartesianProblem(cc, x, chi, cc, x)
    sol = solve_cartesian_problem(cc, x, chi, cc, x)
    dot = problem_to_dot(pb, sol)
    assert "cluster_problem" in dot and "cluster_solution" in dot
    assert dot.count("style=dotted") == len(sol.sync)
