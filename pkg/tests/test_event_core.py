import itertools

from hypothesis import given, settings, strategies as st

from gamesem.event_core import (
    Configuration, EventForest, canonical_position, enabled_extensions,
    forest_to_dot, symmetry_between,
)


# ------------------------------------------------------------------ oracles
# Independent reference implementations: a fixpoint vendetta closure for
# conflict, subset filtering for configurations, and a permutation search
# for symmetries.  The library must agree with these on small inputs.

def oracle_conflict_closure(f):
    pairs = {tuple(sorted(p, key=str)) for p in f.conflict_generators}
    changed = True
    while changed:
        changed = False
        for (a, b) in list(pairs):
            for child, par in f.parent.items():
                if par == a and tuple(sorted((child, b), key=str)) not in pairs:
                    pairs.add(tuple(sorted((child, b), key=str)))
                    changed = True
                if par == b and tuple(sorted((a, child), key=str)) not in pairs:
                    pairs.add(tuple(sorted((a, child), key=str)))
                    changed = True
    return pairs


def oracle_is_configuration(f, subset):
    s = set(subset)
    for e in s:
        if e in f.parent and f.parent[e] not in s:
            return False
    closure = oracle_conflict_closure(f)
    for a, b in itertools.combinations(sorted(s, key=str), 2):
        if tuple(sorted((a, b), key=str)) in closure:
            return False
    return True


def oracle_enabled(f, x):
    out = set()
    for e in f.events - x.events:
        if oracle_is_configuration(f, x.events | {e}):
            out.add(e)
    return out


def oracle_find_symmetry(x, y):
    """Brute-force search for a label- and polarity-preserving order-iso."""
    xs, ys = sorted(x.events, key=str), sorted(y.events, key=str)
    if len(xs) != len(ys):
        return None
    fx, fy = x.forest, y.forest
    for perm in itertools.permutations(ys):
        bij = dict(zip(xs, perm))
        ok = True
        for a in xs:
            b = bij[a]
            if fx.polarity[a] != fy.polarity[b]:
                ok = False
                break
            if fx.label.get(a) != fy.label.get(b):
                ok = False
                break
            pa = fx.parent.get(a)
            pb = fy.parent.get(b)
            if (pa is None) != (pb is None):
                ok = False
                break
            if pa is not None and bij[pa] != pb:
                ok = False
                break
        if ok:
            return bij
    return None


# ----------------------------------------------------------- fixed forests

def single_root():
    return EventForest(["r"], {}, {"r": "-"})


def two_questions():
    # two independent initial questions, as on a tensor of two atoms
    return EventForest([0, 1], {}, {0: "-", 1: "-"},
                       label={0: "qu", 1: "qu"}, index={0: 0, 1: 0})


def fig_config(root_idx, q2, q3, q1_under):
    """One concrete configuration on the board of (o -> o) -> o -> o.

    q2, q3: copy indices for the two kinds of positive questions;
    q1_under: map from a q2 index to the list of indices of its answers'
    follow-up questions.
    """
    events, parent, pol, label, index = [], {}, {}, {}, {}
    events.append("root")
    pol["root"], label["root"], index["root"] = "-", "qu4", root_idx
    for i in q2:
        e = f"q2.{i}"
        events.append(e)
        parent[e] = "root"
        pol[e], label[e], index[e] = "+", "qu2", i
        for j in q1_under.get(i, ()):
            e1 = f"q1.{i}.{j}"
            events.append(e1)
            parent[e1] = e
            pol[e1], label[e1], index[e1] = "-", "qu1", j
    for i in q3:
        e = f"q3.{i}"
        events.append(e)
        parent[e] = "root"
        pol[e], label[e], index[e] = "+", "qu3", i
    f = EventForest(events, parent, pol, label=label, index=index)
    return f.configuration(events)


# Three index-renamings of the same position: the second changes only
# negative indices, the third only positive ones.
CONFIG_A = fig_config(0, [0, 4], [2, 6], {0: [12], 4: [4, 2]})
CONFIG_B = fig_config(1, [0, 4], [2, 6], {0: [13], 4: [2, 4]})
CONFIG_C = fig_config(1, [1, 5], [6, 2], {1: [13], 5: [2, 4]})


# ------------------------------------------------------------------- tests

def test_enabled_single_root():
    f = single_root()
    assert enabled_extensions(f, f.empty_configuration()) == {"r"}
    assert enabled_extensions(f, f.configuration(["r"])) == frozenset()


def test_enabled_two_questions_matches_oracle():
    f = two_questions()
    empty = f.empty_configuration()
    assert enabled_extensions(f, empty) == {0, 1}
    assert enabled_extensions(f, empty) == oracle_enabled(f, empty)


def test_conflict_vendetta_propagation():
    #   a - b   with a # c: then b # c as well
    f = EventForest(["a", "b", "c"], {"b": "a"},
                    {"a": "-", "b": "+", "c": "-"},
                    conflicts=[("a", "c")])
    assert f.in_conflict("b", "c")
    assert not f.is_configuration({"a", "b", "c"})
    assert f.conflict_pairs_closed() == {frozenset(("a", "c")),
                                         frozenset(("b", "c"))}
    assert oracle_conflict_closure(f) == {("a", "c"), ("b", "c")}


def test_conflict_generators_must_be_incomparable():
    import pytest
    with pytest.raises(ValueError):
        EventForest(["a", "b"], {"b": "a"}, {"a": "-", "b": "+"},
                    conflicts=[("a", "b")])


def test_down_closure_is_configuration():
    f = CONFIG_A.forest
    for e in f.events:
        assert f.is_configuration(f.down_closure(e))


def test_symmetry_identity():
    w = symmetry_between(CONFIG_A, CONFIG_A)
    assert w is not None
    assert all(a == b for a, b in w.pairs)


def test_symmetry_between_index_renamings():
    for x, y in [(CONFIG_A, CONFIG_B), (CONFIG_B, CONFIG_C),
                 (CONFIG_A, CONFIG_C)]:
        w = symmetry_between(x, y)
        assert w is not None
        m = w.mapping
        fx, fy = x.forest, y.forest
        for a, b in m.items():
            assert fx.label[a] == fy.label[b]
            assert fx.polarity[a] == fy.polarity[b]
        assert oracle_find_symmetry(x, y) is not None


def test_symmetry_different_cardinality():
    smaller = fig_config(0, [0], [2], {0: [12]})
    assert symmetry_between(CONFIG_A, smaller) is None


def test_canonical_position_of_renamings_agree():
    pa = canonical_position(CONFIG_A)
    assert pa == canonical_position(CONFIG_B)
    assert pa == canonical_position(CONFIG_C)
    assert len(pa) == len(CONFIG_A)


def test_canonical_position_empty():
    f = single_root()
    assert len(canonical_position(f.empty_configuration())) == 0


def test_canonical_position_detects_difference():
    # shape genuinely differs: both qu2 copies carry one answer question
    other = fig_config(0, [0, 4], [2, 6], {0: [12], 4: [4]})
    assert canonical_position(other) != canonical_position(CONFIG_A)
    # whereas moving the doubleton to the other copy index is still symmetric
    moved = fig_config(0, [0, 4], [2, 6], {0: [12, 7], 4: [4]})
    assert canonical_position(moved) == canonical_position(CONFIG_A)


def test_swapped_subtrees_same_position():
    # same shape, the two qu2-subtrees swapped with fresh indices
    swapped = fig_config(3, [5, 9], [0, 1], {9: [0], 5: [1, 6]})
    assert canonical_position(swapped) == canonical_position(CONFIG_A)
    assert oracle_find_symmetry(swapped, CONFIG_A) is not None


def test_dot_output_mentions_labels():
    dot = forest_to_dot(CONFIG_A.forest)
    assert "digraph" in dot
    assert '"qu4,0,-"' in dot
    assert "->" in dot


# ----------------------------------------------------------- random forests

@st.composite
def forests(draw, max_events=6):
    n = draw(st.integers(min_value=0, max_value=max_events))
    parent, pol, label, index = {}, {}, {}, {}
    for e in range(n):
        if e > 0 and draw(st.booleans()):
            parent[e] = draw(st.integers(min_value=0, max_value=e - 1))
        pol[e] = draw(st.sampled_from("-+"))
        label[e] = draw(st.sampled_from(["a", "b", "c"]))
        index[e] = draw(st.integers(min_value=0, max_value=3))
    f0 = EventForest(range(n), parent, pol, label=label, index=index)
    # generating conflicts between incomparable pairs only
    incomparable = [(a, b) for a in range(n) for b in range(a + 1, n)
                    if not (f0.leq(a, b) or f0.leq(b, a))]
    conflicts = draw(st.lists(st.sampled_from(incomparable),
                              max_size=2) if incomparable else st.just([]))
    return EventForest(range(n), parent, pol, conflicts=conflicts,
                       label=label, index=index)


@st.composite
def forest_with_config(draw):
    f = draw(forests())
    configs = [c.events for c in f.all_configurations(max_events=4)]
    events = draw(st.sampled_from(configs))
    return f, f.configuration(events)


@given(forest_with_config())
@settings(max_examples=80, deadline=None)
def test_enabled_matches_oracle(fc):
    f, x = fc
    assert enabled_extensions(f, x) == oracle_enabled(f, x)


@given(forest_with_config())
@settings(max_examples=80, deadline=None)
def test_enabled_extension_never_conflicts(fc):
    f, x = fc
    for e in enabled_extensions(f, x):
        assert not any(f.in_conflict(e, y) for y in x.events)
        assert f.is_configuration(x.events | {e})


@given(forest_with_config(), forest_with_config())
@settings(max_examples=60, deadline=None)
def test_canonical_position_iff_symmetry(fc1, fc2):
    _, x = fc1
    _, y = fc2
    same = canonical_position(x) == canonical_position(y)
    found = symmetry_between(x, y)
    brute = oracle_find_symmetry(x, y)
    assert same == (found is not None)
    assert (found is not None) == (brute is not None)


@given(forest_with_config())
@settings(max_examples=40, deadline=None)
def test_all_configurations_matches_subset_filter(fc):
    f, _ = fc
    if len(f.events) > 5:
        return
    from itertools import chain, combinations
    subsets = chain.from_iterable(
        combinations(sorted(f.events, key=str), k)
        for k in range(len(f.events) + 1))
    expected = {frozenset(s) for s in subsets if oracle_is_configuration(f, s)}
    got = {c.events for c in f.all_configurations()}
    assert got == expected
