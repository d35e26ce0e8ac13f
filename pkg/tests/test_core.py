import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphmoves.core import (
    DBPair,
    Graph,
    GraphError,
    block_ordered,
    collect_sources,
    components,
    from_db,
    in_block_pattern,
    to_db,
    validate_graph,
    vertex_class,
)
from graphmoves.extnat import INF, ExtArithmeticError, INT64_MAX, add, mul, parse, sub

from helpers import random_graph


def G(rows, names=None):
    return Graph.make(names or [f"v{i}" for i in range(len(rows))], rows)


# -- extended naturals


def test_ext_arithmetic():
    assert add(INF, 3) is INF
    assert mul(INF, 0) == 0 and mul(0, INF) == 0
    assert mul(INF, 2) is INF
    assert sub(INF, 4) is INF
    with pytest.raises(ExtArithmeticError):
        sub(INF, INF)
    assert sub(INF, INF, inf_minus_inf=True) is INF
    with pytest.raises(ExtArithmeticError):
        sub(3, INF)


def test_ext_overflow_is_an_error():
    with pytest.raises(OverflowError):
        add(INT64_MAX, 1)
    with pytest.raises(OverflowError):
        mul(INT64_MAX, 2)


def test_ext_parse():
    assert parse("inf") is INF
    assert parse(7) == 7
    for bad in (True, 1.5, "7", None):
        with pytest.raises((TypeError, ValueError)):
            parse(bad)


# -- validation and classes


def test_validate_graph():
    assert validate_graph(G([[1]])) == []
    assert "not square" in validate_graph(Graph(("a", "b"), ((0, 1),)))
    assert any("negative multiplicity" in m for m in validate_graph(Graph(("a",), ((-1,),))))


def test_vertex_class():
    g = G([[1, 0, 0, 0], [0, 0, 0, 0], [INF, 1, 0, 0], [1, 0, 0, 0]])
    assert vertex_class(g, "v0") == "regular"
    assert vertex_class(g, "v1") == "sink"
    assert vertex_class(g, "v2") == "infinite-emitter"
    assert vertex_class(g, "v3") == "regular-source"
    with pytest.raises((GraphError, IndexError, KeyError, ValueError)):
        vertex_class(g, "nope")


# -- sources


def test_collect_sources_identity_cases():
    g = G([[1, 0], [1, 1]])
    h, script = collect_sources(g)
    assert h == g and len(script) == 0


def test_collect_two_sources():
    g = G([[1, 0, 0], [1, 0, 0], [1, 0, 0]], ["v", "s1", "s2"])
    h, script = collect_sources(g)
    assert h.vertices == ("v", "s1")
    assert h.adjacency == ((1, 0), (2, 0))
    assert [m.kind for m in script] == ["Oinv"]


def test_collect_three_sources_adds_rows():
    g = G(
        [[1, 0, 0, 0, 0], [0, 1, 0, 0, 0], [1, 2, 0, 0, 0], [0, 1, 0, 0, 0], [3, 0, 0, 0, 0]],
        ["v", "w", "r1", "r2", "r3"],
    )
    h, _ = collect_sources(g)
    assert h.row(h.index("r1")) == (4, 3, 0)
    again, script = collect_sources(h)
    assert again == h and len(script) == 0


# -- encodings


def test_to_db_examples():
    p = to_db(G([[1, 2], [0, 1]]))
    assert p.b == ((0, 0), (2, 0)) and p.d == (1, 1)
    p = to_db(G([[2, 0], [3, 0]], ["v", "s"]))
    assert p.b == ((1,),) and p.d == (4,)
    p = to_db(G([[INF]]))
    assert p.b == ((INF,),) and p.d == (1,)


def test_from_db_examples():
    g = from_db(DBPair.make([[1]], [1], ["v"]))
    assert g.adjacency == ((2,),)
    g = from_db(DBPair.make([[-1]], [2], ["v"], source_name="s"))
    assert g.vertices == ("s", "v")
    assert g.adjacency == ((0, 1), (0, 0))
    g = from_db(DBPair.make([[0, 1], [1, 0]], [1, 1]))
    assert g.adjacency == ((1, 1), (1, 1))


def test_from_db_rejects_invalid():
    with pytest.raises(GraphError):
        from_db(DBPair.make([[0, -1], [0, 0]], [1, 1]))
    with pytest.raises(GraphError):
        from_db(DBPair.make([[0]], [0]))


seeds = st.integers(min_value=0, max_value=10**9)


@settings(max_examples=150, deadline=None)
@given(seeds, st.booleans())
def test_db_round_trip(seed, inf):
    p = to_db(random_graph(random.Random(seed), inf=inf))
    assert to_db(from_db(p)) == p


@settings(max_examples=150, deadline=None)
@given(seeds, st.booleans())
def test_transposition_law(seed, inf):
    g = from_db(to_db(random_graph(random.Random(seed), inf=inf)))
    p = to_db(g)
    keep = [g.index(v) for v in p.names]
    for i, u in enumerate(keep):
        for j, v in enumerate(keep):
            lhs = p.b[i][j] if p.b[i][j] is INF else p.b[i][j] + (i == j)
            assert lhs == g.adjacency[v][u]


# -- components


def test_components_examples():
    s = components(to_db(G([[0, 1], [1, 0]])))
    assert len(s) == 1 and s.regular_count[0] == 2 and s.singular_count[0] == 0
    s = components(G([[0, 1], [0, 0]], ["v", "w"]))
    assert len(s) == 2
    cv, cw = s.comp_of[0], s.comp_of[1]
    assert s.le(cw, cv) and not s.le(cv, cw)
    s = components(to_db(G([[0, 1], [0, 1]])))
    assert all(len(b) == 1 for b in s.blocks)


@settings(max_examples=150, deadline=None)
@given(seeds, st.booleans())
def test_b_lies_in_its_block_pattern(seed, inf):
    p = to_db(random_graph(random.Random(seed), inf=inf))
    assert in_block_pattern(p.b, components(p))


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_components_relabeling(seed):
    rng = random.Random(seed)
    p = to_db(random_graph(rng))
    perm = list(range(p.n))
    rng.shuffle(perm)
    q = p.permuted(perm)
    s, t = components(p), components(q)
    part_p = {frozenset(p.names[i] for i in b) for b in s.blocks}
    part_q = {frozenset(q.names[i] for i in b) for b in t.blocks}
    assert part_p == part_q


@settings(max_examples=100, deadline=None)
@given(seeds, st.booleans())
def test_block_order_puts_singular_last(seed, inf):
    p = block_ordered(to_db(random_graph(random.Random(seed), inf=inf)))
    s = components(p)
    flat = [i for b in s.blocks for i in b]
    assert flat == sorted(flat)  # blocks are contiguous segments
    for b in s.blocks:
        flags = [p.is_regular(i) for i in b]
        assert flags == sorted(flags, reverse=True)
    for i in range(p.n):
        for j in range(p.n):
            if p.b[i][j] != 0 and i != j:
                assert s.comp_of[i] >= s.comp_of[j] or s.comp_of[i] == s.comp_of[j]
