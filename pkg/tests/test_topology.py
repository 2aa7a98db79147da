import json

import pytest
from hypothesis import given, strategies as st

from qfunctest.topology import (ChipTopology, NotBipartiteError, ParseError, TopologyError,
                                Triplet, bipartition, chains, is_chain, load_topology,
                                pair_cover, random_chains, triplet_cover)

FALCON_A = {0, 2, 4, 5, 6, 9, 10, 11, 13, 15, 16, 17, 20, 21, 22, 24, 26}


def path_graph(n):
    return ChipTopology.build(n, [(i, i + 1) for i in range(n - 1)])


@st.composite
def graphs(draw, max_n=12):
    n = draw(st.integers(2, max_n))
    pairs = draw(st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1))
                         .filter(lambda e: e[0] < e[1]), max_size=3 * n))
    return ChipTopology.build(n, sorted(pairs))


@st.composite
def trees(draw, max_n=14):
    # random trees are bipartite and connected
    n = draw(st.integers(2, max_n))
    edges = [(draw(st.integers(0, v - 1)), v) for v in range(1, n)]
    return ChipTopology.build(n, edges)


def test_falcon_counts(falcon):
    topo, _ = falcon
    assert topo.num_qubits == 27
    assert len(topo.edges) == 28


def test_eagle_counts(eagle):
    topo, _ = eagle
    assert (topo.num_qubits, len(topo.edges)) == (127, 144)


def test_falcon_bipartition(falcon):
    topo, _ = falcon
    bp = bipartition(topo)
    assert bp.group_a == FALCON_A
    assert bp.group_a | bp.group_b == set(range(27))
    assert bp.side("B") == (bp.group_b, bp.group_a)


def test_path_bipartition():
    bp = bipartition(path_graph(4))
    assert bp.group_a == {0, 2} and bp.group_b == {1, 3}


def test_odd_cycle_is_rejected_with_witness():
    tri = ChipTopology.build(3, [(0, 1), (1, 2), (0, 2)])
    with pytest.raises(NotBipartiteError) as info:
        bipartition(tri)
    cyc = info.value.cycle
    assert len(set(cyc)) % 2 == 1
    assert set(cyc) == {0, 1, 2}


def test_pentagon_witness_is_a_cycle():
    pent = ChipTopology.build(5, [(i, (i + 1) % 5) for i in range(5)])
    with pytest.raises(NotBipartiteError) as info:
        bipartition(pent)
    cyc = info.value.cycle
    closed = cyc + [cyc[0]] if cyc[0] != cyc[-1] else cyc
    assert all(pent.has_edge(u, v) for u, v in zip(closed, closed[1:]))
    assert len(set(cyc)) % 2 == 1


@given(trees())
def test_bipartition_has_no_same_side_edges(topo):
    bp = bipartition(topo)
    for i, j in topo.edges:
        assert (i in bp.group_a) != (j in bp.group_a)
    assert bp.group_a.isdisjoint(bp.group_b)


@given(graphs())
def test_bipartition_either_colours_or_finds_odd_cycle(topo):
    try:
        bp = bipartition(topo)
    except NotBipartiteError as exc:
        assert len(set(exc.cycle)) % 2 == 1
    else:
        assert all((i in bp.group_a) != (j in bp.group_a) for i, j in topo.edges)


def test_greedy_triplet_cover_falcon(falcon):
    topo, _ = falcon
    cover = triplet_cover(topo)
    got = [t.members for t in cover.triplets]
    assert got == [(0, 1, 2), (6, 7, 10), (5, 8, 9), (13, 14, 16), (15, 18, 17), (23, 24, 25)]


def test_priority_cover_contains_collision_triplets(falcon):
    topo, _ = falcon
    cover = triplet_cover(topo, priority=[Triplet(24, 25, 22), Triplet(2, 3, 5)])
    assert Triplet(24, 25, 22) in cover.triplets and Triplet(2, 3, 5) in cover.triplets


def test_priority_must_be_a_chain(falcon):
    topo, _ = falcon
    with pytest.raises(TopologyError):
        triplet_cover(topo, priority=[Triplet(0, 5, 9)])


@given(graphs())
def test_triplet_cover_is_separated(topo):
    cover = triplet_cover(topo)
    used = [q for t in cover.triplets for q in t.members]
    assert len(used) == len(set(used))
    for t in cover.triplets:
        assert is_chain(topo, t)
    owner = {q: k for k, t in enumerate(cover.triplets) for q in t.members}
    for i, j in topo.edges:
        if i in owner and j in owner:
            assert owner[i] == owner[j]
    assert cover.idle == set(range(topo.num_qubits)) - set(used)


def test_chains_are_ordered_and_valid():
    topo = path_graph(4)
    cs = chains(topo)
    assert all(is_chain(topo, t) for t in cs)
    assert [(t.b, t.a, t.c) for t in cs] == sorted((t.b, t.a, t.c) for t in cs)
    assert Triplet(0, 1, 2) in cs and Triplet(2, 1, 0) in cs


def test_pair_covers_falcon(falcon):
    topo, _ = falcon
    assert pair_cover(topo) == [(0, 1), (2, 3), (4, 7), (5, 8), (10, 12), (11, 14), (15, 18),
                                (16, 19), (21, 23), (22, 25)]
    assert pair_cover(topo, spaced=True) == [(0, 1), (3, 5), (6, 7), (11, 14), (12, 15),
                                             (19, 20), (21, 23), (25, 26)]


@given(graphs())
def test_spaced_pairs_do_not_touch(topo):
    pairs = pair_cover(topo, spaced=True)
    owner = {q: k for k, p in enumerate(pairs) for q in p}
    assert len(owner) == 2 * len(pairs)
    for i, j in topo.edges:
        if i in owner and j in owner:
            assert owner[i] == owner[j]


@given(trees(), st.integers(2, 5), st.integers(0, 1000))
def test_random_chains_are_simple_paths(topo, length, seed):
    try:
        paths = random_chains(topo, length, 3, seed)
    except TopologyError:
        return  # the tree may be too short for the requested length
    assert paths == random_chains(topo, length, 3, seed)
    for p in paths:
        assert len(p) == len(set(p)) == length
        assert all(topo.has_edge(u, v) for u, v in zip(p, p[1:]))


def test_random_chains_too_long():
    with pytest.raises(TopologyError):
        random_chains(path_graph(3), 5, 1, 0)


def test_build_rejects_duplicates_and_loops():
    with pytest.raises(TopologyError, match="duplicate"):
        ChipTopology.build(3, [(0, 1), (1, 0)])
    with pytest.raises(TopologyError, match="self-loop"):
        ChipTopology.build(3, [(1, 1)])
    with pytest.raises(TopologyError):
        ChipTopology.build(2, [(0, 5)])


def test_load_topology_errors_carry_location():
    with pytest.raises(ParseError) as info:
        load_topology('{"num_qubits": 3,\n "edges": [[0, 1],]}')
    assert info.value.line == 2
    with pytest.raises(ParseError) as info:
        load_topology(json.dumps({"num_qubits": 3, "edges": [[0, 1], [1, "x"]]}))
    assert info.value.field == "edges[1]"
    with pytest.raises(ParseError) as info:
        load_topology(json.dumps({"edges": []}))
    assert info.value.field == "num_qubits"


def test_to_dict_round_trip(falcon):
    topo, _ = falcon
    again = load_topology(json.dumps(topo.to_dict()))
    assert again == topo
