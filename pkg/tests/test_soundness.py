"""Test hamsquare.search.soundness"""

import itertools

import networkx as nx
import pytest

from hamsquare.errors import PreconditionError
from hamsquare.graphs.graph import Graph, complete_graph, cycle_graph, from_networkx, path_graph
from hamsquare.search.soundness import (
    ClauseEvidence,
    EPSGraph,
    attachment_blockchains,
    choose_fifth_vertex,
    clause2_situation,
    clause3_situation,
    find_eps_with_sound_cycle,
    find_w_maximal_cycle,
    find_w_sound_cycle,
    is_w_separated_ktok_blockchain,
    is_w_sound,
    iter_cycles,
    shortest_path_to_cycle,
    validate_eps,
)


@pytest.fixture(scope="module")
def square_with_ear():
    """The 4-cycle 0-1-2-3 with the ear 0-4-5-6-2."""
    return Graph.from_edges(
        7, [(0, 1), (1, 2), (2, 3), (0, 3), (0, 4), (4, 5), (5, 6), (2, 6)]
    )


def hexagon_with_ears(*ends: int) -> Graph:
    """The 6-cycle 0..5 with one vertex joined to 0 and to each listed vertex."""
    edges = [(i, (i + 1) % 6) for i in range(6)]
    edges += [e for i, v in enumerate(ends) for e in ((0, 6 + i), (v, 6 + i))]
    return Graph.from_edges(6 + len(ends), edges)


def test_iter_cycles():
    assert len(list(iter_cycles(complete_graph(4)))) == 7
    assert list(iter_cycles(cycle_graph(5))) == [(0, 1, 2, 3, 4)]
    assert list(iter_cycles(path_graph(4))) == []


def test_w_maximal_cycle(k23: Graph):
    assert find_w_maximal_cycle(complete_graph(5), range(5)) == ((0, 1, 2, 3, 4), 5)
    assert find_w_maximal_cycle(k23, range(5)) == ((0, 2, 1, 3), 4)

    with pytest.raises(PreconditionError, match="2-block"):
        find_w_maximal_cycle(cycle_graph(4), range(4))
    with pytest.raises(PreconditionError, match="2-block"):
        find_w_maximal_cycle(path_graph(6), range(5))
    with pytest.raises(PreconditionError, match="5 distinct"):
        find_w_maximal_cycle(complete_graph(5), [0, 1, 2, 3])


def test_w_sound_cycle(k23: Graph):
    cycle, report = find_w_sound_cycle(complete_graph(5), range(5))
    assert cycle == (0, 1, 2, 3, 4)
    assert report.sound
    assert report.maximal

    cycle, report = find_w_sound_cycle(k23, range(5))
    assert cycle == (0, 2, 1, 3)
    assert report.hits == 4

    report = is_w_sound(complete_graph(5), (0, 1, 2), range(5))
    assert report.hits == 3
    assert not report.maximal
    assert not report.sound
    with pytest.raises(PreconditionError, match="not a cycle"):
        is_w_sound(cycle_graph(5), (0, 2, 4), range(5))


def test_clause2_situation():
    g = hexagon_with_ears(2, 3)
    hexagon = (0, 1, 2, 3, 4, 5)
    w = (0, 1, 4, 6, 7)
    evidence = clause2_situation(g, hexagon, w)
    assert evidence == ClauseEvidence(
        base=0,
        blockchains=(frozenset({(0, 6), (2, 6)}), frozenset({(0, 7), (3, 7)})),
        paths=((0, 6, 2), (0, 7, 3)),
        subsequence=(0, 1, 2, 3, 4, 0),
    )
    report = is_w_sound(g, hexagon, w)
    assert report.hits == 3
    assert report.maximal
    assert not report.sound
    assert report.clause2_evidence == evidence
    assert report.clause3_evidence is None

    # 0-1-2-3-7 also carries the situation, with 0-5-4-3 as one blockchain
    cycle, report = find_w_sound_cycle(g, w)
    assert not is_w_sound(g, (0, 1, 2, 3, 7), w).sound
    assert cycle == (0, 1, 2, 6)
    assert report.sound


def test_clause3_situation():
    g = hexagon_with_ears(2, 3, 4)
    hexagon = (0, 1, 2, 3, 4, 5)
    w = (1, 5, 6, 7, 8)
    evidence = clause3_situation(g, hexagon, w)
    assert evidence.base == 0
    assert evidence.paths == ((0, 6, 2), (0, 7, 3), (0, 8, 4))
    assert evidence.subsequence == (0, 1, 2, 3, 4, 5, 0)
    report = is_w_sound(g, hexagon, w)
    assert report.hits == 2
    assert report.maximal
    assert not report.sound
    assert report.clause3_evidence == evidence
    assert report.clause2_evidence is None
    assert clause2_situation(g, hexagon, w) is None

    cycle, report = find_w_sound_cycle(g, w)
    assert cycle != hexagon
    assert report.sound


def test_w_separated_blockchain(square_with_ear: Graph):
    k = (0, 1, 2, 3)
    (ear,) = attachment_blockchains(square_with_ear, k)
    assert ear == {(0, 4), (4, 5), (5, 6), (2, 6)}

    assert is_w_separated_ktok_blockchain(square_with_ear, k, ear, 0, [1, 3, 5])
    assert is_w_separated_ktok_blockchain(square_with_ear, k, ear, 2, [1, 3, 5])
    assert not is_w_separated_ktok_blockchain(square_with_ear, k, ear, 1, [1, 3, 5])
    # no W vertex among the cutvertices 4, 5, 6
    assert not is_w_separated_ktok_blockchain(square_with_ear, k, ear, 0, [1, 3])

    assert shortest_path_to_cycle(ear, 0, frozenset(k)) == (0, 4, 5, 6, 2)
    assert shortest_path_to_cycle(ear, 1, frozenset(k)) is None


def test_choose_fifth_vertex(square_with_ear: Graph):
    k = (0, 1, 2, 3)
    assert choose_fifth_vertex(square_with_ear, [0, 1, 2, 3], k) == 4
    assert choose_fifth_vertex(square_with_ear, [0, 1, 2, 4], k) == 3
    assert choose_fifth_vertex(square_with_ear, [0, 2, 4, 5], k) == 1
    with pytest.raises(PreconditionError, match="No fifth vertex"):
        choose_fifth_vertex(square_with_ear, [0, 4, 5, 6], k)


def test_eps_graph(k23: Graph):
    eps = find_eps_with_sound_cycle(complete_graph(5), (0, 1, 2, 3, 4), range(5))
    assert eps.p_part == frozenset()
    assert len(eps.e_part) == 5

    eps = find_eps_with_sound_cycle(k23, (0, 2, 1, 3), range(5))
    assert eps.p_part == {(0, 4)}
    assert validate_eps(eps, cycle=(0, 2, 1, 3), w=range(5))

    with pytest.raises(PreconditionError, match="not W-sound"):
        find_eps_with_sound_cycle(complete_graph(5), (0, 1, 2), range(5))


def test_validate_eps(k23: Graph):
    cycle_edges = frozenset({(0, 2), (1, 2), (1, 3), (0, 3)})
    path = EPSGraph(k23, cycle_edges, frozenset({(0, 4), (1, 4)}))
    assert validate_eps(path)
    assert not validate_eps(path, w=[4])
    assert not validate_eps(EPSGraph(k23, cycle_edges, frozenset({(0, 2), (0, 4)})))
    assert not validate_eps(EPSGraph(k23, cycle_edges, frozenset()))
    odd = EPSGraph(k23, frozenset({(0, 2)}), frozenset({(0, 3), (1, 3), (1, 4)}))
    assert not validate_eps(odd)
    assert not validate_eps(EPSGraph(k23, cycle_edges, frozenset({(0, 1)})))


def assert_sound_and_eps(n: int):
    for nx_graph in nx.graph_atlas_g():
        if nx_graph.number_of_nodes() != n or not nx.is_biconnected(nx_graph):
            continue
        g = from_networkx(nx_graph)
        for w in itertools.combinations(range(n), 5):
            cycle, report = find_w_sound_cycle(g, w)
            assert report.sound
            eps = find_eps_with_sound_cycle(g, cycle, w)
            assert validate_eps(eps, cycle=cycle, w=w)


def test_sound_cycles_n5():
    assert_sound_and_eps(5)


@pytest.mark.slow
def test_sound_cycles_n6_n7():
    assert_sound_and_eps(6)
    assert_sound_and_eps(7)
