"""Test hamsquare.search.oracle"""

import itertools
import random

import networkx as nx
import pytest

from hamsquare.errors import PreconditionError, SearchTimeoutError, SolverCapError
from hamsquare.graphs.graph import (
    Graph,
    complete_graph,
    cycle_graph,
    from_networkx,
    path_graph,
    to_networkx,
)
from hamsquare.search.constructions import pool_with_bridge, random_blockchain
from hamsquare.search.oracle import (
    AnchorCase,
    Certificate,
    CheckReason,
    ConstraintSpec,
    Kind,
    SearchBudget,
    Witness,
    blockchain_anchor_cases,
    canonical_order,
    check_certificate,
    explain_certificate,
    f4_implies_h3_cycle,
    f_spec,
    find_f_path,
    find_h_cycle,
    find_strong_f3_path,
    find_thm3_cycle,
    find_thm4_cycle,
    h_spec,
    has_witness_forest,
    iter_certificates,
    match_witnesses,
    search,
    strong_f3_spec,
    thm3_spec,
    thm4_spec,
)


def two_blocks(n: int) -> list[Graph]:
    return [
        from_networkx(g)
        for g in nx.graph_atlas_g()
        if g.number_of_nodes() == n and nx.is_biconnected(g)
    ]


def blockchains(max_n: int) -> list[Graph]:
    found = []
    for nx_graph in nx.graph_atlas_g()[1:]:
        if nx_graph.number_of_nodes() > max_n or not nx.is_connected(nx_graph):
            continue
        bc_tree = nx.Graph()
        components = [frozenset(c) for c in nx.biconnected_components(nx_graph)]
        for i, block in enumerate(components):
            for v in block:
                if sum(v in other for other in components) > 1:
                    bc_tree.add_edge(("B", i), ("C", v))
        if len(components) > 1 and max(d for _, d in bc_tree.degree) <= 2:
            found.append(from_networkx(nx_graph))
    return found


def brute_force_orders(g: Graph, spec: ConstraintSpec) -> set[tuple[int, ...]]:
    """Enumerate permutations and try every witness assignment."""
    near = dict(nx.all_pairs_shortest_path_length(to_networkx(g), cutoff=2))
    slots = spec.slots()
    found = set()
    for perm in itertools.permutations(range(g.n)):
        if spec.kind is Kind.CYCLE:
            if g.n < 3 or perm[0] != 0 or perm[1] > perm[-1]:
                continue
            pairs = list(zip(perm, perm[1:] + perm[:1], strict=True))
        else:
            if (perm[0], perm[-1]) != spec.endpoints:
                continue
            pairs = list(zip(perm, perm[1:], strict=False))
        if any(v not in near[u] for u, v in pairs):
            continue
        g_edges = [frozenset(p) for p in pairs if g.has_edge(*p)]
        options = [[e for e in g_edges if x in e] for x in slots]
        if any(len(set(c)) == len(c) for c in itertools.product(*options)):
            found.add(perm)
    return found


def specs_for(g: Graph) -> list[ConstraintSpec]:
    specs = [h_spec(()), h_spec(range(min(4, g.n))), thm3_spec(0, 1)]
    if g.n >= 3:
        specs += [
            f_spec(0, g.n - 1, [1]),
            strong_f3_spec(0, g.n - 1, 1, 1),
            strong_f3_spec(0, 1, 2, 2),
        ]
    return specs


def assert_matches_brute_force(max_n: int, min_n: int = 2):
    for nx_graph in nx.graph_atlas_g():
        if not min_n <= nx_graph.number_of_nodes() <= max_n:
            continue
        g = from_networkx(nx_graph)
        for spec in specs_for(g):
            found = list(iter_certificates(g, spec))
            assert {c.order for c in found} == brute_force_orders(g, spec), (g, spec)
            assert all(check_certificate(g, spec, c) for c in found)


def test_canonical_order():
    assert canonical_order((2, 0, 3, 1), Kind.CYCLE) == (0, 2, 1, 3)
    assert canonical_order((3, 0, 1, 2), Kind.CYCLE) == (0, 1, 2, 3)
    assert canonical_order((3, 0, 1), Kind.PATH) == (3, 0, 1)


def test_match_witnesses():
    edges = [(0, 1), (1, 2), (2, 3), (0, 3)]
    assert match_witnesses(cycle_graph(4), [0, 0], edges) == (
        Witness(0, (0, 1)),
        Witness(0, (0, 3)),
    )
    assert match_witnesses(cycle_graph(4), [0, 0, 0], edges) is None
    assert match_witnesses(cycle_graph(4), [0, 1, 2, 3], edges) is not None
    assert match_witnesses(path_graph(4), [0, 1], [(0, 1), (1, 3)]) is None


def test_cycle_counts():
    cycle_spec = ConstraintSpec(kind=Kind.CYCLE)
    assert len(list(iter_certificates(cycle_graph(3), cycle_spec))) == 1
    assert len(list(iter_certificates(complete_graph(4), cycle_spec))) == 3
    assert len(list(iter_certificates(cycle_graph(5), cycle_spec))) == 12
    assert list(iter_certificates(path_graph(2), cycle_spec)) == []


def test_find_h_cycle():
    g = cycle_graph(5)
    cert = find_h_cycle(g, [0, 1, 2, 3])
    assert cert.kind is Kind.CYCLE
    assert sorted(w.vertex for w in cert.witnesses) == [0, 1, 2, 3]
    assert check_certificate(g, h_spec([0, 1, 2, 3]), cert)

    assert find_h_cycle(complete_graph(4), [0, 1, 2, 3]) is not None
    with pytest.raises(PreconditionError):
        find_h_cycle(cycle_graph(4), [0, 1, 2, 3, 0])
    with pytest.raises(PreconditionError):
        find_h_cycle(cycle_graph(3), [0, 1, 2, 3])


def test_find_paths(k23: Graph):
    cert = find_f_path(k23, 2, 3, [0, 4])
    assert cert.order[0] == 2
    assert cert.order[-1] == 3
    assert check_certificate(k23, f_spec(2, 3, [0, 4]), cert)

    cert = find_strong_f3_path(k23, 0, 1, 2, 2)
    assert check_certificate(k23, strong_f3_spec(0, 1, 2, 2), cert)
    assert any(w.vertex == 1 for w in cert.witnesses)

    with pytest.raises(PreconditionError):
        find_f_path(k23, 0, 0, [1])
    with pytest.raises(PreconditionError):
        find_strong_f3_path(k23, 0, 1, 2, 3)


def test_find_thm3_cycle(k23: Graph):
    cert = find_thm3_cycle(k23, 0, 2)
    assert check_certificate(k23, thm3_spec(0, 2), cert)
    assert [w.vertex for w in cert.witnesses].count(0) == 2
    with pytest.raises(PreconditionError, match="2-block"):
        find_thm3_cycle(path_graph(4), 0, 1)


def test_find_thm4_cycle(bowtie: Graph):
    cert = find_thm4_cycle(bowtie, 0, 3)
    assert dict(cert.anchor_cases) == {0: AnchorCase.TWO_BLOCK, 3: AnchorCase.TWO_BLOCK}
    assert check_certificate(bowtie, thm4_spec(bowtie, cert), cert)

    path = path_graph(4)
    cert = find_thm4_cycle(path, 0, 3)
    assert dict(cert.anchor_cases) == {0: AnchorCase.BRIDGE, 3: AnchorCase.BRIDGE}
    assert check_certificate(path, thm4_spec(path, cert), cert)

    with pytest.raises(PreconditionError, match="different endblocks"):
        blockchain_anchor_cases(bowtie, 0, 1)
    with pytest.raises(PreconditionError, match="inner"):
        blockchain_anchor_cases(bowtie, 0, 2)
    with pytest.raises(PreconditionError, match="blockchain"):
        find_thm4_cycle(from_networkx(nx.star_graph(3)), 1, 2)


def test_explain_certificate():
    g = cycle_graph(5)
    good = Certificate(Kind.CYCLE, (0, 1, 2, 3, 4), (Witness(0, (0, 1)),))
    assert explain_certificate(g, h_spec([0]), good) is CheckReason.OK
    assert explain_certificate(g, f_spec(0, 4, []), good) is CheckReason.WRONG_KIND
    assert (
        explain_certificate(g, h_spec([0]), good._replace(order=(0, 1, 2, 3, 3)))
        is CheckReason.NOT_A_PERMUTATION
    )
    assert explain_certificate(path_graph(5), h_spec([0]), good) is CheckReason.FAR_PAIR
    assert (
        explain_certificate(g, h_spec([0]), good._replace(witnesses=()))
        is CheckReason.WITNESS_MISMATCH
    )
    assert (
        explain_certificate(g, h_spec([0]), good._replace(witnesses=(Witness(0, (0, 2)),)))
        is CheckReason.WITNESS_NOT_IN_GRAPH
    )
    assert (
        explain_certificate(g, h_spec([0]), good._replace(witnesses=(Witness(0, (1, 2)),)))
        is CheckReason.WITNESS_NOT_INCIDENT
    )
    assert (
        explain_certificate(g, h_spec([0]), good._replace(order=(0, 2, 4, 1, 3)))
        is CheckReason.WITNESS_NOT_ON_TOUR
    )
    repeated = good._replace(witnesses=(Witness(0, (0, 1)), Witness(1, (0, 1))))
    assert explain_certificate(g, h_spec([0, 1]), repeated) is CheckReason.WITNESS_REPEATED

    path = Certificate(Kind.PATH, (0, 1, 2, 3, 4), ())
    assert explain_certificate(g, f_spec(0, 4, []), path) is CheckReason.OK
    assert explain_certificate(g, f_spec(0, 3, []), path) is CheckReason.BAD_ENDPOINTS


def test_limits():
    with pytest.raises(SolverCapError):
        find_h_cycle(cycle_graph(65), [])
    with pytest.raises(PreconditionError):
        list(iter_certificates(cycle_graph(4), h_spec([4])))
    with pytest.raises(SearchTimeoutError):
        list(
            iter_certificates(
                complete_graph(8), ConstraintSpec(kind=Kind.CYCLE), SearchBudget(timeout=0.0)
            )
        )
    budget = SearchBudget(timeout=None)
    assert find_h_cycle(cycle_graph(6), [0, 1, 2, 3], budget) is not None
    assert budget.nodes > 0


def test_f4_implies_h3_cycle():
    g = cycle_graph(5)
    cert = f4_implies_h3_cycle(g, [0, 1, 2])
    assert check_certificate(g, h_spec([0, 1, 2]), cert)
    with pytest.raises(PreconditionError):
        f4_implies_h3_cycle(g, [0, 1])


def test_has_witness_forest(k23: Graph):
    assert has_witness_forest(cycle_graph(5), range(5))
    assert has_witness_forest(k23, [0, 1, 2, 3])
    # every witness edge meets 0 or 1, which can carry at most four
    assert not has_witness_forest(k23, [0, 1, 2, 3, 4])
    # both edges at 0 plus one more at 1 close a triangle
    triangle = Graph.from_edges(4, [(0, 1), (1, 2), (0, 2), (2, 3)])
    assert not has_witness_forest(triangle, [0, 0, 1])
    assert has_witness_forest(triangle, [0, 1, 2])


def test_oracle_matches_brute_force():
    assert_matches_brute_force(5)


@pytest.mark.slow
def test_oracle_matches_brute_force_n6_n7():
    assert_matches_brute_force(7, min_n=6)


def test_atlas_two_block_counts():
    assert [len(two_blocks(n)) for n in range(3, 7)] == [1, 3, 10, 56]


def assert_h4(graphs: list[Graph]):
    for g in graphs:
        for x in itertools.combinations(range(g.n), 4):
            cert = find_h_cycle(g, x)
            assert cert is not None, (g, x)
            assert check_certificate(g, h_spec(x), cert)


def assert_f4_strong_f3_thm3(graphs: list[Graph]):
    for g in graphs:
        for x1, x2 in itertools.permutations(range(g.n), 2):
            rest = [v for v in g.vertices if v not in (x1, x2)]
            for r in itertools.combinations(rest, min(2, len(rest))):
                cert = find_f_path(g, x1, x2, r)
                assert check_certificate(g, f_spec(x1, x2, r), cert), (g, x1, x2, r)
            for x3 in rest:
                for i in (1, 2):
                    cert = find_strong_f3_path(g, x1, x2, x3, i)
                    assert check_certificate(g, strong_f3_spec(x1, x2, x3, i), cert)
            cert = find_thm3_cycle(g, x1, x2)
            assert check_certificate(g, thm3_spec(x1, x2), cert), (g, x1, x2)


def assert_thm4(graphs: list[Graph]):
    for g in graphs:
        components = sorted(nx.biconnected_components(to_networkx(g)), key=sorted)
        cuts = set(nx.articulation_points(to_networkx(g)))
        ends = [c for c in components if len(c & cuts) == 1]
        first, last = ends
        for u1 in sorted(first - cuts):
            for u2 in sorted(last - cuts):
                cert = find_thm4_cycle(g, u1, u2)
                assert check_certificate(g, thm4_spec(g, cert), cert), (g, u1, u2)


def test_theorems_small():
    assert_h4(two_blocks(4) + two_blocks(5) + two_blocks(6))
    assert_f4_strong_f3_thm3(two_blocks(3) + two_blocks(4) + two_blocks(5))
    assert_thm4(blockchains(5))


@pytest.mark.slow
def test_theorems_n7():
    assert_h4(two_blocks(7))
    assert_f4_strong_f3_thm3(two_blocks(6) + two_blocks(7))
    assert_thm4(blockchains(7))


@pytest.mark.slow
def test_thm4_random_blockchains_n8():
    pool = pool_with_bridge([g for n in range(3, 7) for g in two_blocks(n)])
    graphs = [random_blockchain(random.Random(seed), pool, 8) for seed in range(60)]  # noqa: S311
    assert all(g.n <= 8 for g in graphs)
    assert any(g.n == 8 for g in graphs)
    assert_thm4(graphs)


def test_search_returns_lexicographically_least():
    for nx_graph in nx.graph_atlas_g():
        if not 2 <= nx_graph.number_of_nodes() <= 5:
            continue
        g = from_networkx(nx_graph)
        for spec in specs_for(g):
            orders = brute_force_orders(g, spec)
            found = search(g, spec)
            if not orders:
                assert found is None, (g, spec)
                continue
            assert found.order == min(orders), (g, spec)
            assert check_certificate(g, spec, found)
            assert search(g, spec) == found


def assert_f4_implies_h3(graphs: list[Graph]):
    for g in graphs:
        for x in itertools.combinations(range(g.n), 3):
            cert = f4_implies_h3_cycle(g, x)
            assert cert is not None, (g, x)
            assert check_certificate(g, h_spec(x), cert)


def test_f4_implies_h3_two_blocks():
    assert_f4_implies_h3(two_blocks(4) + two_blocks(5) + two_blocks(6))
    assert f4_implies_h3_cycle(complete_graph(3), [0, 1, 2]) is None


@pytest.mark.slow
def test_f4_implies_h3_two_blocks_n7():
    assert_f4_implies_h3(two_blocks(7))


def assert_h_cycles_monotone(min_n: int, max_n: int):
    for nx_graph in nx.graph_atlas_g():
        if not min_n <= nx_graph.number_of_nodes() <= max_n or not nx.is_connected(nx_graph):
            continue
        g = from_networkx(nx_graph)
        present = {
            frozenset(x): find_h_cycle(g, x) is not None
            for r in range(g.n + 1)
            for x in itertools.combinations(range(g.n), r)
        }
        for x, found in present.items():
            if found:
                assert all(present[x - {v}] for v in x), (g, sorted(x))


def test_h_cycles_monotone():
    assert_h_cycles_monotone(3, 5)


@pytest.mark.slow
def test_h_cycles_monotone_n6_n7():
    assert_h_cycles_monotone(6, 7)
