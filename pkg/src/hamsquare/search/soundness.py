"""Find W-maximal and W-sound cycles and the EPS-graphs built around them.

Cycles are vertex tuples in canonical order (see
:func:`hamsquare.search.oracle.canonical_order`). Edge sets are frozensets of
normalized pairs.

A K-to-K blockchain is read as a component of ``G - V(K)`` together with its
attachment vertices on ``K`` and the edges joining them; it must itself be a
blockchain.
"""

import itertools
import logging
from collections.abc import Iterable, Iterator, Sequence
from typing import NamedTuple

import networkx as nx

from hamsquare.errors import PreconditionError, TheoremFinding
from hamsquare.graphs.connectivity import as_blockchain, is_two_block
from hamsquare.graphs.graph import Edge, Graph, edge, from_networkx, to_networkx
from hamsquare.search.oracle import SOLVER_CAP, Kind, canonical_order, tour_edges

_logger = logging.getLogger(__name__)

W_SIZE = 5


class EPSGraph(NamedTuple):
    """Define a spanning connected subgraph split into an eulerian part and a linear forest."""

    host: Graph
    e_part: frozenset[Edge]
    p_part: frozenset[Edge]


class ClauseEvidence(NamedTuple):
    """Record a forbidden attachment situation found on a cycle.

    :param base: the vertex all blockchains are based on
    :param blockchains: edge sets of the blockchains
    :param paths: per blockchain, the shortest path from ``base`` to another cycle vertex
    :param subsequence: the cyclic subsequence of the cycle that completes the situation
    """

    base: int
    blockchains: tuple[frozenset[Edge], ...]
    paths: tuple[tuple[int, ...], ...]
    subsequence: tuple[int, ...]


class SoundnessReport(NamedTuple):
    """Describe how a cycle fares against the W-soundness conditions."""

    cycle: tuple[int, ...]
    w: frozenset[int]
    hits: int
    maximal: bool
    sound: bool
    clause2_evidence: ClauseEvidence | None = None
    clause3_evidence: ClauseEvidence | None = None


def _check_w(g: Graph, w: Iterable[int]) -> frozenset[int]:
    chosen = frozenset(w)
    if len(chosen) != W_SIZE or any(not 0 <= v < g.n for v in chosen):
        msg = f"W must be {W_SIZE} distinct vertices of the graph, got {sorted(chosen)}"
        raise PreconditionError(msg)
    return chosen


def _check_host(g: Graph) -> None:
    if g.n > SOLVER_CAP:
        msg = f"Cycle enumeration supports at most {SOLVER_CAP} vertices, got {g.n}"
        raise PreconditionError(msg)
    if not is_two_block(g) or g.n < W_SIZE:
        msg = f"Expected a 2-block on at least {W_SIZE} vertices"
        raise PreconditionError(msg)


def iter_cycles(g: Graph) -> Iterator[tuple[int, ...]]:
    """Yield every cycle of ``g`` once, in canonical order, sorted."""
    found = {
        canonical_order(c, Kind.CYCLE)
        for c in nx.simple_cycles(to_networkx(g))
        if len(c) >= 3
    }
    yield from sorted(found)


def _hits(cycle: Sequence[int], w: frozenset[int]) -> int:
    return len(w.intersection(cycle))


def find_w_maximal_cycle(g: Graph, w: Iterable[int]) -> tuple[tuple[int, ...], int]:
    """Find a cycle through as many vertices of ``W`` as possible.

    Ties go to the lexicographically least canonical cycle.

    :return: the cycle and ``|V(K) & W|``
    :raise PreconditionError: if ``g`` is not a 2-block on at least five
        vertices or ``W`` is not five distinct vertices
    """
    _check_host(g)
    chosen = _check_w(g, w)
    best, best_hits = None, -1
    for cycle in iter_cycles(g):
        hits = _hits(cycle, chosen)
        if hits > best_hits:
            best, best_hits = cycle, hits
    return best, best_hits


def _cycle_vertices_and_edges(
    g: Graph, k: Sequence[int]
) -> tuple[frozenset[int], frozenset[Edge]]:
    edges = frozenset(tour_edges(k, Kind.CYCLE))
    if len(k) < 3 or len(set(k)) != len(k) or any(not g.has_edge(*e) for e in edges):
        msg = f"{tuple(k)} is not a cycle of the graph"
        raise PreconditionError(msg)
    return frozenset(k), edges


def attachment_blockchains(g: Graph, k: Sequence[int]) -> list[frozenset[Edge]]:
    """List the components of ``G - V(K)`` with their attachment edges to ``K``.

    Chords of ``K`` are not included. Components are ordered by their least vertex.
    """
    on_cycle, _ = _cycle_vertices_and_edges(g, k)
    outside = to_networkx(g)
    outside.remove_nodes_from(on_cycle)
    return [
        frozenset(e for e in g.edges if e[0] in component or e[1] in component)
        for component in sorted(nx.connected_components(outside), key=min)
    ]


def _vertices(edges: Iterable[Edge]) -> frozenset[int]:
    return frozenset(itertools.chain.from_iterable(edges))


def _as_local_blockchain(
    p: frozenset[Edge],
) -> tuple[tuple[frozenset[int], ...], frozenset[int]] | None:
    nx_graph = nx.Graph()
    nx_graph.add_nodes_from(sorted(_vertices(p)))
    nx_graph.add_edges_from(sorted(p))
    local = from_networkx(nx_graph)
    back = dict(enumerate(nx_graph.nodes))
    chain = as_blockchain(local)
    if chain is None:
        return None
    blocks = tuple(frozenset(back[v] for v in b) for b in chain.blocks)
    cuts = frozenset(back[v] for v in chain.cutvertices)
    return blocks, cuts


def is_w_separated_ktok_blockchain(
    g: Graph, k: Sequence[int], p: Iterable[Edge], x: int, w: Iterable[int]
) -> bool:
    """Check the five conditions of a W-separated K-to-K blockchain based on ``x``.

    A vertex of ``W`` is a cutvertex of ``P``; both endblocks ``B`` and ``B'``
    meet ``K``; ``V(B) & V(K) = {x}``; no vertex of ``K`` is a cutvertex of
    ``P``; and every other vertex ``P`` shares with ``K`` lies in ``B'``.
    Either endblock may play the role of ``B``.
    """
    on_cycle, _ = _cycle_vertices_and_edges(g, k)
    p = frozenset(edge(*e) for e in p)
    if not p:
        return False
    local = _as_local_blockchain(p)
    if local is None:
        return False
    blocks, cuts = local
    if len(blocks) < 2 or not cuts & frozenset(w) or cuts & on_cycle:
        return False
    shared = _vertices(p) & on_cycle
    for first, last in ((blocks[0], blocks[-1]), (blocks[-1], blocks[0])):
        if (
            first & on_cycle == {x}
            and last & on_cycle
            and shared - {x} <= last
        ):
            return True
    return False


def shortest_path_to_cycle(
    p: frozenset[Edge], base: int, on_cycle: frozenset[int]
) -> tuple[int, ...] | None:
    """Find the lexicographically least shortest path in ``P`` from ``base`` to another vertex of ``K``."""
    nx_graph = nx.Graph(sorted(p))
    if base not in nx_graph:
        return None
    lengths = nx.single_source_shortest_path_length(nx_graph, base)
    targets = [v for v in on_cycle - {base} if v in lengths]
    if not targets:
        return None
    best = min(lengths[v] for v in targets)
    return min(
        tuple(path)
        for v in targets
        if lengths[v] == best
        for path in nx.all_shortest_paths(nx_graph, base, v)
    )


def _in_cyclic_order(k: Sequence[int], sequence: Sequence[int]) -> bool:
    """Check that ``sequence`` starts at ``k``'s vertex and appears along ``k`` in some direction."""
    if len(set(sequence)) != len(sequence):
        return False
    start = k.index(sequence[0])
    forward = list(k[start:]) + list(k[:start])
    backward = [forward[0], *reversed(forward[1:])]
    for walk in (forward, backward):
        positions = [walk.index(v) for v in sequence]
        if positions == sorted(positions):
            return True
    return False


def _based_blockchains(
    g: Graph, k: Sequence[int], base: int, w: frozenset[int]
) -> list[frozenset[Edge]]:
    return [
        p
        for p in attachment_blockchains(g, k)
        if base in _vertices(p) and is_w_separated_ktok_blockchain(g, k, p, base, w)
    ]


def _forbidden_situation(
    g: Graph,
    k: Sequence[int],
    w: frozenset[int],
    bases: Iterable[int],
    count: int,
    ends: Sequence[int],
) -> ClauseEvidence | None:
    on_cycle = frozenset(k)
    for base in bases:
        candidates = _based_blockchains(g, k, base, w)
        for chosen in itertools.permutations(candidates, count):
            if any(
                _vertices(a) & _vertices(b) != {base}
                for a, b in itertools.combinations(chosen, 2)
            ):
                continue
            paths = [shortest_path_to_cycle(p, base, on_cycle) for p in chosen]
            if any(path is None for path in paths):
                continue
            lasts = [path[-1] for path in paths]
            for first, final in itertools.permutations(ends, 2):
                sequence = (base, first, *lasts, final)
                if _in_cyclic_order(k, sequence):
                    return ClauseEvidence(
                        base=base,
                        blockchains=tuple(chosen),
                        paths=tuple(paths),
                        subsequence=(*sequence, base),
                    )
    return None


def clause2_situation(g: Graph, k: Sequence[int], w: Iterable[int]) -> ClauseEvidence | None:
    """Look for two W-separated blockchains based on a ``W`` vertex of ``K`` in the forbidden order."""
    chosen = frozenset(w)
    on_w = sorted(chosen.intersection(k))
    for base in on_w:
        others = [v for v in on_w if v != base]
        found = _forbidden_situation(g, k, chosen, [base], 2, others)
        if found is not None:
            return found
    return None


def clause3_situation(g: Graph, k: Sequence[int], w: Iterable[int]) -> ClauseEvidence | None:
    """Look for three W-separated blockchains based on a non-``W`` vertex of ``K`` in the forbidden order."""
    chosen = frozenset(w)
    on_w = sorted(chosen.intersection(k))
    bases = sorted(set(k) - chosen)
    return _forbidden_situation(g, k, chosen, bases, 3, on_w)


def is_w_sound(
    g: Graph, k: Sequence[int], w: Iterable[int], max_hits: int | None = None
) -> SoundnessReport:
    """Decide whether ``K`` is a W-sound cycle.

    :param g: host graph
    :param k: a cycle of ``g``
    :param w: five distinct vertices
    :param max_hits: the W-maximal hit count if already known
    :raise PreconditionError: if ``W`` is not five distinct vertices or ``K``
        is not a cycle of ``g``
    """
    chosen = _check_w(g, w)
    _cycle_vertices_and_edges(g, k)
    cycle = canonical_order(k, Kind.CYCLE)
    hits = _hits(cycle, chosen)
    if max_hits is None:
        max_hits = max(_hits(c, chosen) for c in iter_cycles(g))
    maximal = hits == max_hits
    clause2 = clause3 = None
    if hits == 3:
        clause2 = clause2_situation(g, cycle, chosen)
    elif hits == 2:
        clause3 = clause3_situation(g, cycle, chosen)
    sound = maximal and (
        hits >= 4
        or (hits == 3 and clause2 is None)
        or (hits == 2 and clause3 is None)
    )
    return SoundnessReport(
        cycle=cycle,
        w=chosen,
        hits=hits,
        maximal=maximal,
        sound=sound,
        clause2_evidence=clause2,
        clause3_evidence=clause3,
    )


def find_w_sound_cycle(g: Graph, w: Iterable[int]) -> tuple[tuple[int, ...], SoundnessReport]:
    """Search the W-maximal cycles of a 2-block for a W-sound one.

    :raise PreconditionError: see :func:`find_w_maximal_cycle`
    :raise TheoremFinding: if no W-maximal cycle is sound
    """
    _, best = find_w_maximal_cycle(g, w)
    chosen = frozenset(w)
    for cycle in iter_cycles(g):
        if _hits(cycle, chosen) != best:
            continue
        report = is_w_sound(g, cycle, chosen, max_hits=best)
        if report.sound:
            return cycle, report
        _logger.debug("Cycle %s is W-maximal but not sound", cycle)
    _logger.error("No W-sound cycle for W=%s in %s", sorted(chosen), g.edges)
    raise TheoremFinding("W-sound cycle lemma", f"edges={list(g.edges)} W={sorted(chosen)}")


def validate_eps(
    eps: EPSGraph, cycle: Sequence[int] | None = None, w: Iterable[int] | None = None
) -> bool:
    """Re-check an EPS-graph from its parts alone.

    :param eps: candidate
    :param cycle: if given, its edges must lie in the eulerian part
    :param w: if given, these vertices have degree at most 1 in the linear forest
    """
    host = eps.host
    if eps.e_part & eps.p_part:
        return False
    if any(not host.has_edge(*e) for e in eps.e_part | eps.p_part):
        return False
    spanning = nx.Graph()
    spanning.add_nodes_from(host.vertices)
    spanning.add_edges_from(eps.e_part | eps.p_part)
    if not nx.is_connected(spanning):
        return False
    eulerian = nx.Graph(sorted(eps.e_part))
    if any(d % 2 for _, d in eulerian.degree):
        return False
    forest = nx.Graph(sorted(eps.p_part))
    if forest.number_of_edges() and (
        not nx.is_forest(forest) or max(d for _, d in forest.degree) > 2
    ):
        return False
    if cycle is not None and not set(tour_edges(cycle, Kind.CYCLE)) <= eps.e_part:
        return False
    if w is not None and any(forest.degree(v) > 1 for v in w if v in forest):
        return False
    return True


def _linear_forest_completion(
    g: Graph, e_part: frozenset[Edge], w: frozenset[int]
) -> frozenset[Edge] | None:
    """Connect the components of ``E`` with a linear forest avoiding ``E``.

    Only edges joining distinct components are tried, so the forest stays
    acyclic; the search is exhaustive over such edges.
    """
    component = {}
    union = nx.Graph()
    union.add_nodes_from(g.vertices)
    union.add_edges_from(e_part)
    for i, part in enumerate(nx.connected_components(union)):
        for v in part:
            component[v] = i
    free = [e for e in g.edges if e not in e_part]
    degree = dict.fromkeys(g.vertices, 0)
    chosen = []

    def cap(v: int) -> int:
        return 1 if v in w else 2

    def grow(labels: dict[int, int]) -> bool:
        root = labels[0]
        if all(label == root for label in labels.values()):
            return True
        for u, v in free:
            if (labels[u] == root) == (labels[v] == root):
                continue
            if degree[u] >= cap(u) or degree[v] >= cap(v):
                continue
            merged_from = labels[v] if labels[u] == root else labels[u]
            merged = {
                x: root if label == merged_from else label for x, label in labels.items()
            }
            degree[u] += 1
            degree[v] += 1
            chosen.append((u, v))
            if grow(merged):
                return True
            chosen.pop()
            degree[u] -= 1
            degree[v] -= 1
        return False

    if grow(component):
        return frozenset(chosen)
    return None


def _even_subgraphs(g: Graph, avoid: frozenset[Edge]) -> Iterator[frozenset[Edge]]:
    """Yield even subgraphs of ``G - avoid``: empty first, then greedy unions of disjoint cycles, then the whole cycle space."""
    rest = nx.Graph()
    rest.add_nodes_from(g.vertices)
    rest.add_edges_from(e for e in g.edges if e not in avoid)
    yield frozenset()
    greedy = frozenset()
    for cycle in sorted(nx.simple_cycles(rest), key=lambda c: (len(c), sorted(c))):
        edges = frozenset(tour_edges(cycle, Kind.CYCLE))
        if len(cycle) >= 3 and not edges & greedy:
            greedy |= edges
            yield greedy
    basis = [frozenset(tour_edges(c, Kind.CYCLE)) for c in nx.cycle_basis(rest)]
    for size in range(1, len(basis) + 1):
        for combo in itertools.combinations(basis, size):
            total = frozenset()
            for cycle in combo:
                total ^= cycle
            yield total


def find_eps_with_sound_cycle(g: Graph, k: Sequence[int], w: Iterable[int]) -> EPSGraph:
    """Find an EPS-graph whose eulerian part contains ``K`` and whose forest has degree at most 1 on ``W``.

    :param g: a 2-block
    :param k: a W-sound cycle of ``g``
    :param w: five distinct vertices
    :raise PreconditionError: if ``K`` is not W-sound
    :raise TheoremFinding: if no EPS-graph exists
    """
    _check_host(g)
    chosen = _check_w(g, w)
    report = is_w_sound(g, k, chosen)
    if not report.sound:
        msg = f"Cycle {report.cycle} is not W-sound for W={sorted(chosen)}"
        raise PreconditionError(msg)
    _, cycle_edges = _cycle_vertices_and_edges(g, k)
    for extra in _even_subgraphs(g, cycle_edges):
        e_part = cycle_edges | extra
        p_part = _linear_forest_completion(g, e_part, chosen)
        if p_part is None:
            continue
        eps = EPSGraph(host=g, e_part=e_part, p_part=p_part)
        if validate_eps(eps, cycle=k, w=chosen):
            _logger.debug("EPS-graph with |E|=%s |P|=%s", len(e_part), len(p_part))
            return eps
    _logger.error("No EPS-graph for K=%s W=%s in %s", tuple(k), sorted(chosen), g.edges)
    instance = f"edges={list(g.edges)} K={tuple(k)} W={sorted(chosen)}"
    raise TheoremFinding("EPS-graph theorem", instance)


def choose_fifth_vertex(g: Graph, w4: Iterable[int], k: Sequence[int]) -> int:
    """Extend four vertices to a five-vertex ``W`` relative to a cycle ``K``.

    With all four on ``K`` any other vertex works; with three, a vertex of
    ``K``; with two, a 2-valent vertex of ``K``. The smallest eligible id is taken.

    :raise PreconditionError: if fewer than two of ``w4`` lie on ``K`` or no
        eligible vertex exists
    """
    base = frozenset(w4)
    if len(base) != 4:
        msg = f"Expected four distinct vertices, got {sorted(base)}"
        raise PreconditionError(msg)
    on_cycle = frozenset(k)
    hits = len(base & on_cycle)
    if hits == 4:
        pool = set(g.vertices) - base
    elif hits == 3:
        pool = on_cycle - base
    elif hits == 2:
        pool = {v for v in on_cycle - base if g.adj[v].bit_count() == 2}
    else:
        pool = set()
    if not pool:
        msg = f"No fifth vertex for {sorted(base)} on cycle {tuple(k)}"
        raise PreconditionError(msg)
    return min(pool)
