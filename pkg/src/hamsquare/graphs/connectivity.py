"""Compute blocks, cutvertices, blockchains and the structural predicates on them.

A block is either a 2-block (a maximal 2-connected subgraph) or a bridge. Blocks
are kept as vertex sets; :func:`block_graph` materializes the induced subgraph
together with the global-to-local relabeling.
"""

import itertools
import logging
from typing import NamedTuple

import networkx as nx

from hamsquare.errors import PreconditionError, TheoremFinding
from hamsquare.graphs.graph import (
    Edge,
    Graph,
    delete_edges,
    delete_vertices,
    induced_subgraph,
    to_networkx,
)

_logger = logging.getLogger(__name__)


class BlockDecomposition(NamedTuple):
    """Describe the blocks of a connected graph and its block-cutvertex tree.

    ``bc_tree`` nodes are ``("B", i)`` for ``blocks[i]`` and ``("C", v)`` for
    cutvertex ``v``.
    """

    blocks: tuple[frozenset[int], ...]
    cutvertices: frozenset[int]
    bc_tree: nx.Graph


class Blockchain(NamedTuple):
    """Describe a graph whose block-cutvertex tree is a path.

    ``cutvertices[i]`` is shared by ``blocks[i]`` and ``blocks[i + 1]``.
    """

    blocks: tuple[frozenset[int], ...]
    cutvertices: tuple[int, ...]
    trivial: bool


def _require_connected(g: Graph) -> nx.Graph:
    nx_graph = to_networkx(g)
    if g.n == 0 or not nx.is_connected(nx_graph):
        msg = "Block decomposition requires a connected graph"
        raise PreconditionError(msg)
    return nx_graph


def cut_vertices(g: Graph) -> frozenset[int]:
    """Get the cutvertices of a connected graph.

    :raise PreconditionError: if ``g`` is disconnected
    """
    return frozenset(nx.articulation_points(_require_connected(g)))


def blocks(g: Graph) -> BlockDecomposition:
    """Decompose a connected graph into blocks.

    Blocks are sorted by their smallest vertex, then lexicographically, so the
    ``B`` indices are reproducible. A single vertex is one trivial block.

    :raise PreconditionError: if ``g`` is disconnected
    """
    nx_graph = _require_connected(g)
    if g.n == 1:
        found = [frozenset({0})]
    else:
        found = [frozenset(c) for c in nx.biconnected_components(nx_graph)]
    found.sort(key=sorted)
    cuts = frozenset(nx.articulation_points(nx_graph))
    tree = nx.Graph()
    for i, block in enumerate(found):
        tree.add_node(("B", i))
        for c in sorted(block & cuts):
            tree.add_edge(("B", i), ("C", c))
    return BlockDecomposition(blocks=tuple(found), cutvertices=cuts, bc_tree=tree)


def endblocks(decomposition: BlockDecomposition) -> tuple[frozenset[int], ...]:
    """Get the blocks that are leaves of the block-cutvertex tree.

    A graph with a single block has that block as its only endblock.
    """
    if len(decomposition.blocks) == 1:
        return decomposition.blocks
    return tuple(
        block
        for i, block in enumerate(decomposition.blocks)
        if decomposition.bc_tree.degree(("B", i)) == 1
    )


def is_endblock(decomposition: BlockDecomposition, block: frozenset[int]) -> bool:
    """Check whether ``block`` is one of the decomposition's endblocks."""
    return block in endblocks(decomposition)


def block_graph(g: Graph, block: frozenset[int]) -> tuple[Graph, dict[int, int]]:
    """Materialize a block as a graph with the global-to-local relabeling."""
    return induced_subgraph(g, block)


def vertex_connectivity(g: Graph) -> int:
    """Compute ``kappa(G)`` by brute-force separator search.

    The smallest vertex set whose deletion disconnects ``g`` or leaves a single
    vertex. ``kappa(K_n) = n - 1`` and disconnected graphs have ``kappa = 0``.
    """
    if g.n <= 1:
        return 0
    if not nx.is_connected(to_networkx(g)):
        return 0
    for size in range(1, g.n - 1):
        for separator in itertools.combinations(g.vertices, size):
            rest, _ = delete_vertices(g, separator)
            if not nx.is_connected(to_networkx(rest)):
                return size
    return g.n - 1


def is_two_block(g: Graph) -> bool:
    """Check for a 2-block: at least three vertices and ``kappa >= 2``."""
    return g.n >= 3 and nx.is_biconnected(to_networkx(g))


def as_blockchain(g: Graph) -> Blockchain | None:
    """Order the blocks of ``g`` along its block-cutvertex path.

    The endblock whose least inner vertex is smallest becomes ``B_1``.

    :param g: connected graph
    :return: the blockchain, or ``None`` if the block-cutvertex tree is not a path
    :raise PreconditionError: if ``g`` is disconnected
    """
    decomposition = blocks(g)
    tree = decomposition.bc_tree
    if len(decomposition.blocks) == 1:
        return Blockchain(blocks=decomposition.blocks, cutvertices=(), trivial=True)
    if any(d > 2 for _, d in tree.degree):
        return None
    cuts = decomposition.cutvertices
    ends = [i for i in range(len(decomposition.blocks)) if tree.degree(("B", i)) == 1]
    start = min(ends, key=lambda i: min(decomposition.blocks[i] - cuts))
    path = nx.shortest_path(tree, ("B", start), ("B", (set(ends) - {start}).pop()))
    return Blockchain(
        blocks=tuple(decomposition.blocks[node[1]] for node in path[0::2]),
        cutvertices=tuple(node[1] for node in path[1::2]),
        trivial=False,
    )


def inner_vertices(chain: Blockchain) -> frozenset[int]:
    """Get the vertices of a blockchain that are not cutvertices."""
    return frozenset().union(*chain.blocks) - set(chain.cutvertices)


def d_edge_set(g: Graph) -> frozenset[Edge]:
    """Get ``D(G)``, the edges whose endpoints both have degree at least 3."""
    return frozenset(
        (u, v) for u, v in g.edges if g.adj[u].bit_count() >= 3 and g.adj[v].bit_count() >= 3
    )


def is_dt_graph(g: Graph) -> bool:
    """Check that every edge is incident to a vertex of degree 2."""
    return not d_edge_set(g)


def is_edge_critical_block(g: Graph) -> bool:
    """Check ``kappa(G) = 2`` and ``kappa(G - e) = 1`` for every edge ``e``."""
    if not is_two_block(g) or vertex_connectivity(g) != 2:
        return False
    return all(
        not nx.is_biconnected(to_networkx(delete_edges(g, [e]))) for e in g.edges
    )


def _has_dt_two_block_end(g: Graph, chain: Blockchain) -> bool:
    for end in (chain.blocks[0], chain.blocks[-1]):
        local, _ = block_graph(g, end)
        if is_two_block(local) and is_dt_graph(local):
            return True
    return False


def find_reducing_edge(g: Graph) -> Edge:
    """Find ``f`` in ``D(G)`` such that ``G - f`` has a DT endblock.

    Every candidate in ``D(G)`` is tried in sorted order; the first success is
    returned.

    :param g: an edge-critical block that is not a DT-graph
    :return: the edge ``f``
    :raise PreconditionError: if ``g`` is not edge-critical or is already DT
    :raise TheoremFinding: if no candidate works
    """
    if not is_edge_critical_block(g):
        msg = "Reducing edge search requires an edge-critical block"
        raise PreconditionError(msg)
    candidates = sorted(d_edge_set(g))
    if not candidates:
        msg = "Graph is a DT-graph; no reducing edge exists"
        raise PreconditionError(msg)
    for f in candidates:
        reduced = delete_edges(g, [f])
        chain = as_blockchain(reduced)
        if chain is None or chain.trivial:
            _logger.debug("G - %s is not a non-trivial blockchain", f)
            continue
        if _has_dt_two_block_end(reduced, chain):
            return f
    _logger.error("No edge of D(G) reduces %s", g.edges)
    raise TheoremFinding("reducing edge theorem", f"edges={list(g.edges)}")
