"""Provide an immutable simple graph value type, its square, and elementary surgeries.

Vertices are the dense range ``0..n-1`` and adjacency is stored as one integer
bitmask per vertex. Every surgery returns a new value; those that renumber
vertices also return the old-to-new relabeling so certificates can be mapped
back to the original ids.

..code-block:: pycon

    >>> c5 = cycle_graph(5)
    >>> square(c5) == complete_graph(5)
    True
"""

from collections.abc import Iterable, Iterator
from typing import NamedTuple

import networkx as nx

from hamsquare.errors import InvalidVertexError

Edge = tuple[int, int]


def edge(u: int, v: int) -> Edge:
    """Normalize an unordered pair so the smaller id comes first."""
    return (u, v) if u < v else (v, u)


def iter_bits(mask: int) -> Iterator[int]:
    """Yield the positions of set bits in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(vertices: Iterable[int]) -> int:
    """Pack vertex ids into a bitmask."""
    mask = 0
    for v in vertices:
        mask |= 1 << v
    return mask


class Graph(NamedTuple):
    """Define simple undirected graph on vertices ``0..n-1``.

    Build instances with :meth:`from_edges`; calling the constructor directly
    skips validation.
    """

    n: int
    adj: tuple[int, ...]

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Edge]) -> "Graph":
        """Build a graph from a vertex count and an iterable of pairs.

        :param n: number of vertices
        :param edges: unordered pairs; duplicates collapse
        :return: validated graph
        :raise InvalidVertexError: if an endpoint is out of range or a pair is a loop
        """
        if n < 0:
            msg = f"Vertex count must be non-negative, got {n}"
            raise InvalidVertexError(msg)
        adj = [0] * n
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                msg = f"Edge ({u}, {v}) has an endpoint outside 0..{n - 1}"
                raise InvalidVertexError(msg)
            if u == v:
                msg = f"Loop at vertex {u} is not allowed in a simple graph"
                raise InvalidVertexError(msg)
            adj[u] |= 1 << v
            adj[v] |= 1 << u
        return cls(n=n, adj=tuple(adj))

    @property
    def edges(self) -> tuple[Edge, ...]:
        """Sorted edge list with the smaller endpoint first."""
        return tuple(
            (u, v) for u in range(self.n) for v in iter_bits(self.adj[u] >> (u + 1) << (u + 1))
        )

    @property
    def vertices(self) -> range:
        """Vertex ids."""
        return range(self.n)

    def has_edge(self, u: int, v: int) -> bool:
        """Return whether ``uv`` is an edge."""
        return 0 <= u < self.n and 0 <= v < self.n and bool(self.adj[u] >> v & 1)

    def number_of_edges(self) -> int:
        """Count edges."""
        return sum(a.bit_count() for a in self.adj) // 2


def _check_vertex(g: Graph, v: int) -> None:
    if not 0 <= v < g.n:
        msg = f"Vertex {v} is not in 0..{g.n - 1}"
        raise InvalidVertexError(msg)


def degree(g: Graph, v: int) -> int:
    """Get the degree of ``v``.

    :raise InvalidVertexError: if ``v`` is not a vertex of ``g``
    """
    _check_vertex(g, v)
    return g.adj[v].bit_count()


def neighbors(g: Graph, v: int) -> frozenset[int]:
    """Get the neighborhood ``N(v)``.

    :raise InvalidVertexError: if ``v`` is not a vertex of ``g``
    """
    _check_vertex(g, v)
    return frozenset(iter_bits(g.adj[v]))


def two_valent_vertices(g: Graph) -> frozenset[int]:
    """Get ``V_2(G)``, the set of vertices of degree 2."""
    return frozenset(v for v in g.vertices if g.adj[v].bit_count() == 2)


def square(g: Graph) -> Graph:
    """Join every pair of vertices at distance at most 2.

    :param g: any graph
    :return: ``G^2`` on the same vertex set
    """
    adj2 = []
    for v in g.vertices:
        reach = g.adj[v]
        for u in iter_bits(g.adj[v]):
            reach |= g.adj[u]
        adj2.append(reach & ~(1 << v))
    return Graph(n=g.n, adj=tuple(adj2))


def distance_at_most_two(g: Graph, u: int, v: int) -> bool:
    """Check whether distinct ``u`` and ``v`` are adjacent in ``G^2``.

    :raise InvalidVertexError: if either id is out of range
    """
    _check_vertex(g, u)
    _check_vertex(g, v)
    if u == v:
        return False
    return bool(g.adj[u] & (1 << v)) or bool(g.adj[u] & g.adj[v])


def delete_vertices(g: Graph, vertices: Iterable[int]) -> tuple[Graph, dict[int, int]]:
    """Delete vertices and renumber the survivors contiguously.

    :param g: host graph
    :param vertices: ids to delete
    :return: the smaller graph and the map from surviving old ids to new ids
    :raise InvalidVertexError: if a listed vertex is not in ``g``
    """
    removed = set(vertices)
    for v in removed:
        _check_vertex(g, v)
    relabel = {old: new for new, old in enumerate(v for v in g.vertices if v not in removed)}
    kept_edges = [
        (relabel[u], relabel[v]) for u, v in g.edges if u in relabel and v in relabel
    ]
    return Graph.from_edges(len(relabel), kept_edges), relabel


def induced_subgraph(g: Graph, vertices: Iterable[int]) -> tuple[Graph, dict[int, int]]:
    """Get ``G[S]`` renumbered contiguously, with the old-to-new map."""
    keep = set(vertices)
    for v in keep:
        _check_vertex(g, v)
    return delete_vertices(g, set(g.vertices) - keep)


def delete_edges(g: Graph, edges: Iterable[Edge]) -> Graph:
    """Delete edges; absent pairs are ignored.

    :raise InvalidVertexError: if an endpoint is not in ``g``
    """
    adj = list(g.adj)
    for u, v in edges:
        _check_vertex(g, u)
        _check_vertex(g, v)
        adj[u] &= ~(1 << v)
        adj[v] &= ~(1 << u)
    return Graph(n=g.n, adj=tuple(adj))


def add_edges(g: Graph, edges: Iterable[Edge]) -> Graph:
    """Add edges; present pairs are ignored.

    :raise InvalidVertexError: if an endpoint is not in ``g`` or a pair is a loop
    """
    return Graph.from_edges(g.n, [*g.edges, *edges])


def disjoint_union_with_cross_edges(g: Graph, m: int, edges: Iterable[Edge]) -> Graph:
    """Append ``m`` fresh vertices ``n..n+m-1`` and add ``edges``.

    The added edges may join old vertices, fresh vertices, or both.

    :raise InvalidVertexError: if an endpoint is outside ``0..n+m-1``
    """
    if m < 0:
        msg = f"Cannot append a negative number of vertices ({m})"
        raise InvalidVertexError(msg)
    return Graph.from_edges(g.n + m, [*g.edges, *edges])


def to_networkx(g: Graph) -> nx.Graph:
    """Convert to a ``networkx.Graph`` whose nodes are inserted in id order."""
    nx_graph = nx.Graph()
    nx_graph.add_nodes_from(g.vertices)
    nx_graph.add_edges_from(g.edges)
    return nx_graph


def from_networkx(nx_graph: nx.Graph) -> Graph:
    """Convert a ``networkx.Graph``, numbering nodes in their iteration order."""
    index = {node: i for i, node in enumerate(nx_graph.nodes)}
    return Graph.from_edges(
        len(index), ((index[u], index[v]) for u, v in nx_graph.edges if u != v)
    )


def cycle_graph(n: int) -> Graph:
    """Get ``C_n``."""
    return from_networkx(nx.cycle_graph(n))


def path_graph(n: int) -> Graph:
    """Get the path on ``n`` vertices."""
    return from_networkx(nx.path_graph(n))


def complete_graph(n: int) -> Graph:
    """Get ``K_n``."""
    return from_networkx(nx.complete_graph(n))


def complete_bipartite_graph(a: int, b: int) -> Graph:
    """Get ``K_{a,b}`` with the ``a`` side numbered first."""
    return from_networkx(nx.complete_bipartite_graph(a, b))


def wheel_graph(n: int) -> Graph:
    """Get the wheel on ``n`` vertices, hub ``0``."""
    return from_networkx(nx.wheel_graph(n))
