"""Search exhaustively for hamiltonian cycles and paths in ``G^2`` with prescribed edges of ``G``.

A query names a multiset of *slots*: each slot is a vertex that needs its own
edge of ``G`` on the tour, and all chosen edges must be pairwise distinct. The
H_k, F_k and strong F_3 properties and the two anchored cycle theorems are all
slot queries:

* H_k: one slot per ``x_i`` on a cycle
* F_k: one slot per ``x_i, i >= 3`` on an ``x_1 x_2`` path
* strong F_3: slots ``x_3`` and the chosen endpoint ``x_i``
* both cycle edges at ``v`` in ``G``: two slots at ``v``

The search enumerates hamiltonian tours of ``G^2`` and accepts a tour when a
bipartite matching saturates the slots. It is exhaustive, so ``None`` is a proof
of absence; a timeout raises instead of returning ``None``.

..code-block:: pycon

    >>> from hamsquare.graphs.graph import cycle_graph
    >>> cert = find_h_cycle(cycle_graph(5), [0, 1, 2, 3])
    >>> check_certificate(cycle_graph(5), h_spec([0, 1, 2, 3]), cert)
    True
"""

import itertools
import logging
import time
from collections import Counter
from collections.abc import Iterable, Iterator, Sequence
from enum import StrEnum
from typing import NamedTuple

import networkx as nx

from hamsquare.errors import PreconditionError, SearchTimeoutError, SolverCapError
from hamsquare.graphs.connectivity import as_blockchain, inner_vertices, is_two_block
from hamsquare.graphs.graph import Edge, Graph, edge, iter_bits, square, to_networkx

_logger = logging.getLogger(__name__)

SOLVER_CAP = 64
DEFAULT_TIMEOUT = 10.0


class Kind(StrEnum):
    """Constrain certificate shapes."""

    CYCLE = "cycle"
    PATH = "path"


class AnchorCase(StrEnum):
    """Record how a blockchain cycle treats an anchor vertex."""

    TWO_BLOCK = "two_block"
    BRIDGE = "bridge"


class Witness(NamedTuple):
    """Assign a distinct edge of ``G`` lying on the tour to a slot vertex."""

    vertex: int
    edge: Edge


class Certificate(NamedTuple):
    """Define a hamiltonian cycle or path of ``G^2`` with witness edges of ``G``.

    Cycles close implicitly from the last vertex back to the first.
    """

    kind: Kind
    order: tuple[int, ...]
    witnesses: tuple[Witness, ...]
    anchor_cases: tuple[tuple[int, AnchorCase], ...] = ()


class ConstraintSpec(NamedTuple):
    """Define the constraints a certificate must satisfy.

    :param kind: cycle or path
    :param required: vertices ``x_i`` that each need a distinct edge of ``G``
    :param endpoints: ``(x_1, x_2)`` for path queries
    :param strong_index: ``1`` or ``2`` to additionally require an edge of ``G``
        at ``endpoints[strong_index - 1]``
    :param double_anchors: vertices whose two tour edges must both lie in ``G``
    :param single_anchors: vertices with at least one tour edge in ``G``
    """

    kind: Kind
    required: tuple[int, ...] = ()
    endpoints: tuple[int, int] | None = None
    strong_index: int | None = None
    double_anchors: tuple[int, ...] = ()
    single_anchors: tuple[int, ...] = ()

    def slots(self) -> tuple[int, ...]:
        """Flatten every constraint into the multiset of slot vertices."""
        slots = list(self.required)
        if self.strong_index is not None and self.endpoints is not None:
            slots.append(self.endpoints[self.strong_index - 1])
        for v in self.double_anchors:
            slots += [v, v]
        slots += self.single_anchors
        return tuple(slots)


class CheckReason(StrEnum):
    """Explain the verdict of the certificate checker."""

    OK = "ok"
    WRONG_KIND = "wrong_kind"
    NOT_A_PERMUTATION = "not_a_permutation"
    TOO_SMALL = "too_small"
    FAR_PAIR = "far_pair"
    BAD_ENDPOINTS = "bad_endpoints"
    WITNESS_MISMATCH = "witness_mismatch"
    WITNESS_NOT_IN_GRAPH = "witness_not_in_graph"
    WITNESS_NOT_INCIDENT = "witness_not_incident"
    WITNESS_NOT_ON_TOUR = "witness_not_on_tour"
    WITNESS_REPEATED = "witness_repeated"


class SearchBudget:
    """Count search nodes and enforce a wall-clock deadline.

    :param timeout: seconds allowed from construction, ``None`` for no limit
    """

    _CLOCK_INTERVAL = 1024

    def __init__(self, timeout: float | None = DEFAULT_TIMEOUT) -> None:
        """Initialize budget and start its clock."""
        self.timeout = timeout
        self.nodes = 0
        self._deadline = None if timeout is None else time.monotonic() + timeout

    def tick(self) -> None:
        """Account for one search node.

        :raise SearchTimeoutError: if the deadline has passed
        """
        self.nodes += 1
        if (
            self._deadline is not None
            and self.nodes % self._CLOCK_INTERVAL == 0
            and time.monotonic() > self._deadline
        ):
            msg = f"Search exceeded {self.timeout}s after {self.nodes} nodes"
            raise SearchTimeoutError(msg)


def h_spec(required: Iterable[int]) -> ConstraintSpec:
    """Build the constraint of the H_k property for the given ``x_i``."""
    return ConstraintSpec(kind=Kind.CYCLE, required=tuple(required))


def f_spec(x1: int, x2: int, required: Iterable[int]) -> ConstraintSpec:
    """Build the constraint of the F_k property for endpoints and ``x_3..x_k``."""
    return ConstraintSpec(kind=Kind.PATH, required=tuple(required), endpoints=(x1, x2))


def strong_f3_spec(x1: int, x2: int, x3: int, i: int) -> ConstraintSpec:
    """Build the strong F_3 constraint."""
    return ConstraintSpec(
        kind=Kind.PATH, required=(x3,), endpoints=(x1, x2), strong_index=i
    )


def thm3_spec(v: int, w: int) -> ConstraintSpec:
    """Build the constraint of the two-anchor cycle theorem for 2-blocks."""
    return ConstraintSpec(kind=Kind.CYCLE, double_anchors=(v,), single_anchors=(w,))


def canonical_order(order: Sequence[int], kind: Kind) -> tuple[int, ...]:
    """Rotate a cycle to start at its minimum and orient it toward the smaller neighbor.

    Paths are returned unchanged.
    """
    if kind is Kind.PATH or len(order) < 3:
        return tuple(order)
    start = order.index(min(order))
    rotated = list(order[start:]) + list(order[:start])
    if rotated[-1] < rotated[1]:
        rotated = [rotated[0], *reversed(rotated[1:])]
    return tuple(rotated)


def tour_edges(order: Sequence[int], kind: Kind) -> list[Edge]:
    """List the edges of ``G^2`` used by a tour, normalized."""
    pairs = [edge(u, v) for u, v in itertools.pairwise(order)]
    if kind is Kind.CYCLE and len(order) >= 3:
        pairs.append(edge(order[-1], order[0]))
    return pairs


def match_witnesses(
    g: Graph, slots: Sequence[int], edges: Iterable[Edge]
) -> tuple[Witness, ...] | None:
    """Choose pairwise distinct tour edges of ``G`` for the slots.

    :param g: host graph
    :param slots: slot vertices, repeats allowed
    :param edges: edges of the tour
    :return: witnesses sorted by vertex then edge, or ``None`` if no system of
        distinct representatives exists
    """
    if not slots:
        return ()
    g_edges = [e for e in edges if g.has_edge(*e)]
    options = {x: [e for e in g_edges if x in e] for x in set(slots)}
    counts = Counter(slots)
    if any(len(options[x]) < counts[x] for x in counts):
        return None
    bipartite = nx.Graph()
    slot_nodes = [("slot", i) for i in range(len(slots))]
    bipartite.add_nodes_from(slot_nodes)
    for i, x in enumerate(slots):
        bipartite.add_edges_from((("slot", i), ("edge", e)) for e in options[x])
    matching = nx.bipartite.hopcroft_karp_matching(bipartite, top_nodes=slot_nodes)
    if any(node not in matching for node in slot_nodes):
        return None
    return tuple(
        sorted(Witness(slots[i], matching[("slot", i)][1]) for i in range(len(slots)))
    )


def _validate(g: Graph, spec: ConstraintSpec) -> None:
    if g.n > SOLVER_CAP:
        msg = f"Exact search supports at most {SOLVER_CAP} vertices, got {g.n}"
        raise SolverCapError(msg)
    referenced = [*spec.slots(), *(spec.endpoints or ())]
    for v in referenced:
        if not 0 <= v < g.n:
            msg = f"Vertex {v} is not in 0..{g.n - 1}"
            raise PreconditionError(msg)
    if len(set(spec.required)) != len(spec.required):
        msg = f"Required vertices must be distinct: {spec.required}"
        raise PreconditionError(msg)
    if spec.kind is Kind.PATH:
        if spec.endpoints is None or spec.endpoints[0] == spec.endpoints[1]:
            msg = f"Path queries need two distinct endpoints, got {spec.endpoints}"
            raise PreconditionError(msg)
        if spec.strong_index not in (None, 1, 2):
            msg = f"Strong index must be 1 or 2, got {spec.strong_index}"
            raise PreconditionError(msg)


class _TourSearch:
    """Grow a tour from both ends of a partial path, always extending the end with fewer options.

    With ``lexicographic`` set, only the start end grows and candidates are
    tried in increasing order, so tours come out in lexicographic order.
    """

    def __init__(
        self, g: Graph, spec: ConstraintSpec, budget: SearchBudget, lexicographic: bool = False
    ) -> None:
        self.g = g
        self.lexicographic = lexicographic
        self.spec = spec
        self.budget = budget
        self.sq = square(g).adj
        self.slots = spec.slots()
        self.need = Counter(self.slots)
        self.full = (1 << g.n) - 1
        self.is_cycle = spec.kind is Kind.CYCLE

    def _g_edges_at(self, v: int, tour_neighbors: Iterable[int]) -> int:
        return sum(1 for u in tour_neighbors if self.g.adj[v] >> u & 1)

    def _slot_feasible(self, v: int, fixed: list[int], capacity: int) -> bool:
        need = self.need.get(v, 0)
        if not need:
            return True
        return self._g_edges_at(v, fixed) + capacity - len(fixed) >= need

    def _dead_end(self, unvisited: int, ends: int) -> bool:
        reachable = unvisited | ends
        return any((self.sq[w] & reachable).bit_count() < 2 for w in iter_bits(unvisited))

    def _finish(self, left: list[int], right: list[int]) -> Certificate | None:
        if self.is_cycle:
            order = left + right[:0:-1]
        else:
            order = left + right[::-1]
        witnesses = match_witnesses(self.g, self.slots, tour_edges(order, self.spec.kind))
        if witnesses is None:
            return None
        kind = self.spec.kind
        return Certificate(kind=kind, order=canonical_order(order, kind), witnesses=witnesses)

    def _closes_start(self, left: list[int], right: list[int]) -> list[int] | None:
        """Return the fixed tour neighbors of the start vertex once it is settled."""
        if self.is_cycle:
            if len(left) >= 2 and len(right) >= 2:
                return [left[1], right[1]]
            return None
        return None

    def _extend(
        self, left: list[int], right: list[int], visited: int
    ) -> Iterator[Certificate]:
        self.budget.tick()
        head_l, head_r = left[-1], right[-1]
        if visited == self.full:
            if self.sq[head_l] >> head_r & 1:
                found = self._finish(left, right)
                if found is not None:
                    yield found
            return
        unvisited = self.full & ~visited
        ends = (1 << head_l) | (1 << head_r)
        if self._dead_end(unvisited, ends):
            return
        options_l = self.sq[head_l] & unvisited
        options_r = self.sq[head_r] & unvisited
        if self.lexicographic:
            side, ranked = left, list(iter_bits(options_l))
        else:
            if head_l == head_r or options_l.bit_count() <= options_r.bit_count():
                side, options = left, options_l
            else:
                side, options = right, options_r
            ranked = sorted(
                iter_bits(options), key=lambda v: ((self.sq[v] & unvisited).bit_count(), v)
            )
        for v in ranked:
            previous = side[-1]
            before = side[-2] if len(side) >= 2 else None
            if before is not None:
                settled = [before, v]
                if not self._slot_feasible(previous, settled, 2):
                    continue
            elif not self.is_cycle and not self._slot_feasible(previous, [v], 1):
                continue
            if not self._slot_feasible(v, [previous], 2):
                continue
            side.append(v)
            start_neighbors = self._closes_start(left, right)
            if start_neighbors is None or self._slot_feasible(left[0], start_neighbors, 2):
                yield from self._extend(left, right, visited | (1 << v))
            side.pop()

    def run(self) -> Iterator[Certificate]:
        if self.is_cycle:
            if self.g.n < 3:
                return
            start = 0
            yield from self._extend([start], [start], 1 << start)
        else:
            x1, x2 = self.spec.endpoints
            yield from self._extend([x1], [x2], (1 << x1) | (1 << x2))


def iter_certificates(
    g: Graph, spec: ConstraintSpec, budget: SearchBudget | None = None
) -> Iterator[Certificate]:
    """Enumerate one certificate per hamiltonian tour of ``G^2`` meeting ``spec``.

    Tours are deduplicated by canonical order. The witness assignment reported
    for a tour is the one found by the matching, not every possible one.

    :raise SolverCapError: if ``g`` has more than ``SOLVER_CAP`` vertices
    :raise PreconditionError: if ``spec`` references invalid vertices
    :raise SearchTimeoutError: if the budget runs out
    """
    _validate(g, spec)
    budget = budget if budget is not None else SearchBudget()
    seen = set()
    for cert in _TourSearch(g, spec, budget).run():
        if cert.order in seen:
            continue
        seen.add(cert.order)
        yield cert


def search(
    g: Graph, spec: ConstraintSpec, budget: SearchBudget | None = None
) -> Certificate | None:
    """Find the lexicographically least canonical certificate for ``spec`` or prove there is none.

    Existence is decided by the two-ended search; a certificate then found is
    replaced by the first tour of an increasing-order search from the start.

    :return: a certificate, or ``None`` after exhausting the search space
    :raise SearchTimeoutError: if the budget runs out before a decision
    """
    budget = budget if budget is not None else SearchBudget()
    found = next(iter_certificates(g, spec, budget), None)
    if found is not None:
        found = next(_TourSearch(g, spec, budget, lexicographic=True).run(), found)
    _logger.debug(
        "Search %s on %s vertices: %s after %s nodes",
        spec,
        g.n,
        "found" if found else "exhausted",
        budget.nodes,
    )
    return found


def explain_certificate(g: Graph, spec: ConstraintSpec, cert: Certificate) -> CheckReason:
    """Validate a certificate from first principles.

    Distances are recomputed with breadth-first search on ``g``; nothing from
    the solver is reused.

    :return: ``CheckReason.OK`` or the first violated condition
    """
    if cert.kind != spec.kind:
        return CheckReason.WRONG_KIND
    order = list(cert.order)
    if sorted(order) != list(range(g.n)):
        return CheckReason.NOT_A_PERMUTATION
    if (spec.kind is Kind.CYCLE and g.n < 3) or (spec.kind is Kind.PATH and g.n < 2):
        return CheckReason.TOO_SMALL
    nx_graph = to_networkx(g)
    pairs = list(itertools.pairwise(order))
    if spec.kind is Kind.CYCLE:
        pairs.append((order[-1], order[0]))
    for u, v in pairs:
        if v not in nx.single_source_shortest_path_length(nx_graph, u, cutoff=2):
            return CheckReason.FAR_PAIR
    if spec.kind is Kind.PATH and {order[0], order[-1]} != set(spec.endpoints or ()):
        return CheckReason.BAD_ENDPOINTS
    if Counter(w.vertex for w in cert.witnesses) != Counter(spec.slots()):
        return CheckReason.WITNESS_MISMATCH
    on_tour = {frozenset(p) for p in pairs}
    used = set()
    for w in cert.witnesses:
        u, v = w.edge
        if not nx_graph.has_edge(u, v):
            return CheckReason.WITNESS_NOT_IN_GRAPH
        if w.vertex not in (u, v):
            return CheckReason.WITNESS_NOT_INCIDENT
        if frozenset((u, v)) not in on_tour:
            return CheckReason.WITNESS_NOT_ON_TOUR
        if frozenset((u, v)) in used:
            return CheckReason.WITNESS_REPEATED
        used.add(frozenset((u, v)))
    return CheckReason.OK


def check_certificate(g: Graph, spec: ConstraintSpec, cert: Certificate) -> bool:
    """Return whether ``cert`` is a valid certificate of ``spec`` in ``g``."""
    return explain_certificate(g, spec, cert) is CheckReason.OK


def _require_distinct(*vertices: int) -> None:
    if len(set(vertices)) != len(vertices):
        msg = f"Vertices must be distinct: {vertices}"
        raise PreconditionError(msg)


def find_h_cycle(
    g: Graph, x: Sequence[int], budget: SearchBudget | None = None
) -> Certificate | None:
    """Find a hamiltonian cycle of ``G^2`` with distinct edges ``x_i y_i`` of ``G``.

    :param g: host graph
    :param x: the ``k`` distinct vertices ``x_1..x_k``
    :param budget: node counter and deadline, defaults to ``DEFAULT_TIMEOUT``
    :return: a cycle certificate, or ``None`` after exhaustive search
    :raise PreconditionError: if ``x`` has repeats or more than ``n`` vertices
    """
    if len(x) > g.n:
        msg = f"Cannot prescribe {len(x)} vertices in a graph on {g.n}"
        raise PreconditionError(msg)
    _require_distinct(*x)
    return search(g, h_spec(x), budget)


def find_f_path(
    g: Graph, x1: int, x2: int, r: Sequence[int], budget: SearchBudget | None = None
) -> Certificate | None:
    """Find an ``x1 x2``-hamiltonian path of ``G^2`` with distinct edges of ``G`` at each ``r``.

    :raise PreconditionError: if the endpoints coincide or ``r`` repeats or
        contains an endpoint
    """
    _require_distinct(x1, x2, *r)
    return search(g, f_spec(x1, x2, r), budget)


def find_strong_f3_path(
    g: Graph, x1: int, x2: int, x3: int, i: int, budget: SearchBudget | None = None
) -> Certificate | None:
    """Find a strong F_3 ``x1 x2``-hamiltonian path.

    The path carries distinct edges ``x_3 z_3`` and ``x_i z_i`` of ``G``.

    :raise PreconditionError: if the vertices repeat or ``i`` is not 1 or 2
    """
    _require_distinct(x1, x2, x3)
    if i not in (1, 2):
        msg = f"Strong F_3 index must be 1 or 2, got {i}"
        raise PreconditionError(msg)
    return search(g, strong_f3_spec(x1, x2, x3, i), budget)


def find_thm3_cycle(
    g: Graph, v: int, w: int, budget: SearchBudget | None = None
) -> Certificate | None:
    """Find a hamiltonian cycle of ``G^2`` with both edges at ``v`` and one edge at ``w`` in ``G``.

    The three edges are distinct, which is only a real requirement when
    ``vw`` is an edge of ``G``.

    :raise PreconditionError: if ``g`` is not a 2-block or ``v == w``
    """
    if not is_two_block(g):
        msg = "Anchored cycle search requires a 2-block"
        raise PreconditionError(msg)
    _require_distinct(v, w)
    return search(g, thm3_spec(v, w), budget)


def blockchain_anchor_cases(g: Graph, u1: int, u2: int) -> dict[int, AnchorCase]:
    """Classify the anchors of a blockchain cycle query.

    :raise PreconditionError: if ``g`` is not a blockchain or the anchors are not
        inner vertices of different endblocks
    """
    chain = as_blockchain(g)
    if chain is None:
        msg = "Graph is not a blockchain"
        raise PreconditionError(msg)
    _require_distinct(u1, u2)
    inner = inner_vertices(chain)
    if u1 not in inner or u2 not in inner:
        msg = f"Anchors {u1}, {u2} must be inner vertices"
        raise PreconditionError(msg)
    first, last = chain.blocks[0], chain.blocks[-1]
    if not chain.trivial and not (
        (u1 in first and u2 in last) or (u1 in last and u2 in first)
    ):
        msg = f"Anchors {u1}, {u2} must lie in different endblocks"
        raise PreconditionError(msg)
    cases = {}
    for u in (u1, u2):
        block = first if u in first else last
        cases[u] = AnchorCase.TWO_BLOCK if len(block) >= 3 else AnchorCase.BRIDGE
    return cases


def find_thm4_cycle(
    g: Graph, u1: int, u2: int, budget: SearchBudget | None = None
) -> Certificate | None:
    """Find a hamiltonian cycle of a blockchain square anchored at ``u1`` and ``u2``.

    An anchor in a 2-block gets both tour edges in ``G``; an anchor in a bridge
    endblock gets exactly one. The certificate records which case applied.

    :raise PreconditionError: see :func:`blockchain_anchor_cases`
    """
    cases = blockchain_anchor_cases(g, u1, u2)
    spec = ConstraintSpec(
        kind=Kind.CYCLE,
        double_anchors=tuple(u for u in (u1, u2) if cases[u] is AnchorCase.TWO_BLOCK),
        single_anchors=tuple(u for u in (u1, u2) if cases[u] is AnchorCase.BRIDGE),
    )
    found = search(g, spec, budget)
    if found is None:
        return None
    edges = tour_edges(found.order, Kind.CYCLE)
    for u, case in cases.items():
        in_g = sum(1 for e in edges if u in e and g.has_edge(*e))
        if case is AnchorCase.BRIDGE and in_g != 1:
            _logger.warning(
                "Bridge anchor %s has %s tour edges in G; flagged for review", u, in_g
            )
    return found._replace(anchor_cases=tuple(sorted(cases.items())))


def thm4_spec(g: Graph, cert: Certificate) -> ConstraintSpec:
    """Rebuild the constraint a blockchain cycle certificate answers."""
    return ConstraintSpec(
        kind=Kind.CYCLE,
        double_anchors=tuple(u for u, c in cert.anchor_cases if c is AnchorCase.TWO_BLOCK),
        single_anchors=tuple(u for u, c in cert.anchor_cases if c is AnchorCase.BRIDGE),
    )


def f4_implies_h3_cycle(
    g: Graph, x: Sequence[int], budget: SearchBudget | None = None
) -> Certificate | None:
    """Build an H_3 cycle from an F_4 path closed by an edge of ``G``.

    Pick ``x_4`` outside ``x`` adjacent in ``G`` to some ``x_i``, find an
    ``x_i x_4``-hamiltonian path with edges at the other two vertices, and
    close it with ``x_i x_4``.

    :param x: three distinct vertices
    :return: cycle certificate, or ``None`` if no ``x_4`` exists or no path is found
    """
    _require_distinct(*x)
    if len(x) != 3:
        msg = f"Expected three vertices, got {len(x)}"
        raise PreconditionError(msg)
    for xi in x:
        others = [v for v in x if v != xi]
        for x4 in iter_bits(g.adj[xi]):
            if x4 in x:
                continue
            path = find_f_path(g, xi, x4, others, budget)
            if path is None:
                continue
            order = path.order if path.order[0] == xi else path.order[::-1]
            witnesses = tuple(sorted([*path.witnesses, Witness(xi, edge(xi, x4))]))
            return Certificate(
                kind=Kind.CYCLE,
                order=canonical_order(order, Kind.CYCLE),
                witnesses=witnesses,
            )
    return None


def has_witness_forest(g: Graph, slots: Sequence[int]) -> bool:
    """Check the degree condition any witness system must satisfy.

    Witness edges of a tour form a subgraph of the tour, so they have maximum
    degree 2 and contain no cycle shorter than ``n``. This is decided by
    backtracking over edge choices without looking at ``G^2``.

    :param g: host graph
    :param slots: slot vertices
    :return: ``False`` proves that no certificate exists for these slots
    """
    order = sorted(slots, key=lambda v: g.adj[v].bit_count())
    degree = Counter()
    chosen = []

    def acyclic_or_hamiltonian(edges: list[Edge]) -> bool:
        forest = nx.Graph(edges)
        cycles = nx.cycle_basis(forest)
        return not cycles or (len(cycles) == 1 and len(cycles[0]) == g.n)

    def assign(i: int) -> bool:
        if i == len(order):
            return acyclic_or_hamiltonian(chosen)
        x = order[i]
        for y in iter_bits(g.adj[x]):
            e = edge(x, y)
            if e in chosen or degree[x] >= 2 or degree[y] >= 2:
                continue
            chosen.append(e)
            degree[x] += 1
            degree[y] += 1
            if assign(i + 1):
                return True
            chosen.pop()
            degree[x] -= 1
            degree[y] -= 1
        return False

    return assign(0)
