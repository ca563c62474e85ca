"""Build certificates and graphs explicitly instead of searching for them.

* blockchain path gluing from per-block F_4 and strong F_3 paths
* the endblock-to-path reduction and the five cycle surgeries that undo it
* the family of 2-blocks without the H_5 property

Glued and spliced certificates are always revalidated with the independent
checker before they are returned.
"""

import logging
import random
from collections.abc import Sequence
from typing import NamedTuple

from hamsquare.errors import InvalidCertificateError, PreconditionError, TheoremFinding
from hamsquare.graphs.connectivity import (
    as_blockchain,
    block_graph,
    is_two_block,
)
from hamsquare.graphs.graph import (
    Graph,
    delete_edges,
    delete_vertices,
    disjoint_union_with_cross_edges,
    edge,
    path_graph,
)
from hamsquare.search.oracle import (
    Certificate,
    ConstraintSpec,
    Kind,
    SearchBudget,
    Witness,
    canonical_order,
    check_certificate,
    find_f_path,
    find_h_cycle,
    find_strong_f3_path,
    find_thm3_cycle,
    h_spec,
    has_witness_forest,
    match_witnesses,
    search,
    tour_edges,
)

_logger = logging.getLogger(__name__)

DEFAULT_T = 3
BASE_CASES = (1, 2, 5, 7, 9)


class CounterexampleFamily(NamedTuple):
    """Define a 2-block extended by ``t`` vertices adjacent to exactly ``x1`` and ``x2``.

    The added vertices ``y_1..y_t`` get ids ``base.n .. base.n + t - 1``.
    """

    base: Graph
    x1: int
    x2: int
    t: int
    result: Graph

    @property
    def w(self) -> tuple[int, ...]:
        """Get the five vertices ``x1, x2, y1, y2, y3`` with no H_5 cycle."""
        n = self.base.n
        return (self.x1, self.x2, n, n + 1, n + 2)


class SurgeryAnchors(NamedTuple):
    """Locate the path ``x, a, b, y`` that replaced an endblock.

    Vertex fields are ids in the reduced graph. ``relabel`` maps surviving ids
    of the host to reduced ids and ``block`` holds the host ids of the
    replaced endblock.
    """

    x_prime: int
    x: int
    a: int
    b: int
    y: int
    relabel: dict[int, int]
    block: frozenset[int]


class SurgeryCase(NamedTuple):
    """Describe how a reduced-graph cycle traverses the replacement path.

    ``order`` is the cycle oriented and rotated so the case pattern starts at
    index 0. ``y_prime`` is set for cases 2 and 7.
    """

    case_id: int
    anchors: SurgeryAnchors
    order: tuple[int, ...]
    y_prime: int | None = None


class SurgeryResult(NamedTuple):
    """Return a host cycle certificate and whether the direct search fallback produced it.

    ``dropped`` lists surviving reduced-graph witnesses that a splice had to
    rematch onto other edges.
    """

    certificate: Certificate | None
    case_id: int | None
    fallback: bool
    dropped: tuple[Witness, ...] = ()


def blockchain_path_spec(
    c0: int, ck: int, u_list: Sequence[int | None], v_list: Sequence[int]
) -> ConstraintSpec:
    """Build the path constraint that a glued blockchain path answers.

    Slots may repeat at a cutvertex shared by consecutive blocks.
    """
    slots = tuple(u for u in u_list if u is not None) + tuple(v_list)
    return ConstraintSpec(kind=Kind.PATH, required=slots, endpoints=(c0, ck))


def _block_path(
    g: Graph,
    block: frozenset[int],
    start: int,
    end: int,
    u: int | None,
    v: int,
    budget: SearchBudget | None,
) -> Certificate:
    """Find the per-block path ``start -> end`` and express it in host ids."""
    local, relabel = block_graph(g, block)
    back = {new: old for old, new in relabel.items()}
    if local.n == 2:
        return Certificate(
            kind=Kind.PATH,
            order=(start, end),
            witnesses=(Witness(v, edge(start, end)),),
        )
    s, t = relabel[start], relabel[end]
    if v in (start, end):
        i = 1 if v == start else 2
        if u is None:
            spec = ConstraintSpec(kind=Kind.PATH, endpoints=(s, t), strong_index=i)
            found = search(local, spec, budget)
        else:
            found = find_strong_f3_path(local, s, t, relabel[u], i, budget)
    else:
        required = [relabel[v]] if u is None else [relabel[u], relabel[v]]
        found = find_f_path(local, s, t, required, budget)
    if found is None:
        _logger.error("No block path %s -> %s in block %s", start, end, sorted(block))
        raise TheoremFinding("blockchain path lemma", f"block={sorted(block)}")
    order = [back[i] for i in found.order]
    if order[0] != start:
        order.reverse()
    witnesses = tuple(
        Witness(back[w.vertex], edge(back[w.edge[0]], back[w.edge[1]]))
        for w in found.witnesses
    )
    return Certificate(kind=Kind.PATH, order=tuple(order), witnesses=witnesses)


def blockchain_path(
    g: Graph,
    c0: int,
    ck: int,
    u_list: Sequence[int | None],
    v_list: Sequence[int],
    budget: SearchBudget | None = None,
) -> Certificate:
    """Glue per-block paths into a ``c0 ck``-hamiltonian path of ``G^2``.

    Every 2-block contributes an F_4 path, or a strong F_3 path when ``v_i``
    is one of its interface vertices; a bridge contributes itself.

    :param g: non-trivial blockchain
    :param c0: non-cutvertex of the first block
    :param ck: non-cutvertex of the last block
    :param u_list: per block, a non-cutvertex or ``None``
    :param v_list: per block, a vertex different from ``u_i``
    :return: path certificate with distinct witness edges ``u_i u'_i`` and
        ``v_i v'_i`` inside each block
    :raise PreconditionError: if the choices violate the lemma's hypotheses
    :raise TheoremFinding: if a block path is missing
    :raise InvalidCertificateError: if the glued path fails the checker
    """
    chain = as_blockchain(g)
    if chain is None or chain.trivial:
        msg = "Blockchain path gluing requires a non-trivial blockchain"
        raise PreconditionError(msg)
    k = len(chain.blocks)
    if len(u_list) != k or len(v_list) != k:
        msg = f"Expected {k} entries in u_list and v_list"
        raise PreconditionError(msg)
    cuts = set(chain.cutvertices)
    interfaces = [c0, *chain.cutvertices, ck]
    if c0 not in chain.blocks[0] or c0 in cuts or ck not in chain.blocks[-1] or ck in cuts:
        msg = f"Endpoints {c0}, {ck} must be non-cutvertices of the first and last blocks"
        raise PreconditionError(msg)
    if u_list[0] == c0 or u_list[-1] == ck:
        msg = "u_1 must differ from c0 and u_k from ck"
        raise PreconditionError(msg)
    for i, (block, u, v) in enumerate(zip(chain.blocks, u_list, v_list, strict=True)):
        if v not in block or v == u:
            msg = f"v_{i + 1} = {v} must be a vertex of block {i + 1} other than u_{i + 1}"
            raise PreconditionError(msg)
        if u is not None and (u not in block or u in cuts):
            msg = f"u_{i + 1} = {u} must be a non-cutvertex of block {i + 1}"
            raise PreconditionError(msg)
    order = [c0]
    witnesses = []
    for i, block in enumerate(chain.blocks):
        piece = _block_path(
            g, block, interfaces[i], interfaces[i + 1], u_list[i], v_list[i], budget
        )
        order.extend(piece.order[1:])
        witnesses.extend(piece.witnesses)
    cert = Certificate(kind=Kind.PATH, order=tuple(order), witnesses=tuple(sorted(witnesses)))
    if not check_certificate(g, blockchain_path_spec(c0, ck, u_list, v_list), cert):
        _logger.error("Glued path %s failed validation", cert.order)
        msg = f"Glued path {cert.order} fails the checker on edges={list(g.edges)}"
        raise InvalidCertificateError(msg)
    return cert


def assemble_blockchain(
    blocks: Sequence[Graph], attachments: Sequence[tuple[int, int]]
) -> Graph:
    """Glue blocks into a chain by identifying one vertex of each neighbor pair.

    ``attachments[i] = (u, v)`` identifies vertex ``u`` of ``blocks[i]`` with
    vertex ``v`` of ``blocks[i + 1]``. Block ``0`` keeps its ids; each later
    block gets fresh ids appended in local order.

    :raise PreconditionError: if the result is not a blockchain with one block per input
    """
    if len(attachments) != len(blocks) - 1:
        msg = f"{len(blocks)} blocks need {len(blocks) - 1} attachments"
        raise PreconditionError(msg)
    g = blocks[0]
    previous = {v: v for v in blocks[0].vertices}
    for block, (u, v) in zip(blocks[1:], attachments, strict=True):
        glue = previous[u]
        fresh = [w for w in block.vertices if w != v]
        current = {v: glue} | {w: g.n + i for i, w in enumerate(fresh)}
        g = disjoint_union_with_cross_edges(
            g, len(fresh), [(current[s], current[t]) for s, t in block.edges]
        )
        previous = current
    chain = as_blockchain(g)
    if chain is None or len(chain.blocks) != len(blocks):
        msg = "Attachments do not produce a blockchain"
        raise PreconditionError(msg)
    return g


def random_blockchain(rng: random.Random, pool: Sequence[Graph], max_n: int) -> Graph:
    """Assemble a non-trivial blockchain from blocks drawn out of ``pool``.

    Blocks are drawn until the next one would exceed ``max_n`` vertices; each
    block attaches to its successor at a vertex other than the one it was
    attached by.

    :raise PreconditionError: if two blocks of ``pool`` cannot fit in ``max_n``
    """
    smallest = min(b.n for b in pool)
    if 2 * smallest - 1 > max_n:
        msg = f"Pool blocks cannot form a chain within {max_n} vertices"
        raise PreconditionError(msg)
    chosen = [rng.choice([b for b in pool if 2 * b.n - 1 <= max_n] or pool)]
    total = chosen[0].n
    while True:
        fitting = [b for b in pool if total + b.n - 1 <= max_n]
        if not fitting or (len(chosen) >= 2 and rng.random() < 0.3):
            break
        block = rng.choice(fitting)
        chosen.append(block)
        total += block.n - 1
    attachments = []
    entry = None
    for left, right in zip(chosen, chosen[1:], strict=False):
        exits = [v for v in left.vertices if v != entry]
        u = rng.choice(exits)
        entry = rng.randrange(right.n)
        attachments.append((u, entry))
    return assemble_blockchain(chosen, attachments)


def build_h5_counterexample(
    base: Graph, x1: int, x2: int, t: int = DEFAULT_T
) -> CounterexampleFamily:
    """Add ``t`` vertices joined to exactly ``x1`` and ``x2``.

    :raise PreconditionError: if ``base`` is not a 2-block, ``x1 == x2`` or ``t < 3``
    """
    if not is_two_block(base):
        msg = "Counterexample base must be a 2-block"
        raise PreconditionError(msg)
    if x1 == x2 or not (0 <= x1 < base.n and 0 <= x2 < base.n):
        msg = f"x1 and x2 must be distinct base vertices, got {x1}, {x2}"
        raise PreconditionError(msg)
    if t < DEFAULT_T:
        msg = f"Need at least {DEFAULT_T} added vertices, got {t}"
        raise PreconditionError(msg)
    ys = range(base.n, base.n + t)
    result = disjoint_union_with_cross_edges(
        base, t, [(x, y) for y in ys for x in (x1, x2)]
    )
    return CounterexampleFamily(base=base, x1=x1, x2=x2, t=t, result=result)


def degree_obstruction(family: CounterexampleFamily) -> bool:
    """Confirm without touching ``G^2`` that no H_5 witness system exists for ``family.w``.

    Five distinct witness edges all meet ``x1`` or ``x2``, but a cycle has only
    two edges at each vertex.
    """
    return not has_witness_forest(family.result, family.w)


def replace_endblock_with_path(
    g: Graph, block: frozenset[int], x: int, y: int
) -> tuple[Graph, SurgeryAnchors]:
    """Replace endblock ``B`` by the path ``x, a, b, y`` with fresh ``a, b``.

    ``y`` is the cutvertex of ``B`` and ``x`` is the vertex of ``B`` with a
    single neighbor ``x'`` outside ``B``; every other vertex of ``B`` only sees
    ``B``.

    :return: the reduced graph and the anchors of the new path
    :raise PreconditionError: if ``B`` is a triangle, not a 2-block, or not
        attached as described
    """
    block = frozenset(block)
    if x == y or x not in block or y not in block:
        msg = f"x={x} and y={y} must be distinct vertices of the block"
        raise PreconditionError(msg)
    local, _ = block_graph(g, block)
    if not is_two_block(local):
        msg = "Replaced block must be a 2-block"
        raise PreconditionError(msg)
    if local.n <= 3:
        msg = "Cannot replace a triangle by a path of length 3"
        raise PreconditionError(msg)
    outside = {
        v: [u for u in range(g.n) if g.has_edge(u, v) and u not in block] for v in block
    }
    if len(outside[x]) != 1 or any(outside[v] for v in block - {x, y}):
        msg = "Only y and a single edge at x may leave the block"
        raise PreconditionError(msg)
    x_prime = outside[x][0]
    reduced, relabel = delete_vertices(delete_edges(g, [(x, y)]), block - {x, y})
    a, b = reduced.n, reduced.n + 1
    rx, ry = relabel[x], relabel[y]
    reduced = disjoint_union_with_cross_edges(reduced, 2, [(rx, a), (a, b), (b, ry)])
    anchors = SurgeryAnchors(
        x_prime=relabel[x_prime], x=rx, a=a, b=b, y=ry, relabel=relabel, block=block
    )
    _logger.debug("Replaced block %s by path %s", sorted(block), (rx, a, b, ry))
    return reduced, anchors


def _rotations(order: Sequence[int]) -> list[list[int]]:
    forward = list(order)
    backward = [forward[0], *reversed(forward[1:])]
    return [o[i:] + o[:i] for o in (forward, backward) for i in range(len(o))]


def classify_traversal(
    g1: Graph, h1: Certificate, anchors: SurgeryAnchors
) -> SurgeryCase | None:
    """Match a reduced-graph cycle against the five base traversal patterns.

    :param g1: the reduced graph, needed to recognize ``y'`` as a neighbor of ``y``
    :param h1: cycle certificate in ``G_1^2``
    :param anchors: the replacement path
    :return: the matched case, or ``None`` for an unreduced traversal
    """
    xp, x, a, b, y = anchors.x_prime, anchors.x, anchors.a, anchors.b, anchors.y

    def is_y_prime(v: int) -> bool:
        return v not in (y, a, b) and g1.has_edge(v, y)

    for order in _rotations(h1.order):
        if order[:4] == [x, a, b, y]:
            return SurgeryCase(1, anchors, tuple(order))
        if order[:3] == [x, a, b] and is_y_prime(order[3]):
            return SurgeryCase(2, anchors, tuple(order), y_prime=order[3])
        if order[:4] == [xp, a, b, x]:
            return SurgeryCase(5, anchors, tuple(order))
        if order[:5] == [xp, a, y, b, x]:
            return SurgeryCase(9, anchors, tuple(order))
        if order[:3] == [xp, a, y]:
            for j in range(3, len(order) - 2):
                if order[j + 1 : j + 3] == [b, x] and is_y_prime(order[j]):
                    return SurgeryCase(7, anchors, tuple(order), y_prime=order[j])
    return None


def _arc(cycle: Sequence[int], start: int, end: int) -> list[int]:
    """Walk a cycle from ``start`` to its neighbor ``end`` the long way round."""
    i = cycle.index(start)
    walk = list(cycle[i:]) + list(cycle[:i])
    if walk[1] == end:
        walk = [walk[0], *reversed(walk[1:])]
    return walk


def _host_witnesses(
    g: Graph, order: Sequence[int], slots: Sequence[int], kept: Sequence[Witness]
) -> tuple[tuple[Witness, ...], tuple[Witness, ...]] | None:
    """Keep surviving witnesses and match the remaining slots on the new cycle.

    :return: the host witnesses and the surviving witnesses they do not keep,
        or ``None`` if no matching exists
    """
    edges = tour_edges(order, Kind.CYCLE)
    on_cycle = set(edges)
    preserved = [w for w in kept if w.edge in on_cycle and g.has_edge(*w.edge)]
    remaining = list(slots)
    for w in preserved:
        remaining.remove(w.vertex)
    used = {w.edge for w in preserved}
    rest = match_witnesses(g, remaining, [e for e in edges if e not in used])
    witnesses = match_witnesses(g, slots, edges) if rest is None else (*preserved, *rest)
    if witnesses is None:
        return None
    dropped = tuple(w for w in kept if w not in witnesses)
    if dropped:
        _logger.debug("Rematched witnesses; surviving %s not kept", dropped)
    return tuple(sorted(witnesses)), dropped


def _splice(
    g: Graph, case: SurgeryCase, back: dict[int, int], budget: SearchBudget | None
) -> list[int] | None:
    """Build the host cycle order for a classified traversal.

    :return: host ids in cycle order, or ``None`` if a block certificate is missing
    """
    anchors = case.anchors
    local, relabel = block_graph(g, anchors.block)
    to_host = {new: old for old, new in relabel.items()}
    hx, hy = back[anchors.x], back[anchors.y]
    order = list(case.order)
    if case.case_id in (1, 2):
        others = sorted(anchors.block - {hx, hy})
        found = find_strong_f3_path(
            local, relabel[hx], relabel[hy], relabel[others[0]], 2, budget
        )
        if found is None:
            return None
        path = [to_host[v] for v in found.order]
        if path[0] != hx:
            path.reverse()
        if case.case_id == 1:
            return path + [back[v] for v in order[4:]]
        return path[:-1] + [back[v] for v in order[3:]]
    found = find_thm3_cycle(local, relabel[hy], relabel[hx], budget)
    if found is None:
        return None
    ring = [to_host[v] for v in found.order]
    x_star = next(
        to_host[w.edge[0] + w.edge[1] - w.vertex]
        for w in found.witnesses
        if to_host[w.vertex] == hx
    )
    if case.case_id == 5:
        shortcut = [v for v in ring if v != hy]
        tail = [back[v] for v in order[4:]]
        return [back[anchors.x_prime], *_arc(shortcut, x_star, hx), *tail]
    if case.case_id == 9:
        return [back[anchors.x_prime], *_arc(ring, x_star, hx)] + [back[v] for v in order[5:]]
    # case 7: x', a, y, M, y', b, x, T
    j = order.index(case.y_prime, 3)
    middle = [back[v] for v in order[3:j]]
    tail = [back[v] for v in order[j + 3 :]]
    walk = _arc(ring, hx, x_star)
    cut = walk.index(hy)
    p2, p1 = walk[:cut], walk[cut:]
    return [
        back[anchors.x_prime],
        *reversed(p1),
        *middle,
        back[case.y_prime],
        *reversed(p2),
        *tail,
    ]


def extend_cycle_through_endblock(
    g: Graph,
    anchors: SurgeryAnchors,
    h1: Certificate,
    case: SurgeryCase | None,
    budget: SearchBudget | None = None,
) -> SurgeryResult:
    """Turn a reduced-graph cycle back into a host cycle through the replaced block.

    Witness vertices of ``h1`` are mapped to host ids and every witness edge
    that survives the splice is kept; any that cannot be kept are reported in
    ``dropped``. An unreduced traversal, or a splice that
    fails the checker, falls back to a direct search and is flagged.

    :param g: host graph
    :param anchors: from :func:`replace_endblock_with_path`
    :param h1: cycle certificate in the reduced graph
    :param case: from :func:`classify_traversal`
    :raise PreconditionError: if a witness of ``h1`` sits on ``a`` or ``b``
    """
    back = {new: old for old, new in anchors.relabel.items()}
    if any(w.vertex not in back for w in h1.witnesses):
        msg = "Witness vertices must survive the reduction"
        raise PreconditionError(msg)
    slots = [back[w.vertex] for w in h1.witnesses]
    kept = [
        Witness(back[w.vertex], edge(back[w.edge[0]], back[w.edge[1]]))
        for w in h1.witnesses
        if w.edge[0] in back and w.edge[1] in back
    ]
    spec = h_spec(slots)
    if case is not None:
        order = _splice(g, case, back, budget)
        if order is not None:
            hosted = _host_witnesses(g, order, slots, kept)
            if hosted is not None:
                witnesses, dropped = hosted
                cert = Certificate(
                    kind=Kind.CYCLE,
                    order=canonical_order(order, Kind.CYCLE),
                    witnesses=witnesses,
                )
                if check_certificate(g, spec, cert):
                    _logger.debug("Case %s splice produced %s", case.case_id, cert.order)
                    return SurgeryResult(
                        certificate=cert,
                        case_id=case.case_id,
                        fallback=False,
                        dropped=dropped,
                    )
        _logger.warning("Case %s splice failed validation; searching directly", case.case_id)
    else:
        _logger.warning("Unreduced traversal %s; searching directly", h1.order)
    cert = find_h_cycle(g, slots, budget)
    return SurgeryResult(
        certificate=cert, case_id=None if case is None else case.case_id, fallback=True
    )


def surgery_instance(
    block: Graph, rest: Graph, x: int, y: int, y_rest: int, x_prime: int
) -> tuple[Graph, frozenset[int], int]:
    """Attach ``block`` to ``rest`` at a shared cutvertex plus one edge ``x x'``.

    ``y`` of ``block`` is identified with ``y_rest`` of ``rest`` and ``x`` of
    ``block`` is joined to ``x_prime`` of ``rest``. ``rest`` keeps its ids.

    :return: the host graph, the host ids of the block and the host id of ``x``
    """
    fresh = [v for v in block.vertices if v != y]
    ids = {y: y_rest} | {v: rest.n + i for i, v in enumerate(fresh)}
    g = disjoint_union_with_cross_edges(
        rest,
        len(fresh),
        [*((ids[u], ids[v]) for u, v in block.edges), (ids[x], x_prime)],
    )
    return g, frozenset(ids.values()), ids[x]


def pool_with_bridge(blocks: Sequence[Graph]) -> list[Graph]:
    """Add the bridge ``K_2`` to a pool of 2-blocks."""
    return [*blocks, path_graph(2)]

