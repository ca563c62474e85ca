"""Run verification campaigns over graph corpora.

A campaign expands a corpus into instances (graph plus vertex arguments),
evaluates them on a worker pool and collects one record per instance. Instance
generation happens up front in a single process, so the records depend only on
the corpus, the campaign spec and its seed, never on the number of workers.
"""

import itertools
import logging
import random
import time
from enum import StrEnum
from multiprocessing import Pool
from typing import NamedTuple

from hamsquare.campaign.class_utils import map_to_enum
from hamsquare.campaign.corpus import ATLAS, Corpus, corpus_from_graphs, load_corpus
from hamsquare.campaign.records import (
    NO_VERTEX,
    CampaignMode,
    CampaignResult,
    InstanceRecord,
    Outcome,
    contradictions,
)
from hamsquare.errors import (
    InvalidCertificateError,
    InvalidVertexError,
    PreconditionError,
    SearchTimeoutError,
    SolverCapError,
    TheoremFinding,
)
from hamsquare.graphs.connectivity import as_blockchain, blocks, is_two_block
from hamsquare.graphs.graph import Graph, complete_graph, cycle_graph
from hamsquare.graphs.graph6 import emit_graph6, parse_graph6
from hamsquare.search.constructions import (
    DEFAULT_T,
    blockchain_path,
    build_h5_counterexample,
    pool_with_bridge,
    random_blockchain,
)
from hamsquare.search.oracle import (
    DEFAULT_TIMEOUT,
    Certificate,
    Kind,
    SearchBudget,
    find_f_path,
    find_h_cycle,
    find_strong_f3_path,
    find_thm3_cycle,
    find_thm4_cycle,
    has_witness_forest,
)
from hamsquare.search.soundness import (
    W_SIZE,
    find_eps_with_sound_cycle,
    find_w_sound_cycle,
    iter_cycles,
)

_logger = logging.getLogger(__name__)

DEFAULT_SEED = 0
DEFAULT_COUNT = 100
CONSTRUCT_MAX_N = 12
POOL_BLOCK_MAX_N = 6
COROLLARY_MAX_CUTVERTICES = 4


class SubsetPolicy(StrEnum):
    """Define how argument tuples are chosen per graph."""

    ALL = "all"
    SAMPLE = "sample"

    @classmethod
    def _missing_(cls, value):  # noqa: ANN001 ANN206
        return map_to_enum(cls, value, {"random": cls.SAMPLE})


class CampaignSpec(NamedTuple):
    """Define a campaign.

    ``corpus`` is a graph6 file, an ``http(s)`` URL or ``"atlas"``. When it is
    ``None`` the atlas is used, except by the counterexample mode, which
    defaults to the bases ``C_3, C_4, K_4``. ``t`` only affects the
    counterexample mode and ``count`` only the blockchain path mode.
    """

    mode: CampaignMode
    k: int = 4
    corpus: str | None = None
    policy: SubsetPolicy = SubsetPolicy.ALL
    sample: int = 1
    seed: int = DEFAULT_SEED
    timeout: float | None = DEFAULT_TIMEOUT
    jobs: int = 1
    max_n: int | None = None
    biconnected_only: bool = False
    t: int = DEFAULT_T
    count: int = DEFAULT_COUNT


class Instance(NamedTuple):
    """Define one unit of work handed to a worker."""

    index: int
    g6: str
    mode: CampaignMode
    args: tuple[int, ...]
    timeout: float | None


class Lcg:
    """Generate reproducible indices with a 64-bit linear congruential generator.

    ``state = (a * state + c) mod 2^64``; draws use the upper 31 bits.
    """

    A = 6364136223846793005
    C = 1442695040888963407
    MASK = (1 << 64) - 1

    def __init__(self, seed: int) -> None:
        """Initialize generator.

        :param seed: unsigned 64-bit seed
        """
        self.state = seed & self.MASK

    def step(self) -> int:
        """Advance and return the new state."""
        self.state = (self.A * self.state + self.C) & self.MASK
        return self.state

    def below(self, bound: int) -> int:
        """Draw an integer in ``0..bound-1``."""
        return (self.step() >> 33) % bound

    def sample(self, population: int, count: int) -> list[int]:
        """Pick ``count`` distinct indices by partial Fisher-Yates, returned sorted."""
        indices = list(range(population))
        for i in range(min(count, population)):
            j = i + self.below(population - i)
            indices[i], indices[j] = indices[j], indices[i]
        return sorted(indices[: min(count, population)])


def default_counterexample_bases() -> list[Graph]:
    """Get ``C_3``, ``C_4`` and ``K_4``."""
    return [cycle_graph(3), cycle_graph(4), complete_graph(4)]


def mode_arguments(mode: CampaignMode, g: Graph, k: int) -> list[tuple[int, ...]]:
    """List every admissible argument tuple of a mode on one graph.

    Graphs outside a mode's domain still get their tuples, so the precondition
    failure shows up as an ``error`` record. Theorem 4 only gets tuples on
    non-trivial blockchains, whose endblocks define them.
    """
    vertices = range(g.n)
    match mode:
        case CampaignMode.H_PROPERTY:
            return list(itertools.combinations(vertices, k))
        case CampaignMode.F_PROPERTY:
            return [
                (x1, x2, *(v for v in subset if v not in (x1, x2)))
                for subset in itertools.combinations(vertices, k)
                for x1, x2 in itertools.combinations(subset, 2)
            ]
        case CampaignMode.STRONG_F3:
            found = []
            for triple in itertools.combinations(vertices, 3):
                for x3 in triple:
                    x1, x2 = (v for v in triple if v != x3)
                    found += [(x1, x2, x3, 1), (x1, x2, x3, 2)]
            return found
        case CampaignMode.THM3:
            return list(itertools.permutations(vertices, 2))
        case CampaignMode.THM4:
            try:
                chain = as_blockchain(g)
            except PreconditionError:
                return []
            if chain is None or chain.trivial:
                return []
            cuts = set(chain.cutvertices)
            first = sorted(chain.blocks[0] - cuts)
            last = sorted(chain.blocks[-1] - cuts)
            return list(itertools.product(first, last))
        case CampaignMode.W_SOUND | CampaignMode.EPS:
            return list(itertools.combinations(vertices, W_SIZE))
        case CampaignMode.COROLLARY:
            return [()]
    msg = f"Mode {mode} has no per-graph arguments"
    raise PreconditionError(msg)


def blockchain_arguments(rng: random.Random, g: Graph) -> tuple[int, ...]:
    """Draw admissible gluing choices ``c0, ck, u_1, v_1, ..., u_k, v_k``.

    ``u_i`` is ``NO_VERTEX`` when the draw leaves it out.
    """
    chain = as_blockchain(g)
    cuts = set(chain.cutvertices)
    c0 = rng.choice(sorted(chain.blocks[0] - cuts))
    ck = rng.choice(sorted(chain.blocks[-1] - cuts))
    args = [c0, ck]
    for block in chain.blocks:
        options = sorted(block - cuts - {c0, ck})
        u = rng.choice([NO_VERTEX, *options])
        v = rng.choice(sorted(block - {u}))
        args += [u, v]
    return tuple(args)


def _pick(arguments: list, spec: CampaignSpec, lcg: Lcg) -> list:
    if spec.policy is SubsetPolicy.ALL:
        return arguments
    return [arguments[i] for i in lcg.sample(len(arguments), spec.sample)]


def _load(spec: CampaignSpec) -> Corpus:
    if spec.mode is CampaignMode.COUNTEREXAMPLE and spec.corpus is None:
        return corpus_from_graphs(default_counterexample_bases(), source="default-bases")
    if spec.mode is CampaignMode.BLOCKCHAIN_PATH:
        return load_corpus(spec.corpus or ATLAS, max_n=POOL_BLOCK_MAX_N, biconnected_only=True)
    return load_corpus(
        spec.corpus or ATLAS, max_n=spec.max_n, biconnected_only=spec.biconnected_only
    )


def build_instances(spec: CampaignSpec, corpus: Corpus) -> list[Instance]:
    """Expand a corpus into indexed instances.

    :raise PreconditionError: if the blockchain pool is empty
    """
    lcg = Lcg(spec.seed)
    found = []

    def add(g6: str, args: tuple[int, ...]) -> None:
        found.append(Instance(len(found), g6, spec.mode, args, spec.timeout))

    if spec.mode is CampaignMode.COUNTEREXAMPLE:
        for base in corpus.graphs:
            if not is_two_block(base):
                _logger.debug("Skipping counterexample base %s: not a 2-block", emit_graph6(base))
                continue
            pairs = list(itertools.combinations(range(base.n), 2))
            for x1, x2 in _pick(pairs, spec, lcg):
                family = build_h5_counterexample(base, x1, x2, spec.t)
                add(emit_graph6(family.result), family.w)
    elif spec.mode is CampaignMode.BLOCKCHAIN_PATH:
        rng = random.Random(spec.seed)  # noqa: S311
        pool = pool_with_bridge([g for g in corpus.graphs if g.n <= POOL_BLOCK_MAX_N])
        max_n = spec.max_n or CONSTRUCT_MAX_N
        for _ in range(spec.count):
            g = random_blockchain(rng, pool, max_n)
            add(emit_graph6(g), blockchain_arguments(rng, g))
    else:
        for g6, g in zip(corpus.lines, corpus.graphs, strict=True):
            for args in _pick(mode_arguments(spec.mode, g, spec.k), spec, lcg):
                add(g6, tuple(args))
    _logger.info("Built %s %s instances from %s", len(found), spec.mode, corpus.source)
    return found


def corollary_center(g: Graph) -> frozenset[int] | None:
    """Find a center block making ``bc(G)`` a subdivided star with at most four cutvertices at the center.

    :return: the center block, or ``None`` if ``g`` lies outside the corollary
    """
    if g.n < 3:
        return None
    try:
        decomposition = blocks(g)
    except PreconditionError:
        return None
    tree = decomposition.bc_tree
    for i, block in enumerate(decomposition.blocks):
        center = ("B", i)
        if tree.degree(center) > COROLLARY_MAX_CUTVERTICES:
            continue
        if all(d <= 2 for node, d in tree.degree if node != center):
            return block
    return None


def verify_corollary(
    g: Graph, budget: SearchBudget | None = None
) -> tuple[Outcome, Certificate | None]:
    """Certify that ``G^2`` is hamiltonian for a star-structured graph.

    The conclusion is checked by direct search for an unconstrained hamiltonian
    cycle of ``G^2``.

    :return: ``out-of-scope`` with no certificate if the block structure does
        not qualify, otherwise ``certified`` or ``absent``
    :raise SearchTimeoutError: if the budget runs out
    """
    center = corollary_center(g)
    if center is None:
        _logger.debug("Graph %s is outside the corollary's structure", emit_graph6(g))
        return Outcome.OUT_OF_SCOPE, None
    cert = find_h_cycle(g, (), budget)
    if cert is None:
        _logger.error("No hamiltonian cycle in the square of %s", emit_graph6(g))
        return Outcome.ABSENT, None
    return Outcome.CERTIFIED, cert


def _require_two_block(g: Graph) -> None:
    if not is_two_block(g):
        msg = "Graph is not a 2-block"
        raise PreconditionError(msg)


def _decode_blockchain_args(args: tuple[int, ...]) -> tuple[int, int, list, list]:
    c0, ck, *pairs = args
    us = [None if u == NO_VERTEX else u for u in pairs[0::2]]
    return c0, ck, us, list(pairs[1::2])


def _evaluate(instance: Instance, g: Graph, budget: SearchBudget) -> InstanceRecord:
    base = InstanceRecord(
        index=instance.index,
        g6=instance.g6,
        mode=instance.mode,
        args=instance.args,
        outcome=Outcome.CERTIFIED,
    )
    args = instance.args
    reason = None
    match instance.mode:
        case CampaignMode.H_PROPERTY:
            _require_two_block(g)
            cert = find_h_cycle(g, args, budget)
        case CampaignMode.COUNTEREXAMPLE:
            cert = find_h_cycle(g, args, budget)
            if cert is None:
                if has_witness_forest(g, args):
                    _logger.warning("Degree obstruction missing on %s", instance.g6)
                else:
                    reason = "degree_obstruction"
        case CampaignMode.F_PROPERTY:
            _require_two_block(g)
            cert = find_f_path(g, args[0], args[1], args[2:], budget)
        case CampaignMode.STRONG_F3:
            _require_two_block(g)
            cert = find_strong_f3_path(g, *args, budget=budget)
        case CampaignMode.THM3:
            cert = find_thm3_cycle(g, *args, budget=budget)
        case CampaignMode.THM4:
            cert = find_thm4_cycle(g, *args, budget=budget)
        case CampaignMode.BLOCKCHAIN_PATH:
            cert = blockchain_path(g, *_decode_blockchain_args(args), budget=budget)
        case CampaignMode.COROLLARY:
            outcome, cert = verify_corollary(g, budget)
            if outcome is Outcome.OUT_OF_SCOPE:
                return base._replace(outcome=outcome, reason="structure")
        case CampaignMode.W_SOUND:
            cycle, _ = find_w_sound_cycle(g, args)
            cert = Certificate(kind=Kind.CYCLE, order=cycle, witnesses=())
        case CampaignMode.EPS:
            cycle, _ = find_w_sound_cycle(g, args)
            eps = find_eps_with_sound_cycle(g, cycle, args)
            return base._replace(
                certificate=Certificate(kind=Kind.CYCLE, order=cycle, witnesses=()),
                e_part=tuple(sorted(eps.e_part)),
                p_part=tuple(sorted(eps.p_part)),
            )
    if cert is None:
        return base._replace(outcome=Outcome.ABSENT, nodes=budget.nodes, reason=reason)
    return base._replace(certificate=cert)


def _error_token(error: Exception) -> str:
    return {
        SolverCapError: "solver_cap",
        InvalidVertexError: "invalid_vertex",
    }.get(type(error), "precondition")


def run_instance(instance: Instance) -> tuple[InstanceRecord, float]:
    """Evaluate one instance and map failures to outcomes.

    Timeouts become ``unknown``. Violated preconditions and certificates that
    fail the checker become ``error``. A theorem finding becomes ``absent``
    attested by the work spent.

    :return: the record and the elapsed wall time in seconds
    """
    start = time.perf_counter()
    g = parse_graph6(instance.g6)
    budget = SearchBudget(instance.timeout)
    failed = InstanceRecord(
        index=instance.index,
        g6=instance.g6,
        mode=instance.mode,
        args=instance.args,
        outcome=Outcome.ERROR,
    )
    try:
        record = _evaluate(instance, g, budget)
    except SearchTimeoutError:
        _logger.warning("Instance %s timed out after %s nodes", instance.index, budget.nodes)
        record = failed._replace(outcome=Outcome.UNKNOWN, reason="timeout")
    except (PreconditionError, SolverCapError, InvalidVertexError) as e:
        _logger.debug("Instance %s violates a precondition: %s", instance.index, e)
        record = failed._replace(reason=_error_token(e))
    except InvalidCertificateError as e:
        _logger.error("Instance %s: %s", instance.index, e)
        record = failed._replace(reason="invalid_certificate")
    except TheoremFinding as e:
        _logger.error("Instance %s: %s", instance.index, e)
        nodes = budget.nodes
        if instance.mode in (CampaignMode.W_SOUND, CampaignMode.EPS):
            nodes = sum(1 for _ in iter_cycles(g))
        record = failed._replace(outcome=Outcome.ABSENT, nodes=nodes, reason="finding")
    return record, time.perf_counter() - start


def _run_chunk(chunk: list[Instance]) -> list[tuple[InstanceRecord, float]]:
    return [run_instance(instance) for instance in chunk]


def _validate_spec(spec: CampaignSpec) -> None:
    if spec.k < 1:
        msg = f"k must be at least 1, got {spec.k}"
        raise PreconditionError(msg)
    if spec.sample < 1:
        msg = f"Sample count must be at least 1, got {spec.sample}"
        raise PreconditionError(msg)
    if spec.jobs < 1:
        msg = f"Worker count must be at least 1, got {spec.jobs}"
        raise PreconditionError(msg)
    if spec.mode is CampaignMode.F_PROPERTY and spec.k < 2:
        msg = "F_k campaigns need k >= 2"
        raise PreconditionError(msg)


def run_campaign(spec: CampaignSpec, corpus: Corpus | None = None) -> CampaignResult:
    """Run a campaign.

    Instances are split round-robin by index over ``spec.jobs`` workers and
    the records are sorted by index afterwards.

    :param spec: campaign definition
    :param corpus: preloaded corpus overriding ``spec.corpus``
    :return: records plus the corpus digest and the largest per-instance time
    :raise PreconditionError: if the spec is invalid
    :raise OSError: if the corpus file cannot be read
    """
    _validate_spec(spec)
    corpus = corpus if corpus is not None else _load(spec)
    instances = build_instances(spec, corpus)
    if spec.jobs == 1:
        outputs = _run_chunk(instances)
    else:
        chunks = [instances[i :: spec.jobs] for i in range(spec.jobs)]
        with Pool(spec.jobs) as p:
            pending = [p.apply_async(_run_chunk, (chunk,)) for chunk in chunks]
            outputs = [pair for job in pending for pair in job.get()]
    outputs.sort(key=lambda pair: pair[0].index)
    result = CampaignResult(
        mode=spec.mode,
        seed=spec.seed,
        corpus_digest=corpus.digest,
        records=tuple(record for record, _ in outputs),
        max_elapsed=max((elapsed for _, elapsed in outputs), default=0.0),
    )
    counts = result.counts()
    if counts[Outcome.UNKNOWN]:
        _logger.warning("%s instances ended unknown after timing out", counts[Outcome.UNKNOWN])
    return result


def exit_code(result: CampaignResult) -> int:
    """Get 0 iff no record is an error and none contradicts the verified theorem."""
    if result.counts()[Outcome.ERROR] or contradictions(result):
        return 1
    return 0
