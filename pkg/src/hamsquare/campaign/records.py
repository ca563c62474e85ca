"""Define campaign records and read and write the certificate file format.

One record per line, space-separated ``KEY:value`` fields::

    # hamsquare mode=h-property seed=0 corpus=<sha256>
    IDX:0 g6:Cl MODE:h-property X:0,1,2,3 KIND:cycle ORDER:0,1,3,2 WIT:0=0-1;1=1-3;... OUTCOME:certified
    IDX:1 g6:Fs\\w MODE:counterexample X:0,1,4,5,6 EXHAUSTED:5123 OUTCOME:absent
    IDX:2 g6:... MODE:h-property X:... REASON:timeout OUTCOME:unknown

EPS records add ``E:`` and ``P:`` edge lists. Timings never appear in files so
that reruns are byte-identical.
"""

import logging
from collections import Counter
from enum import StrEnum
from pathlib import Path
from typing import NamedTuple

from hamsquare.campaign.class_utils import map_to_enum
from hamsquare.errors import Graph6FormatError, MalformedRecordError, PreconditionError
from hamsquare.graphs.graph import Edge, Graph, edge
from hamsquare.graphs.graph6 import parse_graph6
from hamsquare.search.constructions import blockchain_path_spec
from hamsquare.search.oracle import (
    AnchorCase,
    Certificate,
    CheckReason,
    ConstraintSpec,
    Kind,
    Witness,
    blockchain_anchor_cases,
    explain_certificate,
    f_spec,
    h_spec,
    strong_f3_spec,
    thm3_spec,
)
from hamsquare.search.soundness import EPSGraph, is_w_sound, validate_eps

_logger = logging.getLogger(__name__)

_HEADER_PREFIX = "# hamsquare"
NO_VERTEX = -1


class CampaignMode(StrEnum):
    """Define the theorem or construction a campaign exercises."""

    H_PROPERTY = "h-property"
    F_PROPERTY = "f-property"
    STRONG_F3 = "strong-f3"
    THM3 = "thm3"
    THM4 = "thm4"
    W_SOUND = "w-sound"
    EPS = "eps"
    COUNTEREXAMPLE = "counterexample"
    COROLLARY = "corollary"
    BLOCKCHAIN_PATH = "blockchain-path"

    @classmethod
    def _missing_(cls, value):  # noqa: ANN001 ANN206
        return map_to_enum(
            cls,
            value,
            {
                "h": cls.H_PROPERTY,
                "h4": cls.H_PROPERTY,
                "f": cls.F_PROPERTY,
                "f4": cls.F_PROPERTY,
                "sf3": cls.STRONG_F3,
                "wsound": cls.W_SOUND,
                "h5-counterexample": cls.COUNTEREXAMPLE,
                "construct": cls.BLOCKCHAIN_PATH,
                "lemma1": cls.BLOCKCHAIN_PATH,
            },
        )


class Outcome(StrEnum):
    """Define per-instance results."""

    CERTIFIED = "certified"
    ABSENT = "absent"
    UNKNOWN = "unknown"
    ERROR = "error"
    OUT_OF_SCOPE = "out-of-scope"

    @classmethod
    def _missing_(cls, value):  # noqa: ANN001 ANN206
        return map_to_enum(cls, value, {})


class InstanceRecord(NamedTuple):
    """Define the result of one campaign instance.

    ``args`` holds the mode's vertex arguments; blockchain path records use
    ``NO_VERTEX`` for an absent ``u_i``. ``nodes`` attests exhaustion for
    ``absent`` records.
    """

    index: int
    g6: str
    mode: CampaignMode
    args: tuple[int, ...]
    outcome: Outcome
    certificate: Certificate | None = None
    nodes: int | None = None
    reason: str | None = None
    e_part: tuple[Edge, ...] = ()
    p_part: tuple[Edge, ...] = ()


class CampaignResult(NamedTuple):
    """Define the records of a campaign plus what identifies its inputs.

    ``max_elapsed`` is reported but never written to certificate files.
    """

    mode: CampaignMode
    seed: int
    corpus_digest: str
    records: tuple[InstanceRecord, ...]
    max_elapsed: float = 0.0

    def counts(self) -> dict[Outcome, int]:
        """Tally records per outcome, listing every outcome."""
        tally = Counter(r.outcome for r in self.records)
        return {outcome: tally.get(outcome, 0) for outcome in Outcome}


POSITIVE_MODES = frozenset(CampaignMode) - {CampaignMode.COUNTEREXAMPLE}


def contradictions(result: CampaignResult) -> int:
    """Count outcomes that contradict the theorem a campaign verifies.

    Positive modes contradict on ``absent``; the counterexample mode
    contradicts on ``certified``.
    """
    bad = Outcome.CERTIFIED if result.mode is CampaignMode.COUNTEREXAMPLE else Outcome.ABSENT
    return sum(1 for r in result.records if r.outcome is bad)


def constraint_for(mode: CampaignMode, g: Graph, args: tuple[int, ...]) -> ConstraintSpec | None:
    """Rebuild the constraint a certified record answers.

    :return: the constraint, or ``None`` for modes checked without one
    """
    match mode:
        case CampaignMode.H_PROPERTY | CampaignMode.COUNTEREXAMPLE:
            return h_spec(args)
        case CampaignMode.F_PROPERTY:
            return f_spec(args[0], args[1], args[2:])
        case CampaignMode.STRONG_F3:
            return strong_f3_spec(*args)
        case CampaignMode.THM3:
            return thm3_spec(*args)
        case CampaignMode.THM4:
            cases = blockchain_anchor_cases(g, *args)
            return ConstraintSpec(
                kind=Kind.CYCLE,
                double_anchors=tuple(u for u in args if cases[u] is AnchorCase.TWO_BLOCK),
                single_anchors=tuple(u for u in args if cases[u] is AnchorCase.BRIDGE),
            )
        case CampaignMode.COROLLARY:
            return ConstraintSpec(kind=Kind.CYCLE)
        case CampaignMode.BLOCKCHAIN_PATH:
            c0, ck, *pairs = args
            us = [None if u == NO_VERTEX else u for u in pairs[0::2]]
            return blockchain_path_spec(c0, ck, us, pairs[1::2])
    return None


def revalidate(record: InstanceRecord) -> str | None:
    """Re-check a certified record against its stored graph.

    :return: ``None`` if valid, otherwise a reason token
    """
    g = parse_graph6(record.g6)
    cert = record.certificate
    if cert is None:
        return "missing_certificate"
    if record.mode is CampaignMode.W_SOUND:
        return None if is_w_sound(g, cert.order, record.args).sound else "not_sound"
    if record.mode is CampaignMode.EPS:
        eps = EPSGraph(host=g, e_part=frozenset(record.e_part), p_part=frozenset(record.p_part))
        return None if validate_eps(eps, cycle=cert.order, w=record.args) else "invalid_eps"
    spec = constraint_for(record.mode, g, record.args)
    reason = explain_certificate(g, spec, cert)
    return None if reason is CheckReason.OK else str(reason)


def _join(values: tuple[int, ...]) -> str:
    return ",".join(str(v) for v in values)


def _join_edges(edges: tuple[Edge, ...]) -> str:
    return ";".join(f"{u}-{v}" for u, v in edges)


def format_record(record: InstanceRecord) -> str:
    """Render one record line without a trailing newline."""
    fields = [
        f"IDX:{record.index}",
        f"g6:{record.g6}",
        f"MODE:{record.mode}",
        f"X:{_join(record.args)}",
    ]
    if record.certificate is not None:
        cert = record.certificate
        witnesses = ";".join(f"{w.vertex}={w.edge[0]}-{w.edge[1]}" for w in cert.witnesses)
        fields += [f"KIND:{cert.kind}", f"ORDER:{_join(cert.order)}", f"WIT:{witnesses}"]
    if record.mode is CampaignMode.EPS and record.certificate is not None:
        fields += [f"E:{_join_edges(record.e_part)}", f"P:{_join_edges(record.p_part)}"]
    if record.nodes is not None:
        fields.append(f"EXHAUSTED:{record.nodes}")
    if record.reason is not None:
        fields.append(f"REASON:{record.reason}")
    fields.append(f"OUTCOME:{record.outcome}")
    return " ".join(fields)


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.split(",")) if text else ()


def _edges(text: str) -> tuple[Edge, ...]:
    if not text:
        return ()
    pairs = (item.split("-") for item in text.split(";"))
    return tuple(edge(int(u), int(v)) for u, v in pairs)


def _witnesses(text: str) -> tuple[Witness, ...]:
    if not text:
        return ()
    found = []
    for item in text.split(";"):
        vertex, pair = item.split("=")
        u, v = pair.split("-")
        found.append(Witness(int(vertex), edge(int(u), int(v))))
    return tuple(found)


def parse_record(line: str) -> InstanceRecord:
    """Parse one record line.

    :raise ValueError: if a field is missing or malformed
    """
    fields = dict(token.split(":", 1) for token in line.split())
    required = ("IDX", "g6", "MODE", "X", "OUTCOME")
    missing = [key for key in required if key not in fields]
    if missing:
        msg = f"missing fields {', '.join(missing)}"
        raise ValueError(msg)
    certificate = None
    if "ORDER" in fields:
        certificate = Certificate(
            kind=Kind(fields["KIND"]),
            order=_ints(fields["ORDER"]),
            witnesses=_witnesses(fields.get("WIT", "")),
        )
    return InstanceRecord(
        index=int(fields["IDX"]),
        g6=fields["g6"],
        mode=CampaignMode(fields["MODE"]),
        args=_ints(fields["X"]),
        outcome=Outcome(fields["OUTCOME"]),
        certificate=certificate,
        nodes=int(fields["EXHAUSTED"]) if "EXHAUSTED" in fields else None,
        reason=fields.get("REASON"),
        e_part=_edges(fields.get("E", "")),
        p_part=_edges(fields.get("P", "")),
    )


def format_header(result: CampaignResult) -> str:
    """Render the header line identifying mode, seed and corpus."""
    return f"{_HEADER_PREFIX} mode={result.mode} seed={result.seed} corpus={result.corpus_digest}"


def write_certificates(result: CampaignResult, path: Path) -> None:
    """Write a campaign result, records sorted by instance index.

    :param result: campaign result
    :param path: destination file, overwritten
    """
    lines = [format_header(result)]
    lines += [format_record(r) for r in sorted(result.records, key=lambda r: r.index)]
    with path.open("w") as f:
        f.write("\n".join(lines) + "\n")
    _logger.info("Wrote %s records to %s", len(result.records), path)


def read_certificates(path: Path, revalidate_certified: bool = True) -> CampaignResult:
    """Read a certificate file written by :func:`write_certificates`.

    :param path: source file
    :param revalidate_certified: if ``True``, re-check every certified record
        against its stored graph with the independent checker
    :return: the campaign result, ``max_elapsed`` reset to zero
    :raise MalformedRecordError: naming the 1-based line of a header or record
        that cannot be parsed, or of a certificate that fails revalidation
    """
    with path.open() as f:
        lines = f.read().splitlines()
    if not lines or not lines[0].startswith(_HEADER_PREFIX):
        msg = f"line 1: missing '{_HEADER_PREFIX}' header in {path}"
        raise MalformedRecordError(msg)
    try:
        header = dict(item.split("=", 1) for item in lines[0][len(_HEADER_PREFIX) :].split())
        mode, seed, digest = CampaignMode(header["mode"]), int(header["seed"]), header["corpus"]
    except (KeyError, ValueError) as e:
        msg = f"line 1: malformed header: {e}"
        raise MalformedRecordError(msg) from e
    records = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            record = parse_record(line)
        except (ValueError, KeyError) as e:
            _logger.error("Cannot parse record on line %s of %s", lineno, path)
            msg = f"line {lineno}: {e}"
            raise MalformedRecordError(msg) from e
        if revalidate_certified and record.outcome is Outcome.CERTIFIED:
            try:
                reason = revalidate(record)
            except (Graph6FormatError, PreconditionError) as e:
                reason = str(e)
            if reason is not None:
                msg = f"line {lineno}: certificate fails validation ({reason})"
                raise MalformedRecordError(msg)
        records.append(record)
    return CampaignResult(mode=mode, seed=seed, corpus_digest=digest, records=tuple(records))
