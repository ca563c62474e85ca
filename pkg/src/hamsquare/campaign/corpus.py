"""Load graph6 corpora from files, URLs or the networkx graph atlas."""

import hashlib
import logging
from collections.abc import Iterable
from pathlib import Path
from typing import NamedTuple

import networkx as nx
import requests
from requests.exceptions import RequestException

from hamsquare.graphs.connectivity import is_two_block
from hamsquare.graphs.graph import Graph, from_networkx
from hamsquare.graphs.graph6 import emit_graph6, read_graph6_lines

_logger = logging.getLogger(__name__)

ATLAS = "atlas"


class Corpus(NamedTuple):
    """Define a loaded corpus.

    ``lines`` are the canonical graph6 encodings of ``graphs``, in corpus order.
    """

    source: str
    lines: tuple[str, ...]
    graphs: tuple[Graph, ...]

    @property
    def digest(self) -> str:
        """Get the SHA-256 of the canonical lines, newline-terminated."""
        payload = "".join(f"{line}\n" for line in self.lines)
        return hashlib.sha256(payload.encode("ascii")).hexdigest()


def fetch_graph6_text(url: str) -> str:
    """Download a graph6 corpus.

    :param url: ``http(s)`` URL of a text file with one graph per line
    :return: response body
    :raise RequestException: if the server returns an error status
    """
    _logger.debug("Issuing GET request to %s", url)
    with requests.get(url, timeout=30) as r:
        try:
            r.raise_for_status()
        except RequestException as e:
            _logger.warning("Request to %s returned status code %s", url, r.status_code)
            raise e
        return r.text


def atlas_graphs() -> list[Graph]:
    """Get every graph on 1 to 7 vertices from networkx's graph atlas."""
    return [from_networkx(g) for g in nx.graph_atlas_g() if g.number_of_nodes() >= 1]


def _raw_graphs(source: str) -> Iterable[Graph]:
    if source == ATLAS:
        return atlas_graphs()
    if source.startswith(("http://", "https://")):
        return read_graph6_lines(fetch_graph6_text(source).splitlines())
    with Path(source).open() as f:
        return list(read_graph6_lines(f))


def load_corpus(
    source: str, max_n: int | None = None, biconnected_only: bool = False
) -> Corpus:
    """Load and filter a corpus.

    :param source: a file path, an ``http(s)`` URL, or ``"atlas"``
    :param max_n: drop graphs with more vertices
    :param biconnected_only: keep only 2-blocks
    :return: corpus of the surviving graphs
    :raise Graph6FormatError: naming the line of malformed input
    """
    kept = [
        g
        for g in _raw_graphs(source)
        if (max_n is None or g.n <= max_n) and (not biconnected_only or is_two_block(g))
    ]
    _logger.info("Loaded %s graphs from %s", len(kept), source)
    return Corpus(
        source=source,
        lines=tuple(emit_graph6(g) for g in kept),
        graphs=tuple(kept),
    )


def corpus_from_graphs(graphs: Iterable[Graph], source: str = "generated") -> Corpus:
    """Wrap graphs built in code as a corpus."""
    kept = tuple(graphs)
    return Corpus(source=source, lines=tuple(emit_graph6(g) for g in kept), graphs=kept)
