"""Read and write graphs in the graph6 text format.

See the format description shipped with nauty (``formats.txt``). Bit unpacking
and packing are delegated to ``networkx``; this module adds the strict checks
that ``networkx`` skips (byte range, exact body length, zero padding bits) so
that a corpus line either decodes exactly or is rejected.
"""

import logging
from collections.abc import Iterable, Iterator

import networkx as nx

from hamsquare.errors import Graph6FormatError
from hamsquare.graphs.graph import Graph, from_networkx, to_networkx

_logger = logging.getLogger(__name__)

_HEADER = ">>graph6<<"
_BIAS = 63


def _decode_size(data: list[int]) -> tuple[int, int]:
    """Decode the vertex count.

    :param data: byte values with the bias already removed
    :return: vertex count and number of header bytes consumed
    :raise Graph6FormatError: if the size field is truncated
    """
    if data[0] < 63:
        return data[0], 1
    if len(data) >= 2 and data[1] == 63:
        if len(data) < 8:
            msg = "Truncated 8-byte graph6 size field"
            raise Graph6FormatError(msg)
        digits, width = data[2:8], 8
    else:
        if len(data) < 4:
            msg = "Truncated 4-byte graph6 size field"
            raise Graph6FormatError(msg)
        digits, width = data[1:4], 4
    n = 0
    for d in digits:
        if d > 63:
            msg = "Size field byte out of range"
            raise Graph6FormatError(msg)
        n = (n << 6) | d
    return n, width


def parse_graph6(line: str) -> Graph:
    """Decode a single graph6 line.

    :param line: graph6 text, optionally with the ``>>graph6<<`` header and a
        trailing newline
    :return: decoded graph
    :raise Graph6FormatError: on a malformed length header, a byte outside the
        printable range ``63..126``, a body of the wrong length, or nonzero
        padding bits
    """
    text = line.rstrip("\r\n")
    if text.startswith(_HEADER):
        text = text[len(_HEADER) :]
    if not text:
        msg = "Empty graph6 line has no length header"
        raise Graph6FormatError(msg)
    for position, char in enumerate(text):
        if not _BIAS <= ord(char) <= 126:
            msg = f"Character {char!r} at position {position} is outside the graph6 range 63..126"
            raise Graph6FormatError(msg)
    raw = text.encode("ascii")
    data = [byte - _BIAS for byte in raw]
    n, width = _decode_size(data)
    body = data[width:]
    used_bits = n * (n - 1) // 2
    expected = (used_bits + 5) // 6
    if len(body) != expected:
        msg = f"Expected {expected} body bytes for {n} vertices but found {len(body)}"
        raise Graph6FormatError(msg)
    pad = 6 * expected - used_bits
    if body and body[-1] & ((1 << pad) - 1):
        msg = "Nonzero padding bits after the adjacency data"
        raise Graph6FormatError(msg)
    return from_networkx(nx.from_graph6_bytes(raw))


def emit_graph6(g: Graph) -> str:
    """Encode a graph as a graph6 line without header or newline."""
    return nx.to_graph6_bytes(to_networkx(g), header=False).decode("ascii").rstrip("\n")


def read_graph6_lines(lines: Iterable[str]) -> Iterator[Graph]:
    """Decode a corpus one line at a time, skipping blank lines.

    :param lines: text lines, e.g. an open file
    :return: generator of graphs in corpus order
    :raise Graph6FormatError: naming the 1-based line number of a malformed line
    """
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            yield parse_graph6(line.strip())
        except Graph6FormatError as e:
            _logger.error("Malformed graph6 data on line %s: %s", lineno, e)
            msg = f"line {lineno}: {e}"
            raise Graph6FormatError(msg) from e
