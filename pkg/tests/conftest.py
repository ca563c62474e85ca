"""Provide basic test configuration and fixture root."""

from pathlib import Path

import pytest

from hamsquare.graphs.graph import Graph


@pytest.fixture(scope="session")
def fixtures_dir():
    """Provide path to fixtures directory."""
    return Path(__file__).resolve().parent / "fixtures"


@pytest.fixture(scope="session")
def bowtie():
    """Provide two triangles sharing vertex 2."""
    return Graph.from_edges(5, [(0, 1), (0, 2), (1, 2), (2, 3), (2, 4), (3, 4)])


@pytest.fixture(scope="session")
def k23():
    """Provide ``K_{2,3}`` with sides ``{0, 1}`` and ``{2, 3, 4}``."""
    return Graph.from_edges(5, [(u, v) for u in (0, 1) for v in (2, 3, 4)])
