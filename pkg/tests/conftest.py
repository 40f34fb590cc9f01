import numpy as np
import pytest

from sparsim.graph import Graph

import helpers


def pytest_terminal_summary(terminalreporter):
    if not helpers.CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(helpers.CRITERIA):
        status, detail = helpers.CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d}: {status}  {detail}")


@pytest.fixture
def bridge_graph():
    """Two triangles {a,b,c} and {d,e,f} joined by the bridge c-d."""
    return Graph(
        "abcdef",
        [("a", "b"), ("b", "c"), ("a", "c"), ("d", "e"), ("e", "f"), ("d", "f"), ("c", "d")],
    )


@pytest.fixture
def two_triangles():
    return Graph("abcdef", [("a", "b"), ("b", "c"), ("a", "c"), ("d", "e"), ("e", "f"), ("d", "f")])


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
