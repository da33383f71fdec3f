import numpy as np
import pytest

from wsbm.model import PartialLabels, WeightedGraph

# 10-node worked example (weights on present edges, 0 = absent)
EXAMPLE_C = np.array(
    [
        [0, 2, 2, 0, 2, 2, 0, 0, 0, 1],
        [2, 0, 2, 0, 0, 0, 0, 0, 0, 0],
        [2, 2, 0, 2, 0, 0, 3, 4, 0, 4],
        [0, 0, 2, 0, 1, 3, 2, 0, 0, 0],
        [2, 0, 0, 1, 0, 0, 3, 0, 0, 0],
        [2, 0, 0, 3, 0, 0, 0, 0, 0, 0],
        [0, 0, 3, 2, 3, 0, 0, 0, 4, 0],
        [0, 0, 4, 0, 0, 0, 0, 0, 6, 2],
        [0, 0, 0, 0, 0, 0, 4, 6, 0, 0],
        [1, 0, 4, 0, 0, 0, 0, 2, 0, 0],
    ],
    dtype=float,
)

# printed pass-to-ranks matrix, times 34 (entries are halves over 17)
EXAMPLE_PTR_X34 = np.array(
    [
        [0, 13, 13, 0, 13, 13, 0, 0, 0, 3],
        [13, 0, 13, 0, 0, 0, 0, 0, 0, 0],
        [13, 13, 0, 13, 0, 0, 24, 30, 0, 30],
        [0, 0, 13, 0, 3, 24, 13, 0, 0, 0],
        [13, 0, 0, 3, 0, 0, 24, 0, 0, 0],
        [13, 0, 0, 24, 0, 0, 0, 0, 0, 0],
        [0, 0, 24, 13, 24, 0, 0, 0, 30, 0],
        [0, 0, 30, 0, 0, 0, 0, 0, 34, 13],
        [0, 0, 0, 0, 0, 0, 30, 34, 0, 0],
        [3, 0, 30, 0, 0, 0, 0, 13, 0, 0],
    ]
)

EXAMPLE_PTR_POSITIONS = [0.26, 0.18, 0.77, 0.30, 0.25, 0.14, 0.61, 0.65, 0.55, 0.44]
EXAMPLE_ADJ_POSITIONS = [0.78, 0.46, 0.97, 0.68, 0.56, 0.38, 0.66, 0.49, 0.30, 0.59]


@pytest.fixture
def example_graph():
    return WeightedGraph.from_matrix(EXAMPLE_C)


@pytest.fixture
def example_labels():
    # nodes 1, 3 in block 1 and 8, 10 in block 2 (1-based) -> 0-based here
    return PartialLabels(10, 2, {0: 0, 2: 0, 7: 1, 9: 1})


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
