import logging
from typing import Tuple

import numpy as np

from rbnlab import enumerating, simulating, speccing
from rbnlab.measuring import CtmTable

logger = logging.getLogger(__name__)

# Four nodes, two inputs each:
#   x0' = x1 AND x2,  x1' = x0 OR x3,  x2' = x3 XOR x1,  x3' = NOT (x0 AND x2)
FIXTURE_WIRING = [[1, 2], [0, 3], [3, 1], [0, 2]]
FIXTURE_TABLES = [[0, 0, 0, 1], [0, 1, 1, 1], [0, 1, 1, 0], [1, 1, 1, 0]]
# worked out by hand, state v = 8 x0 + 4 x1 + 2 x2 + x3
FIXTURE_SUCCESSORS = [1, 7, 1, 7, 3, 5, 11, 13, 5, 7, 4, 6, 7, 5, 14, 12]
FIXTURE_CYCLES = [[5], [6, 11], [14]]
FIXTURE_BASINS = [13, 2, 1]
FIXTURE_TRANSIENTS = [4, 3, 4, 3, 4, 0, 0, 2, 1, 3, 5, 0, 3, 1, 0, 4]


def fixture_network() -> simulating.BooleanNetwork:
    tables = np.array(FIXTURE_TABLES, dtype=np.uint8)
    return simulating.BooleanNetwork(
        speccing.RbnParams(4, 2, float(tables.mean())), FIXTURE_WIRING, tables
    )


def seeded_network(
    n_nodes: int, in_degree: int, bias: float, seed: int
) -> Tuple[simulating.BooleanNetwork, np.ndarray]:
    return simulating.seeded_network(speccing.RbnParams(n_nodes, in_degree, bias), seed)


def string_table() -> CtmTable:
    """The String table of all (2,2) machines (cached, built once per test session)."""
    return enumerating.string_table(2)


def square_table() -> CtmTable:
    """The 4x4 table derived from string_table()."""
    return enumerating.square_table(2)


def random_bits(size: int, seed: int = 0) -> np.ndarray:
    return np.random.RandomState(seed).randint(0, 2, size=size).astype(np.uint8)
