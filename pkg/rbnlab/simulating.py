import logging
import math
from enum import Enum
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from rbnlab.exceptions import IncompatibleSpecs, ShapeMismatch
from rbnlab.speccing import RbnParams, WiringDistribution, WiringKind
from rbnlab.utils.rng_utils import RngStream, derive_stream

"""
Random Boolean networks and their synchronous dynamics.

Conventions: a node reads its k inputs in wiring-row order, and the first input is the most
significant bit of the truth table index. States are uint8 vectors, evolution diagrams are
uint8 matrices with one state per row (row 0 is the initial state).
"""

REGIME_TOLERANCE = 1e-12

# NetworkState is a uint8 vector of length N, EvolutionDiagram a (T, N) uint8 matrix
NetworkState = np.ndarray
EvolutionDiagram = np.ndarray

logger = logging.getLogger(__name__)


class Regime(Enum):
    ORDERED = "ordered"
    CRITICAL = "critical"
    CHAOTIC = "chaotic"


class BooleanNetwork(object):
    """A Boolean network: who is wired to whom, and the Boolean function of every node.

    wiring[i] lists the inputs j_1..j_k of node i, truth_tables[i] its 2^k outputs."""

    params: RbnParams
    wiring: np.ndarray
    truth_tables: np.ndarray

    def __init__(self, params: RbnParams, wiring: np.ndarray, truth_tables: np.ndarray):
        wiring = np.asarray(wiring, dtype=np.int64)
        truth_tables = np.asarray(truth_tables, dtype=np.uint8)
        n, k = params.n_nodes, params.in_degree
        if wiring.shape != (n, k):
            raise ShapeMismatch(
                "Wiring has shape %s, but N=%d and k=%d need %s"
                % (wiring.shape, n, k, (n, k))
            )
        if truth_tables.shape != (n, 2 ** k):
            raise ShapeMismatch(
                "Truth tables have shape %s, but N=%d and k=%d need %s"
                % (truth_tables.shape, n, k, (n, 2 ** k))
            )
        if wiring.size and (wiring.min() < 0 or wiring.max() >= n):
            raise IncompatibleSpecs("Wiring refers to nodes outside [0, %d)" % n)
        if truth_tables.size and truth_tables.max() > 1:
            raise IncompatibleSpecs("Truth tables may only hold 0 and 1")
        self.params = params
        self.wiring = wiring
        self.truth_tables = truth_tables
        self._weights = 1 << np.arange(k - 1, -1, -1, dtype=np.int64)

    @property
    def n_nodes(self) -> int:
        return self.params.n_nodes

    @property
    def in_degree(self) -> int:
        return self.params.in_degree

    def table_indices(self, states: np.ndarray) -> np.ndarray:
        """Truth table index of every node, for one state (N,) or many states (M, N)."""
        return states[..., self.wiring].astype(np.int64) @ self._weights

    def __eq__(self, other):
        return (
            isinstance(other, BooleanNetwork)
            and self.params == other.params
            and np.array_equal(self.wiring, other.wiring)
            and np.array_equal(self.truth_tables, other.truth_tables)
        )

    def __repr__(self):
        return "BooleanNetwork: <N=%d, k=%d, p=%s, wiring=%s>" % (
            self.n_nodes,
            self.in_degree,
            self.params.bias,
            self.params.wiring_dist,
        )


def generate_wiring(params: RbnParams, rng: RngStream) -> np.ndarray:
    """Draw the N x k wiring matrix. Inputs are drawn with replacement, so duplicates may occur."""
    n, k = params.n_nodes, params.in_degree
    dist = params.wiring_dist
    if dist.kind is WiringKind.UNIFORM:
        return np.array(rng.integers(n * k, n), dtype=np.int64).reshape(n, k)
    trials = rng.bernoulli_array(n * k * (n - 1), dist.success_prob)
    return trials.reshape(n, k, n - 1).sum(axis=2, dtype=np.int64)


def generate_truth_tables(params: RbnParams, rng: RngStream) -> np.ndarray:
    """Draw N truth tables of 2^k entries, each entry 1 with probability `bias`."""
    n, k = params.n_nodes, params.in_degree
    return rng.bernoulli_array(n * 2 ** k, params.bias).reshape(n, 2 ** k)


def generate_network(
    params: RbnParams,
    wiring_rng: RngStream,
    table_rng: Optional[RngStream] = None,
) -> BooleanNetwork:
    """Generate a network. With one stream, wiring and tables are drawn from it in that order."""
    wiring = generate_wiring(params, wiring_rng)
    tables = generate_truth_tables(
        params, table_rng if table_rng is not None else wiring_rng
    )
    return BooleanNetwork(params, wiring, tables)


def random_initial_state(n_nodes: int, rng: RngStream) -> NetworkState:
    """A fair coin for every node."""
    return rng.bernoulli_array(n_nodes, 0.5)


def seeded_network(
    params: RbnParams, master_seed: int
) -> Tuple[BooleanNetwork, NetworkState]:
    """The network and initial state of a single run: wiring from stream 0,
    the initial state from stream 1, truth tables from stream 2."""
    wiring = generate_wiring(params, derive_stream(master_seed, 0))
    initial = random_initial_state(params.n_nodes, derive_stream(master_seed, 1))
    tables = generate_truth_tables(params, derive_stream(master_seed, 2))
    return BooleanNetwork(params, wiring, tables), initial


def step(net: BooleanNetwork, state: NetworkState) -> NetworkState:
    """Synchronous update: every node applies its function to the current state."""
    state = np.asarray(state, dtype=np.uint8)
    if state.shape != (net.n_nodes,):
        raise ShapeMismatch(
            "State has length %s, but the network has %d nodes"
            % (state.shape, net.n_nodes)
        )
    return net.truth_tables[np.arange(net.n_nodes), net.table_indices(state)]


def step_states(net: BooleanNetwork, states: np.ndarray) -> np.ndarray:
    """step() for a batch of states, one per row."""
    states = np.asarray(states, dtype=np.uint8)
    if states.ndim != 2 or states.shape[1] != net.n_nodes:
        raise ShapeMismatch(
            "States have shape %s, but the network has %d nodes"
            % (states.shape, net.n_nodes)
        )
    return net.truth_tables[np.arange(net.n_nodes)[None, :], net.table_indices(states)]


def evolve(net: BooleanNetwork, initial: NetworkState, steps: int) -> EvolutionDiagram:
    """The time evolution diagram: `steps` rows, the first being the initial state."""
    if steps < 1:
        raise IncompatibleSpecs("steps needs to be at least 1, not %s" % steps, key="steps")
    diagram = np.empty((steps, net.n_nodes), dtype=np.uint8)
    initial = np.asarray(initial, dtype=np.uint8)
    if initial.shape != (net.n_nodes,):
        raise ShapeMismatch(
            "Initial state has length %s, but the network has %d nodes"
            % (initial.shape, net.n_nodes)
        )
    diagram[0] = initial
    for t in range(1, steps):
        diagram[t] = step(net, diagram[t - 1])
    return diagram


def find_recurrence(diagram: EvolutionDiagram) -> Optional[Tuple[int, int]]:
    """Where a trajectory runs into its attractor: (first time of the recurring state, period).
    None if no state repeats within the diagram."""
    seen: Dict[bytes, int] = {}
    for t, row in enumerate(diagram):
        key = row.tobytes()
        if key in seen:
            return seen[key], t - seen[key]
        seen[key] = t
    return None


def classify_regime(k: int, p: float) -> Regime:
    """Ordered, critical or chaotic, by comparing 2kp(1-p) to 1."""
    if not 0 <= p <= 1:
        raise IncompatibleSpecs("p needs to lie in [0, 1], not %s" % p, key="bias")
    sensitivity = 2 * k * p * (1 - p)
    if abs(sensitivity - 1) <= REGIME_TOLERANCE:
        return Regime.CRITICAL
    if sensitivity > 1:
        return Regime.CHAOTIC
    return Regime.ORDERED


def theoretical_critical_p(k: int) -> Tuple[float, float]:
    """The two biases at the edge of chaos for in-degree k, i.e. the roots of 2kp(1-p) = 1."""
    if k < 2:
        raise IncompatibleSpecs(
            "No critical bias exists for in-degree %s (k >= 2 needed)" % k, key="in_degree"
        )
    root = math.sqrt(1 - 2 / k)
    return (1 - root) / 2, (1 + root) / 2


def critical_in_degree(p: float) -> float:
    """k_c = 1 / (2p(1-p)), the in-degree at which bias p sits at the edge of chaos."""
    if not 0 < p < 1:
        raise IncompatibleSpecs(
            "The critical in-degree needs 0 < p < 1, not %s" % p, key="bias"
        )
    return 1 / (2 * p * (1 - p))


def regime_gallery(
    n_nodes: int,
    in_degree: int,
    biases: Sequence[float],
    steps: int,
    master_seed: int,
    wiring_dist: WiringDistribution = None,
) -> Dict[float, EvolutionDiagram]:
    """Evolution diagrams for several biases, sharing one wiring and one initial state,
    so the ordered and chaotic regimes can be put side by side."""
    base = RbnParams(n_nodes, in_degree, 0.5, wiring_dist)
    wiring = generate_wiring(base, derive_stream(master_seed, 0))
    initial = random_initial_state(n_nodes, derive_stream(master_seed, 1))
    diagrams = {}
    for i, bias in enumerate(biases):
        params = base.with_bias(bias)
        tables = generate_truth_tables(params, derive_stream(master_seed, 2 + i))
        net = BooleanNetwork(params, wiring, tables)
        diagrams[bias] = evolve(net, initial, steps)
        logger.debug(
            "Evolved p=%s (%s regime)" % (bias, classify_regime(in_degree, bias).value)
        )
    return diagrams
