import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Union

import networkx as nx
import numpy as np
from scipy import sparse as sp

from rbnlab.exceptions import IncompatibleSpecs, ShapeMismatch, StateSpaceTooLarge
from rbnlab.simulating import BooleanNetwork, NetworkState, step_states

"""
The state transition diagram of a network: all 2^N states, each pointing to its successor.
It is a functional graph, so every state runs into exactly one cycle (its attractor).

States are encoded as N-bit big-endian integers, node 0 being the most significant bit.
"""

DEFAULT_MAX_NODES = 20
# states stepped per batch when building a diagram
STATE_CHUNK = 2 ** 16
# largest diagram we hand out as a dense 2^N x 2^N matrix
MAX_DENSE_NODES = 14

logger = logging.getLogger(__name__)


def encode_state(state: NetworkState) -> int:
    state = np.asarray(state, dtype=np.int64)
    return int(state @ (1 << np.arange(state.size - 1, -1, -1, dtype=np.int64)))


def decode_states(codes: np.ndarray, n_nodes: int) -> np.ndarray:
    """One row of N bits per state code."""
    shifts = np.arange(n_nodes - 1, -1, -1, dtype=np.int64)
    return ((np.asarray(codes, dtype=np.int64)[:, None] >> shifts) & 1).astype(np.uint8)


def decode_state(code: int, n_nodes: int) -> NetworkState:
    return decode_states(np.array([code]), n_nodes)[0]


class TransitionDiagram(object):
    """successor[v] is the state that follows state v."""

    n_nodes: int
    successor: np.ndarray

    def __init__(self, n_nodes: int, successor: np.ndarray):
        successor = np.asarray(successor, dtype=np.int64)
        if successor.shape != (2 ** n_nodes,):
            raise ShapeMismatch(
                "A diagram of %d nodes has %d states, got %s successors"
                % (n_nodes, 2 ** n_nodes, successor.shape)
            )
        if successor.min() < 0 or successor.max() >= successor.size:
            raise IncompatibleSpecs("Successors need to be states in [0, %d)" % successor.size)
        self.n_nodes = n_nodes
        self.successor = successor

    @property
    def n_states(self) -> int:
        return self.successor.size

    def __eq__(self, other):
        return (
            isinstance(other, TransitionDiagram)
            and self.n_nodes == other.n_nodes
            and np.array_equal(self.successor, other.successor)
        )

    def __repr__(self):
        return "TransitionDiagram: <%d nodes, %d states>" % (self.n_nodes, self.n_states)


def build_transition_diagram(
    net: BooleanNetwork, max_nodes: int = DEFAULT_MAX_NODES, workers: int = 1
) -> TransitionDiagram:
    """Step every one of the 2^N states once. State ranges are independent and may be
    stepped in several threads; the result does not depend on how they are split."""
    n = net.n_nodes
    if n > max_nodes:
        raise StateSpaceTooLarge(
            "A network of %d nodes has 2^%d states, above the cap of 2^%d (see max_nodes)"
            % (n, n, max_nodes)
        )
    n_states = 2 ** n
    weights = 1 << np.arange(n - 1, -1, -1, dtype=np.int64)
    successor = np.empty(n_states, dtype=np.int64)

    def step_range(start: int):
        stop = min(start + STATE_CHUNK, n_states)
        states = decode_states(np.arange(start, stop), n)
        successor[start:stop] = step_states(net, states).astype(np.int64) @ weights

    starts = range(0, n_states, STATE_CHUNK)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(step_range, starts))
    else:
        for start in starts:
            step_range(start)
    logger.debug("Built transition diagram of %d states" % n_states)
    return TransitionDiagram(n, successor)


class AttractorSet(object):
    """The cycles of a transition diagram, and how every state gets there.

    cycles[i] starts at its smallest state; cycles are ordered by that state.
    attractor_of[v] is the index of the cycle state v runs into,
    transient_length[v] the number of steps it takes to get onto that cycle."""

    cycles: List[List[int]]
    basin_size: np.ndarray
    attractor_of: np.ndarray
    transient_length: np.ndarray

    def __init__(
        self,
        cycles: List[List[int]],
        attractor_of: np.ndarray,
        transient_length: np.ndarray,
    ):
        self.cycles = cycles
        self.attractor_of = attractor_of
        self.transient_length = transient_length
        self.basin_size = np.bincount(attractor_of, minlength=len(cycles))

    @property
    def n_attractors(self) -> int:
        return len(self.cycles)

    def on_cycle(self) -> np.ndarray:
        """Boolean mask of the states that lie on an attractor cycle."""
        return self.transient_length == 0

    def fixed_points(self) -> List[int]:
        return [cycle[0] for cycle in self.cycles if len(cycle) == 1]

    def __repr__(self):
        return "AttractorSet: <%d attractors, cycle lengths %s, basins %s>" % (
            self.n_attractors,
            [len(c) for c in self.cycles],
            self.basin_size.tolist(),
        )


def find_attractors(diagram: TransitionDiagram) -> AttractorSet:
    """Walk successors from every unvisited state, marking states white (unseen), grey (on the
    current walk) or black (settled). Reaching a grey state closes a new cycle; reaching a
    black one joins a known attractor. Either way the walk is then settled back to front."""
    successor = diagram.successor.tolist()
    n_states = diagram.n_states
    white, grey, black = 0, 1, 2
    color = [white] * n_states
    attractor_of = [-1] * n_states
    transient = [-1] * n_states
    cycles: List[List[int]] = []

    for origin in range(n_states):
        if color[origin] != white:
            continue
        walk = []
        position: Dict[int, int] = {}
        state = origin
        while color[state] == white:
            color[state] = grey
            position[state] = len(walk)
            walk.append(state)
            state = successor[state]
        if color[state] == grey:
            start = position[state]
            cycle = walk[start:]
            attractor = len(cycles)
            cycles.append(cycle)
            for member in cycle:
                attractor_of[member] = attractor
                transient[member] = 0
                color[member] = black
            walk = walk[:start]
            distance = 0
        else:
            attractor = attractor_of[state]
            distance = transient[state]
        for member in reversed(walk):
            distance += 1
            attractor_of[member] = attractor
            transient[member] = distance
            color[member] = black

    # canonical form: every cycle starts at its smallest state, cycles ordered by it
    rotated = []
    for cycle in cycles:
        smallest = cycle.index(min(cycle))
        rotated.append(cycle[smallest:] + cycle[:smallest])
    order = sorted(range(len(rotated)), key=lambda i: rotated[i][0])
    renumber = np.empty(len(order), dtype=np.int64)
    renumber[order] = np.arange(len(order))
    attractors = AttractorSet(
        [rotated[i] for i in order],
        renumber[np.array(attractor_of, dtype=np.int64)],
        np.array(transient, dtype=np.int64),
    )
    logger.debug("Found %s" % attractors)
    return attractors


class PrestigeVector(object):
    """Prestige (eigenvector centrality over incoming transitions) of every state."""

    scores: np.ndarray
    iterations_used: int
    converged: bool

    def __init__(self, scores: np.ndarray, iterations_used: int, converged: bool):
        self.scores = scores
        self.iterations_used = iterations_used
        self.converged = converged

    def ranking(self, descending: bool = True) -> np.ndarray:
        """States by score; equal scores are ordered by ascending state id."""
        states = np.arange(self.scores.size)
        key = -self.scores if descending else self.scores
        return np.lexsort((states, key))

    def __repr__(self):
        return "PrestigeVector: <%d states, %s after %d iterations>" % (
            self.scores.size,
            "converged" if self.converged else "not converged",
            self.iterations_used,
        )


def prestige_centrality(
    diagram: TransitionDiagram,
    tol: float = 1e-10,
    max_iter: int = 1000,
    averaging: bool = False,
) -> PrestigeVector:
    """Power iteration x'[u] = sum of x[v] over the states v with successor[v] = u, from the
    uniform vector, L2-normalized every round, until no score moves by tol or more.

    With averaging, the running mean of the normalized iterates is what has to settle. This
    gives limit cycles a stable answer where the plain iteration keeps rotating."""
    n_states = diagram.n_states
    x = np.full(n_states, 1 / np.sqrt(n_states))
    mean = x.copy()
    current = x
    for iteration in range(1, max_iter + 1):
        x = np.bincount(diagram.successor, weights=x, minlength=n_states)
        x /= np.linalg.norm(x)
        if averaging:
            mean = mean + (x - mean) / (iteration + 1)
            candidate = mean / np.linalg.norm(mean)
        else:
            candidate = x
        change = np.abs(candidate - current).max()
        current = candidate
        if change < tol:
            return PrestigeVector(current, iteration, True)
    logger.warning(
        "Prestige did not converge within %d iterations (last change %.3g)" % (max_iter, change)
    )
    return PrestigeVector(current, max_iter, False)


def in_degrees(diagram: TransitionDiagram) -> np.ndarray:
    """Number of predecessors of every state (a fixed point counts itself)."""
    return np.bincount(diagram.successor, minlength=diagram.n_states)


def adjacency_matrix(
    diagram: TransitionDiagram, sparse: bool = False
) -> Union[np.ndarray, sp.csr_matrix]:
    """The 2^N x 2^N 0/1 matrix with a one at (v, successor[v])."""
    n_states = diagram.n_states
    if sparse:
        return sp.csr_matrix(
            (np.ones(n_states, dtype=np.uint8), (np.arange(n_states), diagram.successor)),
            shape=(n_states, n_states),
        )
    if diagram.n_nodes > MAX_DENSE_NODES:
        raise StateSpaceTooLarge(
            "A dense adjacency matrix of 2^%d states is too large; ask for a sparse one"
            % diagram.n_nodes
        )
    matrix = np.zeros((n_states, n_states), dtype=np.uint8)
    matrix[np.arange(n_states), diagram.successor] = 1
    return matrix


def as_networkx(diagram: TransitionDiagram) -> nx.DiGraph:
    graph = nx.DiGraph()
    graph.add_nodes_from(range(diagram.n_states))
    graph.add_edges_from(enumerate(diagram.successor.tolist()))
    return graph
