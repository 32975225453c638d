"""
A splitmix64 random stream, so that every random draw in a run is reproducible from
(master_seed, stream_id) alone, in any language.
"""
from typing import List, Tuple

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX_1 = 0xBF58476D1CE4E5B9
MIX_2 = 0x94D049BB133111EB


def splitmix64(state: int) -> Tuple[int, int]:
    """Advance a splitmix64 state once. Return the new state and the output."""
    state = (state + GOLDEN_GAMMA) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * MIX_1) & MASK64
    z = ((z ^ (z >> 27)) * MIX_2) & MASK64
    return state, z ^ (z >> 31)


def splitmix64_next(state: int) -> int:
    """The first output of a splitmix64 generator started at this state."""
    return splitmix64(state & MASK64)[1]


def _mix_array(z: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX_1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX_2)
    return z ^ (z >> np.uint64(31))


class RngStream(object):
    """A deterministic stream of 64-bit values (splitmix64).

    Array draws produce exactly the values repeated calls to next_u64 would."""

    state: int

    def __init__(self, state: int):
        self.state = int(state) & MASK64

    def next_u64(self) -> int:
        self.state, z = splitmix64(self.state)
        return z

    def next_u64_array(self, size: int) -> np.ndarray:
        if size <= 0:
            return np.zeros(0, dtype=np.uint64)
        with np.errstate(over="ignore"):
            steps = np.arange(1, size + 1, dtype=np.uint64) * np.uint64(GOLDEN_GAMMA)
            z = np.uint64(self.state) + steps
        self.state = (self.state + size * GOLDEN_GAMMA) & MASK64
        return _mix_array(z)

    def uniform_array(self, size: int) -> np.ndarray:
        """Reals in [0, 1], as next value / 2^64."""
        return self.next_u64_array(size).astype(np.float64) / float(1 << 64)

    def bernoulli_array(self, size: int, prob: float) -> np.ndarray:
        """0/1 values, 1 iff next value / 2^64 < prob.
        The comparison is made on integers, so prob=1 gives only ones and prob=0 only zeros."""
        threshold = int(prob * float(1 << 64))
        values = self.next_u64_array(size)
        if threshold > MASK64:
            return np.ones(size, dtype=np.uint8)
        return (values < np.uint64(threshold)).astype(np.uint8)

    def integers(self, size: int, upper: int) -> List[int]:
        """Uniform integers on [0, upper), as floor(upper * value / 2^64), computed exactly."""
        return [(upper * int(v)) >> 64 for v in self.next_u64_array(size)]

    def __repr__(self):
        return "RngStream: <state=%#018x>" % self.state


def derive_stream(master_seed: int, stream_id: int) -> RngStream:
    """The stream for one task of a run. Same (master_seed, stream_id), same stream,
    no matter in which order or on which worker tasks are executed."""
    mixed = (int(master_seed) & MASK64) ^ splitmix64_next(int(stream_id))
    return RngStream(splitmix64_next(mixed))


def stream_id_for(*keys: int) -> int:
    """Fold task keys (e.g. k-index, p-index, sample-index) into one stream id."""
    stream_id = 0
    for key in keys:
        stream_id = splitmix64_next(stream_id ^ (int(key) & MASK64))
    return stream_id
