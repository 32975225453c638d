import logging
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from enum import Enum
from functools import lru_cache
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from rbnlab.exceptions import IncompatibleSpecs, ShapeMismatch
from rbnlab.measuring import BlockShape, CtmTable

"""
CTM tables from first principles: run every small Turing machine (2 symbols, 1 to 3 states)
on a blank tape, count what the halting ones leave behind, and turn output frequencies
into complexities with the coding theorem, CTM(s) = -log2(m(s)).

Machine formalism: a machine with n states has one entry per (state, read symbol). An entry
either writes a symbol, moves Left or Right and goes to one of the n states (4n options), or
writes a symbol and halts with the head in place (2 options). That makes (4n+2)^(2n) machines.
The output of a halting run is the tape between the leftmost and the rightmost visited cell.

Matrices are measured with the 4x4 table pybdm publishes for 2D machines; a Square table derived
from our own String table stands in when pybdm is not there.
"""

DEFAULT_STEP_CAP = 500
MAX_STATES = 3
CHUNK_SIZE = 50000
HALT = -1
# pybdm dataset of 4x4 blocks from 2-symbol 2D machines
PYBDM_SQUARE_DATASET = "CTM-B2-D4x4"

logger = logging.getLogger(__name__)


class Move(Enum):
    LEFT = -1
    STAY = 0
    RIGHT = 1


class Transition(object):
    """What a machine does for one (state, read symbol): write, move, and where to go next.
    A halting transition has next_state HALT and does not move."""

    write: int
    move: Move
    next_state: int

    def __init__(self, write: int, move: Move, next_state: int):
        self.write = write
        self.move = move
        self.next_state = next_state

    @property
    def halts(self) -> bool:
        return self.next_state == HALT

    def __eq__(self, other):
        return isinstance(other, Transition) and vars(self) == vars(other)

    def __repr__(self):
        if self.halts:
            return "%dH" % self.write
        return "%d%s%d" % (self.write, "L" if self.move is Move.LEFT else "R", self.next_state)


class TuringMachine(object):
    """A 2-symbol Turing machine with a total transition table."""

    n_states: int
    transition: Dict[Tuple[int, int], Transition]

    def __init__(self, n_states: int, transition: Dict[Tuple[int, int], Transition]):
        missing = [
            (s, r)
            for s in range(n_states)
            for r in (0, 1)
            if (s, r) not in transition
        ]
        if missing:
            raise IncompatibleSpecs("Transition table misses entries for %s" % missing)
        self.n_states = n_states
        self.transition = transition

    @classmethod
    def from_index(cls, n_states: int, index: int) -> "TuringMachine":
        digits = _index_digits(n_states, np.array([index], dtype=np.int64))[0]
        return cls(
            n_states,
            {
                (entry // 2, entry % 2): decode_entry(n_states, int(digit))
                for entry, digit in enumerate(digits)
            },
        )

    def __repr__(self):
        return "TuringMachine(%d): <%s>" % (
            self.n_states,
            " ".join(
                "%d%d:%r" % (s, r, self.transition[(s, r)])
                for s in range(self.n_states)
                for r in (0, 1)
            ),
        )


def _check_states(n_states: int):
    if int(n_states) != n_states or not 1 <= n_states <= MAX_STATES:
        raise IncompatibleSpecs(
            "Machines with %s states are not enumerated (1 to %d)" % (n_states, MAX_STATES),
            key="ctm_states",
        )


def options_per_entry(n_states: int) -> int:
    return 4 * n_states + 2


def machine_count(n_states: int) -> int:
    """(4n+2)^(2n)"""
    _check_states(n_states)
    return options_per_entry(n_states) ** (2 * n_states)


def decode_entry(n_states: int, digit: int) -> Transition:
    if digit >= 4 * n_states:
        return Transition(digit - 4 * n_states, Move.STAY, HALT)
    return Transition(digit % 2, Move.RIGHT if (digit // 2) % 2 else Move.LEFT, digit // 4)


def _index_digits(n_states: int, indices: np.ndarray) -> np.ndarray:
    """Base-(4n+2) digits of machine indices; digit j is the entry of (state j // 2, symbol j % 2)."""
    base = options_per_entry(n_states)
    digits = np.empty((indices.size, 2 * n_states), dtype=np.int64)
    rest = indices.copy()
    for j in range(2 * n_states):
        digits[:, j] = rest % base
        rest //= base
    return digits


def enumerate_machines(n_states: int) -> Iterator[TuringMachine]:
    """Every machine with n_states states, each exactly once, in index order."""
    _check_states(n_states)
    for index in range(machine_count(n_states)):
        yield TuringMachine.from_index(n_states, index)


class RunResult(object):
    """Halted with an output string, or timed out."""

    halted: bool
    output: Optional[str]
    steps: int

    def __init__(self, halted: bool, output: Optional[str], steps: int):
        self.halted = halted
        self.output = output
        self.steps = steps

    def __eq__(self, other):
        return isinstance(other, RunResult) and vars(self) == vars(other)

    def __repr__(self):
        if self.halted:
            return "Halted(%r after %d steps)" % (self.output, self.steps)
        return "TimedOut(%d steps)" % self.steps


def run_machine(tm: TuringMachine, step_cap: int = DEFAULT_STEP_CAP) -> RunResult:
    """Run a machine on a blank (all-zero) tape from cell 0 in state 0, for at most step_cap steps."""
    if step_cap < 1:
        raise IncompatibleSpecs("step_cap needs to be at least 1, not %s" % step_cap)
    tape: Dict[int, int] = {}
    head = leftmost = rightmost = 0
    state = 0
    for n_steps in range(1, step_cap + 1):
        transition = tm.transition[(state, tape.get(head, 0))]
        tape[head] = transition.write
        if transition.halts:
            output = "".join(str(tape.get(c, 0)) for c in range(leftmost, rightmost + 1))
            return RunResult(True, output, n_steps)
        head += transition.move.value
        leftmost = min(leftmost, head)
        rightmost = max(rightmost, head)
        state = transition.next_state
    return RunResult(False, None, step_cap)


class FrequencyDistribution(object):
    """How often each output string is produced by halting runs.

    Machines run on a blank-0 tape; runs on a blank-1 tape are their 0/1-swapped mirror image,
    so each halting run counts for its output and for the complement of its output.
    m(s) = counts[s] / total_halting."""

    n_states: int
    step_cap: int
    counts: Dict[str, int]
    # halting runs, over both blank tapes
    total_halting: int
    total_machines: int
    # runs, over both blank tapes
    total_runs: int
    # longest halting run seen
    max_steps: int

    def __init__(
        self,
        n_states: int,
        step_cap: int,
        counts: Dict[str, int],
        total_halting: int,
        total_machines: int,
        max_steps: int = 0,
    ):
        if sum(counts.values()) != total_halting:
            raise IncompatibleSpecs(
                "Counts add up to %d, not to the %d halting runs"
                % (sum(counts.values()), total_halting)
            )
        self.n_states = n_states
        self.step_cap = step_cap
        self.counts = dict(sorted(counts.items(), key=lambda kv: (len(kv[0]), kv[0])))
        self.total_halting = total_halting
        self.total_machines = total_machines
        self.total_runs = 2 * total_machines
        self.max_steps = max_steps

    def probability(self, output: str) -> float:
        return self.counts.get(output, 0) / self.total_halting

    def __repr__(self):
        return "FrequencyDistribution: <(%d,2), cap %d, %d outputs, %d of %d runs halt>" % (
            self.n_states,
            self.step_cap,
            len(self.counts),
            self.total_halting,
            self.total_runs,
        )


def _complement(output: str) -> str:
    return output.translate(str.maketrans("01", "10"))


def _window_keys(
    tape: np.ndarray, rows: np.ndarray, lefts: np.ndarray, rights: np.ndarray
) -> List[str]:
    """Output strings of halted machines, built per distinct (length, code) key."""
    lengths = rights - lefts + 1
    outputs: List[str] = []
    short = lengths <= 56
    if short.any():
        r, left, length = rows[short], lefts[short], lengths[short]
        codes = np.zeros(r.size, dtype=np.int64)
        for offset in range(int(length.max())):
            inside = offset < length
            cells = tape[r[inside], left[inside] + offset].astype(np.int64)
            codes[inside] = (codes[inside] << 1) | cells
        keys, key_counts = np.unique((length.astype(np.int64) << 56) | codes, return_counts=True)
        for key, count in zip(keys, key_counts):
            n_bits = int(key >> 56)
            code = int(key & ((1 << 56) - 1))
            outputs.extend([format(code, "0%db" % n_bits)] * int(count))
    for row, left, right in zip(rows[~short], lefts[~short], rights[~short]):
        outputs.append("".join(str(c) for c in tape[row, left : right + 1]))
    return outputs


def _run_index_range(args: Tuple[int, int, int, int]) -> Tuple[Counter, int, int]:
    """Run machines [start, stop) in one batch. Returns output counts (blank-0 tape only),
    number of halting machines, and the longest halting run."""
    n_states, step_cap, start, stop = args
    digits = _index_digits(n_states, np.arange(start, stop, dtype=np.int64))
    halting = digits >= 4 * n_states
    write = np.where(halting, digits - 4 * n_states, digits % 2).astype(np.uint8)
    move = np.where(halting, 0, np.where((digits // 2) % 2 == 1, 1, -1))
    next_state = np.where(halting, HALT, digits // 4)

    size = stop - start
    width = 2 * step_cap + 1
    tape = np.zeros((size, width), dtype=np.uint8)
    head = np.full(size, step_cap, dtype=np.int64)
    leftmost = head.copy()
    rightmost = head.copy()
    state = np.zeros(size, dtype=np.int64)

    active = np.arange(size)
    halted_rows: List[np.ndarray] = []
    max_steps = 0
    for n_steps in range(1, step_cap + 1):
        if active.size == 0:
            break
        h = head[active]
        entry = 2 * state[active] + tape[active, h]
        tape[active, h] = write[active, entry]
        stops = next_state[active, entry] == HALT
        if stops.any():
            halted_rows.append(active[stops])
            max_steps = n_steps
        active, entry, h = active[~stops], entry[~stops], h[~stops]
        h = h + move[active, entry]
        head[active] = h
        leftmost[active] = np.minimum(leftmost[active], h)
        rightmost[active] = np.maximum(rightmost[active], h)
        state[active] = next_state[active, entry]

    if not halted_rows:
        return Counter(), 0, 0
    rows = np.concatenate(halted_rows)
    outputs = _window_keys(tape, rows, leftmost[rows], rightmost[rows])
    return Counter(outputs), int(rows.size), max_steps


def build_frequency_distribution(
    n_states: int,
    step_cap: int = DEFAULT_STEP_CAP,
    workers: int = 1,
    chunk_size: int = CHUNK_SIZE,
) -> FrequencyDistribution:
    """Run every (n_states, 2) machine once and count the outputs of the halting ones.

    Machine index ranges are independent, so they may be spread over worker processes;
    the counts are merged by addition and do not depend on the partitioning."""
    _check_states(n_states)
    if step_cap < 1:
        raise IncompatibleSpecs("step_cap needs to be at least 1, not %s" % step_cap)
    total = machine_count(n_states)
    ranges = [
        (n_states, step_cap, start, min(start + chunk_size, total))
        for start in range(0, total, chunk_size)
    ]
    logger.info(
        "Running %d machines with %d states (step cap %d) in %d batches ..."
        % (total, n_states, step_cap, len(ranges))
    )
    if workers > 1 and len(ranges) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_index_range, ranges))
    else:
        results = [_run_index_range(r) for r in ranges]

    counts: Counter = Counter()
    halting_machines = 0
    max_steps = 0
    for batch_counts, batch_halting, batch_max_steps in results:
        counts.update(batch_counts)
        halting_machines += batch_halting
        max_steps = max(max_steps, batch_max_steps)
    completed: Counter = Counter()
    for output, count in counts.items():
        completed[output] += count
        completed[_complement(output)] += count

    dist = FrequencyDistribution(
        n_states,
        step_cap,
        dict(completed),
        total_halting=2 * halting_machines,
        total_machines=total,
        max_steps=max_steps,
    )
    logger.info("Built %s" % dist)
    return dist


def ctm_from_frequency(dist: FrequencyDistribution) -> CtmTable:
    """CTM(s) = -log2(counts[s] / total_halting), a String table over all observed outputs."""
    if dist.total_halting == 0 or not dist.counts:
        raise IncompatibleSpecs("No machine halted, so there is nothing to build a table from.")
    entries = {
        output: -math.log2(count / dist.total_halting)
        for output, count in dist.counts.items()
    }
    max_len = max(len(output) for output in entries)
    return CtmTable(BlockShape.string(max_len), entries)


def derive_square_table(string_table: CtmTable, side: int = 4) -> CtmTable:
    """A Square(side) table for 2D BDM, derived from a String table. This is the fallback for
    sides pybdm has no table for, or when pybdm cannot be loaded.

    The complexity of a block is the mean of the 1D BDM of its rows and of its columns,
    with strings of length `side` as 1D blocks."""
    shape = string_table.block_shape
    if shape.kind != BlockShape.STRING or shape.size < side:
        raise ShapeMismatch(
            "Deriving %dx%d blocks needs a String table covering length %d, got %s"
            % (side, side, side, shape)
        )
    if not 1 <= side <= 4:
        raise IncompatibleSpecs("Square tables are derived for sides 1 to 4, not %d" % side)
    n_bits = side * side
    codes = np.arange(2 ** n_bits, dtype=np.int64)
    shifts = np.arange(n_bits - 1, -1, -1, dtype=np.int64)
    blocks = ((codes[:, None] >> shifts) & 1).reshape(-1, side, side)
    weights = 1 << np.arange(side - 1, -1, -1, dtype=np.int64)
    line_values = string_table.dense_values(side)

    def lines_bdm(line_codes: np.ndarray) -> np.ndarray:
        multiplicity = (line_codes[:, :, None] == line_codes[:, None, :]).sum(axis=2)
        # every distinct line is seen `multiplicity` times, so each sighting carries 1/multiplicity
        return ((line_values[line_codes] + np.log2(multiplicity)) / multiplicity).sum(axis=1)

    values = (lines_bdm(blocks @ weights) + lines_bdm(blocks.transpose(0, 2, 1) @ weights)) / 2
    entries = {format(int(code), "0%db" % n_bits): float(v) for code, v in zip(codes, values)}
    return CtmTable(BlockShape.square(side), entries)


def _square_variants(block: np.ndarray) -> Iterator[np.ndarray]:
    """The block under the eight symmetries of the square, each also with its bits flipped."""
    for reflected in (block, block.T):
        for turns in range(4):
            rotated = np.rot90(reflected, turns)
            yield rotated
            yield 1 - rotated


def pybdm_square_table() -> Optional[CtmTable]:
    """The Square(4) table pybdm ships, computed from 2D Turing machines with 2 symbols.

    Blocks missing from the dataset take the value of a rotation, reflection or complement that
    is there, and the table fallback if none is. None if pybdm or its dataset cannot be loaded."""
    try:
        from pybdm.utils import get_ctm_dataset

        dataset = get_ctm_dataset(PYBDM_SQUARE_DATASET)[0][(4, 4)]
    except (ImportError, KeyError, ValueError) as e:
        logger.warning("Cannot load %s from pybdm: %s" % (PYBDM_SQUARE_DATASET, e))
        return None

    def key_of(block: np.ndarray) -> str:
        return "".join(str(int(bit)) for bit in block.ravel())

    entries = {}
    missing = 0
    for code in range(2 ** 16):
        block = np.array([int(bit) for bit in format(code, "016b")]).reshape(4, 4)
        value = None
        for variant in _square_variants(block):
            value = dataset.get(key_of(variant))
            if value is not None:
                break
        if value is None:
            missing += 1
        else:
            entries[key_of(block)] = float(value)
    if missing:
        logger.info(
            "%d blocks are not in %s, they get the fallback" % (missing, PYBDM_SQUARE_DATASET)
        )
    return CtmTable(BlockShape.square(4), entries)


@lru_cache(maxsize=8)
def string_table(n_states: int = 2, step_cap: int = DEFAULT_STEP_CAP) -> CtmTable:
    """The String CTM table of all (n_states, 2) machines, built once per process."""
    return ctm_from_frequency(build_frequency_distribution(n_states, step_cap))


@lru_cache(maxsize=8)
def square_table(
    n_states: int = 2, step_cap: int = DEFAULT_STEP_CAP, side: int = 4, derived: bool = False
) -> CtmTable:
    """The Square table BDM uses on matrices, built once per process.

    For 4x4 blocks this is pybdm's table. Other sides, `derived=True` or a missing pybdm give the
    table derived from string_table(n_states, step_cap)."""
    if side == 4 and not derived:
        table = pybdm_square_table()
        if table is not None:
            return table
        logger.warning("Falling back to the 4x4 table derived from %d-state machines" % n_states)
    return derive_square_table(string_table(n_states, step_cap), side)
