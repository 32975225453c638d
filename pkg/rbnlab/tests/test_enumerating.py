import sys
from collections import Counter

import numpy as np
import pytest

from rbnlab.enumerating import (
    HALT,
    FrequencyDistribution,
    Move,
    Transition,
    TuringMachine,
    build_frequency_distribution,
    ctm_from_frequency,
    derive_square_table,
    enumerate_machines,
    machine_count,
    pybdm_square_table,
    run_machine,
    square_table,
)
from rbnlab.exceptions import IncompatibleSpecs, ShapeMismatch
from rbnlab.measuring import BlockShape, CtmTable, ctm_lookup
from rbnlab.tests import utils as test_utils


def complement(s: str) -> str:
    return s.translate(str.maketrans("01", "10"))


@pytest.mark.parametrize("n_states, count", [(1, 36), (2, 10000), (3, 7529536)])
def test_machine_count(n_states, count):
    assert machine_count(n_states) == count


def test_machine_count_out_of_range():
    with pytest.raises(IncompatibleSpecs) as e_info:
        machine_count(4)
    assert e_info.value.key == "ctm_states"


def test_enumerate_machines_lists_each_once():
    machines = list(enumerate_machines(1))
    assert len(machines) == 36
    assert len(set(repr(m) for m in machines)) == 36


def test_decoding_machine_index():
    tm = TuringMachine.from_index(1, 5 + 6 * 2)
    assert tm.transition[(0, 0)] == Transition(1, Move.STAY, HALT)
    assert tm.transition[(0, 1)] == Transition(0, Move.RIGHT, 0)


def test_incomplete_machine():
    with pytest.raises(IncompatibleSpecs):
        TuringMachine(1, {(0, 0): Transition(1, Move.STAY, HALT)})


def test_run_machine_halting_at_once():
    # a halting entry writes and leaves the head where it is, so "write 1 and halt" leaves one
    # visited cell, "1" (a halt that also moved Right would leave the two-cell window "10")
    result = run_machine(TuringMachine.from_index(1, 5), step_cap=1)
    assert result.halted
    assert result.output == "1"
    assert result.steps == 1


def test_run_machine_four_cells():
    # A0 -> 1RB, A1 -> 1LB, B0 -> 1LA, B1 -> write 1 and halt
    result = run_machine(TuringMachine.from_index(2, 7 + 5 * 10 + 1 * 100 + 9 * 1000))
    assert result.halted
    assert result.output == "1111"
    assert result.steps == 6


def test_run_machine_times_out():
    # always 0, Right, stay in state 0
    result = run_machine(TuringMachine.from_index(1, 2 + 2 * 6), step_cap=20)
    assert not result.halted
    assert result.output is None
    with pytest.raises(IncompatibleSpecs):
        run_machine(TuringMachine.from_index(1, 0), step_cap=0)


def test_batched_runs_agree_with_single_runs():
    step_cap = 30
    expected = Counter()
    halting = 0
    for tm in enumerate_machines(2):
        result = run_machine(tm, step_cap)
        if result.halted:
            halting += 1
            expected[result.output] += 1
            expected[complement(result.output)] += 1
    dist = build_frequency_distribution(2, step_cap)
    assert dist.counts == dict(expected)
    assert dist.total_halting == 2 * halting
    assert dist.total_runs == 20000


@pytest.mark.parametrize("chunk_size", [7, 1000])
def test_distribution_does_not_depend_on_partitioning(chunk_size):
    reference = build_frequency_distribution(2, 100)
    dist = build_frequency_distribution(2, 100, chunk_size=chunk_size)
    assert dist.counts == reference.counts
    assert dist.total_halting == reference.total_halting
    assert dist.max_steps == reference.max_steps


def test_distribution_with_workers():
    reference = build_frequency_distribution(1, 50)
    dist = build_frequency_distribution(1, 50, workers=2, chunk_size=10)
    assert dist.counts == reference.counts


def test_complement_and_reversal_symmetry():
    dist = build_frequency_distribution(2)
    for output, count in dist.counts.items():
        assert dist.counts[complement(output)] == count
        assert dist.counts[output[::-1]] == count
    assert dist.total_halting <= dist.total_runs
    assert sum(dist.counts.values()) == dist.total_halting


@pytest.mark.slow
def test_three_state_distribution():
    dist = build_frequency_distribution(3)
    assert dist.total_machines == 7529536
    for output, count in dist.counts.items():
        assert dist.counts[complement(output)] == count
        assert dist.counts[output[::-1]] == count
    table = ctm_from_frequency(dist)
    assert sum(2 ** -v for v in table.entries.values()) == pytest.approx(1, abs=1e-12)
    assert ctm_lookup(table, "0") == min(table.entries.values())


def test_one_state_distribution():
    dist = build_frequency_distribution(1)
    # halting needs the (state 0, symbol 0) entry to halt: 2 of 6 options, times 6 for the other entry
    assert dist.total_halting == 2 * 12
    assert dist.counts == {"0": 12, "1": 12}


def test_ctm_probabilities_add_up_to_one():
    table = ctm_from_frequency(build_frequency_distribution(2))
    assert sum(2 ** -v for v in table.entries.values()) == pytest.approx(1, abs=1e-12)
    assert min(table.entries.values()) > 0
    assert table.block_shape.kind == BlockShape.STRING


def test_simple_strings_are_less_complex():
    table = test_utils.string_table()
    assert ctm_lookup(table, "0") < ctm_lookup(table, "0101")
    assert ctm_lookup(table, "0") == ctm_lookup(table, "1")


def test_ctm_needs_halting_runs():
    with pytest.raises(IncompatibleSpecs):
        ctm_from_frequency(FrequencyDistribution(1, 1, {}, 0, 36))


def test_derive_square_table():
    string_table = test_utils.string_table()
    square = derive_square_table(string_table, 4)
    assert square.block_shape == BlockShape.square(4)
    assert len(square) == 2 ** 16
    # four identical rows and four identical columns
    assert ctm_lookup(square, np.zeros((4, 4))) == pytest.approx(
        ctm_lookup(string_table, "0000") + 2
    )
    block = test_utils.random_bits(16, seed=4).reshape(4, 4)
    assert ctm_lookup(square, block) == pytest.approx(ctm_lookup(square, block.T))


def test_derive_square_table_needs_a_string_table():
    square = CtmTable(BlockShape.square(2), {"0000": 1.0})
    with pytest.raises(ShapeMismatch):
        derive_square_table(square, 2)
    short = CtmTable(BlockShape.string(2), {"0": 1.0, "11": 2.0})
    with pytest.raises(ShapeMismatch):
        derive_square_table(short, 4)


def test_square_table_comes_from_pybdm():
    table = test_utils.square_table()
    assert table == pybdm_square_table()
    assert table.block_shape == BlockShape.square(4)
    zeros = ctm_lookup(table, np.zeros((4, 4)))
    for seed in range(5):
        assert zeros < ctm_lookup(table, test_utils.random_bits(16, seed=seed).reshape(4, 4))


def test_derived_square_table_on_request():
    derived = square_table(2, derived=True)
    assert derived == derive_square_table(test_utils.string_table(), 4)
    assert square_table(2, side=2) == derive_square_table(test_utils.string_table(), 2)


def test_square_table_without_pybdm(monkeypatch, caplog):
    monkeypatch.setitem(sys.modules, "pybdm.utils", None)
    assert pybdm_square_table() is None
    assert "Cannot load CTM-B2-D4x4" in caplog.text
    # the cached table may be pybdm's, so build a fresh one
    table = square_table.__wrapped__(2)
    assert table == derive_square_table(test_utils.string_table(), 4)
    assert "Falling back" in caplog.text
