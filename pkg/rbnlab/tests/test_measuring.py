import math

import numpy as np
import pytest

from rbnlab.exceptions import (
    IncompatibleSpecs,
    InvalidCodeSequence,
    ShapeMismatch,
)
from rbnlab.measuring import (
    BlockShape,
    CtmTable,
    bdm,
    bdm_string,
    block_decomposition,
    compressibility_rate,
    ctm_lookup,
    flatten,
    lzw_decode,
    lzw_encode,
    randomness_report,
    shannon_entropy,
    string_decomposition,
)
from rbnlab.speccing import Boundary
from rbnlab.tests import utils as test_utils


def test_entropy():
    assert shannon_entropy("0000") == 0
    assert shannon_entropy([1, 1, 1]) == 0
    assert shannon_entropy("0101") == 1
    assert shannon_entropy("0001" * 10) == pytest.approx(0.811278, abs=1e-6)


def test_entropy_of_the_complement():
    for seed in range(20):
        bits = test_utils.random_bits(100 + seed, seed=seed)
        bits[: seed * 4] = 1
        assert shannon_entropy(1 - bits) == pytest.approx(shannon_entropy(bits), abs=1e-15)


def test_entropy_of_empty_sequence():
    with pytest.raises(ShapeMismatch):
        shannon_entropy("")


def test_flatten_concatenates_rows():
    assert flatten(np.array([[1, 0], [0, 1]])).tolist() == [1, 0, 0, 1]


def test_lzw_on_constant_string():
    code = lzw_encode("0" * 10)
    assert code.codes == [0, 2, 3, 4]
    assert code.total_bits == 8
    assert compressibility_rate("0" * 10) == 0.8


def test_lzw_single_symbol():
    codes, total_bits = lzw_encode("1")
    assert codes == [1]
    assert total_bits == 1


def test_lzw_decode_self_referencing_code():
    # "000": code 2 is used while it is being defined
    assert lzw_encode("000").codes == [0, 2]
    assert lzw_decode([0, 2]).tolist() == [0, 0, 0]


def test_lzw_roundtrip():
    rng = np.random.RandomState(17)
    for i in range(10 ** 4):
        bits = (rng.random_sample(rng.randint(1, 513)) < rng.random_sample()).astype(np.uint8)
        assert np.array_equal(lzw_decode(lzw_encode(bits).codes), bits)


def test_lzw_invalid_codes():
    with pytest.raises(InvalidCodeSequence):
        lzw_decode([])
    with pytest.raises(InvalidCodeSequence):
        lzw_decode([2])
    with pytest.raises(InvalidCodeSequence) as e_info:
        lzw_decode([0, 1, 9])
    assert "position 2" in str(e_info.value)


def test_lzw_needs_binary_input():
    with pytest.raises(IncompatibleSpecs):
        lzw_encode([0, 1, 2])


def test_random_strings_compress_worse():
    random_rate = compressibility_rate(test_utils.random_bits(10000))
    assert compressibility_rate("01" * 5000) < 0.5 < random_rate


def test_ctm_table_validation():
    with pytest.raises(IncompatibleSpecs):
        CtmTable(BlockShape.string(2), {"0": 1.0, "01": -3.0})
    with pytest.raises(ShapeMismatch):
        CtmTable(BlockShape.string(2), {"011": 1.0})
    with pytest.raises(ShapeMismatch):
        CtmTable(BlockShape.square(2), {"011": 1.0})
    with pytest.raises(IncompatibleSpecs):
        CtmTable(BlockShape.string(2), {"0": 1.0, "1": 3.0}, fallback_value=2.0)


def test_ctm_lookup():
    table = CtmTable(BlockShape.square(2), {"0000": 2.0, "1001": 5.0})
    assert ctm_lookup(table, np.array([[1, 0], [0, 1]])) == 5.0
    assert ctm_lookup(table, "0000") == 2.0
    # missing blocks are one bit above the largest entry
    assert ctm_lookup(table, "0110") == 6.0
    with pytest.raises(ShapeMismatch):
        ctm_lookup(table, np.zeros((3, 3)))


def test_block_decomposition_boundaries():
    matrix = np.ones((5, 5), dtype=np.uint8)
    ignored = block_decomposition(matrix, 4, Boundary.IGNORE)
    assert ignored.pairs == [("1" * 16, 1)]
    padded = block_decomposition(matrix, 4, Boundary.PAD_ZERO)
    assert padded.n_blocks == 4
    assert len(padded) == 4
    with pytest.raises(ShapeMismatch):
        block_decomposition(np.ones((3, 8)), 4, Boundary.IGNORE)


def test_block_decomposition_is_row_major():
    matrix = np.zeros((4, 8), dtype=np.uint8)
    matrix[0, 4] = 1
    decomposition = block_decomposition(matrix)
    assert decomposition.pairs == [("0" * 16, 1), ("1" + "0" * 15, 1)]


def test_bdm_of_constant_matrix():
    table = test_utils.square_table()
    zero_block = ctm_lookup(table, np.zeros((4, 4)))
    assert bdm(np.zeros((8, 8)), table) == pytest.approx(zero_block + 2)


@pytest.mark.parametrize("copies", [2, 3, 5])
def test_bdm_duplication_law(copies):
    table = test_utils.square_table()
    matrix = test_utils.random_bits(64, seed=copies).reshape(8, 8)
    distinct = len(block_decomposition(matrix))
    tiled = np.tile(matrix, (copies, 1))
    assert bdm(tiled, table) == pytest.approx(bdm(matrix, table) + distinct * math.log2(copies))


def test_bdm_ignores_where_the_blocks_are():
    table = test_utils.square_table()
    matrix = test_utils.random_bits(16 * 16, seed=8).reshape(16, 16)
    blocks = matrix.reshape(4, 4, 4, 4).swapaxes(1, 2).reshape(16, 4, 4)
    order = np.random.RandomState(8).permutation(16)
    shuffled = blocks[order].reshape(4, 4, 4, 4).swapaxes(1, 2).reshape(16, 16)
    assert not np.array_equal(shuffled, matrix)
    assert bdm(shuffled, table) == pytest.approx(bdm(matrix, table))


def test_periodic_matrix_is_simpler_than_a_random_one_of_equal_density():
    table = test_utils.square_table()
    tile = np.array([[1, 0, 1, 1], [0, 0, 1, 0], [1, 1, 0, 0], [0, 1, 0, 1]], dtype=np.uint8)
    periodic = np.tile(tile, (8, 8))
    shuffled = np.random.RandomState(5).permutation(periodic.ravel()).reshape(32, 32)
    assert shannon_entropy(shuffled) == shannon_entropy(periodic)
    assert bdm(periodic, table) < bdm(shuffled, table)


def test_bdm_needs_a_fitting_table():
    with pytest.raises(ShapeMismatch):
        bdm(np.zeros((8, 8)), test_utils.string_table())
    with pytest.raises(ShapeMismatch):
        bdm(np.zeros((8, 8)), test_utils.square_table(), block_side=3)


def test_bdm_orders_simple_below_random():
    table = test_utils.square_table()
    stripes = np.tile([[0, 1]], (64, 32))
    assert bdm(stripes, table) < bdm(test_utils.random_bits(64 * 64).reshape(64, 64), table)


def test_bdm_string():
    table = test_utils.string_table()
    assert bdm_string("0" * 12, table, block_length=3) == pytest.approx(
        ctm_lookup(table, "000") + 2
    )
    assert len(string_decomposition("0101101", 3)) == 2
    with pytest.raises(ShapeMismatch):
        bdm_string("0" * 100, table, block_length=table.block_shape.size + 1)


def test_randomness_report():
    table = test_utils.square_table()
    matrix = np.zeros((8, 8), dtype=np.uint8)
    matrix[0, :] = 1
    report = randomness_report(matrix, table)
    assert report.entropy == shannon_entropy(flatten(matrix))
    assert report.lzw_rate == compressibility_rate(flatten(matrix))
    assert report.bdm == bdm(matrix, table)
    assert set(report.as_dict()) == {"entropy", "lzw_rate", "bdm"}
