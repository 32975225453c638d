import logging
import math
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np

from rbnlab.exceptions import (
    IncompatibleSpecs,
    InvalidCodeSequence,
    ShapeMismatch,
)
from rbnlab.speccing import DEFAULT_BLOCK_SIDE, Boundary

"""
Randomness measures on binary strings and matrices: Shannon entropy, LZW compressibility,
and algorithmic complexity estimated by the Block Decomposition Method (BDM).

BDM needs a CTM table (complexity of small blocks, in bits). Tables come from rbnlab.enumerating
or from a table file.
"""

# a missing block gets the table maximum plus this many bits
FALLBACK_MARGIN = 1.0
# widest block for which we keep a dense code -> value lookup array
MAX_DENSE_BITS = 24

logger = logging.getLogger(__name__)


def _as_bits(bits: Union[np.ndarray, Sequence[int], str]) -> np.ndarray:
    if isinstance(bits, str):
        return np.frombuffer(bits.encode("ascii"), dtype=np.uint8) - ord("0")
    return np.asarray(bits, dtype=np.uint8).ravel()


def shannon_entropy(bits: Union[np.ndarray, Sequence[int], str]) -> float:
    """Binary symbol entropy (bits per symbol) from the relative frequency of ones."""
    bits = _as_bits(bits)
    if bits.size == 0:
        raise ShapeMismatch("Entropy of an empty sequence is undefined.")
    q = np.count_nonzero(bits) / bits.size
    if q == 0 or q == 1:
        return 0.0
    return float(-q * math.log2(q) - (1 - q) * math.log2(1 - q))


def flatten(matrix: np.ndarray) -> np.ndarray:
    """Concatenate the rows, top to bottom."""
    matrix = np.asarray(matrix, dtype=np.uint8)
    if matrix.size == 0:
        raise ShapeMismatch("Cannot flatten an empty matrix.")
    return matrix.reshape(-1)


# ---------------------------------------------------------------------------------------
# LZW


class LzwCode(object):
    """The LZW codes of a sequence, and how many bits they cost."""

    codes: List[int]
    total_bits: int

    def __init__(self, codes: List[int], total_bits: int):
        self.codes = codes
        self.total_bits = total_bits

    def __iter__(self):
        return iter((self.codes, self.total_bits))

    def __repr__(self):
        return "LzwCode: <%d codes, %d bits>" % (len(self.codes), self.total_bits)


def lzw_encode(bits: Union[np.ndarray, Sequence[int], str]) -> LzwCode:
    """LZW over the alphabet {0, 1}, starting from the dictionary {"0": 0, "1": 1}.

    Every emitted code costs ceil(log2(dictionary size)) bits, the size being taken before the
    new phrase is added; the last code is charged at the final dictionary size.
    Phrases are tracked as (prefix code, next bit) pairs, so the dictionary never stores strings."""
    symbols = _as_bits(bits).tolist()
    if not symbols:
        raise ShapeMismatch("Cannot LZW-encode an empty sequence.")
    if any(s > 1 for s in symbols):
        raise IncompatibleSpecs("LZW input needs to be binary.")
    phrases: Dict[int, int] = {}
    size = 2
    codes = []
    total_bits = 0
    current = symbols[0]
    for symbol in symbols[1:]:
        extended = phrases.get(current * 2 + symbol)
        if extended is not None:
            current = extended
            continue
        codes.append(current)
        total_bits += (size - 1).bit_length()
        phrases[current * 2 + symbol] = size
        size += 1
        current = symbol
    codes.append(current)
    total_bits += (size - 1).bit_length()
    return LzwCode(codes, total_bits)


def lzw_decode(codes: Sequence[int]) -> np.ndarray:
    """Invert lzw_encode, including the case of a code that refers to the phrase being built."""
    codes = list(codes)
    if not codes:
        raise InvalidCodeSequence("An LZW code sequence has at least one code.")
    dictionary: List[str] = ["0", "1"]
    if codes[0] not in (0, 1):
        raise InvalidCodeSequence("The first code needs to be 0 or 1, not %s" % codes[0])
    previous = dictionary[codes[0]]
    output = [previous]
    for position, code in enumerate(codes[1:], start=1):
        if 0 <= code < len(dictionary):
            entry = dictionary[code]
        elif code == len(dictionary):
            entry = previous + previous[0]
        else:
            raise InvalidCodeSequence(
                "Code %s at position %d exceeds the dictionary size (%d)"
                % (code, position, len(dictionary))
            )
        output.append(entry)
        dictionary.append(previous + entry[0])
        previous = entry
    return _as_bits("".join(output))


def compressibility_rate(bits: Union[np.ndarray, Sequence[int], str]) -> float:
    """LZW-encoded length divided by the original length, both in bits."""
    bits = _as_bits(bits)
    if bits.size == 0:
        raise ShapeMismatch("Compressibility of an empty sequence is undefined.")
    return lzw_encode(bits).total_bits / bits.size


# ---------------------------------------------------------------------------------------
# CTM tables and BDM


class BlockShape(object):
    """Either strings of up to `size` bits, or square blocks of side `size`."""

    STRING = "string"
    SQUARE = "square"

    kind: str
    size: int

    def __init__(self, kind: str, size: int):
        if kind not in (self.STRING, self.SQUARE):
            raise IncompatibleSpecs("Unknown block shape %r" % kind)
        if size < 1:
            raise IncompatibleSpecs("Block size needs to be positive, not %s" % size)
        self.kind = kind
        self.size = int(size)

    @classmethod
    def string(cls, max_len: int) -> "BlockShape":
        return cls(cls.STRING, max_len)

    @classmethod
    def square(cls, side: int) -> "BlockShape":
        return cls(cls.SQUARE, side)

    def accepts(self, key: str) -> bool:
        if self.kind == self.SQUARE:
            return len(key) == self.size ** 2
        return 1 <= len(key) <= self.size

    def __eq__(self, other):
        return (
            isinstance(other, BlockShape)
            and self.kind == other.kind
            and self.size == other.size
        )

    def __repr__(self):
        return "%s(%d)" % (self.kind.capitalize(), self.size)


class CtmTable(object):
    """CTM complexity (bits) of small binary blocks.

    Blocks are keyed as row-major strings of 0/1 characters. Blocks that are not in the table get
    the fallback value, which sits above every entry: blocks never produced by the enumerated
    machines are the most complex ones the table knows about."""

    block_shape: BlockShape
    entries: Dict[str, float]
    fallback_value: float

    def __init__(
        self, block_shape: BlockShape, entries: Dict[str, float], fallback_value: float = None
    ):
        if not entries:
            raise IncompatibleSpecs("A CTM table needs at least one entry.")
        for key, value in entries.items():
            if not block_shape.accepts(key) or set(key) - {"0", "1"}:
                raise ShapeMismatch(
                    "Block %r does not fit a %s table" % (key, block_shape)
                )
            if not (value > 0 and math.isfinite(value)):
                raise IncompatibleSpecs(
                    "CTM values need to be positive, found %s for block %r" % (value, key)
                )
        max_value = max(entries.values())
        if fallback_value is None:
            fallback_value = max_value + FALLBACK_MARGIN
        if fallback_value < max_value:
            raise IncompatibleSpecs(
                "The fallback value (%s) lies below the table maximum (%s)"
                % (fallback_value, max_value)
            )
        self.block_shape = block_shape
        self.entries = dict(entries)
        self.fallback_value = float(fallback_value)
        self._dense: Dict[int, np.ndarray] = {}

    def dense_values(self, n_bits: int) -> np.ndarray:
        """Values of all blocks of n_bits bits, indexed by the block read as a big-endian integer."""
        if n_bits > MAX_DENSE_BITS:
            raise ShapeMismatch(
                "Blocks of %d bits are too wide for a dense lookup (max %d)"
                % (n_bits, MAX_DENSE_BITS)
            )
        if n_bits not in self._dense:
            values = np.full(2 ** n_bits, self.fallback_value, dtype=np.float64)
            for key, value in self.entries.items():
                if len(key) == n_bits:
                    values[int(key, 2)] = value
            self._dense[n_bits] = values
        return self._dense[n_bits]

    def values_for_codes(self, codes: np.ndarray, n_bits: int) -> np.ndarray:
        return self.dense_values(n_bits)[codes]

    def __len__(self):
        return len(self.entries)

    def __eq__(self, other):
        return (
            isinstance(other, CtmTable)
            and self.block_shape == other.block_shape
            and self.entries == other.entries
            and self.fallback_value == other.fallback_value
        )

    def __repr__(self):
        return "CtmTable: <%s, %d entries, fallback %.4f>" % (
            self.block_shape,
            len(self.entries),
            self.fallback_value,
        )


def block_key(block: Union[np.ndarray, Sequence[int], str]) -> str:
    if isinstance(block, str):
        return block
    return "".join("1" if b else "0" for b in np.asarray(block, dtype=np.uint8).ravel())


def ctm_lookup(table: CtmTable, block: Union[np.ndarray, Sequence[int], str]) -> float:
    """CTM value of a block, or the fallback value for blocks not in the table."""
    shape = table.block_shape
    if not isinstance(block, str):
        block = np.asarray(block)
        if shape.kind == BlockShape.SQUARE and block.shape != (shape.size, shape.size):
            raise ShapeMismatch(
                "Block of shape %s does not fit a %s table" % (block.shape, shape)
            )
        if shape.kind == BlockShape.STRING and block.ndim != 1:
            raise ShapeMismatch(
                "Block of shape %s does not fit a %s table" % (block.shape, shape)
            )
    key = block_key(block)
    if not shape.accepts(key):
        raise ShapeMismatch("Block %r does not fit a %s table" % (key, shape))
    return table.entries.get(key, table.fallback_value)


class BlockDecomposition(object):
    """Distinct blocks of an object and their multiplicities.

    Blocks are held as integer codes (the block's bits, row-major, big-endian)."""

    n_bits: int
    codes: np.ndarray
    counts: np.ndarray

    def __init__(self, n_bits: int, codes: np.ndarray, counts: np.ndarray):
        self.n_bits = n_bits
        self.codes = codes
        self.counts = counts

    @property
    def pairs(self) -> List[Tuple[str, int]]:
        return [
            (format(int(code), "0%db" % self.n_bits), int(count))
            for code, count in zip(self.codes, self.counts)
        ]

    @property
    def n_blocks(self) -> int:
        return int(self.counts.sum())

    def __len__(self):
        return len(self.codes)

    def __repr__(self):
        return "BlockDecomposition: <%d distinct of %d blocks, %d bits each>" % (
            len(self),
            self.n_blocks,
            self.n_bits,
        )


def _count_codes(blocks: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    n_bits = blocks.shape[1]
    weights = 1 << np.arange(n_bits - 1, -1, -1, dtype=np.int64)
    codes = blocks.astype(np.int64) @ weights
    return np.unique(codes, return_counts=True)


def block_decomposition(
    matrix: np.ndarray,
    block_side: int = DEFAULT_BLOCK_SIDE,
    boundary: Boundary = Boundary.IGNORE,
) -> BlockDecomposition:
    """Cut a matrix into non-overlapping square blocks, from the top-left corner.
    IGNORE drops partial blocks at the right and bottom edges, PAD_ZERO completes them with zeros."""
    matrix = np.asarray(matrix, dtype=np.uint8)
    if matrix.ndim != 2 or matrix.size == 0:
        raise ShapeMismatch("BDM needs a non-empty 2D matrix, got shape %s" % (matrix.shape,))
    if block_side * block_side > 62:
        raise ShapeMismatch("Block side %d is too large" % block_side)
    rows, cols = matrix.shape
    if Boundary(boundary) is Boundary.PAD_ZERO:
        padded_rows = -(-rows // block_side) * block_side
        padded_cols = -(-cols // block_side) * block_side
        matrix = np.pad(matrix, ((0, padded_rows - rows), (0, padded_cols - cols)))
    else:
        if rows < block_side or cols < block_side:
            raise ShapeMismatch(
                "Matrix of shape %s holds no complete %dx%d block"
                % (matrix.shape, block_side, block_side)
            )
        matrix = matrix[: rows - rows % block_side, : cols - cols % block_side]
    r, c = matrix.shape[0] // block_side, matrix.shape[1] // block_side
    blocks = (
        matrix.reshape(r, block_side, c, block_side)
        .transpose(0, 2, 1, 3)
        .reshape(r * c, block_side * block_side)
    )
    codes, counts = _count_codes(blocks)
    return BlockDecomposition(block_side * block_side, codes, counts)


def string_decomposition(
    bits: Union[np.ndarray, Sequence[int], str],
    block_length: int,
    boundary: Boundary = Boundary.IGNORE,
) -> BlockDecomposition:
    """The 1D counterpart of block_decomposition."""
    bits = _as_bits(bits)
    if Boundary(boundary) is Boundary.PAD_ZERO:
        padded = -(-bits.size // block_length) * block_length
        bits = np.pad(bits, (0, padded - bits.size))
    else:
        if bits.size < block_length:
            raise ShapeMismatch(
                "Sequence of length %d holds no complete block of %d"
                % (bits.size, block_length)
            )
        bits = bits[: bits.size - bits.size % block_length]
    if bits.size == 0:
        raise ShapeMismatch("BDM of an empty sequence is undefined.")
    codes, counts = _count_codes(bits.reshape(-1, block_length))
    return BlockDecomposition(block_length, codes, counts)


def bdm_of_decomposition(decomposition: BlockDecomposition, table: CtmTable) -> float:
    """Sum over distinct blocks of CTM(block) + log2(multiplicity)."""
    values = table.values_for_codes(decomposition.codes, decomposition.n_bits)
    return float(values.sum() + np.log2(decomposition.counts).sum())


def bdm(
    matrix: np.ndarray,
    table: CtmTable,
    block_side: int = DEFAULT_BLOCK_SIDE,
    boundary: Boundary = Boundary.IGNORE,
) -> float:
    """Algorithmic complexity of a binary matrix (bits), estimated by block decomposition."""
    if table.block_shape != BlockShape.square(block_side):
        raise ShapeMismatch(
            "BDM with %dx%d blocks needs a Square(%d) table, got %s"
            % (block_side, block_side, block_side, table.block_shape)
        )
    return bdm_of_decomposition(block_decomposition(matrix, block_side, boundary), table)


def bdm_string(
    bits: Union[np.ndarray, Sequence[int], str],
    table: CtmTable,
    block_length: int = 12,
    boundary: Boundary = Boundary.IGNORE,
) -> float:
    """BDM of a binary string, with a String table covering the block length."""
    if table.block_shape.kind != BlockShape.STRING or table.block_shape.size < block_length:
        raise ShapeMismatch(
            "1D BDM with blocks of %d needs a String table of at least that size, got %s"
            % (block_length, table.block_shape)
        )
    return bdm_of_decomposition(string_decomposition(bits, block_length, boundary), table)


class RandomnessReport(object):
    """Entropy (bits per symbol), LZW compressibility rate and BDM (bits) of one object."""

    entropy: float
    lzw_rate: float
    bdm: float

    MEASURES = ("entropy", "lzw_rate", "bdm")

    def __init__(self, entropy: float, lzw_rate: float, bdm: float):
        self.entropy = entropy
        self.lzw_rate = lzw_rate
        self.bdm = bdm

    def as_dict(self) -> Dict[str, float]:
        return {m: getattr(self, m) for m in self.MEASURES}

    def __eq__(self, other):
        return isinstance(other, RandomnessReport) and self.as_dict() == other.as_dict()

    def __repr__(self):
        return "RandomnessReport: <entropy=%.6f, lzw_rate=%.6f, bdm=%.4f>" % (
            self.entropy,
            self.lzw_rate,
            self.bdm,
        )


def randomness_report(
    matrix: np.ndarray,
    table: CtmTable,
    block_side: int = DEFAULT_BLOCK_SIDE,
    boundary: Boundary = Boundary.IGNORE,
) -> RandomnessReport:
    """All three measures: entropy and LZW on the rows concatenated, BDM on the matrix itself."""
    bits = flatten(matrix)
    return RandomnessReport(
        entropy=shannon_entropy(bits),
        lzw_rate=compressibility_rate(bits),
        bdm=bdm(matrix, table, block_side, boundary),
    )
