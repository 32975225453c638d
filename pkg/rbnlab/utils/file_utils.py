"""
Reading and writing the text files of a run: network fixtures, CTM tables, CSV tables,
PBM images of evolution diagrams, attractor reports and run manifests.
All writers are deterministic: the same data gives byte-identical files.
"""
import json
import logging
import os
from typing import List

import numpy as np
import pandas as pd

from rbnlab.exceptions import IncompatibleSpecs, MalformedFile, ShapeMismatch
from rbnlab.graphing import AttractorSet, PrestigeVector, TransitionDiagram
from rbnlab.measuring import BlockShape, CtmTable
from rbnlab.simulating import BooleanNetwork, EvolutionDiagram
from rbnlab.speccing import CONFIG_KEYS, RbnParams, RunConfig, format_config_value

MANIFEST_NAME = "run-manifest"
# 35 pixels and their separators stay within the 70 characters plain PBM allows per line
PBM_PIXELS_PER_LINE = 35

logger = logging.getLogger(__name__)


def _write_text(path: str, lines: List[str]):
    with open(path, "w", newline="\n") as f:
        f.write("\n".join(lines) + "\n")
    logger.debug("Wrote %s" % path)


def _content_lines(path: str) -> List[str]:
    with open(path) as f:
        return f.read().splitlines()


def write_network_fixture(net: BooleanNetwork, path: str):
    """Line 1 "N k", then N lines of k wiring indices, then N truth tables as 2^k bits."""
    lines = ["%d %d" % (net.n_nodes, net.in_degree)]
    lines += [" ".join(str(j) for j in row) for row in net.wiring.tolist()]
    lines += ["".join(str(b) for b in row) for row in net.truth_tables.tolist()]
    _write_text(path, lines)


def read_network_fixture(path: str) -> BooleanNetwork:
    """Read a network fixture. Truth table bits may be separated by spaces.
    The bias of the returned network is the fraction of ones in its truth tables."""
    lines = [(i, line.strip()) for i, line in enumerate(_content_lines(path), start=1)]
    lines = [(i, line) for i, line in lines if line and not line.startswith("#")]
    if not lines:
        raise MalformedFile("A network fixture needs a header line \"N k\".")
    header_line, header = lines[0]
    try:
        n, k = [int(v) for v in header.split()]
    except ValueError:
        raise MalformedFile("Expected \"N k\", got %r" % header, line=header_line)
    if len(lines) != 1 + 2 * n:
        raise MalformedFile(
            "A fixture with N=%d has %d content lines, found %d" % (n, 1 + 2 * n, len(lines))
        )
    wiring = []
    for i, line in lines[1 : 1 + n]:
        try:
            row = [int(v) for v in line.split()]
        except ValueError:
            raise MalformedFile("Wiring indices need to be integers: %r" % line, line=i)
        if len(row) != k:
            raise MalformedFile("Expected %d wiring indices, got %d" % (k, len(row)), line=i)
        wiring.append(row)
    tables = []
    for i, line in lines[1 + n :]:
        bits = line.replace(" ", "")
        if len(bits) != 2 ** k or set(bits) - {"0", "1"}:
            raise MalformedFile("Expected a truth table of %d bits, got %r" % (2 ** k, line), line=i)
        tables.append([int(b) for b in bits])
    tables = np.array(tables, dtype=np.uint8)
    try:
        return BooleanNetwork(RbnParams(n, k, float(tables.mean())), wiring, tables)
    except (IncompatibleSpecs, ShapeMismatch) as e:
        raise MalformedFile("Fixture does not describe a valid network: %s" % e)


def write_ctm_table(table: CtmTable, path: str):
    """Header "ctm <string|square> <size>", then "<block> <value>" per entry, values with 17
    significant digits, so reading the file back gives exactly the same table."""
    shape = table.block_shape
    lines = ["ctm %s %d" % (shape.kind, shape.size)]
    lines += [
        "%s %.17g" % (block, value)
        for block, value in sorted(table.entries.items(), key=lambda kv: (len(kv[0]), kv[0]))
    ]
    _write_text(path, lines)


def read_ctm_table(path: str) -> CtmTable:
    lines = _content_lines(path)
    if not lines:
        raise MalformedFile("A CTM table file needs a header line.", line=1)
    header = lines[0].split()
    if len(header) != 3 or header[0] != "ctm" or header[1] not in (
        BlockShape.STRING,
        BlockShape.SQUARE,
    ):
        raise MalformedFile(
            "Expected a header \"ctm <string|square> <size>\", got %r" % lines[0], line=1
        )
    try:
        shape = BlockShape(header[1], int(header[2]))
    except (ValueError, IncompatibleSpecs):
        raise MalformedFile("Invalid block size %r" % header[2], line=1)
    entries = {}
    for i, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 2:
            raise MalformedFile("Expected \"<block> <value>\", got %r" % line, line=i)
        block, raw_value = parts
        if not shape.accepts(block) or set(block) - {"0", "1"}:
            raise MalformedFile("Block %r does not fit a %s table" % (block, shape), line=i)
        try:
            value = float(raw_value)
        except ValueError:
            raise MalformedFile("Value %r is not a number" % raw_value, line=i)
        if not (value > 0 and np.isfinite(value)):
            raise MalformedFile("CTM values need to be positive, not %s" % raw_value, line=i)
        if block in entries:
            raise MalformedFile("Block %r is listed twice" % block, line=i)
        entries[block] = value
    if not entries:
        raise MalformedFile("The CTM table file has no entries.")
    return CtmTable(shape, entries)


def write_csv(frame: pd.DataFrame, path: str):
    frame.to_csv(path, index=False)
    logger.debug("Wrote %d rows to %s" % (len(frame), path))


def successor_frame(diagram: TransitionDiagram) -> pd.DataFrame:
    return pd.DataFrame(
        {"state": np.arange(diagram.n_states), "next": diagram.successor}
    )


def prestige_frame(prestige: PrestigeVector) -> pd.DataFrame:
    return pd.DataFrame({"state": np.arange(prestige.scores.size), "score": prestige.scores})


def write_attractor_report(attractors: AttractorSet, path: str):
    report = {
        "n_attractors": attractors.n_attractors,
        "attractors": [
            {"cycle": cycle, "length": len(cycle), "basin_size": int(basin)}
            for cycle, basin in zip(attractors.cycles, attractors.basin_size)
        ],
        "max_transient_length": int(attractors.transient_length.max()),
    }
    _write_text(path, [json.dumps(report, indent=2)])


def emit_diagram_image(diagram: EvolutionDiagram, path: str):
    """Plain PBM (P1), 1 is a filled pixel. Every diagram row starts a new line, and long rows
    continue over several lines of at most 70 characters."""
    diagram = np.asarray(diagram, dtype=np.uint8)
    if diagram.ndim != 2 or diagram.size == 0:
        raise ShapeMismatch("An image needs a non-empty 2D diagram, got %s" % (diagram.shape,))
    height, width = diagram.shape
    lines = ["P1", "%d %d" % (width, height)]
    for row in diagram.tolist():
        pixels = ["1" if b else "0" for b in row]
        for start in range(0, width, PBM_PIXELS_PER_LINE):
            lines.append(" ".join(pixels[start : start + PBM_PIXELS_PER_LINE]))
    _write_text(path, lines)


def write_run_manifest(directory: str, config: RunConfig, subcommand: str) -> str:
    """The resolved configuration as a config file. Running the subcommand again with
    --config <manifest> reproduces the run."""
    path = os.path.join(directory, MANIFEST_NAME)
    values = config.as_dict()
    lines = ["# rbnlab %s" % subcommand]
    lines += ["%s=%s" % (key, format_config_value(values[key])) for key in CONFIG_KEYS]
    _write_text(path, lines)
    return path
